//! Photon loss on GHZ-encoded qubits.
//!
//! Every photon is lost independently with probability `eta`. Losing any
//! photon of `a|+⟩^⊗N + b|−⟩^⊗N` leaves the remaining photons in the same
//! encoding with a phase flip on `b` half of the time. The phase flip is kept
//! as a frame flag on the qubit rather than applied to the amplitudes.

use crate::bell::BellState;
use crate::error::{Error, Result};
use crate::logical::{
    measure_logical_bell_with_loss, parallel_count, Estimate, LogicalBellLabel, PairChannel,
};
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossChannel {
    eta: f64,
}

impl LossChannel {
    pub fn new(eta: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&eta) || eta.is_nan() {
            return Err(Error::Domain(format!("loss rate {eta} outside [0, 1]")));
        }
        Ok(LossChannel { eta })
    }

    /// `eta = 1 − exp(−gamma t)` for a decay constant and elapsed time.
    pub fn from_decay(gamma: f64, t: f64) -> Result<Self> {
        if gamma < 0.0 || t < 0.0 {
            return Err(Error::Domain("decay constant and time must be nonnegative".into()));
        }
        Self::new(-(-gamma * t).exp_m1())
    }

    pub fn eta(self) -> f64 {
        self.eta
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossyLogicalQubit {
    pub a: Complex64,
    pub b: Complex64,
    pub n: usize,
    pub n_surviving: usize,
    pub z_error: bool,
}

impl LossyLogicalQubit {
    pub fn intact(a: Complex64, b: Complex64, n: usize) -> Self {
        LossyLogicalQubit {
            a,
            b,
            n,
            n_surviving: n,
            z_error: false,
        }
    }

    pub fn lost_photons(&self) -> usize {
        self.n - self.n_surviving
    }

    /// All photons gone: nothing left to measure.
    pub fn is_erased(&self) -> bool {
        self.n_surviving == 0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LossMixture {
    pub branches: Vec<(f64, LossyLogicalQubit)>,
}

impl LossMixture {
    pub fn total_probability(&self) -> f64 {
        self.branches.iter().map(|(p, _)| p).sum()
    }

    /// Probability that at least one photon was lost.
    pub fn loss_probability(&self) -> f64 {
        self.branches
            .iter()
            .filter(|(_, q)| q.lost_photons() > 0)
            .map(|(p, _)| p)
            .sum()
    }
}

fn binomial(n: usize, k: usize) -> f64 {
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Branches of the lossy mixture. Branches of zero weight are omitted, so
/// `0 < eta < 1` yields all `2N + 1` branches.
pub fn loss_mixture(a: Complex64, b: Complex64, n: usize, loss: LossChannel) -> LossMixture {
    let eta = loss.eta();
    let mut branches = Vec::with_capacity(2 * n + 1);
    let intact = (1.0 - eta).powi(n as i32);
    if intact > 0.0 {
        branches.push((intact, LossyLogicalQubit::intact(a, b, n)));
    }
    for k in 1..=n {
        let w = binomial(n, k) * (1.0 - eta).powi((n - k) as i32) * eta.powi(k as i32);
        if w == 0.0 {
            continue;
        }
        for z_error in [false, true] {
            branches.push((
                w / 2.0,
                LossyLogicalQubit {
                    a,
                    b,
                    n,
                    n_surviving: n - k,
                    z_error,
                },
            ));
        }
    }
    LossMixture { branches }
}

/// Loss pattern of `n` photons, one flag per photon.
pub fn sample_lost_photons<R: Rng + ?Sized>(n: usize, eta: f64, rng: &mut R) -> Vec<bool> {
    if eta <= 0.0 {
        return vec![false; n];
    }
    (0..n).map(|_| rng.random::<f64>() < eta).collect()
}

/// Samples one branch of the mixture, returning the qubit and which photons
/// were lost.
pub fn apply_loss_with_pattern<R: Rng + ?Sized>(
    qubit: LossyLogicalQubit,
    loss: LossChannel,
    rng: &mut R,
) -> (LossyLogicalQubit, Vec<bool>) {
    let alive: Vec<usize> = (0..qubit.n_surviving).collect();
    let lost = sample_lost_photons(alive.len(), loss.eta(), rng);
    let k = lost.iter().filter(|l| **l).count();
    let mut out = qubit;
    out.n_surviving -= k;
    if k > 0 && rng.random::<bool>() {
        out.z_error = !out.z_error;
    }
    (out, lost)
}

pub fn apply_loss<R: Rng + ?Sized>(
    qubit: LossyLogicalQubit,
    loss: LossChannel,
    rng: &mut R,
) -> LossyLogicalQubit {
    apply_loss_with_pattern(qubit, loss, rng).0
}

/// Logical Bell measurement success when both qubits suffer loss:
/// `1 − ((1 + η(2 − η)) / 2)^N`.
pub fn bm_success_prob_lossy(n: usize, eta: f64) -> f64 {
    1.0 - ((1.0 + eta * (2.0 - eta)) / 2.0).powi(n as i32)
}

/// Gate-teleportation success when only the input qubit suffers loss:
/// `1 − ((1 + η) / 2)^N`.
pub fn gate_teleport_success_prob(n: usize, eta: f64) -> f64 {
    1.0 - ((1.0 + eta) / 2.0).powi(n as i32)
}

/// Which qubits of the measured pair are exposed to loss.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LossSides {
    Both,
    InputOnly,
}

const TAG_LOSSY_BM: u64 = 0x4c53;

/// Monte Carlo logical Bell measurement with per-photon loss. Pair `i` fails
/// outright if either of its photons is missing; surviving pairs go through
/// the standard device.
pub fn mc_bm_success(
    n: usize,
    loss: LossChannel,
    sides: LossSides,
    trials: u64,
    seed: u64,
) -> Result<Estimate> {
    if trials == 0 {
        return Err(Error::Domain("trials must be at least 1".into()));
    }
    let labels = LogicalBellLabel::all(n)?;
    let channel = PairChannel::standard();
    let tag = TAG_LOSSY_BM ^ ((sides == LossSides::Both) as u64) << 20;
    let hits = parallel_count(seed, tag, trials, |r| {
        let label = labels[r.random_range(0..BellState::ALL.len())];
        let mut lost = sample_lost_photons(n, loss.eta(), r);
        if sides == LossSides::Both {
            for (l, other) in lost.iter_mut().zip(sample_lost_photons(n, loss.eta(), r)) {
                *l |= other;
            }
        }
        Ok(measure_logical_bell_with_loss(label, &channel, Some(&lost), r)?
            .outcome
            .is_some())
    })?;
    Ok(Estimate::from_counts(hits, trials))
}

pub fn mc_bm_success_lossy(n: usize, eta: f64, trials: u64, seed: u64) -> Result<Estimate> {
    mc_bm_success(n, LossChannel::new(eta)?, LossSides::Both, trials, seed)
}

pub fn mc_gate_teleport_success(n: usize, eta: f64, trials: u64, seed: u64) -> Result<Estimate> {
    mc_bm_success(n, LossChannel::new(eta)?, LossSides::InputOnly, trials, seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;

    fn one() -> Complex64 {
        Complex64::new(1.0, 0.0)
    }
    fn zero() -> Complex64 {
        Complex64::new(0.0, 0.0)
    }

    #[test]
    fn channel_validation() {
        assert!(LossChannel::new(-0.1).is_err());
        assert!(LossChannel::new(1.1).is_err());
        assert!(LossChannel::new(f64::NAN).is_err());
        let c = LossChannel::from_decay(2.0, 0.5).unwrap();
        assert!((c.eta() - (1.0 - (-1.0f64).exp())).abs() < 1e-15);
        assert_eq!(LossChannel::from_decay(0.0, 3.0).unwrap().eta(), 0.0);
    }

    #[test]
    fn mixture_limits() {
        let m = loss_mixture(one(), zero(), 3, LossChannel::new(0.0).unwrap());
        assert_eq!(m.branches.len(), 1);
        assert_eq!(m.branches[0].0, 1.0);
        assert_eq!(m.branches[0].1.n_surviving, 3);
        let m = loss_mixture(one(), zero(), 3, LossChannel::new(1.0).unwrap());
        assert!(m.branches.iter().all(|(_, q)| q.is_erased()));
        assert!((m.total_probability() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn mixture_weights_n2() {
        let m = loss_mixture(one(), zero(), 2, LossChannel::new(0.1).unwrap());
        assert_eq!(m.branches.len(), 5);
        let w = |k: usize, z: bool| -> f64 {
            m.branches
                .iter()
                .filter(|(_, q)| q.lost_photons() == k && (k == 0 || q.z_error == z))
                .map(|(p, _)| p)
                .sum()
        };
        assert!((w(0, false) - 0.81).abs() < 1e-12);
        assert!((w(1, false) - 0.09).abs() < 1e-12);
        assert!((w(1, true) - 0.09).abs() < 1e-12);
        assert!((w(2, false) + w(2, true) - 0.01).abs() < 1e-12);
    }

    #[test]
    fn mixture_normalization_grid() {
        for n in 1..=64 {
            for step in 0..=20 {
                let eta = step as f64 * 0.05;
                let m = loss_mixture(one(), zero(), n, LossChannel::new(eta).unwrap());
                assert!((m.total_probability() - 1.0).abs() < 1e-12, "n={n} eta={eta}");
                let expect = 1.0 - (1.0 - eta).powi(n as i32);
                assert!((m.loss_probability() - expect).abs() < 1e-12);
                if step > 0 && step < 20 {
                    assert_eq!(m.branches.len(), 2 * n + 1);
                }
            }
        }
    }

    #[test]
    fn sampled_loss_frequencies() {
        let q = LossyLogicalQubit::intact(one(), zero(), 4);
        let ch = LossChannel::new(0.1).unwrap();
        let mut r = stream(2, &[]);
        let trials = 100_000;
        let mut intact = 0u32;
        let mut lossy = 0u32;
        let mut z = 0u32;
        for _ in 0..trials {
            let out = apply_loss(q, ch, &mut r);
            if out.lost_photons() == 0 {
                intact += 1;
                assert!(!out.z_error);
            } else {
                lossy += 1;
                z += out.z_error as u32;
            }
        }
        let p = 0.9f64.powi(4);
        let f = intact as f64 / trials as f64;
        assert!((f - p).abs() < 4.0 * (p * (1.0 - p) / trials as f64).sqrt());
        let fz = z as f64 / lossy as f64;
        assert!((fz - 0.5).abs() < 4.0 * (0.25 / lossy as f64).sqrt());
        let mut r = stream(3, &[]);
        let q0 = apply_loss(q, LossChannel::new(0.0).unwrap(), &mut r);
        assert_eq!(q0, q);
    }

    #[test]
    fn closed_form_values() {
        assert_eq!(bm_success_prob_lossy(4, 0.0), 0.9375);
        assert!((bm_success_prob_lossy(4, 0.1) - 0.874666299375).abs() < 1e-12);
        assert!((gate_teleport_success_prob(4, 0.1) - 0.90849375).abs() < 1e-12);
        for n in [1, 4, 16, 80] {
            assert_eq!(bm_success_prob_lossy(n, 1.0), 0.0);
            assert_eq!(gate_teleport_success_prob(n, 1.0), 0.0);
            assert_eq!(gate_teleport_success_prob(n, 0.0), 1.0 - 0.5f64.powi(n as i32));
        }
    }

    #[test]
    fn k_fail_sum_matches_closed_form() {
        // Σ_k C(N,k) (1−η)^{2(N−k)} [η(2−η)]^k (1/2)^{N−k} is the failure probability.
        for n in [1usize, 2, 5, 9] {
            for eta in [0.0, 0.05, 0.3, 0.9] {
                let fail: f64 = (0..=n)
                    .map(|k| {
                        binomial(n, k)
                            * (1.0f64 - eta).powi(2 * (n - k) as i32)
                            * (eta * (2.0 - eta)).powi(k as i32)
                            * 0.5f64.powi((n - k) as i32)
                    })
                    .sum();
                assert!((1.0 - fail - bm_success_prob_lossy(n, eta)).abs() < 1e-12);
                let fail1: f64 = (0..=n)
                    .map(|k| {
                        binomial(n, k)
                            * (1.0f64 - eta).powi((n - k) as i32)
                            * eta.powi(k as i32)
                            * 0.5f64.powi((n - k) as i32)
                    })
                    .sum();
                assert!((1.0 - fail1 - gate_teleport_success_prob(n, eta)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn monotonicity_and_dominance() {
        for n in 1..=64usize {
            for step in 0..20 {
                let e0 = step as f64 * 0.05;
                let e1 = e0 + 0.05;
                // strict ordering is only resolvable away from 1 in double precision
                let (lo, hi) = (bm_success_prob_lossy(n, e1), bm_success_prob_lossy(n, e0));
                assert!(lo < hi || (lo <= hi && hi > 1.0 - 1e-12));
                if step > 0 {
                    let (a, b) = (bm_success_prob_lossy(n + 1, e0), bm_success_prob_lossy(n, e0));
                    assert!(a > b || (a >= b && b > 1.0 - 1e-12));
                    let g = gate_teleport_success_prob(n, e0);
                    assert!(g > b || (g >= b && b > 1.0 - 1e-12));
                }
            }
        }
    }

    #[test]
    fn mc_small_cases() {
        let e = mc_bm_success_lossy(1, 0.5, 1_000_000, 4).unwrap();
        assert!(e.within_sigma(0.125, 4.0), "{e:?}");
        let e = mc_bm_success_lossy(16, 0.05, 100_000, 4).unwrap();
        assert!(e.within_sigma(bm_success_prob_lossy(16, 0.05), 4.0), "{e:?}");
        let e = mc_gate_teleport_success(4, 0.1, 100_000, 4).unwrap();
        assert!(e.within_sigma(0.90849375, 4.0), "{e:?}");
        assert_eq!(
            mc_bm_success_lossy(3, 0.2, 10_000, 8).unwrap(),
            mc_bm_success_lossy(3, 0.2, 10_000, 8).unwrap()
        );
    }
}
