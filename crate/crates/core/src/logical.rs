//! Logical Bell measurement on N-photon GHZ-encoded qubits.
//!
//! With `|0_L⟩ = |+⟩^⊗N` and `|1_L⟩ = |−⟩^⊗N`, every logical Bell state is an
//! equal-weight superposition of strings of pairwise Bell states: Φ-family
//! inputs contain only Φ± pairs, Ψ-family only Ψ± pairs, and the number of
//! Minus pairs has the parity of the logical sign. Running the standard device
//! on each pair `(i, i')` and counting Minus outcomes therefore names the
//! logical state unless every pair lands on a Plus state.

use crate::bell::{BellState, Family, Sign};
use crate::error::{Error, Result};
use crate::photonic::{
    click_distribution, diagonal, evolve, BsDevice, BsInput, BsOutcome, ClickPattern,
    TwoPhotonState,
};
use crate::rng::{self, SimRng};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;

/// Largest photon number for which decompositions are enumerated.
pub const MAX_ENUMERATED_N: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct LogicalBellLabel {
    pub family: Family,
    pub sign: Sign,
    pub n: usize,
}

impl LogicalBellLabel {
    pub fn new(family: Family, sign: Sign, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Domain("photons per qubit must be at least 1".into()));
        }
        Ok(LogicalBellLabel { family, sign, n })
    }

    pub fn from_bell(state: BellState, n: usize) -> Result<Self> {
        Self::new(state.family(), state.sign(), n)
    }

    pub fn bell(self) -> BellState {
        BellState::new(self.family, self.sign)
    }

    /// The four logical Bell labels for `n` photons per qubit.
    pub fn all(n: usize) -> Result<[LogicalBellLabel; 4]> {
        let mut out = [Self::new(Family::Phi, Sign::Plus, n)?; 4];
        for (slot, b) in out.iter_mut().zip(BellState::ALL) {
            *slot = Self::from_bell(b, n)?;
        }
        Ok(out)
    }
}

impl fmt::Display for LogicalBellLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}_({})", self.bell(), self.n)
    }
}

/// Equal-weight expansion of a logical Bell state over pairwise Bell strings.
///
/// Each term is stored as a bitmask whose bit `i` is set when pair `i` carries
/// the Minus state of the family.
#[derive(Debug, Clone, PartialEq)]
pub struct PairwiseDecomposition {
    pub label: LogicalBellLabel,
    pub terms: Vec<u32>,
}

impl PairwiseDecomposition {
    /// Amplitude shared by every term, `2^{-(N-1)/2}`.
    pub fn amplitude(&self) -> f64 {
        (self.terms.len() as f64).sqrt().recip()
    }

    pub fn weight(&self) -> f64 {
        1.0 / self.terms.len() as f64
    }

    pub fn pair_labels(&self, term: u32) -> Vec<BellState> {
        term_labels(self.label, term)
    }
}

fn term_labels(label: LogicalBellLabel, term: u32) -> Vec<BellState> {
    (0..label.n)
        .map(|i| BellState::new(label.family, Sign::from_parity(term >> i & 1 == 1)))
        .collect()
}

pub fn expand_logical_bell(label: LogicalBellLabel) -> Result<PairwiseDecomposition> {
    if label.n > MAX_ENUMERATED_N {
        return Err(Error::ResourceBound {
            n: label.n,
            max: MAX_ENUMERATED_N,
        });
    }
    let want_odd = label.sign.is_minus();
    let terms = (0..1u32 << label.n)
        .filter(|t| (t.count_ones() % 2 == 1) == want_odd)
        .collect();
    Ok(PairwiseDecomposition { label, terms })
}

/// Outcome of the standard device for each pairwise Bell state, derived from
/// the device's outcome table.
#[derive(Debug, Clone, PartialEq)]
pub struct PairChannel {
    outcomes: [Vec<(BsOutcome, f64)>; 4],
}

impl PairChannel {
    pub fn from_device(device: &BsDevice) -> Result<Self> {
        let mut outcomes: [Vec<(BsOutcome, f64)>; 4] = Default::default();
        for b in BellState::ALL {
            let tol = crate::photonic::ZERO_TOL;
            let mut dist: Vec<(BsOutcome, f64)> = device
                .outcome_distribution(&BsInput::Bell(b))?
                .into_iter()
                .filter(|(_, p)| *p > tol)
                .collect();
            // Amplitudes that vanish analytically leave certain outcomes.
            if let Some(&(o, _)) = dist.iter().find(|(_, p)| *p > 1.0 - tol) {
                dist = vec![(o, 1.0)];
            }
            outcomes[b.index()] = dist;
        }
        Ok(PairChannel { outcomes })
    }

    pub fn standard() -> Self {
        Self::from_device(&BsDevice::standard()).expect("standard device is consistent")
    }

    pub fn fail_probability(&self, b: BellState) -> f64 {
        self.outcomes[b.index()]
            .iter()
            .filter(|(o, _)| !o.is_success())
            .map(|(_, p)| p)
            .sum()
    }

    pub fn outcomes(&self, b: BellState) -> &[(BsOutcome, f64)] {
        &self.outcomes[b.index()]
    }

    pub fn sample<R: Rng + ?Sized>(&self, b: BellState, rng: &mut R) -> BsOutcome {
        let dist = &self.outcomes[b.index()];
        if dist.len() == 1 {
            return dist[0].0;
        }
        let mut u: f64 = rng.random();
        for (o, p) in dist {
            if u < *p {
                return *o;
            }
            u -= p;
        }
        dist[dist.len() - 1].0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LogicalBmResult {
    /// `None` on failure.
    pub outcome: Option<LogicalBellLabel>,
    pub per_pair: Vec<BsOutcome>,
    pub n_phiminus: usize,
    pub n_psiminus: usize,
}

/// Parity rule: the family is read from which Minus outcome appears, the sign
/// from whether it appeared an odd number of times.
pub fn classify(per_pair: &[BsOutcome]) -> Result<Option<LogicalBellLabel>> {
    if per_pair.is_empty() {
        return Err(Error::Domain("at least one pair is required".into()));
    }
    let mut phi = 0usize;
    let mut psi = 0usize;
    for o in per_pair {
        match o {
            BsOutcome::Fail => {}
            BsOutcome::Identified(BellState::PhiMinus) => phi += 1,
            BsOutcome::Identified(BellState::PsiMinus) => psi += 1,
            BsOutcome::Identified(_) => return Err(Error::InconsistentRun),
        }
    }
    let n = per_pair.len();
    match (phi, psi) {
        (0, 0) => Ok(None),
        (k, 0) => LogicalBellLabel::new(Family::Phi, Sign::from_parity(k % 2 == 1), n).map(Some),
        (0, k) => LogicalBellLabel::new(Family::Psi, Sign::from_parity(k % 2 == 1), n).map(Some),
        _ => Err(Error::InconsistentRun),
    }
}

fn result_from_pairs(per_pair: Vec<BsOutcome>) -> Result<LogicalBmResult> {
    let outcome = classify(&per_pair)?;
    let n_phiminus = per_pair.iter().filter(|o| **o == BsOutcome::PHI_MINUS).count();
    let n_psiminus = per_pair.iter().filter(|o| **o == BsOutcome::PSI_MINUS).count();
    Ok(LogicalBmResult {
        outcome,
        per_pair,
        n_phiminus,
        n_psiminus,
    })
}

/// Samples a uniformly weighted decomposition term with the label's parity.
pub fn sample_term<R: Rng + ?Sized>(label: LogicalBellLabel, rng: &mut R) -> Vec<BellState> {
    let mut odd = false;
    let mut out = Vec::with_capacity(label.n);
    for i in 0..label.n {
        let minus = if i + 1 == label.n {
            odd != label.sign.is_minus()
        } else {
            rng.random::<bool>()
        };
        odd ^= minus;
        out.push(BellState::new(label.family, Sign::from_parity(minus)));
    }
    out
}

/// One logical Bell measurement with pair `i` failing outright when
/// `lost[i]` is set (a photon of that pair is missing).
pub fn measure_logical_bell_with_loss<R: Rng + ?Sized>(
    label: LogicalBellLabel,
    channel: &PairChannel,
    lost: Option<&[bool]>,
    rng: &mut R,
) -> Result<LogicalBmResult> {
    let term = sample_term(label, rng);
    let per_pair = term
        .into_iter()
        .enumerate()
        .map(|(i, b)| {
            if lost.is_some_and(|l| l[i]) {
                BsOutcome::Fail
            } else {
                channel.sample(b, rng)
            }
        })
        .collect();
    result_from_pairs(per_pair)
}

pub fn measure_logical_bell<R: Rng + ?Sized>(
    label: LogicalBellLabel,
    channel: &PairChannel,
    rng: &mut R,
) -> Result<LogicalBmResult> {
    measure_logical_bell_with_loss(label, channel, None, rng)
}

/// Which input the exact success probability refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BmInput {
    Label(BellState),
    UniformAverage,
}

/// Success probability by enumeration of decomposition terms.
pub fn exact_success_probability(input: BmInput, n: usize, channel: &PairChannel) -> Result<f64> {
    match input {
        BmInput::Label(b) => {
            let d = expand_logical_bell(LogicalBellLabel::from_bell(b, n)?)?;
            let w = d.weight();
            Ok(d.terms
                .iter()
                .map(|&t| {
                    let fail: f64 = d
                        .pair_labels(t)
                        .into_iter()
                        .map(|p| channel.fail_probability(p))
                        .product();
                    w * (1.0 - fail)
                })
                .sum())
        }
        BmInput::UniformAverage => {
            let mut total = 0.0;
            for b in BellState::ALL {
                total += exact_success_probability(BmInput::Label(b), n, channel)?;
            }
            Ok(total / 4.0)
        }
    }
}

/// Exact probabilities of `(declared outcome, #PhiMinus, #PsiMinus)` for one
/// input label, by enumeration of terms and per-pair outcomes.
pub fn exact_cell_distribution(
    label: LogicalBellLabel,
    channel: &PairChannel,
) -> Result<BTreeMap<(Option<LogicalBellLabel>, usize, usize), f64>> {
    let d = expand_logical_bell(label)?;
    let mut cells = BTreeMap::new();
    for &t in &d.terms {
        // Distribution over (phi count, psi count) for this term.
        let mut partial: BTreeMap<(usize, usize), f64> = BTreeMap::new();
        partial.insert((0, 0), d.weight());
        for b in d.pair_labels(t) {
            let mut next = BTreeMap::new();
            for (&(phi, psi), &p) in &partial {
                for &(o, q) in channel.outcomes(b) {
                    let key = match o {
                        BsOutcome::Identified(BellState::PhiMinus) => (phi + 1, psi),
                        BsOutcome::Identified(BellState::PsiMinus) => (phi, psi + 1),
                        _ => (phi, psi),
                    };
                    *next.entry(key).or_insert(0.0) += p * q;
                }
            }
            partial = next;
        }
        for ((phi, psi), p) in partial {
            let mut pairs = vec![BsOutcome::Fail; label.n];
            for slot in pairs.iter_mut().take(phi) {
                *slot = BsOutcome::PHI_MINUS;
            }
            for slot in pairs.iter_mut().skip(phi).take(psi) {
                *slot = BsOutcome::PSI_MINUS;
            }
            let outcome = classify(&pairs)?;
            *cells.entry((outcome, phi, psi)).or_insert(0.0) += p;
        }
    }
    Ok(cells)
}

/// Largest photon number for the photon-level cross-check.
pub const MAX_PHOTON_LEVEL_N: usize = 6;

/// Outcome distribution computed from the photon-level GHZ state itself,
/// without the pairwise decomposition.
///
/// The 2N-photon logical Bell state is `(Π_i |x⟩_i|y⟩_i' ± Π_i |x̄⟩_i|ȳ⟩_i')/√2`,
/// a sum of two products over pairs. Each pair product is sent through the
/// device's mode unitary, and joint click amplitudes are summed coherently
/// before squaring.
pub fn photon_level_distribution(
    label: LogicalBellLabel,
    device: &BsDevice,
) -> Result<BTreeMap<Option<LogicalBellLabel>, f64>> {
    if label.n > MAX_PHOTON_LEVEL_N {
        return Err(Error::ResourceBound {
            n: label.n,
            max: MAX_PHOTON_LEVEL_N,
        });
    }
    let (x, y) = match label.family {
        Family::Phi => (0, 0),
        Family::Psi => (0, 1),
    };
    let sign = if label.sign.is_minus() { -1.0 } else { 1.0 };
    let branch = |a: usize, b: usize| -> Result<Vec<((usize, usize), num_complex::Complex64)>> {
        let s = TwoPhotonState::product(diagonal(a), diagonal(b));
        Ok(evolve(&s, &device.network.unitary)?.iter().collect())
    };
    let first = branch(x, y)?;
    let second = branch(1 - x, 1 - y)?;
    let mut keys: Vec<(usize, usize)> = first.iter().chain(&second).map(|(k, _)| *k).collect();
    keys.sort_unstable();
    keys.dedup();
    let lookup = |v: &[((usize, usize), num_complex::Complex64)], k: (usize, usize)| {
        v.iter()
            .find(|(kk, _)| *kk == k)
            .map_or(num_complex::Complex64::new(0.0, 0.0), |(_, a)| *a)
    };
    let a1: Vec<_> = keys.iter().map(|&k| lookup(&first, k)).collect();
    let a2: Vec<_> = keys.iter().map(|&k| lookup(&second, k)).collect();
    let patterns: Vec<ClickPattern> = keys
        .iter()
        .map(|&(i, j)| {
            let mut s = TwoPhotonState::new(device.network.unitary.dim());
            s.add(i, j, num_complex::Complex64::new(1.0, 0.0));
            *click_distribution(&s).keys().next().expect("one pattern")
        })
        .collect();

    let amp = std::f64::consts::FRAC_1_SQRT_2;
    let mut dist = BTreeMap::new();
    let m = keys.len();
    let mut idx = vec![0usize; label.n];
    loop {
        let mut p1 = num_complex::Complex64::new(amp, 0.0);
        let mut p2 = num_complex::Complex64::new(amp * sign, 0.0);
        for &k in &idx {
            p1 *= a1[k];
            p2 *= a2[k];
        }
        let p = (p1 + p2).norm_sqr();
        if p > 0.0 {
            let per_pair: Vec<BsOutcome> =
                idx.iter().map(|&k| device.table.outcome(patterns[k])).collect();
            *dist.entry(classify(&per_pair)?).or_insert(0.0) += p;
        }
        // odometer over output configurations
        let mut pos = 0;
        loop {
            if pos == label.n {
                return Ok(dist);
            }
            idx[pos] += 1;
            if idx[pos] < m {
                break;
            }
            idx[pos] = 0;
            pos += 1;
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub stderr: f64,
    pub trials: u64,
    pub successes: u64,
}

impl Estimate {
    pub fn from_counts(successes: u64, trials: u64) -> Self {
        let mean = if trials == 0 {
            0.0
        } else {
            successes as f64 / trials as f64
        };
        let stderr = if trials == 0 {
            0.0
        } else {
            (mean * (1.0 - mean) / trials as f64).sqrt()
        };
        Estimate {
            mean,
            stderr,
            trials,
            successes,
        }
    }

    /// Whether `value` lies within `k` binomial standard deviations, using the
    /// standard deviation implied by `value` itself so that exact zeros and
    /// ones are handled.
    pub fn within_sigma(&self, value: f64, k: f64) -> bool {
        let sigma = (value * (1.0 - value) / self.trials as f64).sqrt();
        (self.mean - value).abs() <= k * sigma + 1e-15
    }
}

/// Counts successes of `trial` over `trials` draws split into fixed chunks.
pub(crate) fn parallel_count<F>(seed: u64, tag: u64, trials: u64, trial: F) -> Result<u64>
where
    F: Fn(&mut SimRng) -> Result<bool> + Sync,
{
    rng::chunks(trials)
        .into_par_iter()
        .map(|(chunk, size)| {
            let mut r = rng::stream(seed, &[tag, chunk]);
            let mut hits = 0u64;
            for _ in 0..size {
                if trial(&mut r)? {
                    hits += 1;
                }
            }
            Ok(hits)
        })
        .collect::<Result<Vec<u64>>>()
        .map(|v| v.into_iter().sum())
}

const TAG_LOGICAL_BM: u64 = 0x4c42;

/// Monte Carlo success rate over uniformly random logical Bell inputs.
pub fn monte_carlo_success(n: usize, trials: u64, seed: u64) -> Result<Estimate> {
    if trials == 0 {
        return Err(Error::Domain("trials must be at least 1".into()));
    }
    let labels = LogicalBellLabel::all(n)?;
    let channel = PairChannel::standard();
    let hits = parallel_count(seed, TAG_LOGICAL_BM, trials, |r| {
        let label = labels[r.random_range(0..4)];
        Ok(measure_logical_bell(label, &channel, r)?.outcome.is_some())
    })?;
    Ok(Estimate::from_counts(hits, trials))
}
