//! Teleportation and gates on GHZ-encoded qubits.
//!
//! Protocols run at logical-amplitude granularity: a small state vector over
//! logical qubits is projected onto the logical Bell state that the
//! measurement names, while the photon-level success statistics come from the
//! logical Bell measurement with per-photon loss flags.

use crate::bell::BellState;
use crate::error::{Error, Result};
use crate::logical::{measure_logical_bell, Estimate, LogicalBellLabel, PairChannel};
use crate::loss::{sample_lost_photons, LossChannel, LossSides};
use crate::rng::{self, SimRng};
use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::FRAC_1_SQRT_2;

/// Largest photon number with an explicit photon-level expansion.
pub const MAX_EXPANSION_N: usize = 10;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// `a|+⟩^⊗N + b|−⟩^⊗N`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogicalQubitState {
    pub a: Complex64,
    pub b: Complex64,
    pub n: usize,
}

impl LogicalQubitState {
    pub fn new(a: Complex64, b: Complex64, n: usize) -> Result<Self> {
        let norm = a.norm_sqr() + b.norm_sqr();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::Domain(format!("amplitudes have norm {norm}, expected 1")));
        }
        if n == 0 {
            return Err(Error::Domain("photons per qubit must be at least 1".into()));
        }
        Ok(LogicalQubitState { a, b, n })
    }

    /// Uniformly random pure state on the Bloch sphere.
    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        let cos_t: f64 = rng.random_range(-1.0..=1.0);
        let phi: f64 = rng.random_range(0.0..std::f64::consts::TAU);
        let half = cos_t.clamp(-1.0, 1.0).acos() / 2.0;
        LogicalQubitState {
            a: c(half.cos()),
            b: Complex64::from_polar(half.sin(), phi),
            n,
        }
    }

    pub fn amplitudes(&self) -> [Complex64; 2] {
        [self.a, self.b]
    }

    /// State vector over the `2^N` H/V photon configurations (bit `i` set
    /// means photon `i` is V).
    pub fn expand(&self) -> Result<Vec<Complex64>> {
        if self.n > MAX_EXPANSION_N {
            return Err(Error::ResourceBound {
                n: self.n,
                max: MAX_EXPANSION_N,
            });
        }
        let scale = FRAC_1_SQRT_2.powi(self.n as i32);
        Ok((0..1usize << self.n)
            .map(|cfg| {
                let sign = if cfg.count_ones() % 2 == 0 { 1.0 } else { -1.0 };
                (self.a + self.b * sign) * scale
            })
            .collect())
    }
}

/// Bit flip: `|+⟩ ↔ |−⟩` on every photon.
pub fn pauli_x(q: &LogicalQubitState) -> LogicalQubitState {
    LogicalQubitState {
        a: q.b,
        b: q.a,
        ..*q
    }
}

/// Phase rotation `{|+⟩, |−⟩} → {|+⟩, e^{iθ}|−⟩}` on a single photon.
pub fn z_rotation(q: &LogicalQubitState, theta: f64) -> LogicalQubitState {
    LogicalQubitState {
        b: q.b * Complex64::from_polar(1.0, theta),
        ..*q
    }
}

/// Photon-level polarization rotator on every mode. In the H/V basis the
/// `|+⟩ ↔ |−⟩` swap is `V → −V`.
pub fn photon_flip_all(expansion: &[Complex64]) -> Vec<Complex64> {
    expansion
        .iter()
        .enumerate()
        .map(|(cfg, a)| if cfg.count_ones() % 2 == 0 { *a } else { -*a })
        .collect()
}

/// Photon-level phase shift of `|−⟩` relative to `|+⟩` on photon `mode` only.
pub fn photon_phase_single(expansion: &[Complex64], n: usize, mode: usize, theta: f64) -> Vec<Complex64> {
    assert!(mode < n);
    let phase = Complex64::from_polar(1.0, theta);
    // single-photon operator in the H/V basis: |+⟩⟨+| + e^{iθ}|−⟩⟨−|
    let p = (c(1.0) + phase) / 2.0;
    let m = (c(1.0) - phase) / 2.0;
    let mut out = vec![c(0.0); expansion.len()];
    let bit = 1usize << mode;
    for (cfg, a) in expansion.iter().enumerate() {
        out[cfg] += p * a;
        out[cfg ^ bit] += m * a;
    }
    out
}

/// Pauli frame correction `X^x Z^z`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct PauliCorrection {
    pub x: bool,
    pub z: bool,
}

impl PauliCorrection {
    pub const I: PauliCorrection = PauliCorrection { x: false, z: false };

    /// Receiver-side correction after teleporting through `Φ+`:
    /// Φ+ → I, Φ− → Z, Ψ+ → X, Ψ− → Z·X.
    pub fn for_outcome(b: BellState) -> Self {
        match b {
            BellState::PhiPlus => PauliCorrection { x: false, z: false },
            BellState::PhiMinus => PauliCorrection { x: false, z: true },
            BellState::PsiPlus => PauliCorrection { x: true, z: false },
            BellState::PsiMinus => PauliCorrection { x: true, z: true },
        }
    }

    /// `H P H`.
    pub fn through_hadamard(self) -> Self {
        PauliCorrection { x: self.z, z: self.x }
    }

    /// `CZ (P1 ⊗ P2) CZ` for the two-qubit frame `(p1, p2)`.
    pub fn through_cz(p1: Self, p2: Self) -> (Self, Self) {
        (
            PauliCorrection {
                x: p1.x,
                z: p1.z ^ p2.x,
            },
            PauliCorrection {
                x: p2.x,
                z: p2.z ^ p1.x,
            },
        )
    }

    /// Applies `X^x Z^z` (Z first, then X) to qubit `q` of a register.
    pub fn apply(self, reg: &mut Register, q: usize) {
        if self.z {
            reg.apply1(q, [[c(1.0), c(0.0)], [c(0.0), c(-1.0)]]);
        }
        if self.x {
            reg.apply1(q, [[c(0.0), c(1.0)], [c(1.0), c(0.0)]]);
        }
    }
}

/// Dense state vector over a few logical qubits; qubit 0 is the most
/// significant bit of the basis index.
#[derive(Debug, Clone, PartialEq)]
pub struct Register {
    pub n_qubits: usize,
    pub amps: Vec<Complex64>,
}

impl Register {
    pub fn new(amps: Vec<Complex64>) -> Self {
        let n_qubits = amps.len().trailing_zeros() as usize;
        assert_eq!(1 << n_qubits, amps.len(), "length must be a power of two");
        Register { n_qubits, amps }
    }

    pub fn tensor(&self, other: &Register) -> Register {
        let mut amps = Vec::with_capacity(self.amps.len() * other.amps.len());
        for a in &self.amps {
            for b in &other.amps {
                amps.push(a * b);
            }
        }
        Register::new(amps)
    }

    fn bit(&self, q: usize) -> usize {
        1 << (self.n_qubits - 1 - q)
    }

    pub fn apply1(&mut self, q: usize, u: [[Complex64; 2]; 2]) {
        let bit = self.bit(q);
        for i in 0..self.amps.len() {
            if i & bit == 0 {
                let (a0, a1) = (self.amps[i], self.amps[i | bit]);
                self.amps[i] = u[0][0] * a0 + u[0][1] * a1;
                self.amps[i | bit] = u[1][0] * a0 + u[1][1] * a1;
            }
        }
    }

    pub fn apply_cz(&mut self, q1: usize, q2: usize) {
        let (b1, b2) = (self.bit(q1), self.bit(q2));
        for (i, a) in self.amps.iter_mut().enumerate() {
            if i & b1 != 0 && i & b2 != 0 {
                *a = -*a;
            }
        }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Projects qubits `(q1, q2)` onto `state` and removes them. Returns the
    /// unnormalized remainder.
    pub fn project_bell(&self, q1: usize, q2: usize, state: BellState) -> Register {
        let (b1, b2) = (self.bit(q1), self.bit(q2));
        let bell = state.amplitudes();
        let rest = self.n_qubits - 2;
        let mut out = vec![c(0.0); 1 << rest];
        for (i, a) in self.amps.iter().enumerate() {
            let x = (i & b1 != 0) as usize;
            let y = (i & b2 != 0) as usize;
            let w = bell[2 * x + y];
            if w == 0.0 {
                continue;
            }
            // compress the remaining bits, preserving order
            let mut j = 0usize;
            for q in 0..self.n_qubits {
                if q == q1 || q == q2 {
                    continue;
                }
                j = (j << 1) | ((i & self.bit(q) != 0) as usize);
            }
            out[j] += a * w;
        }
        Register::new(out)
    }

    pub fn normalized(mut self) -> Register {
        let n = self.norm_sqr().sqrt();
        for a in &mut self.amps {
            *a /= n;
        }
        self
    }
}

/// `|⟨expected|actual⟩|²` for normalized vectors.
pub fn fidelity(expected: &[Complex64], actual: &[Complex64]) -> f64 {
    expected
        .iter()
        .zip(actual)
        .map(|(e, a)| e.conj() * a)
        .sum::<Complex64>()
        .norm_sqr()
}

/// Which resource the teleportation runs through.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GateKind {
    TeleportIdentity,
    Hadamard,
    Cz,
}

/// Logical-amplitude resource state for a gate teleportation.
#[derive(Debug, Clone, PartialEq)]
pub struct GateChannel {
    pub kind: GateKind,
    pub state: Register,
}

impl GateChannel {
    /// `(|00⟩ + |11⟩)/√2`.
    pub fn teleport() -> Self {
        let h = FRAC_1_SQRT_2;
        GateChannel {
            kind: GateKind::TeleportIdentity,
            state: Register::new(vec![c(h), c(0.0), c(0.0), c(h)]),
        }
    }

    /// `|Z⟩ = (|00⟩ + |01⟩ + |10⟩ − |11⟩)/2`.
    pub fn hadamard() -> Self {
        GateChannel {
            kind: GateKind::Hadamard,
            state: Register::new(vec![c(0.5), c(0.5), c(0.5), c(-0.5)]),
        }
    }

    /// `|Z′⟩ = (|0000⟩ + |0011⟩ + |1100⟩ − |1111⟩)/2`.
    pub fn cz() -> Self {
        let mut amps = vec![c(0.0); 16];
        amps[0b0000] = c(0.5);
        amps[0b0011] = c(0.5);
        amps[0b1100] = c(0.5);
        amps[0b1111] = c(-0.5);
        GateChannel {
            kind: GateKind::Cz,
            state: Register::new(amps),
        }
    }

    /// Number of logical qubits the gate acts on.
    pub fn arity(&self) -> usize {
        if self.kind == GateKind::Cz {
            2
        } else {
            1
        }
    }

    /// Channel qubit measured together with input `k`, and the output qubit,
    /// as offsets into the channel register.
    fn wiring(&self, k: usize) -> (usize, usize) {
        match self.kind {
            GateKind::TeleportIdentity | GateKind::Hadamard => (0, 1),
            // |Z′⟩ = Bell pairs (0,1) and (2,3) with CZ on the outputs 1 and 3
            GateKind::Cz => (2 * k, 2 * k + 1),
        }
    }

    /// Frame correction for the measured Bell outcomes.
    pub fn corrections(&self, measured: &[BellState]) -> Vec<PauliCorrection> {
        let base: Vec<_> = measured.iter().map(|b| PauliCorrection::for_outcome(*b)).collect();
        match self.kind {
            GateKind::TeleportIdentity => base,
            GateKind::Hadamard => vec![base[0].through_hadamard()],
            GateKind::Cz => {
                let (p1, p2) = PauliCorrection::through_cz(base[0], base[1]);
                vec![p1, p2]
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GateSuccess {
    /// Logical amplitudes of the output qubit(s), after correction.
    #[serde(skip)]
    pub output: Register,
    pub measured: Vec<BellState>,
    pub corrections: Vec<PauliCorrection>,
    /// A phase flip from photon loss reached the output.
    pub z_error: bool,
    /// Photons per output qubit; always the full encoding size.
    pub n_surviving: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub enum GateOutcome {
    Success(GateSuccess),
    /// The input is consumed.
    Failure,
}

impl GateOutcome {
    pub fn success(&self) -> Option<&GateSuccess> {
        match self {
            GateOutcome::Success(s) => Some(s),
            GateOutcome::Failure => None,
        }
    }
}

const Z_GATE: [[Complex64; 2]; 2] = [
    [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)],
    [Complex64::new(0.0, 0.0), Complex64::new(-1.0, 0.0)],
];

/// Teleports `inputs` through `channel`.
///
/// Loss strikes the inputs (and the measured halves of the channel when
/// `sides` is [`LossSides::Both`]). A lost photon fails its pair in the
/// logical Bell measurement, and each lossy qubit picks up a phase flip half of
/// the time, which is applied to the state before projection. The remaining
/// pairs carry the logical Bell state of the shortened encodings.
pub fn gate_teleport<R: Rng + ?Sized>(
    inputs: &[LogicalQubitState],
    channel: &GateChannel,
    loss: LossChannel,
    sides: LossSides,
    pair_channel: &PairChannel,
    rng: &mut R,
) -> Result<GateOutcome> {
    if inputs.len() != channel.arity() {
        return Err(Error::DimensionMismatch {
            expected: channel.arity(),
            got: inputs.len(),
        });
    }
    let n = inputs[0].n;
    if inputs.iter().any(|q| q.n != n) {
        return Err(Error::Domain("inputs must share the encoding size".into()));
    }
    let k = inputs.len();
    let mut reg = Register::new(vec![c(1.0)]);
    for q in inputs {
        reg = reg.tensor(&Register::new(vec![q.a, q.b]));
    }
    let mut reg = reg.tensor(&channel.state);

    let mut z_error = false;
    let mut lost_pairs = Vec::with_capacity(k);
    for i in 0..k {
        let (partner, _) = channel.wiring(i);
        let mut lost = sample_lost_photons(n, loss.eta(), rng);
        if lost.iter().any(|l| *l) && rng.random::<bool>() {
            reg.apply1(i, Z_GATE);
            z_error ^= true;
        }
        if sides == LossSides::Both {
            let lost_c = sample_lost_photons(n, loss.eta(), rng);
            if lost_c.iter().any(|l| *l) && rng.random::<bool>() {
                reg.apply1(k + partner, Z_GATE);
                z_error ^= true;
            }
            for (a, b) in lost.iter_mut().zip(lost_c) {
                *a |= b;
            }
        }
        lost_pairs.push(lost);
    }

    // Measure each input with its channel partner. Qubit indices shift as
    // measured qubits are removed, so always measure the current front input.
    let mut measured = Vec::with_capacity(k);
    for (i, lost) in lost_pairs.iter().enumerate() {
        let (partner, _) = channel.wiring(i);
        let partner_now = (k - i) + partner - i;
        let mut u: f64 = rng.random();
        let mut chosen = None;
        let mut projected = None;
        for b in BellState::ALL {
            let p = reg.project_bell(0, partner_now, b);
            let w = p.norm_sqr();
            if u < w || b == BellState::PsiMinus {
                chosen = Some(b);
                projected = Some(p);
                break;
            }
            u -= w;
        }
        let bell = chosen.expect("one Bell outcome is always chosen");
        // Pairs with a lost photon fail outright; the rest measure the Bell
        // state of the shortened encodings.
        let surviving = lost.iter().filter(|l| !**l).count();
        if surviving == 0 {
            return Ok(GateOutcome::Failure);
        }
        let label = LogicalBellLabel::from_bell(bell, surviving)?;
        let res = measure_logical_bell(label, pair_channel, rng)?;
        match res.outcome {
            None => return Ok(GateOutcome::Failure),
            Some(l) if l != label => return Err(Error::InconsistentRun),
            Some(_) => {}
        }
        measured.push(bell);
        reg = projected.expect("set with chosen").normalized();
    }

    let corrections = channel.corrections(&measured);
    for (q, p) in corrections.iter().enumerate() {
        p.apply(&mut reg, q);
    }
    Ok(GateOutcome::Success(GateSuccess {
        output: reg,
        measured,
        corrections,
        z_error,
        n_surviving: n,
    }))
}

pub fn teleport<R: Rng + ?Sized>(
    q: &LogicalQubitState,
    loss: LossChannel,
    sides: LossSides,
    rng: &mut R,
) -> Result<GateOutcome> {
    gate_teleport(
        std::slice::from_ref(q),
        &GateChannel::teleport(),
        loss,
        sides,
        &PairChannel::standard(),
        rng,
    )
}

/// Hadamard by teleportation through `|Z⟩`; the resource is lossless.
pub fn hadamard_via_teleport<R: Rng + ?Sized>(
    q: &LogicalQubitState,
    loss: LossChannel,
    rng: &mut R,
) -> Result<GateOutcome> {
    gate_teleport(
        std::slice::from_ref(q),
        &GateChannel::hadamard(),
        loss,
        LossSides::InputOnly,
        &PairChannel::standard(),
        rng,
    )
}

/// CZ by two-qubit teleportation through `|Z′⟩`; the resource is lossless.
pub fn cz_via_teleport<R: Rng + ?Sized>(
    q1: &LogicalQubitState,
    q2: &LogicalQubitState,
    loss: LossChannel,
    rng: &mut R,
) -> Result<GateOutcome> {
    gate_teleport(
        &[*q1, *q2],
        &GateChannel::cz(),
        loss,
        LossSides::InputOnly,
        &PairChannel::standard(),
        rng,
    )
}

/// Ideal output of `kind` on the logical amplitudes of `inputs`.
pub fn ideal_output(kind: GateKind, inputs: &[LogicalQubitState]) -> Register {
    let mut reg = Register::new(vec![c(1.0)]);
    for q in inputs {
        reg = reg.tensor(&Register::new(vec![q.a, q.b]));
    }
    match kind {
        GateKind::TeleportIdentity => {}
        GateKind::Hadamard => {
            let h = c(FRAC_1_SQRT_2);
            reg.apply1(0, [[h, h], [h, -h]]);
        }
        GateKind::Cz => reg.apply_cz(0, 1),
    }
    reg
}

/// Total resources for one error-correction round:
/// `98 N_H + 343 N_CZ + 164 N_|+⟩`.
pub fn resource_cost(n_h: u64, n_cz: u64, n_plus: u64) -> u64 {
    98 * n_h + 343 * n_cz + 164 * n_plus
}

/// Location-type fractions of one telecorrection round.
pub const FRACTION_MEMORY: f64 = 0.284;
pub const FRACTION_HADAMARD: f64 = 0.098;
pub const FRACTION_CZ: f64 = 0.343;
pub const FRACTION_DIAGONAL: f64 = 0.164;
pub const FRACTION_X_MEASURE: f64 = 0.111;

/// Summary of repeated protocol runs on random inputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProtocolReport {
    pub kind: GateKind,
    pub n: usize,
    pub eta: f64,
    pub trials: u64,
    pub max_attempts: u32,
    pub successes: u64,
    pub success_rate: Estimate,
    /// Per-attempt success rate (what the closed forms predict).
    pub attempt_success_rate: Estimate,
    /// Successes whose output carried a loss-induced phase flip.
    pub z_errors: u64,
    /// Mean and minimum fidelity over successes without a phase flip.
    pub mean_fidelity: f64,
    pub min_fidelity: f64,
    pub attempts_histogram: Vec<u64>,
}

#[derive(Default, Clone)]
struct Tally {
    successes: u64,
    attempts: u64,
    attempt_successes: u64,
    z_errors: u64,
    fid_sum: f64,
    fid_count: u64,
    fid_min: f64,
    histogram: Vec<u64>,
}

impl Tally {
    fn merge(mut self, o: Tally) -> Tally {
        self.successes += o.successes;
        self.attempts += o.attempts;
        self.attempt_successes += o.attempt_successes;
        self.z_errors += o.z_errors;
        self.fid_sum += o.fid_sum;
        self.fid_count += o.fid_count;
        self.fid_min = self.fid_min.min(o.fid_min);
        if self.histogram.len() < o.histogram.len() {
            self.histogram.resize(o.histogram.len(), 0);
        }
        for (a, b) in self.histogram.iter_mut().zip(o.histogram) {
            *a += b;
        }
        self
    }
}

const TAG_PROTOCOL: u64 = 0x5052;

/// Runs `trials` protocol instances on random inputs. Each failed attempt
/// consumes the input; up to `max_attempts` fresh copies are tried.
pub fn run_protocol(
    kind: GateKind,
    n: usize,
    eta: f64,
    sides: LossSides,
    trials: u64,
    max_attempts: u32,
    seed: u64,
) -> Result<ProtocolReport> {
    if trials == 0 || max_attempts == 0 {
        return Err(Error::Domain("trials and attempts must be at least 1".into()));
    }
    let loss = LossChannel::new(eta)?;
    let channel = match kind {
        GateKind::TeleportIdentity => GateChannel::teleport(),
        GateKind::Hadamard => GateChannel::hadamard(),
        GateKind::Cz => GateChannel::cz(),
    };
    let pair_channel = PairChannel::standard();
    let tag = TAG_PROTOCOL ^ ((kind as u64) << 16) ^ ((sides == LossSides::Both) as u64);
    let run_chunk = |(chunk, size): (u64, u64)| -> Result<Tally> {
        let mut r: SimRng = rng::stream(seed, &[tag, chunk]);
        let mut t = Tally {
            fid_min: 1.0,
            histogram: vec![0; max_attempts as usize + 1],
            ..Tally::default()
        };
        for _ in 0..size {
            let inputs: Vec<_> = (0..channel.arity())
                .map(|_| LogicalQubitState::random(n, &mut r))
                .collect();
            let mut done = false;
            for attempt in 1..=max_attempts {
                t.attempts += 1;
                if let GateOutcome::Success(s) =
                    gate_teleport(&inputs, &channel, loss, sides, &pair_channel, &mut r)?
                {
                    t.attempt_successes += 1;
                    t.successes += 1;
                    t.histogram[attempt as usize] += 1;
                    if s.z_error {
                        t.z_errors += 1;
                    } else {
                        let f = fidelity(&ideal_output(kind, &inputs).amps, &s.output.amps);
                        t.fid_sum += f;
                        t.fid_count += 1;
                        t.fid_min = t.fid_min.min(f);
                    }
                    done = true;
                    break;
                }
            }
            if !done {
                t.histogram[0] += 1;
            }
        }
        Ok(t)
    };
    let tally = rng::chunks(trials)
        .into_par_iter()
        .map(run_chunk)
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(
            Tally {
                fid_min: 1.0,
                ..Tally::default()
            },
            Tally::merge,
        );
    Ok(ProtocolReport {
        kind,
        n,
        eta,
        trials,
        max_attempts,
        successes: tally.successes,
        success_rate: Estimate::from_counts(tally.successes, trials),
        attempt_success_rate: Estimate::from_counts(tally.attempt_successes, tally.attempts),
        z_errors: tally.z_errors,
        mean_fidelity: if tally.fid_count > 0 {
            tally.fid_sum / tally.fid_count as f64
        } else {
            0.0
        },
        min_fidelity: if tally.fid_count > 0 { tally.fid_min } else { 0.0 },
        attempts_histogram: tally.histogram,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;

    fn state(a: f64, b: f64, n: usize) -> LogicalQubitState {
        let norm = (a * a + b * b).sqrt();
        LogicalQubitState::new(c(a / norm), c(b / norm), n).unwrap()
    }

    fn lossless() -> LossChannel {
        LossChannel::new(0.0).unwrap()
    }

    #[test]
    fn x_swaps_amplitudes() {
        let q = state(1.0, 0.0, 3);
        let x = pauli_x(&q);
        assert_eq!((x.a, x.b), (c(0.0), c(1.0)));
        let mut r = stream(1, &[]);
        for _ in 0..50 {
            let q = LogicalQubitState::random(2, &mut r);
            assert_eq!(pauli_x(&pauli_x(&q)), q);
        }
    }

    #[test]
    fn photon_level_x_matches_logical() {
        let mut r = stream(2, &[]);
        let q = LogicalQubitState::random(3, &mut r);
        let lhs = photon_flip_all(&q.expand().unwrap());
        let rhs = pauli_x(&q).expand().unwrap();
        for (a, b) in lhs.iter().zip(&rhs) {
            assert!((a - b).norm() < 1e-14);
        }
    }

    #[test]
    fn z_rotation_cases() {
        let q = state(0.6, 0.8, 2);
        let z = z_rotation(&q, std::f64::consts::PI);
        assert!((z.b + q.b).norm() < 1e-15);
        assert_eq!(z_rotation(&q, 0.0), q);
        let mut r = stream(3, &[]);
        for mode in 0..2 {
            let q = LogicalQubitState::random(2, &mut r);
            let lhs = photon_phase_single(&q.expand().unwrap(), 2, mode, 0.7);
            let rhs = z_rotation(&q, 0.7).expand().unwrap();
            for (a, b) in lhs.iter().zip(&rhs) {
                assert!((a - b).norm() < 1e-14);
            }
        }
        let q = LogicalQubitState::random(3, &mut r);
        let a = z_rotation(&z_rotation(&q, 0.4), 1.1);
        let b = z_rotation(&q, 1.5);
        assert!((a.b - b.b).norm() < 1e-12);
    }

    #[test]
    fn expansion_bound() {
        assert!(state(1.0, 0.0, 11).expand().is_err());
        let e = state(0.6, 0.8, 10).expand().unwrap();
        let norm: f64 = e.iter().map(|a| a.norm_sqr()).sum();
        assert!((norm - 1.0).abs() < 1e-12);
    }

    #[test]
    fn correction_table_restores_every_outcome() {
        // Force each Bell outcome by projection and check the fixed table.
        let mut r = stream(4, &[]);
        for _ in 0..20 {
            let q = LogicalQubitState::random(1, &mut r);
            let reg = Register::new(vec![q.a, q.b]).tensor(&GateChannel::teleport().state);
            for b in BellState::ALL {
                let mut out = reg.project_bell(0, 1, b);
                assert!((out.norm_sqr() - 0.25).abs() < 1e-12);
                out = out.normalized();
                PauliCorrection::for_outcome(b).apply(&mut out, 0);
                assert!((fidelity(&[q.a, q.b], &out.amps) - 1.0).abs() < 1e-12, "{b}");
            }
        }
    }

    #[test]
    fn lossless_teleport_is_faithful() {
        let mut r = stream(5, &[]);
        let mut successes = 0;
        for _ in 0..100 {
            let q = LogicalQubitState::random(3, &mut r);
            loop {
                if let GateOutcome::Success(s) = teleport(&q, lossless(), LossSides::Both, &mut r).unwrap() {
                    assert!((fidelity(&[q.a, q.b], &s.output.amps) - 1.0).abs() < 1e-12);
                    assert_eq!(s.n_surviving, 3);
                    successes += 1;
                    break;
                }
            }
        }
        assert_eq!(successes, 100);
    }

    #[test]
    fn hadamard_of_zero() {
        let mut r = stream(6, &[]);
        let q = state(1.0, 0.0, 2);
        let mut seen = 0;
        while seen < 20 {
            if let GateOutcome::Success(s) = hadamard_via_teleport(&q, lossless(), &mut r).unwrap() {
                let h = FRAC_1_SQRT_2;
                assert!((fidelity(&[c(h), c(h)], &s.output.amps) - 1.0).abs() < 1e-12);
                seen += 1;
            }
        }
    }

    #[test]
    fn cz_on_plus_plus() {
        let mut r = stream(7, &[]);
        let h = FRAC_1_SQRT_2;
        let q = state(h, h, 2);
        let mut seen = 0;
        while seen < 20 {
            if let GateOutcome::Success(s) = cz_via_teleport(&q, &q, lossless(), &mut r).unwrap() {
                let expect = [c(0.5), c(0.5), c(0.5), c(-0.5)];
                assert!((fidelity(&expect, &s.output.amps) - 1.0).abs() < 1e-12);
                seen += 1;
            }
        }
    }

    #[test]
    fn wrong_arity_is_rejected() {
        let mut r = stream(8, &[]);
        let q = state(1.0, 0.0, 2);
        assert!(gate_teleport(
            &[q],
            &GateChannel::cz(),
            lossless(),
            LossSides::InputOnly,
            &PairChannel::standard(),
            &mut r
        )
        .is_err());
    }

    #[test]
    fn resource_formula() {
        assert_eq!(resource_cost(0, 0, 0), 0);
        assert_eq!(resource_cost(1, 1, 1), 605);
        let total = FRACTION_MEMORY + FRACTION_HADAMARD + FRACTION_CZ + FRACTION_DIAGONAL + FRACTION_X_MEASURE;
        assert!((total - 1.0).abs() < 1e-3);
    }

    #[test]
    fn report_is_reproducible() {
        let a = run_protocol(GateKind::Hadamard, 2, 0.05, LossSides::InputOnly, 2000, 1, 9).unwrap();
        let b = run_protocol(GateKind::Hadamard, 2, 0.05, LossSides::InputOnly, 2000, 1, 9).unwrap();
        assert_eq!(a, b);
        let c3 = run_protocol(GateKind::TeleportIdentity, 1, 0.0, LossSides::Both, 2000, 3, 9).unwrap();
        // three attempts at 1/2 each
        assert!(c3.success_rate.within_sigma(0.875, 4.0), "{:?}", c3.success_rate);
        assert!(c3.attempt_success_rate.within_sigma(0.5, 4.0));
    }

    fn succeed(kind: GateKind, inputs: &[LogicalQubitState], r: &mut SimRng) -> Register {
        let channel = match kind {
            GateKind::TeleportIdentity => GateChannel::teleport(),
            GateKind::Hadamard => GateChannel::hadamard(),
            GateKind::Cz => GateChannel::cz(),
        };
        loop {
            let out = gate_teleport(inputs, &channel, lossless(), LossSides::InputOnly, &PairChannel::standard(), r)
                .unwrap();
            if let GateOutcome::Success(s) = out {
                return s.output;
            }
        }
    }

    fn as_qubit(reg: &Register, n: usize) -> LogicalQubitState {
        LogicalQubitState::new(reg.amps[0], reg.amps[1], n).unwrap()
    }

    #[test]
    fn gate_algebra_on_random_inputs() {
        let mut r = stream(10, &[]);
        for _ in 0..30 {
            let q = LogicalQubitState::random(3, &mut r);
            // H² = I
            let h1 = as_qubit(&succeed(GateKind::Hadamard, &[q], &mut r), 3);
            let h2 = succeed(GateKind::Hadamard, &[h1], &mut r);
            assert!((fidelity(&q.amplitudes(), &h2.amps) - 1.0).abs() < 1e-12);
            // H X H = Z(π)
            let hxh = as_qubit(&succeed(GateKind::Hadamard, &[pauli_x(&h1)], &mut r), 3);
            let z = z_rotation(&q, std::f64::consts::PI);
            assert!((fidelity(&z.amplitudes(), &hxh.amplitudes()) - 1.0).abs() < 1e-12);
            // CZ is symmetric under swapping its inputs
            let p = LogicalQubitState::random(3, &mut r);
            let ab = succeed(GateKind::Cz, &[q, p], &mut r);
            let ba = succeed(GateKind::Cz, &[p, q], &mut r);
            let swapped = [ba.amps[0], ba.amps[2], ba.amps[1], ba.amps[3]];
            assert!((fidelity(&ab.amps, &swapped) - 1.0).abs() < 1e-12);
            assert!((fidelity(&ideal_output(GateKind::Cz, &[q, p]).amps, &ab.amps) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn success_rates_match_closed_forms() {
        use crate::loss::{bm_success_prob_lossy, gate_teleport_success_prob};
        for &(n, eta) in &[(1, 0.0), (4, 0.0), (2, 0.1), (4, 0.05)] {
            let t = run_protocol(GateKind::TeleportIdentity, n, eta, LossSides::Both, 20_000, 1, 11).unwrap();
            assert!(t.success_rate.within_sigma(bm_success_prob_lossy(n, eta), 4.0), "{n} {eta}");
            let h = run_protocol(GateKind::Hadamard, n, eta, LossSides::InputOnly, 20_000, 1, 12).unwrap();
            let p = gate_teleport_success_prob(n, eta);
            assert!(h.success_rate.within_sigma(p, 4.0), "{n} {eta}");
            let cz = run_protocol(GateKind::Cz, n, eta, LossSides::InputOnly, 20_000, 1, 13).unwrap();
            assert!(cz.success_rate.within_sigma(p * p, 4.0), "{n} {eta}");
            if eta == 0.0 {
                assert_eq!(t.z_errors, 0);
                assert!((t.min_fidelity - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn loss_phase_flips_are_reported() {
        let r = run_protocol(GateKind::TeleportIdentity, 4, 0.1, LossSides::Both, 5_000, 1, 14).unwrap();
        assert!(r.z_errors > 0);
        // fidelity is only averaged over unflipped successes
        assert!((r.min_fidelity - 1.0).abs() < 1e-12);
    }
}
