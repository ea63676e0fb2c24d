//! Pauli-frame Monte Carlo for the telecorrection round and threshold search.

use super::circuit::{LocationKind, TelecorrectionCircuitSpec, WordRole, BLOCK};
use crate::error::{Error, Result};
use crate::loss::gate_teleport_success_prob;
use crate::rng::{self, SimRng};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::sync::OnceLock;

/// Per-location error parameters at one concatenation level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorRateVector {
    /// Phase flip on memory, preparation and measurement locations.
    pub memory_z: f64,
    /// Heralded failure of an H or CZ location; a failed CZ depolarizes both
    /// qubits.
    pub gate_fail: f64,
    /// A heralded failure applies X and Z independently with probability 1/2.
    pub depol_on_fail: bool,
    /// Silent X and Z per qubit at every location.
    pub x_rate: f64,
    pub z_rate: f64,
    /// Every location can fail in a heralded way (encoded levels, where each
    /// location carries its own correction round); otherwise only H and CZ.
    pub fail_everywhere: bool,
}

impl ErrorRateVector {
    pub const ZERO: ErrorRateVector = ErrorRateVector {
        memory_z: 0.0,
        gate_fail: 0.0,
        depol_on_fail: true,
        x_rate: 0.0,
        z_rate: 0.0,
        fail_everywhere: false,
    };

    /// Scalar used for the contraction test.
    pub fn total(&self) -> f64 {
        self.memory_z + self.gate_fail + self.x_rate + self.z_rate
    }

    pub fn validate(&self) -> Result<()> {
        for (name, p) in [
            ("memory_z", self.memory_z),
            ("gate_fail", self.gate_fail),
            ("x_rate", self.x_rate),
            ("z_rate", self.z_rate),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::Domain(format!("{name} = {p} is not a probability")));
            }
        }
        Ok(())
    }

    fn fail_prob(&self, kind: LocationKind) -> f64 {
        if kind.is_gate() || self.fail_everywhere {
            self.gate_fail
        } else {
            0.0
        }
    }

    fn z_prob(&self, kind: LocationKind) -> f64 {
        let mem = if kind.is_gate() { 0.0 } else { self.memory_z };
        // independent sources combine as an XOR
        mem + self.z_rate - 2.0 * mem * self.z_rate
    }
}

/// Rates for unencoded (physical-level) locations with `n` photons per qubit
/// and loss rate `eta`.
pub fn level1_error_model(n: usize, eta: f64) -> Result<ErrorRateVector> {
    if n == 0 {
        return Err(Error::Domain("photons per qubit must be at least 1".into()));
    }
    if !(0.0..=1.0).contains(&eta) {
        return Err(Error::Domain(format!("loss rate {eta} outside [0, 1]")));
    }
    Ok(ErrorRateVector {
        memory_z: (1.0 - (1.0 - eta).powi(n as i32)) / 2.0,
        gate_fail: 1.0 - gate_teleport_success_prob(n, eta),
        ..ErrorRateVector::ZERO
    })
}

fn syndrome(word: u32) -> u32 {
    (0..BLOCK as u32)
        .filter(|i| word >> i & 1 == 1)
        .fold(0, |s, i| s ^ (i + 1))
}

fn parity(word: u32) -> bool {
    word.count_ones() % 2 == 1
}

/// Member of the even subcode (the stabilizer part of the code).
fn is_stabilizer_word(word: u32) -> bool {
    syndrome(word) == 0 && !parity(word)
}

const AMBIGUOUS: u8 = 2;

/// `(syndrome, erasure mask) → correction parity | AMBIGUOUS`. The correction
/// minimizes the number of flips outside the erased positions; if the
/// minimizers disagree on the logical parity the block is flagged.
fn decode_table() -> &'static [u8] {
    static TABLE: OnceLock<Vec<u8>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut t = vec![0u8; 8 << BLOCK];
        for erased in 0..(1u32 << BLOCK) {
            let mut best = [(u32::MAX, 0u8); 8];
            for e in 0..(1u32 << BLOCK) {
                let s = syndrome(e) as usize;
                let cost = (e & !erased).count_ones();
                let par = 1u8 << (parity(e) as u8);
                if cost < best[s].0 {
                    best[s] = (cost, par);
                } else if cost == best[s].0 {
                    best[s].1 |= par;
                }
            }
            for (s, (_, pars)) in best.iter().enumerate() {
                t[(s << BLOCK) | erased as usize] = match pars {
                    1 => 0,
                    2 => 1,
                    _ => AMBIGUOUS,
                };
            }
        }
        t
    })
}

/// Logical flip left after decoding `word` with `erased` positions, or
/// `None` when the decoder cannot decide.
pub fn decode_block(word: u32, erased: u32) -> Option<bool> {
    match decode_table()[((syndrome(word) as usize) << BLOCK) | erased as usize] {
        AMBIGUOUS => None,
        p => Some(parity(word) ^ (p == 1)),
    }
}

/// Result of one accepted or rejected run of the round.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RoundOutcome {
    /// A check block fired; the ancillas are discarded.
    Rejected,
    /// Decoding could not decide; the output is heralded as failed.
    Flagged,
    Done { x_error: bool, z_error: bool },
}

#[derive(Debug, Clone)]
struct Fault {
    x: Vec<u128>,
    z: Vec<u128>,
    flag: u128,
    postselected: bool,
}

/// A circuit with every single-qubit Pauli fault propagated to its effect
/// on the measured words and the output frame.
#[derive(Debug, Clone)]
pub struct CompiledRound {
    spec: TelecorrectionCircuitSpec,
    faults: Vec<Fault>,
    n_words: usize,
}

fn block_bits(v: u128, start: usize) -> u32 {
    ((v >> start) & 0x7f) as u32
}

impl CompiledRound {
    pub fn new(spec: &TelecorrectionCircuitSpec) -> Result<Self> {
        spec.validate()?;
        if spec.n_qubits > 128 || (spec.words.len() + 2) * BLOCK > 128 {
            return Err(Error::ResourceBound {
                n: spec.n_qubits.max((spec.words.len() + 2) * BLOCK),
                max: 128,
            });
        }
        let n_words = spec.words.len();
        let mut obs_of = vec![None; spec.n_qubits];
        for (w, word) in spec.words.iter().enumerate() {
            for (j, &q) in word.qubits.iter().enumerate() {
                obs_of[q] = Some(w * BLOCK + j);
            }
        }
        let data_mask: u128 = spec.data.iter().fold(0, |m, &q| m | 1 << q);
        let boundary = spec
            .locations
            .iter()
            .position(|l| l.kind != LocationKind::Memory && l.qubits.iter().any(|&q| data_mask >> q & 1 == 1))
            .unwrap_or(spec.locations.len());

        let propagate = |start: usize, q: usize, x: bool| -> u128 {
            let (mut fx, mut fz) = (0u128, 0u128);
            if x {
                fx |= 1 << q;
            } else {
                fz |= 1 << q;
            }
            let mut obs = 0u128;
            for loc in &spec.locations[start..] {
                let a = loc.qubits[0];
                match loc.kind {
                    LocationKind::Hadamard => {
                        let (bx, bz) = (fx >> a & 1, fz >> a & 1);
                        fx = (fx & !(1 << a)) | bz << a;
                        fz = (fz & !(1 << a)) | bx << a;
                    }
                    LocationKind::Cz => {
                        let b = loc.qubits[1];
                        let (xa, xb) = (fx >> a & 1, fx >> b & 1);
                        fz ^= xa << b | xb << a;
                    }
                    LocationKind::XMeasure => {
                        if fz >> a & 1 == 1 {
                            if let Some(bit) = obs_of[a] {
                                obs ^= 1 << bit;
                            }
                        }
                        fx &= !(1 << a);
                        fz &= !(1 << a);
                    }
                    LocationKind::Memory | LocationKind::PlusPrep => {}
                }
            }
            for (j, &q) in spec.output.iter().enumerate() {
                obs |= (fx >> q & 1) << (n_words * BLOCK + j);
                obs |= (fz >> q & 1) << (n_words * BLOCK + BLOCK + j);
            }
            obs
        };

        let faults = spec
            .locations
            .iter()
            .enumerate()
            .map(|(i, loc)| {
                // measurement faults act before the readout, the rest after
                let start = if loc.kind == LocationKind::XMeasure { i } else { i + 1 };
                let x: Vec<u128> = loc.qubits.iter().map(|&q| propagate(start, q, true)).collect();
                let z: Vec<u128> = loc.qubits.iter().map(|&q| propagate(start, q, false)).collect();
                let flag = x.iter().chain(&z).fold(0, |m, e| m | e);
                let touches_data = loc.qubits.iter().any(|&q| data_mask >> q & 1 == 1);
                Fault {
                    x,
                    z,
                    flag,
                    postselected: i < boundary && !touches_data,
                }
            })
            .collect();
        Ok(CompiledRound {
            spec: spec.clone(),
            faults,
            n_words,
        })
    }

    pub fn spec(&self) -> &TelecorrectionCircuitSpec {
        &self.spec
    }

    /// Whether a heralded failure at `loc` discards the ancillas rather than
    /// reaching the decoder.
    pub fn is_postselected(&self, loc: usize) -> bool {
        self.faults[loc].postselected
    }

    /// Effect of Pauli `(x, z)` bitmasks over the qubits of location `loc`.
    pub fn fault_effect(&self, loc: usize, x_mask: u32, z_mask: u32) -> u128 {
        let f = &self.faults[loc];
        let mut e = 0;
        for k in 0..f.x.len() {
            if x_mask >> k & 1 == 1 {
                e ^= f.x[k];
            }
            if z_mask >> k & 1 == 1 {
                e ^= f.z[k];
            }
        }
        e
    }

    /// Positions a heralded failure at `loc` marks as erased.
    pub fn fault_flag(&self, loc: usize) -> u128 {
        self.faults[loc].flag
    }

    /// Decodes one run from its accumulated flips and erasures.
    pub fn evaluate(&self, flips: u128, erased: u128) -> RoundOutcome {
        let mut x_error = false;
        let mut z_error = false;
        for (w, word) in self.spec.words.iter().enumerate() {
            let bits = block_bits(flips, w * BLOCK);
            match word.role {
                WordRole::Verify | WordRole::VerifySyndrome => {
                    let pass = if word.role == WordRole::Verify {
                        is_stabilizer_word(bits)
                    } else {
                        syndrome(bits) == 0
                    };
                    if !pass || block_bits(erased, w * BLOCK) != 0 {
                        return RoundOutcome::Rejected;
                    }
                }
                role => match decode_block(bits, block_bits(erased, w * BLOCK)) {
                    None => return RoundOutcome::Flagged,
                    Some(flip) if role == WordRole::XReadout => x_error ^= flip,
                    Some(flip) => z_error ^= flip,
                },
            }
        }
        let out = self.n_words * BLOCK;
        let frame_x = decode_block(block_bits(flips, out), block_bits(erased, out));
        let frame_z = decode_block(block_bits(flips, out + BLOCK), block_bits(erased, out + BLOCK));
        match (frame_x, frame_z) {
            (Some(fx), Some(fz)) => RoundOutcome::Done {
                x_error: x_error ^ fx,
                z_error: z_error ^ fz,
            },
            _ => RoundOutcome::Flagged,
        }
    }
}

#[derive(Debug, Clone, Copy)]
enum Action {
    Flip(u128),
    Fail(usize),
}

/// Fault channels grouped by probability for geometric skipping.
struct Sampler {
    classes: Vec<(f64, Vec<Action>)>,
}

impl Sampler {
    fn new(round: &CompiledRound, rates: &ErrorRateVector) -> Sampler {
        let mut classes: Vec<(f64, Vec<Action>)> = Vec::new();
        let mut add = |p: f64, a: Action| {
            if p <= 0.0 {
                return;
            }
            match classes.iter_mut().find(|(q, _)| *q == p) {
                Some((_, v)) => v.push(a),
                None => classes.push((p, vec![a])),
            }
        };
        for (i, loc) in round.spec.locations.iter().enumerate() {
            let f = &round.faults[i];
            let pz = rates.z_prob(loc.kind);
            for k in 0..loc.qubits.len() {
                add(rates.x_rate, Action::Flip(f.x[k]));
                add(pz, Action::Flip(f.z[k]));
            }
            if !f.postselected {
                add(rates.fail_prob(loc.kind), Action::Fail(i));
            }
        }
        classes.sort_by(|a, b| a.0.total_cmp(&b.0));
        Sampler { classes }
    }

    fn sample<R: Rng + ?Sized>(&self, round: &CompiledRound, depolarize: bool, rng: &mut R) -> (u128, u128) {
        let mut flips = 0u128;
        let mut erased = 0u128;
        for (p, actions) in &self.classes {
            let mut apply = |a: &Action, rng: &mut R| match *a {
                Action::Flip(e) => flips ^= e,
                Action::Fail(loc) => {
                    erased |= round.faults[loc].flag;
                    if depolarize {
                        let bits: u32 = rng.random();
                        flips ^= round.fault_effect(loc, bits & 3, bits >> 2 & 3);
                    }
                }
            };
            if *p >= 1.0 {
                for a in actions {
                    apply(a, rng);
                }
                continue;
            }
            let log_q = (-p).ln_1p();
            let mut idx = 0usize;
            loop {
                let u: f64 = 1.0 - rng.random::<f64>();
                let skip = (u.ln() / log_q).floor();
                if skip >= (actions.len() - idx) as f64 {
                    break;
                }
                idx += skip as usize;
                apply(&actions[idx], rng);
                idx += 1;
                if idx >= actions.len() {
                    break;
                }
            }
        }
        (flips, erased)
    }
}

/// Attempts per trial before a persistently rejected preparation counts as a
/// heralded failure.
pub const MAX_PREP_ATTEMPTS: u32 = 100;

/// Tallies of one batch of rounds.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoundStats {
    pub trials: u64,
    pub rejected: u64,
    pub flagged: u64,
    pub x_errors: u64,
    pub z_errors: u64,
}

impl RoundStats {
    fn merge(self, o: RoundStats) -> RoundStats {
        RoundStats {
            trials: self.trials + o.trials,
            rejected: self.rejected + o.rejected,
            flagged: self.flagged + o.flagged,
            x_errors: self.x_errors + o.x_errors,
            z_errors: self.z_errors + o.z_errors,
        }
    }

    /// Rates seen by the next level up. Flagged rounds become heralded
    /// failures; silent logical errors become unheralded X/Z.
    pub fn rates(&self) -> ErrorRateVector {
        let t = self.trials as f64;
        ErrorRateVector {
            memory_z: 0.0,
            gate_fail: self.flagged as f64 / t,
            depol_on_fail: true,
            x_rate: self.x_errors as f64 / t,
            z_rate: self.z_errors as f64 / t,
            fail_everywhere: true,
        }
    }
}

const TAG_ROUND: u64 = 0x4654;

/// Runs `trials` accepted rounds; `path` extends the seed so callers can key
/// independent batches.
pub fn run_rounds(
    rates: &ErrorRateVector,
    round: &CompiledRound,
    trials: u64,
    seed: u64,
    path: &[u64],
) -> Result<RoundStats> {
    rates.validate()?;
    if trials == 0 {
        return Err(Error::Domain("trials must be at least 1".into()));
    }
    let sampler = Sampler::new(round, rates);
    let stats = rng::chunks(trials)
        .into_par_iter()
        .map(|(chunk, size)| {
            let mut key = path.to_vec();
            key.extend([TAG_ROUND, chunk]);
            let mut r: SimRng = rng::stream(seed, &key);
            let mut s = RoundStats::default();
            for _ in 0..size {
                s.trials += 1;
                let mut attempts = 0;
                loop {
                    attempts += 1;
                    let (flips, erased) = sampler.sample(round, rates.depol_on_fail, &mut r);
                    match round.evaluate(flips, erased) {
                        RoundOutcome::Rejected if attempts < MAX_PREP_ATTEMPTS => {
                            s.rejected += 1;
                            continue;
                        }
                        RoundOutcome::Rejected | RoundOutcome::Flagged => s.flagged += 1,
                        RoundOutcome::Done { x_error, z_error } => {
                            s.x_errors += x_error as u64;
                            s.z_errors += z_error as u64;
                        }
                    }
                    break;
                }
            }
            s
        })
        .reduce(RoundStats::default, RoundStats::merge);
    Ok(stats)
}

/// One level of concatenation: rates of the encoded locations built from
/// locations with `rates_in`.
pub fn simulate_telecorrection(
    rates_in: &ErrorRateVector,
    circuit: &TelecorrectionCircuitSpec,
    trials: u64,
    seed: u64,
) -> Result<ErrorRateVector> {
    let round = CompiledRound::new(circuit)?;
    Ok(run_rounds(rates_in, &round, trials, seed, &[])?.rates())
}

/// Rates level by level at one loss rate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContractionCurve {
    pub eta: f64,
    /// Level 1 first.
    pub levels: Vec<ErrorRateVector>,
    pub contracts: bool,
}

impl ContractionCurve {
    pub fn totals(&self) -> Vec<f64> {
        self.levels.iter().map(|r| r.total()).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdResult {
    pub n: usize,
    pub eta_threshold: f64,
    pub levels_checked: usize,
    pub trials_per_level: u64,
    pub seed: u64,
    /// Curve at the largest loss rate found to contract.
    pub contraction_curve: ContractionCurve,
    /// Curve at the smallest loss rate found to diverge.
    pub divergence_curve: ContractionCurve,
}

/// Search options for [`find_threshold_with`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdSearch {
    pub eta_low: f64,
    pub eta_high: f64,
    pub tolerance: f64,
}

impl Default for ThresholdSearch {
    fn default() -> Self {
        ThresholdSearch {
            eta_low: 1e-5,
            eta_high: 0.005,
            tolerance: 5e-5,
        }
    }
}

const TAG_CURVE: u64 = 0x4355;

/// Follows the rates up `levels` levels (level 1 included). The curve
/// contracts if the total rate falls strictly at every step; reaching an
/// exact zero counts as contraction since zero is a fixed point.
pub fn contraction_curve(
    round: &CompiledRound,
    n: usize,
    eta: f64,
    levels: usize,
    trials: u64,
    seed: u64,
) -> Result<ContractionCurve> {
    let mut rates = vec![level1_error_model(n, eta)?];
    let mut contracts = true;
    for level in 1..levels {
        let prev = rates[level - 1];
        if prev.total() == 0.0 {
            break;
        }
        // Streams depend on the level only, so nearby loss rates and
        // different photon numbers share random numbers.
        let stats = run_rounds(&prev, round, trials, seed, &[TAG_CURVE, level as u64])?;
        let next = stats.rates();
        rates.push(next);
        if next.total() >= prev.total() {
            contracts = false;
            break;
        }
    }
    Ok(ContractionCurve {
        eta,
        levels: rates,
        contracts,
    })
}

/// Bisects the loss rate on the contraction test.
pub fn find_threshold_with(
    circuit: &TelecorrectionCircuitSpec,
    n: usize,
    levels: usize,
    trials: u64,
    seed: u64,
    search: ThresholdSearch,
) -> Result<ThresholdResult> {
    if levels < 3 {
        return Err(Error::Domain("at least 3 levels are required".into()));
    }
    if !(0.0 < search.eta_low && search.eta_low < search.eta_high && search.eta_high <= 1.0) {
        return Err(Error::Domain("search bracket must satisfy 0 < low < high <= 1".into()));
    }
    let round = CompiledRound::new(circuit)?;
    let curve = |eta| contraction_curve(&round, n, eta, levels, trials, seed);
    let mut lo = curve(search.eta_low)?;
    if !lo.contracts {
        return Err(Error::NoContraction { eta: search.eta_low });
    }
    let mut hi = curve(search.eta_high)?;
    if hi.contracts {
        return Err(Error::Domain(format!(
            "rates still contract at the upper bracket {}",
            search.eta_high
        )));
    }
    while hi.eta - lo.eta > search.tolerance {
        let mid = curve(0.5 * (lo.eta + hi.eta))?;
        if mid.contracts {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(ThresholdResult {
        n,
        eta_threshold: 0.5 * (lo.eta + hi.eta),
        levels_checked: levels,
        trials_per_level: trials,
        seed,
        contraction_curve: lo,
        divergence_curve: hi,
    })
}

pub fn find_threshold(n: usize, levels: usize, trials: u64, seed: u64) -> Result<ThresholdResult> {
    find_threshold_with(
        &TelecorrectionCircuitSpec::default_round(),
        n,
        levels,
        trials,
        seed,
        ThresholdSearch::default(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn round() -> CompiledRound {
        CompiledRound::new(&TelecorrectionCircuitSpec::default_round()).unwrap()
    }

    fn is_clean(o: RoundOutcome) -> bool {
        matches!(
            o,
            RoundOutcome::Rejected
                | RoundOutcome::Done {
                    x_error: false,
                    z_error: false
                }
        )
    }

    #[test]
    fn level1_lossless_rates() {
        for n in 1..=10 {
            let r = level1_error_model(n, 0.0).unwrap();
            assert_eq!(r.memory_z, 0.0);
            assert!((r.gate_fail - 0.5f64.powi(n as i32)).abs() < 1e-15);
        }
    }

    #[test]
    fn level1_memory_rate_matches_binomial() {
        let r = level1_error_model(4, 1e-3).unwrap();
        // 1 - (1-e)^4 = 4e - 6e^2 + 4e^3 - e^4
        let e: f64 = 1e-3;
        let oracle = (4.0 * e - 6.0 * e * e + 4.0 * e.powi(3) - e.powi(4)) / 2.0;
        assert!((r.memory_z - oracle).abs() < 1e-15);
        assert!((r.memory_z - 1.997e-3).abs() < 1e-6);
    }

    #[test]
    fn level1_rejects_bad_input() {
        assert!(level1_error_model(0, 0.1).is_err());
        assert!(level1_error_model(3, 1.5).is_err());
    }

    #[test]
    fn decoder_fixes_single_flips() {
        for q in 0..BLOCK {
            assert_eq!(decode_block(1 << q, 0), Some(false));
        }
        // all ones is the logical operator
        assert_eq!(decode_block(0x7f, 0), Some(true));
        // two erasures with nothing else wrong are recovered
        assert_eq!(decode_block(0b11, 0b11), Some(false));
        // one erasure plus an unknown flip exceeds the distance
        assert_eq!(decode_block(0b11, 0b01), None);
    }

    #[test]
    fn decoder_flags_ambiguous_erasures() {
        // three erasures covering a weight-3 logical support leave two
        // minimum corrections of opposite parity
        let erased = 0b111;
        let mut saw_ambiguous = false;
        for w in 0..(1u32 << BLOCK) {
            if decode_block(w, erased).is_none() {
                saw_ambiguous = true;
            }
        }
        assert!(saw_ambiguous);
        assert_eq!(decode_block(0, 0), Some(false));
    }

    #[test]
    fn zero_noise_is_a_fixed_point() {
        let c = TelecorrectionCircuitSpec::default_round();
        let out = simulate_telecorrection(&ErrorRateVector::ZERO, &c, 10_000, 3).unwrap();
        assert_eq!(out.total(), 0.0);
        assert_eq!(out.gate_fail, 0.0);
    }

    #[test]
    fn every_single_fault_is_corrected() {
        let r = round();
        for (i, loc) in r.spec().locations.iter().enumerate() {
            let masks = 1u32 << loc.kind.arity();
            for xm in 0..masks {
                for zm in 0..masks {
                    let e = r.fault_effect(i, xm, zm);
                    assert!(is_clean(r.evaluate(e, 0)), "silent fault at {i}");
                    if !r.is_postselected(i) {
                        let o = r.evaluate(e, r.fault_flag(i));
                        assert!(is_clean(o), "heralded fault at {i}: {o:?}");
                    }
                }
            }
        }
    }

    #[test]
    fn logical_operators_on_data_are_reported() {
        let r = round();
        let spec = r.spec();
        let mut on_data = 0u128;
        let mut on_partner = 0u128;
        for (i, loc) in spec.locations.iter().enumerate() {
            if loc.kind != LocationKind::Cz {
                continue;
            }
            let Some(k) = loc.qubits.iter().position(|q| spec.data.contains(q)) else {
                continue;
            };
            on_data ^= r.fault_effect(i, 0, 1 << k);
            on_partner ^= r.fault_effect(i, 0, 1 << (1 - k));
        }
        // Z on every data qubit is the logical Z
        assert_eq!(
            r.evaluate(on_data, 0),
            RoundOutcome::Done {
                x_error: false,
                z_error: true
            }
        );
        // X before the coupling equals X after it times Z on the partner;
        // X on data ahead of its X readout is invisible
        assert_eq!(
            r.evaluate(on_partner, 0),
            RoundOutcome::Done {
                x_error: true,
                z_error: false
            }
        );
    }

    #[test]
    fn rates_diverge_far_above_threshold() {
        let r = round();
        let c = contraction_curve(&r, 4, 0.05, 3, 20_000, 1).unwrap();
        assert!(!c.contracts);
        let t = c.totals();
        assert!(t[1] > t[0], "{t:?}");
    }

    #[test]
    fn rates_contract_well_below_threshold() {
        let r = round();
        let c = contraction_curve(&r, 4, 1e-4, 3, 20_000, 1).unwrap();
        assert!(c.contracts, "{:?}", c.totals());
    }

    #[test]
    fn runs_are_reproducible() {
        let r = round();
        let rates = level1_error_model(4, 2e-3).unwrap();
        let a = run_rounds(&rates, &r, 5000, 9, &[1]).unwrap();
        let b = run_rounds(&rates, &r, 5000, 9, &[1]).unwrap();
        assert_eq!(a, b);
        let c = run_rounds(&rates, &r, 5000, 10, &[1]).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn threshold_needs_three_levels() {
        assert!(find_threshold(4, 2, 1000, 1).is_err());
    }

    #[test]
    fn invalid_rates_are_rejected() {
        let bad = ErrorRateVector {
            x_rate: 1.5,
            ..ErrorRateVector::ZERO
        };
        assert!(bad.validate().is_err());
        assert!(simulate_telecorrection(&bad, &TelecorrectionCircuitSpec::default_round(), 10, 1).is_err());
    }
}
