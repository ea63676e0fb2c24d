//! Second-quantized two-photon optics and the standard Bell-measurement device.
//!
//! The device is built from polarizing beam splitters and wave plates acting on
//! single-photon modes. Two photons are transported through the mode unitary
//! exactly, and the click statistics of four on-off detectors decide which Bell
//! states the device can name. Nothing about the outcome table is hard-coded:
//! [`derive_bs_table`] feeds the four Bell states through the network and reads
//! off which click patterns are unambiguous.
//!
//! Mode layout: mode index `2 * spatial + pol` with `pol = 0` for H and `1` for
//! V. The two input photons enter spatial modes 0 and 1; spatial modes 2 and 3
//! start in vacuum. After the analyzing beam splitters every spatial mode feeds
//! one detector, so detector `k` is spatial mode `k`.

use crate::bell::BellState;
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;

/// Probabilities below this are treated as analytically zero.
pub const ZERO_TOL: f64 = 1e-10;

pub const SPATIAL_MODES: usize = 4;
pub const MODES: usize = 2 * SPATIAL_MODES;
pub const DETECTORS: usize = SPATIAL_MODES;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Polarization {
    H,
    V,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ModeLabel {
    pub spatial: usize,
    pub pol: Polarization,
}

impl ModeLabel {
    pub fn new(spatial: usize, pol: Polarization) -> Self {
        ModeLabel { spatial, pol }
    }

    pub fn index(self) -> usize {
        2 * self.spatial + self.pol as usize
    }

    pub fn from_index(i: usize) -> Self {
        let pol = if i % 2 == 0 {
            Polarization::H
        } else {
            Polarization::V
        };
        ModeLabel { spatial: i / 2, pol }
    }
}

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// Two photons in `n_modes` modes.
///
/// The stored amplitude of an unordered pair is chosen so that the norm is
/// `Σ |amp|²`: distinct modes hold the coefficient of `a†_i a†_j |0⟩`, bunched
/// pairs hold the coefficient of `(a†_i)² / √2 |0⟩`.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoPhotonState {
    n_modes: usize,
    amplitudes: BTreeMap<(usize, usize), Complex64>,
}

impl TwoPhotonState {
    pub fn new(n_modes: usize) -> Self {
        TwoPhotonState {
            n_modes,
            amplitudes: BTreeMap::new(),
        }
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    /// Adds `amp` to the pair `{m1, m2}` (order irrelevant).
    pub fn add(&mut self, m1: usize, m2: usize, amp: Complex64) {
        assert!(m1 < self.n_modes && m2 < self.n_modes, "mode out of range");
        let key = (m1.min(m2), m1.max(m2));
        *self.amplitudes.entry(key).or_insert(c(0.0)) += amp;
    }

    pub fn amplitude(&self, m1: usize, m2: usize) -> Complex64 {
        self.amplitudes
            .get(&(m1.min(m2), m1.max(m2)))
            .copied()
            .unwrap_or(c(0.0))
    }

    pub fn iter(&self) -> impl Iterator<Item = ((usize, usize), Complex64)> + '_ {
        self.amplitudes.iter().map(|(k, v)| (*k, *v))
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.values().map(|a| a.norm_sqr()).sum()
    }

    /// One photon in spatial mode 0 and one in spatial mode 1, with a joint
    /// polarization amplitude `amp[p][q]` (p for the first photon, q for the
    /// second, H = 0, V = 1). The result lives in [`MODES`] modes.
    pub fn from_polarization_pair(amp: [[Complex64; 2]; 2]) -> Self {
        let mut s = TwoPhotonState::new(MODES);
        for (p, row) in amp.iter().enumerate() {
            for (q, a) in row.iter().enumerate() {
                if a.norm_sqr() > 0.0 {
                    s.add(p, 2 + q, *a);
                }
            }
        }
        s
    }

    /// Product of two single-photon polarization states.
    pub fn product(first: [Complex64; 2], second: [Complex64; 2]) -> Self {
        let mut amp = [[c(0.0); 2]; 2];
        for p in 0..2 {
            for q in 0..2 {
                amp[p][q] = first[p] * second[q];
            }
        }
        Self::from_polarization_pair(amp)
    }

    /// Bell state of two polarization qubits in the diagonal basis
    /// `|0⟩ = |+⟩`, `|1⟩ = |−⟩`.
    pub fn bell(state: BellState) -> Self {
        let logical = state.amplitudes();
        let mut amp = [[c(0.0); 2]; 2];
        for (idx, l) in logical.iter().enumerate() {
            if *l == 0.0 {
                continue;
            }
            let first = diagonal(idx >> 1);
            let second = diagonal(idx & 1);
            for p in 0..2 {
                for q in 0..2 {
                    amp[p][q] += c(*l) * first[p] * second[q];
                }
            }
        }
        Self::from_polarization_pair(amp)
    }
}

/// `|+⟩` for bit 0 and `|−⟩` for bit 1, as (H, V) amplitudes.
pub fn diagonal(bit: usize) -> [Complex64; 2] {
    if bit == 0 {
        [c(FRAC_1_SQRT_2), c(FRAC_1_SQRT_2)]
    } else {
        [c(FRAC_1_SQRT_2), c(-FRAC_1_SQRT_2)]
    }
}

/// Transports both creation operators through `unitary`
/// (`a†_m → Σ_n U[n][m] a†_n`).
pub fn evolve(state: &TwoPhotonState, unitary: &Matrix) -> Result<TwoPhotonState> {
    let n = state.n_modes;
    if unitary.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: unitary.dim(),
        });
    }
    // Symmetric coefficient tensor T with state = Σ_ij T_ij a†_i a†_j |0⟩.
    let mut t = Matrix::zeros(n);
    for ((i, j), a) in state.iter() {
        if i == j {
            t[(i, i)] += a * FRAC_1_SQRT_2;
        } else {
            t[(i, j)] += a * 0.5;
            t[(j, i)] += a * 0.5;
        }
    }
    let t = &(unitary * &t) * &unitary.transpose();
    let mut out = TwoPhotonState::new(n);
    for i in 0..n {
        for j in i..n {
            let a = if i == j {
                t[(i, i)] * std::f64::consts::SQRT_2
            } else {
                t[(i, j)] + t[(j, i)]
            };
            if a.norm_sqr() > 1e-30 {
                out.amplitudes.insert((i, j), a);
            }
        }
    }
    Ok(out)
}

/// Set of detectors that fired (on-off detection, photon number unresolved).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ClickPattern(u8);

impl ClickPattern {
    pub fn from_detectors(dets: &[usize]) -> Self {
        ClickPattern(dets.iter().fold(0u8, |m, &d| m | (1 << d)))
    }

    pub fn detectors(self) -> Vec<usize> {
        (0..8).filter(|d| self.0 & (1 << d) != 0).collect()
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn contains(self, det: usize) -> bool {
        self.0 & (1 << det) != 0
    }
}

impl fmt::Display for ClickPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let d: Vec<String> = self.detectors().iter().map(|d| format!("D{d}")).collect();
        write!(f, "{{{}}}", d.join(","))
    }
}

impl Serialize for ClickPattern {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.detectors().serialize(s)
    }
}

impl<'de> Deserialize<'de> for ClickPattern {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let dets = Vec::<usize>::deserialize(d)?;
        if dets.iter().any(|&x| x >= 8) {
            return Err(serde::de::Error::custom("detector index out of range"));
        }
        Ok(ClickPattern::from_detectors(&dets))
    }
}

/// Which two Bell states the device names unambiguously.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TargetPair {
    PhiMinusPsiMinus,
    PhiPlusPsiPlus,
    PhiMinusPsiPlus,
    PhiPlusPsiMinus,
}

impl TargetPair {
    pub const ALL: [TargetPair; 4] = [
        TargetPair::PhiMinusPsiMinus,
        TargetPair::PhiPlusPsiPlus,
        TargetPair::PhiMinusPsiPlus,
        TargetPair::PhiPlusPsiMinus,
    ];

    pub fn states(self) -> [BellState; 2] {
        use BellState::*;
        match self {
            TargetPair::PhiMinusPsiMinus => [PhiMinus, PsiMinus],
            TargetPair::PhiPlusPsiPlus => [PhiPlus, PsiPlus],
            TargetPair::PhiMinusPsiPlus => [PhiMinus, PsiPlus],
            TargetPair::PhiPlusPsiMinus => [PhiPlus, PsiMinus],
        }
    }
}

/// Mode unitary of the standard Bell-measurement device plus its detector map.
#[derive(Debug, Clone)]
pub struct BsNetwork {
    pub target: TargetPair,
    pub unitary: Matrix,
}

type Block = [[Complex64; 2]; 2];

fn half_wave_plate(angle: f64) -> Block {
    let (s, co) = (2.0 * angle).sin_cos();
    [[c(co), c(s)], [c(s), c(-co)]]
}

/// `exp(-i π/4 X)` in the H/V basis: a quarter-wave retarder about the diagonal axis.
fn diagonal_quarter_wave() -> Block {
    let h = FRAC_1_SQRT_2;
    let mi = Complex64::new(0.0, -h);
    [[c(h), mi], [mi, c(h)]]
}

fn block_mul(a: Block, b: Block) -> Block {
    let mut out = [[c(0.0); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

fn block_adjoint(a: Block) -> Block {
    [[a[0][0].conj(), a[1][0].conj()], [a[0][1].conj(), a[1][1].conj()]]
}

fn block_transpose(a: Block) -> Block {
    [[a[0][0], a[1][0]], [a[0][1], a[1][1]]]
}

const PAULI_X: Block = [
    [Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)],
    [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)],
];
const IDENTITY: Block = [
    [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)],
    [Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)],
];

fn polarization_element(spatial: usize, block: Block) -> Matrix {
    Matrix::embed2(MODES, 2 * spatial, 2 * spatial + 1, block)
}

/// PBS between two spatial modes: H is transmitted, V is reflected.
fn pbs(s1: usize, s2: usize) -> Matrix {
    let (v1, v2) = (2 * s1 + 1, 2 * s2 + 1);
    Matrix::embed2(MODES, v1, v2, [[c(0.0), c(1.0)], [c(1.0), c(0.0)]])
}

/// Input wave plates for the two photons. The first PBS passes the pair
/// `(HH ± VV)` to different ports, so the plates rotate the selected Bell
/// states onto that pair.
fn input_plates(target: TargetPair) -> (Block, Block) {
    match target {
        TargetPair::PhiPlusPsiPlus => (IDENTITY, IDENTITY),
        TargetPair::PhiMinusPsiMinus => (IDENTITY, PAULI_X),
        TargetPair::PhiMinusPsiPlus => {
            let b = diagonal_quarter_wave();
            (block_transpose(block_mul(PAULI_X, block_adjoint(b))), b)
        }
        TargetPair::PhiPlusPsiMinus => {
            let b = diagonal_quarter_wave();
            (block_transpose(block_adjoint(b)), b)
        }
    }
}

/// Three PBS, wave plates and four detectors.
///
/// Input plates, a PBS mixing spatial modes 0 and 1, half-wave plates at ±22.5°
/// on the two output ports, then one analyzing PBS per port sending V light
/// into the vacuum modes 2 and 3.
pub fn build_bs_network(target: TargetPair) -> BsNetwork {
    let (plate_a, plate_b) = input_plates(target);
    let steps = [
        polarization_element(0, plate_a),
        polarization_element(1, plate_b),
        pbs(0, 1),
        polarization_element(0, half_wave_plate(std::f64::consts::PI / 8.0)),
        polarization_element(1, half_wave_plate(-std::f64::consts::PI / 8.0)),
        pbs(0, 2),
        pbs(1, 3),
    ];
    let unitary = steps
        .iter()
        .fold(Matrix::identity(MODES), |acc, step| step * &acc);
    BsNetwork { target, unitary }
}

/// Detector fed by a mode after the network.
pub fn detector_of_mode(mode: usize) -> usize {
    mode / 2
}

/// Polarization recorded by a detector: ports 0 and 1 collect transmitted (H)
/// light, ports 2 and 3 reflected (V) light.
pub fn detector_polarization(det: usize) -> Polarization {
    if det < 2 {
        Polarization::H
    } else {
        Polarization::V
    }
}

/// Whether a detector belongs to the upper pair (first PBS port 0).
pub fn detector_is_upper(det: usize) -> bool {
    det % 2 == 0
}

pub fn click_distribution(state: &TwoPhotonState) -> BTreeMap<ClickPattern, f64> {
    let mut dist = BTreeMap::new();
    for ((i, j), a) in state.iter() {
        let p = a.norm_sqr();
        if p == 0.0 {
            continue;
        }
        let pattern = ClickPattern::from_detectors(&[detector_of_mode(i), detector_of_mode(j)]);
        *dist.entry(pattern).or_insert(0.0) += p;
    }
    dist
}

/// Result of one standard Bell measurement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum BsOutcome {
    Identified(BellState),
    Fail,
}

impl BsOutcome {
    pub const PHI_MINUS: BsOutcome = BsOutcome::Identified(BellState::PhiMinus);
    pub const PSI_MINUS: BsOutcome = BsOutcome::Identified(BellState::PsiMinus);

    pub fn is_success(self) -> bool {
        matches!(self, BsOutcome::Identified(_))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TableEntry {
    pub pattern: ClickPattern,
    pub outcome: BsOutcome,
    /// `P(pattern | Bell input)` indexed like [`BellState::ALL`].
    pub probabilities: [f64; 4],
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BsOutcomeTable {
    pub target: TargetPair,
    pub entries: Vec<TableEntry>,
    /// `P(correct identification | Bell input)` indexed like [`BellState::ALL`].
    pub success: [f64; 4],
}

impl BsOutcomeTable {
    pub fn outcome(&self, pattern: ClickPattern) -> BsOutcome {
        self.entries
            .iter()
            .find(|e| e.pattern == pattern)
            .map_or(BsOutcome::Fail, |e| e.outcome)
    }

    pub fn success_probability(&self, state: BellState) -> f64 {
        self.success[state.index()]
    }

    /// Average success over uniformly random Bell inputs.
    pub fn average_success(&self) -> f64 {
        self.success.iter().sum::<f64>() / 4.0
    }

    /// Patterns reachable from `state` with nonzero probability.
    pub fn reachable(&self, state: BellState) -> Vec<ClickPattern> {
        self.entries
            .iter()
            .filter(|e| e.probabilities[state.index()] > ZERO_TOL)
            .map(|e| e.pattern)
            .collect()
    }
}

/// Feeds the four Bell states through `network` and labels every reachable
/// click pattern.
pub fn derive_bs_table(network: &BsNetwork) -> Result<BsOutcomeTable> {
    let mut probs: BTreeMap<ClickPattern, [f64; 4]> = BTreeMap::new();
    for state in BellState::ALL {
        let out = evolve(&TwoPhotonState::bell(state), &network.unitary)?;
        for (pattern, p) in click_distribution(&out) {
            probs.entry(pattern).or_insert([0.0; 4])[state.index()] += p;
        }
    }
    let targets = network.target.states();
    let mut entries = Vec::new();
    let mut success = [0.0; 4];
    for (pattern, pr) in probs {
        let reaching: Vec<BellState> = BellState::ALL
            .into_iter()
            .filter(|s| pr[s.index()] > ZERO_TOL)
            .collect();
        if reaching.is_empty() {
            continue;
        }
        let outcome = if reaching.len() == 1 {
            let s = reaching[0];
            if !targets.contains(&s) {
                return Err(Error::InconsistentDevice {
                    pattern: pattern.to_string(),
                });
            }
            success[s.index()] += pr[s.index()];
            BsOutcome::Identified(s)
        } else {
            BsOutcome::Fail
        };
        entries.push(TableEntry {
            pattern,
            outcome,
            probabilities: pr,
        });
    }
    Ok(BsOutcomeTable {
        target: network.target,
        entries,
        success,
    })
}

/// What to feed the device.
#[derive(Debug, Clone)]
pub enum BsInput {
    Bell(BellState),
    State(TwoPhotonState),
}

/// Device with its derived outcome table, ready for sampling.
#[derive(Debug, Clone)]
pub struct BsDevice {
    pub network: BsNetwork,
    pub table: BsOutcomeTable,
}

impl BsDevice {
    pub fn new(target: TargetPair) -> Result<Self> {
        let network = build_bs_network(target);
        let table = derive_bs_table(&network)?;
        Ok(BsDevice { network, table })
    }

    pub fn standard() -> Self {
        Self::new(TargetPair::PhiMinusPsiMinus).expect("standard device is consistent")
    }

    pub fn outcome_distribution(&self, input: &BsInput) -> Result<BTreeMap<BsOutcome, f64>> {
        let state = match input {
            BsInput::Bell(b) => TwoPhotonState::bell(*b),
            BsInput::State(s) => s.clone(),
        };
        let out = evolve(&state, &self.network.unitary)?;
        let mut dist = BTreeMap::new();
        for (pattern, p) in click_distribution(&out) {
            *dist.entry(self.table.outcome(pattern)).or_insert(0.0) += p;
        }
        Ok(dist)
    }

    /// Samples one click pattern and reports the declared outcome.
    pub fn simulate<R: Rng + ?Sized>(
        &self,
        input: &BsInput,
        rng: &mut R,
    ) -> Result<(BsOutcome, ClickPattern)> {
        let state = match input {
            BsInput::Bell(b) => TwoPhotonState::bell(*b),
            BsInput::State(s) => s.clone(),
        };
        let out = evolve(&state, &self.network.unitary)?;
        let dist = click_distribution(&out);
        let total: f64 = dist.values().sum();
        let mut u = rng.random::<f64>() * total;
        let mut chosen = *dist.keys().next_back().expect("two-photon state has clicks");
        for (pattern, p) in &dist {
            if u < *p {
                chosen = *pattern;
                break;
            }
            u -= p;
        }
        Ok((self.table.outcome(chosen), chosen))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;

    fn plus() -> [Complex64; 2] {
        diagonal(0)
    }
    fn minus() -> [Complex64; 2] {
        diagonal(1)
    }

    #[test]
    fn every_network_is_unitary() {
        for t in TargetPair::ALL {
            assert!(build_bs_network(t).unitary.unitarity_defect() < 1e-12);
        }
    }

    #[test]
    fn bell_states_are_normalized() {
        for b in BellState::ALL {
            assert!((TwoPhotonState::bell(b).norm_sqr() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn identity_leaves_state_unchanged() {
        let s = TwoPhotonState::bell(BellState::PsiMinus);
        let out = evolve(&s, &Matrix::identity(MODES)).unwrap();
        for ((i, j), a) in s.iter() {
            assert!((out.amplitude(i, j) - a).norm() < 1e-15);
        }
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let s = TwoPhotonState::bell(BellState::PhiPlus);
        assert_eq!(
            evolve(&s, &Matrix::identity(4)),
            Err(Error::DimensionMismatch {
                expected: 8,
                got: 4
            })
        );
    }

    #[test]
    fn hong_ou_mandel_dip() {
        // a†b† under a 50:50 splitter: (a†² − b†²)/2 with no a†b† term,
        // i.e. stored amplitudes ±1/√2 on the bunched pairs.
        let h = FRAC_1_SQRT_2;
        let bs = Matrix::from_rows(&[vec![c(h), c(h)], vec![c(h), c(-h)]]);
        let mut s = TwoPhotonState::new(2);
        s.add(0, 1, c(1.0));
        let out = evolve(&s, &bs).unwrap();
        assert!(out.amplitude(0, 1).norm() < 1e-15);
        assert!((out.amplitude(0, 0) - c(h)).norm() < 1e-15);
        assert!((out.amplitude(1, 1) - c(-h)).norm() < 1e-15);
    }

    #[test]
    fn bunched_pair_is_one_click() {
        let mut s = TwoPhotonState::new(MODES);
        s.add(6, 7, c(1.0));
        let d = click_distribution(&s);
        assert_eq!(d.len(), 1);
        assert_eq!(d[&ClickPattern::from_detectors(&[3])], 1.0);
    }

    #[test]
    fn phi_minus_clicks_split_upper_and_lower() {
        let net = build_bs_network(TargetPair::PhiMinusPsiMinus);
        let out = evolve(&TwoPhotonState::bell(BellState::PhiMinus), &net.unitary).unwrap();
        let dist = click_distribution(&out);
        assert!((dist.values().sum::<f64>() - 1.0).abs() < 1e-10);
        for (pattern, p) in dist {
            if p < ZERO_TOL {
                continue;
            }
            let d = pattern.detectors();
            assert_eq!(d.len(), 2);
            assert_ne!(detector_is_upper(d[0]), detector_is_upper(d[1]));
            assert_ne!(detector_polarization(d[0]), detector_polarization(d[1]));
        }
    }

    #[test]
    fn psi_minus_clicks_share_polarization() {
        let net = build_bs_network(TargetPair::PhiMinusPsiMinus);
        let out = evolve(&TwoPhotonState::bell(BellState::PsiMinus), &net.unitary).unwrap();
        for (pattern, p) in click_distribution(&out) {
            if p < ZERO_TOL {
                continue;
            }
            let d = pattern.detectors();
            assert_eq!(d.len(), 2);
            assert_eq!(detector_polarization(d[0]), detector_polarization(d[1]));
        }
    }

    #[test]
    fn standard_table_success_profile() {
        let table = BsDevice::standard().table;
        let s = |b: BellState| table.success_probability(b);
        assert!((s(BellState::PhiMinus) - 1.0).abs() < 1e-10);
        assert!((s(BellState::PsiMinus) - 1.0).abs() < 1e-10);
        assert!(s(BellState::PhiPlus).abs() < 1e-10);
        assert!(s(BellState::PsiPlus).abs() < 1e-10);
        assert!((table.average_success() - 0.5).abs() < 1e-12);
        assert_eq!(
            table.reachable(BellState::PhiPlus),
            table.reachable(BellState::PsiPlus)
        );
    }

    #[test]
    fn alternate_settings_identify_their_pairs() {
        for t in TargetPair::ALL {
            let table = derive_bs_table(&build_bs_network(t)).unwrap();
            for b in BellState::ALL {
                let expected = if t.states().contains(&b) { 1.0 } else { 0.0 };
                assert!(
                    (table.success_probability(b) - expected).abs() < 1e-10,
                    "{t:?} {b}"
                );
            }
        }
    }

    #[test]
    fn product_inputs_split_evenly() {
        let dev = BsDevice::standard();
        let pp = dev
            .outcome_distribution(&BsInput::State(TwoPhotonState::product(plus(), plus())))
            .unwrap();
        assert!((pp[&BsOutcome::PHI_MINUS] - 0.5).abs() < 1e-10);
        assert!((pp[&BsOutcome::Fail] - 0.5).abs() < 1e-10);
        let pm = dev
            .outcome_distribution(&BsInput::State(TwoPhotonState::product(plus(), minus())))
            .unwrap();
        assert!((pm[&BsOutcome::PSI_MINUS] - 0.5).abs() < 1e-10);
    }

    #[test]
    fn sampled_bell_inputs_are_deterministic() {
        let dev = BsDevice::standard();
        let mut rng = stream(1, &[]);
        for _ in 0..200 {
            let (o, _) = dev.simulate(&BsInput::Bell(BellState::PsiMinus), &mut rng).unwrap();
            assert_eq!(o, BsOutcome::PSI_MINUS);
            let (o, _) = dev.simulate(&BsInput::Bell(BellState::PhiPlus), &mut rng).unwrap();
            assert_eq!(o, BsOutcome::Fail);
        }
    }

    #[test]
    fn sampled_frequency_of_plus_minus_input() {
        let dev = BsDevice::standard();
        let input = BsInput::State(TwoPhotonState::product(plus(), minus()));
        let mut rng = stream(11, &[]);
        let trials = 100_000;
        let hits = (0..trials)
            .filter(|_| dev.simulate(&input, &mut rng).unwrap().0 == BsOutcome::PSI_MINUS)
            .count();
        let f = hits as f64 / trials as f64;
        let sigma = (0.25f64 / trials as f64).sqrt();
        assert!((f - 0.5).abs() < 3.0 * sigma, "{f}");
    }
}
