//! Location-level description of one telecorrection round.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;

/// Width of a code block.
pub const BLOCK: usize = 7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum LocationKind {
    Memory,
    Hadamard,
    Cz,
    PlusPrep,
    XMeasure,
}

impl LocationKind {
    pub const ALL: [LocationKind; 5] = [
        LocationKind::Memory,
        LocationKind::Hadamard,
        LocationKind::Cz,
        LocationKind::PlusPrep,
        LocationKind::XMeasure,
    ];

    pub fn keyword(self) -> &'static str {
        match self {
            LocationKind::Memory => "mem",
            LocationKind::Hadamard => "h",
            LocationKind::Cz => "cz",
            LocationKind::PlusPrep => "plus",
            LocationKind::XMeasure => "xmeas",
        }
    }

    fn from_keyword(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.keyword() == s)
    }

    pub fn arity(self) -> usize {
        if self == LocationKind::Cz {
            2
        } else {
            1
        }
    }

    /// Teleported gates; these fail in a heralded way.
    pub fn is_gate(self) -> bool {
        matches!(self, LocationKind::Hadamard | LocationKind::Cz)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Location {
    pub kind: LocationKind,
    pub qubits: Vec<usize>,
}

/// What a measured block tells the decoder.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum WordRole {
    /// Check block measured from a `|+⟩` codeword; any flip outside the even
    /// subcode rejects the run.
    Verify,
    /// Check block measured from a `|0⟩` codeword; a nonzero syndrome rejects
    /// the run.
    VerifySyndrome,
    /// Readout that sets the logical X correction of the output.
    XReadout,
    /// Readout that sets the logical Z correction of the output.
    ZReadout,
}

impl WordRole {
    fn keyword(self) -> &'static str {
        match self {
            WordRole::Verify => "verify",
            WordRole::VerifySyndrome => "verify-syndrome",
            WordRole::XReadout => "x-readout",
            WordRole::ZReadout => "z-readout",
        }
    }

    fn from_keyword(s: &str) -> Option<Self> {
        [
            WordRole::Verify,
            WordRole::VerifySyndrome,
            WordRole::XReadout,
            WordRole::ZReadout,
        ]
            .into_iter()
            .find(|r| r.keyword() == s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MeasuredWord {
    pub role: WordRole,
    pub qubits: [usize; BLOCK],
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TelecorrectionCircuitSpec {
    pub n_qubits: usize,
    pub data: [usize; BLOCK],
    pub output: [usize; BLOCK],
    pub words: Vec<MeasuredWord>,
    pub locations: Vec<Location>,
}

// Graph for the even Hamming subcode: pivots {0, 1, 3} each joined to the
// other positions of their parity row, split into three matchings.
const GRAPH_LAYERS: [[(usize, usize); 3]; 3] = [
    [(0, 2), (1, 6), (3, 4)],
    [(0, 4), (1, 5), (3, 6)],
    [(0, 6), (1, 2), (3, 5)],
];
const PIVOTS: [usize; 3] = [0, 1, 3];
const TARGETS: [usize; 4] = [2, 4, 5, 6];

#[derive(Clone, Copy, PartialEq, Eq)]
enum BlockState {
    Zero,
    Plus,
}

struct Builder {
    n_qubits: usize,
    ops: Vec<(usize, Location)>,
    next_free: Vec<usize>,
    born: Vec<Option<usize>>,
    died: Vec<Option<usize>>,
}

impl Builder {
    fn new(n_qubits: usize) -> Self {
        Builder {
            n_qubits,
            ops: Vec::new(),
            next_free: vec![0; n_qubits],
            born: vec![None; n_qubits],
            died: vec![None; n_qubits],
        }
    }

    fn push(&mut self, kind: LocationKind, qubits: &[usize]) {
        let layer = qubits.iter().map(|&q| self.next_free[q]).max().unwrap_or(0);
        for &q in qubits {
            self.next_free[q] = layer + 1;
            self.born[q].get_or_insert(layer);
        }
        if kind == LocationKind::XMeasure {
            self.died[qubits[0]] = Some(layer);
        }
        self.ops.push((
            layer,
            Location {
                kind,
                qubits: qubits.to_vec(),
            },
        ));
    }

    /// Holds `qubits` idle from `layer` on (used for the arriving data block).
    fn arrive(&mut self, qubits: &[usize], layer: usize) {
        for &q in qubits {
            self.born[q] = Some(layer);
            self.next_free[q] = layer;
        }
    }

    fn prep_block(&mut self, b: [usize; BLOCK], state: BlockState) {
        for q in b {
            self.push(LocationKind::PlusPrep, &[q]);
        }
        for layer in GRAPH_LAYERS {
            for (p, t) in layer {
                self.push(LocationKind::Cz, &[b[p], b[t]]);
            }
        }
        let rotated: &[usize] = match state {
            BlockState::Zero => &TARGETS,
            BlockState::Plus => &PIVOTS,
        };
        for &i in rotated {
            self.push(LocationKind::Hadamard, &[b[i]]);
        }
    }

    fn transversal(&mut self, kind: LocationKind, a: [usize; BLOCK], b: Option<[usize; BLOCK]>) {
        for i in 0..BLOCK {
            match b {
                Some(b) => self.push(kind, &[a[i], b[i]]),
                None => self.push(kind, &[a[i]]),
            }
        }
    }

    fn finish(self) -> Vec<Location> {
        let end = self.ops.iter().map(|(l, _)| *l).max().unwrap_or(0);
        let mut busy = vec![vec![false; self.n_qubits]; end + 1];
        for (l, loc) in &self.ops {
            for &q in &loc.qubits {
                busy[*l][q] = true;
            }
        }
        let mut layered: Vec<(usize, usize, Location)> = self
            .ops
            .into_iter()
            .enumerate()
            .map(|(i, (l, loc))| (l, i, loc))
            .collect();
        let mut order = layered.len();
        for q in 0..self.n_qubits {
            let Some(from) = self.born[q] else { continue };
            let to = self.died[q].unwrap_or(end);
            for (l, row) in busy.iter().enumerate().take(to + 1).skip(from) {
                if !row[q] {
                    layered.push((
                        l,
                        order,
                        Location {
                            kind: LocationKind::Memory,
                            qubits: vec![q],
                        },
                    ));
                    order += 1;
                }
            }
        }
        layered.sort_by_key(|(l, i, _)| (*l, *i));
        layered.into_iter().map(|(_, _, loc)| loc).collect()
    }
}

fn block(start: usize) -> [usize; BLOCK] {
    std::array::from_fn(|i| start + i)
}

impl TelecorrectionCircuitSpec {
    /// One round of error correction by teleportation for the seven-qubit
    /// code.
    ///
    /// Each of the two ancilla blocks starts as a `|0⟩` codeword, is checked
    /// for bit flips against a `|+⟩` codeword, rotated to `|+⟩`, and checked
    /// for bit flips again against a `|0⟩` codeword that was itself checked
    /// the same way. A transversal CZ entangles the ancillas; a transversal CZ
    /// with the data block followed by X measurements of data and first
    /// ancilla teleports the data onto the second ancilla. The data block
    /// joins only for that last step.
    pub fn default_round() -> Self {
        let data = block(0);
        let anc = block(7);
        let out = block(14);
        let mut words = Vec::new();
        let mut b = Builder::new(9 * BLOCK);
        for (i, y) in [anc, out].into_iter().enumerate() {
            let first = block(21 + 21 * i);
            let second = block(28 + 21 * i);
            let inner = block(35 + 21 * i);
            b.prep_block(y, BlockState::Zero);
            b.prep_block(first, BlockState::Plus);
            b.prep_block(second, BlockState::Zero);
            b.prep_block(inner, BlockState::Plus);
            b.transversal(LocationKind::Cz, y, Some(first));
            b.transversal(LocationKind::Cz, second, Some(inner));
            b.transversal(LocationKind::XMeasure, first, None);
            b.transversal(LocationKind::XMeasure, inner, None);
            b.transversal(LocationKind::Hadamard, y, None);
            b.transversal(LocationKind::Cz, y, Some(second));
            b.transversal(LocationKind::XMeasure, second, None);
            words.push(MeasuredWord {
                role: WordRole::Verify,
                qubits: first,
            });
            words.push(MeasuredWord {
                role: WordRole::Verify,
                qubits: inner,
            });
            words.push(MeasuredWord {
                role: WordRole::VerifySyndrome,
                qubits: second,
            });
        }
        b.transversal(LocationKind::Cz, anc, Some(out));
        let ready = b.next_free[anc[0]];
        b.arrive(&data, ready);
        b.transversal(LocationKind::Cz, data, Some(anc));
        b.transversal(LocationKind::XMeasure, data, None);
        b.transversal(LocationKind::XMeasure, anc, None);
        words.push(MeasuredWord {
            role: WordRole::ZReadout,
            qubits: data,
        });
        words.push(MeasuredWord {
            role: WordRole::XReadout,
            qubits: anc,
        });
        TelecorrectionCircuitSpec {
            n_qubits: 9 * BLOCK,
            data,
            output: out,
            words,
            locations: b.finish(),
        }
    }

    pub fn count(&self, kind: LocationKind) -> usize {
        self.locations.iter().filter(|l| l.kind == kind).count()
    }

    /// Share of each location type, in [`LocationKind::ALL`] order.
    pub fn fractions(&self) -> Vec<(LocationKind, f64)> {
        let total = self.locations.len() as f64;
        LocationKind::ALL
            .into_iter()
            .map(|k| (k, self.count(k) as f64 / total))
            .collect()
    }

    /// Checks wiring: qubit ranges, arities, prepare-before-use, nothing after
    /// measurement, and that every word is fully measured.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::CircuitParse { line: 0, msg });
        let mut live = vec![false; self.n_qubits];
        let mut measured = vec![false; self.n_qubits];
        for &q in &self.data {
            if q >= self.n_qubits {
                return bad(format!("data qubit {q} out of range"));
            }
            live[q] = true;
        }
        for (i, loc) in self.locations.iter().enumerate() {
            if loc.qubits.len() != loc.kind.arity() {
                return bad(format!("location {i}: wrong number of qubits"));
            }
            if loc.kind == LocationKind::Cz && loc.qubits[0] == loc.qubits[1] {
                return bad(format!("location {i}: cz on a single qubit"));
            }
            for &q in &loc.qubits {
                if q >= self.n_qubits {
                    return bad(format!("location {i}: qubit {q} out of range"));
                }
                if measured[q] {
                    return bad(format!("location {i}: qubit {q} used after measurement"));
                }
                if loc.kind == LocationKind::PlusPrep {
                    if live[q] {
                        return bad(format!("location {i}: qubit {q} prepared twice"));
                    }
                    live[q] = true;
                } else if !live[q] {
                    return bad(format!("location {i}: qubit {q} used before preparation"));
                }
                if loc.kind == LocationKind::XMeasure {
                    measured[q] = true;
                }
            }
        }
        for w in &self.words {
            for &q in &w.qubits {
                if q >= self.n_qubits || !measured[q] {
                    return bad(format!("word qubit {q} is never measured"));
                }
            }
        }
        for &q in &self.output {
            if q >= self.n_qubits || !live[q] || measured[q] {
                return bad(format!("output qubit {q} is not live at the end"));
            }
        }
        Ok(())
    }

    /// Line-oriented text form; [`Self::parse`] reads it back.
    pub fn to_text(&self) -> String {
        let join = |qs: &[usize]| qs.iter().map(|q| q.to_string()).collect::<Vec<_>>().join(" ");
        let mut s = String::new();
        writeln!(s, "qubits {}", self.n_qubits).unwrap();
        writeln!(s, "data {}", join(&self.data)).unwrap();
        writeln!(s, "output {}", join(&self.output)).unwrap();
        for w in &self.words {
            writeln!(s, "word {} {}", w.role.keyword(), join(&w.qubits)).unwrap();
        }
        for loc in &self.locations {
            writeln!(s, "{} {}", loc.kind.keyword(), join(&loc.qubits)).unwrap();
        }
        s
    }

    /// Parses the text form. `#` starts a comment; blank lines are ignored.
    pub fn parse(text: &str) -> Result<Self> {
        let mut n_qubits = None;
        let mut data = None;
        let mut output = None;
        let mut words = Vec::new();
        let mut locations = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let err = |msg: &str| Error::CircuitParse {
                line,
                msg: msg.to_string(),
            };
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let mut fields = content.split_whitespace();
            let head = fields.next().expect("non-empty line");
            let rest: Vec<&str> = fields.collect();
            let nums = |xs: &[&str]| -> Result<Vec<usize>> {
                xs.iter()
                    .map(|x| x.parse::<usize>().map_err(|_| err(&format!("bad qubit index '{x}'"))))
                    .collect()
            };
            let block_of = |xs: &[&str]| -> Result<[usize; BLOCK]> {
                let v = nums(xs)?;
                v.try_into().map_err(|_| err("a block needs exactly 7 qubits"))
            };
            match head {
                "qubits" => {
                    let v = nums(&rest)?;
                    if v.len() != 1 {
                        return Err(err("qubits takes one count"));
                    }
                    n_qubits = Some(v[0]);
                }
                "data" => data = Some(block_of(&rest)?),
                "output" => output = Some(block_of(&rest)?),
                "word" => {
                    let role = rest
                        .first()
                        .and_then(|r| WordRole::from_keyword(r))
                        .ok_or_else(|| err("word needs a role: verify, verify-syndrome, x-readout or z-readout"))?;
                    words.push(MeasuredWord {
                        role,
                        qubits: block_of(&rest[1..])?,
                    });
                }
                other => {
                    let kind = LocationKind::from_keyword(other)
                        .ok_or_else(|| err(&format!("unknown location type '{other}'")))?;
                    let qubits = nums(&rest)?;
                    if qubits.len() != kind.arity() {
                        return Err(err(&format!("{other} takes {} qubit(s)", kind.arity())));
                    }
                    locations.push(Location { kind, qubits });
                }
            }
        }
        let missing = |what: &str| Error::CircuitParse {
            line: 0,
            msg: format!("missing '{what}' line"),
        };
        let spec = TelecorrectionCircuitSpec {
            n_qubits: n_qubits.ok_or_else(|| missing("qubits"))?,
            data: data.ok_or_else(|| missing("data"))?,
            output: output.ok_or_else(|| missing("output"))?,
            words,
            locations,
        };
        spec.validate()?;
        Ok(spec)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_round_is_valid() {
        let c = TelecorrectionCircuitSpec::default_round();
        c.validate().unwrap();
        assert_eq!(c.count(LocationKind::PlusPrep), 56);
        assert_eq!(c.count(LocationKind::XMeasure), 56);
        assert_eq!(c.count(LocationKind::Cz), 128);
    }

    #[test]
    fn default_round_fractions() {
        let c = TelecorrectionCircuitSpec::default_round();
        let f: std::collections::HashMap<_, _> = c.fractions().into_iter().collect();
        // targets for H, CZ and |+⟩ preparation are met within 0.02
        assert!((f[&LocationKind::Hadamard] - 0.098).abs() <= 0.02);
        assert!((f[&LocationKind::Cz] - 0.343).abs() <= 0.02);
        assert!((f[&LocationKind::PlusPrep] - 0.164).abs() <= 0.02);
        // every prepared qubit is measured, so these two counts must agree;
        // the memory share absorbs the rest
        assert_eq!(c.count(LocationKind::PlusPrep), c.count(LocationKind::XMeasure));
        let sum: f64 = f.values().sum();
        assert!((sum - 1.0).abs() < 1e-12);
    }

    #[test]
    fn text_round_trip() {
        let c = TelecorrectionCircuitSpec::default_round();
        let back = TelecorrectionCircuitSpec::parse(&c.to_text()).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let text = "qubits 2\ndata 0 0 0 0 0 0 0\nfoo 1\n";
        match TelecorrectionCircuitSpec::parse(text) {
            Err(Error::CircuitParse { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
        let text = "qubits 2\ncz 1\n";
        assert!(matches!(
            TelecorrectionCircuitSpec::parse(text),
            Err(Error::CircuitParse { line: 2, .. })
        ));
    }

    #[test]
    fn use_after_measure_is_rejected() {
        let mut c = TelecorrectionCircuitSpec::default_round();
        let q = c.data[0];
        c.locations.push(Location {
            kind: LocationKind::Memory,
            qubits: vec![q],
        });
        assert!(c.validate().is_err());
    }

    #[test]
    fn block_preparation_gives_codewords() {
        // Dense simulation of one block: |0⟩ form is the uniform superposition
        // of the even Hamming codewords.
        let even: Vec<usize> = (0..128usize)
            .filter(|w| {
                let syn = (0..7).filter(|i| w >> i & 1 == 1).fold(0, |s, i| s ^ (i + 1));
                syn == 0 && w.count_ones() % 2 == 0
            })
            .collect();
        assert_eq!(even.len(), 8);
        let mut b = Builder::new(7);
        b.prep_block(block(0), BlockState::Zero);
        let mut amps = vec![0.0f64; 128];
        amps[0] = 1.0;
        let h = std::f64::consts::FRAC_1_SQRT_2;
        for (_, loc) in &b.ops {
            match loc.kind {
                LocationKind::PlusPrep | LocationKind::Hadamard => {
                    let bit = 1 << loc.qubits[0];
                    for i in 0..128 {
                        if i & bit == 0 {
                            let (a0, a1) = (amps[i], amps[i | bit]);
                            amps[i] = h * (a0 + a1);
                            amps[i | bit] = h * (a0 - a1);
                        }
                    }
                }
                LocationKind::Cz => {
                    let m = (1 << loc.qubits[0]) | (1 << loc.qubits[1]);
                    for (i, a) in amps.iter_mut().enumerate() {
                        if i & m == m {
                            *a = -*a;
                        }
                    }
                }
                _ => unreachable!(),
            }
        }
        for (i, a) in amps.iter().enumerate() {
            let expect = if even.contains(&i) { 1.0 / 8f64.sqrt() } else { 0.0 };
            assert!((a - expect).abs() < 1e-12, "{i}: {a}");
        }
    }
}
