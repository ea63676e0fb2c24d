//! Bell-measurement success probability against mean photon number for
//! competing linear-optical schemes.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::fmt;

/// Success probability reported for the squeezing-assisted scheme at its
/// optimal squeezing, dual-rail encoding.
pub const ZAIDI_OPTIMAL_PS: f64 = 0.643;
/// Squeezing parameter of that operating point.
pub const ZAIDI_OPTIMAL_R: f64 = 0.6585;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SchemeId {
    Ours,
    EwertParity { m: u32 },
    Grice,
    EwertAncilla,
    ZaidiSqueeze,
    CoherentState,
    Hybrid,
}

impl fmt::Display for SchemeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SchemeId::Ours => f.write_str("ours"),
            SchemeId::EwertParity { m } => write!(f, "ewert_parity_m{m}"),
            SchemeId::Grice => f.write_str("grice"),
            SchemeId::EwertAncilla => f.write_str("ewert_ancilla"),
            SchemeId::ZaidiSqueeze => f.write_str("zaidi_squeeze"),
            SchemeId::CoherentState => f.write_str("coherent"),
            SchemeId::Hybrid => f.write_str("hybrid"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SchemeCurvePoint {
    pub scheme: SchemeId,
    pub nbar: f64,
    pub ps: f64,
    /// True where the mean photon number is realizable by the scheme
    /// (e.g. even photon numbers for the GHZ encoding).
    pub is_physical_point: bool,
}

/// `1 − 2^{−n̄/2}` with `n̄ = 2N`.
pub fn ps_ours(nbar: f64) -> f64 {
    1.0 - (-nbar / 2.0).exp2()
}

/// `1 − 1/n̄` with `n̄ = 2^{N_a}`.
pub fn ps_grice(nbar: f64) -> f64 {
    1.0 - 1.0 / nbar
}

/// `1 − 2^{−n̄/4 − 1/2}` with `n̄ = 4 N_m + 2`.
pub fn ps_ewert_ancilla(nbar: f64) -> f64 {
    1.0 - (-nbar / 4.0 - 0.5).exp2()
}

/// `1 − 2^{−n̄/(2m)}` for parity encoding with blocks of `m` photons.
pub fn ps_ewert_parity(nbar: f64, m: u32) -> f64 {
    1.0 - (-nbar / (2.0 * m as f64)).exp2()
}

/// `1 − e^{−n̄+2}/2` with `n̄ = 2 + 2α²`.
pub fn ps_hybrid(nbar: f64) -> f64 {
    1.0 - (2.0 - nbar).exp() / 2.0
}

/// Mean photon number of the four squeezed dual-rail modes,
/// `2 cosh 2r + 4 sinh² r`, and the success probability where it is known.
pub fn zaidi_point(r: f64) -> Result<(f64, Option<f64>)> {
    if r < 0.0 || r.is_nan() {
        return Err(Error::Domain(format!("squeezing parameter {r} must be >= 0")));
    }
    let nbar = 2.0 * (2.0 * r).cosh() + 4.0 * r.sinh().powi(2);
    let ps = (r == ZAIDI_OPTIMAL_R).then_some(ZAIDI_OPTIMAL_PS);
    Ok((nbar, ps))
}

/// Mean photon number averaged over the four coherent-state Bell states.
pub fn coherent_nbar(alpha: f64) -> Result<f64> {
    if alpha <= 0.0 || alpha.is_nan() {
        return Err(Error::Domain(format!("coherent amplitude {alpha} must be > 0")));
    }
    let a2 = alpha * alpha;
    let e2 = (-2.0 * a2).exp();
    let e4 = (-4.0 * a2).exp();
    // 1 − e^{−4α²} computed with exp_m1 to stay accurate for small α
    let one_minus_e4 = -(-4.0 * a2).exp_m1();
    Ok(a2 * ((1.0 - e2) / (1.0 + e4) + (1.0 + e2) / one_minus_e4))
}

/// `(n̄, P_s)` for coherent-state qubits with amplitude `alpha`,
/// `P_s = 1 − 1/(2 cosh 2α²)`.
pub fn coherent_scheme(alpha: f64) -> Result<(f64, f64)> {
    let nbar = coherent_nbar(alpha)?;
    let ps = 1.0 - 1.0 / (2.0 * (2.0 * alpha * alpha).cosh());
    Ok((nbar, ps))
}

/// Amplitude giving mean photon number `nbar`, by bisection on the monotone
/// branch `n̄(α)`.
pub fn coherent_alpha_for_nbar(nbar: f64) -> Result<f64> {
    let (mut lo, mut hi) = (1e-3, 1.0);
    if nbar <= coherent_nbar(lo)? {
        return Err(Error::Domain(format!("mean photon number {nbar} below the coherent range")));
    }
    while coherent_nbar(hi)? < nbar {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if coherent_nbar(mid)? < nbar {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

pub fn ps_coherent_at(nbar: f64) -> Result<f64> {
    coherent_scheme(coherent_alpha_for_nbar(nbar)?).map(|(_, ps)| ps)
}

/// Curves emitted for the scheme comparison, in CSV row order.
pub const CURVES: [SchemeId; 7] = [
    SchemeId::CoherentState,
    SchemeId::Hybrid,
    SchemeId::Ours,
    SchemeId::EwertParity { m: 1 },
    SchemeId::EwertParity { m: 2 },
    SchemeId::Grice,
    SchemeId::EwertAncilla,
];

fn is_integer(x: f64) -> bool {
    (x - x.round()).abs() < 1e-9
}

fn is_physical(scheme: SchemeId, nbar: f64) -> bool {
    match scheme {
        SchemeId::Ours => is_integer(nbar / 2.0),
        SchemeId::EwertParity { m } => is_integer(nbar / (2.0 * m as f64)),
        SchemeId::Grice => {
            let k = nbar.log2();
            is_integer(k) && k >= 1.0
        }
        SchemeId::EwertAncilla => is_integer((nbar - 2.0) / 4.0) && nbar >= 2.0,
        // α is continuous
        SchemeId::CoherentState | SchemeId::Hybrid => true,
        SchemeId::ZaidiSqueeze => true,
    }
}

/// Success probability of `scheme` at mean photon number `nbar`.
pub fn ps_at(scheme: SchemeId, nbar: f64) -> Result<f64> {
    Ok(match scheme {
        SchemeId::Ours => ps_ours(nbar),
        SchemeId::EwertParity { m } => ps_ewert_parity(nbar, m),
        SchemeId::Grice => ps_grice(nbar),
        SchemeId::EwertAncilla => ps_ewert_ancilla(nbar),
        SchemeId::Hybrid => ps_hybrid(nbar),
        SchemeId::CoherentState => ps_coherent_at(nbar)?,
        SchemeId::ZaidiSqueeze => {
            return Err(Error::Domain("the squeezing scheme is a single operating point".into()))
        }
    })
}

/// Inclusive grid `start, start + step, …, end`.
pub fn grid(start: f64, end: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0) || end < start {
        return Err(Error::Domain("grid needs step > 0 and end >= start".into()));
    }
    let n = ((end - start) / step + 1e-9).floor() as usize;
    Ok((0..=n).map(|i| start + i as f64 * step).collect())
}

/// All curves on `nbar_grid` followed by the single squeezing-scheme point.
pub fn generate_figure2(nbar_grid: &[f64]) -> Result<Vec<SchemeCurvePoint>> {
    if let Some(bad) = nbar_grid.iter().find(|x| !(2.0..=20.0).contains(*x)) {
        return Err(Error::Domain(format!("grid point {bad} outside [2, 20]")));
    }
    let mut out = Vec::with_capacity(CURVES.len() * nbar_grid.len() + 1);
    for scheme in CURVES {
        for &nbar in nbar_grid {
            out.push(SchemeCurvePoint {
                scheme,
                nbar,
                ps: ps_at(scheme, nbar)?,
                is_physical_point: is_physical(scheme, nbar),
            });
        }
    }
    let (nbar, ps) = zaidi_point(ZAIDI_OPTIMAL_R)?;
    out.push(SchemeCurvePoint {
        scheme: SchemeId::ZaidiSqueeze,
        nbar,
        ps: ps.expect("optimal point carries a success probability"),
        is_physical_point: true,
    });
    Ok(out)
}
