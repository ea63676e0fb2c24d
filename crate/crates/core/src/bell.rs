//! Two-qubit Bell-state labels shared by the photonic and logical layers.

use serde::{Deserialize, Serialize};
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Family {
    Phi,
    Psi,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn from_parity(odd: bool) -> Self {
        if odd {
            Sign::Minus
        } else {
            Sign::Plus
        }
    }

    pub fn is_minus(self) -> bool {
        self == Sign::Minus
    }
}

/// One of the four Bell states
/// `Φ± = (|00⟩ ± |11⟩)/√2`, `Ψ± = (|01⟩ ± |10⟩)/√2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum BellState {
    PhiPlus,
    PhiMinus,
    PsiPlus,
    PsiMinus,
}

impl BellState {
    pub const ALL: [BellState; 4] = [
        BellState::PhiPlus,
        BellState::PhiMinus,
        BellState::PsiPlus,
        BellState::PsiMinus,
    ];

    pub fn new(family: Family, sign: Sign) -> Self {
        match (family, sign) {
            (Family::Phi, Sign::Plus) => BellState::PhiPlus,
            (Family::Phi, Sign::Minus) => BellState::PhiMinus,
            (Family::Psi, Sign::Plus) => BellState::PsiPlus,
            (Family::Psi, Sign::Minus) => BellState::PsiMinus,
        }
    }

    pub fn family(self) -> Family {
        match self {
            BellState::PhiPlus | BellState::PhiMinus => Family::Phi,
            BellState::PsiPlus | BellState::PsiMinus => Family::Psi,
        }
    }

    pub fn sign(self) -> Sign {
        match self {
            BellState::PhiPlus | BellState::PsiPlus => Sign::Plus,
            BellState::PhiMinus | BellState::PsiMinus => Sign::Minus,
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }

    /// Amplitudes over the computational basis `{00, 01, 10, 11}`.
    pub fn amplitudes(self) -> [f64; 4] {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        match self {
            BellState::PhiPlus => [h, 0.0, 0.0, h],
            BellState::PhiMinus => [h, 0.0, 0.0, -h],
            BellState::PsiPlus => [0.0, h, h, 0.0],
            BellState::PsiMinus => [0.0, h, -h, 0.0],
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            BellState::PhiPlus => "Phi+",
            BellState::PhiMinus => "Phi-",
            BellState::PsiPlus => "Psi+",
            BellState::PsiMinus => "Psi-",
        }
    }
}

impl fmt::Display for BellState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}
