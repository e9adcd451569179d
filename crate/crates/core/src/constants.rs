//! Physical constants and the two supported unit systems.
//!
//! All formulas in the crate carry `hbar`, `k_b`, `c` and `e` explicitly, so
//! the same code runs in Gaussian CGS or in the natural system where
//! `hbar = k_b = c = 1` and the charge satisfies `e^2 = alpha_fs`.

// Unused whenever std is linked; needed for the float methods without it.
#[allow(unused_imports)]
use num_traits::Float;

/// Inverse fine-structure constant (CODATA 2018).
pub const INVERSE_FINE_STRUCTURE: f64 = 137.035_999_084;

/// Electron rest mass in grams.
pub const ELECTRON_MASS_CGS: f64 = 9.109_383_701_5e-28;

/// Constants entering the bath and response formulas.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalConstants {
    /// Reduced Planck constant.
    pub hbar: f64,
    /// Boltzmann constant.
    pub k_b: f64,
    /// Speed of light.
    pub c: f64,
    /// Elementary charge (Gaussian units).
    pub e: f64,
    /// Fine-structure constant `e^2 / (hbar c)`.
    pub alpha_fs: f64,
}

impl PhysicalConstants {
    /// Natural units: `hbar = k_b = c = 1`, `e^2 = alpha_fs = 1/137.036`.
    pub fn dimensionless() -> Self {
        let alpha_fs = 1.0 / INVERSE_FINE_STRUCTURE;
        Self {
            hbar: 1.0,
            k_b: 1.0,
            c: 1.0,
            e: alpha_fs.sqrt(),
            alpha_fs,
        }
    }

    /// Gaussian CGS (erg, s, cm, K, statC).
    pub fn cgs() -> Self {
        let hbar = 1.054_571_817e-27;
        let c = 2.997_924_58e10;
        let e = 4.803_204_712_570_263e-10;
        Self {
            hbar,
            k_b: 1.380_649e-16,
            c,
            e,
            alpha_fs: e * e / (hbar * c),
        }
    }

    /// Returns a copy with `e^2` (and therefore `alpha_fs`) multiplied by `scale`.
    ///
    /// Used to take the weak-coupling limit without touching the other constants.
    pub fn with_coupling_scale(&self, scale: f64) -> Self {
        Self {
            e: self.e * scale.sqrt(),
            alpha_fs: self.alpha_fs * scale,
            ..*self
        }
    }

    /// `e^2`.
    pub fn e2(&self) -> f64 {
        self.e * self.e
    }

    /// `2 e^2 / 3 c^3`, the radiation-reaction mass-time product.
    pub fn radiation_coefficient(&self) -> f64 {
        2.0 * self.e2() / (3.0 * self.c.powi(3))
    }

    /// Relative mismatch between `alpha_fs` and `e^2 / (hbar c)`.
    pub fn consistency_error(&self) -> f64 {
        let derived = self.e2() / (self.hbar * self.c);
        ((derived - self.alpha_fs) / self.alpha_fs).abs()
    }
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self::dimensionless()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn alpha_matches_charge_in_both_systems() {
        for k in [PhysicalConstants::dimensionless(), PhysicalConstants::cgs()] {
            assert!(k.consistency_error() < 1e-14, "{k:?}");
        }
    }

    #[test]
    fn cgs_alpha_in_expected_window() {
        let a = PhysicalConstants::cgs().alpha_fs;
        assert!((1.0 / 137.04..=1.0 / 137.03).contains(&a), "{}", 1.0 / a);
    }

    #[test]
    fn coupling_scale_keeps_identity() {
        let k = PhysicalConstants::dimensionless().with_coupling_scale(1e-3);
        assert!(k.consistency_error() < 1e-14);
        assert!((k.alpha_fs * INVERSE_FINE_STRUCTURE - 1e-3).abs() < 1e-15);
    }
}
