//! Heat-bath memory kernels `mu~(z)` on the closed upper half plane.
//!
//! Every variant is a rational function of `z`, so "on the real axis"
//! (`omega + i0+`) is evaluated by substituting a real `z` into the closed
//! form. No small imaginary offset is ever used.

use num_complex::Complex64;

use crate::constants::PhysicalConstants;
use crate::error::{Error, Result};

/// Electron form factor `f_k^2 = Omega^2 / (omega^2 + Omega^2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FormFactor {
    pub cutoff: f64,
}

impl FormFactor {
    pub fn new(cutoff: f64) -> Result<Self> {
        if !(cutoff.is_finite() && cutoff > 0.0) {
            return Err(Error::InvalidArgument(alloc::format!(
                "form-factor cutoff must be positive and finite, got {cutoff}"
            )));
        }
        Ok(Self { cutoff })
    }

    /// `f_k^2(omega)`.
    pub fn squared(&self, omega: f64) -> Result<f64> {
        if !omega.is_finite() {
            return Err(Error::NonFinite("omega"));
        }
        Ok(form_factor_sq(self.cutoff, omega))
    }
}

#[inline]
pub(crate) fn form_factor_sq(cutoff: f64, omega: f64) -> f64 {
    let w = omega / cutoff;
    1.0 / (1.0 + w * w)
}

/// A heat-bath model described by its memory function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MemoryKernel {
    /// Memoryless friction, `mu~ = m gamma`.
    Ohmic { gamma: f64, mass: f64 },
    /// Exponentially decaying memory, `mu~ = m gamma / (1 - i z tau)`.
    SingleRelaxation { gamma: f64, tau: f64, mass: f64 },
    /// Blackbody radiation field seen by a charge with form-factor cutoff `cutoff`.
    /// `mass` is the observed (renormalized) mass.
    Blackbody {
        cutoff: f64,
        constants: PhysicalConstants,
        mass: f64,
    },
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(alloc::format!(
            "{name} must be positive and finite, got {v}"
        )))
    }
}

impl MemoryKernel {
    pub fn ohmic(gamma: f64, mass: f64) -> Result<Self> {
        if !(gamma.is_finite() && gamma >= 0.0) {
            return Err(Error::InvalidArgument(alloc::format!(
                "gamma must be non-negative, got {gamma}"
            )));
        }
        check_positive("mass", mass)?;
        Ok(Self::Ohmic { gamma, mass })
    }

    pub fn single_relaxation(gamma: f64, tau: f64, mass: f64) -> Result<Self> {
        if !(gamma.is_finite() && gamma >= 0.0) {
            return Err(Error::InvalidArgument(alloc::format!(
                "gamma must be non-negative, got {gamma}"
            )));
        }
        check_positive("tau", tau)?;
        check_positive("mass", mass)?;
        Ok(Self::SingleRelaxation { gamma, tau, mass })
    }

    pub fn blackbody(cutoff: f64, constants: PhysicalConstants, mass: f64) -> Result<Self> {
        check_positive("cutoff", cutoff)?;
        check_positive("mass", mass)?;
        Ok(Self::Blackbody {
            cutoff,
            constants,
            mass,
        })
    }

    /// Observed particle mass carried by the kernel.
    pub fn observed_mass(&self) -> f64 {
        match *self {
            Self::Ohmic { mass, .. }
            | Self::SingleRelaxation { mass, .. }
            | Self::Blackbody { mass, .. } => mass,
        }
    }

    /// Mass multiplying `z^2` in the susceptibility denominator.
    ///
    /// For the blackbody bath this is the bare mass `M - (2e^2/3c^3) Omega`,
    /// which is non-positive for cutoffs at or beyond `1/tau_e`.
    pub fn inertial_mass(&self) -> f64 {
        match *self {
            Self::Blackbody {
                cutoff,
                constants,
                mass,
            } => mass - constants.radiation_coefficient() * cutoff,
            _ => self.observed_mass(),
        }
    }

    /// `2 e^2 Omega^2 / 3 c^3`, the high-frequency limit of the blackbody kernel.
    pub fn blackbody_scale(&self) -> Option<f64> {
        match *self {
            Self::Blackbody {
                cutoff, constants, ..
            } => Some(constants.radiation_coefficient() * cutoff * cutoff),
            _ => None,
        }
    }

    /// `mu~(z)` for `Im z >= 0`.
    pub fn mu_tilde(&self, z: Complex64) -> Result<Complex64> {
        check_upper(z)?;
        Ok(self.eval(z))
    }

    /// `d mu~ / dz` for `Im z >= 0`.
    pub fn mu_tilde_derivative(&self, z: Complex64) -> Result<Complex64> {
        check_upper(z)?;
        Ok(self.eval_derivative(z))
    }

    /// `mu~(omega + i0+)` for real `omega`.
    pub fn on_real_axis(&self, omega: f64) -> Complex64 {
        self.eval(Complex64::new(omega, 0.0))
    }

    /// `Re mu~(omega + i0+)`, written without cancellation.
    pub fn real_part(&self, omega: f64) -> f64 {
        match *self {
            Self::Ohmic { gamma, mass } => mass * gamma,
            Self::SingleRelaxation { gamma, tau, mass } => {
                let wt = omega * tau;
                mass * gamma / (1.0 + wt * wt)
            }
            Self::Blackbody {
                cutoff, constants, ..
            } => constants.radiation_coefficient() * omega * omega * form_factor_sq(cutoff, omega),
        }
    }

    pub(crate) fn eval(&self, z: Complex64) -> Complex64 {
        let i = Complex64::i();
        match *self {
            Self::Ohmic { gamma, mass } => Complex64::new(mass * gamma, 0.0),
            Self::SingleRelaxation { gamma, tau, mass } => {
                Complex64::new(mass * gamma, 0.0) / (Complex64::new(1.0, 0.0) - i * z * tau)
            }
            Self::Blackbody { cutoff, .. } => {
                let a = self.blackbody_scale().unwrap_or(0.0);
                z * a / (z + i * cutoff)
            }
        }
    }

    pub(crate) fn eval_derivative(&self, z: Complex64) -> Complex64 {
        let i = Complex64::i();
        match *self {
            Self::Ohmic { .. } => Complex64::new(0.0, 0.0),
            Self::SingleRelaxation { gamma, tau, mass } => {
                let d = Complex64::new(1.0, 0.0) - i * z * tau;
                i * (mass * gamma * tau) / (d * d)
            }
            Self::Blackbody { cutoff, .. } => {
                let a = self.blackbody_scale().unwrap_or(0.0);
                let d = z + i * cutoff;
                i * (a * cutoff) / (d * d)
            }
        }
    }

    /// Frequencies above which the kernel has no further structure.
    pub(crate) fn structure_frequencies(&self) -> [f64; 2] {
        match *self {
            Self::Ohmic { gamma, .. } => [gamma, gamma],
            Self::SingleRelaxation { gamma, tau, .. } => [gamma, 1.0 / tau],
            Self::Blackbody { cutoff, mass, .. } => {
                let m = self.inertial_mass();
                let pole = if m > 0.0 { cutoff * mass / m } else { cutoff };
                [cutoff, pole]
            }
        }
    }
}

fn check_upper(z: Complex64) -> Result<()> {
    if !(z.re.is_finite() && z.im.is_finite()) {
        return Err(Error::NonFinite("z"));
    }
    if z.im < 0.0 {
        return Err(Error::LowerHalfPlane { re: z.re, im: z.im });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn bb() -> MemoryKernel {
        MemoryKernel::blackbody(50.0, PhysicalConstants::dimensionless(), 1.0).unwrap()
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
    }

    #[test]
    fn form_factor_values() {
        let ff = FormFactor::new(2.0).unwrap();
        assert_eq!(ff.squared(0.0).unwrap(), 1.0);
        assert_eq!(ff.squared(2.0).unwrap(), 0.5);
        assert!(rel(ff.squared(6.0).unwrap(), 0.1) < 1e-15);
        assert!(ff.squared(f64::NAN).is_err());
        assert!(FormFactor::new(0.0).is_err());
    }

    #[test]
    fn blackbody_limits() {
        let k = bb();
        assert_eq!(
            k.mu_tilde(Complex64::new(0.0, 0.0)).unwrap(),
            Complex64::new(0.0, 0.0)
        );
        let a = k.blackbody_scale().unwrap();
        let far = k.mu_tilde(Complex64::new(1e12, 0.0)).unwrap();
        assert!(rel(far.re, a) < 1e-12 && far.im.abs() < 1e-9 * a);
    }

    #[test]
    fn ohmic_is_constant() {
        let k = MemoryKernel::ohmic(0.3, 2.0).unwrap();
        for z in [
            Complex64::new(0.0, 0.0),
            Complex64::new(-4.0, 1.0),
            Complex64::new(1e5, 3.0),
        ] {
            assert_eq!(k.mu_tilde(z).unwrap(), Complex64::new(0.6, 0.0));
        }
    }

    #[test]
    fn rejects_lower_half_and_nan() {
        let k = bb();
        assert!(matches!(
            k.mu_tilde(Complex64::new(1.0, -1e-3)),
            Err(Error::LowerHalfPlane { .. })
        ));
        assert!(matches!(
            k.mu_tilde(Complex64::new(f64::NAN, 0.0)),
            Err(Error::NonFinite(_))
        ));
    }

    #[test]
    fn blackbody_real_part_matches_form_factor_over_eight_decades() {
        let k = bb();
        let MemoryKernel::Blackbody {
            cutoff, constants, ..
        } = k
        else {
            unreachable!()
        };
        let ff = FormFactor::new(cutoff).unwrap();
        for i in 0..=80 {
            let w = cutoff * 10f64.powf(-4.0 + 0.1 * i as f64);
            let from_closed_form = k.on_real_axis(w).re;
            let from_form_factor =
                2.0 * constants.e2() * w * w / (3.0 * constants.c.powi(3)) * ff.squared(w).unwrap();
            assert!(rel(from_closed_form, from_form_factor) < 1e-12, "w = {w}");
            assert!(rel(k.real_part(w), from_form_factor) < 1e-12);
        }
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let z = Complex64::new(0.7, 0.4);
        let h = 1e-6;
        for k in [
            bb(),
            MemoryKernel::single_relaxation(0.5, 2.0, 1.3).unwrap(),
            MemoryKernel::ohmic(0.5, 1.0).unwrap(),
        ] {
            let fd = (k.eval(z + h) - k.eval(z - h)) / (2.0 * h);
            let an = k.mu_tilde_derivative(z).unwrap();
            assert!((fd - an).norm() < 1e-8 * (1.0 + an.norm()), "{k:?}");
        }
    }

    fn kernels() -> [MemoryKernel; 3] {
        [
            MemoryKernel::ohmic(0.8, 1.5).unwrap(),
            MemoryKernel::single_relaxation(0.8, 3.0, 1.5).unwrap(),
            bb(),
        ]
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]
        #[test]
        fn positive_real_and_conjugate_symmetric(lw in -6.0f64..6.0, sign in prop::bool::ANY) {
            let w = if sign { 10f64.powf(lw) } else { -10f64.powf(lw) };
            for k in kernels() {
                let p = k.on_real_axis(w);
                let m = k.on_real_axis(-w);
                prop_assert!(p.re >= 0.0);
                let scale = p.norm().max(f64::MIN_POSITIVE);
                prop_assert!((m - p.conj()).norm() <= 1e-12 * scale);
                if let Some(a) = k.blackbody_scale() {
                    prop_assert!(p.norm() <= a * (1.0 + 1e-15));
                }
            }
        }
    }
}
