//! Generalized susceptibility `alpha(z) = 1 / (-m z^2 - i z mu~(z) + K)`,
//! its poles, and the bare/observed mass relation of the radiating charge.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
// Unused whenever std is linked; needed for the float methods without it.
#[allow(unused_imports)]
use num_traits::Float;

use crate::constants::PhysicalConstants;
use crate::error::{Error, Result};
use crate::kernel::MemoryKernel;
use crate::numerics::poly;

/// A charged oscillator: observed mass, spring constant and form-factor cutoff.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParticleModel {
    /// Observed (renormalized) mass `M`.
    pub mass: f64,
    /// Spring constant `K >= 0`; zero for a free particle.
    pub spring: f64,
    /// Form-factor cutoff `Omega`.
    pub cutoff: f64,
    pub constants: PhysicalConstants,
}

impl ParticleModel {
    pub fn new(mass: f64, spring: f64, cutoff: f64, constants: PhysicalConstants) -> Result<Self> {
        if !(mass.is_finite() && mass > 0.0) {
            return Err(Error::InvalidArgument(alloc::format!(
                "mass must be positive, got {mass}"
            )));
        }
        if !(spring.is_finite() && spring >= 0.0) {
            return Err(Error::InvalidArgument(alloc::format!(
                "spring constant must be non-negative, got {spring}"
            )));
        }
        if !(cutoff > 0.0) || cutoff.is_nan() {
            return Err(Error::InvalidArgument(alloc::format!(
                "cutoff must be positive, got {cutoff}"
            )));
        }
        Ok(Self {
            mass,
            spring,
            cutoff,
            constants,
        })
    }

    /// Model with the largest causal cutoff, `Omega = 1/tau_e` (zero bare mass).
    pub fn point_limit(mass: f64, spring: f64, constants: PhysicalConstants) -> Result<Self> {
        let tau = constants.radiation_coefficient() / mass;
        Self::new(mass, spring, 1.0 / tau, constants)
    }

    /// `tau_e = 2 e^2 / 3 M c^3`.
    pub fn tau_e(&self) -> f64 {
        self.constants.radiation_coefficient() / self.mass
    }

    /// `m = M (1 - tau_e Omega)`; may be zero or negative.
    pub fn bare_mass(&self) -> f64 {
        self.mass * (1.0 - self.tau_e() * self.cutoff)
    }

    pub fn omega0(&self) -> f64 {
        (self.spring / self.mass).sqrt()
    }

    pub fn is_causal(&self) -> bool {
        self.bare_mass() > 0.0
    }

    /// Blackbody kernel for this charge.
    pub fn blackbody_kernel(&self) -> Result<MemoryKernel> {
        MemoryKernel::blackbody(self.cutoff, self.constants, self.mass)
    }

    /// Ohmic kernel with damping rate `gamma` for this particle's mass.
    pub fn ohmic_kernel(&self, gamma: f64) -> Result<MemoryKernel> {
        MemoryKernel::ohmic(gamma, self.mass)
    }

    pub(crate) fn check_kernel(&self, kernel: &MemoryKernel) -> Result<()> {
        let close = |a: f64, b: f64| (a - b).abs() <= 1e-12 * a.abs().max(b.abs());
        if !close(kernel.observed_mass(), self.mass) {
            return Err(Error::InvalidArgument(alloc::format!(
                "kernel mass {} differs from model mass {}",
                kernel.observed_mass(),
                self.mass
            )));
        }
        if let MemoryKernel::Blackbody { cutoff, .. } = kernel {
            if !close(*cutoff, self.cutoff) {
                return Err(Error::InvalidArgument(alloc::format!(
                    "kernel cutoff {cutoff} differs from model cutoff {}",
                    self.cutoff
                )));
            }
        }
        Ok(())
    }
}

/// Observed mass from bare mass: `M = m + (2 e^2 / 3 c^3) Omega`.
pub fn renormalize_mass(bare: f64, cutoff: f64, constants: &PhysicalConstants) -> Result<f64> {
    if !(cutoff.is_finite() && cutoff > 0.0) {
        return Err(Error::InvalidArgument(alloc::format!(
            "cutoff must be positive, got {cutoff}"
        )));
    }
    Ok(bare + constants.radiation_coefficient() * cutoff)
}

/// Bare mass from observed mass: `m = M (1 - tau_e Omega)`.
///
/// Returns [`Error::AcausalCutoff`] carrying the value when `m <= 0`.
pub fn bare_mass(observed: f64, cutoff: f64, constants: &PhysicalConstants) -> Result<f64> {
    if !(cutoff.is_finite() && cutoff > 0.0) {
        return Err(Error::InvalidArgument(alloc::format!(
            "cutoff must be positive, got {cutoff}"
        )));
    }
    let m = observed - constants.radiation_coefficient() * cutoff;
    if m <= 0.0 {
        Err(Error::AcausalCutoff { bare_mass: m })
    } else {
        Ok(m)
    }
}

/// `D(z)` and `D'(z)` for the susceptibility denominator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Denominator {
    pub value: Complex64,
    pub derivative: Complex64,
}

impl Denominator {
    /// `d log alpha / dz = -D'/D`.
    pub fn log_derivative(&self) -> Complex64 {
        -self.derivative / self.value
    }
}

/// `D(z) = -m z^2 - i z mu~(z) + K` and its derivative at complex `z`.
pub fn denominator(
    kernel: &MemoryKernel,
    model: &ParticleModel,
    z: Complex64,
) -> Result<Denominator> {
    model.check_kernel(kernel)?;
    let mu = kernel.mu_tilde(z)?;
    let dmu = kernel.eval_derivative(z);
    let i = Complex64::i();
    let m = kernel.inertial_mass();
    Ok(Denominator {
        value: -z * z * m - i * z * mu + model.spring,
        derivative: -z * (2.0 * m) - i * mu - i * z * dmu,
    })
}

/// `D(omega + i0+)` and `D'(omega)` for real `omega`, arranged to avoid
/// cancellation between the bare mass and the radiative mass.
pub(crate) fn denominator_real(
    kernel: &MemoryKernel,
    model: &ParticleModel,
    omega: f64,
) -> Denominator {
    let w = omega;
    let w0 = model.omega0();
    match *kernel {
        MemoryKernel::Blackbody {
            cutoff,
            constants,
            mass,
        } => {
            let tau = constants.radiation_coefficient() / mass;
            let om2 = cutoff * cutoff;
            let s = w * w + om2;
            let w3 = w * w * w;
            let re = mass * (w0 - w) * (w0 + w) + mass * tau * cutoff * w3 * w / s;
            let im = -mass * tau * om2 * w3 / s;
            let dre = -2.0 * mass * w
                + mass * tau * cutoff * (2.0 * w3 * w * w + 4.0 * w3 * om2) / (s * s);
            let dim = -mass * tau * om2 * (w3 * w + 3.0 * w * w * om2) / (s * s);
            Denominator {
                value: Complex64::new(re, im),
                derivative: Complex64::new(dre, dim),
            }
        }
        _ => {
            let z = Complex64::new(w, 0.0);
            let mu = kernel.eval(z);
            let dmu = kernel.eval_derivative(z);
            let i = Complex64::i();
            let m = kernel.inertial_mass();
            let k_minus = if w0 > 0.0 {
                m * (w0 - w) * (w0 + w)
            } else {
                -m * w * w
            };
            Denominator {
                value: Complex64::new(k_minus, 0.0) - i * z * mu,
                derivative: -z * (2.0 * m) - i * mu - i * z * dmu,
            }
        }
    }
}

/// `alpha(z) = 1 / D(z)`.
pub fn susceptibility(
    kernel: &MemoryKernel,
    model: &ParticleModel,
    z: Complex64,
) -> Result<Complex64> {
    let d = denominator(kernel, model, z)?;
    let mu = kernel.eval(z);
    let terms = (z * z * kernel.inertial_mass()).norm() + (z * mu).norm() + model.spring;
    let magnitude = d.value.norm();
    if magnitude <= 8.0 * f64::EPSILON * terms || magnitude == 0.0 {
        return Err(Error::PoleEvaluation { magnitude });
    }
    Ok(d.value.inv())
}

/// Susceptibility on the real axis, `alpha(omega + i0+)`.
pub fn susceptibility_real(
    kernel: &MemoryKernel,
    model: &ParticleModel,
    omega: f64,
) -> Result<Complex64> {
    model.check_kernel(kernel)?;
    if !omega.is_finite() {
        return Err(Error::NonFinite("omega"));
    }
    let d = denominator_real(kernel, model, omega);
    if d.value.norm() == 0.0 {
        return Err(Error::PoleEvaluation { magnitude: 0.0 });
    }
    Ok(d.value.inv())
}

/// Coefficients (lowest degree first) of `D(z)` with the kernel's
/// denominator cleared.
pub fn denominator_polynomial(
    kernel: &MemoryKernel,
    model: &ParticleModel,
) -> Result<Vec<Complex64>> {
    model.check_kernel(kernel)?;
    let c = |re: f64, im: f64| Complex64::new(re, im);
    let k = model.spring;
    let m = kernel.inertial_mass();
    Ok(match *kernel {
        MemoryKernel::Ohmic { gamma, .. } => vec![c(k, 0.0), c(0.0, -m * gamma), c(-m, 0.0)],
        MemoryKernel::SingleRelaxation { gamma, tau, .. } => vec![
            c(k, 0.0),
            c(0.0, -(k * tau + m * gamma)),
            c(-m, 0.0),
            c(0.0, m * tau),
        ],
        // (-m z^2 + K)(z + i Omega) - i A z^2 with m Omega + A = M Omega.
        MemoryKernel::Blackbody { cutoff, mass, .. } => vec![
            c(0.0, k * cutoff),
            c(k, 0.0),
            c(0.0, -mass * cutoff),
            c(-m, 0.0),
        ],
    })
}

/// Poles of `alpha` and the resulting causality verdict.
#[derive(Debug, Clone, PartialEq)]
pub struct PoleReport {
    /// All poles, including zero modes, in the model's frequency units.
    pub poles: Vec<Complex64>,
    /// True when no pole lies in the open upper half plane.
    pub causal: bool,
    /// Largest imaginary part among poles other than zero modes
    /// (`-inf` when there are none).
    pub max_im: f64,
    /// Some non-zero pole sits on the real axis (undamped motion).
    pub marginal: bool,
    /// Number of poles at the origin from a free particle (`K = 0`).
    pub zero_modes: usize,
}

pub fn poles_and_causality(kernel: &MemoryKernel, model: &ParticleModel) -> Result<PoleReport> {
    let coeffs = denominator_polynomial(kernel, model)?;
    let poles = poly::polynomial_roots(&coeffs)?;
    let zero = Complex64::new(0.0, 0.0);
    let zero_modes = poles.iter().filter(|p| **p == zero).count();
    let mut max_im = f64::NEG_INFINITY;
    let mut marginal = false;
    let mut upper = false;
    for p in poles.iter().filter(|p| **p != zero) {
        max_im = max_im.max(p.im);
        let axis_tol = 1e-10 * p.norm();
        if p.im.abs() <= axis_tol {
            marginal = true;
        } else if p.im > 0.0 {
            upper = true;
        }
    }
    Ok(PoleReport {
        poles,
        causal: !upper,
        max_im,
        marginal,
        zero_modes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn consts() -> PhysicalConstants {
        PhysicalConstants::dimensionless()
    }

    fn bb_model(cutoff_in_tau: f64, spring: f64) -> (MemoryKernel, ParticleModel) {
        let tau = consts().radiation_coefficient();
        let m = ParticleModel::new(1.0, spring, cutoff_in_tau / tau, consts()).unwrap();
        (m.blackbody_kernel().unwrap(), m)
    }

    #[test]
    fn tau_and_bare_mass_satisfy_renormalization() {
        let (_, m) = bb_model(0.4, 1.0);
        let bare = m.bare_mass();
        let lhs = m.mass;
        let rhs = bare + m.tau_e() * m.cutoff * m.mass;
        assert!((lhs - rhs).abs() <= 1e-12 * lhs);
        let back = renormalize_mass(bare, m.cutoff, &m.constants).unwrap();
        assert!((back - m.mass).abs() <= 1e-12);
        let fwd = bare_mass(m.mass, m.cutoff, &m.constants).unwrap();
        assert!((fwd - bare).abs() <= 1e-15);
    }

    #[test]
    fn zero_bare_mass_is_the_point_limit() {
        let k = consts();
        let omega = renormalize_mass(0.0, 1.0, &k).unwrap();
        assert!((omega - k.radiation_coefficient()).abs() < 1e-18);
        // m = 0 means M = (2e^2/3c^3) Omega, i.e. Omega = 1/tau_e.
        let p = ParticleModel::point_limit(1.0, 0.0, k).unwrap();
        assert!((p.cutoff * p.tau_e() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn acausal_cutoff_is_flagged_with_value() {
        let k = consts();
        let tau = k.radiation_coefficient();
        match bare_mass(1.0, 1.1 / tau, &k) {
            Err(Error::AcausalCutoff { bare_mass }) => assert!((bare_mass + 0.1).abs() < 1e-12),
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            bare_mass(1.0, 1.0 / tau, &k),
            Err(Error::AcausalCutoff { .. })
        ));
    }

    #[test]
    fn cgs_radiation_time() {
        let k = PhysicalConstants::cgs();
        let m = ParticleModel::new(crate::constants::ELECTRON_MASS_CGS, 0.0, 1.0, k).unwrap();
        let inv = 1.0 / m.tau_e();
        assert!((inv / 1.60e23 - 1.0).abs() < 5e-3, "{inv:e}");
        assert!(
            (m.tau_e() / 6.266e-24 - 1.0).abs() < 1e-3,
            "{:e}",
            m.tau_e()
        );
    }

    #[test]
    fn decoupled_oscillator() {
        let m = ParticleModel::new(2.0, 8.0, 1.0, consts()).unwrap();
        let k = m.ohmic_kernel(0.0).unwrap();
        for w in [0.0, 0.5, 1.7, 30.0] {
            let a = susceptibility(&k, &m, Complex64::new(w, 0.0)).unwrap();
            assert!((a - Complex64::new(1.0 / (8.0 - 2.0 * w * w), 0.0)).norm() < 1e-15);
        }
        assert_eq!(
            susceptibility(&k, &m, Complex64::new(0.0, 0.0)).unwrap().re,
            1.0 / 8.0
        );
        assert!(matches!(
            susceptibility(&k, &m, Complex64::new(2.0, 0.0)),
            Err(Error::PoleEvaluation { .. })
        ));
        let r = poles_and_causality(&k, &m).unwrap();
        assert!(r.causal && r.marginal);
        let mut re: Vec<f64> = r.poles.iter().map(|p| p.re).collect();
        re.sort_by(f64::total_cmp);
        assert!((re[0] + 2.0).abs() < 1e-12 && (re[1] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn ohmic_imaginary_part_closed_form() {
        let (mass, spring, gamma) = (1.3, 2.0, 0.4);
        let m = ParticleModel::new(mass, spring, 1.0, consts()).unwrap();
        let k = m.ohmic_kernel(gamma).unwrap();
        for w in [0.1, 0.9, 1.24, 2.0, 11.0] {
            let a = susceptibility(&k, &m, Complex64::new(w, 0.0)).unwrap();
            let re = spring - mass * w * w;
            let im = mass * gamma * w;
            let expected = im / (re * re + im * im);
            assert!((a.im - expected).abs() <= 1e-13 * expected, "w = {w}");
            let b = susceptibility_real(&k, &m, w).unwrap();
            assert!((a - b).norm() <= 1e-13 * a.norm());
        }
    }

    #[test]
    fn blackbody_causality_examples() {
        let (k, m) = bb_model(0.9, 1.0);
        let r = poles_and_causality(&k, &m).unwrap();
        assert!(r.causal && !r.marginal && r.max_im < 0.0, "{r:?}");
        let coeffs = denominator_polynomial(&k, &m).unwrap();
        for p in &r.poles {
            assert!(poly::backward_error(&coeffs, *p) < 1e-13);
            // The pole is a zero of D itself, not an artefact of clearing denominators.
            let d = -p * p * k.inertial_mass() - Complex64::i() * p * k.eval(*p) + m.spring;
            let scale = (p * p * k.inertial_mass()).norm() + m.spring;
            assert!(d.norm() < 1e-9 * scale);
        }
        let (k, m) = bb_model(1.1, 1.0);
        let r = poles_and_causality(&k, &m).unwrap();
        assert!(!r.causal && r.max_im > 0.0, "{r:?}");
    }

    #[test]
    fn free_particle_keeps_zero_modes() {
        let (k, m) = bb_model(0.5, 0.0);
        let r = poles_and_causality(&k, &m).unwrap();
        assert_eq!(r.zero_modes, 2);
        assert!(r.causal && r.max_im < 0.0);
        // remaining pole at -i M Omega / m
        let expected = -m.mass * m.cutoff / m.bare_mass();
        assert!((r.max_im - expected).abs() < 1e-10 * expected.abs());
    }

    #[test]
    fn point_limit_is_causal() {
        let (k, m) = bb_model(1.0, 1.0);
        let r = poles_and_causality(&k, &m).unwrap();
        assert!(r.causal);
    }

    #[test]
    fn single_relaxation_poles_are_damped() {
        let m = ParticleModel::new(1.0, 3.0, 1.0, consts()).unwrap();
        let k = MemoryKernel::single_relaxation(0.5, 2.0, 1.0).unwrap();
        let r = poles_and_causality(&k, &m).unwrap();
        assert_eq!(r.poles.len(), 3);
        assert!(r.causal && r.max_im < 0.0);
    }

    #[test]
    fn mismatched_kernel_rejected() {
        let m = ParticleModel::new(1.0, 3.0, 1.0, consts()).unwrap();
        let k = MemoryKernel::ohmic(0.5, 2.0).unwrap();
        assert!(susceptibility(&k, &m, Complex64::new(1.0, 0.0)).is_err());
    }

    #[test]
    fn denominator_real_matches_general_form() {
        for (k, m) in [bb_model(0.3, 2.0), bb_model(3.0, 0.5)] {
            for w in [1e-3, 0.7, 50.0, 3e3, 1e5] {
                let a = denominator_real(&k, &m, w);
                let b = denominator(&k, &m, Complex64::new(w, 0.0)).unwrap();
                assert!((a.value - b.value).norm() <= 1e-10 * b.value.norm().max(1.0));
                assert!(
                    (a.derivative - b.derivative).norm() <= 1e-10 * b.derivative.norm().max(1.0)
                );
            }
        }
    }

    proptest! {
        #[test]
        fn causal_iff_positive_bare_mass(frac in 0.001f64..0.999, spring in 0.0f64..50.0, above in prop::bool::ANY) {
            // `above` maps (0,1) onto (1, 1000) for acausal cutoffs.
            let x = if above { 1.0 / frac } else { frac };
            let (k, m) = bb_model(x, spring);
            let r = poles_and_causality(&k, &m).unwrap();
            prop_assert_eq!(r.causal, !above);
            let coeffs = denominator_polynomial(&k, &m).unwrap();
            for p in &r.poles {
                prop_assert!(poly::backward_error(&coeffs, *p) < 1e-10);
            }
        }

        #[test]
        fn reality_condition(w in -1e3f64..1e3, x in 0.01f64..0.99, spring in 0.1f64..10.0) {
            let (k, m) = bb_model(x, spring);
            let a = susceptibility_real(&k, &m, w).unwrap();
            let b = susceptibility_real(&k, &m, -w).unwrap();
            prop_assert!((b.conj() - a).norm() <= 1e-12 * a.norm());
        }
    }
}
