//! Equilibrium mean-square displacement from the fluctuation-dissipation
//! theorem, and the long-time diffusion law it implies.

use alloc::vec::Vec;
use core::f64::consts::PI;

// Unused whenever std is linked; needed for the float methods without it.
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::kernel::MemoryKernel;
use crate::numerics::{fit_line, log_space, Integral, Quadrature};
use crate::response::{denominator_real, ParticleModel};

/// How `coth(hbar omega / 2kT)` is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CothMode {
    Quantum,
    /// `coth -> 2kT / hbar omega`.
    Classical,
    /// Classical when `hbar omega <= 1e-4 kT` at every structure frequency
    /// of the kernel and oscillator, quantum otherwise.
    #[default]
    Auto,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MsdOptions {
    pub coth: CothMode,
    pub quadrature: Quadrature,
}

impl Default for MsdOptions {
    fn default() -> Self {
        Self {
            coth: CothMode::Auto,
            quadrature: Quadrature::with_rel_tol(1e-10),
        }
    }
}

/// Frequencies where the integrand changes character.
fn structure(kernel: &MemoryKernel, model: &ParticleModel) -> Vec<f64> {
    let mut s: Vec<f64> = kernel
        .structure_frequencies()
        .into_iter()
        .filter(|w| *w > 0.0 && w.is_finite())
        .collect();
    let w0 = model.omega0();
    if w0 > 0.0 {
        s.push(w0);
    }
    s
}

fn resolve_mode(mode: CothMode, kernel: &MemoryKernel, model: &ParticleModel, kt: f64) -> CothMode {
    match mode {
        CothMode::Auto => {
            let top = structure(kernel, model).into_iter().fold(0.0, f64::max);
            if model.constants.hbar * top <= 1e-4 * kt {
                CothMode::Classical
            } else {
                CothMode::Quantum
            }
        }
        m => m,
    }
}

/// `(2 hbar / pi) Im alpha(omega) coth(hbar omega / 2kT)`, the spectral
/// weight multiplying `1 - cos(omega t)`.
fn spectral_weight(
    kernel: &MemoryKernel,
    model: &ParticleModel,
    kt: f64,
    mode: CothMode,
    omega: f64,
) -> f64 {
    if omega <= 0.0 {
        return 0.0;
    }
    let hbar = model.constants.hbar;
    let im_alpha = denominator_real(kernel, model, omega).value.inv().im;
    let coth = if kt == 0.0 {
        1.0
    } else {
        match mode {
            CothMode::Classical => 2.0 * kt / (hbar * omega),
            _ => {
                let x = hbar * omega / (2.0 * kt);
                if x > 20.0 {
                    1.0
                } else {
                    1.0 / x.tanh()
                }
            }
        }
    };
    2.0 * hbar / PI * im_alpha * coth
}

/// `<(x(t) - x(0))^2> = (2 hbar / pi) int_0^inf Im alpha coth(hbar w / 2kT) (1 - cos wt) dw`.
///
/// The oscillatory factor is integrated panel by panel between its zeros up
/// to `wt = 40 pi`; beyond that the cosine part is replaced by its
/// asymptotic value `w'(a)/t^2` and only the smooth weight is integrated.
pub fn msd(
    kernel: &MemoryKernel,
    model: &ParticleModel,
    temperature: f64,
    t: f64,
    options: &MsdOptions,
) -> Result<Integral> {
    model.check_kernel(kernel)?;
    if !(temperature.is_finite() && temperature >= 0.0) {
        return Err(Error::InvalidArgument(alloc::format!(
            "temperature must be non-negative, got {temperature}"
        )));
    }
    if !t.is_finite() {
        return Err(Error::NonFinite("time"));
    }
    let bare = kernel.inertial_mass();
    if bare <= 0.0 {
        return Err(Error::AcausalCutoff { bare_mass: bare });
    }
    let t = t.abs();
    if t == 0.0 {
        return Ok(Integral {
            value: 0.0,
            error: 0.0,
            evaluations: 0,
        });
    }
    let kt = model.constants.k_b * temperature;
    let mode = resolve_mode(options.coth, kernel, model, kt);
    let weight = |w: f64| spectral_weight(kernel, model, kt, mode, w);
    let a = 40.0 * PI / t;
    let mut panels: Vec<f64> = (0..=40).map(|k| k as f64 * PI / t).collect();
    panels.extend(structure(kernel, model).into_iter().filter(|w| *w < a));
    panels.sort_by(f64::total_cmp);
    panels.dedup_by(|x, y| (*x - *y).abs() <= 1e-14 * x.abs().max(y.abs()));
    let head = options.quadrature.integrate_panels(
        |w| {
            let s = (0.5 * w * t).sin();
            weight(w) * 2.0 * s * s
        },
        &panels,
    )?;
    let tail = options
        .quadrature
        .integrate_to_infinity(weight, a, a, &structure(kernel, model))?;
    let h = 1e-4 * a;
    let slope = (weight(a + h) - weight(a - h)) / (2.0 * h);
    let correction = slope / (t * t);
    Ok(Integral {
        value: head.value + tail.value + correction,
        error: head.error + tail.error + (0.1 * correction).abs(),
        evaluations: head.evaluations + tail.evaluations + 2,
    })
}

/// Long-time law `msd ~ A t^p`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerLaw {
    pub exponent: f64,
    pub prefactor: f64,
    /// Standard error of the exponent, with a floor for the finite-difference slope.
    pub fit_error: f64,
    /// RMS residual of the log-log fit.
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MsdCurve {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    pub errors: Vec<f64>,
    pub temperature: f64,
    pub kernel: MemoryKernel,
    pub model: ParticleModel,
    /// Fit of the last decade of the grid, when the grid spans one.
    pub fit: Option<PowerLaw>,
}

/// Local character of the motion from the log-log slope of the MSD.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RegimeTag {
    Ballistic,
    Diffusive,
    Subdiffusive,
    Superdiffusive,
}

impl RegimeTag {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Ballistic => "ballistic",
            Self::Diffusive => "diffusive",
            Self::Subdiffusive => "subdiffusive",
            Self::Superdiffusive => "superdiffusive",
        }
    }

    fn from_slope(p: f64) -> Self {
        if p >= 1.9 {
            Self::Ballistic
        } else if (p - 1.0).abs() <= 0.05 {
            Self::Diffusive
        } else if p < 1.0 {
            Self::Subdiffusive
        } else {
            Self::Superdiffusive
        }
    }
}

impl MsdCurve {
    /// Regime of each sample from the local log-log slope.
    pub fn regime_tags(&self) -> Vec<RegimeTag> {
        let n = self.times.len();
        (0..n)
            .map(|i| {
                let (j, k) = match (i.checked_sub(1), i + 1 < n) {
                    (Some(j), true) => (j, i + 1),
                    (None, true) => (i, i + 1),
                    (Some(j), false) => (j, i),
                    (None, false) => return RegimeTag::Ballistic,
                };
                let (t0, t1) = (self.times[j], self.times[k]);
                let (m0, m1) = (self.values[j], self.values[k]);
                if t0 <= 0.0 || m0 <= 0.0 || m1 <= 0.0 {
                    return RegimeTag::Ballistic;
                }
                RegimeTag::from_slope((m1 / m0).ln() / (t1 / t0).ln())
            })
            .collect()
    }
}

pub fn msd_curve(
    kernel: &MemoryKernel,
    model: &ParticleModel,
    temperature: f64,
    times: &[f64],
    options: &MsdOptions,
) -> Result<MsdCurve> {
    if times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::GridNotIncreasing);
    }
    let mut values = Vec::with_capacity(times.len());
    let mut errors = Vec::with_capacity(times.len());
    for &t in times {
        let r = msd(kernel, model, temperature, t, options)?;
        values.push(r.value);
        errors.push(r.error);
    }
    let fit = match (times.first(), times.last()) {
        (Some(&lo), Some(&hi)) if lo > 0.0 && hi >= 10.0 * lo => {
            fit_power_law(kernel, model, temperature, (hi / 10.0, hi), options).ok()
        }
        _ => None,
    };
    Ok(MsdCurve {
        times: times.to_vec(),
        values,
        errors,
        temperature,
        kernel: *kernel,
        model: *model,
        fit,
    })
}

/// Samples in a fit window.
const FIT_POINTS: usize = 21;
/// Relative step of the central difference for `d msd / dt`.
const SLOPE_STEP: f64 = 1e-3;
/// Largest RMS residual of the log-log fit accepted as a power law.
const MAX_RESIDUAL: f64 = 0.05;

/// Fit `msd ~ A t^p` over `window`, taking `p` from the log-log slope of
/// `d msd / dt` (which removes the constant offset of a linear law).
pub fn fit_power_law(
    kernel: &MemoryKernel,
    model: &ParticleModel,
    temperature: f64,
    window: (f64, f64),
    options: &MsdOptions,
) -> Result<PowerLaw> {
    let (lo, hi) = window;
    if !(lo > 0.0 && hi > lo && hi.is_finite()) {
        return Err(Error::InvalidArgument(
            "fit window must satisfy 0 < lo < hi".into(),
        ));
    }
    let ts = log_space(lo, hi, FIT_POINTS);
    let mut log_t = Vec::with_capacity(FIT_POINTS);
    let mut log_slope = Vec::with_capacity(FIT_POINTS);
    let mut log_msd = Vec::with_capacity(FIT_POINTS);
    for &t in &ts {
        let up = msd(kernel, model, temperature, t * (1.0 + SLOPE_STEP), options)?.value;
        let down = msd(kernel, model, temperature, t * (1.0 - SLOPE_STEP), options)?.value;
        let mid = msd(kernel, model, temperature, t, options)?.value;
        let d = (up - down) / (2.0 * t * SLOPE_STEP);
        if !(d > 0.0 && mid > 0.0) {
            return Err(Error::NoLinearRegime {
                residual: f64::INFINITY,
            });
        }
        log_t.push(t.ln());
        log_slope.push(d.ln());
        log_msd.push(mid.ln());
    }
    let fit = fit_line(&log_t, &log_slope)?;
    if fit.rms_residual > MAX_RESIDUAL {
        return Err(Error::NoLinearRegime {
            residual: fit.rms_residual,
        });
    }
    let exponent = 1.0 + fit.slope;
    let mean_t = log_t.iter().sum::<f64>() / log_t.len() as f64;
    let mean_m = log_msd.iter().sum::<f64>() / log_msd.len() as f64;
    Ok(PowerLaw {
        exponent,
        prefactor: (mean_m - exponent * mean_t).exp(),
        fit_error: fit.slope_stderr.hypot(SLOPE_STEP),
        residual: fit.rms_residual,
    })
}

/// Outcome of the long-time fit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Diffusion {
    /// `msd ~ 2 D t`.
    Normal { constant: f64, law: PowerLaw },
    /// `|p - 1|` exceeds three fit errors.
    Anomalous { law: PowerLaw },
}

impl Diffusion {
    pub fn law(&self) -> PowerLaw {
        match *self {
            Self::Normal { law, .. } | Self::Anomalous { law } => law,
        }
    }
}

/// Default fit window: the decade starting at ten times the slowest
/// structure time of the kernel.
pub fn default_window(kernel: &MemoryKernel, model: &ParticleModel) -> (f64, f64) {
    let slowest = structure(kernel, model)
        .into_iter()
        .fold(f64::INFINITY, f64::min);
    let slowest = if slowest.is_finite() { slowest } else { 1.0 };
    (10.0 / slowest, 100.0 / slowest)
}

/// `lim msd / 2t` fitted over [`default_window`].
pub fn diffusion_constant(
    kernel: &MemoryKernel,
    model: &ParticleModel,
    temperature: f64,
    options: &MsdOptions,
) -> Result<Diffusion> {
    diffusion_constant_in(
        kernel,
        model,
        temperature,
        default_window(kernel, model),
        options,
    )
}

pub fn diffusion_constant_in(
    kernel: &MemoryKernel,
    model: &ParticleModel,
    temperature: f64,
    window: (f64, f64),
    options: &MsdOptions,
) -> Result<Diffusion> {
    let law = fit_power_law(kernel, model, temperature, window, options)?;
    if (law.exponent - 1.0).abs() > 3.0 * law.fit_error {
        return Ok(Diffusion::Anomalous { law });
    }
    let ts = log_space(window.0, window.1, FIT_POINTS);
    let mut ms = Vec::with_capacity(ts.len());
    for &t in &ts {
        ms.push(msd(kernel, model, temperature, t, options)?.value);
    }
    let line = fit_line(&ts, &ms)?;
    Ok(Diffusion::Normal {
        constant: 0.5 * line.slope,
        law,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::PhysicalConstants;

    fn ohmic(gamma: f64) -> (MemoryKernel, ParticleModel) {
        let m = ParticleModel::new(1.0, 0.0, 1.0, PhysicalConstants::dimensionless()).unwrap();
        (m.ohmic_kernel(gamma).unwrap(), m)
    }

    fn classical() -> MsdOptions {
        MsdOptions {
            coth: CothMode::Classical,
            ..Default::default()
        }
    }

    // Classical Ohmic free particle, solved in closed form.
    fn oracle(kt: f64, gamma: f64, t: f64) -> f64 {
        2.0 * kt / (gamma * gamma) * (gamma * t - 1.0 + (-gamma * t).exp())
    }

    #[test]
    fn zero_time_is_zero() {
        let (k, m) = ohmic(0.5);
        assert_eq!(msd(&k, &m, 1.0, 0.0, &classical()).unwrap().value, 0.0);
    }

    #[test]
    fn ohmic_matches_closed_form() {
        let (k, m) = ohmic(0.5);
        for t in [1e-3, 0.1, 2.0, 20.0, 200.0] {
            let v = msd(&k, &m, 2.0, t, &classical()).unwrap().value;
            let o = oracle(2.0, 0.5, t);
            assert!((v / o - 1.0).abs() < 1e-7, "t = {t}: {v} vs {o}");
        }
    }

    #[test]
    fn ballistic_and_diffusive_limits() {
        let (k, m) = ohmic(1.0);
        let kt = 3.0;
        let t = 1e-2;
        let v = msd(&k, &m, kt, t, &classical()).unwrap().value;
        assert!((v / (kt * t * t) - 1.0).abs() < 0.02);
        let t = 1e3;
        let v = msd(&k, &m, kt, t, &classical()).unwrap().value;
        assert!((v / (2.0 * kt * t) - 1.0).abs() < 0.01);
    }

    #[test]
    fn einstein_relation() {
        let (k, m) = ohmic(0.5);
        let d1 = diffusion_constant(&k, &m, 1.0, &classical()).unwrap();
        let d2 = diffusion_constant(&k, &m, 2.0, &classical()).unwrap();
        let (Diffusion::Normal { constant: c1, .. }, Diffusion::Normal { constant: c2, .. }) =
            (d1, d2)
        else {
            panic!("{d1:?} {d2:?}")
        };
        assert!((c1 / (1.0 / 0.5) - 1.0).abs() < 0.01);
        assert!((c2 / c1 - 2.0).abs() < 0.02);
    }

    #[test]
    fn quantum_agrees_with_classical_at_high_temperature() {
        let (k, m) = ohmic(1.0);
        let q = MsdOptions {
            coth: CothMode::Quantum,
            ..Default::default()
        };
        for t in [10.0, 30.0, 100.0] {
            let a = msd(&k, &m, 1e3, t, &q).unwrap().value;
            let b = msd(&k, &m, 1e3, t, &classical()).unwrap().value;
            assert!((a / b - 1.0).abs() < 0.01);
        }
    }

    #[test]
    fn monotone_in_time() {
        let (k, m) = ohmic(1.0);
        let t = log_space(1e-2, 1e2, 41);
        let c = msd_curve(&k, &m, 1.0, &t, &classical()).unwrap();
        assert!(c.values.windows(2).all(|w| w[1] > w[0]));
        let tags = c.regime_tags();
        assert_eq!(tags[0], RegimeTag::Ballistic);
        assert_eq!(tags[40], RegimeTag::Diffusive);
        assert!(c.fit.is_some());
    }

    #[test]
    fn blackbody_zero_temperature_is_anomalous() {
        let k = PhysicalConstants::dimensionless();
        let tau = k.radiation_coefficient();
        let mut prefactors = Vec::new();
        for cutoff in [0.2 / tau, 0.5 / tau] {
            let m = ParticleModel::new(1.0, 0.0, cutoff, k).unwrap();
            let kern = m.blackbody_kernel().unwrap();
            let d = diffusion_constant(&kern, &m, 0.0, &Default::default()).unwrap();
            let Diffusion::Anomalous { law } = d else {
                panic!("{d:?}")
            };
            assert!((law.exponent - 1.0).abs() > 0.5);
            prefactors.push(law.prefactor);
        }
        assert!((prefactors[0] / prefactors[1] - 1.0).abs() > 1e-3);
    }

    #[test]
    fn acausal_model_is_rejected() {
        let k = PhysicalConstants::dimensionless();
        let m = ParticleModel::new(1.0, 0.0, 2.0 / k.radiation_coefficient(), k).unwrap();
        assert!(matches!(
            msd(
                &m.blackbody_kernel().unwrap(),
                &m,
                1.0,
                1.0,
                &Default::default()
            ),
            Err(Error::AcausalCutoff { .. })
        ));
    }
}
