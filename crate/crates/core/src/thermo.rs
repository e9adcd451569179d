//! Free energy of the coupled oscillator, its temperature derivatives, and
//! the naive "oscillation energy" estimate it is compared against.

use alloc::vec::Vec;
use core::f64::consts::PI;

// Unused whenever std is linked; needed for the float methods without it.
#[allow(unused_imports)]
use num_traits::Float;

use crate::constants::PhysicalConstants;
use crate::error::{Error, Result};
use crate::kernel::MemoryKernel;
use crate::numerics::{fit_quadratic_coefficient, Integral, Quadrature};
use crate::response::{denominator_real, ParticleModel};

/// Number of spatial dimensions a shift refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Dimension {
    #[default]
    One,
    Three,
}

impl Dimension {
    pub fn factor(self) -> f64 {
        match self {
            Self::One => 1.0,
            Self::Three => 3.0,
        }
    }
}

/// `kT log(1 - exp(-hbar omega / kT))`, the free energy of one oscillator
/// without its zero-point term.
pub fn oscillator_free_energy(omega: f64, temperature: f64, constants: &PhysicalConstants) -> f64 {
    let kt = constants.k_b * temperature;
    if !(kt > 0.0) {
        return 0.0;
    }
    let x = constants.hbar * omega / kt;
    // Pick the branch that keeps full relative precision.
    let log = if x > core::f64::consts::LN_2 {
        (-(-x).exp()).ln_1p()
    } else {
        (-(-x).exp_m1()).ln()
    };
    let v = kt * log;
    if v.is_finite() {
        v
    } else {
        0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FreeEnergyOptions {
    /// Evaluate even when the bare mass is not positive.
    pub allow_acausal: bool,
    pub quadrature: Quadrature,
}

impl Default for FreeEnergyOptions {
    fn default() -> Self {
        Self {
            allow_acausal: false,
            quadrature: Quadrature {
                abs_tol: 0.0,
                rel_tol: 1e-12,
                max_intervals: 4000,
            },
        }
    }
}

/// Panel endpoints for the free-energy integral.
///
/// The resonance at `omega0` has width of order `Re mu~(omega0)/M`, which can
/// be many orders below `omega0`, so the panels step away from it by decades.
fn free_energy_panels(kernel: &MemoryKernel, model: &ParticleModel, omega_t: f64) -> Vec<f64> {
    let w0 = model.omega0();
    let upper = w0 + 200.0 * omega_t;
    let mut pts = alloc::vec![0.0, upper];
    if w0 > 0.0 {
        pts.push(w0);
        let width = (kernel.real_part(w0) / model.mass).max(w0 * 1e-30);
        let mut d = width;
        while d < upper {
            pts.push(w0 - d);
            pts.push(w0 + d);
            d *= 10.0;
        }
    }
    pts.extend(kernel.structure_frequencies());
    pts.extend([1.0, 10.0, 30.0, 100.0].map(|k| k * omega_t));
    pts.retain(|&p| p >= 0.0 && p <= upper && p.is_finite());
    pts.sort_by(f64::total_cmp);
    pts.dedup_by(|a, b| (*a - *b).abs() <= 1e-14 * a.abs().max(b.abs()));
    pts
}

/// `F0(T) = (1/pi) int_0^inf f(omega, T) Im{d log alpha(omega + i0+)/d omega} d omega`.
///
/// The log-derivative is `-D'/D` from the closed-form denominator. The
/// integral is truncated where `f` has fallen by `exp(-200)`.
pub fn coupled_free_energy(
    kernel: &MemoryKernel,
    model: &ParticleModel,
    temperature: f64,
    options: &FreeEnergyOptions,
) -> Result<Integral> {
    model.check_kernel(kernel)?;
    if !(temperature.is_finite() && temperature >= 0.0) {
        return Err(Error::InvalidArgument(alloc::format!(
            "temperature must be non-negative, got {temperature}"
        )));
    }
    let bare = kernel.inertial_mass();
    if bare <= 0.0 && !options.allow_acausal {
        return Err(Error::AcausalCutoff { bare_mass: bare });
    }
    let constants = &model.constants;
    let kt = constants.k_b * temperature;
    if kt == 0.0 {
        return Ok(Integral {
            value: 0.0,
            error: 0.0,
            evaluations: 0,
        });
    }
    let omega_t = kt / constants.hbar;
    let panels = free_energy_panels(kernel, model, omega_t);
    let integrand = |w: f64| {
        if w <= 0.0 {
            return 0.0;
        }
        let f = oscillator_free_energy(w, temperature, constants);
        if f == 0.0 {
            return 0.0;
        }
        f * denominator_real(kernel, model, w).log_derivative().im / PI
    };
    options.quadrature.integrate_panels(integrand, &panels)
}

/// `F0` sampled on a temperature grid.
#[derive(Debug, Clone, PartialEq)]
pub struct FreeEnergyCurve {
    pub temperatures: Vec<f64>,
    pub values: Vec<f64>,
    /// Decoupled reference `f(omega0, T)` when the oscillator is bound.
    pub baseline: Option<Vec<f64>>,
    /// Quadrature error estimates (zero for curves that are not integrals).
    pub errors: Vec<f64>,
    pub kernel: MemoryKernel,
    pub model: ParticleModel,
}

fn check_grid(temperatures: &[f64]) -> Result<()> {
    if temperatures.iter().any(|t| !t.is_finite() || *t < 0.0) {
        return Err(Error::InvalidArgument(
            "temperatures must be finite and non-negative".into(),
        ));
    }
    if temperatures.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::GridNotIncreasing);
    }
    Ok(())
}

impl FreeEnergyCurve {
    /// `F0(T) - f(omega0, T)`; `F0` itself when there is no baseline.
    pub fn shift(&self) -> Vec<f64> {
        match &self.baseline {
            Some(b) => self.values.iter().zip(b).map(|(v, b)| v - b).collect(),
            None => self.values.clone(),
        }
    }

    /// The shift as a curve of its own, for differentiation.
    pub fn shift_curve(&self) -> Self {
        Self {
            values: self.shift(),
            baseline: None,
            ..self.clone()
        }
    }

    /// Least-squares `c` in `shift = c T^2`.
    pub fn t_squared_coefficient(&self) -> Result<f64> {
        fit_quadratic_coefficient(&self.temperatures, &self.shift())
    }
}

/// Evaluate [`coupled_free_energy`] at every temperature of an increasing grid.
pub fn free_energy_curve(
    kernel: &MemoryKernel,
    model: &ParticleModel,
    temperatures: &[f64],
    options: &FreeEnergyOptions,
) -> Result<FreeEnergyCurve> {
    check_grid(temperatures)?;
    let mut values = Vec::with_capacity(temperatures.len());
    let mut errors = Vec::with_capacity(temperatures.len());
    for &t in temperatures {
        let r = coupled_free_energy(kernel, model, t, options)?;
        values.push(r.value);
        errors.push(r.error);
    }
    Ok(assemble_curve(kernel, model, temperatures, values, errors))
}

/// Build a curve from externally computed values (for example, in parallel).
pub fn assemble_curve(
    kernel: &MemoryKernel,
    model: &ParticleModel,
    temperatures: &[f64],
    values: Vec<f64>,
    errors: Vec<f64>,
) -> FreeEnergyCurve {
    let w0 = model.omega0();
    let baseline = (w0 > 0.0).then(|| {
        temperatures
            .iter()
            .map(|&t| oscillator_free_energy(w0, t, &model.constants))
            .collect()
    });
    FreeEnergyCurve {
        temperatures: temperatures.to_vec(),
        values,
        baseline,
        errors,
        kernel: *kernel,
        model: *model,
    }
}

/// `pi alpha (kT)^2 / (9 M c^2)`, times three in three dimensions.
pub fn bbr_shift_closed_form(temperature: f64, model: &ParticleModel, dim: Dimension) -> f64 {
    let k = &model.constants;
    let kt = k.k_b * temperature;
    dim.factor() * PI * k.alpha_fs * kt * kt / (9.0 * model.mass * k.c * k.c)
}

/// `U`, `S` and `C` derived from a sampled free energy.
#[derive(Debug, Clone, PartialEq)]
pub struct ThermodynamicCurves {
    pub temperatures: Vec<f64>,
    pub free_energy: Vec<f64>,
    pub energy: Vec<f64>,
    pub entropy: Vec<f64>,
    pub heat_capacity: Vec<f64>,
    /// Estimated errors in `S` and `C` (three- against five-point stencils).
    pub entropy_error: Vec<f64>,
    pub heat_capacity_error: Vec<f64>,
}

/// Derivative at `x[i]` of the interpolating polynomial through `idx`.
fn lagrange_slope(x: &[f64], y: &[f64], i: usize, idx: &[usize]) -> f64 {
    let t = x[i];
    let mut s = 0.0;
    for (a, &j) in idx.iter().enumerate() {
        let mut num = 0.0;
        let mut den = 1.0;
        for (b, &k) in idx.iter().enumerate() {
            if b == a {
                continue;
            }
            den *= x[j] - x[k];
            let mut prod = 1.0;
            for (c, &l) in idx.iter().enumerate() {
                if c != a && c != b {
                    prod *= t - x[l];
                }
            }
            num += prod;
        }
        s += y[j] * num / den;
    }
    s
}

/// `width` consecutive indices around `i`, shifted inward at the ends.
fn window(n: usize, i: usize, width: usize) -> core::ops::Range<usize> {
    let start = i.saturating_sub(width / 2).min(n - width);
    start..start + width
}

/// First derivative on a non-uniform grid from three-point stencils, with the
/// error estimated against the five-point stencil on the same samples.
fn derivative(x: &[f64], y: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let n = x.len();
    let mut d = Vec::with_capacity(n);
    let mut err = Vec::with_capacity(n);
    for i in 0..n {
        let three: Vec<usize> = window(n, i, 3).collect();
        let five: Vec<usize> = window(n, i, 5).collect();
        let low = lagrange_slope(x, y, i, &three);
        let high = lagrange_slope(x, y, i, &five);
        d.push(low);
        err.push((high - low).abs());
    }
    (d, err)
}

fn check_errors(x: &[f64], value: &[f64], slope: &[f64], err: &[f64], rel_tol: f64) -> Result<()> {
    let local: Vec<f64> = (0..x.len())
        .map(|i| {
            let ratio = if x[i] > 0.0 {
                (value[i] / x[i]).abs()
            } else {
                0.0
            };
            slope[i].abs().max(ratio)
        })
        .collect();
    let floor = 1e-6 * local.iter().cloned().fold(0.0, f64::max);
    for i in 0..x.len() {
        let tol = rel_tol * local[i].max(floor);
        if err[i] > tol {
            return Err(Error::GridTooCoarse {
                temperature: x[i],
                error: err[i],
                tolerance: tol,
            });
        }
    }
    Ok(())
}

/// `S = -dF/dT`, `U = F + T S`, `C = dU/dT` with the default tolerance (1e-2
/// relative to the local scale of each derivative).
pub fn thermo_derivatives(curve: &FreeEnergyCurve) -> Result<ThermodynamicCurves> {
    thermo_derivatives_with(&curve.temperatures, &curve.values, 1e-2)
}

/// As [`thermo_derivatives`] on raw samples with an explicit tolerance.
pub fn thermo_derivatives_with(
    temperatures: &[f64],
    free_energy: &[f64],
    rel_tol: f64,
) -> Result<ThermodynamicCurves> {
    if temperatures.len() != free_energy.len() {
        return Err(Error::InvalidArgument(
            "temperature and value lengths differ".into(),
        ));
    }
    if temperatures.len() < 5 {
        return Err(Error::InvalidArgument(
            "need at least five temperatures for derivatives".into(),
        ));
    }
    check_grid(temperatures)?;
    let t = temperatures;
    let (dfdt, s_err) = derivative(t, free_energy);
    let entropy: Vec<f64> = dfdt.iter().map(|d| -d).collect();
    check_errors(t, free_energy, &entropy, &s_err, rel_tol)?;
    let energy: Vec<f64> = (0..t.len())
        .map(|i| free_energy[i] + t[i] * entropy[i])
        .collect();
    let (heat_capacity, c_err) = derivative(t, &energy);
    check_errors(t, &energy, &heat_capacity, &c_err, rel_tol)?;
    Ok(ThermodynamicCurves {
        temperatures: t.to_vec(),
        free_energy: free_energy.to_vec(),
        energy,
        entropy,
        heat_capacity,
        entropy_error: s_err,
        heat_capacity_error: c_err,
    })
}

/// The naive oscillation-energy integrand at one frequency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeltonIntegrand {
    pub omega: f64,
    /// Planck spectral energy density `u(omega, T)`.
    pub energy_density: f64,
    /// Field amplitude with `3 E0^2 / 8 pi = u`.
    pub field_amplitude: f64,
    /// `W = e^2 E0^2 / (4 m omega^2)`.
    pub oscillation_energy: f64,
}

impl WeltonIntegrand {
    pub fn at(omega: f64, temperature: f64, mass: f64, constants: &PhysicalConstants) -> Self {
        let k = constants;
        let kt = k.k_b * temperature;
        let u = if kt > 0.0 && omega > 0.0 {
            let x = k.hbar * omega / kt;
            k.hbar * omega.powi(3) / (PI * PI * k.c.powi(3)) / x.exp_m1()
        } else {
            0.0
        };
        let e0 = (8.0 * PI * u / 3.0).sqrt();
        let w = if omega > 0.0 {
            k.e2() * e0 * e0 / (4.0 * mass * omega * omega)
        } else {
            0.0
        };
        Self {
            omega,
            energy_density: u,
            field_amplitude: e0,
            oscillation_energy: w,
        }
    }
}

/// `3 int_0^inf W(omega) d omega` by quadrature.
pub fn welton_energy(
    temperature: f64,
    mass: f64,
    constants: &PhysicalConstants,
    quadrature: &Quadrature,
) -> Result<Integral> {
    if !(temperature.is_finite() && temperature >= 0.0) {
        return Err(Error::InvalidArgument(alloc::format!(
            "temperature must be non-negative, got {temperature}"
        )));
    }
    if !(mass.is_finite() && mass > 0.0) {
        return Err(Error::InvalidArgument(alloc::format!(
            "mass must be positive, got {mass}"
        )));
    }
    let kt = constants.k_b * temperature;
    if kt == 0.0 {
        return Ok(Integral {
            value: 0.0,
            error: 0.0,
            evaluations: 0,
        });
    }
    let omega_t = kt / constants.hbar;
    let r = quadrature.integrate_to_infinity(
        |w| WeltonIntegrand::at(w, temperature, mass, constants).oscillation_energy,
        0.0,
        omega_t,
        &[omega_t, 10.0 * omega_t, 40.0 * omega_t],
    )?;
    Ok(Integral {
        value: 3.0 * r.value,
        error: 3.0 * r.error,
        evaluations: r.evaluations,
    })
}

/// `pi e^2 (kT)^2 / (3 hbar m c^3)`.
pub fn welton_closed_form(temperature: f64, mass: f64, constants: &PhysicalConstants) -> f64 {
    let k = constants;
    let kt = k.k_b * temperature;
    PI * k.e2() * kt * kt / (3.0 * k.hbar * mass * k.c.powi(3))
}
