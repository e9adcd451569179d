//! Classical equations of motion for a radiating charge: the causal
//! third-order equation for a finite cutoff, its second-order point limit,
//! and the Abraham-Lorentz equation for comparison.

use alloc::boxed::Box;
use alloc::string::String;
use alloc::vec::Vec;

use num_complex::Complex64;
// Unused whenever std is linked; needed for the float methods without it.
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::numerics::fit_line;
use crate::response::ParticleModel;

/// An external c-number force with analytic time derivatives.
#[derive(Debug, Clone, PartialEq)]
pub enum ForceSignal {
    Zero,
    /// `amplitude * S((t - start) / width)` with a C4 smoothstep `S`.
    RampedConstant {
        amplitude: f64,
        start: f64,
        width: f64,
    },
    /// `amplitude * sin(frequency t + phase)`.
    Sinusoid {
        amplitude: f64,
        frequency: f64,
        phase: f64,
    },
    /// `amplitude * exp(-(t - center)^2 / (2 width^2))`.
    GaussianPulse {
        amplitude: f64,
        center: f64,
        width: f64,
    },
    /// `f + lead * df/dt` of the inner signal.
    Effective {
        inner: Box<ForceSignal>,
        lead: f64,
    },
}

// 126u^5 - 420u^6 + 540u^7 - 315u^8 + 70u^9, lowest degree first.
const SMOOTHSTEP: [f64; 10] = [0.0, 0.0, 0.0, 0.0, 0.0, 126.0, -420.0, 540.0, -315.0, 70.0];

fn smoothstep(u: f64, order: u32) -> f64 {
    if u <= 0.0 {
        return 0.0;
    }
    if u >= 1.0 {
        return if order == 0 { 1.0 } else { 0.0 };
    }
    let mut c = SMOOTHSTEP;
    let mut len = c.len();
    for _ in 0..order {
        for k in 1..len {
            c[k - 1] = c[k] * k as f64;
        }
        len -= 1;
        if len == 0 {
            return 0.0;
        }
    }
    c[..len].iter().rev().fold(0.0, |acc, &ck| acc * u + ck)
}

/// Probabilists' Hermite polynomial `He_n(u)`.
fn hermite(n: u32, u: f64) -> f64 {
    let (mut prev, mut cur) = (1.0, u);
    if n == 0 {
        return prev;
    }
    for k in 1..n {
        let next = u * cur - k as f64 * prev;
        prev = cur;
        cur = next;
    }
    cur
}

impl ForceSignal {
    pub fn ramped_constant(amplitude: f64, start: f64, width: f64) -> Result<Self> {
        if !(width.is_finite() && width > 0.0) {
            return Err(Error::InvalidArgument(alloc::format!(
                "ramp width must be positive, got {width}"
            )));
        }
        Ok(Self::RampedConstant {
            amplitude,
            start,
            width,
        })
    }

    pub fn sinusoid(amplitude: f64, frequency: f64) -> Self {
        Self::Sinusoid {
            amplitude,
            frequency,
            phase: 0.0,
        }
    }

    pub fn gaussian_pulse(amplitude: f64, center: f64, width: f64) -> Result<Self> {
        if !(width.is_finite() && width > 0.0) {
            return Err(Error::InvalidArgument(alloc::format!(
                "pulse width must be positive, got {width}"
            )));
        }
        Ok(Self::GaussianPulse {
            amplitude,
            center,
            width,
        })
    }

    /// `d^order f / dt^order` at `t`.
    pub fn eval(&self, t: f64, order: u32) -> f64 {
        match self {
            Self::Zero => 0.0,
            Self::RampedConstant {
                amplitude,
                start,
                width,
            } => amplitude * smoothstep((t - start) / width, order) / width.powi(order as i32),
            Self::Sinusoid {
                amplitude,
                frequency,
                phase,
            } => {
                let arg = frequency * t + phase + order as f64 * core::f64::consts::FRAC_PI_2;
                amplitude * frequency.powi(order as i32) * arg.sin()
            }
            Self::GaussianPulse {
                amplitude,
                center,
                width,
            } => {
                let u = (t - center) / width;
                let sign = if order % 2 == 0 { 1.0 } else { -1.0 };
                amplitude * sign * hermite(order, u) * (-0.5 * u * u).exp()
                    / width.powi(order as i32)
            }
            Self::Effective { inner, lead } => {
                inner.eval(t, order) + lead * inner.eval(t, order + 1)
            }
        }
    }

    pub fn value(&self, t: f64) -> f64 {
        self.eval(t, 0)
    }

    pub fn derivative(&self, t: f64) -> f64 {
        self.eval(t, 1)
    }

    /// Short human-readable tag.
    pub fn description(&self) -> String {
        match self {
            Self::Zero => "zero".into(),
            Self::RampedConstant {
                amplitude,
                start,
                width,
            } => {
                alloc::format!("ramp(f0={amplitude}, start={start}, width={width})")
            }
            Self::Sinusoid {
                amplitude,
                frequency,
                phase,
            } => {
                alloc::format!("sin(f0={amplitude}, w={frequency}, phase={phase})")
            }
            Self::GaussianPulse {
                amplitude,
                center,
                width,
            } => {
                alloc::format!("pulse(f0={amplitude}, t0={center}, sigma={width})")
            }
            Self::Effective { inner, lead } => {
                alloc::format!("effective({}, lead={lead})", inner.description())
            }
        }
    }
}

/// `f + Omega^-1 df/dt`. An infinite cutoff returns the signal unchanged.
pub fn effectivize(signal: &ForceSignal, cutoff: f64) -> Result<ForceSignal> {
    if !(cutoff > 0.0) {
        return Err(Error::InvalidArgument(alloc::format!(
            "cutoff must be positive, got {cutoff}"
        )));
    }
    if cutoff.is_infinite() {
        return Ok(signal.clone());
    }
    Ok(ForceSignal::Effective {
        inner: Box::new(signal.clone()),
        lead: 1.0 / cutoff,
    })
}

/// Which third-order equation to integrate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ThirdOrderVariant {
    /// `M (1/Omega - tau_e) x''' + M x'' = f + f'/Omega`.
    Causal,
    /// `M x'' - M tau_e x''' = f`.
    AbrahamLorentz,
}

/// Coefficient `kappa` of `a'` when the equation is written `kappa a' + a = g(t)`.
fn third_order_coefficient(model: &ParticleModel, variant: ThirdOrderVariant) -> f64 {
    let tau = model.tau_e();
    match variant {
        ThirdOrderVariant::Causal => {
            let k = 1.0 / model.cutoff - tau;
            if k.abs() <= 1e-12 * tau.max(1.0 / model.cutoff) {
                0.0
            } else {
                k
            }
        }
        ThirdOrderVariant::AbrahamLorentz => -tau,
    }
}

/// Roots `s` of `M kappa s^3 + M s^2 = 0`: a double zero, plus `-1/kappa`
/// unless the third-order term vanishes.
pub fn characteristic_roots(model: &ParticleModel, variant: ThirdOrderVariant) -> Vec<Complex64> {
    let k = third_order_coefficient(model, variant);
    let zero = Complex64::new(0.0, 0.0);
    if k == 0.0 {
        alloc::vec![zero, zero]
    } else {
        alloc::vec![zero, zero, Complex64::new(-1.0 / k, 0.0)]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub x: Vec<f64>,
    pub v: Vec<f64>,
    pub a: Vec<f64>,
    pub runaway_flag: bool,
    /// Fitted exponential rate; present exactly when `runaway_flag` is set.
    pub growth_rate: Option<f64>,
    /// Slope of `log|a|` over the final third, whatever its sign.
    pub fit_rate: Option<f64>,
    pub fit_r2: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MotionOptions {
    /// Minimum RK4 steps per output interval.
    pub substeps: usize,
    /// Allowed change of the end state when the step is halved, relative to
    /// the trajectory's own scale.
    pub tolerance: f64,
    /// Upper bound on RK4 steps for one pass.
    pub max_steps: usize,
}

impl Default for MotionOptions {
    fn default() -> Self {
        Self {
            substeps: 4,
            tolerance: 1e-6,
            max_steps: 20_000_000,
        }
    }
}

fn check_times(times: &[f64]) -> Result<f64> {
    if times.len() < 2 {
        return Err(Error::InvalidArgument(
            "need at least two output times".into(),
        ));
    }
    if times.iter().any(|t| !t.is_finite()) {
        return Err(Error::NonFinite("time grid"));
    }
    if times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::GridNotIncreasing);
    }
    let dt = (times[times.len() - 1] - times[0]) / (times.len() - 1) as f64;
    for (i, &t) in times.iter().enumerate() {
        let expected = times[0] + dt * i as f64;
        if (t - expected).abs() > 1e-9 * dt.max(expected.abs()) {
            return Err(Error::InvalidArgument("time grid must be uniform".into()));
        }
    }
    Ok(dt)
}

struct Run {
    x: Vec<f64>,
    v: Vec<f64>,
    a: Vec<f64>,
    overflow: bool,
}

/// RK4 through the output grid for `(x, v, a)` with `a' = accel(t, a)`, or for
/// `(x, v)` with `a = force(t)` when `kappa == 0`.
fn rk4_run(
    times: &[f64],
    substeps: usize,
    init: [f64; 3],
    kappa: f64,
    drive: &dyn Fn(f64) -> f64,
) -> Run {
    let n = times.len();
    let dt = (times[n - 1] - times[0]) / (n - 1) as f64;
    let h = dt / substeps as f64;
    let rhs = |t: f64, s: [f64; 3]| -> [f64; 3] {
        if kappa == 0.0 {
            let a = drive(t);
            [s[1], a, 0.0]
        } else {
            [s[1], s[2], (drive(t) - s[2]) / kappa]
        }
    };
    let mut s = init;
    if kappa == 0.0 {
        s[2] = drive(times[0]);
    }
    let mut run = Run {
        x: Vec::with_capacity(n),
        v: Vec::with_capacity(n),
        a: Vec::with_capacity(n),
        overflow: false,
    };
    run.x.push(s[0]);
    run.v.push(s[1]);
    run.a.push(s[2]);
    for i in 1..n {
        let t0 = times[0] + dt * (i - 1) as f64;
        for j in 0..substeps {
            let t = t0 + h * j as f64;
            let k1 = rhs(t, s);
            let add = |s: [f64; 3], k: [f64; 3], c: f64| {
                [s[0] + c * k[0], s[1] + c * k[1], s[2] + c * k[2]]
            };
            let k2 = rhs(t + 0.5 * h, add(s, k1, 0.5 * h));
            let k3 = rhs(t + 0.5 * h, add(s, k2, 0.5 * h));
            let k4 = rhs(t + h, add(s, k3, h));
            for c in 0..3 {
                s[c] += h / 6.0 * (k1[c] + 2.0 * k2[c] + 2.0 * k3[c] + k4[c]);
            }
        }
        if kappa == 0.0 {
            s[2] = drive(times[i]);
        }
        if !s.iter().all(|v| v.is_finite()) {
            run.overflow = true;
            break;
        }
        run.x.push(s[0]);
        run.v.push(s[1]);
        run.a.push(s[2]);
    }
    run
}

fn end_change(coarse: &Run, fine: &Run, duration: f64) -> f64 {
    let n = coarse.x.len() - 1;
    let max = |v: &[f64]| v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let scale = max(&fine.x) + duration * max(&fine.v) + duration * duration * max(&fine.a);
    let dx = (coarse.x[n] - fine.x[n]).abs();
    let dv = (coarse.v[n] - fine.v[n]).abs() * duration;
    let da = (coarse.a[n] - fine.a[n]).abs() * duration * duration;
    let change = dx.max(dv).max(da);
    if scale == 0.0 {
        change
    } else {
        change / scale
    }
}

/// Fit `log|a|` over the final third and decide whether it is a runaway.
fn classify(times: &[f64], a: &[f64], tau: f64) -> (Option<f64>, Option<f64>, bool) {
    let n = a.len();
    let start = 2 * n / 3;
    let (t, y): (Vec<f64>, Vec<f64>) = (start..n)
        .filter(|&i| a[i] != 0.0 && a[i].is_finite())
        .map(|i| (times[i], a[i].abs().ln()))
        .unzip();
    let Ok(fit) = fit_line(&t, &y) else {
        return (None, None, false);
    };
    let runaway = fit.slope > 1e-3 / tau && fit.r2 > 0.99;
    (Some(fit.slope), Some(fit.r2), runaway)
}

fn integrate(
    times: &[f64],
    init: [f64; 3],
    kappa: f64,
    drive: &dyn Fn(f64) -> f64,
    tau: f64,
    options: &MotionOptions,
) -> Result<Trajectory> {
    let dt = check_times(times)?;
    if init.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("initial state"));
    }
    let mut substeps = options.substeps.max(1);
    if kappa != 0.0 {
        // Resolve the fast mode with hλ <= 1/32.
        let needed = (32.0 * dt / kappa.abs()).ceil();
        if needed > options.max_steps as f64 {
            return Err(Error::StepTooLarge(alloc::format!(
                "output spacing {dt:e} needs more than {} steps for the time constant {kappa:e}",
                options.max_steps
            )));
        }
        substeps = substeps.max(needed as usize);
    }
    let total = substeps.saturating_mul(2 * (times.len() - 1));
    if total > options.max_steps {
        return Err(Error::StepTooLarge(alloc::format!(
            "{total} steps exceed the budget of {}",
            options.max_steps
        )));
    }
    let coarse = rk4_run(times, substeps, init, kappa, drive);
    let fine = rk4_run(times, 2 * substeps, init, kappa, drive);
    let duration = times[times.len() - 1] - times[0];
    if !coarse.overflow && !fine.overflow {
        let change = end_change(&coarse, &fine, duration);
        if change > options.tolerance {
            return Err(Error::StepTooLarge(alloc::format!(
                "halving the step changed the end state by {change:e} (tolerance {:e})",
                options.tolerance
            )));
        }
    }
    let len = fine.x.len();
    let times = times[..len].to_vec();
    let (fit_rate, fit_r2, runaway) = classify(&times, &fine.a, tau);
    Ok(Trajectory {
        runaway_flag: runaway || fine.overflow,
        growth_rate: if runaway || fine.overflow {
            fit_rate
        } else {
            None
        },
        fit_rate,
        fit_r2,
        times,
        x: fine.x,
        v: fine.v,
        a: fine.a,
    })
}

/// `M x'' = f + tau_e f'` with RK4 on the uniform grid `times`.
pub fn integrate_point_limit(
    signal: &ForceSignal,
    model: &ParticleModel,
    times: &[f64],
    x0: f64,
    v0: f64,
    options: &MotionOptions,
) -> Result<Trajectory> {
    let tau = model.tau_e();
    let m = model.mass;
    let drive = |t: f64| (signal.value(t) + tau * signal.derivative(t)) / m;
    integrate(times, [x0, v0, 0.0], 0.0, &drive, tau, options)
}

/// Integrate one of the third-order equations from `(x0, v0, a0)`.
///
/// Overflow ends the trajectory early and is reported as a runaway. A causal
/// equation whose third-order term vanishes (`Omega = 1/tau_e`) is integrated
/// as the second-order point limit, and `a0` is then ignored.
pub fn integrate_third_order(
    signal: &ForceSignal,
    model: &ParticleModel,
    times: &[f64],
    initial: [f64; 3],
    variant: ThirdOrderVariant,
    options: &MotionOptions,
) -> Result<Trajectory> {
    let tau = model.tau_e();
    let m = model.mass;
    let kappa = third_order_coefficient(model, variant);
    match variant {
        ThirdOrderVariant::Causal => {
            let lead = 1.0 / model.cutoff;
            let drive = |t: f64| (signal.value(t) + lead * signal.derivative(t)) / m;
            integrate(times, initial, kappa, &drive, tau, options)
        }
        ThirdOrderVariant::AbrahamLorentz => {
            let drive = |t: f64| signal.value(t) / m;
            integrate(times, initial, kappa, &drive, tau, options)
        }
    }
}
