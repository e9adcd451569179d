//! A finite independent-oscillator bath simulated explicitly, used as a
//! brute-force check of the fluctuation-dissipation relations.
//!
//! The Hamiltonian is
//! `p^2/2m + K x^2/2 + sum_j [p_j^2/2m_j + c_j (q_j - x)^2 / 2]` with
//! `c_j = m_j omega_j^2`. It is split into the particle drift `p^2/2m` and
//! the rest; with `x` frozen the rest is a set of independent oscillators
//! centred on `x`, so its flow is exact. Strang composition of the two exact
//! flows gives a symplectic second-order step whose error is set by the slow
//! particle motion rather than by the fastest bath mode.

use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
// Unused whenever std is linked; needed for the float methods without it.
#[allow(unused_imports)]
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::kernel::MemoryKernel;
use crate::response::ParticleModel;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BathOscillator {
    pub mass: f64,
    pub frequency: f64,
}

impl BathOscillator {
    /// Coupling weight `m_j omega_j^2`.
    pub fn weight(&self) -> f64 {
        self.mass * self.frequency * self.frequency
    }
}

fn support_scale(kernel: &MemoryKernel) -> f64 {
    match *kernel {
        MemoryKernel::Ohmic { gamma, .. } => gamma,
        MemoryKernel::SingleRelaxation { tau, .. } => 1.0 / tau,
        MemoryKernel::Blackbody { cutoff, .. } => cutoff,
    }
}

/// `n` oscillators on the midpoint grid `omega_j = (j - 1/2) omega_max / n`
/// with `m_j omega_j^2 = (2/pi) Re mu~(omega_j) d omega`.
pub fn discretize_bath(
    kernel: &MemoryKernel,
    n: usize,
    omega_max: f64,
) -> Result<Vec<BathOscillator>> {
    if n < 2 {
        return Err(Error::InvalidArgument(alloc::format!(
            "need at least two bath oscillators, got {n}"
        )));
    }
    if !(omega_max.is_finite() && omega_max > 0.0) {
        return Err(Error::InvalidArgument(alloc::format!(
            "omega_max must be positive, got {omega_max}"
        )));
    }
    let scale = support_scale(kernel);
    if omega_max < 10.0 * scale {
        return Err(Error::InvalidArgument(alloc::format!(
            "omega_max {omega_max} is below ten times the kernel scale {scale}"
        )));
    }
    let dw = omega_max / n as f64;
    let mut out = Vec::with_capacity(n);
    for j in 0..n {
        let w = (j as f64 + 0.5) * dw;
        let re = kernel.real_part(w);
        let weight = 2.0 / PI * re * dw;
        if !(weight.is_finite() && weight >= 0.0) {
            return Err(Error::NonIntegrableKernel { omega_max });
        }
        out.push(BathOscillator {
            mass: weight / (w * w),
            frequency: w,
        });
    }
    Ok(out)
}

/// `mu_N(t) = sum_j m_j omega_j^2 cos(omega_j t)` for `t >= 0`.
pub fn discrete_memory(oscillators: &[BathOscillator], t: f64) -> f64 {
    oscillators
        .iter()
        .map(|o| o.weight() * (o.frequency * t).cos())
        .sum()
}

/// Fourier-Laplace transform of [`discrete_memory`]:
/// `sum_j m_j omega_j^2 (-i z) / (omega_j^2 - z^2)`, for `Im z > 0`.
pub fn discrete_kernel(oscillators: &[BathOscillator], z: Complex64) -> Result<Complex64> {
    if !(z.im > 0.0) {
        return Err(Error::LowerHalfPlane { re: z.re, im: z.im });
    }
    let minus_iz = Complex64::new(z.im, -z.re);
    Ok(oscillators
        .iter()
        .map(|o| minus_iz * o.weight() / (o.frequency * o.frequency - z * z))
        .sum())
}

/// Poincare recurrence horizon `2 pi / d omega` of a uniform grid.
pub fn recurrence_time(oscillators: &[BathOscillator]) -> f64 {
    match oscillators {
        [a, b, ..] => 2.0 * PI / (b.frequency - a.frequency).abs(),
        _ => f64::INFINITY,
    }
}

/// Initial state of the particle in each realization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ParticleStart {
    Fixed {
        x: f64,
        v: f64,
    },
    /// Position fixed, velocity drawn from the Maxwell distribution.
    ThermalVelocity {
        x: f64,
    },
    /// Particle held at the origin; the bath evolves freely and the recorded
    /// force is `sum_j m_j omega_j^2 q_j^h(t)`.
    Clamped,
}

/// Everything a single realization needs.
#[derive(Debug, Clone, PartialEq)]
pub struct IoSystem {
    pub oscillators: Vec<BathOscillator>,
    /// Mass in the Hamiltonian (the bare mass for the blackbody bath).
    pub mass: f64,
    pub spring: f64,
    /// `k_B T`.
    pub thermal_energy: f64,
    pub start: ParticleStart,
    /// Output times; uniform and starting at zero.
    pub times: Vec<f64>,
    /// Splitting steps per output interval.
    pub substeps: usize,
}

impl IoSystem {
    pub fn new(
        oscillators: Vec<BathOscillator>,
        kernel: &MemoryKernel,
        model: &ParticleModel,
        temperature: f64,
        times: &[f64],
        start: ParticleStart,
    ) -> Result<Self> {
        model.check_kernel(kernel)?;
        let mass = kernel.inertial_mass();
        if mass <= 0.0 {
            return Err(Error::AcausalCutoff { bare_mass: mass });
        }
        if !(temperature.is_finite() && temperature >= 0.0) {
            return Err(Error::InvalidArgument(alloc::format!(
                "temperature must be non-negative, got {temperature}"
            )));
        }
        if oscillators
            .iter()
            .any(|o| !(o.frequency > 0.0 && o.mass > 0.0 && o.weight().is_finite()))
        {
            return Err(Error::InvalidArgument(
                "bath oscillators need positive mass and frequency".into(),
            ));
        }
        if times.len() < 2 || times[0] != 0.0 {
            return Err(Error::InvalidArgument(
                "time grid must start at zero and have at least two points".into(),
            ));
        }
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::GridNotIncreasing);
        }
        let dt = times[1];
        if times
            .iter()
            .enumerate()
            .any(|(i, &t)| (t - dt * i as f64).abs() > 1e-9 * t.max(dt))
        {
            return Err(Error::InvalidArgument("time grid must be uniform".into()));
        }
        let total: f64 = oscillators.iter().map(BathOscillator::weight).sum();
        let fast = ((model.spring + total) / mass).sqrt();
        let substeps = if matches!(start, ParticleStart::Clamped) || fast == 0.0 {
            1
        } else {
            (dt * fast / 0.05).ceil().max(1.0) as usize
        };
        Ok(Self {
            oscillators,
            mass,
            spring: model.spring,
            thermal_energy: model.constants.k_b * temperature,
            start,
            times: times.to_vec(),
            substeps,
        })
    }

    pub fn step(&self) -> f64 {
        self.times[1] / self.substeps as f64
    }
}

/// Particle observables of one realization on the shared time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ParticleTrajectory {
    pub x: Vec<f64>,
    pub v: Vec<f64>,
    /// Bath force `sum_j c_j (q_j - x)` on the particle.
    pub force: Vec<f64>,
    /// Largest `|H(t) - H(0)| / |H(0)|` seen at the output times.
    pub energy_drift: f64,
}

/// Largest relative energy drift tolerated before a run is rejected.
pub const MAX_ENERGY_DRIFT: f64 = 1e-4;

/// RNG for realization `index`: the seed selects the key, the index the stream.
pub fn realization_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

struct StepTable {
    cos: Vec<f64>,
    /// `sin(w h) / (m_j w)`: displacement per unit bath momentum.
    sin_over_mw: Vec<f64>,
    /// `m_j w sin(w h)`.
    mw_sin: Vec<f64>,
}

fn energy(sys: &IoSystem, x: f64, p: f64, q: &[f64], pj: &[f64]) -> f64 {
    let mut e = 0.5 * p * p / sys.mass + 0.5 * sys.spring * x * x;
    for (j, o) in sys.oscillators.iter().enumerate() {
        let y = q[j] - x;
        e += 0.5 * pj[j] * pj[j] / o.mass + 0.5 * o.weight() * y * y;
    }
    e
}

/// Simulate realization `index` of the ensemble seeded by `seed`.
pub fn simulate_realization(sys: &IoSystem, seed: u64, index: u64) -> Result<ParticleTrajectory> {
    let mut rng = realization_rng(seed, index);
    let kt = sys.thermal_energy;
    let clamped = matches!(sys.start, ParticleStart::Clamped);
    let (mut x, v0) = match sys.start {
        ParticleStart::Fixed { x, v } => (x, v),
        ParticleStart::ThermalVelocity { x } => {
            let g: f64 = rng.sample(StandardNormal);
            (x, g * (kt / sys.mass).sqrt())
        }
        ParticleStart::Clamped => (0.0, 0.0),
    };
    let mut p = sys.mass * v0;
    let n = sys.oscillators.len();
    let mut q = Vec::with_capacity(n);
    let mut pj = Vec::with_capacity(n);
    for o in &sys.oscillators {
        let gy: f64 = rng.sample(StandardNormal);
        let gp: f64 = rng.sample(StandardNormal);
        q.push(x + gy * (kt / o.weight()).sqrt());
        pj.push(gp * (o.mass * kt).sqrt());
    }
    let h = sys.step();
    let table = StepTable {
        cos: sys
            .oscillators
            .iter()
            .map(|o| (o.frequency * h).cos())
            .collect(),
        sin_over_mw: sys
            .oscillators
            .iter()
            .map(|o| (o.frequency * h).sin() / (o.mass * o.frequency))
            .collect(),
        mw_sin: sys
            .oscillators
            .iter()
            .map(|o| o.mass * o.frequency * (o.frequency * h).sin())
            .collect(),
    };
    let force = |x: f64, q: &[f64]| -> f64 {
        sys.oscillators
            .iter()
            .zip(q)
            .map(|(o, &qj)| o.weight() * (qj - x))
            .sum()
    };
    let samples = sys.times.len();
    let mut out = ParticleTrajectory {
        x: Vec::with_capacity(samples),
        v: Vec::with_capacity(samples),
        force: Vec::with_capacity(samples),
        energy_drift: 0.0,
    };
    let e0 = energy(sys, x, p, &q, &pj);
    out.x.push(x);
    out.v.push(p / sys.mass);
    out.force.push(force(x, &q));
    for _ in 1..samples {
        for _ in 0..sys.substeps {
            if !clamped {
                x += 0.5 * h * p / sys.mass;
            }
            // Exact flow with the particle frozen at x.
            let mut impulse = -sys.spring * x * h;
            for j in 0..n {
                let y = q[j] - x;
                let c = table.cos[j];
                impulse += table.mw_sin[j] * y + (1.0 - c) * pj[j];
                let y_new = y * c + pj[j] * table.sin_over_mw[j];
                pj[j] = -table.mw_sin[j] * y + pj[j] * c;
                q[j] = x + y_new;
            }
            if !clamped {
                p += impulse;
                x += 0.5 * h * p / sys.mass;
            }
        }
        let e = energy(sys, x, p, &q, &pj);
        if e0 != 0.0 {
            out.energy_drift = out.energy_drift.max((e - e0).abs() / e0.abs());
        }
        if !(x.is_finite() && p.is_finite()) {
            return Err(Error::NonFinite("microscopic state"));
        }
        out.x.push(x);
        out.v.push(p / sys.mass);
        out.force.push(force(x, &q));
    }
    if out.energy_drift > MAX_ENERGY_DRIFT {
        return Err(Error::StepTooLarge(alloc::format!(
            "relative energy drift {:e} exceeds {MAX_ENERGY_DRIFT:e}",
            out.energy_drift
        )));
    }
    Ok(out)
}

/// Realizations of the particle motion sharing one time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Ensemble {
    pub times: Vec<f64>,
    pub trajectories: Vec<ParticleTrajectory>,
    pub seed: u64,
    pub n_bath: usize,
    pub temperature: f64,
    pub thermal_energy: f64,
    pub clamped: bool,
}

/// Mean and standard error of the mean at each time.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleAverage {
    pub times: Vec<f64>,
    pub mean: Vec<f64>,
    pub stderr: Vec<f64>,
}

impl Ensemble {
    pub fn from_trajectories(
        system: &IoSystem,
        trajectories: Vec<ParticleTrajectory>,
        seed: u64,
        temperature: f64,
    ) -> Self {
        Self {
            times: system.times.clone(),
            trajectories,
            seed,
            n_bath: system.oscillators.len(),
            temperature,
            thermal_energy: system.thermal_energy,
            clamped: matches!(system.start, ParticleStart::Clamped),
        }
    }

    /// Ensemble average of `f(trajectory, time index)`.
    pub fn average<F: Fn(&ParticleTrajectory, usize) -> f64>(&self, f: F) -> EnsembleAverage {
        let n = self.trajectories.len() as f64;
        let mut mean = Vec::with_capacity(self.times.len());
        let mut stderr = Vec::with_capacity(self.times.len());
        for i in 0..self.times.len() {
            let mut s = 0.0;
            let mut s2 = 0.0;
            for tr in &self.trajectories {
                let v = f(tr, i);
                s += v;
                s2 += v * v;
            }
            let m = s / n;
            let var = if n > 1.0 {
                ((s2 - n * m * m) / (n - 1.0)).max(0.0)
            } else {
                0.0
            };
            mean.push(m);
            stderr.push((var / n).sqrt());
        }
        EnsembleAverage {
            times: self.times.clone(),
            mean,
            stderr,
        }
    }

    /// `<(x(t) - x(0))^2>`.
    pub fn msd(&self) -> EnsembleAverage {
        self.average(|tr, i| {
            let d = tr.x[i] - tr.x[0];
            d * d
        })
    }

    /// `<x(t)^2>`.
    pub fn mean_square(&self) -> EnsembleAverage {
        self.average(|tr, i| tr.x[i] * tr.x[i])
    }

    /// `<F(t) F(0)>`.
    pub fn force_autocorrelation(&self) -> EnsembleAverage {
        self.average(|tr, i| tr.force[i] * tr.force[0])
    }

    pub fn max_energy_drift(&self) -> f64 {
        self.trajectories
            .iter()
            .map(|t| t.energy_drift)
            .fold(0.0, f64::max)
    }
}

/// Run `n_traj` realizations one after another.
#[allow(clippy::too_many_arguments)]
pub fn simulate_classical_io(
    oscillators: &[BathOscillator],
    kernel: &MemoryKernel,
    model: &ParticleModel,
    temperature: f64,
    times: &[f64],
    n_traj: usize,
    seed: u64,
    start: ParticleStart,
) -> Result<Ensemble> {
    if n_traj == 0 {
        return Err(Error::InvalidArgument(
            "need at least one trajectory".into(),
        ));
    }
    let sys = IoSystem::new(
        oscillators.to_vec(),
        kernel,
        model,
        temperature,
        times,
        start,
    )?;
    let trajectories = (0..n_traj as u64)
        .map(|i| simulate_realization(&sys, seed, i))
        .collect::<Result<Vec<_>>>()?;
    Ok(Ensemble::from_trajectories(
        &sys,
        trajectories,
        seed,
        temperature,
    ))
}

/// Comparison of the sampled force autocorrelation with `kT mu_N(t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FdtReport {
    pub times: Vec<f64>,
    pub estimate: Vec<f64>,
    pub stderr: Vec<f64>,
    pub prediction: Vec<f64>,
    /// `(estimate - prediction) / stderr`.
    pub z_scores: Vec<f64>,
    pub max_abs_z: f64,
    /// Largest `|estimate - prediction|` relative to the prediction at `t = 0`.
    pub max_relative_deviation: f64,
    /// Every point lies within three standard errors.
    pub consistent: bool,
}

/// Compare `<F(t)F(0)>` with `kT sum_j m_j omega_j^2 cos(omega_j t)` for
/// `t <= t_max`, restricted to times before the recurrence horizon.
pub fn force_autocorrelation_check(
    ensemble: &Ensemble,
    oscillators: &[BathOscillator],
    t_max: f64,
) -> Result<FdtReport> {
    if !ensemble.clamped {
        return Err(Error::InvalidArgument(
            "force autocorrelation needs an ensemble with the particle clamped".into(),
        ));
    }
    if ensemble.trajectories.len() < 2 {
        return Err(Error::InvalidArgument(
            "need at least two realizations".into(),
        ));
    }
    let horizon = recurrence_time(oscillators).min(t_max.max(0.0));
    let corr = ensemble.force_autocorrelation();
    let kt = ensemble.thermal_energy;
    let mut report = FdtReport {
        times: Vec::new(),
        estimate: Vec::new(),
        stderr: Vec::new(),
        prediction: Vec::new(),
        z_scores: Vec::new(),
        max_abs_z: 0.0,
        max_relative_deviation: 0.0,
        consistent: true,
    };
    let reference = kt * discrete_memory(oscillators, 0.0);
    for (i, &t) in corr.times.iter().enumerate() {
        if t > horizon {
            break;
        }
        let pred = kt * discrete_memory(oscillators, t);
        let dev = corr.mean[i] - pred;
        let se = corr.stderr[i];
        if i == 0 && !(se < pred.abs()) {
            return Err(Error::InsufficientStatistics {
                stderr: se,
                scale: pred.abs(),
            });
        }
        let z = if se > 0.0 {
            dev / se
        } else if dev == 0.0 {
            0.0
        } else {
            f64::INFINITY
        };
        report.times.push(t);
        report.estimate.push(corr.mean[i]);
        report.stderr.push(se);
        report.prediction.push(pred);
        report.z_scores.push(z);
        report.max_abs_z = report.max_abs_z.max(z.abs());
        if reference != 0.0 {
            report.max_relative_deviation =
                report.max_relative_deviation.max((dev / reference).abs());
        }
    }
    report.consistent = report.max_abs_z <= 3.0;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::PhysicalConstants;
    use crate::numerics::lin_space;

    fn ohmic(gamma: f64, spring: f64) -> (MemoryKernel, ParticleModel) {
        let m = ParticleModel::new(1.0, spring, 1.0, PhysicalConstants::dimensionless()).unwrap();
        (m.ohmic_kernel(gamma).unwrap(), m)
    }

    #[test]
    fn memory_at_zero_matches_window_integral() {
        let (k, _) = ohmic(1.0, 0.0);
        let b = discretize_bath(&k, 2000, 50.0).unwrap();
        let reference = 2.0 / PI * 50.0;
        assert!((discrete_memory(&b, 0.0) / reference - 1.0).abs() < 0.02);
    }

    #[test]
    fn kernel_on_imaginary_axis() {
        let (k, _) = ohmic(1.0, 0.0);
        let b = discretize_bath(&k, 2000, 50.0).unwrap();
        let z = Complex64::new(0.0, 1.0);
        let got = discrete_kernel(&b, z).unwrap();
        // The window [0, 50 gamma] holds (2/pi) atan(50) of the full weight.
        let window = 2.0 / PI * 50f64.atan();
        assert!((got.re / window - 1.0).abs() < 0.01, "{got}");
        assert!(got.im.abs() < 1e-12);
        // Refinement converges at a point off the imaginary axis.
        let z = Complex64::new(3.0, 0.5);
        let at = |n| discrete_kernel(&discretize_bath(&k, n, 50.0).unwrap(), z).unwrap();
        let (a, b, c) = (at(500), at(1000), at(2000));
        assert!((c - b).norm() < 0.5 * (b - a).norm());
    }

    #[test]
    fn rejects_bad_windows() {
        let (k, _) = ohmic(1.0, 0.0);
        assert!(discretize_bath(&k, 1, 50.0).is_err());
        assert!(discretize_bath(&k, 100, 5.0).is_err());
    }

    #[test]
    fn zero_temperature_stays_at_rest() {
        let (k, m) = ohmic(1.0, 0.0);
        let b = discretize_bath(&k, 50, 20.0).unwrap();
        let t = lin_space(0.0, 5.0, 51);
        let e = simulate_classical_io(
            &b,
            &k,
            &m,
            0.0,
            &t,
            3,
            1,
            ParticleStart::Fixed { x: 0.0, v: 0.0 },
        )
        .unwrap();
        for tr in &e.trajectories {
            assert!(tr.x.iter().all(|x| *x == 0.0));
        }
    }

    #[test]
    fn deterministic_given_seed() {
        let (k, m) = ohmic(1.0, 0.0);
        let b = discretize_bath(&k, 40, 20.0).unwrap();
        let t = lin_space(0.0, 2.0, 21);
        let run = |seed| {
            simulate_classical_io(
                &b,
                &k,
                &m,
                1.0,
                &t,
                4,
                seed,
                ParticleStart::ThermalVelocity { x: 0.0 },
            )
            .unwrap()
        };
        assert_eq!(run(7), run(7));
        assert_ne!(run(7), run(8));
    }

    #[test]
    fn energy_is_conserved() {
        let (k, m) = ohmic(1.0, 2.0);
        let b = discretize_bath(&k, 100, 40.0).unwrap();
        let t = lin_space(0.0, 20.0, 201);
        let e = simulate_classical_io(
            &b,
            &k,
            &m,
            1.0,
            &t,
            5,
            3,
            ParticleStart::ThermalVelocity { x: 0.0 },
        )
        .unwrap();
        assert!(e.max_energy_drift() < MAX_ENERGY_DRIFT);
    }

    #[test]
    fn equipartition_in_a_trap() {
        let (k, m) = ohmic(1.0, 2.0);
        let b = discretize_bath(&k, 100, 40.0).unwrap();
        let t = lin_space(0.0, 12.0, 25);
        let e = simulate_classical_io(
            &b,
            &k,
            &m,
            1.5,
            &t,
            600,
            11,
            ParticleStart::Fixed { x: 0.0, v: 0.0 },
        )
        .unwrap();
        let ms = e.mean_square();
        // Average the relaxed part of the curve; samples are correlated, so
        // use the largest single-time error as the uncertainty.
        let late: Vec<usize> = (12..25).collect();
        let mean = late.iter().map(|&i| ms.mean[i]).sum::<f64>() / late.len() as f64;
        let se = late.iter().map(|&i| ms.stderr[i]).fold(0.0, f64::max);
        assert!((mean - 0.75).abs() < 3.0 * se, "{mean} +- {se}");
        assert!(se < 0.1 * 0.75);
    }

    #[test]
    fn clamped_force_correlation_and_error_scaling() {
        let (k, m) = ohmic(1.0, 0.0);
        let b = discretize_bath(&k, 60, 30.0).unwrap();
        let t = lin_space(0.0, 5.0, 11);
        let run =
            |n| simulate_classical_io(&b, &k, &m, 1.0, &t, n, 5, ParticleStart::Clamped).unwrap();
        let small = run(400);
        let big = run(800);
        let r = force_autocorrelation_check(&big, &b, 5.0).unwrap();
        assert!(r.max_abs_z < 4.0, "{r:?}");
        let ratio = big.force_autocorrelation().stderr[0] / small.force_autocorrelation().stderr[0];
        assert!((ratio * 2f64.sqrt() - 1.0).abs() < 0.2, "{ratio}");
        let not_clamped = simulate_classical_io(
            &b,
            &k,
            &m,
            1.0,
            &t,
            4,
            5,
            ParticleStart::ThermalVelocity { x: 0.0 },
        )
        .unwrap();
        assert!(force_autocorrelation_check(&not_clamped, &b, 5.0).is_err());
        let cold =
            simulate_classical_io(&b, &k, &m, 0.0, &t, 2, 5, ParticleStart::Clamped).unwrap();
        assert!(matches!(
            force_autocorrelation_check(&cold, &b, 5.0),
            Err(Error::InsufficientStatistics { .. })
        ));
    }
}
