//! Subcommand implementations. Each returns the CSV table and a JSON summary.

use rayon::prelude::*;
use serde_json::{json, Value};

use qle_core::diffusion::{self, CothMode, Diffusion, MsdCurve, MsdOptions};
use qle_core::microscopic::{
    discretize_bath, force_autocorrelation_check, recurrence_time, simulate_realization, Ensemble,
    IoSystem, ParticleStart,
};
use qle_core::motion::{
    characteristic_roots, integrate_point_limit, integrate_third_order, ForceSignal, MotionOptions,
    ThirdOrderVariant,
};
use qle_core::numerics::{Integral, Quadrature};
use qle_core::response::{poles_and_causality, susceptibility_real};
use qle_core::thermo::{
    assemble_curve, bbr_shift_closed_form, coupled_free_energy, thermo_derivatives,
    welton_closed_form, welton_energy, FreeEnergyCurve, FreeEnergyOptions,
};
use qle_core::{MemoryKernel, ParticleModel};

use crate::config::RunConfig;
use crate::error::CliError;
use crate::output::{num, Table};

pub struct CommandOutput {
    pub table: Table,
    pub summary: Value,
    /// Extra files as `(suffix, bytes)`, written next to the CSV.
    pub extra: Vec<(&'static str, Vec<u8>)>,
}

fn finite_or_null(v: f64) -> Value {
    if v.is_finite() {
        json!(v)
    } else {
        Value::Null
    }
}

fn quadrature(cfg: &RunConfig) -> Quadrature {
    Quadrature {
        abs_tol: 0.0,
        rel_tol: cfg.tolerance,
        ..Quadrature::default()
    }
}

fn model_summary(model: &ParticleModel) -> Value {
    let k = &model.constants;
    json!({
        "mass": model.mass,
        "spring": model.spring,
        "cutoff": model.cutoff,
        "bare_mass": model.bare_mass(),
        "tau_e": model.tau_e(),
        "inverse_tau_e": 1.0 / model.tau_e(),
        "causal": model.is_causal(),
        "constants": { "hbar": k.hbar, "k_b": k.k_b, "c": k.c, "e": k.e, "alpha_fs": k.alpha_fs },
    })
}

pub fn dispatch(cfg: &RunConfig) -> Result<CommandOutput, CliError> {
    let model = cfg.particle_model()?;
    let kernel = cfg.memory_kernel(&model)?;
    let mut out = match cfg.command.as_str() {
        "susceptibility" => susceptibility(cfg, &kernel, &model),
        "causality" => causality(cfg, &kernel, &model),
        "free-energy" => free_energy(cfg, &kernel, &model),
        "shift" => shift(cfg, &kernel, &model),
        "welton" => welton(cfg, &model),
        "electron-motion" => electron_motion(cfg, &model),
        "diffusion" => diffusion_run(cfg, &kernel, &model),
        "oracle" => oracle(cfg, &kernel, &model),
        other => Err(CliError::unknown_command(other)),
    }?;
    if let Value::Object(map) = &mut out.summary {
        map.insert("model".into(), model_summary(&model));
    }
    Ok(out)
}

fn susceptibility(
    cfg: &RunConfig,
    kernel: &MemoryKernel,
    model: &ParticleModel,
) -> Result<CommandOutput, CliError> {
    let freqs = cfg
        .frequencies
        .as_ref()
        .map(|g| g.values())
        .unwrap_or_default();
    let values = freqs
        .par_iter()
        .map(|&w| susceptibility_real(kernel, model, w))
        .collect::<Result<Vec<_>, _>>()?;
    let mut table = Table::new(&["omega", "re_alpha", "im_alpha"]);
    for (w, a) in freqs.iter().zip(&values) {
        table.push(vec![num(*w), num(a.re), num(a.im)]);
    }
    Ok(CommandOutput {
        table,
        summary: json!({ "points": freqs.len() }),
        extra: Vec::new(),
    })
}

fn causality(
    cfg: &RunConfig,
    kernel: &MemoryKernel,
    model: &ParticleModel,
) -> Result<CommandOutput, CliError> {
    let report = poles_and_causality(kernel, model)?;
    let mut table = Table::new(&["cutoff", "cutoff_tau_e", "bare_mass", "causal", "max_im"]);
    let row = |m: &ParticleModel, causal: bool, max_im: f64| {
        vec![
            num(m.cutoff),
            num(m.cutoff * m.tau_e()),
            num(m.bare_mass()),
            causal.to_string(),
            num(max_im),
        ]
    };
    match &cfg.cutoffs {
        Some(grid) => {
            let tau = model.tau_e();
            let rows = grid
                .values()
                .par_iter()
                .map(|&c| {
                    let m = ParticleModel::new(model.mass, model.spring, c / tau, model.constants)?;
                    let k = cfg.memory_kernel(&m)?;
                    let r = poles_and_causality(&k, &m)?;
                    Ok(row(&m, r.causal, r.max_im))
                })
                .collect::<Result<Vec<_>, CliError>>()?;
            for r in rows {
                table.push(r);
            }
        }
        None => table.push(row(model, report.causal, report.max_im)),
    }
    let poles: Vec<[f64; 2]> = report.poles.iter().map(|p| [p.re, p.im]).collect();
    Ok(CommandOutput {
        table,
        summary: json!({
            "causal": report.causal,
            "marginal": report.marginal,
            "max_im": finite_or_null(report.max_im),
            "zero_modes": report.zero_modes,
            "poles": poles,
        }),
        extra: Vec::new(),
    })
}

fn free_energy_sweep(
    cfg: &RunConfig,
    kernel: &MemoryKernel,
    model: &ParticleModel,
) -> Result<FreeEnergyCurve, CliError> {
    let temps = cfg
        .temperatures
        .as_ref()
        .map(|g| g.values())
        .unwrap_or_default();
    let opts = FreeEnergyOptions {
        allow_acausal: cfg.allow_acausal,
        quadrature: quadrature(cfg),
    };
    let results: Vec<Integral> = temps
        .par_iter()
        .map(|&t| coupled_free_energy(kernel, model, t, &opts))
        .collect::<Result<_, _>>()?;
    let d = cfg.dimension().factor();
    let values = results.iter().map(|r| d * r.value).collect();
    let errors = results.iter().map(|r| d * r.error).collect();
    let mut curve = assemble_curve(kernel, model, &temps, values, errors);
    if let Some(b) = &mut curve.baseline {
        b.iter_mut().for_each(|v| *v *= d);
    }
    Ok(curve)
}

fn shift_fit(curve: &FreeEnergyCurve, cfg: &RunConfig, model: &ParticleModel) -> Value {
    let closed = bbr_shift_closed_form(1.0, model, cfg.dimension());
    match curve.t_squared_coefficient() {
        Ok(c) => json!({
            "t_squared_coefficient": c,
            "closed_form_coefficient": closed,
            "relative_deviation": c / closed - 1.0,
        }),
        Err(e) => {
            json!({ "t_squared_coefficient": null, "closed_form_coefficient": closed, "fit_failure": e.to_string() })
        }
    }
}

fn max_relative_error(values: &[f64], errors: &[f64]) -> f64 {
    values
        .iter()
        .zip(errors)
        .map(|(v, e)| if *v != 0.0 { (e / v).abs() } else { e.abs() })
        .fold(0.0, f64::max)
}

fn free_energy(
    cfg: &RunConfig,
    kernel: &MemoryKernel,
    model: &ParticleModel,
) -> Result<CommandOutput, CliError> {
    let curve = free_energy_sweep(cfg, kernel, model)?;
    let thermo = thermo_derivatives(&curve)?;
    let shift = curve.shift();
    let mut table = Table::new(&["T", "F0", "baseline", "shift", "U", "S", "C", "quad_error"]);
    for i in 0..curve.temperatures.len() {
        let baseline = curve
            .baseline
            .as_ref()
            .map(|b| num(b[i]))
            .unwrap_or_default();
        table.push(vec![
            num(curve.temperatures[i]),
            num(curve.values[i]),
            baseline,
            num(shift[i]),
            num(thermo.energy[i]),
            num(thermo.entropy[i]),
            num(thermo.heat_capacity[i]),
            num(curve.errors[i]),
        ]);
    }
    let summary = json!({
        "fit": shift_fit(&curve, cfg, model),
        "achieved": {
            "max_relative_quad_error": max_relative_error(&curve.values, &curve.errors),
            "max_entropy_error": thermo.entropy_error.iter().cloned().fold(0.0, f64::max),
            "max_heat_capacity_error": thermo.heat_capacity_error.iter().cloned().fold(0.0, f64::max),
        },
    });
    Ok(CommandOutput {
        table,
        summary,
        extra: Vec::new(),
    })
}

fn shift(
    cfg: &RunConfig,
    kernel: &MemoryKernel,
    model: &ParticleModel,
) -> Result<CommandOutput, CliError> {
    let curve = free_energy_sweep(cfg, kernel, model)?;
    let shift = curve.shift();
    let mut table = Table::new(&["T", "shift", "closed_form", "quad_error"]);
    for (i, &t) in curve.temperatures.iter().enumerate() {
        table.push(vec![
            num(t),
            num(shift[i]),
            num(bbr_shift_closed_form(t, model, cfg.dimension())),
            num(curve.errors[i]),
        ]);
    }
    Ok(CommandOutput {
        table,
        summary: json!({
            "fit": shift_fit(&curve, cfg, model),
            "achieved": { "max_relative_quad_error": max_relative_error(&curve.values, &curve.errors) },
        }),
        extra: Vec::new(),
    })
}

fn welton(cfg: &RunConfig, model: &ParticleModel) -> Result<CommandOutput, CliError> {
    let temps = cfg
        .temperatures
        .as_ref()
        .map(|g| g.values())
        .unwrap_or_default();
    let quad = quadrature(cfg);
    let k = model.constants;
    let results: Vec<Integral> = temps
        .par_iter()
        .map(|&t| welton_energy(t, model.mass, &k, &quad))
        .collect::<Result<_, _>>()?;
    let mut table = Table::new(&[
        "T",
        "welton",
        "closed_form",
        "bbr_shift",
        "ratio",
        "quad_error",
    ]);
    let mut worst: f64 = 0.0;
    for (&t, r) in temps.iter().zip(&results) {
        let closed = welton_closed_form(t, model.mass, &k);
        let bbr = bbr_shift_closed_form(t, model, cfg.dimension());
        if closed != 0.0 {
            worst = worst.max((r.value / closed - 1.0).abs());
        }
        table.push(vec![
            num(t),
            num(r.value),
            num(closed),
            num(bbr),
            num(r.value / bbr),
            num(r.error),
        ]);
    }
    Ok(CommandOutput {
        table,
        summary: json!({ "achieved": { "max_relative_deviation_from_closed_form": worst } }),
        extra: Vec::new(),
    })
}

fn force_signal(cfg: &RunConfig) -> Result<ForceSignal, CliError> {
    let spec = cfg.motion.clone().unwrap_or_default().force;
    let need = |key: &str, v: Option<f64>| {
        v.ok_or_else(|| {
            CliError::config(format!("motion.force.{key} is required for {}", spec.kind))
        })
    };
    Ok(match spec.kind.as_str() {
        "ramped-constant" => ForceSignal::ramped_constant(
            spec.amplitude,
            need("start", spec.start)?,
            need("width", spec.width)?,
        )?,
        "sinusoid" => ForceSignal::Sinusoid {
            amplitude: spec.amplitude,
            frequency: need("frequency", spec.frequency)?,
            phase: spec.phase.unwrap_or(0.0),
        },
        "gaussian-pulse" => ForceSignal::gaussian_pulse(
            spec.amplitude,
            need("center", spec.center)?,
            need("width", spec.width)?,
        )?,
        _ => ForceSignal::Zero,
    })
}

fn electron_motion(cfg: &RunConfig, model: &ParticleModel) -> Result<CommandOutput, CliError> {
    let spec = cfg.motion.clone().unwrap_or_default();
    let signal = force_signal(cfg)?;
    let times = cfg.times.as_ref().map(|g| g.values()).unwrap_or_default();
    let opts = MotionOptions::default();
    let [x0, v0, a0] = spec.initial;
    let (traj, roots) = match spec.equation.as_str() {
        "point-limit" => (
            integrate_point_limit(&signal, model, &times, x0, v0, &opts)?,
            Vec::new(),
        ),
        eq => {
            let variant = if eq == "abraham-lorentz" {
                ThirdOrderVariant::AbrahamLorentz
            } else {
                ThirdOrderVariant::Causal
            };
            let roots = characteristic_roots(model, variant);
            (
                integrate_third_order(&signal, model, &times, [x0, v0, a0], variant, &opts)?,
                roots,
            )
        }
    };
    let mut table = Table::new(&["t", "x", "v", "a"]);
    for i in 0..traj.times.len() {
        table.push(vec![
            num(traj.times[i]),
            num(traj.x[i]),
            num(traj.v[i]),
            num(traj.a[i]),
        ]);
    }
    let roots: Vec<[f64; 2]> = roots.iter().map(|r| [r.re, r.im]).collect();
    Ok(CommandOutput {
        table,
        summary: json!({
            "runaway": traj.runaway_flag,
            "growth_rate": traj.growth_rate,
            "fit_rate": traj.fit_rate,
            "fit_r2": traj.fit_r2,
            "force": signal.description(),
            "characteristic_roots": roots,
            "samples": traj.times.len(),
        }),
        extra: Vec::new(),
    })
}

fn coth_mode(cfg: &RunConfig) -> CothMode {
    match cfg.coth.as_deref() {
        Some("quantum") => CothMode::Quantum,
        Some("classical") => CothMode::Classical,
        _ => CothMode::Auto,
    }
}

fn diffusion_run(
    cfg: &RunConfig,
    kernel: &MemoryKernel,
    model: &ParticleModel,
) -> Result<CommandOutput, CliError> {
    let times = cfg.times.as_ref().map(|g| g.values()).unwrap_or_default();
    let temperature = cfg.temperature.unwrap_or(0.0);
    let opts = MsdOptions {
        coth: coth_mode(cfg),
        quadrature: quadrature(cfg),
    };
    let results: Vec<Integral> = times
        .par_iter()
        .map(|&t| diffusion::msd(kernel, model, temperature, t, &opts))
        .collect::<Result<_, _>>()?;
    let curve = MsdCurve {
        times: times.clone(),
        values: results.iter().map(|r| r.value).collect(),
        errors: results.iter().map(|r| r.error).collect(),
        temperature,
        kernel: *kernel,
        model: *model,
        fit: None,
    };
    let tags = curve.regime_tags();
    let mut table = Table::new(&["t", "msd", "regime_tag"]);
    for i in 0..times.len() {
        table.push(vec![
            num(times[i]),
            num(curve.values[i]),
            tags[i].as_str().to_string(),
        ]);
    }
    let window = match cfg.fit_window {
        Some([lo, hi]) => (lo, hi),
        None => diffusion::default_window(kernel, model),
    };
    let fit = match diffusion::diffusion_constant_in(kernel, model, temperature, window, &opts) {
        Ok(d) => {
            let law = d.law();
            let (kind, constant) = match d {
                Diffusion::Normal { constant, .. } => ("normal", Some(constant)),
                Diffusion::Anomalous { .. } => ("anomalous", None),
            };
            json!({
                "diffusion": kind,
                "constant": constant,
                "exponent": law.exponent,
                "prefactor": law.prefactor,
                "fit_error": law.fit_error,
                "residual": law.residual,
            })
        }
        Err(e) => json!({ "diffusion": null, "fit_failure": e.to_string() }),
    };
    let einstein = match kernel {
        MemoryKernel::Ohmic { gamma, mass } => {
            Some(model.constants.k_b * temperature / (mass * gamma))
        }
        _ => None,
    };
    Ok(CommandOutput {
        table,
        summary: json!({
            "window": [window.0, window.1],
            "fit": fit,
            "einstein_constant": einstein,
            "achieved": { "max_relative_quad_error": max_relative_error(&curve.values, &curve.errors) },
        }),
        extra: Vec::new(),
    })
}

fn oracle(
    cfg: &RunConfig,
    kernel: &MemoryKernel,
    model: &ParticleModel,
) -> Result<CommandOutput, CliError> {
    let spec = cfg
        .oracle
        .clone()
        .ok_or_else(|| CliError::config("command oracle needs \"oracle\""))?;
    let seed = cfg
        .seed
        .ok_or_else(|| CliError::config("command oracle needs \"seed\""))?;
    let temperature = cfg.temperature.unwrap_or(0.0);
    let times = cfg.times.as_ref().map(|g| g.values()).unwrap_or_default();
    let bath = discretize_bath(kernel, spec.n_bath, spec.omega_max)?;
    let clamped = spec.start == "clamped";
    let start = if clamped {
        ParticleStart::Clamped
    } else {
        ParticleStart::ThermalVelocity { x: 0.0 }
    };
    if spec.n_traj < 2 {
        return Err(CliError::config("oracle.n_traj must be at least 2"));
    }
    let system = IoSystem::new(bath.clone(), kernel, model, temperature, &times, start)?;
    let trajectories = (0..spec.n_traj as u64)
        .into_par_iter()
        .map(|i| simulate_realization(&system, seed, i))
        .collect::<Result<Vec<_>, _>>()?;
    let ens = Ensemble::from_trajectories(&system, trajectories, seed, temperature);
    let t_rec = recurrence_time(&bath);
    let mut summary = json!({
        "n_bath": spec.n_bath,
        "n_traj": spec.n_traj,
        "recurrence_time": t_rec,
        "substeps": system.substeps,
        "max_energy_drift": ens.max_energy_drift(),
    });
    let average = if clamped {
        let t_max = times.last().copied().unwrap_or(0.0);
        let report = force_autocorrelation_check(&ens, &bath, t_max)?;
        summary["observable"] = json!("force_autocorrelation");
        summary["fdt"] = json!({
            "max_abs_z": report.max_abs_z,
            "max_relative_deviation": report.max_relative_deviation,
            "consistent_3_sigma": report.consistent,
            "points_compared": report.times.len(),
        });
        ens.force_autocorrelation()
    } else {
        let avg = ens.msd();
        let opts = MsdOptions {
            coth: CothMode::Classical,
            quadrature: quadrature(cfg),
        };
        let compared: Vec<(f64, f64)> = avg
            .times
            .iter()
            .zip(&avg.mean)
            .filter(|(t, _)| **t > 0.0 && **t < t_rec)
            .map(|(&t, &m)| (t, m))
            .collect();
        let references = compared
            .par_iter()
            .map(|&(t, _)| diffusion::msd(kernel, model, temperature, t, &opts).map(|r| r.value))
            .collect::<Result<Vec<_>, _>>()?;
        let worst = compared
            .iter()
            .zip(&references)
            .map(|((_, m), r)| (m / r - 1.0).abs())
            .fold(0.0, f64::max);
        summary["observable"] = json!("msd");
        summary["msd_vs_quadrature"] = json!({
            "max_relative_deviation": worst,
            "points_compared": compared.len(),
        });
        avg
    };
    let mut table = Table::new(&["t", "mean", "stderr"]);
    for i in 0..average.times.len() {
        table.push(vec![
            num(average.times[i]),
            num(average.mean[i]),
            num(average.stderr[i]),
        ]);
    }
    let extra = if spec.dump {
        vec![("bin", crate::output::ensemble_dump(&ens))]
    } else {
        Vec::new()
    };
    Ok(CommandOutput {
        table,
        summary,
        extra,
    })
}
