use qle_core::diffusion::{msd, CothMode, MsdOptions};
use qle_core::microscopic::{
    discretize_bath, force_autocorrelation_check, recurrence_time, simulate_classical_io,
    ParticleStart,
};
use qle_core::numerics::lin_space;
use qle_core::{ParticleModel, PhysicalConstants};

const GAMMA: f64 = 1.0;
const N_BATH: usize = 200;
const N_TRAJ: usize = 4000;

fn setup() -> (qle_core::MemoryKernel, ParticleModel) {
    let model = ParticleModel::new(1.0, 0.0, 1.0, PhysicalConstants::dimensionless()).unwrap();
    (model.ohmic_kernel(GAMMA).unwrap(), model)
}

#[test]
fn clamped_bath_force_obeys_fdt() {
    let (kernel, model) = setup();
    let bath = discretize_bath(&kernel, N_BATH, 50.0 * GAMMA).unwrap();
    let times = lin_space(0.0, 5.0 / GAMMA, 21);
    let ens = simulate_classical_io(
        &bath,
        &kernel,
        &model,
        1.0,
        &times,
        N_TRAJ,
        2024,
        ParticleStart::Clamped,
    )
    .unwrap();
    let report = force_autocorrelation_check(&ens, &bath, 5.0 / GAMMA).unwrap();
    assert_eq!(report.times.len(), 21);
    assert!(report.consistent, "max |z| = {}", report.max_abs_z);
}

#[test]
fn ensemble_msd_matches_quadrature() {
    let (kernel, model) = setup();
    let bath = discretize_bath(&kernel, N_BATH, 50.0 * GAMMA).unwrap();
    let t_rec = recurrence_time(&bath);
    let times = lin_space(0.0, 0.8 * t_rec, 41);
    let temperature = 1.0;
    let ens = simulate_classical_io(
        &bath,
        &kernel,
        &model,
        temperature,
        &times,
        N_TRAJ,
        77,
        ParticleStart::ThermalVelocity { x: 0.0 },
    )
    .unwrap();
    let sampled = ens.msd();
    let opts = MsdOptions {
        coth: CothMode::Classical,
        ..MsdOptions::default()
    };
    for (i, &t) in times.iter().enumerate().skip(1) {
        let reference = msd(&kernel, &model, temperature, t, &opts).unwrap().value;
        let rel = (sampled.mean[i] / reference - 1.0).abs();
        assert!(rel < 0.05, "t = {t}: {} vs {reference}", sampled.mean[i]);
    }
}
