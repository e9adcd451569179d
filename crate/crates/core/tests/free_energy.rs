use core::f64::consts::PI;

use qle_core::numerics::log_space;
use qle_core::thermo::{
    bbr_shift_closed_form, free_energy_curve, thermo_derivatives, Dimension, FreeEnergyOptions,
};
use qle_core::{ParticleModel, PhysicalConstants};

fn t_squared_curve() -> qle_core::thermo::FreeEnergyCurve {
    let k = PhysicalConstants::dimensionless();
    // omega0 = 1e-4 and Omega = 1e4; this cutoff lies beyond 1/tau_e.
    let m = ParticleModel::new(1.0, 1e-8, 1e4, k).unwrap();
    let opts = FreeEnergyOptions {
        allow_acausal: true,
        ..Default::default()
    };
    let t = log_space(0.1, 10.0, 21);
    free_energy_curve(&m.blackbody_kernel().unwrap(), &m, &t, &opts).unwrap()
}

#[test]
fn shift_grows_as_t_squared() {
    let curve = t_squared_curve();
    let c = curve.t_squared_coefficient().unwrap();
    let expected = PI * PhysicalConstants::dimensionless().alpha_fs / 9.0;
    assert!((c / expected - 1.0).abs() < 0.02);
    let m = curve.model;
    let closed = bbr_shift_closed_form(1.0, &m, Dimension::One);
    assert!((closed - expected).abs() < 1e-15);
}

#[test]
fn energy_shift_is_minus_free_energy_shift() {
    let curve = t_squared_curve().shift_curve();
    let d = thermo_derivatives(&curve).unwrap();
    for i in 0..curve.temperatures.len() {
        let r = d.energy[i] / curve.values[i];
        assert!((r + 1.0).abs() < 0.01);
    }
}
