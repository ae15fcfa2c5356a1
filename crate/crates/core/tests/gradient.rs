mod common;

use common::*;
use symknot::symmetry::{project_field, z_rotation};
use symknot::{energy_gradient, ohara_energy, scaled_energy, CyclicAction, EnergyParams, Vec3};

#[test]
fn gradient_matches_central_differences() {
    let mut r = rng(7);
    for &alpha in &[2.2, 2.5, 2.9] {
        let params = EnergyParams::new(alpha).unwrap();
        for _ in 0..3 {
            let c = random_polygon(&mut r, 40);
            let step = 1e-6 * c.diameter();
            let g = energy_gradient(&c, &params).unwrap();
            let fd_e = finite_difference(&c, step, |c| ohara_energy(c, &params).unwrap());
            let fd_s = finite_difference(&c, step, |c| scaled_energy(c, &params).unwrap());
            let scale_e = g.d_energy.iter().map(|v| v.amax()).fold(0.0, f64::max);
            let scale_s = g.d_scaled.iter().map(|v| v.amax()).fold(0.0, f64::max);
            assert!(max_dev(&g.d_energy, &fd_e) < 1e-6 * scale_e);
            assert!(max_dev(&g.d_scaled, &fd_s) < 1e-6 * scale_s);
        }
    }
}

#[test]
fn gradient_without_correction_or_with_wider_exclusion() {
    let mut r = rng(11);
    let c = random_polygon(&mut r, 36);
    for params in [
        EnergyParams::new(2.4).unwrap().without_correction(),
        EnergyParams::new(2.4).unwrap().with_neighbor_exclusion(3).unwrap(),
    ] {
        let g = energy_gradient(&c, &params).unwrap();
        let fd = finite_difference(&c, 1e-6 * c.diameter(), |c| ohara_energy(c, &params).unwrap());
        let scale = g.d_energy.iter().map(|v| v.amax()).fold(0.0, f64::max);
        assert!(max_dev(&g.d_energy, &fd) < 1e-6 * scale);
    }
}

#[test]
fn gradient_sums_to_zero() {
    let mut r = rng(3);
    let params = EnergyParams::new(2.5).unwrap();
    for _ in 0..5 {
        let c = random_polygon(&mut r, 50);
        let g = energy_gradient(&c, &params).unwrap();
        let total: Vec3 = g.d_energy.iter().sum();
        let scale = g.d_energy.iter().map(|v| v.norm()).fold(0.0, f64::max);
        assert!(total.norm() < 1e-10 * scale);
    }
}

#[test]
fn gradient_values_agree_with_energy_functions() {
    let mut r = rng(5);
    let params = EnergyParams::new(2.7).unwrap();
    let c = random_polygon(&mut r, 33);
    let g = energy_gradient(&c, &params).unwrap();
    assert!(rel(g.energy, ohara_energy(&c, &params).unwrap()) < 1e-13);
    assert!(rel(g.scaled, scaled_energy(&c, &params).unwrap()) < 1e-13);
    assert!(rel(g.length, c.length()) < 1e-15);
}

#[test]
fn projected_gradient_at_symmetric_curve_is_unchanged() {
    let mut r = rng(13);
    let params = EnergyParams::new(2.5).unwrap();
    let action = CyclicAction::new(3, 1).unwrap();
    let c = symknot::symmetrize(&random_polygon(&mut r, 48), &action).unwrap();
    let g = energy_gradient(&c, &params).unwrap();
    let p = project_field(&g.d_scaled, &action).unwrap();
    let norm: f64 = g.d_scaled.iter().map(|v| v.norm_squared()).sum::<f64>().sqrt();
    let diff: f64 = g.d_scaled.iter().zip(&p).map(|(a, b)| (a - b).norm_squared()).sum::<f64>().sqrt();
    assert!(diff <= 1e-10 * norm, "{diff} vs {norm}");
    // and the field itself is equivariant
    let shift = action.index_shift(1, c.len());
    let rot = z_rotation(2.0 * std::f64::consts::PI / 3.0);
    for i in 0..c.len() {
        let lhs = rot * g.d_scaled[(i + shift) % c.len()];
        assert!((lhs - g.d_scaled[i]).norm() < 1e-10 * norm);
    }
}
