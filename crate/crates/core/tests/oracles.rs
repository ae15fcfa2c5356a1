mod common;

use std::f64::consts::PI;

use common::oracle::{circle_seminorm_sq, SmoothCurve};
use common::{rel, unit_circle};
use symknot::torus::{torus_point, torus_tangent};
use symknot::{
    apriori_bilip_bound, arclength_resample, bilipschitz_ratio, circle_energy_oracle, ohara_energy, scaled_energy,
    sobolev_seminorm, torus_knot_curve, validate_torus_spec, EnergyParams, Vec3,
};

fn circle_pos(t: f64) -> Vec3 {
    let r = 1.0 / (2.0 * PI);
    Vec3::new(r * (2.0 * PI * t).cos(), r * (2.0 * PI * t).sin(), 0.0)
}

fn circle_d1(t: f64) -> Vec3 {
    Vec3::new(-(2.0 * PI * t).sin(), (2.0 * PI * t).cos(), 0.0)
}

fn circle_d2(t: f64) -> Vec3 {
    -2.0 * PI * Vec3::new((2.0 * PI * t).cos(), (2.0 * PI * t).sin(), 0.0)
}

#[test]
fn two_dimensional_quadrature_reproduces_circle() {
    let curve = SmoothCurve {
        pos: &circle_pos,
        d1: &circle_d1,
        d2: &circle_d2,
    };
    for alpha in [2.2, 2.5, 2.8] {
        let (e, len) = curve.energy(alpha, 8);
        let exact = circle_energy_oracle(&EnergyParams::new(alpha).unwrap()).unwrap();
        assert!(rel(len, 1.0) < 1e-13);
        assert!(rel(e, exact) < 1e-5, "alpha {alpha}: {e} vs {exact}");
    }
}

#[test]
fn trefoil_energy_matches_smooth_quadrature() {
    let spec = validate_torus_spec(2, 3, 0.4).unwrap();
    let h = 1e-4;
    let pos = |t: f64| torus_point(&spec, t);
    let d1 = |t: f64| torus_tangent(&spec, t);
    let d2 = |t: f64| (torus_tangent(&spec, t + h) - torus_tangent(&spec, t - h)) / (2.0 * h);
    let smooth = SmoothCurve {
        pos: &pos,
        d1: &d1,
        d2: &d2,
    };
    let alpha = 2.5;
    let (e, len) = smooth.energy(alpha, 120);
    let expected = len.powf(alpha - 2.0) * e;
    let params = EnergyParams::new(alpha).unwrap();
    let curve = arclength_resample(&torus_knot_curve(&spec, 480).unwrap(), 480).unwrap();
    let s = scaled_energy(&curve, &params).unwrap();
    assert!(rel(s, expected) < 1e-2, "discrete {s} vs smooth {expected}");
}

#[test]
fn circle_oracle_reference_values() {
    let o2 = circle_energy_oracle(&EnergyParams::for_oracle(2.0).unwrap()).unwrap();
    assert!((o2 - 4.0).abs() < 1e-6);
    for alpha in [2.0, 2.5, 2.9] {
        let mut p = EnergyParams::for_oracle(alpha).unwrap();
        let coarse = circle_energy_oracle(&p).unwrap();
        p.oracle_quad_points *= 4;
        let fine = circle_energy_oracle(&p).unwrap();
        assert!(rel(coarse, fine) < 1e-8);
    }
    let low = circle_energy_oracle(&EnergyParams::new(2.2).unwrap()).unwrap();
    let high = circle_energy_oracle(&EnergyParams::new(2.8).unwrap()).unwrap();
    assert!(high > low);
}

#[test]
fn discrete_circle_energy_converges() {
    for alpha in [2.2, 2.5, 2.8] {
        let params = EnergyParams::new(alpha).unwrap();
        let exact = circle_energy_oracle(&params).unwrap();
        let errs: Vec<f64> = [64, 128, 256]
            .iter()
            .map(|&n| rel(ohara_energy(&unit_circle(n), &params).unwrap(), exact))
            .collect();
        assert!(errs.windows(2).all(|w| w[1] < w[0]), "{errs:?}");
        assert!(errs[2] < 1e-3);
    }
}

#[test]
fn circle_seminorm_matches_oracle() {
    let s = 0.75;
    let expected = circle_seminorm_sq(s);
    let got = sobolev_seminorm(&unit_circle(480), s).unwrap().powi(2);
    assert!(rel(got, expected) < 1e-3, "{got} vs {expected}");
}

#[test]
fn apriori_bound_examples() {
    let p = EnergyParams::new(2.5).unwrap();
    assert_eq!(apriori_bilip_bound(0.0, &p).unwrap(), 1.0 / 16.0);
    let b = apriori_bilip_bound(10.0, &p).unwrap();
    let expected = (-10.0 / (1.0 - (2.0f64 / 3.0).powf(2.5))).exp() / 16.0;
    assert!(rel(b, expected) < 1e-15);
    assert!(apriori_bilip_bound(-1.0, &p).is_err());
    let circle = unit_circle(240);
    let e = ohara_energy(&circle, &p).unwrap();
    assert!(bilipschitz_ratio(&circle) >= apriori_bilip_bound(e, &p).unwrap());
}
