mod common;

use common::*;
use proptest::prelude::*;
use symknot::geometry::sobolev_seminorm;
use symknot::symmetry::{project_field, z_rotation};
use symknot::{
    apply_group_action, arclength_resample, bilipschitz_ratio, energy_gradient, intrinsic_distance, ohara_energy,
    scaled_energy, symmetrize, CyclicAction, EnergyParams, RigidMotion, Vec3,
};

fn motion(seed: u64) -> RigidMotion {
    let mut r = rng(seed ^ 0x9e37);
    RigidMotion::new(random_rotation(&mut r), random_vec(&mut r, 3.0)).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn energy_is_invariant_under_rigid_motion_shift_and_reversal(seed in any::<u64>(), alpha in 2.05f64..2.95, shift in 1usize..47) {
        let c = random_polygon(&mut rng(seed), 48);
        let p = EnergyParams::new(alpha).unwrap();
        let e = ohara_energy(&c, &p).unwrap();
        let moved = motion(seed).apply_curve(&c).unwrap();
        prop_assert!(rel(ohara_energy(&moved, &p).unwrap(), e) < 1e-12);
        prop_assert!(rel(ohara_energy(&c.index_shifted(shift), &p).unwrap(), e) < 1e-12);
        prop_assert!(rel(ohara_energy(&c.reversed(), &p).unwrap(), e) < 1e-12);
    }

    #[test]
    fn scaled_energy_is_scale_invariant(seed in any::<u64>(), alpha in 2.05f64..2.95) {
        let c = random_polygon(&mut rng(seed), 40);
        let p = EnergyParams::new(alpha).unwrap();
        let s = scaled_energy(&c, &p).unwrap();
        let e = ohara_energy(&c, &p).unwrap();
        for lambda in [0.1, 3.7] {
            let big = c.scaled(lambda).unwrap();
            prop_assert!(rel(scaled_energy(&big, &p).unwrap(), s) < 1e-12);
            prop_assert!(rel(ohara_energy(&big, &p).unwrap(), lambda.powf(2.0 - alpha) * e) < 1e-12);
        }
    }

    #[test]
    fn gradient_is_equivariant(seed in any::<u64>()) {
        let c = random_polygon(&mut rng(seed), 40);
        let p = EnergyParams::new(2.5).unwrap();
        let m = motion(seed);
        let g = energy_gradient(&c, &p).unwrap();
        let gm = energy_gradient(&m.apply_curve(&c).unwrap(), &p).unwrap();
        let scale = g.d_energy.iter().map(|v| v.norm()).fold(0.0, f64::max);
        for (a, b) in g.d_energy.iter().zip(&gm.d_energy) {
            prop_assert!((m.rotation * a - b).norm() < 1e-12 * scale);
        }
    }

    #[test]
    fn geometry_is_invariant_under_motion_and_shift(seed in any::<u64>(), shift in 1usize..63) {
        let c = arclength_resample(&smooth_polygon(&mut rng(seed), 64), 64).unwrap();
        let m = motion(seed);
        let moved = m.apply_curve(&c).unwrap();
        let shifted = c.index_shifted(shift);
        prop_assert!(rel(moved.length(), c.length()) < 1e-12);
        prop_assert!(rel(bilipschitz_ratio(&moved), bilipschitz_ratio(&c)) < 1e-12);
        prop_assert!(rel(bilipschitz_ratio(&shifted), bilipschitz_ratio(&c)) < 1e-13);
        let s = sobolev_seminorm(&c, 0.75).unwrap();
        prop_assert!(rel(sobolev_seminorm(&moved, 0.75).unwrap(), s) < 1e-12);
        prop_assert!(rel(sobolev_seminorm(&shifted, 0.75).unwrap(), s) < 1e-12);
    }

    #[test]
    fn resample_is_idempotent(seed in any::<u64>(), n_out in 8usize..100) {
        let c = smooth_polygon(&mut rng(seed), 50);
        let once = arclength_resample(&c, n_out).unwrap();
        let twice = arclength_resample(&once, n_out).unwrap();
        prop_assert!(max_dev(once.points(), twice.points()) < 1e-12);
        prop_assert!(once.edge_spread() < 1e-12);
    }

    #[test]
    fn group_action_laws(seed in any::<u64>(), m in 2usize..7, k in 1i64..7, l in -9i64..9, h in -9i64..9) {
        let n = 6 * m;
        let c = random_polygon(&mut rng(seed), n);
        let a = CyclicAction::new(m, k).unwrap();
        let lh = apply_group_action(&apply_group_action(&c, &a, h).unwrap(), &a, l).unwrap();
        let direct = apply_group_action(&c, &a, l + h).unwrap();
        prop_assert!(max_dev(lh.points(), direct.points()) < 1e-12);
        let id = apply_group_action(&c, &a, 0).unwrap();
        prop_assert_eq!(id.points(), c.points());
        let (x, y) = (apply_group_action(&c, &a, l).unwrap(), apply_group_action(&c, &a, l + m as i64).unwrap());
        prop_assert!(max_dev(x.points(), y.points()) < 1e-12);
        prop_assert_eq!(a.index_shift(l, n), a.index_shift(l + m as i64, n));
        let s = symmetrize(&c, &a).unwrap();
        let ss = symmetrize(&s, &a).unwrap();
        prop_assert!(max_dev(s.points(), ss.points()) < 1e-12);
        let p = EnergyParams::new(2.5).unwrap();
        let e = ohara_energy(&c, &p).unwrap();
        prop_assert!(rel(ohara_energy(&apply_group_action(&c, &a, l).unwrap(), &p).unwrap(), e) < 1e-12);
    }

    #[test]
    fn projection_is_an_orthogonal_projector(seed in any::<u64>(), m in 2usize..6, k in 1i64..6) {
        let n = 4 * m;
        let mut r = rng(seed);
        let v: Vec<Vec3> = (0..n).map(|_| random_vec(&mut r, 1.0)).collect();
        let w: Vec<Vec3> = (0..n).map(|_| random_vec(&mut r, 1.0)).collect();
        let a = CyclicAction::new(m, k).unwrap();
        let pv = project_field(&v, &a).unwrap();
        let ppv = project_field(&pv, &a).unwrap();
        let pw = project_field(&w, &a).unwrap();
        prop_assert!(max_dev(&pv, &ppv) < 1e-12);
        let norm = |x: &[Vec3]| x.iter().map(|y| y.norm_squared()).sum::<f64>().sqrt();
        let inner: f64 = pv.iter().zip(w.iter().zip(&pw)).map(|(p, (w, pw))| p.dot(&(w - pw))).sum();
        prop_assert!(inner.abs() <= 1e-10 * norm(&v) * norm(&w));
        prop_assert!(norm(&pv) <= norm(&v) * (1.0 + 1e-14));
    }
}

#[test]
fn rough_curves_still_resample() {
    for seed in 0..50 {
        let c = random_polygon(&mut rng(seed), 64);
        for n_out in [16, 64, 101] {
            let r = arclength_resample(&c, n_out).unwrap();
            assert_eq!(r.len(), n_out);
            assert_eq!(r.point(0), c.point(0));
        }
    }
}

#[test]
fn intrinsic_distance_is_a_metric_and_dominates_chords() {
    let mut r = rng(1);
    for n in [5, 17, 32] {
        let c = random_polygon(&mut r, n);
        let half = c.length() / 2.0;
        for i in 0..n {
            for j in 0..n {
                let dij = intrinsic_distance(&c, i, j).unwrap();
                assert_eq!(dij, intrinsic_distance(&c, j, i).unwrap());
                assert!(dij <= half * (1.0 + 1e-15));
                for k in 0..n {
                    let djk = intrinsic_distance(&c, j, k).unwrap();
                    let dik = intrinsic_distance(&c, i, k).unwrap();
                    assert!(dij + djk >= dik * (1.0 - 1e-14));
                }
            }
        }
    }
    let c = random_polygon(&mut r, 64);
    for i in 0..64 {
        for j in 0..64 {
            let chord = (c.point(i) - c.point(j)).norm();
            assert!(chord <= intrinsic_distance(&c, i, j).unwrap() * (1.0 + 1e-14));
        }
    }
}

#[test]
fn energy_of_action_image_is_unchanged_for_torus_knot() {
    let spec = symknot::validate_torus_spec(2, 3, 0.4).unwrap();
    let c = symknot::torus_knot_curve(&spec, 480).unwrap();
    let a = CyclicAction::new(3, 1).unwrap();
    for l in 0..3 {
        let img = apply_group_action(&c, &a, l).unwrap();
        assert!(max_dev(img.points(), c.points()) < 1e-12);
    }
    let rot = z_rotation(2.0 * std::f64::consts::PI / 3.0);
    assert!((rot * c.point(160) - c.point(0)).amax() < 1e-12 || (rot * c.point(0) - c.point(160)).amax() < 1e-12);
}
