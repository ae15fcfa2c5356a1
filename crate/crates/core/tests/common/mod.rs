#![allow(dead_code)]

pub mod oracle;

use std::f64::consts::PI;

use nalgebra::{Matrix3, Rotation3, Unit};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use symknot::{ClosedCurve, Vec3};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Regular `n`-gon inscribed in the circle of circumference `length`.
pub fn circle(n: usize, length: f64) -> ClosedCurve {
    let r = length / (2.0 * PI);
    ClosedCurve::new(
        (0..n)
            .map(|i| {
                let t = 2.0 * PI * i as f64 / n as f64;
                Vec3::new(r * t.cos(), r * t.sin(), 0.0)
            })
            .collect(),
    )
    .unwrap()
}

/// Regular `n`-gon rescaled to polygon length one.
pub fn unit_circle(n: usize) -> ClosedCurve {
    let c = circle(n, 1.0);
    c.scaled(1.0 / c.length()).unwrap()
}

/// Smooth random closed curve (a few Fourier modes on top of a circle)
/// sampled at `n` points with jitter; embedded for the amplitudes used.
pub fn random_polygon(rng: &mut impl Rng, n: usize) -> ClosedCurve {
    fourier_polygon(rng, n, 0.12, 0.2)
}

/// Like [`random_polygon`] with smaller modes and no parameter jitter.
pub fn smooth_polygon(rng: &mut impl Rng, n: usize) -> ClosedCurve {
    fourier_polygon(rng, n, 0.06, 0.0)
}

fn fourier_polygon(rng: &mut impl Rng, n: usize, amp: f64, jitter: f64) -> ClosedCurve {
    let coeffs: Vec<[f64; 6]> = (0..3)
        .map(|_| {
            let mut c = [0.0; 6];
            for v in &mut c {
                *v = rng.gen_range(-amp..amp);
            }
            c
        })
        .collect();
    let pts = (0..n)
        .map(|i| {
            let t = 2.0 * PI * (i as f64 + jitter * rng.gen_range(-1.0..1.0)) / n as f64;
            let mut p = Vec3::new(t.cos(), t.sin(), 0.0);
            for (k, c) in coeffs.iter().enumerate() {
                let f = (k + 2) as f64;
                p += Vec3::new(c[0], c[1], c[2]) * (f * t).cos() + Vec3::new(c[3], c[4], c[5]) * (f * t).sin();
            }
            p
        })
        .collect();
    ClosedCurve::new(pts).unwrap()
}

pub fn random_rotation(rng: &mut impl Rng) -> Matrix3<f64> {
    let axis = Vec3::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
    let angle = rng.gen_range(0.0..2.0 * PI);
    Rotation3::from_axis_angle(&Unit::new_normalize(axis), angle).into_inner()
}

pub fn random_vec(rng: &mut impl Rng, scale: f64) -> Vec3 {
    Vec3::new(
        rng.gen_range(-scale..scale),
        rng.gen_range(-scale..scale),
        rng.gen_range(-scale..scale),
    )
}

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(a.abs())
}

pub fn max_dev(a: &[Vec3], b: &[Vec3]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).amax()).fold(0.0, f64::max)
}

/// Central difference of `f` along every coordinate of every sample.
pub fn finite_difference(curve: &ClosedCurve, step: f64, f: impl Fn(&ClosedCurve) -> f64) -> Vec<Vec3> {
    let n = curve.len();
    let mut out = vec![Vec3::zeros(); n];
    for i in 0..n {
        for c in 0..3 {
            let mut plus = curve.points().to_vec();
            let mut minus = plus.clone();
            plus[i][c] += step;
            minus[i][c] -= step;
            let fp = f(&ClosedCurve::new(plus).unwrap());
            let fm = f(&ClosedCurve::new(minus).unwrap());
            out[i][c] = (fp - fm) / (2.0 * step);
        }
    }
    out
}
