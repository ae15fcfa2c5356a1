//! Torus knots `T(a, b)` and their standard symmetric representatives.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::geometry::{ClosedCurve, Vec3};
use crate::numeric::{divisors, gcd};
use crate::symmetry::{solve_shift_parameter, CyclicAction};

pub const DEFAULT_RHO: f64 = 0.4;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TorusKnotSpec {
    pub a: i64,
    pub b: i64,
    pub rho: f64,
}

impl TorusKnotSpec {
    /// `T(b, a)`: the same knot class, parametrized with the roles of the
    /// two windings exchanged.
    pub fn swapped(&self) -> TorusKnotSpec {
        TorusKnotSpec {
            a: self.b,
            b: self.a,
            rho: self.rho,
        }
    }

    /// `gcd(a + b, a b) == 1`, which holds for every valid spec.
    pub fn sum_product_coprime(&self) -> bool {
        gcd(self.a + self.b, self.a * self.b) == 1
    }

    pub fn min_samples(&self) -> usize {
        8 * self.a.unsigned_abs().max(self.b.unsigned_abs()) as usize
    }
}

pub fn validate_torus_spec(a: i64, b: i64, rho: f64) -> Result<TorusKnotSpec> {
    for (name, v) in [("a", a), ("b", b)] {
        if (-1..=1).contains(&v) {
            return Err(Error::param(format!("{name} = {v} is excluded; need |{name}| >= 2")));
        }
    }
    let g = gcd(a, b);
    if g != 1 {
        return Err(Error::param(format!("a = {a} and b = {b} are not coprime (gcd = {g})")));
    }
    if !(rho > 0.0 && rho < 1.0) {
        return Err(Error::param(format!("rho must lie in (0, 1), got {rho}")));
    }
    let spec = TorusKnotSpec { a, b, rho };
    assert!(spec.sum_product_coprime(), "gcd(a+b, ab) = 1 for coprime a, b");
    Ok(spec)
}

/// Samples `gamma_rho(t) = Rot_z(2 pi a t) (1 + rho cos 2 pi b t, 0, rho sin 2 pi b t)`
/// at `t_i = i / n`.
pub fn torus_knot_curve(spec: &TorusKnotSpec, n: usize) -> Result<ClosedCurve> {
    let spec = validate_torus_spec(spec.a, spec.b, spec.rho)?;
    if n < spec.min_samples() {
        return Err(Error::param(format!(
            "n = {n} too small for T({}, {}); need at least {}",
            spec.a,
            spec.b,
            spec.min_samples()
        )));
    }
    ClosedCurve::new((0..n).map(|i| torus_point(&spec, i as f64 / n as f64)).collect())
}

pub fn torus_point(spec: &TorusKnotSpec, t: f64) -> Vec3 {
    let (sa, ca) = (2.0 * PI * spec.a as f64 * t).sin_cos();
    let (sb, cb) = (2.0 * PI * spec.b as f64 * t).sin_cos();
    let r = 1.0 + spec.rho * cb;
    Vec3::new(ca * r, sa * r, spec.rho * sb)
}

/// Analytic derivative of [`torus_point`] with respect to `t`.
pub fn torus_tangent(spec: &TorusKnotSpec, t: f64) -> Vec3 {
    let (a, b) = (2.0 * PI * spec.a as f64, 2.0 * PI * spec.b as f64);
    let (sa, ca) = (a * t).sin_cos();
    let (sb, cb) = (b * t).sin_cos();
    let r = 1.0 + spec.rho * cb;
    let dr = -spec.rho * b * sb;
    Vec3::new(-a * sa * r + ca * dr, a * ca * r + sa * dr, spec.rho * b * cb)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Factor {
    A,
    B,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AdmissibleSymmetry {
    pub m: usize,
    pub k: i64,
    /// Which of `a`, `b` the order divides.
    pub factor: Factor,
    /// `m = |a|` or `m = |b|`: the pair used to produce two distinct
    /// critical knots.
    pub canonical: bool,
}

impl AdmissibleSymmetry {
    pub fn action(&self) -> CyclicAction {
        CyclicAction::new(self.m, self.k).expect("m > 1")
    }

    /// Spec whose standard curve is fixed by this action: `T(a, b)` when
    /// `m | b`, `T(b, a)` when `m | a`.
    pub fn representative(&self, spec: &TorusKnotSpec) -> TorusKnotSpec {
        match self.factor {
            Factor::B => *spec,
            Factor::A => spec.swapped(),
        }
    }
}

pub fn admissible_symmetries(spec: &TorusKnotSpec) -> Result<Vec<AdmissibleSymmetry>> {
    let spec = validate_torus_spec(spec.a, spec.b, spec.rho)?;
    let mut out = Vec::new();
    for (factor, v) in [(Factor::A, spec.a), (Factor::B, spec.b)] {
        let abs = v.unsigned_abs();
        for m in divisors(abs).into_iter().filter(|&m| m > 1) {
            let k = solve_shift_parameter(spec.a, spec.b, m as i64)?;
            out.push(AdmissibleSymmetry {
                m: m as usize,
                k,
                factor,
                canonical: m == abs,
            });
        }
    }
    Ok(out)
}

/// The symmetry with the given order, if admissible.
pub fn symmetry_for_order(spec: &TorusKnotSpec, m: usize) -> Result<AdmissibleSymmetry> {
    admissible_symmetries(spec)?
        .into_iter()
        .find(|s| s.m == m)
        .ok_or_else(|| Error::param(format!("m = {m} divides neither a = {} nor b = {}", spec.a, spec.b)))
}
