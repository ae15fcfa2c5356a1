//! The cyclic group action on sampled curves, projection onto its fixed
//! subspace, and rotational symmetry detection.
//!
//! For `G = Z/mZ` and shift parameter `k`, the element represented by `l`
//! acts by
//!
//! ```text
//! tau_l(x)_i = Rot_z(2 pi l / m) x_{(i + k l N / m) mod N}
//! ```
//!
//! which requires `m | N` so that the parameter shift `k l / m` lands on
//! the sample grid.

use std::f64::consts::PI;

use nalgebra::{Matrix3, Rotation3, Unit};
use rayon::prelude::*;

use crate::energy::GradientField;
use crate::error::{Error, Result};
use crate::geometry::{ClosedCurve, Vec3};
use crate::numeric::{extended_gcd, gcd, mod_inverse};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RigidMotion {
    pub rotation: Matrix3<f64>,
    pub translation: Vec3,
}

impl RigidMotion {
    pub fn identity() -> Self {
        RigidMotion {
            rotation: Matrix3::identity(),
            translation: Vec3::zeros(),
        }
    }

    pub fn new(rotation: Matrix3<f64>, translation: Vec3) -> Result<Self> {
        let m = RigidMotion { rotation, translation };
        if !m.is_proper(1e-12) {
            return Err(Error::param("rotation must be orthogonal with determinant +1"));
        }
        Ok(m)
    }

    pub fn is_proper(&self, tol: f64) -> bool {
        let r = &self.rotation;
        (r.transpose() * r - Matrix3::identity()).amax() <= tol && (r.determinant() - 1.0).abs() <= tol
    }

    pub fn apply(&self, p: &Vec3) -> Vec3 {
        self.rotation * p + self.translation
    }

    pub fn apply_curve(&self, curve: &ClosedCurve) -> Result<ClosedCurve> {
        curve.map_points(|p| self.apply(p))
    }

    /// `self ∘ other`
    pub fn compose(&self, other: &RigidMotion) -> RigidMotion {
        RigidMotion {
            rotation: self.rotation * other.rotation,
            translation: self.rotation * other.translation + self.translation,
        }
    }

    pub fn inverse(&self) -> RigidMotion {
        let rt = self.rotation.transpose();
        RigidMotion {
            rotation: rt,
            translation: -(rt * self.translation),
        }
    }
}

/// Rotation about the z-axis.
pub fn z_rotation(beta: f64) -> Matrix3<f64> {
    let (s, c) = beta.sin_cos();
    Matrix3::new(c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0)
}

/// Rotation by `beta` about the affine line through `axis_point` with
/// direction `axis_direction`.
pub fn rotation_about_axis(beta: f64, axis_point: Vec3, axis_direction: Vec3) -> Result<RigidMotion> {
    let norm = axis_direction.norm();
    if !(norm > 0.0) || !norm.is_finite() {
        return Err(Error::param("rotation axis direction must be nonzero"));
    }
    let axis = Unit::new_unchecked(axis_direction / norm);
    let rotation = *Rotation3::from_axis_angle(&axis, beta).matrix();
    Ok(RigidMotion {
        rotation,
        translation: axis_point - rotation * axis_point,
    })
}

/// `G = Z/mZ` acting by `tau^k`: rotation by `2 pi l / m` about the z-axis
/// combined with the parameter shift `k l / m`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CyclicAction {
    m: usize,
    k: usize,
}

impl CyclicAction {
    pub fn new(m: usize, k: i64) -> Result<Self> {
        if m < 2 {
            return Err(Error::param(format!("group order must be at least 2, got {m}")));
        }
        Ok(CyclicAction {
            m,
            k: k.rem_euclid(m as i64) as usize,
        })
    }

    pub fn order(&self) -> usize {
        self.m
    }

    /// Shift parameter reduced to `0..m`.
    pub fn shift_parameter(&self) -> usize {
        self.k
    }

    pub fn check_grid(&self, n: usize) -> Result<()> {
        if n % self.m != 0 {
            return Err(Error::IncompatibleGrid { m: self.m, n });
        }
        Ok(())
    }

    fn reduce(&self, l: i64) -> usize {
        l.rem_euclid(self.m as i64) as usize
    }

    /// Sample offset `k l N / m mod N` of the group element `l`.
    pub fn index_shift(&self, l: i64, n: usize) -> usize {
        let l = self.reduce(l);
        (self.k * l % self.m) * (n / self.m)
    }

    /// `D_g = Rot_z(2 pi l / m)`.
    pub fn rotation(&self, l: i64) -> Matrix3<f64> {
        let l = self.reduce(l);
        z_rotation(2.0 * PI * l as f64 / self.m as f64)
    }

    fn act(&self, field: &[Vec3], l: i64) -> Vec<Vec3> {
        let n = field.len();
        let shift = self.index_shift(l, n);
        let rot = self.rotation(l);
        (0..n).map(|i| rot * field[(i + shift) % n]).collect()
    }
}

pub fn apply_group_action(curve: &ClosedCurve, action: &CyclicAction, l: i64) -> Result<ClosedCurve> {
    action.check_grid(curve.len())?;
    ClosedCurve::new(action.act(curve.points(), l))
}

/// Orthogonal projection `P = (1/m) sum_l A_l` of a per-sample vector
/// field onto the fields fixed by the action.
pub fn project_field(field: &[Vec3], action: &CyclicAction) -> Result<Vec<Vec3>> {
    let n = field.len();
    action.check_grid(n)?;
    let mut out = vec![Vec3::zeros(); n];
    for l in 0..action.m as i64 {
        for (o, v) in out.iter_mut().zip(action.act(field, l)) {
            *o += v;
        }
    }
    let inv = 1.0 / action.m as f64;
    out.iter_mut().for_each(|v| *v *= inv);
    Ok(out)
}

/// Group average of the sample positions.
pub fn symmetrize(curve: &ClosedCurve, action: &CyclicAction) -> Result<ClosedCurve> {
    ClosedCurve::new(project_field(curve.points(), action)?)
}

pub fn symmetric_projection(gradient: &GradientField, action: &CyclicAction) -> Result<GradientField> {
    Ok(GradientField {
        d_scaled: project_field(&gradient.d_scaled, action)?,
        d_energy: project_field(&gradient.d_energy, action)?,
        ..gradient.clone()
    })
}

/// Largest RMS displacement between the curve and any of its images under
/// the action, relative to the diameter.
pub fn symmetry_residual(curve: &ClosedCurve, action: &CyclicAction) -> Result<f64> {
    action.check_grid(curve.len())?;
    let pts = curve.points();
    let n = pts.len() as f64;
    let diam = curve.diameter();
    let mut worst: f64 = 0.0;
    for l in 1..action.m as i64 {
        let img = action.act(pts, l);
        let ms = pts.iter().zip(&img).map(|(p, q)| (p - q).norm_squared()).sum::<f64>() / n;
        worst = worst.max(ms.sqrt());
    }
    Ok(worst / diam)
}

pub fn is_symmetric(curve: &ClosedCurve, action: &CyclicAction, tol: f64) -> Result<(bool, f64)> {
    let r = symmetry_residual(curve, action)?;
    Ok((r <= tol, r))
}

/// Unique `k` in `1..m` with `a k + 1 ≡ 0 (mod m)` when `m | b`, or
/// `b k + 1 ≡ 0 (mod m)` when `m | a`.
pub fn solve_shift_parameter(a: i64, b: i64, m: i64) -> Result<i64> {
    if [a, b].iter().any(|v| matches!(v, -1..=1)) {
        return Err(Error::param(format!("a and b must avoid 0 and ±1, got ({a}, {b})")));
    }
    if gcd(a, b) != 1 {
        return Err(Error::param(format!("a and b must be coprime, got ({a}, {b})")));
    }
    if m < 2 {
        return Err(Error::param(format!("m must be at least 2, got {m}")));
    }
    let (divides_a, divides_b) = (a % m == 0, b % m == 0);
    assert!(!(divides_a && divides_b), "m divides both of two coprime integers");
    let other = match (divides_a, divides_b) {
        (_, true) => a,
        (true, _) => b,
        _ => return Err(Error::param(format!("m = {m} divides neither a = {a} nor b = {b}"))),
    };
    let inv = mod_inverse(other, m).expect("coprime to m");
    let k = (-inv).rem_euclid(m);
    debug_assert_eq!((other * k + 1).rem_euclid(m), 0);
    debug_assert_eq!(extended_gcd(other, m).0, 1);
    Ok(k)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SymmetryDetection {
    pub order: usize,
    pub axis_point: Vec3,
    /// Unit vector, sign fixed so the first nonzero component is positive.
    pub axis_direction: Vec3,
    pub index_shift: usize,
    /// RMS alignment residual relative to the diameter.
    pub residual: f64,
}

/// Window for recognizing `theta / 2 pi` as a rational `t / q`.
const ANGLE_WINDOW: f64 = 1e-6;

/// Least-squares rotation taking centered `src` onto centered `dst`,
/// restricted to determinant `+1` (`proper`) or `-1`. Returns the matrix
/// and the RMS residual.
pub fn procrustes(src: &[Vec3], dst: &[Vec3], proper: bool) -> (Matrix3<f64>, f64) {
    let mut h = Matrix3::zeros();
    for (p, q) in src.iter().zip(dst) {
        h += p * q.transpose();
    }
    let svd = h.svd(true, true);
    let u = svd.u.expect("u requested");
    let v_t = svd.v_t.expect("v_t requested");
    let v = v_t.transpose();
    let base = v * u.transpose();
    let want = if proper { 1.0 } else { -1.0 };
    let r = if base.determinant() * want > 0.0 {
        base
    } else {
        let weakest = svd.singular_values.imin();
        let mut d = Matrix3::identity();
        d[(weakest, weakest)] = -1.0;
        v * d * u.transpose()
    };
    let ms = src
        .iter()
        .zip(dst)
        .map(|(p, q)| (r * p - q).norm_squared())
        .sum::<f64>()
        / src.len() as f64;
    (r, ms.sqrt())
}

/// Rotation angle in `[0, pi]` and unit axis of a proper rotation matrix.
pub fn rotation_angle_axis(r: &Matrix3<f64>) -> (f64, Vec3) {
    let cos = ((r.trace() - 1.0) / 2.0).clamp(-1.0, 1.0);
    let skew = Vec3::new(r[(2, 1)] - r[(1, 2)], r[(0, 2)] - r[(2, 0)], r[(1, 0)] - r[(0, 1)]);
    let theta = (skew.norm() / 2.0).atan2(cos);
    let axis = if theta < PI / 2.0 && skew.norm() > 1e-300 {
        skew.normalize()
    } else {
        // (R + R^T)/2 - cos I = (1 - cos) v v^T
        let sym = (r + r.transpose()) * 0.5 - Matrix3::identity() * cos;
        let col = (0..3)
            .map(|c| sym.column(c).into_owned())
            .max_by(|a, b| a.norm_squared().total_cmp(&b.norm_squared()))
            .unwrap();
        if col.norm() > 0.0 {
            let v = col.normalize();
            if skew.dot(&v) < 0.0 {
                -v
            } else {
                v
            }
        } else {
            Vec3::z()
        }
    };
    (theta, axis)
}

fn canonical_direction(v: Vec3) -> Vec3 {
    let first = v.iter().copied().find(|c| c.abs() > 1e-9).unwrap_or(1.0);
    if first < 0.0 {
        -v
    } else {
        v
    }
}

/// Smallest `q <= q_max` with `|x - t/q| <= ANGLE_WINDOW` for an integer `t`.
fn rational_denominator(x: f64, q_max: usize) -> Option<usize> {
    (1..=q_max).find(|&q| {
        let t = (x * q as f64).round();
        (x - t / q as f64).abs() <= ANGLE_WINDOW
    })
}

/// Rotational periods found by aligning the curve with its index shifts.
///
/// Every shift `s` whose best proper rotation (about the centroid) aligns
/// `x_i` with `x_{i+s}` to within `tol * diameter` and whose angle is
/// `2 pi t / q` with `q <= m_max` yields a period `q` about the rotation
/// axis. Results are deduplicated by `(q, axis)`, keeping the smallest
/// residual, and sorted by order.
pub fn detect_periods(curve: &ClosedCurve, m_max: usize, tol: f64) -> Vec<SymmetryDetection> {
    let n = curve.len();
    let centroid = curve.centroid();
    let centered: Vec<Vec3> = curve.points().iter().map(|p| p - centroid).collect();
    let diam = curve.diameter();
    let mut found: Vec<SymmetryDetection> = (1..n)
        .into_par_iter()
        .filter_map(|s| {
            let target: Vec<Vec3> = (0..n).map(|i| centered[(i + s) % n]).collect();
            let (r, rms) = procrustes(&centered, &target, true);
            if rms > tol * diam {
                return None;
            }
            let (theta, axis) = rotation_angle_axis(&r);
            let q = rational_denominator(theta / (2.0 * PI), m_max)?;
            (q >= 2).then(|| SymmetryDetection {
                order: q,
                axis_point: centroid,
                axis_direction: canonical_direction(axis),
                index_shift: s,
                residual: rms / diam,
            })
        })
        .collect();
    found.sort_by(|a, b| a.order.cmp(&b.order).then(a.residual.total_cmp(&b.residual)));
    let mut out: Vec<SymmetryDetection> = Vec::new();
    for d in found {
        let dup = out
            .iter()
            .any(|o| o.order == d.order && o.axis_direction.dot(&d.axis_direction).abs() > 1.0 - 1e-6);
        if !dup {
            out.push(d);
        }
    }
    out
}

/// Orders detected, ascending and deduplicated.
pub fn period_signature(detections: &[SymmetryDetection]) -> Vec<usize> {
    let mut v: Vec<usize> = detections.iter().map(|d| d.order).collect();
    v.sort_unstable();
    v.dedup();
    v
}

#[derive(Clone, Debug, PartialEq)]
pub enum SymmetryViolation {
    /// An axis of order `>= 3` meets the curve.
    AxisMeetsCurve { order: usize, distance: f64 },
    /// Two distinct symmetry axes do not intersect.
    DisjointAxes { orders: (usize, usize), gap: f64 },
    /// Intersecting axes of distinct orders that are not perpendicular, or
    /// whose orders are not `2` and `>= 3`.
    IncompatibleAxes { orders: (usize, usize), cos_angle: f64 },
    /// The order-2 axis meets the curve, or the other axis misses it.
    AxisIncidence { order_two_distance: f64, other_order: usize, other_distance: f64 },
    /// More than one axis with the same order `>= 3`.
    RepeatedAxis { order: usize },
}

impl SymmetryViolation {
    pub fn clause(&self) -> char {
        match self {
            SymmetryViolation::AxisMeetsCurve { .. } => 'a',
            SymmetryViolation::DisjointAxes { .. } => 'b',
            SymmetryViolation::IncompatibleAxes { .. } => 'c',
            SymmetryViolation::AxisIncidence { .. } => 'd',
            SymmetryViolation::RepeatedAxis { .. } => 'e',
        }
    }
}

/// Relative tolerances (fractions of the curve diameter, or of 1 for
/// angle cosines) used to decide incidence, intersection and orthogonality.
pub const VALIDATION_TOL: f64 = 1e-6;

/// Checks a set of detected rotational symmetries against the rules any
/// symmetric non-trivial knot must obey. Diagnostics only.
pub fn validate_symmetry_constraints(detections: &[SymmetryDetection], curve: &ClosedCurve) -> Vec<SymmetryViolation> {
    validate_symmetry_constraints_with_tol(detections, curve, VALIDATION_TOL)
}

pub fn validate_symmetry_constraints_with_tol(
    detections: &[SymmetryDetection],
    curve: &ClosedCurve,
    tol: f64,
) -> Vec<SymmetryViolation> {
    let diam = curve.diameter();
    let eps = tol * diam;
    let mut out = Vec::new();
    let dist: Vec<f64> = detections
        .iter()
        .map(|d| curve_axis_distance(curve, d.axis_point, d.axis_direction))
        .collect();

    for (d, &dd) in detections.iter().zip(&dist) {
        if d.order >= 3 && dd <= eps {
            out.push(SymmetryViolation::AxisMeetsCurve { order: d.order, distance: dd });
        }
    }

    for i in 0..detections.len() {
        for j in i + 1..detections.len() {
            let (a, b) = (&detections[i], &detections[j]);
            let cos = a.axis_direction.dot(&b.axis_direction);
            let gap = line_distance(a.axis_point, a.axis_direction, b.axis_point, b.axis_direction);
            let same_axis = cos.abs() >= 1.0 - tol && gap <= eps;
            if same_axis {
                continue;
            }
            if a.order == b.order {
                if a.order >= 3 {
                    out.push(SymmetryViolation::RepeatedAxis { order: a.order });
                }
                if gap > eps {
                    out.push(SymmetryViolation::DisjointAxes { orders: (a.order, b.order), gap });
                }
                continue;
            }
            if gap > eps {
                out.push(SymmetryViolation::DisjointAxes { orders: (a.order, b.order), gap });
                continue;
            }
            let (lo, hi) = if a.order < b.order { (i, j) } else { (j, i) };
            let orders_ok = detections[lo].order == 2 && detections[hi].order >= 3;
            if cos.abs() > tol || !orders_ok {
                out.push(SymmetryViolation::IncompatibleAxes {
                    orders: (a.order, b.order),
                    cos_angle: cos,
                });
            }
            if orders_ok && (dist[lo] <= eps || dist[hi] > eps) {
                out.push(SymmetryViolation::AxisIncidence {
                    order_two_distance: dist[lo],
                    other_order: detections[hi].order,
                    other_distance: dist[hi],
                });
            }
        }
    }
    out
}

/// Distance between two lines given by point and unit direction.
pub fn line_distance(p1: Vec3, d1: Vec3, p2: Vec3, d2: Vec3) -> f64 {
    let n = d1.cross(&d2);
    let w = p2 - p1;
    if n.norm() < 1e-12 {
        (w - d1 * w.dot(&d1)).norm()
    } else {
        (w.dot(&n) / n.norm()).abs()
    }
}

/// Minimum distance from the polyline to the line through `p` along `d`.
pub fn curve_axis_distance(curve: &ClosedCurve, p: Vec3, d: Vec3) -> f64 {
    let d = d.normalize();
    let n = curve.len();
    (0..n)
        .map(|i| segment_line_distance(curve.point(i), curve.point(i + 1), p, d))
        .fold(f64::INFINITY, f64::min)
}

fn segment_line_distance(a: Vec3, b: Vec3, p: Vec3, d: Vec3) -> f64 {
    // distance from x(u) = a + u (b - a) to the line is |P (x(u) - p)|,
    // P the projector orthogonal to d; minimize the quadratic over [0, 1]
    let proj = |v: Vec3| v - d * v.dot(&d);
    let w0 = proj(a - p);
    let e = proj(b - a);
    let ee = e.norm_squared();
    let u = if ee > 0.0 { (-w0.dot(&e) / ee).clamp(0.0, 1.0) } else { 0.0 };
    (w0 + e * u).norm()
}
