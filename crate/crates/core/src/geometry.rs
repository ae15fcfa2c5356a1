//! Discrete closed curves: uniformly indexed periodic polylines in 3-space.

use nalgebra::{DMatrix, DVector, Vector3};

use crate::error::{Error, Result};
use crate::numeric::{ordered_reduce, zeta};

pub type Vec3 = Vector3<f64>;

/// Maximum relative edge-length spread `(max - min) / mean` accepted by
/// operations that assume arclength-uniform sampling.
pub const UNIFORM_SPREAD_LIMIT: f64 = 0.01;

/// `N` periodic samples of a closed curve; sample `i` sits at parameter
/// `i / N`, and edge `i` joins sample `i` to sample `(i + 1) % N`.
#[derive(Clone, Debug, PartialEq)]
pub struct ClosedCurve {
    points: Vec<Vec3>,
    edge_lengths: Vec<f64>,
    /// `cumulative[i]` is the arclength from sample 0 to sample `i`;
    /// `cumulative[N]` is the total length.
    cumulative: Vec<f64>,
}

impl ClosedCurve {
    pub fn new(points: Vec<Vec3>) -> Result<Self> {
        let n = points.len();
        if n < 4 {
            return Err(Error::TooFewSamples(n));
        }
        if let Some(i) = points.iter().position(|p| !p.iter().all(|c| c.is_finite())) {
            return Err(Error::NonFinite(i));
        }
        let mut edge_lengths = Vec::with_capacity(n);
        let mut cumulative = Vec::with_capacity(n + 1);
        cumulative.push(0.0);
        let mut acc = 0.0;
        for i in 0..n {
            let next = (i + 1) % n;
            let len = (points[next] - points[i]).norm();
            if len <= 0.0 {
                return Err(Error::DegenerateEdge { index: i, next });
            }
            edge_lengths.push(len);
            acc += len;
            cumulative.push(acc);
        }
        Ok(ClosedCurve {
            points,
            edge_lengths,
            cumulative,
        })
    }

    pub fn from_arrays(points: &[[f64; 3]]) -> Result<Self> {
        Self::new(points.iter().map(|p| Vec3::from(*p)).collect())
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Vec3] {
        &self.points
    }

    pub fn point(&self, i: usize) -> Vec3 {
        self.points[i % self.len()]
    }

    pub fn into_points(self) -> Vec<Vec3> {
        self.points
    }

    pub fn edge(&self, i: usize) -> Vec3 {
        let n = self.len();
        self.points[(i + 1) % n] - self.points[i % n]
    }

    pub fn edge_lengths(&self) -> &[f64] {
        &self.edge_lengths
    }

    pub fn cumulative_arclength(&self) -> &[f64] {
        &self.cumulative
    }

    /// Unit tangent of edge `i`.
    pub fn tangent(&self, i: usize) -> Vec3 {
        let i = i % self.len();
        self.edge(i) / self.edge_lengths[i]
    }

    pub fn length(&self) -> f64 {
        self.cumulative[self.len()]
    }

    /// Arclength from sample `i` forward (increasing index) to sample `j`.
    pub fn forward_arc(&self, i: usize, j: usize) -> f64 {
        let (ci, cj) = (self.cumulative[i], self.cumulative[j]);
        if j >= i {
            cj - ci
        } else {
            self.length() - (ci - cj)
        }
    }

    pub fn centroid(&self) -> Vec3 {
        self.points.iter().sum::<Vec3>() / self.len() as f64
    }

    pub fn diameter(&self) -> f64 {
        let mut d2: f64 = 0.0;
        for (i, p) in self.points.iter().enumerate() {
            for q in &self.points[i + 1..] {
                d2 = d2.max((p - q).norm_squared());
            }
        }
        d2.sqrt()
    }

    /// Uniform scaling about the origin.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(self.points.iter().map(|p| p * factor).collect())
    }

    pub fn map_points(&self, f: impl Fn(&Vec3) -> Vec3) -> Result<Self> {
        Self::new(self.points.iter().map(f).collect())
    }

    /// Same samples, starting at sample `shift`.
    pub fn index_shifted(&self, shift: usize) -> Self {
        let n = self.len();
        let pts = (0..n).map(|i| self.points[(i + shift) % n]).collect();
        Self::new(pts).expect("shift preserves validity")
    }

    /// Same image traversed in the opposite direction.
    pub fn reversed(&self) -> Self {
        let mut pts = self.points.clone();
        pts.reverse();
        Self::new(pts).expect("reversal preserves validity")
    }

    /// `(max - min) / mean` of the edge lengths.
    pub fn edge_spread(&self) -> f64 {
        let (lo, hi) = self
            .edge_lengths
            .iter()
            .fold((f64::INFINITY, 0.0f64), |(lo, hi), &l| (lo.min(l), hi.max(l)));
        (hi - lo) / (self.length() / self.len() as f64)
    }

    pub fn require_uniform(&self) -> Result<()> {
        let spread = self.edge_spread();
        if spread > UNIFORM_SPREAD_LIMIT {
            return Err(Error::NonUniformSampling {
                spread,
                limit: UNIFORM_SPREAD_LIMIT,
            });
        }
        Ok(())
    }

    pub(crate) fn check_index(&self, i: usize) -> Result<()> {
        if i >= self.len() {
            return Err(Error::IndexOutOfRange {
                index: i,
                len: self.len(),
            });
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CurveStats {
    pub length: f64,
    pub min_edge: f64,
    pub max_edge: f64,
    pub bilip_ratio: f64,
    pub diameter: f64,
}

pub fn curve_stats(curve: &ClosedCurve) -> CurveStats {
    let e = curve.edge_lengths();
    CurveStats {
        length: polyline_length(curve),
        min_edge: e.iter().copied().fold(f64::INFINITY, f64::min),
        max_edge: e.iter().copied().fold(0.0, f64::max),
        bilip_ratio: bilipschitz_ratio(curve),
        diameter: curve.diameter(),
    }
}

pub fn polyline_length(curve: &ClosedCurve) -> f64 {
    curve.length()
}

/// Length of the shorter polyline arc joining samples `i` and `j`.
pub fn intrinsic_distance(curve: &ClosedCurve, i: usize, j: usize) -> Result<f64> {
    curve.check_index(i)?;
    curve.check_index(j)?;
    Ok(intrinsic_unchecked(curve, i, j))
}

#[inline]
pub(crate) fn intrinsic_unchecked(curve: &ClosedCurve, i: usize, j: usize) -> f64 {
    let arc = (curve.cumulative[j] - curve.cumulative[i]).abs();
    arc.min(curve.length() - arc)
}

/// Resamples to `n_out` points with equal consecutive chord lengths lying on
/// the input polyline, starting at input sample 0.
///
/// Consecutive output points are joined by chords of one common length, so
/// the result is equilateral and resampling it again at the same `n_out`
/// returns it unchanged. When every output chord stays within one input
/// edge this is exactly equal-arclength placement with linear interpolation.
/// If no such chain closes up (the curve folds back within one chord
/// length), the points are placed at equal arclength instead.
pub fn arclength_resample(curve: &ClosedCurve, n_out: usize) -> Result<ClosedCurve> {
    if n_out < 4 {
        return Err(Error::param(format!("n_out must be at least 4, got {n_out}")));
    }
    let walker = ChordWalker::new(curve);
    let target = curve.length();
    // Overshoot of the closing position as a function of the chord length.
    // Chords never exceed arcs, so `total / n_out` reaches at least `total`.
    let mut hi = target / n_out as f64;
    let mut lo = 0.0;
    let mut best = hi;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        match walker.walk(mid, n_out) {
            Some(end) if end >= target => {
                hi = mid;
                best = mid;
            }
            Some(_) => lo = mid,
            None => {
                hi = mid;
                best = mid;
            }
        }
    }
    let closes = |pos: &Vec<f64>| {
        let last = walker.point_at(pos[n_out - 1]);
        ((last - curve.points[0]).norm() - best).abs() <= 1e-9 * best
    };
    let positions = match walker.positions(best, n_out) {
        Some(p) if closes(&p) => p,
        // the walk can jump where the curve folds back within one chord;
        // fall back to plain equal-arclength placement
        _ => (0..n_out).map(|k| target * k as f64 / n_out as f64).collect(),
    };
    ClosedCurve::new(positions.into_iter().map(|s| walker.point_at(s)).collect())
}

const ROOT_SLACK: f64 = 1e-12;

struct ChordWalker<'a> {
    curve: &'a ClosedCurve,
}

impl<'a> ChordWalker<'a> {
    fn new(curve: &'a ClosedCurve) -> Self {
        ChordWalker { curve }
    }

    fn point_at(&self, s: f64) -> Vec3 {
        let c = self.curve;
        let total = c.length();
        let s = s.rem_euclid(total);
        let edge = match c.cumulative.binary_search_by(|v| v.total_cmp(&s)) {
            Ok(k) => return c.points[k % c.len()],
            Err(k) => k - 1,
        };
        let u = (s - c.cumulative[edge]) / c.edge_lengths[edge];
        c.points[edge] + c.edge(edge) * u
    }

    /// Arclength position reached after `steps` chords of length `chord`
    /// (unwrapped; may exceed the total length). `None` once the walk has
    /// gone more than a full loop past its start.
    fn walk(&self, chord: f64, steps: usize) -> Option<f64> {
        let mut s = 0.0;
        for _ in 0..steps {
            s = self.next(s, chord)?;
        }
        Some(s)
    }

    fn positions(&self, chord: f64, steps: usize) -> Option<Vec<f64>> {
        let mut out = Vec::with_capacity(steps);
        let mut s = 0.0;
        out.push(s);
        for _ in 1..steps {
            s = self.next(s, chord)?;
            out.push(s);
        }
        Some(out)
    }

    /// First position after `s` whose point is at distance `chord` from
    /// the point at `s`.
    fn next(&self, s: f64, chord: f64) -> Option<f64> {
        let c = self.curve;
        let n = c.len();
        let total = c.length();
        let origin = self.point_at(s);
        let lap = (s / total).floor();
        let local = s - lap * total;
        let mut edge = match c.cumulative.binary_search_by(|v| v.total_cmp(&local)) {
            Ok(k) => k % n,
            Err(k) => k - 1,
        };
        let mut base = lap * total;
        let mut u_min = (local - c.cumulative[edge]) / c.edge_lengths[edge];
        let c2 = chord * chord;
        for _ in 0..=n {
            let a = c.points[edge];
            let d = c.edge(edge);
            // |a + u d - origin|^2 = chord^2, smallest root u >= u_min
            let w = a - origin;
            let qa = d.norm_squared();
            let qb = 2.0 * w.dot(&d);
            let qc = w.norm_squared() - c2;
            let disc = qb * qb - 4.0 * qa * qc;
            if disc >= 0.0 {
                let sq = disc.sqrt();
                let u = (-qb + sq) / (2.0 * qa);
                // roots at a shared vertex may land just outside either edge
                if u >= u_min - ROOT_SLACK && u <= 1.0 + ROOT_SLACK {
                    let u = u.clamp(u_min, 1.0);
                    return Some(base + c.cumulative[edge] + u * c.edge_lengths[edge]);
                }
            }
            u_min = 0.0;
            edge += 1;
            if edge == n {
                edge = 0;
                base += total;
            }
        }
        None
    }
}

/// Minimum over sample pairs of chord length divided by intrinsic distance.
/// Orthogonal projection onto the displacements that change every edge
/// length by the same amount to first order, i.e. the tangent space of the
/// set of equilateral polygons (up to scale) at the current curve.
///
/// With `(A v)_i = T_i . (v_{i+1} - v_i)` the projection of `g` is
/// `g - A^T lambda`, where `A A^T lambda = A g - mu 1` and `sum lambda = 0`.
/// `A A^T` is cyclic tridiagonal with diagonal 2 and off-diagonal
/// `-T_i . T_{i+1}`; it is positive definite unless the curve is straight.
pub struct EquilateralProjector {
    tangents: Vec<Vec3>,
    chol: nalgebra::Cholesky<f64, nalgebra::Dyn>,
    /// `(A A^T)^{-1} 1`
    ones_solve: DVector<f64>,
}

impl EquilateralProjector {
    pub fn new(curve: &ClosedCurve) -> Result<Self> {
        let n = curve.len();
        let tangents: Vec<Vec3> = (0..n).map(|i| curve.tangent(i)).collect();
        let mut k = DMatrix::<f64>::zeros(n, n);
        for i in 0..n {
            let j = (i + 1) % n;
            let c = -tangents[i].dot(&tangents[j]);
            k[(i, i)] = 2.0;
            k[(i, j)] += c;
            k[(j, i)] += c;
        }
        let chol = k
            .cholesky()
            .ok_or_else(|| Error::param("edge-length constraint system is singular"))?;
        let ones_solve = chol.solve(&DVector::from_element(n, 1.0));
        Ok(EquilateralProjector {
            tangents,
            chol,
            ones_solve,
        })
    }

    pub fn apply(&self, field: &[Vec3]) -> Vec<Vec3> {
        let n = self.tangents.len();
        assert_eq!(field.len(), n, "field length must match the curve");
        let ag = DVector::from_iterator(n, (0..n).map(|i| self.tangents[i].dot(&(field[(i + 1) % n] - field[i]))));
        let z = self.chol.solve(&ag);
        let mu = z.sum() / self.ones_solve.sum();
        let lambda = z - &self.ones_solve * mu;
        // (A^T lambda)_j = lambda_{j-1} T_{j-1} - lambda_j T_j
        (0..n)
            .map(|j| {
                let p = (j + n - 1) % n;
                field[j] - (self.tangents[p] * lambda[p] - self.tangents[j] * lambda[j])
            })
            .collect()
    }
}

pub fn bilipschitz_ratio(curve: &ClosedCurve) -> f64 {
    let n = curve.len();
    let r: Result<f64, ()> = ordered_reduce(
        n,
        || f64::INFINITY,
        |i, acc| {
            let p = curve.points[i];
            for j in i + 1..n {
                let d = intrinsic_unchecked(curve, i, j);
                if d > 0.0 {
                    *acc = acc.min((p - curve.points[j]).norm() / d);
                }
            }
            Ok(())
        },
        |t, c| *t = t.min(c),
    );
    r.unwrap_or(0.0).min(1.0)
}

/// Sobolev–Slobodetckij seminorm `[T]_{s,2}` of the unit edge-tangent field.
///
/// The double sum over sample offsets is a trapezoid rule for a kernel
/// with an integrable singularity of order `|w|^{1-2s}` at the diagonal;
/// its leading error `2 zeta(2s-1) kappa^2 h^{2-2s}` per unit length is
/// removed using the discrete curvature `|T_{i+1} - T_i|`. The plain sum
/// is available as [`sobolev_seminorm_raw`].
pub fn sobolev_seminorm(curve: &ClosedCurve, s_exponent: f64) -> Result<f64> {
    let raw = seminorm_sq_raw(curve, s_exponent)?;
    let n = curve.len();
    let h = curve.length() / n as f64;
    let turning: f64 = (0..n)
        .map(|i| (curve.tangent(i + 1) - curve.tangent(i)).norm_squared())
        .sum();
    let correction = -2.0 * zeta(2.0 * s_exponent - 1.0) * h.powf(1.0 - 2.0 * s_exponent) * turning;
    Ok((raw + correction).max(0.0).sqrt())
}

/// The uncorrected discrete double sum behind [`sobolev_seminorm`].
pub fn sobolev_seminorm_raw(curve: &ClosedCurve, s_exponent: f64) -> Result<f64> {
    Ok(seminorm_sq_raw(curve, s_exponent)?.sqrt())
}

fn seminorm_sq_raw(curve: &ClosedCurve, s: f64) -> Result<f64> {
    if !(s > 0.0 && s < 1.0) {
        return Err(Error::param(format!("seminorm exponent must lie in (0, 1), got {s}")));
    }
    curve.require_uniform()?;
    let n = curve.len();
    let h = curve.length() / n as f64;
    let tangents: Vec<Vec3> = (0..n).map(|i| curve.tangent(i)).collect();
    // kernel depends only on the offset
    let half = n / 2;
    let kernel: Vec<f64> = (0..=half)
        .map(|w| if w == 0 { 0.0 } else { h * h / (w as f64 * h).powf(1.0 + 2.0 * s) })
        .collect();
    ordered_reduce(
        n,
        || 0.0,
        |i, acc| {
            // offsets -N/2 < w <= N/2, w != 0
            for (j, tj) in tangents.iter().enumerate() {
                if j == i {
                    continue;
                }
                let fwd = (j + n - i) % n;
                let w = if fwd <= half { fwd } else { n - fwd };
                *acc += (tj - tangents[i]).norm_squared() * kernel[w];
            }
            Ok(())
        },
        |t, c| *t += c,
    )
}
