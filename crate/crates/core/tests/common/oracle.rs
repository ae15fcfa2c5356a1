//! Quadrature on smooth parametrized curves, independent of the discrete
//! energy code.

use std::f64::consts::PI;

use symknot::numeric::gauss_legendre;
use symknot::Vec3;

/// A closed curve on `[0, 1)` with analytic first and second derivatives.
pub struct SmoothCurve<'a> {
    pub d1: &'a dyn Fn(f64) -> Vec3,
    pub d2: &'a dyn Fn(f64) -> Vec3,
    pub pos: &'a dyn Fn(f64) -> Vec3,
}

fn gl_integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize, nodes: &[f64], weights: &[f64]) -> f64 {
    let h = (b - a) / panels as f64;
    let mut sum = 0.0;
    for k in 0..panels {
        let mid = a + (k as f64 + 0.5) * h;
        for (x, w) in nodes.iter().zip(weights) {
            sum += w * f(mid + 0.5 * h * x);
        }
    }
    sum * 0.5 * h
}

impl SmoothCurve<'_> {
    pub fn speed(&self, t: f64) -> f64 {
        (self.d1)(t).norm()
    }

    pub fn curvature(&self, t: f64) -> f64 {
        let v = (self.d1)(t);
        v.cross(&(self.d2)(t)).norm() / v.norm().powi(3)
    }

    /// `E_alpha` of the smooth curve.
    ///
    /// The outer parameter uses the periodic trapezoid rule with `outer`
    /// nodes. The inner offset `w` runs over `w0 <= |w| <= 1/2` on
    /// geometrically graded Gauss panels; the band `|w| < w0` is replaced
    /// by its leading Taylor term `(alpha/24) kappa^2 D^(2-alpha) |gamma'|^2`.
    pub fn energy(&self, alpha: f64, outer: usize) -> (f64, f64) {
        let (nodes, weights) = gauss_legendre(16);
        let length = gl_integrate(|t| self.speed(t), 0.0, 1.0, 64, &nodes, &weights);
        let arc = |u: f64, w: f64| {
            let (a, b) = if w >= 0.0 { (u, u + w) } else { (u + w, u) };
            gl_integrate(|t| self.speed(t), a, b, 4, &nodes, &weights)
        };
        let w0 = 1e-3;
        let mut edges: Vec<f64> = vec![w0];
        while *edges.last().unwrap() < 0.5 {
            let next = (edges.last().unwrap() * 2.0).min(0.5);
            edges.push(next);
        }
        let mut total = 0.0;
        for j in 0..outer {
            let u = j as f64 / outer as f64;
            let pu = (self.pos)(u);
            let su = self.speed(u);
            let mut inner = 0.0;
            for sign in [-1.0, 1.0] {
                for win in edges.windows(2) {
                    inner += gl_integrate(
                        |w| {
                            let w = sign * w;
                            let v = u + w;
                            let r = ((self.pos)(v) - pu).norm();
                            let s = arc(u, w);
                            let d = s.min(length - s);
                            (r.powf(-alpha) - d.powf(-alpha)) * self.speed(v)
                        },
                        win[0],
                        win[1],
                        1,
                        &nodes,
                        &weights,
                    ) * su;
                }
            }
            let k = self.curvature(u);
            inner += alpha / 24.0 * k * k * su.powf(4.0 - alpha) * 2.0 * w0.powf(3.0 - alpha) / (3.0 - alpha);
            total += inner;
        }
        (total / outer as f64, length)
    }
}

/// `[T]^2` of the unit-length circle: `2 int_0^(1/2) 4 sin^2(pi w) / w^(1+2s) dw`.
pub fn circle_seminorm_sq(s: f64) -> f64 {
    let (nodes, weights) = gauss_legendre(16);
    let q = 1.0 / (2.0 - 2.0 * s);
    let top = 0.5f64.powf(1.0 / q);
    let f = |v: f64| {
        if v == 0.0 {
            return 4.0 * PI * PI * q;
        }
        let w = v.powf(q);
        let sinc = (PI * w).sin() / (PI * w);
        4.0 * PI * PI * sinc * sinc * q
    };
    2.0 * gl_integrate(f, 0.0, top, 64, &nodes, &weights)
}
