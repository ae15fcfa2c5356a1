//! Minimization of `S_alpha` inside the fixed subspace of a cyclic action,
//! criticality diagnostics, and comparison of two minimizers up to
//! isometry.

use serde::Serialize;

use crate::energy::{energy_gradient, rms, scaled_energy, EnergyParams};
use crate::error::{Error, Result};
use crate::geometry::{arclength_resample, bilipschitz_ratio, ClosedCurve, EquilateralProjector, Vec3};
use crate::symmetry::{
    detect_periods, period_signature, procrustes, project_field, symmetrize, symmetry_residual, CyclicAction,
    SymmetryDetection,
};
use crate::torus::{symmetry_for_order, torus_knot_curve, TorusKnotSpec};

/// Largest order searched when attaching period signatures to reports.
pub const PERIOD_SEARCH_MAX: usize = 12;
/// Alignment tolerance (fraction of the diameter) for period detection on
/// converged curves.
pub const PERIOD_SEARCH_TOL: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OptimizerConfig {
    pub alpha: f64,
    /// Sample count of the discretized knot.
    pub samples: usize,
    /// Tube radius of the initial torus curve.
    pub rho: f64,
    pub max_iters: usize,
    /// Stop when `rms(P grad S) * diameter / S` falls below this.
    pub grad_tol: f64,
    /// Largest displacement of any sample in one step, relative to the
    /// diameter.
    pub step_init: f64,
    pub backtrack_factor: f64,
    pub armijo_c: f64,
    pub bilip_floor: f64,
    pub resymmetrize_every: usize,
    pub resample_every: usize,
    /// Precondition the descent direction with a circulant fractional
    /// Sobolev operator.
    pub precondition: bool,
    /// Number of curvature pairs kept by the quasi-Newton update; zero
    /// gives plain preconditioned gradient descent.
    pub memory: usize,
}

impl OptimizerConfig {
    pub fn new(alpha: f64) -> Result<Self> {
        let c = OptimizerConfig {
            alpha,
            samples: 240,
            rho: crate::torus::DEFAULT_RHO,
            max_iters: 50_000,
            grad_tol: 1e-5,
            step_init: 1e-2,
            backtrack_factor: 0.5,
            armijo_c: 1e-4,
            bilip_floor: 0.05,
            resymmetrize_every: 25,
            resample_every: 25,
            precondition: true,
            memory: 12,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        EnergyParams::new(self.alpha)?;
        let positive = [
            ("grad_tol", self.grad_tol),
            ("step_init", self.step_init),
            ("armijo_c", self.armijo_c),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::param(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.backtrack_factor > 0.0 && self.backtrack_factor < 1.0) {
            return Err(Error::param("backtrack_factor must lie in (0, 1)"));
        }
        if !(self.bilip_floor > 0.0 && self.bilip_floor < 1.0) {
            return Err(Error::param("bilip_floor must lie in (0, 1)"));
        }
        if !(self.rho > 0.0 && self.rho < 1.0) {
            return Err(Error::param("rho must lie in (0, 1)"));
        }
        if self.samples < 4 {
            return Err(Error::param("samples must be at least 4"));
        }
        if self.resample_every == 0 || self.resymmetrize_every == 0 {
            return Err(Error::param("maintenance intervals must be positive"));
        }
        Ok(())
    }

    pub fn energy_params(&self) -> EnergyParams {
        EnergyParams::new(self.alpha).expect("validated")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TraceRow {
    pub iter: usize,
    pub scaled: f64,
    pub energy: f64,
    pub length: f64,
    pub grad_sym_rms: f64,
    pub grad_full_rms: f64,
    pub bilip: f64,
    pub step: f64,
}

/// One row per accepted descent step. Gradient norms are normalized as
/// `rms * diameter / S`.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct OptimizationTrace {
    pub rows: Vec<TraceRow>,
}

impl OptimizationTrace {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn is_monotone(&self) -> bool {
        self.rows.windows(2).all(|w| w[1].scaled <= w[0].scaled)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    Converged,
    MaxIterations,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CriticalityReport {
    /// Normalized RMS of `P grad S` restricted to equilateral polygons.
    pub sym_grad_rms: f64,
    /// Normalized RMS of `grad S` restricted to equilateral polygons.
    pub full_grad_rms: f64,
    /// Normalized RMS of the remainder of `grad S`, which only
    /// redistributes samples along the curve.
    pub reparam_grad_rms: f64,
    /// `full_grad_rms / grad_tol`.
    pub ratio: f64,
    pub periods: Vec<usize>,
    pub scaled_energy: f64,
    pub symmetry_residual: f64,
}

#[derive(Clone, Debug)]
pub struct MinimizeOutcome {
    pub curve: ClosedCurve,
    pub trace: OptimizationTrace,
    pub report: CriticalityReport,
    pub termination: Termination,
    pub iterations: usize,
    pub action: Option<CyclicAction>,
}

/// `rms(field) * diameter / S`.
fn normalized_rms(field: &[Vec3], diameter: f64, scaled: f64) -> f64 {
    rms(field) * diameter / scaled
}

pub fn criticality_report(
    curve: &ClosedCurve,
    action: Option<&CyclicAction>,
    params: &EnergyParams,
    grad_tol: f64,
) -> Result<CriticalityReport> {
    let residual = match action {
        Some(a) => {
            let r = symmetry_residual(curve, a)?;
            if r > 1e-8 {
                return Err(Error::NotSymmetric { residual: r, tol: 1e-8 });
            }
            r
        }
        None => 0.0,
    };
    let g = energy_gradient(curve, params)?;
    let diam = curve.diameter();
    let proj = EquilateralProjector::new(curve)?;
    let restricted = proj.apply(&g.d_scaled);
    let full = normalized_rms(&restricted, diam, g.scaled);
    let sym = match action {
        Some(a) => normalized_rms(&proj.apply(&project_field(&g.d_scaled, a)?), diam, g.scaled),
        None => full,
    };
    let remainder: Vec<Vec3> = g.d_scaled.iter().zip(&restricted).map(|(a, b)| a - b).collect();
    let detections = detect_periods(curve, PERIOD_SEARCH_MAX, PERIOD_SEARCH_TOL);
    Ok(CriticalityReport {
        sym_grad_rms: sym,
        full_grad_rms: full,
        reparam_grad_rms: normalized_rms(&remainder, diam, g.scaled),
        ratio: full / grad_tol,
        periods: period_signature(&detections),
        scaled_energy: g.scaled,
        symmetry_residual: residual,
    })
}

/// Minimizes `S_alpha` over curves of the knot class `T(a, b)` fixed by the
/// order-`m` action, starting from the standard torus representative.
pub fn minimize_symmetric(spec: &TorusKnotSpec, m: usize, config: &OptimizerConfig) -> Result<MinimizeOutcome> {
    config.validate()?;
    let sym = symmetry_for_order(spec, m)?;
    let action = sym.action();
    action.check_grid(config.samples)?;
    let rep = sym.representative(spec);
    let rep = TorusKnotSpec { rho: config.rho, ..rep };
    let start = torus_knot_curve(&rep, config.samples)?;
    minimize_curve(&start, Some(&action), config)
}

/// Projected descent from an arbitrary start; `action = None` runs the
/// unconstrained flow.
pub fn minimize_curve(
    start: &ClosedCurve,
    action: Option<&CyclicAction>,
    config: &OptimizerConfig,
) -> Result<MinimizeOutcome> {
    config.validate()?;
    let params = config.energy_params();
    let n = config.samples;
    if let Some(a) = action {
        a.check_grid(n)?;
    }
    let precond = Preconditioner::new(n, config.alpha, config.precondition);
    let mut curve = normalize(&arclength_resample(start, n)?, action)?;
    let floor = config.bilip_floor;
    let start_bilip = bilipschitz_ratio(&curve);
    if start_bilip < floor {
        return Err(Error::param(format!(
            "initial curve has bi-Lipschitz ratio {start_bilip:.3e} below the floor {floor}"
        )));
    }

    // symmetric projection followed by restriction to equilateral
    // polygons; the two commute at symmetric curves
    let project = |proj: &EquilateralProjector, g: &[Vec3]| -> Result<Vec<Vec3>> {
        match action {
            Some(a) => Ok(proj.apply(&project_field(g, a)?)),
            None => Ok(proj.apply(g)),
        }
    };

    let mut trace = OptimizationTrace::default();
    let mut termination = Termination::MaxIterations;
    let mut iterations = 0;
    let mut stall_recovered = false;
    let mut memory = QuasiNewton::new(config.memory);

    let mut grad = energy_gradient(&curve, &params)?;
    let mut proj = EquilateralProjector::new(&curve)?;
    let mut projected = project(&proj, &grad.d_scaled)?;
    // objective values always come from `scaled_energy` so that the
    // monotonicity checks compare identically computed numbers
    let mut current = scaled_energy(&curve, &params)?;
    for iter in 0..config.max_iters {
        iterations = iter;
        let diam = curve.diameter();
        let sym_rms = normalized_rms(&projected, diam, grad.scaled);
        if sym_rms <= config.grad_tol {
            termination = Termination::Converged;
            break;
        }
        let full_rms = normalized_rms(&proj.apply(&grad.d_scaled), diam, grad.scaled);

        // restricted preconditioner; symmetric positive semidefinite, so it
        // serves as the initial inverse Hessian of the quasi-Newton update
        let h0 = |v: &[Vec3]| proj.apply(&precond.apply(&proj.apply(v)));
        let mut direction = memory.direction(&projected, h0);
        let mut slope = dot(&grad.d_scaled, &direction);
        if !(slope < 0.0) {
            memory.clear();
            direction = memory.direction(&projected, h0);
            slope = dot(&grad.d_scaled, &direction);
        }
        let dir_max = direction.iter().map(|v| v.norm()).fold(0.0, f64::max);
        let t_cap = config.step_init * diam / dir_max;
        let mut t = if memory.is_empty() { t_cap } else { t_cap.min(1.0) };

        let accepted = loop {
            if t * dir_max < 1e-15 * diam {
                break None;
            }
            let pts: Vec<Vec3> = curve.points().iter().zip(&direction).map(|(p, d)| p + d * t).collect();
            // resampling retracts the step back onto equilateral polygons
            if let Ok(trial) = ClosedCurve::new(pts).and_then(|c| arclength_resample(&c, n)) {
                let bilip = bilipschitz_ratio(&trial);
                if bilip >= floor {
                    if let Ok(s) = scaled_energy(&trial, &params) {
                        if s <= current + config.armijo_c * t * slope {
                            break Some((trial, bilip, s));
                        }
                    }
                }
            }
            t *= config.backtrack_factor;
        };

        let Some((next, bilip, value)) = accepted else {
            if stall_recovered {
                return Err(Error::Stall {
                    iteration: iter,
                    reason: format!("no admissible step; projected gradient {sym_rms:.3e}"),
                    trace: Box::new(trace),
                });
            }
            stall_recovered = true;
            curve = normalize(&arclength_resample(&curve, n)?, action)?;
            grad = energy_gradient(&curve, &params)?;
            proj = EquilateralProjector::new(&curve)?;
            projected = project(&proj, &grad.d_scaled)?;
            current = scaled_energy(&curve, &params)?;
            memory.clear();
            continue;
        };

        let step: Vec<Vec3> = next.points().iter().zip(curve.points()).map(|(a, b)| a - b).collect();
        curve = next;
        current = value;
        let new_grad = energy_gradient(&curve, &params)?;
        proj = EquilateralProjector::new(&curve)?;
        let new_projected = project(&proj, &new_grad.d_scaled)?;
        let change: Vec<Vec3> = new_projected.iter().zip(&projected).map(|(a, b)| a - b).collect();
        memory.push(step, change);
        grad = new_grad;
        projected = new_projected;
        trace.rows.push(TraceRow {
            iter,
            scaled: current,
            energy: grad.energy,
            length: grad.length,
            grad_sym_rms: sym_rms,
            grad_full_rms: full_rms,
            bilip,
            step: t * dir_max / diam,
        });

        let step_no = iter + 1;
        let resample = step_no % config.resample_every == 0;
        let resym = step_no % config.resymmetrize_every == 0;
        if resample || resym {
            let base = if resample { arclength_resample(&curve, n)? } else { curve.clone() };
            let candidate = normalize(&base, action)?;
            let value = scaled_energy(&candidate, &params)?;
            if value <= current && bilipschitz_ratio(&candidate) >= floor {
                if let Ok(cg) = energy_gradient(&candidate, &params) {
                    curve = candidate;
                    current = value;
                    grad = cg;
                    proj = EquilateralProjector::new(&curve)?;
                    projected = project(&proj, &grad.d_scaled)?;
                    memory.clear();
                }
            }
        }
    }

    if termination == Termination::MaxIterations {
        iterations = config.max_iters;
    }
    // final normalization: unit length and exact symmetry
    let final_curve = normalize(&curve, action)?;
    let report = criticality_report(&final_curve, action, &params, config.grad_tol)?;
    Ok(MinimizeOutcome {
        curve: final_curve,
        trace,
        report,
        termination,
        iterations,
        action: action.copied(),
    })
}

fn dot(a: &[Vec3], b: &[Vec3]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x.dot(y)).sum()
}

/// Limited-memory BFGS on top of the circulant preconditioner. All stored
/// vectors lie in the symmetric subspace, so the directions do too.
struct QuasiNewton {
    capacity: usize,
    pairs: std::collections::VecDeque<(Vec<Vec3>, Vec<Vec3>, f64)>,
}

impl QuasiNewton {
    fn new(capacity: usize) -> Self {
        QuasiNewton {
            capacity,
            pairs: Default::default(),
        }
    }

    fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    fn clear(&mut self) {
        self.pairs.clear();
    }

    fn push(&mut self, s: Vec<Vec3>, y: Vec<Vec3>) {
        if self.capacity == 0 {
            return;
        }
        let sy = dot(&s, &y);
        if !(sy > 1e-12 * dot(&s, &s).sqrt() * dot(&y, &y).sqrt()) {
            return;
        }
        if self.pairs.len() == self.capacity {
            self.pairs.pop_front();
        }
        self.pairs.push_back((s, y, 1.0 / sy));
    }

    /// `-H g` by the two-loop recursion.
    fn direction(&self, g: &[Vec3], precond: impl Fn(&[Vec3]) -> Vec<Vec3>) -> Vec<Vec3> {
        let mut q = g.to_vec();
        let mut alphas = Vec::with_capacity(self.pairs.len());
        for (s, y, rho) in self.pairs.iter().rev() {
            let a = rho * dot(s, &q);
            for (qi, yi) in q.iter_mut().zip(y) {
                *qi -= yi * a;
            }
            alphas.push(a);
        }
        let mut r = precond(&q);
        if let Some((s, y, _)) = self.pairs.back() {
            let my = precond(y);
            let gamma = dot(s, y) / dot(y, &my);
            r.iter_mut().for_each(|v| *v *= gamma);
        }
        for ((s, y, rho), a) in self.pairs.iter().zip(alphas.into_iter().rev()) {
            let b = rho * dot(y, &r);
            for (ri, si) in r.iter_mut().zip(s) {
                *ri += si * (a - b);
            }
        }
        r.into_iter().map(|v| -v).collect()
    }
}

/// Rescale about the origin to unit length, then project onto the
/// symmetric subspace.
fn normalize(curve: &ClosedCurve, action: Option<&CyclicAction>) -> Result<ClosedCurve> {
    let unit = curve.scaled(1.0 / curve.length())?;
    match action {
        Some(a) => {
            let s = symmetrize(&unit, a)?;
            s.scaled(1.0 / s.length())
        }
        None => Ok(unit),
    }
}

/// Circulant operator with symbol `(1 + f^2)^((alpha+1)/2)` in the index
/// frequency `f`, applied componentwise. It commutes with index shifts
/// and with rotations, hence with the symmetric projection.
struct Preconditioner {
    /// first row of the inverse operator; empty for the identity
    kernel: Vec<f64>,
}

impl Preconditioner {
    fn new(n: usize, alpha: f64, enabled: bool) -> Self {
        if !enabled {
            return Preconditioner { kernel: Vec::new() };
        }
        let expo = (alpha + 1.0) / 2.0;
        let symbol: Vec<f64> = (0..n)
            .map(|f| {
                let f = f.min(n - f) as f64;
                1.0 / (1.0 + f * f).powf(expo)
            })
            .collect();
        let kernel = (0..n)
            .map(|j| {
                symbol
                    .iter()
                    .enumerate()
                    .map(|(f, s)| s * (2.0 * std::f64::consts::PI * (f * j % n) as f64 / n as f64).cos())
                    .sum::<f64>()
                    / n as f64
            })
            .collect();
        Preconditioner { kernel }
    }

    fn apply(&self, field: &[Vec3]) -> Vec<Vec3> {
        if self.kernel.is_empty() {
            return field.to_vec();
        }
        let n = field.len();
        (0..n)
            .map(|i| {
                let mut acc = Vec3::zeros();
                for (j, v) in field.iter().enumerate() {
                    acc += v * self.kernel[(j + n - i) % n];
                }
                acc
            })
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CompareTolerances {
    /// Relative difference of `S_alpha` above which the curves differ.
    pub energy_rel: f64,
    /// RMS alignment residual, relative to the diameter, accepted as a match.
    pub alignment: f64,
}

impl Default for CompareTolerances {
    fn default() -> Self {
        CompareTolerances {
            energy_rel: 1e-3,
            alignment: 1e-4,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Isometric,
    Mirror,
    Distinct,
}

/// Which evidence decided the verdict.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Evidence {
    EnergyGap,
    ProperAlignment,
    ImproperAlignment,
    NoAlignment,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Comparison {
    pub verdict: Verdict,
    pub decided_by: Evidence,
    pub scaled_energies: (f64, f64),
    pub energy_rel_diff: f64,
    /// Best RMS residual over index shifts and orientations, relative to
    /// the diameter; `None` when the energy gap made alignment unnecessary.
    pub proper_residual: Option<f64>,
    pub improper_residual: Option<f64>,
    pub periods: (Vec<usize>, Vec<usize>),
}

pub fn compare_minimizers(
    c1: &ClosedCurve,
    c2: &ClosedCurve,
    params: &EnergyParams,
    tol: &CompareTolerances,
) -> Result<Comparison> {
    let a = center_unit(c1)?;
    let mut b = center_unit(c2)?;
    if b.len() != a.len() {
        b = center_unit(&arclength_resample(&b, a.len())?)?;
    }
    let s1 = scaled_energy(&a, params)?;
    let s2 = scaled_energy(&b, params)?;
    let rel = (s1 - s2).abs() / s1.abs().max(s2.abs());
    let periods = (
        period_signature(&detect_periods(&a, PERIOD_SEARCH_MAX, PERIOD_SEARCH_TOL)),
        period_signature(&detect_periods(&b, PERIOD_SEARCH_MAX, PERIOD_SEARCH_TOL)),
    );
    let mut out = Comparison {
        verdict: Verdict::Distinct,
        decided_by: Evidence::EnergyGap,
        scaled_energies: (s1, s2),
        energy_rel_diff: rel,
        proper_residual: None,
        improper_residual: None,
        periods,
    };
    if rel > tol.energy_rel {
        return Ok(out);
    }
    let diam = a.diameter();
    let proper = best_alignment(&a, &b, true) / diam;
    let improper = best_alignment(&a, &b, false) / diam;
    out.proper_residual = Some(proper);
    out.improper_residual = Some(improper);
    (out.verdict, out.decided_by) = if proper <= tol.alignment {
        (Verdict::Isometric, Evidence::ProperAlignment)
    } else if improper <= tol.alignment {
        (Verdict::Mirror, Evidence::ImproperAlignment)
    } else {
        (Verdict::Distinct, Evidence::NoAlignment)
    };
    Ok(out)
}

fn center_unit(c: &ClosedCurve) -> Result<ClosedCurve> {
    let centroid = c.centroid();
    let scale = 1.0 / c.length();
    c.map_points(|p| (p - centroid) * scale)
}

/// Smallest RMS residual of a `det = ±1` Procrustes fit of `a` onto `b`
/// over all index shifts and both traversal directions.
fn best_alignment(a: &ClosedCurve, b: &ClosedCurve, proper: bool) -> f64 {
    use rayon::prelude::*;
    let n = a.len();
    let src = a.points();
    let dst = b.points();
    (0..2 * n)
        .into_par_iter()
        .map(|k| {
            let (s, rev) = (k % n, k >= n);
            let target: Vec<Vec3> = (0..n)
                .map(|i| if rev { dst[(s + n - i) % n] } else { dst[(i + s) % n] })
                .collect();
            procrustes(src, &target, proper).1
        })
        .reduce(|| f64::INFINITY, f64::min)
}

/// Detected symmetries plus their orders, for reporting.
pub fn symmetry_summary(curve: &ClosedCurve) -> (Vec<SymmetryDetection>, Vec<usize>) {
    let d = detect_periods(curve, PERIOD_SEARCH_MAX, PERIOD_SEARCH_TOL);
    let sig = period_signature(&d);
    (d, sig)
}
