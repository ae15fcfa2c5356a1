//! Discrete O'Hara knot energies, cyclic symmetry groups acting on closed
//! polygons, and symmetry-constrained minimization of torus knots.

pub mod cli;
pub mod energy;
pub mod error;
pub mod geometry;
pub mod io;
pub mod numeric;
pub mod optimize;
pub mod symmetry;
pub mod torus;

pub use energy::{
    apriori_bilip_bound, circle_energy_oracle, energy_gradient, ohara_energy, scaled_energy, seminorm_energy_check,
    EnergyParams, GradientField, SeminormCheck,
};
pub use error::{Error, Result};
pub use geometry::{
    arclength_resample, bilipschitz_ratio, curve_stats, intrinsic_distance, polyline_length, sobolev_seminorm,
    ClosedCurve, CurveStats, Vec3,
};
pub use optimize::{
    compare_minimizers, criticality_report, minimize_curve, minimize_symmetric, CompareTolerances, Comparison,
    CriticalityReport, MinimizeOutcome, OptimizationTrace, OptimizerConfig, TraceRow, Verdict,
};
pub use symmetry::{
    apply_group_action, detect_periods, is_symmetric, solve_shift_parameter, symmetric_projection, symmetrize,
    validate_symmetry_constraints, CyclicAction, RigidMotion, SymmetryDetection, SymmetryViolation,
};
pub use torus::{admissible_symmetries, torus_knot_curve, validate_torus_spec, TorusKnotSpec};
