//! Quadrature on `R^d` for Freud weights `exp(-a|x|^λ + b)` and
//! Markov–Sonin weights `|x|^β exp(-a x² + b)`.
//!
//! Univariate rules are Gauss rules truncated to the nodes below a fraction
//! of the Mhaskar–Rakhmanov–Saff number; multivariate rules are Smolyak
//! sums of them. Lower bounds come from fooling functions: unit-norm bumps
//! that vanish on a given node set.
//!
//! ```
//! use wsquad::{apply_sparse, build_sparse_rule, CenterPolicy, DyadicFamily, WeightSpec};
//!
//! let rules = DyadicFamily::new(&WeightSpec::hermite(1), 0.5, CenterPolicy::Include).unwrap();
//! let rule = build_sparse_rule(&rules, 2, 5.0).unwrap();
//! let value = apply_sparse(&rule, |x| (-(x[0] * x[0] + x[1] * x[1]) / 2.0).exp()).unwrap();
//! assert!((value - std::f64::consts::PI / 1.5).abs() < 1e-2);
//! ```

pub mod adaptive;
pub mod convergence;
pub mod error;
pub mod fooling;
pub mod io;
pub mod orthopoly;
mod poly;
pub mod quad1d;
pub mod selftest;
pub mod sparse;
pub mod tridiag;
pub mod weights;

pub use convergence::{
    compare_full_vs_truncated, run_sweep, ConvergenceReport, FamilyKind, Fit, RuleFamily,
    SweepOptions, SweepPoint, TestFunction,
};
pub use error::{Error, Result};
pub use fooling::{
    build_fooling, lower_bound_witness, BumpSpec, FoolingFunction, FreeBox, NodeSet,
};
pub use orthopoly::{gauss_rule, GaussData, RecurrenceTable};
pub use quad1d::{
    apply_rule, apply_rule_weighted, CenterPolicy, DyadicFamily, FullGaussLevels, LevelRules,
    QuadRule1D, RuleKind,
};
pub use sparse::{
    apply_sparse, apply_sparse_weighted, build_sparse_rule, build_sparse_rule_combination,
    select_xi_for_budget, SparseIndexSet, SparseRule,
};
pub use weights::{Family, WeightSpec};
