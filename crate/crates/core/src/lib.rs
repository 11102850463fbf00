//! Numerical verification toolkit for the weighted iterated Copson-Hardy inequality
//!
//! ```text
//! ( int_0^inf ( int_x^inf ( int_0^t h )^q w(t) dt )^(r/q) u(x) dx )^(1/r)
//!     <= C ( int_0^inf h^p v )^(1/p)
//! ```
//!
//! The crate computes the characterization constants of the inequality,
//! evaluates both sides on step functions, builds dyadic covering sequences
//! and estimates the best constant `C` from below by direct optimization.

pub mod bestconst;
pub mod conditions;
pub mod covering;
pub mod error;
pub mod functionals;
mod grid;
pub mod quad;
pub mod weights;

pub use covering::{build_covering, validate_covering, CoveringSequence};
pub use error::{Error, Result};
pub use functionals::{
    equivalence_decomposition, lhs_discrete_blocks, lhs_main, lhs_sup, primitive, rhs_norm, EquivalenceBreakdown,
    TestFunction,
};
pub use quad::QuadConfig;
pub use weights::{classify_regime, dual_and_rho, parse_spec, sigma_p, Exponents, Regime, Sigma, WeightKind, WeightSpec};
pub use conditions::{
    combined_constant, compute_a, compute_b, compute_c_sup, compute_d, compute_f, conditions_report, hardy_block_constant,
    ConditionReport, Constant, Factor, Family,
};
pub use bestconst::{block_extremizer, estimate_best_constant, BestConstantEstimate, OptimizerConfig, Target};
