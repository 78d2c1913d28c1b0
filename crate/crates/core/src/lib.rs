//! Discretized nonlocal dispersal operators
//! `M_Ω[u] = ∫_Ω J((x−y)/g(y)) u(y)/gⁿ(y) dy + a(x)u`.
//!
//! The crate assembles the operator on uniform grids, computes its principal
//! eigenpair with certified Collatz–Wielandt brackets, checks the maximum
//! principle, and solves the associated KPP steady-state and evolution
//! problems.

// `!(x > 0.0)` also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod grid;
pub mod linalg;
pub mod maxprinciple;
pub mod operator;
pub mod profiles;
pub mod reaction;
pub mod spectral;

pub use error::{Error, Result};
pub use grid::{
    build_grid, exhaustion_sequence, integrate, shrink_domain, Domain, Geometry, Grid,
    MeasureWeights, UnboundedLine,
};
pub use operator::{
    assemble, column_mass_c, eval_kernel, kernel_floor_constants, rank_one_operator,
    sigma_and_sigma_prime, AssemblyOptions, NonlocalOperator,
};
pub use profiles::{CoefficientA, ContactProfile, DispersalG, KernelJ, KernelShape};
pub use spectral::{
    concentration_ratio, cw_bracket, exhaustion_lambda, existence_diagnostic, harnack_ratio,
    integrability_classifier, principal_eigenpair, rank_one_bisection, EigenOptions, EigenReport,
    ExistenceDiagnostic, ExistenceVerdict, Integrability, Problem,
};
