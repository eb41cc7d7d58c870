//! Abel-limit analysis: `Λ_p = lim_{z→0} z(I − (1−z)B_p)⁻¹`, limiting
//! acceptance, and the dead/live split of the state space.

pub mod accept;
pub mod lambda;
pub mod subspace;
pub mod zpoly;

pub use accept::{
    cesaro_accept, cesaro_finite_average, limit_report_with, limit_vector, limit_vector_with, limiting_accept, limiting_accept_with, LimitReport,
};
pub use lambda::{
    lambda_limit, lambda_limit_with, lambda_z, Analyzable, Diagnostics, FixedPointOperator, FloatMethod, LimitConfig, LimitSolution,
    Provenance,
};
pub use subspace::{dead_subspace, dead_subspace_at, leaky_check, live_prob, LeakyResult, SubspaceReport};
