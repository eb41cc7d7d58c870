//! Exact rational-function fits, real root isolation and the transition
//! atlas.

pub mod atlas;
pub mod poly;
pub mod ratfn;
pub mod roots;

pub use atlas::{atlas_from_functions, build_advice, build_atlas, replay_advice, AdviceRecord, AlgebraicValue, TransitionAtlas};
pub use poly::Poly;
pub use ratfn::{fit_rational, fit_values, interior_poles, threshold_poly, validation_points, RationalFunction};
pub use roots::{count_roots, isolate_roots, mahler_bound, min_separation, real_roots, sturm_chain, RootInterval, Separation};
