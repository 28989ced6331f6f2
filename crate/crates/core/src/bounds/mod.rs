//! Fisher information and lower bounds on the extrapolated-channel MSE.

mod fisher;
mod lower_bound;
mod separation;

pub use fisher::{build_fisher, g_vector, g_vectors, FisherMatrix, ParamKind, ParameterLayout};
pub use lower_bound::{
    full_lb, full_lb_with, simplified_for, simplified_lb_simo, simplified_lb_siso, BoundCurve, BoundOptions,
};
pub use separation::{separation_report, PairSeparation, PathSymmetry, SeparationReport};
