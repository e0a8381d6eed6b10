//! Dense linear-programming kernel.
//!
//! Problems are stated as
//!
//! ```text
//! minimize    cᵀw
//! subject to  A w  = b
//!             G w >= h
//!             w_j >= 0   for j not in free_vars
//! ```
//!
//! and solved by a two-phase tableau simplex with Bland's least-index rule.
//! Every outcome carries a certificate: primal and dual vectors at an
//! optimum, a Farkas vector when infeasible, a feasible point plus an
//! improving ray when unbounded.

mod dump;
mod problem;
mod simplex;
mod vertices;

pub use dump::{dump_problems, write_problem};
pub use problem::{LpBuilder, LpOutcome, LpProblem, LpStatus};
pub use simplex::{feasible_point, solve};
pub use vertices::{enumerate_extreme_rays, enumerate_vertices, MAX_ENUMERATION_VARS};
