//! Moment-matrix relaxation machinery for the noise-robust fidelity bound:
//! word algebra, problem assembly, a built-in dense semidefinite solver, and
//! the G(ε) curve.

pub mod curve;
pub mod problem;
pub mod solver;
pub mod word;

pub use curve::{g_curve, GCurve, GPoint};
pub use problem::{
    constraints_at, ghz_state, ideal_observables, objective_fidelity, MomentFunctional,
    ProblemDescription, SdpProblem, BASIS_SIZE,
};
pub use solver::{solve, SdpSolution, SolverOptions, SolverState};
pub use word::{build_basis, Letter, Polynomial, Word};
