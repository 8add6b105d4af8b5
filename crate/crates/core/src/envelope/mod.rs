//! Rooftop envelopes for the one-dimensional SL branches and the
//! space-time Dirichlet solver built from them.

mod rooftop;
mod solver;
mod verify;

pub use rooftop::{convex_envelope_1d, rooftop_envelope, RooftopProblem};
pub use solver::{
    solve_dsl_dirichlet, BoundaryData, BoundaryJson, DomainJson, DslDirichletProblem, GridJson,
    ProblemJson, CORNER_TOL,
};
pub use verify::{
    extract_min_principle, node_aligned_slopes, slice_bound, verify_dsl_solution, AngleQuantiles,
    CertificateViolations, Certificates, DslVerification, MinPrincipleReport, CERT_TOL,
};
