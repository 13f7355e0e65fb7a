//! Bound-state spectra of one-dimensional confining potentials and the sum
//! rules that tie eigenfunction values at nodes and extrema to integrals of
//! a single state.

pub mod eigensolver;
pub mod error;
pub mod export;
pub mod greenfn;
pub mod grid;
pub mod potential;
pub mod quadrature;
pub mod summation;
pub mod sumrules;
pub mod susy;
pub mod waveanalysis;

pub use eigensolver::{
    analytic_box_spectrum, analytic_sho_spectrum, analytic_spectrum, solve_numeric, BoundState,
    SolverOptions, Source, Spectrum,
};
pub use error::{Error, Result};
pub use greenfn::GKernel;
pub use grid::{build_grid, Grid};
pub use potential::{DomainKind, PotentialKind, PotentialSpec};
pub use summation::ConvergenceClass;
pub use sumrules::{AbelSchedule, RuleId, SumRuleReport};
pub use susy::PartnerProblem;
pub use waveanalysis::{CriticalKind, CriticalPoint};
