//! Spectral flow, rho invariants and Chern–Simons invariants of flat SU(2) representations
//! of finitely presented 3-manifold groups, from exact algebraic input.

pub mod chern_simons;
pub mod cohomology;
pub mod fixtures;
pub mod linalg;
pub mod plan;
pub mod poly;
pub mod quat;
pub mod rational;
pub mod report;
pub mod reps;
pub mod rho;
pub mod signatures;
pub mod spectral_flow;
pub mod words;

pub use chern_simons::{kirk_klassen_cs, longitude_path, BoundaryPath, CSValue, Piecewise};
pub use cohomology::{cohomology_summary, dim_z1, restriction_cokernel, rho_constancy_certificate, CohomologySummary, LocalSystem};
pub use plan::{parse_plan, run_plan, ComputationPlan, PlanError, TaskError};
pub use quat::{ad, trace_ad_minus_3, Axis, ExactCircleElement, Quaternion, UnitQuaternion};
pub use rational::{rationalize, Rational};
pub use report::{emit_report, Format, Report};
pub use reps::{Representation, RepresentationPath};
pub use rho::{rho_finite_image, rho_lens_space, CobordismStep, RhoValue};
pub use signatures::{signature, HermitianForm, SeifertMatrix, SymmetricForm};
pub use spectral_flow::{spectral_flow, SpectralFlowInput, SpectralFlowResult};
pub use words::{fox_derivative, parse_word, GroupPresentation, Word};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Rational(#[from] rational::RationalError),
    #[error(transparent)]
    Linalg(#[from] linalg::LinalgError),
    #[error(transparent)]
    Quat(#[from] quat::QuatError),
    #[error(transparent)]
    Word(#[from] words::WordError),
    #[error(transparent)]
    Rep(#[from] reps::RepError),
    #[error(transparent)]
    Cohomology(#[from] cohomology::CohomologyError),
    #[error(transparent)]
    Signature(#[from] signatures::SignatureError),
    #[error(transparent)]
    Rho(#[from] rho::RhoError),
    #[error(transparent)]
    Cs(#[from] chern_simons::CsError),
    #[error(transparent)]
    SpectralFlow(#[from] spectral_flow::SpectralFlowError),
    #[error(transparent)]
    Plan(#[from] PlanError),
    #[error(transparent)]
    Task(#[from] TaskError),
}
