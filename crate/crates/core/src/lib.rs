//! Generalized score matching estimation for probability models on the
//! non-negative orthant.
//!
//! The crate assembles the quadratic score-matching loss for pairwise
//! interaction power models, solves its l1-regularized, diagonally
//! amplified form by symmetric coordinate descent, and provides the
//! surrounding machinery: truncated-normal and general Gibbs samplers,
//! univariate efficiency studies, eBIC model selection, and ROC/AUC
//! edge-recovery experiments.

pub mod copositivity;
pub mod error;
pub mod evaluation;
pub mod experiment;
pub mod hfun;
pub mod loss;
pub mod model;
pub mod normal;
pub mod quad;
pub mod sampling;
pub mod selection;
pub mod solver;
pub mod univariate;

pub use copositivity::{is_strictly_copositive, Copositivity, CopositivityConfig};
pub use error::{Error, Result};
pub use evaluation::{
    confusion, population_diagnostics, roc_from_path, vertical_average, DiagnosticsReport,
    RocCurve,
};
pub use experiment::{run_roc_experiment, ExperimentSpec, RocExperimentResult};
pub use hfun::{h_admissible, Admissibility, HSpec};
pub use loss::{
    amplify, assemble_gaussian_full_support, assemble_pairwise, assemble_truncated_gaussian,
    back_transform_estimate, direct_sample_loss, multiplier_upper_bound, profile_out_eta,
    AmplifierMode, AmplifierScope, AmplifierSpec, LossBlock, LossLayout, MultiplierFamily,
    QuadraticLoss,
};
pub use model::{
    check_normalizable, log_density_unnorm, Dataset, InteractionParams, ModelSpec,
    Normalizability,
};
pub use quad::QuadratureConfig;
pub use sampling::{
    generate_k0, sample_pairwise_gibbs, sample_tn_gibbs, sample_truncated_normal_uni, trial_rng,
    GibbsConfig, GraphScheme, GraphSpec,
};
pub use selection::{ebic, refit, select, EbicScore};
pub use solver::{
    closed_form, coordinate_descent, default_lambda_grid, kernel_unbounded_direction,
    kkt_max_violation, log_spaced_grid, soft_threshold, solve_path, Estimate, EstimatePath,
    SolverConfig, UnboundedDirection,
};
pub use univariate::{
    asymptotic_variance, cramer_rao, estimate_mu, estimate_sigma2, run_study, StudyRow,
    UnivariateStudy, UnivariateTarget,
};
