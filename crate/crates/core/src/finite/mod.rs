//! Bi-stochastic Markov operators on a finite probability space.

pub mod cyclic;
pub mod deterministic;
pub mod norm;
pub mod operator;
pub mod spectral;

pub use cyclic::{
    communicating_classes, graph_period, period_and_classes, projection_ed, restrict, shifted_projection,
    CyclicDecomposition,
};
pub use deterministic::{deterministic_sets, CauchyCheck, DeterministicStructure, InvariantFamily, DEFAULT_N_LIMIT};
pub use norm::{
    exponent, l1_operator_norm, l2_operator_norm, matrix_norm, opnorm, opnorm_with, Constraint, NormEstimate,
    NormOptions,
};
pub use operator::{
    cycle, example2, identity, lazy_swap, matrix_power, random_block_cyclic, random_normal_cyclic, rank_one,
    support_graph, validate, weighted_norm, BlockCyclicOptions, FiniteOperator, Generator, OperatorSpec,
    ValidationReport, Violation, DEFAULT_TOLERANCE,
};
pub use spectral::{
    aperiodicity_certificate, convergence_rate, fit_rate, limit_residuals, threshold_l3, threshold_l4,
    unimodular_eigencheck, AperiodicityCertificate, CertificateTest, ConvergenceRate, LimitResiduals, RateFit,
    RootCheck, UnimodularReport,
};
