//! Trace-lasso regularized L1-norm graph-cut (TL-L1GC) dimensionality
//! reduction for hyperspectral images, with an L2 scaling-cut baseline,
//! guided-filter preprocessing and an evaluation harness.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod baseline_sc;
pub mod dispersion;
pub mod error;
pub mod evaluation;
pub mod experiment;
pub mod guided_filter;
pub mod hsi_io;
pub mod linalg;
pub mod rng;
pub mod synth;
pub mod tl_solver;

pub use baseline_sc::{fit_sc, sc_objective, SCConfig};
pub use dispersion::{build_dispersions, build_scatter, DispersionSet, ScatterPair};
pub use error::{Error, Result, StageExt};
pub use evaluation::{
    predict_1nn, predict_svm, project, score, train_svm, ClassificationReport, ConfusionMatrix,
    SvmModel, SvmParams,
};
pub use experiment::{
    emit_report, run_experiment, run_experiment_on, Classifier, ExperimentConfig,
    ExperimentResult, Method,
};
pub use guided_filter::{compute_guide, guided_filter, GuidedFilterParams, Image};
pub use hsi_io::{HsiCube, LabelMap, LabeledDataset, SplitSpec};
pub use synth::{make_synthetic, SynthSpec};
pub use tl_solver::{fit, solve_direction, DirectionRecord, ProjectionMatrix, SolverConfig};
