//! End-to-end workflows: simulate, build a dataset, train, run and evaluate.

mod config;
mod pipeline;
mod steps;

pub use config::{ExperimentConfig, TrainingSetConfig, WorldConfig};
pub use pipeline::{
    binary_metrics, channel_files, evaluate_runs, gt_eval_frames, labelled_features, model_metrics, pred_eval_frames,
    ref_features, render_scenario, run_scenario, scenario_refs, scenario_seed, stack, train_model, window_features,
    BinaryMetrics, Objective, RenderedScenario, TrainedModel,
};
pub use steps::*;
