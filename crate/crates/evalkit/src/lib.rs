//! Evaluation of transcript inference attacks: protocols, metrics, controls
//! and the analyses reported on top of them.

pub mod eval;
pub mod matched;
pub mod metrics;
pub mod pca;
pub mod report;
pub mod split;
pub mod stats;
pub mod tasks;

pub use eval::{
    ablation_grid, labels_for, matched_control, per_family_subtask_eval, run_cell, run_grid, sample_efficiency_sweep, Cell, CellResult,
    EvalReport, EvalSettings, MatchedReport, SubfamilyReport, SubfamilySummary, SweepPoint,
};
pub use split::{make_split, split_instance_disjoint, split_size_holdout, Protocol, Split, SplitSpec};
pub use tasks::{Task, HEADLINE_TASKS};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("split error: {0}")]
    Split(String),
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error("invalid input: {0}")]
    Input(String),
    #[error(transparent)]
    Learn(#[from] cutleak_learners::LearnError),
    #[error("{0}: {1}")]
    Context(String, Box<EvalError>),
}
