//! Operating characteristics, sample-size search and allocation-ratio
//! optimization for single-stage and two-stage multi-arm trials sharing a
//! control arm, with a Monte Carlo simulator for cross-verification.

pub mod error;
pub mod kernel;
pub mod optimizer;
pub mod params;
pub mod sim;
pub mod single_stage;
pub mod two_stage;

pub use error::{Error, Result};
pub use kernel::{BisectionSpec, QuadratureSpec};
pub use optimizer::{
    OptimalRatioReport, RatioGrid, ReductionRow, Scenario, Stage, StageDesign, SweepRow,
    SweepTable,
};
pub use params::{OperatingTargets, TrialParams};
pub use sim::{MeanVector, SimEstimate, TwoStageEvent};
pub use single_stage::{DesignPoint, PowerEvaluation};
pub use two_stage::{TwoStageDesignPoint, TwoStageFormulation};
