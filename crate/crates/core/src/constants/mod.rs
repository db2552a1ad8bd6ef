//! Monte Carlo estimation of Pickands and Piterbarg constants.

pub mod drift;
pub mod estimate;
pub mod ladder;
pub mod tabulate;

use serde::{Deserialize, Serialize};

pub use drift::{Drift, DriftSpec, PowerTerm, Side, UserDrift};
pub use estimate::{
    default_delta, piterbarg_estimate, piterbarg_family, piterbarg_family_values, CrnRequest, Estimator,
    McOptions, PiterbargProblem,
};
pub use ladder::{
    pickands_estimate, piterbarg_limit, piterbarg_limit_interval, piterbarg_ratio, LadderPolicy, PickandsPolicy,
    PiterbargRatio,
};
pub use tabulate::{default_cache_dir, table_csv, tabulate, TableRequest, TableRow, TableTarget, CACHE_ENV, SCHEMA_VERSION};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstantKind {
    Piterbarg,
    PiterbargLimit,
    Pickands,
}

/// One horizon of a convergence ladder.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LadderRung {
    pub s1: f64,
    pub s2: f64,
    /// The monitored quantity: the constant for Piterbarg ladders,
    /// `P[0, T] / T` for Pickands ladders.
    pub value: f64,
    pub std_error: f64,
}

/// Least-squares fit of `P[0, T]` against `T` over a Pickands ladder.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlopeDiagnostic {
    pub slope: f64,
    pub intercept: f64,
}

/// A Monte Carlo estimate of a Pickands or Piterbarg constant.
///
/// `s1, s2` is the finite interval actually simulated; limit constants also
/// carry `side` and the ladder that produced them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstantEstimate {
    pub kind: ConstantKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub side: Option<Side>,
    pub value: f64,
    pub std_error: f64,
    pub grid_step: f64,
    pub s1: f64,
    pub s2: f64,
    pub replicates: usize,
    pub batches: usize,
    pub alpha: Vec<f64>,
    pub a: Vec<f64>,
    pub drift: String,
    pub estimator: Estimator,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub ladder: Vec<LadderRung>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub slope: Option<SlopeDiagnostic>,
}
