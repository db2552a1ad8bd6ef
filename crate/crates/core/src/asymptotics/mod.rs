//! Exact tail asymptotics `u^e * C * prod_i Psi(.)` and the limit laws of
//! the scaled ruin time.

pub mod local;
pub mod providers;
pub mod psi;
pub mod quad;
pub mod result;
pub mod ruin;
pub mod thm1;

pub use local::{
    chebyshev_rule, corollary1_ruin_time_cdf, corollary2_ruin_time_cdf, thm2_asymptotic, thm3_asymptotic, CdfValue,
    LocalCoord, LocalExpansion, Plateau, StationaryCoord, Thm3Kind, UniquePoint, PLATEAU_NODES,
};
pub use providers::{
    default_constants, deterministic_piterbarg, ClosedFormConstants, ConstantValue, ConstantsSource, Layered,
    MonteCarloConstants, Provenance,
};
pub use psi::{log_tail_psi, tail_psi};
pub use quad::{drift_integral, integrate, integrate_decaying, DriftIntegral, IntegralMethod};
pub use result::{AsymptoticResult, ConstantFactor, FactorKind, Model, Regime, TailArg};
pub use ruin::{prop1_ruin_asymptotic, prop1_ruin_time_cdf, RuinModel};
pub use thm1::{
    check_assumptions_thm1, thm1_asymptotic, AssumptionReport, Clause, ClauseStatus, Threshold, ThresholdCoord,
    ThresholdFamilySpec,
};
