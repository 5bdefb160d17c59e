//! Brute-force oracles, random instances, batch bound checks and curve data.

mod curves;
mod generate;
mod oracle;
mod verify;

use thiserror::Error;

use crate::model::ModelError;

pub use curves::{curve_table, CurveGrid, CurveKind, CurvePoint, CurveTable};
pub use generate::{random_instance, GeneratorConfig, Shape};
pub use oracle::{oracle_nash, oracle_optimal, NashOracle, OptimalOracle, OracleConfig};
pub use verify::{
    verify_bounds, verify_seed, BatchConfig, Certification, Status, VerificationEntry, VerificationReport,
    VerificationSummary, REPORT_HEADER,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum HarnessError {
    #[error("unsupported topology: {0}")]
    UnsupportedTopology(String),
    #[error("could not generate a connected instance in {attempts} attempts")]
    GenerationFailed { attempts: usize },
    #[error("unknown curve kind `{0}` (expected omega-vs-gamma, omega-vs-lambda, constraint-sets or poa-bounds)")]
    BadKind(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Fixed number formatting for reports: round to 12 significant digits,
/// then print the shortest string that reads back to the rounded value.
/// Infinities print as `inf` / `-inf`.
pub fn fmt_num(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let rounded: f64 = format!("{x:.11e}").parse().expect("formatted float parses");
    let s = format!("{rounded}");
    if s == "-0" {
        "0".into()
    } else {
        s
    }
}
