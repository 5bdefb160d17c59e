//! Batch comparison of played games against the closed-form bound.

use std::fmt;

use rayon::prelude::*;

use super::generate::{random_instance, GeneratorConfig, Shape};
use super::oracle::{oracle_optimal, OracleConfig};
use super::{fmt_num, HarnessError};
use crate::bounds::{poa_bound, Region};
use crate::equilibria::SolverConfig;
use crate::game::{play, StackelbergOutcome};
use crate::model::min_asymmetry;

pub const REPORT_HEADER: &str = "seed,alpha,mu,poa_emp,poa_bound,region,margin,certified,status";

/// Slack on both sides of `1 <= PoA <= bound`.
pub const POA_TOL: f64 = 1e-6;

/// Largest allowed distance between the solver's optimal cost and the grid
/// oracle's for the optimum to count as oracle-certified.
pub const ORACLE_COST_TOL: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Certification {
    /// Matches a brute-force grid optimum.
    Oracle,
    /// Block-stationary point of the optimum solver.
    Local,
    None,
}

impl Certification {
    pub fn label(self) -> &'static str {
        match self {
            Certification::Oracle => "oracle",
            Certification::Local => "local",
            Certification::None => "no",
        }
    }

    pub fn is_certified(self) -> bool {
        self != Certification::None
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    /// Bound is infinite; nothing to check.
    Vacuous,
    /// Optimum or follower not trusted; excluded from pass/fail.
    Uncertified,
    /// Generation or solving raised an error.
    Error,
}

impl Status {
    pub fn label(self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Vacuous => "vacuous",
            Status::Uncertified => "uncertified",
            Status::Error => "error",
        }
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerificationEntry {
    pub seed: u64,
    pub alpha: f64,
    pub mu: f64,
    pub poa_emp: f64,
    pub poa_bound: f64,
    pub region: Option<Region>,
    pub certified: Certification,
    pub status: Status,
    /// Wardrop gap of the follower flow, when the game was played.
    pub wardrop_gap: Option<f64>,
    pub follower_converged: bool,
    /// Error text for `Status::Error`.
    pub detail: Option<String>,
}

impl VerificationEntry {
    pub fn margin(&self) -> f64 {
        self.poa_bound - self.poa_emp
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{}",
            self.seed,
            fmt_num(self.alpha),
            fmt_num(self.mu),
            fmt_num(self.poa_emp),
            fmt_num(self.poa_bound),
            self.region.map_or("none", Region::label),
            fmt_num(self.margin()),
            self.certified.label(),
            self.status.label()
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BatchConfig {
    pub first_seed: u64,
    pub count: usize,
    pub generator: GeneratorConfig,
    pub solver: SolverConfig,
    /// Grid-certify parallel-link instances.
    pub oracle: Option<OracleConfig>,
    pub jobs: usize,
}

impl Default for BatchConfig {
    fn default() -> Self {
        Self {
            first_seed: 0,
            count: 200,
            generator: GeneratorConfig::default(),
            solver: SolverConfig::default(),
            oracle: Some(OracleConfig::default()),
            jobs: 1,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct VerificationSummary {
    pub total: usize,
    pub pass: usize,
    pub fail: usize,
    pub vacuous: usize,
    pub uncertified: usize,
    pub error: usize,
    pub max_poa: f64,
    /// Smallest `bound - PoA` over passing entries.
    pub min_margin: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerificationReport {
    /// Ordered by seed.
    pub entries: Vec<VerificationEntry>,
}

impl VerificationReport {
    pub fn summary(&self) -> VerificationSummary {
        let mut s = VerificationSummary {
            total: self.entries.len(),
            max_poa: f64::NAN,
            min_margin: f64::INFINITY,
            ..Default::default()
        };
        for e in &self.entries {
            match e.status {
                Status::Pass => {
                    s.pass += 1;
                    s.min_margin = s.min_margin.min(e.margin());
                }
                Status::Fail => s.fail += 1,
                Status::Vacuous => s.vacuous += 1,
                Status::Uncertified => s.uncertified += 1,
                Status::Error => s.error += 1,
            }
            if e.poa_emp.is_finite() {
                s.max_poa = if s.max_poa.is_nan() { e.poa_emp } else { s.max_poa.max(e.poa_emp) };
            }
        }
        s
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(REPORT_HEADER);
        out.push('\n');
        for e in &self.entries {
            out.push_str(&e.csv_row());
            out.push('\n');
        }
        out
    }
}

/// Generate, play and check one seed.
pub fn verify_seed(seed: u64, config: &BatchConfig) -> VerificationEntry {
    let mut entry = VerificationEntry {
        seed,
        alpha: f64::NAN,
        mu: f64::NAN,
        poa_emp: f64::NAN,
        poa_bound: f64::NAN,
        region: None,
        certified: Certification::None,
        status: Status::Error,
        wardrop_gap: None,
        follower_converged: false,
        detail: None,
    };
    let instance = match random_instance(seed, &config.generator) {
        Ok(g) => g,
        Err(e) => {
            entry.detail = Some(e.to_string());
            return entry;
        }
    };
    let solver = SolverConfig {
        seed,
        ..config.solver.clone()
    };
    let played = play(&instance, &solver)
        .map_err(|e| e.to_string())
        .and_then(|out| {
            let mu = min_asymmetry(&instance).map_err(|e| e.to_string())?;
            let bound = poa_bound(out.alpha, mu).map_err(|e| e.to_string())?;
            Ok((out, mu, bound))
        });
    let (out, mu, bound) = match played {
        Ok(v) => v,
        Err(e) => {
            entry.detail = Some(e);
            return entry;
        }
    };

    entry.alpha = out.alpha;
    entry.mu = mu;
    entry.poa_emp = out.empirical_poa;
    entry.poa_bound = bound.bound.value();
    entry.region = Some(bound.region);
    entry.wardrop_gap = Some(out.wardrop_gap);
    entry.follower_converged = out.follower_converged;
    entry.certified = certify(&instance, &out, config);

    entry.status = if !bound.bound.is_finite() {
        Status::Vacuous
    } else if !entry.certified.is_certified() || !out.follower_converged {
        Status::Uncertified
    } else if entry.poa_emp >= 1.0 - POA_TOL && entry.poa_emp <= entry.poa_bound + POA_TOL {
        Status::Pass
    } else {
        Status::Fail
    };
    entry
}

fn certify(
    instance: &crate::model::GameInstance,
    out: &StackelbergOutcome,
    config: &BatchConfig,
) -> Certification {
    if !out.optimum_certified {
        return Certification::None;
    }
    match (&config.oracle, config.generator.shape) {
        (Some(oracle), Shape::Parallel) => match oracle_optimal(instance, oracle) {
            Ok(o) if (out.optimal_cost - o.cost).abs() <= ORACLE_COST_TOL => Certification::Oracle,
            Ok(_) => Certification::None,
            Err(_) => Certification::Local,
        },
        _ => Certification::Local,
    }
}

/// Run a batch of seeds, `jobs` at a time. Entries come back in seed order
/// regardless of scheduling.
pub fn verify_bounds(config: &BatchConfig) -> Result<VerificationReport, HarnessError> {
    if config.jobs == 0 {
        return Err(HarnessError::InvalidConfig("jobs must be at least 1".into()));
    }
    let seeds: Vec<u64> = (0..config.count as u64).map(|i| config.first_seed + i).collect();
    let entries = if config.jobs == 1 {
        seeds.iter().map(|&s| verify_seed(s, config)).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(config.jobs)
            .build()
            .map_err(|e| HarnessError::InvalidConfig(e.to_string()))?;
        pool.install(|| seeds.par_iter().map(|&s| verify_seed(s, config)).collect())
    };
    Ok(VerificationReport { entries })
}
