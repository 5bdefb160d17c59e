//! Leader and follower play under the mixed-autonomy SCALE strategy.
//!
//! The leader routes an `alpha` share of the system-optimal total flow of
//! every path with autonomous vehicles; the remaining human demand then
//! settles into a Wardrop equilibrium on top of it.

use thiserror::Error;

use crate::equilibria::{
    follower_equilibrium, system_optimal, system_optimal_with_starts, wardrop_gap,
    EquilibriumResult, SolveError, SolverConfig,
};
use crate::model::{social_cost_links, ClassFlow, GameInstance, ModelError, PathFlow};

/// Denominators at or below this are treated as zero in link measurements.
pub const DEGENERATE_TOL: f64 = 1e-12;

/// Upper limit on re-solves of the optimum seeded with an induced flow that
/// beat it.
const MAX_REPAIR_ROUNDS: usize = 5;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GameError {
    #[error("alpha = {0} must lie in (0, 1)")]
    AlphaOutOfRange(f64),
    #[error("O/D pairs have different autonomy fractions; play needs a uniform alpha")]
    HeterogeneousAlpha,
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// SCALE leader flow: `s_p = alpha (fa*_p + fh*_p)` on every path.
pub fn scale_strategy(
    instance: &GameInstance,
    optimal: &ClassFlow,
    alpha: f64,
) -> Result<PathFlow, GameError> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(GameError::AlphaOutOfRange(alpha));
    }
    let totals = optimal.path_totals();
    if totals.len() != instance.paths().len() {
        return Err(ModelError::DimensionMismatch {
            expected: instance.paths().len(),
            found: totals.len(),
        }
        .into());
    }
    let s = totals.into_iter().map(|f| alpha * f).collect();
    Ok(PathFlow::from_paths(instance, s)?)
}

#[derive(Debug, Clone, PartialEq)]
pub struct StackelbergOutcome {
    pub alpha: f64,
    pub optimal_flow: ClassFlow,
    pub leader_flow: PathFlow,
    pub follower_flow: PathFlow,
    pub optimal_cost: f64,
    pub induced_cost: f64,
    pub empirical_poa: f64,
    /// Wardrop gap of the follower flow, recomputed from scratch.
    pub wardrop_gap: f64,
    /// Larger of the two block gaps at the returned optimum.
    pub optimum_gap: f64,
    /// The optimum solver reached its gap tolerance (block-stationary).
    pub optimum_certified: bool,
    pub follower_converged: bool,
    /// Extra optimum solves triggered by an induced flow cheaper than the
    /// optimum found so far.
    pub repair_rounds: usize,
}

impl StackelbergOutcome {
    pub fn converged(&self) -> bool {
        self.optimum_certified && self.follower_converged
    }
}

fn optimum_or_partial(
    r: Result<EquilibriumResult<ClassFlow>, SolveError>,
) -> Result<EquilibriumResult<ClassFlow>, GameError> {
    match r {
        Ok(r) => Ok(r),
        Err(SolveError::OptimumNotConverged(r)) => Ok(*r),
        Err(e) => Err(e.into()),
    }
}

fn follower_or_partial(
    r: Result<EquilibriumResult<PathFlow>, SolveError>,
) -> Result<EquilibriumResult<PathFlow>, GameError> {
    match r {
        Ok(r) => Ok(r),
        Err(SolveError::FollowerNotConverged(r)) => Ok(*r),
        Err(e) => Err(e.into()),
    }
}

/// Solve the optimum, build the SCALE leader flow, and let the human demand
/// equilibrate against it.
///
/// Non-convergence of either stage is reported through
/// [`StackelbergOutcome::optimum_certified`] and
/// [`StackelbergOutcome::follower_converged`] rather than as an error.
pub fn play(instance: &GameInstance, config: &SolverConfig) -> Result<StackelbergOutcome, GameError> {
    config.validate()?;
    let alpha = instance.uniform_alpha().ok_or(GameError::HeterogeneousAlpha)?;
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(GameError::AlphaOutOfRange(alpha));
    }

    let mut optimum = optimum_or_partial(system_optimal(instance, config))?;
    let mut repair_rounds = 0;
    loop {
        let s = scale_strategy(instance, &optimum.flow, alpha)?;
        let follower = follower_or_partial(follower_equilibrium(instance, &s.link, config))?;
        let induced_cost = social_cost_links(instance, &s.link, &follower.flow.link);

        // The induced pair (s, t) is itself a feasible two-class flow. If it
        // is cheaper, the optimum was only local: restart from it.
        if induced_cost < optimum.objective && repair_rounds < MAX_REPAIR_ROUNDS {
            repair_rounds += 1;
            let seed = ClassFlow {
                autonomous: s.clone(),
                human: follower.flow.clone(),
            };
            let candidate = optimum_or_partial(system_optimal_with_starts(instance, config, &[seed]))?;
            if candidate.objective < optimum.objective {
                optimum = candidate;
                continue;
            }
        }

        let gap = wardrop_gap(instance, &s.link, &follower.flow)?;
        let empirical_poa = if optimum.objective > 0.0 {
            induced_cost / optimum.objective
        } else {
            1.0
        };
        return Ok(StackelbergOutcome {
            alpha,
            optimal_cost: optimum.objective,
            optimum_gap: optimum.relative_gap,
            optimum_certified: optimum.converged,
            optimal_flow: optimum.flow,
            leader_flow: s,
            follower_flow: follower.flow,
            induced_cost,
            empirical_poa,
            wardrop_gap: gap,
            follower_converged: follower.converged,
            repair_rounds,
        });
    }
}

/// Per-link ratios of a played game; `None` where the ratio's denominator
/// is (numerically) zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkRatios {
    /// Optimal total flow over induced total flow.
    pub gamma: Option<f64>,
    /// Relative latency drop from the induced flow to the optimal flow.
    pub beta: Option<f64>,
    /// Autonomous share of the optimal flow on the link.
    pub alpha_star: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinkMeasurement {
    pub links: Vec<LinkRatios>,
}

pub fn measure_links(outcome: &StackelbergOutcome, instance: &GameInstance) -> LinkMeasurement {
    let opt = &outcome.optimal_flow;
    let links = instance
        .links()
        .iter()
        .enumerate()
        .map(|(l, link)| {
            let (fa, fh) = (opt.autonomous.link[l], opt.human.link[l]);
            let (s, t) = (outcome.leader_flow.link[l], outcome.follower_flow.link[l]);
            let optimal_total = fa + fh;
            let induced_total = s + t;
            let induced_latency = link.latency(s, t);
            LinkRatios {
                gamma: (induced_total > DEGENERATE_TOL).then(|| optimal_total / induced_total),
                beta: (induced_latency > DEGENERATE_TOL)
                    .then(|| (induced_latency - link.latency(fa, fh)) / induced_latency),
                alpha_star: (optimal_total > DEGENERATE_TOL).then(|| fa / optimal_total),
            }
        })
        .collect();
    LinkMeasurement { links }
}
