//! Flow solvers: shortest paths, the human (follower) Wardrop equilibrium
//! induced by a fixed leader flow, and the two-class system optimum.

mod assignment;
mod follower;
mod optimal;

use thiserror::Error;

use crate::model::{ClassFlow, GameInstance, ModelError, PathFlow};

pub use follower::{follower_equilibrium, follower_equilibrium_from, follower_potential};
pub use optimal::{block_gaps, system_optimal, system_optimal_from, system_optimal_with_starts};

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    /// Target relative gap.
    pub relative_gap_tol: f64,
    /// Iteration budget per solve (inner sweeps plus block rounds).
    pub max_iterations: usize,
    /// Number of starting points for the system optimum.
    pub multistart_count: usize,
    pub seed: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            relative_gap_tol: 1e-8,
            max_iterations: 50_000,
            multistart_count: 16,
            seed: 0,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<(), SolveError> {
        if self.relative_gap_tol.is_nan() || self.relative_gap_tol <= 0.0 {
            return Err(SolveError::InvalidConfig(format!(
                "relative gap tolerance must be positive (got {})",
                self.relative_gap_tol
            )));
        }
        if self.max_iterations == 0 || self.multistart_count == 0 {
            return Err(SolveError::InvalidConfig(
                "iteration and multistart counts must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EquilibriumResult<F> {
    pub flow: F,
    /// Potential for follower solves, social cost for the system optimum.
    pub objective: f64,
    pub relative_gap: f64,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolveError {
    #[error("follower equilibrium did not converge: gap {:.3e} after {} iterations", .0.relative_gap, .0.iterations)]
    FollowerNotConverged(Box<EquilibriumResult<PathFlow>>),
    #[error("system optimum did not converge: gap {:.3e} after {} iterations", .0.relative_gap, .0.iterations)]
    OptimumNotConverged(Box<EquilibriumResult<ClassFlow>>),
    #[error("start flow is infeasible: {0}")]
    InfeasibleStart(String),
    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShortestPath {
    /// Global path index.
    pub path: usize,
    pub latency: f64,
}

/// Minimum-latency path per O/D pair; ties go to the earliest path in
/// enumeration order.
pub fn shortest_paths(instance: &GameInstance, link_latencies: &[f64]) -> Vec<ShortestPath> {
    let costs = path_costs(instance, link_latencies);
    (0..instance.od_pairs().len())
        .map(|w| {
            let p = argmin(&costs, instance.paths().range(w));
            ShortestPath {
                path: p,
                latency: costs[p],
            }
        })
        .collect()
}

/// Relative Wardrop gap of human flow `t` against leader link flow `s`:
/// `(sum_p t_p e_p - sum_w D_w min_p e_p) / sum_p t_p e_p`, with `D_w` the
/// human demand of pair `w`. Zero when the human demand is zero.
pub fn wardrop_gap(instance: &GameInstance, s_links: &[f64], t: &PathFlow) -> Result<f64, SolveError> {
    check_link_vector(instance, s_links)?;
    if t.path.len() != instance.paths().len() {
        return Err(ModelError::DimensionMismatch {
            expected: instance.paths().len(),
            found: t.path.len(),
        }
        .into());
    }
    let latencies: Vec<f64> = instance
        .links()
        .iter()
        .enumerate()
        .map(|(l, link)| link.latency(s_links[l], t.link[l]))
        .collect();
    Ok(relative_gap(
        instance,
        &instance.human_demands(),
        &t.path,
        &path_costs(instance, &latencies),
    ))
}

pub(crate) fn check_link_vector(instance: &GameInstance, v: &[f64]) -> Result<(), ModelError> {
    if v.len() != instance.links().len() {
        return Err(ModelError::DimensionMismatch {
            expected: instance.links().len(),
            found: v.len(),
        });
    }
    match v.iter().find(|x| !x.is_finite() || **x < 0.0) {
        Some(&bad) => Err(ModelError::NegativeFlow(bad)),
        None => Ok(()),
    }
}

pub(crate) fn path_costs(instance: &GameInstance, link_costs: &[f64]) -> Vec<f64> {
    instance
        .paths()
        .paths()
        .iter()
        .map(|p| p.links.iter().map(|&l| link_costs[l]).sum())
        .collect()
}

pub(crate) fn argmin(costs: &[f64], range: std::ops::Range<usize>) -> usize {
    let mut best = range.start;
    for p in range {
        if costs[p] < costs[best] {
            best = p;
        }
    }
    best
}

pub(crate) fn relative_gap(
    instance: &GameInstance,
    demands: &[f64],
    path_flows: &[f64],
    costs: &[f64],
) -> f64 {
    let mut total = 0.0;
    let mut shortest = 0.0;
    for (w, &d) in demands.iter().enumerate() {
        let range = instance.paths().range(w);
        let min = costs[argmin(costs, range.clone())];
        shortest += d * min;
        total += range.map(|p| path_flows[p] * costs[p]).sum::<f64>();
    }
    if total <= 0.0 {
        return 0.0;
    }
    ((total - shortest) / total).clamp(0.0, 1.0)
}

/// All demand of each pair on its cheapest path.
pub(crate) fn all_or_nothing(instance: &GameInstance, demands: &[f64], costs: &[f64]) -> Vec<f64> {
    let mut flows = vec![0.0; instance.paths().len()];
    for (w, &d) in demands.iter().enumerate() {
        flows[argmin(costs, instance.paths().range(w))] += d;
    }
    flows
}
