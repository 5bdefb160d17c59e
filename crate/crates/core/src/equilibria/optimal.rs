//! Two-class system optimum.
//!
//! The social cost `sum_l (fa + fh)(a fa + h fh + b)` has per-link Hessian
//! `[[2a, a+h], [a+h, 2h]]` with determinant `-(a-h)^2`, so it is not jointly
//! convex once `a != h`. It is strictly convex in each class separately, so
//! we alternate exact block solves and keep the best of several starts.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::assignment::{assign, Quadratic};
use super::{all_or_nothing, path_costs, EquilibriumResult, SolveError, SolverConfig};
use crate::model::{check_feasibility, social_cost, ClassFlow, GameInstance, PathFlow};

// Block of the autonomous class with human link flows `fh` held fixed.
// Gradient per link: 2a fa + (a+h) fh + b.
fn autonomous_block(instance: &GameInstance, fh: &[f64]) -> Quadratic {
    let links = instance.links();
    Quadratic {
        slope: links.iter().map(|l| 2.0 * l.a).collect(),
        offset: links
            .iter()
            .zip(fh)
            .map(|(l, fh)| (l.a + l.h) * fh + l.b)
            .collect(),
    }
}

fn human_block(instance: &GameInstance, fa: &[f64]) -> Quadratic {
    let links = instance.links();
    Quadratic {
        slope: links.iter().map(|l| 2.0 * l.h).collect(),
        offset: links
            .iter()
            .zip(fa)
            .map(|(l, fa)| (l.a + l.h) * fa + l.b)
            .collect(),
    }
}

/// Relative gaps `(autonomous, human)` of the two class blocks of the social
/// cost at `flow`. Both zero exactly at a stationary point.
pub fn block_gaps(instance: &GameInstance, flow: &ClassFlow) -> (f64, f64) {
    let qa = autonomous_block(instance, &flow.human.link);
    let qh = human_block(instance, &flow.autonomous.link);
    (
        qa.gap(instance, &instance.autonomous_demands(), &flow.autonomous),
        qh.gap(instance, &instance.human_demands(), &flow.human),
    )
}

/// Block-coordinate descent from a single feasible start.
pub fn system_optimal_from(
    instance: &GameInstance,
    start: ClassFlow,
    config: &SolverConfig,
) -> Result<EquilibriumResult<ClassFlow>, SolveError> {
    config.validate()?;
    let report = check_feasibility(instance, &start);
    if !report.feasible {
        return Err(SolveError::InfeasibleStart(format!(
            "demand residuals {:?}",
            report.residuals
        )));
    }
    let result = descend(instance, start, config);
    if result.converged {
        Ok(result)
    } else {
        Err(SolveError::OptimumNotConverged(Box::new(result)))
    }
}

/// Best block-stationary flow over the default set of starting points.
pub fn system_optimal(
    instance: &GameInstance,
    config: &SolverConfig,
) -> Result<EquilibriumResult<ClassFlow>, SolveError> {
    system_optimal_with_starts(instance, config, &[])
}

/// As [`system_optimal`], with caller-supplied starts tried after the
/// default ones.
pub fn system_optimal_with_starts(
    instance: &GameInstance,
    config: &SolverConfig,
    extra: &[ClassFlow],
) -> Result<EquilibriumResult<ClassFlow>, SolveError> {
    config.validate()?;
    for start in extra {
        if !check_feasibility(instance, start).feasible {
            return Err(SolveError::InfeasibleStart(
                "supplied start violates demand conservation".into(),
            ));
        }
    }
    let mut best: Option<EquilibriumResult<ClassFlow>> = None;
    let starts = default_starts(instance, config).into_iter().chain(extra.iter().cloned());
    for start in starts {
        let r = descend(instance, start, config);
        let better = match &best {
            None => true,
            Some(b) => (r.converged && !b.converged) || (r.converged == b.converged && r.objective < b.objective),
        };
        if better {
            best = Some(r);
        }
    }
    let best = best.expect("at least one start");
    if best.converged {
        Ok(best)
    } else {
        Err(SolveError::OptimumNotConverged(Box::new(best)))
    }
}

fn descend(instance: &GameInstance, start: ClassFlow, config: &SolverConfig) -> EquilibriumResult<ClassFlow> {
    let tol = config.relative_gap_tol;
    let inner_tol = 0.1 * tol;
    let da = instance.autonomous_demands();
    let dh = instance.human_demands();
    let mut flow = start;
    let mut used = 0usize;

    let (mut gap_a, mut gap_h) = block_gaps(instance, &flow);
    while gap_a.max(gap_h) > tol && used < config.max_iterations {
        let budget = config.max_iterations - used;
        let qa = autonomous_block(instance, &flow.human.link);
        let ra = assign(instance, &da, &qa, flow.autonomous, inner_tol, budget);
        flow.autonomous = ra.flow;
        used += ra.iterations;

        let budget = config.max_iterations.saturating_sub(used).max(1);
        let qh = human_block(instance, &flow.autonomous.link);
        let rh = assign(instance, &dh, &qh, flow.human, inner_tol, budget);
        flow.human = rh.flow;
        used += rh.iterations + 1;

        (gap_a, gap_h) = block_gaps(instance, &flow);
    }

    let gap = gap_a.max(gap_h);
    EquilibriumResult {
        objective: social_cost(instance, &flow),
        flow,
        relative_gap: gap,
        iterations: used,
        converged: gap <= tol,
    }
}

// All-or-nothing at free flow, an even split, then seeded random vertices
// and random interior points of the demand polytope.
fn default_starts(instance: &GameInstance, config: &SolverConfig) -> Vec<ClassFlow> {
    let da = instance.autonomous_demands();
    let dh = instance.human_demands();
    let free_flow: Vec<f64> = instance.links().iter().map(|l| l.b).collect();
    let costs = path_costs(instance, &free_flow);
    let mut starts = vec![build(
        instance,
        all_or_nothing(instance, &da, &costs),
        all_or_nothing(instance, &dh, &costs),
    )];

    let even = |d: &[f64]| {
        let mut f = vec![0.0; instance.paths().len()];
        for (w, &dw) in d.iter().enumerate() {
            let r = instance.paths().range(w);
            let share = dw / r.len() as f64;
            f[r].iter_mut().for_each(|x| *x = share);
        }
        f
    };
    if config.multistart_count > 1 {
        starts.push(build(instance, even(&da), even(&dh)));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut random = |d: &[f64], vertex: bool| {
        let mut f = vec![0.0; instance.paths().len()];
        for (w, &dw) in d.iter().enumerate() {
            let r = instance.paths().range(w);
            if vertex {
                f[rng.gen_range(r)] = dw;
            } else {
                let weights: Vec<f64> = r.clone().map(|_| -rng.gen::<f64>().max(1e-300).ln()).collect();
                let total: f64 = weights.iter().sum();
                for (p, wt) in r.zip(weights) {
                    f[p] = dw * wt / total;
                }
            }
        }
        f
    };
    for i in 2..config.multistart_count {
        let vertex = i % 2 == 0;
        let fa = random(&da, vertex);
        let fh = random(&dh, vertex);
        starts.push(build(instance, fa, fh));
    }
    starts
}

fn build(instance: &GameInstance, fa: Vec<f64>, fh: Vec<f64>) -> ClassFlow {
    ClassFlow {
        autonomous: PathFlow::from_paths(instance, fa).expect("nonnegative start"),
        human: PathFlow::from_paths(instance, fh).expect("nonnegative start"),
    }
}
