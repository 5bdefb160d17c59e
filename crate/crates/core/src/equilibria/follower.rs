use super::assignment::{assign, Quadratic};
use super::{all_or_nothing, check_link_vector, path_costs, EquilibriumResult, SolveError, SolverConfig};
use crate::model::{GameInstance, PathFlow, FEASIBILITY_TOL};

// Beckmann potential of the human class with the leader flow held fixed:
// sum_l h_l t_l^2 / 2 + (a_l s_l + b_l) t_l. Its gradient is the link latency.
fn potential(instance: &GameInstance, s_links: &[f64]) -> Quadratic {
    Quadratic {
        slope: instance.links().iter().map(|l| l.h).collect(),
        offset: instance
            .links()
            .iter()
            .zip(s_links)
            .map(|(l, s)| l.a * s + l.b)
            .collect(),
    }
}

/// Value of the follower potential at human flow `t`.
pub fn follower_potential(instance: &GameInstance, s_links: &[f64], t: &PathFlow) -> f64 {
    potential(instance, s_links).value(&t.link)
}

/// Human Wardrop equilibrium induced by leader link flows `s_links`, started
/// from the all-or-nothing assignment at the leader-only latencies.
pub fn follower_equilibrium(
    instance: &GameInstance,
    s_links: &[f64],
    config: &SolverConfig,
) -> Result<EquilibriumResult<PathFlow>, SolveError> {
    check_link_vector(instance, s_links)?;
    let q = potential(instance, s_links);
    let demands = instance.human_demands();
    let start = all_or_nothing(instance, &demands, &path_costs(instance, &q.offset));
    let start = PathFlow::from_paths(instance, start)?;
    follower_equilibrium_from(instance, s_links, start, config)
}

/// As [`follower_equilibrium`], from a caller-supplied feasible human flow.
pub fn follower_equilibrium_from(
    instance: &GameInstance,
    s_links: &[f64],
    start: PathFlow,
    config: &SolverConfig,
) -> Result<EquilibriumResult<PathFlow>, SolveError> {
    config.validate()?;
    check_link_vector(instance, s_links)?;
    let start = PathFlow::from_paths(instance, start.path)?;
    let demands = instance.human_demands();
    for (w, d) in demands.iter().enumerate() {
        let routed = start.od_total(instance, w);
        if (routed - d).abs() > FEASIBILITY_TOL {
            return Err(SolveError::InfeasibleStart(format!(
                "start flow routes {routed} on pair {w}, human demand is {d}"
            )));
        }
    }

    let q = potential(instance, s_links);
    let run = assign(
        instance,
        &demands,
        &q,
        start,
        config.relative_gap_tol,
        config.max_iterations,
    );
    let result = EquilibriumResult {
        objective: q.value(&run.flow.link),
        flow: run.flow,
        relative_gap: run.gap,
        iterations: run.iterations,
        converged: run.converged,
    };
    if result.converged {
        Ok(result)
    } else {
        Err(SolveError::FollowerNotConverged(Box::new(result)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equilibria::wardrop_gap;
    use crate::model::fixtures::*;
    use crate::model::ModelError;

    fn pigou(alpha: f64) -> GameInstance {
        parallel(&[(1.0, 1.0, 0.0), (1e-3, 1e-3, 1.0)], 1.0, alpha)
    }

    /// Grid search over the human split on two parallel links: the point with
    /// the smallest latency difference between used and unused links.
    fn two_link_grid_oracle(g: &GameInstance, s: &[f64], demand: f64, step: f64) -> (f64, f64) {
        let lat = |l: usize, t: f64| g.links()[l].latency(s[l], t);
        let n = (demand / step).round() as usize;
        let mut best = (f64::INFINITY, 0.0);
        for i in 0..=n {
            let t1 = demand * i as f64 / n as f64;
            let t2 = demand - t1;
            let (e1, e2) = (lat(0, t1), lat(1, t2));
            let violation = if t1 > 0.0 && t2 > 0.0 {
                (e1 - e2).abs()
            } else if t1 > 0.0 {
                (e1 - e2).max(0.0)
            } else {
                (e2 - e1).max(0.0)
            };
            if violation < best.0 {
                best = (violation, t1);
            }
        }
        (best.1, demand - best.1)
    }

    #[test]
    fn symmetric_links_split_evenly() {
        let g = parallel(&[(1.0, 1.0, 0.0), (1.0, 1.0, 0.0)], 1.0, 0.0);
        let r = follower_equilibrium(&g, &[0.0, 0.0], &SolverConfig::default()).unwrap();
        assert!((r.flow.link[0] - 0.5).abs() < 1e-9);
        assert!((r.flow.link[1] - 0.5).abs() < 1e-9);
    }

    #[test]
    fn pigou_all_human() {
        let g = pigou(0.0);
        let r = follower_equilibrium(&g, &[0.0, 0.0], &SolverConfig::default()).unwrap();
        let (o1, o2) = two_link_grid_oracle(&g, &[0.0, 0.0], 1.0, 1e-5);
        assert!((r.flow.link[0] - o1).abs() < 1e-2 && (r.flow.link[1] - o2).abs() < 1e-2);
        assert!((r.flow.link[0] - 1.0).abs() < 1e-2);
        let cost = crate::model::social_cost_links(&g, &[0.0, 0.0], &r.flow.link);
        assert!((cost - 1.0).abs() < 1e-2);
    }

    #[test]
    fn pigou_with_scale_leader() {
        let g = pigou(0.5);
        let s = [0.25, 0.25];
        let r = follower_equilibrium(&g, &s, &SolverConfig::default()).unwrap();
        let (o1, o2) = two_link_grid_oracle(&g, &s, 0.5, 1e-5);
        assert!((o1 - 0.5).abs() < 1e-2 && o2.abs() < 1e-2);
        assert!((r.flow.link[0] - o1).abs() < 1e-2 && (r.flow.link[1] - o2).abs() < 1e-2);
        assert!((r.flow.link[0] + s[0] - 0.75).abs() < 1e-2);
        assert!((r.flow.link[1] + s[1] - 0.25).abs() < 1e-2);
    }

    #[test]
    fn converged_result_has_certified_gap() {
        let g = braess();
        let cfg = SolverConfig::default();
        let s = [0.1, 0.2, 0.0, 0.3, 0.0];
        let r = follower_equilibrium(&g, &s, &cfg).unwrap();
        assert!(r.converged);
        assert!(wardrop_gap(&g, &s, &r.flow).unwrap() <= cfg.relative_gap_tol);
    }

    #[test]
    fn potential_never_increases() {
        let g = braess();
        let s = [0.3, 0.0, 0.1, 0.0, 0.2];
        let mut last = f64::INFINITY;
        for k in 1..25 {
            let cfg = SolverConfig {
                max_iterations: k,
                ..SolverConfig::default()
            };
            let phi = match follower_equilibrium(&g, &s, &cfg) {
                Ok(r) => r.objective,
                Err(SolveError::FollowerNotConverged(r)) => r.objective,
                Err(e) => panic!("{e}"),
            };
            assert!(phi <= last + 1e-14, "potential rose at {k}: {phi} > {last}");
            last = phi;
        }
    }

    #[test]
    fn unique_link_flows_from_different_starts() {
        let g = braess();
        let s = [0.2, 0.1, 0.0, 0.0, 0.1];
        let cfg = SolverConfig::default();
        let a = follower_equilibrium(&g, &s, &cfg).unwrap();
        let d = g.human_demands()[0];
        for start in [vec![d, 0.0, 0.0], vec![0.0, 0.0, d], vec![d / 3.0; 3]] {
            let start = PathFlow::from_paths(&g, start).unwrap();
            let b = follower_equilibrium_from(&g, &s, start, &cfg).unwrap();
            for l in 0..5 {
                assert!((a.flow.link[l] - b.flow.link[l]).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn demand_scaling_scales_flows_without_free_flow() {
        let coeffs = [(0.5, 1.0, 0.0), (0.7, 2.0, 0.0), (1.0, 1.5, 0.0)];
        let g1 = parallel(&coeffs, 1.0, 0.0);
        let g3 = parallel(&coeffs, 3.0, 0.0);
        let cfg = SolverConfig::default();
        let r1 = follower_equilibrium(&g1, &[0.0; 3], &cfg).unwrap();
        let r3 = follower_equilibrium(&g3, &[0.0; 3], &cfg).unwrap();
        for l in 0..3 {
            assert!((3.0 * r1.flow.link[l] - r3.flow.link[l]).abs() < 1e-6);
        }
    }

    #[test]
    fn rejects_mismatched_leader() {
        let g = pigou(0.5);
        assert!(matches!(
            follower_equilibrium(&g, &[0.25], &SolverConfig::default()),
            Err(SolveError::Model(ModelError::DimensionMismatch { .. }))
        ));
    }

    #[test]
    fn iteration_cap_reports_best_iterate() {
        let g = braess();
        let cfg = SolverConfig {
            max_iterations: 1,
            relative_gap_tol: 1e-15,
            ..SolverConfig::default()
        };
        match follower_equilibrium(&g, &[0.0; 5], &cfg) {
            Err(SolveError::FollowerNotConverged(r)) => {
                assert!(!r.converged);
                assert_eq!(r.iterations, 1);
                assert!((r.flow.total() - 0.5).abs() < 1e-12);
            }
            Ok(r) => assert!(r.relative_gap <= 1e-15),
            Err(e) => panic!("{e}"),
        }
    }
}
