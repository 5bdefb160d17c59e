//! Grid oracles on parallel-link, single-pair instances.
//!
//! The search is exhaustive on a simplex grid and then refined by repeated
//! local grids of one tenth the step around the incumbent. For the system
//! optimum only the autonomous split is gridded: with it fixed, the human
//! block is a separable convex quadratic whose minimizer is found exactly by
//! water-filling.

use super::HarnessError;
use crate::model::{social_cost_links, ClassFlow, GameInstance, PathFlow};

#[derive(Debug, Clone, PartialEq)]
pub struct OracleConfig {
    /// Grid step for a one-dimensional search, as a fraction of the demand.
    pub resolution_1d: f64,
    /// Grid step for a two-dimensional search, as a fraction of the demand.
    pub resolution_2d: f64,
    /// Refinement passes after the coarse grid.
    pub refinements: usize,
    pub max_links: usize,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self {
            resolution_1d: 1e-4,
            resolution_2d: 1e-3,
            refinements: 6,
            max_links: 3,
        }
    }
}

impl OracleConfig {
    fn validate(&self) -> Result<(), HarnessError> {
        if !(self.resolution_1d > 0.0 && self.resolution_1d <= 1.0)
            || !(self.resolution_2d > 0.0 && self.resolution_2d <= 1.0)
        {
            return Err(HarnessError::InvalidConfig("oracle resolution must lie in (0, 1]".into()));
        }
        Ok(())
    }

    fn step(&self, links: usize) -> f64 {
        if links <= 2 {
            self.resolution_1d
        } else {
            self.resolution_2d
        }
    }
}

/// Link index of every path, if the instance is a single pair joined by
/// parallel links.
fn parallel_links(instance: &GameInstance, config: &OracleConfig) -> Result<Vec<usize>, HarnessError> {
    if instance.od_pairs().len() != 1 {
        return Err(HarnessError::UnsupportedTopology("oracle needs exactly one O/D pair".into()));
    }
    let paths = instance.paths().paths();
    if paths.iter().any(|p| p.links.len() != 1) || paths.len() != instance.links().len() {
        return Err(HarnessError::UnsupportedTopology(
            "oracle needs parallel links from origin to destination".into(),
        ));
    }
    if paths.len() > config.max_links {
        return Err(HarnessError::UnsupportedTopology(format!(
            "{} links exceed the oracle limit of {}",
            paths.len(),
            config.max_links
        )));
    }
    Ok(paths.iter().map(|p| p.links[0]).collect())
}

/// Minimize `f` over `{x >= 0, sum x = total}` in `n <= 3` dimensions.
fn simplex_search(n: usize, total: f64, step: f64, refinements: usize, f: impl Fn(&[f64]) -> f64) -> Vec<f64> {
    if n == 1 || total <= 0.0 {
        let mut x = vec![0.0; n];
        x[0] = total;
        return x;
    }
    let cells = (1.0 / step).round().max(1.0) as i64;
    let mut h = total / cells as f64;
    // Coordinates of the free dimensions; the last one takes the remainder.
    let mut best_val = f64::INFINITY;
    let mut best = vec![0.0; n - 1];
    let mut point = vec![0.0; n];
    let mut eval = |free: &[f64], best: &mut Vec<f64>, best_val: &mut f64| {
        let used: f64 = free.iter().sum();
        if used > total * (1.0 + 1e-12) {
            return;
        }
        point[..n - 1].copy_from_slice(free);
        point[n - 1] = (total - used).max(0.0);
        let v = f(&point);
        if v < *best_val {
            *best_val = v;
            best.copy_from_slice(free);
        }
    };

    let mut free = vec![0.0; n - 1];
    match n {
        2 => {
            for i in 0..=cells {
                free[0] = i as f64 * h;
                eval(&free, &mut best, &mut best_val);
            }
        }
        3 => {
            for i in 0..=cells {
                for j in 0..=(cells - i) {
                    free[0] = i as f64 * h;
                    free[1] = j as f64 * h;
                    eval(&free, &mut best, &mut best_val);
                }
            }
        }
        _ => unreachable!("oracle dimension is checked by the caller"),
    }

    const HALF_WIDTH: i64 = 20;
    for _ in 0..refinements {
        let center = best.clone();
        let fine = h / 10.0;
        let offsets = -HALF_WIDTH..=HALF_WIDTH;
        match n {
            2 => {
                for i in offsets {
                    free[0] = (center[0] + i as f64 * fine).clamp(0.0, total);
                    eval(&free, &mut best, &mut best_val);
                }
            }
            _ => {
                for i in offsets.clone() {
                    for j in offsets.clone() {
                        free[0] = (center[0] + i as f64 * fine).clamp(0.0, total);
                        free[1] = (center[1] + j as f64 * fine).clamp(0.0, total);
                        eval(&free, &mut best, &mut best_val);
                    }
                }
            }
        }
        h = fine;
    }

    let used: f64 = best.iter().sum();
    let mut x = best;
    x.push((total - used).max(0.0));
    x
}

/// Exact minimizer of `sum_l k_l x_l^2 / 2 + c_l x_l` over
/// `{x >= 0, sum x = total}`: `x_l = max(nu - c_l, 0) / k_l` with `nu` set
/// by the demand.
fn water_fill(k: &[f64], c: &[f64], total: f64) -> Vec<f64> {
    if total <= 0.0 {
        return vec![0.0; k.len()];
    }
    let mut order: Vec<usize> = (0..k.len()).collect();
    order.sort_by(|&i, &j| c[i].total_cmp(&c[j]));
    let (mut inv_k, mut c_over_k) = (0.0, 0.0);
    let mut nu = 0.0;
    for (rank, &i) in order.iter().enumerate() {
        inv_k += 1.0 / k[i];
        c_over_k += c[i] / k[i];
        nu = (total + c_over_k) / inv_k;
        let next = order.get(rank + 1).map(|&j| c[j]);
        if next.is_none_or(|cn| nu <= cn) {
            break;
        }
    }
    k.iter().zip(c).map(|(k, c)| ((nu - c) / k).max(0.0)).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimalOracle {
    pub flow: ClassFlow,
    pub cost: f64,
}

/// Grid minimum of the social cost on a parallel-link instance.
pub fn oracle_optimal(instance: &GameInstance, config: &OracleConfig) -> Result<OptimalOracle, HarnessError> {
    config.validate()?;
    let map = parallel_links(instance, config)?;
    let links: Vec<_> = map.iter().map(|&l| instance.links()[l].clone()).collect();
    let (da, dh) = (instance.autonomous_demands()[0], instance.human_demands()[0]);
    let n = links.len();

    let k: Vec<f64> = links.iter().map(|l| 2.0 * l.h).collect();
    let humans = |fa: &[f64]| {
        let c: Vec<f64> = links.iter().zip(fa).map(|(l, fa)| (l.a + l.h) * fa + l.b).collect();
        water_fill(&k, &c, dh)
    };
    let cost = |fa: &[f64], fh: &[f64]| -> f64 {
        links
            .iter()
            .zip(fa.iter().zip(fh))
            .map(|(l, (fa, fh))| (fa + fh) * l.latency(*fa, *fh))
            .sum()
    };
    let fa = simplex_search(n, da, config.step(n), config.refinements, |fa| cost(fa, &humans(fa)));
    let fh = humans(&fa);

    // `links` is in path order, so the split vectors are already per path.
    let flow = ClassFlow::from_paths(instance, fa, fh)?;
    let cost = social_cost_links(instance, &flow.autonomous.link, &flow.human.link);
    Ok(OptimalOracle { flow, cost })
}

#[derive(Debug, Clone, PartialEq)]
pub struct NashOracle {
    pub flow: PathFlow,
    pub gap: f64,
}

/// Grid point of human flow with the smallest Wardrop gap against leader
/// link flow `s_links` on a parallel-link instance.
pub fn oracle_nash(
    instance: &GameInstance,
    s_links: &[f64],
    config: &OracleConfig,
) -> Result<NashOracle, HarnessError> {
    config.validate()?;
    let map = parallel_links(instance, config)?;
    let links: Vec<_> = map.iter().map(|&l| instance.links()[l].clone()).collect();
    let s: Vec<f64> = map.iter().map(|&l| s_links[l]).collect();
    let dh = instance.human_demands()[0];
    let n = links.len();

    let gap = |t: &[f64]| -> f64 {
        let e: Vec<f64> = links.iter().zip(s.iter().zip(t)).map(|(l, (s, t))| l.latency(*s, *t)).collect();
        let total: f64 = t.iter().zip(&e).map(|(t, e)| t * e).sum();
        let min = e.iter().copied().fold(f64::INFINITY, f64::min);
        if total <= 0.0 {
            0.0
        } else {
            ((total - dh * min) / total).max(0.0)
        }
    };
    let t = simplex_search(n, dh, config.step(n), config.refinements, gap);
    let g = gap(&t);
    let flow = PathFlow::from_paths(instance, t)?;
    Ok(NashOracle { flow, gap: g })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::fixtures::*;

    fn pigou(alpha: f64) -> GameInstance {
        parallel(&[(1.0, 1.0, 0.0), (1e-3, 1e-3, 1.0)], 1.0, alpha)
    }

    #[test]
    fn water_fill_matches_kkt() {
        let x = water_fill(&[2.0, 2.0, 1.0], &[0.0, 1.0, 5.0], 1.0);
        // nu solves (nu - 0)/2 + (nu - 1)/2 = 1 -> nu = 1.5
        assert!((x[0] - 0.75).abs() < 1e-15 && (x[1] - 0.25).abs() < 1e-15 && x[2] == 0.0);
        assert_eq!(water_fill(&[1.0], &[3.0], 0.0), vec![0.0]);
    }

    #[test]
    fn pigou_optimum() {
        let r = oracle_optimal(&pigou(0.5), &OracleConfig::default()).unwrap();
        assert!((r.cost - 0.75).abs() < 1e-2);
        let totals = r.flow.link_totals();
        assert!((totals[0] - 0.5).abs() < 1e-2);
    }

    #[test]
    fn identical_links_split_evenly() {
        let g = parallel(&[(1.0, 1.0, 0.5), (1.0, 1.0, 0.5)], 2.0, 0.5);
        let r = oracle_optimal(&g, &OracleConfig::default()).unwrap();
        let totals = r.flow.link_totals();
        assert!((totals[0] - 1.0).abs() < 1e-6);
    }

    #[test]
    fn single_link_is_the_feasible_point() {
        let g = parallel(&[(0.5, 1.0, 0.2)], 2.0, 0.25);
        let r = oracle_optimal(&g, &OracleConfig::default()).unwrap();
        assert_eq!(r.flow.autonomous.link, vec![0.5]);
        assert_eq!(r.flow.human.link, vec![1.5]);
    }

    #[test]
    fn pigou_nash() {
        let g = pigou(0.0);
        let r = oracle_nash(&g, &[0.0, 0.0], &OracleConfig::default()).unwrap();
        assert!((r.flow.path[0] - 1.0).abs() < 1e-3);
        let g = pigou(0.5);
        let r = oracle_nash(&g, &[0.25, 0.25], &OracleConfig::default()).unwrap();
        assert!((r.flow.path[0] - 0.5).abs() < 1e-3 && r.flow.path[1].abs() < 1e-3);
    }

    #[test]
    fn zero_human_demand() {
        let g = pigou(1.0);
        let r = oracle_nash(&g, &[0.5, 0.5], &OracleConfig::default()).unwrap();
        assert_eq!(r.flow.path, vec![0.0, 0.0]);
        assert_eq!(r.gap, 0.0);
    }

    #[test]
    fn three_links_interior_nash() {
        let g = parallel(&[(1.0, 1.0, 0.0), (1.0, 2.0, 0.0), (1.0, 1.0, 0.5)], 1.0, 0.0);
        let r = oracle_nash(&g, &[0.0; 3], &OracleConfig::default()).unwrap();
        // Common latency L: t = (L, L/2, L - 1/2) summing to 1 gives L = 0.6.
        for (t, x) in r.flow.path.iter().zip([0.6, 0.3, 0.1]) {
            assert!((t - x).abs() < 1e-4, "{:?}", r.flow.path);
        }
        assert!(r.gap < 1e-6);
    }

    #[test]
    fn rejects_non_parallel() {
        assert!(matches!(
            oracle_optimal(&braess(), &OracleConfig::default()),
            Err(HarnessError::UnsupportedTopology(_))
        ));
        let g = parallel(&[(1.0, 1.0, 0.0); 4], 1.0, 0.5);
        assert!(matches!(
            oracle_optimal(&g, &OracleConfig::default()),
            Err(HarnessError::UnsupportedTopology(_))
        ));
    }
}
