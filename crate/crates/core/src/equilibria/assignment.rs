//! Pairwise conditional-gradient assignment for link-separable quadratics.
//!
//! Minimizes `sum_l slope_l * x_l^2 / 2 + offset_l * x_l` over path flows
//! meeting fixed per-pair demands, where `x` is the induced link flow. Every
//! step shifts flow within one O/D pair from a costlier used path to the
//! current shortest path (the pairwise conditional-gradient direction), with
//! the exact step length of the quadratic along that direction.

use super::{argmin, path_costs, relative_gap};
use crate::model::{aggregate, GameInstance, PathFlow};

pub(crate) struct Quadratic {
    pub slope: Vec<f64>,
    pub offset: Vec<f64>,
}

impl Quadratic {
    pub fn value(&self, x: &[f64]) -> f64 {
        x.iter()
            .zip(self.slope.iter().zip(&self.offset))
            .map(|(x, (k, c))| 0.5 * k * x * x + c * x)
            .sum()
    }

    fn link_costs(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(self.slope.iter().zip(&self.offset))
            .map(|(x, (k, c))| k * x + c)
            .collect()
    }

    /// Relative gap of `flow` under the gradient path costs.
    pub fn gap(&self, instance: &GameInstance, demands: &[f64], flow: &PathFlow) -> f64 {
        let costs = path_costs(instance, &self.link_costs(&flow.link));
        relative_gap(instance, demands, &flow.path, &costs)
    }
}

pub(crate) struct Assignment {
    pub flow: PathFlow,
    pub gap: f64,
    pub iterations: usize,
    pub converged: bool,
}

pub(crate) fn assign(
    instance: &GameInstance,
    demands: &[f64],
    q: &Quadratic,
    start: PathFlow,
    tol: f64,
    max_iterations: usize,
) -> Assignment {
    let paths = instance.paths();
    let mut f = start.path;
    let mut x = aggregate(instance, &f);
    let mut iterations = 0;

    loop {
        let mut costs = path_costs(instance, &q.link_costs(&x));
        let gap = relative_gap(instance, demands, &f, &costs);
        if gap <= tol || iterations >= max_iterations {
            return Assignment {
                flow: PathFlow { path: f, link: x },
                gap,
                iterations,
                converged: gap <= tol,
            };
        }
        iterations += 1;

        for w in 0..paths.od_count() {
            let range = paths.range(w);
            for p in range.clone() {
                if f[p] <= 0.0 {
                    continue;
                }
                let s = argmin(&costs, range.clone());
                let excess = costs[p] - costs[s];
                if s == p || excess <= 0.0 {
                    continue;
                }
                let (lp, ls) = (&paths.paths()[p].links, &paths.paths()[s].links);
                let curvature: f64 = lp
                    .iter()
                    .filter(|l| !ls.contains(l))
                    .chain(ls.iter().filter(|l| !lp.contains(l)))
                    .map(|&l| q.slope[l])
                    .sum();
                let step = (excess / curvature).min(f[p]);
                f[p] = if step == f[p] { 0.0 } else { f[p] - step };
                f[s] += step;
                for &l in lp {
                    if !ls.contains(&l) {
                        x[l] = (x[l] - step).max(0.0);
                    }
                }
                for &l in ls {
                    if !lp.contains(&l) {
                        x[l] += step;
                    }
                }
                for r in range.clone() {
                    costs[r] = paths.paths()[r]
                        .links
                        .iter()
                        .map(|&l| q.slope[l] * x[l] + q.offset[l])
                        .sum();
                }
            }
        }
        // Incremental link updates drift; resynchronize once per sweep.
        x = aggregate(instance, &f);
    }
}
