//! Tabulated bound curves for plotting.

use std::str::FromStr;

use super::{fmt_num, HarnessError};
use crate::bounds::{
    alpha_thresholds, classify_region, omega, omega1, omega1_at_gamma, omega2, omega_integrand, poa_bound,
    gamma_plus,
};

/// Offset past the vacuous-region threshold at which poa-bounds tables add
/// an extra point, to show the pole.
pub const POLE_OFFSET: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CurveKind {
    OmegaVsGamma,
    OmegaVsLambda,
    ConstraintSets,
    PoaBounds,
}

impl CurveKind {
    pub fn name(self) -> &'static str {
        match self {
            CurveKind::OmegaVsGamma => "omega-vs-gamma",
            CurveKind::OmegaVsLambda => "omega-vs-lambda",
            CurveKind::ConstraintSets => "constraint-sets",
            CurveKind::PoaBounds => "poa-bounds",
        }
    }

    fn default_mus(self) -> Vec<f64> {
        match self {
            CurveKind::OmegaVsGamma => vec![0.5],
            CurveKind::OmegaVsLambda => vec![0.2, 0.5, 1.0],
            CurveKind::ConstraintSets => vec![],
            CurveKind::PoaBounds => vec![0.1, 0.2, 0.3, 0.4, 0.5, 0.7, 1.0],
        }
    }
}

impl FromStr for CurveKind {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        [
            CurveKind::OmegaVsGamma,
            CurveKind::OmegaVsLambda,
            CurveKind::ConstraintSets,
            CurveKind::PoaBounds,
        ]
        .into_iter()
        .find(|k| k.name() == s)
        .ok_or_else(|| HarnessError::BadKind(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurveGrid {
    /// Step of the x axis (and of mu for constraint sets).
    pub step: f64,
    /// Asymmetry values; empty picks a per-kind default.
    pub mus: Vec<f64>,
    /// Autonomy fraction for the omega curves.
    pub alpha: f64,
    /// Lambda values for omega-vs-gamma.
    pub lambdas: Vec<f64>,
}

impl Default for CurveGrid {
    fn default() -> Self {
        Self {
            step: 0.01,
            mus: vec![],
            alpha: 0.5,
            lambdas: vec![0.25, 0.5, 0.75, 1.0],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurvePoint {
    pub series: String,
    pub x: f64,
    pub y: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct CurveTable {
    pub points: Vec<CurvePoint>,
}

impl CurveTable {
    fn push(&mut self, series: &str, x: f64, y: f64) {
        self.points.push(CurvePoint {
            series: series.to_string(),
            x,
            y,
        });
    }

    pub fn series(&self, name: &str) -> Vec<(f64, f64)> {
        self.points.iter().filter(|p| p.series == name).map(|p| (p.x, p.y)).collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("series,x,y\n");
        for p in &self.points {
            out.push_str(&format!("{},{},{}\n", p.series, fmt_num(p.x), fmt_num(p.y)));
        }
        out
    }
}

/// `step, 2 step, ...` strictly below `end`.
fn open_grid(step: f64, end: f64) -> Vec<f64> {
    let n = (end / step).round() as i64;
    (1..n).map(|k| k as f64 * step).filter(|x| *x < end).collect()
}

fn validate(grid: &CurveGrid) -> Result<(), HarnessError> {
    let bad = |m: String| Err(HarnessError::InvalidConfig(m));
    if !(grid.step > 0.0 && grid.step < 1.0) {
        return bad(format!("grid step {} must lie in (0, 1)", grid.step));
    }
    if let Some(mu) = grid.mus.iter().find(|m| !(**m > 0.0 && **m <= 1.0)) {
        return bad(format!("mu = {mu} must lie in (0, 1]"));
    }
    if !(grid.alpha > 0.0 && grid.alpha < 1.0) {
        return bad(format!("alpha = {} must lie in (0, 1)", grid.alpha));
    }
    if let Some(l) = grid.lambdas.iter().find(|l| !(**l > 0.0 && **l <= 1.0)) {
        return bad(format!("lambda = {l} must lie in (0, 1]"));
    }
    Ok(())
}

pub fn curve_table(kind: CurveKind, grid: &CurveGrid) -> Result<CurveTable, HarnessError> {
    validate(grid)?;
    let mus = if grid.mus.is_empty() { kind.default_mus() } else { grid.mus.clone() };
    let mut t = CurveTable::default();
    let alpha = grid.alpha;
    let bound_err = |e: crate::bounds::BoundError| HarnessError::InvalidConfig(e.to_string());

    match kind {
        CurveKind::OmegaVsGamma => {
            for &mu in &mus {
                let gp = gamma_plus(alpha, mu);
                let gammas: Vec<f64> = std::iter::once(0.0)
                    .chain(open_grid(grid.step, 1.0 / alpha))
                    .chain(std::iter::once(1.0 / alpha))
                    .collect();
                for &lambda in &grid.lambdas {
                    let tag = format!("mu={} lambda={}", fmt_num(mu), fmt_num(lambda));
                    for &g in gammas.iter().filter(|g| **g < gp) {
                        t.push(&format!("w1 {tag}"), g, omega1_at_gamma(lambda, g, alpha, mu));
                    }
                    for &g in &gammas {
                        t.push(&format!("w {tag}"), g, omega_integrand(lambda, g, alpha, mu));
                    }
                }
            }
        }
        CurveKind::OmegaVsLambda => {
            let lambdas: Vec<f64> = open_grid(grid.step, 1.0).into_iter().chain([1.0]).collect();
            for &l in &lambdas {
                t.push("omega2", l, omega2(l, alpha).map_err(bound_err)?);
            }
            for &mu in &mus {
                let tag = format!("mu={}", fmt_num(mu));
                for &l in &lambdas {
                    t.push(&format!("omega1 {tag}"), l, omega1(l, alpha, mu).map_err(bound_err)?);
                }
                for &l in &lambdas {
                    t.push(&format!("omega {tag}"), l, omega(l, alpha, mu).map_err(bound_err)?);
                }
            }
        }
        CurveKind::ConstraintSets => {
            let mu_grid: Vec<f64> = open_grid(grid.step, 1.0).into_iter().chain([1.0]).collect();
            let alphas = open_grid(grid.step, 1.0);
            for &mu in &mu_grid {
                for &a in &alphas {
                    let region = classify_region(a, mu).map_err(bound_err)?;
                    t.push(region.label(), mu, a);
                }
            }
            for &mu in &mu_grid {
                let th = alpha_thresholds(mu).map_err(bound_err)?;
                for (name, v) in [
                    ("alpha0", th.alpha0),
                    ("alpha1", th.alpha1),
                    ("alpha2", th.alpha2),
                    ("alpha_tilde", th.alpha_tilde),
                ] {
                    if v.in_range() {
                        t.push(name, mu, v.value());
                    }
                }
            }
        }
        CurveKind::PoaBounds => {
            for &mu in &mus {
                let tag = format!("mu={}", fmt_num(mu));
                let mut alphas = open_grid(grid.step, 1.0);
                let a0 = alpha_thresholds(mu).map_err(bound_err)?.alpha0.value();
                let pole = (0.0..1.0).contains(&a0);
                if pole && a0 + POLE_OFFSET < 1.0 {
                    alphas.push(a0 + POLE_OFFSET);
                    alphas.sort_by(f64::total_cmp);
                }
                for &a in &alphas {
                    t.push(&tag, a, poa_bound(a, mu).map_err(bound_err)?.bound.value());
                }
                if pole {
                    t.push(&format!("asymptote {tag}"), a0, f64::INFINITY);
                }
            }
        }
    }
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::{poa_bound_single_class, Region};

    #[test]
    fn kind_names_round_trip() {
        for k in ["omega-vs-gamma", "omega-vs-lambda", "constraint-sets", "poa-bounds"] {
            assert_eq!(k.parse::<CurveKind>().unwrap().name(), k);
        }
        assert!(matches!("fig5".parse::<CurveKind>(), Err(HarnessError::BadKind(_))));
    }

    #[test]
    fn unit_asymmetry_curve_is_single_class() {
        let grid = CurveGrid {
            mus: vec![1.0],
            ..CurveGrid::default()
        };
        let t = curve_table(CurveKind::PoaBounds, &grid).unwrap();
        let s = t.series("mu=1");
        assert_eq!(s.len(), 99);
        for (a, y) in s {
            assert!((y - poa_bound_single_class(a).unwrap()).abs() <= 1e-12);
        }
    }

    #[test]
    fn constraint_set_regions() {
        let t = curve_table(CurveKind::ConstraintSets, &CurveGrid::default()).unwrap();
        for p in &t.points {
            if p.series == Region::A1.label() || p.series == Region::LambdaStar.label() {
                assert!(p.x < 0.5, "{p:?}");
            }
            if p.series == Region::A0.label() {
                assert!(p.x <= 0.25 + 1e-12, "{p:?}");
            }
        }
        assert!(!t.series(Region::A0.label()).is_empty());
        assert!(!t.series(Region::A1.label()).is_empty());
        assert!(!t.series(Region::LambdaStar.label()).is_empty());
    }

    #[test]
    fn pole_point_is_large_and_finite() {
        let grid = CurveGrid {
            mus: vec![0.2],
            ..CurveGrid::default()
        };
        let t = curve_table(CurveKind::PoaBounds, &grid).unwrap();
        let a0 = alpha_thresholds(0.2).unwrap().alpha0.value();
        let (_, y) = t
            .series("mu=0.2")
            .into_iter()
            .find(|(a, _)| *a == a0 + POLE_OFFSET)
            .unwrap();
        assert!(y.is_finite() && y > 1e3);
        assert_eq!(t.series("asymptote mu=0.2"), vec![(a0, f64::INFINITY)]);
    }

    #[test]
    fn tables_are_deterministic() {
        for kind in ["omega-vs-gamma", "omega-vs-lambda", "constraint-sets", "poa-bounds"] {
            let k: CurveKind = kind.parse().unwrap();
            let a = curve_table(k, &CurveGrid::default()).unwrap().to_csv();
            let b = curve_table(k, &CurveGrid::default()).unwrap().to_csv();
            assert_eq!(a, b);
            assert!(a.starts_with("series,x,y\n"));
        }
    }

    #[test]
    fn infinity_token_in_csv() {
        let grid = CurveGrid {
            mus: vec![0.1],
            ..CurveGrid::default()
        };
        let csv = curve_table(CurveKind::PoaBounds, &grid).unwrap().to_csv();
        assert!(csv.contains("mu=0.1,0.01,inf\n"));
    }
}
