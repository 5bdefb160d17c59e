//! Game instances for mixed-autonomy routing.
//!
//! A [`GameInstance`] is a validated directed network with affine two-class
//! link latencies `e(fa, fh) = a*fa + h*fh + b`, a set of origin/destination
//! pairs with fixed demands and autonomy fractions, and the enumerated set of
//! simple paths serving each pair. Instances are immutable once built.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::ops::Range;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Default upper bound on the total number of enumerated paths.
pub const DEFAULT_PATH_CAP: usize = 10_000;

/// Absolute tolerance for demand conservation checks.
pub const FEASIBILITY_TOL: f64 = 1e-9;

/// Absolute tolerance for path-to-link aggregation identities.
pub const AGGREGATION_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("link `{link}`: latency slopes must be strictly positive (a = {a}, h = {h})")]
    NonPositiveSlope { link: String, a: f64, h: f64 },
    #[error("link `{link}`: free-flow latency must be nonnegative (b = {b})")]
    NegativeFreeFlow { link: String, b: f64 },
    #[error("link `{link}`: degree of asymmetry a/h = {mu} is outside (0, 1]")]
    AsymmetryOutOfRange { link: String, mu: f64 },
    #[error("no path from `{origin}` to `{destination}`")]
    NoPath { origin: String, destination: String },
    #[error("pair `{origin}` -> `{destination}`: demand must be positive (got {demand})")]
    NonPositiveDemand {
        origin: String,
        destination: String,
        demand: f64,
    },
    #[error("pair `{origin}` -> `{destination}`: autonomy fraction {alpha} is outside [0, 1]")]
    BadAlpha {
        origin: String,
        destination: String,
        alpha: f64,
    },
    #[error("origin and destination coincide at `{0}`")]
    DegeneratePair(String),
    #[error("unknown node `{0}`")]
    UnknownNode(String),
    #[error("duplicate node `{0}`")]
    DuplicateNode(String),
    #[error("duplicate link `{0}`")]
    DuplicateLink(String),
    #[error("link `{0}` is a self-loop")]
    SelfLoop(String),
    #[error("non-finite value in `{0}`")]
    NonFinite(String),
    #[error("path enumeration exceeded the cap of {cap} paths")]
    PathExplosion { cap: usize },
    #[error("negative flow {0}")]
    NegativeFlow(f64),
    #[error("unknown path index {0}")]
    UnknownPath(usize),
    #[error("dimension mismatch: expected {expected} entries, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("network has no links")]
    EmptyNetwork,
    #[error("instance has no origin/destination pairs")]
    EmptyDemand,
    #[error("malformed instance file: {0}")]
    Parse(String),
}

/// A directed link with affine two-class latency `a*fa + h*fh + b`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Link {
    pub id: String,
    pub tail: String,
    pub head: String,
    /// Latency slope per unit of autonomous flow.
    pub a: f64,
    /// Latency slope per unit of human-driven flow.
    pub h: f64,
    /// Free-flow latency.
    pub b: f64,
}

impl Link {
    /// Latency at the given class flows. No sign checks; see [`link_latency`].
    #[inline]
    pub fn latency(&self, fa: f64, fh: f64) -> f64 {
        self.a * fa + self.h * fh + self.b
    }

    /// Degree of asymmetry `a / h`.
    #[inline]
    pub fn asymmetry(&self) -> f64 {
        self.a / self.h
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OdPair {
    pub origin: String,
    pub destination: String,
    pub demand: f64,
    /// Fraction of `demand` that is autonomous.
    pub alpha: f64,
}

/// Raw instance description, mirroring the JSON instance file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceSpec {
    pub nodes: Vec<String>,
    pub links: Vec<Link>,
    pub od_pairs: Vec<OdPair>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path_cap: Option<usize>,
}

impl InstanceSpec {
    pub fn from_json(text: &str) -> Result<Self, ModelError> {
        serde_json::from_str(text).map_err(|e| ModelError::Parse(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("instance spec serializes")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Path {
    /// Index of the O/D pair this path serves.
    pub od: usize,
    /// Link indices in travel order.
    pub links: Vec<usize>,
    /// Node indices in travel order, `links.len() + 1` entries.
    pub nodes: Vec<usize>,
}

/// Simple paths per O/D pair, stored contiguously: the paths of pair `w`
/// occupy the global index range `range(w)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PathSet {
    paths: Vec<Path>,
    ranges: Vec<Range<usize>>,
}

impl PathSet {
    pub fn len(&self) -> usize {
        self.paths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.paths.is_empty()
    }

    pub fn path(&self, index: usize) -> Option<&Path> {
        self.paths.get(index)
    }

    pub fn paths(&self) -> &[Path] {
        &self.paths
    }

    /// Global path indices serving O/D pair `od`.
    pub fn range(&self, od: usize) -> Range<usize> {
        self.ranges[od].clone()
    }

    pub fn od_count(&self) -> usize {
        self.ranges.len()
    }
}

#[derive(Debug, Clone)]
pub struct GameInstance {
    nodes: Vec<String>,
    links: Vec<Link>,
    od_pairs: Vec<OdPair>,
    ends: Vec<(usize, usize)>,
    path_cap: usize,
    paths: PathSet,
}

/// Builds a validated instance, enumerating the path set.
pub fn validate_instance(spec: &InstanceSpec) -> Result<GameInstance, ModelError> {
    GameInstance::new(spec)
}

impl GameInstance {
    pub fn new(spec: &InstanceSpec) -> Result<Self, ModelError> {
        let mut index = HashMap::with_capacity(spec.nodes.len());
        for (i, n) in spec.nodes.iter().enumerate() {
            if index.insert(n.as_str(), i).is_some() {
                return Err(ModelError::DuplicateNode(n.clone()));
            }
        }
        let lookup = |n: &str| {
            index
                .get(n)
                .copied()
                .ok_or_else(|| ModelError::UnknownNode(n.to_string()))
        };

        let mut ids = HashMap::with_capacity(spec.links.len());
        let mut ends = Vec::with_capacity(spec.links.len());
        for link in &spec.links {
            if ids.insert(link.id.as_str(), ()).is_some() {
                return Err(ModelError::DuplicateLink(link.id.clone()));
            }
            if !(link.a.is_finite() && link.h.is_finite() && link.b.is_finite()) {
                return Err(ModelError::NonFinite(format!("link {}", link.id)));
            }
            if link.a <= 0.0 || link.h <= 0.0 {
                return Err(ModelError::NonPositiveSlope {
                    link: link.id.clone(),
                    a: link.a,
                    h: link.h,
                });
            }
            if link.b < 0.0 {
                return Err(ModelError::NegativeFreeFlow {
                    link: link.id.clone(),
                    b: link.b,
                });
            }
            let mu = link.asymmetry();
            if mu > 1.0 {
                return Err(ModelError::AsymmetryOutOfRange {
                    link: link.id.clone(),
                    mu,
                });
            }
            let (t, h) = (lookup(&link.tail)?, lookup(&link.head)?);
            if t == h {
                return Err(ModelError::SelfLoop(link.id.clone()));
            }
            ends.push((t, h));
        }

        let mut od_ends = Vec::with_capacity(spec.od_pairs.len());
        for od in &spec.od_pairs {
            let (o, d) = (lookup(&od.origin)?, lookup(&od.destination)?);
            if o == d {
                return Err(ModelError::DegeneratePair(od.origin.clone()));
            }
            if !od.demand.is_finite() || !od.alpha.is_finite() {
                return Err(ModelError::NonFinite(format!(
                    "pair {} -> {}",
                    od.origin, od.destination
                )));
            }
            if od.demand <= 0.0 {
                return Err(ModelError::NonPositiveDemand {
                    origin: od.origin.clone(),
                    destination: od.destination.clone(),
                    demand: od.demand,
                });
            }
            if !(0.0..=1.0).contains(&od.alpha) {
                return Err(ModelError::BadAlpha {
                    origin: od.origin.clone(),
                    destination: od.destination.clone(),
                    alpha: od.alpha,
                });
            }
            od_ends.push((o, d));
        }

        let path_cap = spec.path_cap.unwrap_or(DEFAULT_PATH_CAP);
        let paths = enumerate(&spec.nodes, &spec.links, &ends, &od_ends, path_cap)?;
        for (w, od) in spec.od_pairs.iter().enumerate() {
            if paths.range(w).is_empty() {
                return Err(ModelError::NoPath {
                    origin: od.origin.clone(),
                    destination: od.destination.clone(),
                });
            }
        }

        Ok(Self {
            nodes: spec.nodes.clone(),
            links: spec.links.clone(),
            od_pairs: spec.od_pairs.clone(),
            ends,
            path_cap,
            paths,
        })
    }

    pub fn from_json(text: &str) -> Result<Self, ModelError> {
        Self::new(&InstanceSpec::from_json(text)?)
    }

    pub fn to_spec(&self) -> InstanceSpec {
        InstanceSpec {
            nodes: self.nodes.clone(),
            links: self.links.clone(),
            od_pairs: self.od_pairs.clone(),
            path_cap: (self.path_cap != DEFAULT_PATH_CAP).then_some(self.path_cap),
        }
    }

    pub fn nodes(&self) -> &[String] {
        &self.nodes
    }

    pub fn links(&self) -> &[Link] {
        &self.links
    }

    pub fn od_pairs(&self) -> &[OdPair] {
        &self.od_pairs
    }

    pub fn paths(&self) -> &PathSet {
        &self.paths
    }

    pub fn path_cap(&self) -> usize {
        self.path_cap
    }

    /// Node indices `(tail, head)` of link `l`.
    pub fn link_ends(&self, l: usize) -> (usize, usize) {
        self.ends[l]
    }

    pub fn link_index(&self, id: &str) -> Option<usize> {
        self.links.iter().position(|l| l.id == id)
    }

    /// Node identifiers along a path.
    pub fn path_node_ids(&self, p: usize) -> Vec<&str> {
        self.paths.paths[p]
            .nodes
            .iter()
            .map(|&n| self.nodes[n].as_str())
            .collect()
    }

    /// Demand of each O/D pair carried by the autonomous class.
    pub fn autonomous_demands(&self) -> Vec<f64> {
        self.od_pairs.iter().map(|w| w.alpha * w.demand).collect()
    }

    /// Demand of each O/D pair carried by the human-driven class.
    pub fn human_demands(&self) -> Vec<f64> {
        self.od_pairs
            .iter()
            .map(|w| (1.0 - w.alpha) * w.demand)
            .collect()
    }

    pub fn total_demand(&self) -> f64 {
        self.od_pairs.iter().map(|w| w.demand).sum()
    }

    /// The common autonomy fraction if every pair carries the same one.
    pub fn uniform_alpha(&self) -> Option<f64> {
        let first = self.od_pairs.first()?.alpha;
        self.od_pairs
            .iter()
            .all(|w| (w.alpha - first).abs() <= 1e-12)
            .then_some(first)
    }

    /// Copy of this instance with every pair's autonomy fraction set to `alpha`.
    pub fn with_uniform_alpha(&self, alpha: f64) -> Result<Self, ModelError> {
        let mut spec = self.to_spec();
        for od in &mut spec.od_pairs {
            od.alpha = alpha;
        }
        Self::new(&spec)
    }
}

/// Re-enumerates all simple paths of a validated instance under `cap`.
pub fn enumerate_paths(instance: &GameInstance, cap: usize) -> Result<PathSet, ModelError> {
    let mut index = HashMap::new();
    for (i, n) in instance.nodes.iter().enumerate() {
        index.insert(n.as_str(), i);
    }
    let od_ends: Vec<_> = instance
        .od_pairs
        .iter()
        .map(|w| (index[w.origin.as_str()], index[w.destination.as_str()]))
        .collect();
    enumerate(&instance.nodes, &instance.links, &instance.ends, &od_ends, cap)
}

fn enumerate(
    nodes: &[String],
    links: &[Link],
    ends: &[(usize, usize)],
    od_ends: &[(usize, usize)],
    cap: usize,
) -> Result<PathSet, ModelError> {
    let mut out_links: Vec<Vec<usize>> = vec![Vec::new(); nodes.len()];
    for (l, &(t, _)) in ends.iter().enumerate() {
        out_links[t].push(l);
    }

    let mut all = Vec::new();
    let mut ranges = Vec::with_capacity(od_ends.len());
    for (w, &(o, d)) in od_ends.iter().enumerate() {
        let start = all.len();
        let mut found = Vec::new();
        let mut on_path = vec![false; nodes.len()];
        let mut stack_links = Vec::new();
        let mut stack_nodes = vec![o];
        on_path[o] = true;
        let mut budget = cap.saturating_sub(start);
        dfs(
            o,
            d,
            &out_links,
            ends,
            &mut on_path,
            &mut stack_links,
            &mut stack_nodes,
            &mut found,
            &mut budget,
        )
        .map_err(|_| ModelError::PathExplosion { cap })?;

        found.sort_by(|p: &(Vec<usize>, Vec<usize>), q| path_order(nodes, links, p, q));
        all.extend(found.into_iter().map(|(ls, ns)| Path {
            od: w,
            links: ls,
            nodes: ns,
        }));
        ranges.push(start..all.len());
    }
    Ok(PathSet { paths: all, ranges })
}

struct CapExceeded;

#[allow(clippy::too_many_arguments)]
fn dfs(
    at: usize,
    target: usize,
    out_links: &[Vec<usize>],
    ends: &[(usize, usize)],
    on_path: &mut [bool],
    stack_links: &mut Vec<usize>,
    stack_nodes: &mut Vec<usize>,
    found: &mut Vec<(Vec<usize>, Vec<usize>)>,
    budget: &mut usize,
) -> Result<(), CapExceeded> {
    if at == target {
        if *budget == 0 {
            return Err(CapExceeded);
        }
        *budget -= 1;
        found.push((stack_links.clone(), stack_nodes.clone()));
        return Ok(());
    }
    for &l in &out_links[at] {
        let next = ends[l].1;
        if on_path[next] {
            continue;
        }
        on_path[next] = true;
        stack_links.push(l);
        stack_nodes.push(next);
        let r = dfs(
            next, target, out_links, ends, on_path, stack_links, stack_nodes, found, budget,
        );
        stack_nodes.pop();
        stack_links.pop();
        on_path[next] = false;
        r?;
    }
    Ok(())
}

// Lexicographic on node identifiers, then on link identifiers (parallel links).
fn path_order(
    nodes: &[String],
    links: &[Link],
    p: &(Vec<usize>, Vec<usize>),
    q: &(Vec<usize>, Vec<usize>),
) -> Ordering {
    let pn = p.1.iter().map(|&n| nodes[n].as_str());
    let qn = q.1.iter().map(|&n| nodes[n].as_str());
    pn.cmp(qn).then_with(|| {
        let pl = p.0.iter().map(|&l| links[l].id.as_str());
        let ql = q.0.iter().map(|&l| links[l].id.as_str());
        pl.cmp(ql)
    })
}

/// Flow of a single class on every path, with the induced link flows.
#[derive(Debug, Clone, PartialEq)]
pub struct PathFlow {
    pub path: Vec<f64>,
    pub link: Vec<f64>,
}

impl PathFlow {
    pub fn zero(instance: &GameInstance) -> Self {
        Self {
            path: vec![0.0; instance.paths.len()],
            link: vec![0.0; instance.links.len()],
        }
    }

    /// Validates nonnegativity and aggregates path flows onto links.
    pub fn from_paths(instance: &GameInstance, path: Vec<f64>) -> Result<Self, ModelError> {
        if path.len() != instance.paths.len() {
            return Err(ModelError::DimensionMismatch {
                expected: instance.paths.len(),
                found: path.len(),
            });
        }
        if let Some(&bad) = path.iter().find(|f| !f.is_finite() || **f < 0.0) {
            return Err(ModelError::NegativeFlow(bad));
        }
        let link = aggregate(instance, &path);
        Ok(Self { path, link })
    }

    /// Recomputes link flows from path flows.
    pub fn reaggregate(&mut self, instance: &GameInstance) {
        self.link = aggregate(instance, &self.path);
    }

    /// Total flow on the paths of O/D pair `od`.
    pub fn od_total(&self, instance: &GameInstance, od: usize) -> f64 {
        self.path[instance.paths.range(od)].iter().sum()
    }

    pub fn total(&self) -> f64 {
        self.path.iter().sum()
    }

    pub fn scaled(&self, k: f64) -> Self {
        Self {
            path: self.path.iter().map(|f| f * k).collect(),
            link: self.link.iter().map(|f| f * k).collect(),
        }
    }
}

/// Link flows `f_l = sum over paths p containing l of f_p`.
pub fn aggregate(instance: &GameInstance, path_flows: &[f64]) -> Vec<f64> {
    let mut link = vec![0.0; instance.links.len()];
    for (p, path) in instance.paths.paths.iter().enumerate() {
        let f = path_flows[p];
        if f != 0.0 {
            for &l in &path.links {
                link[l] += f;
            }
        }
    }
    link
}

/// Autonomous and human-driven flows.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassFlow {
    pub autonomous: PathFlow,
    pub human: PathFlow,
}

impl ClassFlow {
    pub fn zero(instance: &GameInstance) -> Self {
        Self {
            autonomous: PathFlow::zero(instance),
            human: PathFlow::zero(instance),
        }
    }

    pub fn from_paths(
        instance: &GameInstance,
        autonomous: Vec<f64>,
        human: Vec<f64>,
    ) -> Result<Self, ModelError> {
        Ok(Self {
            autonomous: PathFlow::from_paths(instance, autonomous)?,
            human: PathFlow::from_paths(instance, human)?,
        })
    }

    /// Total (both classes) flow on each link.
    pub fn link_totals(&self) -> Vec<f64> {
        self.autonomous
            .link
            .iter()
            .zip(&self.human.link)
            .map(|(a, h)| a + h)
            .collect()
    }

    /// Total (both classes) flow on each path.
    pub fn path_totals(&self) -> Vec<f64> {
        self.autonomous
            .path
            .iter()
            .zip(&self.human.path)
            .map(|(a, h)| a + h)
            .collect()
    }
}

/// Latency of `link` at class flows `(fa, fh)`.
pub fn link_latency(link: &Link, fa: f64, fh: f64) -> Result<f64, ModelError> {
    for f in [fa, fh] {
        if f < 0.0 || f.is_nan() {
            return Err(ModelError::NegativeFlow(f));
        }
    }
    Ok(link.latency(fa, fh))
}

/// Sum of link latencies over an arbitrary link sequence.
pub fn links_latency(instance: &GameInstance, links: &[usize], fa: &[f64], fh: &[f64]) -> f64 {
    links
        .iter()
        .map(|&l| instance.links[l].latency(fa[l], fh[l]))
        .sum()
}

/// Latency of path `p` at the given link flows.
pub fn path_latency(
    instance: &GameInstance,
    p: usize,
    fa: &[f64],
    fh: &[f64],
) -> Result<f64, ModelError> {
    let n = instance.links.len();
    for v in [fa, fh] {
        if v.len() != n {
            return Err(ModelError::DimensionMismatch {
                expected: n,
                found: v.len(),
            });
        }
    }
    let path = instance.paths.path(p).ok_or(ModelError::UnknownPath(p))?;
    Ok(links_latency(instance, &path.links, fa, fh))
}

/// Social cost from per-class link flows.
pub fn social_cost_links(instance: &GameInstance, fa: &[f64], fh: &[f64]) -> f64 {
    instance
        .links
        .iter()
        .enumerate()
        .map(|(l, link)| (fa[l] + fh[l]) * link.latency(fa[l], fh[l]))
        .sum()
}

/// Total travel time `sum_l (fa_l + fh_l) * e_l(fa_l, fh_l)`.
pub fn social_cost(instance: &GameInstance, flow: &ClassFlow) -> f64 {
    social_cost_links(instance, &flow.autonomous.link, &flow.human.link)
}

#[derive(Debug, Clone, PartialEq)]
pub struct OdResidual {
    pub od: usize,
    /// Routed autonomous flow minus `alpha_w * r_w`.
    pub autonomous: f64,
    /// Routed human flow minus `(1 - alpha_w) * r_w`.
    pub human: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeasibilityReport {
    pub residuals: Vec<OdResidual>,
    pub negative_entries: usize,
    pub feasible: bool,
}

/// Checks demand conservation per O/D pair and class.
pub fn check_feasibility(instance: &GameInstance, flow: &ClassFlow) -> FeasibilityReport {
    let residuals: Vec<_> = instance
        .od_pairs
        .iter()
        .enumerate()
        .map(|(w, od)| OdResidual {
            od: w,
            autonomous: flow.autonomous.od_total(instance, w) - od.alpha * od.demand,
            human: flow.human.od_total(instance, w) - (1.0 - od.alpha) * od.demand,
        })
        .collect();
    let negative_entries = flow
        .autonomous
        .path
        .iter()
        .chain(&flow.human.path)
        .filter(|f| **f < 0.0)
        .count();
    let feasible = negative_entries == 0
        && residuals
            .iter()
            .all(|r| r.autonomous.abs() <= FEASIBILITY_TOL && r.human.abs() <= FEASIBILITY_TOL);
    FeasibilityReport {
        residuals,
        negative_entries,
        feasible,
    }
}

/// Minimum degree of asymmetry over all links.
pub fn min_asymmetry(instance: &GameInstance) -> Result<f64, ModelError> {
    instance
        .links
        .iter()
        .map(Link::asymmetry)
        .reduce(f64::min)
        .ok_or(ModelError::EmptyNetwork)
}

/// Demand-weighted autonomy fraction of the whole network.
pub fn network_autonomy_fraction(instance: &GameInstance) -> Result<f64, ModelError> {
    if instance.od_pairs.is_empty() {
        return Err(ModelError::EmptyDemand);
    }
    let weighted: f64 = instance.od_pairs.iter().map(|w| w.alpha * w.demand).sum();
    Ok(weighted / instance.total_demand())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StackelbergFeasibility {
    /// Total leader flow equals `alpha * sum_w r_w`.
    pub feasible: bool,
    /// Every pair carries exactly `alpha * r_w` of leader flow.
    pub weak: bool,
}

pub fn is_stackelberg_feasible(instance: &GameInstance, s: &PathFlow) -> StackelbergFeasibility {
    let Ok(alpha) = network_autonomy_fraction(instance) else {
        return StackelbergFeasibility {
            feasible: false,
            weak: false,
        };
    };
    let nonneg = s.path.iter().all(|f| *f >= 0.0);
    let feasible = nonneg && (s.total() - alpha * instance.total_demand()).abs() <= FEASIBILITY_TOL;
    let weak = feasible
        && instance
            .od_pairs
            .iter()
            .enumerate()
            .all(|(w, od)| (s.od_total(instance, w) - alpha * od.demand).abs() <= FEASIBILITY_TOL);
    StackelbergFeasibility { feasible, weak }
}

/// True when the leader never exceeds the optimal total flow on any link.
pub fn is_opt_restricted(s_links: &[f64], optimal: &ClassFlow) -> bool {
    s_links
        .iter()
        .zip(optimal.link_totals())
        .all(|(s, opt)| *s <= opt + FEASIBILITY_TOL)
}
