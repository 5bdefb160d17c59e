//! Seeded random instances.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::HarnessError;
use crate::model::{GameInstance, InstanceSpec, Link, ModelError, OdPair};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Shape {
    /// Random directed graph on at most `max_nodes` nodes.
    General,
    /// Two or three parallel links between one origin and one destination.
    Parallel,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorConfig {
    pub shape: Shape,
    pub max_nodes: usize,
    pub max_links: usize,
    pub max_od_pairs: usize,
    /// Every link gets `a / h` drawn uniformly from `[mu_min, 1]`.
    pub mu_min: f64,
    /// Uniform autonomy fraction is drawn from this closed range.
    pub alpha: (f64, f64),
    pub max_attempts: usize,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        Self {
            shape: Shape::General,
            max_nodes: 6,
            max_links: 10,
            max_od_pairs: 2,
            mu_min: 0.3,
            alpha: (0.5, 0.5),
            max_attempts: 100,
        }
    }
}

impl GeneratorConfig {
    pub fn parallel() -> Self {
        Self {
            shape: Shape::Parallel,
            ..Self::default()
        }
    }

    fn validate(&self) -> Result<(), HarnessError> {
        let bad = |m: &str| Err(HarnessError::InvalidConfig(m.into()));
        if !(self.mu_min > 0.0 && self.mu_min <= 1.0) {
            return bad("mu_min must lie in (0, 1]");
        }
        let (lo, hi) = self.alpha;
        if !(lo > 0.0 && hi < 1.0 && lo <= hi) {
            return bad("alpha range must lie inside (0, 1)");
        }
        if self.shape == Shape::General && (self.max_nodes < 2 || self.max_links < 1 || self.max_od_pairs < 1) {
            return bad("need at least 2 nodes, 1 link and 1 O/D pair");
        }
        if self.max_attempts == 0 {
            return bad("max_attempts must be at least 1");
        }
        Ok(())
    }
}

fn draw_link(rng: &mut ChaCha8Rng, id: usize, tail: &str, head: &str, mu_min: f64) -> Link {
    let h = rng.gen_range(0.5..2.0);
    let mu = if mu_min < 1.0 { rng.gen_range(mu_min..=1.0) } else { 1.0 };
    Link {
        id: format!("L{id}"),
        tail: tail.into(),
        head: head.into(),
        a: mu * h,
        h,
        b: rng.gen_range(0.0..2.0),
    }
}

/// Reproducible random instance: identical seeds and configs give identical
/// instances.
pub fn random_instance(seed: u64, config: &GeneratorConfig) -> Result<GameInstance, HarnessError> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (lo, hi) = config.alpha;
    let alpha = if lo < hi { rng.gen_range(lo..=hi) } else { lo };

    for _ in 0..config.max_attempts {
        let spec = match config.shape {
            Shape::Parallel => parallel_spec(&mut rng, config, alpha),
            Shape::General => general_spec(&mut rng, config, alpha),
        };
        match GameInstance::new(&spec) {
            Ok(g) => return Ok(g),
            Err(ModelError::NoPath { .. }) => continue,
            Err(e) => return Err(e.into()),
        }
    }
    Err(HarnessError::GenerationFailed {
        attempts: config.max_attempts,
    })
}

fn parallel_spec(rng: &mut ChaCha8Rng, config: &GeneratorConfig, alpha: f64) -> InstanceSpec {
    let m = rng.gen_range(2..=3);
    InstanceSpec {
        nodes: vec!["o".into(), "d".into()],
        links: (1..=m).map(|i| draw_link(rng, i, "o", "d", config.mu_min)).collect(),
        od_pairs: vec![OdPair {
            origin: "o".into(),
            destination: "d".into(),
            demand: rng.gen_range(0.5..2.0),
            alpha,
        }],
        path_cap: None,
    }
}

// A random route from the first to the last node guarantees one connected
// pair; the remaining links are drawn among unused ordered node pairs.
fn general_spec(rng: &mut ChaCha8Rng, config: &GeneratorConfig, alpha: f64) -> InstanceSpec {
    let n = rng.gen_range(2.max(3.min(config.max_nodes))..=config.max_nodes);
    let names: Vec<String> = (1..=n).map(|i| i.to_string()).collect();

    let mut inner: Vec<usize> = (1..n - 1).collect();
    inner.shuffle(rng);
    let hops = rng.gen_range(0..=inner.len().min(config.max_links - 1));
    let mut route = vec![0];
    route.extend_from_slice(&inner[..hops]);
    route.push(n - 1);

    let mut pairs: Vec<(usize, usize)> = route.windows(2).map(|w| (w[0], w[1])).collect();
    let mut free: Vec<(usize, usize)> = (0..n)
        .flat_map(|u| (0..n).map(move |v| (u, v)))
        .filter(|&(u, v)| u != v && !pairs.contains(&(u, v)))
        .collect();
    free.shuffle(rng);
    let extra = rng.gen_range(0..=(config.max_links - pairs.len()).min(free.len()));
    pairs.extend_from_slice(&free[..extra]);

    let links: Vec<Link> = pairs
        .iter()
        .enumerate()
        .map(|(i, &(u, v))| draw_link(rng, i + 1, &names[u], &names[v], config.mu_min))
        .collect();

    let mut od_pairs = vec![OdPair {
        origin: names[0].clone(),
        destination: names[n - 1].clone(),
        demand: rng.gen_range(0.5..2.0),
        alpha,
    }];
    if config.max_od_pairs > 1 && rng.gen_bool(0.5) {
        let (u, v) = loop {
            let u = rng.gen_range(0..n);
            let v = rng.gen_range(0..n);
            if u != v && (u, v) != (0, n - 1) {
                break (u, v);
            }
        };
        od_pairs.push(OdPair {
            origin: names[u].clone(),
            destination: names[v].clone(),
            demand: rng.gen_range(0.5..2.0),
            alpha,
        });
    }

    InstanceSpec {
        nodes: names,
        links,
        od_pairs,
        path_cap: None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{min_asymmetry, validate_instance};

    #[test]
    fn same_seed_same_instance() {
        let cfg = GeneratorConfig::default();
        for seed in 0..20 {
            assert_eq!(
                random_instance(seed, &cfg).unwrap().to_spec(),
                random_instance(seed, &cfg).unwrap().to_spec()
            );
        }
    }

    #[test]
    fn respects_asymmetry_floor() {
        let cfg = GeneratorConfig {
            mu_min: 0.6,
            ..GeneratorConfig::default()
        };
        for seed in 0..50 {
            let g = random_instance(seed, &cfg).unwrap();
            assert!(min_asymmetry(&g).unwrap() >= 0.6);
        }
    }

    #[test]
    fn within_size_limits_and_valid() {
        let cfg = GeneratorConfig::default();
        for seed in 0..200 {
            let g = random_instance(seed, &cfg).unwrap();
            assert!(g.nodes().len() <= 6 && g.links().len() <= 10 && g.od_pairs().len() <= 2);
            assert_eq!(g.uniform_alpha(), Some(0.5));
            validate_instance(&g.to_spec()).unwrap();
        }
    }

    #[test]
    fn parallel_shape() {
        let cfg = GeneratorConfig::parallel();
        for seed in 0..50 {
            let g = random_instance(seed, &cfg).unwrap();
            assert!((2..=3).contains(&g.links().len()));
            assert!(g.paths().paths().iter().all(|p| p.links.len() == 1));
        }
    }

    #[test]
    fn bad_config_rejected() {
        let cfg = GeneratorConfig {
            alpha: (0.0, 0.5),
            ..GeneratorConfig::default()
        };
        assert!(matches!(random_instance(0, &cfg), Err(HarnessError::InvalidConfig(_))));
    }
}
