use stackroute::bounds::{poa_bound, Region};
use stackroute::equilibria::{system_optimal, wardrop_gap, SolverConfig};
use stackroute::game::{play, scale_strategy};
use stackroute::harness::{random_instance, GeneratorConfig};
use stackroute::model::{is_opt_restricted, is_stackelberg_feasible, min_asymmetry, social_cost, GameInstance};

fn load(name: &str) -> GameInstance {
    let path = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("data").join(name);
    GameInstance::from_json(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn json_round_trip() {
    for name in ["pigou.json", "braess.json"] {
        let g = load(name);
        let again = GameInstance::from_json(&g.to_spec().to_json()).unwrap();
        assert_eq!(g.to_spec(), again.to_spec());
    }
}

#[test]
fn scale_strategy_is_feasible_and_restricted() {
    let g = load("braess.json");
    let cfg = SolverConfig::default();
    let opt = system_optimal(&g, &cfg).unwrap();
    let s = scale_strategy(&g, &opt.flow, 0.3).unwrap();
    let check = is_stackelberg_feasible(&g, &s);
    assert!(check.feasible && check.weak);
    assert!(is_opt_restricted(&s.link, &opt.flow));
    assert!((s.total() - 0.3).abs() < 1e-12);
}

#[test]
fn braess_outcome_respects_bound() {
    let g = load("braess.json");
    let o = play(&g, &SolverConfig::default()).unwrap();
    assert!(o.converged());
    assert!(o.wardrop_gap <= 1e-8);
    let bound = poa_bound(0.3, min_asymmetry(&g).unwrap()).unwrap();
    assert_eq!(bound.region, Region::LambdaPlus);
    assert!(o.empirical_poa >= 1.0 - 1e-6);
    assert!(o.empirical_poa <= bound.bound.value() + 1e-6);
    let cost = social_cost(&g, &o.optimal_flow);
    assert!((cost - o.optimal_cost).abs() < 1e-9);
}

#[test]
fn random_instances_play_and_certify() {
    let cfg = GeneratorConfig {
        alpha: (0.2, 0.8),
        ..GeneratorConfig::default()
    };
    for seed in 100..130 {
        let g = random_instance(seed, &cfg).unwrap();
        let o = play(&g, &SolverConfig { seed, ..SolverConfig::default() }).unwrap();
        assert!(o.converged(), "seed {seed}");
        let gap = wardrop_gap(&g, &o.leader_flow.link, &o.follower_flow).unwrap();
        assert!(gap <= 1e-8, "seed {seed}: {gap}");
        let b = poa_bound(o.alpha, min_asymmetry(&g).unwrap()).unwrap().bound;
        if let Some(b) = b.finite() {
            assert!(o.empirical_poa <= b + 1e-6, "seed {seed}");
        }
    }
}
