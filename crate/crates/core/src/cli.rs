//! Command-line front end.
//!
//! Exit codes: 0 success, 1 invalid input, 2 solver did not converge,
//! 3 verification found failures, 64 usage error.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::bounds::{feasible_lambda_interval, poa_bound, poa_from_lambda, BoundError};
use crate::equilibria::{
    follower_equilibrium, system_optimal, EquilibriumResult, SolveError, SolverConfig,
};
use crate::game::{measure_links, play, GameError};
use crate::harness::{
    curve_table, fmt_num, verify_bounds, BatchConfig, CurveGrid, CurveKind, GeneratorConfig, HarnessError,
    OracleConfig, Shape,
};
use crate::model::{min_asymmetry, social_cost_links, ClassFlow, GameInstance, ModelError, PathFlow};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_NOT_CONVERGED: i32 = 2;
pub const EXIT_VERIFY_FAILED: i32 = 3;
pub const EXIT_USAGE: i32 = 64;

#[derive(Debug, Parser)]
#[command(name = "stackroute", version, about = "Mixed-autonomy Stackelberg routing: solvers, bounds and checks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check an instance file and print its size and asymmetry.
    Validate {
        #[arg(long)]
        instance: PathBuf,
    },
    /// Two-class system optimum.
    SolveOptimal {
        #[arg(long)]
        instance: PathBuf,
        #[command(flatten)]
        solver: SolverArgs,
        /// Per-link CSV of the optimal flow.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Human Wardrop equilibrium with no leader flow.
    SolveNash {
        #[arg(long)]
        instance: PathBuf,
        /// Override every pair's autonomy fraction; the human share `1 - alpha` is routed.
        #[arg(long)]
        alpha: Option<f64>,
        #[command(flatten)]
        solver: SolverArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Leader and follower play under the SCALE strategy.
    Play {
        #[arg(long)]
        instance: PathBuf,
        /// Override every pair's autonomy fraction.
        #[arg(long)]
        alpha: Option<f64>,
        #[command(flatten)]
        solver: SolverArgs,
        /// Per-link CSV of optimal and induced flows and measured ratios.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Price-of-anarchy bound for an autonomy fraction and degree of asymmetry.
    Bound {
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        mu: f64,
        /// Also evaluate lambda / (1 - omega(lambda)) at this lambda.
        #[arg(long)]
        lambda: Option<f64>,
        /// Key/value CSV of the result.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Curve tables as CSV (`series,x,y`).
    Curves {
        #[arg(long)]
        kind: String,
        /// Comma-separated asymmetry values.
        #[arg(long, value_delimiter = ',')]
        mu: Vec<f64>,
        #[arg(long, default_value_t = 0.5)]
        alpha: f64,
        /// Step of the x grid.
        #[arg(long, default_value_t = 0.01)]
        grid: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Play random instances and compare against the bound.
    Verify {
        #[arg(long, default_value_t = 200)]
        count: usize,
        /// First seed of the batch.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Lower end of the drawn per-link asymmetry.
        #[arg(long, default_value_t = 0.3)]
        mu: f64,
        #[arg(long, default_value_t = 0.5)]
        alpha: f64,
        #[arg(long, value_enum, default_value_t = ShapeArg::General)]
        shape: ShapeArg,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        #[arg(long, default_value_t = SolverConfig::default().relative_gap_tol)]
        tol: f64,
        #[arg(long = "max-iter", default_value_t = SolverConfig::default().max_iterations)]
        max_iter: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ShapeArg {
    General,
    Parallel,
}

#[derive(Debug, Clone, Args)]
pub struct SolverArgs {
    #[arg(long, default_value_t = SolverConfig::default().relative_gap_tol)]
    tol: f64,
    #[arg(long = "max-iter", default_value_t = SolverConfig::default().max_iterations)]
    max_iter: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl SolverArgs {
    fn config(&self) -> SolverConfig {
        SolverConfig {
            relative_gap_tol: self.tol,
            max_iterations: self.max_iter,
            seed: self.seed,
            ..SolverConfig::default()
        }
    }
}

/// Failure of a command, carrying its exit code.
#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn invalid(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_INVALID,
            message: message.into(),
        }
    }
}

impl From<ModelError> for Failure {
    fn from(e: ModelError) -> Self {
        Failure::invalid(e.to_string())
    }
}

impl From<BoundError> for Failure {
    fn from(e: BoundError) -> Self {
        Failure::invalid(e.to_string())
    }
}

impl From<HarnessError> for Failure {
    fn from(e: HarnessError) -> Self {
        Failure::invalid(e.to_string())
    }
}

impl From<SolveError> for Failure {
    fn from(e: SolveError) -> Self {
        let code = match e {
            SolveError::FollowerNotConverged(_) | SolveError::OptimumNotConverged(_) => EXIT_NOT_CONVERGED,
            _ => EXIT_INVALID,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

impl From<GameError> for Failure {
    fn from(e: GameError) -> Self {
        match e {
            GameError::Solve(e) => e.into(),
            e => Failure::invalid(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::invalid(e.to_string())
    }
}

/// Parse `args` (program name first) and run, writing to the process's
/// standard streams.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with(args, &mut stdout.lock(), &mut stderr.lock())
}

pub fn run_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{text}");
                    EXIT_OK
                }
                _ => {
                    let _ = write!(err, "{text}");
                    EXIT_USAGE
                }
            };
        }
    };
    match execute(cli.command, out) {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

fn load(path: &Path) -> Result<GameInstance, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::invalid(format!("cannot read {}: {e}", path.display())))?;
    Ok(GameInstance::from_json(&text)?)
}

fn write_file(path: &Path, contents: &str) -> Result<(), Failure> {
    fs::write(path, contents).map_err(|e| Failure::invalid(format!("cannot write {}: {e}", path.display())))
}

fn execute(command: Command, out: &mut dyn Write) -> Result<i32, Failure> {
    match command {
        Command::Validate { instance } => {
            let g = load(&instance)?;
            writeln!(out, "valid instance")?;
            writeln!(out, "nodes: {}", g.nodes().len())?;
            writeln!(out, "links: {}", g.links().len())?;
            writeln!(out, "od pairs: {}", g.od_pairs().len())?;
            writeln!(out, "paths: {}", g.paths().len())?;
            writeln!(out, "min asymmetry: {}", fmt_num(min_asymmetry(&g)?))?;
            match g.uniform_alpha() {
                Some(a) => writeln!(out, "alpha: {}", fmt_num(a))?,
                None => writeln!(out, "alpha: heterogeneous")?,
            }
            Ok(EXIT_OK)
        }
        Command::SolveOptimal { instance, solver, out: path } => {
            let g = load(&instance)?;
            let (r, code) = partial(system_optimal(&g, &solver.config()), |e| match e {
                SolveError::OptimumNotConverged(r) => Ok(*r),
                e => Err(e),
            })?;
            writeln!(out, "optimal cost: {}", fmt_num(r.objective))?;
            writeln!(out, "relative gap: {}", fmt_num(r.relative_gap))?;
            writeln!(out, "iterations: {}", r.iterations)?;
            writeln!(out, "converged: {}", r.converged)?;
            if let Some(p) = path {
                write_file(&p, &class_flow_csv(&g, &r.flow))?;
            }
            Ok(code)
        }
        Command::SolveNash {
            instance,
            alpha,
            solver,
            out: path,
        } => {
            let mut g = load(&instance)?;
            if let Some(a) = alpha {
                g = g.with_uniform_alpha(a)?;
            }
            let zero = vec![0.0; g.links().len()];
            let (r, code) = partial(follower_equilibrium(&g, &zero, &solver.config()), |e| match e {
                SolveError::FollowerNotConverged(r) => Ok(*r),
                e => Err(e),
            })?;
            let cost = social_cost_links(&g, &zero, &r.flow.link);
            writeln!(out, "equilibrium cost: {}", fmt_num(cost))?;
            writeln!(out, "relative gap: {}", fmt_num(r.relative_gap))?;
            writeln!(out, "iterations: {}", r.iterations)?;
            writeln!(out, "converged: {}", r.converged)?;
            if let Some(p) = path {
                write_file(&p, &path_flow_csv(&g, &r.flow))?;
            }
            Ok(code)
        }
        Command::Play {
            instance,
            alpha,
            solver,
            out: path,
        } => {
            let mut g = load(&instance)?;
            if let Some(a) = alpha {
                g = g.with_uniform_alpha(a)?;
            }
            let o = play(&g, &solver.config())?;
            let mu = min_asymmetry(&g)?;
            let bound = poa_bound(o.alpha, mu)?;
            writeln!(out, "alpha: {}", fmt_num(o.alpha))?;
            writeln!(out, "mu: {}", fmt_num(mu))?;
            writeln!(out, "optimal cost: {}", fmt_num(o.optimal_cost))?;
            writeln!(out, "induced cost: {}", fmt_num(o.induced_cost))?;
            writeln!(out, "empirical poa: {}", fmt_num(o.empirical_poa))?;
            writeln!(out, "poa bound: {} ({})", fmt_num(bound.bound.value()), bound.region)?;
            writeln!(out, "wardrop gap: {}", fmt_num(o.wardrop_gap))?;
            writeln!(out, "optimum certified: {}", o.optimum_certified)?;
            writeln!(out, "follower converged: {}", o.follower_converged)?;
            if let Some(p) = path {
                let m = measure_links(&o, &g);
                let opt_or = |x: Option<f64>| x.map_or(String::new(), fmt_num);
                let mut csv = String::from("link,fa_opt,fh_opt,s,t,gamma,beta,alpha_star\n");
                for (l, link) in g.links().iter().enumerate() {
                    let r = m.links[l];
                    csv.push_str(&format!(
                        "{},{},{},{},{},{},{},{}\n",
                        link.id,
                        fmt_num(o.optimal_flow.autonomous.link[l]),
                        fmt_num(o.optimal_flow.human.link[l]),
                        fmt_num(o.leader_flow.link[l]),
                        fmt_num(o.follower_flow.link[l]),
                        opt_or(r.gamma),
                        opt_or(r.beta),
                        opt_or(r.alpha_star)
                    ));
                }
                write_file(&p, &csv)?;
            }
            Ok(if o.converged() { EXIT_OK } else { EXIT_NOT_CONVERGED })
        }
        Command::Bound {
            alpha,
            mu,
            lambda,
            out: path,
        } => {
            let r = poa_bound(alpha, mu)?;
            let th = r.thresholds;
            let mut rows: Vec<(&str, String)> = vec![
                ("alpha", fmt_num(alpha)),
                ("mu", fmt_num(mu)),
                ("region", r.region.to_string()),
                ("bound", fmt_num(r.bound.value())),
                ("expression", r.expression.to_string()),
                ("alpha0", fmt_num(th.alpha0.value())),
                ("alpha1", fmt_num(th.alpha1.value())),
                ("alpha1_alt", fmt_num(th.alpha1_alt.value())),
                ("alpha2", fmt_num(th.alpha2.value())),
                ("alpha_tilde", fmt_num(th.alpha_tilde.value())),
                ("lambda_star", fmt_num(r.lambdas.star)),
                ("lambda_plus", fmt_num(r.lambdas.plus)),
            ];
            match feasible_lambda_interval(alpha, mu)? {
                Some(iv) => rows.push(("lambda_set", format!("({}, 1]", fmt_num(iv.lower)))),
                None => rows.push(("lambda_set", "empty".into())),
            }
            if let Some(l) = lambda {
                let v = match poa_from_lambda(l, alpha, mu) {
                    Ok(v) => fmt_num(v),
                    Err(BoundError::InfeasibleLambda { .. }) => "infeasible".into(),
                    Err(e) => return Err(e.into()),
                };
                rows.push(("poa_at_lambda", v));
            }
            for (k, v) in &rows {
                writeln!(out, "{k}: {v}")?;
            }
            if let Some(p) = path {
                let mut csv = String::from("key,value\n");
                for (k, v) in &rows {
                    csv.push_str(&format!("{k},{}\n", v.replace(',', ";")));
                }
                write_file(&p, &csv)?;
            }
            Ok(EXIT_OK)
        }
        Command::Curves {
            kind,
            mu,
            alpha,
            grid,
            out: path,
        } => {
            let kind: CurveKind = kind.parse()?;
            let t = curve_table(
                kind,
                &CurveGrid {
                    step: grid,
                    mus: mu,
                    alpha,
                    ..CurveGrid::default()
                },
            )?;
            let csv = t.to_csv();
            match path {
                Some(p) => {
                    write_file(&p, &csv)?;
                    writeln!(out, "{}: {} points written to {}", kind.name(), t.points.len(), p.display())?;
                }
                None => write!(out, "{csv}")?,
            }
            Ok(EXIT_OK)
        }
        Command::Verify {
            count,
            seed,
            mu,
            alpha,
            shape,
            jobs,
            tol,
            max_iter,
            out: path,
        } => {
            let config = BatchConfig {
                first_seed: seed,
                count,
                generator: GeneratorConfig {
                    shape: match shape {
                        ShapeArg::General => Shape::General,
                        ShapeArg::Parallel => Shape::Parallel,
                    },
                    mu_min: mu,
                    alpha: (alpha, alpha),
                    ..GeneratorConfig::default()
                },
                solver: SolverConfig {
                    relative_gap_tol: tol,
                    max_iterations: max_iter,
                    ..SolverConfig::default()
                },
                oracle: Some(OracleConfig::default()),
                jobs,
            };
            config.solver.validate()?;
            let report = verify_bounds(&config)?;
            let s = report.summary();
            writeln!(out, "instances: {}", s.total)?;
            writeln!(out, "pass: {}", s.pass)?;
            writeln!(out, "fail: {}", s.fail)?;
            writeln!(out, "vacuous: {}", s.vacuous)?;
            writeln!(out, "uncertified: {}", s.uncertified)?;
            writeln!(out, "error: {}", s.error)?;
            writeln!(out, "max poa: {}", fmt_num(s.max_poa))?;
            writeln!(out, "min margin: {}", fmt_num(s.min_margin))?;
            if let Some(p) = path {
                write_file(&p, &report.to_csv())?;
            }
            Ok(if s.fail > 0 { EXIT_VERIFY_FAILED } else { EXIT_OK })
        }
    }
}

// Keep a partial result of a solver that ran out of iterations, with exit
// code 2; any other error is fatal.
fn partial<F>(
    r: Result<EquilibriumResult<F>, SolveError>,
    recover: impl FnOnce(SolveError) -> Result<EquilibriumResult<F>, SolveError>,
) -> Result<(EquilibriumResult<F>, i32), Failure> {
    match r {
        Ok(r) => Ok((r, EXIT_OK)),
        Err(e) => Ok((recover(e)?, EXIT_NOT_CONVERGED)),
    }
}

fn class_flow_csv(g: &GameInstance, flow: &ClassFlow) -> String {
    let mut csv = String::from("link,fa,fh,total,latency\n");
    for (l, link) in g.links().iter().enumerate() {
        let (fa, fh) = (flow.autonomous.link[l], flow.human.link[l]);
        csv.push_str(&format!(
            "{},{},{},{},{}\n",
            link.id,
            fmt_num(fa),
            fmt_num(fh),
            fmt_num(fa + fh),
            fmt_num(link.latency(fa, fh))
        ));
    }
    csv
}

fn path_flow_csv(g: &GameInstance, flow: &PathFlow) -> String {
    let mut csv = String::from("link,flow,latency\n");
    for (l, link) in g.links().iter().enumerate() {
        let t = flow.link[l];
        csv.push_str(&format!("{},{},{}\n", link.id, fmt_num(t), fmt_num(link.latency(0.0, t))));
    }
    csv
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_capture(args: &[&str]) -> (i32, String, String) {
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let code = run_with(std::iter::once("stackroute").chain(args.iter().copied()), &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn bound_command() {
        let (code, out, _) = run_capture(&["bound", "--alpha", "0.5", "--mu", "0.3333333"]);
        assert_eq!(code, EXIT_OK);
        assert!(out.contains("region: A_lambda*"), "{out}");
        let bound: f64 = out
            .lines()
            .find_map(|l| l.strip_prefix("bound: "))
            .unwrap()
            .parse()
            .unwrap();
        assert!((bound - 2.0).abs() < 1e-5);
    }

    #[test]
    fn infinite_bound_prints_inf() {
        let (code, out, _) = run_capture(&["bound", "--alpha", "0.3", "--mu", "0.1111111111"]);
        assert_eq!(code, EXIT_OK);
        assert!(out.contains("bound: inf\n"), "{out}");
    }

    #[test]
    fn usage_errors() {
        assert_eq!(run_capture(&[]).0, EXIT_USAGE);
        assert_eq!(run_capture(&["bound", "--alpha", "x", "--mu", "1"]).0, EXIT_USAGE);
        assert_eq!(run_capture(&["frobnicate"]).0, EXIT_USAGE);
        assert_eq!(run_capture(&["--help"]).0, EXIT_OK);
    }

    #[test]
    fn domain_errors_are_invalid_input() {
        assert_eq!(run_capture(&["bound", "--alpha", "1.5", "--mu", "1"]).0, EXIT_INVALID);
        assert_eq!(run_capture(&["curves", "--kind", "nope"]).0, EXIT_INVALID);
        assert_eq!(run_capture(&["validate", "--instance", "/nonexistent/x.json"]).0, EXIT_INVALID);
    }

    #[test]
    fn curves_to_stdout() {
        let (code, out, _) = run_capture(&["curves", "--kind", "poa-bounds", "--mu", "1.0", "--grid", "0.25"]);
        assert_eq!(code, EXIT_OK);
        assert_eq!(out.lines().next(), Some("series,x,y"));
        assert_eq!(out.lines().count(), 4);
    }
}
