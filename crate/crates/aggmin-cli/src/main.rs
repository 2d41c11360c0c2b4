//! `aggmin`: minimize nonlocal interaction energies over capped densities
//! and particle ensembles, and check the results against first-order
//! optimality conditions and closed-form reference solutions.

mod config;
mod outputs;
mod selftest;

use clap::{Parser, Subcommand};
use std::path::{Path, PathBuf};
use std::time::Instant;

use aggmin_core::{
    ball_solution, convergence_report, density_minimize, el_verify, hls_check,
    hls_sharp_constant, node_potentials, particle_flow, state_energy, two_particle_equilibrium,
    Error, Exp1dSolution, Result, State, Termination,
};
use config::{load_config, RunConfig};
use outputs::{
    ensure_dir, read_state_csv, write_psi_csv, write_result_json, write_state_csv,
    write_trace_csv, ElDoc, EnergyDoc, MomentsDoc, ResultDoc,
};

#[derive(Parser)]
#[command(
    name = "aggmin",
    version,
    about = "Nonlocal interaction-energy minimization over capped densities"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Evaluate the energy of a state (the config's initial state, or a
    /// state.csv written by an earlier run)
    Energy {
        #[arg(long)]
        config: PathBuf,
        /// state.csv to evaluate instead of the initial state
        #[arg(long)]
        state: Option<PathBuf>,
    },
    /// Run the minimization described by a config
    Minimize {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the config's output directory
        #[arg(long)]
        output_dir: Option<PathBuf>,
    },
    /// Check first-order optimality of a state
    VerifyEl {
        #[arg(long)]
        config: PathBuf,
        /// state.csv to check instead of the initial state
        #[arg(long)]
        state: Option<PathBuf>,
        /// Relative support threshold (default 1e-3)
        #[arg(long)]
        threshold: Option<f64>,
        /// Absolute tolerance (default 1e-3·|c0|)
        #[arg(long)]
        tol: Option<f64>,
        /// Directory for the psi.csv profile
        #[arg(long)]
        output_dir: Option<PathBuf>,
    },
    /// Closed-form reference solutions as JSON
    Analytic {
        #[command(subcommand)]
        which: AnalyticCmd,
    },
    /// Sharp interpolation constant, optionally checking a state against the
    /// inequality
    Hls {
        #[arg(long, allow_hyphen_values = true)]
        gamma: f64,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        state: Option<PathBuf>,
    },
    /// Run the built-in invariant checks
    Selftest,
}

#[derive(Subcommand)]
enum AnalyticCmd {
    /// Uniform-ball minimizer in dimension N > 2
    Ball {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        mass: f64,
        #[arg(long)]
        beta: f64,
    },
    /// Exponential-kernel minimizer on the line
    Bt1d {
        #[arg(long)]
        mass: f64,
        #[arg(long)]
        beta: f64,
    },
    /// Symmetric two-particle equilibrium
    TwoParticle {
        #[arg(long)]
        mass: f64,
        #[arg(long)]
        beta: f64,
    },
}

fn main() {
    std::process::exit(run());
}

fn run() -> i32 {
    if let Some(code) = init_thread_pool() {
        return code;
    }
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let benign = matches!(
                e.kind(),
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion
            );
            let _ = e.print();
            return if benign { 0 } else { 1 };
        }
    };
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("{e}");
            exit_code(&e)
        }
    }
}

/// `AGGMIN_THREADS` caps the worker count; unset leaves the default pool.
fn init_thread_pool() -> Option<i32> {
    let Ok(raw) = std::env::var("AGGMIN_THREADS") else {
        return None;
    };
    let threads = match raw.trim().parse::<usize>() {
        Ok(n) if n >= 1 => n,
        _ => {
            eprintln!("config error: AGGMIN_THREADS must be a positive integer, got {raw:?}");
            return Some(1);
        }
    };
    if let Err(e) = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
    {
        eprintln!("config error: cannot configure {threads} worker threads: {e}");
        return Some(1);
    }
    None
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Domain(_) | Error::Config(_) | Error::Unsupported(_) => 1,
        Error::Numerical(_) => 2,
        Error::NonConvergence(_) => 3,
    }
}

fn dispatch(cli: Cli) -> Result<i32> {
    match cli.cmd {
        Cmd::Energy { config, state } => cmd_energy(&config, state.as_deref()),
        Cmd::Minimize { config, output_dir } => cmd_minimize(&config, output_dir),
        Cmd::VerifyEl {
            config,
            state,
            threshold,
            tol,
            output_dir,
        } => cmd_verify_el(&config, state.as_deref(), threshold, tol, output_dir),
        Cmd::Analytic { which } => cmd_analytic(which),
        Cmd::Hls {
            gamma,
            n,
            config,
            state,
        } => cmd_hls(gamma, n, config.as_deref(), state.as_deref()),
        Cmd::Selftest => Ok(selftest::run_all()),
    }
}

fn resolve_state(cfg: &RunConfig, state_path: Option<&Path>) -> Result<State> {
    match state_path {
        Some(p) => read_state_csv(p, cfg),
        None => cfg.initial_state(),
    }
}

fn print_json(value: &serde_json::Value) {
    println!(
        "{}",
        serde_json::to_string_pretty(value).expect("JSON documents are serializable")
    );
}

fn cmd_energy(config_path: &Path, state_path: Option<&Path>) -> Result<i32> {
    let cfg = load_config(config_path)?;
    let kernel = cfg.kernel()?;
    let conf = cfg.confinement()?;
    let state = resolve_state(&cfg, state_path)?;
    let breakdown = state_energy(&state, &kernel, &conf)?;
    let moments = state.moments();
    print_json(&serde_json::json!({
        "energy": EnergyDoc::from(&breakdown),
        "moments": MomentsDoc::from(&moments),
    }));
    Ok(0)
}

fn cmd_minimize(config_path: &Path, output_dir: Option<PathBuf>) -> Result<i32> {
    let cfg = load_config(config_path)?;
    let warnings = cfg.warnings();
    for w in &warnings {
        eprintln!("warning: {w}");
    }
    let kernel = cfg.kernel()?;
    let conf = cfg.confinement()?;
    let solver = cfg.solver.to_solver_config();
    let initial = cfg.initial_state()?;

    let started = Instant::now();
    let (final_state, trace) = match &initial {
        State::Particles(e) => {
            let (out, trace) = particle_flow(e, &kernel, &conf, &solver)?;
            (State::Particles(out), trace)
        }
        grid => density_minimize(grid, &kernel, &conf, cfg.constraint.mass, &solver)?,
    };
    let wall_time_s = started.elapsed().as_secs_f64();

    let report = convergence_report(&trace)?;
    let breakdown = state_energy(&final_state, &kernel, &conf)?;
    let el = el_verify(&final_state, &kernel, &conf, None, None)?;
    let psi = node_potentials(&final_state, &kernel, &conf)?;
    let moments = final_state.moments();

    let doc = ResultDoc {
        config: &cfg,
        warnings: &warnings,
        termination: trace.termination.as_str(),
        iterations: report.iterations,
        wall_time_s,
        energy: EnergyDoc::from(&breakdown),
        moments: MomentsDoc::from(&moments),
        el: ElDoc::from(&el),
        monotone: report.monotone,
        mass_drift: report.mass_drift,
    };

    let dir = output_dir.or_else(|| cfg.output_dir.as_ref().map(PathBuf::from));
    if let Some(dir) = &dir {
        ensure_dir(dir)?;
        write_result_json(dir, &doc)?;
        write_state_csv(dir, &final_state)?;
        write_psi_csv(dir, &final_state, &psi, el.c0)?;
        write_trace_csv(dir, &trace)?;
    }
    print_json(&serde_json::to_value(&doc).expect("result document serializes"));

    if trace.termination == Termination::MaxIters {
        eprintln!(
            "did not converge: iteration budget {} exhausted before any tolerance was met",
            solver.max_iters
        );
        return Ok(3);
    }
    Ok(0)
}

fn cmd_verify_el(
    config_path: &Path,
    state_path: Option<&Path>,
    threshold: Option<f64>,
    tol: Option<f64>,
    output_dir: Option<PathBuf>,
) -> Result<i32> {
    let cfg = load_config(config_path)?;
    let kernel = cfg.kernel()?;
    let conf = cfg.confinement()?;
    let state = resolve_state(&cfg, state_path)?;
    let report = el_verify(&state, &kernel, &conf, threshold, tol)?;
    let psi = node_potentials(&state, &kernel, &conf)?;

    let dir = output_dir.or_else(|| cfg.output_dir.as_ref().map(PathBuf::from));
    if let Some(dir) = &dir {
        ensure_dir(dir)?;
        write_psi_csv(dir, &state, &psi, report.c0)?;
    }
    print_json(&serde_json::json!({ "el": ElDoc::from(&report) }));
    Ok(0)
}

fn cmd_analytic(which: AnalyticCmd) -> Result<i32> {
    match which {
        AnalyticCmd::Ball { n, mass, beta } => {
            let s = ball_solution(n, mass, beta)?;
            print_json(&serde_json::json!({
                "n": n,
                "m": mass,
                "beta": beta,
                "r0": s.r0,
                "height": s.height,
                "c0": s.c0,
                "second_moment": s.second_moment(),
                "energy": s.energy(),
            }));
        }
        AnalyticCmd::Bt1d { mass, beta } => {
            let s = Exp1dSolution::new(mass, beta)?;
            print_json(&serde_json::json!({
                "m": mass,
                "beta": beta,
                "support": s.support(),
                "peak": s.peak(),
                "edge": s.edge_value(),
            }));
        }
        AnalyticCmd::TwoParticle { mass, beta } => {
            let a = two_particle_equilibrium(mass, beta)?;
            print_json(&serde_json::json!({
                "m": mass,
                "beta": beta,
                "half_separation": a,
                "separation": 2.0 * a,
            }));
        }
    }
    Ok(0)
}

fn cmd_hls(
    gamma: f64,
    n: usize,
    config_path: Option<&Path>,
    state_path: Option<&Path>,
) -> Result<i32> {
    let constant = hls_sharp_constant(gamma, n)?;
    let mut doc = serde_json::json!({
        "gamma": gamma,
        "n": n,
        "constant": constant,
    });
    if let Some(cfg_path) = config_path {
        let cfg = load_config(cfg_path)?;
        let state = resolve_state(&cfg, state_path)?;
        let check = hls_check(&state, gamma)?;
        doc["check"] = serde_json::json!({
            "lhs": check.lhs,
            "norm_bound": check.norm_bound,
            "interp_bound": check.interp_bound,
            "ok": check.ok,
        });
    }
    print_json(&doc);
    Ok(0)
}
