//! Acceptance suite: reproduction of the closed-form reference solutions,
//! invariant checks on the energy, and determinism guarantees, each printed
//! as one `[criterion N] PASS/FAIL` line (run with `--nocapture` to see the
//! lines for passing tests).
//!
//! Reference decimals are frozen from independent evaluations of the closed
//! forms (high-precision arithmetic outside this codebase), so the tests pin
//! the implementation against the formulas rather than against itself.

use aggmin_core::{
    ball_solution, density_minimize, hls_check, hls_sharp_constant, particle_energy,
    particle_flow, particle_velocity, state_energy, two_particle_equilibrium, Confinement,
    Exp1dSolution, Kernel, ParticleEnsemble, RadialDensity, SeededRng, SolverConfig, State,
    Termination,
};
use std::f64::consts::PI;
use std::path::Path;
use std::process::Command;
use std::sync::Mutex;
use std::time::Instant;

// Uniform ball, N = 3, m = 1, beta = 1.
const BALL_R0: f64 = 0.6933612743506347;
const BALL_HEIGHT: f64 = 0.7161972439135291;
const BALL_C0: f64 = 2.3075993124918535;
const BALL_ENERGY: f64 = 1.2980246132766675;
const BALL_I2: f64 = 0.2884499140614816;

// Two equal point masses summing to m = 1, beta = 1.
const PAIR_HALF_SEP: f64 = 0.34668063717531733;

// Exponential-kernel line minimizer, m = 2, beta = 1.
const LINE_L: f64 = 0.5874010519681994;
const LINE_PEAK: f64 = 1.759921049894873;

// Sharp interpolation constant at gamma = -1, N = 3.
const HLS_C: f64 = 2.2940107035415975;

/// Serializes the wall-clock-gated tests so their timing is not distorted by
/// sibling tests on the same cores.
static TIMED: Mutex<()> = Mutex::new(());

fn timed_guard() -> std::sync::MutexGuard<'static, ()> {
    TIMED.lock().unwrap_or_else(|p| p.into_inner())
}

fn report(criterion: usize, gates: &[(bool, String)]) {
    let pass = gates.iter().all(|g| g.0);
    let detail: Vec<&str> = gates.iter().map(|g| g.1.as_str()).collect();
    println!(
        "[criterion {criterion}] {} ({})",
        if pass { "PASS" } else { "FAIL" },
        detail.join(", ")
    );
    for (ok, what) in gates {
        assert!(*ok, "criterion {criterion}: {what}");
    }
}

fn newtonian_quadratic() -> Kernel {
    Kernel::power_law(-1.0, 2.0).unwrap()
}

fn run_minimize(config: &serde_json::Value, dir: &Path, threads: &str) -> std::process::Output {
    let cfg_path = dir.join("config.json");
    std::fs::write(&cfg_path, serde_json::to_string_pretty(config).unwrap()).unwrap();
    Command::new(env!("CARGO_BIN_EXE_aggmin"))
        .arg("minimize")
        .arg("--config")
        .arg(&cfg_path)
        .arg("--output-dir")
        .arg(dir.join("out"))
        .env("AGGMIN_THREADS", threads)
        .output()
        .expect("the minimize run spawns")
}

fn read_result(dir: &Path) -> serde_json::Value {
    let text = std::fs::read_to_string(dir.join("out/result.json")).unwrap();
    serde_json::from_str(&text).unwrap()
}

/// `(coordinate, value)` rows of a grid state.csv.
fn read_grid_csv(path: &Path) -> Vec<(f64, f64)> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(1)
        .map(|line| {
            let mut parts = line.split(',');
            let x: f64 = parts.next().unwrap().parse().unwrap();
            let v: f64 = parts.next().unwrap().parse().unwrap();
            (x, v)
        })
        .collect()
}

/// Radial density with a random support cutoff and a random value shape,
/// feasible for its own cap by construction.
fn random_radial(rng: &mut SeededRng, cells: usize, rmax: f64, cap: f64) -> RadialDensity {
    let lo = cells / 8 + 1;
    let cutoff = lo + (rng.next_f64() * (cells - lo) as f64) as usize;
    let shape = 0.5 + 1.5 * rng.next_f64();
    let mut values = vec![0.0; cells];
    for v in values.iter_mut().take(cutoff.min(cells)) {
        *v = cap * rng.next_f64().powf(shape);
    }
    RadialDensity::new(3, rmax, values, cap).unwrap()
}

#[test]
fn criterion_1_ball_reproduction_from_constant_start() {
    let _guard = timed_guard();
    let sol = ball_solution(3, 1.0, 1.0).unwrap();
    assert!((sol.r0 - BALL_R0).abs() < 1e-12);
    assert!((sol.height - BALL_HEIGHT).abs() < 1e-12);
    assert!((sol.c0 - BALL_C0).abs() < 1e-12);
    assert!((sol.energy() - BALL_ENERGY).abs() < 1e-12);

    let dir = tempfile::tempdir().unwrap();
    let config = serde_json::json!({
        "dim": 3,
        "kernel": {"type": "power_law", "p": -1.0, "q": 2.0},
        "confinement": {"type": "quadratic", "beta": 1.0},
        "state": {"type": "radial", "cells": 2048, "rmax": 1.5},
        "constraint": {"M": 0.75, "m": 1.0},
        "solver": {"max_iters": 60000, "tol_energy": 1e-16, "tol_residual": 1e-9}
    });
    let started = Instant::now();
    let output = run_minimize(&config, dir.path(), "1");
    let wall = started.elapsed().as_secs_f64();
    assert!(
        output.status.success(),
        "minimize exited with {:?}: {}",
        output.status.code(),
        String::from_utf8_lossy(&output.stderr)
    );

    let result = read_result(dir.path());
    let energy = result["energy"]["total"].as_f64().unwrap();
    let el_pass = result["el"]["pass"].as_bool().unwrap();
    let c0 = result["el"]["c0"].as_f64().unwrap();

    let rows = read_grid_csv(&dir.path().join("out/state.csv"));
    let max = rows.iter().map(|r| r.1).fold(0.0, f64::max);
    let cut = 1e-3 * max;
    let support = rows
        .iter()
        .filter(|r| r.1 >= cut)
        .map(|r| r.0)
        .fold(0.0, f64::max);
    let interior: Vec<f64> = rows
        .iter()
        .filter(|r| r.0 <= 0.5 * support)
        .map(|r| r.1)
        .collect();
    let plateau = interior.iter().sum::<f64>() / interior.len() as f64;

    let h = 1.5 / 2048.0;
    report(
        1,
        &[
            (
                (plateau - BALL_HEIGHT).abs() <= 0.02 * BALL_HEIGHT,
                format!("plateau rel {:.1e}", ((plateau - BALL_HEIGHT) / BALL_HEIGHT).abs()),
            ),
            (
                (support - BALL_R0).abs() <= 2.0 * h,
                format!("edge {:.2} cells off", (support - BALL_R0).abs() / h),
            ),
            (
                (energy - BALL_ENERGY).abs() <= 0.005 * BALL_ENERGY,
                format!("energy rel {:.1e}", ((energy - BALL_ENERGY) / BALL_ENERGY).abs()),
            ),
            (el_pass, "el pass".to_string()),
            (
                (c0 - BALL_C0).abs() <= 1e-3,
                format!("c0 off {:.1e}", (c0 - BALL_C0).abs()),
            ),
            (wall <= 60.0, format!("wall {wall:.1} s")),
        ],
    );
}

#[test]
fn criterion_2_injected_ball_is_stationary() {
    let sol = ball_solution(3, 1.0, 1.0).unwrap();
    let injected = State::Radial(sol.inject_radial(2048, 1.5, 0.75).unwrap());
    let (_, trace) = density_minimize(
        &injected,
        &newtonian_quadratic(),
        &Confinement::quadratic(1.0).unwrap(),
        1.0,
        &SolverConfig::default(),
    )
    .unwrap();
    let iters = trace.rows.len() - 1;
    let e0 = trace.rows[0].energy;
    let e1 = trace.rows.last().unwrap().energy;
    report(
        2,
        &[
            (
                trace.termination == Termination::ResidualTol,
                format!("termination {}", trace.termination.as_str()),
            ),
            (iters <= 5, format!("{iters} iterations")),
            (
                ((e1 - e0) / e0).abs() <= 1e-6,
                format!("energy change rel {:.1e}", ((e1 - e0) / e0).abs()),
            ),
        ],
    );
}

#[test]
fn criterion_3_two_particle_equilibrium() {
    let _guard = timed_guard();
    assert!((two_particle_equilibrium(1.0, 1.0).unwrap() - PAIR_HALF_SEP).abs() < 1e-12);

    let e = ParticleEnsemble::new(3, vec![1.0, 0.0, 0.0, -1.0, 0.0, 0.0], vec![0.5, 0.5]).unwrap();
    let cfg = SolverConfig {
        tol_energy: 1e-18,
        tol_residual: Some(1e-10),
        ..SolverConfig::default()
    };
    let started = Instant::now();
    let (out, trace) = particle_flow(
        &e,
        &newtonian_quadratic(),
        &Confinement::quadratic(1.0).unwrap(),
        &cfg,
    )
    .unwrap();
    let wall = started.elapsed().as_secs_f64();
    let d: f64 = out
        .position(0)
        .iter()
        .zip(out.position(1))
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt();
    let half = 0.5 * d;
    report(
        3,
        &[
            (
                (half - PAIR_HALF_SEP).abs() <= 1e-8,
                format!("half-separation off {:.1e}", (half - PAIR_HALF_SEP).abs()),
            ),
            (
                trace.termination != Termination::MaxIters,
                format!("termination {}", trace.termination.as_str()),
            ),
            (wall <= 1.0, format!("wall {:.2} s", wall)),
        ],
    );
}

#[test]
fn criterion_4_five_hundred_particle_run() {
    let _guard = timed_guard();
    let mut rng = SeededRng::new(20260822);
    let e =
        ParticleEnsemble::sample_uniform_ball(&mut rng, 500, 2.0, &[0.0, 0.0, 0.0], 1.0).unwrap();
    let cfg = SolverConfig {
        max_iters: 4000,
        ..SolverConfig::default()
    };
    let started = Instant::now();
    let (out, trace) = particle_flow(
        &e,
        &newtonian_quadratic(),
        &Confinement::quadratic(1.0).unwrap(),
        &cfg,
    )
    .unwrap();
    let wall = started.elapsed().as_secs_f64();

    let strictly_decreasing = trace
        .rows
        .windows(2)
        .all(|w| w[1].energy < w[0].energy);
    let i2 = out.moments().second_moment;
    report(
        4,
        &[
            (
                (i2 - BALL_I2).abs() <= 0.05 * BALL_I2,
                format!("I2 rel {:.1e}", ((i2 - BALL_I2) / BALL_I2).abs()),
            ),
            (
                strictly_decreasing,
                format!("strict descent over {} accepted steps", trace.rows.len() - 1),
            ),
            (
                trace.termination != Termination::MaxIters,
                format!("termination {}", trace.termination.as_str()),
            ),
            (wall <= 120.0, format!("wall {wall:.1} s")),
        ],
    );
}

#[test]
fn criterion_5_line_profile_reproduction() {
    let sol = Exp1dSolution::new(2.0, 1.0).unwrap();
    assert!((sol.support() - LINE_L).abs() < 1e-12);
    assert!((sol.peak() - LINE_PEAK).abs() < 1e-12);

    let injected = sol.inject_line(2048, 1.5, 2.0).unwrap();
    let mass_err = (injected.mass() - 2.0).abs();

    // The solver must hold and refine the injected profile: wrong operators
    // or a wrong projection would drift it off the reported gates.
    let cfg = SolverConfig {
        max_iters: 20000,
        tol_energy: 1e-16,
        tol_residual: Some(1e-9),
        ..SolverConfig::default()
    };
    let (out, trace) = density_minimize(
        &State::Line(injected),
        &Kernel::Exponential,
        &Confinement::quadratic(1.0).unwrap(),
        2.0,
        &cfg,
    )
    .unwrap();
    let State::Line(d) = &out else { unreachable!() };

    let h = d.cell_width();
    let mut max_err = 0.0f64;
    for i in 0..d.cells() {
        let a = -1.5 + i as f64 * h;
        let target = sol.cell_average(a, a + h).unwrap();
        max_err = max_err.max((d.values()[i] - target).abs());
    }
    let support = d.support_radius(1e-3).unwrap();
    report(
        5,
        &[
            (
                max_err <= 0.02 * LINE_PEAK,
                format!("max error {:.1e} of peak", max_err / LINE_PEAK),
            ),
            (
                (support - LINE_L).abs() <= 2.0 * h,
                format!("edge {:.2} cells off", (support - LINE_L).abs() / h),
            ),
            (mass_err <= 1e-8, format!("profile mass off {mass_err:.1e}")),
            (
                trace.termination != Termination::MaxIters,
                format!("termination {}", trace.termination.as_str()),
            ),
        ],
    );
}

/// Log-gamma coded independently of the library: Stirling's series after
/// shifting the argument above 20.
fn stirling_log_gamma(x: f64) -> f64 {
    let mut shift = 0.0f64;
    let mut z = x;
    while z < 20.0 {
        shift += z.ln();
        z += 1.0;
    }
    let inv = 1.0 / z;
    let inv2 = inv * inv;
    let series = inv / 12.0 - inv * inv2 / 360.0 + inv * inv2 * inv2 / 1260.0
        - inv * inv2 * inv2 * inv2 / 1680.0;
    (z - 0.5) * z.ln() - z + 0.5 * (2.0 * PI).ln() + series - shift
}

fn oracle_constant(gamma: f64, n: f64) -> f64 {
    let lg = stirling_log_gamma;
    (-0.5 * gamma * PI.ln() + lg(0.5 * n + 0.5 * gamma) - lg(n + 0.5 * gamma)
        + (-1.0 - gamma / n) * (lg(0.5 * n) - lg(n)))
        .exp()
}

#[test]
fn criterion_6_hls_constant_and_bounds() {
    let c = hls_sharp_constant(-1.0, 3).unwrap();
    let oracle_gap = (c - oracle_constant(-1.0, 3.0)).abs();
    assert!((c - HLS_C).abs() < 1e-12, "constant drifted to {c}");
    let side_gaps = [(-2.0, 3.0), (-1e-6, 3.0)]
        .iter()
        .map(|&(g, n)| (hls_sharp_constant(g, n as usize).unwrap() - oracle_constant(g, n)).abs())
        .fold(0.0f64, f64::max);

    let mut rng = SeededRng::new(61);
    let mut min_norm_margin = f64::INFINITY;
    let mut min_interp_margin = f64::INFINITY;
    let mut all_hold = true;
    for k in 0..200 {
        let cells = 64 + (k % 5) * 16;
        let rmax = 0.6 + 1.4 * rng.next_f64();
        let cap = 0.3 + 2.7 * rng.next_f64();
        let d = random_radial(&mut rng, cells, rmax, cap);
        let check = hls_check(&State::Radial(d), -1.0).unwrap();
        all_hold &= check.ok
            && check.lhs <= check.norm_bound
            && check.lhs <= check.interp_bound;
        min_norm_margin = min_norm_margin.min(check.norm_bound - check.lhs);
        min_interp_margin = min_interp_margin.min(check.interp_bound - check.lhs);
    }
    report(
        6,
        &[
            (
                oracle_gap <= 1e-9,
                format!("constant {c:.10} within {oracle_gap:.1e} of the gamma oracle"),
            ),
            (
                side_gaps <= 1e-9,
                format!("side anchors within {side_gaps:.1e}"),
            ),
            (
                all_hold && min_norm_margin >= 0.0,
                format!("norm-bound margin >= {min_norm_margin:.2e} over 200 densities"),
            ),
            (
                min_interp_margin >= 0.0,
                format!("interpolation margin >= {min_interp_margin:.2e}"),
            ),
        ],
    );
}

#[test]
fn criterion_7_energy_identities() {
    let kernel = newtonian_quadratic();

    // Decomposition of the Newtonian-quadratic energy against direct
    // quadrature.
    let mut rng = SeededRng::new(71);
    let mut max_decomp_rel = 0.0f64;
    for k in 0..50 {
        let cells = 64 + (k % 5) * 24;
        let rmax = 0.8 + 0.8 * rng.next_f64();
        let cap = 0.4 + 2.6 * rng.next_f64();
        let beta = 2.0 * rng.next_f64();
        let d = random_radial(&mut rng, cells, rmax, cap);
        let direct = state_energy(
            &State::Radial(d.clone()),
            &kernel,
            &Confinement::quadratic(beta).unwrap(),
        )
        .unwrap()
        .total;
        let split = aggmin_core::energy_decomposition(&d, beta).unwrap().total;
        max_decomp_rel = max_decomp_rel.max(((direct - split) / direct).abs());
    }

    // Translation invariance without confinement, and velocity against
    // central finite differences of the energy.
    let mut max_shift_rel = 0.0f64;
    let mut max_grad_rel = 0.0f64;
    for k in 0..20 {
        let n = 6 + (k % 12);
        let positions: Vec<f64> = (0..3 * n).map(|_| rng.next_in(-1.0, 1.0)).collect();
        let weights: Vec<f64> = (0..n).map(|_| rng.next_in(0.5, 1.5) / n as f64).collect();
        let e = ParticleEnsemble::new(3, positions.clone(), weights.clone()).unwrap();

        let base = particle_energy(&e, &kernel, &Confinement::None).unwrap().total;
        let shift: Vec<f64> = (0..3).map(|_| rng.next_in(-4.0, 4.0)).collect();
        let moved: Vec<f64> = positions
            .iter()
            .enumerate()
            .map(|(i, x)| x + shift[i % 3])
            .collect();
        let es = ParticleEnsemble::new(3, moved, weights).unwrap();
        let shifted = particle_energy(&es, &kernel, &Confinement::None).unwrap().total;
        max_shift_rel = max_shift_rel.max(((base - shifted) / base).abs());

        let conf = Confinement::quadratic(0.7).unwrap();
        let v = particle_velocity(&e, &kernel, &conf).unwrap();
        let h = 1e-6;
        for i in 0..n {
            for dd in 0..3 {
                let mut plus = e.positions_flat().to_vec();
                plus[3 * i + dd] += h;
                let mut minus = e.positions_flat().to_vec();
                minus[3 * i + dd] -= h;
                let ep = particle_energy(&e.with_positions(plus).unwrap(), &kernel, &conf)
                    .unwrap()
                    .total;
                let em = particle_energy(&e.with_positions(minus).unwrap(), &kernel, &conf)
                    .unwrap()
                    .total;
                let expect = -(ep - em) / (2.0 * h) / e.weights()[i];
                let rel = (v[3 * i + dd] - expect).abs() / (1.0 + expect.abs());
                max_grad_rel = max_grad_rel.max(rel);
            }
        }
    }

    report(
        7,
        &[
            (
                max_decomp_rel <= 1e-6,
                format!("decomposition rel <= {max_decomp_rel:.1e} over 50 densities"),
            ),
            (
                max_shift_rel <= 1e-10,
                format!("translation rel <= {max_shift_rel:.1e} over 20 ensembles"),
            ),
            (
                max_grad_rel <= 1e-5,
                format!("velocity vs finite differences <= {max_grad_rel:.1e} over 20 states"),
            ),
        ],
    );
}

#[test]
fn criterion_8_strict_midpoint_convexity() {
    let kernel = newtonian_quadratic();
    let conf = Confinement::quadratic(1.0).unwrap();
    let mut rng = SeededRng::new(88);
    let mut min_gap = f64::INFINITY;
    let mut all_strict = true;
    for _ in 0..50 {
        let cap = 0.5 + 1.5 * rng.next_f64();
        let a = random_radial(&mut rng, 96, 1.2, cap);
        let b = random_radial(&mut rng, 96, 1.2, cap);
        // Matching masses keep the midpoint in the same constraint class.
        let m = a.mass().min(b.mass());
        let rescale = |d: &RadialDensity, m: f64| {
            let s = m / d.mass();
            d.with_values(d.values().iter().map(|v| v * s).collect()).unwrap()
        };
        let a = rescale(&a, m);
        let b = rescale(&b, m);
        assert!(a.values() != b.values());
        let mid = a
            .with_values(
                a.values()
                    .iter()
                    .zip(b.values())
                    .map(|(x, y)| 0.5 * (x + y))
                    .collect(),
            )
            .unwrap();

        let ea = state_energy(&State::Radial(a), &kernel, &conf).unwrap().total;
        let eb = state_energy(&State::Radial(b), &kernel, &conf).unwrap().total;
        let em = state_energy(&State::Radial(mid), &kernel, &conf).unwrap().total;
        let gap = 0.5 * (ea + eb) - em;
        all_strict &= em < 0.5 * (ea + eb);
        min_gap = min_gap.min(gap);
    }
    report(
        8,
        &[(
            all_strict && min_gap > 0.0,
            format!("midpoint below chord by >= {min_gap:.2e} on 50 pairs"),
        )],
    );
}

#[test]
fn criterion_9_determinism() {
    let _guard = timed_guard();
    let particle_config = serde_json::json!({
        "dim": 3,
        "kernel": {"type": "power_law", "p": -1.0, "q": 2.0},
        "confinement": {"type": "quadratic", "beta": 1.0},
        "state": {"type": "particles", "count": 64, "radius": 1.5, "seed": 777},
        "constraint": {"m": 1.0},
        "solver": {"max_iters": 400, "tol_residual": 1e-9}
    });
    let line_config = serde_json::json!({
        "dim": 1,
        "kernel": {"type": "power_law", "p": -0.5, "q": 2.0},
        "confinement": {"type": "quadratic", "beta": 1.0},
        "state": {"type": "line", "cells": 256, "halfwidth": 2.0},
        "constraint": {"M": 1.0, "m": 1.0},
        "solver": {"max_iters": 150}
    });

    let run = |config: &serde_json::Value, threads: &str| {
        let dir = tempfile::tempdir().unwrap();
        let output = run_minimize(config, dir.path(), threads);
        // Exit 3 (iteration budget) still writes complete outputs.
        assert!(
            matches!(output.status.code(), Some(0) | Some(3)),
            "unexpected exit {:?}: {}",
            output.status.code(),
            String::from_utf8_lossy(&output.stderr)
        );
        let trace = std::fs::read(dir.path().join("out/trace.csv")).unwrap();
        let state = std::fs::read(dir.path().join("out/state.csv")).unwrap();
        let energy = read_result(dir.path())["energy"]["total"].as_f64().unwrap();
        (trace, state, energy)
    };

    let (pt1, ps1, pe1) = run(&particle_config, "1");
    let (pt2, ps2, _) = run(&particle_config, "1");
    let (_, _, pe4) = run(&particle_config, "4");
    let (lt1, ls1, le1) = run(&line_config, "1");
    let (lt2, ls2, _) = run(&line_config, "1");
    let (_, _, le4) = run(&line_config, "4");

    let particle_threads_rel = ((pe1 - pe4) / pe1).abs();
    let line_threads_rel = ((le1 - le4) / le1).abs();
    report(
        9,
        &[
            (
                pt1 == pt2 && ps1 == ps2,
                format!("particle rerun byte-identical ({} B trace)", pt1.len()),
            ),
            (
                lt1 == lt2 && ls1 == ls2,
                format!("line rerun byte-identical ({} B trace)", lt1.len()),
            ),
            (
                particle_threads_rel <= 1e-12,
                format!("1 vs 4 threads rel {particle_threads_rel:.1e} (particles)"),
            ),
            (
                line_threads_rel <= 1e-12,
                format!("1 vs 4 threads rel {line_threads_rel:.1e} (line)"),
            ),
        ],
    );
}
