//! Built-in invariant battery for `aggmin selftest`: fast end-to-end checks
//! of the library's reference values and conservation properties.

use aggmin_core::{
    ball_solution, el_verify, hls_sharp_constant, particle_energy, particle_flow,
    project_capped_box, two_particle_equilibrium, unit_ball_volume, Confinement, Exp1dSolution,
    Kernel, ParticleEnsemble, SeededRng, SolverConfig, State,
};

type Check = (&'static str, fn() -> Result<(), String>);

fn kernel_critical_slope() -> Result<(), String> {
    let k = Kernel::power_law(-1.0, 2.0).map_err(|e| e.to_string())?;
    let s = k.slope(1.0).map_err(|e| e.to_string())?;
    if s == 0.0 {
        Ok(())
    } else {
        Err(format!("K'(1) = {s}, expected an exact zero"))
    }
}

fn interpolation_constant() -> Result<(), String> {
    let got = hls_sharp_constant(-1.0, 3).map_err(|e| e.to_string())?;
    let exact = 4.0 / 3.0 * (std::f64::consts::PI.sqrt() / 4.0).powf(-2.0 / 3.0);
    if ((got - exact) / exact).abs() < 1e-12 {
        Ok(())
    } else {
        Err(format!("constant {got}, closed form {exact}"))
    }
}

fn ball_mass_identity() -> Result<(), String> {
    let s = ball_solution(3, 1.7, 0.4).map_err(|e| e.to_string())?;
    let mass = unit_ball_volume(3) * s.r0.powi(3) * s.height;
    if ((mass - 1.7) / 1.7).abs() < 1e-13 {
        Ok(())
    } else {
        Err(format!("ball carries mass {mass}, expected 1.7"))
    }
}

fn projection_feasibility() -> Result<(), String> {
    let mut rng = SeededRng::new(3);
    let values: Vec<f64> = (0..256).map(|_| rng.next_in(-1.0, 2.0)).collect();
    let weights: Vec<f64> = (0..256).map(|i| 0.01 * (i as f64 + 0.5)).collect();
    let proj = project_capped_box(&values, &weights, 0.8, 1.3).map_err(|e| e.to_string())?;
    if proj.iter().any(|v| *v < 0.0 || *v > 0.8) {
        return Err("projected values leave [0, M]".into());
    }
    let mass: f64 = proj.iter().zip(&weights).map(|(v, w)| v * w).sum();
    if ((mass - 1.3) / 1.3).abs() > 1e-12 {
        return Err(format!("projected mass {mass}, expected 1.3"));
    }
    let again = project_capped_box(&proj, &weights, 0.8, 1.3).map_err(|e| e.to_string())?;
    if again != proj {
        return Err("projection is not idempotent".into());
    }
    Ok(())
}

fn two_particle_balance() -> Result<(), String> {
    let a = two_particle_equilibrium(1.0, 1.0).map_err(|e| e.to_string())?;
    let k = Kernel::power_law(-1.0, 2.0).map_err(|e| e.to_string())?;
    let residual = 0.5 * k.slope(2.0 * a).map_err(|e| e.to_string())? + 2.0 * a;
    if residual.abs() < 1e-12 {
        Ok(())
    } else {
        Err(format!("force residual {residual}"))
    }
}

fn ball_stationarity() -> Result<(), String> {
    let s = ball_solution(3, 1.0, 1.0).map_err(|e| e.to_string())?;
    let d = s.inject_radial(512, 1.5, 0.75).map_err(|e| e.to_string())?;
    let kernel = Kernel::power_law(-1.0, 2.0).map_err(|e| e.to_string())?;
    let conf = Confinement::quadratic(1.0).map_err(|e| e.to_string())?;
    let report = el_verify(&State::Radial(d), &kernel, &conf, None, None)
        .map_err(|e| e.to_string())?;
    if report.pass {
        Ok(())
    } else {
        Err(format!(
            "stationarity check failed: on-support {} off-support {} tol {}",
            report.on_support_sup, report.off_support_min, report.tol_abs
        ))
    }
}

fn line_profile_mass() -> Result<(), String> {
    let s = Exp1dSolution::new(2.0, 1.0).map_err(|e| e.to_string())?;
    let d = s.inject_line(256, 1.0, 2.0).map_err(|e| e.to_string())?;
    let mass = State::Line(d).mass();
    if ((mass - 2.0) / 2.0).abs() < 1e-12 {
        Ok(())
    } else {
        Err(format!("injected profile carries mass {mass}, expected 2"))
    }
}

fn pair_energy_value() -> Result<(), String> {
    let e = ParticleEnsemble::new(3, vec![0.5, 0.0, 0.0, -0.5, 0.0, 0.0], vec![0.5, 0.5])
        .map_err(|e| e.to_string())?;
    let kernel = Kernel::power_law(-1.0, 2.0).map_err(|e| e.to_string())?;
    let b = particle_energy(&e, &kernel, &Confinement::None).map_err(|e| e.to_string())?;
    if b.total == 0.375 {
        Ok(())
    } else {
        Err(format!("pair energy {}, expected exactly 0.375", b.total))
    }
}

fn flow_determinism() -> Result<(), String> {
    let run = || -> Result<_, String> {
        let mut rng = SeededRng::new(9);
        let e = ParticleEnsemble::sample_uniform_ball(&mut rng, 24, 1.5, &[0.0; 3], 1.0)
            .map_err(|e| e.to_string())?;
        let kernel = Kernel::power_law(-1.0, 2.0).map_err(|e| e.to_string())?;
        let conf = Confinement::quadratic(1.0).map_err(|e| e.to_string())?;
        let cfg = SolverConfig {
            max_iters: 30,
            ..SolverConfig::default()
        };
        particle_flow(&e, &kernel, &conf, &cfg).map_err(|e| e.to_string())
    };
    let (sa, ta) = run()?;
    let (sb, tb) = run()?;
    if sa == sb && ta == tb {
        Ok(())
    } else {
        Err("two identical runs diverged".into())
    }
}

/// Runs every check, printing one line each; returns the process exit code.
pub fn run_all() -> i32 {
    let checks: &[Check] = &[
        ("kernel critical slope", kernel_critical_slope),
        ("interpolation constant", interpolation_constant),
        ("ball mass identity", ball_mass_identity),
        ("projection feasibility", projection_feasibility),
        ("two-particle force balance", two_particle_balance),
        ("injected ball stationarity", ball_stationarity),
        ("line profile mass", line_profile_mass),
        ("pair energy value", pair_energy_value),
        ("flow determinism", flow_determinism),
    ];
    let mut failed = 0;
    for (name, check) in checks {
        match check() {
            Ok(()) => println!("ok {name}"),
            Err(msg) => {
                failed += 1;
                println!("FAILED {name}: {msg}");
            }
        }
    }
    if failed == 0 {
        println!("selftest: {} checks passed", checks.len());
        0
    } else {
        println!("selftest: {failed} of {} checks failed", checks.len());
        2
    }
}
