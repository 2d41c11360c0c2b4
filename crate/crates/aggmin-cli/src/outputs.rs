//! Result persistence: the CSV schemas for states, potentials, and traces,
//! the state-file reader, and the JSON result document.

use crate::config::{RunConfig, StateSpec};
use aggmin_core::{
    ElReport, EnergyBreakdown, Error, LineDensity, Moments, ParticleEnsemble, RadialDensity,
    Result, State, Trace,
};
use serde::Serialize;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

/// Matching tolerance between a state file's coordinates and the grid the
/// config describes.
const GRID_MATCH_TOL: f64 = 1e-9;

#[derive(Debug, Serialize)]
pub struct EnergyDoc {
    pub interaction: f64,
    pub confinement: f64,
    pub total: f64,
}

impl From<&EnergyBreakdown> for EnergyDoc {
    fn from(b: &EnergyBreakdown) -> Self {
        EnergyDoc {
            interaction: b.interaction,
            confinement: b.confinement,
            total: b.total,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct MomentsDoc {
    pub mass: f64,
    pub center: Vec<f64>,
    pub second_moment: f64,
}

impl From<&Moments> for MomentsDoc {
    fn from(m: &Moments) -> Self {
        MomentsDoc {
            mass: m.mass,
            center: m.center.clone(),
            second_moment: m.second_moment,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct ElDoc {
    pub c0: f64,
    pub on_support_sup: f64,
    /// `null` when the support covers every node and the off-support side is
    /// vacuous.
    pub off_support_min: Option<f64>,
    pub support_threshold: f64,
    pub tol_abs: f64,
    pub pass: bool,
}

impl From<&ElReport> for ElDoc {
    fn from(r: &ElReport) -> Self {
        ElDoc {
            c0: r.c0,
            on_support_sup: r.on_support_sup,
            off_support_min: r.off_support_min.is_finite().then_some(r.off_support_min),
            support_threshold: r.support_threshold,
            tol_abs: r.tol_abs,
            pass: r.pass,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct ResultDoc<'a> {
    pub config: &'a RunConfig,
    pub warnings: &'a [String],
    pub termination: &'a str,
    pub iterations: usize,
    pub wall_time_s: f64,
    pub energy: EnergyDoc,
    pub moments: MomentsDoc,
    pub el: ElDoc,
    pub monotone: bool,
    pub mass_drift: f64,
}

fn write_file(path: &Path, content: &str) -> Result<()> {
    let mut f = std::fs::File::create(path)
        .map_err(|e| Error::Config(format!("cannot create {}: {e}", path.display())))?;
    f.write_all(content.as_bytes())
        .map_err(|e| Error::Config(format!("cannot write {}: {e}", path.display())))
}

pub fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)
        .map_err(|e| Error::Config(format!("cannot create directory {}: {e}", dir.display())))
}

/// `state.csv`: `id,x1,...,xN,weight` for particles, `r,rho` for radial
/// grids, `x,rho` for line grids.
pub fn state_csv(state: &State) -> String {
    let mut out = String::new();
    match state {
        State::Particles(e) => {
            out.push_str("id");
            for k in 1..=e.dim() {
                let _ = write!(out, ",x{k}");
            }
            out.push_str(",weight\n");
            for i in 0..e.len() {
                let _ = write!(out, "{i}");
                for c in e.position(i) {
                    let _ = write!(out, ",{c}");
                }
                let _ = writeln!(out, ",{}", e.weights()[i]);
            }
        }
        State::Radial(d) => {
            out.push_str("r,rho\n");
            for i in 0..d.cells() {
                let _ = writeln!(out, "{},{}", d.center(i), d.values()[i]);
            }
        }
        State::Line(d) => {
            out.push_str("x,rho\n");
            for i in 0..d.cells() {
                let _ = writeln!(out, "{},{}", d.center(i), d.values()[i]);
            }
        }
    }
    out
}

/// `psi.csv`: the node potential next to the multiplier. Grid rows keep cell
/// order; particle rows are sorted by distance from the origin.
pub fn psi_csv(state: &State, psi: &[f64], c0: f64) -> String {
    let mut out = String::new();
    match state {
        State::Particles(e) => {
            out.push_str("r,psi,c0\n");
            let mut rows: Vec<(f64, usize)> = (0..e.len())
                .map(|i| {
                    let r = e.position(i).iter().map(|c| c * c).sum::<f64>().sqrt();
                    (r, i)
                })
                .collect();
            rows.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            for (r, i) in rows {
                let _ = writeln!(out, "{r},{},{c0}", psi[i]);
            }
        }
        State::Radial(d) => {
            out.push_str("r,psi,c0\n");
            for i in 0..d.cells() {
                let _ = writeln!(out, "{},{},{c0}", d.center(i), psi[i]);
            }
        }
        State::Line(d) => {
            out.push_str("x,psi,c0\n");
            for i in 0..d.cells() {
                let _ = writeln!(out, "{},{},{c0}", d.center(i), psi[i]);
            }
        }
    }
    out
}

/// `trace.csv`: `iter,energy,step,residual,mass`, one row per accepted
/// iterate starting from the initial state.
pub fn trace_csv(trace: &Trace) -> String {
    let mut out = String::from("iter,energy,step,residual,mass\n");
    for row in &trace.rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            row.iter, row.energy, row.step, row.residual, row.mass
        );
    }
    out
}

pub fn write_state_csv(dir: &Path, state: &State) -> Result<()> {
    write_file(&dir.join("state.csv"), &state_csv(state))
}

pub fn write_psi_csv(dir: &Path, state: &State, psi: &[f64], c0: f64) -> Result<()> {
    write_file(&dir.join("psi.csv"), &psi_csv(state, psi, c0))
}

pub fn write_trace_csv(dir: &Path, trace: &Trace) -> Result<()> {
    write_file(&dir.join("trace.csv"), &trace_csv(trace))
}

pub fn write_result_json(dir: &Path, doc: &ResultDoc) -> Result<()> {
    let json = serde_json::to_string_pretty(doc)
        .map_err(|e| Error::Numerical(format!("result serialization failed: {e}")))?;
    write_file(&dir.join("result.json"), &(json + "\n"))
}

fn parse_float(field: &str, line_no: usize) -> Result<f64> {
    field.trim().parse::<f64>().map_err(|_| {
        Error::Config(format!("state file line {line_no}: bad number {field:?}"))
    })
}

/// Reads a `state.csv` back into the discretization the config describes.
/// Grid coordinates must match the config's cell centers; the particle
/// count may differ from the config (the file is authoritative there).
pub fn read_state_csv(path: &Path, cfg: &RunConfig) -> Result<State> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        Error::Config(format!("cannot read state file {}: {e}", path.display()))
    })?;
    let mut lines = text.lines().enumerate();
    let Some((_, header)) = lines.next() else {
        return Err(Error::Config(format!(
            "state file {} is empty",
            path.display()
        )));
    };

    match header.trim() {
        "r,rho" | "x,rho" => {
            let radial = header.trim() == "r,rho";
            let mut coords = Vec::new();
            let mut values = Vec::new();
            for (idx, line) in lines {
                if line.trim().is_empty() {
                    continue;
                }
                let mut fields = line.split(',');
                let (Some(a), Some(b), None) =
                    (fields.next(), fields.next(), fields.next())
                else {
                    return Err(Error::Config(format!(
                        "state file line {}: expected 2 columns",
                        idx + 1
                    )));
                };
                coords.push(parse_float(a, idx + 1)?);
                values.push(parse_float(b, idx + 1)?);
            }
            if radial {
                let StateSpec::Radial { cells, rmax } = cfg.state else {
                    return Err(Error::Config(
                        "state file holds a radial grid but the config does not".into(),
                    ));
                };
                check_grid(&coords, cells, |i| (i as f64 + 0.5) * rmax / cells as f64)?;
                Ok(State::Radial(RadialDensity::new(
                    cfg.dim,
                    rmax,
                    values,
                    cfg.cap_required()?,
                )?))
            } else {
                let StateSpec::Line { cells, halfwidth } = cfg.state else {
                    return Err(Error::Config(
                        "state file holds a line grid but the config does not".into(),
                    ));
                };
                let h = 2.0 * halfwidth / cells as f64;
                check_grid(&coords, cells, |i| -halfwidth + (i as f64 + 0.5) * h)?;
                Ok(State::Line(LineDensity::new(
                    halfwidth,
                    values,
                    cfg.cap_required()?,
                )?))
            }
        }
        h if h.starts_with("id,") && h.ends_with(",weight") => {
            let dim = h.split(',').count() - 2;
            if dim != cfg.dim {
                return Err(Error::Config(format!(
                    "state file particles live in dimension {dim}, config says {}",
                    cfg.dim
                )));
            }
            let mut positions = Vec::new();
            let mut weights = Vec::new();
            for (idx, line) in lines {
                if line.trim().is_empty() {
                    continue;
                }
                let fields: Vec<&str> = line.split(',').collect();
                if fields.len() != dim + 2 {
                    return Err(Error::Config(format!(
                        "state file line {}: expected {} columns",
                        idx + 1,
                        dim + 2
                    )));
                }
                for f in &fields[1..=dim] {
                    positions.push(parse_float(f, idx + 1)?);
                }
                weights.push(parse_float(fields[dim + 1], idx + 1)?);
            }
            Ok(State::Particles(ParticleEnsemble::new(
                dim, positions, weights,
            )?))
        }
        other => Err(Error::Config(format!(
            "unrecognized state file header {other:?}"
        ))),
    }
}

fn check_grid(coords: &[f64], cells: usize, center: impl Fn(usize) -> f64) -> Result<()> {
    if coords.len() != cells {
        return Err(Error::Config(format!(
            "state file has {} cells, config says {cells}",
            coords.len()
        )));
    }
    for (i, c) in coords.iter().enumerate() {
        let expect = center(i);
        if (c - expect).abs() > GRID_MATCH_TOL * expect.abs().max(1.0) {
            return Err(Error::Config(format!(
                "state file cell {i} sits at {c}, config grid puts it at {expect}"
            )));
        }
    }
    Ok(())
}
