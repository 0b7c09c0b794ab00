//! Output files of a `solve` run.

use std::path::Path;

use serde::Serialize;
use sha2::{Digest, Sha256};
use signflip_core::conic::SolverConfig;
use signflip_core::descent::{DescentConfig, DescentResult};
use signflip_core::problems::{control_trajectory, grid_edges, CHAIN};

use crate::experiment::{Family, Instance};
use crate::io::{write_text, IoError};

#[derive(Debug, Serialize)]
pub struct DesignDoc<'a> {
    pub theta: &'a [f64],
    pub extremal_mask: &'a [bool],
    pub fraction: f64,
}

#[derive(Debug, Serialize)]
pub struct Manifest {
    pub config_sha256: String,
    pub backend: String,
    pub problem: String,
    pub seed: u64,
    pub solver: SolverConfig,
    pub descent: DescentConfig,
    pub crate_version: String,
}

pub fn sha256_hex(text: &str) -> String {
    hex::encode(Sha256::digest(text.as_bytes()))
}

fn csv_text(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<String, IoError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| IoError::Write { path: "<csv>".into(), source: e.into() };
    w.write_record(header).map_err(io)?;
    for r in rows {
        w.write_record(&r).map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| IoError::Write { path: "<csv>".into(), source: e.into_error() })?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn num(v: f64) -> String {
    format!("{v:.17e}")
}

pub fn trace_csv(result: &DescentResult, with_time: bool) -> String {
    let mut s = result.trace.csv_rows(with_time).join("\n");
    s.push('\n');
    s
}

pub fn design_json(result: &DescentResult) -> String {
    let d = &result.design;
    let doc = DesignDoc { theta: &d.theta, extremal_mask: &d.extremal_mask, fraction: d.fraction_extremal() };
    serde_json::to_string_pretty(&doc).expect("design documents always serialize")
}

/// Field values on the problem's own geometry.
pub fn field_csv(inst: &Instance, result: &DescentResult) -> Result<String, IoError> {
    let pt = &result.point;
    match &inst.family {
        Family::Helmholtz { config, .. } => {
            let h = config.spacing();
            let rows = pt.x.iter().enumerate().map(|(k, &z)| {
                let (i, j) = config.grid_point(k);
                vec![i.to_string(), j.to_string(), num(i as f64 * h), num(j as f64 * h), num(z), num(result.design.theta[k])]
            });
            csv_text(&["i", "j", "x", "y", "z", "theta"], rows)
        }
        Family::Diffusion(spec) => {
            let m = spec.m_side;
            let rows = pt.x.iter().enumerate().map(|(k, &e)| vec![k.to_string(), (k % m).to_string(), (k / m).to_string(), num(e)]);
            csv_text(&["node", "i", "j", "potential"], rows)
        }
        Family::Control(_) | Family::Custom => {
            let blocks = [("x", &pt.x), ("u", &pt.u), ("v", &pt.v), ("w", &pt.w)];
            let rows = blocks
                .into_iter()
                .flat_map(|(name, vals)| vals.iter().enumerate().map(move |(i, &v)| vec![name.to_string(), i.to_string(), num(v)]));
            csv_text(&["block", "index", "value"], rows)
        }
    }
}

/// Per-edge conductance and flow of a diffusion run.
pub fn edges_csv(m_side: usize, result: &DescentResult) -> Result<String, IoError> {
    let rows = grid_edges(m_side).into_iter().enumerate().map(|(j, (a, b))| {
        vec![j.to_string(), a.to_string(), b.to_string(), num(result.design.theta[j]), num(result.point.u[j])]
    });
    csv_text(&["edge", "from", "to", "g", "flow"], rows)
}

/// Temperatures, inputs and conductances per time step of a control run.
pub fn trajectory_csv(inst: &Instance, result: &DescentResult) -> Option<Result<String, IoError>> {
    let Family::Control(spec) = &inst.family else { return None };
    let cl = spec.layout();
    let traj = control_trajectory(spec, &result.point.x);
    let rows = traj.iter().enumerate().map(|(t, r)| {
        let mut row: Vec<String> = vec![(t + 1).to_string()];
        row.extend(r[1..].iter().map(|&v| num(v)));
        for k in 0..CHAIN.len() {
            row.push(if t < cl.steps() { num(result.design.theta[cl.edge(t, k)]) } else { String::new() });
        }
        row
    });
    Some(csv_text(&["t", "e1", "e2", "e3", "u1", "u2", "g1", "g2", "g3"], rows))
}

pub struct RunFiles<'a> {
    pub instance: &'a Instance,
    pub result: &'a DescentResult,
    pub manifest: &'a Manifest,
    pub with_time: bool,
}

pub fn write_all(dir: &Path, files: &RunFiles<'_>) -> Result<(), IoError> {
    std::fs::create_dir_all(dir).map_err(|source| IoError::Write { path: dir.display().to_string(), source })?;
    let (inst, res) = (files.instance, files.result);
    write_text(&dir.join("trace.csv"), &trace_csv(res, files.with_time))?;
    write_text(&dir.join("design.json"), &design_json(res))?;
    write_text(&dir.join("field.csv"), &field_csv(inst, res)?)?;
    if let Family::Diffusion(spec) = &inst.family {
        write_text(&dir.join("edges.csv"), &edges_csv(spec.m_side, res)?)?;
    }
    if let Some(t) = trajectory_csv(inst, res) {
        write_text(&dir.join("trajectory.csv"), &t?)?;
    }
    let manifest = serde_json::to_string_pretty(files.manifest).expect("manifests always serialize");
    write_text(&dir.join("manifest.json"), &manifest)
}
