//! Config-driven runs: evolve, run the requested diagnostics, write artifacts.
//!
//! Every artifact is a pure function of the configuration (including
//! `run.seed`), so two runs with the same config produce byte-identical files.
//! Floats in CSV files carry 17 significant digits.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::characteristics::{
    blowup_survey, classify_path, earliest_blowup, unbounded_pair_monitor, CharClass, CharacteristicPath, Direction,
    UnboundedPairReport, Termination, TraceOptions, Tracer,
};
use crate::config::{HamiltonianAction, RunConfig};
use crate::constitutive::SigmaModel;
use crate::energy::{concavity_monitor, default_weight, Verdict};
use crate::error::{Error, RejectReason, Result};
use crate::evolution::{run, RunReport, StopReason};
use crate::field::StateField;
use crate::hamiltonian::{f_drift, find_orbits, flow, reduction_check, OrbitOptions, ReductionReport, SampledU, SampledV, ScalarField, Trajectory};
use crate::riemann::Family;

pub const MANIFEST_FORMAT: u32 = 1;

/// One float with 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Writes a numeric CSV with the given header.
pub fn write_csv<I>(path: &Path, header: &[&str], rows: I) -> Result<()>
where
    I: IntoIterator<Item = Vec<f64>>,
{
    let mut out = String::new();
    out.push_str(&header.join(","));
    out.push('\n');
    for row in rows {
        let cells: Vec<String> = row.into_iter().map(fmt_f64).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    write_file(path, out.as_bytes())
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(bytes).map_err(|e| Error::io(path, e))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).expect("artifacts serialise");
    text.push('\n');
    write_file(path, text.as_bytes())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    Simulate,
    Characteristics,
    Riccati,
    Energy,
    Hamiltonian(HamiltonianAction),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSummary {
    pub name: String,
    pub alpha: f64,
    pub beta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DtPolicy {
    pub cfl: f64,
    pub lambda_floor: f64,
    pub filter: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathSummary {
    pub seed: usize,
    pub x0: f64,
    pub family: Family,
    pub direction: Direction,
    pub termination: Termination,
    pub class: CharClass,
    pub z0: f64,
    pub predicted_blowup: Option<f64>,
    pub file: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CharacteristicsSummary {
    pub horizon: f64,
    pub paths: Vec<PathSummary>,
    pub unbounded_pairs: UnboundedPairReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub format: u32,
    pub task: Task,
    pub config: RunConfig,
    pub model: ModelSummary,
    pub n_x: usize,
    pub dt_policy: DtPolicy,
    pub winding_c: f64,
    pub stop: StopReason,
    pub t_end: f64,
    pub steps: usize,
    pub frames_stored: usize,
    pub t_prime: Option<f64>,
    pub blowup_time: Option<f64>,
    pub blowup_reason: Option<RejectReason>,
    /// Some frame had elliptic points; evolution there is not trustworthy.
    pub advisory: bool,
    pub predicted_blowup: Option<f64>,
    pub energy_verdict: Option<Verdict>,
    pub f_drift: Option<f64>,
    pub reduction: Option<ReductionReport>,
    pub unbounded_pair_flag: Option<bool>,
    pub artifacts: Vec<String>,
}

impl Manifest {
    pub fn read(path: &Path) -> Result<Manifest> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))
    }
}

/// Result of one orchestration: the manifest plus human-readable verdict lines.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub out_dir: PathBuf,
    pub manifest: Manifest,
    pub lines: Vec<String>,
}

/// Runs `task` for `cfg` and writes all artifacts under `out_dir`.
///
/// `base_dir` resolves relative data file paths. Blow-up is a result, not an
/// error; errors are reserved for invalid input and I/O failures.
pub fn orchestrate(cfg: &RunConfig, task: Task, out_dir: &Path, base_dir: &Path) -> Result<Outcome> {
    cfg.validate()?;
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let model = cfg.model.build()?;
    let initial = cfg.initial_data(base_dir)?.frame(&model, cfg.grid.n_x, cfg.grid.t0)?;
    let settings = cfg.run_settings();
    let (field, report) = run(&model, initial, cfg.data.winding_c, &settings)?;

    let mut artifacts = Vec::new();
    let mut lines = Vec::new();
    write_frames(cfg, &field, out_dir, &mut artifacts)?;
    write_history(&report, out_dir, &mut artifacts)?;

    let d = &cfg.diagnostics;
    let mut manifest = Manifest {
        format: MANIFEST_FORMAT,
        task,
        config: cfg.clone(),
        model: ModelSummary {
            name: model.name().to_string(),
            alpha: model.alpha(),
            beta: model.beta(),
        },
        n_x: cfg.grid.n_x,
        dt_policy: DtPolicy {
            cfl: cfg.grid.cfl,
            lambda_floor: cfg.grid.lambda_floor,
            filter: cfg.grid.filter,
        },
        winding_c: cfg.data.winding_c,
        stop: report.stop,
        t_end: report.t_end,
        steps: report.steps,
        frames_stored: field.len(),
        t_prime: report.t_prime,
        blowup_time: report.blowup.as_ref().map(|b| b.last_valid_time),
        blowup_reason: report.blowup.as_ref().map(|b| b.reason),
        advisory: report.advisory,
        predicted_blowup: None,
        energy_verdict: None,
        f_drift: None,
        reduction: None,
        unbounded_pair_flag: None,
        artifacts: Vec::new(),
    };
    lines.push(format!(
        "stop={:?} t_end={} steps={} blowup_time={}",
        report.stop,
        report.t_end,
        report.steps,
        manifest.blowup_time.map_or("none".into(), |t| t.to_string())
    ));

    let hyperbolic_start = field
        .frame(0)
        .u
        .iter()
        .any(|&u| model.classify(u).is_hyperbolic());

    if (d.characteristics || task == Task::Characteristics) && hyperbolic_start {
        let summary = characteristics_artifacts(cfg, &field, out_dir, &mut artifacts)?;
        manifest.unbounded_pair_flag = Some(summary.unbounded_pairs.flag);
        lines.push(format!(
            "characteristics: {} paths, unbounded-pair flag {}",
            summary.paths.len(),
            summary.unbounded_pairs.flag
        ));
    }
    if (d.riccati || task == Task::Riccati) && hyperbolic_start {
        let t = riccati_artifacts(cfg, &field, out_dir, &mut artifacts)?;
        manifest.predicted_blowup = t;
        lines.push(format!(
            "riccati: earliest predicted blow-up {}",
            t.map_or("none".into(), |t| t.to_string())
        ));
    }
    if d.energy || task == Task::Energy {
        let verdict = energy_artifacts(&model, &field, out_dir, &mut artifacts)?;
        manifest.energy_verdict = Some(verdict);
        lines.push(format!("energy: {}", if verdict == Verdict::Pass { "PASS" } else { "FAIL" }));
    }
    let mut actions = d.hamiltonian.clone();
    if let Task::Hamiltonian(a) = task {
        if !actions.contains(&a) {
            actions.push(a);
        }
    }
    for action in actions {
        hamiltonian_artifacts(cfg, &model, &field, action, out_dir, &mut artifacts, &mut manifest, &mut lines)?;
    }

    artifacts.push("manifest.json".into());
    manifest.artifacts = artifacts;
    write_json(&out_dir.join("manifest.json"), &manifest)?;
    Ok(Outcome {
        out_dir: out_dir.to_path_buf(),
        manifest,
        lines,
    })
}

fn write_frames(cfg: &RunConfig, field: &StateField, out: &Path, artifacts: &mut Vec<String>) -> Result<()> {
    let every = cfg.output.frame_every.max(1);
    let n = field.len();
    let x: Vec<f64> = (0..field.n_x()).map(|j| j as f64 / field.n_x() as f64).collect();
    let mut index = Vec::new();
    for i in (0..n).filter(|&i| i % every == 0 || i + 1 == n) {
        let f = field.frame(i);
        let name = format!("frames/frame_{i:06}.csv");
        write_csv(
            &out.join(&name),
            &["x", "u", "v_periodic"],
            (0..field.n_x()).map(|j| vec![x[j], f.u[j], f.v_periodic[j]]),
        )?;
        index.push(vec![i as f64, f.t]);
        artifacts.push(name);
    }
    write_csv(&out.join("frames/index.csv"), &["frame", "t"], index)?;
    artifacts.push("frames/index.csv".into());
    Ok(())
}

fn write_history(report: &RunReport, out: &Path, artifacts: &mut Vec<String>) -> Result<()> {
    write_csv(
        &out.join("history.csv"),
        &["t", "max_grad", "tail"],
        report
            .grad_history
            .iter()
            .zip(&report.tail_history)
            .map(|(g, t)| vec![g.0, g.1, t.1]),
    )?;
    artifacts.push("history.csv".into());
    Ok(())
}

/// Seed positions on the first frame: evenly spaced, or uniform random from `run.seed`.
pub fn seed_positions(cfg: &RunConfig) -> Vec<f64> {
    let n = cfg.diagnostics.seeds;
    if cfg.diagnostics.random_seeds {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.run.seed);
        let mut xs: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
        xs.sort_by(f64::total_cmp);
        xs
    } else {
        (0..n).map(|i| i as f64 / n as f64).collect()
    }
}

fn trace_options(cfg: &RunConfig) -> TraceOptions {
    TraceOptions {
        extrapolate: cfg.diagnostics.extrapolate,
        keep_every: cfg.output.path_every,
        ..TraceOptions::default()
    }
}

fn family_tag(f: Family) -> &'static str {
    match f {
        Family::First => "first",
        Family::Second => "second",
    }
}

fn characteristics_artifacts(
    cfg: &RunConfig,
    field: &StateField,
    out: &Path,
    artifacts: &mut Vec<String>,
) -> Result<CharacteristicsSummary> {
    let tracer = Tracer::new(field, trace_options(cfg))?;
    let t0 = field.frame(0).t;
    let horizon = field.last().map_or(t0, |f| f.t);
    let jobs: Vec<(usize, f64, Family)> = seed_positions(cfg)
        .into_iter()
        .enumerate()
        .flat_map(|(i, x)| [(i, x, Family::First), (i, x, Family::Second)])
        .collect();
    let traced: Vec<Option<(usize, f64, CharacteristicPath)>> = jobs
        .par_iter()
        .map(|&(i, x, fam)| match tracer.trace((t0, x), fam, Direction::Forward) {
            Ok(p) => Ok(Some((i, x, p))),
            Err(Error::StartNotHyperbolic { .. }) => Ok(None),
            Err(e) => Err(e),
        })
        .collect::<Result<_>>()?;
    let mut paths = Vec::new();
    for (i, x0, p) in traced.into_iter().flatten() {
        let file = format!("characteristics/path_{i:04}_{}.csv", family_tag(p.family));
        write_csv(
            &out.join(&file),
            &["t", "x_unwrapped", "u", "lambda", "z", "k", "k_integral"],
            p.samples
                .iter()
                .map(|s| vec![s.t, s.x, s.u, s.lambda, s.z, s.k, s.k_integral]),
        )?;
        artifacts.push(file.clone());
        paths.push(PathSummary {
            seed: i,
            x0,
            family: p.family,
            direction: p.direction,
            termination: p.termination,
            class: classify_path(&p, horizon, cfg.diagnostics.growth_threshold),
            z0: p.riccati.z0,
            predicted_blowup: p.riccati.predicted_blowup,
            file,
        });
    }
    let unbounded_pairs = unbounded_pair_monitor(field, horizon, cfg.diagnostics.seeds, cfg.diagnostics.growth_threshold)?;
    let summary = CharacteristicsSummary { horizon, paths, unbounded_pairs };
    write_json(&out.join("characteristics/summary.json"), &summary)?;
    artifacts.push("characteristics/summary.json".into());
    Ok(summary)
}

fn riccati_artifacts(cfg: &RunConfig, field: &StateField, out: &Path, artifacts: &mut Vec<String>) -> Result<Option<f64>> {
    let preds = blowup_survey(field, cfg.diagnostics.seeds, &trace_options(cfg))?;
    let mut text = String::from("x0,family,z0,predicted_blowup,termination\n");
    for p in &preds {
        let term = match p.termination {
            Termination::BoundaryHit { .. } => "boundary_hit",
            Termination::FieldEdge { .. } => "field_edge",
            Termination::BlowUp { .. } => "blow_up",
            Termination::StepFailure { .. } => "step_failure",
        };
        text.push_str(&format!(
            "{},{},{},{},{}\n",
            fmt_f64(p.x0),
            family_tag(p.family),
            fmt_f64(p.z0),
            p.predicted_blowup.map_or(String::new(), fmt_f64),
            term
        ));
    }
    write_file(&out.join("riccati.csv"), text.as_bytes())?;
    artifacts.push("riccati.csv".into());
    Ok(earliest_blowup(&preds))
}

fn energy_artifacts(model: &SigmaModel, field: &StateField, out: &Path, artifacts: &mut Vec<String>) -> Result<Verdict> {
    let w = default_weight(model)?;
    let r = concavity_monitor(field, &w)?;
    let tr = &r.trace;
    write_csv(
        &out.join("energy.csv"),
        &["t", "E", "E_ddot_integral", "E_ddot_fd"],
        (0..tr.times.len()).map(|i| {
            vec![
                tr.times[i],
                tr.e_values[i],
                tr.e_ddot_integral[i],
                tr.e_ddot_fd[i].unwrap_or(f64::NAN),
            ]
        }),
    )?;
    artifacts.push("energy.csv".into());
    Ok(r.verdict)
}

fn write_trajectory(path: &Path, tr: &Trajectory, u: &dyn ScalarField, v: &dyn ScalarField) -> Result<()> {
    let f = tr.integral(u, v);
    write_csv(
        path,
        &["t", "x", "p", "H", "F"],
        tr.samples.iter().zip(f).map(|(s, f)| vec![s.t, s.x, s.p, s.h, f]),
    )
}

#[allow(clippy::too_many_arguments)]
fn hamiltonian_artifacts(
    cfg: &RunConfig,
    model: &SigmaModel,
    field: &StateField,
    action: HamiltonianAction,
    out: &Path,
    artifacts: &mut Vec<String>,
    manifest: &mut Manifest,
    lines: &mut Vec<String>,
) -> Result<()> {
    if model.kind() != crate::constitutive::ModelKind::TypeI {
        return Err(Error::InvalidModel("the Hamiltonian correspondence needs the quadratic law".into()));
    }
    let (u, v) = (SampledU(field), SampledV(field));
    let d = &cfg.diagnostics;
    match action {
        HamiltonianAction::Flow | HamiltonianAction::Drift => {
            let [t0, x0, p0] = d.flow_start;
            let (lo, hi) = field.t_span().ok_or(Error::InsufficientFrames { index: 0, len: 0 })?;
            if !(lo..=hi).contains(&t0) {
                return Err(Error::InvalidInput(format!(
                    "diagnostics.flow_start time {t0} is outside the simulated span [{lo}, {hi}]"
                )));
            }
            // a run that stopped early (blow-up, elliptic onset) shortens the flow
            let t_end = d.flow_t_end.clamp(lo, hi);
            if t_end != d.flow_t_end {
                lines.push(format!("hamiltonian: flow ends at t = {t_end}, the last stored frame"));
            }
            let tr = flow(&u, (t0, x0, p0), t_end)?;
            write_trajectory(&out.join("hamiltonian/trajectory.csv"), &tr, &u, &v)?;
            if !artifacts.iter().any(|a| a == "hamiltonian/trajectory.csv") {
                artifacts.push("hamiltonian/trajectory.csv".into());
            }
            if action == HamiltonianAction::Drift {
                let drift = f_drift(&u, &v, &tr);
                manifest.f_drift = Some(drift);
                lines.push(format!("hamiltonian: F drift {drift:e}"));
            }
        }
        HamiltonianAction::Orbit | HamiltonianAction::Reduce => {
            let opts = OrbitOptions {
                t0: field.frame(0).t,
                ..OrbitOptions::default()
            };
            let orbits = find_orbits(&u, &d.orbits, &opts)?;
            for o in &orbits {
                let name = format!("hamiltonian/orbit_{}_{}.csv", o.m, o.n);
                write_trajectory(&out.join(&name), &o.trajectory, &u, &v)?;
                if !artifacts.contains(&name) {
                    artifacts.push(name);
                }
            }
            if action == HamiltonianAction::Reduce {
                let r = reduction_check(&u, &v, &orbits)?;
                write_json(&out.join("hamiltonian/reduction.json"), &r)?;
                artifacts.push("hamiltonian/reduction.json".into());
                lines.push(format!(
                    "hamiltonian: A={:e} B={:e} max|Am+Bn|={:e}",
                    r.a_est, r.b_est, r.max_mismatch
                ));
                manifest.reduction = Some(r);
            }
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub index: usize,
    pub value: f64,
    pub dir: String,
    pub stop: StopReason,
    pub t_end: f64,
    pub blowup_time: Option<f64>,
    pub predicted_blowup: Option<f64>,
}

/// Runs one simulation per sweep value on a pool of `workers` threads, each in
/// its own subdirectory, and writes `sweep.csv`.
pub fn sweep(cfg: &RunConfig, out_dir: &Path, base_dir: &Path, workers: usize) -> Result<Vec<SweepRow>> {
    let spec = cfg
        .sweep
        .clone()
        .ok_or_else(|| Error::InvalidInput("config has no [sweep] section".into()))?;
    cfg.validate()?;
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::InvalidInput(format!("worker pool: {e}")))?;
    let rows: Vec<SweepRow> = pool.install(|| {
        spec.values
            .par_iter()
            .enumerate()
            .map(|(i, &value)| {
                let mut c = cfg.clone();
                c.sweep = None;
                c.set_parameter(&spec.parameter, value)?;
                let dir = format!("run_{i:03}");
                let o = orchestrate(&c, Task::Simulate, &out_dir.join(&dir), base_dir)?;
                Ok(SweepRow {
                    index: i,
                    value,
                    dir,
                    stop: o.manifest.stop,
                    t_end: o.manifest.t_end,
                    blowup_time: o.manifest.blowup_time,
                    predicted_blowup: o.manifest.predicted_blowup,
                })
            })
            .collect::<Result<_>>()
    })?;
    let mut text = format!("index,{},dir,stop,t_end,blowup_time,predicted_blowup\n", spec.parameter);
    for r in &rows {
        text.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            r.index,
            fmt_f64(r.value),
            r.dir,
            serde_json::to_value(r.stop).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default(),
            fmt_f64(r.t_end),
            r.blowup_time.map_or(String::new(), fmt_f64),
            r.predicted_blowup.map_or(String::new(), fmt_f64),
        ));
    }
    write_file(&out_dir.join("sweep.csv"), text.as_bytes())?;
    Ok(rows)
}
