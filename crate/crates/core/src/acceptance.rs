//! The acceptance suite: eleven numbered checks with pinned tolerances and
//! runtime budgets. `verify` on the command line and the `acceptance`
//! integration test both run it.

use std::f64::consts::PI;
use std::fmt;
use std::path::{Path, PathBuf};
use std::sync::OnceLock;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::characteristics::{
    blowup_survey, earliest_blowup, Direction, Termination, TraceOptions, Tracer,
};
use crate::config::parse_config;
use crate::constitutive::{make_cubic, make_quadratic, SigmaModel};
use crate::energy::{concavity_monitor, default_weight, Verdict, TOL_CONC};
use crate::error::Result;
use crate::evolution::{residual, run, InitialData, RunSettings, StopPolicy, StopReason};
use crate::field::StateField;
use crate::hamiltonian::{
    analytic, f_drift, find_orbits, flow, reduction_check, OrbitOptions, SampledU, SampledV,
};
use crate::orchestrate::{orchestrate, Task};
use crate::riemann::{genuine_nonlinearity, Family, QTransform, RiemannPair, Side};

/// Shipped config behind criteria 4 and 11.
pub const BLOWUP_CONFIG: &str = include_str!("../configs/blowup_quadratic.toml");

#[derive(Debug, Clone)]
pub struct CriterionResult {
    pub id: u32,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
    pub budget: f64,
}

impl CriterionResult {
    pub fn within_budget(&self) -> bool {
        self.seconds <= self.budget
    }
}

impl fmt::Display for CriterionResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} [{:>2}] {:<28} {:>7.2}s / {:>4}s  {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.seconds,
            self.budget,
            self.detail
        )
    }
}

pub const NAMES: [&str; 11] = [
    "exact-family residual",
    "riemann round trip",
    "riccati equivalence",
    "blow-up demonstration",
    "boundary sign",
    "genuine nonlinearity",
    "energy concavity",
    "F conservation dichotomy",
    "reduction identity",
    "self-convergence",
    "determinism",
];

const BUDGETS: [f64; 11] = [10.0, 5.0, 30.0, 120.0, 120.0, 5.0, 30.0, 20.0, 30.0, 60.0, 120.0];

/// Runs one criterion (`1..=11`). Internal errors count as failures.
pub fn run_criterion(id: u32) -> CriterionResult {
    let start = Instant::now();
    let outcome = match id {
        1 => exact_family(),
        2 => round_trip(),
        3 => riccati_equivalence(),
        4 => blowup_demo(),
        5 => boundary_sign_check(),
        6 => nonlinearity(),
        7 => energy_concavity(),
        8 => f_conservation(),
        9 => reduction(),
        10 => self_convergence(),
        11 => determinism(),
        _ => Ok((false, format!("no criterion {id}"))),
    };
    let (passed, detail) = outcome.unwrap_or_else(|e| (false, format!("error: {e}")));
    let k = (id as usize).clamp(1, 11) - 1;
    CriterionResult {
        id,
        name: NAMES[k],
        passed,
        detail,
        seconds: start.elapsed().as_secs_f64(),
        budget: BUDGETS[k],
    }
}

pub fn run_all() -> Vec<CriterionResult> {
    (1..=11).map(run_criterion).collect()
}

type Check = Result<(bool, String)>;

fn sine(base: f64, amplitude: f64) -> InitialData {
    InitialData::Sine {
        base,
        amplitude,
        mode: 1,
        phase: 0.0,
        v_amplitude: 0.0,
        v_mode: 1,
        v_phase: 0.0,
    }
}

fn exact_family() -> Check {
    let model = make_quadratic();
    let mut worst_res = 0.0f64;
    let mut worst_err = 0.0f64;
    for c in [1.0, 2.0] {
        let settings = RunSettings {
            t_max: 5.0,
            stop_policy: StopPolicy::Continue,
            ..Default::default()
        };
        let initial = InitialData::Constant { u: 0.0, v: 0.0 }.frame(&model, 256, 0.0)?;
        let (field, report) = run(&model, initial, c, &settings)?;
        if report.stop != StopReason::TimeLimit {
            return Ok((false, format!("C={c}: stopped with {:?} at t={}", report.stop, report.t_end)));
        }
        for i in 1..field.len() - 1 {
            let (ru, rv) = residual(&field, i)?;
            worst_res = worst_res.max(ru).max(rv);
        }
        for f in field.frames() {
            for (&u, &v) in f.u.iter().zip(&f.v_periodic) {
                worst_err = worst_err.max((u + c * f.t).abs()).max(v.abs());
            }
        }
    }
    Ok((
        worst_res <= 1e-8 && worst_err <= 1e-8,
        format!("max residual {worst_res:.2e}, max |u + Ct| {worst_err:.2e} (tol 1e-8)"),
    ))
}

/// Random hyperbolic `u` on `side`, up to 3 units from the boundary.
fn hyperbolic_sample(rng: &mut ChaCha8Rng, model: &SigmaModel, side: Side) -> f64 {
    let d = 1e-6 + 3.0 * rng.random::<f64>();
    match side {
        Side::Alpha => model.alpha() - d,
        Side::Beta => model.beta() + d,
    }
}

fn round_trip() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst = (0.0f64, 0.0f64);
    let mut count = 0;
    for (model, sides) in [
        (make_quadratic(), vec![Side::Alpha]),
        (make_cubic(), vec![Side::Alpha, Side::Beta]),
    ] {
        let per_side = 1000 / sides.len();
        for side in sides {
            let qt = QTransform::new(model.clone(), side);
            for _ in 0..per_side {
                let u = hyperbolic_sample(&mut rng, &model, side);
                let v = rng.random_range(-5.0..5.0);
                let (u2, v2) = qt.from_riemann(qt.to_riemann(u, v)?)?;
                worst.0 = worst.0.max((u2 - u).abs());
                worst.1 = worst.1.max((v2 - v).abs());
                count += 1;
            }
        }
    }
    Ok((
        worst.0 <= 1e-10 && worst.1 <= 1e-12,
        format!("{count} points, max |Δu| {:.2e} (1e-10), max |Δv| {:.2e} (1e-12)", worst.0, worst.1),
    ))
}

fn riccati_equivalence() -> Check {
    let model = make_quadratic();
    let (field, _) = run(&model, sine(-1.0, 0.1).frame(&model, 256, 0.0)?, 0.0, &RunSettings::default())?;
    let tracer = Tracer::new(&field, TraceOptions::default())?;
    let t0 = field.frame(0).t;
    let jobs: Vec<(f64, Family)> = (0..16)
        .flat_map(|i| [(i as f64 / 16.0, Family::First), (i as f64 / 16.0, Family::Second)])
        .collect();
    let paths = jobs
        .par_iter()
        .map(|&(x, fam)| tracer.trace((t0, x), fam, Direction::Forward))
        .collect::<Result<Vec<_>>>()?;
    let mut worst = 0.0f64;
    let mut checked = 0usize;
    for p in &paths {
        let z0 = p.riccati.z0;
        for s in &p.samples {
            if (1.0 + z0 * s.k_integral).abs() > 0.1 {
                worst = worst.max((s.z_exact - s.z_numeric).abs() / s.z_exact.abs().max(1.0));
                checked += 1;
            }
        }
    }
    Ok((
        paths.len() >= 20 && worst <= 1e-6,
        format!("{} paths, {checked} samples, max scaled |Δz| {worst:.2e} (1e-6)", paths.len()),
    ))
}

struct Scenario {
    label: &'static str,
    model: SigmaModel,
    data: InitialData,
    n_x: usize,
    seeds: usize,
}

fn suite() -> Vec<Scenario> {
    vec![
        Scenario {
            label: "quadratic -1+0.1sin",
            model: make_quadratic(),
            data: sine(-1.0, 0.1),
            n_x: 512,
            seeds: 64,
        },
        Scenario {
            label: "quadratic simple wave",
            model: make_quadratic(),
            data: InitialData::SimpleWave {
                base: -1.0,
                amplitude: 0.2,
                mode: 1,
                phase: 0.0,
                family: Family::First,
            },
            n_x: 256,
            seeds: 32,
        },
        Scenario {
            label: "quadratic mode 2 with v",
            model: make_quadratic(),
            data: InitialData::Sine {
                base: -2.0,
                amplitude: 0.2,
                mode: 2,
                phase: 0.0,
                v_amplitude: 0.3,
                v_mode: 1,
                v_phase: 0.0,
            },
            n_x: 256,
            seeds: 32,
        },
        Scenario {
            label: "quadratic near boundary",
            model: make_quadratic(),
            data: sine(-0.3, 0.25),
            n_x: 256,
            seeds: 32,
        },
        Scenario {
            label: "cubic alpha side",
            model: make_cubic(),
            data: sine(-2.0, 0.1),
            n_x: 256,
            seeds: 32,
        },
        Scenario {
            label: "cubic beta side",
            model: make_cubic(),
            data: sine(2.0, 0.1),
            n_x: 256,
            seeds: 32,
        },
    ]
}

struct SuiteRun {
    label: &'static str,
    stop: StopReason,
    t_obs: f64,
    t_pred: Option<f64>,
    boundary_paths: usize,
    worst_sign: f64,
}

fn survey_opts() -> TraceOptions {
    TraceOptions {
        extrapolate: 0.1,
        ..TraceOptions::default()
    }
}

/// Forward paths from evenly spaced seeds that end in `BoundaryHit`, and the
/// largest oriented `r_x` sampled along them.
fn boundary_sign(field: &StateField, seeds: usize) -> Result<(usize, f64)> {
    let tracer = Tracer::new(field, TraceOptions::default())?;
    let t0 = field.frame(0).t;
    let side = field
        .model()
        .classify(field.frame(0).u[0])
        .side()
        .unwrap_or(Side::Alpha);
    let jobs: Vec<(f64, Family)> = (0..seeds)
        .flat_map(|i| {
            let x = i as f64 / seeds as f64;
            [(x, Family::First), (x, Family::Second)]
        })
        .collect();
    let paths = jobs
        .par_iter()
        .map(|&(x, fam)| tracer.trace((t0, x), fam, Direction::Forward))
        .collect::<Result<Vec<_>>>()?;
    let mut count = 0;
    let mut worst = f64::NEG_INFINITY;
    for p in paths
        .iter()
        .filter(|p| matches!(p.termination, Termination::BoundaryHit { .. }))
    {
        count += 1;
        for s in &p.samples {
            worst = worst.max(s.r_x * side.orientation());
        }
    }
    Ok((count, worst))
}

/// The suite is shared by criteria 4 and 5 and runs once per process.
fn suite_runs() -> std::result::Result<&'static [SuiteRun], crate::Error> {
    static RUNS: OnceLock<std::result::Result<Vec<SuiteRun>, String>> = OnceLock::new();
    RUNS.get_or_init(|| run_suite().map_err(|e| e.to_string()))
        .as_deref()
        .map_err(|e| crate::Error::InvalidInput(e.clone()))
}

fn run_suite() -> Result<Vec<SuiteRun>> {
    suite()
        .into_iter()
        .map(|s| {
            let settings = RunSettings {
                t_max: 50.0,
                ..Default::default()
            };
            let (field, report) = run(&s.model, s.data.frame(&s.model, s.n_x, 0.0)?, 0.0, &settings)?;
            let t_pred = earliest_blowup(&blowup_survey(&field, s.seeds, &survey_opts())?);
            let (boundary_paths, worst_sign) = boundary_sign(&field, s.seeds)?;
            Ok(SuiteRun {
                label: s.label,
                stop: report.stop,
                t_obs: report.t_end,
                t_pred,
                boundary_paths,
                worst_sign,
            })
        })
        .collect()
}

fn blowup_demo() -> Check {
    let runs = suite_runs()?;
    let main = &runs[0];
    let rel = main.t_pred.map(|p| (main.t_obs - p).abs() / p);
    let main_ok = main.stop == StopReason::BlowUpSuspected && rel.is_some_and(|r| r <= 0.05);
    let survivors: Vec<&str> = runs
        .iter()
        .filter(|r| r.stop == StopReason::TimeLimit)
        .map(|r| r.label)
        .collect();
    let mut detail = format!(
        "T_obs {:.4}, T_pred {}, rel {} (0.05); {} scenarios, smooth to t=50: {}",
        main.t_obs,
        main.t_pred.map_or("none".into(), |t| format!("{t:.4}")),
        rel.map_or("-".into(), |r| format!("{r:.4}")),
        runs.len(),
        if survivors.is_empty() { "none".to_string() } else { survivors.join(", ") }
    );
    for r in &runs[1..] {
        detail.push_str(&format!(
            "; {}: {:?} at {:.3} (pred {})",
            r.label,
            r.stop,
            r.t_obs,
            r.t_pred.map_or("none".into(), |t| format!("{t:.3}"))
        ));
    }
    Ok((main_ok && survivors.is_empty(), detail))
}

fn boundary_sign_check() -> Check {
    let runs = suite_runs()?;
    let suite_hits: usize = runs.iter().map(|r| r.boundary_paths).sum();
    let suite_worst = runs.iter().map(|r| r.worst_sign).fold(f64::NEG_INFINITY, f64::max);
    // The blow-up runs steepen before any path reaches the boundary, so also
    // drive paths into the boundary from just inside it.
    let model = make_quadratic();
    let data = InitialData::Sine {
        base: -0.05,
        amplitude: 0.0,
        mode: 1,
        phase: 0.0,
        v_amplitude: 0.01,
        v_mode: 1,
        v_phase: 0.0,
    };
    let settings = RunSettings {
        t_max: 50.0,
        ..Default::default()
    };
    let (field, _) = run(&model, data.frame(&model, 256, 0.0)?, 0.0, &settings)?;
    let (hits, worst) = boundary_sign(&field, 32)?;
    let worst_all = suite_worst.max(worst);
    Ok((
        hits > 0 && worst_all <= 1e-3,
        format!(
            "blow-up suite: {suite_hits} boundary paths; boundary-approach run: {hits} boundary paths; max oriented r_x {} (1e-3)",
            if worst_all.is_finite() { format!("{worst_all:.2e}") } else { "-".into() }
        ),
    ))
}

fn nonlinearity() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst = 0.0f64;
    let mut count = 0;
    for (model, sides) in [
        (make_quadratic(), vec![Side::Alpha]),
        (make_cubic(), vec![Side::Alpha, Side::Beta]),
    ] {
        let per_side = 100 / sides.len();
        for side in sides {
            let qt = QTransform::new(model.clone(), side);
            for _ in 0..per_side {
                let u = hyperbolic_sample(&mut rng, &model, side) - side.orientation() * 0.05;
                let r = qt.to_riemann(u, rng.random_range(-1.0..1.0))?;
                // λ1 is carried by r1 on the α side and by r2 on the β side.
                let h = 1e-5;
                let lambda = |d: f64| -> Result<f64> {
                    let shifted = match side {
                        Side::Alpha => RiemannPair { r1: r.r1 + d, r2: r.r2 },
                        Side::Beta => RiemannPair { r1: r.r1, r2: r.r2 + d },
                    };
                    let (u, _) = qt.from_riemann(shifted)?;
                    Ok(Family::First.speed(&model, u))
                };
                let fd = (lambda(h)? - lambda(-h)?) / (2.0 * h);
                let exact = genuine_nonlinearity(&model, u)?;
                worst = worst.max((fd - exact).abs());
                count += 1;
            }
        }
    }
    Ok((worst <= 1e-4, format!("{count} points, max |FD − σ″/(4σ′)| {worst:.2e} (1e-4)")))
}

fn energy_concavity() -> Check {
    let cubic = make_cubic();
    let w = default_weight(&cubic)?;
    let times: Vec<f64> = (0..=20).map(|i| i as f64 * 0.05).collect();
    let constant = StateField::from_fn(cubic.clone(), 64, 0.0, &times, |_, _| (0.2, 0.0))?;
    // u = 1/2 − t, v = x solves the system exactly and gives Ë = −2.
    let analytic_field = StateField::from_fn(cubic.clone(), 64, 1.0, &times, |t, _| (0.5 - t, 0.0))?;
    let settings = RunSettings {
        t_max: 0.05,
        stop_policy: StopPolicy::Continue,
        solver: crate::evolution::SolverOptions {
            cfl: 0.1,
            filter: true,
            ..Default::default()
        },
        ..Default::default()
    };
    let (advisory, _) = run(&cubic, sine(0.0, 0.3).frame(&cubic, 64, 0.0)?, 0.0, &settings)?;
    // u = 0.3 + 0.2 t² with v = 0 violates u_t = −v_x.
    let control = StateField::from_fn(cubic.clone(), 64, 0.0, &times, |t, _| (0.3 + 0.2 * t * t, 0.0))?;

    let mut detail = Vec::new();
    let mut ok = true;
    for (label, field) in [("constant", &constant), ("analytic", &analytic_field), ("solver", &advisory)] {
        let r = concavity_monitor(field, &w)?;
        let pass = r.verdict == Verdict::Pass && r.max_e_ddot <= TOL_CONC;
        ok &= pass;
        detail.push(format!(
            "{label}: max Ë {:.2e}, cross ratio {:.2e}",
            r.max_e_ddot, r.worst_cross_ratio
        ));
    }
    let r = concavity_monitor(&control, &w)?;
    ok &= r.verdict == Verdict::Fail && !r.cross_violations.is_empty();
    detail.push(format!("control: {:?} (cross ratio {:.2e})", r.verdict, r.worst_cross_ratio));
    Ok((ok, detail.join("; ")))
}

fn f_conservation() -> Check {
    let model = make_quadratic();
    let times: Vec<f64> = (0..=40).map(|i| i as f64 * 0.05).collect();
    let constant = StateField::from_fn(model.clone(), 32, 0.0, &times, |_, _| (-1.0, 0.3))?;
    let winding = StateField::from_fn(model.clone(), 32, 1.5, &times, |t, _| (-1.5 * t, 0.0))?;
    let mut worst = 0.0f64;
    for (field, starts) in [(&constant, [0.1, 0.3, 0.5, 0.7, 0.9]), (&winding, [0.0, 0.2, 0.4, 0.6, 0.8])] {
        let (u, v) = (SampledU(field), SampledV(field));
        for (k, &x0) in starts.iter().enumerate() {
            let tr = flow(&u, (0.0, x0, 0.5 + 0.3 * k as f64), 1.5)?;
            worst = worst.max(f_drift(&u, &v, &tr));
        }
    }
    let cu = analytic(|_, x| (2.0 * PI * x).sin(), |_, x| 2.0 * PI * (2.0 * PI * x).cos());
    let cv = analytic(|_, _| 0.0, |_, _| 0.0);
    let control = f_drift(&cu, &cv, &flow(&cu, (0.0, 0.0, 1.0), 1.0)?);
    Ok((
        worst <= 1e-7 && control >= 1e-2,
        format!("10 solution trajectories: max drift {worst:.2e} (1e-7); control drift {control:.3e} (≥1e-2)"),
    ))
}

fn reduction() -> Check {
    let model = make_quadratic();
    let types = [(1, 0), (1, 1), (2, 1)];
    let times: Vec<f64> = (0..=80).map(|i| i as f64 * 0.05).collect();
    let field = StateField::from_fn(model, 32, 0.0, &times, |_, _| (-1.0, 0.3))?;
    let (u, v) = (SampledU(&field), SampledV(&field));
    let orbits = find_orbits(&u, &types, &OrbitOptions::default())?;
    let r = reduction_check(&u, &v, &orbits)?;
    let const_ok = r.a_est.abs() <= 1e-8 && r.b_est.abs() <= 1e-8 && r.max_mismatch <= 1e-7;

    let pu = analytic(|_, _| -1.0, |_, _| 0.0);
    let pv = analytic(|_, x| 2.0 * x, |_, _| 2.0);
    let orbits = find_orbits(&pu, &types, &OrbitOptions::default())?;
    let planted = reduction_check(&pu, &pv, &orbits)?;
    let m11 = planted
        .orbits
        .iter()
        .find(|o| (o.m, o.n) == (1, 1))
        .map_or(f64::NAN, |o| o.closure);
    let planted_ok = (m11 - 2.0).abs() <= 1e-6;
    Ok((
        const_ok && planted_ok,
        format!(
            "constant: A {:.1e}, B {:.1e}, max mismatch {:.1e}; planted B=2: (1,1) mismatch {m11:.9}",
            r.a_est, r.b_est, r.max_mismatch
        ),
    ))
}

fn self_convergence() -> Check {
    let model = make_quadratic();
    let data = sine(-1.0, 0.1);
    let settings = RunSettings {
        t_max: 0.2,
        ..Default::default()
    };
    let finals = [128usize, 256, 512]
        .par_iter()
        .map(|&n| {
            let (f, _) = run(&model, data.frame(&model, n, 0.0)?, 0.0, &settings)?;
            Ok(f.last().expect("run stores frames").u.clone())
        })
        .collect::<Result<Vec<_>>>()?;
    let diff = |a: &[f64], b: &[f64]| (0..a.len()).map(|j| (a[j] - b[2 * j]).abs()).fold(0.0, f64::max);
    let e1 = diff(&finals[0], &finals[1]);
    let e2 = diff(&finals[1], &finals[2]);
    let order = (e1 / e2).log2();
    Ok((
        order >= 4.0,
        format!("‖u128 − u256‖ {e1:.3e}, ‖u256 − u512‖ {e2:.3e}, order {order:.3} (≥4)"),
    ))
}

fn scratch_dir(tag: &str) -> PathBuf {
    std::env::temp_dir().join(format!("psystem-acceptance-{}-{tag}", std::process::id()))
}

fn files_under(root: &Path) -> std::io::Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in std::fs::read_dir(&dir)? {
            let p = entry?.path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.push(p.strip_prefix(root).expect("under root").to_path_buf());
            }
        }
    }
    out.sort();
    Ok(out)
}

fn determinism() -> Check {
    let cfg = parse_config(BLOWUP_CONFIG)?;
    let dirs = [scratch_dir("a"), scratch_dir("b")];
    for d in &dirs {
        let _ = std::fs::remove_dir_all(d);
        orchestrate(&cfg, Task::Simulate, d, Path::new("."))?;
    }
    let io = |e: std::io::Error| crate::Error::InvalidInput(e.to_string());
    let (a, b) = (files_under(&dirs[0]).map_err(io)?, files_under(&dirs[1]).map_err(io)?);
    let mut differing = Vec::new();
    if a != b {
        differing.push("file lists differ".to_string());
    } else {
        for rel in &a {
            let x = std::fs::read(dirs[0].join(rel)).map_err(io)?;
            let y = std::fs::read(dirs[1].join(rel)).map_err(io)?;
            if x != y {
                differing.push(rel.display().to_string());
            }
        }
    }
    for d in &dirs {
        let _ = std::fs::remove_dir_all(d);
    }
    Ok((
        differing.is_empty(),
        if differing.is_empty() {
            format!("{} files byte-identical across two runs", a.len())
        } else {
            format!("differences: {}", differing.join(", "))
        },
    ))
}
