//! Characteristic curves through a sampled field and the Riccati data carried
//! along them.
//!
//! Along a characteristic of family `i` the weighted gradient
//! `z = (R_i)_x (−σ′(u))^{1/4}` of the family's Riemann invariant obeys
//! `ż + k z² = 0` with `k = −σ″/(4(−σ′)^{5/4})`, whose solution is
//! `z(t) = z0 / (1 + z0 ∫k)`. The tracer integrates `ẋ = λ_i(u)`, `∫k` and a
//! directly integrated `z` side by side, so the closed form can be checked
//! against the ODE and blow-up times read off the denominator.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::constitutive::{SigmaModel, EPS_PAR};
use crate::error::{Error, Result};
use crate::field::StateField;
use crate::riemann::{family_gradient, Family, QTransform, Side};

/// Denominator magnitude below which the Riccati solution counts as blown up.
pub const EPS_DEN: f64 = 1e-8;
pub const DT_MIN: f64 = 1e-8;
pub const GROWTH_THRESHOLD: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Forward,
    Backward,
}

impl Direction {
    fn sign(self) -> f64 {
        match self {
            Direction::Forward => 1.0,
            Direction::Backward => -1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Termination {
    /// Entered the boundary band `|σ′(u)| ≤ eps_par` (or left the component).
    BoundaryHit { t: f64, x: f64 },
    /// Reached the first or last stored frame.
    FieldEdge { t: f64 },
    /// `1 + z0 ∫k` reached zero.
    BlowUp { t_star: f64 },
    StepFailure { t: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathSample {
    pub t: f64,
    /// Unwrapped position; `x.rem_euclid(1.0)` is the point on the circle.
    pub x: f64,
    pub u: f64,
    pub lambda: f64,
    /// `(R_i)_x` sampled from the field.
    pub r_x: f64,
    /// `r_x (−σ′)^{1/4}` sampled from the field.
    pub z: f64,
    pub k: f64,
    /// `∫_{t0}^{t} k ds`.
    pub k_integral: f64,
    /// `z0 / (1 + z0 ∫k)`.
    pub z_exact: f64,
    /// `z` from integrating `ż = −k z²` directly.
    pub z_numeric: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RiccatiRecord {
    pub z0: f64,
    pub t0: f64,
    pub k_integral: Vec<(f64, f64)>,
    pub predicted_blowup: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CharacteristicPath {
    pub family: Family,
    pub direction: Direction,
    pub side: Side,
    pub samples: Vec<PathSample>,
    pub termination: Termination,
    pub riccati: RiccatiRecord,
}

impl CharacteristicPath {
    pub fn first(&self) -> &PathSample {
        &self.samples[0]
    }

    pub fn last(&self) -> &PathSample {
        self.samples.last().expect("paths hold at least the seed")
    }

    pub fn t_end(&self) -> f64 {
        match self.termination {
            Termination::BoundaryHit { t, .. }
            | Termination::FieldEdge { t }
            | Termination::StepFailure { t } => t,
            Termination::BlowUp { t_star } => t_star,
        }
    }

    /// Winding number of the path around the circle.
    pub fn winding(&self) -> i64 {
        (self.last().x.floor() - self.first().x.floor()) as i64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CharClass {
    APlus,
    AMinus,
    BPlus,
    BMinus,
    Undetermined,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TraceOptions {
    pub eps_par: f64,
    /// Fixed path step; by default `min(frame spacing, 0.25·dx/max|λ|)`.
    pub dt: Option<f64>,
    pub dt_min: f64,
    pub eps_den: f64,
    /// Keep every n-th accepted step in `samples` (first and last always kept).
    pub keep_every: usize,
    /// Stop at the Riccati blow-up time instead of tracing through it.
    pub stop_at_blowup: bool,
    /// How far past the field edge, as a fraction of the traced span, the
    /// blow-up prediction may extrapolate `∫k` with its last slope.
    pub extrapolate: f64,
}

impl Default for TraceOptions {
    fn default() -> Self {
        TraceOptions {
            eps_par: EPS_PAR,
            dt: None,
            dt_min: DT_MIN,
            eps_den: EPS_DEN,
            keep_every: 1,
            stop_at_blowup: true,
            extrapolate: 0.0,
        }
    }
}

/// `k = −σ″/(4(−σ′)^{5/4})`.
pub fn riccati_coefficient(model: &SigmaModel, u: f64) -> Result<f64> {
    let (_, s1, s2) = model.eval(u);
    if s1 >= -EPS_PAR {
        return Err(Error::BoundaryDegeneracy { u });
    }
    Ok(-s2 / (4.0 * (-s1).powf(1.25)))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RiccatiValue {
    Finite(f64),
    BlowUp,
}

/// `z0 / (1 + z0·k_int)`, or `BlowUp` when the denominator is within `EPS_DEN` of zero.
pub fn riccati_exact(z0: f64, k_int: f64) -> RiccatiValue {
    let den = 1.0 + z0 * k_int;
    if den.abs() <= EPS_DEN {
        RiccatiValue::BlowUp
    } else {
        RiccatiValue::Finite(z0 / den)
    }
}

/// `z = r_x (−σ′(u))^{1/4}`.
pub fn z_variable(qt: &QTransform, r_x: f64, u: f64) -> Result<f64> {
    let s1 = qt.model().d1(u);
    if s1 >= -EPS_PAR {
        return Err(Error::BoundaryDegeneracy { u });
    }
    Ok(r_x * (-s1).powf(0.25))
}

/// Traces characteristics through one immutable field.
pub struct Tracer<'a> {
    field: &'a StateField,
    opts: TraceOptions,
    dt_path: f64,
    t_lo: f64,
    t_hi: f64,
}

#[derive(Clone, Copy)]
struct State {
    x: f64,
    k_int: f64,
    z: f64,
}

enum Eval {
    Ok { dx: f64, dk: f64, dz: f64 },
    Boundary,
    Edge,
}

impl<'a> Tracer<'a> {
    pub fn new(field: &'a StateField, opts: TraceOptions) -> Result<Self> {
        let (t_lo, t_hi) = field
            .t_span()
            .ok_or_else(|| Error::InvalidInput("field has no frames".into()))?;
        let dt_path = match opts.dt {
            Some(dt) => dt,
            None => {
                let cfl = 0.25 * field.dx() / field.max_speed().max(1e-3);
                if field.len() > 1 {
                    let spacing = (t_hi - t_lo) / (field.len() - 1) as f64;
                    cfl.min(spacing)
                } else {
                    cfl
                }
            }
        };
        Ok(Tracer {
            field,
            opts,
            dt_path,
            t_lo,
            t_hi,
        })
    }

    pub fn dt_path(&self) -> f64 {
        self.dt_path
    }

    pub fn field(&self) -> &StateField {
        self.field
    }

    fn strictly_in(&self, side: Side, u: f64) -> bool {
        let m = self.field.model();
        m.d1(u) < -self.opts.eps_par && m.classify_with(u, self.opts.eps_par).side() == Some(side)
    }

    fn eval(&self, family: Family, side: Side, t: f64, x: f64, z: f64) -> Eval {
        let Some(s) = self.field.sample(t, x) else {
            return Eval::Edge;
        };
        if !self.strictly_in(side, s.u) {
            return Eval::Boundary;
        }
        let m = self.field.model();
        let k = riccati_coefficient(m, s.u).unwrap_or(f64::NAN);
        Eval::Ok {
            dx: family.speed(m, s.u),
            dk: k,
            dz: -k * z * z,
        }
    }

    fn rk4(&self, family: Family, side: Side, t: f64, y: State, h: f64) -> Option<std::result::Result<State, bool>> {
        // Some(Ok) accepted, Some(Err(true)) boundary, Some(Err(false)) edge
        let mut ks = [(0.0, 0.0, 0.0); 4];
        let offsets = [0.0, 0.5, 0.5, 1.0];
        for s in 0..4 {
            let (px, pk, pz) = if s == 0 { (0.0, 0.0, 0.0) } else { ks[s - 1] };
            let c = offsets[s] * h;
            let yx = y.x + c * px;
            let yz = y.z + c * pz;
            let _ = pk;
            match self.eval(family, side, t + c, yx, yz) {
                Eval::Ok { dx, dk, dz } => ks[s] = (dx, dk, dz),
                Eval::Boundary => return Some(Err(true)),
                Eval::Edge => return Some(Err(false)),
            }
        }
        let comb = |f: fn(&(f64, f64, f64)) -> f64| {
            (f(&ks[0]) + 2.0 * f(&ks[1]) + 2.0 * f(&ks[2]) + f(&ks[3])) * h / 6.0
        };
        let next = State {
            x: y.x + comb(|k| k.0),
            k_int: y.k_int + comb(|k| k.1),
            z: y.z + comb(|k| k.2),
        };
        if !(next.x.is_finite() && next.k_int.is_finite()) {
            return None;
        }
        Some(Ok(next))
    }

    /// Seed value `z0` from centred differences of the family invariant at the start frame.
    fn seed_gradient(&self, family: Family, side: Side, t0: f64, x0: f64) -> Result<f64> {
        let qt = QTransform::new(self.field.model().clone(), side);
        let h = self.field.dx();
        let invariant = |x: f64| -> Result<f64> {
            let s = self.field.sample(t0, x).ok_or(Error::StartNotHyperbolic {
                t: t0,
                x,
                u: f64::NAN,
            })?;
            qt.family_invariant(family, s.u, s.v)
        };
        Ok((invariant(x0 + h)? - invariant(x0 - h)?) / (2.0 * h))
    }

    fn record(&self, family: Family, t: f64, y: State, z0: f64) -> PathSample {
        let m = self.field.model();
        let s = self.field.sample(t, y.x).expect("recorded points lie in the field");
        let r_x = family_gradient(m, family, s.u, s.u_x, s.v_x);
        let w = (-m.d1(s.u)).max(0.0).powf(0.25);
        let den = 1.0 + z0 * y.k_int;
        PathSample {
            t,
            x: y.x,
            u: s.u,
            lambda: family.speed(m, s.u),
            r_x,
            z: r_x * w,
            k: riccati_coefficient(m, s.u).unwrap_or(f64::NAN),
            k_integral: y.k_int,
            z_exact: z0 / den,
            z_numeric: y.z,
        }
    }

    /// Traces one characteristic from `(t0, x0)` until the boundary band, the
    /// field edge, Riccati blow-up (if `stop_at_blowup`) or a step failure.
    pub fn trace(&self, start: (f64, f64), family: Family, direction: Direction) -> Result<CharacteristicPath> {
        let (t0, x0) = start;
        let m = self.field.model();
        let s0 = self.field.sample(t0, x0).ok_or_else(|| {
            Error::InvalidInput(format!("start time {t0} is outside the field span"))
        })?;
        let side = m
            .classify_with(s0.u, self.opts.eps_par)
            .side()
            .filter(|&side| self.strictly_in(side, s0.u))
            .ok_or(Error::StartNotHyperbolic { t: t0, x: x0, u: s0.u })?;

        let z0 = self.seed_gradient(family, side, t0, x0)? * (-m.d1(s0.u)).powf(0.25);
        let mut y = State { x: x0, k_int: 0.0, z: z0 };
        let mut t = t0;
        let sign = direction.sign();
        let edge = if sign > 0.0 { self.t_hi } else { self.t_lo };
        let mut samples = vec![self.record(family, t, y, z0)];
        let mut k_record = vec![(t, 0.0)];
        let mut h_abs = self.dt_path;
        let mut steps = 0usize;
        let mut predicted = None;
        let keep = self.opts.keep_every.max(1);

        let termination = loop {
            let remaining = (edge - t) * sign;
            if remaining <= 1e-12 * edge.abs().max(1.0) {
                break Termination::FieldEdge { t };
            }
            let h = sign * h_abs.min(remaining);
            match self.rk4(family, side, t, y, h) {
                Some(Ok(next)) => {
                    let den_prev = 1.0 + z0 * y.k_int;
                    let den = 1.0 + z0 * next.k_int;
                    let t_next = t + h;
                    if predicted.is_none() && (den <= self.opts.eps_den) && den_prev > 0.0 {
                        let frac = den_prev / (den_prev - den);
                        predicted = Some(t + frac.clamp(0.0, 1.0) * h);
                    }
                    t = if (edge - t_next) * sign < 0.0 { edge } else { t_next };
                    y = next;
                    steps += 1;
                    let done_blowup = predicted.is_some() && self.opts.stop_at_blowup;
                    if steps.is_multiple_of(keep) || done_blowup {
                        samples.push(self.record(family, t, y, z0));
                        k_record.push((t, y.k_int));
                    }
                    if done_blowup {
                        break Termination::BlowUp {
                            t_star: predicted.expect("checked"),
                        };
                    }
                    // regrow after boundary-driven halving
                    h_abs = (2.0 * h_abs).min(self.dt_path);
                }
                Some(Err(true)) => {
                    h_abs *= 0.5;
                    if h_abs < self.opts.dt_min {
                        break Termination::BoundaryHit { t, x: y.x };
                    }
                }
                Some(Err(false)) => {
                    // a stage fell outside the stored frames
                    break Termination::FieldEdge { t };
                }
                None => break Termination::StepFailure { t },
            }
        };
        if samples.last().map(|s| s.t) != Some(t) {
            samples.push(self.record(family, t, y, z0));
            k_record.push((t, y.k_int));
        }

        if predicted.is_none() && self.opts.extrapolate > 0.0 {
            if let Termination::FieldEdge { .. } = termination {
                predicted = self.extrapolate(&samples, z0, t0, sign);
            }
        }

        Ok(CharacteristicPath {
            family,
            direction,
            side,
            samples,
            termination,
            riccati: RiccatiRecord {
                z0,
                t0,
                k_integral: k_record,
                predicted_blowup: predicted,
            },
        })
    }

    /// Continues `1 + z0 ∫k` past the field edge with the last sampled `k`.
    fn extrapolate(&self, samples: &[PathSample], z0: f64, t0: f64, sign: f64) -> Option<f64> {
        let last = samples.last()?;
        let den = 1.0 + z0 * last.k_integral;
        let slope = z0 * last.k * sign;
        if !(den > 0.0 && slope < 0.0) {
            return None;
        }
        let gap = den / -slope;
        let span = (last.t - t0).abs();
        (gap <= self.opts.extrapolate * span).then_some(last.t + sign * gap)
    }
}

/// Traces one characteristic with default options.
pub fn trace(field: &StateField, start: (f64, f64), family: Family, direction: Direction) -> Result<CharacteristicPath> {
    Tracer::new(field, TraceOptions::default())?.trace(start, family, direction)
}

/// First forward time where `1 + z0 ∫k` vanishes along the characteristic from `start`.
pub fn predict_blowup(field: &StateField, start: (f64, f64), family: Family, opts: &TraceOptions) -> Result<Option<f64>> {
    let opts = TraceOptions {
        stop_at_blowup: true,
        keep_every: usize::MAX,
        ..*opts
    };
    let path = Tracer::new(field, opts)?.trace(start, family, Direction::Forward)?;
    Ok(path.riccati.predicted_blowup)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeedPrediction {
    pub x0: f64,
    pub family: Family,
    pub z0: f64,
    pub predicted_blowup: Option<f64>,
    pub termination: Termination,
}

/// Blow-up predictions from `n_seeds` equally spaced seeds on the first frame,
/// both families, traced in parallel. Non-hyperbolic seeds are skipped.
pub fn blowup_survey(field: &StateField, n_seeds: usize, opts: &TraceOptions) -> Result<Vec<SeedPrediction>> {
    let opts = TraceOptions {
        stop_at_blowup: true,
        keep_every: usize::MAX,
        ..*opts
    };
    let tracer = Tracer::new(field, opts)?;
    let t0 = field.frame(0).t;
    let jobs: Vec<(f64, Family)> = (0..n_seeds)
        .flat_map(|i| {
            let x = i as f64 / n_seeds as f64;
            [(x, Family::First), (x, Family::Second)]
        })
        .collect();
    let out: Vec<Option<SeedPrediction>> = jobs
        .par_iter()
        .map(|&(x0, family)| match tracer.trace((t0, x0), family, Direction::Forward) {
            Ok(p) => Ok(Some(SeedPrediction {
                x0,
                family,
                z0: p.riccati.z0,
                predicted_blowup: p.riccati.predicted_blowup,
                termination: p.termination,
            })),
            Err(Error::StartNotHyperbolic { .. }) => Ok(None),
            Err(e) => Err(e),
        })
        .collect::<Result<_>>()?;
    Ok(out.into_iter().flatten().collect())
}

/// Earliest predicted blow-up over a survey.
pub fn earliest_blowup(preds: &[SeedPrediction]) -> Option<f64> {
    preds
        .iter()
        .filter_map(|p| p.predicted_blowup)
        .min_by(|a, b| a.total_cmp(b))
}

/// Classifies a traced path as A±/B± using a finite horizon.
///
/// `B` needs the path to reach `horizon` with `−u` grown by at least
/// `growth_threshold` over the second half of its span; growth below a tenth
/// of the threshold counts as bounded (`A`), anything between is undetermined.
pub fn classify_path(path: &CharacteristicPath, horizon: f64, growth_threshold: f64) -> CharClass {
    classify_path_with(path, horizon, growth_threshold, 0.5)
}

pub fn classify_path_with(path: &CharacteristicPath, horizon: f64, growth_threshold: f64, window: f64) -> CharClass {
    let (a, b) = match path.direction {
        Direction::Forward => (CharClass::APlus, CharClass::BPlus),
        Direction::Backward => (CharClass::AMinus, CharClass::BMinus),
    };
    match path.termination {
        Termination::BoundaryHit { .. } | Termination::BlowUp { .. } => a,
        Termination::StepFailure { .. } => CharClass::Undetermined,
        Termination::FieldEdge { t } => {
            let tol = 1e-9 * horizon.abs().max(1.0);
            let reached = match path.direction {
                Direction::Forward => t >= horizon - tol,
                Direction::Backward => t <= horizon + tol,
            };
            let t0 = path.first().t;
            if !reached || (t - t0).abs() <= tol {
                return CharClass::Undetermined;
            }
            let t_w = t - window * (t - t0);
            let in_window = |s: &&PathSample| match path.direction {
                Direction::Forward => s.t >= t_w,
                Direction::Backward => s.t <= t_w,
            };
            let start = path.samples.iter().find(in_window).unwrap_or(path.first());
            let growth = (-path.last().u) - (-start.u);
            if growth >= growth_threshold {
                b
            } else if growth <= 0.1 * growth_threshold {
                a
            } else {
                CharClass::Undetermined
            }
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ClassCounts {
    pub a_plus: usize,
    pub a_minus: usize,
    pub b_plus: usize,
    pub b_minus: usize,
    pub undetermined: usize,
}

impl ClassCounts {
    fn add(&mut self, c: CharClass) {
        match c {
            CharClass::APlus => self.a_plus += 1,
            CharClass::AMinus => self.a_minus += 1,
            CharClass::BPlus => self.b_plus += 1,
            CharClass::BMinus => self.b_minus += 1,
            CharClass::Undetermined => self.undetermined += 1,
        }
    }
}

/// Intersection of the first-family path with the second-family path shifted by `k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Intersection {
    pub k: i64,
    pub t: f64,
    pub x: f64,
    /// `r2 − r1 = 2q(u)` at the intersection point.
    pub gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnboundedPairReport {
    pub horizon: f64,
    pub counts: BTreeMap<String, ClassCounts>,
    /// Both families have a `B+` path.
    pub flag_forward: bool,
    /// Both families have a `B−` path.
    pub flag_backward: bool,
    pub flag: bool,
    pub intersections: Vec<Intersection>,
}

/// Classifies characteristics from `n_seeds` seeds on the first frame (both
/// families, both directions) and flags pairs of same-direction `B` classes.
pub fn unbounded_pair_monitor(field: &StateField, horizon: f64, n_seeds: usize, growth_threshold: f64) -> Result<UnboundedPairReport> {
    let tracer = Tracer::new(field, TraceOptions::default())?;
    let t0 = field.frame(0).t;
    let t_lo = t0;
    let jobs: Vec<(f64, Family, Direction)> = (0..n_seeds)
        .flat_map(|i| {
            let x = i as f64 / n_seeds as f64;
            [
                (x, Family::First, Direction::Forward),
                (x, Family::Second, Direction::Forward),
                (x, Family::First, Direction::Backward),
                (x, Family::Second, Direction::Backward),
            ]
        })
        .collect();
    let traced: Vec<Option<(CharacteristicPath, CharClass)>> = jobs
        .par_iter()
        .map(|&(x0, family, dir)| match tracer.trace((t0, x0), family, dir) {
            Ok(p) => {
                let h = match dir {
                    Direction::Forward => horizon,
                    Direction::Backward => t_lo,
                };
                let c = classify_path(&p, h, growth_threshold);
                Ok(Some((p, c)))
            }
            Err(Error::StartNotHyperbolic { .. }) => Ok(None),
            Err(e) => Err(e),
        })
        .collect::<Result<_>>()?;

    let mut counts: BTreeMap<String, ClassCounts> = BTreeMap::new();
    for (p, c) in traced.iter().flatten() {
        counts.entry(format!("{:?}", p.family)).or_default().add(*c);
    }
    let has = |fam: Family, class: CharClass| {
        traced
            .iter()
            .flatten()
            .find(|(p, c)| p.family == fam && *c == class)
            .map(|(p, _)| p)
    };
    let flag_forward = has(Family::First, CharClass::BPlus).is_some() && has(Family::Second, CharClass::BPlus).is_some();
    let flag_backward = has(Family::First, CharClass::BMinus).is_some() && has(Family::Second, CharClass::BMinus).is_some();

    let pair = if flag_forward {
        has(Family::First, CharClass::BPlus).zip(has(Family::Second, CharClass::BPlus))
    } else {
        let fwd = |fam| {
            traced
                .iter()
                .flatten()
                .find(|(p, _)| p.family == fam && p.direction == Direction::Forward)
                .map(|(p, _)| p)
        };
        fwd(Family::First).zip(fwd(Family::Second))
    };
    let intersections = match pair {
        Some((p1, p2)) => shifted_intersections(field, p1, p2)?,
        None => Vec::new(),
    };
    Ok(UnboundedPairReport {
        horizon,
        counts,
        flag_forward,
        flag_backward,
        flag: flag_forward || flag_backward,
        intersections,
    })
}

fn interp_x(path: &CharacteristicPath, t: f64) -> Option<f64> {
    let s = &path.samples;
    let k = s.partition_point(|p| p.t <= t);
    if k == 0 || k > s.len() {
        return None;
    }
    if k == s.len() {
        return (s[k - 1].t == t).then_some(s[k - 1].x);
    }
    let (a, b) = (&s[k - 1], &s[k]);
    let w = (t - a.t) / (b.t - a.t);
    Some(a.x + w * (b.x - a.x))
}

/// Points `P_k` where `x1(t) = x2(t) + k` for forward paths `p1` (first family)
/// and `p2` (second family), with the invariant gap `r2 − r1` there.
pub fn shifted_intersections(field: &StateField, p1: &CharacteristicPath, p2: &CharacteristicPath) -> Result<Vec<Intersection>> {
    let mut out = Vec::new();
    let mut prev: Option<(f64, f64)> = None;
    for s in &p1.samples {
        let Some(x2) = interp_x(p2, s.t) else { break };
        let d = s.x - x2;
        if let Some((tp, dp)) = prev {
            let lo = dp.floor() as i64 + 1;
            let hi = d.floor() as i64;
            for k in lo..=hi {
                let w = (k as f64 - dp) / (d - dp);
                let t = tp + w * (s.t - tp);
                let x = interp_x(p1, t).unwrap_or(s.x);
                let sample = field.sample(t, x).ok_or_else(|| Error::InvalidInput("intersection outside field".into()))?;
                let qt = QTransform::new(field.model().clone(), p1.side);
                let gap = 2.0 * qt.q_eval(sample.u)?;
                out.push(Intersection { k, t, x, gap });
            }
        }
        prev = Some((s.t, d));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constitutive::{make_cubic, make_quadratic};

    #[test]
    fn coefficient_examples() {
        let q = make_quadratic();
        assert!((riccati_coefficient(&q, -1.0).unwrap() + 0.25).abs() < 1e-15);
        assert!((riccati_coefficient(&q, -16.0).unwrap() + 1.0 / 128.0).abs() < 1e-15);
        let c = make_cubic();
        let expect = -4.0 / (4.0 * 3f64.powf(1.25));
        assert!((riccati_coefficient(&c, -2.0).unwrap() - expect).abs() < 1e-15);
        assert!(riccati_coefficient(&q, 0.0).is_err());
    }

    #[test]
    fn exact_solution_examples() {
        assert_eq!(riccati_exact(0.0, 123.0), RiccatiValue::Finite(0.0));
        assert_eq!(riccati_exact(1.0, -1.0), RiccatiValue::BlowUp);
        assert_eq!(riccati_exact(1.0, 1.0), RiccatiValue::Finite(0.5));
        // constant k = -1: z = 1/(1 - t) grows without bound as t -> 1
        let mut last = 0.0;
        for t in [0.5, 0.9, 0.99, 0.999] {
            match riccati_exact(1.0, -t) {
                RiccatiValue::Finite(z) => {
                    assert!((z - 1.0 / (1.0 - t)).abs() < 1e-9);
                    assert!(z > last);
                    last = z;
                }
                RiccatiValue::BlowUp => panic!("early blow-up at {t}"),
            }
        }
    }

    #[test]
    fn z_variable_examples() {
        let qt = QTransform::new(make_quadratic(), Side::Alpha);
        assert_eq!(z_variable(&qt, 0.0, -3.0).unwrap(), 0.0);
        assert!((z_variable(&qt, 1.0, -16.0).unwrap() - 2.0).abs() < 1e-15);
        assert_eq!(z_variable(&qt, -3.0, -1.0).unwrap(), -3.0);
        assert!(z_variable(&qt, 1.0, 0.0).is_err());
    }

    fn constant_field(u: f64) -> StateField {
        let times: Vec<f64> = (0..=20).map(|k| 0.1 * k as f64).collect();
        StateField::from_fn(make_quadratic(), 32, 0.0, &times, |_, _| (u, 0.0)).unwrap()
    }

    #[test]
    fn straight_lines_on_constant_field() {
        let f = constant_field(-4.0);
        let p = trace(&f, (0.0, 0.0), Family::First, Direction::Forward).unwrap();
        assert!(matches!(p.termination, Termination::FieldEdge { .. }));
        for s in &p.samples {
            assert!((s.x - 2.0 * s.t).abs() < 1e-12);
        }
        assert!((p.last().t - 2.0).abs() < 1e-12);
        assert_eq!(p.winding(), 4);
        let p = trace(&f, (0.0, 0.0), Family::Second, Direction::Forward).unwrap();
        for s in &p.samples {
            assert!((s.x + 2.0 * s.t).abs() < 1e-12);
        }
        assert_eq!(p.riccati.z0, 0.0);
        assert_eq!(p.riccati.predicted_blowup, None);
        assert_eq!(classify_path(&p, 2.0, GROWTH_THRESHOLD), CharClass::APlus);
    }

    #[test]
    fn boundary_start_is_rejected() {
        let f = constant_field(0.0);
        assert!(matches!(
            trace(&f, (0.0, 0.3), Family::First, Direction::Forward),
            Err(Error::StartNotHyperbolic { .. })
        ));
    }

    #[test]
    fn constant_k_blowup_time() {
        // u ≡ -1 gives k = -1/4; v = 4x gives (r1)_x = 4 = z0. Blow-up at t0 + 1.
        let times: Vec<f64> = (0..=30).map(|k| 0.1 * k as f64).collect();
        let f = StateField::from_fn(make_quadratic(), 32, 4.0, &times, |_, _| (-1.0, 0.0)).unwrap();
        let t = predict_blowup(&f, (0.5, 0.2), Family::First, &TraceOptions::default()).unwrap().unwrap();
        assert!((t - 1.5).abs() < 1e-9, "{t}");
        let p = trace(&f, (0.5, 0.2), Family::First, Direction::Forward).unwrap();
        assert!(matches!(p.termination, Termination::BlowUp { .. }));
        assert_eq!(classify_path(&p, 3.0, GROWTH_THRESHOLD), CharClass::APlus);
    }

    #[test]
    fn boundary_hit_on_rising_field() {
        // u = -1 + t reaches α = 0 at t = 1
        let times: Vec<f64> = (0..=15).map(|k| 0.1 * k as f64).collect();
        let f = StateField::from_fn(make_quadratic(), 16, 0.0, &times, |t, _| (-1.0 + t, 0.0)).unwrap();
        let p = trace(&f, (0.0, 0.0), Family::First, Direction::Forward).unwrap();
        match p.termination {
            Termination::BoundaryHit { t, .. } => assert!((t - 1.0).abs() < 1e-6, "{t}"),
            other => panic!("{other:?}"),
        }
        assert_eq!(classify_path(&p, 1.5, GROWTH_THRESHOLD), CharClass::APlus);
    }

    #[test]
    fn growing_depth_classifies_as_b() {
        // u = -1 - t: -u grows without bound along every path
        let times: Vec<f64> = (0..=200).map(|k| 0.2 * k as f64).collect();
        let f = StateField::from_fn(make_quadratic(), 16, 0.0, &times, |t, _| (-1.0 - t, 0.0)).unwrap();
        let p = trace(&f, (0.0, 0.0), Family::First, Direction::Forward).unwrap();
        assert_eq!(classify_path(&p, 40.0, GROWTH_THRESHOLD), CharClass::BPlus);
        // horizon not reached
        assert_eq!(classify_path(&p, 50.0, GROWTH_THRESHOLD), CharClass::Undetermined);
        let back = trace(&f, (0.0, 0.0), Family::First, Direction::Backward).unwrap();
        assert_eq!(classify_path(&back, 0.0, GROWTH_THRESHOLD), CharClass::Undetermined);
    }
}
