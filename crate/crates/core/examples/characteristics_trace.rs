//! Trace both families through a solver field and watch z = r_x(−σ′)^{1/4}
//! follow z0/(1 + z0∫k). The seed z0 comes from centred differences of the
//! invariant, so it differs from the sampled z at O(dx²).
//!
//! cargo run --release --example characteristics_trace

use psystem::characteristics::{classify_path, unbounded_pair_monitor, Direction, Tracer, TraceOptions, GROWTH_THRESHOLD};
use psystem::evolution::{run, InitialData, RunSettings};
use psystem::riemann::Family;
use psystem::{make_cubic, StateField};

fn main() -> psystem::Result<()> {
    let model = make_cubic();
    let data = InitialData::Sine {
        base: 2.0,
        amplitude: 0.1,
        mode: 1,
        phase: 0.0,
        v_amplitude: 0.05,
        v_mode: 1,
        v_phase: 0.5,
    };
    let settings = RunSettings {
        t_max: 2.0,
        ..Default::default()
    };
    let (field, _) = run(&model, data.frame(&model, 128, 0.0)?, 0.0, &settings)?;
    let tracer = Tracer::new(&field, TraceOptions::default())?;
    let horizon = field.last().map_or(0.0, |f| f.t);

    for fam in [Family::First, Family::Second] {
        let path = tracer.trace((0.0, 0.25), fam, Direction::Forward)?;
        println!(
            "{fam:?} from x = 0.25: {:?}, class {:?}, winding {}",
            path.termination,
            classify_path(&path, horizon, GROWTH_THRESHOLD),
            path.winding()
        );
        for s in path.samples.iter().step_by(path.samples.len() / 5 + 1) {
            println!(
                "  t = {:.3}  x = {:+.4}  u = {:.4}  z sampled = {:+.6}  z0/(1 + z0∫k) = {:+.6}",
                s.t, s.x, s.u, s.z, s.z_exact
            );
        }
    }

    // u = −2t, v = 2x: both families run off to −u → ∞, the flagged case
    let times: Vec<f64> = (0..=150).map(|i| 0.5 + i as f64 * 0.1).collect();
    let winding = StateField::from_fn(psystem::make_quadratic(), 32, 2.0, &times, |t, _| (-2.0 * t, 0.0))?;
    let report = unbounded_pair_monitor(&winding, 15.5, 4, GROWTH_THRESHOLD)?;
    println!("winding family: flag {} with {} shifted intersections", report.flag, report.intersections.len());
    Ok(())
}
