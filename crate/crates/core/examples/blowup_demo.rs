//! Compressive data for σ = u²/2 loses smoothness in finite time; the Riccati
//! prediction along characteristics anticipates when.
//!
//! cargo run --release --example blowup_demo [n_x]

use psystem::characteristics::{blowup_survey, earliest_blowup, TraceOptions};
use psystem::evolution::{run, InitialData, RunSettings};
use psystem::make_quadratic;

fn main() -> psystem::Result<()> {
    let n_x: usize = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(256);
    let model = make_quadratic();
    let data = InitialData::Sine {
        base: -1.0,
        amplitude: 0.1,
        mode: 1,
        phase: 0.0,
        v_amplitude: 0.0,
        v_mode: 1,
        v_phase: 0.0,
    };
    let settings = RunSettings {
        t_max: 50.0,
        ..Default::default()
    };
    let (field, report) = run(&model, data.frame(&model, n_x, 0.0)?, 0.0, &settings)?;
    println!("n_x = {n_x}: {:?} at t = {:.4} after {} steps", report.stop, report.t_end, report.steps);
    if let Some(b) = &report.blowup {
        println!("  rejected by {:?}", b.reason);
    }
    for (t, g) in report.grad_history.iter().step_by(report.grad_history.len() / 8 + 1) {
        println!("  t = {t:7.4}  max|u_x| = {g:10.4}");
    }

    let opts = TraceOptions {
        extrapolate: 0.1,
        ..TraceOptions::default()
    };
    let preds = blowup_survey(&field, 32, &opts)?;
    if let Some(t_pred) = earliest_blowup(&preds) {
        println!(
            "predicted blow-up {t_pred:.4}; observed/predicted = {:.4}",
            report.t_end / t_pred
        );
    }
    Ok(())
}
