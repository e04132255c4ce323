//! The energy E = ∫ (u − α)(β − u) dx is concave on elliptic-band solutions;
//! a field that is not a solution is caught by the cross-check.
//!
//! cargo run --example energy_concavity

use psystem::energy::{concavity_monitor, default_weight};
use psystem::{make_cubic, StateField};

fn main() -> psystem::Result<()> {
    let model = make_cubic();
    let w = default_weight(&model)?;
    let times: Vec<f64> = (0..=10).map(|i| i as f64 * 0.08).collect();

    // u = 1/2 − t, v = x is an exact solution inside (−1, 1)
    let exact = StateField::from_fn(model.clone(), 32, 1.0, &times, |t, _| (0.5 - t, 0.0))?;
    // u = 0.3 + 0.2t² with v = 0 is not
    let fake = StateField::from_fn(model, 32, 0.0, &times, |t, _| (0.3 + 0.2 * t * t, 0.0))?;

    for (label, field) in [("solution", &exact), ("non-solution", &fake)] {
        let r = concavity_monitor(field, &w)?;
        println!("{label}: {:?} (max Ë {:.3e}, worst cross ratio {:.3e})", r.verdict, r.max_e_ddot, r.worst_cross_ratio);
        for i in [1, 5, 9] {
            println!(
                "  t = {:.2}  E = {:.6}  Ë identity = {:+.6}  Ë fd = {:+.6}",
                r.trace.times[i],
                r.trace.e_values[i],
                r.trace.e_ddot_integral[i],
                r.trace.e_ddot_fd[i].unwrap_or(f64::NAN)
            );
        }
    }
    Ok(())
}
