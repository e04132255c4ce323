//! Classify states under the built-in laws and a custom one.
//!
//! cargo run --example constitutive_laws

use std::sync::Arc;

use psystem::{make_cubic, make_quadratic, SigmaModel};

fn main() -> psystem::Result<()> {
    // σ = 1.5u − u³/3: a cubic with a wider elliptic band, given by hand.
    let b = 1.5f64.sqrt();
    let wide = SigmaModel::custom(
        "wide cubic",
        -b,
        b,
        Arc::new(|u: f64| 1.5 * u - u.powi(3) / 3.0),
        Arc::new(|u: f64| 1.5 - u * u),
        Arc::new(|u: f64| -2.0 * u),
    )?;
    // declared transition points are checked by sampling
    wide.validate(200)?;

    for model in [make_quadratic(), make_cubic(), wide] {
        println!("{} (α = {}, β = {})", model.name(), model.alpha(), model.beta());
        for u in [-2.0, -1.0, -0.5, 0.0, 0.5, 1.0, 2.0] {
            let speeds = model
                .eigenvalues(u)
                .map_or("complex".to_string(), |(l1, l2)| format!("λ = ({l1:+.4}, {l2:+.4})"));
            println!("  u = {u:+.1}: σ′ = {:+.3}  {:?}  {speeds}", model.d1(u), model.classify(u));
        }
    }
    Ok(())
}
