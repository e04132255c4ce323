//! Riemann invariants on each hyperbolic component of the cubic law, the
//! inverse transform, and the genuine-nonlinearity coefficient.
//!
//! cargo run --example riemann_invariants

use psystem::riemann::{genuine_nonlinearity, Family};
use psystem::{make_cubic, QTransform, Side};

fn main() -> psystem::Result<()> {
    let model = make_cubic();
    for (side, u) in [(Side::Alpha, -1.7), (Side::Beta, 2.4)] {
        let qt = QTransform::new(model.clone(), side);
        let v = 0.3;
        let r = qt.to_riemann(u, v)?;
        let (u2, v2) = qt.from_riemann(r)?;
        println!("{side:?}: (u, v) = ({u}, {v}) -> r1 = {:.12}, r2 = {:.12}", r.r1, r.r2);
        println!("  back: ({u2:.15}, {v2:.15})");
        println!("  q = {:.12}, q′ = {:.12}", qt.q_eval(u)?, qt.q_prime(u));
        for fam in [Family::First, Family::Second] {
            println!(
                "  {fam:?} family: speed {:+.6}, carries {:.12}",
                fam.speed(&model, u),
                qt.family_invariant(fam, u, v)?
            );
        }
        println!("  σ″/(4σ′) = {:.6}", genuine_nonlinearity(&model, u)?);
    }
    Ok(())
}
