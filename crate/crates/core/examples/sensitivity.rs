//! Marginal revenue of relaxing the primary service level, against a
//! central difference of the optimal revenue.
//!
//! ```bash
//! cargo run --example sensitivity
//! ```

use queue_pricing::{table1, PricingModel};

fn main() -> queue_pricing::Result<()> {
    let model = PricingModel::new(table1::queue(), table1::market())?;
    let h = 1e-4;
    println!("{:>8} {:>6} {:>14} {:>14}", "S_p", "region", "dO*/dS_p", "difference");
    for s_p in [0.3, 0.4, 0.5, 1.0, 5.0, 9.823, 15.0, 19.0, 25.0, 40.0] {
        let region = model.classify(s_p).region;
        let fd = (model.optimize(s_p + h)?.revenue - model.optimize(s_p - h)?.revenue) / (2.0 * h);
        match model.sensitivity(s_p) {
            Ok(v) => println!("{s_p:>8} {:>6} {v:>14.6} {fd:>14.6}", region.label()),
            Err(e) => println!("{s_p:>8} {:>6} {:>14} {fd:>14.6}  ({e})", region.label(), "-"),
        }
    }
    Ok(())
}
