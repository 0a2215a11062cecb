//! Region boundaries and the revenue-optimal operating point across a range
//! of primary service levels.
//!
//! ```bash
//! cargo run --example region_sweep
//! cargo run --example region_sweep -- 3.0     # demand intercept a
//! ```

use queue_pricing::{MarketParams, PricingModel, QueueParams};

fn main() -> queue_pricing::Result<()> {
    let a = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(120.0);
    let model = PricingModel::new(QueueParams::new(6.0, 12.0, 0.2)?, MarketParams::new(a, 0.1, 0.3)?)?;
    let iv = model.intervals();
    println!("S^_p = {:.6}", iv.s_hat_p);
    println!("I_l  = {:?}", iv.i_l);
    println!("I_u  = {:?}", iv.i_u);
    println!("J_l  = {}", iv.j_l);

    let top = if iv.j_l.is_finite() { 3.0 * iv.j_l } else { 40.0 };
    let n = 24;
    println!("\n{:>10} {:>6} {:>10} {:>10} {:>10} {:>10} {:>12}", "S_p", "region", "lambda_s", "beta", "theta", "S_s", "revenue");
    for i in 0..=n {
        let s_p = iv.s_hat_p * 0.9 + (top - iv.s_hat_p * 0.9) * (i as f64 / n as f64).powi(2);
        let p = model.optimize(s_p)?;
        if !p.is_feasible() {
            println!("{s_p:>10.4} {:>6}", p.region.label());
            continue;
        }
        println!(
            "{:>10.4} {:>6} {:>10.5} {:>10} {:>10.3} {:>10.5} {:>12.3}",
            s_p,
            p.region.label(),
            p.lambda_s,
            format!("{:.4}", p.beta),
            p.theta,
            p.s_s,
            p.revenue
        );
    }
    Ok(())
}
