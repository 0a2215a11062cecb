//! Mean waits of both classes as the priority ratio moves from static
//! primary priority to static secondary priority, with the load-weighted
//! sum that stays fixed.
//!
//! ```bash
//! cargo run --example waits
//! ```

use queue_pricing::{PriorityRatio, QueueParams};

fn main() -> queue_pricing::Result<()> {
    let queue = QueueParams::new(6.0, 12.0, 0.2)?;
    let lambda_s = 3.0;
    let (rho_p, rho_s) = (queue.lambda_p() / queue.mu(), lambda_s / queue.mu());

    println!("psi = {}, W_FCFS = {:.6}", queue.psi(), queue.fcfs_wait(lambda_s)?);
    println!("{:>8} {:>10} {:>10} {:>12}", "beta", "w_p", "w_s", "weighted");
    let betas = [0.0, 0.1, 0.25, 0.5, 1.0, 2.0, 4.0, 10.0]
        .map(PriorityRatio::Finite)
        .into_iter()
        .chain([PriorityRatio::Infinite]);
    for beta in betas {
        let w = queue.mean_wait(lambda_s, beta)?;
        println!(
            "{:>8} {:>10.6} {:>10.6} {:>12.9}",
            beta.to_string(),
            w.w_p,
            w.w_s,
            rho_p * w.w_p + rho_s * w.w_s
        );
    }

    // the largest ratio that keeps the primary wait within a bound
    for s_p in [0.4, 0.6, 1.0] {
        match queue.max_beta_for_primary_bound(lambda_s, s_p, 0.0)? {
            Some(beta) => println!("S_p = {s_p}: beta <= {beta}"),
            None => println!("S_p = {s_p}: unreachable at lambda_s = {lambda_s}"),
        }
    }
    Ok(())
}
