//! Discrete-event simulation of the accumulating-priority queue against the
//! analytic class waits, over a few priority ratios.
//!
//! ```bash
//! cargo run --release --example simulate_frontier
//! cargo run --release --example simulate_frontier -- 5.5 200000
//! ```

use queue_pricing::sim::{conservation_gap, frontier_sweep, ServiceDistribution, SimConfig};
use queue_pricing::{table1, PriorityRatio};

fn main() -> queue_pricing::Result<()> {
    let mut args = std::env::args().skip(1);
    let lambda_s: f64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(3.0);
    let departures: usize = args.next().and_then(|s| s.parse().ok()).unwrap_or(50_000);

    let queue = table1::queue();
    let dist = ServiceDistribution::for_queue(&queue);
    let cfg = SimConfig::new(7, 10, departures);
    let betas = [0.0, 0.25, 1.0, 4.0]
        .map(PriorityRatio::Finite)
        .into_iter()
        .chain([PriorityRatio::Infinite])
        .collect::<Vec<_>>();

    println!("service: {:?}, lambda_s = {lambda_s}", dist.family);
    for (beta, rep) in frontier_sweep(&queue, lambda_s, &betas, &dist, &cfg)? {
        let w = queue.mean_wait(lambda_s, beta)?;
        let (gap, slack) = conservation_gap(&queue, lambda_s, &rep)?;
        println!(
            "beta {:>5}  w_p {:.4} +/- {:.4} (exact {:.4})  w_s {:.4} +/- {:.4} (exact {:.4})  conservation {}",
            beta.to_string(),
            rep.w_p_est,
            rep.w_p_ci_half,
            w.w_p,
            rep.w_s_est,
            rep.w_s_ci_half,
            w.w_s,
            if gap <= slack { "ok" } else { "off" }
        );
    }
    Ok(())
}
