//! Provider/user game: one round of best responses from a grid of admitted
//! rates, all of which are equilibria, and the revenue-maximal one.
//!
//! ```bash
//! cargo run --example nash_continuum
//! cargo run --example nash_continuum -- 0.45
//! ```

use queue_pricing::game::{self, UserStrategy};
use queue_pricing::{table1, PricingModel};

fn main() -> queue_pricing::Result<()> {
    let s_p = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(8.0);
    let model = PricingModel::new(table1::queue(), table1::market())?;

    let top = game::max_feasible_rate(&model, s_p);
    println!("S_p = {s_p}, admitted rates up to {top:.6}");
    let continuum = game::ne_continuum(&model, s_p, 10)?;
    for rep in &continuum {
        println!(
            "  lambda_s {:>9.5}  beta {:>8}  theta {:>9.3}  revenue {:>10.3}  equilibrium {}",
            rep.user.lambda_s,
            format!("{:.4}", rep.provider.beta),
            rep.provider.theta,
            rep.revenue,
            rep.is_equilibrium
        );
    }

    let best = game::revenue_maximal_ne(&model, s_p)?;
    println!("revenue-maximal: lambda_s {:.5}, revenue {:.3}", best.user.lambda_s, best.revenue);

    // a provider that prices with the wrong priority ratio is not at equilibrium
    let mut off = best.provider;
    off.theta *= 0.99;
    let rep = game::verify_ne(&model, s_p, off, UserStrategy { lambda_s: best.user.lambda_s });
    println!(
        "price cut by 1%: equilibrium {}, provider gain {:.3}, user gain {:.5}",
        rep.is_equilibrium, rep.provider_deviation_gain, rep.user_deviation_gain
    );
    Ok(())
}
