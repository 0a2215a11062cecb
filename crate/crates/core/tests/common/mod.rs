#![allow(dead_code)]

use queue_pricing::{MarketParams, PricingModel, QueueParams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Mean waits `(w_p, w_s)` straight from the two-class accumulating-priority
/// formulas: the disadvantaged class by Kleinrock's ratio, the other from the
/// conservation law. `beta = None` is static secondary priority.
pub fn kleinrock_waits(lambda_p: f64, mu: f64, sigma: f64, lambda_s: f64, beta: Option<f64>) -> (f64, f64) {
    let psi = (1.0 + sigma * sigma * mu * mu) / 2.0;
    let lam = lambda_p + lambda_s;
    let w0 = lam * psi / (mu * mu);
    let rho_p = lambda_p / mu;
    let rho_s = lambda_s / mu;
    let rho = rho_p + rho_s;
    let wf = w0 / (1.0 - rho);
    match beta {
        Some(b) if b <= 1.0 => {
            let w_s = wf / (1.0 - rho_p * (1.0 - b));
            let w_p = (rho * wf - rho_s * w_s) / rho_p;
            (w_p, w_s)
        }
        _ => {
            let inv = beta.map_or(0.0, |b| 1.0 / b);
            let w_p = wf / (1.0 - rho_s * (1.0 - inv));
            let w_s = if rho_s > 0.0 { (rho * wf - rho_p * w_p) / rho_s } else { f64::NAN };
            (w_p, w_s)
        }
    }
}

/// Best revenue over a `n x n` grid of secondary rates in `[0, mu - lambda_p)`
/// and priority ratios: `[0, 1]` on the first half of the beta axis, `1 / x`
/// for `x` in `(0, 1)` on the second, then infinity. Points violating the
/// primary bound are skipped; each point is priced with the demand and the
/// secondary bound binding.
pub fn grid_optimum(q: &QueueParams, m: &MarketParams, s_p: f64, n: usize) -> f64 {
    let (lp, mu, sigma) = (q.lambda_p(), q.mu(), q.sigma());
    let phi0 = mu - lp;
    let mut best = 0.0_f64;
    for i in 1..n {
        let ls = phi0 * i as f64 / n as f64;
        for j in 0..=n {
            let u = 2.0 * j as f64 / n as f64;
            let beta = match u {
                u if u <= 1.0 => Some(u),
                u if u < 2.0 => Some(1.0 / (2.0 - u)),
                _ => None,
            };
            let (w_p, w_s) = kleinrock_waits(lp, mu, sigma, ls, beta);
            if w_p > s_p {
                continue;
            }
            best = best.max(ls * (m.a - m.c * w_s - ls) / m.b);
        }
    }
    best
}

/// A random queue and market with feasible demand. About half of the draws
/// have a non-empty region `J`.
pub fn random_model(rng: &mut ChaCha8Rng) -> PricingModel {
    loop {
        let lambda_p = rng.random_range(0.5..10.0);
        let mu = lambda_p * rng.random_range(1.2..4.0);
        let sigma = rng.random_range(0.0..2.0) / mu;
        let q = QueueParams::new(lambda_p, mu, sigma).unwrap();
        let c = rng.random_range(0.05..1.0);
        let b = rng.random_range(0.05..1.0);
        let floor = c * lambda_p * q.psi() / (mu * mu);
        let a = floor * 10f64.powf(rng.random_range(0.2..5.0));
        let m = MarketParams::new(a, b, c).unwrap();
        let model = PricingModel::new(q, m).unwrap();
        if model.intervals().demand_feasible {
            return model;
        }
    }
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform grid of `n` points strictly inside `(lo, hi)`.
pub fn interior(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (1..=n).map(|i| lo + (hi - lo) * i as f64 / (n + 1) as f64).collect()
}
