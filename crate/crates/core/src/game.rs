//! The provider / user-set game. The provider picks price, quoted secondary
//! wait and priority ratio given the admitted rate; the user set picks the
//! admitted rate given the price and quoted wait. Each player's feasible set
//! depends on the other's strategy.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::optimizer::{MarketParams, PricingModel};
use crate::queue::PriorityRatio;

/// Deviation gains at or below this count as no profitable deviation.
pub const NE_TOL: f64 = 1e-6;
/// Relative slack on the primary bound when inverting for `beta`.
pub const SLA_REL_TOL: f64 = 1e-10;
/// Gap kept below the spare capacity when enumerating equilibria.
pub const CAPACITY_GAP: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProviderStrategy {
    pub theta: f64,
    pub s_s: f64,
    pub beta: PriorityRatio,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct UserStrategy {
    pub lambda_s: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NeReport {
    pub provider: ProviderStrategy,
    pub user: UserStrategy,
    pub is_equilibrium: bool,
    /// Revenue gained by the provider's best deviation; infinite when the
    /// profile's provider strategy is itself infeasible.
    pub provider_deviation_gain: f64,
    /// Change in admitted rate from the user set's best deviation.
    pub user_deviation_gain: f64,
    pub revenue: f64,
}

/// Best response of the provider to an admitted secondary rate: the largest
/// priority ratio the primary bound allows, the shortest wait it can then
/// quote, and the highest price the demand supports.
pub fn best_response_provider(
    model: &PricingModel,
    s_p: f64,
    lambda_s_bar: f64,
) -> Result<ProviderStrategy> {
    let queue = model.queue();
    if !(lambda_s_bar >= 0.0) {
        return Err(Error::invalid("lambda_s", format!("must be non-negative, got {lambda_s_bar}")));
    }
    if lambda_s_bar >= queue.spare_capacity() {
        return Err(Error::Infeasible(format!(
            "admitted rate {lambda_s_bar} leaves no spare capacity (mu - lambda_p = {})",
            queue.spare_capacity()
        )));
    }
    let beta = match queue.max_beta_for_primary_bound(lambda_s_bar, s_p, SLA_REL_TOL) {
        Ok(Some(beta)) => beta,
        Ok(None) => {
            return Err(Error::Infeasible(format!(
                "primary bound {s_p} cannot be met at admitted rate {lambda_s_bar} even with beta = 0"
            )))
        }
        Err(Error::Unstable { load, mu }) => {
            return Err(Error::Infeasible(format!("load {load} saturates service rate {mu}")))
        }
        Err(e) => return Err(e),
    };
    let s_s = queue.mean_wait(lambda_s_bar, beta)?.w_s;
    let theta = model.market().price_for(lambda_s_bar, s_s);
    Ok(ProviderStrategy { theta, s_s, beta })
}

/// Best response of the user set: all demand at the offered price and wait.
pub fn best_response_user(market: &MarketParams, provider: &ProviderStrategy) -> UserStrategy {
    UserStrategy {
        lambda_s: market.demand(provider.theta, provider.s_s),
    }
}

fn provider_feasible(
    model: &PricingModel,
    s_p: f64,
    provider: &ProviderStrategy,
    user: &UserStrategy,
) -> bool {
    let Ok(waits) = model.queue().mean_wait(user.lambda_s, provider.beta) else {
        return false;
    };
    let m = model.market();
    let tol = NE_TOL;
    provider.theta >= -tol
        && waits.w_p <= s_p * (1.0 + SLA_REL_TOL) + tol
        && provider.s_s >= waits.w_s - tol
        && user.lambda_s <= m.a - m.b * provider.theta - m.c * provider.s_s + tol
}

/// Checks a strategy profile for profitable unilateral deviations.
pub fn verify_ne(
    model: &PricingModel,
    s_p: f64,
    provider: ProviderStrategy,
    user: UserStrategy,
) -> NeReport {
    let revenue = provider.theta * user.lambda_s;
    let provider_deviation_gain = if !provider_feasible(model, s_p, &provider, &user) {
        f64::INFINITY
    } else if user.lambda_s == 0.0 {
        // no admitted traffic: every price yields zero revenue
        0.0
    } else {
        match best_response_provider(model, s_p, user.lambda_s) {
            Ok(br) => (br.theta * user.lambda_s - revenue).max(0.0),
            Err(_) => 0.0,
        }
    };
    let reply = best_response_user(model.market(), &provider);
    let user_deviation_gain = (reply.lambda_s - user.lambda_s).abs();
    NeReport {
        provider,
        user,
        is_equilibrium: provider_deviation_gain <= NE_TOL && user_deviation_gain <= NE_TOL,
        provider_deviation_gain,
        user_deviation_gain,
        revenue,
    }
}

/// One round of best responses starting from an admitted rate, followed by
/// an equilibrium check of the resulting profile.
pub fn run_dynamics(model: &PricingModel, s_p: f64, initial: UserStrategy) -> Result<NeReport> {
    let provider = best_response_provider(model, s_p, initial.lambda_s)?;
    let user = best_response_user(model.market(), &provider);
    Ok(verify_ne(model, s_p, provider, user))
}

/// Largest admitted rate for which the provider's best response exists with
/// a non-negative price.
pub fn max_feasible_rate(model: &PricingModel, s_p: f64) -> f64 {
    let q = model.queue();
    let sla_cap = q.mu() * q.spare_capacity() * s_p / q.psi() - q.lambda_p();
    let cap = (q.spare_capacity() - CAPACITY_GAP).min(sla_cap);
    if cap <= 0.0 {
        return 0.0;
    }
    let price_ok = |l: f64| {
        best_response_provider(model, s_p, l)
            .map(|p| p.theta >= 0.0)
            .unwrap_or(false)
    };
    if price_ok(cap) {
        return cap;
    }
    // theta falls as the admitted rate grows; bisect for its zero
    let (mut lo, mut hi) = (0.0, cap);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if price_ok(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// Equilibria reached from a uniform grid of admitted rates over
/// `(0, max_feasible_rate]`.
pub fn ne_continuum(model: &PricingModel, s_p: f64, grid_size: usize) -> Result<Vec<NeReport>> {
    if grid_size < 2 {
        return Err(Error::invalid("grid_size", "need at least two grid points"));
    }
    let top = max_feasible_rate(model, s_p);
    if top <= 0.0 {
        return Err(Error::Infeasible(format!("no admitted rate is feasible at S_p = {s_p}")));
    }
    (1..=grid_size)
        .into_par_iter()
        .map(|i| {
            let lambda_s = top * i as f64 / grid_size as f64;
            run_dynamics(model, s_p, UserStrategy { lambda_s })
        })
        .collect()
}

/// Revenue-maximal equilibrium: the pricing optimum, checked as an NE.
pub fn revenue_maximal_ne(model: &PricingModel, s_p: f64) -> Result<NeReport> {
    let op = model.optimize(s_p)?;
    if !op.is_feasible() {
        return Err(Error::Infeasible(format!(
            "S_p = {s_p} is not above the minimum achievable primary wait {}",
            model.intervals().s_hat_p
        )));
    }
    Ok(verify_ne(
        model,
        s_p,
        ProviderStrategy {
            theta: op.theta,
            s_s: op.s_s,
            beta: op.beta,
        },
        UserStrategy {
            lambda_s: op.lambda_s,
        },
    ))
}
