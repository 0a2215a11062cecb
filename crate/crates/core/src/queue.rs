//! Steady-state mean waiting times of a two-class M/G/1 queue under
//! delay-dependent (accumulating) priority.
//!
//! A primary job that has waited `t` carries priority `t * b_p`, a secondary
//! job `t * b_s`; only the ratio `beta = b_s / b_p` matters. `beta = 0` serves
//! primary jobs first, `beta = 1` is FCFS and `beta = inf` serves secondary
//! jobs first. The mean waits follow Kleinrock's conservation-based result for
//! two classes:
//!
//! ```text
//! W_F = lambda * psi / (mu * (mu - lambda))           (FCFS wait, lambda = lambda_p + lambda_s)
//! beta <= 1:  W_s = W_F / (1 - rho_p * (1 - beta))
//! beta >= 1:  W_p = W_F / (1 - rho_s * (1 - 1/beta))
//! rho_p * W_p + rho_s * W_s = rho * W_F                (work conservation)
//! ```

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Loads closer than this (relative to `mu`) to saturation are rejected.
pub const STABILITY_MARGIN: f64 = 1e-12;

/// `(1 + sigma^2 mu^2) / 2`, so that `E[S^2] = 2 psi / mu^2`.
pub fn compute_psi(sigma: f64, mu: f64) -> Result<f64> {
    if !(mu > 0.0) || !mu.is_finite() {
        return Err(Error::invalid("mu", format!("must be positive and finite, got {mu}")));
    }
    if !(sigma >= 0.0) || !sigma.is_finite() {
        return Err(Error::invalid("sigma", format!("must be non-negative and finite, got {sigma}")));
    }
    Ok((1.0 + sigma * sigma * mu * mu) / 2.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QueueParams {
    lambda_p: f64,
    mu: f64,
    sigma: f64,
    psi: f64,
}

impl QueueParams {
    pub fn new(lambda_p: f64, mu: f64, sigma: f64) -> Result<Self> {
        let psi = compute_psi(sigma, mu)?;
        if !(lambda_p > 0.0) || !lambda_p.is_finite() {
            return Err(Error::invalid("lambda_p", format!("must be positive, got {lambda_p}")));
        }
        if lambda_p >= mu {
            return Err(Error::invalid(
                "lambda_p",
                format!("primary load {lambda_p} must be below the service rate {mu}"),
            ));
        }
        Ok(Self {
            lambda_p,
            mu,
            sigma,
            psi,
        })
    }

    /// Exponential service (`sigma = 1/mu`, `psi = 1`).
    pub fn exponential(lambda_p: f64, mu: f64) -> Result<Self> {
        Self::new(lambda_p, mu, 1.0 / mu)
    }

    pub fn lambda_p(&self) -> f64 {
        self.lambda_p
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn psi(&self) -> f64 {
        self.psi
    }

    /// Spare capacity left by the primary class, `mu - lambda_p`.
    pub fn spare_capacity(&self) -> f64 {
        self.mu - self.lambda_p
    }

    /// Mean wait of the primary class when it has the server to itself.
    /// No primary bound at or below this value is achievable.
    pub fn primary_only_wait(&self) -> f64 {
        self.lambda_p * self.psi / (self.mu * (self.mu - self.lambda_p))
    }

    /// Mean residual work seen by an arrival, `lambda * psi / mu^2`.
    pub fn residual_work(&self, lambda_s: f64) -> f64 {
        (self.lambda_p + lambda_s) * self.psi / (self.mu * self.mu)
    }

    fn check_load(&self, lambda_s: f64) -> Result<()> {
        if !(lambda_s >= 0.0) || !lambda_s.is_finite() {
            return Err(Error::invalid("lambda_s", format!("must be non-negative, got {lambda_s}")));
        }
        let load = self.lambda_p + lambda_s;
        if load >= self.mu * (1.0 - STABILITY_MARGIN) {
            return Err(Error::Unstable { load, mu: self.mu });
        }
        Ok(())
    }

    /// M/G/1 FCFS mean wait with both classes merged.
    pub fn fcfs_wait(&self, lambda_s: f64) -> Result<f64> {
        self.check_load(lambda_s)?;
        let lambda = self.lambda_p + lambda_s;
        Ok(lambda * self.psi / (self.mu * (self.mu - lambda)))
    }

    /// Per-class mean waits under delay-dependent priority ratio `beta`.
    pub fn mean_wait(&self, lambda_s: f64, beta: PriorityRatio) -> Result<WaitPair> {
        let w_f = self.fcfs_wait(lambda_s)?;
        let rho_p = self.lambda_p / self.mu;
        let rho_s = lambda_s / self.mu;
        let rho = rho_p + rho_s;

        // Both branches are written without dividing by a class load so that
        // lambda_s = 0 (and lambda_p -> 0) stay well defined.
        let pair = match beta {
            PriorityRatio::Finite(b) if b <= 1.0 => {
                let j = 1.0 - b;
                WaitPair {
                    w_p: w_f * (1.0 - rho * j) / (1.0 - rho_p * j),
                    w_s: w_f / (1.0 - rho_p * j),
                }
            }
            _ => {
                let k = 1.0 - beta.reciprocal();
                WaitPair {
                    w_p: w_f / (1.0 - rho_s * k),
                    w_s: w_f * (1.0 - rho * k) / (1.0 - rho_s * k),
                }
            }
        };
        Ok(pair)
    }

    /// Largest `beta` keeping the primary mean wait within `s_p`, or `None`
    /// when even `beta = 0` violates it. Comparisons allow a relative slack
    /// of `rel_tol` so that binding optima are recognised.
    pub fn max_beta_for_primary_bound(
        &self,
        lambda_s: f64,
        s_p: f64,
        rel_tol: f64,
    ) -> Result<Option<PriorityRatio>> {
        let slack = s_p * (1.0 + rel_tol);
        let w_min = self.mean_wait(lambda_s, PriorityRatio::ZERO)?.w_p;
        if w_min > slack {
            return Ok(None);
        }
        let w_max = self.mean_wait(lambda_s, PriorityRatio::Infinite)?.w_p;
        if w_max <= slack {
            return Ok(Some(PriorityRatio::Infinite));
        }
        let w_f = self.fcfs_wait(lambda_s)?;
        let rho_p = self.lambda_p / self.mu;
        let rho_s = lambda_s / self.mu;
        let rho = rho_p + rho_s;
        let beta = if s_p <= w_f {
            // W_F (1 - rho j) = s_p (1 - rho_p j), j = 1 - beta
            let j = (w_f - s_p) / (rho * w_f - rho_p * s_p);
            (1.0 - j).clamp(0.0, 1.0)
        } else {
            // W_F = s_p (1 - rho_s k), k = 1 - 1/beta
            let k = (1.0 - w_f / s_p) / rho_s;
            (1.0 / (1.0 - k)).max(1.0)
        };
        Ok(Some(PriorityRatio::Finite(beta)))
    }
}

/// Ratio `b_s / b_p` of the secondary to primary priority accumulation rates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PriorityRatio {
    Finite(f64),
    Infinite,
}

impl PriorityRatio {
    pub const ZERO: Self = PriorityRatio::Finite(0.0);
    pub const FCFS: Self = PriorityRatio::Finite(1.0);

    pub fn new(value: f64) -> Result<Self> {
        if value == f64::INFINITY {
            Ok(PriorityRatio::Infinite)
        } else if value >= 0.0 && value.is_finite() {
            Ok(PriorityRatio::Finite(value))
        } else {
            Err(Error::invalid("beta", format!("must lie in [0, inf], got {value}")))
        }
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, PriorityRatio::Infinite)
    }

    /// The ratio as an `f64`; `Infinite` maps to `f64::INFINITY`.
    pub fn value(&self) -> f64 {
        match *self {
            PriorityRatio::Finite(v) => v,
            PriorityRatio::Infinite => f64::INFINITY,
        }
    }

    /// `1 / beta`, with `1 / inf = 0` and `1 / 0 = inf`.
    pub fn reciprocal(&self) -> f64 {
        match *self {
            PriorityRatio::Finite(v) => 1.0 / v,
            PriorityRatio::Infinite => 0.0,
        }
    }
}

impl PartialOrd for PriorityRatio {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        self.value().partial_cmp(&other.value())
    }
}

impl fmt::Display for PriorityRatio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PriorityRatio::Finite(v) => fmt::Display::fmt(v, f),
            PriorityRatio::Infinite => f.write_str("inf"),
        }
    }
}

impl FromStr for PriorityRatio {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "inf" | "infinity" | "∞" => Ok(PriorityRatio::Infinite),
            other => other
                .parse::<f64>()
                .map_err(|e| Error::invalid("beta", e.to_string()))
                .and_then(PriorityRatio::new),
        }
    }
}

impl Serialize for PriorityRatio {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            PriorityRatio::Finite(v) => serializer.serialize_f64(*v),
            PriorityRatio::Infinite => serializer.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for PriorityRatio {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Number(f64),
            Text(String),
        }
        let parsed = match Repr::deserialize(deserializer)? {
            Repr::Number(v) => PriorityRatio::new(v),
            Repr::Text(s) => s.parse(),
        };
        parsed.map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WaitPair {
    pub w_p: f64,
    pub w_s: f64,
}
