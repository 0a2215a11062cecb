//! Reference parameter set (`a = 120, b = 0.1, c = 0.3, lambda_p = 6,
//! mu = 12, sigma = 0.2`) and its published optima for twelve primary
//! service levels.

use serde::Serialize;

use crate::optimizer::MarketParams;
use crate::queue::{PriorityRatio, QueueParams};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PublishedRow {
    pub s_p: f64,
    pub beta: PriorityRatio,
    pub lambda_s: f64,
    pub theta: f64,
    pub s_s: f64,
    pub revenue: f64,
}

const fn row(s_p: f64, beta: f64, lambda_s: f64, theta: f64, s_s: f64, revenue: f64) -> PublishedRow {
    PublishedRow {
        s_p,
        beta: PriorityRatio::Finite(beta),
        lambda_s,
        theta,
        s_s,
        revenue,
    }
}

const fn row_inf(s_p: f64, lambda_s: f64, theta: f64, s_s: f64, revenue: f64) -> PublishedRow {
    PublishedRow {
        s_p,
        beta: PriorityRatio::Infinite,
        lambda_s,
        theta,
        s_s,
        revenue,
    }
}

pub const ROWS: [PublishedRow; 12] = [
    row(0.29, 0.0, 0.1775, 1196.4, 0.5977, 212.36),
    row(0.35, 0.0, 1.4556, 1182.7, 0.9242, 1721.54),
    row(0.45, 0.0, 3.5858, 1157.4, 2.23, 4150.20),
    row(0.75, 0.011, 5.6655, 1085.0, 19.432, 6147.07),
    row(1.0, 0.025, 5.6655, 1085.0, 19.1672, 6147.07),
    row(8.0, 0.6715, 5.6655, 1108.1, 11.754, 6277.94),
    row(9.823, 1.0, 5.6655, 1113.9, 9.8233, 6310.80),
    row(10.0, 1.0389, 5.6655, 1144.0, 9.6359, 6481.33),
    row(12.0, 1.624, 5.6655, 1208.0, 7.5178, 6843.92),
    row_inf(19.0, 5.6719, 1141.7, 0.5195, 6475.61),
    row_inf(23.0, 5.72, 1141.2, 0.5264, 6527.66),
    row_inf(32.0, 5.799, 1140.4, 0.5359, 6613.18),
];

pub fn queue() -> QueueParams {
    QueueParams::new(6.0, 12.0, 0.2).expect("reference queue is valid")
}

pub fn market() -> MarketParams {
    MarketParams::new(120.0, 0.1, 0.3).expect("reference market is valid")
}

impl PublishedRow {
    /// Price implied by this row's own admitted rate and quoted wait under
    /// binding demand.
    pub fn implied_theta(&self, market: &MarketParams) -> f64 {
        market.price_for(self.lambda_s, self.s_s)
    }

    /// The printed price and revenue agree with the row's own rate and wait
    /// to within `tol`.
    pub fn is_self_consistent(&self, market: &MarketParams, tol: f64) -> bool {
        let theta = self.implied_theta(market);
        (theta - self.theta).abs() <= tol && (theta * self.lambda_s - self.revenue).abs() <= tol
    }
}
