//! Revenue-optimal admission rate, priority ratio, price and secondary
//! service level for a given primary service-level bound `S_p`.
//!
//! The feasible range of `S_p` splits into regions, each with its own closed
//! form:
//!
//! | region | `S_p` range          | `lambda_s*`                 | `beta*`            |
//! |--------|----------------------|-----------------------------|--------------------|
//! | `I-`   | `(S^_p, I_l)`        | primary bound binds at 0    | `0`                |
//! | `I`    | `[I_l, I_u)`         | root of `G`                 | inverts `W_p = S_p`|
//! | `I+`   | `[I_u, J_l]`         | primary bound binds at inf  | `inf`              |
//! | `J-`   | `(S^_p, J_l]`        | primary bound binds at inf  | `inf`              |
//! | `J`    | `(J_l, inf)`         | root of `G~`                | `inf`              |
//!
//! `J-` replaces `I-`, `I`, `I+` when the demand intercept is too small for
//! `G` to have a root in the spare capacity.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::cubic::CubicSpec;
use crate::error::{Error, Result};
use crate::queue::{PriorityRatio, QueueParams};

/// Tolerance for constraint-binding flags.
pub const BINDING_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MarketParams {
    /// Demand at zero price and zero wait.
    pub a: f64,
    /// Price elasticity.
    pub b: f64,
    /// Delay elasticity.
    pub c: f64,
}

impl MarketParams {
    pub fn new(a: f64, b: f64, c: f64) -> Result<Self> {
        for (name, v) in [("a", a), ("b", b), ("c", c)] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::invalid(name, format!("must be positive and finite, got {v}")));
            }
        }
        Ok(Self { a, b, c })
    }

    /// Secondary demand at price `theta` and quoted wait `s_s`, floored at 0.
    pub fn demand(&self, theta: f64, s_s: f64) -> f64 {
        (self.a - self.b * theta - self.c * s_s).max(0.0)
    }

    /// Highest price at which `lambda_s` is still demanded with wait `s_s`.
    pub fn price_for(&self, lambda_s: f64, s_s: f64) -> f64 {
        (self.a - self.c * s_s - lambda_s) / self.b
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Region {
    Infeasible,
    IMinus,
    I,
    IPlus,
    JMinus,
    J,
}

impl Region {
    pub fn label(&self) -> &'static str {
        match self {
            Region::Infeasible => "infeasible",
            Region::IMinus => "I-",
            Region::I => "I",
            Region::IPlus => "I+",
            Region::JMinus => "J-",
            Region::J => "J",
        }
    }

    pub fn from_label(s: &str) -> Option<Self> {
        Some(match s {
            "infeasible" => Region::Infeasible,
            "I-" => Region::IMinus,
            "I" => Region::I,
            "I+" => Region::IPlus,
            "J-" => Region::JMinus,
            "J" => Region::J,
            _ => return None,
        })
    }

    /// The optimum uses a finite priority ratio.
    pub fn is_finite_beta(&self) -> bool {
        matches!(self, Region::IMinus | Region::I)
    }
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Region endpoints for one `(queue, market)` pair. They do not depend on
/// `S_p`, so sweeps compute them once.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Intervals {
    pub s_hat_p: f64,
    /// `a / c` exceeds the minimum needed to admit any secondary traffic.
    pub demand_feasible: bool,
    /// Lower end of `J`; infinite when `J` is empty.
    pub j_l: f64,
    /// Root of `G~` in the spare capacity, when `J` is non-empty.
    pub lambda3: Option<f64>,
    /// Root of `G` in the spare capacity; absent in the `J-`-only regime.
    pub lambda1: Option<f64>,
    pub i_l: Option<f64>,
    pub i_u: Option<f64>,
    /// `S_p` at which the region-`I` optimum is plain FCFS (`beta* = 1`).
    pub fcfs_point: Option<f64>,
}

impl Intervals {
    pub fn compute(queue: &QueueParams, market: &MarketParams) -> Result<Self> {
        let (mu, lp, psi) = (queue.mu(), queue.lambda_p(), queue.psi());
        let (a, c) = (market.a, market.c);
        let phi0 = mu - lp;
        let mut out = Intervals {
            s_hat_p: queue.primary_only_wait(),
            demand_feasible: a / c > lp * psi / (mu * mu),
            j_l: f64::INFINITY,
            lambda3: None,
            lambda1: None,
            i_l: None,
            i_u: None,
            fcfs_point: None,
        };
        if !out.demand_feasible {
            return Ok(out);
        }

        let j_empty =
            phi0 / (mu * lp) <= (a * lp - c * psi) / (2.0 * mu * lp * lp + c * psi * (mu + lp));
        if !j_empty {
            let l3s = CubicSpec::g_tilde(*queue, a, c).root_in_spare_capacity()?.value;
            let l3 = lp + l3s;
            out.lambda3 = Some(l3s);
            out.j_l = psi * l3 / ((mu - l3s) * (mu - l3));
        }

        let j_minus_only = a / c <= lp * (2.0 * mu - lp) * psi / (mu * phi0 * phi0);
        if !j_minus_only {
            let l1s = CubicSpec::g(*queue, a, c).root_in_spare_capacity()?.value;
            let l1 = lp + l1s;
            out.lambda1 = Some(l1s);
            out.i_l = Some(psi * l1 / (mu * phi0));
            out.i_u = Some(psi * l1 / ((mu - l1s) * (mu - l1)));
            out.fcfs_point = Some(psi * l1 / (mu * (mu - l1)));
        }
        Ok(out)
    }

    /// Endpoint ties go to the region on the right.
    pub fn region(&self, s_p: f64) -> Region {
        if !self.demand_feasible || !(s_p > self.s_hat_p) {
            return Region::Infeasible;
        }
        if s_p > self.j_l {
            return Region::J;
        }
        match (self.i_l, self.i_u) {
            (Some(i_l), Some(i_u)) => {
                if s_p < i_l {
                    Region::IMinus
                } else if s_p < i_u {
                    Region::I
                } else {
                    Region::IPlus
                }
            }
            _ => Region::JMinus,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RegionReport {
    pub s_p: f64,
    pub region: Region,
    pub s_hat_p: f64,
    pub i_l: Option<f64>,
    pub i_u: Option<f64>,
    pub j_l: f64,
    pub lambda1: Option<f64>,
    pub lambda3: Option<f64>,
}

/// Which constraints of the pricing problem hold with equality.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct Binding {
    pub primary_sla: bool,
    pub secondary_sla: bool,
    pub stability: bool,
    pub demand: bool,
}

impl Binding {
    /// Pipe-separated names of the binding constraints, `none` if empty.
    pub fn label(&self) -> String {
        let names: Vec<&str> = [
            (self.primary_sla, "sla_p"),
            (self.secondary_sla, "sla_s"),
            (self.stability, "stability"),
            (self.demand, "demand"),
        ]
        .into_iter()
        .filter_map(|(on, name)| on.then_some(name))
        .collect();
        if names.is_empty() {
            "none".to_string()
        } else {
            names.join("|")
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OperatingPoint {
    pub s_p: f64,
    pub region: Region,
    pub lambda_s: f64,
    pub beta: PriorityRatio,
    pub theta: f64,
    pub s_s: f64,
    pub revenue: f64,
    /// Primary mean wait at the operating point.
    pub w_p: f64,
    pub binding: Binding,
    /// `false` when the price came out negative, which happens only outside
    /// the model's operating regime.
    pub theta_valid: bool,
}

impl OperatingPoint {
    pub fn is_feasible(&self) -> bool {
        self.region != Region::Infeasible
    }
}

/// A solved `(queue, market)` pair, ready to be queried for any `S_p`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PricingModel {
    queue: QueueParams,
    market: MarketParams,
    intervals: Intervals,
}

impl PricingModel {
    pub fn new(queue: QueueParams, market: MarketParams) -> Result<Self> {
        let intervals = Intervals::compute(&queue, &market)?;
        Ok(Self {
            queue,
            market,
            intervals,
        })
    }

    pub fn queue(&self) -> &QueueParams {
        &self.queue
    }

    pub fn market(&self) -> &MarketParams {
        &self.market
    }

    pub fn intervals(&self) -> &Intervals {
        &self.intervals
    }

    pub fn classify(&self, s_p: f64) -> RegionReport {
        let iv = &self.intervals;
        RegionReport {
            s_p,
            region: iv.region(s_p),
            s_hat_p: iv.s_hat_p,
            i_l: iv.i_l,
            i_u: iv.i_u,
            j_l: iv.j_l,
            lambda1: iv.lambda1,
            lambda3: iv.lambda3,
        }
    }

    /// `theta * lambda_s` with the secondary bound and demand binding.
    pub fn revenue(&self, lambda_s: f64, beta: PriorityRatio) -> Result<f64> {
        let w_s = self.queue.mean_wait(lambda_s, beta)?.w_s;
        let MarketParams { a, b, c } = self.market;
        Ok((a * lambda_s - lambda_s * lambda_s - c * lambda_s * w_s) / b)
    }

    /// Objective of the finite-`beta` subproblem.
    pub fn objective_p1(&self, lambda_s: f64, beta: PriorityRatio) -> Result<f64> {
        if beta.is_infinite() {
            return Err(Error::invalid("beta", "the finite-priority objective needs a finite beta"));
        }
        self.revenue(lambda_s, beta)
    }

    /// Objective of the static-secondary-priority subproblem.
    pub fn objective_p2(&self, lambda_s: f64) -> Result<f64> {
        self.revenue(lambda_s, PriorityRatio::Infinite)
    }

    /// Secondary rate at which the primary bound binds under `beta = inf`.
    fn binding_rate_static(&self, s_p: f64) -> f64 {
        let (mu, lp, psi) = (self.queue.mu(), self.queue.lambda_p(), self.queue.psi());
        let disc = (s_p * lp + psi).powi(2) + 4.0 * mu * psi * s_p;
        (s_p * (2.0 * mu - lp) + psi - disc.sqrt()) / (2.0 * s_p)
    }

    /// Secondary rate at which the primary bound binds under `beta = 0`.
    fn binding_rate_primary_first(&self, s_p: f64) -> f64 {
        let (mu, lp, psi) = (self.queue.mu(), self.queue.lambda_p(), self.queue.psi());
        mu * (mu - lp) * s_p / psi - lp
    }

    /// Region-`I` priority ratio: the primary bound binds at `lambda_s^(1)`.
    fn region_i_beta(&self, s_p: f64, l1s: f64) -> f64 {
        let (mu, lp, psi) = (self.queue.mu(), self.queue.lambda_p(), self.queue.psi());
        let l1 = lp + l1s;
        let fcfs_point = psi * l1 / (mu * (mu - l1));
        if s_p <= fcfs_point {
            (mu - l1) * (mu * s_p * (mu - lp) - psi * l1)
                / (psi * l1 * l1 - mu * s_p * lp * (mu - l1))
        } else {
            s_p * l1s * (mu - l1) / (psi * l1 - s_p * (mu - l1s) * (mu - l1))
        }
    }

    /// Optimal `(lambda_s, beta)` for `S_p`, without the price/level step.
    fn solve_rates(&self, s_p: f64, region: Region) -> (f64, PriorityRatio) {
        let iv = &self.intervals;
        match region {
            Region::Infeasible => (0.0, PriorityRatio::ZERO),
            Region::IMinus => (self.binding_rate_primary_first(s_p), PriorityRatio::ZERO),
            Region::I => {
                let l1s = iv.lambda1.expect("region I implies lambda1");
                (l1s, PriorityRatio::Finite(self.region_i_beta(s_p, l1s)))
            }
            Region::IPlus | Region::JMinus => {
                (self.binding_rate_static(s_p), PriorityRatio::Infinite)
            }
            Region::J => (
                iv.lambda3.expect("region J implies lambda3"),
                PriorityRatio::Infinite,
            ),
        }
    }

    /// Revenue-optimal operating point for primary bound `s_p`.
    pub fn optimize(&self, s_p: f64) -> Result<OperatingPoint> {
        let region = self.intervals.region(s_p);
        if region == Region::Infeasible {
            return Ok(OperatingPoint {
                s_p,
                region,
                lambda_s: 0.0,
                beta: PriorityRatio::ZERO,
                theta: 0.0,
                s_s: f64::NAN,
                revenue: 0.0,
                w_p: self.queue.primary_only_wait(),
                binding: Binding::default(),
                theta_valid: false,
            });
        }
        let (lambda_s, beta) = self.solve_rates(s_p, region);
        self.operating_point(s_p, region, lambda_s, beta)
    }

    /// Prices a `(lambda_s, beta)` pair with the secondary bound and demand
    /// binding.
    pub(crate) fn operating_point(
        &self,
        s_p: f64,
        region: Region,
        lambda_s: f64,
        beta: PriorityRatio,
    ) -> Result<OperatingPoint> {
        let waits = self.queue.mean_wait(lambda_s, beta)?;
        let s_s = waits.w_s;
        let theta = self.market.price_for(lambda_s, s_s);
        let MarketParams { a, b, c } = self.market;
        let demand_gap = a - b * theta - c * s_s - lambda_s;
        let binding = Binding {
            primary_sla: (waits.w_p - s_p).abs() <= 1e-6 * s_p.max(1.0),
            secondary_sla: true,
            stability: lambda_s >= self.queue.spare_capacity(),
            demand: demand_gap.abs() <= BINDING_TOL * a.max(1.0),
        };
        Ok(OperatingPoint {
            s_p,
            region,
            lambda_s,
            beta,
            theta,
            s_s,
            revenue: theta * lambda_s,
            w_p: waits.w_p,
            binding,
            theta_valid: theta >= 0.0,
        })
    }

    /// Optimum of the finite-`beta` subproblem; defined on `I-` and `I`.
    pub fn p1_optimum(&self, s_p: f64) -> Option<OperatingPoint> {
        let region = self.intervals.region(s_p);
        if !region.is_finite_beta() {
            return None;
        }
        let (lambda_s, beta) = self.solve_rates(s_p, region);
        self.operating_point(s_p, region, lambda_s, beta).ok()
    }

    /// Optimum of the static-secondary-priority subproblem.
    pub fn p2_optimum(&self, s_p: f64) -> Option<OperatingPoint> {
        let iv = &self.intervals;
        if !iv.demand_feasible || !(s_p > iv.s_hat_p) {
            return None;
        }
        let (lambda_s, region) = if s_p > iv.j_l {
            (iv.lambda3?, Region::J)
        } else {
            (self.binding_rate_static(s_p), iv.region(s_p))
        };
        self.operating_point(s_p, region, lambda_s, PriorityRatio::Infinite)
            .ok()
    }

    /// Marginal revenue of relaxing the primary bound, `dO*/dS_p`, from the
    /// multiplier of the binding primary constraint.
    pub fn sensitivity(&self, s_p: f64) -> Result<f64> {
        let region = self.intervals.region(s_p);
        let (mu, lp, psi) = (self.queue.mu(), self.queue.lambda_p(), self.queue.psi());
        let MarketParams { a, b, c } = self.market;
        match region {
            // lambda_s^(1) is a root of G, which annihilates the first term
            Region::I => Ok(c * lp / b),
            Region::IMinus => {
                let ls = self.binding_rate_primary_first(s_p);
                let g = CubicSpec::g(self.queue, a, c).eval(ls);
                let u = (mu - lp) * g / (b * psi * (mu - lp - ls).powi(2)) - c * lp / b;
                Ok(-u)
            }
            Region::IPlus | Region::JMinus => {
                let ls = self.binding_rate_static(s_p);
                let gt = CubicSpec::g_tilde(self.queue, a, c).eval(ls);
                let l = lp + ls;
                let v = (mu - l).powi(2) * gt / (b * psi * mu * (mu * (mu + lp) - l * l));
                Ok(-v)
            }
            Region::J | Region::Infeasible => Err(Error::RegionMismatch {
                region,
                expected: "a binding primary service level (I-, I, I+ or J-)",
            }),
        }
    }
}

pub fn classify_region(queue: &QueueParams, market: &MarketParams, s_p: f64) -> Result<RegionReport> {
    Ok(PricingModel::new(*queue, *market)?.classify(s_p))
}

pub fn optimize(queue: &QueueParams, market: &MarketParams, s_p: f64) -> Result<OperatingPoint> {
    PricingModel::new(*queue, *market)?.optimize(s_p)
}

pub fn sensitivity(queue: &QueueParams, market: &MarketParams, s_p: f64) -> Result<f64> {
    PricingModel::new(*queue, *market)?.sensitivity(s_p)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn model() -> PricingModel {
        PricingModel::new(
            QueueParams::new(6.0, 12.0, 0.2).unwrap(),
            MarketParams::new(120.0, 0.1, 0.3).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn market_validation() {
        assert!(MarketParams::new(0.0, 0.1, 0.3).is_err());
        assert!(MarketParams::new(1.0, -0.1, 0.3).is_err());
        assert!(MarketParams::new(1.0, 0.1, f64::NAN).is_err());
    }

    #[test]
    fn interval_endpoints() {
        let iv = *model().intervals();
        assert!((iv.s_hat_p - 0.28167).abs() < 1e-4);
        assert!((iv.i_l.unwrap() - 0.5476).abs() < 1e-3);
        assert!((iv.i_u.unwrap() - 18.61).abs() < 1e-2);
        assert!((iv.fcfs_point.unwrap() - 9.823).abs() < 1e-3);
        assert!(iv.j_l.is_infinite());
        assert!(iv.lambda3.is_none());
        assert!(iv.s_hat_p < iv.i_l.unwrap() && iv.i_l.unwrap() < iv.i_u.unwrap());
    }

    #[test]
    fn classification() {
        let m = model();
        assert_eq!(m.classify(0.25).region, Region::Infeasible);
        assert_eq!(m.classify(m.intervals().s_hat_p).region, Region::Infeasible);
        assert_eq!(m.classify(0.29).region, Region::IMinus);
        assert_eq!(m.classify(8.0).region, Region::I);
        let r19 = m.classify(19.0);
        assert_eq!(r19.region, Region::IPlus);
        assert!(r19.j_l.is_infinite());
        // ties resolve to the later region
        assert_eq!(m.classify(m.intervals().i_l.unwrap()).region, Region::I);
        assert_eq!(m.classify(m.intervals().i_u.unwrap()).region, Region::IPlus);
    }

    #[test]
    fn infeasible_demand() {
        let q = QueueParams::new(6.0, 12.0, 0.2).unwrap();
        // a/c below lambda_p psi / mu^2 = 0.1408
        let m = PricingModel::new(q, MarketParams::new(0.01, 0.1, 0.3).unwrap()).unwrap();
        assert!(!m.intervals().demand_feasible);
        let op = m.optimize(5.0).unwrap();
        assert_eq!(op.region, Region::Infeasible);
        assert_eq!(op.lambda_s, 0.0);
    }

    #[test]
    fn optimize_table1_rows() {
        let m = model();
        let op = m.optimize(0.29).unwrap();
        assert_eq!(op.region, Region::IMinus);
        assert_eq!(op.beta, PriorityRatio::ZERO);
        assert!((op.lambda_s - 0.1775).abs() < 1e-3);
        assert!((op.theta - 1196.4).abs() < 0.5);
        assert!((op.s_s - 0.5977).abs() < 1e-3);
        assert!((op.revenue - 212.36).abs() < 0.5);

        let op = m.optimize(8.0).unwrap();
        assert!((op.lambda_s - 5.6655).abs() < 1e-3);
        assert!((op.beta.value() - 0.6715).abs() < 1e-3);
        assert!((op.theta - 1108.1).abs() < 0.5);
        assert!((op.s_s - 11.754).abs() < 1e-3);
        assert!((op.revenue - 6277.94).abs() < 0.5);

        let op = m.optimize(32.0).unwrap();
        assert_eq!(op.beta, PriorityRatio::Infinite);
        assert!((op.lambda_s - 5.799).abs() < 1e-3);
        assert!((op.theta - 1140.4).abs() < 0.5);
        assert!((op.s_s - 0.5359).abs() < 1e-3);
        assert!((op.revenue - 6613.18).abs() < 0.5);

        let op = m.optimize(0.25).unwrap();
        assert_eq!(op.region, Region::Infeasible);
        assert_eq!(op.lambda_s, 0.0);
        assert_eq!(op.revenue, 0.0);
    }

    #[test]
    fn beta_branches_meet_at_fcfs_point() {
        let m = model();
        let q = *m.queue();
        let l1s = m.intervals().lambda1.unwrap();
        let l1 = q.lambda_p() + l1s;
        let (mu, lp, psi) = (q.mu(), q.lambda_p(), q.psi());
        let sp = psi * l1 / (mu * (mu - l1));
        let first = (mu - l1) * (mu * sp * (mu - lp) - psi * l1)
            / (psi * l1 * l1 - mu * sp * lp * (mu - l1));
        let second = sp * l1s * (mu - l1) / (psi * l1 - sp * (mu - l1s) * (mu - l1));
        assert!((first - 1.0).abs() < 1e-9);
        assert!((second - 1.0).abs() < 1e-9);
    }

    #[test]
    fn objectives() {
        let m = model();
        assert!((m.objective_p1(0.1775, PriorityRatio::ZERO).unwrap() - 212.36).abs() < 0.5);
        assert_eq!(m.objective_p1(0.0, PriorityRatio::Finite(0.3)).unwrap(), 0.0);
        assert!(
            (m.objective_p1(5.6655, PriorityRatio::Finite(0.6715)).unwrap() - 6277.9).abs() < 0.5
        );
        assert!(m.objective_p1(1.0, PriorityRatio::Infinite).is_err());
        assert!((m.objective_p2(5.6719).unwrap() - 6475.6).abs() < 0.5);
        assert!((m.objective_p2(5.72).unwrap() - 6527.7).abs() < 0.5);
        assert_eq!(m.objective_p2(0.0).unwrap(), 0.0);
        assert!(m.objective_p2(6.0).is_err());
    }

    #[test]
    fn sensitivity_by_region() {
        let m = model();
        assert!((m.sensitivity(8.0).unwrap() - 18.0).abs() < 1e-9);
        let s = m.sensitivity(0.35).unwrap();
        assert!(s > 18.0);
        let h = 1e-4;
        let fd = (m.optimize(0.35 + h).unwrap().revenue - m.optimize(0.35 - h).unwrap().revenue)
            / (2.0 * h);
        assert!((s - fd).abs() < 1e-2 * fd);
        assert!(m.sensitivity(19.0).unwrap() > 0.0);
        assert!(matches!(m.sensitivity(0.2), Err(Error::RegionMismatch { .. })));
    }

    #[test]
    fn binding_flags() {
        let m = model();
        for sp in [0.3, 0.45, 8.0, 12.0, 19.0] {
            let op = m.optimize(sp).unwrap();
            assert!(op.binding.primary_sla, "{sp}");
            assert!(op.binding.secondary_sla && op.binding.demand && !op.binding.stability);
            assert_eq!(op.binding.label(), "sla_p|sla_s|demand");
        }
        assert_eq!(Binding::default().label(), "none");
    }

    #[test]
    fn region_labels_round_trip() {
        for r in [
            Region::Infeasible,
            Region::IMinus,
            Region::I,
            Region::IPlus,
            Region::JMinus,
            Region::J,
        ] {
            assert_eq!(Region::from_label(r.label()), Some(r));
        }
        assert_eq!(Region::from_label("K"), None);
    }
}
