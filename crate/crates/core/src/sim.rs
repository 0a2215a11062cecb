//! Discrete-event simulation of the two-class single-server queue under
//! delay-dependent priority. Used as an independent check on the analytic
//! mean waits.
//!
//! The server is non-preemptive and work-conserving. At each service start
//! the waiting job with the largest `(now - arrival) * b_class` is chosen,
//! with `b_p = 1` and `b_s = beta`. Within a class that is always the oldest
//! job, so each class is kept as a FIFO and only the two heads compete.

use std::collections::VecDeque;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, Gamma};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};
use crate::queue::{PriorityRatio, QueueParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ServiceFamily {
    Deterministic,
    Exponential,
    Gamma,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ServiceDistribution {
    pub mean: f64,
    pub std_dev: f64,
    pub family: ServiceFamily,
}

impl ServiceDistribution {
    /// Picks the family matching the first two moments of `queue`'s service
    /// time: deterministic for `sigma = 0`, exponential for `sigma = 1/mu`,
    /// gamma otherwise.
    pub fn for_queue(queue: &QueueParams) -> Self {
        let mean = 1.0 / queue.mu();
        let std_dev = queue.sigma();
        let family = if std_dev == 0.0 {
            ServiceFamily::Deterministic
        } else if ((std_dev - mean) / mean).abs() < 1e-12 {
            ServiceFamily::Exponential
        } else {
            ServiceFamily::Gamma
        };
        Self {
            mean,
            std_dev,
            family,
        }
    }

    pub fn sampler(&self) -> ServiceSampler {
        match self.family {
            ServiceFamily::Deterministic => ServiceSampler::Constant(self.mean),
            ServiceFamily::Exponential => {
                ServiceSampler::Exp(Exp::new(1.0 / self.mean).expect("positive rate"))
            }
            ServiceFamily::Gamma => {
                let cv = self.std_dev / self.mean;
                let shape = 1.0 / (cv * cv);
                let scale = self.std_dev * self.std_dev / self.mean;
                ServiceSampler::Gamma(Gamma::new(shape, scale).expect("positive shape and scale"))
            }
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub enum ServiceSampler {
    Constant(f64),
    Exp(Exp<f64>),
    Gamma(Gamma<f64>),
}

impl Distribution<f64> for ServiceSampler {
    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            ServiceSampler::Constant(v) => *v,
            ServiceSampler::Exp(d) => d.sample(rng),
            ServiceSampler::Gamma(d) => d.sample(rng),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimConfig {
    pub seed: u64,
    pub replications: usize,
    pub departures_per_replication: usize,
    pub warmup_departures: usize,
}

impl SimConfig {
    /// Discards the first 10% of departures as warmup.
    pub fn new(seed: u64, replications: usize, departures_per_replication: usize) -> Self {
        Self {
            seed,
            replications,
            departures_per_replication,
            warmup_departures: departures_per_replication / 10,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.replications == 0 {
            return Err(Error::NoReplications);
        }
        if self.warmup_departures >= self.departures_per_replication {
            return Err(Error::invalid(
                "warmup_departures",
                format!(
                    "{} must be below departures_per_replication {}",
                    self.warmup_departures, self.departures_per_replication
                ),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum JobClass {
    Primary,
    Secondary,
}

/// One served job, in service order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Departure {
    pub class: JobClass,
    pub arrival: f64,
    pub start: f64,
}

/// Mean waits over `[warmup, departures)` of a single replication.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
struct ReplicationStats {
    sum_p: f64,
    count_p: u64,
    sum_s: f64,
    count_s: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SimulationReport {
    pub w_p_est: f64,
    pub w_s_est: f64,
    /// Half-width of the 95% confidence interval across replications.
    pub w_p_ci_half: f64,
    pub w_s_ci_half: f64,
    pub count_p: u64,
    pub count_s: u64,
    pub replications: usize,
}

impl SimulationReport {
    pub fn covers_primary(&self, value: f64) -> bool {
        (self.w_p_est - value).abs() <= self.w_p_ci_half
    }

    pub fn covers_secondary(&self, value: f64) -> bool {
        (self.w_s_est - value).abs() <= self.w_s_ci_half
    }
}

/// Event loop shared by the statistics and trace entry points. `sink` sees
/// every departure together with its index.
fn run_queue<F>(
    queue: &QueueParams,
    lambda_s: f64,
    beta: PriorityRatio,
    service: &ServiceSampler,
    rng: &mut ChaCha8Rng,
    departures: usize,
    mut sink: F,
) where
    F: FnMut(usize, Departure),
{
    let arrivals_p = Exp::new(queue.lambda_p()).expect("positive primary rate");
    let arrivals_s = (lambda_s > 0.0).then(|| Exp::new(lambda_s).expect("positive secondary rate"));

    let mut next_p = arrivals_p.sample(rng);
    let mut next_s = arrivals_s.map_or(f64::INFINITY, |d| d.sample(rng));
    let mut waiting_p: VecDeque<f64> = VecDeque::new();
    let mut waiting_s: VecDeque<f64> = VecDeque::new();
    let mut free_at = 0.0_f64;

    for served in 0..departures {
        if waiting_p.is_empty() && waiting_s.is_empty() {
            free_at = free_at.max(next_p.min(next_s));
        }
        while next_p <= free_at {
            waiting_p.push_back(next_p);
            next_p += arrivals_p.sample(rng);
        }
        if let Some(d) = arrivals_s {
            while next_s <= free_at {
                waiting_s.push_back(next_s);
                next_s += d.sample(rng);
            }
        }

        let class = pick_class(free_at, waiting_p.front(), waiting_s.front(), beta);
        let arrival = match class {
            JobClass::Primary => waiting_p.pop_front(),
            JobClass::Secondary => waiting_s.pop_front(),
        }
        .expect("chosen class has a waiting job");
        sink(
            served,
            Departure {
                class,
                arrival,
                start: free_at,
            },
        );
        free_at += service.sample(rng);
    }
}

/// Chooses which class head to serve at time `now`. At least one is present.
fn pick_class(now: f64, head_p: Option<&f64>, head_s: Option<&f64>, beta: PriorityRatio) -> JobClass {
    let (tp, ts) = match (head_p, head_s) {
        (Some(&tp), Some(&ts)) => (tp, ts),
        (Some(_), None) => return JobClass::Primary,
        _ => return JobClass::Secondary,
    };
    match beta {
        PriorityRatio::Infinite => JobClass::Secondary,
        PriorityRatio::Finite(0.0) => JobClass::Primary,
        PriorityRatio::Finite(b) => {
            let prio_p = now - tp;
            let prio_s = (now - ts) * b;
            if prio_s > prio_p || (prio_s == prio_p && ts < tp) {
                JobClass::Secondary
            } else {
                JobClass::Primary
            }
        }
    }
}

fn replication_rng(seed: u64, replication: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(replication as u64);
    rng
}

fn check_inputs(queue: &QueueParams, lambda_s: f64) -> Result<()> {
    // reuse the analytic stability check
    queue.fcfs_wait(lambda_s).map(|_| ())
}

fn run_replication(
    queue: &QueueParams,
    lambda_s: f64,
    beta: PriorityRatio,
    dist: &ServiceDistribution,
    cfg: &SimConfig,
    replication: usize,
) -> ReplicationStats {
    let mut rng = replication_rng(cfg.seed, replication);
    let sampler = dist.sampler();
    let mut stats = ReplicationStats::default();
    run_queue(
        queue,
        lambda_s,
        beta,
        &sampler,
        &mut rng,
        cfg.departures_per_replication,
        |i, d| {
            if i < cfg.warmup_departures {
                return;
            }
            let wait = d.start - d.arrival;
            match d.class {
                JobClass::Primary => {
                    stats.sum_p += wait;
                    stats.count_p += 1;
                }
                JobClass::Secondary => {
                    stats.sum_s += wait;
                    stats.count_s += 1;
                }
            }
        },
    );
    stats
}

/// Mean and 95% half-width across replication means; NaN entries (a class
/// with no departures in some replication) propagate.
fn summarize(means: &[f64]) -> (f64, f64) {
    let n = means.len();
    let mean = pairwise_sum(means) / n as f64;
    if n < 2 {
        return (mean, f64::INFINITY);
    }
    let dev: Vec<f64> = means.iter().map(|m| (m - mean).powi(2)).collect();
    let var = pairwise_sum(&dev) / (n - 1) as f64;
    let t = StudentsT::new(0.0, 1.0, (n - 1) as f64)
        .expect("positive degrees of freedom")
        .inverse_cdf(0.975);
    (mean, t * (var / n as f64).sqrt())
}

fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 8 {
        xs.iter().sum()
    } else {
        let (l, r) = xs.split_at(xs.len() / 2);
        pairwise_sum(l) + pairwise_sum(r)
    }
}

/// Replicated simulation of the queue at secondary rate `lambda_s` and
/// priority ratio `beta`. Replications run concurrently; results depend
/// only on `cfg`.
pub fn simulate_ddp(
    queue: &QueueParams,
    lambda_s: f64,
    beta: PriorityRatio,
    dist: &ServiceDistribution,
    cfg: &SimConfig,
) -> Result<SimulationReport> {
    cfg.validate()?;
    check_inputs(queue, lambda_s)?;
    let reps: Vec<ReplicationStats> = (0..cfg.replications)
        .into_par_iter()
        .map(|r| run_replication(queue, lambda_s, beta, dist, cfg, r))
        .collect();

    let mean_of = |sum: f64, count: u64| if count == 0 { f64::NAN } else { sum / count as f64 };
    let means_p: Vec<f64> = reps.iter().map(|s| mean_of(s.sum_p, s.count_p)).collect();
    let means_s: Vec<f64> = reps.iter().map(|s| mean_of(s.sum_s, s.count_s)).collect();
    let (w_p_est, w_p_ci_half) = summarize(&means_p);
    let (w_s_est, w_s_ci_half) = summarize(&means_s);
    Ok(SimulationReport {
        w_p_est,
        w_s_est,
        w_p_ci_half,
        w_s_ci_half,
        count_p: reps.iter().map(|s| s.count_p).sum(),
        count_s: reps.iter().map(|s| s.count_s).sum(),
        replications: cfg.replications,
    })
}

/// Service-order trace of a single run, warmup included.
pub fn simulate_trace(
    queue: &QueueParams,
    lambda_s: f64,
    beta: PriorityRatio,
    dist: &ServiceDistribution,
    seed: u64,
    departures: usize,
) -> Result<Vec<Departure>> {
    check_inputs(queue, lambda_s)?;
    let mut rng = replication_rng(seed, 0);
    let mut out = Vec::with_capacity(departures);
    run_queue(queue, lambda_s, beta, &dist.sampler(), &mut rng, departures, |_, d| {
        out.push(d)
    });
    Ok(out)
}

/// Simulates each priority ratio in `betas` with the same configuration.
pub fn frontier_sweep(
    queue: &QueueParams,
    lambda_s: f64,
    betas: &[PriorityRatio],
    dist: &ServiceDistribution,
    cfg: &SimConfig,
) -> Result<Vec<(PriorityRatio, SimulationReport)>> {
    betas
        .iter()
        .map(|&beta| simulate_ddp(queue, lambda_s, beta, dist, cfg).map(|r| (beta, r)))
        .collect()
}

/// Distance of the simulated point from the work-conservation line, and the
/// allowed slack (two combined half-widths).
pub fn conservation_gap(
    queue: &QueueParams,
    lambda_s: f64,
    report: &SimulationReport,
) -> Result<(f64, f64)> {
    let rho_p = queue.lambda_p() / queue.mu();
    let rho_s = lambda_s / queue.mu();
    let target = (rho_p + rho_s) * queue.fcfs_wait(lambda_s)?;
    let (w_s, ci_s) = if lambda_s > 0.0 {
        (report.w_s_est, report.w_s_ci_half)
    } else {
        (0.0, 0.0)
    };
    let lhs = rho_p * report.w_p_est + rho_s * w_s;
    let slack = 2.0 * (rho_p * report.w_p_ci_half + rho_s * ci_s);
    Ok(((lhs - target).abs(), slack))
}
