//! Classical baselines and comparison metrics.
//!
//! The chain-product distribution is the exact reference every quantum
//! result is judged against; Monte Carlo transport reproduces it
//! statistically; MSE/KL quantify distribution agreement; the scaling
//! experiment measures estimator error against oracle-query budgets.

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::estimation::{iqae, GoodStatePredicate, IqaeConfig};
use crate::exec;
use crate::physics::StepSchedule;
use crate::rng::{child_seed, rng_from_seed};
use crate::walk::{DepthDistribution, WalkCircuit};

/// Monte Carlo transport parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct McConfig {
    pub schedule: StepSchedule,
    pub shots: u64,
    pub seed: u64,
}

/// Exact outcome probabilities of the absorb-or-advance chain:
/// absorbed[k] = p_k * prod_{j<k}(1 - p_j), survived = prod(1 - p_j).
pub fn exact_chain_distribution(schedule: &StepSchedule) -> DepthDistribution {
    let mut survival = 1.0;
    let mut absorbed = Vec::with_capacity(schedule.num_steps());
    for &p in schedule.probabilities() {
        absorbed.push(survival * p);
        survival *= 1.0 - p;
    }
    DepthDistribution {
        absorbed,
        survived: survival,
    }
}

/// Simulates independent absorb-or-advance trajectories and returns the
/// empirical outcome distribution.  Trajectories run in fixed-size
/// batches with per-batch child seeds, so the result is independent of
/// thread count.
pub fn mc_transport(config: &McConfig) -> Result<DepthDistribution> {
    if config.shots == 0 {
        return Err(Error::InvalidParameter {
            name: "shots",
            reason: "shot count must be at least 1".into(),
        });
    }
    let probs = config.schedule.probabilities();
    let n = probs.len();
    let batches = exec::map_ranges(config.shots, exec::CHUNK as u64, |chunk_idx, range| {
        let mut rng = rng_from_seed(child_seed(config.seed, chunk_idx));
        let mut bins = vec![0u64; n + 1];
        for _ in range {
            let mut outcome = n;
            for (k, &p) in probs.iter().enumerate() {
                if rng.random::<f64>() < p {
                    outcome = k;
                    break;
                }
            }
            bins[outcome] += 1;
        }
        bins
    });
    let mut bins = vec![0u64; n + 1];
    for batch in batches {
        for (total, b) in bins.iter_mut().zip(batch) {
            *total += b;
        }
    }
    let shots = config.shots as f64;
    let absorbed = bins[..n].iter().map(|&c| c as f64 / shots).collect();
    Ok(DepthDistribution {
        absorbed,
        survived: bins[n] as f64 / shots,
    })
}

fn check_shapes(p: &DepthDistribution, q: &DepthDistribution) -> Result<()> {
    if p.num_steps() != q.num_steps() {
        return Err(Error::ShapeMismatch {
            left: p.num_steps() + 1,
            right: q.num_steps() + 1,
        });
    }
    Ok(())
}

/// Mean over the N+1 outcome bins of the squared probability difference.
pub fn mse(p: &DepthDistribution, q: &DepthDistribution) -> Result<f64> {
    check_shapes(p, q)?;
    let bins_p = p.bins();
    let bins_q = q.bins();
    let sum: f64 = bins_p
        .iter()
        .zip(&bins_q)
        .map(|(a, b)| (a - b) * (a - b))
        .sum();
    Ok(sum / bins_p.len() as f64)
}

/// Kullback-Leibler divergence KL(P || Q) = sum P_i ln(P_i / Q_i) with
/// 0 ln(0/q) = 0.  A support violation (P_i > 0 where Q_i = 0) yields
/// positive infinity rather than an error.
pub fn kl_divergence(p: &DepthDistribution, q: &DepthDistribution) -> Result<f64> {
    check_shapes(p, q)?;
    let mut sum = 0.0;
    for (&a, &b) in p.bins().iter().zip(&q.bins()) {
        if a == 0.0 {
            continue;
        }
        if b == 0.0 {
            return Ok(f64::INFINITY);
        }
        sum += a * (a / b).ln();
    }
    Ok(sum)
}

/// One outcome bin in a distribution comparison.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BinComparison {
    pub label: String,
    pub p: f64,
    pub q: f64,
}

/// Distribution agreement summary: MSE plus both KL directions and the
/// per-bin table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonReport {
    pub mse: f64,
    /// KL(P || Q), the headline direction.
    pub kl_divergence: f64,
    /// KL(Q || P), for symmetry checking.
    pub kl_reverse: f64,
    pub bins: Vec<BinComparison>,
}

/// Compares two distributions over the same outcome space.
pub fn compare(p: &DepthDistribution, q: &DepthDistribution) -> Result<ComparisonReport> {
    Ok(ComparisonReport {
        mse: mse(p, q)?,
        kl_divergence: kl_divergence(p, q)?,
        kl_reverse: kl_divergence(q, p)?,
        bins: p
            .labels()
            .into_iter()
            .zip(p.bins().into_iter().zip(q.bins()))
            .map(|(label, (a, b))| BinComparison { label, p: a, q: b })
            .collect(),
    })
}

/// Estimator family measured by the scaling experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum EstimationMethod {
    Iqae,
    Classical,
}

impl std::fmt::Display for EstimationMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            EstimationMethod::Iqae => write!(f, "iqae"),
            EstimationMethod::Classical => write!(f, "classical"),
        }
    }
}

/// One scaling-experiment run: estimator error at a query budget.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScalingRow {
    pub method: EstimationMethod,
    pub epsilon: f64,
    pub seed: u64,
    pub oracle_queries: u64,
    pub abs_error: f64,
}

/// Runs IQAE at each target precision (`replications` independent seeds
/// per epsilon), then classical Bernoulli-mean estimation at sample
/// budgets matched to the per-epsilon median IQAE query count.  Ground
/// truth is the chain-product amplitude.  Seeds derive from `seed` via
/// two branches (0 = IQAE, 1 = classical), leaf index = job number in
/// row order.  A run that exhausts its query budget before converging
/// still yields a row: its anytime estimate (the partial-interval
/// midpoint) at the queries it actually spent.
pub fn scaling_experiment(
    walk: &WalkCircuit,
    good: &GoodStatePredicate,
    epsilons: &[f64],
    replications: usize,
    base: &IqaeConfig,
    seed: u64,
) -> Result<Vec<ScalingRow>> {
    if epsilons.is_empty() || replications == 0 {
        return Err(Error::InvalidParameter {
            name: "epsilons",
            reason: "need at least one epsilon and one replication".into(),
        });
    }
    let predicate = good.basis_predicate(&walk.layout)?;
    let a_exact = exact_chain_distribution(&walk.schedule).tail_mass(good.threshold_depth());

    let iqae_seed = child_seed(seed, 0);
    let classical_seed = child_seed(seed, 1);
    let jobs = epsilons.len() * replications;
    let iqae_rows: Vec<Result<ScalingRow>> = exec::map_indexed(jobs, |job| {
        let epsilon = epsilons[job / replications];
        let run_seed = child_seed(iqae_seed, job as u64);
        let config = IqaeConfig { epsilon, ..*base };
        let (queries, estimate) = match iqae(&walk.circuit, &predicate, &config, run_seed) {
            Ok(result) => (result.oracle_queries, result.estimate),
            Err(Error::BudgetExhausted { spent, lo, hi, .. }) => (spent, 0.5 * (lo + hi)),
            Err(other) => return Err(other),
        };
        Ok(ScalingRow {
            method: EstimationMethod::Iqae,
            epsilon,
            seed: run_seed,
            oracle_queries: queries,
            abs_error: (estimate - a_exact).abs(),
        })
    });
    let mut rows: Vec<ScalingRow> = iqae_rows.into_iter().collect::<Result<_>>()?;

    let mut classical_rows = Vec::with_capacity(jobs);
    for (group, &epsilon) in epsilons.iter().enumerate() {
        let mut queries: Vec<f64> = rows
            [group * replications..(group + 1) * replications]
            .iter()
            .map(|r| r.oracle_queries as f64)
            .collect();
        let budget = (median(&mut queries).round() as u64).max(1);
        classical_rows.extend(exec::map_indexed(replications, |rep| {
            let job = (group * replications + rep) as u64;
            let run_seed = child_seed(classical_seed, job);
            let mut rng = rng_from_seed(run_seed);
            let mut hits = 0u64;
            for _ in 0..budget {
                if rng.random::<f64>() < a_exact {
                    hits += 1;
                }
            }
            ScalingRow {
                method: EstimationMethod::Classical,
                epsilon,
                seed: run_seed,
                oracle_queries: budget,
                abs_error: (hits as f64 / budget as f64 - a_exact).abs(),
            }
        }));
    }
    rows.append(&mut classical_rows);
    Ok(rows)
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(|a, b| a.total_cmp(b));
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

/// Ordinary least-squares slope of log(error) on log(queries), after
/// collapsing each epsilon group to its median budget and median error.
/// Rows must all come from one estimation method.
pub fn fit_loglog_slope(rows: &[ScalingRow]) -> Result<f64> {
    if rows.is_empty() {
        return Err(Error::InvalidParameter {
            name: "rows",
            reason: "no scaling rows to fit".into(),
        });
    }
    let method = rows[0].method;
    if rows.iter().any(|r| r.method != method) {
        return Err(Error::InvalidParameter {
            name: "rows",
            reason: "rows mix estimation methods; fit one method at a time".into(),
        });
    }
    let mut groups: Vec<(u64, Vec<f64>, Vec<f64>)> = Vec::new();
    for row in rows {
        if !row.abs_error.is_finite() || row.abs_error <= 0.0 || row.oracle_queries == 0 {
            return Err(Error::InvalidParameter {
                name: "rows",
                reason: format!(
                    "log-log fit needs finite positive errors and budgets, got \
                     error {} at {} queries",
                    row.abs_error, row.oracle_queries
                ),
            });
        }
        let key = row.epsilon.to_bits();
        match groups.iter_mut().find(|(k, _, _)| *k == key) {
            Some((_, qs, es)) => {
                qs.push(row.oracle_queries as f64);
                es.push(row.abs_error);
            }
            None => groups.push((
                key,
                vec![row.oracle_queries as f64],
                vec![row.abs_error],
            )),
        }
    }
    if groups.len() < 3 {
        return Err(Error::InvalidParameter {
            name: "rows",
            reason: format!("need at least 3 budget groups, got {}", groups.len()),
        });
    }
    let points: Vec<(f64, f64)> = groups
        .into_iter()
        .map(|(_, mut qs, mut es)| (median(&mut qs).ln(), median(&mut es).ln()))
        .collect();
    let n = points.len() as f64;
    let mean_x = points.iter().map(|(x, _)| x).sum::<f64>() / n;
    let mean_y = points.iter().map(|(_, y)| y).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|(x, _)| (x - mean_x).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidParameter {
            name: "rows",
            reason: "all budget groups share one query count; slope undefined".into(),
        });
    }
    let sxy: f64 = points
        .iter()
        .map(|(x, y)| (x - mean_x) * (y - mean_y))
        .sum();
    Ok(sxy / sxx)
}
