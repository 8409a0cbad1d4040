//! Grover operator construction and Iterative Quantum Amplitude
//! Estimation (IQAE) of the photon survival amplitude.
//!
//! The good subspace is defined directly by a position-threshold predicate
//! (no flag qubit): a basis state is good when its position register holds
//! a value >= x, meaning the photon passed depth x uninteracted.  With
//! a = sin^2(theta_a) the probability of measuring a good state after
//! Q^k A is sin^2((2k+1) theta_a), which IQAE inverts round by round on a
//! shrinking confidence interval.

use std::f64::consts::{FRAC_PI_2, PI};

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::rng::{child_seed, rng_from_seed};
use crate::sim::{BasisPredicate, Circuit, GateOp, QuantumState, MAX_QUBITS};
use crate::walk::{position_at_least, RegisterLayout};

/// "Photon reached depth `threshold_depth` uninteracted": position >= x.
///
/// Branches absorbed at depth >= x passed depth x before interacting, so
/// they are good alongside the survivor branch.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GoodStatePredicate {
    threshold_depth: usize,
    num_steps: usize,
}

impl GoodStatePredicate {
    /// Threshold in [1, N] for an N-step walk.
    pub fn new(threshold_depth: usize, num_steps: usize) -> Result<Self> {
        if threshold_depth == 0 || threshold_depth > num_steps {
            return Err(Error::InvalidParameter {
                name: "threshold_depth",
                reason: format!(
                    "threshold {threshold_depth} outside [1, {num_steps}]"
                ),
            });
        }
        Ok(GoodStatePredicate {
            threshold_depth,
            num_steps,
        })
    }

    /// Full-slab survival: threshold x = N selects only position = N.
    pub fn survival(num_steps: usize) -> Result<Self> {
        Self::new(num_steps, num_steps)
    }

    pub fn threshold_depth(&self) -> usize {
        self.threshold_depth
    }

    /// Concrete predicate over `layout`'s position register.
    pub fn basis_predicate(&self, layout: &RegisterLayout) -> Result<BasisPredicate> {
        if layout.num_steps() != self.num_steps {
            return Err(Error::InvalidParameter {
                name: "layout",
                reason: format!(
                    "predicate built for {} steps, layout has {}",
                    self.num_steps,
                    layout.num_steps()
                ),
            });
        }
        Ok(position_at_least(layout, self.threshold_depth))
    }
}

/// The Grover operator Q = A S0 A^-1 S_psi1, rightmost factor first.
///
/// S_psi1 flips the sign of good basis states; S0 flips |0...0>.  Both
/// are realized as predicate phase flips; the global phase is immaterial.
pub fn grover_operator(a: &Circuit, good: &BasisPredicate) -> Result<Circuit> {
    let n = a.num_qubits();
    let mut q = Circuit::new(n);
    q.push(GateOp::phase_flip(good.clone()))?;
    q.extend(&a.inverse())?;
    q.push(GateOp::phase_flip(BasisPredicate::BitsEqual {
        mask: (1u64 << n) - 1,
        value: 0,
    }))?;
    q.extend(a)?;
    Ok(q)
}

/// The amplitude a = P(good) of A|0...0>, computed from the statevector.
/// Ground truth for estimator error curves.
pub fn exact_amplitude(a: &Circuit, good: &BasisPredicate) -> Result<f64> {
    let mut state = QuantumState::zero_with_cap(a.num_qubits(), MAX_QUBITS)?;
    state.apply_circuit(a)?;
    Ok(state.marginal_probability(|i| good.matches(i)))
}

/// Exact P(good) of Q^k A |0...0>, by statevector application.
pub fn exact_good_probability_after(
    a: &Circuit,
    good: &BasisPredicate,
    k: u64,
) -> Result<f64> {
    let grover = grover_operator(a, good)?;
    let mut state = QuantumState::zero_with_cap(a.num_qubits(), MAX_QUBITS)?;
    state.apply_circuit(a)?;
    for _ in 0..k {
        state.apply_circuit(&grover)?;
    }
    Ok(state.marginal_probability(|i| good.matches(i)))
}

/// Samples `shots` measurements of the good-predicate marginal after
/// Q^k A, returning (good_count, shots).  Each shot consumes 2k+1 oracle
/// queries (k Grover applications contain A and A^-1 once each, plus the
/// initial A).
pub fn good_probability_after(
    a: &Circuit,
    good: &BasisPredicate,
    k: u64,
    shots: u64,
    seed: u64,
) -> Result<(u64, u64)> {
    if shots == 0 {
        return Err(Error::InvalidParameter {
            name: "shots",
            reason: "shot count must be at least 1".into(),
        });
    }
    let p = exact_good_probability_after(a, good, k)?.clamp(0.0, 1.0);
    let mut rng = rng_from_seed(seed);
    let mut good_count = 0u64;
    for _ in 0..shots {
        if rng.random::<f64>() < p {
            good_count += 1;
        }
    }
    Ok((good_count, shots))
}

/// Worst-case IQAE oracle-query budget:
/// floor((6/eps) * ln((2/alpha) * ln(pi/(4 eps)))), natural logarithms.
pub fn chernoff_hoeffding_bound(epsilon: f64, alpha: f64) -> Result<u64> {
    validate_precision(epsilon, alpha)?;
    let bound = 6.0 / epsilon * ((2.0 / alpha) * (PI / (4.0 * epsilon)).ln()).ln();
    Ok(bound.max(0.0).floor() as u64)
}

fn validate_precision(epsilon: f64, alpha: f64) -> Result<()> {
    if !epsilon.is_finite() || epsilon <= 0.0 || epsilon >= 0.5 {
        return Err(Error::InvalidParameter {
            name: "epsilon",
            reason: format!("target half-width must lie in (0, 0.5), got {epsilon}"),
        });
    }
    if !alpha.is_finite() || alpha <= 0.0 || alpha >= 1.0 {
        return Err(Error::InvalidParameter {
            name: "alpha",
            reason: format!("failure probability must lie in (0, 1), got {alpha}"),
        });
    }
    Ok(())
}

/// IQAE run parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IqaeConfig {
    /// Target half-width of the amplitude confidence interval.
    pub epsilon: f64,
    /// Allowed probability that the final interval misses the amplitude.
    pub alpha: f64,
    /// Measurement shots fired per round.
    pub shots_per_round: u64,
    /// Hard stop on round count.
    pub max_rounds: usize,
}

impl Default for IqaeConfig {
    fn default() -> Self {
        IqaeConfig {
            epsilon: 0.01,
            alpha: 0.05,
            shots_per_round: 30,
            max_rounds: 10_000,
        }
    }
}

impl IqaeConfig {
    fn validate(&self) -> Result<()> {
        validate_precision(self.epsilon, self.alpha)?;
        if self.shots_per_round == 0 {
            return Err(Error::InvalidParameter {
                name: "shots_per_round",
                reason: "at least one shot per round is required".into(),
            });
        }
        if self.max_rounds == 0 {
            return Err(Error::InvalidParameter {
                name: "max_rounds",
                reason: "at least one round must be allowed".into(),
            });
        }
        Ok(())
    }
}

/// One IQAE round: Grover power used, shots fired, good outcomes seen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct IqaeRound {
    pub grover_power: u64,
    pub shots: u64,
    pub good_count: u64,
}

/// IQAE output: estimate, confidence interval, query count, round log.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IqaeResult {
    /// Midpoint of the final amplitude interval.
    pub estimate: f64,
    /// Lower end of the amplitude confidence interval.
    pub lo: f64,
    /// Upper end of the amplitude confidence interval.
    pub hi: f64,
    /// Total oracle queries: sum over rounds of shots * (2k + 1).
    pub oracle_queries: u64,
    pub rounds: Vec<IqaeRound>,
}

/// Largest usable Grover power for the current interval: the biggest
/// K = 4k+2 <= 1/(2 width) whose scaled interval sits in one half-plane
/// of the unit circle.  The current power always qualifies (shrinking an
/// in-half-plane interval keeps it there), so the power never decreases.
fn find_next_k(k: u64, upper: bool, theta_lo: f64, theta_hi: f64) -> (u64, bool) {
    let old_scaling = (4 * k + 2) as f64;
    let width = theta_hi - theta_lo;
    if width.is_nan() || width <= 0.0 {
        return (k, upper);
    }
    let max_scaling = (1.0 / (2.0 * width)).floor();
    if !max_scaling.is_finite() || max_scaling <= old_scaling {
        return (k, upper);
    }
    let max_scaling = max_scaling as u64;
    let mut scaling = max_scaling - (max_scaling - 2) % 4;
    while scaling as f64 > old_scaling {
        let s = scaling as f64;
        let omega_lo = (s * theta_lo).fract();
        let omega_hi = (s * theta_hi).fract();
        if omega_lo <= omega_hi && omega_hi <= 0.5 {
            return ((scaling - 2) / 4, true);
        }
        if omega_lo >= 0.5 && omega_hi >= omega_lo {
            return ((scaling - 2) / 4, false);
        }
        scaling -= 4;
    }
    (k, upper)
}

/// Iterative amplitude estimation of P(good) for the state A|0...0>.
///
/// The angle interval is tracked in turns (theta_a / 2 pi, in [0, 1/4]).
/// Each round measures after the chosen Grover power, inverts
/// sin^2((2k+1) theta) on the known half-plane with a Chernoff-Hoeffding
/// half-width of sqrt(ln(2T/alpha) / (2 n)) over the shots accumulated at
/// that power, and intersects the result with the previous interval.
/// T = ln(pi / (4 epsilon)) bounds the Grover-power advances under the
/// doubling schedule, splitting alpha across rounds; it is the same round
/// bound that appears inside the worst-case query budget, so the two
/// constants stay consistent.  The loop stops once the amplitude interval
/// implied by the angle interval has half-width <= epsilon.
///
/// The Chernoff-Hoeffding query budget is enforced as a hard resource
/// limit: each batch is clamped to the queries still affordable, and the
/// run fails with the partial interval if the budget runs out first.
pub fn iqae(
    a: &Circuit,
    good: &BasisPredicate,
    config: &IqaeConfig,
    seed: u64,
) -> Result<IqaeResult> {
    config.validate()?;
    let budget = chernoff_hoeffding_bound(config.epsilon, config.alpha)?;
    let round_bound = (PI / (4.0 * config.epsilon)).ln().max(1.0);
    let log_term = (2.0 * round_bound / config.alpha).ln();

    let mut theta_lo: f64 = 0.0;
    let mut theta_hi: f64 = 0.25;
    let mut k: u64 = 0;
    let mut upper = true;
    let mut shots_at_k: u64 = 0;
    let mut good_at_k: u64 = 0;
    let mut oracle_queries: u64 = 0;
    let mut rounds: Vec<IqaeRound> = Vec::new();

    // Terminate on the implied amplitude interval, not the angle interval:
    // a = sin^2(2 pi t) is flattest near a = 0 and 1, where an angle-width
    // proxy would demand needlessly high Grover powers.
    while amplitude_from_turns(theta_hi) - amplitude_from_turns(theta_lo) > 2.0 * config.epsilon
    {
        if rounds.len() >= config.max_rounds {
            return Err(Error::NotConverged {
                max_rounds: config.max_rounds,
                lo: amplitude_from_turns(theta_lo),
                hi: amplitude_from_turns(theta_hi),
            });
        }
        let (next_k, next_upper) = find_next_k(k, upper, theta_lo, theta_hi);
        if next_k != k {
            shots_at_k = 0;
            good_at_k = 0;
        }
        k = next_k;
        upper = next_upper;

        // Shots beyond which this power must terminate.  The loop exits once
        // the amplitude width a(hi) - a(lo) <= 2 eps, which the mean value
        // theorem guarantees at angle width 2 eps / slope, slope being the
        // steepest |da/dt| over the current interval (intersection keeps
        // every later interval inside it, so the slope bound stays valid).
        // A pooled count of n* = 2 ln(2T/alpha) / sin^4(pi K w*) makes even
        // a pole-centered inversion meet that width, so shots past n* spend
        // (2k+1) queries each for no information.
        let slope = {
            let ends = (4.0 * PI * theta_lo).sin().max((4.0 * PI * theta_hi).sin());
            let peak = if theta_lo < 0.125 && 0.125 < theta_hi {
                1.0
            } else {
                0.0
            };
            2.0 * PI * ends.max(peak)
        };
        let useful = {
            let scaling = (4 * k + 2) as f64;
            let target = (PI * scaling * 2.0 * config.epsilon / slope).min(FRAC_PI_2);
            let cap = 2.0 * log_term / target.sin().powi(4);
            if cap >= u64::MAX as f64 {
                u64::MAX
            } else {
                cap.ceil() as u64
            }
        };
        let affordable = (budget - oracle_queries) / (2 * k + 1);
        if affordable == 0 {
            return Err(Error::BudgetExhausted {
                budget,
                spent: oracle_queries,
                lo: amplitude_from_turns(theta_lo),
                hi: amplitude_from_turns(theta_hi),
            });
        }
        let batch = config
            .shots_per_round
            .min(useful.saturating_sub(shots_at_k).max(1))
            .min(affordable);

        let round_seed = child_seed(seed, rounds.len() as u64);
        let (good_count, shots) = good_probability_after(a, good, k, batch, round_seed)?;
        rounds.push(IqaeRound {
            grover_power: k,
            shots,
            good_count,
        });
        oracle_queries += shots * (2 * k + 1);
        shots_at_k += shots;
        good_at_k += good_count;

        let mean = good_at_k as f64 / shots_at_k as f64;
        let half_width = (log_term / (2.0 * shots_at_k as f64)).sqrt();
        let a_min = (mean - half_width).max(0.0);
        let a_max = (mean + half_width).min(1.0);

        // invert sin^2((2k+1) theta) on the known half-plane, in turns
        let scaling = (4 * k + 2) as f64;
        let (omega_min, omega_max) = if upper {
            (
                (1.0 - 2.0 * a_min).clamp(-1.0, 1.0).acos() / (2.0 * PI),
                (1.0 - 2.0 * a_max).clamp(-1.0, 1.0).acos() / (2.0 * PI),
            )
        } else {
            (
                1.0 - (1.0 - 2.0 * a_max).clamp(-1.0, 1.0).acos() / (2.0 * PI),
                1.0 - (1.0 - 2.0 * a_min).clamp(-1.0, 1.0).acos() / (2.0 * PI),
            )
        };
        let new_lo = ((scaling * theta_lo).floor() + omega_min) / scaling;
        let new_hi = ((scaling * theta_hi).floor() + omega_max) / scaling;
        // intersect with the running interval; on (rare) statistical
        // inconsistency keep the previous interval and let accumulated
        // shots resolve it
        let lo = new_lo.max(theta_lo);
        let hi = new_hi.min(theta_hi);
        if lo <= hi {
            theta_lo = lo;
            theta_hi = hi;
        }
    }

    let a_lo = amplitude_from_turns(theta_lo);
    let a_hi = amplitude_from_turns(theta_hi);
    Ok(IqaeResult {
        estimate: 0.5 * (a_lo + a_hi),
        lo: a_lo,
        hi: a_hi,
        oracle_queries,
        rounds,
    })
}

/// a = sin^2(2 pi t) for t in turns; increasing on [0, 1/4].
fn amplitude_from_turns(turns: f64) -> f64 {
    (2.0 * PI * turns).sin().powi(2)
}
