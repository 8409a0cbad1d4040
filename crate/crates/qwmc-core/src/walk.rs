//! Absorb-or-advance transport as a discrete-time quantum walk.
//!
//! The walker's depth lives in a position register; a single coin qubit
//! records "interacted at the current depth" and a single workspace qubit
//! temporarily flags "position equals the step being processed".  Step k
//! rotates the coin only where the position equals k, so branches
//! absorbed earlier (coin |1>) are frozen and the coin qubit is reusable
//! without any reset.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::physics::StepSchedule;
use crate::sim::{
    sample, BasisPredicate, Circuit, Control, GateOp, QuantumState, MAX_QUBITS,
};

/// Probability mass tolerated outside the walk's outcome states.
const STRAY_TOLERANCE: f64 = 1e-12;

/// Qubit assignment for an N-step walk.
///
/// Position register: qubits `0..m` with `m = ceil(log2(N+1))`, so depths
/// 0..=N fit without wraparound; coin: qubit `m`; workspace: qubit `m+1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RegisterLayout {
    num_steps: usize,
    position_width: usize,
}

impl RegisterLayout {
    /// Layout for a walk of `num_steps >= 1` steps.
    pub fn for_steps(num_steps: usize) -> Result<Self> {
        if num_steps == 0 {
            return Err(Error::InvalidParameter {
                name: "num_steps",
                reason: "walk needs at least one step".into(),
            });
        }
        let position_width = (num_steps + 1).next_power_of_two().trailing_zeros() as usize;
        let total = position_width + 2;
        if total > MAX_QUBITS {
            return Err(Error::CapacityExceeded {
                requested: total,
                capacity: MAX_QUBITS,
            });
        }
        Ok(RegisterLayout {
            num_steps,
            position_width,
        })
    }

    pub fn num_steps(&self) -> usize {
        self.num_steps
    }

    /// Position register qubits, LSB first.
    pub fn position_qubits(&self) -> Vec<usize> {
        (0..self.position_width).collect()
    }

    pub fn position_width(&self) -> usize {
        self.position_width
    }

    /// Largest depth the position register can hold (2^m - 1 >= N).
    pub fn position_capacity(&self) -> usize {
        (1 << self.position_width) - 1
    }

    pub fn coin_qubit(&self) -> usize {
        self.position_width
    }

    pub fn workspace_qubit(&self) -> usize {
        self.position_width + 1
    }

    pub fn total_qubits(&self) -> usize {
        self.position_width + 2
    }

    /// Depth value stored in the position bits of a basis index.
    pub fn position_value(&self, index: u64) -> u64 {
        index & ((1 << self.position_width) - 1)
    }

    /// Basis index of "absorbed at depth k": position k, coin 1, workspace 0.
    pub fn absorbed_index(&self, depth: usize) -> u64 {
        depth as u64 | 1 << self.coin_qubit()
    }

    /// Basis index of the survivor branch: position N, coin 0, workspace 0.
    pub fn survived_index(&self) -> u64 {
        self.num_steps as u64
    }
}

/// Coin rotation angle realizing the interaction probability `p`:
/// Ry(theta)|0> has amplitude sqrt(p) on |1> and sqrt(1-p) on |0>.
pub fn coin_angle(p: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) || !p.is_finite() {
        return Err(Error::InvalidProbability { value: p });
    }
    Ok(2.0 * p.sqrt().asin())
}

/// One walk layer: position check, conditional coin rotation, uncompute,
/// conditional shift.
pub fn build_step(step: usize, p_step: f64, layout: &RegisterLayout) -> Result<Circuit> {
    if step > layout.position_capacity() {
        return Err(Error::InvalidParameter {
            name: "step",
            reason: format!(
                "step {step} does not fit the position register (capacity {})",
                layout.position_capacity()
            ),
        });
    }
    let position_check: Vec<Control> = layout
        .position_qubits()
        .iter()
        .map(|&q| Control {
            qubit: q,
            value: step >> q & 1 == 1,
        })
        .collect();
    let check = GateOp::multi_controlled_x(position_check, layout.workspace_qubit());
    let mut circuit = Circuit::new(layout.total_qubits());
    circuit.push(check.clone())?;
    circuit.push(GateOp::controlled_ry(
        vec![Control::on(layout.workspace_qubit())],
        layout.coin_qubit(),
        coin_angle(p_step)?,
    ))?;
    circuit.push(check)?;
    circuit.push(GateOp::controlled_increment(
        vec![Control::off(layout.coin_qubit())],
        layout.position_qubits(),
    ))?;
    Ok(circuit)
}

/// The full state-preparation circuit A with its layout and schedule.
#[derive(Debug, Clone, PartialEq)]
pub struct WalkCircuit {
    pub circuit: Circuit,
    pub layout: RegisterLayout,
    pub schedule: StepSchedule,
}

impl WalkCircuit {
    /// Applies the walk to |0...0> and returns the final state.
    pub fn prepare(&self) -> Result<QuantumState> {
        let mut state = QuantumState::zero(self.layout.total_qubits())?;
        state.apply_circuit(&self.circuit)?;
        Ok(state)
    }
}

/// Concatenates one layer per scheduled step.
pub fn build_walk(schedule: &StepSchedule, layout: &RegisterLayout) -> Result<WalkCircuit> {
    if schedule.num_steps() != layout.num_steps() {
        return Err(Error::InvalidParameter {
            name: "schedule",
            reason: format!(
                "schedule covers {} steps but the layout expects {}",
                schedule.num_steps(),
                layout.num_steps()
            ),
        });
    }
    let mut circuit = Circuit::new(layout.total_qubits());
    for (step, &p) in schedule.probabilities().iter().enumerate() {
        circuit.extend(&build_step(step, p, layout)?)?;
    }
    Ok(WalkCircuit {
        circuit,
        layout: *layout,
        schedule: schedule.clone(),
    })
}

/// Probability mass over transport outcomes: absorbed at each depth, or
/// survived the full slab.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DepthDistribution {
    /// absorbed[k] = probability of absorption at depth step k.
    pub absorbed: Vec<f64>,
    /// Probability of traversing all steps uninteracted.
    pub survived: f64,
}

impl DepthDistribution {
    /// Validates non-negativity and unit total mass (within 1e-12).
    pub fn new(absorbed: Vec<f64>, survived: f64) -> Result<Self> {
        if absorbed.is_empty() {
            return Err(Error::InvalidParameter {
                name: "absorbed",
                reason: "distribution needs at least one depth bin".into(),
            });
        }
        for &p in absorbed.iter().chain(std::iter::once(&survived)) {
            if !p.is_finite() || p < 0.0 {
                return Err(Error::InvalidProbability { value: p });
            }
        }
        let mass: f64 = absorbed.iter().sum::<f64>() + survived;
        if (mass - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParameter {
                name: "mass",
                reason: format!("outcome probabilities sum to {mass}, not 1"),
            });
        }
        Ok(DepthDistribution { absorbed, survived })
    }

    pub fn num_steps(&self) -> usize {
        self.absorbed.len()
    }

    /// All N+1 outcome probabilities: absorbed@0..N-1 then survived.
    pub fn bins(&self) -> Vec<f64> {
        let mut bins = self.absorbed.clone();
        bins.push(self.survived);
        bins
    }

    /// Human-readable outcome labels matching [`Self::bins`].
    pub fn labels(&self) -> Vec<String> {
        let mut labels: Vec<String> = (0..self.absorbed.len())
            .map(|k| format!("absorbed@{k}"))
            .collect();
        labels.push("survived".to_string());
        labels
    }

    /// Probability that the photon reached depth `x` uninteracted:
    /// absorbed at depth >= x, or survived outright.
    pub fn tail_mass(&self, threshold: usize) -> f64 {
        self.absorbed.iter().skip(threshold).sum::<f64>() + self.survived
    }
}

/// Reads the outcome distribution off a walk statevector.
///
/// Errors if probability mass >= 1e-12 sits outside the expected outcome
/// basis states (workspace high, or positions unreachable by the walk).
pub fn extract_distribution(
    state: &QuantumState,
    layout: &RegisterLayout,
) -> Result<DepthDistribution> {
    if state.num_qubits() != layout.total_qubits() {
        return Err(Error::InvalidParameter {
            name: "state",
            reason: format!(
                "state holds {} qubits, layout expects {}",
                state.num_qubits(),
                layout.total_qubits()
            ),
        });
    }
    let absorbed: Vec<f64> = (0..layout.num_steps())
        .map(|k| state.probability_of(layout.absorbed_index(k)))
        .collect();
    let survived = state.probability_of(layout.survived_index());
    let outcome_mass: f64 = absorbed.iter().sum::<f64>() + survived;
    let stray = state.norm_sqr() - outcome_mass;
    if stray >= STRAY_TOLERANCE {
        return Err(Error::StrayMass { mass: stray });
    }
    DepthDistribution::new(absorbed, survived)
}

/// Bins `shots` full-register measurements of a prepared walk state into
/// empirical outcome frequencies.
pub fn sampled_distribution(
    state: &QuantumState,
    layout: &RegisterLayout,
    shots: u64,
    seed: u64,
) -> Result<DepthDistribution> {
    if state.num_qubits() != layout.total_qubits() {
        return Err(Error::InvalidParameter {
            name: "state",
            reason: format!(
                "state holds {} qubits, layout expects {}",
                state.num_qubits(),
                layout.total_qubits()
            ),
        });
    }
    let record = sample(state, shots, seed)?;
    let absorbed = (0..layout.num_steps())
        .map(|k| record.frequency(layout.absorbed_index(k)))
        .collect();
    DepthDistribution::new(absorbed, record.frequency(layout.survived_index()))
}

/// Resource counts for one walk, with the sizing formula that budgets a
/// separate step-counter register alongside the position register for
/// comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct QubitReport {
    pub num_steps: usize,
    pub position_qubits: usize,
    pub coin_qubits: usize,
    pub workspace_qubits: usize,
    pub total_qubits: usize,
    /// 2 + 2*ceil(log2(N+1)): the two-register sizing this layout undercuts.
    pub two_register_qubits: usize,
    pub gate_count: usize,
    /// Gates execute serially (every layer touches the coin), so depth
    /// tracks the gate count one-to-one.
    pub depth_proxy: usize,
}

/// Counts qubits and gates for the walk over `schedule`.
pub fn qubit_report(layout: &RegisterLayout, schedule: &StepSchedule) -> Result<QubitReport> {
    let walk = build_walk(schedule, layout)?;
    let gate_count = walk.circuit.len();
    Ok(QubitReport {
        num_steps: layout.num_steps(),
        position_qubits: layout.position_width(),
        coin_qubits: 1,
        workspace_qubits: 1,
        total_qubits: layout.total_qubits(),
        two_register_qubits: 2 + 2 * layout.position_width(),
        gate_count,
        depth_proxy: gate_count,
    })
}

/// Basis predicate "position register holds a value >= threshold".
pub fn position_at_least(layout: &RegisterLayout, threshold: usize) -> BasisPredicate {
    BasisPredicate::RegisterAtLeast {
        register: layout.position_qubits(),
        threshold: threshold as u64,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::GateKind;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn uniform(p: f64, n: usize) -> StepSchedule {
        StepSchedule::from_probabilities(vec![p; n]).unwrap()
    }

    #[test]
    fn layout_widths() {
        for (steps, width, total) in [(1, 1, 3), (2, 2, 4), (3, 2, 4), (15, 4, 6), (16, 5, 7), (31, 5, 7), (63, 6, 8)] {
            let l = RegisterLayout::for_steps(steps).unwrap();
            assert_eq!(l.position_width(), width, "N={steps}");
            assert_eq!(l.total_qubits(), total, "N={steps}");
            assert_eq!(l.coin_qubit(), width);
            assert_eq!(l.workspace_qubit(), width + 1);
            assert!(l.position_capacity() >= steps);
        }
        assert!(RegisterLayout::for_steps(0).is_err());
    }

    #[test]
    fn outcome_indices() {
        let l = RegisterLayout::for_steps(15).unwrap();
        assert_eq!(l.absorbed_index(3), 3 | 1 << 4);
        assert_eq!(l.survived_index(), 15);
        assert_eq!(l.position_value(0b10_0111), 0b0111);
    }

    #[test]
    fn coin_angle_endpoints() {
        assert_eq!(coin_angle(0.0).unwrap(), 0.0);
        assert_abs_diff_eq!(coin_angle(1.0).unwrap(), PI, epsilon = 1e-15);
        assert_abs_diff_eq!(coin_angle(0.5).unwrap(), PI / 2.0, epsilon = 1e-15);
        assert!(coin_angle(-0.1).is_err());
        assert!(coin_angle(1.1).is_err());
        assert!(coin_angle(f64::NAN).is_err());
    }

    #[test]
    fn step_layer_shape() {
        let l = RegisterLayout::for_steps(15).unwrap();
        let c = build_step(5, 0.25, &l).unwrap();
        assert_eq!(c.len(), 4);
        assert_eq!(c.ops()[0], c.ops()[2], "uncompute repeats the check");
        assert!(matches!(c.ops()[0].kind, GateKind::PauliX));
        assert!(matches!(c.ops()[1].kind, GateKind::RotateY { .. }));
        assert!(matches!(c.ops()[3].kind, GateKind::Increment));
        // polarity of the check matches the bits of the step index
        let controls = &c.ops()[0].controls;
        assert_eq!(controls.len(), 4);
        for ctrl in controls {
            assert_eq!(ctrl.value, 5 >> ctrl.qubit & 1 == 1);
        }
        assert!(build_step(16, 0.25, &l).is_err());
    }

    #[test]
    fn single_bernoulli_branch() {
        let l = RegisterLayout::for_steps(1).unwrap();
        let walk = build_walk(&uniform(0.25, 1), &l).unwrap();
        let dist = extract_distribution(&walk.prepare().unwrap(), &l).unwrap();
        assert_abs_diff_eq!(dist.absorbed[0], 0.25, epsilon = 1e-15);
        assert_abs_diff_eq!(dist.survived, 0.75, epsilon = 1e-15);
    }

    #[test]
    fn two_step_half_half() {
        let l = RegisterLayout::for_steps(2).unwrap();
        let schedule = StepSchedule::from_probabilities(vec![0.5, 0.5]).unwrap();
        let walk = build_walk(&schedule, &l).unwrap();
        let dist = extract_distribution(&walk.prepare().unwrap(), &l).unwrap();
        assert_abs_diff_eq!(dist.absorbed[0], 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(dist.absorbed[1], 0.25, epsilon = 1e-15);
        assert_abs_diff_eq!(dist.survived, 0.25, epsilon = 1e-15);
    }

    #[test]
    fn absorbed_branch_is_frozen() {
        // |pos=0, coin=1>: step 1's check cannot match and the shift is
        // blocked by the coin, so the layer acts as identity.
        let l = RegisterLayout::for_steps(2).unwrap();
        let mut state = QuantumState::zero(l.total_qubits()).unwrap();
        state.apply(&GateOp::x(l.coin_qubit())).unwrap();
        let before = state.clone();
        state
            .apply_circuit(&build_step(1, 0.7, &l).unwrap())
            .unwrap();
        assert_eq!(state, before);
    }

    #[test]
    fn zero_probability_schedule_only_advances() {
        let l = RegisterLayout::for_steps(5).unwrap();
        let walk = build_walk(&uniform(0.0, 5), &l).unwrap();
        let dist = extract_distribution(&walk.prepare().unwrap(), &l).unwrap();
        assert_eq!(dist.survived, 1.0);
        assert!(dist.absorbed.iter().all(|&p| p == 0.0));
    }

    #[test]
    fn certain_absorption_at_first_step() {
        let l = RegisterLayout::for_steps(3).unwrap();
        let walk = build_walk(&uniform(1.0, 3), &l).unwrap();
        let dist = extract_distribution(&walk.prepare().unwrap(), &l).unwrap();
        assert_abs_diff_eq!(dist.absorbed[0], 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(dist.survived, 0.0, epsilon = 1e-30);
    }

    #[test]
    fn fifteen_step_derived_probability() {
        let p = 0.016896;
        let l = RegisterLayout::for_steps(15).unwrap();
        let walk = build_walk(&uniform(p, 15), &l).unwrap();
        let dist = extract_distribution(&walk.prepare().unwrap(), &l).unwrap();
        assert_abs_diff_eq!(dist.survived, (1.0 - p).powi(15), epsilon = 1e-13);
        assert_abs_diff_eq!(dist.survived, 0.7744, epsilon = 5e-5);
        for (k, &a) in dist.absorbed.iter().enumerate() {
            assert_abs_diff_eq!(a, (1.0 - p).powi(k as i32) * p, epsilon = 1e-13);
        }
    }

    #[test]
    fn absorption_decreases_with_depth() {
        let l = RegisterLayout::for_steps(8).unwrap();
        let walk = build_walk(&uniform(0.3, 8), &l).unwrap();
        let dist = extract_distribution(&walk.prepare().unwrap(), &l).unwrap();
        for pair in dist.absorbed.windows(2) {
            assert!(pair[0] > pair[1]);
        }
    }

    #[test]
    fn no_mass_beyond_final_position() {
        // N=2 with m=2: position 3 is representable but unreachable.
        let l = RegisterLayout::for_steps(2).unwrap();
        let walk = build_walk(&uniform(0.3, 2), &l).unwrap();
        let state = walk.prepare().unwrap();
        let beyond = state.marginal_probability(|i| l.position_value(i) > 2);
        assert_abs_diff_eq!(beyond, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn workspace_stays_clean_after_every_step() {
        let l = RegisterLayout::for_steps(6).unwrap();
        let schedule =
            StepSchedule::from_probabilities(vec![0.1, 0.9, 0.4, 0.0, 1.0, 0.37]).unwrap();
        let mut state = QuantumState::zero(l.total_qubits()).unwrap();
        let ws = l.workspace_qubit();
        for (k, &p) in schedule.probabilities().iter().enumerate() {
            state
                .apply_circuit(&build_step(k, p, &l).unwrap())
                .unwrap();
            let dirty = state.marginal_probability(|i| i >> ws & 1 == 1);
            assert_abs_diff_eq!(dirty, 0.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn walk_inverse_restores_vacuum() {
        let l = RegisterLayout::for_steps(7).unwrap();
        let walk = build_walk(&uniform(0.23, 7), &l).unwrap();
        let mut state = walk.prepare().unwrap();
        state.apply_circuit(&walk.circuit.inverse()).unwrap();
        assert_abs_diff_eq!(state.probability_of(0), 1.0, epsilon = 1e-10);
    }

    #[test]
    fn schedule_layout_mismatch_rejected() {
        let l = RegisterLayout::for_steps(3).unwrap();
        assert!(build_walk(&uniform(0.5, 4), &l).is_err());
    }

    #[test]
    fn stray_mass_is_detected() {
        let l = RegisterLayout::for_steps(2).unwrap();
        let mut state = QuantumState::zero(l.total_qubits()).unwrap();
        state.apply(&GateOp::x(l.workspace_qubit())).unwrap();
        assert!(matches!(
            extract_distribution(&state, &l),
            Err(Error::StrayMass { .. })
        ));
    }

    #[test]
    fn sampled_distribution_tracks_exact() {
        let l = RegisterLayout::for_steps(5).unwrap();
        let walk = build_walk(&uniform(0.3, 5), &l).unwrap();
        let state = walk.prepare().unwrap();
        let exact = extract_distribution(&state, &l).unwrap();
        let shots = 200_000u64;
        let sampled = sampled_distribution(&state, &l, shots, 31).unwrap();
        for (e, s) in exact.bins().iter().zip(sampled.bins()) {
            let sigma = (e * (1.0 - e) / shots as f64).sqrt();
            assert!(
                (e - s).abs() <= 5.0 * sigma + 1e-9,
                "sampled bin off by {}",
                (e - s).abs()
            );
        }
        assert_eq!(
            sampled,
            sampled_distribution(&state, &l, shots, 31).unwrap()
        );
        let wrong = QuantumState::zero(3).unwrap();
        assert!(sampled_distribution(&wrong, &l, 10, 1).is_err());
    }

    #[test]
    fn distribution_validation_and_views() {
        assert!(DepthDistribution::new(vec![], 1.0).is_err());
        assert!(DepthDistribution::new(vec![0.5], 0.4).is_err());
        assert!(DepthDistribution::new(vec![-0.1, 0.6], 0.5).is_err());
        let d = DepthDistribution::new(vec![0.1, 0.2], 0.7).unwrap();
        assert_eq!(d.bins(), vec![0.1, 0.2, 0.7]);
        assert_eq!(d.labels(), vec!["absorbed@0", "absorbed@1", "survived"]);
        assert_eq!(d.num_steps(), 2);
        assert_abs_diff_eq!(d.tail_mass(0), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(d.tail_mass(1), 0.9, epsilon = 1e-15);
        assert_abs_diff_eq!(d.tail_mass(2), 0.7, epsilon = 1e-15);
    }

    #[test]
    fn report_counts_and_formula() {
        let l = RegisterLayout::for_steps(15).unwrap();
        let r = qubit_report(&l, &uniform(0.2, 15)).unwrap();
        assert_eq!(r.total_qubits, 6);
        assert_eq!(r.two_register_qubits, 10);
        assert_eq!(r.gate_count, 60);
        assert_eq!(r.depth_proxy, 60);
        let l31 = RegisterLayout::for_steps(31).unwrap();
        let r31 = qubit_report(&l31, &uniform(0.2, 31)).unwrap();
        assert_eq!(r31.total_qubits, 7);
        assert_eq!(r31.gate_count, 124);
    }

    #[test]
    fn position_threshold_predicate() {
        let l = RegisterLayout::for_steps(15).unwrap();
        let pred = position_at_least(&l, 8);
        assert!(pred.matches(l.survived_index()));
        assert!(pred.matches(l.absorbed_index(8)));
        assert!(pred.matches(l.absorbed_index(14)));
        assert!(!pred.matches(l.absorbed_index(7)));
    }
}
