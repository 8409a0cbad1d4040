//! Dense statevector and gate kernels.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::exec;
use crate::sim::circuit::Circuit;
use crate::sim::gate::{gather_register, scatter_register, GateKind, GateOp};

/// Hard ceiling on register width (16 GiB of amplitudes).
pub const MAX_QUBITS: usize = 30;

/// Default ceiling; keeps accidental allocations below 1 GiB.
pub const DEFAULT_QUBIT_CAP: usize = 26;

/// A pure state over `num_qubits` qubits as 2^n complex amplitudes.
///
/// Basis index bit `i` is qubit `i`; index 0 is |0...0>.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumState {
    num_qubits: usize,
    amps: Vec<Complex64>,
}

impl QuantumState {
    /// |0...0> over `num_qubits` qubits, subject to [`DEFAULT_QUBIT_CAP`].
    pub fn zero(num_qubits: usize) -> Result<Self> {
        Self::zero_with_cap(num_qubits, DEFAULT_QUBIT_CAP)
    }

    /// |0...0> with an explicit capacity limit (still at most [`MAX_QUBITS`]).
    pub fn zero_with_cap(num_qubits: usize, cap: usize) -> Result<Self> {
        let cap = cap.min(MAX_QUBITS);
        if num_qubits == 0 {
            return Err(Error::InvalidParameter {
                name: "num_qubits",
                reason: "register must hold at least one qubit".into(),
            });
        }
        if num_qubits > cap {
            return Err(Error::CapacityExceeded {
                requested: num_qubits,
                capacity: cap,
            });
        }
        let mut amps = vec![Complex64::ZERO; 1 << num_qubits];
        amps[0] = Complex64::ONE;
        Ok(QuantumState { num_qubits, amps })
    }

    /// Wraps raw amplitudes; the length must be a power of two.  The caller
    /// is responsible for normalization.
    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self> {
        if amps.len() < 2 || !amps.len().is_power_of_two() {
            return Err(Error::InvalidParameter {
                name: "amplitudes",
                reason: format!("length {} is not a power of two >= 2", amps.len()),
            });
        }
        let num_qubits = amps.len().trailing_zeros() as usize;
        Ok(QuantumState { num_qubits, amps })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    /// Squared norm; 1 for any state reachable by gates from |0...0>.
    pub fn norm_sqr(&self) -> f64 {
        exec::sum_indexed(&self.amps, |_, a| a.norm_sqr())
    }

    /// Measurement distribution over all 2^n basis states.
    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    /// Probability of one basis state.
    pub fn probability_of(&self, index: u64) -> f64 {
        self.amps[index as usize].norm_sqr()
    }

    /// Total probability of the basis states selected by `pred`.
    pub fn marginal_probability<F>(&self, pred: F) -> f64
    where
        F: Fn(u64) -> bool + Sync,
    {
        exec::sum_indexed(&self.amps, |i, a| {
            if pred(i as u64) {
                a.norm_sqr()
            } else {
                0.0
            }
        })
    }

    /// Applies one gate in place.
    pub fn apply(&mut self, op: &GateOp) -> Result<()> {
        op.validate(self.num_qubits)?;
        let (cmask, cval) = op.control_mask();
        match &op.kind {
            GateKind::RotateY { angle } => {
                let c = (angle / 2.0).cos();
                let s = (angle / 2.0).sin();
                self.target_pairs(op.targets[0], cmask, cval, |lo, hi| {
                    let a = *lo;
                    let b = *hi;
                    *lo = c * a - s * b;
                    *hi = s * a + c * b;
                });
            }
            GateKind::PauliX => {
                self.target_pairs(op.targets[0], cmask, cval, |lo, hi| {
                    std::mem::swap(lo, hi);
                });
            }
            GateKind::Increment => self.shift_register(&op.targets, cmask, cval, 1),
            GateKind::Decrement => self.shift_register(&op.targets, cmask, cval, -1),
            GateKind::PhaseFlip { predicate } => {
                exec::for_each_chunk_mut(&mut self.amps, exec::CHUNK, |ci, chunk| {
                    let base = ci * exec::CHUNK;
                    for (j, a) in chunk.iter_mut().enumerate() {
                        if predicate.matches((base + j) as u64) {
                            *a = -*a;
                        }
                    }
                });
            }
        }
        Ok(())
    }

    /// Applies every gate of `circuit` in order.
    pub fn apply_circuit(&mut self, circuit: &Circuit) -> Result<()> {
        if circuit.num_qubits() != self.num_qubits {
            return Err(Error::InvalidParameter {
                name: "circuit",
                reason: format!(
                    "circuit is over {} qubits, state over {}",
                    circuit.num_qubits(),
                    self.num_qubits
                ),
            });
        }
        for op in circuit.ops() {
            self.apply(op)?;
        }
        Ok(())
    }

    /// Visits each (|t=0>, |t=1>) amplitude pair whose index passes the
    /// control test.  `idx` is the pair's low index (target bit clear).
    fn target_pairs<F>(&mut self, target: usize, cmask: u64, cval: u64, f: F)
    where
        F: Fn(&mut Complex64, &mut Complex64) + Sync,
    {
        let stride = 1usize << target;
        exec::for_each_chunk_mut(&mut self.amps, stride << 1, |ci, chunk| {
            let base = (ci << (target + 1)) as u64;
            let (los, his) = chunk.split_at_mut(stride);
            for off in 0..stride {
                let idx = base | off as u64;
                if idx & cmask == cval {
                    f(&mut los[off], &mut his[off]);
                }
            }
        });
    }

    /// Adds `delta` (+1/-1, cyclic) to the register where controls hold.
    fn shift_register(&mut self, register: &[usize], cmask: u64, cval: u64, delta: i64) {
        let m = register.len();
        if register.iter().enumerate().all(|(bit, &q)| q == bit) {
            // Register occupies the low bits: each 2^m block permutes in place.
            exec::for_each_chunk_mut(&mut self.amps, 1 << m, |ci, chunk| {
                let base = (ci << m) as u64;
                if base & cmask == cval {
                    if delta > 0 {
                        chunk.rotate_right(1);
                    } else {
                        chunk.rotate_left(1);
                    }
                }
            });
            return;
        }
        // Scattered register: gather the value, shift it, scatter it back.
        let modulus = 1u64 << m;
        let shift = if delta > 0 { modulus - 1 } else { 1 };
        let src = std::mem::take(&mut self.amps);
        let mut dst = vec![Complex64::ZERO; src.len()];
        exec::for_each_chunk_mut(&mut dst, exec::CHUNK, |ci, chunk| {
            let base = ci * exec::CHUNK;
            for (j, out) in chunk.iter_mut().enumerate() {
                let idx = (base + j) as u64;
                *out = if idx & cmask == cval {
                    let from = (gather_register(idx, register) + shift) % modulus;
                    src[scatter_register(idx, register, from) as usize]
                } else {
                    src[idx as usize]
                };
            }
        });
        self.amps = dst;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::gate::{BasisPredicate, Control};
    use approx::assert_abs_diff_eq;

    fn probs(state: &QuantumState) -> Vec<f64> {
        state.probabilities()
    }

    #[test]
    fn zero_state_is_basis_zero() {
        let s = QuantumState::zero(3).unwrap();
        assert_eq!(s.num_qubits(), 3);
        assert_eq!(s.amplitudes().len(), 8);
        assert_eq!(s.probability_of(0), 1.0);
        assert_eq!(s.norm_sqr(), 1.0);
    }

    #[test]
    fn capacity_limits() {
        assert!(matches!(
            QuantumState::zero(27),
            Err(Error::CapacityExceeded { requested: 27, capacity: 26 })
        ));
        assert!(matches!(
            QuantumState::zero_with_cap(31, 40),
            Err(Error::CapacityExceeded { requested: 31, capacity: 30 })
        ));
        assert!(QuantumState::zero_with_cap(27, 27).is_ok());
        assert!(QuantumState::zero(0).is_err());
    }

    #[test]
    fn rotate_y_half_turn_flips() {
        let mut s = QuantumState::zero(1).unwrap();
        s.apply(&GateOp::ry(0, std::f64::consts::PI)).unwrap();
        assert_abs_diff_eq!(s.probability_of(1), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(s.amplitudes()[1].re, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn rotate_y_splits_by_sin_sq() {
        // Ry(2 asin(sqrt(p))) |0> puts p on |1>.
        let p: f64 = 0.3;
        let mut s = QuantumState::zero(1).unwrap();
        s.apply(&GateOp::ry(0, 2.0 * p.sqrt().asin())).unwrap();
        assert_abs_diff_eq!(s.probability_of(1), p, epsilon = 1e-15);
        assert_abs_diff_eq!(s.probability_of(0), 1.0 - p, epsilon = 1e-15);
    }

    #[test]
    fn x_on_middle_qubit() {
        let mut s = QuantumState::zero(3).unwrap();
        s.apply(&GateOp::x(1)).unwrap();
        assert_eq!(s.probability_of(0b010), 1.0);
    }

    #[test]
    fn anti_control_fires_on_zero() {
        let mut s = QuantumState::zero(2).unwrap();
        s.apply(&GateOp::multi_controlled_x(vec![Control::off(1)], 0))
            .unwrap();
        assert_eq!(s.probability_of(0b01), 1.0);
        // now qubit 1 is still 0, flip again via positive control: no-op
        s.apply(&GateOp::multi_controlled_x(vec![Control::on(1)], 0))
            .unwrap();
        assert_eq!(s.probability_of(0b01), 1.0);
    }

    #[test]
    fn mixed_polarity_controls() {
        // |q2 q1 q0> = |010>: fire only when q1=1 and q2=0.
        let mut s = QuantumState::zero(3).unwrap();
        s.apply(&GateOp::x(1)).unwrap();
        s.apply(&GateOp::multi_controlled_x(
            vec![Control::on(1), Control::off(2)],
            0,
        ))
        .unwrap();
        assert_eq!(s.probability_of(0b011), 1.0);
    }

    #[test]
    fn increment_wraps_cyclically() {
        let mut s = QuantumState::zero(2).unwrap();
        let inc = GateOp::controlled_increment(Vec::new(), vec![0, 1]);
        for expected in [1u64, 2, 3, 0, 1] {
            s.apply(&inc).unwrap();
            assert_eq!(s.probability_of(expected), 1.0);
        }
        let dec = GateOp::controlled_decrement(Vec::new(), vec![0, 1]);
        s.apply(&dec).unwrap();
        assert_eq!(s.probability_of(0), 1.0);
        s.apply(&dec).unwrap();
        assert_eq!(s.probability_of(3), 1.0);
    }

    #[test]
    fn controlled_increment_respects_control() {
        let mut s = QuantumState::zero(3).unwrap();
        let inc = GateOp::controlled_increment(vec![Control::on(2)], vec![0, 1]);
        s.apply(&inc).unwrap();
        assert_eq!(s.probability_of(0), 1.0, "control bit low: no shift");
        s.apply(&GateOp::x(2)).unwrap();
        s.apply(&inc).unwrap();
        assert_eq!(s.probability_of(0b101), 1.0);
    }

    #[test]
    fn scattered_register_increment_matches_contiguous() {
        // Same logical walk on register [2, 0] vs [0, 1]: start at value 3
        // (wrap case) under superposition with a rotated spectator qubit.
        let mut a = QuantumState::zero(3).unwrap();
        a.apply(&GateOp::ry(1, 0.7)).unwrap();
        a.apply(&GateOp::x(0)).unwrap();
        a.apply(&GateOp::x(2)).unwrap(); // register [2,0] holds 3
        a.apply(&GateOp::controlled_increment(Vec::new(), vec![2, 0]))
            .unwrap();
        // register [2,0] now holds 0: bits 2 and 0 clear, spectator q1 untouched
        assert_abs_diff_eq!(a.probability_of(0b000), (0.35f64).cos().powi(2), epsilon = 1e-15);
        assert_abs_diff_eq!(a.probability_of(0b010), (0.35f64).sin().powi(2), epsilon = 1e-15);
        assert_abs_diff_eq!(a.norm_sqr(), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn phase_flip_marks_predicate() {
        let mut s = QuantumState::zero(2).unwrap();
        s.apply(&GateOp::ry(0, std::f64::consts::FRAC_PI_2)).unwrap();
        s.apply(&GateOp::ry(1, std::f64::consts::FRAC_PI_2)).unwrap();
        let before = s.amplitudes().to_vec();
        s.apply(&GateOp::phase_flip(BasisPredicate::RegisterAtLeast {
            register: vec![0, 1],
            threshold: 2,
        }))
        .unwrap();
        for (i, (a, b)) in before.iter().zip(s.amplitudes()).enumerate() {
            if i >= 2 {
                assert_eq!(*b, -a);
            } else {
                assert_eq!(*b, *a);
            }
        }
        // probabilities unchanged by a phase
        assert_abs_diff_eq!(s.norm_sqr(), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn probabilities_sum_to_norm() {
        let mut s = QuantumState::zero(4).unwrap();
        for q in 0..4 {
            s.apply(&GateOp::ry(q, 0.3 + q as f64)).unwrap();
        }
        let total: f64 = probs(&s).iter().sum();
        assert_abs_diff_eq!(total, 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(s.norm_sqr(), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn marginal_matches_manual_sum() {
        let mut s = QuantumState::zero(3).unwrap();
        for q in 0..3 {
            s.apply(&GateOp::ry(q, 0.4 * (q + 1) as f64)).unwrap();
        }
        let odd: f64 = probs(&s)
            .iter()
            .enumerate()
            .filter(|(i, _)| i % 2 == 1)
            .map(|(_, p)| p)
            .sum();
        assert_abs_diff_eq!(
            s.marginal_probability(|i| i & 1 == 1),
            odd,
            epsilon = 1e-15
        );
    }

    #[test]
    fn from_amplitudes_checks_shape() {
        assert!(QuantumState::from_amplitudes(vec![Complex64::ONE; 3]).is_err());
        assert!(QuantumState::from_amplitudes(vec![Complex64::ONE]).is_err());
        let s = QuantumState::from_amplitudes(vec![Complex64::ZERO; 8]).unwrap();
        assert_eq!(s.num_qubits(), 3);
    }

    #[test]
    fn apply_rejects_invalid_ops() {
        let mut s = QuantumState::zero(2).unwrap();
        assert!(s.apply(&GateOp::x(2)).is_err());
        assert!(s
            .apply(&GateOp::multi_controlled_x(vec![Control::on(0)], 0))
            .is_err());
    }
}
