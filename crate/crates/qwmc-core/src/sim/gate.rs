//! Gate-level intermediate representation.
//!
//! Qubit `i` is bit `i` of the basis-state index (qubit 0 is the least
//! significant bit).  All gates here have real matrix elements, which is
//! all the absorption walk needs; amplitudes stay complex so the
//! simulator remains general.

use crate::error::{Error, Result};

/// A control condition: the gate fires only when `qubit` holds `value`.
///
/// `value = false` is an anti-control (fires on |0>).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Control {
    pub qubit: usize,
    pub value: bool,
}

impl Control {
    /// Positive control on `qubit`.
    pub fn on(qubit: usize) -> Self {
        Control { qubit, value: true }
    }

    /// Anti-control on `qubit`.
    pub fn off(qubit: usize) -> Self {
        Control { qubit, value: false }
    }
}

/// A predicate over basis-state indices, used by [`GateKind::PhaseFlip`].
#[derive(Debug, Clone, PartialEq)]
pub enum BasisPredicate {
    /// Matches indices whose bits under `mask` equal `value`.
    BitsEqual { mask: u64, value: u64 },
    /// Matches indices where the register (qubits listed LSB first) holds
    /// an unsigned value `>= threshold`.
    RegisterAtLeast { register: Vec<usize>, threshold: u64 },
}

impl BasisPredicate {
    /// Whether basis index `index` satisfies the predicate.
    pub fn matches(&self, index: u64) -> bool {
        match self {
            BasisPredicate::BitsEqual { mask, value } => index & mask == *value,
            BasisPredicate::RegisterAtLeast { register, threshold } => {
                gather_register(index, register) >= *threshold
            }
        }
    }

    fn validate(&self, num_qubits: usize) -> Result<()> {
        match self {
            BasisPredicate::BitsEqual { mask, value } => {
                let in_range = if num_qubits >= 64 {
                    true
                } else {
                    mask >> num_qubits == 0
                };
                if !in_range || value & !mask != 0 {
                    return Err(Error::InvalidParameter {
                        name: "predicate",
                        reason: format!("mask {mask:#x}/value {value:#x} malformed"),
                    });
                }
                Ok(())
            }
            BasisPredicate::RegisterAtLeast { register, .. } => {
                validate_register(register, num_qubits)
            }
        }
    }
}

/// Reads the unsigned value held by `register` (LSB first) out of `index`.
pub(crate) fn gather_register(index: u64, register: &[usize]) -> u64 {
    register
        .iter()
        .enumerate()
        .fold(0, |acc, (bit, &q)| acc | (index >> q & 1) << bit)
}

/// Writes `value` into the bits of `index` covered by `register`.
pub(crate) fn scatter_register(index: u64, register: &[usize], value: u64) -> u64 {
    register
        .iter()
        .enumerate()
        .fold(index, |acc, (bit, &q)| {
            acc & !(1 << q) | (value >> bit & 1) << q
        })
}

fn validate_register(register: &[usize], num_qubits: usize) -> Result<()> {
    if register.is_empty() {
        return Err(Error::InvalidParameter {
            name: "register",
            reason: "empty qubit list".into(),
        });
    }
    let mut seen = 0u64;
    for &q in register {
        if q >= num_qubits {
            return Err(Error::QubitOutOfRange { qubit: q, num_qubits });
        }
        if seen >> q & 1 == 1 {
            return Err(Error::DuplicateQubit { qubit: q });
        }
        seen |= 1 << q;
    }
    Ok(())
}

/// The gate alphabet understood by the simulator.
#[derive(Debug, Clone, PartialEq)]
pub enum GateKind {
    /// Y rotation on one target: Ry(t) = [[cos t/2, -sin t/2], [sin t/2, cos t/2]].
    RotateY { angle: f64 },
    /// Bit flip on one target.
    PauliX,
    /// Adds 1 (mod 2^m) to an m-qubit register.
    Increment,
    /// Subtracts 1 (mod 2^m) from an m-qubit register.
    Decrement,
    /// Flips the sign of every amplitude whose index satisfies the predicate.
    PhaseFlip { predicate: BasisPredicate },
}

/// One gate application: a kind, its target qubits, and control conditions.
///
/// `RotateY` and `PauliX` take exactly one target; `Increment`/`Decrement`
/// treat `targets` as a register listed LSB first; `PhaseFlip` takes none.
/// Controls apply to every kind and may mix polarities.
#[derive(Debug, Clone, PartialEq)]
pub struct GateOp {
    pub kind: GateKind,
    pub targets: Vec<usize>,
    pub controls: Vec<Control>,
}

impl GateOp {
    /// Uncontrolled Y rotation.
    pub fn ry(target: usize, angle: f64) -> Self {
        GateOp {
            kind: GateKind::RotateY { angle },
            targets: vec![target],
            controls: Vec::new(),
        }
    }

    /// Multi-controlled Y rotation.
    pub fn controlled_ry(controls: Vec<Control>, target: usize, angle: f64) -> Self {
        GateOp {
            kind: GateKind::RotateY { angle },
            targets: vec![target],
            controls,
        }
    }

    /// Uncontrolled bit flip.
    pub fn x(target: usize) -> Self {
        GateOp {
            kind: GateKind::PauliX,
            targets: vec![target],
            controls: Vec::new(),
        }
    }

    /// Multi-controlled X; `controls` may mix polarities.
    pub fn multi_controlled_x(controls: Vec<Control>, target: usize) -> Self {
        GateOp {
            kind: GateKind::PauliX,
            targets: vec![target],
            controls,
        }
    }

    /// Controlled +1 on `register` (qubits LSB first), cyclic mod 2^m.
    pub fn controlled_increment(controls: Vec<Control>, register: Vec<usize>) -> Self {
        GateOp {
            kind: GateKind::Increment,
            targets: register,
            controls,
        }
    }

    /// Controlled -1 on `register` (qubits LSB first), cyclic mod 2^m.
    pub fn controlled_decrement(controls: Vec<Control>, register: Vec<usize>) -> Self {
        GateOp {
            kind: GateKind::Decrement,
            targets: register,
            controls,
        }
    }

    /// Sign flip on all basis states matching `predicate`.
    pub fn phase_flip(predicate: BasisPredicate) -> Self {
        GateOp {
            kind: GateKind::PhaseFlip { predicate },
            targets: Vec::new(),
            controls: Vec::new(),
        }
    }

    /// The exact inverse gate.  Every kind in the alphabet has one.
    pub fn inverse(&self) -> GateOp {
        let kind = match &self.kind {
            GateKind::RotateY { angle } => GateKind::RotateY { angle: -angle },
            GateKind::PauliX => GateKind::PauliX,
            GateKind::Increment => GateKind::Decrement,
            GateKind::Decrement => GateKind::Increment,
            GateKind::PhaseFlip { predicate } => GateKind::PhaseFlip {
                predicate: predicate.clone(),
            },
        };
        GateOp {
            kind,
            targets: self.targets.clone(),
            controls: self.controls.clone(),
        }
    }

    /// Control condition as a (mask, value) pair for cheap index tests.
    pub(crate) fn control_mask(&self) -> (u64, u64) {
        let mut mask = 0u64;
        let mut value = 0u64;
        for c in &self.controls {
            mask |= 1 << c.qubit;
            value |= u64::from(c.value) << c.qubit;
        }
        (mask, value)
    }

    /// Checks qubit bounds, arity, and target/control disjointness.
    pub fn validate(&self, num_qubits: usize) -> Result<()> {
        match &self.kind {
            GateKind::RotateY { .. } | GateKind::PauliX => {
                if self.targets.len() != 1 {
                    return Err(Error::InvalidParameter {
                        name: "targets",
                        reason: format!("expected 1 target, got {}", self.targets.len()),
                    });
                }
            }
            GateKind::Increment | GateKind::Decrement => {}
            GateKind::PhaseFlip { predicate } => {
                if !self.targets.is_empty() || !self.controls.is_empty() {
                    return Err(Error::InvalidParameter {
                        name: "targets",
                        reason: "phase flip takes no targets or controls".into(),
                    });
                }
                return predicate.validate(num_qubits);
            }
        }
        validate_register(&self.targets, num_qubits)?;
        let mut seen: u64 = self.targets.iter().map(|&q| 1u64 << q).sum();
        for c in &self.controls {
            if c.qubit >= num_qubits {
                return Err(Error::QubitOutOfRange {
                    qubit: c.qubit,
                    num_qubits,
                });
            }
            if seen >> c.qubit & 1 == 1 {
                return Err(Error::DuplicateQubit { qubit: c.qubit });
            }
            seen |= 1 << c.qubit;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gather_scatter_round_trip() {
        let register = [3, 1, 4];
        for index in 0..64u64 {
            let value = gather_register(index, &register);
            assert_eq!(scatter_register(index, &register, value), index);
            for v in 0..8u64 {
                let put = scatter_register(index, &register, v);
                assert_eq!(gather_register(put, &register), v);
                // bits outside the register untouched
                assert_eq!(put & !0b11010, index & !0b11010);
            }
        }
    }

    #[test]
    fn predicate_register_at_least() {
        let pred = BasisPredicate::RegisterAtLeast {
            register: vec![0, 1],
            threshold: 2,
        };
        assert!(!pred.matches(0b001));
        assert!(pred.matches(0b010));
        assert!(pred.matches(0b011));
        assert!(pred.matches(0b110));
        assert!(!pred.matches(0b100));
    }

    #[test]
    fn predicate_bits_equal() {
        let pred = BasisPredicate::BitsEqual {
            mask: 0b101,
            value: 0b100,
        };
        assert!(pred.matches(0b100));
        assert!(pred.matches(0b110));
        assert!(!pred.matches(0b101));
        assert!(!pred.matches(0b000));
    }

    #[test]
    fn inverse_pairs() {
        let inc = GateOp::controlled_increment(vec![Control::off(2)], vec![0, 1]);
        assert_eq!(inc.inverse().kind, GateKind::Decrement);
        assert_eq!(inc.inverse().inverse(), inc);
        let ry = GateOp::ry(0, 0.3);
        match ry.inverse().kind {
            GateKind::RotateY { angle } => assert_eq!(angle, -0.3),
            _ => unreachable!(),
        }
    }

    #[test]
    fn validate_rejects_overlap_and_range() {
        let op = GateOp::multi_controlled_x(vec![Control::on(1)], 1);
        assert_eq!(op.validate(3), Err(Error::DuplicateQubit { qubit: 1 }));
        let op = GateOp::x(5);
        assert_eq!(
            op.validate(3),
            Err(Error::QubitOutOfRange { qubit: 5, num_qubits: 3 })
        );
        let op = GateOp::controlled_increment(vec![Control::on(0)], vec![1, 1]);
        assert_eq!(op.validate(3), Err(Error::DuplicateQubit { qubit: 1 }));
    }
}
