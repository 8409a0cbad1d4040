//! Ordered gate sequences.

use crate::error::{Error, Result};
use crate::sim::gate::GateOp;

/// A gate list over a fixed-width register, applied first to last.
#[derive(Debug, Clone, PartialEq)]
pub struct Circuit {
    num_qubits: usize,
    ops: Vec<GateOp>,
}

impl Circuit {
    /// Empty circuit over `num_qubits` qubits.
    pub fn new(num_qubits: usize) -> Self {
        Circuit {
            num_qubits,
            ops: Vec::new(),
        }
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn ops(&self) -> &[GateOp] {
        &self.ops
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    /// Appends one validated gate.
    pub fn push(&mut self, op: GateOp) -> Result<()> {
        op.validate(self.num_qubits)?;
        self.ops.push(op);
        Ok(())
    }

    /// Appends every gate of `other`, which must match in width.
    pub fn extend(&mut self, other: &Circuit) -> Result<()> {
        if other.num_qubits != self.num_qubits {
            return Err(Error::InvalidParameter {
                name: "circuit",
                reason: format!(
                    "cannot extend a {}-qubit circuit with a {}-qubit one",
                    self.num_qubits, other.num_qubits
                ),
            });
        }
        self.ops.extend(other.ops.iter().cloned());
        Ok(())
    }

    /// The exact inverse: reversed order, each gate inverted.
    pub fn inverse(&self) -> Circuit {
        Circuit {
            num_qubits: self.num_qubits,
            ops: self.ops.iter().rev().map(GateOp::inverse).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::gate::Control;

    #[test]
    fn push_validates() {
        let mut c = Circuit::new(2);
        assert!(c.push(GateOp::x(0)).is_ok());
        assert!(c.push(GateOp::x(2)).is_err());
        assert_eq!(c.len(), 1);
    }

    #[test]
    fn inverse_reverses_and_inverts() {
        let mut c = Circuit::new(3);
        c.push(GateOp::ry(0, 0.5)).unwrap();
        c.push(GateOp::controlled_increment(vec![Control::on(2)], vec![0, 1]))
            .unwrap();
        let inv = c.inverse();
        assert_eq!(inv.len(), 2);
        assert_eq!(inv.ops()[0], c.ops()[1].inverse());
        assert_eq!(inv.ops()[1], c.ops()[0].inverse());
        assert_eq!(inv.inverse(), c);
    }

    #[test]
    fn extend_requires_matching_width() {
        let mut a = Circuit::new(2);
        let b = Circuit::new(3);
        assert!(a.extend(&b).is_err());
        let mut c = Circuit::new(2);
        c.push(GateOp::x(1)).unwrap();
        a.extend(&c).unwrap();
        assert_eq!(a.ops(), c.ops());
    }
}
