//! Error type shared across the toolkit.

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

/// Everything that can go wrong while building or running an experiment.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// Register width exceeds the configured (or hard) qubit capacity.
    #[error("{requested} qubits exceeds the capacity of {capacity}")]
    CapacityExceeded { requested: usize, capacity: usize },

    /// A gate references a qubit outside the register.
    #[error("qubit {qubit} out of range for a {num_qubits}-qubit register")]
    QubitOutOfRange { qubit: usize, num_qubits: usize },

    /// A gate lists the same qubit twice (target/control or control/control).
    #[error("gate references qubit {qubit} more than once")]
    DuplicateQubit { qubit: usize },

    /// A probability argument fell outside its admissible interval.
    #[error("probability {value} outside [0, 1]")]
    InvalidProbability { value: f64 },

    /// A named scalar parameter violated its documented domain.
    #[error("invalid {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    /// Two distributions with different bin counts were compared.
    #[error("distribution shapes differ: {left} bins vs {right} bins")]
    ShapeMismatch { left: usize, right: usize },

    /// A walk state carried probability mass outside the expected outcomes.
    #[error("stray probability mass {mass:e} outside walk outcomes")]
    StrayMass { mass: f64 },

    /// Amplitude estimation hit its round limit before the target precision.
    #[error(
        "amplitude estimation did not converge within {max_rounds} rounds \
         (amplitude interval [{lo}, {hi}])"
    )]
    NotConverged { max_rounds: usize, lo: f64, hi: f64 },

    /// Amplitude estimation ran out of oracle queries before the target
    /// precision; retry with another seed or a looser epsilon.  Carries
    /// the partial interval and the queries actually consumed.
    #[error(
        "amplitude estimation exhausted its {budget}-query budget \
         (amplitude interval [{lo}, {hi}])"
    )]
    BudgetExhausted {
        budget: u64,
        spent: u64,
        lo: f64,
        hi: f64,
    },

    /// A numerical routine produced a non-finite or out-of-range result.
    #[error("numerical failure in {context}: {value}")]
    Numeric { context: &'static str, value: f64 },
}
