use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("{name} = {value} is outside its domain: {expected}")]
    Domain {
        name: &'static str,
        value: f64,
        expected: &'static str,
    },
    #[error("swap projection has trace {trace:e}; cannot renormalize")]
    DegenerateState { trace: f64 },
    #[error("fidelity {from} cannot be purified up to {to}: BBPSSW does not improve states at or below 0.5")]
    Unreachable { from: f64, to: f64 },
    #[error("purification from {from} towards {to} stalled after {rounds} rounds")]
    Stalled { from: f64, to: f64, rounds: u32 },
    #[error("threshold plan is infeasible: layer {layer} would need fidelity {required}")]
    InfeasiblePlan { layer: usize, required: f64 },
    #[error("invalid configuration: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, SimError>;

pub(crate) fn domain(name: &'static str, value: f64, expected: &'static str) -> SimError {
    SimError::Domain { name, value, expected }
}
