//! Simulation oracles: Monte Carlo reliability replay and a discrete-event
//! queueing/rebuild simulator, with shared estimators.

pub mod des;
pub mod reliability;
pub mod stats;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("invalid parameter: {0}")]
    Invalid(String),
    #[error("model defect: {0}")]
    Model(String),
    #[error("queue kept growing: {in_system} in system at t={at}")]
    Unstable { in_system: u64, at: f64 },
}

pub(crate) fn ensure(cond: bool, msg: &str) -> Result<(), SimError> {
    if cond {
        Ok(())
    } else {
        Err(SimError::Invalid(msg.to_string()))
    }
}
