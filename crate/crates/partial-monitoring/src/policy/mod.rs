//! Online policies: the common interface plus shared numeric helpers.

pub mod nw2;
pub mod relexp3;

use thiserror::Error;

pub use nw2::{redistribute_exact, stationary, Nw2Options, Nw2Policy, Nw2Round};
pub use relexp3::{RelExp3Options, RelExp3Policy, RelExp3Round};

/// Errors surfaced by policy construction or the per-round loop.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum PolicyError {
    /// The policy does not apply to this game class. The witness pair, when
    /// present, is reported 1-based.
    #[error("{reason}")]
    Refused {
        reason: String,
        witness: Option<(usize, usize)>,
    },
    /// A numeric invariant failed (stationarity residual, schedule misuse).
    #[error("numeric failure: {0}")]
    Numeric(String),
    #[error("action {action} is outside the playable action set")]
    Unplayable { action: usize },
    #[error("feedback must be observed after a distribution is computed")]
    ObserveBeforeDistribution,
}

/// A sequential policy over the game's original action indices.
///
/// Each round the runner queries `distribution`, samples an action from it,
/// and reveals the resulting feedback symbol through `observe`.
pub trait Policy {
    fn distribution(&mut self) -> Result<Vec<f64>, PolicyError>;
    fn observe(&mut self, action: usize, symbol: usize) -> Result<(), PolicyError>;
}

/// Softmax of `logits` with the usual max shift.
pub(crate) fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let weights: Vec<f64> = logits.iter().map(|&l| (l - max).exp()).collect();
    let total: f64 = weights.iter().sum();
    weights.into_iter().map(|w| w / total).collect()
}

/// Checks that `p` is a probability vector within `tol` of unit mass.
pub(crate) fn check_distribution(p: &[f64], tol: f64, what: &str) -> Result<(), PolicyError> {
    let sum: f64 = p.iter().sum();
    if (sum - 1.0).abs() > tol {
        return Err(PolicyError::Numeric(format!(
            "{what} sums to {sum}, expected 1 within {tol}"
        )));
    }
    if let Some(neg) = p.iter().find(|&&x| x < -1e-15) {
        return Err(PolicyError::Numeric(format!(
            "{what} has negative mass {neg}"
        )));
    }
    Ok(())
}
