use rand::distributions::{Distribution, WeightedIndex};
use rand::RngCore;

use crate::error::{Error, Result};

/// Result of one deliberation.
#[derive(Debug, Clone, PartialEq)]
pub struct Deliberation {
    pub action: usize,
    /// Deliberation time; `None` for classical walks.
    pub t_star: Option<f64>,
    /// Normalized probability of each action at the moment of choice.
    pub probabilities: Vec<f64>,
}

/// A learner that maps percept indices to action indices.
pub trait Agent: Send {
    fn n_percepts(&self) -> usize;

    fn n_actions(&self) -> usize;

    fn deliberate(&mut self, percept: usize, rng: &mut dyn RngCore) -> Result<Deliberation>;

    /// Applies the update rule for the last deliberation.
    fn learn(&mut self, percept: usize, action: usize, rewarded: bool);
}

/// Normalizes `raw` and samples an index from it.
pub(crate) fn sample_normalized(raw: &[f64], t_star: f64, rng: &mut dyn RngCore) -> Result<(usize, Vec<f64>)> {
    let total: f64 = raw.iter().sum();
    if !(total > 1e-12) {
        return Err(Error::DeliberationFailure { t_star });
    }
    let probabilities: Vec<f64> = raw.iter().map(|p| p / total).collect();
    let dist = WeightedIndex::new(&probabilities).map_err(|_| Error::DeliberationFailure { t_star })?;
    Ok((dist.sample(rng), probabilities))
}
