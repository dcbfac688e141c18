//! Contrastive max-margin objective with L2 regularization.

use crate::error::{Error, Result};
use crate::kb::{KnowledgeBase, Triplet};
use crate::models::{GradientSet, ModelParams};
use crate::par::{self, Execution};
use crate::seed;

use super::sampling::{sample_corruptions, CorruptionSample, SidePolicy};

/// Examples per parallel work unit. Fixed so that the summation order does
/// not depend on the number of threads.
const CHUNK: usize = 32;

/// `max(0, 1 − p_correct + p_corrupt)`.
#[inline]
pub fn hinge_term(p_correct: f64, p_corrupt: f64) -> f64 {
    (1.0 - p_correct + p_corrupt).max(0.0)
}

/// A training triplet with its frozen corruptions.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingExample {
    pub triplet: Triplet,
    pub corruptions: Vec<CorruptionSample>,
}

/// Corruptions for `kb.train[index]` in `epoch`, from a generator keyed by
/// `(seed, epoch, index)`.
pub fn corruptions_for(
    kb: &KnowledgeBase,
    index: usize,
    count: usize,
    policy: SidePolicy,
    seed: u64,
    epoch: u64,
) -> Result<TrainingExample> {
    let triplet = kb.train[index];
    let mut rng = seed::rng(seed, &[seed::stream::CORRUPTION, epoch, index as u64]);
    Ok(TrainingExample {
        triplet,
        corruptions: sample_corruptions(kb, &triplet, count, policy, &mut rng)?,
    })
}

/// Hinge sum and gradient of one example, without regularization.
pub fn example_loss(params: &ModelParams, ex: &TrainingExample, grad: Option<&mut GradientSet>) -> f64 {
    let p_correct = params.plausibility(&ex.triplet);
    let mut loss = 0.0;
    let mut active = Vec::new();
    for c in &ex.corruptions {
        let t = c.corrupted();
        let h = hinge_term(p_correct, params.plausibility(&t));
        if h > 0.0 {
            loss += h;
            active.push(t);
        }
    }
    if let Some(grad) = grad {
        if !active.is_empty() {
            let t = ex.triplet;
            grad.add_plausibility_grad(params, t.left, t.relation, t.right, -(active.len() as f64));
            for c in active {
                grad.add_plausibility_grad(params, c.left, c.relation, c.right, 1.0);
            }
        }
    }
    loss
}

/// `Σ hinge + λ‖θ‖²` over `examples`, and its gradient as a dense vector in
/// the parameters' layout.
pub fn objective_and_gradient(
    params: &ModelParams,
    examples: &[TrainingExample],
    l2: f64,
    exec: Execution,
) -> Result<(f64, Vec<f64>)> {
    let layout = params.layout();
    let parts = par::map_chunks(exec, examples, CHUNK, |_, chunk| {
        let mut g = GradientSet::new(layout);
        let loss = chunk
            .iter()
            .fold(0.0, |acc, ex| acc + example_loss(params, ex, Some(&mut g)));
        (loss, g)
    });
    let theta = params.as_slice();
    let mut grad = vec![0.0; theta.len()];
    let mut hinge = 0.0;
    for (loss, g) in &parts {
        hinge += loss;
        g.add_to_dense(layout, &mut grad);
    }
    let mut sq = 0.0;
    if l2 != 0.0 {
        for (g, x) in grad.iter_mut().zip(theta) {
            sq += x * x;
            *g += 2.0 * l2 * x;
        }
    }
    let j = hinge + l2 * sq;
    check_finite(params, j, &grad)?;
    Ok((j, grad))
}

/// Objective value only.
pub fn objective(params: &ModelParams, examples: &[TrainingExample], l2: f64, exec: Execution) -> Result<f64> {
    let parts = par::map_chunks(exec, examples, CHUNK, |_, chunk| {
        chunk.iter().fold(0.0, |acc, ex| acc + example_loss(params, ex, None))
    });
    let hinge: f64 = parts.iter().sum();
    let sq: f64 = if l2 != 0.0 {
        params.as_slice().iter().map(|x| x * x).sum()
    } else {
        0.0
    };
    let j = hinge + l2 * sq;
    if !j.is_finite() {
        return Err(non_finite_error(params, None));
    }
    Ok(j)
}

fn non_finite_error(params: &ModelParams, grad: Option<&[f64]>) -> Error {
    let layout = params.layout();
    let group = params
        .first_non_finite()
        .or_else(|| grad.and_then(|g| g.iter().position(|x| !x.is_finite())))
        .map(|i| layout.group(i))
        .unwrap_or_else(|| "objective".to_owned());
    Error::Numerical { group }
}

fn check_finite(params: &ModelParams, j: f64, grad: &[f64]) -> Result<()> {
    if j.is_finite() && grad.iter().all(|g| g.is_finite()) {
        Ok(())
    } else {
        Err(non_finite_error(params, Some(grad)))
    }
}

/// Objective and gradient for a minibatch of training-set indices, with the
/// corruptions of `epoch` drawn on the fly.
pub fn batch_objective_and_gradient(
    params: &ModelParams,
    kb: &KnowledgeBase,
    batch: &[usize],
    config: &super::TrainingConfig,
    epoch: u64,
) -> Result<(f64, Vec<f64>)> {
    if batch.is_empty() {
        return Err(Error::Config("empty minibatch".into()));
    }
    let examples = batch
        .iter()
        .map(|&i| corruptions_for(kb, i, config.corruptions, config.corrupt_side, config.seed, epoch))
        .collect::<Result<Vec<_>>>()?;
    objective_and_gradient(params, &examples, config.l2, config.execution)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hinge_examples() {
        assert_eq!(hinge_term(2.0, 0.5), 0.0);
        assert!((hinge_term(0.5, 0.2) - 0.7).abs() < 1e-15);
        assert_eq!(hinge_term(0.3, 0.3), 1.0);
        assert_eq!(hinge_term(1.0, 0.0), 0.0);
    }
}
