//! Training: corruption sampling, the max-margin objective and the
//! minibatch optimizer loop.

pub mod lbfgs;
pub mod objective;
pub mod sampling;

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;

use crate::embeddings::EmbeddingMatrix;
use crate::error::{Error, Result};
use crate::evaluation::{fit_thresholds, generate_negatives};
use crate::kb::{KnowledgeBase, Triplet};
use crate::models::{ModelKind, ModelParams, ModelShape};
use crate::par::Execution;
use crate::seed;

pub use lbfgs::{lbfgs_minimize, LbfgsConfig, LbfgsReport, Termination};
pub use objective::{batch_objective_and_gradient, hinge_term, objective, objective_and_gradient, TrainingExample};
pub use sampling::{sample_corruptions, CorruptionSample, Side, SidePolicy};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Optimizer {
    #[default]
    Lbfgs,
    Sgd,
}

impl fmt::Display for Optimizer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Optimizer::Lbfgs => "lbfgs",
            Optimizer::Sgd => "sgd",
        })
    }
}

impl FromStr for Optimizer {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lbfgs" => Ok(Optimizer::Lbfgs),
            "sgd" => Ok(Optimizer::Sgd),
            other => Err(Error::Config(format!("unknown optimizer `{other}`"))),
        }
    }
}

/// Hinge margin of the objective. Not configurable.
pub const MARGIN: f64 = 1.0;

#[derive(Debug, Clone, PartialEq)]
pub struct TrainingConfig {
    pub model: ModelKind,
    pub dim: usize,
    pub slices: usize,
    /// Corrupted entities per training triplet.
    pub corruptions: usize,
    pub l2: f64,
    pub batch_size: usize,
    pub epochs: usize,
    pub lbfgs_history: usize,
    pub lbfgs_iterations: usize,
    pub corrupt_side: SidePolicy,
    pub seed: u64,
    pub optimizer: Optimizer,
    pub sgd_step: f64,
    pub share_u: bool,
    /// Draw corruptions once for the whole run instead of once per epoch.
    pub freeze_corruptions: bool,
    pub execution: Execution,
}

impl Default for TrainingConfig {
    fn default() -> Self {
        TrainingConfig {
            model: ModelKind::Ntn,
            dim: 100,
            slices: 4,
            corruptions: 10,
            l2: 1e-4,
            batch_size: 1000,
            epochs: 100,
            lbfgs_history: 5,
            lbfgs_iterations: 10,
            corrupt_side: SidePolicy::Right,
            seed: 0,
            optimizer: Optimizer::Lbfgs,
            sgd_step: 0.01,
            share_u: false,
            freeze_corruptions: false,
            execution: Execution::Parallel,
        }
    }
}

impl TrainingConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("dimension", self.dim),
            ("corruptions", self.corruptions),
            ("batch size", self.batch_size),
            ("epochs", self.epochs),
            ("L-BFGS history", self.lbfgs_history),
            ("L-BFGS iterations", self.lbfgs_iterations),
        ];
        if let Some((name, _)) = positive.iter().find(|(_, v)| *v == 0) {
            return Err(Error::Config(format!("{name} must be positive")));
        }
        if self.model == ModelKind::Ntn && self.slices == 0 {
            return Err(Error::Config("slices must be positive".into()));
        }
        if !(self.l2 >= 0.0 && self.l2.is_finite()) {
            return Err(Error::Config(format!(
                "L2 weight must be a nonnegative number, got {}",
                self.l2
            )));
        }
        if self.optimizer == Optimizer::Sgd && !(self.sgd_step > 0.0 && self.sgd_step.is_finite()) {
            return Err(Error::Config("SGD step must be positive".into()));
        }
        Ok(())
    }

    pub fn shape(&self, kb: &KnowledgeBase) -> ModelShape {
        ModelShape {
            kind: self.model,
            dim: self.dim,
            slices: self.slices,
            num_entities: kb.num_entities(),
            num_relations: kb.num_relations(),
            share_u: self.share_u,
        }
        .canonical()
    }

    fn lbfgs(&self) -> LbfgsConfig {
        LbfgsConfig {
            history: self.lbfgs_history,
            max_iterations: self.lbfgs_iterations,
            ..LbfgsConfig::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochMetrics {
    /// 1-based.
    pub epoch: usize,
    /// Full training objective with this epoch's corruptions.
    pub objective: f64,
    pub dev_accuracy: f64,
}

impl fmt::Display for EpochMetrics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}\t{}\t{}", self.epoch, self.objective, self.dev_accuracy)
    }
}

#[derive(Debug, Clone)]
pub struct TrainingOutcome {
    /// Parameters of the epoch with the best dev accuracy.
    pub params: ModelParams,
    pub best_epoch: usize,
    pub metrics: Vec<EpochMetrics>,
}

impl TrainingOutcome {
    pub fn best_dev_accuracy(&self) -> f64 {
        self.metrics
            .iter()
            .find(|m| m.epoch == self.best_epoch)
            .map_or(0.0, |m| m.dev_accuracy)
    }
}

/// Frozen corruptions for every training triplet in `epoch`.
pub fn epoch_examples(kb: &KnowledgeBase, config: &TrainingConfig, epoch: u64) -> Result<Vec<TrainingExample>> {
    let epoch = if config.freeze_corruptions { 0 } else { epoch };
    (0..kb.train.len())
        .map(|i| objective::corruptions_for(kb, i, config.corruptions, config.corrupt_side, config.seed, epoch))
        .collect()
}

fn numerical_failure(params: &ModelParams, report: &LbfgsReport) -> Error {
    let group = report
        .gradient
        .iter()
        .position(|g| !g.is_finite())
        .or_else(|| params.first_non_finite())
        .map(|i| params.layout().group(i))
        .unwrap_or_else(|| "objective".to_owned());
    Error::Numerical { group }
}

/// Runs one optimizer pass over a minibatch, updating `params` in place.
fn optimize_batch(params: &mut ModelParams, examples: &[TrainingExample], config: &TrainingConfig) -> Result<()> {
    match config.optimizer {
        Optimizer::Sgd => {
            let (_, grad) = objective_and_gradient(params, examples, config.l2, config.execution)?;
            for (x, g) in params.as_mut_slice().iter_mut().zip(&grad) {
                *x -= config.sgd_step * g;
            }
            Ok(())
        }
        Optimizer::Lbfgs => {
            let mut scratch = params.clone();
            let mut failure: Option<Error> = None;
            let f = |x: &[f64], g: &mut [f64]| -> f64 {
                scratch.as_mut_slice().copy_from_slice(x);
                match objective_and_gradient(&scratch, examples, config.l2, config.execution) {
                    Ok((j, grad)) => {
                        g.copy_from_slice(&grad);
                        j
                    }
                    Err(e) => {
                        failure.get_or_insert(e);
                        g.fill(f64::NAN);
                        f64::NAN
                    }
                }
            };
            let x0 = params.as_slice().to_vec();
            let result = lbfgs_minimize(f, x0, &config.lbfgs());
            let report = match result {
                Ok(r) => r,
                Err(Error::Numerical { .. }) if failure.is_some() => return Err(failure.unwrap()),
                Err(Error::LineSearch { f0, slope, step }) => {
                    // typical at a hinge kink, where no step along -g decreases J
                    log::info!("no descent step (J = {f0:e}, slope = {slope:e}, step = {step:e}); batch unchanged");
                    return Ok(());
                }
                Err(e) => return Err(e),
            };
            if report.termination == Termination::NonFinite {
                return Err(numerical_failure(params, &report));
            }
            params.as_mut_slice().copy_from_slice(&report.x);
            Ok(())
        }
    }
}

/// Trains a model on `kb.train`, selecting the epoch with the best dev
/// classification accuracy (ties go to the later epoch).
pub fn train(kb: &KnowledgeBase, config: &TrainingConfig, init: &EmbeddingMatrix) -> Result<TrainingOutcome> {
    train_with_callback(kb, config, init, |_| {})
}

/// [`train`], calling `on_epoch` after each epoch's metrics are recorded.
pub fn train_with_callback<F>(
    kb: &KnowledgeBase,
    config: &TrainingConfig,
    init: &EmbeddingMatrix,
    mut on_epoch: F,
) -> Result<TrainingOutcome>
where
    F: FnMut(&EpochMetrics),
{
    config.validate()?;
    if kb.train.is_empty() {
        return Err(Error::Config("training split is empty".into()));
    }
    if init.dimension() != config.dim {
        return Err(Error::Config(format!(
            "initial embeddings have dimension {}, config says {}",
            init.dimension(),
            config.dim
        )));
    }
    let mut params = ModelParams::init(config.shape(kb), init, config.seed)?;
    let dev_negatives: Vec<Triplet> = if kb.dev.is_empty() {
        Vec::new()
    } else {
        generate_negatives(kb, &kb.dev, seed::derive(config.seed, &[seed::stream::DEV_NEGATIVES]))
    };

    let mut order: Vec<usize> = (0..kb.train.len()).collect();
    let mut metrics = Vec::with_capacity(config.epochs);
    let mut best: Option<(usize, f64, ModelParams)> = None;

    for epoch in 1..=config.epochs {
        let examples = epoch_examples(kb, config, epoch as u64)?;
        let mut rng = seed::rng(config.seed, &[seed::stream::SHUFFLE, epoch as u64]);
        order.sort_unstable();
        order.shuffle(&mut rng);

        for batch in order.chunks(config.batch_size) {
            let batch_examples: Vec<TrainingExample> = batch.iter().map(|&i| examples[i].clone()).collect();
            optimize_batch(&mut params, &batch_examples, config)?;
        }

        let objective = objective(&params, &examples, config.l2, config.execution)?;
        let dev_accuracy = fit_thresholds(&params, &kb.dev, &dev_negatives).dev_accuracy();
        let m = EpochMetrics {
            epoch,
            objective,
            dev_accuracy,
        };
        log::info!("epoch {epoch}: objective {objective:.6}, dev accuracy {dev_accuracy:.4}");
        on_epoch(&m);
        metrics.push(m);
        if best.as_ref().is_none_or(|(_, acc, _)| dev_accuracy >= *acc) {
            best = Some((epoch, dev_accuracy, params.clone()));
        }
    }

    let (best_epoch, _, params) = best.expect("at least one epoch");
    Ok(TrainingOutcome {
        params,
        best_epoch,
        metrics,
    })
}
