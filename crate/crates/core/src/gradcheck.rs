//! Central finite-difference check of the analytic objective gradient.
//!
//! Each trial builds a small random model (4 entities, 2 relations), one
//! training triplet with a right and a left corruption, and a random L2
//! weight, then compares every coordinate of the analytic gradient with
//! `(J(θ + h·e_i) − J(θ − h·e_i)) / 2h`. Instances sitting within the
//! exclusion distance of a hinge or L1 kink are skipped, as are single
//! coordinates whose ±h probes land on different sides of a kink.

use rand::Rng;

use crate::kb::{EntityId, Triplet};
use crate::models::{ModelKind, ModelParams, ModelShape, RelationView};
use crate::par::Execution;
use crate::seed;
use crate::training::objective::{objective, objective_and_gradient};
use crate::training::{CorruptionSample, Side, TrainingExample};

#[derive(Debug, Clone, PartialEq)]
pub struct GradCheckConfig {
    pub model: ModelKind,
    pub dim: usize,
    pub slices: usize,
    pub seed: u64,
    pub trials: usize,
    pub step: f64,
    pub tolerance: f64,
    pub kink_exclusion: f64,
    /// Test hook: perturbs one analytic gradient coordinate so the check
    /// must fail.
    pub corrupt_gradient: bool,
}

impl GradCheckConfig {
    pub fn new(model: ModelKind, dim: usize, slices: usize, seed: u64, trials: usize) -> Self {
        GradCheckConfig {
            model,
            dim,
            slices,
            seed,
            trials,
            step: 1e-5,
            tolerance: 1e-5,
            kink_exclusion: 1e-8,
            corrupt_gradient: false,
        }
    }
}

/// Relative error with a floor on the denominator so that coordinates
/// whose true derivative is ~0 are compared in absolute terms.
pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    const FLOOR: f64 = 1e-3;
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(FLOOR)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Worst {
    pub trial: usize,
    pub coordinate: String,
    pub analytic: f64,
    pub numeric: f64,
    pub relative_error: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GradCheckReport {
    pub max_relative_error: f64,
    pub coordinates_checked: usize,
    pub coordinates_skipped: usize,
    pub trials_skipped: usize,
    pub worst: Option<Worst>,
    pub tolerance: f64,
}

impl GradCheckReport {
    pub fn passed(&self) -> bool {
        self.max_relative_error <= self.tolerance
    }
}

/// A random instance for one trial.
pub struct Instance {
    pub params: ModelParams,
    pub examples: Vec<TrainingExample>,
    pub l2: f64,
}

pub fn random_instance(cfg: &GradCheckConfig, trial: usize) -> Instance {
    let mut rng = seed::rng(cfg.seed, &[seed::stream::GRADCHECK, trial as u64]);
    let shape = ModelShape {
        kind: cfg.model,
        dim: cfg.dim,
        slices: cfg.slices,
        num_entities: 4,
        num_relations: 2,
        share_u: trial % 2 == 1,
    };
    let mut params = ModelParams::zeros(shape);
    for x in params.as_mut_slice() {
        *x = rng.gen_range(-1.0..=1.0);
    }
    let relation = rng.gen_range(0..2);
    let triplet = Triplet::new(0, relation, 1);
    let corruptions = vec![
        CorruptionSample {
            source: triplet,
            entity: EntityId(2),
            side: Side::Right,
        },
        CorruptionSample {
            source: triplet,
            entity: EntityId(3),
            side: Side::Left,
        },
    ];
    Instance {
        params,
        examples: vec![TrainingExample { triplet, corruptions }],
        l2: rng.gen_range(0.0..0.01),
    }
}

/// Signed distances to every non-differentiable point of the objective:
/// hinge arguments and, for the distance model, the L1 components.
pub fn kink_distances(params: &ModelParams, examples: &[TrainingExample]) -> Vec<f64> {
    let mut out = Vec::new();
    let mut l1 = |t: &Triplet| {
        if let RelationView::Similarity(p) = params.relation(t.relation) {
            let a = p.project_left(params.entity(t.left));
            let b = p.project_right(params.entity(t.right));
            out.extend(a.iter().zip(&b).map(|(x, y)| x - y));
        }
    };
    for ex in examples {
        l1(&ex.triplet);
        for c in &ex.corruptions {
            l1(&c.corrupted());
        }
    }
    for ex in examples {
        let p = params.plausibility(&ex.triplet);
        for c in &ex.corruptions {
            out.push(1.0 - p + params.plausibility(&c.corrupted()));
        }
    }
    out
}

fn same_side(a: &[f64], b: &[f64]) -> bool {
    a.iter()
        .zip(b)
        .all(|(x, y)| (*x > 0.0) == (*y > 0.0) && (*x < 0.0) == (*y < 0.0))
}

pub fn run(cfg: &GradCheckConfig) -> GradCheckReport {
    let mut report = GradCheckReport {
        max_relative_error: 0.0,
        coordinates_checked: 0,
        coordinates_skipped: 0,
        trials_skipped: 0,
        worst: None,
        tolerance: cfg.tolerance,
    };
    let exec = Execution::Sequential;
    for trial in 0..cfg.trials {
        let Instance {
            mut params,
            examples,
            l2,
        } = random_instance(cfg, trial);
        let base_kinks = kink_distances(&params, &examples);
        if base_kinks.iter().any(|k| k.abs() < cfg.kink_exclusion) {
            report.trials_skipped += 1;
            continue;
        }
        let (_, mut grad) = objective_and_gradient(&params, &examples, l2, exec).expect("finite instance");
        if cfg.corrupt_gradient {
            let i = params.layout().entities_len();
            grad[i] += 1e-2 * (1.0 + grad[i].abs());
        }
        for (i, &analytic) in grad.iter().enumerate() {
            let x = params.as_slice()[i];
            params.as_mut_slice()[i] = x + cfg.step;
            let plus = objective(&params, &examples, l2, exec).expect("finite");
            let kinks_plus = kink_distances(&params, &examples);
            params.as_mut_slice()[i] = x - cfg.step;
            let minus = objective(&params, &examples, l2, exec).expect("finite");
            let kinks_minus = kink_distances(&params, &examples);
            params.as_mut_slice()[i] = x;

            if !same_side(&base_kinks, &kinks_plus) || !same_side(&base_kinks, &kinks_minus) {
                report.coordinates_skipped += 1;
                continue;
            }
            let numeric = (plus - minus) / (2.0 * cfg.step);
            let err = relative_error(analytic, numeric);
            report.coordinates_checked += 1;
            if err > report.max_relative_error || report.worst.is_none() {
                report.max_relative_error = report.max_relative_error.max(err);
                report.worst = Some(Worst {
                    trial,
                    coordinate: params.layout().describe(i),
                    analytic,
                    numeric,
                    relative_error: err,
                });
            }
        }
    }
    report
}
