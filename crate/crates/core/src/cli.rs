//! Command-line interface.
//!
//! Exit codes: 0 success, 1 data or numerical error, 2 usage error.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::checkpoint::Checkpoint;
use crate::embeddings::{init_entity_embeddings, init_entity_vector, load_word_vectors, InitMode};
use crate::error::{Error, Result};
use crate::evaluation::{classify, evaluate_ranking, fit_thresholds, generate_negatives, ThresholdTable};
use crate::gradcheck::{self, GradCheckConfig};
use crate::kb::{load_split, KnowledgeBase, RelationId, VocabMode};
use crate::models::ModelKind;
use crate::par::Execution;
use crate::seed;
use crate::training::{train_with_callback, Optimizer, SidePolicy, TrainingConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "ntn-kb",
    version,
    about = "Knowledge-base completion with neural tensor networks"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train a model and write the best-dev-accuracy checkpoint.
    Train(TrainArgs),
    /// Rank right entities for test triplets and report recall@K.
    EvalRank(EvalRankArgs),
    /// Fit per-relation thresholds on dev and report test accuracy.
    EvalClass(EvalClassArgs),
    /// Score a single triplet.
    Score(ScoreArgs),
    /// Compare analytic gradients with central finite differences.
    Gradcheck(GradcheckArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModelArg {
    Ntn,
    Bilinear,
    Similarity,
    Hadamard,
}

impl From<ModelArg> for ModelKind {
    fn from(m: ModelArg) -> Self {
        match m {
            ModelArg::Ntn => ModelKind::Ntn,
            ModelArg::Bilinear => ModelKind::Bilinear,
            ModelArg::Similarity => ModelKind::Similarity,
            ModelArg::Hadamard => ModelKind::Hadamard,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum InitArg {
    Random,
    WordAverage,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SideArg {
    Right,
    Left,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OptimizerArg {
    Lbfgs,
    Sgd,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub train: PathBuf,
    #[arg(long)]
    pub dev: PathBuf,
    #[arg(long)]
    pub test: PathBuf,
    #[arg(long, value_enum, default_value = "ntn")]
    pub model: ModelArg,
    #[arg(long, default_value_t = 100)]
    pub dim: usize,
    #[arg(long, default_value_t = 4)]
    pub slices: usize,
    #[arg(long, default_value_t = 10)]
    pub corruptions: usize,
    #[arg(long, default_value_t = 100)]
    pub epochs: usize,
    /// Minibatch size.
    #[arg(long, default_value_t = 1000)]
    pub batch: usize,
    #[arg(long, default_value_t = 1e-4)]
    pub l2: f64,
    #[arg(long, value_enum, default_value = "random")]
    pub init: InitArg,
    /// Word-vector file, required by `--init word-average`.
    #[arg(long, required_if_eq("init", "word-average"))]
    pub vectors: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "right")]
    pub corrupt_side: SideArg,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
    /// Per-epoch `epoch<TAB>objective<TAB>dev_accuracy` log.
    #[arg(long)]
    pub metrics_out: Option<PathBuf>,
    /// Share one `U` vector across relations.
    #[arg(long)]
    pub share_u: bool,
    #[arg(long, value_enum, default_value = "lbfgs")]
    pub optimizer: OptimizerArg,
    #[arg(long, default_value_t = 0.01)]
    pub sgd_step: f64,
    #[arg(long, default_value_t = 5)]
    pub lbfgs_history: usize,
    /// L-BFGS iterations per minibatch.
    #[arg(long, default_value_t = 10)]
    pub lbfgs_iters: usize,
    /// Keep the first epoch's corruptions for the whole run.
    #[arg(long)]
    pub freeze_corruptions: bool,
    /// Also write dev-fitted thresholds (`relation<TAB>threshold`).
    #[arg(long)]
    pub thresholds_out: Option<PathBuf>,
    /// Run data-parallel loops on one thread.
    #[arg(long)]
    pub sequential: bool,
}

#[derive(Debug, Args)]
pub struct EvalRankArgs {
    #[arg(long)]
    pub checkpoint: PathBuf,
    #[arg(long)]
    pub test: PathBuf,
    /// Comma-separated cutoffs.
    #[arg(long, value_delimiter = ',', default_value = "100")]
    pub k: Vec<usize>,
}

#[derive(Debug, Args)]
pub struct EvalClassArgs {
    #[arg(long)]
    pub checkpoint: PathBuf,
    #[arg(long)]
    pub dev: PathBuf,
    #[arg(long)]
    pub test: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub neg_seed: u64,
    /// Training split; its facts are excluded from generated negatives.
    #[arg(long)]
    pub train: Option<PathBuf>,
    #[arg(long)]
    pub thresholds_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ScoreArgs {
    #[arg(long)]
    pub checkpoint: PathBuf,
    #[arg(long)]
    pub left: String,
    #[arg(long)]
    pub relation: String,
    #[arg(long)]
    pub right: String,
    /// Word vectors for composing entities absent from the checkpoint.
    #[arg(long)]
    pub vectors: Option<PathBuf>,
    /// Threshold file for a true/false verdict.
    #[arg(long)]
    pub thresholds: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct GradcheckArgs {
    #[arg(long, value_enum, default_value = "ntn")]
    pub model: ModelArg,
    #[arg(long, default_value_t = 4)]
    pub dim: usize,
    #[arg(long, default_value_t = 3)]
    pub slices: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
    #[arg(long, hide = true)]
    pub corrupt_gradient: bool,
}

/// Parses `args` (including the program name) and runs the command,
/// writing results to `out`. Returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let result = match cli.command {
        Command::Train(a) => cmd_train(&a, out),
        Command::EvalRank(a) => cmd_eval_rank(&a, out),
        Command::EvalClass(a) => cmd_eval_class(&a, out),
        Command::Score(a) => cmd_score(&a, out),
        Command::Gradcheck(a) => cmd_gradcheck(&a, out),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_FAILURE
        }
    }
}

fn training_config(a: &TrainArgs) -> TrainingConfig {
    TrainingConfig {
        model: a.model.into(),
        dim: a.dim,
        slices: a.slices,
        corruptions: a.corruptions,
        l2: a.l2,
        batch_size: a.batch,
        epochs: a.epochs,
        lbfgs_history: a.lbfgs_history,
        lbfgs_iterations: a.lbfgs_iters,
        corrupt_side: match a.corrupt_side {
            SideArg::Right => SidePolicy::Right,
            SideArg::Left => SidePolicy::Left,
            SideArg::Both => SidePolicy::Both,
        },
        seed: a.seed,
        optimizer: match a.optimizer {
            OptimizerArg::Lbfgs => Optimizer::Lbfgs,
            OptimizerArg::Sgd => Optimizer::Sgd,
        },
        sgd_step: a.sgd_step,
        share_u: a.share_u,
        freeze_corruptions: a.freeze_corruptions,
        execution: if a.sequential {
            Execution::Sequential
        } else {
            Execution::Parallel
        },
    }
}

pub fn cmd_train(a: &TrainArgs, out: &mut dyn Write) -> Result<i32> {
    let config = training_config(a);
    config.validate()?;
    let train = load_split(&a.train, VocabMode::Build)?;
    let dev = load_split(&a.dev, VocabMode::Build)?;
    let test = load_split(&a.test, VocabMode::Build)?;
    let kb = KnowledgeBase::build(&train, &dev, &test);

    let (mode, table) = match a.init {
        InitArg::Random => (InitMode::Random, None),
        InitArg::WordAverage => {
            let path = a.vectors.as_ref().expect("clap enforces --vectors");
            (InitMode::WordAverage, Some(load_word_vectors(path)?))
        }
    };
    let init = init_entity_embeddings(&kb, mode, table.as_ref(), config.seed, config.dim)?;

    let mut metrics = match &a.metrics_out {
        Some(p) => Some(BufWriter::new(File::create(p)?)),
        None => None,
    };
    let mut io_error: Option<io::Error> = None;
    let outcome = train_with_callback(&kb, &config, &init, |m| {
        if let Some(w) = metrics.as_mut() {
            if let Err(e) = writeln!(w, "{m}").and_then(|_| w.flush()) {
                io_error.get_or_insert(e);
            }
        }
    })?;
    if let Some(e) = io_error {
        return Err(e.into());
    }

    let best_accuracy = outcome.best_dev_accuracy();
    let best_epoch = outcome.best_epoch;
    let checkpoint = Checkpoint::new(outcome.params, kb.entities().clone(), kb.relations().clone())?;
    checkpoint.save(&a.out)?;

    if let Some(path) = &a.thresholds_out {
        let negs = generate_negatives(&kb, &kb.dev, seed::derive(config.seed, &[seed::stream::DEV_NEGATIVES]));
        let table = fit_thresholds(&checkpoint.params, &kb.dev, &negs);
        std::fs::write(path, table.to_tsv(kb.relations().names()))?;
    }

    writeln!(out, "best_epoch\t{best_epoch}")?;
    writeln!(out, "dev_accuracy\t{best_accuracy}")?;
    Ok(EXIT_OK)
}

fn frozen_kb(ck: &Checkpoint, train: Option<&PathBuf>, dev: Option<&PathBuf>, test: &PathBuf) -> Result<KnowledgeBase> {
    let mode = VocabMode::Frozen {
        entities: &ck.entities,
        relations: &ck.relations,
    };
    let load = |p: Option<&PathBuf>| p.map_or(Ok(Vec::new()), |p| load_split(p, mode));
    let train = load(train)?;
    let dev = load(dev)?;
    let test = load_split(test, mode)?;
    KnowledgeBase::with_vocabulary(ck.entities.clone(), ck.relations.clone(), &train, &dev, &test)
}

pub fn cmd_eval_rank(a: &EvalRankArgs, out: &mut dyn Write) -> Result<i32> {
    if a.k.contains(&0) {
        return Err(Error::Config("--k values must be at least 1".into()));
    }
    let ck = Checkpoint::load(&a.checkpoint)?;
    let kb = frozen_kb(&ck, None, None, &a.test)?;
    let report = evaluate_ranking(&ck.params, &kb.test, &a.k, Execution::Parallel);
    write!(out, "{report}")?;
    Ok(EXIT_OK)
}

pub fn cmd_eval_class(a: &EvalClassArgs, out: &mut dyn Write) -> Result<i32> {
    let ck = Checkpoint::load(&a.checkpoint)?;
    let kb = frozen_kb(&ck, a.train.as_ref(), Some(&a.dev), &a.test)?;
    if kb.num_entities() < 2 {
        return Err(Error::Config("classification needs at least two entities".into()));
    }
    let dev_neg = generate_negatives(&kb, &kb.dev, seed::derive(a.neg_seed, &[seed::stream::DEV_NEGATIVES]));
    let test_neg = generate_negatives(&kb, &kb.test, seed::derive(a.neg_seed, &[seed::stream::TEST_NEGATIVES]));
    let table = fit_thresholds(&ck.params, &kb.dev, &dev_neg);
    if let Some(path) = &a.thresholds_out {
        std::fs::write(path, table.to_tsv(ck.relations.names()))?;
    }
    let report = classify(&ck.params, &table, &kb.test, &test_neg);
    writeln!(out, "dev_accuracy\t{}", table.dev_accuracy())?;
    write!(out, "{}", report.render(ck.relations.names()))?;
    Ok(EXIT_OK)
}

pub fn cmd_score(a: &ScoreArgs, out: &mut dyn Write) -> Result<i32> {
    let ck = Checkpoint::load(&a.checkpoint)?;
    let relation = ck
        .relations
        .get(&a.relation)
        .map(RelationId)
        .ok_or_else(|| Error::Vocabulary {
            kind: "relation",
            token: a.relation.clone(),
        })?;
    let table = match &a.vectors {
        Some(p) => Some(load_word_vectors(p)?),
        None => None,
    };
    let d = ck.params.dim();
    if let Some(t) = &table {
        if t.dimension() != d {
            return Err(Error::Config(format!(
                "word vectors have dimension {}, checkpoint has {d}",
                t.dimension()
            )));
        }
    }
    let vector = |name: &str| -> Result<Vec<f64>> {
        if let Some(id) = ck.entities.get(name) {
            return Ok(ck.params.entity(crate::kb::EntityId(id)).to_vec());
        }
        match &table {
            Some(t) => Ok(init_entity_vector(
                name,
                ck.entities.len(),
                InitMode::WordAverage,
                Some(t),
                a.seed,
                d,
            )),
            None => Err(Error::Vocabulary {
                kind: "entity",
                token: name.to_owned(),
            }),
        }
    };
    let (e1, e2) = (vector(&a.left)?, vector(&a.right)?);
    let p = ck.params.plausibility_of_vectors(&e1, relation, &e2);
    writeln!(out, "plausibility\t{p}")?;
    if let Some(path) = &a.thresholds {
        let text = std::fs::read_to_string(path)?;
        let table = ThresholdTable::from_tsv(&text, ck.relations.names()).map_err(|m| Error::parse(path, 0, m))?;
        writeln!(out, "threshold\t{}", table.threshold(relation))?;
        writeln!(out, "verdict\t{}", table.predict(relation, p))?;
    }
    Ok(EXIT_OK)
}

pub fn cmd_gradcheck(a: &GradcheckArgs, out: &mut dyn Write) -> Result<i32> {
    if a.dim == 0 || (a.model == ModelArg::Ntn && a.slices == 0) {
        return Err(Error::Config("--dim and --slices must be positive".into()));
    }
    let mut cfg = GradCheckConfig::new(a.model.into(), a.dim, a.slices, a.seed, a.trials);
    cfg.corrupt_gradient = a.corrupt_gradient;
    let report = gradcheck::run(&cfg);
    writeln!(out, "max_relative_error\t{:e}", report.max_relative_error)?;
    writeln!(out, "coordinates_checked\t{}", report.coordinates_checked)?;
    writeln!(out, "coordinates_skipped\t{}", report.coordinates_skipped)?;
    writeln!(out, "trials_skipped\t{}", report.trials_skipped)?;
    if report.passed() {
        return Ok(EXIT_OK);
    }
    if let Some(w) = &report.worst {
        writeln!(
            out,
            "failed_coordinate\ttrial {} {} (analytic {:e}, numeric {:e})",
            w.trial, w.coordinate, w.analytic, w.numeric
        )?;
    }
    Ok(EXIT_FAILURE)
}
