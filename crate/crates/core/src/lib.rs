//! Knowledge-base completion with neural tensor networks.
//!
//! Entities are trainable vectors; each relation owns a scoring function
//! (a bilinear tensor layer, or one of the bilinear, distance and
//! gated-product baselines). Models are trained with a contrastive
//! max-margin objective and minibatched L-BFGS, and evaluated by raw
//! right-entity ranking (recall@K) and by per-relation thresholded triplet
//! classification.
//!
//! Data-parallel loops go through [`par`], which runs on rayon when the
//! `parallel` feature is enabled and reduces in a fixed order either way.

pub mod checkpoint;
pub mod cli;
pub mod embeddings;
pub mod error;
pub mod evaluation;
pub mod fixture;
pub mod gradcheck;
pub mod kb;
pub mod models;
pub mod par;
pub mod seed;
pub mod training;

pub use checkpoint::Checkpoint;
pub use embeddings::{EmbeddingMatrix, InitMode, WordVectorTable};
pub use error::{Error, Result};
pub use kb::{EntityId, KnowledgeBase, RawTriple, RelationId, Triplet};
pub use models::{ModelKind, ModelParams, ModelShape};
pub use par::Execution;
pub use training::{train, TrainingConfig, TrainingOutcome};
