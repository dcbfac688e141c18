//! Relation scorers and the flat parameter store they read from.
//!
//! All trainable values (entity vectors, per-relation records, shared
//! matrices) live in one contiguous `Vec<f64>` described by a [`Layout`].
//! Scorers borrow typed views into it. Every model is exposed through an
//! oriented *plausibility* where higher always means more likely true:
//! the tensor and bilinear scores are used as-is, the similarity distance
//! and the Hadamard score are negated.

pub mod bilinear;
pub mod hadamard;
pub(crate) mod linalg;
pub mod ntn;
pub mod similarity;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::Rng;

use crate::embeddings::EmbeddingMatrix;
use crate::error::{Error, Result};
use crate::kb::{EntityId, RelationId, Triplet};
use crate::seed;

pub use bilinear::score_bilinear;
pub use hadamard::{score_hadamard, HadamardParams};
pub use ntn::{bilinear_tensor_product, score_ntn, score_ntn_with, Activation, NtnParams};
pub use similarity::{score_similarity, SimilarityParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModelKind {
    Ntn,
    Bilinear,
    Similarity,
    Hadamard,
}

impl ModelKind {
    pub const ALL: [ModelKind; 4] = [
        ModelKind::Ntn,
        ModelKind::Bilinear,
        ModelKind::Similarity,
        ModelKind::Hadamard,
    ];

    pub fn code(self) -> u8 {
        match self {
            ModelKind::Ntn => 0,
            ModelKind::Bilinear => 1,
            ModelKind::Similarity => 2,
            ModelKind::Hadamard => 3,
        }
    }

    pub fn from_code(code: u8) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.code() == code)
    }

    /// Whether the raw score is negated to obtain plausibility.
    pub fn lower_is_plausible(self) -> bool {
        matches!(self, ModelKind::Similarity | ModelKind::Hadamard)
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ModelKind::Ntn => "ntn",
            ModelKind::Bilinear => "bilinear",
            ModelKind::Similarity => "similarity",
            ModelKind::Hadamard => "hadamard",
        })
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.to_string() == s)
            .ok_or_else(|| Error::Config(format!("unknown model kind `{s}`")))
    }
}

/// Shape of a model's parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ModelShape {
    pub kind: ModelKind,
    pub dim: usize,
    /// Tensor slices; only meaningful for the tensor network.
    pub slices: usize,
    pub num_entities: usize,
    pub num_relations: usize,
    /// One `U` for all relations instead of one per relation.
    pub share_u: bool,
}

impl ModelShape {
    /// Puts the shape in canonical form: `slices` is 1 for the bilinear
    /// model and 0 for the baselines, and `share_u` is cleared unless the
    /// tensor network has more than one relation (where it is a no-op).
    pub fn canonical(mut self) -> Self {
        match self.kind {
            ModelKind::Ntn => {}
            ModelKind::Bilinear => self.slices = 1,
            ModelKind::Similarity | ModelKind::Hadamard => self.slices = 0,
        }
        if self.kind != ModelKind::Ntn || self.num_relations <= 1 {
            self.share_u = false;
        }
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 {
            return Err(Error::Config("dimension must be positive".into()));
        }
        if self.kind == ModelKind::Ntn && self.slices == 0 {
            return Err(Error::Config("tensor network needs at least one slice".into()));
        }
        Ok(())
    }
}

/// A named, contiguous block of the flat parameter vector.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Field {
    pub name: &'static str,
    pub offset: usize,
    pub len: usize,
}

/// Offsets of every parameter group inside the flat vector.
///
/// Order: entity vectors by id, then one record per relation in id order,
/// then shared parameters.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Layout {
    shape: ModelShape,
    record_fields: Vec<Field>,
    shared_fields: Vec<Field>,
    record_len: usize,
    shared_len: usize,
}

type FieldSpec = Vec<(&'static str, usize)>;

fn fields(spec: &[(&'static str, usize)]) -> (Vec<Field>, usize) {
    let mut offset = 0;
    let out = spec
        .iter()
        .filter(|(_, len)| *len > 0)
        .map(|&(name, len)| {
            let f = Field { name, offset, len };
            offset += len;
            f
        })
        .collect();
    (out, offset)
}

impl Layout {
    pub fn new(shape: ModelShape) -> Self {
        let shape = shape.canonical();
        let (d, k) = (shape.dim, shape.slices);
        let (record, shared): (FieldSpec, FieldSpec) = match shape.kind {
            ModelKind::Ntn => {
                let u = if shape.share_u { 0 } else { k };
                let shared_u = if shape.share_u { k } else { 0 };
                (
                    vec![("W", d * d * k), ("V", k * 2 * d), ("U", u), ("b", k)],
                    vec![("U", shared_u)],
                )
            }
            ModelKind::Bilinear => (vec![("W", d * d)], vec![]),
            ModelKind::Similarity => (vec![("W_left", d * d), ("W_right", d * d)], vec![]),
            ModelKind::Hadamard => (
                vec![("e_R", d)],
                vec![
                    ("W1", d * d),
                    ("W2", d * d),
                    ("Wrel1", d * d),
                    ("Wrel2", d * d),
                    ("b1", d),
                    ("b2", d),
                ],
            ),
        };
        let (record_fields, record_len) = fields(&record);
        let (shared_fields, shared_len) = fields(&shared);
        Layout {
            shape,
            record_fields,
            shared_fields,
            record_len,
            shared_len,
        }
    }

    pub fn shape(&self) -> &ModelShape {
        &self.shape
    }

    pub fn entities_len(&self) -> usize {
        self.shape.num_entities * self.shape.dim
    }

    pub fn record_len(&self) -> usize {
        self.record_len
    }

    pub fn shared_len(&self) -> usize {
        self.shared_len
    }

    pub fn entity_offset(&self, e: EntityId) -> usize {
        e.0 * self.shape.dim
    }

    pub fn record_offset(&self, r: RelationId) -> usize {
        self.entities_len() + r.0 * self.record_len
    }

    pub fn shared_offset(&self) -> usize {
        self.entities_len() + self.shape.num_relations * self.record_len
    }

    pub fn total_len(&self) -> usize {
        self.shared_offset() + self.shared_len
    }

    pub fn record_fields(&self) -> &[Field] {
        &self.record_fields
    }

    pub fn shared_fields(&self) -> &[Field] {
        &self.shared_fields
    }

    fn record_field(&self, name: &str) -> Option<&Field> {
        self.record_fields.iter().find(|f| f.name == name)
    }

    fn shared_field(&self, name: &str) -> Option<&Field> {
        self.shared_fields.iter().find(|f| f.name == name)
    }

    /// Human-readable name of the group containing flat index `i`.
    pub fn describe(&self, i: usize) -> String {
        let d = self.shape.dim;
        if i < self.entities_len() {
            return format!("embeddings[entity {}][{}]", i / d, i % d);
        }
        if i < self.shared_offset() {
            let rel = (i - self.entities_len()) / self.record_len;
            let within = (i - self.entities_len()) % self.record_len;
            let f = self
                .record_fields
                .iter()
                .find(|f| within < f.offset + f.len)
                .expect("offset inside record");
            return format!("relation {rel}/{}[{}]", f.name, within - f.offset);
        }
        let within = i - self.shared_offset();
        match self.shared_fields.iter().find(|f| within < f.offset + f.len) {
            Some(f) => format!("shared/{}[{}]", f.name, within - f.offset),
            None => format!("out of range ({i})"),
        }
    }

    /// Coarse group name (no indices) for index `i`.
    pub fn group(&self, i: usize) -> String {
        let full = self.describe(i);
        match full.find('[') {
            Some(p) if full.starts_with("embeddings") => full[..p].to_owned(),
            _ => full.rsplit_once('[').map(|(g, _)| g.to_owned()).unwrap_or(full),
        }
    }
}

/// Borrowed parameters of one relation.
#[derive(Debug, Clone, Copy)]
pub enum RelationView<'a> {
    Ntn(NtnParams<'a>),
    Bilinear { dim: usize, w: &'a [f64] },
    Similarity(SimilarityParams<'a>),
    Hadamard(HadamardParams<'a>),
}

/// Precomputed left-hand side of `(e1, R, ?)`.
pub enum RightQuery<'a> {
    Ntn(ntn::NtnQuery<'a>),
    Bilinear(Vec<f64>),
    Similarity {
        params: SimilarityParams<'a>,
        left: Vec<f64>,
    },
    Hadamard {
        params: HadamardParams<'a>,
        left: Vec<f64>,
    },
}

impl RightQuery<'_> {
    /// Plausibility of the triplet completed with `e2`.
    pub fn plausibility(&self, e2: &[f64]) -> f64 {
        match self {
            RightQuery::Ntn(q) => q.score(e2),
            RightQuery::Bilinear(left) => linalg::dot(left, e2),
            RightQuery::Similarity { params, left } => -similarity::l1_distance(left, &params.project_right(e2)),
            RightQuery::Hadamard { params, left } => linalg::dot(left, &params.right_gated(e2)),
        }
    }
}

impl<'a> RelationView<'a> {
    pub fn prepare_right(&self, e1: &[f64]) -> RightQuery<'a> {
        match *self {
            RelationView::Ntn(p) => RightQuery::Ntn(ntn::NtnQuery::new(p, e1, Activation::Tanh)),
            RelationView::Bilinear { w, .. } => RightQuery::Bilinear(bilinear::left_product(w, e1)),
            RelationView::Similarity(p) => RightQuery::Similarity {
                params: p,
                left: p.project_left(e1),
            },
            RelationView::Hadamard(p) => RightQuery::Hadamard {
                params: p,
                left: p.left_gated(e1),
            },
        }
    }

    pub fn plausibility(&self, e1: &[f64], e2: &[f64]) -> f64 {
        self.prepare_right(e1).plausibility(e2)
    }

    /// Score in the model's native orientation.
    pub fn raw_score(&self, e1: &[f64], e2: &[f64]) -> f64 {
        match self {
            RelationView::Ntn(p) => score_ntn(p, e1, e2),
            RelationView::Bilinear { w, .. } => score_bilinear(w, e1, e2),
            RelationView::Similarity(p) => score_similarity(p, e1, e2),
            RelationView::Hadamard(p) => score_hadamard(p, e1, e2),
        }
    }
}

/// All trainable parameters of a model.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    layout: Layout,
    theta: Vec<f64>,
}

impl ModelParams {
    /// Zero-filled parameters.
    pub fn zeros(shape: ModelShape) -> Self {
        let layout = Layout::new(shape);
        let theta = vec![0.0; layout.total_len()];
        ModelParams { layout, theta }
    }

    /// Entity rows copied from `embeddings`; relation and shared parameters
    /// drawn uniformly from `±1/√(2d)`.
    pub fn init(shape: ModelShape, embeddings: &EmbeddingMatrix, seed: u64) -> Result<Self> {
        shape.validate()?;
        if embeddings.dimension() != shape.dim || embeddings.rows() != shape.num_entities {
            return Err(Error::Config(format!(
                "embedding matrix is {}×{}, model expects {}×{}",
                embeddings.rows(),
                embeddings.dimension(),
                shape.num_entities,
                shape.dim
            )));
        }
        let mut params = Self::zeros(shape);
        let n = params.layout.entities_len();
        params.theta[..n].copy_from_slice(embeddings.as_slice());
        let range = 1.0 / (2.0 * shape.dim as f64).sqrt();
        let mut rng = seed::rng(seed, &[seed::stream::RELATION_INIT]);
        for x in &mut params.theta[n..] {
            *x = rng.gen_range(-range..=range);
        }
        Ok(params)
    }

    /// Wraps a flat vector; fails if its length does not match `layout`.
    pub fn from_flat(layout: Layout, theta: Vec<f64>) -> Result<Self> {
        if theta.len() != layout.total_len() {
            return Err(Error::Config(format!(
                "flat vector has {} values, layout needs {}",
                theta.len(),
                layout.total_len()
            )));
        }
        Ok(ModelParams { layout, theta })
    }

    pub fn layout(&self) -> &Layout {
        &self.layout
    }

    pub fn shape(&self) -> &ModelShape {
        &self.layout.shape
    }

    pub fn kind(&self) -> ModelKind {
        self.layout.shape.kind
    }

    pub fn dim(&self) -> usize {
        self.layout.shape.dim
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.theta
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.theta
    }

    pub fn into_flat(self) -> Vec<f64> {
        self.theta
    }

    pub fn entity(&self, e: EntityId) -> &[f64] {
        let o = self.layout.entity_offset(e);
        &self.theta[o..o + self.dim()]
    }

    pub fn record(&self, r: RelationId) -> &[f64] {
        let o = self.layout.record_offset(r);
        &self.theta[o..o + self.layout.record_len]
    }

    pub fn record_mut(&mut self, r: RelationId) -> &mut [f64] {
        let o = self.layout.record_offset(r);
        let len = self.layout.record_len;
        &mut self.theta[o..o + len]
    }

    pub fn shared(&self) -> &[f64] {
        let o = self.layout.shared_offset();
        &self.theta[o..]
    }

    pub fn shared_mut(&mut self) -> &mut [f64] {
        let o = self.layout.shared_offset();
        &mut self.theta[o..]
    }

    pub fn entity_mut(&mut self, e: EntityId) -> &mut [f64] {
        let o = self.layout.entity_offset(e);
        let d = self.dim();
        &mut self.theta[o..o + d]
    }

    /// Named field of relation `r`'s record, or of the shared block.
    pub fn field(&self, r: RelationId, name: &str) -> Option<&[f64]> {
        if let Some(f) = self.layout.record_field(name) {
            return Some(&self.record(r)[f.offset..f.offset + f.len]);
        }
        self.layout
            .shared_field(name)
            .map(|f| &self.shared()[f.offset..f.offset + f.len])
    }

    pub fn field_mut(&mut self, r: RelationId, name: &str) -> Option<&mut [f64]> {
        if let Some(f) = self.layout.record_field(name).cloned() {
            return Some(&mut self.record_mut(r)[f.offset..f.offset + f.len]);
        }
        let f = self.layout.shared_field(name).cloned()?;
        Some(&mut self.shared_mut()[f.offset..f.offset + f.len])
    }

    pub fn relation(&self, r: RelationId) -> RelationView<'_> {
        let d = self.dim();
        let get = |name| self.field(r, name).expect("field present for model kind");
        match self.kind() {
            ModelKind::Ntn => RelationView::Ntn(NtnParams {
                dim: d,
                slices: self.shape().slices,
                w: get("W"),
                v: get("V"),
                u: get("U"),
                b: get("b"),
            }),
            ModelKind::Bilinear => RelationView::Bilinear { dim: d, w: get("W") },
            ModelKind::Similarity => RelationView::Similarity(SimilarityParams {
                dim: d,
                w_left: get("W_left"),
                w_right: get("W_right"),
            }),
            ModelKind::Hadamard => RelationView::Hadamard(HadamardParams {
                dim: d,
                w1: get("W1"),
                w2: get("W2"),
                w_rel1: get("Wrel1"),
                w_rel2: get("Wrel2"),
                b1: get("b1"),
                b2: get("b2"),
                e_rel: get("e_R"),
            }),
        }
    }

    /// Oriented plausibility of a triplet (higher = more likely true).
    pub fn plausibility(&self, t: &Triplet) -> f64 {
        self.relation(t.relation)
            .plausibility(self.entity(t.left), self.entity(t.right))
    }

    /// Plausibility for arbitrary entity vectors, e.g. ones composed from
    /// word vectors for names outside the knowledge base.
    pub fn plausibility_of_vectors(&self, e1: &[f64], r: RelationId, e2: &[f64]) -> f64 {
        self.relation(r).plausibility(e1, e2)
    }

    /// Index of the first non-finite value, if any.
    pub fn first_non_finite(&self) -> Option<usize> {
        self.theta.iter().position(|x| !x.is_finite())
    }
}

/// Gradient contributions, sparse over relations and entities.
///
/// Keys are ordered so that folding into a dense vector is deterministic.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct GradientSet {
    pub relations: BTreeMap<usize, Vec<f64>>,
    pub shared: Vec<f64>,
    pub entities: BTreeMap<usize, Vec<f64>>,
}

impl GradientSet {
    pub fn new(layout: &Layout) -> Self {
        GradientSet {
            relations: BTreeMap::new(),
            shared: vec![0.0; layout.shared_len()],
            entities: BTreeMap::new(),
        }
    }

    /// Adds `coeff · ∇ plausibility(e1, r, e2)` over every parameter and
    /// both entity vectors.
    pub fn add_plausibility_grad(
        &mut self,
        params: &ModelParams,
        left: EntityId,
        r: RelationId,
        right: EntityId,
        coeff: f64,
    ) {
        let layout = params.layout();
        let d = params.dim();
        let (e1, e2) = (params.entity(left), params.entity(right));
        let mut g1 = vec![0.0; d];
        let mut g2 = vec![0.0; d];
        if self.shared.len() != layout.shared_len() {
            self.shared = vec![0.0; layout.shared_len()];
        }
        let record = self
            .relations
            .entry(r.0)
            .or_insert_with(|| vec![0.0; layout.record_len()]);
        let shared = &mut self.shared;

        // Splits a record/shared buffer into its named fields, in layout order.
        fn split<'b>(mut buf: &'b mut [f64], fields: &[Field]) -> Vec<&'b mut [f64]> {
            let mut out = Vec::with_capacity(fields.len());
            for f in fields {
                let (head, tail) = buf.split_at_mut(f.len);
                out.push(head);
                buf = tail;
            }
            out
        }

        match params.relation(r) {
            RelationView::Ntn(p) => {
                let mut rec = split(record, layout.record_fields()).into_iter();
                let w = rec.next().unwrap();
                let v = rec.next().unwrap();
                let u: &mut [f64] = if layout.shape().share_u {
                    &mut shared[..]
                } else {
                    rec.next().unwrap()
                };
                let b = rec.next().unwrap();
                let grad = ntn::NtnGrad { w, v, u, b };
                ntn::accumulate_ntn_grad(&p, e1, e2, Activation::Tanh, coeff, grad, &mut g1, &mut g2);
            }
            RelationView::Bilinear { w, .. } => {
                bilinear::accumulate_bilinear_grad(w, e1, e2, coeff, record, &mut g1, &mut g2);
            }
            RelationView::Similarity(p) => {
                let (gl, gr) = record.split_at_mut(layout.record_len() / 2);
                // plausibility = −distance
                similarity::accumulate_similarity_grad(&p, e1, e2, -coeff, gl, gr, &mut g1, &mut g2);
            }
            RelationView::Hadamard(p) => {
                let mut s = split(shared, layout.shared_fields()).into_iter();
                let grad = hadamard::HadamardGrad {
                    w1: s.next().unwrap(),
                    w2: s.next().unwrap(),
                    w_rel1: s.next().unwrap(),
                    w_rel2: s.next().unwrap(),
                    b1: s.next().unwrap(),
                    b2: s.next().unwrap(),
                    e_rel: record,
                };
                // plausibility = −score
                hadamard::accumulate_hadamard_grad(&p, e1, e2, -coeff, grad, &mut g1, &mut g2);
            }
        }

        for (id, g) in [(left.0, g1), (right.0, g2)] {
            let slot = self.entities.entry(id).or_insert_with(|| vec![0.0; d]);
            linalg::axpy(slot, 1.0, &g);
        }
    }

    /// Adds this set into a dense gradient laid out by `layout`.
    pub fn add_to_dense(&self, layout: &Layout, dense: &mut [f64]) {
        assert_eq!(dense.len(), layout.total_len(), "dense gradient length");
        let d = layout.shape().dim;
        for (&e, g) in &self.entities {
            let o = layout.entity_offset(EntityId(e));
            linalg::axpy(&mut dense[o..o + d], 1.0, g);
        }
        for (&r, g) in &self.relations {
            let o = layout.record_offset(RelationId(r));
            linalg::axpy(&mut dense[o..o + layout.record_len()], 1.0, g);
        }
        if !self.shared.is_empty() {
            let o = layout.shared_offset();
            linalg::axpy(&mut dense[o..], 1.0, &self.shared);
        }
    }

    pub fn to_dense(&self, layout: &Layout) -> Vec<f64> {
        let mut dense = vec![0.0; layout.total_len()];
        self.add_to_dense(layout, &mut dense);
        dense
    }

    /// Folds `other` into `self`.
    pub fn merge(&mut self, other: &GradientSet) {
        for (&r, g) in &other.relations {
            match self.relations.get_mut(&r) {
                Some(slot) => linalg::axpy(slot, 1.0, g),
                None => {
                    self.relations.insert(r, g.clone());
                }
            }
        }
        for (&e, g) in &other.entities {
            match self.entities.get_mut(&e) {
                Some(slot) => linalg::axpy(slot, 1.0, g),
                None => {
                    self.entities.insert(e, g.clone());
                }
            }
        }
        if self.shared.len() < other.shared.len() {
            self.shared.resize(other.shared.len(), 0.0);
        }
        linalg::axpy(&mut self.shared[..other.shared.len()], 1.0, &other.shared);
    }

    pub fn is_zero(&self) -> bool {
        self.relations
            .values()
            .chain(self.entities.values())
            .chain(std::iter::once(&self.shared))
            .all(|g| g.iter().all(|&x| x == 0.0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn shape(kind: ModelKind) -> ModelShape {
        ModelShape {
            kind,
            dim: 3,
            slices: 2,
            num_entities: 4,
            num_relations: 2,
            share_u: false,
        }
    }

    #[test]
    fn layout_sizes() {
        let ntn = Layout::new(shape(ModelKind::Ntn));
        assert_eq!(ntn.entities_len(), 12);
        assert_eq!(ntn.record_len(), 18 + 12 + 2 + 2);
        assert_eq!(ntn.shared_len(), 0);
        assert_eq!(ntn.total_len(), 12 + 2 * 34);

        let shared = Layout::new(ModelShape {
            share_u: true,
            ..shape(ModelKind::Ntn)
        });
        assert_eq!(shared.record_len(), 32);
        assert_eq!(shared.shared_len(), 2);

        let had = Layout::new(shape(ModelKind::Hadamard));
        assert_eq!(had.record_len(), 3);
        assert_eq!(had.shared_len(), 4 * 9 + 6);
        assert_eq!(had.shape().slices, 0);

        let bil = Layout::new(shape(ModelKind::Bilinear));
        assert_eq!(bil.shape().slices, 1);
        assert_eq!(bil.record_len(), 9);
    }

    #[test]
    fn share_u_is_noop_for_single_relation() {
        let s = ModelShape {
            share_u: true,
            num_relations: 1,
            ..shape(ModelKind::Ntn)
        };
        assert!(!s.canonical().share_u);
    }

    #[test]
    fn describe_indices() {
        let l = Layout::new(shape(ModelKind::Ntn));
        assert_eq!(l.describe(4), "embeddings[entity 1][1]");
        assert_eq!(l.describe(12), "relation 0/W[0]");
        assert_eq!(l.describe(12 + 34 + 18), "relation 1/V[0]");
        assert_eq!(l.group(12 + 34 + 18), "relation 1/V");
        assert_eq!(l.group(5), "embeddings");
    }

    #[test]
    fn kind_codes_roundtrip() {
        for k in ModelKind::ALL {
            assert_eq!(ModelKind::from_code(k.code()), Some(k));
            assert_eq!(k.to_string().parse::<ModelKind>().unwrap(), k);
        }
        assert!(ModelKind::from_code(9).is_none());
    }

    #[test]
    fn plausibility_orientation() {
        for kind in ModelKind::ALL {
            let s = shape(kind);
            let emb = EmbeddingMatrix::from_rows(3, (0..12).map(|i| (i as f64 * 0.37).sin()).collect());
            let p = ModelParams::init(s, &emb, 11).unwrap();
            let t = Triplet::new(0, 1, 2);
            let raw = p.relation(t.relation).raw_score(p.entity(t.left), p.entity(t.right));
            let plaus = p.plausibility(&t);
            let expect = if kind.lower_is_plausible() { -raw } else { raw };
            assert!(
                (plaus - expect).abs() <= 1e-12 * (1.0 + raw.abs()),
                "{kind}: {plaus} vs {expect}"
            );
        }
    }
}
