//! Pretrained word vectors and entity-embedding initialization.

use std::collections::HashMap;
use std::fs;
use std::path::Path;

use rand::Rng;

use crate::error::{Error, Result};
use crate::kb::KnowledgeBase;
use crate::seed;

/// Half-width of the uniform noise used for out-of-vocabulary tokens and
/// entities with no known tokens.
pub const OOV_INIT_RANGE: f64 = 0.001;
/// Half-width of the uniform noise used in random-init mode.
pub const RANDOM_INIT_RANGE: f64 = 0.1;

#[derive(Debug, Clone, PartialEq)]
pub struct WordVectorTable {
    dimension: usize,
    entries: HashMap<String, Vec<f64>>,
}

impl WordVectorTable {
    /// Builds a table from `(token, vector)` pairs. Later duplicates are
    /// ignored.
    pub fn from_entries<I>(dimension: usize, entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (String, Vec<f64>)>,
    {
        let mut table = WordVectorTable {
            dimension,
            entries: HashMap::new(),
        };
        for (token, v) in entries {
            if v.len() != dimension {
                return Err(Error::Config(format!(
                    "word vector for `{token}` has length {}, expected {dimension}",
                    v.len()
                )));
            }
            table.entries.entry(token).or_insert(v);
        }
        Ok(table)
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn get(&self, token: &str) -> Option<&[f64]> {
        self.entries.get(token).map(Vec::as_slice)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Parses a `token v1 ... vd` text file, with an optional leading
/// `count dim` header line.
pub fn load_word_vectors(path: impl AsRef<Path>) -> Result<WordVectorTable> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)?;
    parse_word_vectors(&text, path)
}

pub(crate) fn parse_word_vectors(text: &str, path: &Path) -> Result<WordVectorTable> {
    let mut dimension: Option<usize> = None;
    let mut entries: HashMap<String, Vec<f64>> = HashMap::new();
    let mut seen_data = false;

    for (lineno, line) in text.lines().enumerate() {
        let lineno = lineno + 1;
        let line = line.strip_suffix('\r').unwrap_or(line);
        if line.trim().is_empty() {
            continue;
        }
        let mut fields = line.split(' ');
        let token = fields.next().unwrap_or_default();
        let rest: Vec<&str> = fields.filter(|f| !f.is_empty()).collect();

        if !seen_data && dimension.is_none() && rest.len() == 1 {
            if let (Ok(_count), Ok(dim)) = (token.parse::<usize>(), rest[0].parse::<usize>()) {
                dimension = Some(dim);
                seen_data = true;
                continue;
            }
        }
        seen_data = true;

        let values = rest
            .iter()
            .map(|f| {
                f.parse::<f64>()
                    .map_err(|_| Error::parse(path, lineno, format!("non-numeric component `{f}`")))
            })
            .collect::<Result<Vec<f64>>>()?;
        match dimension {
            None => {
                if values.is_empty() {
                    return Err(Error::parse(path, lineno, "vector has no components"));
                }
                dimension = Some(values.len());
            }
            Some(d) if d != values.len() => {
                return Err(Error::parse(
                    path,
                    lineno,
                    format!("dimension mismatch: expected {d}, found {}", values.len()),
                ));
            }
            Some(_) => {}
        }
        if entries.contains_key(token) {
            log::warn!("{}:{lineno}: duplicate token `{token}` ignored", path.display());
            continue;
        }
        entries.insert(token.to_owned(), values);
    }

    Ok(WordVectorTable {
        dimension: dimension.unwrap_or(0),
        entries,
    })
}

/// Splits an entity name into lowercase word tokens.
///
/// `__ice_cream_1` becomes `["ice", "cream"]`: surrounding underscores and
/// one trailing `_<digits>` sense suffix are removed before splitting on
/// `_` and spaces.
pub fn tokenize_entity_name(name: &str) -> Vec<String> {
    let trimmed = name.trim_matches('_');
    let stem = match trimmed.rfind('_') {
        Some(pos) if pos + 1 < trimmed.len() && trimmed[pos + 1..].bytes().all(|b| b.is_ascii_digit()) => {
            &trimmed[..pos]
        }
        _ => trimmed,
    };
    stem.split(['_', ' '])
        .filter(|t| !t.is_empty())
        .map(str::to_lowercase)
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitMode {
    Random,
    WordAverage,
}

/// One trainable vector per entity, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingMatrix {
    dimension: usize,
    data: Vec<f64>,
    pub trainable: bool,
}

impl EmbeddingMatrix {
    pub fn from_rows(dimension: usize, data: Vec<f64>) -> Self {
        assert!(
            dimension > 0 && data.len().is_multiple_of(dimension),
            "ragged embedding matrix"
        );
        EmbeddingMatrix {
            dimension,
            data,
            trainable: true,
        }
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn rows(&self) -> usize {
        self.data.len() / self.dimension
    }

    pub fn row(&self, entity: usize) -> &[f64] {
        &self.data[entity * self.dimension..(entity + 1) * self.dimension]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }
}

fn uniform_fill<R: Rng>(rng: &mut R, out: &mut [f64], range: f64) {
    for x in out {
        *x = rng.gen_range(-range..=range);
    }
}

/// Initial vector for a single entity name.
///
/// The generator for entity `index` depends only on `(seed, index)`, so rows
/// are reproducible independently of each other.
pub fn init_entity_vector(
    name: &str,
    index: usize,
    mode: InitMode,
    table: Option<&WordVectorTable>,
    seed: u64,
    dimension: usize,
) -> Vec<f64> {
    let mut rng = seed::rng(seed, &[seed::stream::ENTITY_INIT, index as u64]);
    let mut out = vec![0.0; dimension];
    let table = match (mode, table) {
        (InitMode::WordAverage, Some(t)) => t,
        _ => {
            uniform_fill(&mut rng, &mut out, RANDOM_INIT_RANGE);
            return out;
        }
    };

    let tokens = tokenize_entity_name(name);
    if !tokens.iter().any(|t| table.get(t).is_some()) {
        uniform_fill(&mut rng, &mut out, OOV_INIT_RANGE);
        return out;
    }
    let mut noise = vec![0.0; dimension];
    for token in &tokens {
        let v = match table.get(token) {
            Some(v) => v,
            None => {
                uniform_fill(&mut rng, &mut noise, OOV_INIT_RANGE);
                &noise
            }
        };
        for (o, x) in out.iter_mut().zip(v) {
            *o += x;
        }
    }
    let n = tokens.len() as f64;
    for o in &mut out {
        *o /= n;
    }
    out
}

pub fn init_entity_embeddings(
    kb: &KnowledgeBase,
    mode: InitMode,
    table: Option<&WordVectorTable>,
    seed: u64,
    dimension: usize,
) -> Result<EmbeddingMatrix> {
    if dimension == 0 {
        return Err(Error::Config("embedding dimension must be positive".into()));
    }
    if mode == InitMode::WordAverage {
        let table = table.ok_or_else(|| Error::Config("word-average init needs a word-vector table".into()))?;
        if table.dimension() != dimension {
            return Err(Error::Config(format!(
                "word vectors have dimension {}, model dimension is {dimension}",
                table.dimension()
            )));
        }
    }
    let mut data = Vec::with_capacity(kb.num_entities() * dimension);
    for (index, name) in kb.entities().names().iter().enumerate() {
        data.extend(init_entity_vector(name, index, mode, table, seed, dimension));
    }
    Ok(EmbeddingMatrix::from_rows(dimension, data))
}
