//! Triplet datasets and their vocabularies.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EntityId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RelationId(pub usize);

/// An id-encoded assertion `(left, relation, right)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Triplet {
    pub left: EntityId,
    pub relation: RelationId,
    pub right: EntityId,
}

impl Triplet {
    pub fn new(left: usize, relation: usize, right: usize) -> Self {
        Triplet {
            left: EntityId(left),
            relation: RelationId(relation),
            right: EntityId(right),
        }
    }
}

/// A triple as read from disk, before id encoding.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RawTriple {
    pub left: String,
    pub relation: String,
    pub right: String,
}

impl RawTriple {
    pub fn new(left: &str, relation: &str, right: &str) -> Self {
        RawTriple {
            left: left.to_owned(),
            relation: relation.to_owned(),
            right: right.to_owned(),
        }
    }
}

impl fmt::Display for RawTriple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}\t{}\t{}", self.left, self.relation, self.right)
    }
}

/// Name ↔ dense index map, ordered by first insertion.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Vocabulary {
    names: Vec<String>,
    index: HashMap<String, usize>,
}

impl Vocabulary {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a vocabulary from names in id order. Duplicates are rejected.
    pub fn from_names(names: Vec<String>) -> Result<Self> {
        let mut vocab = Vocabulary::new();
        for name in names {
            if vocab.index.contains_key(&name) {
                return Err(Error::Config(format!("duplicate vocabulary entry `{name}`")));
            }
            vocab.intern(&name);
        }
        Ok(vocab)
    }

    pub fn intern(&mut self, name: &str) -> usize {
        if let Some(&id) = self.index.get(name) {
            return id;
        }
        let id = self.names.len();
        self.names.push(name.to_owned());
        self.index.insert(name.to_owned(), id);
        id
    }

    pub fn get(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn name(&self, id: usize) -> &str {
        &self.names[id]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }
}

/// Whether `load_split` may accept unseen names.
#[derive(Debug, Clone, Copy)]
pub enum VocabMode<'a> {
    Build,
    Frozen {
        entities: &'a Vocabulary,
        relations: &'a Vocabulary,
    },
}

/// Reads a tab-separated `left<TAB>relation<TAB>right` file.
pub fn load_split(path: impl AsRef<Path>, mode: VocabMode<'_>) -> Result<Vec<RawTriple>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)?;
    parse_split(&text, path, mode)
}

pub(crate) fn parse_split(text: &str, path: &Path, mode: VocabMode<'_>) -> Result<Vec<RawTriple>> {
    let mut out = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.strip_suffix('\r').unwrap_or(line);
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 3 {
            return Err(Error::parse(
                path,
                lineno + 1,
                format!("expected 3 tab-separated fields, found {}", fields.len()),
            ));
        }
        let raw = RawTriple::new(fields[0], fields[1], fields[2]);
        if let VocabMode::Frozen { entities, relations } = mode {
            for name in [&raw.left, &raw.right] {
                if entities.get(name).is_none() {
                    return Err(Error::Vocabulary {
                        kind: "entity",
                        token: name.clone(),
                    });
                }
            }
            if relations.get(&raw.relation).is_none() {
                return Err(Error::Vocabulary {
                    kind: "relation",
                    token: raw.relation.clone(),
                });
            }
        }
        out.push(raw);
    }
    Ok(out)
}

/// Writes triples in the same format `load_split` reads.
pub fn write_split(path: impl AsRef<Path>, triples: &[RawTriple]) -> Result<()> {
    let mut text = String::new();
    for t in triples {
        text.push_str(&t.to_string());
        text.push('\n');
    }
    fs::write(path, text)?;
    Ok(())
}

/// Number of distinct triplets shared between each pair of splits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SplitOverlap {
    pub train_dev: usize,
    pub train_test: usize,
    pub dev_test: usize,
}

#[derive(Debug, Clone)]
pub struct KnowledgeBase {
    entities: Vocabulary,
    relations: Vocabulary,
    pub train: Vec<Triplet>,
    pub dev: Vec<Triplet>,
    pub test: Vec<Triplet>,
    membership: HashSet<Triplet>,
}

impl KnowledgeBase {
    /// Builds vocabularies over the union of all splits (train, then dev,
    /// then test, each in file order) and encodes every split.
    pub fn build(train: &[RawTriple], dev: &[RawTriple], test: &[RawTriple]) -> Self {
        let mut entities = Vocabulary::new();
        let mut relations = Vocabulary::new();
        for raw in train.iter().chain(dev).chain(test) {
            entities.intern(&raw.left);
            relations.intern(&raw.relation);
            entities.intern(&raw.right);
        }
        Self::with_vocabulary(entities, relations, train, dev, test).expect("vocabulary built from the same triples")
    }

    /// Encodes splits against fixed vocabularies, failing on the first
    /// unknown name.
    pub fn with_vocabulary(
        entities: Vocabulary,
        relations: Vocabulary,
        train: &[RawTriple],
        dev: &[RawTriple],
        test: &[RawTriple],
    ) -> Result<Self> {
        let mut kb = KnowledgeBase {
            entities,
            relations,
            train: Vec::new(),
            dev: Vec::new(),
            test: Vec::new(),
            membership: HashSet::new(),
        };
        kb.train = kb.encode_all(train)?;
        kb.dev = kb.encode_all(dev)?;
        kb.test = kb.encode_all(test)?;
        kb.membership = kb.train.iter().chain(&kb.dev).chain(&kb.test).copied().collect();
        let overlap = kb.overlap();
        if overlap != SplitOverlap::default() {
            log::info!(
                "split overlap: train/dev {}, train/test {}, dev/test {}",
                overlap.train_dev,
                overlap.train_test,
                overlap.dev_test
            );
        }
        Ok(kb)
    }

    fn encode_all(&self, raws: &[RawTriple]) -> Result<Vec<Triplet>> {
        raws.iter().map(|r| self.encode(r)).collect()
    }

    pub fn encode(&self, raw: &RawTriple) -> Result<Triplet> {
        let entity = |name: &str| {
            self.entities.get(name).map(EntityId).ok_or_else(|| Error::Vocabulary {
                kind: "entity",
                token: name.to_owned(),
            })
        };
        let relation = self
            .relations
            .get(&raw.relation)
            .map(RelationId)
            .ok_or_else(|| Error::Vocabulary {
                kind: "relation",
                token: raw.relation.clone(),
            })?;
        Ok(Triplet {
            left: entity(&raw.left)?,
            relation,
            right: entity(&raw.right)?,
        })
    }

    pub fn decode(&self, t: Triplet) -> RawTriple {
        RawTriple::new(
            self.entities.name(t.left.0),
            self.relations.name(t.relation.0),
            self.entities.name(t.right.0),
        )
    }

    pub fn contains(&self, t: &Triplet) -> bool {
        self.membership.contains(t)
    }

    pub fn num_entities(&self) -> usize {
        self.entities.len()
    }

    pub fn num_relations(&self) -> usize {
        self.relations.len()
    }

    pub fn entities(&self) -> &Vocabulary {
        &self.entities
    }

    pub fn relations(&self) -> &Vocabulary {
        &self.relations
    }

    /// Number of distinct triplets in the membership index.
    pub fn distinct_triplets(&self) -> usize {
        self.membership.len()
    }

    pub fn overlap(&self) -> SplitOverlap {
        let set = |s: &[Triplet]| s.iter().copied().collect::<HashSet<_>>();
        let (train, dev, test) = (set(&self.train), set(&self.dev), set(&self.test));
        SplitOverlap {
            train_dev: train.intersection(&dev).count(),
            train_test: train.intersection(&test).count(),
            dev_test: dev.intersection(&test).count(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn tmp_file(contents: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(contents.as_bytes()).unwrap();
        f
    }

    #[test]
    fn single_line() {
        let f = tmp_file("__dog_1\t_has_instance\t__puppy_1\n");
        let triples = load_split(f.path(), VocabMode::Build).unwrap();
        assert_eq!(triples, vec![RawTriple::new("__dog_1", "_has_instance", "__puppy_1")]);
    }

    #[test]
    fn empty_file_and_blank_lines() {
        assert!(load_split(tmp_file("").path(), VocabMode::Build).unwrap().is_empty());
        let f = tmp_file("\n a\tr\tb\n\n  \nc\tr\td\r\n");
        let triples = load_split(f.path(), VocabMode::Build).unwrap();
        assert_eq!(triples.len(), 2);
        assert_eq!(triples[0].left, " a");
        assert_eq!(triples[1].right, "d");
    }

    #[test]
    fn arity_error_reports_line() {
        let err = load_split(tmp_file("a\tb\n").path(), VocabMode::Build).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }), "{err}");
        let err = load_split(tmp_file("a\tr\tb\n\nx\ty\tz\tw\n").path(), VocabMode::Build).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err}");
    }

    #[test]
    fn frozen_mode_names_unknown_token() {
        let kb = KnowledgeBase::build(&[RawTriple::new("a", "r", "b")], &[], &[]);
        let mode = VocabMode::Frozen {
            entities: kb.entities(),
            relations: kb.relations(),
        };
        let err = load_split(tmp_file("a\tr\tzebra\n").path(), mode).unwrap_err();
        match err {
            Error::Vocabulary { kind, token } => {
                assert_eq!(kind, "entity");
                assert_eq!(token, "zebra");
            }
            other => panic!("unexpected {other}"),
        }
        let err = load_split(tmp_file("a\tq\tb\n").path(), mode).unwrap_err();
        assert!(matches!(err, Error::Vocabulary { kind: "relation", .. }));
    }

    #[test]
    fn build_counts() {
        let kb = KnowledgeBase::build(&[RawTriple::new("a", "r", "b")], &[], &[RawTriple::new("b", "r", "a")]);
        assert_eq!(kb.num_entities(), 2);
        assert_eq!(kb.num_relations(), 1);
        assert_eq!(kb.distinct_triplets(), 2);

        let empty = KnowledgeBase::build(&[], &[], &[]);
        assert_eq!((empty.num_entities(), empty.num_relations()), (0, 0));
    }

    #[test]
    fn first_appearance_order() {
        let kb = KnowledgeBase::build(
            &[RawTriple::new("x", "r1", "y")],
            &[RawTriple::new("z", "r2", "x")],
            &[RawTriple::new("w", "r1", "w")],
        );
        assert_eq!(kb.entities().names(), ["x", "y", "z", "w"]);
        assert_eq!(kb.relations().names(), ["r1", "r2"]);
        assert_eq!(kb.test, vec![Triplet::new(3, 0, 3)]);
    }

    #[test]
    fn contains_and_swapped() {
        let kb = KnowledgeBase::build(&[RawTriple::new("dog", "type_of", "animal")], &[], &[]);
        let t = kb.train[0];
        assert!(kb.contains(&t));
        let swapped = Triplet {
            left: t.right,
            right: t.left,
            ..t
        };
        assert!(!kb.contains(&swapped));
    }

    #[test]
    fn duplicates_kept_and_overlap_reported() {
        let t = RawTriple::new("a", "r", "b");
        let kb = KnowledgeBase::build(&[t.clone(), t.clone()], std::slice::from_ref(&t), &[]);
        assert_eq!(kb.train.len(), 2);
        assert_eq!(kb.distinct_triplets(), 1);
        assert_eq!(
            kb.overlap(),
            SplitOverlap {
                train_dev: 1,
                train_test: 0,
                dev_test: 0
            }
        );
    }
}
