//! Link-prediction evaluation: raw right-entity ranking with recall@K, and
//! triplet classification with per-relation thresholds.

use std::fmt::{self, Write as _};

use rand::Rng;

use crate::kb::{EntityId, KnowledgeBase, RelationId, Triplet};
use crate::models::ModelParams;
use crate::par::{self, Execution};
use crate::seed;

const RANK_CHUNK: usize = 512;
const NEGATIVE_ATTEMPTS: usize = 100;

/// Rank of `correct` among `scores` sorted by decreasing plausibility,
/// ties broken by smaller index first. 1-based.
pub fn rank_from_scores(scores: &[f64], correct: usize) -> usize {
    let target = scores[correct];
    1 + scores
        .iter()
        .enumerate()
        .filter(|&(i, &s)| s > target || (s == target && i < correct))
        .count()
}

/// Plausibility of `(t.left, t.relation, e)` for every entity `e`.
pub fn right_entity_scores(params: &ModelParams, left: EntityId, relation: RelationId, exec: Execution) -> Vec<f64> {
    let query = params.relation(relation).prepare_right(params.entity(left));
    let n = params.shape().num_entities;
    par::map_ranges(exec, n, RANK_CHUNK, |range| {
        range
            .map(|e| query.plausibility(params.entity(EntityId(e))))
            .collect::<Vec<_>>()
    })
    .into_iter()
    .flatten()
    .collect()
}

/// Raw (unfiltered) rank of `t.right` among all entities for `(t.left, t.relation, ?)`.
pub fn rank_right_entity(params: &ModelParams, t: &Triplet, exec: Execution) -> usize {
    let scores = right_entity_scores(params, t.left, t.relation, exec);
    rank_from_scores(&scores, t.right.0)
}

/// Fraction of `ranks` that are `≤ k`. Zero for an empty list.
pub fn recall_at_k(ranks: &[usize], k: usize) -> f64 {
    assert!(k >= 1, "recall@K needs K ≥ 1");
    if ranks.is_empty() {
        return 0.0;
    }
    ranks.iter().filter(|&&r| r <= k).count() as f64 / ranks.len() as f64
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankingReport {
    pub ranks: Vec<usize>,
    /// `(K, recall@K)` in the order requested.
    pub recall: Vec<(usize, f64)>,
    pub mean_rank: f64,
}

pub fn evaluate_ranking(params: &ModelParams, triplets: &[Triplet], ks: &[usize], exec: Execution) -> RankingReport {
    let ranks: Vec<usize> = par::map_chunks(exec, triplets, 8, |_, chunk| {
        chunk
            .iter()
            .map(|t| rank_right_entity(params, t, Execution::Sequential))
            .collect::<Vec<_>>()
    })
    .into_iter()
    .flatten()
    .collect();
    let mean_rank = if ranks.is_empty() {
        0.0
    } else {
        ranks.iter().map(|&r| r as f64).sum::<f64>() / ranks.len() as f64
    };
    let recall = ks.iter().map(|&k| (k, recall_at_k(&ranks, k))).collect();
    RankingReport {
        ranks,
        recall,
        mean_rank,
    }
}

impl fmt::Display for RankingReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "triplets\t{}", self.ranks.len())?;
        writeln!(f, "mean_rank\t{}", self.mean_rank)?;
        for (k, r) in &self.recall {
            writeln!(f, "recall@{k}\t{r}")?;
        }
        Ok(())
    }
}

/// One presumed-false triplet per positive: a uniformly chosen field
/// (left, right or relation) is replaced by a different uniformly chosen
/// value, redrawing up to 100 times while the result is a known fact.
pub fn generate_negatives(kb: &KnowledgeBase, positives: &[Triplet], seed: u64) -> Vec<Triplet> {
    let mut rng = seed::rng(seed, &[]);
    let (ne, nr) = (kb.num_entities(), kb.num_relations());
    assert!(ne >= 2, "negative generation needs at least two entities");

    // uniform over 0..n excluding `skip`
    let other = |rng: &mut rand_chacha::ChaCha8Rng, n: usize, skip: usize| {
        let j = rng.gen_range(0..n - 1);
        if j >= skip {
            j + 1
        } else {
            j
        }
    };

    positives
        .iter()
        .map(|&pos| {
            let mut fallback = None;
            for _ in 0..NEGATIVE_ATTEMPTS {
                let candidate = match rng.gen_range(0..3u8) {
                    0 => Triplet {
                        left: EntityId(other(&mut rng, ne, pos.left.0)),
                        ..pos
                    },
                    1 => Triplet {
                        right: EntityId(other(&mut rng, ne, pos.right.0)),
                        ..pos
                    },
                    _ if nr < 2 => continue,
                    _ => Triplet {
                        relation: RelationId(other(&mut rng, nr, pos.relation.0)),
                        ..pos
                    },
                };
                if !kb.contains(&candidate) {
                    return candidate;
                }
                fallback = Some(candidate);
            }
            fallback.unwrap_or_else(|| Triplet {
                right: EntityId(other(&mut rng, ne, pos.right.0)),
                ..pos
            })
        })
        .collect()
}

/// Best threshold for one set of scores and its number of correct
/// predictions. Positive iff `score ≥ threshold`. Candidates are `-∞`,
/// midpoints between consecutive distinct scores, and `+∞`; ties go to the
/// smallest candidate.
pub fn best_threshold(pos: &[f64], neg: &[f64]) -> (f64, usize) {
    let mut labelled: Vec<(f64, bool)> = pos
        .iter()
        .map(|&s| (s, true))
        .chain(neg.iter().map(|&s| (s, false)))
        .collect();
    labelled.sort_by(|a, b| a.0.total_cmp(&b.0));

    // T = -∞: everything predicted positive.
    let mut correct = pos.len();
    let mut best = (f64::NEG_INFINITY, correct);
    let mut i = 0;
    while i < labelled.len() {
        let v = labelled[i].0;
        let mut j = i;
        while j < labelled.len() && labelled[j].0 == v {
            if labelled[j].1 {
                correct -= 1;
            } else {
                correct += 1;
            }
            j += 1;
        }
        // threshold just above v
        let t = match labelled.get(j) {
            Some(&(next, _)) => {
                let m = v / 2.0 + next / 2.0;
                if m > v && m <= next {
                    m
                } else {
                    next
                }
            }
            None => f64::INFINITY,
        };
        if correct > best.1 {
            best = (t, correct);
        }
        i = j;
    }
    best
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelationThreshold {
    pub threshold: f64,
    pub dev_correct: usize,
    pub dev_total: usize,
}

impl RelationThreshold {
    pub fn dev_accuracy(&self) -> f64 {
        self.dev_correct as f64 / self.dev_total as f64
    }
}

/// Per-relation decision thresholds fit on a development fold.
#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdTable {
    entries: Vec<Option<RelationThreshold>>,
    /// Median dev plausibility, used for relations absent from dev.
    pub fallback: f64,
}

impl ThresholdTable {
    pub fn from_thresholds(thresholds: Vec<f64>) -> Self {
        ThresholdTable {
            entries: thresholds
                .into_iter()
                .map(|t| {
                    Some(RelationThreshold {
                        threshold: t,
                        dev_correct: 0,
                        dev_total: 0,
                    })
                })
                .collect(),
            fallback: 0.0,
        }
    }

    pub fn threshold(&self, r: RelationId) -> f64 {
        self.entries
            .get(r.0)
            .copied()
            .flatten()
            .map_or(self.fallback, |e| e.threshold)
    }

    pub fn entry(&self, r: RelationId) -> Option<&RelationThreshold> {
        self.entries.get(r.0).and_then(Option::as_ref)
    }

    pub fn is_fitted(&self, r: RelationId) -> bool {
        self.entry(r).is_some()
    }

    pub fn num_relations(&self) -> usize {
        self.entries.len()
    }

    /// Overall dev accuracy over all fitted relations (0 when dev is empty).
    pub fn dev_accuracy(&self) -> f64 {
        let (c, t) = self
            .entries
            .iter()
            .flatten()
            .fold((0, 0), |(c, t), e| (c + e.dev_correct, t + e.dev_total));
        if t == 0 {
            0.0
        } else {
            c as f64 / t as f64
        }
    }

    pub fn predict(&self, r: RelationId, plausibility: f64) -> bool {
        plausibility >= self.threshold(r)
    }

    /// `relation<TAB>threshold`, one line per relation in id order.
    pub fn to_tsv(&self, relation_names: &[String]) -> String {
        let mut out = String::new();
        for (i, name) in relation_names.iter().enumerate() {
            let _ = writeln!(out, "{name}\t{}", self.threshold(RelationId(i)));
        }
        out
    }

    /// Parses the format written by [`ThresholdTable::to_tsv`].
    pub fn from_tsv(text: &str, relation_names: &[String]) -> Result<Self, String> {
        let mut thresholds = vec![None; relation_names.len()];
        for (lineno, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let (name, value) = line
                .split_once('\t')
                .ok_or_else(|| format!("line {}: expected `relation<TAB>threshold`", lineno + 1))?;
            let idx = relation_names
                .iter()
                .position(|n| n == name)
                .ok_or_else(|| format!("line {}: unknown relation `{name}`", lineno + 1))?;
            let t: f64 = value
                .trim()
                .parse()
                .map_err(|_| format!("line {}: bad threshold `{value}`", lineno + 1))?;
            thresholds[idx] = Some(RelationThreshold {
                threshold: t,
                dev_correct: 0,
                dev_total: 0,
            });
        }
        let known: Vec<f64> = thresholds.iter().flatten().map(|e| e.threshold).collect();
        Ok(ThresholdTable {
            entries: thresholds,
            fallback: median(known),
        })
    }
}

fn median(mut xs: Vec<f64>) -> f64 {
    if xs.is_empty() {
        return 0.0;
    }
    xs.sort_by(f64::total_cmp);
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        xs[n / 2 - 1] / 2.0 + xs[n / 2] / 2.0
    }
}

fn scores(params: &ModelParams, triplets: &[Triplet]) -> Vec<f64> {
    triplets.iter().map(|t| params.plausibility(t)).collect()
}

pub fn fit_thresholds(params: &ModelParams, dev_pos: &[Triplet], dev_neg: &[Triplet]) -> ThresholdTable {
    let pos = scores(params, dev_pos);
    let neg = scores(params, dev_neg);
    fit_thresholds_from_scores(params.shape().num_relations, dev_pos, &pos, dev_neg, &neg)
}

/// Threshold fitting on precomputed plausibilities.
pub fn fit_thresholds_from_scores(
    num_relations: usize,
    dev_pos: &[Triplet],
    pos_scores: &[f64],
    dev_neg: &[Triplet],
    neg_scores: &[f64],
) -> ThresholdTable {
    let mut by_rel: Vec<(Vec<f64>, Vec<f64>)> = vec![(Vec::new(), Vec::new()); num_relations];
    for (t, &s) in dev_pos.iter().zip(pos_scores) {
        by_rel[t.relation.0].0.push(s);
    }
    for (t, &s) in dev_neg.iter().zip(neg_scores) {
        by_rel[t.relation.0].1.push(s);
    }
    let entries = by_rel
        .iter()
        .map(|(p, n)| {
            if p.is_empty() && n.is_empty() {
                return None;
            }
            let (threshold, dev_correct) = best_threshold(p, n);
            Some(RelationThreshold {
                threshold,
                dev_correct,
                dev_total: p.len() + n.len(),
            })
        })
        .collect();
    let all: Vec<f64> = pos_scores.iter().chain(neg_scores).copied().collect();
    ThresholdTable {
        entries,
        fallback: median(all),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RelationAccuracy {
    pub relation: RelationId,
    pub correct: usize,
    pub total: usize,
}

impl RelationAccuracy {
    pub fn accuracy(&self) -> f64 {
        self.correct as f64 / self.total as f64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassificationReport {
    pub accuracy: f64,
    pub positives: usize,
    pub negatives: usize,
    pub true_positives: usize,
    pub true_negatives: usize,
    pub per_relation: Vec<RelationAccuracy>,
}

pub fn classify(
    params: &ModelParams,
    thresholds: &ThresholdTable,
    test_pos: &[Triplet],
    test_neg: &[Triplet],
) -> ClassificationReport {
    let pos = scores(params, test_pos);
    let neg = scores(params, test_neg);
    classify_scores(params.shape().num_relations, thresholds, test_pos, &pos, test_neg, &neg)
}

pub fn classify_scores(
    num_relations: usize,
    thresholds: &ThresholdTable,
    test_pos: &[Triplet],
    pos_scores: &[f64],
    test_neg: &[Triplet],
    neg_scores: &[f64],
) -> ClassificationReport {
    let mut per = vec![(0usize, 0usize); num_relations];
    let mut tp = 0;
    let mut tn = 0;
    for (t, &s) in test_pos.iter().zip(pos_scores) {
        let ok = thresholds.predict(t.relation, s);
        tp += ok as usize;
        per[t.relation.0].0 += ok as usize;
        per[t.relation.0].1 += 1;
    }
    for (t, &s) in test_neg.iter().zip(neg_scores) {
        let ok = !thresholds.predict(t.relation, s);
        tn += ok as usize;
        per[t.relation.0].0 += ok as usize;
        per[t.relation.0].1 += 1;
    }
    let total = test_pos.len() + test_neg.len();
    ClassificationReport {
        accuracy: if total == 0 {
            0.0
        } else {
            (tp + tn) as f64 / total as f64
        },
        positives: test_pos.len(),
        negatives: test_neg.len(),
        true_positives: tp,
        true_negatives: tn,
        per_relation: per
            .into_iter()
            .enumerate()
            .filter(|(_, (_, n))| *n > 0)
            .map(|(r, (correct, total))| RelationAccuracy {
                relation: RelationId(r),
                correct,
                total,
            })
            .collect(),
    }
}

impl ClassificationReport {
    /// `metric<TAB>value` lines, then one `relation` block per relation.
    pub fn render(&self, relation_names: &[String]) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "accuracy\t{}", self.accuracy);
        let _ = writeln!(out, "positives\t{}", self.positives);
        let _ = writeln!(out, "negatives\t{}", self.negatives);
        let _ = writeln!(out, "true_positives\t{}", self.true_positives);
        let _ = writeln!(out, "true_negatives\t{}", self.true_negatives);
        for r in &self.per_relation {
            let name = relation_names.get(r.relation.0).map_or("?", String::as_str);
            let _ = writeln!(out, "\nrelation\t{name}");
            let _ = writeln!(out, "accuracy\t{}", r.accuracy());
            let _ = writeln!(out, "examples\t{}", r.total);
        }
        out
    }
}
