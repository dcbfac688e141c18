//! Corruption sampling for the contrastive objective.

use std::fmt;
use std::str::FromStr;

use rand::Rng;

use crate::error::{Error, Result};
use crate::kb::{EntityId, KnowledgeBase, Triplet};

const MAX_ATTEMPTS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    Left,
    Right,
}

/// Which entity of a training triplet gets replaced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SidePolicy {
    Left,
    #[default]
    Right,
    /// Alternates per sample, starting with the right side.
    Both,
}

impl SidePolicy {
    fn side(self, sample: usize) -> Side {
        match self {
            SidePolicy::Left => Side::Left,
            SidePolicy::Right => Side::Right,
            SidePolicy::Both if sample.is_multiple_of(2) => Side::Right,
            SidePolicy::Both => Side::Left,
        }
    }
}

impl fmt::Display for SidePolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SidePolicy::Left => "left",
            SidePolicy::Right => "right",
            SidePolicy::Both => "both",
        })
    }
}

impl FromStr for SidePolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "left" => Ok(SidePolicy::Left),
            "right" => Ok(SidePolicy::Right),
            "both" => Ok(SidePolicy::Both),
            other => Err(Error::Config(format!("unknown corruption side `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CorruptionSample {
    pub source: Triplet,
    pub entity: EntityId,
    pub side: Side,
}

impl CorruptionSample {
    pub fn corrupted(&self) -> Triplet {
        match self.side {
            Side::Left => Triplet {
                left: self.entity,
                ..self.source
            },
            Side::Right => Triplet {
                right: self.entity,
                ..self.source
            },
        }
    }
}

/// Draws `count` corruptions of `t`. Each replacement is uniform over the
/// entities other than the one replaced, redrawn (at most 100 times) while
/// the corrupted triplet is a known fact.
pub fn sample_corruptions<R: Rng>(
    kb: &KnowledgeBase,
    t: &Triplet,
    count: usize,
    policy: SidePolicy,
    rng: &mut R,
) -> Result<Vec<CorruptionSample>> {
    let n = kb.num_entities();
    if n < 2 {
        return Err(Error::Config(format!(
            "corruption sampling needs at least 2 entities, have {n}"
        )));
    }
    let mut out = Vec::with_capacity(count);
    for i in 0..count {
        let side = policy.side(i);
        let replaced = match side {
            Side::Left => t.left.0,
            Side::Right => t.right.0,
        };
        let mut sample = CorruptionSample {
            source: *t,
            entity: EntityId(0),
            side,
        };
        for _ in 0..MAX_ATTEMPTS {
            let j = rng.gen_range(0..n - 1);
            sample.entity = EntityId(if j >= replaced { j + 1 } else { j });
            if !kb.contains(&sample.corrupted()) {
                break;
            }
        }
        out.push(sample);
    }
    Ok(out)
}
