//! Synthetic knowledge base used by tests, benches and the shipped
//! `fixtures/synthetic` files.
//!
//! Five categories, each with one head entity and nine members (50
//! entities). Relations: `_type_of` (member → head), `_has_instance`
//! (head → member) and the symmetric `_similar_to` between members of the
//! same category and between heads. The 470 facts are shuffled and split
//! into 50 dev, 50 test and 370 train triplets, with every entity present
//! in train.

use rand::seq::SliceRandom;

use crate::kb::RawTriple;
use crate::seed;

pub const CATEGORIES: [&str; 5] = ["animal", "tool", "food", "plant", "vehicle"];
pub const MEMBERS_PER_CATEGORY: usize = 9;
pub const DEV_SIZE: usize = 50;
pub const TEST_SIZE: usize = 50;
/// Seed of the shipped fixture files.
pub const DEFAULT_SEED: u64 = 2013;

#[derive(Debug, Clone, PartialEq)]
pub struct Splits {
    pub train: Vec<RawTriple>,
    pub dev: Vec<RawTriple>,
    pub test: Vec<RawTriple>,
}

fn head(c: &str) -> String {
    format!("__{c}_1")
}

fn member(c: &str, i: usize) -> String {
    format!("__{c}_kind_{i}_1")
}

/// All facts of the synthetic knowledge base, in a fixed order.
pub fn facts() -> Vec<RawTriple> {
    let mut out = Vec::new();
    for c in CATEGORIES {
        let h = head(c);
        for i in 0..MEMBERS_PER_CATEGORY {
            let m = member(c, i);
            out.push(RawTriple::new(&m, "_type_of", &h));
            out.push(RawTriple::new(&h, "_has_instance", &m));
            for j in 0..MEMBERS_PER_CATEGORY {
                if i != j {
                    out.push(RawTriple::new(&m, "_similar_to", &member(c, j)));
                }
            }
        }
    }
    for a in CATEGORIES {
        for b in CATEGORIES {
            if a != b {
                out.push(RawTriple::new(&head(a), "_similar_to", &head(b)));
            }
        }
    }
    out
}

/// Shuffles [`facts`] with `seed` and splits them. Held-out triplets whose
/// entity would otherwise be missing from train are swapped back in.
pub fn generate(seed: u64) -> Splits {
    let mut all = facts();
    all.shuffle(&mut seed::rng(seed, &[seed::stream::FIXTURE]));
    let held = DEV_SIZE + TEST_SIZE;
    let (mut heldout, mut train) = (all[..held].to_vec(), all[held..].to_vec());

    let in_train = |train: &[RawTriple], name: &str| train.iter().any(|t| t.left == name || t.right == name);
    let mut i = 0;
    while i < heldout.len() {
        let t = &heldout[i];
        if in_train(&train, &t.left) && in_train(&train, &t.right) {
            i += 1;
            continue;
        }
        // swap with the first train triplet whose removal keeps coverage
        let pos = (0..train.len())
            .find(|&j| {
                let mut rest = train.clone();
                let removed = rest.remove(j);
                rest.push(heldout[i].clone());
                in_train(&rest, &removed.left) && in_train(&rest, &removed.right)
            })
            .expect("fixture has enough redundancy");
        std::mem::swap(&mut heldout[i], &mut train[pos]);
    }
    let test = heldout.split_off(DEV_SIZE);
    Splits {
        train,
        dev: heldout,
        test,
    }
}
