#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use ntn_kb::kb::{KnowledgeBase, RawTriple, RelationId};
use ntn_kb::models::{ModelKind, ModelParams, ModelShape};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn uniform_vec(rng: &mut ChaCha8Rng, n: usize, r: f64) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(-r..=r)).collect()
}

pub fn random_params(kind: ModelKind, dim: usize, slices: usize, ne: usize, nr: usize, seed: u64) -> ModelParams {
    let shape = ModelShape {
        kind,
        dim,
        slices,
        num_entities: ne,
        num_relations: nr,
        share_u: false,
    };
    let mut p = ModelParams::zeros(shape);
    let mut g = rng(seed);
    for x in p.as_mut_slice() {
        *x = g.gen_range(-1.0..=1.0);
    }
    p
}

/// Random KB with `ne` entities named `e{i}` and `nr` relations, `n` facts
/// split 60/20/20. Every entity and relation appears at least once.
pub fn random_kb(rng: &mut ChaCha8Rng, ne: usize, nr: usize, n: usize) -> KnowledgeBase {
    let mut facts = Vec::new();
    for i in 0..ne.max(nr) {
        facts.push(RawTriple::new(
            &format!("e{}", i % ne),
            &format!("r{}", i % nr),
            &format!("e{}", (i + 1) % ne),
        ));
    }
    while facts.len() < n {
        let t = RawTriple::new(
            &format!("e{}", rng.gen_range(0..ne)),
            &format!("r{}", rng.gen_range(0..nr)),
            &format!("e{}", rng.gen_range(0..ne)),
        );
        facts.push(t);
    }
    let n_train = (facts.len() * 3 / 5).max(ne.max(nr));
    let n_dev = (facts.len() - n_train) / 2;
    let test = facts.split_off(n_train + n_dev);
    let dev = facts.split_off(n_train);
    KnowledgeBase::build(&facts, &dev, &test)
}

fn field<'a>(p: &'a ModelParams, r: usize, name: &str) -> &'a [f64] {
    p.field(RelationId(r), name).unwrap()
}

/// `Σ_ij x_i M_ij y_j` with `M` row-major `d × d`.
fn bilin(x: &[f64], m: &[f64], y: &[f64]) -> f64 {
    let d = x.len();
    let mut s = 0.0;
    for i in 0..d {
        for j in 0..d {
            s += x[i] * m[i * d + j] * y[j];
        }
    }
    s
}

fn matvec(m: &[f64], x: &[f64]) -> Vec<f64> {
    let d = x.len();
    (0..d).map(|i| (0..d).map(|j| m[i * d + j] * x[j]).sum()).collect()
}

/// Naive plausibility, written independently of the library's scorers.
pub fn reference_plausibility(p: &ModelParams, e1: &[f64], r: usize, e2: &[f64]) -> f64 {
    let d = p.dim();
    match p.kind() {
        ModelKind::Ntn => {
            let k = p.shape().slices;
            let (w, v, u, b) = (field(p, r, "W"), field(p, r, "V"), field(p, r, "U"), field(p, r, "b"));
            let mut g = 0.0;
            for i in 0..k {
                let mut z = bilin(e1, &w[i * d * d..(i + 1) * d * d], e2) + b[i];
                for j in 0..d {
                    z += v[i * 2 * d + j] * e1[j] + v[i * 2 * d + d + j] * e2[j];
                }
                g += u[i] * z.tanh();
            }
            g
        }
        ModelKind::Bilinear => bilin(e1, field(p, r, "W"), e2),
        ModelKind::Similarity => {
            let a = matvec(field(p, r, "W_left"), e1);
            let b = matvec(field(p, r, "W_right"), e2);
            -a.iter().zip(&b).map(|(x, y)| (x - y).abs()).sum::<f64>()
        }
        ModelKind::Hadamard => {
            let er = field(p, r, "e_R");
            let l1 = matvec(field(p, r, "W1"), e1);
            let lr = matvec(field(p, r, "Wrel1"), er);
            let r2 = matvec(field(p, r, "W2"), e2);
            let rr = matvec(field(p, r, "Wrel2"), er);
            let (b1, b2) = (field(p, r, "b1"), field(p, r, "b2"));
            (0..d).map(|i| (l1[i] * lr[i] + b1[i]) * (r2[i] * rr[i] + b2[i])).sum()
        }
    }
}

pub fn assert_close(a: f64, b: f64, tol: f64, what: &str) {
    let scale = a.abs().max(b.abs()).max(1.0);
    assert!((a - b).abs() <= tol * scale, "{what}: {a} vs {b}");
}
