//! Distance scorer `‖W_left e1 − W_right e2‖₁`. Lower means more plausible.

use super::linalg::{add_outer, axpy, mat_vec, vec_mat};

#[derive(Debug, Clone, Copy)]
pub struct SimilarityParams<'a> {
    pub dim: usize,
    pub w_left: &'a [f64],
    pub w_right: &'a [f64],
}

impl SimilarityParams<'_> {
    fn check(&self, e: &[f64]) {
        let d = self.dim;
        assert_eq!(e.len(), d, "entity length");
        assert_eq!(self.w_left.len(), d * d, "W_left shape");
        assert_eq!(self.w_right.len(), d * d, "W_right shape");
    }

    pub fn project_left(&self, e1: &[f64]) -> Vec<f64> {
        self.check(e1);
        mat_vec(self.w_left, e1, self.dim)
    }

    pub fn project_right(&self, e2: &[f64]) -> Vec<f64> {
        self.check(e2);
        mat_vec(self.w_right, e2, self.dim)
    }
}

/// L1 distance between two projected vectors.
pub fn l1_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |acc, (x, y)| acc + (x - y).abs())
}

pub fn score_similarity(params: &SimilarityParams<'_>, e1: &[f64], e2: &[f64]) -> f64 {
    l1_distance(&params.project_left(e1), &params.project_right(e2))
}

/// `sign` with `sign(0) = 0`, the subgradient used at L1 kinks.
#[inline]
pub fn sign0(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Adds `coeff · ∂dist` for the raw distance (not the negated plausibility).
#[allow(clippy::too_many_arguments)]
pub fn accumulate_similarity_grad(
    params: &SimilarityParams<'_>,
    e1: &[f64],
    e2: &[f64],
    coeff: f64,
    g_left: &mut [f64],
    g_right: &mut [f64],
    g_e1: &mut [f64],
    g_e2: &mut [f64],
) {
    let d = params.dim;
    let s: Vec<f64> = params
        .project_left(e1)
        .iter()
        .zip(params.project_right(e2))
        .map(|(l, r)| sign0(l - r))
        .collect();
    add_outer(g_left, coeff, &s, e1);
    add_outer(g_right, -coeff, &s, e2);
    axpy(g_e1, coeff, &vec_mat(&s, params.w_left, d));
    axpy(g_e2, -coeff, &vec_mat(&s, params.w_right, d));
}
