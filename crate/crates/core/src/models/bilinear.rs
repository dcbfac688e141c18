//! Single-matrix bilinear scorer `e1ᵀ W e2`: the tensor network with one
//! slice, no linear layer, no bias and no nonlinearity.

use super::linalg::{add_outer, axpy, dot, mat_vec, vec_mat};

fn dim_of(w: &[f64], e1: &[f64], e2: &[f64]) -> usize {
    let d = e1.len();
    assert_eq!(e2.len(), d, "e2 length");
    assert_eq!(w.len(), d * d, "W shape");
    d
}

pub fn score_bilinear(w: &[f64], e1: &[f64], e2: &[f64]) -> f64 {
    let d = dim_of(w, e1, e2);
    dot(&vec_mat(e1, w, d), e2)
}

/// `e1ᵀ W`, reused across right entities.
pub fn left_product(w: &[f64], e1: &[f64]) -> Vec<f64> {
    let d = dim_of(w, e1, e1);
    vec_mat(e1, w, d)
}

pub fn accumulate_bilinear_grad(
    w: &[f64],
    e1: &[f64],
    e2: &[f64],
    coeff: f64,
    g_w: &mut [f64],
    g_e1: &mut [f64],
    g_e2: &mut [f64],
) {
    let d = dim_of(w, e1, e2);
    add_outer(g_w, coeff, e1, e2);
    axpy(g_e1, coeff, &mat_vec(w, e2, d));
    axpy(g_e2, coeff, &vec_mat(e1, w, d));
}
