//! Dense row-major helpers. No bounds beyond what slicing checks.

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).fold(0.0, |acc, (x, y)| acc + x * y)
}

/// `m · x` for an `rows × x.len()` matrix.
pub fn mat_vec(m: &[f64], x: &[f64], rows: usize) -> Vec<f64> {
    let cols = x.len();
    debug_assert_eq!(m.len(), rows * cols);
    m.chunks_exact(cols).map(|row| dot(row, x)).collect()
}

/// `xᵀ · m` for an `x.len() × cols` matrix.
pub fn vec_mat(x: &[f64], m: &[f64], cols: usize) -> Vec<f64> {
    debug_assert_eq!(m.len(), x.len() * cols);
    let mut out = vec![0.0; cols];
    for (xi, row) in x.iter().zip(m.chunks_exact(cols)) {
        for (o, mij) in out.iter_mut().zip(row) {
            *o += xi * mij;
        }
    }
    out
}

/// `out += scale · a bᵀ`, with `out` an `a.len() × b.len()` matrix.
pub fn add_outer(out: &mut [f64], scale: f64, a: &[f64], b: &[f64]) {
    debug_assert_eq!(out.len(), a.len() * b.len());
    for (ai, row) in a.iter().zip(out.chunks_exact_mut(b.len())) {
        let s = scale * ai;
        for (o, bj) in row.iter_mut().zip(b) {
            *o += s * bj;
        }
    }
}

/// `out += scale · x`.
pub fn axpy(out: &mut [f64], scale: f64, x: &[f64]) {
    debug_assert_eq!(out.len(), x.len());
    for (o, xi) in out.iter_mut().zip(x) {
        *o += scale * xi;
    }
}
