//! Neural tensor network scorer.
//!
//! `g(e1, R, e2) = Uᵀ f(e1ᵀ W[1:k] e2 + V [e1; e2] + b)` with `f = tanh`.
//! Slice `i` of the tensor is the `d × d` row-major block
//! `w[i·d·d .. (i+1)·d·d]`; `V` is `k × 2d` row-major.

use super::linalg::{add_outer, axpy, dot, mat_vec, vec_mat};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Activation {
    #[default]
    Tanh,
    /// Only used to express the bilinear special case.
    Identity,
}

impl Activation {
    #[inline]
    fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Tanh => z.tanh(),
            Activation::Identity => z,
        }
    }

    /// Derivative expressed through the activation value `a = f(z)`.
    #[inline]
    fn derivative_from_value(self, a: f64) -> f64 {
        match self {
            Activation::Tanh => 1.0 - a * a,
            Activation::Identity => 1.0,
        }
    }
}

/// Borrowed parameters of one relation.
#[derive(Debug, Clone, Copy)]
pub struct NtnParams<'a> {
    pub dim: usize,
    pub slices: usize,
    pub w: &'a [f64],
    pub v: &'a [f64],
    pub u: &'a [f64],
    pub b: &'a [f64],
}

impl NtnParams<'_> {
    fn check(&self, e1: &[f64], e2: &[f64]) {
        let (d, k) = (self.dim, self.slices);
        assert_eq!(e1.len(), d, "e1 length");
        assert_eq!(e2.len(), d, "e2 length");
        assert_eq!(self.w.len(), d * d * k, "tensor shape");
        assert_eq!(self.v.len(), k * 2 * d, "V shape");
        assert_eq!(self.u.len(), k, "U length");
        assert_eq!(self.b.len(), k, "b length");
    }
}

/// Mutable gradient targets, laid out like [`NtnParams`].
pub struct NtnGrad<'a> {
    pub w: &'a mut [f64],
    pub v: &'a mut [f64],
    pub u: &'a mut [f64],
    pub b: &'a mut [f64],
}

/// `h_i = e1ᵀ W[i] e2` for every slice.
pub fn bilinear_tensor_product(e1: &[f64], e2: &[f64], w: &[f64], dim: usize, slices: usize) -> Vec<f64> {
    assert_eq!(e1.len(), dim, "e1 length");
    assert_eq!(e2.len(), dim, "e2 length");
    assert_eq!(w.len(), dim * dim * slices, "tensor shape");
    w.chunks_exact(dim * dim)
        .map(|slice| dot(&vec_mat(e1, slice, dim), e2))
        .collect()
}

/// Left-side work shared by every right entity of a ranking query.
#[derive(Debug, Clone)]
pub struct NtnQuery<'a> {
    params: NtnParams<'a>,
    activation: Activation,
    /// `e1ᵀ W[i]` per slice, `k × d`.
    left_w: Vec<f64>,
    /// `V[:, :d] · e1`.
    left_v: Vec<f64>,
}

impl<'a> NtnQuery<'a> {
    pub fn new(params: NtnParams<'a>, e1: &[f64], activation: Activation) -> Self {
        params.check(e1, e1);
        let d = params.dim;
        let left_w = params
            .w
            .chunks_exact(d * d)
            .flat_map(|slice| vec_mat(e1, slice, d))
            .collect();
        let left_v = params.v.chunks_exact(2 * d).map(|row| dot(&row[..d], e1)).collect();
        NtnQuery {
            params,
            activation,
            left_w,
            left_v,
        }
    }

    /// Pre-activation vector `z` for right entity `e2`.
    fn preactivation(&self, e2: &[f64]) -> Vec<f64> {
        let d = self.params.dim;
        assert_eq!(e2.len(), d, "e2 length");
        self.left_w
            .chunks_exact(d)
            .zip(self.params.v.chunks_exact(2 * d))
            .zip(self.left_v.iter().zip(self.params.b))
            .map(|((lw, vrow), (lv, b))| {
                let h = dot(lw, e2);
                let right_v = dot(&vrow[d..], e2);
                h + lv + right_v + b
            })
            .collect()
    }

    pub fn score(&self, e2: &[f64]) -> f64 {
        let act = self.activation;
        self.preactivation(e2)
            .iter()
            .zip(self.params.u)
            .fold(0.0, |acc, (z, u)| acc + u * act.apply(*z))
    }
}

pub fn score_ntn(params: &NtnParams<'_>, e1: &[f64], e2: &[f64]) -> f64 {
    score_ntn_with(params, e1, e2, Activation::Tanh)
}

pub fn score_ntn_with(params: &NtnParams<'_>, e1: &[f64], e2: &[f64], activation: Activation) -> f64 {
    params.check(e1, e2);
    NtnQuery::new(*params, e1, activation).score(e2)
}

/// Adds `coeff · ∂g/∂θ` to `grad` and `coeff · ∂g/∂e{1,2}` to `g_e1`/`g_e2`.
#[allow(clippy::too_many_arguments)]
pub fn accumulate_ntn_grad(
    params: &NtnParams<'_>,
    e1: &[f64],
    e2: &[f64],
    activation: Activation,
    coeff: f64,
    grad: NtnGrad<'_>,
    g_e1: &mut [f64],
    g_e2: &mut [f64],
) {
    params.check(e1, e2);
    let d = params.dim;
    let z = NtnQuery::new(*params, e1, activation).preactivation(e2);
    let a: Vec<f64> = z.iter().map(|&z| activation.apply(z)).collect();
    let delta: Vec<f64> = a
        .iter()
        .zip(params.u)
        .map(|(&a, &u)| coeff * u * activation.derivative_from_value(a))
        .collect();

    axpy(grad.u, coeff, &a);
    axpy(grad.b, 1.0, &delta);
    for (i, &di) in delta.iter().enumerate() {
        let slice = &params.w[i * d * d..(i + 1) * d * d];
        add_outer(&mut grad.w[i * d * d..(i + 1) * d * d], di, e1, e2);

        let vrow = &params.v[i * 2 * d..(i + 1) * 2 * d];
        let grow = &mut grad.v[i * 2 * d..(i + 1) * 2 * d];
        axpy(&mut grow[..d], di, e1);
        axpy(&mut grow[d..], di, e2);

        axpy(g_e1, di, &mat_vec(slice, e2, d));
        axpy(g_e2, di, &vec_mat(e1, slice, d));
        axpy(g_e1, di, &vrow[..d]);
        axpy(g_e2, di, &vrow[d..]);
    }
}
