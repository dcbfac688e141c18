//! Gated-product scorer
//! `g = −(W1 e1 ⊙ Wrel1 e_R + b1) · (W2 e2 ⊙ Wrel2 e_R + b2)`.
//!
//! The four matrices and both biases are shared by every relation; only
//! `e_R` is per relation. Lower means more plausible.

use super::linalg::{add_outer, axpy, dot, mat_vec, vec_mat};

#[derive(Debug, Clone, Copy)]
pub struct HadamardParams<'a> {
    pub dim: usize,
    pub w1: &'a [f64],
    pub w2: &'a [f64],
    pub w_rel1: &'a [f64],
    pub w_rel2: &'a [f64],
    pub b1: &'a [f64],
    pub b2: &'a [f64],
    pub e_rel: &'a [f64],
}

pub struct HadamardGrad<'a> {
    pub w1: &'a mut [f64],
    pub w2: &'a mut [f64],
    pub w_rel1: &'a mut [f64],
    pub w_rel2: &'a mut [f64],
    pub b1: &'a mut [f64],
    pub b2: &'a mut [f64],
    pub e_rel: &'a mut [f64],
}

impl HadamardParams<'_> {
    fn check(&self, e: &[f64]) {
        let d = self.dim;
        assert_eq!(e.len(), d, "entity length");
        for (name, m) in [
            ("W1", self.w1),
            ("W2", self.w2),
            ("Wrel1", self.w_rel1),
            ("Wrel2", self.w_rel2),
        ] {
            assert_eq!(m.len(), d * d, "{name} shape");
        }
        for (name, v) in [("b1", self.b1), ("b2", self.b2), ("e_R", self.e_rel)] {
            assert_eq!(v.len(), d, "{name} length");
        }
    }

    fn gated(&self, w: &[f64], e: &[f64], w_rel: &[f64], bias: &[f64]) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        self.check(e);
        let proj = mat_vec(w, e, self.dim);
        let gate = mat_vec(w_rel, self.e_rel, self.dim);
        let out = proj.iter().zip(&gate).zip(bias).map(|((p, g), b)| p * g + b).collect();
        (out, proj, gate)
    }

    pub fn left_gated(&self, e1: &[f64]) -> Vec<f64> {
        self.gated(self.w1, e1, self.w_rel1, self.b1).0
    }

    pub fn right_gated(&self, e2: &[f64]) -> Vec<f64> {
        self.gated(self.w2, e2, self.w_rel2, self.b2).0
    }
}

pub fn score_hadamard(params: &HadamardParams<'_>, e1: &[f64], e2: &[f64]) -> f64 {
    -dot(&params.left_gated(e1), &params.right_gated(e2))
}

/// Adds `coeff · ∂g` for the value of [`score_hadamard`].
pub fn accumulate_hadamard_grad(
    params: &HadamardParams<'_>,
    e1: &[f64],
    e2: &[f64],
    coeff: f64,
    grad: HadamardGrad<'_>,
    g_e1: &mut [f64],
    g_e2: &mut [f64],
) {
    let d = params.dim;
    let (left, proj1, gate1) = params.gated(params.w1, e1, params.w_rel1, params.b1);
    let (right, proj2, gate2) = params.gated(params.w2, e2, params.w_rel2, params.b2);

    let sides = [
        (
            &right,
            &proj1,
            &gate1,
            e1,
            params.w1,
            params.w_rel1,
            grad.w1,
            grad.w_rel1,
            grad.b1,
            g_e1,
        ),
        (
            &left,
            &proj2,
            &gate2,
            e2,
            params.w2,
            params.w_rel2,
            grad.w2,
            grad.w_rel2,
            grad.b2,
            g_e2,
        ),
    ];
    for (other, proj, gate, e, w, w_rel, g_w, g_wrel, g_b, g_e) in sides {
        // ∂g/∂(this gated vector) = −coeff · other
        let up: Vec<f64> = other.iter().map(|o| -coeff * o).collect();
        axpy(g_b, 1.0, &up);
        let d_proj: Vec<f64> = up.iter().zip(gate).map(|(u, g)| u * g).collect();
        let d_gate: Vec<f64> = up.iter().zip(proj).map(|(u, p)| u * p).collect();
        add_outer(g_w, 1.0, &d_proj, e);
        axpy(g_e, 1.0, &vec_mat(&d_proj, w, d));
        add_outer(g_wrel, 1.0, &d_gate, params.e_rel);
        axpy(grad.e_rel, 1.0, &vec_mat(&d_gate, w_rel, d));
    }
}
