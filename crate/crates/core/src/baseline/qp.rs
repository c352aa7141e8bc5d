//! Direct solve of one proximal subproblem, used to cross-check the closed
//! forms of the linear-proximal step.
//!
//! With `H = Σ_ij a_ij M_ji` (the Hermitian matrix of the linearized
//! objective) the subproblem's stationarity and linearized power constraint
//! are, in the stacked real variables `x = [Re p; Im p]`,
//!
//! ```text
//! [ −2H_R + (2λᵏ + ρ)·I   2x_k ] [ x ]   [ ρ·x_k           ]
//! [  2x_kᵀ                  0  ] [ λ ] = [ P_t + ‖x_k‖²    ]
//! ```
//!
//! where `H_R = [[Re H, −Im H], [Im H, Re H]]`. This is one dense LU solve in
//! `2N_t + 1` unknowns and never touches `Θ`.

use nalgebra::{DMatrix, DVector, Matrix4};

use crate::error::{Error, Result};
use crate::fim::FimQuadraticForms;
use crate::scenario::{CMatrix, CVector};

fn stack_matrix(h: &CMatrix) -> DMatrix<f64> {
    let n = h.nrows();
    DMatrix::from_fn(2 * n, 2 * n, |r, c| {
        let z = h[(r % n, c % n)];
        match (r < n, c < n) {
            (true, true) | (false, false) => z.re,
            (true, false) => -z.im,
            (false, true) => z.im,
        }
    })
}

fn stack_vector(v: &CVector) -> DVector<f64> {
    let n = v.len();
    DVector::from_fn(2 * n, |r, _| if r < n { v[r].re } else { v[r - n].im })
}

fn unstack_vector(x: &DVector<f64>, n: usize) -> CVector {
    CVector::from_fn(n, |r, _| num_complex::Complex64::new(x[r], x[r + n]))
}

/// Solves the subproblem at `p_k` with weights `a = F(p_k)⁻²`, dual value
/// `lambda_k` and penalty `rho`; returns `(λ^{k+1}, p^{k+1})`.
pub fn subproblem_qp_oracle(
    forms: &FimQuadraticForms,
    a: &Matrix4<f64>,
    p_k: &CVector,
    lambda_k: f64,
    rho: f64,
    power_budget: f64,
) -> Result<(f64, CVector)> {
    let n = forms.n_tx();
    if p_k.len() != n {
        return Err(Error::UnsupportedDimension { expected: n, got: p_k.len() });
    }
    let h = stack_matrix(&forms.weighted(a));
    let xk = stack_vector(p_k);
    let m = 2 * n;

    let mut kkt = DMatrix::<f64>::zeros(m + 1, m + 1);
    kkt.view_mut((0, 0), (m, m)).copy_from(&(-2.0 * h));
    for i in 0..m {
        kkt[(i, i)] += 2.0 * lambda_k + rho;
        kkt[(i, m)] = 2.0 * xk[i];
        kkt[(m, i)] = 2.0 * xk[i];
    }
    let mut rhs = DVector::<f64>::zeros(m + 1);
    rhs.rows_mut(0, m).copy_from(&(rho * &xk));
    rhs[m] = power_budget + xk.norm_squared();

    let sol = kkt
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::NumericalFailure("subproblem KKT system is singular".into()))?;
    Ok((sol[m], unstack_vector(&sol.rows(0, m).into_owned(), n)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    #[test]
    fn stacking_preserves_products() {
        let h = CMatrix::from_fn(3, 3, |r, c| Complex64::new(r as f64 - c as f64, (r * c) as f64 + 0.5));
        let v = CVector::from_fn(3, |r, _| Complex64::new(r as f64 + 1.0, -(r as f64)));
        let direct = stack_vector(&(&h * &v));
        let stacked = stack_matrix(&h) * stack_vector(&v);
        assert!((direct - stacked).norm() < 1e-12);
        assert_eq!(unstack_vector(&stack_vector(&v), 3), v);
    }
}
