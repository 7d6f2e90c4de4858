use serde::Serialize;

use crate::error::{Error, Result};
use crate::hawkes::model::{HawkesModel, KernelSpec, Matrix};

/// Kernel-norm matrix `||phi_ij|| = int_0^inf phi_ij(t) dt` with its spectral radius.
///
/// Entry `(i, j)` is the expected number of type-`i` events directly
/// triggered by one type-`j` event.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KernelNorms {
    pub matrix: Matrix,
    pub spectral_radius: f64,
    /// Set when the spectral radius is at least 1 (no stationary regime).
    pub supercritical: bool,
}

pub fn kernel_norms(model: &HawkesModel) -> Result<KernelNorms> {
    let matrix = model.kernel().norms()?;
    let spectral_radius = spectral_radius(&matrix);
    Ok(KernelNorms {
        matrix,
        spectral_radius,
        supercritical: spectral_radius >= 1.0,
    })
}

impl KernelSpec {
    pub fn norms(&self) -> Result<Matrix> {
        let m = self.dim();
        let mut out = Matrix::zeros(m);
        for i in 0..m {
            for j in 0..m {
                out[(i, j)] = match self {
                    KernelSpec::Exponential { alpha, beta } => alpha[(i, j)] / beta[(i, j)],
                    KernelSpec::SumExponentials { alpha, beta } => {
                        alpha.iter().zip(beta).map(|(a, b)| a[(i, j)] / b).sum()
                    }
                    KernelSpec::PowerLaw { alpha, c, beta } => {
                        let (a, c, b) = (alpha[(i, j)], c[(i, j)], beta[(i, j)]);
                        if !(b > 1.0 && c > 0.0) {
                            return Err(Error::domain(format!(
                                "power-law kernel ({}, {}) is not integrable: c = {c}, beta = {b}",
                                i + 1,
                                j + 1
                            )));
                        }
                        a * c.powf(1.0 - b) / (b - 1.0)
                    }
                };
            }
        }
        Ok(out)
    }
}

/// Spectral radius of a nonnegative matrix by Gelfand's formula
/// `rho = lim ||K^k||^(1/k)`, evaluated with repeated squaring on a log scale.
pub fn spectral_radius(matrix: &Matrix) -> f64 {
    let mut a = matrix.clone();
    let mut log_scale = 0.0f64;
    let mut power = 1.0f64;
    let mut estimate = a.norm_inf();
    for _ in 0..60 {
        let norm = a.norm_inf();
        if norm == 0.0 || !norm.is_finite() {
            return if norm == 0.0 { 0.0 } else { f64::INFINITY };
        }
        log_scale += norm.ln();
        estimate = (log_scale / power).exp();
        a = a.map(|v| v / norm);
        a = a.matmul(&a);
        log_scale *= 2.0;
        power *= 2.0;
    }
    estimate
}

/// Stationary mean rates `(I - K)^{-1} mu` of a subcritical model.
pub fn stationary_rates(model: &HawkesModel) -> Result<Vec<f64>> {
    let norms = kernel_norms(model)?;
    if norms.supercritical {
        return Err(Error::Unstable {
            spectral_radius: norms.spectral_radius,
        });
    }
    let m = model.dim();
    let mut a = Matrix::identity(m);
    for ((i, j), v) in norms.matrix.iter() {
        a[(i, j)] -= v;
    }
    solve(a, model.mu().to_vec())
}

/// Gaussian elimination with partial pivoting.
pub(crate) fn solve(mut a: Matrix, mut b: Vec<f64>) -> Result<Vec<f64>> {
    let n = a.dim();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&r, &s| a[(r, col)].abs().total_cmp(&a[(s, col)].abs()))
            .unwrap_or(col);
        if a[(pivot, col)].abs() < 1e-300 {
            return Err(Error::Numeric {
                message: "singular linear system".into(),
                diagnostics: format!("zero pivot in column {col}"),
            });
        }
        if pivot != col {
            for k in 0..n {
                let tmp = a[(col, k)];
                a[(col, k)] = a[(pivot, k)];
                a[(pivot, k)] = tmp;
            }
            b.swap(col, pivot);
        }
        for r in col + 1..n {
            let f = a[(r, col)] / a[(col, col)];
            if f == 0.0 {
                continue;
            }
            for k in col..n {
                a[(r, k)] -= f * a[(col, k)];
            }
            b[r] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let tail: f64 = (r + 1..n).map(|k| a[(r, k)] * x[k]).sum();
        x[r] = (b[r] - tail) / a[(r, r)];
    }
    Ok(x)
}
