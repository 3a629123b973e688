//! Weighted linear least squares.

use nalgebra::{DMatrix, DVector};

use crate::error::{HbtError, Result};

const RCOND: f64 = 1e-13;

#[derive(Debug, Clone, PartialEq)]
pub struct LinearFit {
    pub coefficients: Vec<f64>,
    /// Covariance of the coefficients, `(AᵀWA)⁻¹`, row-major.
    pub covariance: Vec<Vec<f64>>,
    pub chi2: f64,
    pub dof: usize,
}

impl LinearFit {
    pub fn std_err(&self, i: usize) -> f64 {
        self.covariance[i][i].max(0.0).sqrt()
    }
}

/// Minimizes `Σ ((y_i − Σ_j b_j·f_j(x_i))/σ_i)²` for the basis `f_j`.
///
/// `sigma = None` means unit weights. Columns are normalized before an SVD
/// solve so that polynomial bases with very different scales stay well
/// conditioned.
pub fn weighted_least_squares<B>(x: &[f64], y: &[f64], sigma: Option<&[f64]>, n_basis: usize, basis: B) -> Result<LinearFit>
where
    B: Fn(f64, usize) -> f64,
{
    let n = x.len();
    if y.len() != n || sigma.is_some_and(|s| s.len() != n) {
        return Err(HbtError::invalid("y", "length mismatch"));
    }
    if n_basis == 0 || n < n_basis {
        return Err(HbtError::SingularFit);
    }
    if let Some(s) = sigma {
        if s.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
            return Err(HbtError::invalid("sigma", "must be positive and finite"));
        }
    }
    let w = |i: usize| sigma.map_or(1.0, |s| 1.0 / s[i]);
    let mut a = DMatrix::from_fn(n, n_basis, |i, j| basis(x[i], j) * w(i));
    let b = DVector::from_fn(n, |i, _| y[i] * w(i));
    let mut scale = vec![1.0; n_basis];
    for (j, s) in scale.iter_mut().enumerate() {
        let norm = a.column(j).norm();
        if norm > 0.0 {
            *s = norm;
            a.column_mut(j).unscale_mut(norm);
        }
    }
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.max();
    if !(smax > 0.0) || svd.singular_values.min() <= RCOND * smax {
        return Err(HbtError::SingularFit);
    }
    let sol = svd.solve(&b, 0.0).map_err(|_| HbtError::SingularFit)?;
    let v_t = svd.v_t.as_ref().ok_or(HbtError::SingularFit)?;
    let inv_s2 = svd.singular_values.map(|s| 1.0 / (s * s));
    let cov_scaled = v_t.transpose() * DMatrix::from_diagonal(&inv_s2) * v_t;

    let coefficients: Vec<f64> = (0..n_basis).map(|j| sol[j] / scale[j]).collect();
    let covariance = (0..n_basis)
        .map(|i| (0..n_basis).map(|j| cov_scaled[(i, j)] / (scale[i] * scale[j])).collect())
        .collect();
    let resid = &a * &sol - &b;
    Ok(LinearFit {
        coefficients,
        covariance,
        chi2: resid.norm_squared(),
        dof: n - n_basis,
    })
}

/// Polynomial `Σ b_j x^j` of the given degree.
pub fn polyfit(x: &[f64], y: &[f64], sigma: Option<&[f64]>, degree: usize) -> Result<LinearFit> {
    weighted_least_squares(x, y, sigma, degree + 1, |x, j| x.powi(j as i32))
}
