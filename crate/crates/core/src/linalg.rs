//! Thin dense linear-algebra layer over `faer`.

use faer::linalg::solvers::{PartialPivLu, Solve};
use faer::{Mat, Side};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

pub type RMat = Mat<f64>;
pub type CMat = Mat<C64>;

pub fn to_complex(a: &RMat) -> CMat {
    CMat::from_fn(a.nrows(), a.ncols(), |i, j| C64::new(a[(i, j)], 0.0))
}

pub fn mat_vec(a: &RMat, x: &[C64]) -> Vec<C64> {
    assert_eq!(a.ncols(), x.len());
    let mut y = vec![C64::new(0.0, 0.0); a.nrows()];
    for j in 0..a.ncols() {
        let xj = x[j];
        if xj == C64::new(0.0, 0.0) {
            continue;
        }
        for (i, yi) in y.iter_mut().enumerate() {
            *yi += a[(i, j)] * xj;
        }
    }
    y
}

pub fn mat_vec_real(a: &RMat, x: &[f64]) -> Vec<f64> {
    assert_eq!(a.ncols(), x.len());
    let mut y = vec![0.0; a.nrows()];
    for (j, &xj) in x.iter().enumerate() {
        for (i, yi) in y.iter_mut().enumerate() {
            *yi += a[(i, j)] * xj;
        }
    }
    y
}

/// `Re(xᴴ A x)` for a real symmetric `A`.
pub fn quad_form(a: &RMat, x: &[C64]) -> f64 {
    let ax = mat_vec(a, x);
    x.iter().zip(&ax).map(|(xi, yi)| (xi.conj() * yi).re).sum()
}

pub fn quad_form_real(a: &RMat, x: &[f64]) -> f64 {
    let ax = mat_vec_real(a, x);
    x.iter().zip(&ax).map(|(xi, yi)| xi * yi).sum()
}

/// `Σ w_i x_i` with real weights.
pub fn row_dot(w: &[f64], x: &[C64]) -> C64 {
    w.iter().zip(x).map(|(&wi, &xi)| xi * wi).sum()
}

pub fn norm2(x: &[C64]) -> f64 {
    x.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
}

/// Relative asymmetry `max|A − Aᵀ| / max|A|`.
pub fn asymmetry(a: &RMat) -> f64 {
    let mut num: f64 = 0.0;
    let mut den: f64 = 0.0;
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            num = num.max((a[(i, j)] - a[(j, i)]).abs());
            den = den.max(a[(i, j)].abs());
        }
    }
    if den == 0.0 {
        0.0
    } else {
        num / den
    }
}

fn check_pivots<T>(u: faer::MatRef<'_, T>, abs: impl Fn(&T) -> f64, what: &str) -> Result<()> {
    let n = u.nrows().min(u.ncols());
    let mut max: f64 = 0.0;
    let mut min = f64::INFINITY;
    for i in 0..n {
        let v = abs(&u[(i, i)]);
        max = max.max(v);
        min = min.min(v);
    }
    if !(min.is_finite() && max.is_finite()) || min <= max * 1e3 * f64::EPSILON || max == 0.0 {
        return Err(Error::Singular(format!(
            "{what}: pivot ratio {:.3e} (min {min:.3e}, max {max:.3e})",
            if max > 0.0 { min / max } else { 0.0 }
        )));
    }
    Ok(())
}

/// LU factorization of a real matrix, applied to complex right-hand sides by
/// splitting real and imaginary parts.
pub struct RealLu {
    lu: PartialPivLu<f64>,
    n: usize,
}

impl RealLu {
    pub fn new(a: &RMat, what: &str) -> Result<Self> {
        let lu = a.partial_piv_lu();
        check_pivots(lu.U(), |v: &f64| v.abs(), what)?;
        Ok(RealLu { lu, n: a.nrows() })
    }

    pub fn solve(&self, b: &[C64]) -> Vec<C64> {
        assert_eq!(b.len(), self.n);
        let rhs = RMat::from_fn(self.n, 2, |i, j| if j == 0 { b[i].re } else { b[i].im });
        let x = self.lu.solve(&rhs);
        (0..self.n)
            .map(|i| C64::new(x[(i, 0)], x[(i, 1)]))
            .collect()
    }

    pub fn solve_mat(&self, b: &RMat) -> RMat {
        self.lu.solve(b)
    }
}

pub struct ComplexLu {
    lu: PartialPivLu<C64>,
    n: usize,
}

impl ComplexLu {
    pub fn new(a: &CMat, what: &str) -> Result<Self> {
        let lu = a.partial_piv_lu();
        check_pivots(lu.U(), |v: &C64| v.norm(), what)?;
        Ok(ComplexLu { lu, n: a.nrows() })
    }

    pub fn solve(&self, b: &[C64]) -> Vec<C64> {
        assert_eq!(b.len(), self.n);
        let rhs = CMat::from_fn(self.n, 1, |i, _| b[i]);
        let x = self.lu.solve(&rhs);
        (0..self.n).map(|i| x[(i, 0)]).collect()
    }

    pub fn solve_mat(&self, b: &CMat) -> CMat {
        self.lu.solve(b)
    }
}

/// Eigenvalues (ascending) and orthonormal eigenvectors of a real symmetric matrix.
pub fn sym_eigen(a: &RMat) -> Result<(Vec<f64>, RMat)> {
    let evd = a
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::Eigen(format!("symmetric eigensolver: {e:?}")))?;
    let vals = evd.S().column_vector().iter().copied().collect();
    Ok((vals, evd.U().to_owned()))
}

/// Solves `K x = λ M x` for symmetric `K` and symmetric positive definite `M`.
/// Eigenvalues ascend; eigenvectors are `M`-orthonormal columns.
pub fn gen_sym_eigen(k: &RMat, m: &RMat) -> Result<(Vec<f64>, RMat)> {
    let n = k.nrows();
    let llt = m
        .llt(Side::Lower)
        .map_err(|e| Error::Eigen(format!("mass matrix is not positive definite: {e:?}")))?;
    let l = llt.L().to_owned();
    // C = L⁻¹ K L⁻ᵀ
    let mut x = k.clone();
    faer::linalg::triangular_solve::solve_lower_triangular_in_place(
        l.as_ref(),
        x.as_mut(),
        faer::Par::Seq,
    );
    let mut c = x.transpose().to_owned();
    faer::linalg::triangular_solve::solve_lower_triangular_in_place(
        l.as_ref(),
        c.as_mut(),
        faer::Par::Seq,
    );
    let sym = RMat::from_fn(n, n, |i, j| 0.5 * (c[(i, j)] + c[(j, i)]));
    let (vals, y) = sym_eigen(&sym)?;
    // φ = L⁻ᵀ y
    let mut phi = y;
    faer::linalg::triangular_solve::solve_upper_triangular_in_place(
        l.transpose(),
        phi.as_mut(),
        faer::Par::Seq,
    );
    Ok((vals, phi))
}

/// Same pencil as [`gen_sym_eigen`] for positive definite `K`, solved as
/// `M x = θ K x` with `λ = 1/θ`. The low end of the spectrum then carries
/// relative rather than absolute (`ε·λ_max`) accuracy.
pub fn gen_sym_eigen_low(k: &RMat, m: &RMat) -> Result<(Vec<f64>, RMat)> {
    let n = k.nrows();
    let (theta, y) = gen_sym_eigen(m, k)?;
    let mut vals = Vec::with_capacity(n);
    let mut phi = RMat::zeros(n, n);
    for (col, j) in (0..n).rev().enumerate() {
        if theta[j] <= 0.0 {
            return Err(Error::Eigen(format!(
                "mass matrix has nonpositive Ritz value {}",
                theta[j]
            )));
        }
        vals.push(1.0 / theta[j]);
        let s = theta[j].sqrt();
        for i in 0..n {
            phi[(i, col)] = y[(i, j)] / s;
        }
    }
    Ok((vals, phi))
}

/// All eigenvalues of a real (non-symmetric) matrix.
pub fn eigenvalues(a: &RMat) -> Result<Vec<C64>> {
    a.eigenvalues().map_err(|e| {
        Error::Eigen(format!(
            "{}x{} non-symmetric eigensolver: {e:?}",
            a.nrows(),
            a.ncols()
        ))
    })
}

/// Singular values of a complex matrix, non-increasing.
pub fn singular_values(a: &CMat) -> Result<Vec<f64>> {
    a.singular_values()
        .map_err(|e| Error::Eigen(format!("svd: {e:?}")))
}

/// Lower Cholesky factor of a symmetric positive definite matrix.
pub fn cholesky_lower(a: &RMat) -> Result<RMat> {
    let llt = a
        .llt(Side::Lower)
        .map_err(|e| Error::Eigen(format!("matrix is not positive definite: {e:?}")))?;
    Ok(llt.L().to_owned())
}

pub fn column(a: &RMat, j: usize) -> Vec<f64> {
    (0..a.nrows()).map(|i| a[(i, j)]).collect()
}
