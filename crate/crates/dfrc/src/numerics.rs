//! Dense complex linear algebra: Hermitian and generalized eigendecompositions,
//! positive-definite solves, and log-determinant evaluation.
//!
//! Everything operates on `DMatrix<Complex64>` at the sizes this crate needs
//! (a few hundred rows at most). Tolerances are relative to Frobenius norms so
//! the contracts are scale-free.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Dense complex matrix used throughout the crate.
pub type CMat = DMatrix<Complex64>;
/// Dense complex column vector.
pub type CVec = DVector<Complex64>;

/// Relative tolerance for the Hermitian precondition checks.
pub const HERMITIAN_RTOL: f64 = 1e-10;

/// Relative tolerance below which an eigenvalue is considered a PSD violation.
pub const PSD_RTOL: f64 = 1e-9;

/// Frobenius norm.
pub fn frob(a: &CMat) -> f64 {
    a.norm()
}

/// Index of the first non-finite entry, scanning row-major.
pub fn first_nonfinite(a: &CMat) -> Option<(usize, usize)> {
    for r in 0..a.nrows() {
        for c in 0..a.ncols() {
            let v = a[(r, c)];
            if !v.re.is_finite() || !v.im.is_finite() {
                return Some((r, c));
            }
        }
    }
    None
}

/// Fails if the matrix contains NaN or infinite entries.
pub fn check_finite(a: &CMat) -> Result<()> {
    match first_nonfinite(a) {
        Some((row, col)) => Err(Error::NonFinite { row, col }),
        None => Ok(()),
    }
}

/// Builds a matrix from row-major entries, rejecting non-finite values.
pub fn cmat_from_rows(rows: usize, cols: usize, entries: &[Complex64]) -> Result<CMat> {
    if entries.len() != rows * cols {
        return Err(Error::DimensionMismatch {
            context: format!(
                "expected {} entries for a {rows}x{cols} matrix, got {}",
                rows * cols,
                entries.len()
            ),
        });
    }
    let m = CMat::from_fn(rows, cols, |r, c| entries[r * cols + c]);
    check_finite(&m)?;
    Ok(m)
}

/// `(A + A^H) / 2`; absorbs round-off before a decomposition.
pub fn symmetrize(a: &CMat) -> CMat {
    (a + a.adjoint()).scale(0.5)
}

/// Verifies that `a` is square and Hermitian within `HERMITIAN_RTOL * ||a||_F`.
pub fn check_hermitian(a: &CMat) -> Result<()> {
    if a.nrows() != a.ncols() {
        return Err(Error::NotSquare {
            rows: a.nrows(),
            cols: a.ncols(),
        });
    }
    let asymmetry = frob(&(a - a.adjoint())) * 0.5;
    let tolerance = HERMITIAN_RTOL * frob(a).max(f64::MIN_POSITIVE);
    if asymmetry > tolerance {
        return Err(Error::NotHermitian {
            asymmetry,
            tolerance,
        });
    }
    Ok(())
}

/// Eigendecomposition of a Hermitian matrix.
///
/// Returns eigenvalues in ascending order and the matching unit-norm
/// eigenvectors as columns, so that `A v_k = lambda_k v_k`.
pub fn hermitian_eig(a: &CMat) -> Result<(Vec<f64>, CMat)> {
    check_hermitian(a)?;
    let sym = symmetrize(a);
    let eig = sym.symmetric_eigen();
    // nalgebra does not order the spectrum; sort ascending and permute columns.
    let n = eig.eigenvalues.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = CMat::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    Ok((values, vectors))
}

/// Lower Cholesky factor `L` with `B = L L^H`.
///
/// Reports the first pivot at which the factorization loses positivity.
pub fn cholesky_lower(b: &CMat) -> Result<CMat> {
    check_hermitian(b)?;
    let n = b.nrows();
    let mut l = CMat::zeros(n, n);
    for j in 0..n {
        let mut d = b[(j, j)].re;
        for k in 0..j {
            d -= l[(j, k)].norm_sqr();
        }
        if !(d > 0.0) || !d.is_finite() {
            return Err(Error::NotPositiveDefinite { pivot: j });
        }
        let djj = d.sqrt();
        l[(j, j)] = Complex64::new(djj, 0.0);
        for i in (j + 1)..n {
            let mut s = b[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)].conj();
            }
            l[(i, j)] = s / djj;
        }
    }
    Ok(l)
}

/// Solves `L Y = X` for lower-triangular `L`.
fn solve_lower(l: &CMat, x: &CMat) -> CMat {
    let n = l.nrows();
    let mut y = x.clone();
    for c in 0..y.ncols() {
        for i in 0..n {
            let mut s = y[(i, c)];
            for k in 0..i {
                s -= l[(i, k)] * y[(k, c)];
            }
            y[(i, c)] = s / l[(i, i)];
        }
    }
    y
}

/// Solves `L^H Y = X` for lower-triangular `L`.
fn solve_lower_adjoint(l: &CMat, x: &CMat) -> CMat {
    let n = l.nrows();
    let mut y = x.clone();
    for c in 0..y.ncols() {
        for i in (0..n).rev() {
            let mut s = y[(i, c)];
            for k in (i + 1)..n {
                s -= l[(k, i)].conj() * y[(k, c)];
            }
            y[(i, c)] = s / l[(i, i)].conj();
        }
    }
    y
}

/// Solves `B Y = X` for Hermitian positive-definite `B`.
pub fn solve_hpd(b: &CMat, x: &CMat) -> Result<CMat> {
    if b.nrows() != x.nrows() {
        return Err(Error::DimensionMismatch {
            context: format!(
                "solve_hpd: B is {}x{} but X has {} rows",
                b.nrows(),
                b.ncols(),
                x.nrows()
            ),
        });
    }
    let l = cholesky_lower(b)?;
    let y = solve_lower(&l, x);
    Ok(solve_lower_adjoint(&l, &y))
}

/// Principal eigenpair of the generalized problem `A v = lambda B v`.
///
/// `A` must be Hermitian PSD and `B` Hermitian PD. Solved by Cholesky
/// whitening: with `B = L L^H`, the pair comes from the standard Hermitian
/// eigendecomposition of `L^-1 A L^-H`. The returned vector has unit norm.
pub fn generalized_eig_principal(a: &CMat, b: &CMat) -> Result<(f64, CVec)> {
    check_hermitian(a)?;
    if a.nrows() != b.nrows() {
        return Err(Error::DimensionMismatch {
            context: format!("generalized_eig: A is {0}x{0}, B is {1}x{1}", a.nrows(), b.nrows()),
        });
    }
    let l = cholesky_lower(b)?;
    // C = L^-1 A L^-H, assembled as L^-1 (L^-1 A^H)^H to stay one solve deep.
    let la = solve_lower(&l, &symmetrize(a));
    let c = symmetrize(&solve_lower(&l, &la.adjoint()).adjoint());
    let (values, vectors) = hermitian_eig(&c)?;
    let top = values.len() - 1;
    let w = vectors.column(top).into_owned();
    let v_raw = solve_lower_adjoint(&l, &CMat::from_column_slice(w.len(), 1, w.as_slice()));
    let mut v = CVec::from_column_slice(v_raw.as_slice());
    let norm = v.norm();
    if norm > 0.0 {
        v /= Complex64::new(norm, 0.0);
    }
    Ok((values[top], v))
}

/// `log2 |I + A|` for Hermitian PSD `A`, as the eigenvalue sum
/// `sum_k log2(1 + lambda_k)`.
pub fn logdet_plus(a: &CMat) -> Result<f64> {
    let (values, _) = hermitian_eig(a)?;
    let tolerance = PSD_RTOL * frob(a);
    let mut total = 0.0;
    for &lambda in &values {
        if lambda < -tolerance {
            return Err(Error::NotPositiveSemidefinite {
                eigenvalue: lambda,
                tolerance,
            });
        }
        total += lambda.max(0.0).ln_1p();
    }
    Ok(total / std::f64::consts::LN_2)
}
