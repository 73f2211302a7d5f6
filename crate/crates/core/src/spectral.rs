//! Dense symmetric kernels: eigendecomposition, spectral matrix functions,
//! Gram-Schmidt orthonormalization and a log-scaled Jacobi SVD for
//! column-graded factors.
//!
//! Every matrix function here goes through an eigendecomposition
//! `A = V diag(d) Vᵀ` and applies the scalar function to `d`, so the real
//! branches of the root and logarithm are the unique symmetric ones.

use std::fmt;
use std::sync::OnceLock;

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};

/// Largest argument for which `f64::exp` is finite.
const EXP_OVERFLOW: f64 = 709.78;

/// Relative threshold below which an eigenvalue of a PSD matrix counts as zero.
pub const PSD_TOLERANCE: f64 = 1e-12;

/// Default relative residual below which Gram-Schmidt reports rank deficiency.
pub const GRAM_SCHMIDT_TOLERANCE: f64 = 1e-12;

/// A real symmetric matrix, exactly symmetric by construction.
#[derive(Clone, PartialEq)]
pub struct SymmetricMatrix(DMatrix<f64>);

impl fmt::Debug for SymmetricMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SymmetricMatrix{}", self.0)
    }
}

fn symmetrize(mut m: DMatrix<f64>) -> DMatrix<f64> {
    let n = m.nrows();
    for i in 0..n {
        for j in (i + 1)..n {
            let s = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = s;
            m[(j, i)] = s;
        }
    }
    m
}

impl SymmetricMatrix {
    /// Validates shape and finiteness, then symmetrizes as `(A + Aᵀ)/2`.
    pub fn from_matrix(m: DMatrix<f64>) -> Result<Self> {
        if m.nrows() == 0 || m.nrows() != m.ncols() {
            return Err(Error::input(format!(
                "expected a non-empty square matrix, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        if m.iter().any(|v| !v.is_finite()) {
            return Err(Error::input("matrix has non-finite entries"));
        }
        Ok(SymmetricMatrix(symmetrize(m)))
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        SymmetricMatrix::from_matrix(matrix_from_rows(rows)?)
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        SymmetricMatrix(DMatrix::from_diagonal(&DVector::from_column_slice(diag)))
    }

    pub fn zeros(n: usize) -> Self {
        SymmetricMatrix(DMatrix::zeros(n, n))
    }

    pub fn identity(n: usize) -> Self {
        SymmetricMatrix(DMatrix::identity(n, n))
    }

    /// Symmetrizes without validating; for results of trusted arithmetic.
    pub(crate) fn from_matrix_unchecked(m: DMatrix<f64>) -> Self {
        SymmetricMatrix(symmetrize(m))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.0
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.0.row_iter().map(|r| r.iter().copied().collect()).collect()
    }

    pub fn scale(&self, s: f64) -> Self {
        SymmetricMatrix(&self.0 * s)
    }

    pub fn add(&self, other: &SymmetricMatrix) -> Result<Self> {
        Error::check_dim(self.dim(), other.dim())?;
        Ok(SymmetricMatrix(&self.0 + &other.0))
    }

    pub fn sub(&self, other: &SymmetricMatrix) -> Result<Self> {
        Error::check_dim(self.dim(), other.dim())?;
        Ok(SymmetricMatrix(&self.0 - &other.0))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.norm()
    }

    /// `g · A · gᵀ` for a square `g` of matching size.
    pub fn congruence(&self, g: &DMatrix<f64>) -> Result<Self> {
        Error::check_dim(self.dim(), g.ncols())?;
        Error::check_dim(g.nrows(), g.ncols())?;
        Ok(SymmetricMatrix::from_matrix_unchecked(g * &self.0 * g.transpose()))
    }
}

pub(crate) fn matrix_from_rows(rows: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    let n = rows.len();
    if n == 0 {
        return Err(Error::input("matrix has no rows"));
    }
    for (i, r) in rows.iter().enumerate() {
        if r.len() != n {
            return Err(Error::input(format!(
                "row {i} has {} entries, expected {n}",
                r.len()
            )));
        }
    }
    Ok(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
}

/// Largest `|a_ij - a_ji|` of a square matrix.
pub fn max_asymmetry(m: &DMatrix<f64>) -> f64 {
    let n = m.nrows().min(m.ncols());
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in (i + 1)..n {
            worst = worst.max((m[(i, j)] - m[(j, i)]).abs());
        }
    }
    worst
}

#[derive(Debug, Clone)]
struct Roots {
    sqrt: DMatrix<f64>,
    inv_sqrt: DMatrix<f64>,
}

impl Roots {
    fn from_spectrum(eig: &SpectralDecomposition) -> Self {
        Roots {
            sqrt: eig.map_eigenvalues(|d| d.max(0.0).sqrt()),
            inv_sqrt: eig.map_eigenvalues(|d| 1.0 / d.sqrt()),
        }
    }
}

/// A symmetric positive-definite matrix: a point of the SPD manifold.
///
/// The symmetric square root and its inverse are computed lazily from one
/// eigendecomposition and then shared by every geometric operation.
#[derive(Clone)]
pub struct SpdPoint {
    matrix: SymmetricMatrix,
    roots: OnceLock<Roots>,
}

impl fmt::Debug for SpdPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SpdPoint{}", self.matrix.0)
    }
}

impl PartialEq for SpdPoint {
    fn eq(&self, other: &Self) -> bool {
        self.matrix == other.matrix
    }
}

impl SpdPoint {
    /// Accepts `A` if its smallest eigenvalue exceeds `m·ε·λ_max`.
    pub fn new(matrix: SymmetricMatrix) -> Result<Self> {
        let eig = eig_sym(&matrix)?;
        check_positive_definite(&eig, "matrix is not positive definite")?;
        Ok(SpdPoint {
            matrix,
            roots: OnceLock::from(Roots::from_spectrum(&eig)),
        })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        SpdPoint::new(SymmetricMatrix::from_rows(rows)?)
    }

    pub fn from_diagonal(diag: &[f64]) -> Result<Self> {
        SpdPoint::new(SymmetricMatrix::from_diagonal(diag))
    }

    pub fn identity(n: usize) -> Self {
        SpdPoint {
            matrix: SymmetricMatrix::identity(n),
            roots: OnceLock::from(Roots {
                sqrt: DMatrix::identity(n, n),
                inv_sqrt: DMatrix::identity(n, n),
            }),
        }
    }

    /// Builds the point and its roots from a decomposition with positive eigenvalues.
    pub(crate) fn from_positive_spectrum(eig: &SpectralDecomposition) -> Self {
        SpdPoint {
            matrix: SymmetricMatrix::from_matrix_unchecked(eig.reconstruct()),
            roots: OnceLock::from(Roots::from_spectrum(eig)),
        }
    }

    pub(crate) fn from_matrix_unchecked(m: DMatrix<f64>) -> Self {
        SpdPoint {
            matrix: SymmetricMatrix::from_matrix_unchecked(m),
            roots: OnceLock::new(),
        }
    }

    fn roots(&self) -> &Roots {
        self.roots.get_or_init(|| {
            Roots::from_spectrum(&eig_sym(&self.matrix).expect("validated SPD matrix is finite"))
        })
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn as_symmetric(&self) -> &SymmetricMatrix {
        &self.matrix
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.matrix.0
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.matrix.to_rows()
    }

    /// `A^{1/2}`.
    pub fn sqrt(&self) -> &DMatrix<f64> {
        &self.roots().sqrt
    }

    /// `A^{-1/2}`.
    pub fn inv_sqrt(&self) -> &DMatrix<f64> {
        &self.roots().inv_sqrt
    }

    /// `g · A · gᵀ`; errors if `g` is singular enough to break definiteness.
    pub fn congruence(&self, g: &DMatrix<f64>) -> Result<SpdPoint> {
        SpdPoint::new(self.matrix.congruence(g)?)
    }
}

fn check_positive_definite(eig: &SpectralDecomposition, what: &str) -> Result<()> {
    let m = eig.eigenvalues.len() as f64;
    let largest = eig.eigenvalues[0];
    let smallest = eig.eigenvalues[eig.eigenvalues.len() - 1];
    if smallest <= 0.0 || smallest <= m * f64::EPSILON * largest.abs() {
        return Err(Error::Domain {
            what: what.to_string(),
            eigenvalue: smallest,
        });
    }
    Ok(())
}

/// Eigenvalues in descending order with orthonormal eigenvector columns.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    pub eigenvalues: DVector<f64>,
    pub eigenvectors: DMatrix<f64>,
}

impl SpectralDecomposition {
    /// `V · diag(f(d)) · Vᵀ`.
    pub fn map_eigenvalues(&self, f: impl Fn(f64) -> f64) -> DMatrix<f64> {
        let v = &self.eigenvectors;
        let mut scaled = v.clone();
        for (j, &d) in self.eigenvalues.iter().enumerate() {
            let fd = f(d);
            scaled.column_mut(j).scale_mut(fd);
        }
        scaled * v.transpose()
    }

    pub fn reconstruct(&self) -> DMatrix<f64> {
        self.map_eigenvalues(|d| d)
    }
}

/// Symmetric eigendecomposition with eigenvalues sorted descending.
///
/// Ties keep whatever order the backend produced.
pub fn eig_sym(a: &SymmetricMatrix) -> Result<SpectralDecomposition> {
    if a.0.iter().any(|v| !v.is_finite()) {
        return Err(Error::input("matrix has non-finite entries"));
    }
    let n = a.dim();
    let eig = SymmetricEigen::new(a.0.clone());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
    let eigenvalues = DVector::from_iterator(n, order.iter().map(|&i| eig.eigenvalues[i]));
    let eigenvectors = DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    Ok(SpectralDecomposition {
        eigenvalues,
        eigenvectors,
    })
}

/// Matrix exponential `Exp(A)`.
pub fn sym_exp(a: &SymmetricMatrix) -> Result<SpdPoint> {
    let mut eig = eig_sym(a)?;
    let top = eig.eigenvalues[0];
    let bottom = eig.eigenvalues[eig.eigenvalues.len() - 1];
    if top > EXP_OVERFLOW {
        return Err(Error::Range(format!("exp({top}) overflows")));
    }
    if bottom < -EXP_OVERFLOW {
        return Err(Error::Range(format!("exp({bottom}) underflows to zero")));
    }
    eig.eigenvalues.apply(|d| *d = d.exp());
    Ok(SpdPoint::from_positive_spectrum(&eig))
}

/// The unique symmetric logarithm of an SPD matrix.
pub fn sym_log(a: &SpdPoint) -> Result<SymmetricMatrix> {
    let eig = eig_sym(a.as_symmetric())?;
    check_positive_definite(&eig, "logarithm of a non-positive-definite matrix")?;
    Ok(SymmetricMatrix::from_matrix_unchecked(eig.map_eigenvalues(f64::ln)))
}

/// `A^e` for positive semidefinite `A`, the unique PSD branch.
///
/// Eigenvalues at or below `PSD_TOLERANCE·max(1, λ_max)` in magnitude are
/// treated as zero; more negative ones are rejected, as is a non-positive
/// exponent on a singular matrix.
pub fn sym_power(a: &SymmetricMatrix, exponent: f64) -> Result<SymmetricMatrix> {
    if !exponent.is_finite() {
        return Err(Error::input("exponent must be finite"));
    }
    let eig = eig_sym(a)?;
    let threshold = PSD_TOLERANCE * eig.eigenvalues[0].max(1.0);
    let bottom = eig.eigenvalues[eig.eigenvalues.len() - 1];
    if bottom < -threshold {
        return Err(Error::Domain {
            what: "power of a matrix that is not positive semidefinite".into(),
            eigenvalue: bottom,
        });
    }
    if exponent <= 0.0 && bottom <= threshold {
        return Err(Error::Domain {
            what: format!("power {exponent} of a singular matrix"),
            eigenvalue: bottom,
        });
    }
    let out = eig.map_eigenvalues(|d| if d <= threshold { 0.0 } else { d.powf(exponent) });
    Ok(SymmetricMatrix::from_matrix_unchecked(out))
}

/// `tr(A·B)`.
pub fn frobenius_inner(a: &SymmetricMatrix, b: &SymmetricMatrix) -> Result<f64> {
    Error::check_dim(a.dim(), b.dim())?;
    let n = a.dim();
    let mut trace = 0.0;
    for i in 0..n {
        trace += a.0.row(i).iter().zip(b.0.column(i).iter()).map(|(x, y)| x * y).sum::<f64>();
    }
    Ok(trace)
}

/// A matrix with orthonormal columns.
#[derive(Debug, Clone)]
pub struct OrthonormalFrame {
    columns: DMatrix<f64>,
}

impl OrthonormalFrame {
    pub fn columns(&self) -> &DMatrix<f64> {
        &self.columns
    }

    pub fn into_inner(self) -> DMatrix<f64> {
        self.columns
    }

    pub fn len(&self) -> usize {
        self.columns.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.columns.ncols() == 0
    }

    /// Extends the frame to an orthonormal basis of the whole ambient space.
    pub fn complete(&self) -> OrthonormalFrame {
        let n = self.columns.nrows();
        let mut basis: Vec<DVector<f64>> =
            self.columns.column_iter().map(|c| c.into_owned()).collect();
        while basis.len() < n {
            // the standard vector with the largest residual is well separated
            // from the current span
            let (_, best) = (0..n)
                .map(|i| {
                    let mut v = DVector::zeros(n);
                    v[i] = 1.0;
                    for _ in 0..2 {
                        for u in &basis {
                            let c = u.dot(&v);
                            v.axpy(-c, u, 1.0);
                        }
                    }
                    (v.norm(), v)
                })
                .max_by(|a, b| a.0.total_cmp(&b.0))
                .expect("n > 0");
            let norm = best.norm();
            basis.push(best / norm);
        }
        OrthonormalFrame {
            columns: DMatrix::from_columns(&basis),
        }
    }
}

/// Modified Gram-Schmidt with one reorthogonalization pass.
///
/// Output satisfies `span(u_1..u_k) = span(w_1..w_k)` and `⟨u_k, w_k⟩ > 0`.
pub fn gram_schmidt(w: &DMatrix<f64>) -> Result<OrthonormalFrame> {
    gram_schmidt_with_tolerance(w, GRAM_SCHMIDT_TOLERANCE)
}

pub fn gram_schmidt_with_tolerance(w: &DMatrix<f64>, tol: f64) -> Result<OrthonormalFrame> {
    if w.ncols() > w.nrows() {
        return Err(Error::Degenerate {
            column: w.nrows(),
            residual: 0.0,
        });
    }
    if w.iter().any(|v| !v.is_finite()) {
        return Err(Error::input("matrix has non-finite entries"));
    }
    let mut u = DMatrix::zeros(w.nrows(), w.ncols());
    for k in 0..w.ncols() {
        let original = w.column(k);
        let scale = original.norm();
        let mut v = original.into_owned();
        for _pass in 0..2 {
            for j in 0..k {
                let uj = u.column(j);
                let c = uj.dot(&v);
                v.axpy(-c, &uj, 1.0);
            }
        }
        let r = v.norm();
        if scale == 0.0 || r <= tol * scale {
            return Err(Error::Degenerate {
                column: k,
                residual: if scale == 0.0 { 0.0 } else { r / scale },
            });
        }
        u.set_column(k, &(v / r));
    }
    Ok(OrthonormalFrame { columns: u })
}

/// Singular values (as logarithms) and left singular vectors of
/// `factor · diag(exp(log_scales))`.
#[derive(Debug, Clone)]
pub struct GradedSvd {
    /// `ln σ_k`, descending.
    pub log_singular_values: Vec<f64>,
    /// Unit left singular vectors, one column per singular value.
    pub left_vectors: DMatrix<f64>,
}

/// One-sided (Hestenes) Jacobi SVD of a column-scaled factor, carried out
/// with every column stored as `exp(L)·v`, `‖v‖ = 1`.
///
/// One-sided Jacobi is insensitive to column scaling, so singular values of
/// `F·diag(e^{s})` come out with high relative accuracy even when the scales
/// span hundreds of orders of magnitude, and no scale is ever exponentiated.
pub fn graded_left_svd(factor: &DMatrix<f64>, log_scales: &[f64]) -> Result<GradedSvd> {
    let k = factor.ncols();
    Error::check_dim(k, log_scales.len())?;
    if k > factor.nrows() {
        return Err(Error::input("graded factor has more columns than rows"));
    }
    let mut logs = Vec::with_capacity(k);
    let mut vecs: Vec<DVector<f64>> = Vec::with_capacity(k);
    for (j, &s) in log_scales.iter().enumerate() {
        let col = factor.column(j);
        let norm = col.norm();
        if !s.is_finite() || !norm.is_finite() {
            return Err(Error::Range(format!("column {j} scale is not finite")));
        }
        if norm == 0.0 {
            return Err(Error::Degenerate {
                column: j,
                residual: 0.0,
            });
        }
        logs.push(norm.ln() + s);
        vecs.push(col / norm);
    }

    let tol = 8.0 * f64::EPSILON * (factor.nrows() as f64).sqrt();
    let mut converged = false;
    for _sweep in 0..100 {
        let mut rotated = false;
        for i in 0..k {
            for j in (i + 1)..k {
                let (a, b) = if logs[i] >= logs[j] { (i, j) } else { (j, i) };
                let cos = vecs[a].dot(&vecs[b]);
                if cos.abs() <= tol {
                    continue;
                }
                rotated = true;
                let rho = (logs[b] - logs[a]).exp();
                // ζ·ρ and t/ρ stay finite when ρ underflows
                let rz = (rho * rho - 1.0) / (2.0 * cos);
                let t_over_rho = rz.signum() / (rz.abs() + (rho * rho + rz * rz).sqrt());
                let t = t_over_rho * rho;
                let c = 1.0 / (1.0 + t * t).sqrt();
                let new_a = &vecs[a] * c - &vecs[b] * (c * t_over_rho * rho * rho);
                let new_b = &vecs[a] * (c * t_over_rho) + &vecs[b] * c;
                for (idx, v) in [(a, new_a), (b, new_b)] {
                    let n = v.norm();
                    if n == 0.0 || !n.is_finite() {
                        return Err(Error::Degenerate {
                            column: idx,
                            residual: n,
                        });
                    }
                    logs[idx] += n.ln();
                    vecs[idx] = v / n;
                }
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::Range("graded Jacobi SVD did not converge".into()));
    }
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&i, &j| logs[j].total_cmp(&logs[i]));
    let log_singular_values = order.iter().map(|&i| logs[i]).collect();
    let cols: Vec<DVector<f64>> = order.iter().map(|&i| vecs[i].clone()).collect();
    Ok(GradedSvd {
        log_singular_values,
        left_vectors: DMatrix::from_columns(&cols),
    })
}

/// Orthonormal basis of the symmetric matrices under `tr(AB)`:
/// `e_ii` and `(e_ij + e_ji)/√2` for `i < j`, in row-major upper-triangle order.
pub fn symmetric_basis(m: usize) -> Vec<SymmetricMatrix> {
    let mut out = Vec::with_capacity(m * (m + 1) / 2);
    for i in 0..m {
        for j in i..m {
            let mut e = DMatrix::zeros(m, m);
            if i == j {
                e[(i, i)] = 1.0;
            } else {
                e[(i, j)] = std::f64::consts::FRAC_1_SQRT_2;
                e[(j, i)] = std::f64::consts::FRAC_1_SQRT_2;
            }
            out.push(SymmetricMatrix(e));
        }
    }
    out
}

/// Coordinates of `a` in [`symmetric_basis`].
pub fn symmetric_coordinates(a: &SymmetricMatrix) -> DVector<f64> {
    let m = a.dim();
    let mut out = Vec::with_capacity(m * (m + 1) / 2);
    for i in 0..m {
        for j in i..m {
            out.push(if i == j {
                a.0[(i, i)]
            } else {
                std::f64::consts::SQRT_2 * a.0[(i, j)]
            });
        }
    }
    DVector::from_vec(out)
}

/// Inverse of [`symmetric_coordinates`].
pub fn from_symmetric_coordinates(m: usize, coords: &DVector<f64>) -> Result<SymmetricMatrix> {
    Error::check_dim(m * (m + 1) / 2, coords.len())?;
    let mut e = DMatrix::zeros(m, m);
    let mut k = 0;
    for i in 0..m {
        for j in i..m {
            if i == j {
                e[(i, i)] = coords[k];
            } else {
                let v = coords[k] * std::f64::consts::FRAC_1_SQRT_2;
                e[(i, j)] = v;
                e[(j, i)] = v;
            }
            k += 1;
        }
    }
    Ok(SymmetricMatrix(e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_symmetric(rng: &mut ChaCha8Rng, m: usize, scale: f64) -> SymmetricMatrix {
        let a = DMatrix::from_fn(m, m, |_, _| rng.random_range(-1.0..1.0) * scale);
        SymmetricMatrix::from_matrix(a).unwrap()
    }

    fn random_psd(rng: &mut ChaCha8Rng, m: usize) -> SymmetricMatrix {
        let g = DMatrix::from_fn(m, m, |_, _| rng.random_range(-1.0..1.0));
        SymmetricMatrix::from_matrix(&g * g.transpose()).unwrap()
    }

    /// Scaling-and-squaring Taylor evaluation of `Exp`.
    fn series_exp(a: &DMatrix<f64>) -> DMatrix<f64> {
        let n = a.nrows();
        let norm = a.norm();
        let squarings = if norm > 0.5 { (norm / 0.5).log2().ceil() as i32 } else { 0 };
        let scaled = a / 2f64.powi(squarings);
        let mut term = DMatrix::identity(n, n);
        let mut sum = DMatrix::identity(n, n);
        for k in 1..30 {
            term = &term * &scaled / k as f64;
            sum += &term;
        }
        for _ in 0..squarings {
            sum = &sum * &sum;
        }
        sum
    }

    #[test]
    fn eig_diagonal_and_swap() {
        let d = eig_sym(&SymmetricMatrix::from_diagonal(&[1.0, 3.0])).unwrap();
        assert_eq!(d.eigenvalues.as_slice(), &[3.0, 1.0]);
        assert!((d.eigenvectors[(1, 0)].abs() - 1.0).abs() < 1e-15);
        assert!((d.eigenvectors[(0, 1)].abs() - 1.0).abs() < 1e-15);

        let s = SymmetricMatrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let d = eig_sym(&s).unwrap();
        assert!((d.eigenvalues[0] - 1.0).abs() < 1e-15);
        assert!((d.eigenvalues[1] + 1.0).abs() < 1e-15);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let v0 = d.eigenvectors.column(0);
        let v1 = d.eigenvectors.column(1);
        assert!((v0[0] * v0[1] - 0.5).abs() < 1e-14 && (v0[0].abs() - h).abs() < 1e-14);
        assert!((v1[0] * v1[1] + 0.5).abs() < 1e-14);
    }

    #[test]
    fn eig_reconstructs_random_input() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..50 {
            let a = random_symmetric(&mut rng, 4, 3.0);
            let d = eig_sym(&a).unwrap();
            let err = (d.reconstruct() - a.as_matrix()).norm();
            assert!(err <= 1e-10 * (1.0 + a.frobenius_norm()));
            let gram = d.eigenvectors.transpose() * &d.eigenvectors;
            assert!((gram - DMatrix::identity(4, 4)).norm() <= 4e-12);
            assert!(d.eigenvalues.as_slice().windows(2).all(|w| w[0] >= w[1]));
        }
    }

    #[test]
    fn eig_rejects_non_finite() {
        let bad = SymmetricMatrix::from_matrix_unchecked(DMatrix::from_element(2, 2, f64::NAN));
        assert!(matches!(eig_sym(&bad), Err(Error::Input(_))));
        assert!(SymmetricMatrix::from_rows(&[vec![f64::INFINITY]]).is_err());
    }

    #[test]
    fn exp_and_log_known_values() {
        let e = sym_exp(&SymmetricMatrix::zeros(3)).unwrap();
        assert!((e.as_matrix() - DMatrix::identity(3, 3)).norm() < 1e-15);
        let e = sym_exp(&SymmetricMatrix::from_diagonal(&[2f64.ln(), 3f64.ln()])).unwrap();
        assert!((e.as_matrix() - DMatrix::from_diagonal(&DVector::from_vec(vec![2.0, 3.0]))).norm() < 1e-14);
        let l = sym_log(&SpdPoint::identity(3)).unwrap();
        assert!(l.frobenius_norm() < 1e-15);
        let l = sym_log(&SpdPoint::from_diagonal(&[2.0, 3.0]).unwrap()).unwrap();
        assert!((l.as_matrix()[(0, 0)] - 2f64.ln()).abs() < 1e-15);
        assert!((l.as_matrix()[(1, 1)] - 3f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn exp_matches_series_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for m in 1..=5 {
            let a = random_symmetric(&mut rng, m, 2.0);
            let spectral = sym_exp(&a).unwrap();
            let series = series_exp(a.as_matrix());
            assert!((spectral.as_matrix() - &series).norm() <= 1e-10 * series.norm().max(1.0));
        }
    }

    #[test]
    fn exp_overflow_is_range_error() {
        let a = SymmetricMatrix::from_diagonal(&[800.0, 0.0]);
        assert!(matches!(sym_exp(&a), Err(Error::Range(_))));
    }

    #[test]
    fn log_rejects_non_pd_naming_eigenvalue() {
        let sneaky = SpdPoint::from_matrix_unchecked(DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, -2.0])));
        match sym_log(&sneaky) {
            Err(Error::Domain { eigenvalue, .. }) => assert_eq!(eigenvalue, -2.0),
            other => panic!("expected domain error, got {other:?}"),
        }
    }

    #[test]
    fn log_exp_roundtrip() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for m in 1..=6 {
            let b = random_symmetric(&mut rng, m, 1.5);
            let back = sym_log(&sym_exp(&b).unwrap()).unwrap();
            assert!((back.as_matrix() - b.as_matrix()).norm() < 1e-10);
        }
    }

    #[test]
    fn power_known_values_and_roots() {
        let a = SymmetricMatrix::from_rows(&[vec![2.0, 0.5], vec![0.5, 1.0]]).unwrap();
        assert!((sym_power(&a, 1.0).unwrap().as_matrix() - a.as_matrix()).norm() < 1e-14);
        let r = sym_power(&SymmetricMatrix::from_diagonal(&[4.0, 9.0]), 0.5).unwrap();
        assert!((r.as_matrix() - DMatrix::from_diagonal(&DVector::from_vec(vec![2.0, 3.0]))).norm() < 1e-14);

        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let a = random_psd(&mut rng, 4);
        let root = sym_power(&a, 1.0 / 7.0).unwrap();
        let back = root.as_matrix().pow(7);
        assert!((back - a.as_matrix()).norm() < 1e-8);
    }

    #[test]
    fn power_domain_errors() {
        let neg = SymmetricMatrix::from_diagonal(&[1.0, -0.5]);
        assert!(matches!(sym_power(&neg, 0.5), Err(Error::Domain { .. })));
        let singular = SymmetricMatrix::from_diagonal(&[1.0, 0.0]);
        assert!(matches!(sym_power(&singular, -1.0), Err(Error::Domain { .. })));
        // tiny negative noise is clamped
        let noisy = SymmetricMatrix::from_diagonal(&[1.0, -1e-14]);
        let r = sym_power(&noisy, 0.5).unwrap();
        assert_eq!(r.as_matrix()[(1, 1)], 0.0);
    }

    #[test]
    fn gram_schmidt_examples() {
        let id = gram_schmidt(&DMatrix::identity(3, 3)).unwrap();
        assert_eq!(id.columns(), &DMatrix::identity(3, 3));

        let w = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 0.0, 1.0]);
        let u = gram_schmidt(&w).unwrap();
        assert!((u.columns() - DMatrix::identity(2, 2)).norm() < 1e-15);

        let theta: f64 = 0.3;
        let q = DMatrix::from_row_slice(2, 2, &[theta.cos(), -theta.sin(), theta.sin(), theta.cos()]);
        let u = gram_schmidt(&q).unwrap();
        assert!((u.columns() - &q).norm() < 1e-15);
    }

    #[test]
    fn gram_schmidt_span_nesting_and_sign() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for m in 1..=6 {
            let w = DMatrix::from_fn(m, m, |_, _| rng.random_range(-1.0..1.0));
            let u = gram_schmidt(&w).unwrap().into_inner();
            let gram = u.transpose() * &u;
            assert!((gram - DMatrix::identity(m, m)).norm() <= 1e-12 * m as f64);
            for k in 0..m {
                assert!(u.column(k).dot(&w.column(k)) > 0.0);
                // w_k lies in span(u_1..u_k): projection residual vanishes
                let uk = u.columns(0, k + 1);
                let residual = w.column(k) - &uk * (uk.transpose() * w.column(k));
                assert!(residual.norm() <= 1e-12 * w.column(k).norm());
            }
        }
    }

    #[test]
    fn gram_schmidt_detects_rank_deficiency() {
        let w = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 1.0, 2.0]);
        assert!(matches!(gram_schmidt(&w), Err(Error::Degenerate { column: 1, .. })));
    }

    #[test]
    fn frame_completion_is_orthonormal() {
        let w = DMatrix::from_row_slice(3, 1, &[1.0, 1.0, 0.0]);
        let full = gram_schmidt(&w).unwrap().complete().into_inner();
        assert!((full.transpose() * &full - DMatrix::identity(3, 3)).norm() < 1e-14);
        assert!((full.column(0) - w.column(0) / 2f64.sqrt()).norm() < 1e-15);
    }

    #[test]
    fn frobenius_inner_examples() {
        let i2 = SymmetricMatrix::identity(2);
        assert_eq!(frobenius_inner(&i2, &i2).unwrap(), 2.0);
        let a = SymmetricMatrix::from_diagonal(&[1.0, 2.0]);
        let b = SymmetricMatrix::from_diagonal(&[3.0, 4.0]);
        assert_eq!(frobenius_inner(&a, &b).unwrap(), 11.0);
        assert!(frobenius_inner(&a, &SymmetricMatrix::identity(3)).is_err());

        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let a = random_symmetric(&mut rng, 5, 1.0);
        let b = random_symmetric(&mut rng, 5, 1.0);
        let entrywise: f64 = a.as_matrix().iter().zip(b.as_matrix().iter()).map(|(x, y)| x * y).sum();
        assert!((frobenius_inner(&a, &b).unwrap() - entrywise).abs() < 1e-13);
    }

    #[test]
    fn graded_svd_matches_plain_svd_on_mild_scales() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let f = DMatrix::from_fn(4, 3, |_, _| rng.random_range(-1.0..1.0));
        let scales = [0.5, -0.2, 0.1];
        let b = &f * DMatrix::from_diagonal(&DVector::from_vec(scales.iter().map(|s: &f64| s.exp()).collect()));
        let svd = graded_left_svd(&f, &scales).unwrap();
        let mut plain: Vec<f64> = b.clone().svd(false, false).singular_values.iter().copied().collect();
        plain.sort_by(|a, b| b.total_cmp(a));
        for (l, s) in svd.log_singular_values.iter().zip(&plain) {
            assert!((l.exp() - s).abs() < 1e-13);
        }
        // B Bᵀ = Y Σ² Yᵀ
        let sig2 = DVector::from_vec(svd.log_singular_values.iter().map(|l| (2.0 * l).exp()).collect());
        let rebuilt = &svd.left_vectors * DMatrix::from_diagonal(&sig2) * svd.left_vectors.transpose();
        assert!((rebuilt - &b * b.transpose()).norm() < 1e-13);
    }

    #[test]
    fn graded_svd_resolves_extreme_grading() {
        // F = upper unit triangle: with grading s, the columns of F·diag(e^s)
        // have singular values close to e^{s_j}·(diagonal of the QR factor)
        let f = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 0.0, 1.0]);
        let svd = graded_left_svd(&f, &[0.0, -2000.0]).unwrap();
        assert!(svd.log_singular_values[0].abs() < 1e-15);
        assert!((svd.log_singular_values[1] + 2000.0).abs() < 1e-12);
        assert!((svd.left_vectors.column(0).into_owned() - DVector::from_vec(vec![1.0, 0.0])).norm() < 1e-15);
    }

    #[test]
    fn symmetric_coordinates_roundtrip() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let a = random_symmetric(&mut rng, 4, 1.0);
        let c = symmetric_coordinates(&a);
        assert!((c.norm() - a.frobenius_norm()).abs() < 1e-14);
        let back = from_symmetric_coordinates(4, &c).unwrap();
        assert!((back.as_matrix() - a.as_matrix()).norm() < 1e-15);
        let basis = symmetric_basis(3);
        for (i, e) in basis.iter().enumerate() {
            for (j, f) in basis.iter().enumerate() {
                let expected = if i == j { 1.0 } else { 0.0 };
                assert!((frobenius_inner(e, f).unwrap() - expected).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn spd_rejects_indefinite() {
        assert!(matches!(
            SpdPoint::from_rows(&[vec![1.0, 2.0], vec![2.0, 1.0]]),
            Err(Error::Domain { .. })
        ));
        let p = SpdPoint::from_rows(&[vec![4.0, 1.0], vec![1.0, 3.0]]).unwrap();
        let s = p.sqrt();
        assert!((s * s - p.as_matrix()).norm() < 1e-14);
        assert!((p.inv_sqrt() * p.as_matrix() * p.inv_sqrt() - DMatrix::identity(2, 2)).norm() < 1e-14);
    }

    #[test]
    fn symmetrization_is_exact() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 0.1 + 1e-14, 0.1, 2.0]);
        let s = SymmetricMatrix::from_matrix(m).unwrap();
        assert_eq!(s.as_matrix()[(0, 1)], s.as_matrix()[(1, 0)]);
    }
}
