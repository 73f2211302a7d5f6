//! Radial fields on the SPD manifold.
//!
//! A boundary point `ξ` is represented by a base point `p` and a unit
//! tangent `z` at `p`; the geodesic ray `γ(t) = exp_p(t·z)` belongs to `ξ`.
//! The field value at `x` is the unit initial velocity of the ray from `x`
//! asymptotic to `γ`. In closed form, with `p^{-1/2} z p^{-1/2} = V D Vᵀ`
//! (`D` descending), `W = x^{-1/2} p^{1/2} V` and `U` the Gram-Schmidt
//! orthonormalization of the columns of `W`:
//!
//! ```text
//! ξ_x = x^{1/2} U D Uᵀ x^{1/2}
//! ```
//!
//! The same quantity is also available as the finite-`t` limit
//! `log_x(γ(t)) / d(x, γ(t))` ([`radial_field_oracle`]), evaluated without
//! Gram-Schmidt.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::geometry::{color, exp_map, metric_inner, metric_norm, tangent_basis, whiten};
use crate::spectral::{
    eig_sym, graded_left_svd, gram_schmidt, GradedSvd, OrthonormalFrame, SpdPoint,
    SpectralDecomposition, SymmetricMatrix,
};

/// Allowed deviation of `‖z‖_p` from 1 before construction refuses to normalize.
pub const NORMALIZATION_SLACK: f64 = 1e-6;

/// Busemann ray marching starts here and doubles up to the cap.
pub const BUSEMANN_T_START: f64 = 8.0;
pub const BUSEMANN_T_CAP: f64 = 4096.0;

/// Beyond this `t·max|d|` the ray parameter swamps the `O(1)` terms in double precision.
const RAY_PARAMETER_LIMIT: f64 = 1e13;

/// A point of the boundary at infinity, given as `(p, z)` with `‖z‖_p = 1`.
#[derive(Debug, Clone)]
pub struct BoundaryDirection {
    base: SpdPoint,
    dir: SymmetricMatrix,
    spectrum: SpectralDecomposition,
}

impl BoundaryDirection {
    /// Normalizes `dir` if its metric norm is within [`NORMALIZATION_SLACK`] of 1.
    pub fn new(base: SpdPoint, dir: SymmetricMatrix) -> Result<Self> {
        let norm = metric_norm(&base, &dir)?;
        if (norm - 1.0).abs() > NORMALIZATION_SLACK {
            return Err(Error::input(format!(
                "boundary direction must have unit metric norm, got {norm}"
            )));
        }
        Self::from_tangent(base, dir)
    }

    /// Direction of any non-zero tangent vector at `base`.
    pub fn from_tangent(base: SpdPoint, v: SymmetricMatrix) -> Result<Self> {
        let norm = metric_norm(&base, &v)?;
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::input("boundary direction needs a non-zero tangent"));
        }
        let dir = v.scale(1.0 / norm);
        let spectrum = eig_sym(&whiten(&base, &dir))?;
        Ok(BoundaryDirection {
            base,
            dir,
            spectrum,
        })
    }

    /// Same boundary point with a caller-chosen eigenbasis `V` of
    /// `p^{-1/2} z p^{-1/2}` (eigenvalues kept descending).
    ///
    /// Used to check that the field does not depend on how ties in the
    /// spectrum are resolved.
    pub fn with_eigenbasis(&self, eigenvectors: DMatrix<f64>) -> Result<Self> {
        let m = self.base.dim();
        if eigenvectors.nrows() != m || eigenvectors.ncols() != m {
            return Err(Error::input("eigenbasis has the wrong shape"));
        }
        let ortho = (eigenvectors.transpose() * &eigenvectors - DMatrix::identity(m, m)).norm();
        if ortho > 1e-10 {
            return Err(Error::input("eigenbasis is not orthogonal"));
        }
        let spectrum = SpectralDecomposition {
            eigenvalues: self.spectrum.eigenvalues.clone(),
            eigenvectors,
        };
        let whitened = whiten(&self.base, &self.dir);
        if (spectrum.reconstruct() - whitened.as_matrix()).norm() > 1e-10 {
            return Err(Error::input("eigenbasis does not diagonalize the direction"));
        }
        Ok(BoundaryDirection {
            base: self.base.clone(),
            dir: self.dir.clone(),
            spectrum,
        })
    }

    pub fn base(&self) -> &SpdPoint {
        &self.base
    }

    pub fn dir(&self) -> &SymmetricMatrix {
        &self.dir
    }

    pub fn dim(&self) -> usize {
        self.base.dim()
    }

    /// Eigendecomposition of `p^{-1/2} z p^{-1/2}`, eigenvalues descending.
    pub fn spectrum(&self) -> &SpectralDecomposition {
        &self.spectrum
    }

    /// `γ(t) = exp_p(t·z)`, evaluated directly.
    pub fn ray_point(&self, t: f64) -> Result<SpdPoint> {
        exp_map(&self.base, &self.dir.scale(t))
    }

    /// Image under the isometry `y ↦ g·y·gᵀ`.
    pub fn congruence(&self, g: &DMatrix<f64>) -> Result<Self> {
        let base = self.base.congruence(g)?;
        let dir = self.dir.congruence(g)?;
        BoundaryDirection::from_tangent(base, dir)
    }

    /// The same boundary point re-based at `q = γ(s)`, i.e. `(q, ξ_q)`.
    pub fn rebased_along_ray(&self, s: f64) -> Result<Self> {
        let q = self.ray_point(s)?;
        let z = radial_field(self, &q)?;
        BoundaryDirection::from_tangent(q, z)
    }
}

/// The ingredients of the closed form at one point `x`.
#[derive(Debug, Clone)]
pub struct RadialFrame {
    /// `x^{-1/2} p^{1/2} V`.
    pub w: DMatrix<f64>,
    pub u: OrthonormalFrame,
    /// Eigenvalues of `p^{-1/2} z p^{-1/2}`, descending.
    pub d: DVector<f64>,
}

fn ray_factor(xi: &BoundaryDirection, x: &SpdPoint) -> Result<DMatrix<f64>> {
    Error::check_dim(xi.dim(), x.dim())?;
    Ok(x.inv_sqrt() * xi.base.sqrt() * &xi.spectrum.eigenvectors)
}

pub fn radial_frame(xi: &BoundaryDirection, x: &SpdPoint) -> Result<RadialFrame> {
    let w = ray_factor(xi, x)?;
    let u = gram_schmidt(&w)?;
    Ok(RadialFrame {
        w,
        u,
        d: xi.spectrum.eigenvalues.clone(),
    })
}

/// `ξ_x = x^{1/2} U D Uᵀ x^{1/2}`.
pub fn radial_field(xi: &BoundaryDirection, x: &SpdPoint) -> Result<SymmetricMatrix> {
    let frame = radial_frame(xi, x)?;
    let u = frame.u.columns();
    let mut ud = u.clone();
    for (j, &dj) in frame.d.iter().enumerate() {
        ud.column_mut(j).scale_mut(dj);
    }
    Ok(color(x, &(ud * u.transpose())))
}

fn check_ray_parameter(xi: &BoundaryDirection, t: f64) -> Result<()> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::input(format!("ray parameter must be positive, got {t}")));
    }
    let spread = xi.spectrum.eigenvalues.iter().fold(0.0f64, |a, d| a.max(d.abs()));
    if t * spread > RAY_PARAMETER_LIMIT {
        return Err(Error::Range(format!(
            "ray parameter t = {t} exceeds double precision; evaluate the limit in the log domain"
        )));
    }
    Ok(())
}

/// Spectrum of `x^{-1/2} γ(t) x^{-1/2} = W e^{tD} Wᵀ` as a graded SVD of
/// `W e^{tD/2}`: its eigenvalues are `σ_k²` with eigenvectors the left
/// singular vectors.
fn ray_spectrum(xi: &BoundaryDirection, x: &SpdPoint, t: f64) -> Result<GradedSvd> {
    check_ray_parameter(xi, t)?;
    let w = ray_factor(xi, x)?;
    let scales: Vec<f64> = xi.spectrum.eigenvalues.iter().map(|d| 0.5 * t * d).collect();
    graded_left_svd(&w, &scales)
}

/// `log_x(γ(t)) / d(x, γ(t))` with `γ(t) = exp_p(t·z)`.
///
/// `γ(t)` is assembled in the eigenbasis of `p^{-1/2} z p^{-1/2}` and its
/// relative spectrum with `x` is kept in log form, so large `t` neither
/// overflows nor loses the small eigenvalues.
pub fn radial_field_oracle(xi: &BoundaryDirection, x: &SpdPoint, t: f64) -> Result<SymmetricMatrix> {
    let svd = ray_spectrum(xi, x, t)?;
    let logs: Vec<f64> = svd.log_singular_values.iter().map(|l| 2.0 * l).collect();
    let dist = logs.iter().map(|l| l * l).sum::<f64>().sqrt();
    if dist == 0.0 {
        return Err(Error::input("x lies on the ray at parameter t"));
    }
    let y = &svd.left_vectors;
    let mut scaled = y.clone();
    for (j, l) in logs.iter().enumerate() {
        scaled.column_mut(j).scale_mut(l / dist);
    }
    Ok(color(x, &(scaled * y.transpose())))
}

/// `d(x, γ(t)) − t`.
pub fn ray_excess(xi: &BoundaryDirection, x: &SpdPoint, t: f64) -> Result<f64> {
    let svd = ray_spectrum(xi, x, t)?;
    let dist = svd
        .log_singular_values
        .iter()
        .map(|l| (2.0 * l).powi(2))
        .sum::<f64>()
        .sqrt();
    Ok(dist - t)
}

/// Busemann function `b_ξ(x) = lim_{t→∞} d(x, γ(t)) − t`, normalized so
/// that `b_ξ(p) = 0`.
///
/// `t` doubles from [`BUSEMANN_T_START`] to [`BUSEMANN_T_CAP`]. The excess
/// behaves like `b + a/t` for large `t`, so each pair of consecutive
/// excesses is combined into the extrapolant `2·e(2t) − e(t)`; marching
/// stops when two successive extrapolants differ by less than `tol/2`.
pub fn busemann(xi: &BoundaryDirection, x: &SpdPoint, tol: f64) -> Result<f64> {
    if !(tol > 0.0) {
        return Err(Error::input("busemann tolerance must be positive"));
    }
    let mut t = BUSEMANN_T_START;
    let mut prev_excess = ray_excess(xi, x, t)?;
    let mut prev_estimate: Option<f64> = None;
    while t < BUSEMANN_T_CAP {
        t *= 2.0;
        let excess = ray_excess(xi, x, t)?;
        let estimate = 2.0 * excess - prev_excess;
        if let Some(prev) = prev_estimate {
            if (estimate - prev).abs() < 0.5 * tol {
                return Ok(estimate);
            }
        }
        prev_estimate = Some(estimate);
        prev_excess = excess;
    }
    let last = prev_estimate.unwrap_or(prev_excess);
    Err(Error::Convergence {
        t,
        previous: prev_excess,
        last,
    })
}

/// `H(t) = [Σ_i e^{t·d_i} w_i w_iᵀ]^{1/t}`.
#[derive(Debug, Clone)]
pub struct PowerMean {
    pub t: f64,
    pub value: SymmetricMatrix,
}

fn check_descending(d: &[f64]) -> Result<()> {
    if d.is_empty() {
        return Err(Error::input("empty exponent vector"));
    }
    if d.iter().any(|v| !v.is_finite()) {
        return Err(Error::input("exponents must be finite"));
    }
    if d.windows(2).any(|p| p[0] < p[1]) {
        return Err(Error::input("exponents must be sorted in descending order"));
    }
    Ok(())
}

/// `H(t)` in the shifted form `e^{d_1}·[Σ_i e^{t(d_i − d_1)} w_i w_iᵀ]^{1/t}`.
///
/// The columns of `w` (at least as many rows as columns) must be linearly
/// independent; when `w` is tall the result has rank `w.ncols()`.
pub fn power_mean_finite(d: &[f64], w: &DMatrix<f64>, t: f64) -> Result<PowerMean> {
    check_descending(d)?;
    Error::check_dim(d.len(), w.ncols())?;
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::input(format!("t must be positive, got {t}")));
    }
    gram_schmidt(w)?;
    let top = d[0];
    let scales: Vec<f64> = d.iter().map(|di| 0.5 * t * (di - top)).collect();
    let svd = graded_left_svd(w, &scales)?;
    let y = &svd.left_vectors;
    let mut scaled = y.clone();
    for (j, l) in svd.log_singular_values.iter().enumerate() {
        scaled.column_mut(j).scale_mut((top + 2.0 * l / t).exp());
    }
    Ok(PowerMean {
        t,
        value: SymmetricMatrix::from_matrix_unchecked(scaled * y.transpose()),
    })
}

/// `lim_{t→∞} H(t) = U diag(e^{d_1}, …, e^{d_m}) Uᵀ`, `U` the Gram-Schmidt
/// basis of the columns of the square matrix `w`.
pub fn power_mean_limit(d: &[f64], w: &DMatrix<f64>) -> Result<SymmetricMatrix> {
    if w.nrows() != w.ncols() {
        return Err(Error::input("power_mean_limit needs a square basis matrix"));
    }
    power_mean_limit_degenerate(d, w)
}

/// Limit of `H(t)` for `m` independent columns in `R^{m'}`, `m' ≥ m`:
/// `U₂ diag(e^{d_1}, …, e^{d_m}, 0, …, 0) U₂ᵀ` where `U₂` extends the
/// Gram-Schmidt basis by the orthogonal complement.
pub fn power_mean_limit_degenerate(d: &[f64], w: &DMatrix<f64>) -> Result<SymmetricMatrix> {
    check_descending(d)?;
    Error::check_dim(d.len(), w.ncols())?;
    let u = gram_schmidt(w)?;
    let full = u.complete().into_inner();
    let mut scaled = full.clone();
    for j in 0..full.ncols() {
        let s = if j < d.len() { d[j].exp() } else { 0.0 };
        scaled.column_mut(j).scale_mut(s);
    }
    Ok(SymmetricMatrix::from_matrix_unchecked(scaled * full.transpose()))
}

/// Central finite-difference Jacobian of `x ↦ ξ_x` in an orthonormal
/// tangent basis `{E_k}` at `x`.
#[derive(Debug, Clone)]
pub struct RadialJacobian {
    pub basis: Vec<SymmetricMatrix>,
    /// `(ξ(x + hE_l) − ξ(x − hE_l)) / 2h` for each basis direction.
    pub derivatives: Vec<SymmetricMatrix>,
    /// `J[k][l] = ⟨E_k, derivatives[l]⟩_x`.
    pub coefficients: DMatrix<f64>,
}

impl RadialJacobian {
    /// Directional derivative along `v ∈ T_x`.
    pub fn apply(&self, x: &SpdPoint, v: &SymmetricMatrix) -> Result<SymmetricMatrix> {
        let mut out = DMatrix::zeros(x.dim(), x.dim());
        for (e, dv) in self.basis.iter().zip(&self.derivatives) {
            out += dv.as_matrix() * metric_inner(x, e, v)?;
        }
        Ok(SymmetricMatrix::from_matrix_unchecked(out))
    }
}

pub fn radial_jacobian_fd(xi: &BoundaryDirection, x: &SpdPoint, h: f64) -> Result<RadialJacobian> {
    if !(h >= 0.0) || h >= 1.0 {
        return Err(Error::input(format!("finite-difference step must lie in (0, 1), got {h}")));
    }
    let basis = tangent_basis(x);
    let mut derivatives = Vec::with_capacity(basis.len());
    for e in &basis {
        let plus = SpdPoint::new(x.as_symmetric().add(&e.scale(h))?)?;
        let minus = SpdPoint::new(x.as_symmetric().sub(&e.scale(h))?)?;
        let diff = radial_field(xi, &plus)?.sub(&radial_field(xi, &minus)?)?;
        let dv = diff.scale(0.5 / h);
        if dv.as_matrix().iter().any(|v| !v.is_finite()) {
            return Err(Error::Range(format!(
                "finite-difference step {h} too small: non-finite derivative"
            )));
        }
        derivatives.push(dv);
    }
    let n = basis.len();
    let mut coefficients = DMatrix::zeros(n, n);
    for k in 0..n {
        for l in 0..n {
            coefficients[(k, l)] = metric_inner(x, &basis[k], &derivatives[l])?;
        }
    }
    Ok(RadialJacobian {
        basis,
        derivatives,
        coefficients,
    })
}
