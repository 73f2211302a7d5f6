//! The affine-invariant Riemannian structure on SPD matrices:
//! `⟨v₁, v₂⟩_x = tr(x⁻¹v₁x⁻¹v₂)`.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::spectral::{
    eig_sym, frobenius_inner, sym_exp, symmetric_basis, SpdPoint, SymmetricMatrix,
};

/// A tangent vector together with its base point.
#[derive(Debug, Clone)]
pub struct TangentVector {
    base: SpdPoint,
    vec: SymmetricMatrix,
}

impl TangentVector {
    pub fn new(base: SpdPoint, vec: SymmetricMatrix) -> Result<Self> {
        Error::check_dim(base.dim(), vec.dim())?;
        Ok(TangentVector { base, vec })
    }

    pub fn base(&self) -> &SpdPoint {
        &self.base
    }

    pub fn vec(&self) -> &SymmetricMatrix {
        &self.vec
    }

    pub fn norm(&self) -> f64 {
        metric_norm(&self.base, &self.vec).expect("dimensions checked on construction")
    }
}

/// `x^{-1/2} · v · x^{-1/2}`: pulls a tangent vector at `x` back to the identity.
pub(crate) fn whiten(x: &SpdPoint, v: &SymmetricMatrix) -> SymmetricMatrix {
    let s = x.inv_sqrt();
    SymmetricMatrix::from_matrix_unchecked(s * v.as_matrix() * s)
}

/// `x^{1/2} · a · x^{1/2}`.
pub(crate) fn color(x: &SpdPoint, a: &DMatrix<f64>) -> SymmetricMatrix {
    let s = x.sqrt();
    SymmetricMatrix::from_matrix_unchecked(s * a * s)
}

pub fn metric_inner(x: &SpdPoint, v1: &SymmetricMatrix, v2: &SymmetricMatrix) -> Result<f64> {
    Error::check_dim(x.dim(), v1.dim())?;
    Error::check_dim(x.dim(), v2.dim())?;
    frobenius_inner(&whiten(x, v1), &whiten(x, v2))
}

pub fn metric_norm(x: &SpdPoint, v: &SymmetricMatrix) -> Result<f64> {
    Error::check_dim(x.dim(), v.dim())?;
    Ok(whiten(x, v).frobenius_norm())
}

/// `exp_x(v) = x^{1/2} Exp(x^{-1/2} v x^{-1/2}) x^{1/2}`.
pub fn exp_map(x: &SpdPoint, v: &SymmetricMatrix) -> Result<SpdPoint> {
    Error::check_dim(x.dim(), v.dim())?;
    let inner = sym_exp(&whiten(x, v))?;
    let s = x.sqrt();
    Ok(SpdPoint::from_matrix_unchecked(s * inner.as_matrix() * s))
}

/// `log_x(p) = x^{1/2} Log(x^{-1/2} p x^{-1/2}) x^{1/2}`.
pub fn log_map(x: &SpdPoint, p: &SpdPoint) -> Result<SymmetricMatrix> {
    Error::check_dim(x.dim(), p.dim())?;
    let eig = eig_sym(&whiten(x, p.as_symmetric()))?;
    check_relative_spectrum(&eig.eigenvalues)?;
    Ok(color(x, &eig.map_eigenvalues(f64::ln)))
}

/// `d(x, p) = ‖Log(x^{-1/2} p x^{-1/2})‖_F`.
pub fn distance(x: &SpdPoint, p: &SpdPoint) -> Result<f64> {
    Error::check_dim(x.dim(), p.dim())?;
    let eig = eig_sym(&whiten(x, p.as_symmetric()))?;
    check_relative_spectrum(&eig.eigenvalues)?;
    Ok(eig.eigenvalues.iter().map(|d| d.ln().powi(2)).sum::<f64>().sqrt())
}

fn check_relative_spectrum(eigenvalues: &nalgebra::DVector<f64>) -> Result<()> {
    let smallest = eigenvalues[eigenvalues.len() - 1];
    if smallest <= 0.0 {
        return Err(Error::Domain {
            what: "relative spectrum of two points is not positive".into(),
            eigenvalue: smallest,
        });
    }
    Ok(())
}

/// `exp_x(t·v)`.
pub fn geodesic(x: &SpdPoint, v: &SymmetricMatrix, t: f64) -> Result<SpdPoint> {
    exp_map(x, &v.scale(t))
}

/// Orthonormal basis of `T_x` under the affine-invariant metric:
/// `x^{1/2} S_k x^{1/2}` for the Frobenius-orthonormal basis `S_k`.
pub fn tangent_basis(x: &SpdPoint) -> Vec<SymmetricMatrix> {
    symmetric_basis(x.dim())
        .into_iter()
        .map(|s| color(x, s.as_matrix()))
        .collect()
}
