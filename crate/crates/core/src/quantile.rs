//! Geometric quantiles, Fréchet mean/median and individual treatment
//! effects built on radial fields.
//!
//! The `(β, ξ)`-quantile of a sample `X_1..X_n` minimizes
//!
//! ```text
//! L(p) = (1/n) Σ_i [ d(X_i, p) − β ⟨ξ_{X_i}, log_{X_i}(p)⟩_{X_i} ]
//! ```
//!
//! with the radial field evaluated at the data points, so each `ξ_{X_i}` is
//! computed once. `β = 0` gives the Fréchet median.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::geometry::{distance, log_map, metric_inner, whiten};
use crate::optimize::{minimize, Fit, Gradient, Objective, OptimizerConfig};
use crate::radial::{radial_field, BoundaryDirection};
use crate::spectral::{eig_sym, SpdPoint, SpectralDecomposition, SymmetricMatrix};

/// Distance below which an iterate is considered to sit on a data point.
pub const COINCIDENCE_RADIUS: f64 = 1e-9;

/// Treatment effects with magnitude below this are the cone point.
pub const ZERO_EFFECT_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct QuantileIndex {
    beta: f64,
    xi: BoundaryDirection,
}

impl QuantileIndex {
    pub fn new(beta: f64, xi: BoundaryDirection) -> Result<Self> {
        if !(0.0..1.0).contains(&beta) {
            return Err(Error::input(format!("beta must lie in [0, 1), got {beta}")));
        }
        Ok(QuantileIndex { beta, xi })
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn xi(&self) -> &BoundaryDirection {
        &self.xi
    }
}

/// A non-empty sample of SPD matrices of one dimension.
#[derive(Debug, Clone)]
pub struct Dataset {
    points: Vec<SpdPoint>,
    labels: Option<Vec<String>>,
}

impl Dataset {
    pub fn new(points: Vec<SpdPoint>) -> Result<Self> {
        let first = points
            .first()
            .ok_or_else(|| Error::input("dataset is empty"))?
            .dim();
        for p in &points {
            Error::check_dim(first, p.dim())?;
        }
        Ok(Dataset {
            points,
            labels: None,
        })
    }

    pub fn with_labels(points: Vec<SpdPoint>, labels: Vec<String>) -> Result<Self> {
        Error::check_dim(points.len(), labels.len())?;
        let mut d = Dataset::new(points)?;
        d.labels = Some(labels);
        Ok(d)
    }

    pub fn points(&self) -> &[SpdPoint] {
        &self.points
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    /// Label of point `i`, or its index when unlabeled.
    pub fn label(&self, i: usize) -> String {
        match &self.labels {
            Some(l) => l[i].clone(),
            None => i.to_string(),
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.points[0].dim()
    }

    /// Image of every point under `y ↦ g·y·gᵀ`.
    pub fn congruence(&self, g: &DMatrix<f64>) -> Result<Dataset> {
        let points = self
            .points
            .iter()
            .map(|p| p.congruence(g))
            .collect::<Result<Vec<_>>>()?;
        Ok(Dataset {
            points,
            labels: self.labels.clone(),
        })
    }
}

#[derive(Debug, Clone)]
pub struct TreatmentPair {
    control: SpdPoint,
    treated: SpdPoint,
}

impl TreatmentPair {
    pub fn new(control: SpdPoint, treated: SpdPoint) -> Result<Self> {
        Error::check_dim(control.dim(), treated.dim())?;
        Ok(TreatmentPair { control, treated })
    }

    pub fn control(&self) -> &SpdPoint {
        &self.control
    }

    pub fn treated(&self) -> &SpdPoint {
        &self.treated
    }
}

/// An element `[(β, ξ)]` of the cone over the boundary.
#[derive(Debug, Clone)]
pub struct TreatmentEffect {
    pub magnitude: f64,
    /// `None` for the cone point (`β = 0`), where no direction is defined.
    pub direction: Option<BoundaryDirection>,
}

impl TreatmentEffect {
    pub fn is_zero(&self) -> bool {
        self.direction.is_none()
    }
}

/// `(β, ξ)` with `exp_{r_C}(β·ξ_{r_C}) = r_T`.
pub fn individual_treatment_effect(pair: &TreatmentPair) -> Result<TreatmentEffect> {
    let magnitude = distance(&pair.control, &pair.treated)?;
    if magnitude <= ZERO_EFFECT_TOLERANCE {
        return Ok(TreatmentEffect {
            magnitude: 0.0,
            direction: None,
        });
    }
    let v = log_map(&pair.control, &pair.treated)?;
    let direction = BoundaryDirection::from_tangent(pair.control.clone(), v)?;
    Ok(TreatmentEffect {
        magnitude,
        direction: Some(direction),
    })
}

/// Divided differences of `ln` on the spectrum: `Γ_kl = (ln λ_k − ln λ_l)/(λ_k − λ_l)`.
fn log_divided_differences(eigenvalues: &[f64]) -> DMatrix<f64> {
    let n = eigenvalues.len();
    DMatrix::from_fn(n, n, |k, l| {
        let (a, b) = (eigenvalues[k], eigenvalues[l]);
        let delta = (b - a) / a;
        if delta == 0.0 {
            1.0 / a
        } else {
            delta.ln_1p() / delta / a
        }
    })
}

/// Fréchet derivative of `Log` at `A = V diag(λ) Vᵀ` applied to `m`.
fn dlog(eig: &SpectralDecomposition, m: &DMatrix<f64>) -> DMatrix<f64> {
    let v = &eig.eigenvectors;
    let gamma = log_divided_differences(eig.eigenvalues.as_slice());
    let inner = (v.transpose() * m * v).component_mul(&gamma);
    v * inner * v.transpose()
}

struct PointTerm {
    inv_sqrt: DMatrix<f64>,
    /// `β · X^{-1/2} ξ_X X^{-1/2}`, or `None` for `β = 0`.
    tilt: Option<DMatrix<f64>>,
}

/// The quantile loss with per-point radial-field terms cached.
struct TiltedDistance<'a> {
    data: &'a Dataset,
    terms: Vec<PointTerm>,
}

impl<'a> TiltedDistance<'a> {
    fn new(data: &'a Dataset, index: Option<&QuantileIndex>) -> Result<Self> {
        let terms = data
            .points
            .iter()
            .map(|x| {
                let tilt = match index {
                    Some(q) if q.beta > 0.0 => {
                        Error::check_dim(q.xi.dim(), x.dim())?;
                        let field = radial_field(&q.xi, x)?;
                        Some(whiten(x, &field).into_matrix() * q.beta)
                    }
                    _ => None,
                };
                Ok(PointTerm {
                    inv_sqrt: x.inv_sqrt().clone(),
                    tilt,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(TiltedDistance { data, terms })
    }

    fn relative_spectrum(term: &PointTerm, p: &SpdPoint) -> Result<SpectralDecomposition> {
        let a = &term.inv_sqrt * p.as_matrix() * &term.inv_sqrt;
        let eig = eig_sym(&SymmetricMatrix::from_matrix_unchecked(a))?;
        let smallest = eig.eigenvalues[eig.eigenvalues.len() - 1];
        if smallest <= 0.0 {
            return Err(Error::Domain {
                what: "candidate point is not positive definite".into(),
                eigenvalue: smallest,
            });
        }
        Ok(eig)
    }
}

impl Objective for TiltedDistance<'_> {
    fn value(&self, p: &SpdPoint) -> Result<f64> {
        Error::check_dim(self.data.dim(), p.dim())?;
        let mut total = 0.0;
        for term in &self.terms {
            let eig = Self::relative_spectrum(term, p)?;
            let logs: Vec<f64> = eig.eigenvalues.iter().map(|l| l.ln()).collect();
            let dist = logs.iter().map(|l| l * l).sum::<f64>().sqrt();
            let mut value = dist;
            if let Some(z) = &term.tilt {
                // tr(Z · Log A)
                for (k, l) in logs.iter().enumerate() {
                    let v = eig.eigenvectors.column(k);
                    value -= l * (v.transpose() * z * v)[(0, 0)];
                }
            }
            total += value;
        }
        Ok(total / self.data.len() as f64)
    }

    fn gradient(&self, p: &SpdPoint) -> Result<Gradient> {
        Error::check_dim(self.data.dim(), p.dim())?;
        let m = p.dim();
        let n = self.data.len() as f64;
        let mut euclid = DMatrix::zeros(m, m);
        let mut kink_weight = 0.0;
        for term in &self.terms {
            let eig = Self::relative_spectrum(term, p)?;
            let dist = eig.eigenvalues.iter().map(|l| l.ln().powi(2)).sum::<f64>().sqrt();
            let mut arg = DMatrix::zeros(m, m);
            if dist < COINCIDENCE_RADIUS {
                kink_weight += 1.0 / n;
            } else {
                arg += eig.map_eigenvalues(f64::ln) / dist;
            }
            if let Some(z) = &term.tilt {
                arg -= z;
            }
            euclid += &term.inv_sqrt * dlog(&eig, &arg) * &term.inv_sqrt;
        }
        euclid /= n;
        let riemannian = p.as_matrix() * euclid * p.as_matrix();
        Ok(Gradient {
            smooth: SymmetricMatrix::from_matrix_unchecked(riemannian),
            kink_weight,
        })
    }

    fn kinks(&self) -> &[SpdPoint] {
        &self.data.points
    }
}

struct SquaredDistance<'a> {
    data: &'a Dataset,
}

impl Objective for SquaredDistance<'_> {
    fn value(&self, p: &SpdPoint) -> Result<f64> {
        let mut total = 0.0;
        for x in &self.data.points {
            total += distance(x, p)?.powi(2);
        }
        Ok(total / self.data.len() as f64)
    }

    fn gradient(&self, p: &SpdPoint) -> Result<Gradient> {
        let m = p.dim();
        let mut sum = SymmetricMatrix::zeros(m);
        for x in &self.data.points {
            sum = sum.add(&log_map(p, x)?)?;
        }
        Ok(Gradient {
            smooth: sum.scale(-2.0 / self.data.len() as f64),
            kink_weight: 0.0,
        })
    }
}

fn best_data_point(obj: &impl Objective, data: &Dataset) -> Result<SpdPoint> {
    let mut best: Option<(f64, &SpdPoint)> = None;
    for x in &data.points {
        let v = obj.value(x)?;
        if best.is_none_or(|(b, _)| v < b) {
            best = Some((v, x));
        }
    }
    Ok(best.expect("dataset is non-empty").1.clone())
}

/// Sample quantile loss at candidate `p`.
pub fn quantile_loss(data: &Dataset, p: &SpdPoint, index: &QuantileIndex) -> Result<f64> {
    TiltedDistance::new(data, Some(index))?.value(p)
}

/// The variant with the radial field at the candidate:
/// `(1/n) Σ_i [ d(p, X_i) + β ⟨ξ_p, log_p(X_i)⟩_p ]`. Evaluation only.
pub fn quantile_loss_at_candidate(data: &Dataset, p: &SpdPoint, index: &QuantileIndex) -> Result<f64> {
    Error::check_dim(data.dim(), p.dim())?;
    let field = radial_field(&index.xi, p)?;
    let mut total = 0.0;
    for x in &data.points {
        total += distance(p, x)? + index.beta * metric_inner(p, &field, &log_map(p, x)?)?;
    }
    Ok(total / data.len() as f64)
}

/// Empirical `(β, ξ)`-quantile, started from the data point of least loss.
pub fn quantile(data: &Dataset, index: &QuantileIndex, cfg: &OptimizerConfig) -> Result<Fit> {
    let obj = TiltedDistance::new(data, Some(index))?;
    let init = best_data_point(&obj, data)?;
    minimize(&obj, init, cfg)
}

/// Riemannian gradient of the quantile loss at `p`, returned as the
/// minimal-norm subgradient when `p` coincides with data points.
pub fn quantile_gradient(data: &Dataset, p: &SpdPoint, index: &QuantileIndex) -> Result<Gradient> {
    TiltedDistance::new(data, Some(index))?.gradient(p)
}

/// Minimizer of the mean distance. With collinear data the minimizer need
/// not be unique; the converged point is returned as is.
pub fn frechet_median(data: &Dataset, cfg: &OptimizerConfig) -> Result<Fit> {
    let obj = TiltedDistance::new(data, None)?;
    let init = best_data_point(&obj, data)?;
    minimize(&obj, init, cfg)
}

/// Mean distance from `p` to the data.
pub fn median_loss(data: &Dataset, p: &SpdPoint) -> Result<f64> {
    TiltedDistance::new(data, None)?.value(p)
}

/// Minimizer of the mean squared distance.
pub fn frechet_mean(data: &Dataset, cfg: &OptimizerConfig) -> Result<Fit> {
    let obj = SquaredDistance { data };
    let init = best_data_point(&obj, data)?;
    minimize(&obj, init, cfg)
}
