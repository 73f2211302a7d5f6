//! Riemannian descent on the SPD manifold with Armijo backtracking.
//!
//! Steps are taken along `exp_p(α·v)`. The search direction is a damped
//! Newton direction in normal coordinates at `p` when the finite-difference
//! Hessian allows it, otherwise the negative (sub)gradient.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{color, distance, exp_map, metric_norm, whiten};
use crate::spectral::{from_symmetric_coordinates, symmetric_coordinates, SpdPoint, SymmetricMatrix};

/// Optimizer settings. Unknown keys are rejected by [`OptimizerConfig::set`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptimizerConfig {
    /// Stop when the metric norm of the (minimal) gradient falls below this.
    pub tolerance: f64,
    pub max_iter: usize,
    pub initial_step: f64,
    pub shrink: f64,
    /// Sufficient-decrease constant of the Armijo test.
    pub armijo: f64,
    /// Step used for the finite-difference Hessian.
    pub hessian_step: f64,
    /// Data points closer than this are tested as candidate minimizers.
    pub snap_radius: f64,
    /// Longest step (metric norm) a single Newton direction may take.
    pub max_step: f64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            tolerance: 1e-8,
            max_iter: 500,
            initial_step: 1.0,
            shrink: 0.5,
            armijo: 1e-4,
            hessian_step: 1e-5,
            snap_radius: 1e-3,
            max_step: 10.0,
        }
    }
}

impl OptimizerConfig {
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let float = || {
            value
                .trim()
                .parse::<f64>()
                .map_err(|e| Error::input(format!("{key}: {e}")))
        };
        match key.trim() {
            "tolerance" | "tol" => self.tolerance = float()?,
            "max_iter" => {
                self.max_iter = value
                    .trim()
                    .parse()
                    .map_err(|e| Error::input(format!("{key}: {e}")))?
            }
            "initial_step" => self.initial_step = float()?,
            "shrink" => self.shrink = float()?,
            "armijo" => self.armijo = float()?,
            "hessian_step" => self.hessian_step = float()?,
            "snap_radius" => self.snap_radius = float()?,
            "max_step" => self.max_step = float()?,
            other => return Err(Error::input(format!("unknown optimizer setting `{other}`"))),
        }
        self.validate()
    }

    /// Parses `key=value` pairs separated by commas or newlines.
    pub fn from_key_values(text: &str) -> Result<Self> {
        let mut cfg = OptimizerConfig::default();
        for item in text.split([',', '\n']).map(str::trim).filter(|s| !s.is_empty()) {
            let (k, v) = item
                .split_once('=')
                .ok_or_else(|| Error::input(format!("expected key=value, got `{item}`")))?;
            cfg.set(k, v)?;
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.tolerance > 0.0
            && self.max_iter > 0
            && self.initial_step > 0.0
            && self.shrink > 0.0
            && self.shrink < 1.0
            && self.armijo > 0.0
            && self.armijo < 1.0
            && self.hessian_step > 0.0
            && self.snap_radius >= 0.0
            && self.max_step > 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::input(format!("invalid optimizer settings: {self:?}")))
        }
    }
}

/// Riemannian gradient of an objective that may be non-smooth at some points.
#[derive(Debug, Clone)]
pub struct Gradient {
    /// Gradient of every smooth term.
    pub smooth: SymmetricMatrix,
    /// Total weight of distance terms whose data point coincides with the
    /// evaluation point; each contributes a ball of that radius to the
    /// subdifferential.
    pub kink_weight: f64,
}

impl Gradient {
    /// Norm of the minimal-norm subgradient.
    pub fn norm(&self, p: &SpdPoint) -> f64 {
        let n = metric_norm(p, &self.smooth).expect("gradient lives at p");
        (n - self.kink_weight).max(0.0)
    }
}

pub(crate) trait Objective {
    fn value(&self, p: &SpdPoint) -> Result<f64>;
    fn gradient(&self, p: &SpdPoint) -> Result<Gradient>;
    /// Points where the objective may fail to be differentiable.
    fn kinks(&self) -> &[SpdPoint] {
        &[]
    }
}

/// Result of a successful minimization.
#[derive(Debug, Clone)]
pub struct Fit {
    pub point: SpdPoint,
    pub loss: f64,
    pub gradient_norm: f64,
    pub iterations: usize,
    /// Loss after every accepted step, starting with the initializer.
    pub loss_trace: Vec<f64>,
}

fn coords_at(p: &SpdPoint, g: &SymmetricMatrix) -> DVector<f64> {
    symmetric_coordinates(&whiten(p, g))
}

fn tangent_from_coords(p: &SpdPoint, c: &DVector<f64>) -> SymmetricMatrix {
    let s = from_symmetric_coordinates(p.dim(), c).expect("coordinate length matches");
    color(p, s.as_matrix())
}

/// Hessian in normal coordinates at `p`, by central differences of the gradient.
fn fd_hessian(obj: &impl Objective, p: &SpdPoint, h: f64) -> Result<DMatrix<f64>> {
    let n = p.dim() * (p.dim() + 1) / 2;
    let mut hess = DMatrix::zeros(n, n);
    for l in 0..n {
        let mut e = DVector::zeros(n);
        e[l] = h;
        let step = tangent_from_coords(p, &e);
        let plus = exp_map(p, &step)?;
        let minus = exp_map(p, &step.scale(-1.0))?;
        let gp = coords_at(&plus, &obj.gradient(&plus)?.smooth);
        let gm = coords_at(&minus, &obj.gradient(&minus)?.smooth);
        hess.set_column(l, &((gp - gm) / (2.0 * h)));
    }
    Ok((&hess + hess.transpose()) * 0.5)
}

/// Damped Newton direction `-(H + μI)⁻¹ g`, or `None` if no damping makes
/// it a descent direction.
fn newton_direction(hess: &DMatrix<f64>, g: &DVector<f64>) -> Option<DVector<f64>> {
    let n = g.len();
    let scale = hess.norm().max(1e-12);
    let mut mu = 0.0;
    for _ in 0..40 {
        let damped = hess + DMatrix::identity(n, n) * mu;
        if let Some(chol) = damped.cholesky() {
            let s = -chol.solve(g);
            if s.iter().all(|v| v.is_finite()) && g.dot(&s) < 0.0 {
                return Some(s);
            }
        }
        mu = if mu == 0.0 { 1e-10 * scale } else { mu * 4.0 };
    }
    None
}

fn backtrack(
    obj: &impl Objective,
    p: &SpdPoint,
    loss: f64,
    dir: &SymmetricMatrix,
    slope: f64,
    cfg: &OptimizerConfig,
) -> Option<(SpdPoint, f64)> {
    let slack = 4.0 * f64::EPSILON * loss.abs();
    let mut alpha = cfg.initial_step;
    while alpha > 1e-14 {
        if let Ok(q) = exp_map(p, &dir.scale(alpha)) {
            if let Ok(lq) = obj.value(&q) {
                if lq <= loss + cfg.armijo * alpha * slope + slack {
                    return Some((q, lq));
                }
            }
        }
        alpha *= cfg.shrink;
    }
    None
}

pub(crate) fn minimize(obj: &impl Objective, init: SpdPoint, cfg: &OptimizerConfig) -> Result<Fit> {
    cfg.validate()?;
    let mut p = init;
    let mut loss = obj.value(&p)?;
    let mut trace = vec![loss];
    let mut grad_norm = f64::INFINITY;

    for iter in 0..cfg.max_iter {
        let grad = obj.gradient(&p)?;
        grad_norm = grad.norm(&p);
        if grad_norm <= cfg.tolerance {
            return Ok(Fit {
                point: p,
                loss,
                gradient_norm: grad_norm,
                iterations: iter,
                loss_trace: trace,
            });
        }

        if grad.kink_weight == 0.0 {
            if let Some((q, lq)) = snap_candidate(obj, &p, loss, cfg)? {
                p = q;
                loss = lq;
                trace.push(loss);
                continue;
            }
        }

        let g_coords = coords_at(&p, &grad.smooth);
        let g_len = g_coords.norm();
        // steepest descent on the minimal-norm subgradient
        let steepest = g_coords.scale(-grad_norm / g_len);
        let steepest_slope = -grad_norm * grad_norm;

        let mut step = None;
        if grad.kink_weight == 0.0 {
            let hess = fd_hessian(obj, &p, cfg.hessian_step)?;
            if let Some(mut s) = newton_direction(&hess, &g_coords) {
                let len = s.norm();
                if len > cfg.max_step {
                    s *= cfg.max_step / len;
                }
                let slope = g_coords.dot(&s);
                step = backtrack(obj, &p, loss, &tangent_from_coords(&p, &s), slope, cfg);
            }
        }
        if step.is_none() {
            let dir = tangent_from_coords(&p, &steepest);
            step = backtrack(obj, &p, loss, &dir, steepest_slope, cfg);
        }
        match step {
            Some((q, lq)) => {
                p = q;
                loss = lq;
                trace.push(loss);
            }
            None => break,
        }
    }
    let tail = trace.len().saturating_sub(10);
    Err(Error::Optimization {
        iterations: trace.len() - 1,
        gradient_norm: grad_norm,
        last_losses: trace[tail..].to_vec(),
    })
}

/// A nearby kink that is itself optimal and no worse than `p`.
fn snap_candidate(
    obj: &impl Objective,
    p: &SpdPoint,
    loss: f64,
    cfg: &OptimizerConfig,
) -> Result<Option<(SpdPoint, f64)>> {
    let nearest = obj
        .kinks()
        .iter()
        .filter_map(|k| distance(p, k).ok().map(|d| (d, k)))
        .min_by(|a, b| a.0.total_cmp(&b.0));
    let Some((d, k)) = nearest else {
        return Ok(None);
    };
    if d > cfg.snap_radius {
        return Ok(None);
    }
    let gk = obj.gradient(k)?;
    if gk.norm(k) > cfg.tolerance {
        return Ok(None);
    }
    let lk = obj.value(k)?;
    if lk <= loss + 4.0 * f64::EPSILON * loss.abs() {
        Ok(Some((k.clone(), lk)))
    } else {
        Ok(None)
    }
}
