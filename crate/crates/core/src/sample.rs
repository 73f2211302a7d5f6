//! Random matrices for synthetic data, tests and benchmarks.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::geometry::metric_norm;
use crate::spectral::{SpdPoint, SymmetricMatrix};

fn gaussian<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| rng.sample::<f64, _>(StandardNormal))
}

/// Symmetric matrix with `N(0, scale²)` entries on and above the diagonal.
pub fn symmetric<R: Rng + ?Sized>(rng: &mut R, m: usize, scale: f64) -> SymmetricMatrix {
    let g = gaussian(rng, m, m) * scale;
    let upper = DMatrix::from_fn(m, m, |i, j| if i <= j { g[(i, j)] } else { g[(j, i)] });
    SymmetricMatrix::from_matrix(upper).expect("finite square")
}

/// Haar-distributed orthogonal matrix.
pub fn orthogonal<R: Rng + ?Sized>(rng: &mut R, m: usize) -> DMatrix<f64> {
    let qr = gaussian(rng, m, m).qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..m {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    q
}

/// SPD matrix with a random eigenbasis and log-eigenvalues uniform on
/// `[-ln κ / 2, ln κ / 2]`, so its condition number is at most `κ`.
pub fn spd<R: Rng + ?Sized>(rng: &mut R, m: usize, max_condition: f64) -> SpdPoint {
    let half = 0.5 * max_condition.max(1.0).ln();
    let logs: Vec<f64> = (0..m).map(|_| rng.random_range(-half..=half)).collect();
    spd_with_log_spectrum(rng, &logs)
}

pub fn spd_with_log_spectrum<R: Rng + ?Sized>(rng: &mut R, logs: &[f64]) -> SpdPoint {
    let q = orthogonal(rng, logs.len());
    let d = DVector::from_iterator(logs.len(), logs.iter().map(|l| l.exp()));
    let a = &q * DMatrix::from_diagonal(&d) * q.transpose();
    SpdPoint::new(SymmetricMatrix::from_matrix(a).expect("finite")).expect("positive spectrum")
}

/// Random tangent vector at `base` with unit metric norm.
pub fn unit_tangent<R: Rng + ?Sized>(rng: &mut R, base: &SpdPoint) -> SymmetricMatrix {
    loop {
        let v = symmetric(rng, base.dim(), 1.0);
        let n = metric_norm(base, &v).expect("same dimension");
        if n > 1e-8 {
            return v.scale(1.0 / n);
        }
    }
}

/// Invertible matrix with `‖g‖₂ ≤ bound` and `‖g⁻¹‖₂ ≤ bound`.
pub fn invertible<R: Rng + ?Sized>(rng: &mut R, m: usize, bound: f64) -> DMatrix<f64> {
    let l = bound.max(1.0).ln();
    let s = DVector::from_iterator(m, (0..m).map(|_| rng.random_range(-l..=l).exp()));
    orthogonal(rng, m) * DMatrix::from_diagonal(&s) * orthogonal(rng, m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn generators_respect_their_bounds() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for m in 1..=5 {
            let q = orthogonal(&mut rng, m);
            assert!((q.transpose() * &q - DMatrix::identity(m, m)).norm() < 1e-13);
            let x = spd(&mut rng, m, 1e3);
            let ev = x.as_matrix().symmetric_eigenvalues();
            assert!(ev.max() / ev.min() <= 1e3 * (1.0 + 1e-10));
            let g = invertible(&mut rng, m, 10.0);
            let sv = g.singular_values();
            assert!(sv.max() <= 10.0 + 1e-10 && 1.0 / sv.min() <= 10.0 + 1e-10);
            let v = unit_tangent(&mut rng, &x);
            assert!((metric_norm(&x, &v).unwrap() - 1.0).abs() < 1e-12);
        }
    }
}
