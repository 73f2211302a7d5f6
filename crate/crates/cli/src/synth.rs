//! Synthetic datasets.

use clap::ValueEnum;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use spd_radial::geometry::tangent_basis;
use spd_radial::{exp_map, Dataset, SpdPoint, SymmetricMatrix};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Kind {
    /// Gaussian normal coordinates around a fixed anisotropic center.
    Spread,
    /// Diagonal matrices with Gaussian log-entries.
    Diagonal,
}

/// Center `diag(m, m−1, …, 1)`, giving a distinct ellipsoid shape.
fn center(m: usize) -> SpdPoint {
    let d: Vec<f64> = (0..m).map(|i| (m - i) as f64).collect();
    SpdPoint::from_diagonal(&d).expect("positive diagonal")
}

pub fn generate(kind: Kind, n: usize, m: usize, spread: f64, seed: u64) -> CliResult<Dataset> {
    if n == 0 || m == 0 {
        return Err(CliError::Usage("n and m must be positive".into()));
    }
    if !(spread >= 0.0) || !spread.is_finite() {
        return Err(CliError::Usage(format!("spread must be non-negative, got {spread}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let c = center(m);
    let points = match kind {
        Kind::Spread => {
            let basis = tangent_basis(&c);
            (0..n)
                .map(|_| {
                    let mut v = SymmetricMatrix::zeros(m);
                    for e in &basis {
                        let w: f64 = rng.sample(StandardNormal);
                        v = v.add(&e.scale(spread * w))?;
                    }
                    exp_map(&c, &v)
                })
                .collect::<spd_radial::Result<Vec<_>>>()?
        }
        Kind::Diagonal => (0..n)
            .map(|_| {
                let d: Vec<f64> = (0..m)
                    .map(|i| {
                        let w: f64 = rng.sample(StandardNormal);
                        ((m - i) as f64).ln() + spread * w
                    })
                    .map(f64::exp)
                    .collect();
                SpdPoint::from_diagonal(&d)
            })
            .collect::<spd_radial::Result<Vec<_>>>()?,
    };
    let labels = (0..n).map(|i| format!("s{i}")).collect();
    Ok(Dataset::with_labels(points, labels)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_per_seed() {
        let a = generate(Kind::Spread, 5, 3, 0.5, 11).unwrap();
        let b = generate(Kind::Spread, 5, 3, 0.5, 11).unwrap();
        let c = generate(Kind::Spread, 5, 3, 0.5, 12).unwrap();
        assert_eq!(a.points(), b.points());
        assert_ne!(a.points(), c.points());
    }

    #[test]
    fn diagonal_kind_is_diagonal() {
        let d = generate(Kind::Diagonal, 10, 3, 1.0, 0).unwrap();
        for p in d.points() {
            let a = p.as_matrix();
            assert_eq!(a[(0, 1)], 0.0);
            assert_eq!(a[(1, 2)], 0.0);
        }
        assert!(generate(Kind::Diagonal, 0, 3, 1.0, 0).is_err());
    }
}
