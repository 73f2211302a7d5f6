use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use spd_radial::{eig_sym, SpdPoint};

/// Ellipsoid with the eigenvectors of an SPD matrix as axes and its
/// eigenvalues as axis lengths.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EllipsoidGlyph {
    pub center_id: String,
    /// Descending.
    pub axis_lengths: Vec<f64>,
    /// Row-major; column `j` is the axis of length `axis_lengths[j]`, with
    /// its largest-magnitude entry made positive.
    pub axes: Vec<Vec<f64>>,
}

impl EllipsoidGlyph {
    pub fn from_point(center_id: impl Into<String>, p: &SpdPoint) -> Self {
        let eig = eig_sym(p.as_symmetric()).expect("SPD points have finite entries");
        let mut axes = eig.eigenvectors.clone();
        for mut col in axes.column_iter_mut() {
            let pivot = col.iter().copied().fold(0.0f64, |a, v| if v.abs() > a.abs() { v } else { a });
            if pivot < 0.0 {
                col.neg_mut();
            }
        }
        let m = p.dim();
        EllipsoidGlyph {
            center_id: center_id.into(),
            axis_lengths: eig.eigenvalues.iter().copied().collect(),
            axes: (0..m).map(|i| (0..m).map(|j| axes[(i, j)]).collect()).collect(),
        }
    }

    pub fn axes_matrix(&self) -> DMatrix<f64> {
        let m = self.axes.len();
        DMatrix::from_fn(m, m, |i, j| self.axes[i][j])
    }

    /// `axes · diag(lengths) · axesᵀ`.
    pub fn reconstruct(&self) -> DMatrix<f64> {
        let q = self.axes_matrix();
        let d = DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(&self.axis_lengths));
        &q * d * q.transpose()
    }

    /// Positive descending lengths and orthogonal axes to 1e-10.
    pub fn is_well_formed(&self) -> bool {
        let m = self.axes.len();
        let lengths_ok = self.axis_lengths.len() == m
            && self.axis_lengths.iter().all(|l| *l > 0.0)
            && self.axis_lengths.windows(2).all(|w| w[0] >= w[1]);
        let q = self.axes_matrix();
        lengths_ok && (q.transpose() * &q - DMatrix::identity(m, m)).amax() <= 1e-10
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use spd_radial::sample;

    #[test]
    fn diagonal_and_identity() {
        let g = EllipsoidGlyph::from_point("d", &SpdPoint::from_diagonal(&[4.0, 1.0, 1.0]).unwrap());
        assert_eq!(g.axis_lengths, vec![4.0, 1.0, 1.0]);
        assert_eq!(g.axes_matrix(), DMatrix::identity(3, 3));
        let g = EllipsoidGlyph::from_point("i", &SpdPoint::identity(3));
        assert_eq!(g.axis_lengths, vec![1.0; 3]);
    }

    #[test]
    fn reconstruction() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for m in 1..=6 {
            let p = sample::spd(&mut rng, m, 1e3);
            let g = EllipsoidGlyph::from_point("r", &p);
            assert!(g.is_well_formed());
            assert!((g.reconstruct() - p.as_matrix()).amax() <= 1e-10 * p.as_matrix().amax().max(1.0));
        }
    }
}
