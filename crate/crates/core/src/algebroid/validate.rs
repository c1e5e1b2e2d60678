use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::ChartAlgebroid;
use crate::error::{Error, Result};

/// Outcome of a sampled axiom check. Validity is only certified on the
/// sampled points, so the sampling box and count travel with the verdict.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct AxiomReport {
    pub check: String,
    pub chart: String,
    pub max_violation: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub samples: usize,
    pub sampling_box: Option<[f64; 2]>,
}

/// `count` points drawn uniformly from `[-half_width, half_width]^n`.
pub fn sample_points(n: usize, count: usize, half_width: f64, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| (0..n).map(|_| rng.random_range(-half_width..=half_width)).collect())
        .collect()
}

fn bounding_box(points: &[Vec<f64>]) -> Option<[f64; 2]> {
    let mut it = points.iter().flatten();
    let first = *it.next()?;
    let (lo, hi) = it.fold((first, first), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    Some([lo, hi])
}

impl ChartAlgebroid {
    /// `max |c^i_jk + c^i_kj|` over the sample.
    pub fn validate_skew(&self, points: &[Vec<f64>], tol: f64) -> Result<AxiomReport> {
        if !(tol > 0.0) {
            return Err(Error::InvalidArgument(format!("tolerance must be positive, got {tol}")));
        }
        let mut worst: f64 = 0.0;
        for x in points {
            self.check_point(x)?;
            worst = worst.max(self.structure(x).skew_violation());
        }
        Ok(AxiomReport {
            check: "skew_symmetry".into(),
            chart: self.name.clone(),
            max_violation: worst,
            tolerance: tol,
            pass: worst <= tol,
            samples: points.len(),
            sampling_box: bounding_box(points),
        })
    }

    /// Largest entry of `(d_b rho^a_k) rho^b_j - (d_b rho^a_j) rho^b_k - rho^a_i c^i_jk`.
    ///
    /// Analytic anchor derivatives are used when registered; otherwise central
    /// differences with step `fd_step`.
    pub fn validate_anchor_morphism(&self, points: &[Vec<f64>], fd_step: f64, tol: f64) -> Result<AxiomReport> {
        if !(tol > 0.0 && fd_step > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "tolerance and step must be positive, got tol={tol}, fd_step={fd_step}"
            )));
        }
        let mut worst: f64 = 0.0;
        for x in points {
            self.check_point(x)?;
            worst = worst.max(self.morphism_residual(x, fd_step));
        }
        Ok(AxiomReport {
            check: "anchor_morphism".into(),
            chart: self.name.clone(),
            max_violation: worst,
            tolerance: tol,
            pass: worst <= tol,
            samples: points.len(),
            sampling_box: bounding_box(points),
        })
    }

    fn morphism_residual(&self, x: &[f64], fd_step: f64) -> f64 {
        let (n, m) = (self.base_dim, self.fiber_dim);
        let rho = self.anchor(x);
        let drho = match &self.anchor_derivative {
            Some(d) => d(x),
            None => self.fd_anchor_derivatives(x, fd_step),
        };
        let c = self.structure(x);
        let mut worst: f64 = 0.0;
        for a in 0..n {
            for j in 0..m {
                for k in 0..m {
                    let mut r = 0.0;
                    for (b, db) in drho.iter().enumerate() {
                        r += db[(a, k)] * rho[(b, j)] - db[(a, j)] * rho[(b, k)];
                    }
                    for i in 0..m {
                        r -= rho[(a, i)] * c.get(i, j, k);
                    }
                    worst = worst.max(r.abs());
                }
            }
        }
        worst
    }
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use nalgebra::DMatrix;

    use super::*;
    use crate::algebroid::{affine_action, so3, tangent_bundle, StructureTensor};

    fn crafted(c: StructureTensor) -> ChartAlgebroid {
        let n = c.dim();
        ChartAlgebroid::new(
            "crafted",
            n,
            n,
            Arc::new(move |_: &[f64]| DMatrix::identity(n, n)),
            Arc::new(move |_: &[f64]| c.clone()),
        )
        .unwrap()
    }

    #[test]
    fn skew_examples() {
        let pts = sample_points(0, 5, 1.0, 1);
        assert_eq!(so3().validate_skew(&pts, 1e-6).unwrap().max_violation, 0.0);
        let pts = sample_points(2, 5, 1.0, 1);
        assert_eq!(tangent_bundle(2).validate_skew(&pts, 1e-6).unwrap().max_violation, 0.0);

        let mut c = StructureTensor::zeros(2);
        c.set(0, 0, 0, 1.0);
        let r = crafted(c).validate_skew(&pts, 1e-6).unwrap();
        assert_eq!(r.max_violation, 2.0);
        assert!(!r.pass);
    }

    #[test]
    fn morphism_examples() {
        let pts = sample_points(0, 3, 1.0, 2);
        assert_eq!(
            so3().validate_anchor_morphism(&pts, 1e-5, 1e-6).unwrap().max_violation,
            0.0
        );
        let pts = sample_points(2, 10, 1.0, 2);
        assert!(
            tangent_bundle(2)
                .validate_anchor_morphism(&pts, 1e-5, 1e-6)
                .unwrap()
                .pass
        );

        let mut c = StructureTensor::zeros(2);
        c.set(0, 0, 1, 1.0);
        c.set(0, 1, 0, -1.0);
        let r = crafted(c).validate_anchor_morphism(&pts, 1e-5, 1e-6).unwrap();
        assert_eq!(r.max_violation, 1.0);
        assert!(!r.pass);
    }

    #[test]
    fn affine_action_is_almost_lie_with_fd_and_analytic_derivatives() {
        let pts = sample_points(1, 50, 1.0, 3);
        let alg = affine_action();
        assert!(alg.validate_anchor_morphism(&pts, 1e-5, 1e-9).unwrap().pass);
        for x in &pts {
            let fd = alg.fd_anchor_derivatives(x, 1e-5);
            let an = alg.anchor_derivatives(x);
            assert!((&fd[0] - &an[0]).abs().max() < 1e-6);
        }
    }

    #[test]
    fn rejects_non_positive_tolerance() {
        assert!(so3().validate_skew(&[], 0.0).is_err());
        assert!(so3().validate_anchor_morphism(&[], 0.0, 1e-6).is_err());
    }
}
