use crate::{Mat8, DIM};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum MetricError {
    #[error("metric is not symmetric (max asymmetry {0:.3e})")]
    NotSymmetric(f64),
    #[error("metric is not positive definite")]
    NotPositive,
    #[error("metric has non-finite entries")]
    NonFinite,
}

/// Positive-definite metric with cached inverse and volume factor.
#[derive(Clone, Debug, PartialEq)]
pub struct Metric {
    g: Mat8,
    g_inv: Mat8,
    sqrt_det: f64,
}

impl Metric {
    pub fn euclidean() -> Self {
        Metric { g: Mat8::identity(), g_inv: Mat8::identity(), sqrt_det: 1.0 }
    }

    pub fn new(g: Mat8) -> Result<Self, MetricError> {
        if g.iter().any(|x| !x.is_finite()) {
            return Err(MetricError::NonFinite);
        }
        let scale = g.amax().max(1.0);
        let asym = (g - g.transpose()).amax();
        if asym > 1e-12 * scale {
            return Err(MetricError::NotSymmetric(asym));
        }
        let g = (g + g.transpose()) * 0.5;
        let chol = g.cholesky().ok_or(MetricError::NotPositive)?;
        let l = chol.l();
        let sqrt_det: f64 = (0..DIM).map(|i| l[(i, i)]).product();
        let g_inv = chol.inverse();
        let g_inv = (g_inv + g_inv.transpose()) * 0.5;
        Ok(Metric { g, g_inv, sqrt_det })
    }

    /// g = E Eᵀ for a frame whose rows are the coordinate components of the coframe.
    pub fn from_frame(e: &Mat8) -> Result<Self, MetricError> {
        Metric::new(e * e.transpose())
    }

    pub fn g(&self) -> &Mat8 {
        &self.g
    }

    pub fn g_inv(&self) -> &Mat8 {
        &self.g_inv
    }

    pub fn sqrt_det(&self) -> f64 {
        self.sqrt_det
    }

    pub fn is_euclidean(&self) -> bool {
        self.g == Mat8::identity()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_and_determinant() {
        let e = Mat8::from_fn(|i, j| if i == j { 1.5 } else { 0.1 * ((i * 3 + j) % 5) as f64 - 0.2 });
        let m = Metric::from_frame(&e).unwrap();
        assert!((m.g() * m.g_inv() - Mat8::identity()).amax() < 1e-12);
        assert!((m.sqrt_det() - e.determinant().abs()).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_input() {
        let mut g = Mat8::identity();
        g[(0, 1)] = 0.5;
        assert!(matches!(Metric::new(g), Err(MetricError::NotSymmetric(_))));
        let mut g = Mat8::identity();
        g[(3, 3)] = -1.0;
        assert_eq!(Metric::new(g), Err(MetricError::NotPositive));
    }
}
