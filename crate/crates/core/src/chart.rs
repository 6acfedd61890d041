//! Coordinate charts and jet-evaluable fields.
//!
//! A [`Chart`] is a coordinate patch: a dimension, per-coordinate open bounds
//! and a metric evaluator. All fields (scalars, vectors, endomorphisms) are
//! closures over jets, so every consumer can extract values or derivatives as
//! needed from the same definition.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{GeomError, Result};
use crate::jet::{seed_point, Jet};

/// Scalar field: coordinates (as jets) to a jet.
pub type ScalarField = Arc<dyn Fn(&[Jet]) -> Jet + Send + Sync>;
/// Vector field: coordinates to component jets (length = chart dimension).
pub type VectorField = Arc<dyn Fn(&[Jet]) -> Vec<Jet> + Send + Sync>;
/// Matrix-valued field, row-major `dim * dim` entries (metrics, endomorphisms).
pub type MatrixField = Arc<dyn Fn(&[Jet]) -> Vec<Jet> + Send + Sync>;
/// Function of a single real variable, used for warping profiles.
pub type CurveFn = Arc<dyn Fn(&Jet) -> Jet + Send + Sync>;

/// Coordinate patch with a smooth metric evaluator.
#[derive(Clone)]
pub struct Chart {
    pub label: String,
    pub dim: usize,
    /// Open interval per coordinate.
    pub bounds: Vec<(f64, f64)>,
    pub metric: MatrixField,
}

/// Default inset from chart bounds used when sampling points.
pub const DEFAULT_MARGIN: f64 = 1e-2;

impl Chart {
    pub fn new(
        label: impl Into<String>,
        bounds: Vec<(f64, f64)>,
        metric: MatrixField,
    ) -> Self {
        Chart {
            label: label.into(),
            dim: bounds.len(),
            bounds,
            metric,
        }
    }

    pub fn contains(&self, p: &[f64], margin: f64) -> bool {
        p.len() == self.dim
            && p.iter()
                .zip(&self.bounds)
                .all(|(&x, &(lo, hi))| x > lo + margin && x < hi - margin)
    }

    pub fn check_point(&self, p: &[f64], margin: f64) -> Result<()> {
        if p.len() != self.dim {
            return Err(GeomError::DimensionMismatch {
                expected: self.dim,
                got: p.len(),
            });
        }
        if !self.contains(p, margin) {
            return Err(GeomError::OutOfBounds {
                chart: self.label.clone(),
                point: p.to_vec(),
                margin,
            });
        }
        Ok(())
    }

    /// Center of the bounding box.
    pub fn center(&self) -> Vec<f64> {
        self.bounds.iter().map(|&(lo, hi)| 0.5 * (lo + hi)).collect()
    }

    /// Metric components with full second-order jets at `p`.
    pub fn metric_jets(&self, p: &[f64]) -> Result<Vec<Jet>> {
        self.check_point(p, 0.0)?;
        Ok((self.metric)(&seed_point(p)))
    }

    /// Metric values at `p` as a matrix.
    pub fn metric_values(&self, p: &[f64]) -> Result<DMatrix<f64>> {
        self.check_point(p, 0.0)?;
        let jets = crate::jet::seed_values(p);
        let g = (self.metric)(&jets);
        Ok(DMatrix::from_fn(self.dim, self.dim, |i, j| {
            g[i * self.dim + j].val
        }))
    }

    /// Inverse metric at `p`; errors when the matrix fails to invert, which
    /// signals chart degeneracy (e.g. Hopf coordinate poles).
    pub fn inverse_metric_values(&self, p: &[f64]) -> Result<DMatrix<f64>> {
        let g = self.metric_values(p)?;
        g.clone().try_inverse().ok_or(GeomError::SingularMetric {
            chart: self.label.clone(),
            point: p.to_vec(),
        })
    }

    /// Checks symmetry and positive-definiteness (via Cholesky) of the metric
    /// at every supplied point.
    pub fn check_spd(&self, points: &[Vec<f64>]) -> Result<()> {
        for p in points {
            let g = self.metric_values(p)?;
            let asym = (&g - g.transpose()).abs().max();
            if asym > 1e-12 * (1.0 + g.abs().max()) {
                return Err(GeomError::InvalidConfig(format!(
                    "metric of `{}` asymmetric by {asym:.3e} at {p:?}",
                    self.label
                )));
            }
            if nalgebra::Cholesky::new(g).is_none() {
                return Err(GeomError::SingularMetric {
                    chart: self.label.clone(),
                    point: p.clone(),
                });
            }
        }
        Ok(())
    }

    /// Length of `v` in the metric at `p`.
    pub fn norm(&self, p: &[f64], v: &DVector<f64>) -> Result<f64> {
        let g = self.metric_values(p)?;
        Ok((v.transpose() * g * v)[(0, 0)].max(0.0).sqrt())
    }

    /// Inner product of `v`, `w` at `p`.
    pub fn inner(&self, p: &[f64], v: &DVector<f64>, w: &DVector<f64>) -> Result<f64> {
        let g = self.metric_values(p)?;
        Ok((v.transpose() * g * w)[(0, 0)])
    }
}

/// Builds a constant-coefficient vector field.
pub fn constant_vector(components: Vec<f64>) -> VectorField {
    Arc::new(move |x: &[Jet]| {
        components.iter().map(|&c| x[0].lift(c)).collect()
    })
}

/// Vector field with all components zero except `index`, which is one.
pub fn coordinate_vector(index: usize, dim: usize) -> VectorField {
    let mut c = vec![0.0; dim];
    c[index] = 1.0;
    constant_vector(c)
}

/// Applies a matrix field to a vector field, producing the vector field
/// `x ↦ M(x) · V(x)`.
pub fn matrix_apply(m: MatrixField, v: VectorField) -> VectorField {
    Arc::new(move |x: &[Jet]| {
        let dim = x.len();
        let mv = m(x);
        let vv = v(x);
        debug_assert_eq!(mv.len(), dim * dim);
        (0..dim)
            .map(|i| {
                let mut acc = x[0].lift(0.0);
                for j in 0..dim {
                    acc = acc + &mv[i * dim + j] * &vv[j];
                }
                acc
            })
            .collect()
    })
}

/// Evaluates a vector field's component values at `p`.
pub fn vector_values(v: &VectorField, p: &[f64]) -> DVector<f64> {
    let jets = crate::jet::seed_values(p);
    DVector::from_iterator(p.len(), v(&jets).into_iter().map(|j| j.val))
}

/// Evaluates a scalar field's value at `p`.
pub fn scalar_value(f: &ScalarField, p: &[f64]) -> f64 {
    f(&crate::jet::seed_values(p)).val
}
