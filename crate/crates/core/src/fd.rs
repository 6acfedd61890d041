//! Finite-difference cross-check mode.
//!
//! Central differences with one Richardson extrapolation step, kept
//! deliberately independent of the jet pipeline: Christoffel symbols here are
//! assembled from differenced metric values, and curvature from differenced
//! jet-level Christoffel symbols, so each differentiates a different layer.
//! Expected agreement with the jet pipeline is ~1e−5 relative (the
//! differences carry O(h²)·Richardson error plus rounding amplification).

use nalgebra::DMatrix;

use crate::chart::Chart;
use crate::error::Result;
use crate::jet::seed_values;
use crate::tensor::{christoffel, ConnectionCoefficients, CurvatureAtPoint};

/// Default step for the finite-difference oracle.
pub const DEFAULT_STEP: f64 = 1e-4;

fn metric_at(chart: &Chart, p: &[f64]) -> DMatrix<f64> {
    let d = chart.dim;
    let g = (chart.metric)(&seed_values(p));
    DMatrix::from_fn(d, d, |i, j| g[i * d + j].val)
}

fn central<F>(f: F, h: f64) -> DMatrix<f64>
where
    F: Fn(f64) -> DMatrix<f64>,
{
    (f(h) - f(-h)) / (2.0 * h)
}

/// Richardson-extrapolated central difference of a matrix-valued function of
/// a single offset: `(4 D(h/2) − D(h)) / 3`.
fn richardson<F>(f: F, h: f64) -> DMatrix<f64>
where
    F: Fn(f64) -> DMatrix<f64> + Copy,
{
    (central(f, 0.5 * h) * 4.0 - central(f, h)) / 3.0
}

/// Christoffel symbols from differenced metric values only.
pub fn christoffel_fd(chart: &Chart, p: &[f64], h: f64) -> Result<ConnectionCoefficients> {
    chart.check_point(p, 0.0)?;
    let d = chart.dim;
    let ginv = chart.inverse_metric_values(p)?;

    // dg[m] = ∂_m g as a matrix
    let dg: Vec<DMatrix<f64>> = (0..d)
        .map(|m| {
            richardson(
                |off| {
                    let mut q = p.to_vec();
                    q[m] += off;
                    metric_at(chart, &q)
                },
                h,
            )
        })
        .collect();

    let mut gamma = vec![0.0; d * d * d];
    for k in 0..d {
        for i in 0..d {
            for j in 0..d {
                let mut v = 0.0;
                for l in 0..d {
                    v += ginv[(k, l)] * (dg[i][(j, l)] + dg[j][(i, l)] - dg[l][(i, j)]);
                }
                gamma[(k * d + i) * d + j] = 0.5 * v;
            }
        }
    }

    Ok(ConnectionCoefficients {
        dim: d,
        gamma,
        dgamma: vec![0.0; d * d * d * d],
    })
}

/// Curvature with `∂Γ` from differenced jet-level Christoffel symbols.
pub fn riemann_ricci_fd(chart: &Chart, p: &[f64], h: f64) -> Result<CurvatureAtPoint> {
    let d = chart.dim;
    let conn = christoffel(chart, p)?;
    let ginv = chart.inverse_metric_values(p)?;

    let gamma_matrix = |q: &[f64]| -> Result<DMatrix<f64>> {
        let c = christoffel(chart, q)?;
        Ok(DMatrix::from_fn(d * d, d, |row, j| {
            let (k, i) = (row / d, row % d);
            c.at(k, i, j)
        }))
    };

    let mut dgamma = vec![0.0; d * d * d * d];
    for m in 0..d {
        let base = gamma_matrix(p)?; // touch once to surface errors eagerly
        let _ = base;
        let diff = richardson(
            |off| {
                let mut q = p.to_vec();
                q[m] += off;
                gamma_matrix(&q).expect("finite-difference stencil left the chart")
            },
            h,
        );
        for k in 0..d {
            for i in 0..d {
                for j in 0..d {
                    dgamma[((k * d + i) * d + j) * d + m] = diff[(k * d + i, j)];
                }
            }
        }
    }

    let d_at = |k: usize, i: usize, j: usize, m: usize| dgamma[((k * d + i) * d + j) * d + m];

    let mut riemann = vec![0.0; d * d * d * d];
    for l in 0..d {
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    let mut v = d_at(l, j, k, i) - d_at(l, i, k, j);
                    for m in 0..d {
                        v += conn.at(l, i, m) * conn.at(m, j, k)
                            - conn.at(l, j, m) * conn.at(m, i, k);
                    }
                    riemann[((l * d + i) * d + j) * d + k] = v;
                }
            }
        }
    }

    let mut ricci02 = vec![vec![0.0; d]; d];
    for j in 0..d {
        for k in 0..d {
            ricci02[j][k] = (0..d).map(|i| riemann[((i * d + i) * d + j) * d + k]).sum();
        }
    }
    let mut ricci11 = vec![vec![0.0; d]; d];
    let mut scalar = 0.0;
    for i in 0..d {
        for k in 0..d {
            ricci11[i][k] = (0..d).map(|j| ginv[(i, j)] * ricci02[j][k]).sum();
        }
        scalar += ricci11[i][i];
    }

    Ok(CurvatureAtPoint {
        dim: d,
        riemann,
        ricci02,
        ricci11,
        scalar,
    })
}

/// Largest relative disagreement between two Christoffel tables.
pub fn christoffel_agreement(a: &ConnectionCoefficients, b: &ConnectionCoefficients) -> f64 {
    let scale = a
        .gamma
        .iter()
        .fold(1.0f64, |m, &g| m.max(g.abs()));
    a.gamma
        .iter()
        .zip(&b.gamma)
        .fold(0.0f64, |m, (&x, &y)| m.max((x - y).abs() / scale))
}

/// Largest relative disagreement between two Riemann tensors.
pub fn riemann_agreement(a: &CurvatureAtPoint, b: &CurvatureAtPoint) -> f64 {
    let scale = a.scale();
    a.riemann
        .iter()
        .zip(&b.riemann)
        .fold(0.0f64, |m, (&x, &y)| m.max((x - y).abs() / scale))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chart::MatrixField;
    use crate::jet::Jet;
    use std::sync::Arc;

    fn sphere2() -> Chart {
        let metric: MatrixField = Arc::new(|x: &[Jet]| {
            let s = x[0].sin();
            vec![x[0].lift(1.0), x[0].lift(0.0), x[0].lift(0.0), &s * &s]
        });
        Chart::new(
            "s2-polar",
            vec![(0.0, std::f64::consts::PI), (0.0, 2.0 * std::f64::consts::PI)],
            metric,
        )
    }

    #[test]
    fn fd_christoffel_agrees_with_jets_on_sphere() {
        let c = sphere2();
        let p = [0.9, 1.0];
        let jet = christoffel(&c, &p).unwrap();
        let fd = christoffel_fd(&c, &p, DEFAULT_STEP).unwrap();
        assert!(christoffel_agreement(&jet, &fd) < 1e-6);
    }

    #[test]
    fn fd_curvature_agrees_with_jets_on_sphere() {
        let c = sphere2();
        let p = [1.2, 2.0];
        let jet = crate::tensor::riemann_ricci(&c, &p).unwrap();
        let fd = riemann_ricci_fd(&c, &p, DEFAULT_STEP).unwrap();
        assert!(riemann_agreement(&jet, &fd) < 1e-5);
    }
}
