//! Coordinate tensor calculus on a chart.
//!
//! Christoffel symbols come from the Koszul formula
//! `Γ^k_ij = ½ g^kl (∂_i g_jl + ∂_j g_il − ∂_l g_ij)` with all partials taken
//! from second-order jets of the metric, so connection coefficients are exact
//! to rounding and carry their own first derivatives. Curvature uses the
//! convention `R(X,Y) = [∇_X, ∇_Y] − ∇_[X,Y]` with Ricci contracted so that
//! round spheres come out positive.

use nalgebra::{DMatrix, DVector};

use crate::chart::{Chart, ScalarField, VectorField};
use crate::error::{GeomError, Result};
use crate::jet::{seed_point, Jet, Jet1};

/// Christoffel symbols `Γ^k_ij` at a point, plus their first partials
/// `∂_m Γ^k_ij` (available for free from the metric's second jets).
#[derive(Clone, Debug)]
pub struct ConnectionCoefficients {
    pub dim: usize,
    /// Row-major `[k][i][j]`, symmetric in `(i, j)`.
    pub gamma: Vec<f64>,
    /// Row-major `[k][i][j][m]` = `∂_m Γ^k_ij`.
    pub dgamma: Vec<f64>,
}

impl ConnectionCoefficients {
    #[inline]
    pub fn at(&self, k: usize, i: usize, j: usize) -> f64 {
        let d = self.dim;
        self.gamma[(k * d + i) * d + j]
    }

    #[inline]
    pub fn d_at(&self, k: usize, i: usize, j: usize, m: usize) -> f64 {
        let d = self.dim;
        self.dgamma[((k * d + i) * d + j) * d + m]
    }

    /// `Γ^k_ij` as a first-order jet in the coordinates.
    pub fn jet1(&self, k: usize, i: usize, j: usize) -> Jet1 {
        Jet1 {
            val: self.at(k, i, j),
            grad: (0..self.dim).map(|m| self.d_at(k, i, j, m)).collect(),
        }
    }

    /// Worst asymmetry `|Γ^k_ij − Γ^k_ji|`; zero by construction.
    pub fn symmetry_residual(&self) -> f64 {
        let d = self.dim;
        let mut worst: f64 = 0.0;
        for k in 0..d {
            for i in 0..d {
                for j in 0..d {
                    worst = worst.max((self.at(k, i, j) - self.at(k, j, i)).abs());
                }
            }
        }
        worst
    }
}

/// Curvature data at a point.
#[derive(Clone, Debug, serde::Serialize)]
pub struct CurvatureAtPoint {
    pub dim: usize,
    /// `R^l_ijk`, row-major `[l][i][j][k]`, from `R(∂_i, ∂_j)∂_k = R^l_ijk ∂_l`.
    pub riemann: Vec<f64>,
    /// Ricci as a (0,2)-tensor, `ric(∂_j, ∂_k)`.
    pub ricci02: Vec<Vec<f64>>,
    /// Ricci with one index raised, `ric^i_k = g^ij ric_jk`.
    pub ricci11: Vec<Vec<f64>>,
    pub scalar: f64,
}

impl CurvatureAtPoint {
    #[inline]
    pub fn riemann_at(&self, l: usize, i: usize, j: usize, k: usize) -> f64 {
        let d = self.dim;
        self.riemann[((l * d + i) * d + j) * d + k]
    }

    pub fn ricci02_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.dim, self.dim, |i, j| self.ricci02[i][j])
    }

    /// Max residual of antisymmetry in the first two lower slots.
    pub fn antisymmetry_residual(&self) -> f64 {
        let d = self.dim;
        let mut worst: f64 = 0.0;
        for l in 0..d {
            for i in 0..d {
                for j in 0..d {
                    for k in 0..d {
                        worst = worst
                            .max((self.riemann_at(l, i, j, k) + self.riemann_at(l, j, i, k)).abs());
                    }
                }
            }
        }
        worst
    }

    /// Max residual of the first Bianchi identity
    /// `R^l_ijk + R^l_jki + R^l_kij = 0`.
    pub fn bianchi_residual(&self) -> f64 {
        let d = self.dim;
        let mut worst: f64 = 0.0;
        for l in 0..d {
            for i in 0..d {
                for j in 0..d {
                    for k in 0..d {
                        let s = self.riemann_at(l, i, j, k)
                            + self.riemann_at(l, j, k, i)
                            + self.riemann_at(l, k, i, j);
                        worst = worst.max(s.abs());
                    }
                }
            }
        }
        worst
    }

    /// Largest absolute Riemann component, used to scale residual tolerances.
    pub fn scale(&self) -> f64 {
        self.riemann.iter().fold(1.0f64, |m, &r| m.max(r.abs()))
    }
}

fn invert_values(chart: &Chart, p: &[f64], g: &[Jet]) -> Result<DMatrix<f64>> {
    let d = chart.dim;
    let gv = DMatrix::from_fn(d, d, |i, j| g[i * d + j].val);
    gv.try_inverse().ok_or(GeomError::SingularMetric {
        chart: chart.label.clone(),
        point: p.to_vec(),
    })
}

/// Christoffel symbols of the chart metric at `p`.
pub fn christoffel(chart: &Chart, p: &[f64]) -> Result<ConnectionCoefficients> {
    chart.check_point(p, 0.0)?;
    let d = chart.dim;
    let g = (chart.metric)(&seed_point(p));
    let ginv = invert_values(chart, p, &g)?;

    let dg = |i: usize, j: usize, m: usize| g[i * d + j].grad[m];
    let d2g = |i: usize, j: usize, m: usize, q: usize| g[i * d + j].hess_at(m, q);

    let mut gamma = vec![0.0; d * d * d];
    let mut dgamma = vec![0.0; d * d * d * d];

    // dginv[m][k][l] = ∂_m g^kl = −g^ka ∂_m g_ab g^bl
    let mut dginv = vec![0.0; d * d * d];
    for m in 0..d {
        for k in 0..d {
            for l in 0..d {
                let mut s = 0.0;
                for a in 0..d {
                    for b in 0..d {
                        s -= ginv[(k, a)] * dg(a, b, m) * ginv[(b, l)];
                    }
                }
                dginv[(m * d + k) * d + l] = s;
            }
        }
    }

    for k in 0..d {
        for i in 0..d {
            for j in 0..d {
                let mut v = 0.0;
                for l in 0..d {
                    v += ginv[(k, l)] * (dg(j, l, i) + dg(i, l, j) - dg(i, j, l));
                }
                gamma[(k * d + i) * d + j] = 0.5 * v;
                for m in 0..d {
                    let mut w = 0.0;
                    for l in 0..d {
                        let a = dg(j, l, i) + dg(i, l, j) - dg(i, j, l);
                        let da = d2g(j, l, i, m) + d2g(i, l, j, m) - d2g(i, j, l, m);
                        w += dginv[(m * d + k) * d + l] * a + ginv[(k, l)] * da;
                    }
                    dgamma[((k * d + i) * d + j) * d + m] = 0.5 * w;
                }
            }
        }
    }

    Ok(ConnectionCoefficients { dim: d, gamma, dgamma })
}

/// Full curvature at `p`: Riemann tensor, both Ricci forms and the scalar.
pub fn riemann_ricci(chart: &Chart, p: &[f64]) -> Result<CurvatureAtPoint> {
    let d = chart.dim;
    let conn = christoffel(chart, p)?;
    let ginv = chart.inverse_metric_values(p)?;

    let mut riemann = vec![0.0; d * d * d * d];
    for l in 0..d {
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    let mut v = conn.d_at(l, j, k, i) - conn.d_at(l, i, k, j);
                    for m in 0..d {
                        v += conn.at(l, i, m) * conn.at(m, j, k)
                            - conn.at(l, j, m) * conn.at(m, i, k);
                    }
                    riemann[((l * d + i) * d + j) * d + k] = v;
                }
            }
        }
    }

    // ric_jk = R^i_ijk (trace over the first lower slot); positive on spheres.
    let mut ricci02 = vec![vec![0.0; d]; d];
    for j in 0..d {
        for k in 0..d {
            let mut v = 0.0;
            for i in 0..d {
                v += riemann[((i * d + i) * d + j) * d + k];
            }
            ricci02[j][k] = v;
        }
    }

    let mut ricci11 = vec![vec![0.0; d]; d];
    let mut scalar = 0.0;
    for i in 0..d {
        for k in 0..d {
            let mut v = 0.0;
            for j in 0..d {
                v += ginv[(i, j)] * ricci02[j][k];
            }
            ricci11[i][k] = v;
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

/// Covariant derivative `(∇_X Y)^k = X^i (∂_i Y^k + Γ^k_ij Y^j)` at `p`.
pub fn covariant_derivative(
    chart: &Chart,
    p: &[f64],
    x: &VectorField,
    y: &VectorField,
) -> Result<DVector<f64>> {
    let d = chart.dim;
    let conn = christoffel(chart, p)?;
    let jets = seed_point(p);
    let xj = x(&jets);
    let yj = y(&jets);
    let mut out = DVector::zeros(d);
    for k in 0..d {
        let mut v = 0.0;
        for i in 0..d {
            let mut t = yj[k].grad[i];
            for j in 0..d {
                t += conn.at(k, i, j) * yj[j].val;
            }
            v += xj[i].val * t;
        }
        out[k] = v;
    }
    Ok(out)
}

/// Gradient (index raised) and covariant Hessian of a scalar field at `p`.
///
/// `grad^i = g^ij ∂_j u`, `Hess_ij = ∂_i ∂_j u − Γ^k_ij ∂_k u`.
pub fn gradient_hessian(
    chart: &Chart,
    p: &[f64],
    u: &ScalarField,
) -> Result<(DVector<f64>, DMatrix<f64>)> {
    let d = chart.dim;
    let conn = christoffel(chart, p)?;
    let ginv = chart.inverse_metric_values(p)?;
    let uj = u(&seed_point(p));
    let du = DVector::from_iterator(d, uj.grad.iter().copied());
    let grad = ginv * &du;
    let hess = DMatrix::from_fn(d, d, |i, j| {
        let mut v = uj.hess_at(i, j);
        for k in 0..d {
            v -= conn.at(k, i, j) * du[k];
        }
        v
    });
    Ok((grad, hess))
}

/// Lie bracket `[X, Y]^k = X^i ∂_i Y^k − Y^i ∂_i X^k` at `p`.
pub fn lie_bracket(chart: &Chart, p: &[f64], x: &VectorField, y: &VectorField) -> Result<DVector<f64>> {
    chart.check_point(p, 0.0)?;
    let d = chart.dim;
    let jets = seed_point(p);
    let xj = x(&jets);
    let yj = y(&jets);
    let mut out = DVector::zeros(d);
    for k in 0..d {
        let mut v = 0.0;
        for i in 0..d {
            v += xj[i].val * yj[k].grad[i] - yj[i].val * xj[k].grad[i];
        }
        out[k] = v;
    }
    Ok(out)
}

/// Derivative of the scalar `g(Y, Z)` along `X` at `p`, i.e. `X(g(Y,Z))`.
pub fn derivative_of_inner(
    chart: &Chart,
    p: &[f64],
    x: &VectorField,
    y: &VectorField,
    z: &VectorField,
) -> Result<f64> {
    chart.check_point(p, 0.0)?;
    let d = chart.dim;
    let jets = seed_point(p);
    let g = (chart.metric)(&jets);
    let xj = x(&jets);
    let yj = y(&jets);
    let zj = z(&jets);
    let mut inner = xj[0].lift(0.0);
    for i in 0..d {
        for j in 0..d {
            inner = inner + &g[i * d + j] * &yj[i] * &zj[j];
        }
    }
    let mut v = 0.0;
    for i in 0..d {
        v += xj[i].val * inner.grad[i];
    }
    Ok(v)
}

/// Lie derivative of the metric, `(L_X g)(Y, Z)`, evaluated at `p`.
///
/// Vanishes for Killing fields.
pub fn lie_derivative_metric(
    chart: &Chart,
    p: &[f64],
    x: &VectorField,
    y: &VectorField,
    z: &VectorField,
) -> Result<f64> {
    let xg = derivative_of_inner(chart, p, x, y, z)?;
    let jets = seed_point(p);
    let yv = DVector::from_iterator(chart.dim, y(&jets).iter().map(|j| j.val));
    let zv = DVector::from_iterator(chart.dim, z(&jets).iter().map(|j| j.val));
    let bxy = lie_bracket(chart, p, x, y)?;
    let bxz = lie_bracket(chart, p, x, z)?;
    let g = chart.metric_values(p)?;
    Ok(xg - (bxy.transpose() * &g * zv)[(0, 0)] - (yv.transpose() * &g * bxz)[(0, 0)])
}

/// Solves `g · w = rhs` with jet coefficients by Gaussian elimination with
/// partial pivoting on values. Used to build derivative-carrying fields such
/// as normalized gradients.
pub fn jet_solve(g: &[Jet], rhs: &[Jet], dim: usize) -> Vec<Jet> {
    let mut a: Vec<Jet> = g.to_vec();
    let mut b: Vec<Jet> = rhs.to_vec();
    for col in 0..dim {
        let mut piv = col;
        for r in col + 1..dim {
            if a[r * dim + col].val.abs() > a[piv * dim + col].val.abs() {
                piv = r;
            }
        }
        if piv != col {
            for c in 0..dim {
                a.swap(col * dim + c, piv * dim + c);
            }
            b.swap(col, piv);
        }
        let inv = a[col * dim + col].recip();
        for r in 0..dim {
            if r == col {
                continue;
            }
            let factor = &a[r * dim + col] * &inv;
            for c in col..dim {
                a[r * dim + c] = &a[r * dim + c] - &factor * &a[col * dim + c];
            }
            b[r] = &b[r] - &factor * &b[col];
        }
    }
    (0..dim)
        .map(|i| &b[i] / &a[i * dim + i])
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chart::{constant_vector, coordinate_vector, MatrixField};
    use approx::assert_abs_diff_eq;
    use std::sync::Arc;

    fn euclidean(dim: usize) -> Chart {
        let metric: MatrixField = Arc::new(move |x: &[Jet]| {
            let mut g = Vec::with_capacity(dim * dim);
            for i in 0..dim {
                for j in 0..dim {
                    g.push(x[0].lift(if i == j { 1.0 } else { 0.0 }));
                }
            }
            g
        });
        Chart::new("euclidean", vec![(-10.0, 10.0); dim], metric)
    }

    /// Unit round 2-sphere in polar coordinates.
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
    fn euclidean_christoffel_vanishes() {
        let c = euclidean(3);
        let conn = christoffel(&c, &[0.4, -1.0, 2.0]).unwrap();
        assert!(conn.gamma.iter().all(|&g| g == 0.0));
        assert_eq!(conn.symmetry_residual(), 0.0);
    }

    #[test]
    fn euclidean_curvature_vanishes() {
        let c = euclidean(3);
        let cur = riemann_ricci(&c, &[0.4, -1.0, 2.0]).unwrap();
        assert!(cur.riemann.iter().all(|&r| r == 0.0));
        assert_eq!(cur.scalar, 0.0);
    }

    #[test]
    fn sphere_christoffel_matches_closed_form() {
        let c = sphere2();
        let th = 0.9f64;
        let conn = christoffel(&c, &[th, 1.0]).unwrap();
        // Γ^θ_φφ = −sinθ cosθ, Γ^φ_θφ = cotθ
        assert_abs_diff_eq!(conn.at(0, 1, 1), -th.sin() * th.cos(), epsilon = 1e-13);
        assert_abs_diff_eq!(conn.at(1, 0, 1), th.cos() / th.sin(), epsilon = 1e-13);
    }

    #[test]
    fn sphere_is_einstein_with_positive_ricci() {
        // ric = (dim−1) g on the unit round sphere; pins the sign convention.
        let c = sphere2();
        let p = [1.1, 2.0];
        let cur = riemann_ricci(&c, &p).unwrap();
        let g = c.metric_values(&p).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert_abs_diff_eq!(cur.ricci02[i][j], g[(i, j)], epsilon = 1e-11);
            }
        }
        assert_abs_diff_eq!(cur.scalar, 2.0, epsilon = 1e-11);
        assert!(cur.antisymmetry_residual() < 1e-12);
        assert!(cur.bianchi_residual() < 1e-12);
    }

    #[test]
    fn constant_fields_have_zero_covariant_derivative_in_flat_space() {
        let c = euclidean(3);
        let x = constant_vector(vec![1.0, 2.0, -1.0]);
        let y = constant_vector(vec![0.5, 0.0, 3.0]);
        let d = covariant_derivative(&c, &[0.1, 0.2, 0.3], &x, &y).unwrap();
        assert_eq!(d.as_slice(), &[0.0, 0.0, 0.0]);
    }

    #[test]
    fn hessian_of_linear_function_vanishes() {
        let c = euclidean(3);
        let u: ScalarField = Arc::new(|x: &[Jet]| &x[0] * 2.0 - &x[2] * 5.0 + 1.0);
        let (grad, hess) = gradient_hessian(&c, &[0.3, 0.4, 0.5], &u).unwrap();
        assert_eq!(grad.as_slice(), &[2.0, 0.0, -5.0]);
        assert!(hess.iter().all(|&h| h == 0.0));
    }

    #[test]
    fn coordinate_fields_commute() {
        let c = sphere2();
        let b = lie_bracket(&c, &[0.7, 0.5], &coordinate_vector(0, 2), &coordinate_vector(1, 2))
            .unwrap();
        assert_eq!(b.as_slice(), &[0.0, 0.0]);
    }

    #[test]
    fn torsion_free_and_metric_compatible_on_sphere() {
        let c = sphere2();
        let p = [0.8, 1.3];
        // Polynomial test fields.
        let x: VectorField = Arc::new(|q: &[Jet]| vec![&q[1] * 0.3 + 1.0, &q[0] * &q[0] * 0.2]);
        let y: VectorField = Arc::new(|q: &[Jet]| vec![&q[0] * -0.4, &q[1] * 0.1 + 0.7]);

        let dxy = covariant_derivative(&c, &p, &x, &y).unwrap();
        let dyx = covariant_derivative(&c, &p, &y, &x).unwrap();
        let br = lie_bracket(&c, &p, &x, &y).unwrap();
        let torsion = (&dxy - &dyx - &br).abs().max();
        assert!(torsion < 1e-12, "torsion residual {torsion}");

        let z: VectorField = Arc::new(|q: &[Jet]| vec![q[0].sin(), &q[0] * 0.5]);
        let xg = derivative_of_inner(&c, &p, &x, &y, &z).unwrap();
        let g = c.metric_values(&p).unwrap();
        let dxz = covariant_derivative(&c, &p, &x, &z).unwrap();
        let yv = crate::chart::vector_values(&y, &p);
        let zv = crate::chart::vector_values(&z, &p);
        let compat = xg
            - (dxy.transpose() * &g * &zv)[(0, 0)]
            - (yv.transpose() * &g * &dxz)[(0, 0)];
        assert!(compat.abs() < 1e-12, "compatibility residual {compat}");
    }

    #[test]
    fn killing_field_on_sphere() {
        let c = sphere2();
        let phi_rot = coordinate_vector(1, 2);
        let x: VectorField = Arc::new(|q: &[Jet]| vec![&q[1] * 0.2 + 0.5, &q[0] * 0.3]);
        let y: VectorField = Arc::new(|q: &[Jet]| vec![q[1].cos(), &q[0] * 0.9]);
        let r = lie_derivative_metric(&c, &[0.9, 0.4], &phi_rot, &x, &y).unwrap();
        assert!(r.abs() < 1e-12);
    }

    #[test]
    fn jet_solve_inverts_metric_application() {
        let c = sphere2();
        let p = [0.7, 0.3];
        let jets = seed_point(&p);
        let g = (c.metric)(&jets);
        let rhs = vec![Jet::var(0.3, 0, 2), Jet::var(-1.2, 1, 2)];
        let w = jet_solve(&g, &rhs, 2);
        // g · w == rhs at value level
        for i in 0..2 {
            let mut v = 0.0;
            for j in 0..2 {
                v += g[i * 2 + j].val * w[j].val;
            }
            assert_abs_diff_eq!(v, rhs[i].val, epsilon = 1e-13);
        }
    }

    #[test]
    fn out_of_bounds_point_is_rejected() {
        let c = sphere2();
        assert!(matches!(
            christoffel(&c, &[-0.1, 1.0]),
            Err(GeomError::OutOfBounds { .. })
        ));
    }

    #[test]
    fn singular_metric_is_reported() {
        let metric: MatrixField = Arc::new(|x: &[Jet]| {
            vec![&x[0] * &x[0], x[0].lift(0.0), x[0].lift(0.0), x[0].lift(0.0)]
        });
        let c = Chart::new("degenerate", vec![(-1.0, 1.0); 2], metric);
        assert!(matches!(
            christoffel(&c, &[0.5, 0.0]),
            Err(GeomError::SingularMetric { .. })
        ));
    }
}
