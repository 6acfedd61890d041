//! Minimal Riemannian flows with transverse Kähler structure.
//!
//! A minimal Riemannian flow is a triple `(M, ĝ, ξ̂)` with `ξ̂` a unit Killing
//! field. The normal bundle `Q = ξ̂^⊥` carries the transversal Levi-Civita
//! connection
//!
//! ```text
//! ∇̂_X Z = [ξ̂, Z]^Q            if X = ξ̂,
//! ∇̂_X Z = (∇^M_X Z)^Q         if X ∈ Q,
//! ```
//!
//! and the O'Neill tensor `ĥ = ∇^M ξ̂` is a skew-symmetric endomorphism of
//! `Q` with `ĝ(ĥY, Z) = −½ ĝ([Y,Z], ξ̂)`. A flow is Sasaki when `ĥ = −J` for
//! the transverse complex structure `J`; it is *basic conformally* Sasaki when
//! `ĥ = −C·J` for a positive basic function `C`.
//!
//! Transverse endomorphisms are reported in a `ĝ`-orthonormal frame of `Q`
//! built by Gram-Schmidt over projected coordinate fields with a fixed,
//! deterministic ordering.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::chart::{
    matrix_apply, vector_values, Chart, MatrixField, ScalarField, VectorField,
};
use crate::error::{GeomError, Result};
use crate::jet::{seed_point, Jet, Jet1};
use crate::tensor::{christoffel, covariant_derivative, lie_bracket, lie_derivative_metric};

/// Tolerance classifying a function as basic: `|ξ̂(f)| < tol · (1 + |∇f|)`.
pub const BASIC_TOLERANCE: f64 = 1e-9;

/// A minimal Riemannian flow with a transverse almost-complex structure.
///
/// `transverse_j` acts as `J` on `Q` and as zero on `ξ̂` (so its square is
/// minus the orthogonal projection onto `Q`).
#[derive(Clone)]
pub struct RiemannianFlow {
    pub chart: Chart,
    pub reeb: VectorField,
    pub transverse_j: MatrixField,
    pub label: String,
}

/// Endomorphism of `Q` at a point, expressed in the orthonormal frame
/// returned by [`RiemannianFlow::transverse_frame`]. Column `a` holds the
/// frame coefficients of the image of the `a`-th frame field.
#[derive(Clone, Debug)]
pub struct TransverseEndomorphism {
    pub matrix: DMatrix<f64>,
}

impl TransverseEndomorphism {
    pub fn rank(&self) -> usize {
        self.matrix.nrows()
    }

    /// Frobenius norm; frame-rotation invariant.
    pub fn norm(&self) -> f64 {
        self.matrix.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.matrix.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// Max-entry norm of the commutator with another endomorphism.
    pub fn commutator_norm(&self, other: &TransverseEndomorphism) -> f64 {
        let c = &self.matrix * &other.matrix - &other.matrix * &self.matrix;
        c.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    pub fn skew_residual(&self) -> f64 {
        let s = &self.matrix + self.matrix.transpose();
        s.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }
}

/// Verdict of the Sasaki / basic-conformally-Sasaki detection.
#[derive(Clone, Debug, Serialize)]
pub struct SasakiReport {
    /// max over sampled points of the entry norm of `ĥ + J`.
    pub sasaki_residual: f64,
    pub is_sasaki: bool,
    /// max residual of `ĥ + C·J` with the pointwise least-squares factor `C`.
    pub conformal_residual: f64,
    /// Range of the conformal witness `C` over the sample.
    pub witness_min: f64,
    pub witness_max: f64,
    /// max `|ξ̂(C)|` estimated by flow differencing; small iff `C` is basic.
    pub witness_basic_residual: f64,
    pub is_basic_conformally_sasaki: bool,
    pub sample_count: usize,
}

// ---- jet-level helpers -----------------------------------------------------

fn inner_jets(g: &[Jet], v: &[Jet], w: &[Jet], d: usize) -> Jet {
    let mut acc = v[0].lift(0.0);
    for i in 0..d {
        for j in 0..d {
            acc = acc + &g[i * d + j] * &v[i] * &w[j];
        }
    }
    acc
}

/// Orthogonal projection onto `Q = ξ̂^⊥`, assuming `|ξ̂| = 1`.
fn project_q_jets(g: &[Jet], xi: &[Jet], v: &[Jet], d: usize) -> Vec<Jet> {
    let a = inner_jets(g, v, xi, d);
    (0..d).map(|k| &v[k] - &a * &xi[k]).collect()
}

fn inner_jet1(g: &[Jet1], v: &[Jet1], w: &[Jet1], d: usize) -> Jet1 {
    let mut acc = v[0].lift(0.0);
    for i in 0..d {
        for j in 0..d {
            acc = acc + &g[i * d + j] * &v[i] * &w[j];
        }
    }
    acc
}

impl RiemannianFlow {
    pub fn new(
        label: impl Into<String>,
        chart: Chart,
        reeb: VectorField,
        transverse_j: MatrixField,
    ) -> Self {
        RiemannianFlow {
            label: label.into(),
            chart,
            reeb,
            transverse_j,
        }
    }

    pub fn dim(&self) -> usize {
        self.chart.dim
    }

    /// Rank of the normal bundle `Q`.
    pub fn q_rank(&self) -> usize {
        self.chart.dim - 1
    }

    /// `| |ξ̂| − 1 |` at `p`.
    pub fn unit_reeb_residual(&self, p: &[f64]) -> Result<f64> {
        let xi = vector_values(&self.reeb, p);
        Ok((self.chart.norm(p, &xi)? - 1.0).abs())
    }

    /// `(L_ξ̂ ĝ)(X, Y)` at `p` for the given fields.
    pub fn killing_residual(
        &self,
        p: &[f64],
        x: &VectorField,
        y: &VectorField,
    ) -> Result<f64> {
        lie_derivative_metric(&self.chart, p, &self.reeb, x, y)
    }

    /// Coordinate indices whose projections to `Q` make a well-conditioned
    /// frame, chosen once at the chart center (deterministic ordering).
    fn frame_indices(&self) -> Result<Vec<usize>> {
        let d = self.dim();
        let p = self.chart.center();
        let g = self.chart.metric_values(&p)?;
        let xi = vector_values(&self.reeb, &p);
        let mut chosen: Vec<DVector<f64>> = Vec::new();
        let mut idx = Vec::new();
        for i in 0..d {
            if idx.len() == d - 1 {
                break;
            }
            let mut v = DVector::zeros(d);
            v[i] = 1.0;
            let a = (v.transpose() * &g * &xi)[(0, 0)];
            let mut w = v - &xi * a;
            for e in &chosen {
                let c = (w.transpose() * &g * e)[(0, 0)];
                w -= e * c;
            }
            let n = (w.transpose() * &g * &w)[(0, 0)].max(0.0).sqrt();
            if n > 1e-3 {
                chosen.push(w / n);
                idx.push(i);
            }
        }
        if idx.len() != d - 1 {
            return Err(GeomError::InvalidConfig(format!(
                "could not build a transverse frame for `{}`",
                self.label
            )));
        }
        Ok(idx)
    }

    /// `ĝ`-orthonormal frame fields of `Q` as jet-evaluable closures.
    pub fn transverse_frame(&self) -> Result<Vec<VectorField>> {
        let idx = self.frame_indices()?;
        Ok(self.frame_from_indices(&idx))
    }

    /// Frame built from an explicit candidate ordering; used to check that
    /// reported invariants do not depend on the frame.
    pub fn frame_from_indices(&self, idx: &[usize]) -> Vec<VectorField> {
        let d = self.dim();
        let mut fields: Vec<VectorField> = Vec::new();
        for (a, &i) in idx.iter().enumerate() {
            let metric = self.chart.metric.clone();
            let reeb = self.reeb.clone();
            let prev = idx[..a].to_vec();
            let field: VectorField = Arc::new(move |x: &[Jet]| {
                let g = metric(x);
                let xi = reeb(x);
                let gram_schmidt = |i: usize, done: &[Vec<Jet>]| -> Vec<Jet> {
                    let mut v: Vec<Jet> =
                        (0..d).map(|k| x[0].lift(if k == i { 1.0 } else { 0.0 })).collect();
                    v = project_q_jets(&g, &xi, &v, d);
                    for e in done {
                        let c = inner_jets(&g, &v, e, d);
                        v = (0..d).map(|k| &v[k] - &c * &e[k]).collect();
                    }
                    let n = inner_jets(&g, &v, &v, d).sqrt();
                    (0..d).map(|k| &v[k] / &n).collect()
                };
                let mut done: Vec<Vec<Jet>> = Vec::new();
                for &j in &prev {
                    let e = gram_schmidt(j, &done);
                    done.push(e);
                }
                gram_schmidt(i, &done)
            });
            fields.push(field);
        }
        fields
    }

    /// O'Neill tensor at `p` in the canonical orthonormal frame:
    /// `matrix[b][a] = ĝ(∇^M_{E_a} ξ̂, E_b)`.
    pub fn oneill(&self, p: &[f64]) -> Result<TransverseEndomorphism> {
        let frame = self.transverse_frame()?;
        self.oneill_in_frame(p, &frame)
    }

    pub fn oneill_in_frame(
        &self,
        p: &[f64],
        frame: &[VectorField],
    ) -> Result<TransverseEndomorphism> {
        let g = self.chart.metric_values(p)?;
        let r = frame.len();
        let mut m = DMatrix::zeros(r, r);
        for (a, ea) in frame.iter().enumerate() {
            let de = covariant_derivative(&self.chart, p, ea, &self.reeb)?;
            for (b, eb) in frame.iter().enumerate() {
                let ebv = vector_values(eb, p);
                m[(b, a)] = (de.transpose() * &g * ebv)[(0, 0)];
            }
        }
        Ok(TransverseEndomorphism { matrix: m })
    }

    /// Transverse complex structure at `p` in the same frame.
    pub fn j_in_frame(&self, p: &[f64], frame: &[VectorField]) -> Result<TransverseEndomorphism> {
        let g = self.chart.metric_values(p)?;
        let r = frame.len();
        let mut m = DMatrix::zeros(r, r);
        for (a, ea) in frame.iter().enumerate() {
            let jea = matrix_apply(self.transverse_j.clone(), ea.clone());
            let jv = vector_values(&jea, p);
            for (b, eb) in frame.iter().enumerate() {
                let ebv = vector_values(eb, p);
                m[(b, a)] = (jv.transpose() * &g * ebv)[(0, 0)];
            }
        }
        Ok(TransverseEndomorphism { matrix: m })
    }

    /// `|∇^M_ξ̂ ξ̂|` at `p`; zero because flow lines of a unit Killing field
    /// are geodesics, and also the `ĥ(ξ̂) = 0` part of the O'Neill identity.
    pub fn reeb_geodesic_residual(&self, p: &[f64]) -> Result<f64> {
        let v = covariant_derivative(&self.chart, p, &self.reeb, &self.reeb)?;
        self.chart.norm(p, &v)
    }

    /// Transversal Levi-Civita derivative `∇̂_X Z` at `p` (a vector in `Q`).
    pub fn transverse_connection(
        &self,
        p: &[f64],
        x: &VectorField,
        z: &VectorField,
    ) -> Result<DVector<f64>> {
        let d = self.dim();
        let g = self.chart.metric_values(p)?;
        let xiv = vector_values(&self.reeb, p);
        let xv = vector_values(x, p);
        let alpha = (xv.transpose() * &g * &xiv)[(0, 0)];

        let full = covariant_derivative(&self.chart, p, x, z)?;
        let along_reeb = covariant_derivative(&self.chart, p, &self.reeb, z)?;
        let bracket = lie_bracket(&self.chart, p, &self.reeb, z)?;

        // ∇̂_X Z = α [ξ̂, Z]^Q + (∇_{X − αξ̂} Z)^Q
        let mut v = DVector::zeros(d);
        for k in 0..d {
            v[k] = alpha * bracket[k] + full[k] - alpha * along_reeb[k];
        }
        let c = (v.transpose() * &g * &xiv)[(0, 0)];
        Ok(v - xiv * c)
    }

    /// Residual of `∇̂ J = 0` at `p` for the given direction and section.
    pub fn transverse_kaehler_residual(
        &self,
        p: &[f64],
        x: &VectorField,
        z: &VectorField,
    ) -> Result<f64> {
        let jz = matrix_apply(self.transverse_j.clone(), z.clone());
        let lhs = self.transverse_connection(p, x, &jz)?;
        let dz = self.transverse_connection(p, x, z)?;
        // apply J to ∇̂_X Z at value level
        let d = self.dim();
        let jets = seed_point(p);
        let jm = (self.transverse_j)(&jets);
        let mut rhs = DVector::zeros(d);
        for i in 0..d {
            for j in 0..d {
                rhs[i] += jm[i * d + j].val * dz[j];
            }
        }
        self.chart.norm(p, &(lhs - rhs))
    }

    /// Connection coefficients of `∇̂` in the canonical frame along each
    /// coordinate direction, as first-order jets:
    /// `W_i[b][a] = ĝ(∇̂_{∂_i} E_a, E_b)`.
    fn transverse_connection_jets(&self, p: &[f64]) -> Result<Vec<Vec<Jet1>>> {
        let d = self.dim();
        let r = d - 1;
        let jets = seed_point(p);
        let g2 = (self.chart.metric)(&jets);
        let xi2 = (self.reeb)(&jets);
        let frame = self.transverse_frame()?;
        let frame2: Vec<Vec<Jet>> = frame.iter().map(|e| e(&jets)).collect();
        let conn = christoffel(&self.chart, p)?;

        let g1: Vec<Jet1> = g2.iter().map(|j| j.lower()).collect();
        let xi1: Vec<Jet1> = xi2.iter().map(|j| j.lower()).collect();
        let frame1: Vec<Vec<Jet1>> = frame2
            .iter()
            .map(|e| e.iter().map(|j| j.lower()).collect())
            .collect();

        // ĝ(∂_i, ξ̂) per coordinate
        let alpha: Vec<Jet1> = (0..d)
            .map(|i| {
                let mut a = xi1[0].lift(0.0);
                for j in 0..d {
                    a = a + &g1[i * d + j] * &xi1[j];
                }
                a
            })
            .collect();

        let mut w = vec![vec![Jet1::constant(0.0, d); r * r]; d];
        for i in 0..d {
            for (a, ea2) in frame2.iter().enumerate() {
                // ambient part along (∂_i)^Q: Σ_p q^p (∂_p E_a^k + Γ^k_pq E_a^q)
                let mut v: Vec<Jet1> = (0..d).map(|_| xi1[0].lift(0.0)).collect();
                for pp in 0..d {
                    let mut qp = if pp == i {
                        xi1[0].lift(1.0)
                    } else {
                        xi1[0].lift(0.0)
                    };
                    qp = qp - &alpha[i] * &xi1[pp];
                    for k in 0..d {
                        let mut t = ea2[k].partial(pp);
                        for q in 0..d {
                            t = t + conn.jet1(k, pp, q) * &frame1[a][q];
                        }
                        v[k] = &v[k] + &qp * &t;
                    }
                }
                // Reeb part: α_i [ξ̂, E_a]
                for k in 0..d {
                    let mut br = xi1[0].lift(0.0);
                    for pp in 0..d {
                        br = br + &xi1[pp] * ea2[k].partial(pp) - &frame1[a][pp] * xi2[k].partial(pp);
                    }
                    v[k] = &v[k] + &alpha[i] * &br;
                }
                // project to Q
                let vn = inner_jet1(&g1, &v, &xi1, d);
                let v: Vec<Jet1> = (0..d).map(|k| &v[k] - &vn * &xi1[k]).collect();
                for (b, eb1) in frame1.iter().enumerate() {
                    w[i][b * r + a] = inner_jet1(&g1, &v, eb1, d);
                }
            }
        }
        Ok(w)
    }

    /// Curvature of the transversal connection contracted to the transverse
    /// Ricci endomorphism, in the canonical frame; also returns the max
    /// residual of `R^∇̂(ξ̂, ·) = 0`.
    pub fn transverse_ricci(&self, p: &[f64]) -> Result<(DMatrix<f64>, f64)> {
        let d = self.dim();
        let r = d - 1;
        let w = self.transverse_connection_jets(p)?;
        let jets = seed_point(p);
        let frame = self.transverse_frame()?;
        let frame_vals: Vec<Vec<f64>> = frame
            .iter()
            .map(|e| e(&jets).iter().map(|j| j.val).collect())
            .collect();
        let xi_vals: Vec<f64> = (self.reeb)(&jets).iter().map(|j| j.val).collect();

        // curvature frame matrix for each coordinate pair
        let curv = |i: usize, j: usize| -> DMatrix<f64> {
            let mut m = DMatrix::zeros(r, r);
            for b in 0..r {
                for a in 0..r {
                    let mut v = w[j][b * r + a].grad[i] - w[i][b * r + a].grad[j];
                    for c in 0..r {
                        v += w[i][b * r + c].val * w[j][c * r + a].val
                            - w[j][b * r + c].val * w[i][c * r + a].val;
                    }
                    m[(b, a)] = v;
                }
            }
            m
        };

        let mut curv_ij = Vec::with_capacity(d * d);
        for i in 0..d {
            for j in 0..d {
                curv_ij.push(curv(i, j));
            }
        }
        let apply = |xv: &[f64], yv: &[f64]| -> DMatrix<f64> {
            let mut m = DMatrix::zeros(r, r);
            for i in 0..d {
                for j in 0..d {
                    if xv[i] != 0.0 || yv[j] != 0.0 {
                        m += &curv_ij[i * d + j] * (xv[i] * yv[j]);
                    }
                }
            }
            m
        };

        // ric(E_a, E_b) = Σ_c ⟨ R(E_a, E_c) E_c, E_b ⟩
        let mut ric = DMatrix::zeros(r, r);
        for a in 0..r {
            for c in 0..r {
                let m = apply(&frame_vals[a], &frame_vals[c]);
                for b in 0..r {
                    ric[(a, b)] += m[(b, c)];
                }
            }
        }

        let mut reeb_residual: f64 = 0.0;
        for c in 0..r {
            let m = apply(&xi_vals, &frame_vals[c]);
            reeb_residual = reeb_residual.max(m.iter().fold(0.0f64, |mx, v| mx.max(v.abs())));
        }
        Ok((ric, reeb_residual))
    }

    /// `ξ̂(f) / (1 + |∇f|)` at `p`.
    pub fn basic_residual(&self, p: &[f64], f: &ScalarField) -> Result<f64> {
        self.chart.check_point(p, 0.0)?;
        let jets = seed_point(p);
        let fj = f(&jets);
        let xi = (self.reeb)(&jets);
        let d = self.dim();
        let mut xf = 0.0;
        for i in 0..d {
            xf += xi[i].val * fj.grad[i];
        }
        let gn = fj.grad.iter().map(|g| g * g).sum::<f64>().sqrt();
        Ok(xf.abs() / (1.0 + gn))
    }

    /// Transverse gradient `grad^∇̂ f = (∇^M f)^Q` at `p`.
    pub fn transverse_gradient(&self, p: &[f64], f: &ScalarField) -> Result<DVector<f64>> {
        let d = self.dim();
        let ginv = self.chart.inverse_metric_values(p)?;
        let g = self.chart.metric_values(p)?;
        let jets = seed_point(p);
        let fj = f(&jets);
        let du = DVector::from_iterator(d, fj.grad.iter().copied());
        let grad = ginv * du;
        let xiv = vector_values(&self.reeb, p);
        let c = (grad.transpose() * &g * &xiv)[(0, 0)];
        Ok(grad - xiv * c)
    }

    /// Basic transverse conformal change `ĝ_ξ̂ ⊕ e^{2f} ĝ_ξ̂⊥`.
    ///
    /// Errors when `f` fails the basicness test at the supplied sample points.
    pub fn basic_conformal_change(
        &self,
        f: ScalarField,
        check_points: &[Vec<f64>],
    ) -> Result<RiemannianFlow> {
        for p in check_points {
            let r = self.basic_residual(p, &f)?;
            if r > BASIC_TOLERANCE {
                return Err(GeomError::NonBasicFunction {
                    residual: r,
                    tolerance: BASIC_TOLERANCE,
                });
            }
        }
        let d = self.dim();
        let base_metric = self.chart.metric.clone();
        let reeb = self.reeb.clone();
        let f2 = f.clone();
        let metric: MatrixField = Arc::new(move |x: &[Jet]| {
            let g = base_metric(x);
            let xi = reeb(x);
            let scale = (f2(x) * 2.0).exp();
            // ξ̂♭ with respect to the base metric
            let flat: Vec<Jet> = (0..d)
                .map(|i| {
                    let mut acc = x[0].lift(0.0);
                    for j in 0..d {
                        acc = acc + &g[i * d + j] * &xi[j];
                    }
                    acc
                })
                .collect();
            let mut out = Vec::with_capacity(d * d);
            for i in 0..d {
                for j in 0..d {
                    let vertical = &flat[i] * &flat[j];
                    let transverse = &g[i * d + j] - &vertical;
                    out.push(&vertical + &scale * &transverse);
                }
            }
            out
        });
        Ok(RiemannianFlow {
            label: format!("{}+conf", self.label),
            chart: Chart::new(
                format!("{}+conf", self.chart.label),
                self.chart.bounds.clone(),
                metric,
            ),
            reeb: self.reeb.clone(),
            transverse_j: self.transverse_j.clone(),
        })
    }

    /// Rescales the Reeb direction: metric `α² ĝ_ξ̂ ⊕ ĝ_ξ̂⊥`, Reeb `ξ̂/α`.
    pub fn rescale_reeb(&self, alpha: f64) -> Result<RiemannianFlow> {
        if alpha <= 0.0 {
            return Err(GeomError::NonPositiveScale(alpha));
        }
        let d = self.dim();
        let base_metric = self.chart.metric.clone();
        let reeb = self.reeb.clone();
        let metric: MatrixField = Arc::new(move |x: &[Jet]| {
            let g = base_metric(x);
            let xi = reeb(x);
            let flat: Vec<Jet> = (0..d)
                .map(|i| {
                    let mut acc = x[0].lift(0.0);
                    for j in 0..d {
                        acc = acc + &g[i * d + j] * &xi[j];
                    }
                    acc
                })
                .collect();
            let mut out = Vec::with_capacity(d * d);
            for i in 0..d {
                for j in 0..d {
                    let vertical = &flat[i] * &flat[j];
                    let transverse = &g[i * d + j] - &vertical;
                    out.push(vertical * (alpha * alpha) + transverse);
                }
            }
            out
        });
        let old_reeb = self.reeb.clone();
        let new_reeb: VectorField = Arc::new(move |x: &[Jet]| {
            old_reeb(x).into_iter().map(|c| c / alpha).collect()
        });
        Ok(RiemannianFlow {
            label: format!("{}*a={alpha}", self.label),
            chart: Chart::new(
                format!("{}*a={alpha}", self.chart.label),
                self.chart.bounds.clone(),
                metric,
            ),
            reeb: new_reeb,
            transverse_j: self.transverse_j.clone(),
        })
    }

    /// Sasaki / basic-conformally-Sasaki detection over sampled points.
    pub fn is_sasaki(&self, points: &[Vec<f64>], tolerance: f64) -> Result<SasakiReport> {
        if points.is_empty() {
            return Err(GeomError::EmptyInput("is_sasaki sample".into()));
        }
        let frame = self.transverse_frame()?;
        let mut sasaki_residual: f64 = 0.0;
        let mut conformal_residual: f64 = 0.0;
        let mut wmin = f64::INFINITY;
        let mut wmax = f64::NEG_INFINITY;
        let mut witness_basic: f64 = 0.0;

        let witness_at = |p: &[f64]| -> Result<(f64, f64, f64)> {
            let h = self.oneill_in_frame(p, &frame)?;
            let j = self.j_in_frame(p, &frame)?;
            let jj: f64 = j.matrix.iter().map(|v| v * v).sum();
            let hj: f64 = h.matrix.iter().zip(j.matrix.iter()).map(|(a, b)| a * b).sum();
            let c = -hj / jj;
            let sas = (&h.matrix + &j.matrix)
                .iter()
                .fold(0.0f64, |m, v| m.max(v.abs()));
            let conf = (&h.matrix + &j.matrix * c)
                .iter()
                .fold(0.0f64, |m, v| m.max(v.abs()));
            Ok((sas, conf, c))
        };

        for p in points {
            let (sas, conf, c) = witness_at(p)?;
            sasaki_residual = sasaki_residual.max(sas);
            conformal_residual = conformal_residual.max(conf);
            wmin = wmin.min(c);
            wmax = wmax.max(c);

            // ξ̂(C) by central flow differencing along the Reeb direction
            let xiv = vector_values(&self.reeb, p);
            let step = 1e-4;
            let mut fwd = p.to_vec();
            let mut bwd = p.to_vec();
            for i in 0..p.len() {
                fwd[i] += step * xiv[i];
                bwd[i] -= step * xiv[i];
            }
            if self.chart.contains(&fwd, 0.0) && self.chart.contains(&bwd, 0.0) {
                let (_, _, cf) = witness_at(&fwd)?;
                let (_, _, cb) = witness_at(&bwd)?;
                witness_basic = witness_basic.max(((cf - cb) / (2.0 * step)).abs());
            }
        }

        Ok(SasakiReport {
            sasaki_residual,
            is_sasaki: sasaki_residual < tolerance,
            conformal_residual,
            witness_min: wmin,
            witness_max: wmax,
            witness_basic_residual: witness_basic,
            is_basic_conformally_sasaki: conformal_residual < tolerance
                && witness_basic < 1e-5
                && wmin > 0.0,
            sample_count: points.len(),
        })
    }
}
