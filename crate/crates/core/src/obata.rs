//! Hessian eigenstructure of potentials and gradient-flow reconstruction.
//!
//! For a positive potential `u` without critical points on a Kähler chart,
//! set `ν = ∇̃u/|∇̃u|` and `ξ = −J̃ν`. The structure under test:
//!
//! ```text
//! ∇̃²u = λ·(ν♭⊗ν♭ + ξ♭⊗ξ♭) + μ·Id on {ν,ξ}^⊥,   μ = |∇̃u|²/(2u),
//! ```
//!
//! with `∇̃²u` J̃-invariant and `∇̃u` an eigenvector (so `ν` is geodesic).
//! Along the flow `F_s` of `ν`, `f(s) = u∘F_s` is the same function for
//! every start point on a level set, `f' = |∇̃u|∘F`, `f'' = λ∘F`, the flow
//! preserves level sets, the vertical field scales as
//! `(F_s)_*ξ = (f'(s)/f'(0))·ξ∘F_s`, and the transverse metric is rescaled
//! conformally by `exp(2∫ μ/f' )`. The level hypersurfaces inherit a minimal
//! Riemannian flow whose O'Neill tensor is `−(μ/|∇̃u|)·J̃` on the transverse
//! bundle, and `L_ν J̃ = (λ/|∇̃u|)(ν♭⊗ξ + ξ♭⊗ν)`.
//!
//! All flow checks integrate the augmented system `(y, φ, ψ, χ)` with
//! `ẏ = ν`, `φ̇ = |∇̃u|`, `ψ̇ = λ`, `χ̇ = 2μ/|∇̃u|`, so each identity is
//! measured in integral form at integrator accuracy rather than through
//! finite differences of sampled values. Pushforwards `dF_s X` use central
//! flow differencing of displaced starts.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::chart::{scalar_value, Chart, MatrixField, ScalarField, VectorField};
use crate::dwp::DoublyWarpedProduct;
use crate::error::{GeomError, Result};
use crate::jet::{seed_point, seed_values, Jet};
use crate::report::SamplingGrid;
use crate::rk::{self, Rk45Options, StepOutcome};
use crate::tensor::{covariant_derivative, gradient_hessian, jet_solve};

/// A chart with a complex structure and a positive potential on it.
#[derive(Clone)]
pub struct PotentialSetup {
    pub chart: Chart,
    pub ambient_j: MatrixField,
    pub u: ScalarField,
}

/// Tolerance below which `|∇̃u|` counts as a critical point.
pub const CRITICAL_TOLERANCE: f64 = 1e-10;

/// Eigenstructure of the Hessian at a point.
#[derive(Clone, Debug, Serialize)]
pub struct HessianSpectrum {
    /// Eigenvalue on `span{ν, ξ}` (read from the `ν`-component).
    pub lambda: f64,
    /// Mean transverse eigenvalue.
    pub mu: f64,
    pub grad_norm: f64,
    pub u_value: f64,
    /// max `|H(J̃X, J̃Y) − H(X, Y)|`, scaled.
    pub j_invariance_residual: f64,
    /// max `|H(ν, E) − λ·ν♭(E)|` over the frame, scaled.
    pub eigenvector_residual: f64,
    /// Frame-matrix deviation from `λ ⊕ λ ⊕ μ·Id`, scaled.
    pub two_eigenvalue_residual: f64,
    /// max deviation of the transverse block from `μ·Id`, scaled.
    pub transverse_deviation: f64,
}

impl PotentialSetup {
    pub fn new(chart: Chart, ambient_j: MatrixField, u: ScalarField) -> Self {
        PotentialSetup { chart, ambient_j, u }
    }

    /// Product chart with `u = ρ(t)²`.
    pub fn squared_warping(dwp: &DoublyWarpedProduct) -> Self {
        let rho = dwp.profile.rho.clone();
        let u: ScalarField = Arc::new(move |x: &[Jet]| {
            let r = rho(&x[0]);
            &r * &r
        });
        PotentialSetup {
            chart: dwp.chart.clone(),
            ambient_j: dwp.ambient_j(),
            u,
        }
    }

    /// Normalized gradient field `ν = ∇̃u/|∇̃u|`.
    ///
    /// First-order accurate in the jets (the Hessian of `u` feeds the
    /// gradient's first derivatives); sufficient for one covariant
    /// derivative, which is all any consumer takes.
    pub fn nu_field(&self) -> VectorField {
        let metric = self.chart.metric.clone();
        let u = self.u.clone();
        Arc::new(move |x: &[Jet]| {
            let d = x.len();
            let g = metric(x);
            let uj = u(x);
            let du: Vec<Jet> = (0..d)
                .map(|i| {
                    let p = uj.partial(i);
                    Jet {
                        val: p.val,
                        grad: p.grad,
                        hess: vec![0.0; d * d],
                    }
                })
                .collect();
            let grad = jet_solve(&g, &du, d);
            let mut norm2 = x[0].lift(0.0);
            for i in 0..d {
                norm2 = norm2 + &du[i] * &grad[i];
            }
            let norm = norm2.sqrt();
            grad.into_iter().map(|c| c / &norm).collect()
        })
    }

    /// The vertical field `ξ = −J̃ν`.
    pub fn xi_field(&self) -> VectorField {
        let j = self.ambient_j.clone();
        let nu = self.nu_field();
        Arc::new(move |x: &[Jet]| {
            let d = x.len();
            let jm = j(x);
            let nv = nu(x);
            (0..d)
                .map(|r| {
                    let mut acc = x[0].lift(0.0);
                    for c in 0..d {
                        acc = acc - &jm[r * d + c] * &nv[c];
                    }
                    acc
                })
                .collect()
        })
    }

    fn frame_at(&self, p: &[f64]) -> Result<(Vec<DVector<f64>>, DMatrix<f64>, f64, f64)> {
        let d = self.chart.dim;
        let (grad, _) = gradient_hessian(&self.chart, p, &self.u)?;
        let g = self.chart.metric_values(p)?;
        let norm = (grad.transpose() * &g * &grad)[(0, 0)].max(0.0).sqrt();
        if norm < CRITICAL_TOLERANCE {
            return Err(GeomError::CriticalPoint {
                point: p.to_vec(),
                norm,
            });
        }
        let nu = &grad / norm;
        let jm = {
            let jets = seed_values(p);
            let v = (self.ambient_j)(&jets);
            DMatrix::from_fn(d, d, |r, c| v[r * d + c].val)
        };
        let xi = -(&jm * &nu);

        let mut frame = vec![nu, xi];
        for i in 0..d {
            if frame.len() == d {
                break;
            }
            let mut v = DVector::zeros(d);
            v[i] = 1.0;
            for e in &frame {
                let c = (v.transpose() * &g * e)[(0, 0)];
                v -= e * c;
            }
            let n = (v.transpose() * &g * &v)[(0, 0)].max(0.0).sqrt();
            if n > 1e-6 {
                frame.push(v / n);
            }
        }
        if frame.len() != d {
            return Err(GeomError::InvalidConfig(format!(
                "could not complete an orthonormal frame at {p:?}"
            )));
        }
        Ok((frame, jm, norm, 0.0))
    }

    /// Full eigenstructure report at `p`.
    pub fn hessian_spectrum(&self, p: &[f64]) -> Result<HessianSpectrum> {
        let d = self.chart.dim;
        let (_, hess) = gradient_hessian(&self.chart, p, &self.u)?;
        let (frame, jm, grad_norm, _) = self.frame_at(p)?;
        let g = self.chart.metric_values(p)?;
        let u_value = scalar_value(&self.u, p);

        let h = |x: &DVector<f64>, y: &DVector<f64>| (x.transpose() * &hess * y)[(0, 0)];
        let mut hf = DMatrix::zeros(d, d);
        for a in 0..d {
            for b in 0..d {
                hf[(a, b)] = h(&frame[a], &frame[b]);
            }
        }
        let scale = 1.0 + hf.abs().max();

        let lambda = hf[(0, 0)];
        let mu = if d > 2 {
            (2..d).map(|a| hf[(a, a)]).sum::<f64>() / (d - 2) as f64
        } else {
            0.0
        };

        // J̃-invariance over the frame
        let mut j_inv: f64 = 0.0;
        for a in 0..d {
            let ja = &jm * &frame[a];
            for b in 0..d {
                let jb = &jm * &frame[b];
                j_inv = j_inv.max((h(&ja, &jb) - hf[(a, b)]).abs());
            }
        }

        // ∇̃u eigenvector: H(ν, ·) = λ ν♭
        let mut eigvec: f64 = 0.0;
        for b in 0..d {
            let expected = if b == 0 { lambda } else { 0.0 };
            eigvec = eigvec.max((hf[(0, b)] - expected).abs());
        }

        // model matrix λ ⊕ λ ⊕ μ·Id
        let mut model = DMatrix::zeros(d, d);
        model[(0, 0)] = lambda;
        model[(1, 1)] = lambda;
        for a in 2..d {
            model[(a, a)] = mu;
        }
        let two_eig = (&hf - &model).abs().max();
        let mut transverse_dev: f64 = 0.0;
        for a in 2..d {
            for b in 2..d {
                let expected = if a == b { mu } else { 0.0 };
                transverse_dev = transverse_dev.max((hf[(a, b)] - expected).abs());
            }
        }

        let _ = g;
        Ok(HessianSpectrum {
            lambda,
            mu,
            grad_norm,
            u_value,
            j_invariance_residual: j_inv / scale,
            eigenvector_residual: eigvec / scale,
            two_eigenvalue_residual: two_eig / scale,
            transverse_deviation: transverse_dev / scale,
        })
    }

    /// `|∇̃_ν ν|` at `p`; the gradient is geodesic when it is a pointwise
    /// Hessian eigenvector.
    pub fn nu_geodesic_residual(&self, p: &[f64]) -> Result<f64> {
        let nu = self.nu_field();
        let v = covariant_derivative(&self.chart, p, &nu, &nu)?;
        self.chart.norm(p, &v)
    }

    /// O'Neill tensor of the induced level-hypersurface flow at `p`, compared
    /// against `−(μ/|∇̃u|)·J̃` on the transverse bundle, plus the geodesic
    /// residual of `ξ` inside the level set. Returns scaled residuals
    /// `(oneill, xi_geodesic)`.
    pub fn level_set_oneill_residual(&self, p: &[f64]) -> Result<(f64, f64)> {
        let (frame, jm, grad_norm, _) = self.frame_at(p)?;
        let spec = self.hessian_spectrum(p)?;
        let g = self.chart.metric_values(p)?;
        let xi_field = self.xi_field();
        let factor = -spec.mu / grad_norm;

        let inner = |x: &DVector<f64>, y: &DVector<f64>| (x.transpose() * &g * y)[(0, 0)];
        let mut worst: f64 = 0.0;
        for ea in frame.iter().skip(2) {
            // ∇̃_X ξ for the field ξ = −J̃ν, then project off ν
            let x_field = constant_field(ea.as_slice().to_vec());
            let dxi = covariant_derivative(&self.chart, p, &x_field, &xi_field)?;
            let proj = &dxi - &frame[0] * inner(&dxi, &frame[0]);
            let expected = (&jm * ea) * factor;
            // compare on the transverse block only (the ξ-component carries
            // the second fundamental form of the level set instead)
            for eb in frame.iter().skip(2) {
                let r = (inner(&proj, eb) - inner(&expected, eb)).abs();
                worst = worst.max(r / (1.0 + factor.abs()));
            }
        }
        // ĥ(ξ) = 0: the induced flow is minimal
        let xi_dir = constant_field(frame[1].as_slice().to_vec());
        let dxi = covariant_derivative(&self.chart, p, &xi_dir, &xi_field)?;
        let mut tangent = dxi.clone();
        tangent -= &frame[0] * inner(&dxi, &frame[0]);
        let mut xi_geo: f64 = 0.0;
        for eb in frame.iter().skip(2) {
            xi_geo = xi_geo.max(inner(&tangent, eb).abs());
        }
        Ok((worst, xi_geo))
    }

    /// `L_ν J̃` at `p` by central flow differencing (with one Richardson
    /// step), compared against `(λ/|∇̃u|)(ν♭⊗ξ + ξ♭⊗ν)`. Returns the scaled
    /// max deviation over the frame, and the max transverse block entry of
    /// the measured derivative (which must vanish).
    pub fn lie_derivative_j_residual(&self, p: &[f64], h: f64) -> Result<(f64, f64)> {
        let d = self.chart.dim;
        let (frame, _, grad_norm, _) = self.frame_at(p)?;
        let spec = self.hessian_spectrum(p)?;
        let g = self.chart.metric_values(p)?;
        let inner = |x: &DVector<f64>, y: &DVector<f64>| (x.transpose() * &g * y)[(0, 0)];

        let pullback_j = |s: f64| -> Result<DMatrix<f64>> {
            // (F_s^* J̃)(v) = dF_{−s}( J̃_{F_s(p)} ( dF_s v ) )
            let delta = 1e-4;
            let target = self.flow_point(p, s)?;
            let jm_t = {
                let jets = seed_values(&target);
                let v = (self.ambient_j)(&jets);
                DMatrix::from_fn(d, d, |r, c| v[r * d + c].val)
            };
            let mut m = DMatrix::zeros(d, d);
            for col in 0..d {
                let mut e = vec![0.0; d];
                e[col] = 1.0;
                let push = self.pushforward(p, &e, s, delta)?;
                let jv = &jm_t * &push;
                let back = self.pushforward(&target, jv.as_slice(), -s, delta)?;
                m.set_column(col, &back);
            }
            Ok(m)
        };

        let richardson = |h: f64| -> Result<DMatrix<f64>> {
            let diff_h = (pullback_j(h)? - pullback_j(-h)?) / (2.0 * h);
            let diff_h2 = (pullback_j(h / 2.0)? - pullback_j(-h / 2.0)?) / h;
            Ok((diff_h2 * 4.0 - diff_h) / 3.0)
        };
        let lie = richardson(h)?;

        let coeff = spec.lambda / grad_norm;
        let mut worst: f64 = 0.0;
        let mut transverse: f64 = 0.0;
        for (a, ea) in frame.iter().enumerate() {
            let lx = &lie * ea;
            // expected: coeff (g̃(ν,X) ξ + g̃(ξ,X) ν)
            let expected = &frame[1] * (coeff * inner(&frame[0], ea))
                + &frame[0] * (coeff * inner(&frame[1], ea));
            for (b, eb) in frame.iter().enumerate() {
                let r = (inner(&lx, eb) - inner(&expected, eb)).abs();
                worst = worst.max(r / (1.0 + coeff.abs()));
                if a >= 2 && b >= 2 {
                    transverse = transverse.max(inner(&lx, eb).abs());
                }
            }
        }
        Ok((worst, transverse))
    }

    /// Integrates the flow of `ν` from `p` for time `s` (plain state only).
    pub fn flow_point(&self, p: &[f64], s: f64) -> Result<Vec<f64>> {
        if s == 0.0 {
            return Ok(p.to_vec());
        }
        let nu = self.nu_field();
        let chart = self.chart.clone();
        let rhs = move |_t: f64, y: &[f64]| {
            let jets = seed_point(y); // ν needs first derivatives of u
            nu(&jets).into_iter().map(|j| j.val).collect::<Vec<f64>>()
        };
        let mut end = p.to_vec();
        let label = self.chart.label.clone();
        rk::integrate(
            rhs,
            0.0,
            p.to_vec(),
            s,
            &Rk45Options::default(),
            |step| {
                end = step.y1.clone();
                if !chart.contains(&end, 0.0) {
                    return StepOutcome::Stop;
                }
                StepOutcome::Continue
            },
        )?;
        if !self.chart.contains(&end, 0.0) {
            return Err(GeomError::FlowExitedChart { chart: label, t: s });
        }
        Ok(end)
    }

    /// `dF_s(X)` at `F_s(p)` by central differencing of displaced flows.
    pub fn pushforward(&self, p: &[f64], x: &[f64], s: f64, delta: f64) -> Result<DVector<f64>> {
        let d = self.chart.dim;
        let mut fwd = p.to_vec();
        let mut bwd = p.to_vec();
        for i in 0..d {
            fwd[i] += delta * x[i];
            bwd[i] -= delta * x[i];
        }
        let yf = self.flow_point(&fwd, s)?;
        let yb = self.flow_point(&bwd, s)?;
        Ok(DVector::from_iterator(
            d,
            (0..d).map(|i| (yf[i] - yb[i]) / (2.0 * delta)),
        ))
    }
}

fn constant_field(components: Vec<f64>) -> VectorField {
    crate::chart::constant_vector(components)
}

// ---- exponential case ------------------------------------------------------

/// Checks of the exponential configuration `ρ = e^t`, `u = e^{2t} = ρ²`:
/// `|∇̃u| = 2u`, eigenvalues `(4u, 2u)`, and
/// `ker(∇̃²u − 4u·Id) = span{∇̃u, J̃∇̃u}`.
#[derive(Clone, Debug, Serialize)]
pub struct ExponentialCaseReport {
    /// max `| |∇̃u| − 2u | / u`.
    pub gradient_identity_residual: f64,
    /// max `|λ − 4u| / u`.
    pub lambda_residual: f64,
    /// max `|μ − 2u| / u`.
    pub mu_residual: f64,
    /// max scaled deviation of `∇̃²u` from `2u(ξ♭⊗ξ♭ + ν♭⊗ν♭ + Id)`.
    pub hessian_form_residual: f64,
    /// projection residual of `{∇̃u, J̃∇̃u}` onto the `4u`-eigenspace.
    pub kernel_projection_residual: f64,
    pub sample_count: usize,
}

/// Runs the exponential-case checks over a grid of points.
pub fn exponential_case_report(
    dwp: &DoublyWarpedProduct,
    points: &[Vec<f64>],
) -> Result<ExponentialCaseReport> {
    if points.is_empty() {
        return Err(GeomError::EmptyInput("exponential case sample".into()));
    }
    let setup = PotentialSetup::squared_warping(dwp);
    let d = dwp.dim();
    let mut grad_res: f64 = 0.0;
    let mut lambda_res: f64 = 0.0;
    let mut mu_res: f64 = 0.0;
    let mut form_res: f64 = 0.0;
    let mut ker_res: f64 = 0.0;

    for p in points {
        let spec = setup.hessian_spectrum(p)?;
        let u = spec.u_value;
        grad_res = grad_res.max((spec.grad_norm - 2.0 * u).abs() / u);
        lambda_res = lambda_res.max((spec.lambda - 4.0 * u).abs() / u);
        mu_res = mu_res.max((spec.mu - 2.0 * u).abs() / u);

        // ∇̃²u = 2u (ν♭⊗ν♭ + ξ♭⊗ξ♭ + Id): in the adapted orthonormal frame
        // this is diag(4u, 4u, 2u, …): covered by two_eigenvalue_residual
        // with λ = 4u, μ = 2u plus the two scalar residuals above.
        form_res = form_res.max(spec.two_eigenvalue_residual);

        // kernel of (∇̃²u − 4u Id) spans {ν, ξ}: project ν, ξ onto the
        // eigenspace computed by a symmetric eigensolver.
        let (_, hess) = gradient_hessian(&setup.chart, p, &setup.u)?;
        let (frame, _, _, _) = setup.frame_at(p)?;
        let mut hf = DMatrix::zeros(d, d);
        for a in 0..d {
            for b in 0..d {
                hf[(a, b)] = (frame[a].transpose() * &hess * &frame[b])[(0, 0)];
            }
        }
        let eig = hf.clone().symmetric_eigen();
        // columns with eigenvalue near 4u
        let mut basis: Vec<DVector<f64>> = Vec::new();
        for (i, &ev) in eig.eigenvalues.iter().enumerate() {
            if (ev - 4.0 * u).abs() < 0.5 * u {
                basis.push(eig.eigenvectors.column(i).into_owned());
            }
        }
        if basis.len() != 2 {
            ker_res = f64::INFINITY;
            continue;
        }
        // ν and ξ are frame vectors e₀, e₁; their projection defect onto the
        // eigenbasis must vanish
        for idx in 0..2 {
            let mut e = DVector::zeros(d);
            e[idx] = 1.0;
            let mut proj = DVector::zeros(d);
            for b in &basis {
                proj += b * (b.transpose() * &e)[(0, 0)];
            }
            ker_res = ker_res.max((proj - e).norm());
        }
    }

    Ok(ExponentialCaseReport {
        gradient_identity_residual: grad_res,
        lambda_residual: lambda_res,
        mu_residual: mu_res,
        hessian_form_residual: form_res,
        kernel_projection_residual: ker_res,
        sample_count: points.len(),
    })
}

// ---- distorted charts ------------------------------------------------------

/// Pulls back a potential setup through the coordinate shear
/// `x₀ = y₀ + a·sin(y₁)`, `x_j = y_j + a·sin(y₀)cos(y_j)`, so the gradient
/// flow is curved in the new coordinates and level sets are not coordinate
/// planes. Used to make flow-reconstruction checks nontrivial.
pub fn shear_setup(setup: &PotentialSetup, amount: f64) -> PotentialSetup {
    let a = amount;

    let phi = move |y: &[Jet]| -> Vec<Jet> {
        let mut x = Vec::with_capacity(y.len());
        x.push(&y[0] + y[1].sin() * a);
        let s0 = y[0].sin();
        for j in 1..y.len() {
            x.push(&y[j] + &s0 * y[j].cos() * a);
        }
        x
    };
    // analytic Jacobian (row-major d×d)
    let dphi = move |y: &[Jet]| -> Vec<Jet> {
        let d = y.len();
        let zero = y[0].lift(0.0);
        let mut m = vec![zero; d * d];
        m[0] = y[0].lift(1.0);
        m[1] = y[1].cos() * a;
        let c0 = y[0].cos();
        let s0 = y[0].sin();
        for j in 1..d {
            m[j * d] = &c0 * y[j].cos() * a;
            m[j * d + j] = y[0].lift(1.0) - &s0 * y[j].sin() * a;
        }
        m
    };

    let base_metric = setup.chart.metric.clone();
    let metric: MatrixField = Arc::new(move |y: &[Jet]| {
        let d = y.len();
        let x = phi(y);
        let g = base_metric(&x);
        let jac = dphi(y);
        // DΦᵀ g DΦ
        let mut out = Vec::with_capacity(d * d);
        for i in 0..d {
            for j in 0..d {
                let mut acc = y[0].lift(0.0);
                for r in 0..d {
                    for c in 0..d {
                        acc = acc + &jac[r * d + i] * &g[r * d + c] * &jac[c * d + j];
                    }
                }
                out.push(acc);
            }
        }
        out
    });

    let base_u = setup.u.clone();
    let u: ScalarField = Arc::new(move |y: &[Jet]| base_u(&phi(y)));

    let base_j = setup.ambient_j.clone();
    let j: MatrixField = Arc::new(move |y: &[Jet]| {
        let d = y.len();
        let x = phi(y);
        let jx = base_j(&x);
        let jac = dphi(y);
        // J_y = DΦ⁻¹ J_x DΦ: solve DΦ · col = (J_x · DΦ) column-wise
        let mut rhs_cols: Vec<Vec<Jet>> = Vec::with_capacity(d);
        for col in 0..d {
            let mut v = Vec::with_capacity(d);
            for r in 0..d {
                let mut acc = y[0].lift(0.0);
                for c in 0..d {
                    acc = acc + &jx[r * d + c] * &jac[c * d + col];
                }
                v.push(acc);
            }
            rhs_cols.push(v);
        }
        let mut out = vec![y[0].lift(0.0); d * d];
        for (col, rhs) in rhs_cols.into_iter().enumerate() {
            let solved = jet_solve(&jac, &rhs, d);
            for r in 0..d {
                out[r * d + col] = solved[r].clone();
            }
        }
        out
    });

    // shrink bounds so Φ(y) stays inside the original chart
    let bounds = setup
        .chart
        .bounds
        .iter()
        .map(|&(lo, hi)| (lo + a.abs() * 1.01, hi - a.abs() * 1.01))
        .collect();

    PotentialSetup {
        chart: Chart::new(format!("{}~shear", setup.chart.label), bounds, metric),
        ambient_j: j,
        u,
    }
}

// ---- flow reconstruction ---------------------------------------------------

#[derive(Clone, Copy, Debug)]
pub struct ReconstructionConfig {
    /// Level value; seeds solve `u(·) = u0` along coordinate 0.
    pub u0: f64,
    pub s_min: f64,
    pub s_max: f64,
    pub seeds: usize,
    pub save_points: usize,
    pub pushforward_delta: f64,
    pub seed_margin: f64,
    pub seed_rng: u64,
}

impl Default for ReconstructionConfig {
    fn default() -> Self {
        ReconstructionConfig {
            u0: 1.0,
            s_min: -0.3,
            s_max: 0.6,
            seeds: 6,
            save_points: 13,
            pushforward_delta: 1e-4,
            seed_margin: 0.12,
            seed_rng: 29,
        }
    }
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct ReconstructionRow {
    pub s: f64,
    /// mean of `u∘F_s` over seeds.
    pub f: f64,
    /// max spread of `u∘F_s` over seeds.
    pub spread: f64,
    /// mean of `|∇̃u|∘F_s`.
    pub f_prime: f64,
    /// mean of `λ∘F_s`.
    pub lambda: f64,
    /// mean of `μ∘F_s`.
    pub mu: f64,
    /// max `|u∘F_s − (u0 + ∫|∇̃u|)|`.
    pub f_prime_residual: f64,
    /// max `||∇̃u|∘F_s − (|∇̃u|(0) + ∫λ)|`.
    pub f_second_residual: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ReconstructionReport {
    pub rows: Vec<ReconstructionRow>,
    pub seed_count: usize,
    pub spread_max: f64,
    pub f_prime_residual_max: f64,
    pub f_second_residual_max: f64,
    /// max `|g̃(ν, dF_s X)|` over level-tangent `X` (scaled by `|dF_s X|`).
    pub orthogonality_max: f64,
    /// max relative error of `|（F_s)_* ξ|` against `f'(s)/f'(0)`.
    pub xi_scaling_max: f64,
    /// max relative deviation of the rebuilt level metric from the model
    /// `(f'(s)/f'(0))² on ξ ⊕ exp(2∫μ/f') on the transverse block`.
    pub metric_residual_max: f64,
}

/// Finds seeds on the level set `u = u0` by bisection along coordinate 0.
pub fn level_set_seeds(
    setup: &PotentialSetup,
    u0: f64,
    count: usize,
    margin: f64,
    rng_seed: u64,
) -> Result<Vec<Vec<f64>>> {
    let bounds = &setup.chart.bounds;
    let spatial = SamplingGrid::new(count, margin, rng_seed).points(&bounds[1..]);
    let (lo, hi) = bounds[0];
    let m = margin * (hi - lo).min(1.0);
    let mut seeds = Vec::new();
    for xs in spatial {
        let eval = |t: f64| {
            let mut p = Vec::with_capacity(bounds.len());
            p.push(t);
            p.extend_from_slice(&xs);
            (scalar_value(&setup.u, &p), p)
        };
        let (ulo, _) = eval(lo + m);
        let (uhi, _) = eval(hi - m);
        if (ulo - u0) * (uhi - u0) > 0.0 {
            continue;
        }
        let (mut a, mut b) = (lo + m, hi - m);
        let rising = uhi > ulo;
        for _ in 0..80 {
            let mid = 0.5 * (a + b);
            let (um, _) = eval(mid);
            if (um > u0) == rising {
                b = mid;
            } else {
                a = mid;
            }
        }
        let (_, p) = eval(0.5 * (a + b));
        seeds.push(p);
    }
    if seeds.is_empty() {
        return Err(GeomError::LevelSetNotFound {
            chart: setup.chart.label.clone(),
            level: u0,
        });
    }
    Ok(seeds)
}

struct SeedTrack {
    /// states at the save grid: `(y, φ, ψ, χ)` packed
    states: Vec<Vec<f64>>,
}

impl PotentialSetup {
    /// `(|∇̃u|, λ, μ)` at a point, from one Hessian evaluation.
    fn flow_scalars(&self, p: &[f64]) -> Result<(f64, f64, f64)> {
        let d = self.chart.dim;
        let (grad, hess) = gradient_hessian(&self.chart, p, &self.u)?;
        let g = self.chart.metric_values(p)?;
        let ginv = self.chart.inverse_metric_values(p)?;
        let norm = (grad.transpose() * &g * &grad)[(0, 0)].max(0.0).sqrt();
        if norm < CRITICAL_TOLERANCE {
            return Err(GeomError::CriticalPoint {
                point: p.to_vec(),
                norm,
            });
        }
        let nu = &grad / norm;
        let lambda = (nu.transpose() * &hess * &nu)[(0, 0)];
        // tr_g H = 2λ + (2n−2)μ when the two-eigenvalue structure holds
        let trace = (&ginv * &hess).trace();
        let mu = (trace - 2.0 * lambda) / (d as f64 - 2.0);
        Ok((norm, lambda, mu))
    }

    fn track_seed(
        &self,
        seed: &[f64],
        s_grid: &[f64],
        u0: f64,
    ) -> Result<SeedTrack> {
        let d = self.chart.dim;
        let rhs = |_t: f64, y: &[f64]| -> Vec<f64> {
            let point = &y[..d];
            let jets = seed_point(point);
            let nu = (self.nu_field())(&jets);
            let (norm, lambda, mu) = self
                .flow_scalars(point)
                .unwrap_or((f64::NAN, f64::NAN, f64::NAN));
            let mut out: Vec<f64> = nu.into_iter().map(|j| j.val).collect();
            out.push(norm);
            out.push(lambda);
            out.push(2.0 * mu / norm);
            out
        };

        let (grad0, _, _) = self.flow_scalars(seed)?;
        let mut y0 = seed.to_vec();
        y0.push(u0); // φ(0) = u0
        y0.push(grad0); // ψ(0) = |∇̃u|(seed)
        y0.push(0.0); // χ(0) = 0

        // integrate segment-by-segment so every save point is an exact
        // integrator state rather than dense-output interpolation
        let mut states: Vec<Option<Vec<f64>>> = vec![None; s_grid.len()];
        let opts = Rk45Options::default();
        let mut run = |indices: Vec<usize>| -> Result<()> {
            let mut t = 0.0;
            let mut y = y0.clone();
            for i in indices {
                let target = s_grid[i];
                if target == t {
                    states[i] = Some(y.clone());
                    continue;
                }
                let mut end = y.clone();
                rk::integrate(&rhs, t, y.clone(), target, &opts, |step| {
                    end = step.y1.clone();
                    StepOutcome::Continue
                })?;
                t = target;
                y = end;
                states[i] = Some(y.clone());
            }
            Ok(())
        };
        let mut fwd: Vec<usize> = (0..s_grid.len()).filter(|&i| s_grid[i] >= 0.0).collect();
        fwd.sort_by(|&a, &b| s_grid[a].total_cmp(&s_grid[b]));
        let mut bwd: Vec<usize> = (0..s_grid.len()).filter(|&i| s_grid[i] < 0.0).collect();
        bwd.sort_by(|&a, &b| s_grid[b].total_cmp(&s_grid[a]));
        run(fwd)?;
        run(bwd)?;

        let states: Option<Vec<Vec<f64>>> = states.into_iter().collect();
        states
            .map(|states| SeedTrack { states })
            .ok_or_else(|| GeomError::InvalidConfig("flow did not cover the save grid".into()))
    }
}

/// Integrates the gradient flow from level-set seeds and verifies the product
/// splitting, the vertical scaling law, and the transverse conformal factor.
pub fn flow_reconstruct(
    setup: &PotentialSetup,
    cfg: &ReconstructionConfig,
) -> Result<ReconstructionReport> {
    let d = setup.chart.dim;
    let seeds = level_set_seeds(setup, cfg.u0, cfg.seeds, cfg.seed_margin, cfg.seed_rng)?;
    let s_grid: Vec<f64> = (0..cfg.save_points)
        .map(|i| cfg.s_min + (cfg.s_max - cfg.s_min) * i as f64 / (cfg.save_points - 1) as f64)
        .collect();

    let tracks: Vec<SeedTrack> = seeds
        .iter()
        .map(|seed| setup.track_seed(seed, &s_grid, cfg.u0))
        .collect::<Result<_>>()?;

    let mut rows = Vec::with_capacity(s_grid.len());
    let mut spread_max: f64 = 0.0;
    let mut fp_res_max: f64 = 0.0;
    let mut fs_res_max: f64 = 0.0;

    for (i, &s) in s_grid.iter().enumerate() {
        let mut fs = Vec::new();
        let mut fps = Vec::new();
        let mut lams = Vec::new();
        let mut mus = Vec::new();
        let mut fp_res: f64 = 0.0;
        let mut fs_res: f64 = 0.0;
        for track in &tracks {
            let state = &track.states[i];
            let point = &state[..d];
            let u = scalar_value(&setup.u, point);
            let (norm, lambda, mu) = setup.flow_scalars(point)?;
            fs.push(u);
            fps.push(norm);
            lams.push(lambda);
            mus.push(mu);
            fp_res = fp_res.max((u - state[d]).abs());
            fs_res = fs_res.max((norm - state[d + 1]).abs());
        }
        let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
        let spread = fs.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
            - fs.iter().cloned().fold(f64::INFINITY, f64::min);
        spread_max = spread_max.max(spread);
        fp_res_max = fp_res_max.max(fp_res);
        fs_res_max = fs_res_max.max(fs_res);
        rows.push(ReconstructionRow {
            s,
            f: mean(&fs),
            spread,
            f_prime: mean(&fps),
            lambda: mean(&lams),
            mu: mean(&mus),
            f_prime_residual: fp_res,
            f_second_residual: fs_res,
        });
    }

    // pushforward checks on a subset of seeds and save times
    let mut ortho_max: f64 = 0.0;
    let mut xi_max: f64 = 0.0;
    let mut metric_max: f64 = 0.0;
    let check_seeds = tracks.iter().take(3).zip(seeds.iter().take(3));
    for (track, seed) in check_seeds {
        let (frame_seed, _, grad0, _) = setup.frame_at(seed)?;
        let g_seed = setup.chart.metric_values(seed)?;
        // level-tangent basis at the seed: ξ and the transverse frame
        let tangent: Vec<DVector<f64>> = frame_seed[1..].to_vec();

        for (i, &s) in s_grid.iter().enumerate() {
            if s == 0.0 || i % 3 != 0 {
                continue;
            }
            let state = &track.states[i];
            let point = &state[..d];
            let g = setup.chart.metric_values(point)?;
            let (frame_t, _, grad_s, _) = setup.frame_at(point)?;
            let nu_t = &frame_t[0];

            let pushes: Vec<DVector<f64>> = tangent
                .iter()
                .map(|x| setup.pushforward(seed, x.as_slice(), s, cfg.pushforward_delta))
                .collect::<Result<_>>()?;

            // (d) the splitting: dF_s X stays tangent to the level set
            for push in &pushes {
                let len = (push.transpose() * &g * push)[(0, 0)].max(0.0).sqrt();
                let along_nu = (push.transpose() * &g * nu_t)[(0, 0)].abs();
                ortho_max = ortho_max.max(along_nu / len);
            }

            // (e) vertical scaling: |(F_s)_* ξ| = f'(s)/f'(0)
            let expected_ratio = grad_s / grad0;
            let xi_push = &pushes[0];
            let len = (xi_push.transpose() * &g * xi_push)[(0, 0)].max(0.0).sqrt();
            xi_max = xi_max.max((len - expected_ratio).abs() / expected_ratio);

            // (g) rebuilt metric vs the model pullback
            let chi = state[d + 2];
            let conformal = chi.exp();
            for (a, pa) in pushes.iter().enumerate() {
                for (b, pb) in pushes.iter().enumerate() {
                    let rebuilt = (pa.transpose() * &g * pb)[(0, 0)];
                    let ga = (tangent[a].transpose() * &g_seed * &tangent[b])[(0, 0)];
                    let model = if a == 0 && b == 0 {
                        expected_ratio * expected_ratio * ga
                    } else if a == 0 || b == 0 {
                        0.0
                    } else {
                        conformal * ga
                    };
                    metric_max =
                        metric_max.max((rebuilt - model).abs() / (1.0 + model.abs()));
                }
            }
        }
    }

    Ok(ReconstructionReport {
        rows,
        seed_count: seeds.len(),
        spread_max,
        f_prime_residual_max: fp_res_max,
        f_second_residual_max: fs_res_max,
        orthogonality_max: ortho_max,
        xi_scaling_max: xi_max,
        metric_residual_max: metric_max,
    })
}
