//! Doubly-warped products over a minimal Riemannian flow.
//!
//! Given a flow `(M^{2n−1}, ĝ, ξ̂)`, warping profiles `ρ, σ` of `t` and
//! `k` of `(t, x)`, the ambient metric on `I × M` is
//!
//! ```text
//! g̃ = dt² ⊕ ρ(t)² ( σ(t)² ĝ_ξ̂ ⊕ k(t,x)² ĝ_ξ̂⊥ ).
//! ```
//!
//! The adapted almost-complex structure maps `∂ت ↦ −ξ`, `ξ ↦ ∂t` for the
//! unit field `ξ = ξ̂/(ρσ)` and restricts to the transverse structure `J` on
//! `Q`. This module verifies the closed-form Levi-Civita identities of that
//! metric against the jet pipeline, measures the Kähler defect `max |∇̃J̃|`,
//! and evaluates the three pointwise Kähler conditions
//! (`ξ̂(k) = 0`; `ĥ = −(k/σ)·∂t(ρk)·J`; for `n > 2`, `grad^∇̂ k = 0`)
//! together with the factor `C` satisfying `∂t(ρk)² = 2ρσC`.

use std::sync::Arc;

use nalgebra::DVector;
use serde::Serialize;

use crate::chart::{
    matrix_apply, vector_values, Chart, CurveFn, MatrixField, ScalarField, VectorField,
};
use crate::error::{GeomError, Result};
use crate::flow::RiemannianFlow;
use crate::jet::{seed_point, Jet};
use crate::report::SamplingGrid;
use crate::tensor::covariant_derivative;

/// The `k` warping factor in product form `k(t, x) = k₁(t) · k₂(x)`.
///
/// `k1_d` is the derivative of `k₁` as an independent evaluator, kept so that
/// profile algebra (like folding `k₁` into `ρ`) stays exact to third order.
#[derive(Clone)]
pub struct KWarp {
    pub k1: CurveFn,
    pub k1_d: CurveFn,
    /// Spatial factor on the base manifold; `None` means `k₂ ≡ 1`.
    pub k2: Option<ScalarField>,
}

impl KWarp {
    pub fn one() -> Self {
        KWarp {
            k1: Arc::new(|t: &Jet| t.lift(1.0)),
            k1_d: Arc::new(|t: &Jet| t.lift(0.0)),
            k2: None,
        }
    }

    pub fn time_only(k1: CurveFn, k1_d: CurveFn) -> Self {
        KWarp { k1, k1_d, k2: None }
    }

    pub fn product(k1: CurveFn, k1_d: CurveFn, k2: ScalarField) -> Self {
        KWarp {
            k1,
            k1_d,
            k2: Some(k2),
        }
    }

    pub fn spatial(k2: ScalarField) -> Self {
        KWarp {
            k2: Some(k2),
            ..KWarp::one()
        }
    }
}

/// Warping profiles of a doubly-warped product.
///
/// `rho_d` is `ρ'` as an independent evaluator: second-order jets of `rho`
/// stop at `ρ''`, and the Ricci blocks need `ρ'''`.
#[derive(Clone)]
pub struct WarpProfile {
    pub label: String,
    /// Open interval of definition for `t`.
    pub interval: (f64, f64),
    pub rho: CurveFn,
    pub rho_d: CurveFn,
    pub sigma: CurveFn,
    pub k: KWarp,
}

/// Scalar values of `ρ` and its first three derivatives at `t`.
#[derive(Clone, Copy, Debug)]
pub struct RhoJet {
    pub rho: f64,
    pub d1: f64,
    pub d2: f64,
    pub d3: f64,
}

impl WarpProfile {
    pub fn contains(&self, t: f64) -> bool {
        t > self.interval.0 && t < self.interval.1
    }

    /// `ρ, ρ', ρ'', ρ'''` at `t` (the last two from the `rho_d` evaluator).
    pub fn rho_jet(&self, t: f64) -> RhoJet {
        let tj = Jet::var(t, 0, 1);
        let r = (self.rho)(&tj);
        let rd = (self.rho_d)(&tj);
        debug_assert!(
            (r.grad[0] - rd.val).abs() <= 1e-9 * (1.0 + rd.val.abs()),
            "rho_d disagrees with the derivative of rho at t = {t}"
        );
        RhoJet {
            rho: r.val,
            d1: rd.val,
            d2: rd.grad[0],
            d3: rd.hess_at(0, 0),
        }
    }

    /// `σ, σ', σ''` at `t`.
    pub fn sigma_jet(&self, t: f64) -> (f64, f64, f64) {
        let tj = Jet::var(t, 0, 1);
        let s = (self.sigma)(&tj);
        (s.val, s.grad[0], s.hess_at(0, 0))
    }

    /// `k₁, k₁'` at `t`.
    pub fn k1_jet(&self, t: f64) -> (f64, f64) {
        let tj = Jet::var(t, 0, 1);
        ((self.k.k1)(&tj).val, (self.k.k1_d)(&tj).val)
    }

    /// Largest deviation `|σ(t) − ρ'(t)|` over a grid; zero for profiles of
    /// Kähler type over a Sasaki base.
    pub fn sigma_matches_rho_d(&self, samples: usize) -> f64 {
        let grid = SamplingGrid::new(samples, 0.02, 1);
        grid.line(self.interval.0, self.interval.1, samples)
            .into_iter()
            .map(|t| {
                let r = self.rho_jet(t);
                (self.sigma_jet(t).0 - r.d1).abs()
            })
            .fold(0.0, f64::max)
    }

    /// Folds a `t`-only `k₁` into the profile: `ρ̄ = ρk₁`, `σ̄ = σ/k₁`,
    /// `k̄₁ = 1`, keeping any spatial factor. Leaves the metric unchanged.
    pub fn fold_time_warp(&self) -> WarpProfile {
        let rho = self.rho.clone();
        let rho_d = self.rho_d.clone();
        let sigma = self.sigma.clone();
        let k1 = self.k.k1.clone();
        let k1b = self.k.k1.clone();
        let k1c = self.k.k1.clone();
        let k1_d = self.k.k1_d.clone();
        let new_rho: CurveFn = Arc::new(move |t: &Jet| rho(t) * k1(t));
        let rho2 = self.rho.clone();
        let new_rho_d: CurveFn = Arc::new(move |t: &Jet| rho_d(t) * k1b(t) + rho2(t) * k1_d(t));
        let new_sigma: CurveFn = Arc::new(move |t: &Jet| sigma(t) / k1c(t));
        WarpProfile {
            label: format!("{}-folded", self.label),
            interval: self.interval,
            rho: new_rho,
            rho_d: new_rho_d,
            sigma: new_sigma,
            k: KWarp {
                k1: Arc::new(|t: &Jet| t.lift(1.0)),
                k1_d: Arc::new(|t: &Jet| t.lift(0.0)),
                k2: self.k.k2.clone(),
            },
        }
    }
}

/// Coefficients of `a + b·e^{ct} + d·t²`, the profile family used for
/// randomized testing.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct PolyExp {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl PolyExp {
    pub fn curve(self) -> CurveFn {
        Arc::new(move |t: &Jet| {
            t.lift(self.a) + (t * self.c).exp() * self.b + t * t * self.d
        })
    }

    pub fn curve_d(self) -> CurveFn {
        Arc::new(move |t: &Jet| (t * self.c).exp() * (self.b * self.c) + t * (2.0 * self.d))
    }

    pub fn eval(self, t: f64) -> f64 {
        self.a + self.b * (self.c * t).exp() + self.d * t * t
    }
}

/// Named profile presets.
pub mod presets {
    use super::*;

    /// `ρ = sinh t`, `σ = ρ' = cosh t`, `k = 1`. Kähler over Sasaki bases.
    pub fn sinh_cosh() -> WarpProfile {
        WarpProfile {
            label: "sinh-cosh".into(),
            interval: (0.05, 3.0),
            rho: Arc::new(|t: &Jet| t.sinh()),
            rho_d: Arc::new(|t: &Jet| t.cosh()),
            sigma: Arc::new(|t: &Jet| t.cosh()),
            k: KWarp::one(),
        }
    }

    /// `ρ = cosh t`, `σ = ρ' = sinh t`, `k = 1` (needs `t > 0`).
    pub fn cosh_sinh() -> WarpProfile {
        WarpProfile {
            label: "cosh-sinh".into(),
            interval: (0.05, 3.0),
            rho: Arc::new(|t: &Jet| t.cosh()),
            rho_d: Arc::new(|t: &Jet| t.sinh()),
            sigma: Arc::new(|t: &Jet| t.sinh()),
            k: KWarp::one(),
        }
    }

    /// `ρ = σ = e^t`, `k = 1`.
    pub fn exp() -> WarpProfile {
        WarpProfile {
            label: "exp".into(),
            interval: (-2.0, 2.0),
            rho: Arc::new(|t: &Jet| t.exp()),
            rho_d: Arc::new(|t: &Jet| t.exp()),
            sigma: Arc::new(|t: &Jet| t.exp()),
            k: KWarp::one(),
        }
    }

    /// `ρ = t + 2`, `σ = ρ' = 1`, `k = 1`.
    pub fn linear() -> WarpProfile {
        WarpProfile {
            label: "linear".into(),
            interval: (-1.5, 3.0),
            rho: Arc::new(|t: &Jet| t + 2.0),
            rho_d: Arc::new(|t: &Jet| t.lift(1.0)),
            sigma: Arc::new(|t: &Jet| t.lift(1.0)),
            k: KWarp::one(),
        }
    }

    /// Fully custom profile in the `a + b·e^{ct} + d·t²` family.
    /// `sigma = None` ties `σ = ρ'`.
    pub fn poly_exp(
        rho: PolyExp,
        sigma: Option<PolyExp>,
        k1: Option<PolyExp>,
        interval: (f64, f64),
    ) -> WarpProfile {
        let (sig, label) = match sigma {
            Some(s) => (s.curve(), "custom-poly-exp".to_string()),
            None => (rho.curve_d(), "custom-poly-exp-kaehler".to_string()),
        };
        let k = match k1 {
            Some(k1) => KWarp::time_only(k1.curve(), k1.curve_d()),
            None => KWarp::one(),
        };
        WarpProfile {
            label,
            interval,
            rho: rho.curve(),
            rho_d: rho.curve_d(),
            sigma: sig,
            k,
        }
    }

    pub fn by_name(name: &str) -> Result<WarpProfile> {
        match name {
            "sinh-cosh" => Ok(sinh_cosh()),
            "cosh-sinh" => Ok(cosh_sinh()),
            "exp" => Ok(exp()),
            "linear" => Ok(linear()),
            other => Err(GeomError::UnknownProfile(other.to_string())),
        }
    }

    pub const PRESET_NAMES: [&str; 4] = ["sinh-cosh", "cosh-sinh", "exp", "linear"];
}

/// The assembled product `(I × M, g̃)` with its warped chart.
#[derive(Clone)]
pub struct DoublyWarpedProduct {
    pub base: RiemannianFlow,
    pub profile: WarpProfile,
    pub chart: Chart,
    /// Complex dimension; the ambient real dimension is `2n`.
    pub n: usize,
}

/// Residual of one verified connection identity.
#[derive(Clone, Debug, Serialize)]
pub struct IdentityResidual {
    pub name: &'static str,
    pub residual: f64,
}

/// Report of the pointwise Kähler conditions over a sampling grid.
#[derive(Clone, Debug, Serialize)]
pub struct KaehlerConditionsReport {
    /// max `|ξ̂(k₂)| / (1 + |∇k₂|)` over base samples.
    pub reeb_derivative_of_k: f64,
    /// max over the grid of `‖ĥ + C·J‖` with `C = (k/σ)·∂t(ρk)`.
    pub oneill_alignment: f64,
    /// max `|grad^∇̂ k₂|`; must vanish for `n > 2`.
    pub transverse_gradient_of_k: f64,
    pub c_min: f64,
    pub c_max: f64,
    /// Spread of `C` over `t` at fixed `x` (zero when the alignment holds).
    pub c_time_drift: f64,
    /// Spread of `C` over `x`; must vanish for `n > 2`.
    pub c_space_drift: f64,
    pub n: usize,
    pub passes: bool,
    pub sample_count: usize,
}

impl DoublyWarpedProduct {
    /// Assembles the warped metric. `base` must have dimension `2n − 1` and
    /// the profile must be positive on its interval (sampled).
    pub fn build(base: RiemannianFlow, profile: WarpProfile, n: usize) -> Result<Self> {
        if base.dim() != 2 * n - 1 {
            return Err(GeomError::DimensionMismatch {
                expected: 2 * n - 1,
                got: base.dim(),
            });
        }
        // positivity of the profile, sampled
        let grid = SamplingGrid::new(24, 0.01, 3);
        for t in grid.line(profile.interval.0, profile.interval.1, 24) {
            let r = profile.rho_jet(t);
            let (s, _, _) = profile.sigma_jet(t);
            let (k1, _) = profile.k1_jet(t);
            for (name, v) in [("rho", r.rho), ("sigma", s), ("k1", k1)] {
                if v <= 0.0 {
                    return Err(GeomError::NonPositiveProfile {
                        name: name.into(),
                        t,
                        value: v,
                    });
                }
            }
        }
        if let Some(k2) = &profile.k.k2 {
            for p in grid.points(&base.chart.bounds) {
                let v = crate::chart::scalar_value(k2, &p);
                if v <= 0.0 {
                    return Err(GeomError::NonPositiveProfile {
                        name: "k2".into(),
                        t: f64::NAN,
                        value: v,
                    });
                }
            }
        }

        let mut bounds = vec![profile.interval];
        bounds.extend_from_slice(&base.chart.bounds);

        let base_metric = base.chart.metric.clone();
        let base_reeb = base.reeb.clone();
        let rho = profile.rho.clone();
        let sigma = profile.sigma.clone();
        let k1 = profile.k.k1.clone();
        let k2 = profile.k.k2.clone();
        let d = 2 * n;
        let metric: MatrixField = Arc::new(move |x: &[Jet]| {
            let t = &x[0];
            let xb = &x[1..];
            let g = base_metric(xb);
            let xi = base_reeb(xb);
            let m = d - 1;
            let rs = rho(t) * sigma(t);
            let rk = match &k2 {
                Some(k2) => rho(t) * k1(t) * k2(xb),
                None => rho(t) * k1(t),
            };
            let rs2 = &rs * &rs;
            let rk2 = &rk * &rk;
            // ξ̂♭ in the base metric
            let flat: Vec<Jet> = (0..m)
                .map(|i| {
                    let mut acc = t.lift(0.0);
                    for j in 0..m {
                        acc = acc + &g[i * m + j] * &xi[j];
                    }
                    acc
                })
                .collect();
            let mut out = vec![t.lift(0.0); d * d];
            out[0] = t.lift(1.0);
            for i in 0..m {
                for j in 0..m {
                    let vertical = &flat[i] * &flat[j];
                    let transverse = &g[i * m + j] - &vertical;
                    out[(i + 1) * d + (j + 1)] = &rs2 * &vertical + &rk2 * &transverse;
                }
            }
            out
        });

        let chart = Chart::new(
            format!("dwp({}, {})", base.chart.label, profile.label),
            bounds,
            metric,
        );
        Ok(DoublyWarpedProduct {
            base,
            profile,
            chart,
            n,
        })
    }

    pub fn dim(&self) -> usize {
        2 * self.n
    }

    /// `∂t` as an ambient field.
    pub fn dt_field(&self) -> VectorField {
        crate::chart::coordinate_vector(0, self.dim())
    }

    /// Lifts a base vector field to the product, `t`-independently.
    pub fn lift(&self, v: VectorField) -> VectorField {
        let d = self.dim();
        Arc::new(move |x: &[Jet]| {
            let mut out = Vec::with_capacity(d);
            out.push(x[0].lift(0.0));
            out.extend(v(&x[1..]));
            out
        })
    }

    /// The unit vertical field `ξ = ξ̂ / (ρσ)`.
    pub fn xi_field(&self) -> VectorField {
        let d = self.dim();
        let reeb = self.base.reeb.clone();
        let rho = self.profile.rho.clone();
        let sigma = self.profile.sigma.clone();
        Arc::new(move |x: &[Jet]| {
            let rs = rho(&x[0]) * sigma(&x[0]);
            let xi = reeb(&x[1..]);
            let mut out = Vec::with_capacity(d);
            out.push(x[0].lift(0.0));
            out.extend(xi.into_iter().map(|c| c / &rs));
            out
        })
    }

    /// The adapted almost-complex structure `J̃` as an ambient matrix field:
    /// `J̃∂t = −ξ`, `J̃ξ = ∂t`, `J̃|_Q = J`.
    pub fn ambient_j(&self) -> MatrixField {
        let d = self.dim();
        let base_metric = self.base.chart.metric.clone();
        let base_reeb = self.base.reeb.clone();
        let base_j = self.base.transverse_j.clone();
        let rho = self.profile.rho.clone();
        let sigma = self.profile.sigma.clone();
        Arc::new(move |x: &[Jet]| {
            let t = &x[0];
            let xb = &x[1..];
            let m = d - 1;
            let g = base_metric(xb);
            let xi = base_reeb(xb);
            let j = base_j(xb);
            let rs = rho(t) * sigma(t);
            let flat: Vec<Jet> = (0..m)
                .map(|i| {
                    let mut acc = t.lift(0.0);
                    for jj in 0..m {
                        acc = acc + &g[i * m + jj] * &xi[jj];
                    }
                    acc
                })
                .collect();
            let mut out = vec![t.lift(0.0); d * d];
            // column 0: J̃(∂t) = −ξ̂/(ρσ)
            for r in 0..m {
                out[(r + 1) * d] = -&xi[r] / &rs;
            }
            // spatial columns: J̃(e_c) = ĝ(e_c, ξ̂)·ρσ·∂t + J(e_c)
            for c in 0..m {
                out[c + 1] = &flat[c] * &rs;
                for r in 0..m {
                    out[(r + 1) * d + (c + 1)] = j[r * m + c].clone();
                }
            }
            out
        })
    }

    /// Orthonormal base frame of `Q` lifted to the product (not normalized in
    /// the ambient metric; their `g̃`-length is `ρk`).
    pub fn q_lifts(&self) -> Result<Vec<VectorField>> {
        Ok(self
            .base
            .transverse_frame()?
            .into_iter()
            .map(|e| self.lift(e))
            .collect())
    }

    /// Verifies the nine closed-form Levi-Civita identities of the warped
    /// metric at `p = (t, x)`, returning the max scaled residual of each.
    pub fn verify_connection_identities(&self, p: &[f64]) -> Result<Vec<IdentityResidual>> {
        self.chart.check_point(p, 0.0)?;
        let d = self.dim();
        let m = d - 1;
        let t = p[0];
        let xb = &p[1..];

        let r = self.profile.rho_jet(t);
        let (sv, sd, _) = self.profile.sigma_jet(t);
        let (k1v, k1d) = self.profile.k1_jet(t);
        let (k2v, xi_k2, _k2_grad) = match &self.profile.k.k2 {
            Some(k2) => {
                let jets = seed_point(xb);
                let kj = k2(&jets);
                let xi = (self.base.reeb)(&jets);
                let mut xf = 0.0;
                for i in 0..m {
                    xf += xi[i].val * kj.grad[i];
                }
                (kj.val, xf, kj.grad.clone())
            }
            None => (1.0, 0.0, vec![0.0; m]),
        };

        let rs = r.rho * sv;
        let rs_d = r.d1 * sv + r.rho * sd;
        let kv = k1v * k2v;
        let rk = r.rho * kv;
        let dt_rk = (r.d1 * k1v + r.rho * k1d) * k2v;
        // ξ(k)/k with ξ = ξ̂/(ρσ)
        let xi_ln_k = xi_k2 / (rs * k2v);
        let sigma_over_rho_k2 = sv / (r.rho * kv * kv);

        let dt = self.dt_field();
        let xi = self.xi_field();
        let frame = self.base.transverse_frame()?;
        let lifts: Vec<VectorField> = frame.iter().map(|e| self.lift(e.clone())).collect();

        let g_amb = self.chart.metric_values(p)?;
        let norm = |v: &DVector<f64>| (v.transpose() * &g_amb * v)[(0, 0)].max(0.0).sqrt();
        let scaled = |lhs: &DVector<f64>, rhs: &DVector<f64>| {
            let diff = lhs - rhs;
            norm(&diff) / (1.0 + norm(lhs).max(norm(rhs)))
        };

        let lift_vec = |v: &DVector<f64>| {
            let mut out = DVector::zeros(d);
            for i in 0..m {
                out[i + 1] = v[i];
            }
            out
        };

        let dt_vec = {
            let mut v = DVector::zeros(d);
            v[0] = 1.0;
            v
        };
        let xi_vec = vector_values(&xi, p);

        let mut residuals = Vec::new();

        // ∇̃_∂t ∂t = 0
        let lhs = covariant_derivative(&self.chart, p, &dt, &dt)?;
        residuals.push(IdentityResidual {
            name: "cov_dt_dt",
            residual: scaled(&lhs, &DVector::zeros(d)),
        });

        // ∇̃_∂t ξ = 0
        let lhs = covariant_derivative(&self.chart, p, &dt, &xi)?;
        residuals.push(IdentityResidual {
            name: "cov_dt_xi",
            residual: scaled(&lhs, &DVector::zeros(d)),
        });

        // ∇̃_ξ ∂t = ((ρσ)'/ρσ) ξ
        let lhs = covariant_derivative(&self.chart, p, &xi, &dt)?;
        let rhs = &xi_vec * (rs_d / rs);
        residuals.push(IdentityResidual {
            name: "cov_xi_dt",
            residual: scaled(&lhs, &rhs),
        });

        // ∇̃_ξ ξ = −((ρσ)'/ρσ) ∂t
        let lhs = covariant_derivative(&self.chart, p, &xi, &xi)?;
        let rhs = &dt_vec * (-rs_d / rs);
        residuals.push(IdentityResidual {
            name: "cov_xi_xi",
            residual: scaled(&lhs, &rhs),
        });

        // per-Z identities; report the max over the frame
        let mut r_dt_z: f64 = 0.0;
        let mut r_z_dt: f64 = 0.0;
        let mut r_xi_z: f64 = 0.0;
        let mut r_z_xi: f64 = 0.0;
        let mut r_z_z: f64 = 0.0;

        for (a, za) in lifts.iter().enumerate() {
            let za_vec = vector_values(za, p);
            // base-level pieces for E_a
            let ea = &frame[a];
            let hz = {
                let de = covariant_derivative(&self.base.chart, xb, ea, &self.base.reeb)?;
                // project to Q
                let gb = self.base.chart.metric_values(xb)?;
                let xiv = vector_values(&self.base.reeb, xb);
                let c = (de.transpose() * &gb * &xiv)[(0, 0)];
                de - xiv * c
            };
            let hz_l = lift_vec(&hz);
            let nabla_hat_xi_z = {
                let v = self.base.transverse_connection(xb, &self.base.reeb, ea)?;
                lift_vec(&v)
            };

            // ∇̃_∂t Z = (∂t(ρk)/ρk) Z
            let lhs = covariant_derivative(&self.chart, p, &dt, za)?;
            let rhs = &za_vec * (dt_rk / rk);
            r_dt_z = r_dt_z.max(scaled(&lhs, &rhs));

            // ∇̃_Z ∂t = (∂t(ρk)/ρk) Z
            let lhs = covariant_derivative(&self.chart, p, za, &dt)?;
            r_z_dt = r_z_dt.max(scaled(&lhs, &rhs));

            // ∇̃_ξ Z = ∇̂_ξ Z + (ξ(k)/k) Z + (σ/ρk²) ĥZ
            let lhs = covariant_derivative(&self.chart, p, &xi, za)?;
            let rhs = &nabla_hat_xi_z / rs + &za_vec * xi_ln_k + &hz_l * sigma_over_rho_k2;
            r_xi_z = r_xi_z.max(scaled(&lhs, &rhs));

            // ∇̃_Z ξ = (ξ(k)/k) Z + (σ/ρk²) ĥZ
            let lhs = covariant_derivative(&self.chart, p, za, &xi)?;
            let rhs = &za_vec * xi_ln_k + &hz_l * sigma_over_rho_k2;
            r_z_xi = r_z_xi.max(scaled(&lhs, &rhs));

            // ∇̃_Z Z' over all frame partners
            for (b, zb) in lifts.iter().enumerate() {
                let eb = &frame[b];
                let zb_vec = vector_values(zb, p);
                let lhs = covariant_derivative(&self.chart, p, za, zb)?;

                let nabla_hat = lift_vec(&self.base.transverse_connection(xb, ea, eb)?);
                let (z_lnk, zp_lnk, grad_lnk) = match &self.profile.k.k2 {
                    Some(k2) => {
                        let jets = seed_point(xb);
                        let kj = k2(&jets);
                        let eav = vector_values(ea, xb);
                        let ebv = vector_values(eb, xb);
                        let za_k: f64 = (0..m).map(|i| eav[i] * kj.grad[i]).sum();
                        let zb_k: f64 = (0..m).map(|i| ebv[i] * kj.grad[i]).sum();
                        let ln_k2: ScalarField = {
                            let k2 = k2.clone();
                            Arc::new(move |x: &[Jet]| k2(x).ln())
                        };
                        let gl = self.base.transverse_gradient(xb, &ln_k2)?;
                        (za_k / k2v, zb_k / k2v, lift_vec(&gl))
                    }
                    None => (0.0, 0.0, DVector::zeros(d)),
                };
                let g_zz = (za_vec.transpose() * &g_amb * &zb_vec)[(0, 0)];
                let g_hz_z = (hz_l.transpose() * &g_amb * &zb_vec)[(0, 0)];
                // The gradient term pairs the base inner product with the
                // base-metric transverse gradient (equivalently, g̃ with the
                // warped gradient: the two differ by ρ²k²).
                let gb_zz = g_zz / (rk * rk);

                let rhs = nabla_hat
                    + &zb_vec * z_lnk
                    + &za_vec * zp_lnk
                    - &grad_lnk * gb_zz
                    - &xi_vec * (xi_ln_k * g_zz)
                    - &xi_vec * (sigma_over_rho_k2 * g_hz_z)
                    - &dt_vec * (dt_rk / rk * g_zz);
                r_z_z = r_z_z.max(scaled(&lhs, &rhs));
            }
        }

        residuals.push(IdentityResidual {
            name: "cov_dt_z",
            residual: r_dt_z,
        });
        residuals.push(IdentityResidual {
            name: "cov_xi_z",
            residual: r_xi_z,
        });
        residuals.push(IdentityResidual {
            name: "cov_z_dt",
            residual: r_z_dt,
        });
        residuals.push(IdentityResidual {
            name: "cov_z_xi",
            residual: r_z_xi,
        });
        residuals.push(IdentityResidual {
            name: "cov_z_zprime",
            residual: r_z_z,
        });
        Ok(residuals)
    }

    /// Pointwise Kähler defect: max over an adapted frame of the scaled norm
    /// of `(∇̃_X J̃) Y`.
    pub fn kaehler_defect(&self, p: &[f64]) -> Result<f64> {
        let d = self.dim();
        let jt = self.ambient_j();
        let g = self.chart.metric_values(p)?;
        let norm = |v: &DVector<f64>| (v.transpose() * &g * v)[(0, 0)].max(0.0).sqrt();

        let mut fields: Vec<VectorField> = vec![self.dt_field(), self.xi_field()];
        fields.extend(self.q_lifts()?);

        let j_vals = {
            let jets = crate::jet::seed_values(p);
            jt(&jets).iter().map(|j| j.val).collect::<Vec<f64>>()
        };
        let apply_j = |v: &DVector<f64>| {
            let mut out = DVector::zeros(d);
            for i in 0..d {
                for jj in 0..d {
                    out[i] += j_vals[i * d + jj] * v[jj];
                }
            }
            out
        };

        let mut defect: f64 = 0.0;
        for x in &fields {
            let x_norm = norm(&vector_values(x, p)).max(1e-300);
            for y in &fields {
                let y_norm = norm(&vector_values(y, p)).max(1e-300);
                let jy = matrix_apply(jt.clone(), y.clone());
                let lhs = covariant_derivative(&self.chart, p, x, &jy)?;
                let rhs = apply_j(&covariant_derivative(&self.chart, p, x, y)?);
                defect = defect.max(norm(&(lhs - rhs)) / (x_norm * y_norm));
            }
        }
        Ok(defect)
    }

    /// Evaluates the three pointwise Kähler conditions over a grid of
    /// `t_samples × x_samples` points.
    pub fn kaehler_conditions(
        &self,
        grid: &SamplingGrid,
        t_samples: usize,
        x_samples: usize,
        tolerance: f64,
    ) -> Result<KaehlerConditionsReport> {
        let ts = grid.line(self.profile.interval.0, self.profile.interval.1, t_samples);
        let xs = SamplingGrid::new(x_samples, grid.margin, grid.seed)
            .points(&self.base.chart.bounds);
        let frame = self.base.transverse_frame()?;

        let mut cond1: f64 = 0.0;
        let mut cond3: f64 = 0.0;
        let mut alignment: f64 = 0.0;
        let mut c_min = f64::INFINITY;
        let mut c_max = f64::NEG_INFINITY;
        let mut c_time_drift: f64 = 0.0;
        let mut c_space_drift: f64 = 0.0;
        let mut c_ref_range: (f64, f64) = (f64::INFINITY, f64::NEG_INFINITY);

        for x in &xs {
            let (k2v, _) = match &self.profile.k.k2 {
                Some(k2) => {
                    cond1 = cond1.max(self.base.basic_residual(x, k2)?);
                    let tg = self.base.transverse_gradient(x, k2)?;
                    let gb = self.base.chart.metric_values(x)?;
                    let tg_norm = (tg.transpose() * &gb * &tg)[(0, 0)].max(0.0).sqrt();
                    cond3 = cond3.max(tg_norm);
                    (crate::chart::scalar_value(k2, x), tg_norm)
                }
                None => (1.0, 0.0),
            };

            let h = self.base.oneill_in_frame(x, &frame)?;
            let j = self.base.j_in_frame(x, &frame)?;
            let mut c_here: (f64, f64) = (f64::INFINITY, f64::NEG_INFINITY);
            for &t in &ts {
                let r = self.profile.rho_jet(t);
                let (sv, _, _) = self.profile.sigma_jet(t);
                let (k1v, k1d) = self.profile.k1_jet(t);
                let kv = k1v * k2v;
                let dt_rk = (r.d1 * k1v + r.rho * k1d) * k2v;
                let c = kv / sv * dt_rk;
                c_min = c_min.min(c);
                c_max = c_max.max(c);
                c_here = (c_here.0.min(c), c_here.1.max(c));
                let dev = (&h.matrix + &j.matrix * c).abs().max();
                alignment = alignment.max(dev);
            }
            c_time_drift = c_time_drift.max(c_here.1 - c_here.0);
            c_ref_range = (c_ref_range.0.min(c_here.0), c_ref_range.1.max(c_here.1));
        }
        c_space_drift = c_space_drift.max(c_ref_range.1 - c_ref_range.0 - c_time_drift).max(0.0);

        let passes = cond1 < tolerance
            && alignment < tolerance
            && (self.n == 2 || cond3 < tolerance);
        Ok(KaehlerConditionsReport {
            reeb_derivative_of_k: cond1,
            oneill_alignment: alignment,
            transverse_gradient_of_k: cond3,
            c_min,
            c_max,
            c_time_drift,
            c_space_drift,
            n: self.n,
            passes,
            sample_count: ts.len() * xs.len(),
        })
    }
}
