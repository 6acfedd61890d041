//! Einstein analysis of Kähler doubly-warped products (`σ = ρ'`, `k = 1`).
//!
//! For these metrics the ambient Ricci tensor decomposes into a vertical
//! block on `span{∂t, ξ}` with eigenvalue `−(2n+1)ρ''/ρ − ρ'''/ρ'` and a
//! transverse block `(1/ρ²)·Ric^∇̂ − 2(ρρ'' + n(ρ')²)/ρ² · Id`, with all
//! mixed components zero. The metric is Einstein with constant `C` iff
//!
//! ```text
//! ρρ''' = −(2n+1)ρ'ρ'' − Cρρ'          (eq1 = 0)
//! Ric^∇̂ = (2(ρρ'' + n(ρ')²) + Cρ²)·Id  (eq2 = 0)
//! ```
//!
//! and the factor `2(ρρ'' + n(ρ')²) + Cρ² = 2c` is then constant: its
//! `t`-derivative equals `2·eq1` identically, which ties the conserved
//! quantity to the third-order equation. `c` is the transverse Einstein
//! constant of the base (`Ric^∇̂ = 2c·Id`), equal to `Scal^Q / (4(n−1))`.
//!
//! The normalization `C = 2(n+1)ε` with `ε ∈ {−1, 0, 1}` (the sign of the
//! ambient scalar curvature `2nC`) is what the ODE module uses.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::chart::vector_values;
use crate::dwp::DoublyWarpedProduct;
use crate::error::{GeomError, Result};
use crate::tensor::riemann_ricci;

/// `C = 2(n+1)ε`.
pub fn einstein_constant(n: usize, eps: i8) -> f64 {
    2.0 * (n as f64 + 1.0) * f64::from(eps)
}

/// Ambient Ricci decomposition at a point, numeric vs closed form.
#[derive(Clone, Debug, Serialize)]
pub struct RicciBlocks {
    pub n: usize,
    /// `Ric̃(∂t, ∂t)` from the jet pipeline.
    pub vertical_numeric: f64,
    /// `−(2n+1)ρ''/ρ − ρ'''/ρ'`.
    pub vertical_closed: f64,
    /// `|Ric̃(∂t,∂t) − Ric̃(ξ,ξ)|`.
    pub j_invariance_residual: f64,
    /// max over `|Ric̃(∂t,ξ)|`, `|Ric̃(Z,∂t)|`, `|Ric̃(Z,ξ)|`.
    pub mixed_max: f64,
    /// Transverse block on the orthonormal frame `Z_a = E_a/ρ`.
    pub transverse_numeric: Vec<Vec<f64>>,
    /// `(1/ρ²)·Ric^∇̂ − 2(ρρ'' + n(ρ')²)/ρ² · Id` on the same frame.
    pub transverse_closed: Vec<Vec<f64>>,
    /// max-entry deviation between the two transverse blocks.
    pub transverse_residual: f64,
    /// relative deviation of the vertical block from its closed form.
    pub vertical_residual: f64,
    pub warnings: Vec<String>,
}

/// Residuals of the Einstein system at a point.
#[derive(Clone, Debug, Serialize)]
pub struct EinsteinResidual {
    /// `ρρ''' + (2n+1)ρ'ρ'' + Cρρ'`.
    pub eq1: f64,
    /// operator norm of `Ric^∇̂ − (2(ρρ'' + n(ρ')²) + Cρ²)·Id` on `Q`.
    pub eq2: f64,
}

/// The conserved quantity `c(t) = ½(2(ρρ'' + n(ρ')²) + Cρ²)` on a grid.
#[derive(Clone, Debug, Serialize)]
pub struct ConservedReport {
    pub values: Vec<(f64, f64)>,
    /// `max − min` over the grid; tiny for Einstein solutions.
    pub drift: f64,
    /// Transverse Einstein constant of the base from `Ric^∇̂ = 2c·Id`.
    pub base_c: f64,
    /// max-entry deviation of `Ric^∇̂` from `2·base_c·Id`.
    pub base_eta_einstein_residual: f64,
}

fn require_kaehler_profile(dwp: &DoublyWarpedProduct) -> Result<()> {
    let dev = dwp.profile.sigma_matches_rho_d(16);
    if dev > 1e-9 {
        return Err(GeomError::InvalidConfig(format!(
            "Ricci block formulas need σ = ρ' (deviation {dev:.3e}) — use a Kähler-type profile"
        )));
    }
    if dwp.profile.k.k2.is_some() {
        return Err(GeomError::InvalidConfig(
            "Ricci block formulas need k = 1 (spatial factor present)".into(),
        ));
    }
    let (lo, hi) = dwp.profile.interval;
    for i in 0..8 {
        let t = lo + (hi - lo) * (0.5 + i as f64) / 8.0;
        let (k1, _) = dwp.profile.k1_jet(t);
        if (k1 - 1.0).abs() > 1e-12 {
            return Err(GeomError::InvalidConfig(format!(
                "Ricci block formulas need k = 1, found k₁({t}) = {k1}"
            )));
        }
    }
    Ok(())
}

/// `c(t) = ½(2(ρρ'' + n(ρ')²) + Cρ²)`.
pub fn conserved_value(dwp: &DoublyWarpedProduct, big_c: f64, t: f64) -> f64 {
    let r = dwp.profile.rho_jet(t);
    let n = dwp.n as f64;
    0.5 * (2.0 * (r.rho * r.d2 + n * r.d1 * r.d1) + big_c * r.rho * r.rho)
}

/// `eq1 = ρρ''' + (2n+1)ρ'ρ'' + Cρρ'` at `t`.
pub fn third_order_residual(dwp: &DoublyWarpedProduct, big_c: f64, t: f64) -> f64 {
    let r = dwp.profile.rho_jet(t);
    let n = dwp.n as f64;
    r.rho * r.d3 + (2.0 * n + 1.0) * r.d1 * r.d2 + big_c * r.rho * r.d1
}

/// Numeric ambient Ricci decomposed on the adapted frame, compared against
/// the closed-form blocks.
pub fn ricci_blocks(dwp: &DoublyWarpedProduct, p: &[f64]) -> Result<RicciBlocks> {
    require_kaehler_profile(dwp)?;
    let d = dwp.dim();
    let m = d - 1;
    let rank = m - 1;
    let n = dwp.n;
    let t = p[0];
    let xb = &p[1..];

    let mut warnings = Vec::new();
    let sas = dwp.base.is_sasaki(&[xb.to_vec()], 1e-8)?;
    if !sas.is_sasaki {
        warnings.push(format!(
            "base is not Sasaki at this point (‖ĥ + J‖ = {:.3e}); the closed forms assume ĥ = −J",
            sas.sasaki_residual
        ));
    }

    let cur = riemann_ricci(&dwp.chart, p)?;
    let ric = cur.ricci02_matrix();

    let r = dwp.profile.rho_jet(t);
    let vertical_closed = -(2.0 * n as f64 + 1.0) * r.d2 / r.rho - r.d3 / r.d1;

    // adapted orthonormal frame
    let mut dt_vec = DVector::zeros(d);
    dt_vec[0] = 1.0;
    let xi_vec = vector_values(&dwp.xi_field(), p);
    let frame = dwp.base.transverse_frame()?;
    let z_vecs: Vec<DVector<f64>> = frame
        .iter()
        .map(|e| {
            let v = vector_values(e, xb);
            let mut out = DVector::zeros(d);
            for i in 0..m {
                out[i + 1] = v[i] / r.rho;
            }
            out
        })
        .collect();

    let pair = |u: &DVector<f64>, v: &DVector<f64>| (u.transpose() * &ric * v)[(0, 0)];

    let vertical_numeric = pair(&dt_vec, &dt_vec);
    let j_invariance_residual = (vertical_numeric - pair(&xi_vec, &xi_vec)).abs();
    let mut mixed_max = pair(&dt_vec, &xi_vec).abs();
    for z in &z_vecs {
        mixed_max = mixed_max.max(pair(z, &dt_vec).abs());
        mixed_max = mixed_max.max(pair(z, &xi_vec).abs());
    }

    let mut transverse_numeric = vec![vec![0.0; rank]; rank];
    for (a, za) in z_vecs.iter().enumerate() {
        for (b, zb) in z_vecs.iter().enumerate() {
            transverse_numeric[a][b] = pair(za, zb);
        }
    }

    let (base_ric, _) = dwp.base.transverse_ricci(xb)?;
    let warp_term = 2.0 * (r.rho * r.d2 + n as f64 * r.d1 * r.d1) / (r.rho * r.rho);
    let mut transverse_closed = vec![vec![0.0; rank]; rank];
    let mut transverse_residual: f64 = 0.0;
    for a in 0..rank {
        for b in 0..rank {
            let v = base_ric[(a, b)] / (r.rho * r.rho) - if a == b { warp_term } else { 0.0 };
            transverse_closed[a][b] = v;
            transverse_residual = transverse_residual.max((v - transverse_numeric[a][b]).abs());
        }
    }

    let vertical_residual =
        (vertical_numeric - vertical_closed).abs() / (1.0 + vertical_closed.abs());

    Ok(RicciBlocks {
        n,
        vertical_numeric,
        vertical_closed,
        j_invariance_residual,
        mixed_max,
        transverse_numeric,
        transverse_closed,
        transverse_residual,
        vertical_residual,
        warnings,
    })
}

/// Residuals of the Einstein system with constant `C` at `p`.
pub fn einstein_residual(
    dwp: &DoublyWarpedProduct,
    big_c: f64,
    p: &[f64],
) -> Result<EinsteinResidual> {
    require_kaehler_profile(dwp)?;
    let t = p[0];
    let xb = &p[1..];
    let eq1 = third_order_residual(dwp, big_c, t);

    let (base_ric, _) = dwp.base.transverse_ricci(xb)?;
    let rank = base_ric.nrows();
    let target = 2.0 * conserved_value(dwp, big_c, t);
    let dev = &base_ric - DMatrix::identity(rank, rank) * target;
    // operator norm of the symmetric deviation
    let sym = (&dev + dev.transpose()) * 0.5;
    let eq2 = sym
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .fold(0.0f64, |mx, &e| mx.max(e.abs()));
    Ok(EinsteinResidual { eq1, eq2 })
}

/// Evaluates the conserved quantity on a `t`-grid and compares it with the
/// base's transverse Einstein constant.
pub fn conserved_c(
    dwp: &DoublyWarpedProduct,
    big_c: f64,
    ts: &[f64],
    base_point: &[f64],
) -> Result<ConservedReport> {
    require_kaehler_profile(dwp)?;
    if ts.is_empty() {
        return Err(GeomError::EmptyInput("t grid".into()));
    }
    let values: Vec<(f64, f64)> = ts
        .iter()
        .map(|&t| (t, conserved_value(dwp, big_c, t)))
        .collect();
    let max = values.iter().map(|&(_, c)| c).fold(f64::NEG_INFINITY, f64::max);
    let min = values.iter().map(|&(_, c)| c).fold(f64::INFINITY, f64::min);

    let (base_ric, _) = dwp.base.transverse_ricci(base_point)?;
    let rank = base_ric.nrows();
    let base_c = base_ric.trace() / (2.0 * rank as f64);
    let residual = (&base_ric - DMatrix::identity(rank, rank) * (2.0 * base_c))
        .abs()
        .max();

    Ok(ConservedReport {
        values,
        drift: max - min,
        base_c,
        base_eta_einstein_residual: residual,
    })
}

/// One row per `t`: `(t, eq1, eq2, c(t))`, for the CSV scan.
pub fn einstein_scan(
    dwp: &DoublyWarpedProduct,
    big_c: f64,
    ts: &[f64],
    base_point: &[f64],
) -> Result<Vec<Vec<f64>>> {
    require_kaehler_profile(dwp)?;
    let (base_ric, _) = dwp.base.transverse_ricci(base_point)?;
    let rank = base_ric.nrows();
    let mut rows = Vec::with_capacity(ts.len());
    for &t in ts {
        let eq1 = third_order_residual(dwp, big_c, t);
        let target = 2.0 * conserved_value(dwp, big_c, t);
        let eq2 = (&base_ric - DMatrix::identity(rank, rank) * target).abs().max();
        rows.push(vec![t, eq1, eq2, conserved_value(dwp, big_c, t)]);
    }
    Ok(rows)
}
