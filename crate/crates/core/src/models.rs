//! Model Riemannian flows.
//!
//! Each model ships a chart, a unit Killing Reeb field and a transverse
//! complex structure with the orientation fixed so that the Sasaki models
//! satisfy `ĥ = −J` (flip `sign` in the constructors to get the opposite
//! orientation).
//!
//! * `hopf-s3` — round `S³` in Hopf coordinates `(θ, φ₁, φ₂)`, metric
//!   `dθ² + cos²θ dφ₁² + sin²θ dφ₂²`, Reeb `∂φ₁ + ∂φ₂`. Sasaki; the
//!   transverse geometry is the round 2-sphere of radius ½, so the
//!   transverse Ricci endomorphism is `4·Id` (`c = 2`).
//! * `hopf-s5` — round `S⁵` in nested Hopf coordinates; the transverse
//!   complex structure is pulled back from multiplication by `i` on `ℂ³`
//!   through the explicit embedding. Sasaki with transverse Ricci `6·Id`
//!   (`c = 3`).
//! * `heisenberg3` — `ℝ³` with `dx² + dy² + (dz − 2y dx)²`, Reeb `∂z`,
//!   the contact normalization chosen so `ĥ = −J`. Sasaki with flat
//!   transverse geometry (`c = 0`).
//! * `flat-product` — `ℝ_s × ℝ²` with the Euclidean metric and Reeb `∂s`;
//!   `ĥ = 0`, so not Sasaki. Useful as the degenerate control.
//!
//! Valid sampling regions are the declared chart bounds minus a margin; the
//! Hopf charts degenerate at coordinate poles (`θ → 0, π/2`).

use std::f64::consts::PI;
use std::sync::Arc;

use crate::chart::{Chart, MatrixField, VectorField};
use crate::error::{GeomError, Result};
use crate::flow::RiemannianFlow;
use crate::jet::Jet;
use crate::tensor::jet_solve;

/// Ids of all catalog models, in a stable order.
pub const MODEL_IDS: [&str; 4] = ["hopf-s3", "hopf-s5", "heisenberg3", "flat-product"];

/// Looks a model up by id.
pub fn by_id(id: &str) -> Result<RiemannianFlow> {
    match id {
        "hopf-s3" => Ok(hopf_s3(false)),
        "hopf-s5" => Ok(hopf_s5(false)),
        "heisenberg3" => Ok(heisenberg3(false)),
        "flat-product" => Ok(flat_product()),
        _ => Err(GeomError::UnknownModel(id.to_string())),
    }
}

/// All catalog models.
pub fn catalog() -> Vec<RiemannianFlow> {
    MODEL_IDS.iter().map(|id| by_id(id).unwrap()).collect()
}

/// Round `S³` in Hopf coordinates. `flip_orientation` negates `J`.
pub fn hopf_s3(flip_orientation: bool) -> RiemannianFlow {
    let metric: MatrixField = Arc::new(|x: &[Jet]| {
        let c = x[0].cos();
        let s = x[0].sin();
        let zero = x[0].lift(0.0);
        vec![
            x[0].lift(1.0),
            zero.clone(),
            zero.clone(),
            zero.clone(),
            &c * &c,
            zero.clone(),
            zero.clone(),
            zero.clone(),
            &s * &s,
        ]
    });
    let chart = Chart::new("hopf-s3", vec![(0.0, PI / 2.0), (0.0, 2.0 * PI), (0.0, 2.0 * PI)], metric);
    let reeb: VectorField = Arc::new(|x: &[Jet]| {
        vec![x[0].lift(0.0), x[0].lift(1.0), x[0].lift(1.0)]
    });
    let sign = if flip_orientation { -1.0 } else { 1.0 };
    // J(∂θ) = tanθ ∂φ₁ − cotθ ∂φ₂ on Q; zero on the Reeb direction.
    let j: MatrixField = Arc::new(move |x: &[Jet]| {
        let c = x[0].cos();
        let s = x[0].sin();
        let sc = &s * &c;
        let zero = x[0].lift(0.0);
        vec![
            zero.clone(),
            -&sc * sign,
            &sc * sign,
            (&s / &c) * sign,
            zero.clone(),
            zero.clone(),
            (-&c / &s) * sign,
            zero.clone(),
            zero.clone(),
        ]
    });
    RiemannianFlow::new("hopf-s3", chart, reeb, j)
}

/// Heisenberg group with contact form `dz − 2y dx`. `flip_orientation`
/// negates `J`.
pub fn heisenberg3(flip_orientation: bool) -> RiemannianFlow {
    let metric: MatrixField = Arc::new(|x: &[Jet]| {
        let y = &x[1];
        let zero = x[0].lift(0.0);
        let one = x[0].lift(1.0);
        vec![
            &one + y * y * 4.0,
            zero.clone(),
            y * -2.0,
            zero.clone(),
            one.clone(),
            zero.clone(),
            y * -2.0,
            zero.clone(),
            one.clone(),
        ]
    });
    let chart = Chart::new("heisenberg3", vec![(-2.0, 2.0); 3], metric);
    let reeb: VectorField = Arc::new(|x: &[Jet]| {
        vec![x[0].lift(0.0), x[0].lift(0.0), x[0].lift(1.0)]
    });
    let sign = if flip_orientation { -1.0 } else { 1.0 };
    // J(∂x + 2y ∂z) = −∂y, J(∂y) = ∂x + 2y ∂z.
    let j: MatrixField = Arc::new(move |x: &[Jet]| {
        let y = &x[1];
        let zero = x[0].lift(0.0);
        vec![
            zero.clone(),
            x[0].lift(sign),
            zero.clone(),
            x[0].lift(-sign),
            zero.clone(),
            zero.clone(),
            zero.clone(),
            y * (2.0 * sign),
            zero.clone(),
        ]
    });
    RiemannianFlow::new("heisenberg3", chart, reeb, j)
}

/// Flat product flow `ℝ_s × ℝ²` with parallel Reeb field (`ĥ = 0`).
pub fn flat_product() -> RiemannianFlow {
    let metric: MatrixField = Arc::new(|x: &[Jet]| {
        let mut g = Vec::with_capacity(9);
        for i in 0..3 {
            for j in 0..3 {
                g.push(x[0].lift(if i == j { 1.0 } else { 0.0 }));
            }
        }
        g
    });
    let chart = Chart::new("flat-product", vec![(-3.0, 3.0); 3], metric);
    let reeb: VectorField = Arc::new(|x: &[Jet]| {
        vec![x[0].lift(1.0), x[0].lift(0.0), x[0].lift(0.0)]
    });
    let j: MatrixField = Arc::new(|x: &[Jet]| {
        let zero = x[0].lift(0.0);
        vec![
            zero.clone(),
            zero.clone(),
            zero.clone(),
            zero.clone(),
            zero.clone(),
            -x[0].lift(1.0),
            zero.clone(),
            x[0].lift(1.0),
            zero.clone(),
        ]
    });
    RiemannianFlow::new("flat-product", chart, reeb, j)
}

/// Round `S⁵` in nested Hopf coordinates `(θ₁, θ₂, φ₁, φ₂, φ₃)` with radii
/// `r₁ = cosθ₁`, `r₂ = sinθ₁ cosθ₂`, `r₃ = sinθ₁ sinθ₂`.
pub fn hopf_s5(flip_orientation: bool) -> RiemannianFlow {
    let metric: MatrixField = Arc::new(|x: &[Jet]| {
        let s1 = x[0].sin();
        let c1 = x[0].cos();
        let s2 = x[1].sin();
        let c2 = x[1].cos();
        let zero = x[0].lift(0.0);
        let mut g = vec![zero; 25];
        g[0] = x[0].lift(1.0);
        g[6] = &s1 * &s1;
        g[12] = &c1 * &c1;
        g[18] = &s1 * &s1 * &c2 * &c2;
        g[24] = &s1 * &s1 * &s2 * &s2;
        g
    });
    let chart = Chart::new(
        "hopf-s5",
        vec![
            (0.0, PI / 2.0),
            (0.0, PI / 2.0),
            (0.0, 2.0 * PI),
            (0.0, 2.0 * PI),
            (0.0, 2.0 * PI),
        ],
        metric,
    );
    let reeb: VectorField = Arc::new(|x: &[Jet]| {
        vec![
            x[0].lift(0.0),
            x[0].lift(0.0),
            x[0].lift(1.0),
            x[0].lift(1.0),
            x[0].lift(1.0),
        ]
    });

    let metric_for_j = chart.metric.clone();
    let reeb_for_j = reeb.clone();
    let sign = if flip_orientation { 1.0 } else { -1.0 };
    // Pullback of multiplication by i on ℂ³ through the embedding, with the
    // sign fixed so that ĥ = −J for the Reeb field above.
    let j: MatrixField = Arc::new(move |x: &[Jet]| {
        let d = 5usize;
        let (s1, c1) = (x[0].sin(), x[0].cos());
        let (s2, c2) = (x[1].sin(), x[1].cos());
        let (sp1, cp1) = (x[2].sin(), x[2].cos());
        let (sp2, cp2) = (x[3].sin(), x[3].cos());
        let (sp3, cp3) = (x[4].sin(), x[4].cos());
        let zero = x[0].lift(0.0);
        let r2 = &s1 * &c2;
        let r3 = &s1 * &s2;
        let dr2_t1 = &c1 * &c2;
        let dr2_t2 = -(&s1 * &s2);
        let dr3_t1 = &c1 * &s2;
        let dr3_t2 = &s1 * &c2;

        // Embedding Jacobian rows: (x₁,y₁,x₂,y₂,x₃,y₃) by (θ₁,θ₂,φ₁,φ₂,φ₃).
        let row = |dr_a: &Jet, dr_b: &Jet, r: &Jet, cp: &Jet, sp: &Jet, phi_col: usize| {
            let mut rx = vec![zero.clone(); d];
            let mut ry = vec![zero.clone(); d];
            rx[0] = dr_a * cp;
            ry[0] = dr_a * sp;
            rx[1] = dr_b * cp;
            ry[1] = dr_b * sp;
            rx[phi_col] = -(r * sp);
            ry[phi_col] = r * cp;
            (rx, ry)
        };
        let (r1x, r1y) = {
            let mut rx = vec![zero.clone(); d];
            let mut ry = vec![zero.clone(); d];
            rx[0] = -(&s1 * &cp1);
            ry[0] = -(&s1 * &sp1);
            rx[2] = -(&c1 * &sp1);
            ry[2] = &c1 * &cp1;
            (rx, ry)
        };
        let (r2x, r2y) = row(&dr2_t1, &dr2_t2, &r2, &cp2, &sp2, 3);
        let (r3x, r3y) = row(&dr3_t1, &dr3_t2, &r3, &cp3, &sp3, 4);
        let jac: [(&Vec<Jet>, &Vec<Jet>); 3] = [(&r1x, &r1y), (&r2x, &r2y), (&r3x, &r3y)];

        let g = metric_for_j(x);
        let xi = reeb_for_j(x);
        let mut out = Vec::with_capacity(d * d);
        for col in 0..d {
            // project e_col to Q
            let mut v: Vec<Jet> = (0..d)
                .map(|k| x[0].lift(if k == col { 1.0 } else { 0.0 }))
                .collect();
            let mut a = zero.clone();
            for i in 0..d {
                for jj in 0..d {
                    a = a + &g[i * d + jj] * &v[i] * &xi[jj];
                }
            }
            for k in 0..d {
                v[k] = &v[k] - &a * &xi[k];
            }
            // w = J_amb · Dψ · v per complex pair: (a, b) ↦ sign · (−b, a)
            let mut wx = vec![zero.clone(); 3];
            let mut wy = vec![zero.clone(); 3];
            for (pair, (rx, ry)) in jac.iter().enumerate() {
                let mut ax = zero.clone();
                let mut ay = zero.clone();
                for k in 0..d {
                    ax = ax + &rx[k] * &v[k];
                    ay = ay + &ry[k] * &v[k];
                }
                wx[pair] = -&ay * sign;
                wy[pair] = &ax * sign;
            }
            // rhs_k = Dψ^T w
            let rhs: Vec<Jet> = (0..d)
                .map(|k| {
                    let mut acc = zero.clone();
                    for (pair, (rx, ry)) in jac.iter().enumerate() {
                        acc = acc + &rx[k] * &wx[pair] + &ry[k] * &wy[pair];
                    }
                    acc
                })
                .collect();
            let jv = jet_solve(&g, &rhs, d);
            out.push(jv);
        }
        // out is column-major; flatten row-major
        let mut flat = Vec::with_capacity(d * d);
        for r in 0..d {
            for (c, colv) in out.iter().enumerate() {
                let _ = c;
                flat.push(colv[r].clone());
            }
        }
        flat
    });
    RiemannianFlow::new("hopf-s5", chart, reeb, j)
}
