//! Numerical laboratory for Kähler doubly-warped product geometry.
//!
//! The crate builds metrics of the form
//! `dt² ⊕ ρ(t)² (σ(t)² ĝ_ξ ⊕ k(t,x)² ĝ_ξ⊥)` over a minimal Riemannian flow
//! `(M, ĝ, ξ̂)`, and verifies their structure numerically at machine
//! precision: the closed-form Levi-Civita identities, the Kähler conditions
//! for the adapted almost-complex structure, the Ricci block decomposition
//! and the Einstein system, the Hessian eigenstructure of potentials `u = ρ²`,
//! and the classification and integration of the first-order warping ODE
//! `ρ' = √(−ερ² + Dρ^{−2n} + c/n)`.
//!
//! Differentiation is exact: all fields are closures over second-order
//! forward jets ([`jet`]), with a finite-difference oracle ([`fd`]) as an
//! independent cross-check.

pub mod chart;
pub mod dwp;
pub mod einstein;
pub mod error;
pub mod fd;
pub mod flow;
pub mod jet;
pub mod models;
pub mod obata;
pub mod ode;
pub mod report;
pub mod rk;
pub mod tensor;

pub use chart::Chart;
pub use error::{GeomError, Result};
pub use flow::RiemannianFlow;
pub use jet::{Jet, Jet1};
