//! Error type shared by all modules of the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum GeomError {
    #[error("point {point:?} lies outside the bounds of chart `{chart}` (margin {margin})")]
    OutOfBounds {
        chart: String,
        point: Vec<f64>,
        margin: f64,
    },

    #[error("metric of chart `{chart}` is singular at {point:?}")]
    SingularMetric { chart: String, point: Vec<f64> },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("function is not basic: |reeb(f)| = {residual:.3e} exceeds tolerance {tolerance:.3e}")]
    NonBasicFunction { residual: f64, tolerance: f64 },

    #[error("warping function {name} must be positive: {name}({t}) = {value}")]
    NonPositiveProfile { name: String, t: f64, value: f64 },

    #[error("Reeb rescaling factor must be positive, got {0}")]
    NonPositiveScale(f64),

    #[error("initial condition infeasible: f(rho0) = {f_value:.6e} < 0 at rho0 = {rho0}")]
    InfeasibleInitialCondition { rho0: f64, f_value: f64 },

    #[error("rho0 = {rho0} sits on a root of the potential (f = {f_value:.3e}); an increasing solution cannot start there")]
    StartsAtRoot { rho0: f64, f_value: f64 },

    #[error("integrator step size collapsed to {h:.3e} at t = {t:.6} away from any detected event")]
    StepSizeCollapse { t: f64, h: f64 },

    #[error("critical point: |grad u| = {norm:.3e} below tolerance at {point:?}")]
    CriticalPoint { point: Vec<f64>, norm: f64 },

    #[error("level set u = {level} not found in chart `{chart}` along the scan line")]
    LevelSetNotFound { chart: String, level: f64 },

    #[error("flow left chart `{chart}` at parameter {t:.6}")]
    FlowExitedChart { chart: String, t: f64 },

    #[error("no closed form available: {0}")]
    NoClosedForm(String),

    #[error("empty input: {0}")]
    EmptyInput(String),

    #[error("unknown model id `{0}`")]
    UnknownModel(String),

    #[error("unknown profile preset `{0}`")]
    UnknownProfile(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, GeomError>;
