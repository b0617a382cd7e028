use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid Lorentz map: |L^T G L - G| = {0:e}")]
    InvalidLorentzMap(f64),

    #[error("collar parameter rho = {rho} outside (0, {rho_max}]")]
    OutsideCollar { rho: f64, rho_max: f64 },

    #[error("invalid family: {0}")]
    InvalidFamily(String),

    #[error("collar transform failed: {0}")]
    CollarTransform(String),

    #[error("inconsistent mass aspect fit: relative residual {0:e}")]
    AspectFit(f64),

    #[error("degenerate induced metric at node {0}")]
    DegenerateMetric(usize),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("metric not realizable as a surface of revolution: discriminant {value:e} at theta = {theta}")]
    NegativeDiscriminant { theta: f64, value: f64 },

    #[error("metric is not rotationally symmetric; only surfaces of revolution can be embedded")]
    NotRevolution,

    #[error("pole regularity violated: {0}")]
    PoleRegularity(String),

    #[error("ODE integration failed: {0}")]
    Integrator(String),

    #[error("root finding failed: {0}")]
    RootFinding(String),

    #[error("mean curvature H = {h} <= -2 at node {node}")]
    MeanCurvatureBound { node: usize, h: f64 },

    #[error("point is off the hyperboloid: <<X,X>> + 1 = {0:e}")]
    OffHyperboloid(f64),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
