use alloc::string::String;
use alloc::vec::Vec;

use crate::expr::ParseError;

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("frame fields are linearly dependent at the evaluation point")]
    DependentFrame,
    #[error("volume density is not positive at the evaluation point (m = {0})")]
    NonPositiveDensity(f64),
    #[error("coordinate completion of the frame is degenerate; choose another complement")]
    DegenerateCompletion,
    #[error("integration failed at t = {t}: {reason}")]
    Integration { t: f64, reason: &'static str },
    #[error("energy drifted by {drift:e} (allowed {allowed:e})")]
    EnergyDrift { drift: f64, allowed: f64 },
    #[error("geodesic has zero tangent vector")]
    ZeroTangent,
    #[error("geodesic is not ample; growth vector {0:?}")]
    NotAmple(Vec<usize>),
    #[error("geodesic is not equiregular on the sampled window")]
    NotEquiregular,
    #[error("flag rank changes across tolerance decades: {0:?}")]
    IllConditioned(Vec<Vec<usize>>),
    #[error("rank deficiency at level {0}; the point is not equiregular")]
    RankDeficient(usize),
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("least-squares fit failed: {0}")]
    Fit(String),
    #[error("structure is not Riemannian (rank {k} < dimension {n})")]
    NotRiemannian { n: usize, k: usize },
    #[error("structure is not contact: {0}")]
    NotContact(&'static str),
    #[error("unknown builtin `{0}`")]
    UnknownBuiltin(String),
    #[error("malformed builtin parameters: {0}")]
    BadParams(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
}

pub type Result<T, E = Error> = core::result::Result<T, E>;
