use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("dimension mismatch")]
    DimensionMismatch,
    #[error("polytope is unbounded")]
    UnboundedPolytope,
    #[error("polytope is empty")]
    EmptyPolytope,
    #[error("intersection has lower affine dimension than the workspace")]
    DegenerateIntersection,
    #[error("boundary collapses to a single point")]
    DegenerateBoundary,
    #[error("numerical failure in {0}")]
    Numerical(String),
    #[error("quadrilateral is not convex or not in cyclic order")]
    NonConvexQuad,
    #[error("waypoints differ in both translation and rotation")]
    MixedMotion,
    #[error("rejection sampling exhausted after {0} attempts")]
    SamplingExhausted(usize),
    #[error("every visibility edge is already covered")]
    NoUncoveredEdges,
    #[error("seed point lies inside an obstacle")]
    SeedInObstacle,
    #[error("coverage stalled at {0:.4}")]
    CoverageStall(f64),
    #[error("empty scene bounds")]
    EmptyBounds,
    #[error("invalid query: {0}")]
    InvalidQuery(String),
    #[error("query could not be attached to the roadmap")]
    Disconnected,
    #[error("no path between start and goal")]
    NoPath,
    #[error("parse error: {0}")]
    Parse(String),
    #[error("object fingerprint collides with different stored geometry")]
    FingerprintCollision,
    #[error("unsupported roadmap version {0}")]
    UnsupportedVersion(u32),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
