use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("division by the zero quaternion")]
    ZeroDivision,
    #[error("point is real; its imaginary direction is undefined")]
    RealPoint,
    #[error("imaginary direction has zero length")]
    ZeroDirection,
    #[error("matrix is not Hermitian (asymmetry {asymmetry:.3e})")]
    NotHermitian { asymmetry: f64 },
    #[error("complex-adjoint eigenvalue {value:.6e} has no partner within {tol:.3e}")]
    OddMultiplicity { value: f64, tol: f64 },
    #[error("matrix is not positive definite (smallest eigenvalue {min_eigenvalue:.3e})")]
    NotPositive { min_eigenvalue: f64 },
    #[error("series did not converge: {0}")]
    NotConvergent(String),
    #[error("columns are not orthonormal (defect {defect:.3e})")]
    NotIsometric { defect: f64 },
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("matrix is singular")]
    Singular,
    #[error("constant term is not invertible")]
    NonInvertibleConstantTerm,
    #[error("imaginary units are not orthogonal (dot product {dot:.3e})")]
    NotOrthogonal { dot: f64 },
    #[error("Blaschke factor requested at the origin")]
    ZeroPoint,
    #[error("point {0} lies outside the open unit ball")]
    NotInBall(String),
    #[error("evaluation point lies on the pole sphere")]
    PoleSphere,
    #[error("zeros {first} and {second} lie on the same sphere")]
    DuplicateSphere { first: usize, second: usize },
    #[error("placement of zero {index} broke down: |B_k(a)| = {modulus:.3e}")]
    PlacementBreakdown { index: usize, modulus: f64 },
    #[error("not a signature matrix: {0}")]
    NotSignature(String),
    #[error("sample radius {radius} too large: truncation bound {bound:.3e} exceeds {limit:.1e}")]
    RadiusTooLarge { radius: f64, bound: f64, limit: f64 },
    #[error("nodes {first} and {second} lie on intersecting spheres")]
    OverlappingSpheres { first: usize, second: usize },
    #[error("node {index} has modulus {modulus} outside the admissible ball")]
    NodeOutsideBall { index: usize, modulus: f64 },
    #[error("Gram matrix is not positive definite (smallest eigenvalue {min_eigenvalue:.3e})")]
    NotPD { min_eigenvalue: f64 },
    #[error("verification failed: {}", .0.join(", "))]
    Verification(Vec<String>),
    #[error("colligation relation does not hold (residual {residual:.3e})")]
    RelationNotSatisfied { residual: f64 },
    #[error("V is not a co-isometry (defect {defect:.3e})")]
    NotCoisometry { defect: f64 },
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
