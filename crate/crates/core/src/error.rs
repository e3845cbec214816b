use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("element is central (|w| = {0}); axis undefined")]
    CentralElement(f64),
    #[error("signature has no generators (genus 0, no punctures)")]
    EmptySignature,
    #[error("point is not normalizable: {0}")]
    NotNormalizable(&'static str),
    #[error("holonomy angles differ at glued punctures: {0} vs {1}")]
    AngleMismatch(f64, f64),
    #[error("holonomy along the curve is central (weight {0})")]
    CentralHolonomy(f64),
    #[error("puncture index {index} out of range for {count} punctures")]
    InvalidPuncture { index: usize, count: usize },
    #[error("curve index {index} out of range for {count} recorded curves")]
    InvalidCurve { index: usize, count: usize },
    #[error("angle triple ({0}, {1}, {2}) lies outside the tetrahedron")]
    OutsideTetrahedron(f64, f64, f64),
    #[error("frame at puncture {0} is collapsed")]
    CollapsedFrame(usize),
    #[error("invalid surface signature: {0}")]
    InvalidSignature(String),
    #[error("label or level out of range: {0}")]
    LevelOutOfRange(String),
    #[error("linear constraint violated (residual {0:e})")]
    ConstraintViolated(f64),
    #[error("invalid subsheaf descriptor: {0}")]
    InvalidSubsheaf(String),
    #[error("data is not semistable")]
    Unstable,
    #[error("pencil degenerates away from the marked points at z = {0}")]
    NonMarkedDegeneration(String),
    #[error("Verlinde sum rounding residue {0:e} exceeds 1e-6")]
    RoundingResidue(f64),
    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    /// Stable machine-readable code, used by the CLI.
    pub fn code(&self) -> &'static str {
        match self {
            Error::CentralElement(_) => "CentralElement",
            Error::EmptySignature => "EmptySignature",
            Error::NotNormalizable(_) => "NotNormalizable",
            Error::AngleMismatch(..) => "AngleMismatch",
            Error::CentralHolonomy(_) => "CentralHolonomy",
            Error::InvalidPuncture { .. } => "InvalidPuncture",
            Error::InvalidCurve { .. } => "InvalidCurve",
            Error::OutsideTetrahedron(..) => "OutsideTetrahedron",
            Error::CollapsedFrame(_) => "CollapsedFrame",
            Error::InvalidSignature(_) => "InvalidSignature",
            Error::LevelOutOfRange(_) => "LevelOutOfRange",
            Error::ConstraintViolated(_) => "ConstraintViolated",
            Error::InvalidSubsheaf(_) => "InvalidSubsheaf",
            Error::Unstable => "Unstable",
            Error::NonMarkedDegeneration(_) => "NonMarkedDegeneration",
            Error::RoundingResidue(_) => "RoundingResidue",
            Error::Parse(_) => "Parse",
        }
    }
}
