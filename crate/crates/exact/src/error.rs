use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExactError {
    #[error("operands live in different coefficient fields")]
    MixedFields,
    #[error("division by zero")]
    DivisionByZero,
    #[error("polynomial {0} is not irreducible over Q")]
    Reducible(String),
    #[error("polynomial {0} must be monic of positive degree")]
    NotMonic(String),
    #[error("irreducibility of {0} could not be decided (degree above search bound)")]
    IrreducibilityUndecided(String),
    #[error("complex root isolation failed for {0} at precision cap")]
    RootIsolation(String),
    #[error("the zero element has no multiplicative order")]
    ZeroElement,
    #[error("valuation undecided: all known coefficients vanish")]
    UndecidedValuation,
    #[error("no primitive element found among θ1 + kθ2 for |k| <= {0}")]
    NoPrimitiveElement(i64),
    #[error("parse error at column {column}: {message}")]
    Parse { column: usize, message: String },
}
