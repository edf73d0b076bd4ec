use std::fmt;

/// A precondition of the non-balancing construction that structural
/// verification checks by name.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Check {
    ShellEqualNorm,
    StrictConvexity,
    ShellRadius,
    ChainSizes,
    ChainNesting,
    SideLength,
    VectorCount,
    SupportContainment,
    VectorFormula,
}

impl Check {
    pub fn name(self) -> &'static str {
        match self {
            Check::ShellEqualNorm => "shell equal norm",
            Check::StrictConvexity => "strict convexity",
            Check::ShellRadius => "shell radius",
            Check::ChainSizes => "chain sizes",
            Check::ChainNesting => "chain nesting",
            Check::SideLength => "side length",
            Check::VectorCount => "vector count",
            Check::SupportContainment => "support containment",
            Check::VectorFormula => "vector formula mismatch",
        }
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// The caller broke an operation's precondition.
    #[error("contract violation: {0}")]
    Contract(String),

    #[error("arithmetic overflow in {0}")]
    Overflow(&'static str),

    #[error("invalid parameters: {0}")]
    Parameter(String),

    #[error("enumeration budget exceeded: {needed} points needed, budget is {budget}")]
    Budget { needed: u128, budget: u128 },

    #[error("precondition failed: {check} ({detail})")]
    Precondition { check: Check, detail: String },

    #[error("invalid instance field `{field}`: {reason}")]
    Format { field: String, reason: String },

    /// A lower-bound certificate could not be re-checked. This would mean the
    /// construction argument is broken for the instance at hand.
    #[error("certification failed: {0}")]
    Certification(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn contract(msg: impl Into<String>) -> Self {
        Error::Contract(msg.into())
    }

    pub(crate) fn parameter(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }

    pub(crate) fn format(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Format {
            field: field.into(),
            reason: reason.into(),
        }
    }

    pub(crate) fn precondition(check: Check, detail: impl Into<String>) -> Self {
        Error::Precondition {
            check,
            detail: detail.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
