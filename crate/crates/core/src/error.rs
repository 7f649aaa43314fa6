use thiserror::Error;

/// Errors raised by the workbench. Every variant maps to a module-qualified
/// code (see [`Error::code`]) so the CLI can emit machine-readable reports.
#[derive(Debug, Error)]
pub enum Error {
    #[error("input error: {0}")]
    Input(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("degenerate set: {0}")]
    DegenerateSet(String),

    #[error("UPC descriptor invalid at {witness}")]
    DescriptorInvalid { witness: String },

    #[error("capacity exceeded: {0}")]
    Capacity(String),

    #[error("shape error: {0}")]
    Shape(String),

    #[error("degenerate mesh: {0}")]
    DegenerateMesh(String),

    #[error("degenerate configuration: {0}")]
    DegenerateConfiguration(String),

    #[error("no closed-form equilibrium measure for {0}")]
    NoClosedForm(String),

    #[error("fit error: {0}")]
    Fit(String),

    #[error("plan invalid:\n  {}", .0.join("\n  "))]
    Plan(Vec<String>),

    #[error("internal error: {0}")]
    Internal(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub fn code(&self) -> &'static str {
        match self {
            Error::Input(_) => "input.invalid",
            Error::Dimension { .. } => "geometry.dimension_mismatch",
            Error::DegenerateSet(_) => "geometry.degenerate_set",
            Error::DescriptorInvalid { .. } => "geometry.descriptor_invalid",
            Error::Capacity(_) => "fekete.capacity",
            Error::Shape(_) => "polyspace.shape",
            Error::DegenerateMesh(_) => "fekete.degenerate_mesh",
            Error::DegenerateConfiguration(_) => "extremal.degenerate_configuration",
            Error::NoClosedForm(_) => "measures.no_closed_form",
            Error::Fit(_) => "extremal.fit",
            Error::Plan(_) => "cli.plan_invalid",
            Error::Internal(_) => "internal",
            Error::Io(_) => "cli.io",
            Error::Json(_) => "cli.json",
            Error::Csv(_) => "cli.csv",
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn input<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Input(msg.into()))
}
