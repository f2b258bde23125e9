use thiserror::Error;

/// Errors raised anywhere in the pipeline.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("element is not a unit")]
    NotAUnit,

    #[error("precision exhausted: {0}")]
    PrecisionExhausted(String),

    #[error("Laurent window overflow: {0}")]
    WindowOverflow(String),

    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("unknown identifier `{0}`")]
    UnknownIdentifier(String),

    #[error("polynomial for `{0}` is not monic")]
    NotMonic(String),

    #[error("polynomial for `{var}` is not Eisenstein: {reason}")]
    NotEisenstein { var: String, reason: String },

    #[error("polynomial for `{var}` does not define an unramified extension: {reason}")]
    NotUnramifiedSeparable { var: String, reason: String },

    #[error("unramified step `{0}` appears after a Laurent step")]
    UnramifiedAfterLaurent(String),

    #[error("variable `{0}` is declared twice")]
    DuplicateVariable(String),

    #[error("p = {0} is not a prime")]
    NonPrimeP(u64),

    #[error("field is not of the form Q_p{{{{t}}}}(pi), pi^p = p*t: {0}")]
    FamilyMismatch(String),

    #[error("the graded table requires p > 2")]
    PLeTwo,
}

impl Error {
    pub(crate) fn syntax(line: usize, column: usize, message: impl Into<String>) -> Self {
        Error::Syntax {
            line,
            column,
            message: message.into(),
        }
    }

    /// Process exit status used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::PrecisionExhausted(_) | Error::WindowOverflow(_) => 2,
            Error::FamilyMismatch(_) | Error::PLeTwo => 3,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

/// Pipeline stage an error surfaced from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Tower,
    Differential,
    Smith,
    Classifier,
    Report,
}

impl Stage {
    pub fn name(self) -> &'static str {
        match self {
            Stage::Tower => "tower-elements",
            Stage::Differential => "differential-module",
            Stage::Smith => "dvr-smith",
            Stage::Classifier => "classifier",
            Stage::Report => "report",
        }
    }
}

/// An [`Error`] tagged with the stage that produced it.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("[{}] {error}", stage.name())]
pub struct StageError {
    pub stage: Stage,
    pub error: Error,
}

impl StageError {
    pub fn exit_code(&self) -> i32 {
        self.error.exit_code()
    }
}

pub(crate) trait InStage<T> {
    fn in_stage(self, stage: Stage) -> std::result::Result<T, StageError>;
}

impl<T> InStage<T> for Result<T> {
    fn in_stage(self, stage: Stage) -> std::result::Result<T, StageError> {
        self.map_err(|error| StageError { stage, error })
    }
}
