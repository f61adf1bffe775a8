use geoflow_core::Error as CoreError;

/// Everything that can end a command, tagged with its exit status.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Structure(String),
    #[error("{0}")]
    Numerical(String),
    #[error("{0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Input(_) | CliError::Io(_) => 1,
            CliError::Structure(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }
}

/// Which failures mean "the covector is unsuitable" rather than "the
/// numerics broke".
pub fn is_structural(e: &CoreError) -> bool {
    matches!(
        e,
        CoreError::NotAmple(_)
            | CoreError::NotEquiregular
            | CoreError::RankDeficient(_)
            | CoreError::IllConditioned(_)
            | CoreError::ZeroTangent
            | CoreError::DependentFrame
    )
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> CliError {
        match e {
            CoreError::Parse(_)
            | CoreError::Dimension(_)
            | CoreError::UnknownBuiltin(_)
            | CoreError::BadParams(_)
            | CoreError::NonPositiveDensity(_) => CliError::Input(e.to_string()),
            e if is_structural(&e) => CliError::Structure(e.to_string()),
            e => CliError::Numerical(e.to_string()),
        }
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;
