use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Model(#[from] molsig::Error),

    /// Some rows were written with an error flag.
    #[error("{failed} of {total} rows failed, first: {first}")]
    Rows {
        failed: usize,
        total: usize,
        ambiguous: bool,
        first: molsig::Error,
    },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("output error: {0}")]
    Output(String),
}

fn model_exit_code(e: &molsig::Error) -> i32 {
    match e {
        molsig::Error::Domain(_) => 2,
        molsig::Error::Ambiguous { .. } => 4,
        _ => 3,
    }
}

impl CliError {
    /// 0 success, 1 i/o, 2 config, 3 numeric, 4 ambiguous minimum.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Model(e) => model_exit_code(e),
            CliError::Rows { ambiguous: true, .. } => 4,
            CliError::Rows { .. } => 3,
            CliError::Io(_) | CliError::Output(_) => 1,
        }
    }
}
