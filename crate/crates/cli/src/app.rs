//! Process-level error handling and exit codes.
//!
//! Exit 0: success. Exit 1: configuration problem (bad flags, bad scenario
//! file, domain violations). Exit 2: numerical failure during evaluation,
//! with the failing operation named.

use g2guard_core::Error as CoreError;

#[derive(Debug)]
pub enum AppError {
    /// One message per violation, each prefixed with its field path.
    Config(Vec<String>),
    Numeric {
        context: &'static str,
        source: CoreError,
    },
    Io(String),
}

impl AppError {
    pub fn exit_code(&self) -> i32 {
        match self {
            AppError::Config(_) | AppError::Io(_) => 1,
            AppError::Numeric { .. } => 2,
        }
    }

    pub fn config(msg: impl Into<String>) -> Self {
        AppError::Config(vec![msg.into()])
    }

    pub fn report(&self) {
        match self {
            AppError::Config(diags) => {
                for d in diags {
                    eprintln!("error: {d}");
                }
            }
            AppError::Numeric { context, source } => {
                eprintln!("error: {context}: {source}");
            }
            AppError::Io(msg) => eprintln!("error: {msg}"),
        }
    }
}

impl From<std::io::Error> for AppError {
    fn from(e: std::io::Error) -> Self {
        AppError::Io(e.to_string())
    }
}

/// Map a core error raised while computing `context`. Domain violations are
/// configuration mistakes; everything else is a numerical failure.
pub fn core_err(context: &'static str) -> impl Fn(CoreError) -> AppError {
    move |e| match e {
        CoreError::Domain { .. } => AppError::Config(vec![format!("{context}: {e}")]),
        other => AppError::Numeric {
            context,
            source: other,
        },
    }
}

pub type AppResult<T> = Result<T, AppError>;
