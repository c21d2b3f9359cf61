use std::fmt;
use std::process::ExitCode;

use bmax_core::Error;

/// Exit statuses of the `bmax` binary.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Config = 2,
    Data = 3,
    NotConverged = 4,
    CheckFailed = 5,
}

#[derive(Debug)]
pub struct Failure {
    pub status: Status,
    pub message: String,
}

impl Failure {
    pub fn config(message: impl Into<String>) -> Self {
        Self {
            status: Status::Config,
            message: message.into(),
        }
    }

    pub fn data(message: impl Into<String>) -> Self {
        Self {
            status: Status::Data,
            message: message.into(),
        }
    }

    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(self.status as u8)
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match e {
            Error::InvalidParameter(_) | Error::InvalidSimplex(_) | Error::RequiresKl(_) | Error::RequiresLinear(_) => {
                Status::Config
            }
            Error::NotConverged { .. } => Status::NotConverged,
            Error::DimensionMismatch { .. } | Error::NonFinite(_) | Error::Data(_) | Error::Csv(_) => Status::Data,
            Error::Io(_) | Error::Json(_) => Status::Data,
        };
        Self {
            status,
            message: e.to_string(),
        }
    }
}

pub type CliResult<T> = Result<T, Failure>;
