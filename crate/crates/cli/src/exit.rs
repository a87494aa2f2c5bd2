//! Process exit statuses shared by every subcommand.

use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u8)]
pub enum Status {
    Usage = 1,
    Io = 2,
    /// The command ran but produced nothing to report.
    Empty = 3,
    Invalid = 4,
}

/// Error with an explicit exit status.
#[derive(Debug)]
pub struct Failure {
    pub status: Status,
    pub message: String,
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for Failure {}

pub fn fail(status: Status, message: impl Into<String>) -> anyhow::Error {
    Failure {
        status,
        message: message.into(),
    }
    .into()
}

pub fn empty(message: impl Into<String>) -> anyhow::Error {
    fail(Status::Empty, message)
}

pub fn invalid(message: impl Into<String>) -> anyhow::Error {
    fail(Status::Invalid, message)
}

/// Maps an error chain to an exit status. The first recognised cause wins;
/// anything unrecognised counts as a validation failure.
pub fn classify(err: &anyhow::Error) -> Status {
    for cause in err.chain() {
        if let Some(f) = cause.downcast_ref::<Failure>() {
            return f.status;
        }
        if let Some(e) = cause.downcast_ref::<hairstep::Error>() {
            return match e.root() {
                hairstep::Error::Io(_) => Status::Io,
                hairstep::Error::Image(image::ImageError::IoError(_)) => Status::Io,
                hairstep::Error::Undefined(_) => Status::Empty,
                _ => Status::Invalid,
            };
        }
        if cause.is::<std::io::Error>() {
            return Status::Io;
        }
    }
    Status::Invalid
}
