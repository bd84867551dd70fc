use alloc::string::String;

/// Errors raised by the native kernels.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CoreError {
    #[error("shape mismatch in {what}: expected {expected}, found {found}")]
    ShapeMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("unsupported component count {0} (expected 1, 3, 6 or 9)")]
    InvalidComponentCount(usize),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub(crate) fn shape(what: &'static str, expected: usize, found: usize) -> Result<(), CoreError> {
    if expected == found {
        Ok(())
    } else {
        Err(CoreError::ShapeMismatch {
            what,
            expected,
            found,
        })
    }
}
