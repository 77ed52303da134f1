//! Command-line front end for `qdiscord`: state families, discord
//! computation, randomized identity suites and parameter sweeps.

pub mod app;
pub mod families;
pub mod sweep;
pub mod verify;

use serde::Serialize;
use serde_json::Value;
use thiserror::Error;

/// Significant digits of every number the CLI prints.
pub const SIGNIFICANT_DIGITS: usize = 12;

pub const EXIT_OK: u8 = 0;
pub const EXIT_IDENTITY_FAILURE: u8 = 1;
pub const EXIT_INPUT: u8 = 2;
pub const EXIT_NON_CONVERGENCE: u8 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid input: {0}")]
    Input(String),
    #[error("i/o error: {0}")]
    Io(String),
    #[error(transparent)]
    Library(#[from] qdiscord::Error),
    #[error("internal error: {0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        use qdiscord::Error as E;
        match self {
            CliError::Input(_) | CliError::Io(_) => EXIT_INPUT,
            CliError::Library(E::ExpressionDisagreement(_) | E::InternalIdentityViolation { .. }) => {
                EXIT_IDENTITY_FAILURE
            }
            CliError::Library(_) => EXIT_INPUT,
            CliError::Internal(_) => EXIT_IDENTITY_FAILURE,
        }
    }
}

/// Rounds to [`SIGNIFICANT_DIGITS`] significant digits. Negative zero
/// becomes zero.
pub fn round_sig(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return if x == 0.0 { 0.0 } else { x };
    }
    let r: f64 = format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x).parse().expect("formatted float parses");
    if r == 0.0 {
        0.0
    } else {
        r
    }
}

/// Shortest decimal form of `round_sig(x)`, switching to exponent notation
/// outside `[1e-5, 1e15)`.
pub fn format_number(x: f64) -> String {
    let r = round_sig(x);
    if r == 0.0 || (1e-5..1e15).contains(&r.abs()) || !r.is_finite() {
        format!("{r}")
    } else {
        format!("{r:e}")
    }
}

fn round_value(v: &mut Value) {
    match v {
        Value::Number(n) => {
            if let Some(x) = n.as_f64().filter(|_| n.is_f64()) {
                if let Some(m) = serde_json::Number::from_f64(round_sig(x)) {
                    *n = m;
                }
            }
        }
        Value::Array(items) => items.iter_mut().for_each(round_value),
        Value::Object(map) => map.values_mut().for_each(round_value),
        _ => {}
    }
}

/// Pretty JSON with every float rounded to [`SIGNIFICANT_DIGITS`].
pub fn to_json<T: Serialize>(value: &T) -> Result<String, CliError> {
    let mut v = serde_json::to_value(value).map_err(|e| CliError::Internal(e.to_string()))?;
    round_value(&mut v);
    serde_json::to_string_pretty(&v).map_err(|e| CliError::Internal(e.to_string()))
}
