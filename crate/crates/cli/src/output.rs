use std::fs;
use std::path::{Path, PathBuf};

use aqrm_core::scalar::{parse_rational, rational_to_f64};
use aqrm_core::{Error, Rational};

/// Outcome other than success, mapped to exit codes 1 and 2.
#[derive(Debug)]
pub enum Failure {
    /// Checks ran and failed.
    Checks(String),
    /// Bad usage or a violated contract.
    Usage(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::BoundExhausted { .. } => Failure::Checks(e.to_string()),
            _ => Failure::Usage(e.to_string()),
        }
    }
}

pub type CliResult<T> = Result<T, Failure>;

/// Exact parameter: `p/q` or an integer. Decimals are rejected.
pub fn exact(name: &str, s: &str) -> CliResult<Rational> {
    parse_rational(s)
        .map_err(|_| Failure::Usage(format!("--{} expects an exact rational such as 1/2, got {:?}", name, s)))
}

/// Numeric parameter: a decimal or `p/q`.
pub fn numeric(name: &str, s: &str) -> CliResult<f64> {
    if let Ok(x) = s.trim().parse::<f64>() {
        if x.is_finite() {
            return Ok(x);
        }
    } else if let Ok(r) = parse_rational(s) {
        return Ok(rational_to_f64(&r));
    }
    Err(Failure::Usage(format!("--{} expects a finite number, got {:?}", name, s)))
}

/// File-name tag of a parameter string: `1/2` → `1_2`, `-0.5` → `m0.5`.
pub fn tag(s: &str) -> String {
    s.trim().replace('/', "_").replace('-', "m")
}

/// Writes `contents` to `dir/name`, creating `dir` if needed.
pub fn write_artifact(dir: &Path, name: &str, contents: &str) -> CliResult<PathBuf> {
    fs::create_dir_all(dir).map_err(|e| Failure::Usage(format!("cannot create {}: {}", dir.display(), e)))?;
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|e| Failure::Usage(format!("cannot write {}: {}", path.display(), e)))?;
    println!("wrote {}", path.display());
    Ok(path)
}

pub fn write_json(dir: &Path, name: &str, value: &serde_json::Value) -> CliResult<PathBuf> {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    write_artifact(dir, name, &s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_rejects_decimals() {
        assert!(exact("eps", "0.5").is_err());
        assert_eq!(exact("eps", "-1/2").unwrap(), Rational::new((-1).into(), 2.into()));
    }

    #[test]
    fn numeric_accepts_both_forms() {
        assert_eq!(numeric("eps", "0.5").unwrap(), 0.5);
        assert_eq!(numeric("eps", "-3/2").unwrap(), -1.5);
        assert!(numeric("eps", "nan").is_err());
        assert!(numeric("eps", "x").is_err());
    }

    #[test]
    fn tags_are_path_safe() {
        assert_eq!(tag("-1/2"), "m1_2");
        assert_eq!(tag("0.45"), "0.45");
    }
}
