use std::fmt;

use umr_core::Error as CoreError;

/// Anything a command can fail with. Every failure maps to a process exit
/// code and a one-line machine-readable record on stderr.
#[derive(Debug)]
pub enum CliError {
    Core(CoreError),
    Io { path: String, message: String },
    Parse { path: String, line: usize, message: String },
    Usage(String),
}

impl CliError {
    pub fn io(path: &std::path::Path, err: std::io::Error) -> Self {
        CliError::Io { path: path.display().to_string(), message: err.to_string() }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Core(err) => match err {
                CoreError::Internal(_)
                | CoreError::Infeasible
                | CoreError::Unbounded
                | CoreError::IterationLimit
                | CoreError::PoolColumnInvalid { .. }
                | CoreError::InvalidHierarchy(_) => "internal",
                _ => "input",
            },
            CliError::Io { .. } => "io",
            CliError::Parse { .. } => "parse",
            CliError::Usage(_) => "usage",
        }
    }

    /// 2 rejects the input, 4 means the solver broke one of its own
    /// invariants. Budget exhaustion (3) is not an error and never lands
    /// here.
    pub fn exit_code(&self) -> i32 {
        if self.kind() == "internal" {
            4
        } else {
            2
        }
    }

    /// Single-line JSON error record for scripting.
    pub fn record(&self) -> String {
        format!(
            "{{\"error\":\"{}\",\"kind\":\"{}\",\"exit\":{}}}",
            escape(&self.to_string()),
            self.kind(),
            self.exit_code()
        )
    }
}

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            c if (c as u32) < 0x20 => out.push_str(&format!("\\u{:04x}", c as u32)),
            c => out.push(c),
        }
    }
    out
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Core(err) => write!(f, "{err}"),
            CliError::Io { path, message } => write!(f, "{path}: {message}"),
            CliError::Parse { path, line, message } => {
                write!(f, "{path}:{line}: {message}")
            }
            CliError::Usage(message) => write!(f, "{message}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<CoreError> for CliError {
    fn from(err: CoreError) -> Self {
        CliError::Core(err)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes_split_input_from_internal() {
        assert_eq!(CliError::Core(CoreError::Disconnected).exit_code(), 2);
        assert_eq!(CliError::Core(CoreError::Infeasible).exit_code(), 4);
        assert_eq!(CliError::Core(CoreError::Internal("x".into())).exit_code(), 4);
        assert_eq!(CliError::Usage("bad flag".into()).exit_code(), 2);
    }

    #[test]
    fn record_is_one_escaped_json_line() {
        let err = CliError::Parse { path: "a\"b".into(), line: 3, message: "no\nluck".into() };
        let record = err.record();
        assert!(!record.contains('\n'));
        assert_eq!(record, "{\"error\":\"a\\\"b:3: no\\nluck\",\"kind\":\"parse\",\"exit\":2}");
    }
}
