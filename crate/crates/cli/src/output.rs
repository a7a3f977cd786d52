use std::fs::{self, File};
use std::io::BufWriter;
use std::path::PathBuf;

use serde::Serialize;
use serde_json::Value;
use sip_core::spectral::format_number;
use sip_core::SipError;

/// Exit codes.
pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_TRUNCATED: i32 = 3;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Failure(String),
}

impl CliError {
    pub fn code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Failure(_) => EXIT_FAIL,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Failure(m) => m,
        }
    }
}

impl From<SipError> for CliError {
    fn from(e: SipError) -> Self {
        let msg = e.to_string();
        match e {
            SipError::UnknownFamily(_)
            | SipError::MissingParameter { .. }
            | SipError::InvalidParameters { .. }
            | SipError::DomainViolation { .. }
            | SipError::BranchMismatch { .. }
            | SipError::ZeroAlpha
            | SipError::ZeroLambda
            | SipError::InvalidGrid(_)
            | SipError::InvalidInput(_) => CliError::Usage(msg),
            _ => CliError::Failure(msg),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Failure(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Failure(e.to_string())
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

/// What one command produced.
#[derive(Debug)]
pub struct Report {
    pub text: String,
    pub json: Value,
    pub code: i32,
}

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub inputs: Value,
    pub tool_version: String,
    pub outputs: Vec<String>,
    pub all_passed: bool,
}

/// Directory a command writes into, created on first use.
pub struct OutputDir {
    dir: PathBuf,
    written: Vec<String>,
}

impl OutputDir {
    pub fn new(dir: PathBuf) -> Self {
        Self { dir, written: Vec::new() }
    }

    pub fn create(&mut self, name: &str) -> CliResult<BufWriter<File>> {
        fs::create_dir_all(&self.dir)?;
        let path = self.dir.join(name);
        self.written.push(path.display().to_string());
        Ok(BufWriter::new(File::create(path)?))
    }

    pub fn write_json(&mut self, name: &str, value: &Value) -> CliResult<()> {
        let mut f = self.create(name)?;
        serde_json::to_writer_pretty(&mut f, &rounded(value)).map_err(|e| CliError::Failure(e.to_string()))?;
        std::io::Write::write_all(&mut f, b"\n")?;
        Ok(())
    }

    pub fn outputs(&self) -> Vec<String> {
        self.written.clone()
    }

    /// Writes `manifest.json` listing every file produced so far.
    pub fn finish(mut self, command: &str, inputs: Value, all_passed: bool) -> CliResult<Vec<String>> {
        let manifest = RunManifest {
            command: command.to_string(),
            inputs,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            outputs: self.outputs(),
            all_passed,
        };
        let value = serde_json::to_value(&manifest).map_err(|e| CliError::Failure(e.to_string()))?;
        self.write_json("manifest.json", &value)?;
        Ok(self.written)
    }
}

/// Rounds every float in a JSON tree to 12 significant digits.
pub fn rounded(value: &Value) -> Value {
    match value {
        Value::Number(n) if n.is_f64() => {
            let v = n.as_f64().unwrap();
            format_number(v).parse::<f64>().ok().and_then(serde_json::Number::from_f64).map_or(Value::Null, Value::Number)
        }
        Value::Array(a) => Value::Array(a.iter().map(rounded).collect()),
        Value::Object(o) => Value::Object(o.iter().map(|(k, v)| (k.clone(), rounded(v))).collect()),
        other => other.clone(),
    }
}

pub fn render_json(value: &Value) -> String {
    serde_json::to_string_pretty(&rounded(value)).expect("JSON values always serialize")
}
