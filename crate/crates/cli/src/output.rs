//! Header blocks and atomic file writes.

use std::fs;
use std::path::Path;

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};

/// `# key = value` lines, in insertion order.
#[derive(Debug, Default, Clone)]
pub struct Header {
    lines: Vec<String>,
}

impl Header {
    pub fn new(title: &str) -> Self {
        Self {
            lines: vec![format!("# {title}")],
        }
    }

    pub fn with_config(title: &str, config: &RunConfig) -> Self {
        let mut h = Self::new(title);
        h.set("config_hash", config.hash());
        for line in config.canonical().lines().filter(|l| !l.trim().is_empty()) {
            h.lines.push(format!("# config: {line}"));
        }
        h
    }

    pub fn set(&mut self, key: &str, value: impl HeaderValue) -> &mut Self {
        self.lines.push(format!("# {key} = {}", value.text()));
        self
    }

    pub fn render(&self) -> String {
        let mut out = self.lines.join("\n");
        out.push('\n');
        out
    }
}

/// Writes through a temporary sibling and renames it into place.
pub fn write_atomic(path: &Path, contents: &str) -> CliResult<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir).map_err(|e| CliError::file(dir, e))?;
        }
    }
    let name = path
        .file_name()
        .ok_or_else(|| CliError::file(path, "not a file path"))?
        .to_string_lossy();
    let tmp = path.with_file_name(format!(".{name}.tmp"));
    fs::write(&tmp, contents).map_err(|e| CliError::file(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| CliError::file(path, e))
}

/// Shortest text that parses back to `v`; exponent form outside
/// `[1e-4, 1e15)`.
pub fn num(v: f64) -> String {
    let a = v.abs();
    if a == 0.0 || !a.is_finite() || (1e-4..1e15).contains(&a) {
        v.to_string()
    } else {
        format!("{v:e}")
    }
}

/// Values accepted by [`Header::set`].
pub trait HeaderValue {
    fn text(&self) -> String;
}

impl HeaderValue for f64 {
    fn text(&self) -> String {
        num(*self)
    }
}

macro_rules! display_value {
    ($($t:ty),*) => {$(
        impl HeaderValue for $t {
            fn text(&self) -> String {
                self.to_string()
            }
        }
    )*};
}

display_value!(usize, u32, u64, &str, String, &String);

/// CSV row. Integers stored as `f64` print without a fractional part.
pub fn row(values: &[f64]) -> String {
    let mut out = values.iter().map(|&v| num(v)).collect::<Vec<_>>().join(",");
    out.push('\n');
    out
}
