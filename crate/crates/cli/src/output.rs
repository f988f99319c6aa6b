//! Where results go: a file (written atomically) or stdout, as CSV with a
//! `#` header line or as a JSON envelope carrying the same header fields.

use std::fmt;
use std::io::Write;
use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::{Args, ValueEnum};
use phasequant::export::{json_bytes, write_atomic};
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    /// Output file; stdout when omitted.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

/// Bad flags, reported with exit code 2.
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

pub fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

/// An output path is usable if its directory exists and it is not itself a
/// directory. Checked before any computation starts.
pub fn check_path(path: &std::path::Path) -> Result<()> {
    if path.is_dir() {
        return Err(usage(format!("{} is a directory", path.display())));
    }
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    if !dir.is_dir() {
        return Err(usage(format!("directory {} does not exist", dir.display())));
    }
    let meta = dir.metadata().with_context(|| dir.display().to_string())?;
    if meta.permissions().readonly() {
        return Err(usage(format!("directory {} is not writable", dir.display())));
    }
    Ok(())
}

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    phasequant: &'static str,
    subcommand: &'a str,
    flags: &'a str,
    data: &'a T,
}

pub struct Sink {
    pub subcommand: &'static str,
    pub flags: String,
    pub out: OutputArgs,
}

impl Sink {
    pub fn new(subcommand: &'static str, flags: String, out: OutputArgs) -> Result<Self> {
        if let Some(p) = &out.output {
            check_path(p)?;
        }
        Ok(Self { subcommand, flags, out })
    }

    pub fn header(&self) -> Vec<String> {
        vec![format!(
            "phasequant v{}, {}, {}",
            env!("CARGO_PKG_VERSION"),
            self.subcommand,
            self.flags
        )]
    }

    pub fn json(&self) -> bool {
        self.out.format == Format::Json
    }

    /// Wraps `data` with the version, subcommand and flags.
    pub fn json_bytes<T: Serialize>(&self, data: &T) -> Result<Vec<u8>> {
        let env = Envelope {
            phasequant: env!("CARGO_PKG_VERSION"),
            subcommand: self.subcommand,
            flags: &self.flags,
            data,
        };
        Ok(json_bytes(&env)?)
    }

    pub fn write(&self, bytes: &[u8]) -> Result<()> {
        match &self.out.output {
            Some(p) => write_atomic(p, bytes).with_context(|| format!("writing {}", p.display())),
            None => {
                let mut out = std::io::stdout().lock();
                out.write_all(bytes)?;
                out.flush()?;
                Ok(())
            }
        }
    }

    /// The one-line summary goes to stderr when stdout carries the data.
    pub fn summary(&self, line: &str) {
        if self.out.output.is_some() {
            println!("{line}");
        } else {
            eprintln!("{line}");
        }
    }
}
