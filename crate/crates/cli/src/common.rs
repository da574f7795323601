use std::fmt;
use std::fs;
use std::io::{self, Write};
use std::path::Path;
use std::time::Duration;

use anyhow::{Context, Result};
use arcolor_core::sets::elements;
use arcolor_core::{parse_rational, Mask, MetricsSnapshot, Rational};

/// Settings shared by every command.
#[derive(Debug, Clone, Copy)]
pub struct Ctx {
    pub max_nnz: u128,
}

/// An oracle or certificate check disagreed with the solver.
#[derive(Debug)]
pub struct OracleMismatch(pub String);

impl fmt::Display for OracleMismatch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "oracle mismatch: {}", self.0)
    }
}

impl std::error::Error for OracleMismatch {}

pub const REPORT_HEADER: &str =
    "command\tn\tsize\tverdict\twitness\tarith_ops\toracle_calls\titerations\twall_ms\toracle";

/// One solver run, printed as a header and a single TSV row.
#[derive(Debug)]
pub struct Report {
    pub command: &'static str,
    pub n: usize,
    /// Edge count for graphs, total member count for families.
    pub size: usize,
    pub verdict: String,
    pub witness: Option<String>,
    pub counters: MetricsSnapshot,
    pub wall: Duration,
    /// Present iff the oracle ran.
    pub oracle: Option<bool>,
}

impl Report {
    pub fn write(&self, out: &mut dyn Write) -> io::Result<()> {
        let oracle = match self.oracle {
            None => "-",
            Some(true) => "agree",
            Some(false) => "mismatch",
        };
        writeln!(out, "{REPORT_HEADER}")?;
        writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{:.3}\t{}",
            self.command,
            self.n,
            self.size,
            self.verdict,
            self.witness.as_deref().unwrap_or("-"),
            self.counters.arithmetic_ops(),
            self.counters.oracle_calls,
            self.counters.tripartition_iterations,
            self.wall.as_secs_f64() * 1e3,
            oracle
        )
    }

    /// Writes the report, then fails with [`OracleMismatch`] if the oracle
    /// disagreed.
    pub fn finish(&self, out: &mut dyn Write) -> Result<()> {
        self.write(out)?;
        if self.oracle == Some(false) {
            return Err(OracleMismatch(format!("{} verdict {} disagrees with brute force", self.command, self.verdict)).into());
        }
        Ok(())
    }
}

pub fn read_file(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

/// Writes to `path`, or to `out` when no path is given.
pub fn emit(path: Option<&Path>, text: &str, out: &mut dyn Write) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text).with_context(|| format!("cannot write {}", p.display())),
        None => Ok(out.write_all(text.as_bytes())?),
    }
}

pub fn parse_rat(s: &str) -> std::result::Result<Rational, String> {
    parse_rational(s)
}

/// Elements joined by commas; `-` for the empty set.
pub fn format_set(m: Mask) -> String {
    if m == 0 {
        return "-".into();
    }
    elements(m).map(|e| e.to_string()).collect::<Vec<_>>().join(",")
}

pub fn format_triple(parts: [Mask; 3]) -> String {
    parts.map(format_set).join("|")
}
