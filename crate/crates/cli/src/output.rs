//! CSV sinks with a leading `#` comment row that records the run.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};

pub struct CsvSink {
    out: Box<dyn Write>,
    width: usize,
}

impl CsvSink {
    /// Opens `path`, or stdout when `path` is `None`, and writes the comment
    /// and header rows.
    pub fn create(path: Option<&Path>, comment: &str, header: &[&str]) -> Result<Self> {
        let out: Box<dyn Write> = match path {
            Some(p) => Box::new(BufWriter::new(
                File::create(p).with_context(|| format!("cannot create {}", p.display()))?,
            )),
            None => Box::new(BufWriter::new(io::stdout().lock())),
        };
        Self::with_writer(out, comment, header)
    }

    pub fn stderr(comment: &str, header: &[&str]) -> Result<Self> {
        Self::with_writer(Box::new(io::stderr()), comment, header)
    }

    fn with_writer(out: Box<dyn Write>, comment: &str, header: &[&str]) -> Result<Self> {
        let mut sink = Self { out, width: header.len() };
        writeln!(sink.out, "# {comment}")?;
        writeln!(sink.out, "{}", header.join(","))?;
        Ok(sink)
    }

    pub fn row(&mut self, fields: &[Field]) -> Result<()> {
        debug_assert_eq!(fields.len(), self.width);
        let line: Vec<String> = fields.iter().map(Field::render).collect();
        writeln!(self.out, "{}", line.join(","))?;
        Ok(())
    }

    pub fn finish(mut self) -> Result<()> {
        self.out.flush()?;
        Ok(())
    }
}

pub enum Field {
    F(f64),
    U(u64),
    S(String),
}

impl Field {
    /// Floats use Rust's shortest representation that parses back exactly.
    fn render(&self) -> String {
        match self {
            Field::F(v) => format!("{v:?}"),
            Field::U(v) => v.to_string(),
            Field::S(v) => v.clone(),
        }
    }
}

/// `run.csv` -> `run_summary.csv`.
pub fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("out");
    let ext = path.extension().and_then(|s| s.to_str()).unwrap_or("csv");
    path.with_file_name(format!("{stem}_{suffix}.{ext}"))
}
