use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use qpm_core::{QpmError, Result};

/// Full round-trip precision, locale-independent.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

pub struct Sink {
    path: Option<PathBuf>,
    out: Box<dyn Write>,
}

impl Sink {
    pub fn open(path: Option<&Path>) -> Result<Self> {
        let out: Box<dyn Write> = match path {
            Some(p) => Box::new(BufWriter::new(File::create(p).map_err(|e| io_error(Some(p), e))?)),
            None => Box::new(BufWriter::new(io::stdout().lock())),
        };
        Ok(Sink {
            path: path.map(Path::to_path_buf),
            out,
        })
    }

    pub fn line(&mut self, text: &str) -> Result<()> {
        writeln!(self.out, "{text}").map_err(|e| io_error(self.path.as_deref(), e))
    }

    pub fn row<S: AsRef<str>>(&mut self, cells: &[S]) -> Result<()> {
        let cells: Vec<&str> = cells.iter().map(AsRef::as_ref).collect();
        self.line(&cells.join(","))
    }

    pub fn json(&mut self, value: &serde_json::Value) -> Result<()> {
        let text = serde_json::to_string_pretty(value).expect("JSON values always serialize");
        self.line(&text)
    }

    pub fn writer(&mut self) -> &mut dyn Write {
        &mut self.out
    }

    pub fn finish(mut self) -> Result<()> {
        let path = self.path.clone();
        self.out.flush().map_err(|e| io_error(path.as_deref(), e))
    }

    pub fn error(&self, e: io::Error) -> QpmError {
        io_error(self.path.as_deref(), e)
    }
}

fn io_error(path: Option<&Path>, source: io::Error) -> QpmError {
    QpmError::Io {
        path: path.map_or_else(|| PathBuf::from("<stdout>"), Path::to_path_buf),
        source,
    }
}
