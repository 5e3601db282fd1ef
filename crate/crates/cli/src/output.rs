use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use clap::ValueEnum;
use serde::Serialize;

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Tsv,
    Jsonl,
}

/// Writes serializable rows as CSV, TSV or one JSON object per line. The
/// delimited formats always start with `header`, even when no row follows.
pub enum RowWriter<W: Write> {
    Delimited(Box<csv::Writer<W>>),
    Jsonl(W),
}

impl<W: Write> RowWriter<W> {
    pub fn new(out: W, format: Format, header: &[&str]) -> Result<Self, CliError> {
        let delimiter = match format {
            Format::Csv => b',',
            Format::Tsv => b'\t',
            Format::Jsonl => return Ok(RowWriter::Jsonl(out)),
        };
        let mut w = csv::WriterBuilder::new()
            .delimiter(delimiter)
            .has_headers(false)
            .from_writer(out);
        w.write_record(header)?;
        Ok(RowWriter::Delimited(Box::new(w)))
    }

    pub fn write<T: Serialize>(&mut self, row: &T) -> Result<(), CliError> {
        match self {
            RowWriter::Delimited(w) => w.serialize(row)?,
            RowWriter::Jsonl(w) => {
                serde_json::to_writer(&mut *w, row)?;
                w.write_all(b"\n")?;
            }
        }
        Ok(())
    }

    pub fn finish(self) -> Result<(), CliError> {
        match self {
            RowWriter::Delimited(mut w) => w.flush()?,
            RowWriter::Jsonl(mut w) => w.flush()?,
        }
        Ok(())
    }
}

pub fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|source| CliError::Create {
            path: path.to_path_buf(),
            source,
        })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[derive(Serialize)]
    struct Row {
        a: u32,
        b: Option<f64>,
    }

    fn render(format: Format) -> String {
        let mut buf = Vec::new();
        let mut w = RowWriter::new(&mut buf, format, &["a", "b"]).unwrap();
        w.write(&Row { a: 1, b: Some(0.5) }).unwrap();
        w.write(&Row { a: 2, b: None }).unwrap();
        w.finish().unwrap();
        String::from_utf8(buf).unwrap()
    }

    #[test]
    fn formats() {
        assert_eq!(render(Format::Csv), "a,b\n1,0.5\n2,\n");
        assert_eq!(render(Format::Tsv), "a\tb\n1\t0.5\n2\t\n");
        assert_eq!(
            render(Format::Jsonl),
            "{\"a\":1,\"b\":0.5}\n{\"a\":2,\"b\":null}\n"
        );
    }

    #[test]
    fn header_without_rows() {
        let mut buf = Vec::new();
        RowWriter::new(&mut buf, Format::Csv, &["x"])
            .unwrap()
            .finish()
            .unwrap();
        assert_eq!(buf, b"x\n");
    }
}
