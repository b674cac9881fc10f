//! CSV files that carry their provenance as leading `#` comment lines.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;

/// Writes `comments` as `# ...` lines, then a header row and `rows`. The
/// header is written even when `rows` is empty.
pub fn write_csv<R: Serialize>(
    path: &Path,
    comments: &[String],
    header: &[&str],
    rows: &[R],
) -> Result<(), csv::Error> {
    let mut out = BufWriter::new(File::create(path)?);
    for c in comments {
        for line in c.lines() {
            writeln!(out, "# {line}")?;
        }
    }
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(header)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn reader_builder() -> csv::ReaderBuilder {
    let mut b = csv::ReaderBuilder::new();
    b.comment(Some(b'#')).trim(csv::Trim::All);
    b
}

/// Reads every row of a headed CSV, skipping `#` comment lines.
pub fn read_csv<R: DeserializeOwned>(path: &Path) -> Result<Vec<R>, csv::Error> {
    reader_builder().from_path(path)?.deserialize().collect()
}
