use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{CliError, CliResult};

/// A table written as comma-separated text with a provenance comment line
/// and a header row.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    columns: Vec<String>,
    rows: Vec<Vec<String>>,
}

/// Formats a float with the shortest representation that round-trips.
pub fn num(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else {
        format!("{v:?}")
    }
}

impl Table {
    pub fn new<S: AsRef<str>>(columns: &[S]) -> Self {
        Self { columns: columns.iter().map(|c| c.as_ref().to_string()).collect(), rows: Vec::new() }
    }

    pub fn columns(&self) -> &[String] {
        &self.columns
    }

    pub fn rows(&self) -> &[Vec<String>] {
        &self.rows
    }

    pub fn push(&mut self, row: Vec<String>) {
        assert_eq!(row.len(), self.columns.len(), "row width must match the header");
        self.rows.push(row);
    }

    pub fn render(&self, config_hash: &str, seed: u64) -> String {
        let mut out = String::new();
        writeln!(out, "# config_hash={config_hash} seed={seed}").unwrap();
        writeln!(out, "{}", self.columns.join(",")).unwrap();
        for row in &self.rows {
            writeln!(out, "{}", row.join(",")).unwrap();
        }
        out
    }

    pub fn write(&self, path: &Path, config_hash: &str, seed: u64) -> CliResult<PathBuf> {
        write_file(path, &self.render(config_hash, seed))?;
        Ok(path.to_path_buf())
    }
}

pub fn write_file(path: &Path, text: &str) -> CliResult<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}

/// Parses comma-separated text with a header row, skipping `#` comments and
/// blank lines. Errors are plain messages for the caller to wrap.
pub fn parse(text: &str) -> Result<Table, String> {
    let mut lines = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'));
    let header = lines.next().ok_or("no header row")?;
    let columns: Vec<String> = header.split(',').map(|c| c.trim().to_string()).collect();
    if columns.iter().any(String::is_empty) {
        return Err("empty column name".into());
    }
    let mut table = Table { columns, rows: Vec::new() };
    for (i, line) in lines.enumerate() {
        let row: Vec<String> = line.split(',').map(|c| c.trim().to_string()).collect();
        if row.len() != table.columns.len() {
            return Err(format!("data row {} has {} fields, header has {}", i + 1, row.len(), table.columns.len()));
        }
        table.rows.push(row);
    }
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn render_and_parse_round_trip() {
        let mut t = Table::new(&["a", "b"]);
        t.push(vec![num(0.1), num(-2.0)]);
        let text = t.render("abc", 9);
        assert!(text.starts_with("# config_hash=abc seed=9\na,b\n"));
        let back = parse(&text).unwrap();
        assert_eq!(back, t);
        assert!(parse("a,b\n1\n").is_err());
        assert!(parse("# only a comment\n").is_err());
    }
}
