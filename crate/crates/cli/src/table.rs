//! Named tables and their CSV / JSON serialization.

use std::io::{self, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::Format;

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Cell {
    Num(f64),
    Text(String),
    Flag(bool),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Num(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Flag(b) => b.to_string(),
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Flag(v)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: impl Into<String>, columns: Vec<String>) -> Self {
        Self {
            name: name.into(),
            columns,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

fn csv_bytes(table: &Table) -> io::Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(&table.columns)?;
    for row in &table.rows {
        w.write_record(row.iter().map(Cell::render))?;
    }
    w.into_inner().map_err(|e| io::Error::other(e.to_string()))
}

fn json_bytes(tables: &[Table]) -> io::Result<Vec<u8>> {
    let mut out = serde_json::to_vec_pretty(tables)?;
    out.push(b'\n');
    Ok(out)
}

/// Writes `tables` to `out` or stdout. Several CSV tables go to
/// `<stem>.<name>.csv` files, or to stdout as `# name` blocks separated by
/// a blank line. JSON is always one array.
pub fn emit(tables: &[Table], format: Format, out: Option<&Path>) -> io::Result<()> {
    match (format, out) {
        (Format::Json, Some(path)) => write_atomic(path, &json_bytes(tables)?),
        (Format::Json, None) => io::stdout().lock().write_all(&json_bytes(tables)?),
        (Format::Csv, Some(path)) if tables.len() == 1 => write_atomic(path, &csv_bytes(&tables[0])?),
        (Format::Csv, Some(path)) => {
            for t in tables {
                write_atomic(&table_path(path, &t.name), &csv_bytes(t)?)?;
            }
            Ok(())
        }
        (Format::Csv, None) => {
            let mut stdout = io::stdout().lock();
            if tables.len() == 1 {
                return stdout.write_all(&csv_bytes(&tables[0])?);
            }
            for (i, t) in tables.iter().enumerate() {
                if i > 0 {
                    stdout.write_all(b"\n")?;
                }
                writeln!(stdout, "# {}", t.name)?;
                stdout.write_all(&csv_bytes(t)?)?;
            }
            Ok(())
        }
    }
}

/// `out.csv` + `sigma=1` → `out.sigma=1.csv`.
pub fn table_path(base: &Path, name: &str) -> PathBuf {
    let stem = base
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let safe: String = name
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || "=._-".contains(c) {
                c
            } else {
                '_'
            }
        })
        .collect();
    let file = match base.extension() {
        Some(ext) => format!("{stem}.{safe}.{}", ext.to_string_lossy()),
        None => format!("{stem}.{safe}"),
    };
    base.with_file_name(file)
}

/// Temp file in the destination directory, then rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> io::Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    #[cfg(unix)]
    {
        use std::os::unix::fs::PermissionsExt;
        tmp.as_file().set_permissions(std::fs::Permissions::from_mode(0o644))?;
    }
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Table {
        let mut t = Table::new("demo", vec!["k [Gamma/v_g]".into(), "label".into()]);
        t.push(vec![0.5.into(), "a,b".into()]);
        t.push(vec![f64::NAN.into(), true.into()]);
        t
    }

    #[test]
    fn csv_quotes_fields() {
        let text = String::from_utf8(csv_bytes(&sample()).unwrap()).unwrap();
        assert_eq!(text, "k [Gamma/v_g],label\n0.5,\"a,b\"\nNaN,true\n");
    }

    #[test]
    fn json_schema() {
        let v: serde_json::Value = serde_json::from_slice(&json_bytes(&[sample()]).unwrap()).unwrap();
        assert_eq!(v[0]["name"], "demo");
        assert_eq!(v[0]["columns"][0], "k [Gamma/v_g]");
        assert_eq!(v[0]["rows"][0][0], 0.5);
        assert!(v[0]["rows"][1][0].is_null());
    }

    #[test]
    fn table_paths() {
        assert_eq!(
            table_path(Path::new("dir/out.csv"), "sigma=1"),
            PathBuf::from("dir/out.sigma=1.csv")
        );
        assert_eq!(table_path(Path::new("out"), "a b"), PathBuf::from("out.a_b"));
    }

    #[test]
    fn atomic_write_replaces() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.csv");
        write_atomic(&path, b"one").unwrap();
        write_atomic(&path, b"two").unwrap();
        assert_eq!(std::fs::read(&path).unwrap(), b"two");
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
    }
}
