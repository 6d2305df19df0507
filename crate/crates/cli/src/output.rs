use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{Format, RunConfig};
use crate::CliError;

pub const VERSION: &str = concat!("v", env!("CARGO_PKG_VERSION"));

/// Formats like C's `%.17g`.
pub fn g17(x: f64) -> String {
    if x == 0.0 {
        return if x.is_sign_negative() {
            "-0".into()
        } else {
            "0".into()
        };
    }
    if !x.is_finite() {
        return if x.is_nan() {
            "nan".into()
        } else if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    let sci = format!("{:.16e}", x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..17).contains(&exp) {
        let mantissa = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mantissa}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (16 - exp) as usize;
        trim_zeros(&format!("{:.*}", decimals, x)).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Columns of reals, written as CSV or as a JSON object.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(columns: &[&'static str]) -> Self {
        Self {
            columns: columns.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

/// Destination directory plus the run metadata stamped into every file.
pub struct Sink {
    dir: PathBuf,
    seed: u64,
    digest: String,
    format: Format,
    written: Vec<PathBuf>,
}

impl Sink {
    pub fn new(cfg: &RunConfig) -> Result<Self, CliError> {
        std::fs::create_dir_all(&cfg.out)
            .map_err(|e| CliError::Io(format!("cannot create {}: {e}", cfg.out.display())))?;
        Ok(Self {
            dir: cfg.out.clone(),
            seed: cfg.seed,
            digest: cfg.digest(),
            format: cfg.format,
            written: Vec::new(),
        })
    }

    pub fn written(&self) -> &[PathBuf] {
        &self.written
    }

    fn stamp(&self) -> String {
        format!(
            "pspin {VERSION} seed={} config_sha256={}",
            self.seed, self.digest
        )
    }

    fn run_value(&self) -> Value {
        json!({
            "version": VERSION,
            "seed": self.seed,
            "config_sha256": self.digest,
        })
    }

    /// Writes `stem.csv` or `stem.json` according to the configured format.
    pub fn table(&mut self, stem: &str, table: &Table) -> Result<(), CliError> {
        match self.format {
            Format::Csv => {
                let mut s = format!("# {}\n{}\n", self.stamp(), table.columns.join(","));
                for row in &table.rows {
                    let cells: Vec<String> = row.iter().map(|v| g17(*v)).collect();
                    s.push_str(&cells.join(","));
                    s.push('\n');
                }
                self.write(&format!("{stem}.csv"), &s)
            }
            Format::Json => {
                let doc = json!({
                    "run": self.run_value(),
                    "columns": table.columns,
                    "rows": table.rows,
                });
                self.write(&format!("{stem}.json"), &pretty(&doc))
            }
        }
    }

    /// Writes a JSON document wrapping `result` with the run metadata.
    pub fn json<T: Serialize>(&mut self, name: &str, result: &T) -> Result<(), CliError> {
        let doc = json!({
            "run": self.run_value(),
            "result": result,
        });
        self.write(name, &pretty(&doc))
    }

    pub fn svg(&mut self, name: &str, body: &str) -> Result<(), CliError> {
        let s = body.replacen("<svg", &format!("<!-- {} -->\n<svg", self.stamp()), 1);
        self.write(name, &s)
    }

    pub fn resolved_config(&mut self, cfg: &RunConfig) -> Result<(), CliError> {
        let text = pretty(&serde_json::to_value(cfg).expect("config serializes"));
        self.write("config.json", &text)
    }

    fn write(&mut self, name: &str, contents: &str) -> Result<(), CliError> {
        let path = self.dir.join(name);
        write_atomic(&path, contents.as_bytes())?;
        self.written.push(path);
        Ok(())
    }
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("value serializes");
    s.push('\n');
    s
}

/// Writes through a temporary file in the same directory, then renames.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let dir = path.parent().unwrap_or(Path::new("."));
    let io = |e: std::io::Error| CliError::Io(format!("{}: {e}", path.display()));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(bytes).map_err(io)?;
    tmp.as_file().sync_all().map_err(io)?;
    #[cfg(unix)]
    {
        use std::os::unix::fs::PermissionsExt;
        tmp.as_file()
            .set_permissions(std::fs::Permissions::from_mode(0o644))
            .map_err(io)?;
    }
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}
