//! Run metadata and the CSV/JSON renderings of command results.

use std::collections::BTreeMap;
use std::fs;
use std::io::{self, Write};
use std::path::Path;

use serde_json::{json, Value};

use crate::ff::{Elem, Field, FieldTower};

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

/// Rows for the CSV rendering.
#[derive(Clone, Debug, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Table {
        Table { header: header.iter().map(|h| h.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }
}

/// One output file: a JSON document and its tabular form.
#[derive(Clone, Debug)]
pub struct Artifact {
    pub name: String,
    pub json: Value,
    pub table: Table,
}

/// Header fields embedded in every output.
#[derive(Clone, Debug, Default)]
pub struct Meta {
    fields: BTreeMap<String, Value>,
}

impl Meta {
    pub fn new(command: &str) -> Meta {
        let mut m = Meta::default();
        m.set("tool", json!("ntlab"));
        m.set("version", json!(env!("CARGO_PKG_VERSION")));
        m.set("command", json!(command));
        m
    }

    pub fn set(&mut self, key: &str, value: Value) {
        self.fields.insert(key.to_string(), value);
    }

    /// `p, m, q, r`, the moduli (coefficients high to low, as digit strings
    /// of the base field) and `α`.
    pub fn with_tower(mut self, tower: &FieldTower, alpha: Option<Elem>) -> Meta {
        self.set("p", json!(tower.p()));
        self.set("m", json!(tower.m()));
        self.set("q", json!(tower.q()));
        self.set("r", json!(tower.r()));
        let mut moduli = BTreeMap::new();
        if tower.m() > 1 {
            moduli.insert("fq_over_fp", modulus_digits(tower.fq(), tower.fp()));
        }
        moduli.insert("fq2_over_fq", modulus_digits(tower.fq2(), tower.fq()));
        moduli.insert("fq3_over_fq", modulus_digits(tower.fq3(), tower.fq()));
        if let Some(f4) = tower.fq4() {
            moduli.insert("fq4_over_fq2", modulus_digits(f4, tower.fq2()));
        }
        self.set("moduli", json!(moduli));
        if let Some(a) = alpha {
            self.set("alpha", json!(tower.fq3().digit_string(a)));
        }
        self
    }

    pub fn with_seed(mut self, seed: Option<u64>) -> Meta {
        self.set("seed", json!(seed));
        self
    }

    pub fn to_json(&self) -> Value {
        json!(self.fields)
    }

    fn csv_lines(&self) -> Vec<String> {
        self.fields
            .iter()
            .map(|(k, v)| match v {
                Value::String(s) => format!("# {k}: {s}"),
                other => format!("# {k}: {other}"),
            })
            .collect()
    }
}

fn modulus_digits(field: &Field, base: &Field) -> Vec<String> {
    field.modulus().iter().rev().map(|&c| base.digit_string(c)).collect()
}

pub fn render(meta: &Meta, artifact: &Artifact, format: Format) -> io::Result<Vec<u8>> {
    let mut buf = Vec::new();
    match format {
        Format::Json => {
            let mut doc = serde_json::Map::new();
            doc.insert("meta".into(), meta.to_json());
            doc.insert("artifact".into(), json!(artifact.name));
            doc.insert("data".into(), artifact.json.clone());
            serde_json::to_writer_pretty(&mut buf, &Value::Object(doc))?;
            buf.push(b'\n');
        }
        Format::Csv => {
            for line in meta.csv_lines() {
                writeln!(buf, "{line}")?;
            }
            writeln!(buf, "# artifact: {}", artifact.name)?;
            let mut w = csv::Writer::from_writer(&mut buf);
            w.write_record(&artifact.table.header)?;
            for row in &artifact.table.rows {
                w.write_record(row)?;
            }
            w.flush()?;
        }
    }
    Ok(buf)
}

/// Writes each artifact to `<dir>/<name>.<ext>`, or all of them to `stdout`.
pub fn emit(
    meta: &Meta,
    artifacts: &[Artifact],
    format: Format,
    out_dir: Option<&Path>,
    stdout: &mut dyn Write,
) -> io::Result<()> {
    if let Some(dir) = out_dir {
        fs::create_dir_all(dir)?;
    }
    for a in artifacts {
        let bytes = render(meta, a, format)?;
        match out_dir {
            Some(dir) => fs::write(dir.join(format!("{}.{}", a.name, format.extension())), bytes)?,
            None => stdout.write_all(&bytes)?,
        }
    }
    Ok(())
}
