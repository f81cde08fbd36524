use std::fmt::Write as _;
use std::fs;

use num_complex::Complex64;
use serde_json::{json, Value};

use crate::{Failure, Format, Opts};

/// Shortest round-trip form, always with a decimal point or exponent.
pub fn num(x: f64) -> String {
    // -0.0 prints as 0.0
    format!("{:?}", x + 0.0)
}

pub fn cjson(z: Complex64) -> Value {
    json!([z.re, z.im])
}

/// CSV with a header row; every field is already formatted.
pub struct Table {
    text: String,
}

impl Table {
    pub fn new(header: &[&str]) -> Table {
        Table { text: header.join(",") + "\n" }
    }

    pub fn row(&mut self, fields: &[String]) {
        let _ = writeln!(self.text, "{}", fields.join(","));
    }

    pub fn into_string(self) -> String {
        self.text
    }
}

/// A command's result in both forms; the format picks one.
pub struct Artifact {
    pub json: Value,
    pub csv: Option<String>,
}

impl Artifact {
    pub fn render(&self, format: Format) -> Result<String, Failure> {
        match format {
            Format::Json => {
                let mut doc = self.json.clone();
                positive_zeros(&mut doc);
                if let Value::Object(map) = &mut doc {
                    map.entry("schema_version").or_insert(json!(fzeta_core::SCHEMA_VERSION));
                }
                Ok(serde_json::to_string_pretty(&doc).expect("serializable") + "\n")
            }
            Format::Csv => self.csv.clone().ok_or_else(|| Failure::config("this command has no CSV form; use --format json")),
        }
    }
}

/// -0.0 becomes 0.0, as in `num`.
fn positive_zeros(v: &mut Value) {
    match v {
        Value::Number(n) if n.as_f64() == Some(0.0) && n.is_f64() => *v = json!(0.0),
        Value::Array(a) => a.iter_mut().for_each(positive_zeros),
        Value::Object(m) => m.values_mut().for_each(positive_zeros),
        _ => {}
    }
}

pub fn emit(opts: &Opts, artifact: &Artifact, default: Format) -> Result<(), Failure> {
    let text = artifact.render(opts.format.unwrap_or(default))?;
    match &opts.out {
        Some(path) => fs::write(path, text).map_err(|e| Failure::config(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}
