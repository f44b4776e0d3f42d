use halasz_core::{LabError, Result};
use serde_json::{Map, Value};

use crate::commands::Output;
use crate::Cli;

fn flatten(prefix: &str, v: &Value, out: &mut Vec<(String, String)>) {
    let key = |k: &str| if prefix.is_empty() { k.to_string() } else { format!("{prefix}.{k}") };
    match v {
        Value::Object(m) => m.iter().for_each(|(k, v)| flatten(&key(k), v, out)),
        Value::Array(a) => a.iter().enumerate().for_each(|(i, v)| flatten(&key(&i.to_string()), v, out)),
        Value::String(s) => out.push((prefix.to_string(), s.clone())),
        Value::Null => out.push((prefix.to_string(), String::new())),
        other => out.push((prefix.to_string(), other.to_string())),
    }
}

fn csv_err(e: impl std::fmt::Display) -> LabError {
    LabError::Consistency(format!("csv output: {e}"))
}

pub fn render(cli: &Cli, out: Output) -> Result<String> {
    let provenance = serde_json::to_value(&out.provenance).map_err(|e| LabError::Consistency(e.to_string()))?;
    let mut obj = Map::new();
    obj.insert("command".into(), Value::String(out.command));
    match out.body {
        Value::Object(m) => obj.extend(m),
        other => {
            obj.insert("result".into(), other);
        }
    }
    obj.insert("provenance".into(), provenance);
    let report = Value::Object(obj);

    if cli.opts.format.as_deref() != Some("csv") {
        let mut text = serde_json::to_string_pretty(&report).map_err(|e| LabError::Consistency(e.to_string()))?;
        text.push('\n');
        return Ok(text);
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    match out.table {
        Some(t) => {
            w.write_record(&t.header).map_err(csv_err)?;
            for r in &t.rows {
                w.write_record(r).map_err(csv_err)?;
            }
        }
        None => {
            let mut rows = Vec::new();
            flatten("", &report, &mut rows);
            w.write_record(["key", "value"]).map_err(csv_err)?;
            for (k, v) in rows {
                w.write_record([k, v]).map_err(csv_err)?;
            }
        }
    }
    let bytes = w.into_inner().map_err(csv_err)?;
    String::from_utf8(bytes).map_err(csv_err)
}
