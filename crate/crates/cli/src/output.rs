use serde::Serialize;
use serde_json::{json, Map, Number, Value};
use spikelab::mc::fmt_sig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

/// A CSV body: column names and pre-formatted cells.
#[derive(Debug, Default)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Self {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }

    /// Two-column `key,value` table from a flat JSON object.
    pub fn from_object(value: &Value) -> Self {
        let mut table = Table::new(&["key", "value"]);
        if let Value::Object(map) = value {
            for (k, v) in map {
                let cell = match v {
                    Value::Number(n) => n.as_f64().map(fmt_sig).unwrap_or_else(|| n.to_string()),
                    Value::String(s) => s.clone(),
                    Value::Null => String::new(),
                    other => other.to_string().replace(',', ";"),
                };
                table.push(vec![k.clone(), cell]);
            }
        }
        table
    }
}

pub fn num(x: f64) -> String {
    fmt_sig(x)
}

pub fn opt(x: Option<f64>) -> String {
    x.map(fmt_sig).unwrap_or_default()
}

/// A finished command result, ready to render.
pub struct Output {
    pub params: Value,
    pub seed: Option<u64>,
    pub result: Value,
    pub table: Table,
}

/// Rounds every non-integer number to 12 significant digits.
fn round_numbers(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = n.as_f64().unwrap_or(f64::NAN);
            fmt_sig(x)
                .parse::<f64>()
                .ok()
                .and_then(Number::from_f64)
                .map_or(Value::Null, Value::Number)
        }
        Value::Array(items) => Value::Array(items.into_iter().map(round_numbers).collect()),
        Value::Object(map) => Value::Object(
            map.into_iter()
                .map(|(k, v)| (k, round_numbers(v)))
                .collect::<Map<String, Value>>(),
        ),
        other => other,
    }
}

impl Output {
    pub fn render(self, format: Format, command: &str) -> String {
        let version = env!("CARGO_PKG_VERSION");
        let params = round_numbers(self.params);
        match format {
            Format::Json => {
                let doc = json!({
                    "tool": "spikelab",
                    "version": version,
                    "command": command,
                    "params": params,
                    "seed": self.seed,
                    "result": round_numbers(self.result),
                });
                let mut text = serde_json::to_string_pretty(&doc).expect("JSON values always serialize");
                text.push('\n');
                text
            }
            Format::Csv => {
                let mut text = format!("# spikelab {version}\n# command: {command}\n");
                text.push_str(&format!("# params: {params}\n"));
                match self.seed {
                    Some(seed) => text.push_str(&format!("# seed: {seed}\n")),
                    None => text.push_str("# seed: none\n"),
                }
                text.push_str(&self.table.columns.join(","));
                text.push('\n');
                for row in &self.table.rows {
                    text.push_str(&row.join(","));
                    text.push('\n');
                }
                text
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rounding_keeps_integers() {
        let v = round_numbers(json!({"a": 1.0 / 3.0, "b": 7, "c": [2.5, 16.0 / 3.0]}));
        assert_eq!(v["a"].as_f64().unwrap(), 0.333333333333);
        assert_eq!(v["b"], 7);
        assert_eq!(v["c"][1].as_f64().unwrap(), 5.33333333333);
    }
}
