//! Report rendering. Every command produces one [`Report`] — a list of
//! uniform entries plus metadata — which serializes either as JSON
//! (`{"entries": [...], "meta": {...}}`) or as an aligned tab-separated
//! table. Both renderings are deterministic: entries are emitted in the
//! order they were pushed and metadata keys are sorted.

use clap::ValueEnum;
use serde_json::{Map, Value};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    /// Aligned tab-separated table.
    Tsv,
    /// `{"entries": [...], "meta": {...}}`.
    Json,
}

/// A uniform tabular report with metadata and optional trailing summary
/// lines (printed only in TSV mode; the same facts live in `meta`).
#[derive(Clone, Debug)]
pub struct Report {
    columns: Vec<&'static str>,
    entries: Vec<Value>,
    meta: Map<String, Value>,
    trailer: Vec<String>,
}

impl Report {
    pub fn new(columns: &[&'static str]) -> Self {
        Report {
            columns: columns.to_vec(),
            entries: Vec::new(),
            meta: Map::new(),
            trailer: Vec::new(),
        }
    }

    /// Appends one entry; the object should carry exactly the report's
    /// columns as keys.
    pub fn push(&mut self, entry: Value) {
        debug_assert!(self.columns.iter().all(|c| entry.get(c).is_some()));
        self.entries.push(entry);
    }

    pub fn set_meta(&mut self, key: &str, value: impl Into<Value>) {
        self.meta.insert(key.to_string(), value.into());
    }

    pub fn add_trailer(&mut self, line: impl Into<String>) {
        self.trailer.push(line.into());
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => {
                let doc = Value::Object(Map::from_iter([
                    ("entries".to_string(), Value::Array(self.entries.clone())),
                    ("meta".to_string(), Value::Object(self.meta.clone())),
                ]));
                let mut out = serde_json::to_string_pretty(&doc).expect("serializable");
                out.push('\n');
                out
            }
            Format::Tsv => self.render_tsv(),
        }
    }

    fn render_tsv(&self) -> String {
        let cell = |v: &Value| match v {
            Value::String(s) => s.clone(),
            other => other.to_string(),
        };
        let mut rows: Vec<Vec<String>> = vec![self.columns.iter().map(|c| c.to_string()).collect()];
        for e in &self.entries {
            rows.push(self.columns.iter().map(|c| cell(&e[*c])).collect());
        }
        let widths: Vec<usize> = (0..self.columns.len())
            .map(|j| rows.iter().map(|r| r[j].chars().count()).max().unwrap_or(0))
            .collect();
        // Numbers align right, everything else left; a column is numeric when
        // all of its data cells are.
        let numeric: Vec<bool> = (0..self.columns.len()).map(|j| {
            self.entries.iter().all(|e| e[self.columns[j]].is_number())
        })
        .collect();
        let mut out = String::new();
        for row in &rows {
            let line: Vec<String> = row
                .iter()
                .enumerate()
                .map(|(j, c)| {
                    if numeric[j] {
                        format!("{c:>width$}", width = widths[j])
                    } else {
                        format!("{c:<width$}", width = widths[j])
                    }
                })
                .collect();
            out.push_str(line.join("\t").trim_end());
            out.push('\n');
        }
        for line in &self.trailer {
            out.push_str(line);
            out.push('\n');
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    fn sample() -> Report {
        let mut r = Report::new(&["weight", "inner", "dim"]);
        r.push(json!({"weight": 0, "inner": 0, "dim": 1}));
        r.push(json!({"weight": 10, "inner": -2, "dim": 3}));
        r.set_meta("total", 4);
        r.add_trailer("total dim = 4");
        r
    }

    #[test]
    fn json_rendering_has_entries_and_meta() {
        let text = sample().render(Format::Json);
        let doc: Value = serde_json::from_str(&text).unwrap();
        assert_eq!(doc["entries"][1]["inner"], json!(-2));
        assert_eq!(doc["meta"]["total"], json!(4));
    }

    #[test]
    fn tsv_rendering_aligns_and_appends_the_trailer() {
        let text = sample().render(Format::Tsv);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "weight\tinner\tdim");
        assert_eq!(lines[1], "     0\t    0\t  1");
        assert_eq!(lines[2], "    10\t   -2\t  3");
        assert_eq!(lines[3], "total dim = 4");
    }

    #[test]
    fn string_cells_are_left_aligned_and_unquoted() {
        let mut r = Report::new(&["check", "result"]);
        r.push(json!({"check": "square-zero", "result": "PASS"}));
        r.push(json!({"check": "lift", "result": "PASS"}));
        let text = r.render(Format::Tsv);
        assert!(text.contains("square-zero\tPASS"));
        assert!(text.contains("lift       \tPASS"));
    }

    #[test]
    fn empty_report_renders_just_the_header() {
        let r = Report::new(&["weight", "dim"]);
        assert_eq!(r.render(Format::Tsv), "weight\tdim\n");
    }
}
