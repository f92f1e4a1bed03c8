//! Machine-readable output: the JSON envelope shared by every subcommand,
//! the flat row view of a shift-bound result, and RFC 4180 CSV.
//!
//! Output is deterministic: struct fields serialize in declaration order,
//! parameters sort alphabetically, and timing is only embedded on request,
//! so identical arguments always produce identical bytes regardless of the
//! worker count.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::kappa::KappaRow;

#[derive(Debug, Serialize, Deserialize)]
pub struct OutputEnvelope<R> {
    pub command: String,
    pub parameters: BTreeMap<String, serde_json::Value>,
    pub rows: Vec<R>,
    pub version: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub elapsed_ms: Option<u64>,
}

impl<R: Serialize> OutputEnvelope<R> {
    pub fn new(
        command: &str,
        parameters: BTreeMap<String, serde_json::Value>,
        rows: Vec<R>,
    ) -> Self {
        OutputEnvelope {
            command: command.to_string(),
            parameters,
            rows,
            version: env!("CARGO_PKG_VERSION").to_string(),
            elapsed_ms: None,
        }
    }

    pub fn with_elapsed(mut self, elapsed_ms: Option<u64>) -> Self {
        self.elapsed_ms = elapsed_ms;
        self
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("envelope serializes");
        s.push('\n');
        s
    }
}

/// Flat row for `kappa`/`table` output; key set and order are part of the
/// interface.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct KappaRowOut {
    pub d: u64,
    pub kappa: u64,
    pub k1: u64,
    pub k2: u64,
    pub a1: u64,
    pub a2: u64,
    pub g: u64,
    pub s: u64,
    pub pair_h: u64,
    pub trivial_bound: u64,
}

impl From<&KappaRow> for KappaRowOut {
    fn from(row: &KappaRow) -> Self {
        KappaRowOut {
            d: row.d,
            kappa: row.kappa,
            k1: row.argmax.k1,
            k2: row.argmax.k2,
            a1: row.argmax.a1,
            a2: row.argmax.a2,
            g: row.argmax.g,
            s: row.argmax.s,
            pair_h: row.argmax.pair_h,
            trivial_bound: row.trivial_bound,
        }
    }
}

pub const KAPPA_CSV_HEADER: &str = "d,kappa,k1,k2,a1,a2,g,s,pair_h,trivial_bound";

/// RFC 4180 CSV for shift-bound rows. All fields are plain integers, so no
/// quoting is ever needed.
pub fn kappa_rows_to_csv(rows: &[KappaRowOut]) -> String {
    let mut out = String::from(KAPPA_CSV_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{}\n",
            r.d, r.kappa, r.k1, r.k2, r.a1, r.a2, r.g, r.s, r.pair_h, r.trivial_bound
        ));
    }
    out
}

/// Space-aligned human listing; `grouped` adds apostrophe thousands
/// separators for visual diffing against published tables.
pub fn kappa_rows_to_table(rows: &[KappaRowOut], grouped: bool) -> String {
    let fmt = |v: u64| {
        if grouped {
            group_digits(v)
        } else {
            v.to_string()
        }
    };
    let header = [
        "d",
        "kappa",
        "k1",
        "k2",
        "a1",
        "a2",
        "g",
        "s",
        "pair_h",
        "trivial_bound",
    ];
    let cells: Vec<[String; 10]> = rows
        .iter()
        .map(|r| {
            [
                r.d.to_string(),
                fmt(r.kappa),
                r.k1.to_string(),
                r.k2.to_string(),
                fmt(r.a1),
                fmt(r.a2),
                fmt(r.g),
                fmt(r.s),
                fmt(r.pair_h),
                fmt(r.trivial_bound),
            ]
        })
        .collect();
    let mut widths: Vec<usize> = header.iter().map(|h| h.len()).collect();
    for row in &cells {
        for (w, cell) in widths.iter_mut().zip(row.iter()) {
            *w = (*w).max(cell.len());
        }
    }
    let mut out = String::new();
    let emit = |out: &mut String, row: &[String]| {
        let line: Vec<String> = row
            .iter()
            .zip(&widths)
            .map(|(cell, w)| format!("{cell:>w$}", w = w))
            .collect();
        out.push_str(&line.join("  "));
        out.push('\n');
    };
    emit(&mut out, &header.map(String::from));
    for row in &cells {
        emit(&mut out, row);
    }
    out
}

/// `227950` -> `227'950`.
pub fn group_digits(n: u64) -> String {
    let digits = n.to_string();
    let bytes = digits.as_bytes();
    let mut out = String::with_capacity(digits.len() + digits.len() / 3);
    for (i, b) in bytes.iter().enumerate() {
        if i > 0 && (bytes.len() - i).is_multiple_of(3) {
            out.push('\'');
        }
        out.push(*b as char);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kappa::kappa;

    #[test]
    fn grouping_matches_published_style() {
        assert_eq!(group_digits(227_950), "227'950");
        assert_eq!(group_digits(3_665_785_650), "3'665'785'650");
        assert_eq!(group_digits(950), "950");
        assert_eq!(group_digits(0), "0");
        assert_eq!(group_digits(1_000), "1'000");
    }

    #[test]
    fn csv_row_shape() {
        let row = KappaRowOut::from(&kappa(2, 50).unwrap());
        let csv = kappa_rows_to_csv(&[row]);
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some(KAPPA_CSV_HEADER));
        assert_eq!(
            lines.next(),
            Some("2,227950,48,23,97,47,1,4559,227950,941094")
        );
        assert_eq!(lines.next(), None);
    }

    #[test]
    fn envelope_is_stable_and_omits_timing_by_default() {
        let mut params = BTreeMap::new();
        params.insert("d".to_string(), serde_json::json!(2));
        let env = OutputEnvelope::new(
            "kappa",
            params,
            vec![KappaRowOut::from(&kappa(2, 50).unwrap())],
        );
        let a = env.to_json();
        assert!(!a.contains("elapsed_ms"));
        let parsed: serde_json::Value = serde_json::from_str(&a).unwrap();
        assert_eq!(parsed["command"], "kappa");
        assert_eq!(parsed["rows"][0]["kappa"], 227_950);
    }
}
