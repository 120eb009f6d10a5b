//! JSON-lines ledger of oracle values.

use qcf_core::oracle::OracleRecord;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::format::{canonical, num};

pub fn digest(text: &str) -> String {
    format!("{:x}", Sha256::digest(text.as_bytes()))
}

pub fn record_json(rec: &OracleRecord) -> Value {
    canonical(json!({
        "label": rec.label,
        "inputs": rec.inputs,
        "inputs_digest": digest(&format!("{}|{}", rec.label, rec.inputs)),
        "value": num(rec.value),
        "method": rec.method.as_str(),
        "tolerance": num(rec.tolerance),
    }))
}

/// One compact JSON object per line, in record order.
pub fn render(records: &[OracleRecord]) -> String {
    let mut out = String::new();
    for r in records {
        out.push_str(&serde_json::to_string(&record_json(r)).expect("JSON values always serialize"));
        out.push('\n');
    }
    out
}

/// A ledger line read back.
#[derive(Clone, Debug, PartialEq)]
pub struct LedgerEntry {
    pub label: String,
    pub inputs: String,
    pub inputs_digest: String,
    pub value: f64,
    pub method: String,
    pub tolerance: f64,
}

pub fn parse(text: &str) -> Result<Vec<LedgerEntry>, String> {
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .enumerate()
        .map(|(i, line)| {
            let v: Value = serde_json::from_str(line).map_err(|e| format!("line {}: {e}", i + 1))?;
            let s = |k: &str| v[k].as_str().map(str::to_string).ok_or_else(|| format!("line {}: missing {k}", i + 1));
            let f = |k: &str| v[k].as_f64().ok_or_else(|| format!("line {}: missing {k}", i + 1));
            Ok(LedgerEntry {
                label: s("label")?,
                inputs: s("inputs")?,
                inputs_digest: s("inputs_digest")?,
                value: f("value")?,
                method: s("method")?,
                tolerance: f("tolerance")?,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn digest_is_sha256() {
        assert_eq!(digest(""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    }
}
