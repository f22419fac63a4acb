use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::Context;

/// Creates `path` and writes the optional `# generated` header line.
pub fn create(path: &Path, timestamp: bool) -> anyhow::Result<BufWriter<File>> {
    let file = File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
    let mut w = BufWriter::new(file);
    if timestamp {
        let secs = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        writeln!(w, "# generated by nmg {} at unix time {secs}", env!("CARGO_PKG_VERSION"))?;
    }
    Ok(w)
}

/// Fixed six-decimal cell; empty when the value is missing or not finite.
pub fn cell(v: Option<f64>) -> String {
    match v {
        Some(x) if x.is_finite() => {
            let s = format!("{x:.6}");
            if s == "-0.000000" {
                "0.000000".into()
            } else {
                s
            }
        }
        _ => String::new(),
    }
}

/// Makes a free-form message safe for a single CSV cell.
pub fn text(s: &str) -> String {
    let flat: String = s.chars().map(|c| if matches!(c, ',' | '\n' | '\r' | '"') { ' ' } else { c }).collect();
    flat.split_whitespace().collect::<Vec<_>>().join(" ")
}
