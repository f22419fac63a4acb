//! Fixed-format MPS export.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use super::{MilpError, MilpModel, RowSense, VarKind};

const OBJ_ROW: &str = "OBJ";

/// Mapping between model names and the ≤ 8 character names used in the file.
#[derive(Debug, Clone, PartialEq)]
pub struct NameMap {
    /// MPS name of every column, indexed like the model variables.
    pub columns: Vec<String>,
    /// MPS name of every row, indexed like the model constraints.
    pub rows: Vec<String>,
}

fn fits(name: &str) -> bool {
    !name.is_empty() && name.len() <= 8 && name.is_ascii() && !name.contains(' ') && !name.starts_with('$')
}

fn short_names<'a>(names: impl Iterator<Item = &'a str>, prefix: char, used: &mut HashSet<String>) -> Vec<String> {
    let names: Vec<&str> = names.collect();
    for n in names.iter().filter(|n| fits(n)) {
        used.insert(n.to_string());
    }
    let mut counter = 0usize;
    names
        .iter()
        .map(|&n| {
            if fits(n) {
                return n.to_string();
            }
            loop {
                counter += 1;
                let candidate = format!("{prefix}{counter:07}");
                if used.insert(candidate.clone()) {
                    return candidate;
                }
            }
        })
        .collect()
}

impl NameMap {
    pub fn new(model: &MilpModel) -> Self {
        let mut used = HashSet::from([OBJ_ROW.to_string()]);
        let rows = short_names(model.constraints().iter().map(|c| c.name.as_str()), 'R', &mut used);
        let mut used_cols = HashSet::new();
        let columns = short_names(model.variables().iter().map(|v| v.name.as_str()), 'C', &mut used_cols);
        Self { columns, rows }
    }

    /// CSV listing `kind,mps_name,name` for every renamed entity.
    pub fn to_csv(&self, model: &MilpModel) -> String {
        let mut out = String::from("kind,mps_name,name\n");
        for (short, v) in self.columns.iter().zip(model.variables()) {
            if *short != v.name {
                let _ = writeln!(out, "column,{short},{}", v.name);
            }
        }
        for (short, c) in self.rows.iter().zip(model.constraints()) {
            if *short != c.name {
                let _ = writeln!(out, "row,{short},{}", c.name);
            }
        }
        out
    }
}

/// Shortest decimal rendering of `v` that fits the 12-character numeric field.
fn num(v: f64) -> String {
    let plain = format!("{v}");
    if plain.len() <= 12 {
        return plain;
    }
    let sci = (0..=15).rev().map(|p| format!("{v:.p$e}")).find(|s| s.len() <= 12);
    let fixed = (0..=12)
        .rev()
        .map(|p| format!("{v:.p$}"))
        .find(|s| s.len() <= 12)
        .map(|s| {
            if s.contains('.') {
                s.trim_end_matches('0').trim_end_matches('.').to_string()
            } else {
                s
            }
        });
    let err = |s: &String| (s.parse::<f64>().unwrap_or(f64::INFINITY) - v).abs();
    [sci, fixed]
        .into_iter()
        .flatten()
        .filter(|s| s != "-0" && s != "0" || v == 0.0)
        .min_by(|a, b| err(a).total_cmp(&err(b)))
        .expect("finite doubles always fit in scientific notation")
}

fn line(out: &mut String, f1: &str, f2: &str, f3: &str, f4: &str, f5: &str, f6: &str) {
    let mut s = format!(" {f1:<2} {f2:<8}  {f3:<8}  {f4:>12}");
    if !f5.is_empty() {
        let _ = write!(s, "   {f5:<8}  {f6:>12}");
    }
    out.push_str(s.trim_end());
    out.push('\n');
}

/// Renders the model as a fixed-format MPS document.
pub fn write_mps_to(model: &MilpModel, problem_name: &str, names: &NameMap) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "NAME          {}", &problem_name[..problem_name.len().min(8)]);
    out.push_str("ROWS\n");
    line(&mut out, "N", OBJ_ROW, "", "", "", "");
    for (c, short) in model.constraints().iter().zip(&names.rows) {
        let sense = match c.sense {
            RowSense::Le => "L",
            RowSense::Ge => "G",
            RowSense::Eq => "E",
        };
        line(&mut out, sense, short, "", "", "", "");
    }

    // column-major entries
    let n = model.variables().len();
    let mut entries: Vec<Vec<(&str, f64)>> = vec![Vec::new(); n];
    for &(v, c) in model.objective() {
        entries[v.index()].push((OBJ_ROW, c));
    }
    for (c, short) in model.constraints().iter().zip(&names.rows) {
        for &(v, coef) in &c.terms {
            entries[v.index()].push((short.as_str(), coef));
        }
    }

    out.push_str("COLUMNS\n");
    let mut in_int = false;
    let mut marker = 0usize;
    for (j, var) in model.variables().iter().enumerate() {
        let is_int = var.kind == VarKind::Binary;
        if is_int != in_int {
            let tag = if is_int { "'INTORG'" } else { "'INTEND'" };
            line(&mut out, "", &format!("M{marker:07}"), "'MARKER'", "", tag, "");
            marker += 1;
            in_int = is_int;
        }
        let col = &names.columns[j];
        if entries[j].is_empty() {
            // keeps the column (and its position) visible to readers
            line(&mut out, "", col, OBJ_ROW, "0", "", "");
        }
        for pair in entries[j].chunks(2) {
            match pair {
                [(r1, c1), (r2, c2)] => line(&mut out, "", col, r1, &num(*c1), r2, &num(*c2)),
                [(r1, c1)] => line(&mut out, "", col, r1, &num(*c1), "", ""),
                _ => unreachable!(),
            }
        }
    }
    if in_int {
        line(&mut out, "", &format!("M{marker:07}"), "'MARKER'", "", "'INTEND'", "");
    }

    out.push_str("RHS\n");
    for (c, short) in model.constraints().iter().zip(&names.rows) {
        if c.rhs != 0.0 {
            line(&mut out, "", "RHS", short, &num(c.rhs), "", "");
        }
    }

    out.push_str("BOUNDS\n");
    for (var, col) in model.variables().iter().zip(&names.columns) {
        let (lb, ub) = (var.lb, var.ub);
        let int = var.kind == VarKind::Binary;
        if lb == f64::NEG_INFINITY && ub == f64::INFINITY {
            line(&mut out, "FR", "BND", col, "", "", "");
            continue;
        }
        if lb == ub {
            line(&mut out, "FX", "BND", col, &num(lb), "", "");
            continue;
        }
        if lb == f64::NEG_INFINITY {
            line(&mut out, "MI", "BND", col, "", "", "");
        } else if lb != 0.0 || int {
            line(&mut out, "LO", "BND", col, &num(lb), "", "");
        }
        if ub.is_finite() {
            line(&mut out, "UP", "BND", col, &num(ub), "", "");
        } else if int {
            line(&mut out, "PL", "BND", col, "", "", "");
        }
    }
    out.push_str("ENDATA\n");
    out
}

fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".names.csv");
    PathBuf::from(s)
}

/// Writes `model` to `path` in fixed MPS format, plus a `<path>.names.csv`
/// sidecar mapping shortened names back to the model names.
pub fn write_mps(model: &MilpModel, path: impl AsRef<Path>) -> Result<NameMap, MilpError> {
    let path = path.as_ref();
    let names = NameMap::new(model);
    let stem = path
        .file_stem()
        .and_then(|s| s.to_str())
        .filter(|s| !s.is_empty() && !s.contains(' '))
        .unwrap_or("MODEL");
    let io_err = |p: &Path, source| MilpError::Io {
        path: p.display().to_string(),
        source,
    };
    fs::write(path, write_mps_to(model, stem, &names)).map_err(|e| io_err(path, e))?;
    let side = sidecar_path(path);
    fs::write(&side, names.to_csv(model)).map_err(|e| io_err(&side, e))?;
    Ok(names)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_fit_field() {
        for v in [0.0, 1.0, -2.5, 1e-7, 1.0 / 3.0, -1.0 / 7.0, 123456789.123, 1e30, -6.02e-23] {
            let s = num(v);
            assert!(s.len() <= 12, "{s}");
            let back: f64 = s.parse().unwrap();
            assert!((back - v).abs() <= 1e-8 * v.abs().max(1e-300), "{v} -> {s}");
        }
    }

    #[test]
    fn long_names_are_mapped_without_collisions() {
        let mut m = MilpModel::new();
        m.add_continuous("C0000001", 0.0, 1.0).unwrap();
        m.add_continuous("a_rather_long_name", 0.0, 1.0).unwrap();
        m.add_continuous("short", 0.0, 1.0).unwrap();
        let names = NameMap::new(&m);
        assert_eq!(names.columns[0], "C0000001");
        assert_eq!(names.columns[1], "C0000002");
        assert_eq!(names.columns[2], "short");
        let csv = names.to_csv(&m);
        assert_eq!(csv, "kind,mps_name,name\ncolumn,C0000002,a_rather_long_name\n");
    }

    #[test]
    fn binary_columns_are_bracketed() {
        let mut m = MilpModel::new();
        let x = m.add_continuous("x", 0.0, 10.0).unwrap();
        let b = m.add_binary("b").unwrap();
        m.add_constraint("link", [(x, 1.0), (b, -10.0)], RowSense::Le, 0.0).unwrap();
        m.set_objective([(x, 1.0), (b, 2.0)]).unwrap();
        let text = write_mps_to(&m, "t", &NameMap::new(&m));
        let open = text.find("'INTORG'").expect("INTORG marker");
        let close = text.find("'INTEND'").expect("INTEND marker");
        let col_b = text.find("\n    b ").expect("binary column");
        assert!(open < col_b && col_b < close);
        // fixed-format field positions: row name in columns 15-22
        let entry = text.lines().find(|l| l.starts_with("    x ")).unwrap();
        assert_eq!(&entry[14..17], "OBJ");
    }
}
