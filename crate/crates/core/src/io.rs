//! Plain-text output helpers: 6-significant-digit CSV tables.

use std::fmt::Write as _;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use crate::error::Result;

/// Formats `v` with six significant digits. Plain decimal notation is used
/// for magnitudes in `[1e-5, 1e6)`, scientific otherwise.
pub fn sig6(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    if !v.is_finite() {
        return format!("{v}");
    }
    let e = v.abs().log10().floor() as i32;
    if (-5..6).contains(&e) {
        let decimals = (5 - e).max(0) as usize;
        format!("{v:.decimals$}")
    } else {
        format!("{v:.5e}")
    }
}

/// Comma-separated table with a header row.
#[derive(Debug, Clone, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Self {
            header: header.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push_numbers(&mut self, values: &[f64]) {
        self.rows.push(values.iter().map(|&v| sig6(v)).collect());
    }

    pub fn push(&mut self, cells: Vec<String>) {
        self.rows.push(cells);
    }

    /// Renders the table. With `timestamp` a `# generated ...` comment line
    /// comes first; it is the only non-reproducible part of the output.
    pub fn render(&self, timestamp: bool) -> String {
        let mut out = String::new();
        if timestamp {
            let secs = SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0);
            let _ = writeln!(out, "# generated unix={secs}");
        }
        let _ = writeln!(out, "{}", self.header.join(","));
        for row in &self.rows {
            let _ = writeln!(out, "{}", row.join(","));
        }
        out
    }

    pub fn write(&self, path: &Path, timestamp: bool) -> Result<()> {
        std::fs::write(path, self.render(timestamp))?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn six_significant_digits() {
        assert_eq!(sig6(-0.020705), "-0.0207050");
        assert_eq!(sig6(0.2924), "0.292400");
        assert_eq!(sig6(20.7), "20.7000");
        assert_eq!(sig6(1.04e-5), "0.0000104000");
        assert_eq!(sig6(3.2e-9), "3.20000e-9");
        assert_eq!(sig6(0.0), "0");
    }

    #[test]
    fn table_render() {
        let mut t = Table::new(["t", "x"]);
        t.push_numbers(&[0.0, 1.5]);
        assert_eq!(t.render(false), "t,x\n0,1.50000\n");
        assert!(t.render(true).starts_with("# generated"));
    }
}
