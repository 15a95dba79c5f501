use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::Serialize;

use super::Check;
use crate::error::Result;

/// Flat statistic row: `name,d,value,stderr,threshold,verdict`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CsvRow<'a> {
    pub name: &'a str,
    pub d: Option<usize>,
    pub value: f64,
    pub stderr: Option<f64>,
    pub threshold: Option<f64>,
    pub verdict: &'static str,
}

impl<'a> From<&'a Check> for CsvRow<'a> {
    fn from(c: &'a Check) -> Self {
        Self {
            name: &c.name,
            d: c.d,
            value: c.value,
            stderr: c.stderr,
            threshold: c.threshold,
            verdict: c.verdict.as_str(),
        }
    }
}

pub fn write_checks_csv(path: &Path, checks: &[Check]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for c in checks {
        w.serialize(CsvRow::from(c))?;
    }
    if checks.is_empty() {
        w.write_record(["name", "d", "value", "stderr", "threshold", "verdict"])?;
    }
    w.flush()?;
    Ok(())
}

/// Pretty JSON. Non-finite numbers are written as `null`.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lab::Verdict;

    #[test]
    fn csv_layout() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("stats.csv");
        let checks = vec![
            Check::new("a", 1.5, Verdict::Pass).at_d(16).with_stderr(0.1).with_threshold(2.0),
            Check::skipped("b", "why"),
        ];
        write_checks_csv(&path, &checks).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "name,d,value,stderr,threshold,verdict");
        assert_eq!(lines[1], "a,16,1.5,0.1,2.0,PASS");
        assert_eq!(lines[2], "b,,NaN,,,SKIPPED");
        write_checks_csv(&path, &[]).unwrap();
        assert_eq!(std::fs::read_to_string(&path).unwrap().trim(), "name,d,value,stderr,threshold,verdict");
    }
}
