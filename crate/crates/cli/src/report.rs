//! Numeric result tables.

use std::io::Write;

use crate::config::ExperimentConfig;
use crate::Result;

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub experiment: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    pub passed: bool,
    /// Human-readable description of every failing row or check.
    pub failures: Vec<String>,
}

impl Report {
    pub fn new(experiment: &str, columns: &[&str]) -> Self {
        Self {
            experiment: experiment.to_string(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
            passed: true,
            failures: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn fail(&mut self, message: impl Into<String>) {
        self.passed = false;
        self.failures.push(message.into());
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let j = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[j]).collect())
    }

    /// Header and rows only, without the configuration line.
    pub fn csv_body(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(f64::to_string).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    /// `# {config json}` followed by the CSV body.
    pub fn write_csv<W: Write>(&self, config: &ExperimentConfig, mut out: W) -> Result<()> {
        writeln!(out, "# {}", config.to_json())?;
        out.write_all(self.csv_body().as_bytes())?;
        out.flush()?;
        Ok(())
    }

    pub fn write_csv_file(&self, config: &ExperimentConfig, path: impl AsRef<std::path::Path>) -> Result<()> {
        let file = std::fs::File::create(path)?;
        self.write_csv(config, std::io::BufWriter::new(file))
    }
}
