use serde::{Deserialize, Serialize};

use super::config::Format;
use crate::error::{Error, Result};
use crate::verify::VerificationReport;

pub const SCHEMA_VERSION: u32 = 1;

/// JSON schema of [`ReportFile`].
pub const REPORT_SCHEMA: &str = include_str!("../../schema/report.schema.json");

/// Top-level report document.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReportFile {
    pub schema_version: u32,
    pub run_id: String,
    pub seed: u64,
    pub reports: Vec<VerificationReport>,
}

impl ReportFile {
    pub fn new(seed: u64, reports: Vec<VerificationReport>) -> ReportFile {
        ReportFile { schema_version: SCHEMA_VERSION, run_id: uuid::Uuid::new_v4().to_string(), seed, reports }
    }

    pub fn all_pass(&self) -> bool {
        self.reports.iter().all(|r| r.pass)
    }

    pub fn from_json(text: &str) -> Result<ReportFile> {
        let f: ReportFile = serde_json::from_str(text).map_err(|e| Error::Parse(format!("report JSON: {e}")))?;
        if f.schema_version != SCHEMA_VERSION {
            return Err(Error::Parse(format!("unsupported schema_version {}", f.schema_version)));
        }
        Ok(f)
    }

    pub fn render(&self, format: Format) -> Result<String> {
        match format {
            Format::Json => Ok(serde_json::to_string_pretty(self).expect("reports serialize") + "\n"),
            Format::Md => Ok(self.markdown()),
            Format::Csv => self.csv(),
        }
    }

    fn markdown(&self) -> String {
        let mut s = format!("run `{}`, seed {}\n\n", self.run_id, self.seed);
        s.push_str("| chain | check | pass | abs error | rel error | rel tol | abs floor | values | time (ms) |\n");
        s.push_str("|---|---|---|---|---|---|---|---|---|\n");
        for r in &self.reports {
            s.push_str(&format!(
                "| {} | {} | {} | {:.3e} | {:.3e} | {:.1e} | {:.1e} | {} | {:.1} |\n",
                r.chain,
                r.check_id,
                if r.pass { "pass" } else { "FAIL" },
                r.abs_error,
                r.rel_error,
                r.tolerance.rel_tol,
                r.tolerance.abs_floor,
                r.lhs.len(),
                r.wall_time_ms
            ));
        }
        s
    }

    fn csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| Error::Io(e.to_string());
        w.write_record([
            "chain", "check_id", "pass", "abs_error", "rel_error", "rel_tol", "abs_floor", "values", "integrator",
            "evaluations", "inputs_digest", "wall_time_ms",
        ])
        .map_err(io)?;
        for r in &self.reports {
            w.write_record([
                r.chain.clone(),
                r.check_id.clone(),
                r.pass.to_string(),
                format!("{:e}", r.abs_error),
                format!("{:e}", r.rel_error),
                format!("{:e}", r.tolerance.rel_tol),
                format!("{:e}", r.tolerance.abs_floor),
                r.lhs.len().to_string(),
                r.diagnostics.integrator.clone(),
                r.diagnostics.evaluations.to_string(),
                r.inputs_digest.clone(),
                format!("{:.3}", r.wall_time_ms),
            ])
            .map_err(io)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv is utf-8"))
    }
}
