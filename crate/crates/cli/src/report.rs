//! Report rows and the JSON / CSV / Markdown emitters.

use serde::{Deserialize, Serialize};

use crate::config::{Format, SuiteConfig};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Error,
}

impl Status {
    pub fn as_str(&self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Error => "error",
        }
    }

    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Status::Pass
        } else {
            Status::Fail
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub suite: String,
    pub case: String,
    pub status: Status,
    /// Exact defect (`"0"` when an identity holds), an error message, or a float for asymptotics.
    pub defect: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub runtime_ms: Option<f64>,
}

impl Row {
    pub fn new(suite: &str, case: impl Into<String>, status: Status, defect: impl Into<String>) -> Self {
        Row { suite: suite.into(), case: case.into(), status, defect: defect.into(), runtime_ms: None }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub version: String,
    pub command: String,
    pub config: SuiteConfig,
    pub rows: Vec<Row>,
    /// Command-specific structured output (star-product coefficients, fitted slopes, ...).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub data: Option<serde_json::Value>,
}

impl Report {
    pub fn new(command: &str, config: SuiteConfig) -> Self {
        Report { version: VERSION.into(), command: command.into(), config, rows: Vec::new(), data: None }
    }

    pub fn all_passed(&self) -> bool {
        self.rows.iter().all(|r| r.status == Status::Pass)
    }

    pub fn exit_code(&self) -> i32 {
        if self.all_passed() {
            0
        } else {
            1
        }
    }

    pub fn strip_timings(&mut self) {
        for r in &mut self.rows {
            r.runtime_ms = None;
        }
    }

    pub fn counts(&self) -> (usize, usize, usize) {
        let n = |s: Status| self.rows.iter().filter(|r| r.status == s).count();
        (n(Status::Pass), n(Status::Fail), n(Status::Error))
    }
}

fn md_cell(s: &str) -> String {
    s.replace('|', "\\|").replace('\n', " ")
}

pub fn emit(report: &Report, format: Format) -> Result<Vec<u8>, String> {
    match format {
        Format::Json => {
            let mut out = serde_json::to_vec_pretty(report).map_err(|e| e.to_string())?;
            out.push(b'\n');
            Ok(out)
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["suite", "case", "status", "defect"]).map_err(|e| e.to_string())?;
            for r in &report.rows {
                w.write_record([r.suite.as_str(), r.case.as_str(), r.status.as_str(), r.defect.as_str()])
                    .map_err(|e| e.to_string())?;
            }
            w.into_inner().map_err(|e| e.to_string())
        }
        Format::Md => {
            let (p, f, e) = report.counts();
            let mut s = format!("# fedosov-lab {} ({})\n\n", report.command, report.version);
            s.push_str(&format!("{p} pass, {f} fail, {e} error\n\n"));
            s.push_str("| suite | case | status | defect |\n|---|---|---|---|\n");
            for r in &report.rows {
                s.push_str(&format!(
                    "| {} | {} | {} | {} |\n",
                    md_cell(&r.suite),
                    md_cell(&r.case),
                    r.status.as_str(),
                    md_cell(&r.defect)
                ));
            }
            if let Some(d) = &report.data {
                let body = serde_json::to_string_pretty(d).map_err(|e| e.to_string())?;
                s.push_str(&format!("\n```json\n{body}\n```\n"));
            }
            Ok(s.into_bytes())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Report {
        let mut r = Report::new("bt-verify", SuiteConfig::default());
        r.rows.push(Row::new("diagram", "rot1 k=1", Status::Pass, "0"));
        let mut row = Row::new("tuynman", "rot2 k=3", Status::Fail, "(0,1)=(1/2*i)");
        row.runtime_ms = Some(1.5);
        r.rows.push(row);
        r
    }

    #[test]
    fn empty_json_shape() {
        let r = Report::new("report", SuiteConfig::default());
        let v: serde_json::Value = serde_json::from_slice(&emit(&r, Format::Json).unwrap()).unwrap();
        assert_eq!(v["version"], VERSION);
        assert_eq!(v["rows"], serde_json::json!([]));
    }

    #[test]
    fn csv_header_and_rows() {
        let out = String::from_utf8(emit(&sample(), Format::Csv).unwrap()).unwrap();
        let mut lines = out.lines();
        assert_eq!(lines.next(), Some("suite,case,status,defect"));
        assert_eq!(lines.next(), Some("diagram,rot1 k=1,pass,0"));
        assert_eq!(lines.next(), Some("tuynman,rot2 k=3,fail,\"(0,1)=(1/2*i)\""));
    }

    #[test]
    fn markdown_keeps_defects_verbatim() {
        let out = String::from_utf8(emit(&sample(), Format::Md).unwrap()).unwrap();
        assert!(out.contains("| tuynman | rot2 k=3 | fail | (0,1)=(1/2*i) |"));
        assert!(out.contains("1 pass, 1 fail, 0 error"));
    }

    #[test]
    fn json_round_trips_and_timings_strip() {
        let mut r = sample();
        let back: Report = serde_json::from_slice(&emit(&r, Format::Json).unwrap()).unwrap();
        assert_eq!(back, r);
        r.strip_timings();
        assert!(!String::from_utf8(emit(&r, Format::Json).unwrap()).unwrap().contains("runtime_ms"));
        assert_eq!(r.exit_code(), 1);
    }
}
