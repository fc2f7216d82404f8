//! Check bookkeeping, CSV files and the JSON summary.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde_json::json;

use crate::Failure;

pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

pub struct Report {
    command: &'static str,
    out: PathBuf,
    start: Instant,
    checks: Vec<Check>,
    outputs: Vec<String>,
}

impl Report {
    pub fn new(command: &'static str, out: &Path) -> Result<Self, Failure> {
        fs::create_dir_all(out).map_err(|e| Failure::Io(format!("{}: {e}", out.display())))?;
        Ok(Self { command, out: out.to_path_buf(), start: Instant::now(), checks: Vec::new(), outputs: Vec::new() })
    }

    pub fn check(&mut self, name: impl Into<String>, pass: bool, detail: impl Into<String>) {
        let c = Check { name: name.into(), pass, detail: detail.into() };
        println!("{} {}: {}", if c.pass { "PASS" } else { "FAIL" }, c.name, c.detail);
        self.checks.push(c);
    }

    pub fn note(&self, line: impl AsRef<str>) {
        println!("{}", line.as_ref());
    }

    pub fn csv(&mut self, name: &str, contents: &str) -> Result<(), Failure> {
        let path = self.out.join(name);
        fs::write(&path, contents).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
        self.outputs.push(name.to_string());
        Ok(())
    }

    /// Writes `<command>.json` and returns whether every check passed.
    pub fn finish(self) -> Result<bool, Failure> {
        let pass = self.checks.iter().all(|c| c.pass);
        let summary = json!({
            "command": self.command,
            "wall_time_s": self.start.elapsed().as_secs_f64(),
            "pass": pass,
            "checks": self.checks.iter().map(|c| json!({
                "name": c.name,
                "pass": c.pass,
                "detail": c.detail,
            })).collect::<Vec<_>>(),
            "outputs": self.outputs,
        });
        let path = self.out.join(format!("{}.json", self.command));
        let text = serde_json::to_string_pretty(&summary).expect("summary serializes");
        fs::write(&path, text + "\n").map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
        Ok(pass)
    }
}

/// `inf` for infinite exponents, shortest round-trip form otherwise.
pub fn num(x: f64) -> String {
    if x.is_infinite() { if x > 0.0 { "inf".into() } else { "-inf".into() } } else { format!("{x}") }
}
