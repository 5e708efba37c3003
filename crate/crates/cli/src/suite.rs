//! Runs every scenario in a directory and tabulates the checks.

use std::collections::BTreeSet;
use std::fmt::Write;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::run::{run, RunOptions};
use crate::scenario::parse_scenario;
use crate::{CliError, Report, Result};

/// Scenario files are recognized by this extension.
pub const EXTENSION: &str = "scn";

#[derive(Clone, Debug)]
pub struct SuiteRow {
    pub file: PathBuf,
    /// The report, or why the scenario could not be run.
    pub outcome: std::result::Result<Report, String>,
}

#[derive(Clone, Debug, Default)]
pub struct SuiteSummary {
    pub rows: Vec<SuiteRow>,
}

impl SuiteSummary {
    pub fn pass(&self) -> bool {
        self.rows.iter().all(|r| r.outcome.as_ref().is_ok_and(Report::pass))
    }

    /// Check names in order of first appearance.
    pub fn columns(&self) -> Vec<String> {
        let mut seen = BTreeSet::new();
        let mut cols = Vec::new();
        for r in &self.rows {
            if let Ok(rep) = &r.outcome {
                for c in &rep.checks {
                    if seen.insert(c.name.clone()) {
                        cols.push(c.name.clone());
                    }
                }
            }
        }
        cols
    }

    /// Pass/fail matrix: one row per scenario, one column per check name.
    pub fn render(&self) -> String {
        let cols = self.columns();
        let label = |r: &SuiteRow| r.file.file_stem().map_or_else(String::new, |s| s.to_string_lossy().into_owned());
        let width = self.rows.iter().map(|r| label(r).len()).max().unwrap_or(0).max(8);
        let mut out = String::new();
        let _ = write!(out, "{:<width$}  status", "scenario");
        for (i, _) in cols.iter().enumerate() {
            let _ = write!(out, " {:>4}", format!("c{i}"));
        }
        out.push('\n');
        for r in &self.rows {
            let _ = write!(out, "{:<width$}  ", label(r));
            match &r.outcome {
                Ok(rep) => {
                    let _ = write!(out, "{:<6}", if rep.pass() { "PASS" } else { "FAIL" });
                    for c in &cols {
                        let cell = match rep.checks.iter().filter(|x| &x.name == c).map(|x| x.pass).reduce(|a, b| a && b) {
                            Some(true) => "ok",
                            Some(false) => "FAIL",
                            None => "-",
                        };
                        let _ = write!(out, " {cell:>4}");
                    }
                }
                Err(e) => {
                    let _ = write!(out, "ERROR  {e}");
                }
            }
            out.push('\n');
        }
        if !cols.is_empty() {
            out.push('\n');
        }
        for (i, c) in cols.iter().enumerate() {
            let _ = writeln!(out, "c{i} = {c}");
        }
        let failed = self.rows.iter().filter(|r| !r.outcome.as_ref().is_ok_and(Report::pass)).count();
        let _ = writeln!(out, "{} scenarios, {failed} failed", self.rows.len());
        out
    }
}

pub fn scenario_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut files: Vec<PathBuf> = fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && p.extension().is_some_and(|e| e == EXTENSION))
        .collect();
    files.sort();
    Ok(files)
}

/// Runs the scenarios concurrently. With `opts.out` set, each scenario
/// writes to `<out>/<name>` and the table goes to `<out>/summary.txt`.
pub fn suite(dir: &Path, opts: &RunOptions) -> Result<SuiteSummary> {
    if !dir.is_dir() {
        return Err(CliError::Suite(format!("{} is not a directory", dir.display())));
    }
    let files = scenario_files(dir)?;
    let parsed: Vec<_> = files
        .iter()
        .map(|f| {
            parse_scenario(f).map(|mut s| {
                if let Some(seed) = opts.seed {
                    s.set_seed(seed);
                }
                s
            })
        })
        .collect();
    let mut names = BTreeSet::new();
    let duplicate: Vec<bool> = parsed
        .iter()
        .map(|s| s.as_ref().is_ok_and(|s| !names.insert(s.name.clone())))
        .collect();
    let rows = files
        .par_iter()
        .zip(parsed.into_par_iter())
        .zip(duplicate.into_par_iter())
        .map(|((file, scn), dup)| {
            let outcome = match scn {
                Err(e) => Err(e.to_string()),
                Ok(_) if dup => Err("another scenario in this suite has the same name".into()),
                Ok(scn) => {
                    let run_opts = RunOptions {
                        out: opts.out.as_ref().map(|o| o.join(&scn.name)),
                        ..opts.clone()
                    };
                    run(&scn, &run_opts).map(|o| o.report).map_err(|e| e.to_string())
                }
            };
            SuiteRow {
                file: file.clone(),
                outcome,
            }
        })
        .collect();
    let summary = SuiteSummary { rows };
    if let Some(o) = &opts.out {
        fs::create_dir_all(o)?;
        fs::write(o.join("summary.txt"), summary.render())?;
    }
    Ok(summary)
}
