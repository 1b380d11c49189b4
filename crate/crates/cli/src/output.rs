//! Report persistence: `<root>/<experiment>/report.json` plus CSV files.

use jacobi_spectral::report::ExperimentReport;
use jacobi_spectral::suite::SuiteReport;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::CliError;

pub const OUT_ENV: &str = "JACOBI_LAB_OUT";

/// `--out`, else `$JACOBI_LAB_OUT`, else `./runs`.
pub fn output_root(flag: Option<&Path>) -> PathBuf {
    flag.map(Path::to_path_buf)
        .or_else(|| std::env::var_os(OUT_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("runs"))
}

fn write(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn prepare(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))
}

/// Writes `report.json` (runtime zeroed, so reruns are byte-identical),
/// one CSV per table, `ratios.csv` when there are ratios, and
/// `timing.json` with the wall-clock runtime.
pub fn write_report(dir: &Path, report: &ExperimentReport) -> Result<Vec<PathBuf>, CliError> {
    prepare(dir)?;
    let mut files = vec![dir.join("report.json")];
    write(&files[0], &report.to_json_without_runtime())?;
    for t in &report.tables {
        let p = dir.join(format!("{}.csv", t.name));
        write(&p, &t.to_csv())?;
        files.push(p);
    }
    if !report.ratios.is_empty() {
        let p = dir.join("ratios.csv");
        write(&p, &report.ratios_csv())?;
        files.push(p);
    }
    let p = dir.join("timing.json");
    write(&p, &format!("{{\"runtime_ms\": {}}}\n", report.runtime_ms))?;
    files.push(p);
    Ok(files)
}

/// Writes the aggregate `report.json` (runtime zeroed), `criteria.csv` with
/// verdicts and runtimes, and each criterion's reports under
/// `criterion-NN/<index>-<experiment>/`.
pub fn write_suite(dir: &Path, suite: &SuiteReport) -> Result<(), CliError> {
    prepare(dir)?;
    write(&dir.join("report.json"), &suite.without_runtime().to_json())?;
    write(&dir.join("criteria.csv"), &suite.summary_csv())?;
    for c in &suite.criteria {
        for (i, r) in c.reports.iter().enumerate() {
            let sub = dir.join(format!("criterion-{:02}", c.id)).join(format!("{i:02}-{}", r.experiment));
            write_report(&sub, r)?;
        }
    }
    Ok(())
}
