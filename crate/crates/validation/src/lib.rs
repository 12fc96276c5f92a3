//! Runner and fixtures for the acceptance suite: each criterion is a
//! function returning a [`Verdict`], reported as one `PASS`/`FAIL` line.

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use mils_core::Instance;

#[derive(Debug, Clone, PartialEq)]
pub struct Verdict {
    pub pass: bool,
    pub detail: String,
}

impl Verdict {
    pub fn pass(detail: impl Into<String>) -> Self {
        Self { pass: true, detail: detail.into() }
    }

    pub fn fail(detail: impl Into<String>) -> Self {
        Self { pass: false, detail: detail.into() }
    }

    pub fn check(pass: bool, detail: impl Into<String>) -> Self {
        Self { pass, detail: detail.into() }
    }

    /// Passes only if every part passes; details are joined.
    pub fn all(parts: Vec<Verdict>) -> Self {
        let pass = parts.iter().all(|v| v.pass);
        let detail = parts
            .into_iter()
            .map(|v| format!("{}{}", if v.pass { "" } else { "[failed] " }, v.detail))
            .collect::<Vec<_>>()
            .join("; ");
        Self { pass, detail }
    }
}

pub struct Criterion {
    pub name: &'static str,
    pub run: fn() -> Verdict,
}

/// Runs every criterion whose name contains the first free command-line
/// argument (all when absent) and prints one line each.
pub fn run_all(criteria: &[Criterion]) -> ExitCode {
    let filter = std::env::args().skip(1).find(|a| !a.starts_with('-'));
    let mut failed = 0;
    let mut ran = 0;
    for c in criteria {
        if filter.as_deref().is_some_and(|f| !c.name.contains(f)) {
            continue;
        }
        let start = Instant::now();
        let v = (c.run)();
        ran += 1;
        let tag = if v.pass { "PASS" } else { "FAIL" };
        println!(
            "{tag} {}: {} ({:.1} s)",
            c.name,
            v.detail,
            start.elapsed().as_secs_f64()
        );
        failed += usize::from(!v.pass);
    }
    println!("acceptance: {} passed, {failed} failed", ran - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

/// `data/instances/<name>.tsp` in the repository.
pub fn instance_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../data/instances")
        .join(format!("{name}.tsp"))
}

/// The named benchmark instance, or `None` if its file is not in the repository.
pub fn benchmark(name: &str) -> Option<Instance> {
    let path = instance_path(name);
    path.is_file()
        .then(|| Instance::from_file(&path, None).expect("benchmark file parses"))
}
