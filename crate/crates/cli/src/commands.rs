//! Command implementations. Each returns the process exit status.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use log::info;
use mils_core::driver::{run_batch, run_mils};
use mils_core::exact::export_lp;
use mils_core::{validate_tours, Instance, Metric, Solution, SolutionFile};
use serde::Serialize;

use crate::bks::{gap_percent, BksRegistry};
use crate::{usage, BenchArgs, Cli, Command, ExportLpArgs, GenArgs, SolveArgs, ValidateArgs};

pub fn run(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Solve(args) => solve(&args),
        Command::Bench(args) => bench(&args),
        Command::Validate(args) => validate(&args),
        Command::ExportLp(args) => export(&args),
        Command::Gen(args) => gen(&args),
    }
}

/// Input problems (bad values, unreadable or malformed files) become usage
/// errors; everything else is passed through.
fn input_error(err: mils_core::Error) -> anyhow::Error {
    use mils_core::Error as E;
    match err {
        E::InvalidArgument(_) | E::TooManySalesmen { .. } | E::Parse(_) | E::Io { .. } => {
            usage(err.to_string())
        }
        other => other.into(),
    }
}

fn load_instance(path: &Path, metric: Option<Metric>) -> Result<Instance> {
    if !path.is_file() {
        return Err(usage(format!("instance file {} not found", path.display())));
    }
    Instance::from_file(path, metric)
        .map_err(input_error)
        .with_context(|| format!("reading {}", path.display()))
}

fn check_m(inst: &Instance, m: usize) -> Result<()> {
    if m == 0 || m > inst.num_cities() {
        return Err(usage(format!(
            "--m must lie in 1..={} for {}, got {m}",
            inst.num_cities(),
            inst.name()
        )));
    }
    Ok(())
}

fn write_output(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()?;
            Ok(())
        }
    }
}

/// JSON summary printed by `solve`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub name: String,
    pub n: usize,
    pub m: usize,
    pub best: f64,
    pub avg: f64,
    pub runs: usize,
    pub time_ms: f64,
    pub iterations: u64,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bks: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub optimal: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gap_to_bks: Option<f64>,
}

fn solve(args: &SolveArgs) -> Result<i32> {
    let inst = load_instance(&args.instance, args.search.metric)?;
    check_m(&inst, args.m)?;
    if args.runs == 0 {
        return Err(usage("--runs must be at least 1"));
    }
    if args.trace.is_some() && args.runs > 1 {
        return Err(usage("--trace needs --runs 1"));
    }
    let registry = args.search.registry()?;
    let cfg = args.search.config(inst.num_cities());
    cfg.validate().map_err(input_error)?;
    info!("solving {} (n = {}, m = {})", inst.name(), inst.num_cities(), args.m);

    let (best, values, time_ms, iterations): (Solution, Vec<f64>, f64, u64) = if args.runs == 1 {
        let r = run_mils(&inst, args.m, &cfg).map_err(input_error)?;
        if let Some(path) = &args.trace {
            let file = fs::File::create(path)
                .with_context(|| format!("creating trace {}", path.display()))?;
            r.trace
                .write_csv(std::io::BufWriter::new(file))
                .with_context(|| format!("writing trace {}", path.display()))?;
        }
        let f = r.best.makespan();
        (r.best, vec![f], r.elapsed.as_secs_f64() * 1e3, r.iterations)
    } else {
        let b = run_batch(&inst, args.m, &cfg, args.runs).map_err(input_error)?;
        let ms = b.wall.as_secs_f64() * 1e3;
        (b.best_solution, b.values, ms, b.iterations.iter().sum())
    };

    if let Some(path) = &args.out {
        let file = SolutionFile::from_solution(inst.name(), &best);
        write_output(Some(path), &file.to_string())?;
    }
    let entry = registry.get(inst.name(), args.m);
    let summary = Summary {
        name: inst.name().to_string(),
        n: inst.num_cities(),
        m: args.m,
        best: best.makespan(),
        avg: values.iter().sum::<f64>() / values.len() as f64,
        runs: args.runs,
        time_ms,
        iterations,
        seed: args.search.seed,
        bks: entry.map(|e| e.bks),
        optimal: entry.map(|e| e.optimal),
        gap_to_bks: entry.map(|e| gap_percent(best.makespan(), e.bks)),
    };
    println!("{}", serde_json::to_string_pretty(&summary)?);
    Ok(0)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManifestEntry {
    pub path: PathBuf,
    pub m: usize,
}

/// Parses `<path> <m>` lines; blank lines and `#` comments are skipped.
pub fn parse_manifest(text: &str, base: &Path) -> Result<Vec<ManifestEntry>> {
    let mut entries = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        let [path, m] = fields[..] else {
            return Err(usage(format!("manifest line {}: expected `<path> <m>`", i + 1)));
        };
        let m = m
            .parse()
            .map_err(|_| usage(format!("manifest line {}: invalid m `{m}`", i + 1)))?;
        let path = Path::new(path);
        let path = if path.is_absolute() {
            path.to_path_buf()
        } else {
            base.join(path)
        };
        entries.push(ManifestEntry { path, m });
    }
    Ok(entries)
}

pub const BENCH_HEADER: [&str; 7] = ["name", "m", "bks", "best", "avg", "gap_pct", "time_ms"];

struct BenchRow {
    name: String,
    m: usize,
    bks: Option<f64>,
    best: f64,
    avg: f64,
    time_ms: f64,
}

fn bench_one(entry: &ManifestEntry, args: &BenchArgs, registry: &BksRegistry) -> Result<BenchRow> {
    let inst = load_instance(&entry.path, args.search.metric)?;
    check_m(&inst, entry.m)?;
    let cfg = args.search.config(inst.num_cities());
    let batch = run_batch(&inst, entry.m, &cfg, args.runs)?;
    Ok(BenchRow {
        name: inst.name().to_string(),
        m: entry.m,
        bks: registry.get(inst.name(), entry.m).map(|e| e.bks),
        best: batch.best,
        avg: batch.average,
        time_ms: batch.wall.as_secs_f64() * 1e3,
    })
}

fn bench(args: &BenchArgs) -> Result<i32> {
    if !args.manifest.is_file() {
        return Err(usage(format!("manifest {} not found", args.manifest.display())));
    }
    if args.runs == 0 {
        return Err(usage("--runs must be at least 1"));
    }
    let registry = args.search.registry()?;
    args.search.config(1).validate().map_err(input_error)?;
    let text = fs::read_to_string(&args.manifest)?;
    let base = args.manifest.parent().unwrap_or(Path::new("."));
    let entries = parse_manifest(&text, base)?;

    let mut out = csv::Writer::from_writer(Vec::new());
    out.write_record(BENCH_HEADER)?;
    let mut failed = 0;
    for entry in &entries {
        match bench_one(entry, args, &registry) {
            Ok(row) => {
                let bks = row.bks.map_or(String::new(), |b| b.to_string());
                let gap = row.bks.map_or(String::new(), |b| format!("{:.4}", gap_percent(row.best, b)));
                out.write_record([
                    row.name,
                    row.m.to_string(),
                    bks,
                    row.best.to_string(),
                    row.avg.to_string(),
                    gap,
                    format!("{:.0}", row.time_ms),
                ])?;
            }
            Err(err) => {
                log::error!("{}: {err:#}", entry.path.display());
                failed += 1;
                let name = entry
                    .path
                    .file_stem()
                    .map_or(String::new(), |s| s.to_string_lossy().into_owned());
                out.write_record([
                    name,
                    entry.m.to_string(),
                    String::new(),
                    "FAILED".into(),
                    String::new(),
                    String::new(),
                    String::new(),
                ])?;
            }
        }
    }
    let bytes = out.into_inner().map_err(|e| anyhow::anyhow!("{e}"))?;
    write_output(args.out.as_deref(), &String::from_utf8(bytes)?)?;
    Ok(if failed > 0 { 1 } else { 0 })
}

fn validate(args: &ValidateArgs) -> Result<i32> {
    let inst = load_instance(&args.instance, args.metric)?;
    if !args.solution.is_file() {
        return Err(usage(format!("solution file {} not found", args.solution.display())));
    }
    let text = fs::read_to_string(&args.solution)?;
    let file = SolutionFile::parse(&text)
        .map_err(|e| usage(format!("{}: {e}", args.solution.display())))?;
    let m = args.m.unwrap_or(file.m);
    if let Err(violations) = validate_tours(&inst, m, &file.tours) {
        for v in &violations {
            println!("violation: {v}");
        }
        println!("invalid: {} violation(s)", violations.len());
        return Ok(1);
    }
    let sol = Solution::from_tours(&inst, file.tours.clone()).map_err(input_error)?;
    let f = sol.makespan();
    if (f - file.objective).abs() > 1e-6 * f.max(1.0) {
        println!("violation: stated objective {} but tours give {f}", file.objective);
        println!("invalid: 1 violation(s)");
        return Ok(1);
    }
    println!("valid: {m} tours, makespan {f}");
    Ok(0)
}

fn export(args: &ExportLpArgs) -> Result<i32> {
    let inst = load_instance(&args.instance, args.metric)?;
    check_m(&inst, args.m)?;
    let lp = export_lp(&inst, args.m).map_err(input_error)?;
    write_output(args.out.as_deref(), &lp)?;
    Ok(0)
}

fn gen(args: &GenArgs) -> Result<i32> {
    let inst = Instance::generate_random(args.n, args.width, args.seed).map_err(input_error)?;
    write_output(args.out.as_deref(), &inst.to_tsplib())?;
    Ok(0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn manifest_parsing() {
        let text = "# comment\n\na.tsp 3\n/abs/b.tsp 5\n";
        let entries = parse_manifest(text, Path::new("/base")).unwrap();
        assert_eq!(
            entries,
            vec![
                ManifestEntry { path: "/base/a.tsp".into(), m: 3 },
                ManifestEntry { path: "/abs/b.tsp".into(), m: 5 },
            ]
        );
        assert!(parse_manifest("a.tsp\n", Path::new(".")).is_err());
        assert!(parse_manifest("a.tsp x\n", Path::new(".")).is_err());
    }
}
