//! prepare → brute → run → report, all through flat files.
//!
//! Every output is a pure function of its inputs: run cells may execute on
//! worker threads but each writes its own file, and reports are built from
//! files read back in sorted order.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{AlgorithmSpec, ExperimentConfig};
use super::{aggregate, evals_to_optimum, RunTrace, Statistic, TraceRow};
use crate::error::{Error, Result};
use crate::ga::run_ga;
use crate::hqga::run_hqga;
use crate::market_data::{
    compute_returns, estimate_moments, load_instance, load_prices, sample_instance, save_instance,
    ProblemInstance,
};
use crate::objective::brute_force;
use crate::record::RunResult;

pub const RUN_HEADER: [&str; 11] = [
    "algorithm",
    "instance",
    "pop",
    "seed",
    "generation",
    "evaluations",
    "best",
    "mean",
    "worst",
    "diversity",
    "best_so_far",
];
pub const AGGREGATE_HEADER: [&str; 6] = [
    "instance",
    "algorithm",
    "pop",
    "evaluations",
    "stat_mean",
    "stat_std",
];
pub const BRUTE_HEADER: [&str; 5] = ["instance", "n", "bits", "f_star", "evaluations"];
pub const SUMMARY_FILE: &str = "evals_to_optimum.csv";

/// Fixed 17-significant-digit rendering.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn csv_writer(path: &Path) -> Result<csv::Writer<fs::File>> {
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    Ok(csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(file))
}

fn finish(mut writer: csv::Writer<fs::File>, path: &Path) -> Result<()> {
    writer.flush().map_err(|e| Error::io(path, e))
}

fn check_header(reader: &mut csv::Reader<fs::File>, expected: &[&str], path: &Path) -> Result<()> {
    let header = reader.headers()?;
    if header.iter().ne(expected.iter().copied()) {
        return Err(Error::Schema(format!(
            "{}: expected header {}",
            path.display(),
            expected.join(",")
        )));
    }
    Ok(())
}

fn csv_reader(path: &Path) -> Result<csv::Reader<fs::File>> {
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    Ok(csv::Reader::from_reader(file))
}

/// Files in `dir` with the given extension, sorted by name.
fn list_files(dir: &Path, extension: &str) -> Result<Vec<PathBuf>> {
    let entries = fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    let mut files = Vec::new();
    for entry in entries {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        if path.is_file() && path.extension().is_some_and(|e| e == extension) {
            files.push(path);
        }
    }
    files.sort();
    Ok(files)
}

/// Sample one instance per subset seed from a price file and write
/// `<out>/set<seed>.json` for each.
pub fn prepare(
    prices: &Path,
    k: usize,
    gamma: f64,
    subset_seeds: &[u64],
    out: &Path,
) -> Result<Vec<PathBuf>> {
    if subset_seeds.is_empty() {
        return Err(Error::InvalidConfig("no subset seeds given".into()));
    }
    let universe = sampling_universe(prices)?;
    create_dir(out)?;
    subset_seeds
        .iter()
        .map(|&seed| {
            let instance = sample_instance(&universe, k, gamma, seed)?;
            let path = out.join(format!("{}.json", instance.label));
            save_instance(&instance, &path)?;
            Ok(path)
        })
        .collect()
}

fn sampling_universe(prices: &Path) -> Result<crate::market_data::Moments> {
    let loaded = load_prices(prices)?;
    estimate_moments(&compute_returns(&loaded.table)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BruteRow {
    pub instance: String,
    pub n: usize,
    pub bits: String,
    pub f_star: f64,
    pub evaluations: u64,
}

/// Load every `*.json` instance in `dir`, or a single file.
pub fn load_instances(path: &Path) -> Result<Vec<ProblemInstance>> {
    let files = if path.is_dir() {
        list_files(path, "json")?
    } else {
        vec![path.to_path_buf()]
    };
    files.iter().map(load_instance).collect()
}

pub fn brute(instances: &Path, out: &Path) -> Result<Vec<BruteRow>> {
    let instances = load_instances(instances)?;
    if instances.is_empty() {
        return Err(Error::Schema("no instance files found".into()));
    }
    let rows: Vec<BruteRow> = instances
        .iter()
        .map(|inst| {
            let res = brute_force(inst)?;
            Ok(BruteRow {
                instance: inst.label.clone(),
                n: inst.dim(),
                bits: res.best.to_string(),
                f_star: res.best_value,
                evaluations: res.evaluations,
            })
        })
        .collect::<Result<_>>()?;
    if let Some(parent) = out.parent().filter(|p| !p.as_os_str().is_empty()) {
        create_dir(parent)?;
    }
    let mut w = csv_writer(out)?;
    w.write_record(BRUTE_HEADER)?;
    for r in &rows {
        w.write_record([
            r.instance.clone(),
            r.n.to_string(),
            r.bits.clone(),
            fmt_f64(r.f_star),
            r.evaluations.to_string(),
        ])?;
    }
    finish(w, out)?;
    Ok(rows)
}

pub fn read_brute(path: &Path) -> Result<BTreeMap<String, BruteRow>> {
    let mut reader = csv_reader(path)?;
    check_header(&mut reader, &BRUTE_HEADER, path)?;
    let mut map = BTreeMap::new();
    for row in reader.deserialize() {
        let row: BruteRow = row?;
        map.insert(row.instance.clone(), row);
    }
    Ok(map)
}

/// Instances named by an experiment config, in label order.
pub fn config_instances(config: &ExperimentConfig) -> Result<Vec<ProblemInstance>> {
    let mut instances = Vec::new();
    if let Some(s) = &config.sampling {
        let universe = sampling_universe(&s.universe)?;
        for &seed in &s.subset_seeds {
            instances.push(sample_instance(&universe, s.k, s.gamma, seed)?);
        }
    }
    for p in &config.instances {
        instances.extend(load_instances(p)?);
    }
    instances.sort_by(|a, b| a.label.cmp(&b.label));
    if instances.windows(2).any(|w| w[0].label == w[1].label) {
        return Err(Error::InvalidConfig("duplicate instance labels".into()));
    }
    Ok(instances)
}

/// One (algorithm, instance, population, seed) cell.
#[derive(Debug, Clone)]
struct Cell<'a> {
    spec: &'a AlgorithmSpec,
    instance: &'a ProblemInstance,
    pop: usize,
    seed: u64,
}

impl Cell<'_> {
    fn file_name(&self) -> String {
        format!(
            "{}__{}__pop{:03}__seed{:06}.csv",
            self.spec.name(),
            self.instance.label,
            self.pop,
            self.seed
        )
    }

    fn execute(&self) -> Result<RunResult> {
        let n = self.instance.dim();
        match self.spec {
            AlgorithmSpec::Hqga(h) => Ok(run_hqga(self.instance, &h.config(n, self.pop, self.seed)?)?.run),
            AlgorithmSpec::Ga(g) => run_ga(self.instance, &g.config(n, self.pop, self.seed)?),
        }
    }
}

pub fn write_run_csv(run: &RunResult, path: &Path) -> Result<()> {
    let trace = RunTrace::from_run(run)?;
    let mut w = csv_writer(path)?;
    w.write_record(RUN_HEADER)?;
    for r in &trace.rows {
        w.write_record([
            trace.algorithm.clone(),
            trace.instance.clone(),
            trace.pop.to_string(),
            trace.seed.to_string(),
            r.generation.to_string(),
            r.evaluations.to_string(),
            fmt_f64(r.best),
            fmt_f64(r.mean),
            fmt_f64(r.worst),
            fmt_f64(r.diversity),
            fmt_f64(r.best_so_far),
        ])?;
    }
    finish(w, path)
}

#[derive(Debug, Deserialize)]
struct RunCsvRow {
    algorithm: String,
    instance: String,
    pop: usize,
    seed: u64,
    generation: usize,
    evaluations: u64,
    best: f64,
    mean: f64,
    worst: f64,
    diversity: f64,
    best_so_far: f64,
}

pub fn read_run_csv(path: &Path) -> Result<RunTrace> {
    let mut reader = csv_reader(path)?;
    check_header(&mut reader, &RUN_HEADER, path)?;
    let mut trace: Option<RunTrace> = None;
    for row in reader.deserialize() {
        let r: RunCsvRow = row?;
        let t = trace.get_or_insert_with(|| RunTrace {
            algorithm: r.algorithm.clone(),
            instance: r.instance.clone(),
            pop: r.pop,
            seed: r.seed,
            rows: Vec::new(),
        });
        if (t.algorithm.as_str(), t.instance.as_str(), t.pop, t.seed)
            != (r.algorithm.as_str(), r.instance.as_str(), r.pop, r.seed)
        {
            return Err(Error::Schema(format!(
                "{}: mixed runs in one file",
                path.display()
            )));
        }
        t.rows.push(TraceRow {
            generation: r.generation,
            evaluations: r.evaluations,
            best: r.best,
            mean: r.mean,
            worst: r.worst,
            diversity: r.diversity,
            best_so_far: r.best_so_far,
        });
    }
    trace.ok_or_else(|| Error::Schema(format!("{}: no rows", path.display())))
}

/// Execute every cell of the experiment and write one CSV per cell.
pub fn run(config: &ExperimentConfig, out: &Path) -> Result<Vec<PathBuf>> {
    let instances = config_instances(config)?;
    let seeds: Vec<u64> = config.seeds().collect();
    let mut cells = Vec::new();
    for spec in &config.algorithms {
        for instance in &instances {
            for &pop in spec.populations() {
                for &seed in &seeds {
                    cells.push(Cell {
                        spec,
                        instance,
                        pop,
                        seed,
                    });
                }
            }
        }
    }
    cells.sort_by_key(|c| c.file_name());
    if cells.windows(2).any(|w| w[0].file_name() == w[1].file_name()) {
        return Err(Error::InvalidConfig("duplicate run cells".into()));
    }
    create_dir(out)?;
    cells
        .par_iter()
        .map(|cell| {
            let run = cell.execute()?;
            let path = out.join(cell.file_name());
            write_run_csv(&run, &path)?;
            Ok(path)
        })
        .collect()
}

/// Summary row of the evaluations-to-optimum table.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimumSummary {
    pub instance: String,
    pub algorithm: String,
    pub pop: usize,
    pub runs: usize,
    pub successes: usize,
    pub median_evals: Option<f64>,
    pub mean_evals: Option<f64>,
    pub f_star: f64,
}

fn median(sorted: &[u64]) -> Option<f64> {
    match sorted.len() {
        0 => None,
        n if n % 2 == 1 => Some(sorted[n / 2] as f64),
        n => Some((sorted[n / 2 - 1] + sorted[n / 2]) as f64 / 2.0),
    }
}

pub fn summarize(instance: &str, traces: &[RunTrace], f_star: f64) -> OptimumSummary {
    let mut hits: Vec<u64> = traces
        .iter()
        .filter_map(|t| evals_to_optimum(t, f_star))
        .collect();
    hits.sort_unstable();
    let mean = (!hits.is_empty()).then(|| hits.iter().sum::<u64>() as f64 / hits.len() as f64);
    OptimumSummary {
        instance: instance.to_string(),
        algorithm: traces[0].algorithm.clone(),
        pop: traces[0].pop,
        runs: traces.len(),
        successes: hits.len(),
        median_evals: median(&hits),
        mean_evals: mean,
        f_star,
    }
}

pub type GroupKey = (String, String, usize);

/// Read all run CSVs in `dir`, grouped by (instance, algorithm, pop) and
/// ordered by seed within a group.
pub fn read_runs(dir: &Path) -> Result<BTreeMap<GroupKey, Vec<RunTrace>>> {
    let mut groups: BTreeMap<GroupKey, Vec<RunTrace>> = BTreeMap::new();
    for path in list_files(dir, "csv")? {
        let t = read_run_csv(&path)?;
        groups
            .entry((t.instance.clone(), t.algorithm.clone(), t.pop))
            .or_default()
            .push(t);
    }
    if groups.is_empty() {
        return Err(Error::Schema(format!("no run files in {}", dir.display())));
    }
    for traces in groups.values_mut() {
        traces.sort_by_key(|t| t.seed);
    }
    Ok(groups)
}

const REPORT_NOTES: &str = "\
stat_mean and stat_std aggregate one statistic across the seeds of each \
(instance, algorithm, pop) group at every recorded evaluation count.
stat_std is the population standard deviation (divisor R, the number of seeds).
diversity is max(fitness) - mean(fitness) over the individuals of one generation.
evals_to_optimum.csv counts a run as successful at the first generation whose \
best-so-far fitness is within 1e-12 of f_star from the brute-force table.
";

/// Aggregated convergence/diversity tables and the evaluations-to-optimum summary.
pub fn report(runs_dir: &Path, brute_csv: &Path, out: &Path) -> Result<Vec<PathBuf>> {
    let groups = read_runs(runs_dir)?;
    let optima = read_brute(brute_csv)?;
    create_dir(out)?;
    let mut written = Vec::new();

    for stat in Statistic::REPORTED {
        let path = out.join(stat.file_name());
        let mut w = csv_writer(&path)?;
        w.write_record(AGGREGATE_HEADER)?;
        for ((instance, algorithm, pop), traces) in &groups {
            let series = aggregate(traces, stat)?;
            for i in 0..series.evaluations.len() {
                w.write_record([
                    instance.clone(),
                    algorithm.clone(),
                    pop.to_string(),
                    series.evaluations[i].to_string(),
                    fmt_f64(series.mean[i]),
                    fmt_f64(series.std[i]),
                ])?;
            }
        }
        finish(w, &path)?;
        written.push(path);
    }

    let path = out.join(SUMMARY_FILE);
    let mut w = csv_writer(&path)?;
    w.write_record([
        "instance",
        "algorithm",
        "pop",
        "runs",
        "successes",
        "success_rate",
        "median_evals",
        "mean_evals",
        "f_star",
    ])?;
    for ((instance, _, _), traces) in &groups {
        let f_star = optima
            .get(instance)
            .ok_or_else(|| Error::Schema(format!("instance {instance} missing from brute-force table")))?
            .f_star;
        let s = summarize(instance, traces, f_star);
        let opt = |v: Option<f64>| v.map(fmt_f64).unwrap_or_default();
        w.write_record([
            s.instance,
            s.algorithm,
            s.pop.to_string(),
            s.runs.to_string(),
            s.successes.to_string(),
            fmt_f64(s.successes as f64 / s.runs as f64),
            opt(s.median_evals),
            opt(s.mean_evals),
            fmt_f64(s.f_star),
        ])?;
    }
    finish(w, &path)?;
    written.push(path);

    let notes = out.join("NOTES.txt");
    fs::write(&notes, REPORT_NOTES).map_err(|e| Error::io(&notes, e))?;
    written.push(notes);
    Ok(written)
}
