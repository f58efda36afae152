//! End-to-end pipeline on the bundled data; report rows are checked against
//! statistics recomputed directly from the run CSVs.

use std::fs;
use std::path::{Path, PathBuf};

use hqga::bench::{pipeline, ExperimentConfig};

fn data(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data").join(rel)
}

fn rows(path: &Path) -> Vec<Vec<String>> {
    let mut r = csv::Reader::from_path(path).unwrap();
    r.records()
        .map(|rec| rec.unwrap().iter().map(String::from).collect())
        .collect()
}

fn run_pipeline(dir: &Path) {
    pipeline::prepare(&data("sample_prices.csv"), 9, 1.0, &[1, 2], &dir.join("inst")).unwrap();
    pipeline::brute(&dir.join("inst"), &dir.join("brute.csv")).unwrap();
    let cfg = dir.join("exp.toml");
    fs::write(
        &cfg,
        "instances = [\"inst\"]\nrepetitions = 4\nseed_base = 7\n\n\
         [[algorithms]]\nkind = \"hqga\"\npopulations = [3]\nmax_evaluations = 60\n\n\
         [[algorithms]]\nkind = \"ga\"\npopulations = [4]\nmax_evaluations = 60\n",
    )
    .unwrap();
    let cfg = ExperimentConfig::load(&cfg).unwrap();
    let written = pipeline::run(&cfg, &dir.join("runs")).unwrap();
    assert_eq!(written.len(), 2 * 2 * 4);
    pipeline::report(&dir.join("runs"), &dir.join("brute.csv"), &dir.join("report")).unwrap();
}

#[test]
fn bundled_instances_are_reproduced_by_prepare() {
    let dir = tempfile::tempdir().unwrap();
    pipeline::prepare(&data("sample_prices.csv"), 9, 1.0, &[1, 2, 3, 4, 5], dir.path()).unwrap();
    for i in 1..=5 {
        let name = format!("set{i}.json");
        assert_eq!(
            fs::read(dir.path().join(&name)).unwrap(),
            fs::read(data("instances").join(&name)).unwrap(),
            "{name}"
        );
    }
}

#[test]
fn first_report_rows_match_recomputation() {
    let dir = tempfile::tempdir().unwrap();
    run_pipeline(dir.path());

    // columns in the run CSV
    let col = |stat: &str| match stat {
        "convergence_best.csv" => 6,
        "convergence_mean.csv" => 7,
        "convergence_worst.csv" => 8,
        "diversity.csv" => 9,
        _ => unreachable!(),
    };
    for stat in [
        "convergence_best.csv",
        "convergence_mean.csv",
        "convergence_worst.csv",
        "diversity.csv",
    ] {
        let report = rows(&dir.path().join("report").join(stat));
        let first = &report[0];
        assert_eq!(&first[..4], ["set1", "ga", "4", "4"]);
        let values: Vec<f64> = (7..11)
            .map(|seed| {
                let path = dir
                    .path()
                    .join(format!("runs/ga__set1__pop004__seed{seed:06}.csv"));
                rows(&path)[0][col(stat)].parse().unwrap()
            })
            .collect();
        let mean = values.iter().sum::<f64>() / 4.0;
        let std = (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / 4.0).sqrt();
        let got_mean: f64 = first[4].parse().unwrap();
        let got_std: f64 = first[5].parse().unwrap();
        assert!((got_mean - mean).abs() <= 1e-15 * mean.abs().max(1.0), "{stat}");
        assert!((got_std - std).abs() <= 1e-15 * std.abs().max(1.0), "{stat}");
        if stat == "diversity.csv" {
            assert!(report.iter().all(|r| r[4].parse::<f64>().unwrap() >= 0.0));
        }
    }

    let summary = rows(&dir.path().join("report/evals_to_optimum.csv"));
    assert_eq!(summary.len(), 4);
    let brute = rows(&dir.path().join("brute.csv"));
    assert_eq!(summary[0][8], brute[0][3]);
    let budget_rows = rows(&dir.path().join("report/convergence_best.csv"));
    assert!(budget_rows.iter().all(|r| r[3].parse::<u64>().unwrap() <= 60));
}

#[test]
fn report_is_byte_identical_across_runs() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    run_pipeline(a.path());
    run_pipeline(b.path());
    for name in [
        "convergence_best.csv",
        "diversity.csv",
        "evals_to_optimum.csv",
        "NOTES.txt",
    ] {
        assert_eq!(
            fs::read(a.path().join("report").join(name)).unwrap(),
            fs::read(b.path().join("report").join(name)).unwrap()
        );
    }
}
