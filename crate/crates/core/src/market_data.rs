//! Price ingestion, daily returns, moment estimation and instance files.
//!
//! Price files are plain CSV with a `date` column followed by one column per
//! ticker. Rows that miss a value for any requested ticker are dropped rather
//! than imputed, so Σ is always computed over a common set of dates.

use std::collections::HashSet;
use std::fs;
use std::path::Path;

use chrono::NaiveDate;
use nalgebra::DMatrix;
use rand::seq::index;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;

/// Tolerance on |σ_ij − σ_ji| accepted when loading an instance.
pub const SYMMETRY_TOL: f64 = 1e-12;
/// Smallest eigenvalue accepted for Σ when loading an instance.
pub const PSD_TOL: f64 = -1e-9;
pub const DEFAULT_GAMMA: f64 = 1.0;

/// Aligned adjusted-close prices, one row per date.
#[derive(Debug, Clone, PartialEq)]
pub struct PriceTable {
    pub dates: Vec<NaiveDate>,
    pub tickers: Vec<String>,
    pub prices: Vec<Vec<f64>>,
}

/// Result of [`load_prices`]: the table plus how many dates were dropped
/// because of missing cells.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadedPrices {
    pub table: PriceTable,
    pub dropped_rows: usize,
}

/// Simple daily returns. `dates[t]` is the date of the later price in the pair.
#[derive(Debug, Clone, PartialEq)]
pub struct ReturnTable {
    pub dates: Vec<NaiveDate>,
    pub tickers: Vec<String>,
    pub returns: Vec<Vec<f64>>,
}

/// Mean vector and covariance matrix of a return table.
#[derive(Debug, Clone, PartialEq)]
pub struct Moments {
    pub tickers: Vec<String>,
    pub mu: Vec<f64>,
    pub sigma: Vec<Vec<f64>>,
}

/// One binary mean-variance optimization instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemInstance {
    pub label: String,
    pub tickers: Vec<String>,
    pub mu: Vec<f64>,
    pub sigma: Vec<Vec<f64>>,
    pub gamma: f64,
}

impl ProblemInstance {
    pub fn new(
        label: impl Into<String>,
        tickers: Vec<String>,
        mu: Vec<f64>,
        sigma: Vec<Vec<f64>>,
        gamma: f64,
    ) -> Result<Self> {
        let instance = ProblemInstance {
            label: label.into(),
            tickers,
            mu,
            sigma,
            gamma,
        };
        instance.validate()?;
        Ok(instance)
    }

    /// Number of assets.
    pub fn dim(&self) -> usize {
        self.mu.len()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.mu.len();
        let bad = |msg: String| Err(Error::InvalidInstance(msg));
        if n == 0 {
            return bad("empty instance".into());
        }
        if self.tickers.len() != n {
            return bad(format!("{} tickers for {} means", self.tickers.len(), n));
        }
        let distinct: HashSet<&str> = self.tickers.iter().map(String::as_str).collect();
        if distinct.len() != n {
            return bad("duplicate tickers".into());
        }
        if !self.gamma.is_finite() || self.gamma < 0.0 {
            return bad(format!("gamma must be finite and >= 0, got {}", self.gamma));
        }
        if self.mu.iter().any(|m| !m.is_finite()) {
            return bad("non-finite mean return".into());
        }
        if self.sigma.len() != n || self.sigma.iter().any(|row| row.len() != n) {
            return bad(format!("sigma must be {n}x{n}"));
        }
        for i in 0..n {
            for j in 0..n {
                let (a, b) = (self.sigma[i][j], self.sigma[j][i]);
                if !a.is_finite() {
                    return bad(format!("non-finite sigma[{i}][{j}]"));
                }
                if (a - b).abs() > SYMMETRY_TOL {
                    return bad(format!("sigma not symmetric at ({i}, {j})"));
                }
            }
        }
        let min_eig = smallest_eigenvalue(&self.sigma);
        if min_eig < PSD_TOL {
            return bad(format!(
                "sigma not positive semidefinite (eigenvalue {min_eig:e})"
            ));
        }
        Ok(())
    }
}

fn smallest_eigenvalue(sigma: &[Vec<f64>]) -> f64 {
    let n = sigma.len();
    let m = DMatrix::from_fn(n, n, |i, j| sigma[i][j]);
    m.symmetric_eigenvalues()
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

/// Load every ticker column of a price CSV.
pub fn load_prices(path: impl AsRef<Path>) -> Result<LoadedPrices> {
    load_prices_for(path, None)
}

/// Load a price CSV, keeping only `tickers` when given. A date is dropped when
/// any kept ticker has a blank cell on it.
pub fn load_prices_for(path: impl AsRef<Path>, tickers: Option<&[String]>) -> Result<LoadedPrices> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_prices(&text, tickers)
}

pub fn parse_prices(text: &str, wanted: Option<&[String]>) -> Result<LoadedPrices> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());

    let header = reader
        .headers()
        .map_err(|e| Error::MalformedHeader(e.to_string()))?
        .clone();
    if header.len() < 2 || !header[0].eq_ignore_ascii_case("date") {
        return Err(Error::MalformedHeader("expected `date,<ticker>,...`".to_string()));
    }
    let all: Vec<String> = header.iter().skip(1).map(str::to_string).collect();
    if all.iter().any(String::is_empty) {
        return Err(Error::MalformedHeader("empty ticker name".into()));
    }
    if all.iter().collect::<HashSet<_>>().len() != all.len() {
        return Err(Error::MalformedHeader("duplicate ticker".into()));
    }

    let columns: Vec<usize> = match wanted {
        None => (0..all.len()).collect(),
        Some(list) => list
            .iter()
            .map(|t| {
                all.iter()
                    .position(|a| a == t)
                    .ok_or_else(|| Error::MalformedHeader(format!("ticker {t} not in file")))
            })
            .collect::<Result<_>>()?,
    };
    let tickers: Vec<String> = columns.iter().map(|&c| all[c].clone()).collect();

    let mut dates = Vec::new();
    let mut prices = Vec::new();
    let mut dropped_rows = 0;
    for (i, record) in reader.records().enumerate() {
        let row = i + 2;
        let record = record.map_err(|e| Error::MalformedRow {
            row,
            reason: e.to_string(),
        })?;
        let date = NaiveDate::parse_from_str(&record[0], "%Y-%m-%d").map_err(|e| Error::MalformedRow {
            row,
            reason: format!("bad date {:?}: {e}", &record[0]),
        })?;

        let mut values = Vec::with_capacity(columns.len());
        let mut missing = false;
        for &c in &columns {
            let cell = &record[c + 1];
            if cell.is_empty() {
                missing = true;
                continue;
            }
            let value: f64 = cell.parse().map_err(|_| Error::NonNumericPrice {
                row,
                column: all[c].clone(),
                value: cell.to_string(),
            })?;
            if !value.is_finite() {
                return Err(Error::NonNumericPrice {
                    row,
                    column: all[c].clone(),
                    value: cell.to_string(),
                });
            }
            if value <= 0.0 {
                return Err(Error::NonPositivePrice {
                    row,
                    column: all[c].clone(),
                    value,
                });
            }
            values.push(value);
        }
        if missing {
            dropped_rows += 1;
            continue;
        }
        if let Some(&last) = dates.last() {
            if date <= last {
                return Err(Error::MalformedRow {
                    row,
                    reason: format!("date {date} not after {last}"),
                });
            }
        }
        dates.push(date);
        prices.push(values);
    }

    if dates.len() < 2 {
        return Err(Error::TooFewRows {
            needed: 2,
            found: dates.len(),
        });
    }
    Ok(LoadedPrices {
        table: PriceTable {
            dates,
            tickers,
            prices,
        },
        dropped_rows,
    })
}

/// r_t = P_t / P_{t−1} − 1 for every ticker.
pub fn compute_returns(prices: &PriceTable) -> Result<ReturnTable> {
    if prices.prices.len() < 2 {
        return Err(Error::TooFewRows {
            needed: 2,
            found: prices.prices.len(),
        });
    }
    let returns = prices
        .prices
        .windows(2)
        .map(|pair| {
            pair[1]
                .iter()
                .zip(&pair[0])
                .map(|(now, prev)| now / prev - 1.0)
                .collect()
        })
        .collect();
    Ok(ReturnTable {
        dates: prices.dates[1..].to_vec(),
        tickers: prices.tickers.clone(),
        returns,
    })
}

/// Column means and sample covariance (T − 1 denominator).
pub fn estimate_moments(returns: &ReturnTable) -> Result<Moments> {
    let t = returns.returns.len();
    if t < 2 {
        return Err(Error::TooFewRows { needed: 2, found: t });
    }
    let n = returns.tickers.len();
    let mut mu = vec![0.0; n];
    for row in &returns.returns {
        for (m, r) in mu.iter_mut().zip(row) {
            *m += r;
        }
    }
    for m in &mut mu {
        *m /= t as f64;
    }

    let mut sigma = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in i..n {
            let s: f64 = returns
                .returns
                .iter()
                .map(|row| (row[i] - mu[i]) * (row[j] - mu[j]))
                .sum();
            let c = s / (t - 1) as f64;
            sigma[i][j] = c;
            sigma[j][i] = c;
        }
    }
    Ok(Moments {
        tickers: returns.tickers.clone(),
        mu,
        sigma,
    })
}

/// Draw `k` distinct tickers uniformly without replacement and cut the
/// matching sub-vector and principal submatrix. Tickers keep universe order.
pub fn sample_instance(universe: &Moments, k: usize, gamma: f64, seed: u64) -> Result<ProblemInstance> {
    let available = universe.tickers.len();
    if k == 0 {
        return Err(Error::InvalidConfig("subset size must be >= 1".into()));
    }
    if k > available {
        return Err(Error::SubsetTooLarge { k, available });
    }
    let mut rng = rng::seeded(seed);
    let mut picked = index::sample(&mut rng, available, k).into_vec();
    picked.sort_unstable();

    let tickers = picked.iter().map(|&i| universe.tickers[i].clone()).collect();
    let mu = picked.iter().map(|&i| universe.mu[i]).collect();
    let sigma = picked
        .iter()
        .map(|&i| picked.iter().map(|&j| universe.sigma[i][j]).collect())
        .collect();
    ProblemInstance::new(format!("set{seed}"), tickers, mu, sigma, gamma)
}

pub fn save_instance(instance: &ProblemInstance, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut text = serde_json::to_string_pretty(instance)?;
    text.push('\n');
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn load_instance(path: impl AsRef<Path>) -> Result<ProblemInstance> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let instance: ProblemInstance = serde_json::from_str(&text)?;
    instance.validate()?;
    Ok(instance)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table(tickers: &[&str], rows: &[&[f64]]) -> PriceTable {
        let start = NaiveDate::from_ymd_opt(2024, 1, 1).unwrap();
        PriceTable {
            dates: (0..rows.len())
                .map(|i| start + chrono::Days::new(i as u64))
                .collect(),
            tickers: tickers.iter().map(|s| s.to_string()).collect(),
            prices: rows.iter().map(|r| r.to_vec()).collect(),
        }
    }

    #[test]
    fn parses_two_rows() {
        let loaded = parse_prices("date,A\n2024-01-01,100\n2024-01-02,105\n", None).unwrap();
        assert_eq!(loaded.table.prices, vec![vec![100.0], vec![105.0]]);
        assert_eq!(loaded.table.tickers, vec!["A"]);
        assert_eq!(loaded.dropped_rows, 0);
    }

    #[test]
    fn blank_cell_drops_row() {
        let csv = "date,A,B\n2024-01-01,100,50\n2024-01-02,101,\n2024-01-03,102,51\n";
        let loaded = parse_prices(csv, None).unwrap();
        assert_eq!(loaded.dropped_rows, 1);
        assert_eq!(loaded.table.dates.len(), 2);
        assert_eq!(loaded.table.prices[1], vec![102.0, 51.0]);

        // the blank only matters when its ticker is requested
        let only_a = parse_prices(csv, Some(&["A".to_string()])).unwrap();
        assert_eq!(only_a.dropped_rows, 0);
        assert_eq!(only_a.table.dates.len(), 3);
    }

    #[test]
    fn rejects_bad_input() {
        let neg = parse_prices("date,A\n2024-01-01,100\n2024-01-02,-3.0\n", None);
        assert!(matches!(neg, Err(Error::NonPositivePrice { .. })));
        let zero = parse_prices("date,A\n2024-01-01,0\n2024-01-02,1\n", None);
        assert!(matches!(zero, Err(Error::NonPositivePrice { .. })));
        let text = parse_prices("date,A\n2024-01-01,abc\n2024-01-02,1\n", None);
        assert!(matches!(text, Err(Error::NonNumericPrice { .. })));
        let header = parse_prices("day,A\n2024-01-01,1\n2024-01-02,1\n", None);
        assert!(matches!(header, Err(Error::MalformedHeader(_))));
        let short = parse_prices("date,A\n2024-01-01,1\n", None);
        assert!(matches!(short, Err(Error::TooFewRows { .. })));
        let dropped = parse_prices("date,A,B\n2024-01-01,1,\n2024-01-02,1,2\n", None);
        assert!(matches!(dropped, Err(Error::TooFewRows { found: 1, .. })));
        let order = parse_prices("date,A\n2024-01-02,1\n2024-01-01,1\n", None);
        assert!(matches!(order, Err(Error::MalformedRow { .. })));
    }

    #[test]
    fn returns_follow_formula() {
        let r = compute_returns(&table(&["A"], &[&[100.0], &[105.0]])).unwrap();
        assert_eq!(r.returns, vec![vec![105.0 / 100.0 - 1.0]]);
        assert!((r.returns[0][0] - 0.05).abs() < 1e-15);

        let r = compute_returns(&table(&["A"], &[&[100.0], &[110.0], &[99.0]])).unwrap();
        assert!((r.returns[0][0] - 0.10).abs() < 1e-15);
        assert!((r.returns[1][0] + 0.10).abs() < 1e-15);

        let r = compute_returns(&table(&["A"], &[&[50.0], &[50.0], &[50.0]])).unwrap();
        assert_eq!(r.returns, vec![vec![0.0], vec![0.0]]);
        assert_eq!(r.dates.len(), 2);

        assert!(compute_returns(&table(&["A"], &[&[50.0]])).is_err());
    }

    #[test]
    fn two_point_moments() {
        let r = ReturnTable {
            dates: vec![NaiveDate::MIN; 2],
            tickers: vec!["A".into(), "B".into()],
            returns: vec![vec![0.10, 0.10], vec![-0.10, -0.10]],
        };
        let m = estimate_moments(&r).unwrap();
        assert_eq!(m.mu, vec![0.0, 0.0]);
        assert!((m.sigma[0][0] - 0.02).abs() < 1e-16);
        assert_eq!(m.sigma[0][1], m.sigma[0][0]);
        assert_eq!(m.sigma[1][0], m.sigma[1][1]);

        let single = ReturnTable {
            returns: vec![vec![0.1, 0.1]],
            dates: vec![NaiveDate::MIN],
            ..r
        };
        assert!(estimate_moments(&single).is_err());
    }

    fn universe(n: usize) -> Moments {
        let tickers = (0..n).map(|i| format!("T{i:02}")).collect();
        let mu = (0..n).map(|i| i as f64 * 1e-4).collect();
        let sigma = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        if i == j {
                            1.0 + i as f64
                        } else {
                            0.01 * (i + j) as f64
                        }
                    })
                    .collect()
            })
            .collect();
        Moments { tickers, mu, sigma }
    }

    #[test]
    fn sampling_is_forced_and_deterministic() {
        let u = universe(9);
        for seed in [0, 7, 123] {
            let inst = sample_instance(&u, 9, 1.0, seed).unwrap();
            assert_eq!(inst.tickers, u.tickers);
        }
        let u = universe(20);
        assert_eq!(
            sample_instance(&u, 9, 1.0, 5).unwrap(),
            sample_instance(&u, 9, 1.0, 5).unwrap()
        );
        assert!(matches!(
            sample_instance(&u, 21, 1.0, 5),
            Err(Error::SubsetTooLarge { .. })
        ));
    }

    #[test]
    fn submatrices_index_the_universe() {
        let u = universe(20);
        for seed in 1..=5 {
            let inst = sample_instance(&u, 9, 1.0, seed).unwrap();
            let idx: Vec<usize> = inst
                .tickers
                .iter()
                .map(|t| u.tickers.iter().position(|x| x == t).unwrap())
                .collect();
            for (a, &i) in idx.iter().enumerate() {
                assert_eq!(inst.mu[a], u.mu[i]);
                for (b, &j) in idx.iter().enumerate() {
                    assert_eq!(inst.sigma[a][b], u.sigma[i][j]);
                }
            }
        }
    }

    #[test]
    fn instance_file_round_trip_and_rejections() {
        let dir = tempfile::tempdir().unwrap();
        let inst = sample_instance(&universe(12), 5, 0.75, 3).unwrap();
        let path = dir.path().join("inst.json");
        save_instance(&inst, &path).unwrap();
        assert_eq!(load_instance(&path).unwrap(), inst);

        let mut asym = serde_json::to_value(&inst).unwrap();
        asym["sigma"][0][1] = serde_json::json!(0.5);
        std::fs::write(&path, asym.to_string()).unwrap();
        assert!(matches!(load_instance(&path), Err(Error::InvalidInstance(_))));

        let mut neg = serde_json::to_value(&inst).unwrap();
        neg["gamma"] = serde_json::json!(-1.0);
        std::fs::write(&path, neg.to_string()).unwrap();
        assert!(matches!(load_instance(&path), Err(Error::InvalidInstance(_))));

        std::fs::write(&path, r#"{"label":"x","tickers":["A"]}"#).unwrap();
        assert!(matches!(load_instance(&path), Err(Error::Schema(_))));
    }

    #[test]
    fn rejects_indefinite_sigma() {
        let err = ProblemInstance::new(
            "x",
            vec!["A".into(), "B".into()],
            vec![0.0, 0.0],
            vec![vec![1.0, 2.0], vec![2.0, 1.0]],
            1.0,
        );
        assert!(matches!(err, Err(Error::InvalidInstance(_))));
    }
}
