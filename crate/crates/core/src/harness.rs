//! Monte Carlo orchestration: type I calibration, candidate-grid runs,
//! consistency curves, and CSV emission.
//!
//! Every trial and grid cell gets a deterministically derived sub-seed, so
//! results are byte-identical regardless of the worker count.

use std::io::Write;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::datagen::{sample_dataset, MixtureParams};
use crate::error::{Error, Result};
use crate::resampling::{run_test, TestConfig, TestOutcome};

/// SplitMix64 step, used to derive independent sub-seeds from a master seed.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    let mut z = master
        .wrapping_add(0x9e3779b97f4a7c15)
        .wrapping_add(index.wrapping_mul(0xbf58476d1ce4e5b9));
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

/// Aggregate outcome of repeated null-hypothesis runs.
#[derive(Debug, Clone)]
pub struct CalibrationReport {
    pub trials: usize,
    pub accepted: usize,
    pub acceptance_rate: f64,
    /// Counts of rank `r` at index `r - 1`, one bin per possible rank.
    pub rank_histogram: Vec<u64>,
    pub chi_square_stat: f64,
}

fn chi_square_uniform(histogram: &[u64], trials: usize) -> f64 {
    let expected = trials as f64 / histogram.len() as f64;
    histogram
        .iter()
        .map(|&o| {
            let d = o as f64 - expected;
            d * d / expected
        })
        .sum()
}

/// Run `trials` independent experiments with a fresh dataset each and the
/// true regression function as the candidate, aggregating rank counts.
pub fn calibrate_type1(
    config: &TestConfig,
    params: &MixtureParams,
    n: usize,
    trials: usize,
) -> Result<CalibrationReport> {
    if trials == 0 {
        return Err(Error::InvalidConfig("trials must be >= 1".into()));
    }
    config.validate()?;
    let ranks: Vec<usize> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let trial_seed = derive_seed(config.seed, t as u64);
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(trial_seed, 0));
            let sample = sample_dataset(n, params, &mut rng)?;
            let mut cfg = config.clone();
            cfg.seed = derive_seed(trial_seed, 1);
            Ok(run_test(&sample, params, &cfg)?.rank)
        })
        .collect::<Result<_>>()?;

    let mut rank_histogram = vec![0u64; config.m];
    let mut accepted = 0usize;
    for &r in &ranks {
        rank_histogram[r - 1] += 1;
        if config.p_lo <= r && r <= config.q_hi {
            accepted += 1;
        }
    }
    Ok(CalibrationReport {
        trials,
        accepted,
        acceptance_rate: accepted as f64 / trials as f64,
        chi_square_stat: chi_square_uniform(&rank_histogram, trials),
        rank_histogram,
    })
}

/// Inclusive rectangular grid of candidate `(p, lambda)` pairs.
#[derive(Debug, Clone, Copy)]
pub struct GridSpec {
    pub p_lo: f64,
    pub p_hi: f64,
    pub lambda_lo: f64,
    pub lambda_hi: f64,
    pub step: f64,
}

impl GridSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.p_lo < self.p_hi && self.lambda_lo < self.lambda_hi) {
            return Err(Error::InvalidConfig(
                "grid bounds must satisfy lo < hi on both axes".into(),
            ));
        }
        if self.step.is_nan() || self.step <= 0.0 {
            return Err(Error::InvalidConfig("grid step must be positive".into()));
        }
        Ok(())
    }

    fn axis(lo: f64, hi: f64, step: f64) -> Vec<f64> {
        let count = ((hi - lo) / step).round() as usize;
        (0..=count).map(|i| lo + i as f64 * step).collect()
    }

    /// All grid points, `p` varying slowest.
    pub fn points(&self) -> Vec<(f64, f64)> {
        let ps = Self::axis(self.p_lo, self.p_hi, self.step);
        let ls = Self::axis(self.lambda_lo, self.lambda_hi, self.step);
        let mut out = Vec::with_capacity(ps.len() * ls.len());
        for &p in &ps {
            for &l in &ls {
                out.push((p, l));
            }
        }
        out
    }
}

/// One row of grid output.
#[derive(Debug, Clone, Copy)]
pub struct GridRow {
    pub p: f64,
    pub lambda: f64,
    pub rank: usize,
    pub normalized_rank: f64,
}

/// Test every candidate on the grid. By default a single dataset drawn from
/// the true model is shared across all cells; `shared_data = false` draws a
/// fresh dataset per cell instead.
pub fn grid_experiment(
    grid: &GridSpec,
    config: &TestConfig,
    params: &MixtureParams,
    n: usize,
    shared_data: bool,
) -> Result<Vec<GridRow>> {
    grid.validate()?;
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(config.seed, 0));
    let shared = sample_dataset(n, params, &mut rng)?;
    grid.points()
        .into_par_iter()
        .enumerate()
        .map(|(cell, (p, lambda))| {
            let candidate = params.candidate(p, lambda)?;
            let cell_seed = derive_seed(config.seed, 1 + cell as u64);
            let sample = if shared_data {
                shared.clone()
            } else {
                let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cell_seed, 0));
                sample_dataset(n, params, &mut rng)?
            };
            let mut cfg = config.clone();
            cfg.seed = derive_seed(cell_seed, 1);
            let outcome = run_test(&sample, &candidate, &cfg)?;
            Ok(GridRow {
                p,
                lambda,
                rank: outcome.rank,
                normalized_rank: outcome.rank as f64 / cfg.m as f64,
            })
        })
        .collect()
}

/// One row of consistency output: the average rank of the original sample
/// over repeated fresh datasets at a given sample size.
#[derive(Debug, Clone, Copy)]
pub struct ConsistencyRow {
    pub n: usize,
    pub mean_rank: f64,
}

/// Average the rank of a fixed candidate over `repeats` fresh datasets for
/// each sample size.
pub fn consistency_curve(
    candidate: &MixtureParams,
    config: &TestConfig,
    params: &MixtureParams,
    sizes: &[usize],
    repeats: usize,
) -> Result<Vec<ConsistencyRow>> {
    if sizes.is_empty() {
        return Err(Error::EmptyInput("consistency_curve needs sizes"));
    }
    if repeats == 0 {
        return Err(Error::InvalidConfig("repeats must be >= 1".into()));
    }
    config.validate()?;
    sizes
        .iter()
        .enumerate()
        .map(|(si, &n)| {
            let ranks: Vec<usize> = (0..repeats)
                .into_par_iter()
                .map(|r| {
                    let trial_seed =
                        derive_seed(config.seed, (si * repeats + r) as u64);
                    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(trial_seed, 0));
                    let sample = sample_dataset(n, params, &mut rng)?;
                    let mut cfg = config.clone();
                    cfg.seed = derive_seed(trial_seed, 1);
                    // VVKT regularization follows the sample size
                    cfg.lambda = TestConfig::default_lambda(n);
                    cfg.k_neighbors = TestConfig::default_k(n);
                    Ok(run_test(&sample, candidate, &cfg)?.rank)
                })
                .collect::<Result<_>>()?;
            Ok(ConsistencyRow {
                n,
                mean_rank: ranks.iter().sum::<usize>() as f64 / repeats as f64,
            })
        })
        .collect()
}

/// Lossless float formatting for CSV output (17 significant digits).
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_test_csv<W: Write>(out: &mut W, outcome: &TestOutcome) -> std::io::Result<()> {
    writeln!(out, "field,value")?;
    writeln!(out, "rank,{}", outcome.rank)?;
    writeln!(out, "accepted,{}", outcome.accepted)?;
    for (j, z) in outcome.z_values.iter().enumerate() {
        writeln!(out, "z_{j},{}", fmt_f64(*z))?;
    }
    for (j, t) in outcome.permutation.iter().enumerate() {
        writeln!(out, "pi_{},{t}", j + 1)?;
    }
    Ok(())
}

pub fn write_calibration_csv<W: Write>(out: &mut W, report: &CalibrationReport) -> std::io::Result<()> {
    writeln!(out, "field,value")?;
    writeln!(out, "trials,{}", report.trials)?;
    writeln!(out, "accepted,{}", report.accepted)?;
    writeln!(out, "acceptance_rate,{}", fmt_f64(report.acceptance_rate))?;
    writeln!(out, "chi_square,{}", fmt_f64(report.chi_square_stat))?;
    for (r, count) in report.rank_histogram.iter().enumerate() {
        writeln!(out, "rank_{},{count}", r + 1)?;
    }
    Ok(())
}

pub fn write_grid_csv<W: Write>(out: &mut W, rows: &[GridRow]) -> std::io::Result<()> {
    writeln!(out, "p,lambda,rank,normalized_rank")?;
    for row in rows {
        writeln!(
            out,
            "{},{},{},{}",
            fmt_f64(row.p),
            fmt_f64(row.lambda),
            row.rank,
            fmt_f64(row.normalized_rank)
        )?;
    }
    Ok(())
}

pub fn write_consistency_csv<W: Write>(out: &mut W, rows: &[ConsistencyRow]) -> std::io::Result<()> {
    writeln!(out, "n,mean_rank")?;
    for row in rows {
        writeln!(out, "{},{}", row.n, fmt_f64(row.mean_rank))?;
    }
    Ok(())
}
