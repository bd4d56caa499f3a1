//! CLI harness for the regression-function hypothesis tests.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use embtest::datagen::{sample_dataset, MixtureParams};
use embtest::harness::{
    calibrate_type1, consistency_curve, derive_seed, grid_experiment, write_calibration_csv,
    write_consistency_csv, write_grid_csv, write_test_csv, GridSpec,
};
use embtest::kernels::KernelSpec;
use embtest::resampling::{run_test, EstimatorKind, TestConfig};

#[derive(Parser)]
#[command(name = "embtest", about = "Distribution-free regression-function tests", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum EstimatorArg {
    Vvkt,
    Pet,
}

impl From<EstimatorArg> for EstimatorKind {
    fn from(e: EstimatorArg) -> Self {
        match e {
            EstimatorArg::Vvkt => EstimatorKind::Vvkt,
            EstimatorArg::Pet => EstimatorKind::Pet,
        }
    }
}

#[derive(Args)]
struct CommonArgs {
    /// Sample size
    #[arg(long, default_value_t = 50)]
    n: usize,
    /// Resampling count (total datasets)
    #[arg(long, default_value_t = 40)]
    m: usize,
    /// Upper acceptance bound; defaults to m - 2
    #[arg(long)]
    q: Option<usize>,
    /// Lower acceptance bound
    #[arg(long = "p-lo", default_value_t = 1)]
    p_lo: usize,
    #[arg(long, value_enum, default_value = "pet")]
    estimator: EstimatorArg,
    /// Gaussian kernel bandwidth (VVKT)
    #[arg(long, default_value_t = 0.5)]
    sigma: f64,
    /// Regularization; defaults to n^(-1/4) (VVKT)
    #[arg(long)]
    lambda: Option<f64>,
    /// Neighbor count; defaults to floor(sqrt(n)) (PET)
    #[arg(long)]
    k: Option<usize>,
    /// Candidate class weight
    #[arg(long = "cand-p", default_value_t = 0.5)]
    cand_p: f64,
    /// Candidate class width
    #[arg(long = "cand-lambda", default_value_t = 1.0)]
    cand_lambda: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write CSV here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

impl CommonArgs {
    fn config(&self) -> embtest::Result<TestConfig> {
        let q_hi = self.q.unwrap_or_else(|| self.m.saturating_sub(2));
        let cfg = TestConfig {
            m: self.m,
            p_lo: self.p_lo,
            q_hi,
            estimator: self.estimator.into(),
            kernel: KernelSpec::gaussian(self.sigma)?,
            lambda: self.lambda.unwrap_or_else(|| TestConfig::default_lambda(self.n)),
            k_neighbors: self.k.unwrap_or_else(|| TestConfig::default_k(self.n)),
            seed: self.seed,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn writer(&self) -> io::Result<Box<dyn Write>> {
        Ok(match &self.out {
            Some(path) => Box::new(BufWriter::new(File::create(path)?)),
            None => Box::new(io::stdout().lock()),
        })
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run a single test of a candidate against one sample from the true model
    Test {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Monte Carlo estimate of the type I error under the null
    Calibrate {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, default_value_t = 2000)]
        trials: usize,
    },
    /// Rank statistics over a grid of candidate (p, lambda) pairs
    Grid {
        #[command(flatten)]
        common: CommonArgs,
        /// Candidate p range as lo,hi
        #[arg(long = "grid-p", value_delimiter = ',', default_values_t = [0.2, 0.8])]
        grid_p: Vec<f64>,
        /// Candidate lambda range as lo,hi
        #[arg(long = "grid-lambda", value_delimiter = ',', default_values_t = [0.5, 1.5])]
        grid_lambda: Vec<f64>,
        #[arg(long, default_value_t = 0.01)]
        step: f64,
        /// Share one dataset across all cells (false draws fresh data per cell)
        #[arg(long = "shared-data", default_value_t = true, action = clap::ArgAction::Set)]
        shared_data: bool,
    },
    /// Average ranks of a fixed candidate across sample sizes
    Consistency {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, value_delimiter = ',', default_values_t = [50usize, 100, 200, 400])]
        sizes: Vec<usize>,
        #[arg(long, default_value_t = 50)]
        repeats: usize,
    },
}

fn run() -> Result<(), Box<dyn std::error::Error>> {
    let cli = Cli::parse();
    let params = MixtureParams::default();
    match cli.command {
        Command::Test { common } => {
            let config = common.config()?;
            let candidate = params.candidate(common.cand_p, common.cand_lambda)?;
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(common.seed, 0));
            let sample = sample_dataset(common.n, &params, &mut rng)?;
            let mut cfg = config;
            cfg.seed = derive_seed(common.seed, 1);
            let outcome = run_test(&sample, &candidate, &cfg)?;
            write_test_csv(&mut common.writer()?, &outcome)?;
        }
        Command::Calibrate { common, trials } => {
            let config = common.config()?;
            let report = calibrate_type1(&config, &params, common.n, trials)?;
            write_calibration_csv(&mut common.writer()?, &report)?;
        }
        Command::Grid {
            common,
            grid_p,
            grid_lambda,
            step,
            shared_data,
        } => {
            let config = common.config()?;
            if grid_p.len() != 2 || grid_lambda.len() != 2 {
                return Err("grid ranges must be given as lo,hi".into());
            }
            let grid = GridSpec {
                p_lo: grid_p[0],
                p_hi: grid_p[1],
                lambda_lo: grid_lambda[0],
                lambda_hi: grid_lambda[1],
                step,
            };
            let rows = grid_experiment(&grid, &config, &params, common.n, shared_data)?;
            write_grid_csv(&mut common.writer()?, &rows)?;
        }
        Command::Consistency {
            common,
            sizes,
            repeats,
        } => {
            let config = common.config()?;
            let candidate = params.candidate(common.cand_p, common.cand_lambda)?;
            let rows = consistency_curve(&candidate, &config, &params, &sizes, repeats)?;
            write_consistency_csv(&mut common.writer()?, &rows)?;
        }
    }
    Ok(())
}

fn main() {
    if let Err(e) = run() {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
