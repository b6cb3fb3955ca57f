use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use snrloss::experiments::{
    generate_fig_beta, generate_fig_find_k, generate_fig_mean_vs_k, generate_fig_pfa, generate_fig_snrloss,
    generate_fig_ttilde, verify_suite, FigureConfig, Format, MuRule, Path, Table, VerifyConfig,
};
use snrloss::represent::TtildeVariant;
use snrloss::Error;

const EXIT_ARGUMENT: u8 = 1;
const EXIT_NUMERICAL: u8 = 2;
const EXIT_VERIFY: u8 = 3;

/// SNR loss and Kelly-detector statistics under Student-t training.
///
/// Every subcommand writes a table (CSV with a header row, or a JSON array of
/// objects) to --out or stdout. Exit codes: 0 success, 1 argument error,
/// 2 numerical failure, 3 verification failure.
#[derive(Parser, Debug)]
#[command(name = "snrloss", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// CDF and density of the SNR loss rho.
    ///
    /// Columns: rho; per curve cdf_<c>, cdf_se_<c>, pdf_hist_<c> where <c> is
    /// K<k>_nu<nu> (Student) or K<k>_gaussian, suffixed _direct/_rep with
    /// --path both; pdf_analytic_<c> closed-form densities.
    SnrLoss(Common),
    /// CDF and density of the loss factor beta (same columns as snr-loss).
    Beta(Common),
    /// CDF and density of Kelly's statistic at --snr-bar (same columns as snr-loss).
    Ttilde(Common),
    /// Mean SNR loss versus K.
    ///
    /// Columns: K; per nu analytic_nu<nu>, mc_nu<nu>, mc_se_nu<nu>; gaussian.
    MeanVsK(Common),
    /// Smallest K whose mean SNR loss exceeds 0.5.
    ///
    /// Columns: nu ("gaussian" for the Gaussian row), K, mean_at_K, mean_at_K_minus_1.
    FindK(Common),
    /// False-alarm probability of Kelly's statistic versus nu under Student training.
    ///
    /// Columns: nu; per K eta_K<k>, pfa_K<k>, pfa_se_K<k>, gaussian_pfa_K<k>, gaussian_pfa_se_K<k>.
    Pfa(Common),
    /// Cross-validation suite; exits with status 3 if any check fails.
    ///
    /// Columns: group, check, measured, bound, limit, status.
    Verify(Common),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum PathArg {
    Direct,
    Rep,
    Both,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum VariantArg {
    Shared,
    Independent,
}

#[derive(Args, Debug)]
struct Common {
    /// Number of channels N.
    #[arg(long, default_value_t = 16)]
    n: u32,
    /// Training sizes K (comma-separated).
    #[arg(long, value_delimiter = ',')]
    k: Vec<u32>,
    /// Student parameters nu (comma-separated).
    #[arg(long, value_delimiter = ',')]
    nu: Vec<u32>,
    /// Training scale: a positive number or "nu-N".
    #[arg(long, default_value = "nu-N")]
    mu: String,
    /// SNR of the test vector, |alpha|^2 v^H Sigma^-1 v.
    #[arg(long)]
    snr_bar: Option<f64>,
    /// Monte Carlo trials per curve.
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long, default_value_t = snrloss::experiments::figures::DEFAULT_SEED)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = PathArg::Rep)]
    path: PathArg,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = FormatArg::Csv)]
    format: FormatArg,
    /// Worker threads; all cores when absent.
    #[arg(long)]
    workers: Option<usize>,
    /// Draw scheme of the Student t-tilde representation.
    #[arg(long, value_enum, default_value_t = VariantArg::Shared)]
    variant: VariantArg,
    /// Histogram bins for the distribution subcommands.
    #[arg(long, default_value_t = 200)]
    bins: usize,
    /// Gaussian false-alarm target fixing the threshold.
    #[arg(long, default_value_t = 1e-3)]
    pfa: f64,
    /// Largest K tried by find-k.
    #[arg(long, default_value_t = snrloss::experiments::figures::DEFAULT_K_CAP)]
    k_cap: u32,
}

impl Common {
    fn figure_config(
        &self,
        default_ks: Vec<u32>,
        default_nus: Vec<u32>,
        default_trials: usize,
    ) -> Result<FigureConfig, Error> {
        let mu: MuRule = self.mu.parse()?;
        let mut ks = if self.k.is_empty() { default_ks } else { self.k.clone() };
        let mut nus = if self.nu.is_empty() {
            default_nus
        } else {
            self.nu.clone()
        };
        ks.sort_unstable();
        ks.dedup();
        nus.sort_unstable();
        nus.dedup();
        Ok(FigureConfig {
            n: self.n,
            ks,
            nus,
            mu,
            snr_bar: self.snr_bar.unwrap_or(0.0),
            trials: self.trials.unwrap_or(default_trials),
            seed: self.seed,
            path: match self.path {
                PathArg::Direct => Path::Direct,
                PathArg::Rep => Path::Rep,
                PathArg::Both => Path::Both,
            },
            variant: match self.variant {
                VariantArg::Shared => TtildeVariant::Shared,
                VariantArg::Independent => TtildeVariant::Independent,
            },
            workers: self.workers,
            bins: self.bins,
            pfa: self.pfa,
            k_cap: self.k_cap,
        })
    }

    fn format(&self) -> Format {
        match self.format {
            FormatArg::Csv => Format::Csv,
            FormatArg::Json => Format::Json,
        }
    }

    fn write(&self, table: &Table) -> Result<(), Error> {
        let io_err = |e: io::Error| Error::Output(e.to_string());
        match &self.out {
            Some(path) => {
                let file = File::create(path).map_err(|e| Error::Output(format!("{}: {e}", path.display())))?;
                let mut w = BufWriter::new(file);
                table.write(self.format(), &mut w)?;
                w.flush().map_err(io_err)
            }
            None => {
                let mut w = io::stdout().lock();
                table.write(self.format(), &mut w)?;
                if matches!(self.format, FormatArg::Json) {
                    writeln!(w).map_err(io_err)?;
                }
                w.flush().map_err(io_err)
            }
        }
    }
}

fn run(cli: Cli) -> Result<u8, Error> {
    let defaults = FigureConfig::default();
    match cli.command {
        Command::SnrLoss(c) => c.write(&generate_fig_snrloss(&c.figure_config(
            defaults.ks,
            defaults.nus,
            defaults.trials,
        )?)?)?,
        Command::Beta(c) => c.write(&generate_fig_beta(&c.figure_config(
            defaults.ks,
            defaults.nus,
            defaults.trials,
        )?)?)?,
        Command::Ttilde(c) => c.write(&generate_fig_ttilde(&c.figure_config(
            defaults.ks,
            defaults.nus,
            defaults.trials,
        )?)?)?,
        Command::MeanVsK(c) => {
            let cfg = c.figure_config(FigureConfig::mean_vs_k_grid(c.n), defaults.nus, defaults.trials)?;
            c.write(&generate_fig_mean_vs_k(&cfg)?)?
        }
        Command::FindK(c) => c.write(&generate_fig_find_k(&c.figure_config(vec![c.n], defaults.nus, 1)?)?)?,
        Command::Pfa(c) => {
            let cfg = c.figure_config(vec![2 * c.n, 4 * c.n], FigureConfig::pfa_nu_grid(c.n), 10_000_000)?;
            c.write(&generate_fig_pfa(&cfg)?)?
        }
        Command::Verify(c) => {
            let d = VerifyConfig::default();
            let fig = c.figure_config(d.ks.clone(), d.nus.clone(), d.trials)?;
            let cfg = VerifyConfig {
                n: c.n,
                ks: fig.ks,
                nus: fig.nus,
                snr_bar: c.snr_bar.unwrap_or(d.snr_bar),
                trials: fig.trials,
                seed: c.seed,
                workers: c.workers,
                ..d
            };
            let report = verify_suite(&cfg)?;
            c.write(&report.to_table())?;
            let failed = report.failures().count();
            eprintln!("{} checks, {failed} failed", report.checks.len());
            if failed > 0 {
                return Ok(EXIT_VERIFY);
            }
        }
    }
    Ok(0)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_ARGUMENT } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_argument_error() || matches!(e, Error::Output(_)) {
                EXIT_ARGUMENT
            } else {
                EXIT_NUMERICAL
            })
        }
    }
}
