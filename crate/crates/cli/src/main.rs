//! Batch front door for the fading-channel toolkit.
//!
//! Five subcommands share one config format: `classify` names the
//! decay class, `bound` evaluates the saturation bound, `simulate`
//! dumps channel traces, `mi` sweeps mutual information against SNR,
//! and `verify` audits the inequality chain behind the bound. Every
//! output embeds the seed, tool version, and config hash, and CSV
//! bytes are identical for identical (config, seed, version)
//! regardless of worker count.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use fadecap::mi::verify::{Verdict, VerifySettings};
use fadecap::mi;

use fadecap_cli::config::{self, BoundAvailability, Loaded, RunConfig};
use fadecap_cli::csvout::{self, Cell, Table};
use fadecap_cli::error::{CliError, Result};
use fadecap_cli::svg;

const COLUMN_DOC: &str = "\
Every output file starts with a provenance comment:
  # fadecap v<version> seed=<seed> config=fnv1a64:<hash>

CSV columns per subcommand:
  classify  class,sup_alpha
  bound     ell0,rho,beta_tilde,delta,eta,epsilon,kappa,k_const,sup_alpha,snr,finite_n
  simulate  sample,slot,x_re,x_im,y_re,y_im
  mi        snr_db,mi_nats,mi_se,duality_nats,duality_se,duality_discarded,bound_nats
            (duality and bound cells are empty when the profile has no
            geometric floor or the epsilon model is disabled)
  verify    inequality,k,lhs,lhs_se,rhs,rhs_se,margin_se,verdict

Operating points: `simulate` and `verify` run at one point (power or a
single snr_db entry); `mi` sweeps the snr_db list; `bound` tabulates
every configured point; `classify` needs none.

The FADECAP_WORKERS environment variable caps the worker pool (1
forces sequential, unset lets the library choose). Results are bitwise
independent of the worker count.

Exit codes: 0 success, 1 usage or config error, 2 verify found a
failing inequality.";

#[derive(Parser)]
#[command(name = "fadecap", version, about = "Fading-channel capacity toolkit", after_help = COLUMN_DOC)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Name the decay class of the configured profile.
    Classify(CommonArgs),
    /// Evaluate the saturation bound and tabulate it per SNR point.
    Bound(CommonArgs),
    /// Draw reproducible channel traces.
    Simulate(CommonArgs),
    /// Sweep exact mutual information, duality bound, and analytic
    /// bound over the snr_db list.
    Mi(CommonArgs),
    /// Audit every inequality in the saturation argument by paired
    /// Monte Carlo; exit 2 if any fails.
    Verify(VerifyArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// Run config (TOML, schema = 1).
    config: PathBuf,
    /// Override experiment.seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override experiment.samples.
    #[arg(long)]
    samples: Option<usize>,
    /// Override output.directory.
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Shift every estimated gap by this amount before the pass/fail
    /// comparison (harness self-test; -10 must fail every row).
    #[arg(long, default_value_t = 0.0)]
    gap_nudge: f64,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let informational =
                matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion);
            let _ = e.print();
            return if informational {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            };
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.cmd {
        Cmd::Classify(args) => classify(&Ctx::prepare(&args)?).map(|()| ExitCode::SUCCESS),
        Cmd::Bound(args) => bound_cmd(&Ctx::prepare(&args)?).map(|()| ExitCode::SUCCESS),
        Cmd::Simulate(args) => simulate(&Ctx::prepare(&args)?).map(|()| ExitCode::SUCCESS),
        Cmd::Mi(args) => mi_cmd(&Ctx::prepare(&args)?).map(|()| ExitCode::SUCCESS),
        Cmd::Verify(args) => {
            let ctx = Ctx::prepare(&args.common)?;
            verify_cmd(&ctx, args.gap_nudge)
        }
    }
}

/// One resolved invocation: config plus overrides and environment.
struct Ctx {
    config: RunConfig,
    hash: u64,
    base: PathBuf,
    seed: u64,
    samples: usize,
    out_dir: PathBuf,
    workers: usize,
}

impl Ctx {
    fn prepare(args: &CommonArgs) -> Result<Ctx> {
        let Loaded { config, hash, base } = config::load(&args.config)?;
        let seed = args.seed.unwrap_or(config.experiment.seed);
        let samples = args.samples.unwrap_or(config.experiment.samples);
        if samples == 0 {
            return Err(CliError::Invalid("--samples: want >= 1".into()));
        }
        let out_dir = args.out_dir.clone().unwrap_or_else(|| config.out_dir());
        fs::create_dir_all(&out_dir).map_err(|source| CliError::Write {
            path: out_dir.clone(),
            source,
        })?;
        Ok(Ctx {
            config,
            hash,
            base,
            seed,
            samples,
            out_dir,
            workers: workers_from_env()?,
        })
    }

    fn header(&self) -> String {
        csvout::header(self.seed, self.hash)
    }

    fn write(&self, name: &str, table: &Table) -> Result<PathBuf> {
        let path = self.out_dir.join(name);
        csvout::write_file(&path, &table.render(&self.header()))?;
        Ok(path)
    }
}

fn workers_from_env() -> Result<usize> {
    match std::env::var("FADECAP_WORKERS") {
        Ok(value) => value
            .trim()
            .parse()
            .map_err(|_| CliError::Workers(value.clone())),
        Err(_) => Ok(0),
    }
}

// ----- classify ---------------------------------------------------------------

fn classify(ctx: &Ctx) -> Result<()> {
    let profile = ctx.config.profile()?;
    let class = format!("{:?}", profile.classify());
    let mut table = Table::new(&["class", "sup_alpha"]);
    table.row(&[Cell::Str(&class), Cell::Num(profile.sup_alpha())])?;
    let path = ctx.write("classify.csv", &table)?;
    println!("{class}");
    eprintln!("wrote {}", path.display());
    Ok(())
}

// ----- bound ------------------------------------------------------------------

fn bound_cmd(ctx: &Ctx) -> Result<()> {
    let channel = ctx.config.channel_at(0.0)?;
    let result = match config::assess_bound(&ctx.config, &channel, &ctx.base)? {
        BoundAvailability::Ready(result) => result,
        BoundAvailability::NotBounded(class) => {
            return Err(CliError::Invalid(format!(
                "channel: decay class is {class:?}; the saturation bound needs a \
                 geometric floor"
            )))
        }
        BoundAvailability::EpsilonOff(_) => {
            return Err(CliError::Core(fadecap::Error::EpsilonUnavailable))
        }
    };
    let n = ctx.config.experiment.blocklength;
    let mut table = Table::new(&[
        "ell0",
        "rho",
        "beta_tilde",
        "delta",
        "eta",
        "epsilon",
        "kappa",
        "k_const",
        "sup_alpha",
        "snr",
        "finite_n",
    ]);
    for snr in ctx.config.snr_points() {
        table.row(&[
            Cell::Int(result.params.ell0 as u64),
            Cell::Num(result.params.rho),
            Cell::Num(result.params.beta_tilde),
            Cell::Num(result.params.delta),
            Cell::Num(result.params.eta),
            Cell::Num(result.epsilon_value),
            Cell::Num(result.kappa),
            Cell::Num(result.k_const),
            Cell::Num(result.sup_alpha),
            Cell::Num(snr),
            Cell::Num(result.finite_n(n, snr)?),
        ])?;
    }
    let path = ctx.write("bound.csv", &table)?;
    println!(
        "K = {:.6} nats at delta = {}, eta = {} (l0 = {}, rho = {:.6}, beta_tilde = {:.6}, \
         epsilon: {})",
        result.k_const,
        result.params.delta,
        result.params.eta,
        result.params.ell0,
        result.params.rho,
        result.params.beta_tilde,
        result.params.epsilon.describe(),
    );
    eprintln!("wrote {}", path.display());
    Ok(())
}

// ----- simulate ---------------------------------------------------------------

fn simulate(ctx: &Ctx) -> Result<()> {
    let channel = ctx.config.channel_at(ctx.config.single_power()?)?;
    let input = ctx.config.input()?;
    let samples = mi::simulate_channel(&channel, &input, ctx.samples, ctx.seed, ctx.workers)?;
    let mut table = Table::new(&["sample", "slot", "x_re", "x_im", "y_re", "y_im"]);
    for (index, sample) in samples.iter().enumerate() {
        for slot in 0..channel.blocklength() {
            table.row(&[
                Cell::Int(index as u64),
                Cell::Int(slot as u64 + 1),
                Cell::Num(sample.x[slot].re),
                Cell::Num(sample.x[slot].im),
                Cell::Num(sample.y[slot].re),
                Cell::Num(sample.y[slot].im),
            ])?;
        }
    }
    let path = ctx.write("simulate.csv", &table)?;
    println!(
        "{} samples of blocklength {} at P = {}",
        samples.len(),
        channel.blocklength(),
        channel.power()
    );
    eprintln!("wrote {}", path.display());
    Ok(())
}

// ----- mi ---------------------------------------------------------------------

fn mi_cmd(ctx: &Ctx) -> Result<()> {
    let snr_db = ctx.config.sweep_db()?;
    let channel = ctx.config.channel_at(0.0)?;
    let input = ctx.config.input()?;
    let bound = match config::assess_bound(&ctx.config, &channel, &ctx.base)? {
        BoundAvailability::Ready(result) => Some(result),
        _ => None,
    };
    let rows = mi::mi_sweep(
        &channel,
        &input,
        &snr_db,
        ctx.samples,
        ctx.seed,
        ctx.workers,
        bound.as_ref(),
    )?;

    let mut table = Table::new(&[
        "snr_db",
        "mi_nats",
        "mi_se",
        "duality_nats",
        "duality_se",
        "duality_discarded",
        "bound_nats",
    ]);
    for row in &rows {
        table.row(&[
            Cell::Num(row.snr_db),
            Cell::Num(row.mi.nats),
            Cell::Num(row.mi.se),
            row.duality.map_or(Cell::Blank, |d| Cell::Num(d.nats)),
            row.duality.map_or(Cell::Blank, |d| Cell::Num(d.se)),
            Cell::Int(row.duality_discarded),
            row.bound.map_or(Cell::Blank, Cell::Num),
        ])?;
    }
    let path = ctx.write("mi.csv", &table)?;

    println!("{:>8} {:>12} {:>10} {:>12} {:>12}", "snr_db", "mi_nats", "mi_se", "duality", "bound");
    for row in &rows {
        let duality = row
            .duality
            .map_or_else(|| format!("{:>12}", "-"), |d| format!("{:>12.6}", d.nats));
        let bound_cell = row
            .bound
            .map_or_else(|| format!("{:>12}", "-"), |b| format!("{:>12.6}", b));
        println!(
            "{:>8} {:>12.6} {:>10.2e} {duality} {bound_cell}",
            row.snr_db, row.mi.nats, row.mi.se
        );
    }
    eprintln!("wrote {}", path.display());

    if ctx.config.wants_svg() {
        let chart = svg::line_chart(
            "mutual information vs SNR",
            "SNR (dB)",
            "nats per channel use",
            &[
                svg::Series {
                    label: "exact MI",
                    points: rows.iter().map(|r| (r.snr_db, r.mi.nats)).collect(),
                },
                svg::Series {
                    label: "duality upper",
                    points: rows
                        .iter()
                        .filter_map(|r| r.duality.map(|d| (r.snr_db, d.nats)))
                        .collect(),
                },
                svg::Series {
                    label: "analytic bound",
                    points: rows
                        .iter()
                        .filter_map(|r| r.bound.map(|b| (r.snr_db, b)))
                        .collect(),
                },
            ],
        );
        let svg_path = ctx.out_dir.join("mi.svg");
        // Chart trouble must never fail a run that produced its CSV.
        if let Err(e) = csvout::write_file(&svg_path, &chart) {
            eprintln!("warning: {e}");
        } else {
            eprintln!("wrote {}", svg_path.display());
        }
    }
    Ok(())
}

// ----- verify -----------------------------------------------------------------

fn verify_cmd(ctx: &Ctx, gap_nudge: f64) -> Result<ExitCode> {
    let channel = ctx.config.channel_at(ctx.config.single_power()?)?;
    let input = ctx.config.input()?;
    let params = match config::assess_bound(&ctx.config, &channel, &ctx.base)? {
        BoundAvailability::Ready(result) => result.params,
        BoundAvailability::EpsilonOff(params) => params,
        BoundAvailability::NotBounded(class) => {
            return Err(CliError::Invalid(format!(
                "channel: decay class is {class:?}; the proof chain needs a geometric floor"
            )))
        }
    };
    let mut settings = VerifySettings::new(ctx.samples, ctx.seed);
    settings.workers = ctx.workers;
    settings.rhs_nudge = gap_nudge;
    let report = mi::verify::verify_proof_chain(&channel, &input, &params, &settings)?;

    let mut table = Table::new(&[
        "inequality",
        "k",
        "lhs",
        "lhs_se",
        "rhs",
        "rhs_se",
        "margin_se",
        "verdict",
    ]);
    for row in &report.rows {
        table.row(&[
            Cell::Str(row.inequality),
            Cell::Int(row.k as u64),
            Cell::Num(row.lhs),
            Cell::Num(row.lhs_se),
            Cell::Num(row.rhs),
            Cell::Num(row.rhs_se),
            Cell::Num(row.margin_se),
            Cell::Str(row.verdict.as_str()),
        ])?;
    }
    let path = ctx.write("verify.csv", &table)?;

    println!(
        "{:<10} {:>3} {:>13} {:>13} {:>12} {:<8}",
        "inequality", "k", "lhs", "rhs", "margin(se)", "verdict"
    );
    for row in &report.rows {
        let note = row.note.as_deref().unwrap_or("");
        println!(
            "{:<10} {:>3} {:>13.6} {:>13.6} {:>12.1} {:<8} {note}",
            row.inequality,
            row.k,
            row.lhs,
            row.rhs,
            row.margin_se,
            row.verdict.as_str()
        );
    }
    let failures = report
        .rows
        .iter()
        .filter(|r| r.verdict == Verdict::Fail)
        .count();
    println!(
        "{} rows, {} failures, {} samples kept, {} discarded",
        report.rows.len(),
        failures,
        report.samples,
        report.discarded
    );
    eprintln!("wrote {}", path.display());
    Ok(if report.all_pass() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(2)
    })
}
