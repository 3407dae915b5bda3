//! Batch front-end: ingest channel/tuple JSON, run analyses, emit reports.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use qmarkov::classify;
use qmarkov::dilation;
use qmarkov::error::Error;
use qmarkov::fcs;
use qmarkov::io::{self, ChannelJson, TupleJson};
use qmarkov::kms::ModularPair;
use qmarkov::structure;
use qmarkov::suite;
use qmarkov::Tolerances;

#[derive(Parser)]
#[command(
    name = "qmarkov",
    version,
    about = "Spectral decision procedures for quantum Markov maps and chain states"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct CommonArgs {
    /// Input JSON file.
    #[arg(long = "in")]
    input: Option<PathBuf>,
    /// Output report path; stdout when omitted.
    #[arg(long = "out")]
    output: Option<PathBuf>,
    /// Tolerance overrides as a JSON file.
    #[arg(long = "tol-config")]
    tol_config: Option<PathBuf>,
    /// Output format for series data.
    #[arg(long, default_value = "json", value_parser = ["json", "csv"])]
    format: String,
}

#[derive(Subcommand)]
enum Command {
    /// Invariant-structure summary: fixed space, G, G0, support.
    Analyze {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Ergodicity / mixing / strong ergodicity / Kolmogorov verdicts.
    Classify {
        #[command(flatten)]
        common: CommonArgs,
        /// Iteration horizon for the decay series.
        #[arg(long)]
        horizon: Option<usize>,
    },
    /// KMS adjoint channel plus the defining-relation residual.
    Adjoint {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Weak Markov dilation residuals at a given horizon.
    Dilate {
        #[command(flatten)]
        common: CommonArgs,
        /// Dilation horizon N.
        #[arg(long, default_value_t = 3)]
        horizon: usize,
    },
    /// Chain-state analyses on a Popescu tuple.
    Chain {
        #[command(subcommand)]
        verb: ChainVerb,
    },
    /// Run the bundled cross-theorem consistency suite.
    Selftest {
        #[command(flatten)]
        common: CommonArgs,
        /// Seed for the random instances.
        #[arg(long, default_value_t = 7)]
        seed: u64,
        /// Number of seeded random channels.
        #[arg(long, default_value_t = 8)]
        instances: usize,
    },
}

#[derive(Subcommand)]
enum ChainVerb {
    /// Window marginal density matrix.
    Marginal {
        #[command(flatten)]
        common: CommonArgs,
        /// Window width in sites.
        #[arg(long, default_value_t = 2)]
        window: usize,
    },
    /// Two-point correlation decay of one-site observables.
    Decay {
        #[command(flatten)]
        common: CommonArgs,
        /// Largest shift n in the series.
        #[arg(long, default_value_t = 30)]
        horizon: usize,
    },
    /// Factoriality of the chain state.
    Factor {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Purity criterion for the chain state.
    Purity {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Peripheral point spectrum of the corner channel as a group.
    Gauge {
        #[command(flatten)]
        common: CommonArgs,
    },
}

fn load_tolerances(common: &CommonArgs) -> Result<Tolerances, Error> {
    match &common.tol_config {
        None => Ok(Tolerances::default()),
        Some(path) => {
            let text = std::fs::read_to_string(path)?;
            Ok(serde_json::from_str(&text)?)
        }
    }
}

fn read_input<T: serde::de::DeserializeOwned>(common: &CommonArgs) -> Result<T, Error> {
    let path = common
        .input
        .as_ref()
        .ok_or_else(|| Error::InvalidInput("--in is required for this subcommand".into()))?;
    let text = std::fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

fn write_report<T: serde::Serialize>(common: &CommonArgs, report: &T) -> Result<(), Error> {
    let text = serde_json::to_string_pretty(report)? + "\n";
    match &common.output {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn sibling_path(base: &Path, suffix: &str) -> PathBuf {
    let stem = base
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("report");
    base.with_file_name(format!("{stem}{suffix}"))
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Analyze { common } => {
            let tol = load_tolerances(&common)?;
            let json: ChannelJson = read_input(&common)?;
            let loaded = io::decode_channel(&json, &tol)?;
            let report = structure::analyze(&loaded.channel, &loaded.state, &tol)?;
            write_report(&common, &report)
        }
        Command::Classify { common, horizon } => {
            let mut tol = load_tolerances(&common)?;
            if let Some(h) = horizon {
                tol.horizon = h;
            }
            let json: ChannelJson = read_input(&common)?;
            let loaded = io::decode_channel(&json, &tol)?;
            let mut report = classify::classify(&loaded.channel, &loaded.state, &tol)?;
            if let Some(out) = &common.output {
                let csv_path = sibling_path(out, "_decay.csv");
                std::fs::write(
                    &csv_path,
                    io::decay_csv(&report.kolmogorov_series, &report.strong_ergodicity_series),
                )?;
                report.decay_series_csv_path = Some(csv_path.display().to_string());
            }
            write_report(&common, &report)
        }
        Command::Adjoint { common } => {
            let tol = load_tolerances(&common)?;
            let json: ChannelJson = read_input(&common)?;
            let loaded = io::decode_channel(&json, &tol)?;
            let pair = ModularPair::new(loaded.channel.clone(), loaded.state.clone(), &tol)?;
            let adjoint = pair.kms_adjoint()?;
            let residual = qmarkov::kms::verify_adjoint_relation(&pair, &adjoint)?;
            #[derive(serde::Serialize)]
            struct AdjointReport {
                adjoint: ChannelJson,
                relation_residual: f64,
                unitality_defect: f64,
            }
            let report = AdjointReport {
                unitality_defect: adjoint.unitality_defect(),
                adjoint: io::encode_channel(&adjoint, Some(&loaded.state)),
                relation_residual: residual,
            };
            write_report(&common, &report)
        }
        Command::Dilate { common, horizon } => {
            let tol = load_tolerances(&common)?;
            let json: ChannelJson = read_input(&common)?;
            let loaded = io::decode_channel(&json, &tol)?;
            let report = dilation::dilation_report(&loaded.channel, &loaded.state, horizon, &tol)?;
            write_report(&common, &report)
        }
        Command::Chain { verb } => run_chain(verb),
        Command::Selftest {
            common,
            seed,
            instances,
        } => {
            let tol = load_tolerances(&common)?;
            let report = suite::run_selftest(seed, instances, &tol)?;
            for item in &report.items {
                println!(
                    "{} {} residual {:.3e}",
                    if item.pass { "PASS" } else { "FAIL" },
                    item.name,
                    item.residual
                );
            }
            println!(
                "selftest: {} passed, {} failed, max residual {:.3e}",
                report.passed, report.failed, report.max_residual
            );
            if let Some(path) = &common.output {
                std::fs::write(path, serde_json::to_string_pretty(&report)? + "\n")?;
            }
            if report.failed > 0 {
                return Err(Error::Eigensolver(format!(
                    "{} selftest assertions failed",
                    report.failed
                )));
            }
            Ok(())
        }
    }
}

fn run_chain(verb: ChainVerb) -> Result<(), Error> {
    match verb {
        ChainVerb::Marginal { common, window } => {
            let tol = load_tolerances(&common)?;
            let json: TupleJson = read_input(&common)?;
            let loaded = io::decode_tuple(&json, &tol)?;
            let marginal = fcs::chain_marginal(&loaded.tuple, window, &tol)?;
            let (left, right) = fcs::marginal_consistency(&loaded.tuple, window, &tol)?;
            #[derive(serde::Serialize)]
            struct MarginalReport {
                window: usize,
                reduced_input: bool,
                matrix: io::MatrixJson,
                left_consistency: f64,
                right_consistency: f64,
                min_eigenvalue: f64,
            }
            let report = MarginalReport {
                window,
                reduced_input: loaded.reduced,
                min_eigenvalue: marginal.min_eigenvalue()?,
                matrix: io::matrix_to_json(marginal.matrix()),
                left_consistency: left,
                right_consistency: right,
            };
            write_report(&common, &report)
        }
        ChainVerb::Decay { common, horizon } => {
            let tol = load_tolerances(&common)?;
            let json: TupleJson = read_input(&common)?;
            let loaded = io::decode_tuple(&json, &tol)?;
            // sweep one-site Hermitian observables, report the slowest mode
            let basis = qmarkov::linalg::hermitian_basis::<qmarkov::C64>(loaded.tuple.site_dim());
            let mut worst: Option<fcs::CorrelationSeries> = None;
            for x in basis.iter().skip(1) {
                let series = fcs::correlation_decay(&loaded.tuple, x, x, horizon, &tol)?;
                let last = series.series.last().map(|(_, c)| *c).unwrap_or(0.0);
                let replace = match &worst {
                    None => true,
                    Some(w) => last > w.series.last().map(|(_, c)| *c).unwrap_or(0.0),
                };
                if replace {
                    worst = Some(series);
                }
            }
            let series =
                worst.ok_or_else(|| Error::InvalidInput("site dimension too small".into()))?;
            if common.format == "csv" {
                let text = io::correlation_csv(&series.series);
                match &common.output {
                    Some(path) => std::fs::write(path, text)?,
                    None => print!("{text}"),
                }
                Ok(())
            } else {
                write_report(&common, &series)
            }
        }
        ChainVerb::Factor { common } => {
            let tol = load_tolerances(&common)?;
            let json: TupleJson = read_input(&common)?;
            let loaded = io::decode_tuple(&json, &tol)?;
            let report = fcs::factor_test(&loaded.tuple, &tol)?;
            write_report(&common, &report)
        }
        ChainVerb::Purity { common } => {
            let tol = load_tolerances(&common)?;
            let json: TupleJson = read_input(&common)?;
            let loaded = io::decode_tuple(&json, &tol)?;
            let report = fcs::purity_test(&loaded.tuple, &tol)?;
            write_report(&common, &report)
        }
        ChainVerb::Gauge { common } => {
            let tol = load_tolerances(&common)?;
            let json: TupleJson = read_input(&common)?;
            let loaded = io::decode_tuple(&json, &tol)?;
            let report = fcs::gauge_peripheral_group(&loaded.tuple, &tol)?;
            write_report(&common, &report)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error[{}]: {e}", e.exit_code());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
