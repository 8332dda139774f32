//! Experiment runner: dispatches subcommands to the core operations and
//! emits CSV/JSON reports. Exit code 0 means PASS or success, 1 a FAIL
//! verdict (or a negative computational outcome), 2 a usage error.

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use diagsym_core::acs::{
    acs_distance_estimate, extract_diagonal_subsequence, DiagonalFamily,
};
use diagsym_core::distribution::{
    family_for, verify_symbol, zero_distribution_test, SampleMode,
};
use diagsym_core::glt::construct_glt_permutation;
use diagsym_core::piecewise::piecewise_convergence_check;
use diagsym_core::report;
use diagsym_core::symbols::decreasing_rearrangement;
use diagsym_core::{DiagonalSequence, MatrixSequence, RunConfig, Schedule, Verdict};

use crate::descriptor::{build_sequence, parse_descriptor};
use crate::expr::parse_symbol;
use crate::CliError;

/// Environment variable supplying the default output directory.
pub const OUT_DIR_ENV: &str = "DIAGSYM_OUT_DIR";

#[derive(Debug, Parser)]
#[command(
    name = "diagsym",
    version,
    about = "Finite-scale spectral analysis of diagonal matrix sequences"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Size schedule: `a..b` doubles geometrically, `a,b,c` is explicit.
    #[arg(long, global = true)]
    pub sizes: Option<String>,

    /// Seed for shuffled generators.
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Number of trailing schedule entries used for tail estimates.
    #[arg(long, global = true)]
    pub tail_window: Option<usize>,

    /// Pass threshold applied to the command's verdict.
    #[arg(long, global = true)]
    pub threshold: Option<f64>,

    /// Grid resolution for closure sampling and quadrature.
    #[arg(long, global = true)]
    pub resolution: Option<usize>,

    /// Output directory for report files (default: $DIAGSYM_OUT_DIR if set).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Report file format.
    #[arg(long, global = true, value_enum, default_value_t = OutputFormat::Csv)]
    pub format: OutputFormat,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Csv,
    Json,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Rank-plus-norm functional of a sequence per size.
    PValue {
        #[arg(long)]
        seq: String,
    },
    /// Pseudometric distance estimate between two sequences.
    AcsDist {
        #[arg(long = "seq-a")]
        seq_a: String,
        #[arg(long = "seq-b")]
        seq_b: String,
    },
    /// Zero-distribution test of a sequence.
    ZeroTest {
        #[arg(long)]
        seq: String,
        /// Comma-separated epsilon grid (default 0.1,0.25,0.5).
        #[arg(long)]
        epsilons: Option<String>,
    },
    /// Verify a symbol against the empirical spectrum.
    Verify {
        #[arg(long)]
        seq: String,
        #[arg(long)]
        symbol: String,
        #[arg(long, value_enum, default_value_t = Mode::Eigen)]
        mode: Mode,
    },
    /// Distance in measure between diagonal interpolants and a symbol.
    Piecewise {
        #[arg(long)]
        seq: String,
        #[arg(long)]
        symbol: String,
    },
    /// Decreasing rearrangement of a symbol, emitted as a grid.
    Rearrange {
        #[arg(long)]
        symbol: String,
        /// Number of sample points of the rearranged grid.
        #[arg(long, default_value_t = 1 << 16)]
        points: usize,
    },
    /// Crescent-map extraction from the shifted family `f + 1/m`.
    Extract {
        #[arg(long)]
        symbol: String,
        #[arg(long, default_value_t = 256)]
        columns: usize,
        #[arg(long, default_value_t = 3)]
        k_max: u32,
    },
    /// Full permutation pipeline on shuffled samples of a symbol.
    TheoremDemo {
        #[arg(long)]
        symbol: String,
        #[arg(long, default_value_t = 8)]
        k_max: u32,
        #[arg(long, default_value_t = 512)]
        max_m: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Eigen,
    Singular,
}

fn parse_sizes(text: &str) -> Result<Schedule, CliError> {
    let parse_one = |s: &str| -> Result<usize, CliError> {
        s.trim().parse().map_err(|_| CliError::usage(format!("invalid size `{s}`")))
    };
    if let Some((a, b)) = text.split_once("..") {
        Schedule::doubling(parse_one(a)?, parse_one(b)?).map_err(CliError::from)
    } else {
        let sizes: Result<Vec<usize>, _> = text.split(',').map(parse_one).collect();
        Schedule::explicit(sizes?).map_err(CliError::from)
    }
}

fn build_config(cli: &Cli) -> Result<RunConfig, CliError> {
    let mut cfg = RunConfig::default();
    if let Some(sizes) = &cli.sizes {
        cfg.sizes = parse_sizes(sizes)?;
    }
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(window) = cli.tail_window {
        cfg.tail_window = window;
    }
    if let Some(threshold) = cli.threshold {
        cfg.discrepancy_threshold = threshold;
        cfg.zero_fraction_threshold = threshold;
        cfg.piecewise_threshold = threshold;
    }
    if let Some(resolution) = cli.resolution {
        cfg.grid_resolution = resolution;
        cfg.approx_resolution = resolution.min(1 << 14);
    }
    // Let explicit schedules beyond the default cap through; the cap guards
    // accidental huge sizes, not deliberate ones.
    let largest = cfg.sizes.largest();
    if largest > cfg.diagonal_cap {
        cfg.diagonal_cap = largest;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn out_dir(cli: &Cli) -> Option<PathBuf> {
    cli.out.clone().or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
}

struct Emitter {
    dir: Option<PathBuf>,
    format: OutputFormat,
    wrote: Vec<PathBuf>,
}

impl Emitter {
    fn new(cli: &Cli) -> Self {
        Emitter { dir: out_dir(cli), format: cli.format, wrote: Vec::new() }
    }

    /// Write (or print) one report in the selected format.
    fn emit(&mut self, name: &str, csv: String, json: serde_json::Value) -> Result<(), CliError> {
        let (ext, body) = match self.format {
            OutputFormat::Csv => ("csv", csv),
            OutputFormat::Json => ("json", json.to_string()),
        };
        match &self.dir {
            Some(dir) => {
                let path = dir.join(format!("{name}.{ext}"));
                report::write_text(&path, &body).map_err(CliError::from)?;
                self.wrote.push(path);
            }
            None => println!("{body}"),
        }
        Ok(())
    }

    fn summary(&self) {
        for path in &self.wrote {
            println!("wrote {}", path.display());
        }
    }
}

fn verdict_code(verdict: Verdict) -> i32 {
    if verdict.passed() {
        0
    } else {
        1
    }
}

fn sequence_from(text: &str, cfg: &RunConfig) -> Result<DiagonalSequence, CliError> {
    build_sequence(&parse_descriptor(text)?, cfg.seed)
}

pub fn run(cli: Cli) -> Result<i32, CliError> {
    let cfg = build_config(&cli)?;
    let mut emitter = Emitter::new(&cli);
    let code = match &cli.command {
        Command::PValue { seq } => {
            let seq: MatrixSequence = sequence_from(seq, &cfg)?.into();
            let zero: MatrixSequence = DiagonalSequence::constant(0.0).into();
            let report = acs_distance_estimate(&seq, &zero, &cfg)?;
            emitter.emit(
                "p_value",
                report::acs_report_csv(&report, &cfg),
                report::json_document("p-value", &cfg, &report),
            )?;
            println!("p-value tail estimate: {}", report.tail_estimate);
            0
        }
        Command::AcsDist { seq_a, seq_b } => {
            let a: MatrixSequence = sequence_from(seq_a, &cfg)?.into();
            let b: MatrixSequence = sequence_from(seq_b, &cfg)?.into();
            let report = acs_distance_estimate(&a, &b, &cfg)?;
            emitter.emit(
                "acs_distance",
                report::acs_report_csv(&report, &cfg),
                report::json_document("acs-distance", &cfg, &report),
            )?;
            println!("acs distance tail estimate: {}", report.tail_estimate);
            0
        }
        Command::ZeroTest { seq, epsilons } => {
            let seq: MatrixSequence = sequence_from(seq, &cfg)?.into();
            let eps = match epsilons {
                Some(text) => text
                    .split(',')
                    .map(|s| {
                        s.trim()
                            .parse::<f64>()
                            .map_err(|_| CliError::usage(format!("invalid epsilon `{s}`")))
                    })
                    .collect::<Result<Vec<_>, _>>()?,
                None => cfg.zero_epsilons.clone(),
            };
            let report = zero_distribution_test(&seq, &eps, &cfg)?;
            emitter.emit(
                "zero_test",
                report::zero_report_csv(&report, &cfg),
                report::json_document("zero-test", &cfg, &report),
            )?;
            println!("zero test: {}", report.verdict);
            verdict_code(report.verdict)
        }
        Command::Verify { seq, symbol, mode } => {
            let seq: MatrixSequence = sequence_from(seq, &cfg)?.into();
            let symbol = parse_symbol(symbol).map_err(CliError::expr(symbol))?.to_symbol();
            let mode = match mode {
                Mode::Eigen => SampleMode::Eigen,
                Mode::Singular => SampleMode::Singular,
            };
            let family = family_for(&seq, &symbol, mode, &cfg)?;
            let report = verify_symbol(&seq, &symbol, &family, mode, &cfg)?;
            emitter.emit(
                "verify",
                report::discrepancy_report_csv(&report, &cfg),
                report::json_document("verify", &cfg, &report),
            )?;
            println!(
                "verify: {} (tail discrepancy {} vs threshold {})",
                report.verdict, report.tail_value, report.threshold
            );
            verdict_code(report.verdict)
        }
        Command::Piecewise { seq, symbol } => {
            let seq = sequence_from(seq, &cfg)?;
            let symbol = parse_symbol(symbol).map_err(CliError::expr(symbol))?.to_symbol();
            let report = piecewise_convergence_check(&seq, &symbol, &cfg)?;
            emitter.emit(
                "piecewise",
                report::piecewise_report_csv(&report, &cfg),
                report::json_document("piecewise", &cfg, &report),
            )?;
            println!(
                "piecewise: {} (tail distance {} vs threshold {})",
                report.verdict, report.tail_value, report.threshold
            );
            verdict_code(report.verdict)
        }
        Command::Rearrange { symbol, points } => {
            let symbol = parse_symbol(symbol).map_err(CliError::expr(symbol))?.to_symbol();
            let rearranged = decreasing_rearrangement(&symbol, *points)?;
            emitter.emit(
                "rearranged",
                report::symbol_csv(&rearranged, *points, &cfg),
                report::json_document(
                    "rearranged",
                    &cfg,
                    &serde_json::json!({
                        "symbol": symbol.descriptor(),
                        "points": points,
                    }),
                ),
            )?;
            println!("rearranged `{}` at {} points", symbol.descriptor(), points);
            0
        }
        Command::Extract { symbol, columns, k_max } => {
            let symbol = parse_symbol(symbol).map_err(CliError::expr(symbol))?.to_symbol();
            let family = DiagonalFamily::shifted_sampling(&symbol, *columns);
            let oracle = diagsym_core::acs::estimated_distance_oracle(&family, &cfg);
            let report = extract_diagonal_subsequence(&family, &oracle, *k_max, &cfg)?;
            emitter.emit(
                "extract",
                report::extraction_map_csv(&report, &cfg),
                report::json_document("extract", &cfg, &report),
            )?;
            if matches!(cli.format, OutputFormat::Csv) {
                emitter.emit(
                    "extract_verification",
                    report::extraction_verification_csv(&report, &cfg),
                    serde_json::Value::Null,
                )?;
            }
            for level in &report.levels {
                println!("level k={} -> column {} from size {}", level.k, level.m_k, level.n_k);
            }
            0
        }
        Command::TheoremDemo { symbol, k_max, max_m } => {
            let symbol = parse_symbol(symbol).map_err(CliError::expr(symbol))?.to_symbol();
            let seq = DiagonalSequence::shuffled_sampling(&symbol, cfg.seed);
            let mseq: MatrixSequence = seq.clone().into();
            let family = family_for(&mseq, &symbol, SampleMode::Eigen, &cfg)?;
            let report = construct_glt_permutation(&seq, &symbol, &family, *k_max, *max_m, &cfg)?;
            let json = report::glt_report_json(&report, &cfg);
            emitter.emit("theorem_demo", json.to_string(), json.clone())?;
            if emitter.dir.is_some() && matches!(cli.format, OutputFormat::Csv) {
                for entry in &report.plan.entries {
                    emitter.emit(
                        &format!("permutation_n{}", entry.n),
                        report::permutation_csv(entry, &cfg),
                        serde_json::Value::Null,
                    )?;
                }
            }
            println!(
                "sorted-vs-rearrangement: {} (tail {})",
                report.sorted_vs_rearrangement.verdict, report.sorted_vs_rearrangement.tail_value
            );
            println!("difference zero test:    {}", report.difference_zero.verdict);
            println!(
                "permuted-vs-symbol:      {} (tail {})",
                report.permuted_vs_symbol.verdict, report.permuted_vs_symbol.tail_value
            );
            verdict_code(report.verdict)
        }
    };
    emitter.summary();
    Ok(code)
}
