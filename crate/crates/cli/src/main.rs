//! Command-line front end: generate states, analyze separability, compute
//! area invariants, apply local unitaries, and compare states.
//!
//! Verdicts are data, not exit codes: analysis success exits 0 regardless of
//! the outcome, unless --assert is passed (exit 1 on a failed assertion).
//! Malformed inputs exit 2.

mod report;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use serde_json::json;

use crcover::area::{area_pair, Region};
use crcover::io::{build_local_unitary, read_lu_spec, read_state, write_state};
use crcover::motion::{apply_lu, motion_equivalent};
use crcover::{enumerate_bipartitions, is_partially_separable, Bipartition, PureState};
use report::{RunReport, Tolerances};

#[derive(Parser)]
#[command(name = "crcover", version, about = "Convex-rigid-cover analysis of continuous-variable pure states")]
struct Cli {
    /// Shrink tolerance for the separability criterion.
    #[arg(long, global = true, default_value_t = crcover::tol::SHRINK_TOL)]
    tol_shrink: f64,
    /// Tolerance for cover identity / motion equivalence.
    #[arg(long, global = true, default_value_t = crcover::tol::MOTION_TOL)]
    tol_motion: f64,
    /// Base seed for unseeded random kernels.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads (0 = library default).
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    /// Tabular summary instead of JSON.
    #[arg(long, global = true)]
    human: bool,
    /// Exit 1 when the analyzed property does not hold.
    #[arg(long = "assert", global = true)]
    assert_flag: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a state file from a generation spec (generator or raw tensor).
    Gen {
        spec_file: PathBuf,
        out_file: PathBuf,
        /// Write coefficients to this binary sidecar instead of inline JSON.
        #[arg(long)]
        binary: Option<String>,
    },
    /// Summarize a state file.
    Info { state_file: PathBuf },
    /// List all bipartitions of n modes.
    Partitions { n: usize },
    /// Shrink-criterion separability verdicts with the Schmidt oracle.
    Separability {
        state_file: PathBuf,
        /// One partition "1,3|2"; default analyzes all bipartitions.
        #[arg(long)]
        partition: Option<String>,
        /// Analyze every bipartition (the default when --partition is absent).
        #[arg(long)]
        all: bool,
    },
    /// Area pair of one bipartition over a region.
    Area {
        state_file: PathBuf,
        #[arg(long)]
        partition: String,
        /// Per-mode region, comma-separated "a:b" or "full" entries.
        #[arg(long)]
        region: Option<String>,
    },
    /// Apply a local unitary and write the transformed state.
    Lu {
        state_file: PathBuf,
        lu_spec_file: PathBuf,
        out_file: PathBuf,
    },
    /// Motion-equivalence comparison of two states.
    Compare { a_file: PathBuf, b_file: PathBuf },
}

enum CliError {
    Input(String),
    AssertFailed,
}

impl From<crcover::Error> for CliError {
    fn from(e: crcover::Error) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<crcover::io::FileError> for CliError {
    fn from(e: crcover::io::FileError) -> Self {
        CliError::Input(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.threads > 0 {
        // Ignore failure: the pool can only be set once per process.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(cli.threads)
            .build_global();
    }
    let start = Instant::now();
    let mut report = RunReport {
        command: String::new(),
        version: crcover::VERSION.to_string(),
        tolerances: Tolerances {
            shrink_tol: cli.tol_shrink,
            motion_tol: cli.tol_motion,
            weight_floor: crcover::tol::WEIGHT_FLOOR,
        },
        inputs: Vec::new(),
        results: serde_json::Value::Null,
        warnings: Vec::new(),
        timing_ms: 0,
    };
    let outcome = run(&cli, &mut report);
    report.timing_ms = start.elapsed().as_millis() as u64;
    match outcome {
        Ok(()) => {
            emit(&cli, &report);
            ExitCode::SUCCESS
        }
        Err(CliError::AssertFailed) => {
            emit(&cli, &report);
            ExitCode::from(1)
        }
        Err(CliError::Input(message)) => {
            eprintln!("error: {message}");
            ExitCode::from(2)
        }
    }
}

fn emit(cli: &Cli, report: &RunReport) {
    if cli.human {
        print!("{}", report.to_human());
    } else {
        println!("{}", report.to_json());
    }
}

fn run(cli: &Cli, report: &mut RunReport) -> Result<(), CliError> {
    match &cli.command {
        Command::Gen {
            spec_file,
            out_file,
            binary,
        } => {
            report.command = "gen".into();
            report.digest_file(spec_file);
            let (state, warnings) = read_state(spec_file)?;
            for w in warnings {
                report.warnings.push(w.to_string());
            }
            // Keep the generator in the output header for provenance.
            let header: crcover::io::StateFile = serde_json::from_str(
                &std::fs::read_to_string(spec_file)
                    .map_err(|e| CliError::Input(e.to_string()))?,
            )
            .map_err(|e| CliError::Input(e.to_string()))?;
            let generator = header.generator.as_ref().map(|g| g.to_spec());
            write_state(out_file, &state, generator.as_ref(), binary.as_deref())?;
            report.results = json!({
                "out_file": out_file.display().to_string(),
                "norm": state.norm_sq().sqrt(),
                "modes": mode_summary(&state),
            });
            Ok(())
        }
        Command::Info { state_file } => {
            report.command = "info".into();
            report.digest_file(state_file);
            let (state, warnings) = read_state(state_file)?;
            for w in warnings {
                report.warnings.push(w.to_string());
            }
            report.results = json!({
                "n_modes": state.n_modes(),
                "modes": mode_summary(&state),
                "elements": state.coeffs().len(),
                "norm": state.norm_sq().sqrt(),
                "bipartitions": (1usize << (state.n_modes() - 1)) - 1,
            });
            Ok(())
        }
        Command::Partitions { n } => {
            report.command = "partitions".into();
            let parts = enumerate_bipartitions(*n)?;
            report.results = json!({
                "n": n,
                "count": parts.len(),
                "partitions": parts.iter().map(|p| p.to_string()).collect::<Vec<_>>(),
            });
            Ok(())
        }
        Command::Separability {
            state_file,
            partition,
            all: _,
        } => {
            report.command = "separability".into();
            report.digest_file(state_file);
            let (state, warnings) = read_state(state_file)?;
            for w in warnings {
                report.warnings.push(w.to_string());
            }
            let parts = match partition {
                Some(text) => vec![Bipartition::parse(text, state.n_modes())?],
                None => enumerate_bipartitions(state.n_modes())?,
            };
            let mut verdicts = Vec::new();
            let mut all_separable = true;
            for part in &parts {
                let analysis = is_partially_separable(&state, part, cli.tol_shrink)?;
                if let Some(diag) = &analysis.pair_disagreement {
                    report.warnings.push(format!(
                        "cover-pair disagreement on {}: r max {:.6e} (shrinks: {}), s max {:.6e} (shrinks: {})",
                        part, diag.max_r, diag.r_shrinks, diag.max_s, diag.s_shrinks
                    ));
                }
                all_separable &= analysis.verdict.separable;
                verdicts.push(analysis.verdict);
            }
            report.results = json!({ "verdicts": verdicts });
            if cli.assert_flag && !all_separable {
                return Err(CliError::AssertFailed);
            }
            Ok(())
        }
        Command::Area {
            state_file,
            partition,
            region,
        } => {
            report.command = "area".into();
            report.digest_file(state_file);
            let (state, warnings) = read_state(state_file)?;
            for w in warnings {
                report.warnings.push(w.to_string());
            }
            let part = Bipartition::parse(partition, state.n_modes())?;
            let region = parse_region(region.as_deref(), &state)?;
            let pair = area_pair(&state, &part, &region)?;
            if pair.detail_r.negative_det_alert || pair.detail_s.negative_det_alert {
                report
                    .warnings
                    .push("gram determinant fell below the numerical-health threshold".into());
            }
            report.results = json!({
                "partition": pair.partition,
                "area_r_surface": pair.area_r_surface,
                "area_s_surface": pair.area_s_surface,
                "excluded_measure": {
                    "r_conditioned": pair.detail_r.excluded_measure,
                    "s_conditioned": pair.detail_s.excluded_measure,
                },
                "boundary_nodes": {
                    "r_conditioned": pair.detail_r.boundary_nodes,
                    "s_conditioned": pair.detail_s.boundary_nodes,
                },
                "region": pair.region,
                "resolution": state.shape().to_vec(),
            });
            Ok(())
        }
        Command::Lu {
            state_file,
            lu_spec_file,
            out_file,
        } => {
            report.command = "lu".into();
            report.digest_file(state_file);
            report.digest_file(lu_spec_file);
            let (state, warnings) = read_state(state_file)?;
            for w in warnings {
                report.warnings.push(w.to_string());
            }
            let spec = read_lu_spec(lu_spec_file)?;
            let lu = build_local_unitary(&spec, state.modes(), cli.seed)?;
            let transformed = apply_lu(&state, &lu)?;
            write_state(out_file, &transformed, None, None)?;
            report.results = json!({
                "out_file": out_file.display().to_string(),
                "norm": transformed.norm_sq().sqrt(),
            });
            Ok(())
        }
        Command::Compare { a_file, b_file } => {
            report.command = "compare".into();
            report.digest_file(a_file);
            report.digest_file(b_file);
            let (a, wa) = read_state(a_file)?;
            let (b, wb) = read_state(b_file)?;
            for w in wa.into_iter().chain(wb) {
                report.warnings.push(w.to_string());
            }
            let outcome = motion_equivalent(&a, &b, cli.tol_motion)?;
            report.results = serde_json::to_value(&outcome).expect("report serializes");
            if cli.assert_flag && !outcome.equivalent {
                return Err(CliError::AssertFailed);
            }
            Ok(())
        }
    }
}

fn mode_summary(state: &PureState) -> serde_json::Value {
    json!(state
        .modes()
        .iter()
        .map(|g| json!({"lower": g.lower(), "upper": g.upper(), "count": g.count()}))
        .collect::<Vec<_>>())
}

fn parse_region(text: Option<&str>, state: &PureState) -> Result<Region, CliError> {
    let Some(text) = text else {
        return Ok(Region::full(state.n_modes()));
    };
    let entries: Vec<&str> = text.split(',').collect();
    if entries.len() != state.n_modes() {
        return Err(CliError::Input(format!(
            "region needs {} comma-separated entries, got {}",
            state.n_modes(),
            entries.len()
        )));
    }
    let mut intervals = Vec::with_capacity(entries.len());
    for entry in entries {
        let entry = entry.trim();
        if entry.eq_ignore_ascii_case("full") {
            intervals.push(None);
            continue;
        }
        let (lo, hi) = entry
            .split_once(':')
            .ok_or_else(|| CliError::Input(format!("bad region entry {entry:?}, want a:b or full")))?;
        let lo: f64 = lo
            .trim()
            .parse()
            .map_err(|_| CliError::Input(format!("bad region bound {lo:?}")))?;
        let hi: f64 = hi
            .trim()
            .parse()
            .map_err(|_| CliError::Input(format!("bad region bound {hi:?}")))?;
        intervals.push(Some((lo, hi)));
    }
    Ok(Region::new(intervals))
}
