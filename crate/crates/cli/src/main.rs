use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use matmodel_core::correlator::{thin_genus, CACHE_ENV};
use matmodel_core::golden::{golden_documents, render};
use matmodel_core::renormalization::{fat_in_i, render_q, structural_fgn};
use matmodel_core::verify::{run_suite, SuiteConfig, SUITES};
use matmodel_core::wick::{WickOracle, DEFAULT_MAX_DARTS};
use matmodel_core::{CorrelatorEngine, FreeEnergySeries, GenusPolynomial, ICoordinateFrame, Partition, VerificationReport};

/// Largest |λ| the recursion accepts without --force.
const RECURSION_CAP: u32 = 24;
/// Largest truncation for series commands without --force.
const SERIES_CAP: u32 = 12;

#[derive(Parser, Debug)]
#[command(name = "matmodel", version, about = "Exact genus expansions of the Hermitian one-matrix model")]
struct Cli {
    /// Output format
    #[arg(long, value_enum, default_value_t = Format::Text, global = true)]
    format: Format,

    /// Directory for the persistent correlator cache
    #[arg(long, env = CACHE_ENV, global = true)]
    cache_dir: Option<PathBuf>,

    /// Worker threads (default: all cores)
    #[arg(long, global = true)]
    jobs: Option<usize>,

    /// Allow sizes above the built-in caps
    #[arg(long, global = true)]
    force: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum CorrKind {
    Thin,
    Fat,
    /// Brute-force Wick pairing sum (thin genus)
    Wick,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Expansion {
    Thin,
    Fat,
    #[value(name = "1d")]
    OneD,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// A single connected correlator
    Corr {
        #[arg(value_enum)]
        kind: CorrKind,
        /// Partition, e.g. 3,5 or 3^2,4
        #[arg(short, long)]
        parts: Partition,
        /// Genus; inferred from the selection rule when omitted
        #[arg(short, long, allow_hyphen_values = true)]
        genus: Option<i64>,
    },
    /// A genus layer of the free energy
    FreeEnergy {
        #[arg(short, long, default_value_t = 6)]
        degree: u32,
        #[arg(short, long, default_value_t = 0)]
        genus: u32,
        #[arg(long, value_enum, default_value_t = Expansion::Thin)]
        expansion: Expansion,
    },
    /// Renormalized couplings I_k as series in t_k
    Icoords {
        #[arg(short, long, default_value_t = 6)]
        degree: u32,
        /// Show a single I_k
        #[arg(short = 'k', long)]
        index: Option<u32>,
        /// Show q_n instead of I_k
        #[arg(long)]
        q: bool,
    },
    /// F_g in renormalized couplings
    Structure {
        #[arg(short, long)]
        genus: u32,
        /// Rewrite in the q_n variables
        #[arg(long)]
        q: bool,
        /// Fat genus instead of thin, keeping t-layers up to --layers
        #[arg(long)]
        fat: bool,
        #[arg(long, default_value_t = 3)]
        layers: u32,
    },
    /// Run a verification suite
    Verify {
        /// oracle, fat-thin, free-energy, icoords, structure, renormalization, virasoro or all
        suite: String,
        #[arg(long, default_value_t = 8)]
        max_degree: u32,
    },
    /// Write golden JSON files for the free energies
    Export {
        #[arg(short, long, default_value_t = 8)]
        degree: u32,
        /// Output directory
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
}

/// Bad input that clap could not catch; exits with status 2.
#[derive(Debug)]
struct Usage(String);

impl std::fmt::Display for Usage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

fn usage<T>(msg: impl Into<String>) -> Result<T> {
    Err(Usage(msg.into()).into())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) if e.is::<Usage>() => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn cap(value: u32, limit: u32, what: &str, force: bool) -> Result<()> {
    if value > limit && !force {
        return usage(format!("{what} {value} exceeds the cap of {limit}; pass --force to proceed"));
    }
    Ok(())
}

fn engine(cli: &Cli) -> Result<CorrelatorEngine> {
    match &cli.cache_dir {
        Some(dir) => CorrelatorEngine::with_cache_dir(dir).with_context(|| format!("loading cache from {}", dir.display())),
        None => Ok(CorrelatorEngine::new()),
    }
}

fn emit(format: Format, text: impl FnOnce() -> String, value: impl FnOnce() -> Value) {
    match format {
        Format::Text => println!("{}", text()),
        Format::Json => println!("{}", serde_json::to_string_pretty(&value()).expect("serializable")),
    }
}

/// Returns whether every check passed.
fn run(cli: Cli) -> Result<bool> {
    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            return usage("--jobs must be positive");
        }
        rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global().context("configuring worker pool")?;
    }
    let engine = engine(&cli)?;
    let ok = match &cli.command {
        Command::Corr { kind, parts, genus } => corr(&cli, &engine, *kind, parts, *genus)?,
        Command::FreeEnergy { degree, genus, expansion } => {
            cap(*degree, SERIES_CAP, "degree", cli.force)?;
            let f = FreeEnergySeries::assemble(&engine, *degree);
            match expansion {
                Expansion::Thin => {
                    let s = f.genus_series(*genus);
                    emit(cli.format, || s.to_string(), || s.to_json());
                }
                Expansion::Fat => {
                    let s = f.fat_expansion(*genus);
                    emit(cli.format, || s.to_string(), || s.to_json());
                }
                Expansion::OneD => {
                    let s = f.one_d_specialize(*genus);
                    emit(cli.format, || s.to_string(), || s.to_json());
                }
            }
            true
        }
        Command::Icoords { degree, index, q } => {
            cap(*degree, SERIES_CAP, "degree", cli.force)?;
            let frame = ICoordinateFrame::build(*degree)?;
            let (name, range): (&str, Vec<u32>) = match (q, index) {
                (false, Some(k)) => ("I", vec![*k]),
                (false, None) => ("I", (0..*degree).collect()),
                (true, Some(n)) => ("q", vec![*n]),
                (true, None) => ("q", (1..degree.saturating_sub(1)).collect()),
            };
            let get = |k: u32| if *q { frame.q(k) } else { frame.i(k) };
            emit(
                cli.format,
                || range.iter().map(|&k| format!("{name}_{k} = {}", get(k))).collect::<Vec<_>>().join("\n"),
                || Value::Array(range.iter().map(|&k| json!({ "symbol": format!("{name}_{k}"), "series": get(k).to_json() })).collect()),
            );
            true
        }
        Command::Structure { genus, q, fat, layers } => {
            cap(2 * genus + 2, RECURSION_CAP, "degree", cli.force)?;
            if *fat {
                cap(2 * (2 * genus + layers) + 2, RECURSION_CAP, "degree", cli.force)?;
                let s = fat_in_i(&engine, *genus, *layers);
                emit(cli.format, || s.to_string(), || s.to_json());
            } else if *q {
                if *genus < 2 {
                    return usage("the q form exists for genus at least 2");
                }
                let s = structural_fgn(&engine, *genus).to_q().expect("genus at least 2");
                emit(
                    cli.format,
                    || render_q(&s),
                    || Value::Array(s.iter().map(|(m, c)| json!({ "monomial": m.to_json(), "coeff": c.to_json() })).collect()),
                );
            } else {
                let s = structural_fgn(&engine, *genus);
                emit(cli.format, || s.to_string(), || s.to_json());
            }
            true
        }
        Command::Verify { suite, max_degree } => verify(&cli, &engine, suite, *max_degree)?,
        Command::Export { degree, out } => {
            cap(*degree, SERIES_CAP, "degree", cli.force)?;
            let f = FreeEnergySeries::assemble(&engine, *degree);
            fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
            for (name, doc) in golden_documents(&f) {
                let path = out.join(name);
                fs::write(&path, render(&doc)).with_context(|| format!("writing {}", path.display()))?;
                eprintln!("wrote {}", path.display());
            }
            true
        }
    };
    if engine.cache_dir().is_some() {
        engine.persist().context("saving correlator cache")?;
    }
    Ok(ok)
}

fn corr(cli: &Cli, engine: &CorrelatorEngine, kind: CorrKind, parts: &Partition, genus: Option<i64>) -> Result<bool> {
    let (value, genus): (GenusPolynomial, i64) = match kind {
        CorrKind::Thin => {
            cap(parts.size(), RECURSION_CAP, "degree", cli.force)?;
            let g = match genus.or_else(|| thin_genus(parts).map(i64::from)) {
                Some(g) => g,
                None => return usage(format!("no genus satisfies the thin selection rule for {parts}")),
            };
            (engine.thin(parts, g), g)
        }
        CorrKind::Fat => {
            cap(parts.size(), RECURSION_CAP, "degree", cli.force)?;
            let Some(g) = genus else { return usage("fat correlators need --genus") };
            (engine.fat(parts, g), g)
        }
        CorrKind::Wick => {
            let limit = if cli.force { usize::MAX } else { DEFAULT_MAX_DARTS };
            if parts.size() as usize > limit {
                return usage(format!("{} darts exceeds the cap of {limit}; pass --force to proceed", parts.size()));
            }
            let oracle = WickOracle::new(limit).parallel(cli.jobs != Some(1));
            let (g, v) = oracle.oracle_correlator(parts)?;
            if genus.is_some_and(|h| h != g) {
                return usage(format!("{parts} only contributes at genus {g}"));
            }
            (v, g)
        }
    };
    emit(
        cli.format,
        || value.to_string(),
        || json!({ "parts": parts.parts(), "genus": genus, "flavor": format!("{kind:?}").to_lowercase(), "poly": value.to_json() }),
    );
    Ok(true)
}

fn verify(cli: &Cli, engine: &CorrelatorEngine, suite: &str, max_degree: u32) -> Result<bool> {
    if suite != "all" && !SUITES.contains(&suite) {
        return usage(format!("unknown suite {suite:?}; expected one of {} or all", SUITES.join(", ")));
    }
    cap(max_degree, SERIES_CAP, "max degree", cli.force)?;
    let wick = WickOracle::new(if cli.force { usize::MAX } else { DEFAULT_MAX_DARTS }).parallel(cli.jobs != Some(1));
    if (suite == "oracle" || suite == "all")
        && max_degree as usize > wick.max_darts {
            return usage(format!("oracle degree {max_degree} exceeds the cap of {}; pass --force to proceed", wick.max_darts));
        }
    let reports = run_suite(engine, suite, SuiteConfig { max_degree, wick })?;
    let passed = reports.iter().filter(|r| r.passed()).count();
    let unit = if suite == "oracle" { "partitions" } else { "checks" };
    let status = if passed == reports.len() { "OK" } else { "FAIL" };
    emit(
        cli.format,
        || {
            let mut lines: Vec<String> = reports.iter().filter(|r| !r.passed()).map(VerificationReport::to_string).collect();
            lines.push(format!("{status}: {passed}/{} {unit}", reports.len()));
            lines.join("\n")
        },
        || json!({ "suite": suite, "passed": passed, "total": reports.len(), "reports": reports.iter().map(VerificationReport::to_json).collect::<Vec<_>>() }),
    );
    Ok(passed == reports.len())
}
