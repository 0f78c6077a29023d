//! Command-line front end. `run` returns the process exit code:
//! 0 success, 1 failed check or extraction, 2 usage or invalid input,
//! 3 I/O or malformed file.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use crate::counting::{count_configs, cut_norm_ascend, dual_function, lambda, CountingParams, Slot};
use crate::error::{invalid, Error, Result};
use crate::gowers::{gowers_norm, gowers_norm_power, GowersDegree};
use crate::harness::{run_suite, LemmaId, SuiteConfig};
use crate::io::{function_to_points, read_bounded_function, read_function, read_json, read_set};
use crate::localfn::{extract_correlating_local, ExtractionConfig};
use crate::search::{density_csv, density_table, find_config, YMode, EXACT_LIMIT};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_IO: i32 = 3;

/// Environment variable fixing the worker thread count.
pub const THREADS_ENV: &str = "UNIFORMITY_LAB_THREADS";

#[derive(Debug, Parser)]
#[command(name = "uniformity-lab", version, about = "Gowers norms, counting operators and density experiments for x, x+y, x+qy²")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Text,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LambdaMode {
    /// `Λ(f₀, f₁, f₂)`.
    Value,
    /// The dual function of `(f₀, f₁)`, as a function file.
    Dual,
    /// Cut-norm lower bound for the function in `--slot`.
    CutNorm,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SearchMode {
    Bounded,
    Unbounded,
}

impl From<SearchMode> for YMode {
    fn from(m: SearchMode) -> Self {
        match m {
            SearchMode::Bounded => YMode::Bounded,
            SearchMode::Unbounded => YMode::Unbounded,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Gowers U^s norm of a function, optionally on a residue class.
    Gowers {
        #[arg(long)]
        function: PathBuf,
        #[arg(long)]
        s: u32,
        /// Modulus of the residue class; requires --u.
        #[arg(long, requires = "u")]
        q: Option<u64>,
        #[arg(long, requires = "q")]
        u: Option<i64>,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// Counting operator, its dual function, or a cut-norm estimate.
    Lambda {
        #[arg(long)]
        q: u64,
        #[arg(long = "N")]
        n: u64,
        #[arg(long)]
        f0: Option<PathBuf>,
        #[arg(long)]
        f1: Option<PathBuf>,
        #[arg(long)]
        f2: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "value")]
        mode: LambdaMode,
        #[arg(long, default_value_t = 2)]
        slot: u8,
        #[arg(long, default_value_t = 8)]
        restarts: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// Numerical lemma checks; exits 1 if any ASSERT check fails.
    Harness {
        /// JSON suite configuration; flags below override its fields.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, value_delimiter = ',')]
        lemmas: Option<Vec<String>>,
        #[arg(long = "N", value_delimiter = ',')]
        sizes: Option<Vec<u64>>,
        #[arg(long)]
        trials: Option<u64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// JSON-lines output file; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Largest configuration-free subsets of [N]: exact up to the limit, greedy beyond.
    Search {
        #[arg(long)]
        q: u64,
        #[arg(long = "N", value_delimiter = ',', required = true)]
        sizes: Vec<u64>,
        #[arg(long, value_enum, default_value = "bounded")]
        mode: SearchMode,
        #[arg(long, default_value_t = EXACT_LIMIT)]
        exact_limit: u64,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Number of configurations inside a set, with the least witness.
    Count {
        #[arg(long)]
        q: u64,
        #[arg(long = "N")]
        n: u64,
        #[arg(long)]
        set: PathBuf,
    },
    /// Extract a local function correlating with f from a large Λ(g₀, g₁, f).
    Extract {
        #[arg(long)]
        q: u64,
        #[arg(long = "N")]
        n: u64,
        #[arg(long)]
        delta: f64,
        #[arg(long)]
        f: PathBuf,
        #[arg(long)]
        g0: PathBuf,
        #[arg(long)]
        g1: PathBuf,
        /// JSON extraction thresholds.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Write the local function alone to this file.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Exit code for a library error.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Io { .. } | Error::Json { .. } => EXIT_IO,
        Error::Numerical(_) | Error::NonConvergence { .. } | Error::Extraction { .. } => EXIT_FAILED,
        _ => EXIT_USAGE,
    }
}

/// Builds the global thread pool from [`THREADS_ENV`], if set.
pub fn configure_threads() -> Result<()> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| invalid(format!("{THREADS_ENV} must be a positive integer, got {raw:?}")))?;
    // a pool built earlier in the process stays in place
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

struct Output {
    stdout: Vec<u8>,
    stderr: Vec<u8>,
    code: i32,
}

/// Parses `args` (including the program name) and runs the command,
/// writing to the given streams.
pub fn run_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if code == EXIT_OK { out.write_all(text.as_bytes()) } else { err.write_all(text.as_bytes()) };
            return code;
        }
    };
    if let Err(e) = configure_threads() {
        let _ = writeln!(err, "error: {e}");
        return exit_code(&e);
    }
    match execute(cli.command) {
        Ok(o) => {
            let _ = out.write_all(&o.stdout);
            let _ = err.write_all(&o.stderr);
            o.code
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

/// Entry point used by the binary.
pub fn run() -> i32 {
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with(std::env::args_os(), &mut stdout.lock(), &mut stderr.lock())
}

fn to_json<T: Serialize>(value: &T) -> Vec<u8> {
    let mut v = serde_json::to_vec_pretty(value).expect("value serialises");
    v.push(b'\n');
    v
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    std::fs::write(path, bytes).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn ok(stdout: Vec<u8>) -> Result<Output> {
    Ok(Output {
        stdout,
        stderr: Vec::new(),
        code: EXIT_OK,
    })
}

fn need<'a>(path: &'a Option<PathBuf>, flag: &str) -> Result<&'a PathBuf> {
    path.as_ref().ok_or_else(|| invalid(format!("--{flag} is required in this mode")))
}

fn execute(command: Command) -> Result<Output> {
    match command {
        Command::Gowers { function, s, q, u, format } => {
            let f = read_function(&function)?;
            let deg = GowersDegree::new(s)?;
            let (target, class) = match (q, u) {
                (Some(q), Some(u)) => {
                    if q == 0 {
                        return Err(invalid("--q must be positive"));
                    }
                    (f.compress(u, q), Some((q, u)))
                }
                _ => (f, None),
            };
            let norm = gowers_norm(&target, deg);
            let power = gowers_norm_power(&target, deg);
            if format == Format::Text {
                return ok(format!("{norm}\n").into_bytes());
            }
            let mut v = json!({ "s": s, "norm": norm, "power": power });
            if let Some((q, u)) = class {
                v["q"] = json!(q);
                v["u"] = json!(u);
            }
            ok(to_json(&v))
        }
        Command::Lambda {
            q,
            n,
            f0,
            f1,
            f2,
            mode,
            slot,
            restarts,
            seed,
            out,
            format,
        } => {
            let p = CountingParams::new(q, n)?;
            let bytes = match mode {
                LambdaMode::Value => {
                    let v = lambda(
                        &p,
                        &read_function(need(&f0, "f0")?)?,
                        &read_function(need(&f1, "f1")?)?,
                        &read_function(need(&f2, "f2")?)?,
                    );
                    if format == Format::Text {
                        format!("{} {}\n", v.re, v.im).into_bytes()
                    } else {
                        to_json(&json!({ "q": q, "N": n, "M": p.m(), "re": v.re, "im": v.im, "abs": v.norm() }))
                    }
                }
                LambdaMode::Dual => {
                    let d = dual_function(&p, &read_function(need(&f0, "f0")?)?, &read_function(need(&f1, "f1")?)?);
                    to_json(&function_to_points(&d))
                }
                LambdaMode::CutNorm => {
                    let slot = Slot::new(slot)?;
                    let path = [&f0, &f1, &f2][slot.index()];
                    let flag = ["f0", "f1", "f2"][slot.index()];
                    let f = read_bounded_function(need(path, flag)?)?;
                    let est = cut_norm_ascend(&p, &f, slot, restarts, seed);
                    to_json(&json!({
                        "q": q, "N": n, "slot": slot.index(), "lower": est.lower,
                        "restart": est.restart, "sweeps": est.sweeps,
                    }))
                }
            };
            match out {
                Some(path) => {
                    write_file(&path, &bytes)?;
                    ok(Vec::new())
                }
                None => ok(bytes),
            }
        }
        Command::Harness {
            config,
            lemmas,
            sizes,
            trials,
            seed,
            out,
        } => {
            let mut cfg: SuiteConfig = match &config {
                Some(path) => read_json(path)?,
                None => SuiteConfig::default(),
            };
            if let Some(names) = lemmas {
                cfg.lemmas = names.iter().map(|s| s.parse::<LemmaId>()).collect::<Result<_>>()?;
            }
            if let Some(sizes) = sizes {
                cfg.sizes = sizes;
            }
            if let Some(t) = trials {
                cfg.trials = t;
            }
            let res = run_suite(&cfg, seed)?;
            let lines = res.to_jsonl().into_bytes();
            let stderr = to_json(&res.summary);
            let code = if res.summary.ok() { EXIT_OK } else { EXIT_FAILED };
            let stdout = match out {
                Some(path) => {
                    write_file(&path, &lines)?;
                    Vec::new()
                }
                None => lines,
            };
            Ok(Output { stdout, stderr, code })
        }
        Command::Search {
            q,
            sizes,
            mode,
            exact_limit,
            format,
            out,
        } => {
            let rows = density_table(q, &sizes, mode.into(), exact_limit)?;
            let bytes = match format {
                Format::Json => to_json(&rows),
                _ => density_csv(&rows).into_bytes(),
            };
            match out {
                Some(path) => {
                    write_file(&path, &bytes)?;
                    ok(Vec::new())
                }
                None => ok(bytes),
            }
        }
        Command::Count { q, n, set } => {
            let p = CountingParams::new(q, n)?;
            let set = read_set(&set)?;
            let count = count_configs(&set, &p)?;
            let witness = find_config(&set, &p, YMode::Bounded)?;
            ok(to_json(&json!({ "q": q, "N": n, "count": count, "witness": witness })))
        }
        Command::Extract {
            q,
            n,
            delta,
            f,
            g0,
            g1,
            config,
            out,
        } => {
            let p = CountingParams::new(q, n)?;
            let cfg: ExtractionConfig = match &config {
                Some(path) => read_json(path)?,
                None => ExtractionConfig::default(),
            };
            let f = read_function(&f)?;
            let g0 = read_function(&g0)?;
            let g1 = read_function(&g1)?;
            match extract_correlating_local(&p, &f, &g0, &g1, delta, &cfg) {
                Ok(ex) => {
                    if let Some(path) = &out {
                        write_file(path, &to_json(&ex.local))?;
                    }
                    ok(to_json(&json!({
                        "local": ex.local,
                        "correlation": { "re": ex.correlation.re, "im": ex.correlation.im, "abs": ex.correlation.norm() },
                        "diagnostics": ex.diagnostics,
                    })))
                }
                Err(fail) => Ok(Output {
                    stdout: to_json(&json!({
                        "stage": fail.stage,
                        "message": fail.message,
                        "correlation": fail.correlation,
                        "diagnostics": fail.diagnostics,
                    })),
                    stderr: format!("extraction failed at the {} stage: {}\n", fail.stage, fail.message).into_bytes(),
                    code: EXIT_FAILED,
                }),
            }
        }
    }
}
