//! Command-line front end.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::json;

use crate::bitmatrix::MAX_DENSE_EXP;
use crate::code::{audit_css, initial_info_set, validate_css, validate_precoder, CodeFile, Precoder, QuantumCode, ValidityReport};
use crate::error::{Error, Result};
use crate::ga::{GaConfig, GenerationRecord, Optimizer};
use crate::gates::gate_report;
use crate::montecarlo::{run_sweep, to_csv, SimulationReport, DEFAULT_MIN_FAILURES};

pub const EXIT_OK: u8 = 0;
pub const EXIT_VALIDATION: u8 = 1;
pub const EXIT_USAGE: u8 = 2;
pub const EXIT_IO: u8 = 3;

#[derive(Debug, Parser)]
#[command(name = "qpolar", version, about = "Quantum precoded polar codes")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write the reliability-ordered code with identity precoder.
    Construct {
        /// Code length exponent, N = 2^n.
        #[arg(long = "n")]
        n_exp: u32,
        /// Design depolarizing probability.
        #[arg(long)]
        p: f64,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Check the CSS, precoder and symplectic constraints.
    Validate {
        code: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Monte Carlo logical error rate sweep.
    Simulate(SimulateArgs),
    /// Joint genetic search from a config document.
    Optimize {
        config: PathBuf,
        #[arg(short, long)]
        out: PathBuf,
        /// Generation log, one JSON object per line.
        #[arg(long)]
        log: Option<PathBuf>,
        #[arg(long, env = "QPOLAR_THREADS")]
        threads: Option<usize>,
    },
    /// Clifford gate counts for encoding and syndrome extraction.
    Gatecount {
        code: PathBuf,
        #[arg(long)]
        json: bool,
    },
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    pub code: PathBuf,
    /// Comma-separated depolarizing probabilities.
    #[arg(long, value_delimiter = ',', required = true)]
    pub p: Vec<f64>,
    #[arg(short = 'L', long, default_value_t = 8)]
    pub list_size: usize,
    #[arg(long)]
    pub trials: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Stop a point early after this many failures; 0 disables.
    #[arg(long, default_value_t = DEFAULT_MIN_FAILURES)]
    pub min_failures: u64,
    #[arg(short, long)]
    pub out: Option<PathBuf>,
    /// Emit the JSON report (with the embedded code) instead of CSV.
    #[arg(long)]
    pub json: bool,
    #[arg(long, env = "QPOLAR_THREADS")]
    pub threads: Option<usize>,
}

/// Exit status for a library error.
pub fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Io(_) => EXIT_IO,
        Error::Parse { .. } | Error::InvalidArgument(_) => EXIT_USAGE,
        Error::Validation(_) | Error::DegenerateMessage | Error::DecodeFailure => EXIT_VALIDATION,
    }
}

fn io_context(path: &Path, e: Error) -> Error {
    match e {
        Error::Io(io) => Error::Io(std::io::Error::new(io.kind(), format!("{}: {io}", path.display()))),
        other => other,
    }
}

fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| io_context(path, e.into()))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| io_context(path, e.into()))
}

fn load_code_file(path: &Path) -> Result<CodeFile> {
    CodeFile::parse(&read_text(path)?)
}

fn set_threads(threads: Option<usize>) -> Result<()> {
    if let Some(t) = threads {
        if t == 0 {
            return Err(Error::invalid("--threads must be at least 1"));
        }
        // a second initialization in the same process keeps the first pool
        let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
    }
    Ok(())
}

/// Every structural check on a parsed code file.
pub fn full_report(file: &CodeFile) -> Result<ValidityReport> {
    let (spec, t) = file.to_parts()?;
    let mut report = validate_css(&spec);
    report.extend(validate_precoder(&t, &spec)?);
    if spec.n_exp() <= MAX_DENSE_EXP {
        report.extend(audit_css(&spec, &t)?);
    }
    Ok(report)
}

/// Parses and validates, refusing invalid codes.
fn load_valid_code(path: &Path) -> Result<(CodeFile, QuantumCode)> {
    let file = load_code_file(path)?;
    let report = full_report(&file)?;
    if !report.is_valid() {
        return Err(Error::Validation(report.to_string()));
    }
    let code = file.to_code()?;
    Ok((file, code))
}

pub fn cmd_construct(n_exp: u32, p: f64, out: &Path) -> Result<CodeFile> {
    let spec = initial_info_set(n_exp, p)?;
    let mut meta = BTreeMap::new();
    meta.insert("source".into(), json!("construct"));
    meta.insert("p".into(), json!(p));
    let file = CodeFile::from_parts(&spec, &Precoder::identity(spec.n()), meta);
    file.save(out).map_err(|e| io_context(out, e))?;
    Ok(file)
}

#[derive(Serialize)]
struct ValidateOutput<'a> {
    valid: bool,
    n: usize,
    k: usize,
    precoder_nnz: usize,
    violations: &'a ValidityReport,
}

/// Returns the report and the rendered output.
pub fn cmd_validate(path: &Path, as_json: bool) -> Result<(ValidityReport, String)> {
    let file = load_code_file(path)?;
    let report = full_report(&file)?;
    let (spec, t) = file.to_parts()?;
    let text = if as_json {
        let out = ValidateOutput {
            valid: report.is_valid(),
            n: spec.n(),
            k: spec.k(),
            precoder_nnz: t.nnz(),
            violations: &report,
        };
        serde_json::to_string_pretty(&out).expect("serializable") + "\n"
    } else if report.is_valid() {
        format!("PASS N={} K={} logical={} nnz(T)={}\n", spec.n(), spec.k(), 2 * spec.k() - spec.n(), t.nnz())
    } else {
        let mut s = format!("FAIL N={} K={}\n", spec.n(), spec.k());
        for v in &report.violations {
            s.push_str(&format!("  {v}\n"));
        }
        s
    };
    Ok((report, text))
}

/// Returns the rendered CSV or JSON text.
pub fn cmd_simulate(args: &SimulateArgs) -> Result<String> {
    set_threads(args.threads)?;
    let (file, code) = load_valid_code(&args.code)?;
    let points = run_sweep(&code, &args.p, args.list_size, args.trials, args.seed, args.min_failures)?;
    let text = if args.json {
        let report = SimulationReport {
            code: file,
            seed: args.seed,
            min_failures: args.min_failures,
            points,
        };
        serde_json::to_string_pretty(&report).expect("serializable") + "\n"
    } else {
        to_csv(&points)
    };
    if let Some(out) = &args.out {
        write_text(out, &text)?;
    }
    Ok(text)
}

/// Loads the config, resolving `seed_code` against the config's directory.
pub fn load_config(path: &Path) -> Result<(GaConfig, QuantumCode)> {
    let cfg = GaConfig::parse(&read_text(path)?)?;
    let seed = match &cfg.seed_code {
        Some(rel) => {
            let full = path.parent().unwrap_or(Path::new(".")).join(rel);
            load_valid_code(&full)?.1
        }
        None => QuantumCode::unprecoded(initial_info_set(cfg.n_exp, cfg.p)?)?,
    };
    Ok((cfg, seed))
}

pub fn cmd_optimize(config: &Path, out: &Path, log: Option<&Path>, threads: Option<usize>) -> Result<CodeFile> {
    set_threads(threads)?;
    let (cfg, seed) = load_config(config)?;
    if !seed.precoder().is_identity() {
        // the search starts from T = I; a precoded seed contributes its set
        eprintln!("note: seed precoder ignored, search starts from T = I");
    }
    let mut log_file = match log {
        Some(p) => Some(std::io::BufWriter::new(
            std::fs::File::create(p).map_err(|e| io_context(p, e.into()))?,
        )),
        None => None,
    };
    let mut log_err: Option<std::io::Error> = None;
    let best = {
        let sink = |r: &GenerationRecord| {
            if let Some(w) = log_file.as_mut() {
                let line = serde_json::to_string(r).expect("serializable");
                if let Err(e) = writeln!(w, "{line}") {
                    log_err.get_or_insert(e);
                }
            }
        };
        Optimizer::new(cfg.clone(), seed.spec().clone())?.with_log(sink).joint_optimize()?
    };
    if let Some(mut w) = log_file {
        if let Err(e) = w.flush() {
            log_err.get_or_insert(e);
        }
    }
    if let Some(e) = log_err {
        return Err(io_context(log.expect("log set"), e.into()));
    }
    let mut meta = BTreeMap::new();
    meta.insert("source".into(), json!("optimize"));
    meta.insert("p".into(), json!(cfg.p));
    meta.insert("L".into(), json!(cfg.list_size));
    meta.insert("fitness".into(), json!(best.fitness));
    meta.insert("fitness_trials".into(), json!(best.eval_trials));
    meta.insert("seed".into(), json!(cfg.seed));
    meta.insert("outer_iters".into(), json!(cfg.outer_iters));
    let file = CodeFile::from_code(&best.code, meta);
    file.save(out).map_err(|e| io_context(out, e))?;
    Ok(file)
}

pub fn cmd_gatecount(path: &Path, as_json: bool) -> Result<String> {
    let (_, code) = load_valid_code(path)?;
    let r = gate_report(&code)?;
    Ok(if as_json {
        serde_json::to_string_pretty(&r).expect("serializable") + "\n"
    } else {
        format!(
            "N                         {}\n\
             nnz(T)                    {}\n\
             encoder extra gates       {}\n\
             stabilizer nnz            {}\n\
             syndrome extraction gates {}\n\
             delta vs unprecoded       {:+}\n\
             surface code reference    {}\n",
            r.n, r.precoder_nnz, r.encoder_extra_gates, r.stab_nnz, r.total_gates, r.delta_vs_unprecoded, r.surface_code_reference
        )
    })
}

fn dispatch(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Construct { n_exp, p, out } => {
            let file = cmd_construct(n_exp, p, &out)?;
            eprintln!("wrote N={} K={} to {}", 1usize << file.n_exp, file.info_set.len(), out.display());
            Ok(EXIT_OK)
        }
        Command::Validate { code, json } => {
            let (report, text) = cmd_validate(&code, json)?;
            print!("{text}");
            Ok(if report.is_valid() { EXIT_OK } else { EXIT_VALIDATION })
        }
        Command::Simulate(args) => {
            let text = cmd_simulate(&args)?;
            if args.out.is_none() {
                print!("{text}");
            }
            Ok(EXIT_OK)
        }
        Command::Optimize { config, out, log, threads } => {
            let file = cmd_optimize(&config, &out, log.as_deref(), threads)?;
            eprintln!(
                "wrote N={} nnz(T)={} fitness={} to {}",
                1usize << file.n_exp,
                (1usize << file.n_exp) + 2 * file.precoder_offdiag.len(),
                file.meta.get("fitness").cloned().unwrap_or_default(),
                out.display()
            );
            Ok(EXIT_OK)
        }
        Command::Gatecount { code, json } => {
            print!("{}", cmd_gatecount(&code, json)?);
            Ok(EXIT_OK)
        }
    }
}

/// Parses `args` and runs the selected subcommand.
pub fn run<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { EXIT_OK });
        }
    };
    match dispatch(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn clap_definition() {
        Cli::command().debug_assert();
    }

    #[test]
    fn exit_codes() {
        assert_eq!(exit_code(&Error::Validation("x".into())), EXIT_VALIDATION);
        assert_eq!(exit_code(&Error::parse("n_exp", "bad")), EXIT_USAGE);
        assert_eq!(exit_code(&Error::Io(std::io::Error::other("x"))), EXIT_IO);
    }

    #[test]
    fn construct_validate_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.json");
        let file = cmd_construct(6, 0.05, &path).unwrap();
        assert_eq!(file.info_set.len(), 33);
        let (report, text) = cmd_validate(&path, false).unwrap();
        assert!(report.is_valid(), "{text}");
        assert!(text.starts_with("PASS"));
    }
}
