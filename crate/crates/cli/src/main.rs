//! `latdft`: validation, reduction, lattice DFT construction, circuit
//! simulation, sampling and the self-test suite from the command line.
//!
//! Exit codes: 0 success, 1 usage or I/O error, 2 domain rejection,
//! 3 self-test failure.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use num_bigint::BigInt;
use num_complex::Complex64;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use latdft::dft::{dft_matrix_with_guard, DFT_SIZE_GUARD};
use latdft::error::Error;
use latdft::intlat::{parse_matrix, parse_rational, rational_to_string, ExactMatrix};
use latdft::qcirc::{simulate_sysnf_qft, write_snapshot, Statevector};
use latdft::sampler::{run_experiment_with, SampleConfig, SampleOptions};
use latdft::selftest::run_all;
use latdft::sysnf::{enumerate_ln_with_guard, reduce_to_sysnf, validate, SysNFBasis};

const EXIT_USAGE: u8 = 1;
const EXIT_DOMAIN: u8 = 2;
const EXIT_SELFTEST: u8 = 3;

const AGREEMENT_TOL: f64 = 1e-10;

#[derive(Parser)]
#[command(name = "latdft", version, about = "Lattice DFT toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check whether a basis matrix is in systematic normal form.
    Validate(InputArgs),
    /// Reduce a full-rank integer basis to systematic normal form.
    Reduce(ReduceArgs),
    /// Build the dense lattice DFT matrix of a SysNF basis.
    Dft(GuardedArgs),
    /// Compare the simulated circuit against the dense lattice DFT.
    QftSim(GuardedArgs),
    /// Run the sampler on a JSON config and score it against the target.
    Sample(SampleArgs),
    /// Run every acceptance criterion and invariant.
    Selftest(OutArgs),
}

#[derive(Args)]
struct InputArgs {
    /// Matrix file: a "rows cols" header then one row per line.
    #[arg(long)]
    input: PathBuf,
}

#[derive(Args)]
struct OutArgs {
    /// Directory for output files; created if missing.
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Args)]
struct ReduceArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Exact rational tolerance "p/q".
    #[arg(long)]
    epsilon: String,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args)]
struct GuardedArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Largest allowed lattice DFT order |L_N|.
    #[arg(long, default_value_t = DFT_SIZE_GUARD)]
    size_guard: u128,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args)]
struct SampleArgs {
    /// JSON sampling config.
    #[arg(long)]
    input: PathBuf,
    /// Overrides the config's epsilon.
    #[arg(long)]
    epsilon: Option<String>,
    /// Overrides the config's seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the config's shot count.
    #[arg(long)]
    shots: Option<usize>,
    /// Largest number of grid points the sampler may visit.
    #[arg(long)]
    size_guard: Option<u128>,
    #[command(flatten)]
    out: OutArgs,
}

/// A failure with its exit code and the module it came from.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Self { code: EXIT_USAGE, message: message.into() }
    }

    fn tagged(module: &str, e: Error) -> Self {
        let code = match e {
            Error::Parse(_) | Error::Io(_) | Error::Json(_) | Error::Parameter(_) => EXIT_USAGE,
            _ => EXIT_DOMAIN,
        };
        Self { code, message: format!("[{module}] {e}") }
    }
}

type CmdResult = Result<u8, Failure>;

fn main() -> ExitCode {
    if let Err(f) = configure_threads() {
        eprintln!("error: {}", f.message);
        return ExitCode::from(f.code);
    }
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match &cli.command {
        Command::Validate(a) => cmd_validate(a),
        Command::Reduce(a) => cmd_reduce(a),
        Command::Dft(a) => cmd_dft(a),
        Command::QftSim(a) => cmd_qft_sim(a),
        Command::Sample(a) => cmd_sample(a),
        Command::Selftest(a) => cmd_selftest(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

/// Caps the global rayon pool at `LATDFT_THREADS` when set.
fn configure_threads() -> Result<(), Failure> {
    let Ok(raw) = std::env::var("LATDFT_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Failure::usage(format!("LATDFT_THREADS must be a positive integer, got {raw:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::usage(format!("cannot configure thread pool: {e}")))
}

fn read_text(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::usage(format!("cannot read {}: {e}", path.display())))
}

fn read_matrix(path: &Path) -> Result<(String, ExactMatrix), Failure> {
    let text = read_text(path)?;
    let m = parse_matrix(&text).map_err(|e| Failure::tagged("intlat", e))?;
    Ok((text, m))
}

fn read_sysnf(path: &Path) -> Result<(String, SysNFBasis), Failure> {
    let (text, m) = read_matrix(path)?;
    let s = validate(&m).map_err(|e| Failure::tagged("sysnf", e))?;
    Ok((text, s))
}

/// SHA-256 over the subcommand, its parameters and the input contents.
fn config_hash(command: &str, parts: &[&str]) -> String {
    let mut h = Sha256::new();
    h.update(command.as_bytes());
    for p in parts {
        h.update([0u8]);
        h.update(p.as_bytes());
    }
    format!("{:x}", h.finalize())
}

fn ensure_dir(dir: &Path) -> Result<(), Failure> {
    fs::create_dir_all(dir).map_err(|e| Failure::usage(format!("cannot create {}: {e}", dir.display())))
}

fn write_file(path: &Path, contents: &str) -> Result<(), Failure> {
    fs::write(path, contents).map_err(|e| Failure::usage(format!("cannot write {}: {e}", path.display())))
}

/// Prints the summary and stores it as `summary.json` under `out`, if given.
/// Deterministic commands record a null seed.
fn emit(summary: &Value, out: Option<&Path>) -> Result<(), Failure> {
    let mut summary = summary.clone();
    if summary.get("seed").is_none() {
        summary["seed"] = Value::Null;
    }
    let text = serde_json::to_string_pretty(&summary).expect("JSON values serialize");
    // a closed stdout (e.g. piped into `head`) is not an error
    let _ = writeln!(std::io::stdout(), "{text}");
    if let Some(dir) = out {
        ensure_dir(dir)?;
        write_file(&dir.join("summary.json"), &text)?;
    }
    Ok(())
}

fn strings(xs: &[BigInt]) -> Vec<String> {
    xs.iter().map(|x| x.to_string()).collect()
}

fn cmd_validate(a: &InputArgs) -> CmdResult {
    let (text, m) = read_matrix(&a.input)?;
    let hash = config_hash("validate", &[&text]);
    match validate(&m) {
        Ok(s) => {
            emit(
                &json!({
                    "command": "validate",
                    "config_hash": hash,
                    "sysnf": true,
                    "N": s.modulus().to_string(),
                    "b": strings(s.b()),
                    "gcd": s.condition_gcd().to_string(),
                }),
                None,
            )?;
            Ok(0)
        }
        Err(e @ (Error::Condition { .. } | Error::Structure(_) | Error::Rank(_) | Error::Dimension(_))) => {
            let gcd = match &e {
                Error::Condition { gcd } => Some(gcd.to_string()),
                _ => None,
            };
            emit(
                &json!({
                    "command": "validate",
                    "config_hash": hash,
                    "sysnf": false,
                    "gcd": gcd,
                    "reason": e.to_string(),
                }),
                None,
            )?;
            eprintln!("not SysNF: {e}");
            Ok(EXIT_DOMAIN)
        }
        Err(e) => Err(Failure::tagged("sysnf", e)),
    }
}

fn cmd_reduce(a: &ReduceArgs) -> CmdResult {
    let (text, m) = read_matrix(&a.input.input)?;
    let eps = parse_rational(&a.epsilon).map_err(|e| Failure::tagged("cli", e))?;
    let cert = reduce_to_sysnf(&m, &eps).map_err(|e| Failure::tagged("sysnf", e))?;
    cert.verify().map_err(|e| Failure::tagged("sysnf", e))?;
    let max_err = cert.max_basis_relative_error().map_err(|e| Failure::tagged("sysnf", e))?;
    let out = &a.out.out;
    ensure_dir(out)?;
    let cert_path = out.join("certificate.json");
    write_file(&cert_path, &cert.to_json().map_err(|e| Failure::tagged("sysnf", e))?)?;
    emit(
        &json!({
            "command": "reduce",
            "config_hash": config_hash("reduce", &[&text, &rational_to_string(&eps)]),
            "epsilon": rational_to_string(&eps),
            "N": cert.bprime.modulus().to_string(),
            "b": strings(cert.bprime.b()),
            "T": cert.scale.to_string(),
            "delta": cert.shift.to_string(),
            "max_relative_error": max_err,
            "verified": true,
            "certificate": cert_path.display().to_string(),
        }),
        Some(out),
    )?;
    Ok(0)
}

fn cmd_dft(a: &GuardedArgs) -> CmdResult {
    let (text, s) = read_sysnf(&a.input.input)?;
    let f = dft_matrix_with_guard(&s, a.size_guard).map_err(|e| Failure::tagged("dft", e))?;
    let out = &a.out.out;
    ensure_dir(out)?;
    let csv_path = out.join("dft.csv");
    let file = fs::File::create(&csv_path).map_err(|e| Failure::usage(format!("cannot write {}: {e}", csv_path.display())))?;
    f.write_csv(BufWriter::new(file)).map_err(|e| Failure::tagged("dft", e))?;
    write_file(&out.join("dft.json"), &f.header_json().map_err(|e| Failure::tagged("dft", e))?)?;
    emit(
        &json!({
            "command": "dft",
            "config_hash": config_hash("dft", &[&text, &a.size_guard.to_string()]),
            "N": s.modulus().to_string(),
            "b": strings(s.b()),
            "order": f.order(),
            "unitarity_deviation": f.unitarity_deviation(),
            "matrix": csv_path.display().to_string(),
        }),
        Some(out),
    )?;
    Ok(0)
}

fn cmd_qft_sim(a: &GuardedArgs) -> CmdResult {
    let (text, s) = read_sysnf(&a.input.input)?;
    let tag = |e| Failure::tagged("qcirc", e);
    let f = dft_matrix_with_guard(&s, a.size_guard).map_err(|e| Failure::tagged("dft", e))?;
    let lattice = enumerate_ln_with_guard(&s, a.size_guard).map_err(|e| Failure::tagged("sysnf", e))?;
    let mut worst = 0f64;
    let mut first = None;
    for (col, x) in lattice.iter().enumerate() {
        let out = simulate_sysnf_qft(&s, &Statevector::basis_state(x).map_err(tag)?).map_err(tag)?;
        let mut expected = vec![Complex64::new(0.0, 0.0); out.amps().len()];
        for (row, z) in f.index().iter().enumerate() {
            expected[z.index()] = f.entry(row, col);
        }
        let dev = out.amps().iter().zip(&expected).map(|(p, q)| (p - q).norm()).fold(0.0, f64::max);
        worst = worst.max(dev);
        first.get_or_insert(out);
    }
    let out_dir = &a.out.out;
    ensure_dir(out_dir)?;
    let snap = out_dir.join("qft_origin.bin");
    if let Some(psi) = &first {
        write_snapshot(&snap, psi).map_err(tag)?;
    }
    emit(
        &json!({
            "command": "qft-sim",
            "config_hash": config_hash("qft-sim", &[&text, &a.size_guard.to_string()]),
            "N": s.modulus().to_string(),
            "b": strings(s.b()),
            "basis_states": lattice.len(),
            "max_amplitude_deviation": worst,
            "tolerance": AGREEMENT_TOL,
            "agrees": worst <= AGREEMENT_TOL,
            "snapshot": snap.display().to_string(),
        }),
        Some(out_dir),
    )?;
    Ok(0)
}

fn cmd_sample(a: &SampleArgs) -> CmdResult {
    let text = read_text(&a.input)?;
    let mut cfg: SampleConfig =
        serde_json::from_str(&text).map_err(|e| Failure::tagged("sampler", Error::Json(e)))?;
    if let Some(e) = &a.epsilon {
        cfg.epsilon = e.clone();
    }
    if let Some(seed) = a.seed {
        cfg.seed = seed;
    }
    if let Some(shots) = a.shots {
        cfg.shots = shots;
    }
    let basis_path = a.input.parent().unwrap_or(Path::new(".")).join(&cfg.basis);
    let (basis_text, b) = read_matrix(&basis_path)?;
    let eps = cfg.epsilon().map_err(|e| Failure::tagged("cli", e))?;
    let canonical = serde_json::to_string(&cfg).expect("config serializes");
    let hash = config_hash("sample", &[&canonical, &basis_text, &a.size_guard.map(|g| g.to_string()).unwrap_or_default()]);

    let mut opts = SampleOptions::default();
    if let Some(g) = a.size_guard {
        opts.max_grid_points = g;
    }
    let (outcome, report) =
        run_experiment_with(&b, &cfg.spec, &eps, cfg.shots, cfg.seed, &opts).map_err(|e| Failure::tagged("sampler", e))?;

    let out = &a.out.out;
    ensure_dir(out)?;
    let header: Vec<String> = (1..=b.rows()).map(|i| format!("x{i}")).collect();
    let mut csv = header.join(",");
    csv.push('\n');
    for x in &outcome.samples {
        let row: Vec<String> = x.iter().map(|v| v.to_string()).collect();
        csv.push_str(&row.join(","));
        csv.push('\n');
    }
    write_file(&out.join("samples.csv"), &csv)?;
    let report_json = serde_json::to_value(&report).expect("report serializes");
    write_file(&out.join("report.json"), &serde_json::to_string_pretty(&report_json).expect("serializes"))?;
    emit(
        &json!({
            "command": "sample",
            "config_hash": hash,
            "seed": cfg.seed,
            "shots": cfg.shots,
            "epsilon": rational_to_string(&eps),
            "tv_distance": report.tv_distance,
            "max_displacement": report.max_displacement,
            "decode_mismatch_rate": report.decode_mismatch_rate,
            "sigma_inverse_applied": report.sigma_inverse_applied,
        }),
        Some(out),
    )?;
    Ok(0)
}

fn cmd_selftest(a: &OutArgs) -> CmdResult {
    let summary = run_all(|r| eprintln!("{}", r.line()));
    let mut value = serde_json::to_value(&summary).expect("summary serializes");
    value["command"] = json!("selftest");
    value["config_hash"] = json!(config_hash("selftest", &[&summary.seed.to_string()]));
    emit(&value, Some(&a.out))?;
    Ok(if summary.passed { 0 } else { EXIT_SELFTEST })
}
