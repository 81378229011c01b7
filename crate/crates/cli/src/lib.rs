//! Command line front end: every subcommand reads a JSON config, writes a
//! JSON or CSV report carrying the config digest and seed, and prints one
//! summary line.

pub mod suite;

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use hyperlab::cpmaps::{kraus_from_choi, stinespring};
use hyperlab::korovkin::{self, KorovkinConfig};
use hyperlab::toeplitz::script::run_script;
use hyperlab::uep::{self, ProblemConfig, Status};
use hyperlab::{ChoiMatrix, Error};
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_NONCONVERGED: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "hyperlab", version, about = "Finite-dimensional hyperrigidity experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Search for UCP maps that fix a generator set but move its algebra.
    UepSearch {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long = "max-iter")]
        max_iter: Option<usize>,
        #[arg(long, default_value = "report.json")]
        out: PathBuf,
    },
    /// Run an exact Toeplitz arithmetic script.
    Toeplitz {
        #[arg(long)]
        script: PathBuf,
        #[arg(long, default_value = "toeplitz.json")]
        out: PathBuf,
    },
    /// Kraus operators and a minimal Stinespring dilation of a Choi matrix.
    Stinespring {
        #[arg(long)]
        choi: PathBuf,
        #[arg(long, default_value = "stinespring.json")]
        out: PathBuf,
    },
    /// Tabulate a Korovkin-type convergence run as CSV.
    Korovkin {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long, default_value = "report.csv")]
        out: PathBuf,
    },
    /// Run the acceptance battery; exits 0 iff every criterion passes.
    Suite {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "suite.json")]
        out: PathBuf,
    },
}

#[derive(Debug)]
pub enum Failure {
    Invalid(String),
    NonConverged(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::NonStabilized { .. } => Failure::NonConverged(e.to_string()),
            other => Failure::Invalid(other.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Invalid(e.to_string())
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::Invalid(e.to_string())
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Reads a config file and returns its bytes with their digest.
fn read_config(path: &Path) -> Result<(Vec<u8>, String), Failure> {
    let bytes = fs::read(path).map_err(|e| Failure::Invalid(format!("{}: {e}", path.display())))?;
    let digest = sha256_hex(&bytes);
    Ok((bytes, digest))
}

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    command: &'a str,
    config_sha256: &'a str,
    seed: u64,
    report: T,
}

fn write_json<T: Serialize>(out: &Path, command: &str, digest: &str, seed: u64, report: T) -> Result<(), Failure> {
    let env = Envelope { command, config_sha256: digest, seed, report };
    let mut text = serde_json::to_string_pretty(&env)?;
    text.push('\n');
    fs::write(out, text)?;
    Ok(())
}

/// Runs one parsed command and returns the exit code and summary line.
pub fn execute(cmd: &Command) -> Result<(i32, String), Failure> {
    match cmd {
        Command::UepSearch { config, seed, tol, max_iter, out } => {
            let (bytes, digest) = read_config(config)?;
            let cfg: ProblemConfig = serde_json::from_slice(&bytes)?;
            let mut p = cfg.into_problem(*seed)?;
            if let Some(t) = tol {
                p.tol = *t;
            }
            if let Some(m) = max_iter {
                p.max_iter = *m;
            }
            p.validate()?;
            let r = uep::solve(&p)?;
            write_json(out, "uep-search", &digest, *seed, &r)?;
            let code = if r.status == Status::NonConverged { EXIT_NONCONVERGED } else { EXIT_OK };
            Ok((
                code,
                format!("uep-search: {:?}, max deviation {:.3e}, wrote {}", r.status, r.max_deviation(), out.display()),
            ))
        }
        Command::Toeplitz { script, out } => {
            let (bytes, digest) = read_config(script)?;
            let s: Value = serde_json::from_slice(&bytes)?;
            let outputs = run_script(&s)?;
            write_json(out, "toeplitz", &digest, 0, json!({ "outputs": outputs }))?;
            Ok((EXIT_OK, format!("toeplitz: {} outputs, wrote {}", outputs.len(), out.display())))
        }
        Command::Stinespring { choi, out } => {
            let (bytes, digest) = read_config(choi)?;
            let c: ChoiMatrix = serde_json::from_slice(&bytes)?;
            let kraus = kraus_from_choi(&c)?;
            let dil = stinespring(&c)?;
            let rebuilt = ChoiMatrix::from_map(c.d(), c.d_out(), |a| dil.compress(a))?;
            let roundtrip = (rebuilt.matrix() - c.matrix()).max_abs();
            let summary = format!(
                "stinespring: {} Kraus operators, minimal {}, wrote {}",
                kraus.operators.len(),
                dil.minimal,
                out.display()
            );
            write_json(
                out,
                "stinespring",
                &digest,
                0,
                json!({
                    "defects": c.validate_ucp(),
                    "kraus": kraus.operators,
                    "dilation": dil,
                    "isometry_defect": dil.isometry_defect(),
                    "roundtrip_error": roundtrip,
                }),
            )?;
            Ok((EXIT_OK, summary))
        }
        Command::Korovkin { config, seed, tol, out } => {
            let (bytes, digest) = read_config(config)?;
            let cfg: KorovkinConfig = serde_json::from_slice(&bytes)?;
            let r = korovkin::run(&cfg.run, &cfg.test_set, &cfg.probes, tol.or(cfg.tol))?;
            let mut text = format!("# config_sha256 {digest}\n# seed {seed}\n");
            text.push_str(&korovkin::csv_export(&r));
            fs::write(out, text)?;
            let stalls = r.probe_verdicts.iter().filter(|v| **v == korovkin::Verdict::Stalls).count();
            Ok((EXIT_OK, format!("korovkin: {} rows, {stalls} stalling probes, wrote {}", r.n.len(), out.display())))
        }
        Command::Suite { seed, out } => {
            let cfg = suite::SuiteConfig::default();
            let digest = sha256_hex(serde_json::to_string(&cfg)?.as_bytes());
            let results = suite::run_suite(*seed, &cfg)?;
            let passed = results.iter().filter(|r| r.passed).count();
            let all = passed == results.len();
            write_json(out, "suite", &digest, *seed, json!({ "config": cfg, "all_passed": all, "criteria": results }))?;
            let code = if all { EXIT_OK } else { 1 };
            Ok((code, format!("suite: {passed}/{} criteria passed, wrote {}", results.len(), out.display())))
        }
    }
}

/// Parses `args` (program name first), runs, and returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
        }
    };
    match execute(&cli.command) {
        Ok((code, line)) => {
            println!("{line}");
            code
        }
        Err(Failure::Invalid(msg)) => {
            eprintln!("error: {msg}");
            EXIT_INVALID
        }
        Err(Failure::NonConverged(msg)) => {
            eprintln!("error: {msg}");
            EXIT_NONCONVERGED
        }
    }
}
