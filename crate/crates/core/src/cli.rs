//! Command-line front end.
//!
//! ```text
//! cegd run --mode <honest|replay|eoo-forward> --bits <b> --seed <s> [--exponent <e>] [--out <path>] [--pretty]
//! cegd verify-transcript <path>
//! cegd keygen --bits <b> --exponent <e> --seed <s>
//! ```
//!
//! Exit codes: 0 on success, 1 on a failed verification or run, 2 on a usage error.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};
use num_bigint::BigUint;
use num_integer::Integer;

use crate::crypto::rsa_keygen_with_exponent;
use crate::harness::{audit_report, run, AttackReport, Scenario, WorldConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "cegd",
    version,
    about = "Certified e-goods delivery: runs, attack reproductions, transcript checks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a scenario and write its JSON-lines transcript.
    Run {
        #[arg(long, value_parser = parse_mode)]
        mode: Scenario,
        #[arg(long, default_value_t = 1024)]
        bits: u64,
        #[arg(long, env = "CEGD_SEED")]
        seed: u64,
        #[arg(long, default_value = "65537", value_parser = parse_exponent)]
        exponent: BigUint,
        /// Output file; `-` or absent writes to stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also print a human-readable summary to stderr.
        #[arg(long)]
        pretty: bool,
    },
    /// Re-check every signature and congruence in a transcript and recompute its verdict.
    VerifyTranscript { path: PathBuf },
    /// Print a key pair record as JSON.
    Keygen {
        #[arg(long)]
        bits: u64,
        #[arg(long, default_value = "65537", value_parser = parse_exponent)]
        exponent: BigUint,
        #[arg(long, env = "CEGD_SEED")]
        seed: u64,
    },
}

fn parse_mode(s: &str) -> Result<Scenario, String> {
    s.parse()
}

/// Decimal, or hex with a `0x` prefix.
fn parse_exponent(s: &str) -> Result<BigUint, String> {
    let parsed = match s.strip_prefix("0x") {
        Some(h) => BigUint::parse_bytes(h.as_bytes(), 16),
        None => BigUint::parse_bytes(s.as_bytes(), 10),
    };
    parsed.ok_or_else(|| format!("not an integer: {s:?}"))
}

fn check_key_args(bits: u64, e: &BigUint) -> Result<(), String> {
    if bits < 16 {
        return Err(format!("--bits must be at least 16, got {bits}"));
    }
    if e.is_even() || *e < BigUint::from(3u8) {
        return Err("--exponent must be odd and at least 3".into());
    }
    Ok(())
}

/// Parses `args` (program name first) and runs the command.
pub fn dispatch<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let informational =
                matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion);
            let _ = if informational {
                write!(out, "{}", e.render())
            } else {
                write!(err, "{}", e.render())
            };
            return if informational { EXIT_OK } else { EXIT_USAGE };
        }
    };
    match cli.command {
        Command::Run {
            mode,
            bits,
            seed,
            exponent,
            out: path,
            pretty,
        } => cmd_run(mode, bits, seed, exponent, path, pretty, out, err),
        Command::VerifyTranscript { path } => cmd_verify(&path, out, err),
        Command::Keygen {
            bits,
            exponent,
            seed,
        } => cmd_keygen(bits, exponent, seed, out, err),
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_run(
    mode: Scenario,
    bits: u64,
    seed: u64,
    exponent: BigUint,
    path: Option<PathBuf>,
    pretty: bool,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> i32 {
    if let Err(msg) = check_key_args(bits, &exponent) {
        let _ = writeln!(err, "error: {msg}");
        return EXIT_USAGE;
    }
    let report = match run(mode, &WorldConfig::new(bits, exponent, seed)) {
        Ok(report) => report,
        Err(e) => {
            let _ = writeln!(err, "error: {mode} run failed: {e}");
            return EXIT_FAILURE;
        }
    };
    let text = report.to_jsonl();
    let written = match path.as_deref() {
        Some(p) if p.as_os_str() != "-" => std::fs::write(p, &text),
        _ => out.write_all(text.as_bytes()),
    };
    if let Err(e) = written {
        let _ = writeln!(err, "error: cannot write transcript: {e}");
        return EXIT_FAILURE;
    }
    if pretty {
        let _ = write!(err, "{}", report.summary());
    }
    EXIT_OK
}

fn cmd_verify(path: &std::path::Path, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let text = match std::fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) => {
            let _ = writeln!(err, "error: cannot read {}: {e}", path.display());
            return EXIT_FAILURE;
        }
    };
    let report = match AttackReport::from_jsonl(&text) {
        Ok(r) => r,
        Err(e) => {
            let _ = writeln!(err, "FAIL malformed transcript: {e}");
            return EXIT_FAILURE;
        }
    };
    let audit = audit_report(&report);
    if audit.is_clean() {
        let _ = writeln!(
            out,
            "OK {} messages, {} evidence ledgers, verdict {}",
            audit.checked_messages,
            report.evidence.len(),
            audit.recomputed.label()
        );
        EXIT_OK
    } else {
        for finding in &audit.findings {
            let _ = writeln!(err, "FAIL {finding}");
        }
        EXIT_FAILURE
    }
}

fn cmd_keygen(
    bits: u64,
    exponent: BigUint,
    seed: u64,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> i32 {
    if let Err(msg) = check_key_args(bits, &exponent) {
        let _ = writeln!(err, "error: {msg}");
        return EXIT_USAGE;
    }
    match rsa_keygen_with_exponent(bits, &exponent, seed) {
        Ok(keys) => {
            let _ = writeln!(
                out,
                "{}",
                serde_json::to_string(&keys).expect("key pair serializes")
            );
            EXIT_OK
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_FAILURE
        }
    }
}
