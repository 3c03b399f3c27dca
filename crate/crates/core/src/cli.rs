//! Command-line front end.
//!
//! Exit status: 0 on success, 1 on usage errors, 2 on domain errors. Every run is
//! seeded (default seed 0), so identical arguments and inputs give identical output.

use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigUint;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::fock::{make_state, StateSpec, StateVector};
use crate::measure::{spectrum_diagonal, truncation_threshold};
use crate::poly::{enumerate_range, parse_polynomial, NonnegPolynomial};
use crate::prover::{prove_once, run_trials_on, serialize_big, trial_seed, FormalSystem};
use crate::unary::{canonicalize, enumerate_set, frobenius_gap, parse_set_expr};

#[derive(Debug, Parser)]
#[command(name = "qprove", about = "Spectral representation of unary sets and measurement-based proving")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Tsv,
    Json,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Canonical linear form, members up to a bound, and largest gap of a set expression.
    Set {
        expr: String,
        #[arg(long, default_value_t = 20)]
        bound: u64,
    },
    /// Truncated spectrum of F(N₁,…,N_k) against the range of F.
    Spectrum {
        poly: String,
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        cutoff: u64,
        /// Defaults to the largest value of F on the truncated box.
        #[arg(long)]
        bound: Option<u64>,
        /// Number of modes; defaults to the polynomial's arity.
        #[arg(long)]
        modes: Option<usize>,
        #[arg(long, value_enum, default_value_t = Format::Tsv)]
        format: Format,
    },
    /// Repeated measure-and-extract rounds with a histogram of theorems.
    Measure {
        poly: String,
        #[command(flatten)]
        run: RunArgs,
        #[arg(long, default_value_t = 1000, value_parser = clap::value_parser!(u64).range(1..))]
        trials: u64,
        /// Write one JSON record per round to this file.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Tsv)]
        format: Format,
    },
    /// A single round: one theorem and its proof.
    Prove {
        poly: String,
        #[command(flatten)]
        run: RunArgs,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
}

#[derive(Debug, Args)]
struct RunArgs {
    /// JSON state description.
    #[arg(long)]
    state: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Domain(String),
}

impl CliError {
    fn domain(e: impl std::fmt::Display) -> Self {
        CliError::Domain(e.to_string())
    }
}

/// Runs the CLI on `argv` (including the program name), writing to the given streams.
pub fn run<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(stdout, "{}", e.render());
                    return 0;
                }
                _ => 1,
            };
            let first = e.render().to_string();
            let line = first.lines().next().unwrap_or("usage error");
            let _ = writeln!(stderr, "{line}");
            return code;
        }
    };
    let result = match cli.command {
        Command::Set { expr, bound } => cmd_set(&expr, bound),
        Command::Spectrum { poly, cutoff, bound, modes, format } => cmd_spectrum(&poly, cutoff as usize, bound, modes, format),
        Command::Measure { poly, run, trials, out, format } => cmd_measure(&poly, &run, trials, out.as_deref(), format),
        Command::Prove { poly, run, format } => cmd_prove(&poly, &run, format),
    };
    match result {
        Ok(text) => match stdout.write_all(text.as_bytes()) {
            Ok(()) => 0,
            Err(e) => {
                let _ = writeln!(stderr, "error: {e}");
                2
            }
        },
        Err(CliError::Usage(msg)) => {
            let _ = writeln!(stderr, "error: {msg}");
            1
        }
        Err(CliError::Domain(msg)) => {
            let _ = writeln!(stderr, "error: {msg}");
            2
        }
    }
}

fn join<T: ToString>(values: impl IntoIterator<Item = T>) -> String {
    values.into_iter().map(|v| v.to_string()).collect::<Vec<_>>().join(" ")
}

fn parse_poly(text: &str) -> Result<NonnegPolynomial, CliError> {
    parse_polynomial(text).map_err(|e| CliError::Domain(format!("polynomial {text:?}: {e}")))
}

fn cmd_set(expr: &str, bound: u64) -> Result<String, CliError> {
    let e = parse_set_expr(expr).map_err(|e| CliError::Domain(format!("set expression {expr:?}: {e}")))?;
    let form = canonicalize(&e).map_err(CliError::domain)?;
    let gap = frobenius_gap(&form).map_err(CliError::domain)?;
    let mut out = String::new();
    writeln!(out, "expression\t{e}").unwrap();
    writeln!(out, "canonical\t{form}").unwrap();
    writeln!(out, "members\t{}", join(enumerate_set(&form, bound))).unwrap();
    writeln!(out, "gap\t{gap}").unwrap();
    Ok(out)
}

#[derive(Serialize)]
struct SpectrumReport {
    polynomial: String,
    modes: usize,
    cutoff: usize,
    bound: u64,
    #[serde(serialize_with = "serialize_big_vec")]
    spectrum: Vec<BigUint>,
    range: Vec<u64>,
    #[serde(serialize_with = "serialize_big_opt")]
    threshold: Option<BigUint>,
    agreement: bool,
}

fn serialize_big_vec<S: serde::Serializer>(v: &[BigUint], s: S) -> Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(v.len()))?;
    for x in v {
        seq.serialize_element(&BigJson(x))?;
    }
    seq.end()
}

fn serialize_big_opt<S: serde::Serializer>(v: &Option<BigUint>, s: S) -> Result<S::Ok, S::Error> {
    match v {
        Some(x) => serialize_big(x, s),
        None => s.serialize_none(),
    }
}

struct BigJson<'a>(&'a BigUint);

impl Serialize for BigJson<'_> {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        serialize_big(self.0, s)
    }
}

fn cmd_spectrum(text: &str, cutoff: usize, bound: Option<u64>, modes: Option<usize>, format: Format) -> Result<String, CliError> {
    let f = parse_poly(text)?;
    let k = modes.unwrap_or(f.arity());
    let f = f.with_arity(k).map_err(|e| CliError::Usage(format!("--modes: {e}")))?;
    let spectrum = spectrum_diagonal(&f, k, cutoff).map_err(CliError::domain)?;
    let top = spectrum.last().cloned().unwrap_or_default();
    let bound = match bound {
        Some(b) => b,
        None => u64::try_from(&top).map_err(|_| CliError::Domain("spectrum exceeds u64; pass --bound".into()))?,
    };
    let range = enumerate_range(&f, bound);
    let threshold = truncation_threshold(&f, k, cutoff).map_err(CliError::domain)?;
    // Compare on [0, min(bound, T − 1)], where the box sees every preimage.
    let below = |v: &BigUint| v <= &BigUint::from(bound) && threshold.as_ref().map_or(true, |t| v < t);
    let from_spectrum: Vec<&BigUint> = spectrum.iter().filter(|v| below(v)).collect();
    let from_range: Vec<BigUint> = range.iter().map(|&v| BigUint::from(v)).filter(|v| below(v)).collect();
    let agreement = from_spectrum.len() == from_range.len() && from_spectrum.iter().zip(&from_range).all(|(a, b)| *a == b);

    match format {
        Format::Json => {
            let report = SpectrumReport {
                polynomial: f.to_string(),
                modes: k,
                cutoff,
                bound,
                spectrum,
                range,
                threshold,
                agreement,
            };
            Ok(serde_json::to_string(&report).expect("report serializes") + "\n")
        }
        Format::Tsv => {
            let mut out = String::new();
            writeln!(out, "polynomial\t{f}").unwrap();
            writeln!(out, "modes\t{k}").unwrap();
            writeln!(out, "cutoff\t{cutoff}").unwrap();
            writeln!(out, "spectrum\t{}", join(&spectrum)).unwrap();
            writeln!(out, "range\t{}", join(&range)).unwrap();
            match &threshold {
                Some(t) => writeln!(out, "threshold\t{t}").unwrap(),
                None => writeln!(out, "threshold\tnone").unwrap(),
            }
            writeln!(out, "agreement\t{}", if agreement { "OK" } else { "MISMATCH" }).unwrap();
            Ok(out)
        }
    }
}

fn load_state(path: &Path) -> Result<StateVector, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Domain(format!("cannot read {}: {e}", path.display())))?;
    let spec: StateSpec = serde_json::from_str(&text)
        .map_err(|e| CliError::Domain(format!("{}:{}:{}: {e}", path.display(), e.line(), e.column())))?;
    make_state(&spec).map_err(|e| CliError::Domain(format!("{}: {e}", path.display())))
}

fn system_for(text: &str, state: &StateVector) -> Result<FormalSystem, CliError> {
    let f = parse_poly(text)?;
    let f = f.with_arity(state.modes()).map_err(|e| CliError::Domain(format!("polynomial does not fit the state: {e}")))?;
    Ok(FormalSystem::new(f, text))
}

fn cmd_measure(text: &str, run: &RunArgs, trials: u64, out: Option<&Path>, format: Format) -> Result<String, CliError> {
    let state = load_state(&run.state)?;
    let sys = system_for(text, &state)?;
    let report = run_trials_on(&sys, &state, trials, run.seed).map_err(CliError::domain)?;

    if let Some(path) = out {
        let mut lines = String::new();
        for r in &report.records {
            lines.push_str(&serde_json::to_string(r).expect("record serializes"));
            lines.push('\n');
        }
        fs::write(path, lines).map_err(|e| CliError::Domain(format!("cannot write {}: {e}", path.display())))?;
    }

    match format {
        Format::Json => {
            let summary = report.summary(out.map(|p| p.display().to_string()));
            Ok(serde_json::to_string(&summary).expect("summary serializes") + "\n")
        }
        Format::Tsv => {
            let mut s = String::new();
            for row in report.outcome_rows() {
                writeln!(s, "{}\t{}\t{}", row.m, row.p, row.count).unwrap();
            }
            Ok(s)
        }
    }
}

#[derive(Serialize)]
struct ProofReport {
    #[serde(serialize_with = "serialize_big")]
    theorem: BigUint,
    display: String,
    proof: Vec<u64>,
    p: f64,
    seed: u64,
}

fn cmd_prove(text: &str, run: &RunArgs, format: Format) -> Result<String, CliError> {
    let state = load_state(&run.state)?;
    let sys = system_for(text, &state)?;
    let mut rng = ChaCha8Rng::seed_from_u64(trial_seed(run.seed, 0));
    let record = prove_once(&sys, &state, &mut rng, run.seed, 0).map_err(CliError::domain)?;
    let report = ProofReport {
        display: sys.display(&record.m),
        theorem: record.m,
        proof: record.proof,
        p: record.p,
        seed: run.seed,
    };
    match format {
        Format::Json => Ok(serde_json::to_string(&report).expect("proof serializes") + "\n"),
        Format::Tsv => Ok(format!("theorem\t{}\nproof\t{}\np\t{}\n", report.theorem, join(&report.proof), report.p)),
    }
}
