//! The `pstlab` command line.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::dynamics::{amplitude_series, amplitude_series_exact, probability_curves, return_series, verify_pst, write_probability_csv};
use crate::error::Error;
use crate::ese::detect_ese;
use crate::families::{self, rational_string, Family, ScanRecord};
use crate::format::{fmt15, fmt17};
use crate::reconstruct::{reconstruct_exact, reconstruct_general, reconstruct_symmetric, JacobiMatrix};
use crate::spectrum::{to_symmetric, validate_pst, Spectrum};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_MISMATCH: i32 = 3;

/// Exact `b²` is printed up to this order; beyond it the rationals get long.
const EXACT_ORDER_LIMIT: usize = 41;

#[derive(Debug, Parser)]
#[command(name = "pstlab", version, about = "Spin-chain reconstruction, perfect state transfer and early-state-exclusion certification")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build the persymmetric Jacobi matrix with a given spectrum.
    Reconstruct(SpectrumArgs),
    /// Return-amplitude series, optionally tabulated on a grid.
    Amplitude {
        #[command(flatten)]
        args: SpectrumArgs,
        /// Tabulate A(t) at this many points on [0, T].
        #[arg(long)]
        grid: Option<usize>,
    },
    /// Transfer time, fidelity and phase.
    Pst(SpectrumArgs),
    /// Count and locate early-state-exclusion events.
    Ese(SpectrumArgs),
    /// Certify one member of a theorem family.
    Family {
        #[arg(long, value_enum)]
        thm: FamilyArg,
        #[arg(short = 'm', value_parser = clap::value_parser!(u32).range(1..))]
        m: u32,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Exact ESE counts over all admissible {0, ±a, ±b, ±c} with c ≤ zmax.
    Scan {
        #[arg(long, default_value_t = 25)]
        zmax: i64,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Site-occupation probabilities on [0, T] as CSV.
    PlotData {
        #[arg(short = 's', long = "spectrum", allow_hyphen_values = true)]
        spectrum: String,
        #[arg(long, default_value_t = 2000)]
        grid: usize,
        /// End of the time window; defaults to the transfer time.
        #[arg(long)]
        t_end: Option<f64>,
        #[arg(short = 'o', long = "output")]
        output: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
struct SpectrumArgs {
    /// Eigenvalues, e.g. "0,±1,±2,±3", "0,+-1,+-2,+-3" or a JSON array.
    #[arg(short = 's', long = "spectrum", allow_hyphen_values = true)]
    spectrum: String,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Args)]
struct OutputArgs {
    #[arg(short = 'o', long = "output")]
    output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FamilyArg {
    /// {0, ±1, ±2m, ±(2m+1)}: no exclusion.
    #[value(name = "3.2", alias = "no-ese")]
    NoEse,
    /// {0, ±(2m+1), ±(2m+2), ±(2m+3)}: 2m exclusions.
    #[value(name = "3.4", alias = "ese")]
    Ese,
}

enum Failure {
    Invalid(String),
    Mismatch(String),
    Io(io::Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Invalid(e.to_string())
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e)
    }
}

type Outcome = std::result::Result<(), Failure>;

/// Parses `argv` (program name first) and runs one subcommand. Returns the
/// process exit code: 0 success, 2 invalid input or usage, 3 certification
/// mismatch.
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if code == EXIT_OK { out.write_all(text.as_bytes()) } else { err.write_all(text.as_bytes()) };
            return code;
        }
    };
    match dispatch(cli.command, out) {
        Ok(()) => EXIT_OK,
        Err(Failure::Invalid(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_INVALID
        }
        Err(Failure::Mismatch(msg)) => {
            let _ = writeln!(err, "certification mismatch: {msg}");
            EXIT_MISMATCH
        }
        Err(Failure::Io(e)) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_INVALID
        }
    }
}

fn dispatch(command: Command, out: &mut dyn Write) -> Outcome {
    match command {
        Command::Reconstruct(args) => {
            let spectrum = parse_spectrum(&args.spectrum)?;
            let text = reconstruct_output(&spectrum, args.output.format)?;
            emit(&args.output.output, out, &text)
        }
        Command::Amplitude { args, grid } => {
            let spectrum = parse_spectrum(&args.spectrum)?;
            let text = amplitude_output(&spectrum, grid, args.output.format)?;
            emit(&args.output.output, out, &text)
        }
        Command::Pst(args) => {
            let spectrum = parse_spectrum(&args.spectrum)?;
            let text = pst_output(&spectrum, args.output.format)?;
            emit(&args.output.output, out, &text)
        }
        Command::Ese(args) => {
            let spectrum = parse_spectrum(&args.spectrum)?;
            let text = ese_output(&spectrum, args.output.format)?;
            emit(&args.output.output, out, &text)
        }
        Command::Family { thm, m, output } => {
            let family = match thm {
                FamilyArg::NoEse => Family::NoEse,
                FamilyArg::Ese => Family::Ese,
            };
            let (text, verdict) = family_output(family, m, output.format)?;
            emit(&output.output, out, &text)?;
            verdict
        }
        Command::Scan { zmax, output } => {
            let records = families::conjecture_scan(zmax)?;
            let text = scan_output(&records, output.format)?;
            emit(&output.output, out, &text)
        }
        Command::PlotData { spectrum, grid, t_end, output } => {
            let spectrum = parse_spectrum(&spectrum)?;
            let t_end = match t_end {
                Some(t) if t.is_finite() && t > 0.0 => t,
                Some(t) => return Err(Failure::Invalid(format!("t-end must be positive, got {t}"))),
                None => validate_pst(&spectrum).first_time.ok_or(Error::NotAdmissible)?,
            };
            let j = reconstruct(&spectrum)?;
            let samples = probability_curves(&j, t_end, grid)?;
            let mut buf = Vec::new();
            write_probability_csv(&mut buf, &samples)?;
            emit(&output, out, &String::from_utf8(buf).expect("ascii csv"))
        }
    }
}

fn parse_spectrum(text: &str) -> Result<Spectrum, Failure> {
    Ok(text.parse::<Spectrum>()?)
}

fn emit(path: &Option<PathBuf>, out: &mut dyn Write, text: &str) -> Outcome {
    match path {
        Some(path) => {
            let mut file = BufWriter::new(File::create(path)?);
            file.write_all(text.as_bytes())?;
            file.flush()?;
        }
        None => out.write_all(text.as_bytes())?,
    }
    Ok(())
}

fn reconstruct(spectrum: &Spectrum) -> Result<JacobiMatrix, Failure> {
    Ok(match to_symmetric(spectrum) {
        Ok(sym) => reconstruct_symmetric(&sym)?,
        Err(_) => reconstruct_general(spectrum)?,
    })
}

fn join15(values: &[f64]) -> String {
    values.iter().map(|v| fmt15(*v)).collect::<Vec<_>>().join(" ")
}

fn spectrum_text(spectrum: &Spectrum) -> String {
    format!("{{{}}}", spectrum.values().iter().map(|v| fmt15(*v)).collect::<Vec<_>>().join(", "))
}

fn json_text(value: &Value) -> String {
    format!("{}\n", serde_json::to_string_pretty(value).expect("serializable"))
}

fn no_csv(command: &str) -> Failure {
    Failure::Invalid(format!("{command} has no csv output"))
}

fn pst_json(spectrum: &Spectrum) -> Value {
    let info = validate_pst(spectrum);
    json!({
        "admissible": info.admissible,
        "T": info.first_time,
        "gap_multipliers": info.gap_multipliers,
        "phase_hint": info.phase_hint,
    })
}

fn reconstruct_output(spectrum: &Spectrum, format: Format) -> Result<String, Failure> {
    let j = reconstruct(spectrum)?;
    let info = validate_pst(spectrum);
    let exact_b2 = (spectrum.is_integer() && spectrum.len() <= EXACT_ORDER_LIMIT)
        .then(|| reconstruct_exact(spectrum).ok())
        .flatten()
        .map(|e| e.offdiag_squared.iter().map(rational_string).collect::<Vec<_>>());
    let matrix = serde_json::to_value(&j).expect("serializable");
    match format {
        Format::Text => {
            let mut s = String::new();
            s += &format!("spectrum: {}\n", spectrum_text(spectrum));
            s += &format!("n: {}\n", j.order());
            s += &format!("a: {}\n", join15(j.diag()));
            s += &format!("b: {}\n", join15(j.offdiag()));
            if let Some(b2) = &exact_b2 {
                s += &format!("b^2: {}\n", b2.join(" "));
            }
            s += &format!("persymmetry residual: {}\n", fmt15(j.persymmetry_residual()));
            match info.first_time.filter(|_| info.admissible) {
                Some(t) => s += &format!("pst: admissible, T = {}\n", fmt15(t)),
                None => s += "pst: not admissible\n",
            }
            s += &format!("json: {}\n", serde_json::to_string(&j).expect("serializable"));
            Ok(s)
        }
        Format::Json => {
            let mut value = matrix;
            let obj = value.as_object_mut().expect("matrix object");
            if let Some(b2) = exact_b2 {
                obj.insert("b_squared".into(), json!(b2));
            }
            obj.insert("persymmetry_residual".into(), json!(j.persymmetry_residual()));
            obj.insert("pst".into(), pst_json(spectrum));
            Ok(json_text(&value))
        }
        Format::Csv => Err(no_csv("reconstruct")),
    }
}

fn amplitude_output(spectrum: &Spectrum, grid: Option<usize>, format: Format) -> Result<String, Failure> {
    let sym = to_symmetric(spectrum)?;
    let series = amplitude_series(&sym);
    let exact = amplitude_series_exact(&sym).ok();
    let t_end = validate_pst(spectrum).first_time.unwrap_or(std::f64::consts::PI);
    let table = match grid {
        Some(n) if n < 2 => return Err(Failure::Invalid("grid needs at least two points".into())),
        Some(n) => {
            let eig = return_series(&reconstruct_symmetric(&sym)?)?;
            (0..n)
                .map(|i| {
                    let t = t_end * i as f64 / (n - 1) as f64;
                    (t, series.evaluate(t), eig.evaluate(t).re)
                })
                .collect()
        }
        None => Vec::new(),
    };
    match format {
        Format::Text => {
            let mut s = format!("spectrum: {}\nc0: {}\n", spectrum_text(spectrum), fmt15(series.c0));
            for (i, (freq, c)) in series.terms.iter().enumerate() {
                let exact_c = exact.as_ref().map(|e| format!(" ({})", rational_string(&e.terms[i].1))).unwrap_or_default();
                s += &format!("cos({} t): {}{}\n", fmt15(*freq), fmt15(*c), exact_c);
            }
            for (t, a, e) in &table {
                s += &format!("A({}) = {} (eigen {})\n", fmt15(*t), fmt15(*a), fmt15(*e));
            }
            Ok(s)
        }
        Format::Json => {
            let mut value = json!({
                "spectrum": spectrum.values(),
                "c0": series.c0,
                "terms": series.terms.iter().map(|(f, c)| json!({"frequency": f, "coefficient": c})).collect::<Vec<_>>(),
            });
            if let Some(e) = &exact {
                value["exact"] = json!({
                    "c0": rational_string(&e.c0),
                    "coefficients": e.terms.iter().map(|(_, c)| rational_string(c)).collect::<Vec<_>>(),
                });
            }
            if !table.is_empty() {
                value["samples"] = table.iter().map(|(t, a, e)| json!({"t": t, "series": a, "eigen": e})).collect();
            }
            Ok(json_text(&value))
        }
        Format::Csv => {
            if table.is_empty() {
                return Err(Failure::Invalid("csv output needs --grid".into()));
            }
            let mut s = String::from("t,series,eigen\n");
            for (t, a, e) in &table {
                s += &format!("{},{},{}\n", fmt17(*t), fmt17(*a), fmt17(*e));
            }
            Ok(s)
        }
    }
}

fn pst_output(spectrum: &Spectrum, format: Format) -> Result<String, Failure> {
    let info = validate_pst(spectrum);
    let check = match info.first_time.filter(|_| info.admissible) {
        Some(t) => Some((t, verify_pst(&reconstruct(spectrum)?, t)?)),
        None => None,
    };
    match format {
        Format::Text => {
            let mut s = format!("spectrum: {}\n", spectrum_text(spectrum));
            match check {
                Some((t, c)) => {
                    s += &format!("T: {}\n", fmt15(t));
                    s += &format!("fidelity: {:.9}\n", c.fidelity);
                    s += &format!("phase: {}\n", fmt15(c.phase));
                    s += &format!("expected phase: {}\n", fmt15(info.phase_hint.unwrap_or(f64::NAN)));
                    s += &format!("perfect: {}\n", if c.is_perfect() { "yes" } else { "no" });
                }
                None => s += "pst: not admissible\n",
            }
            Ok(s)
        }
        Format::Json => {
            let mut value = pst_json(spectrum);
            if let Some((_, c)) = check {
                value["fidelity"] = json!(c.fidelity);
                value["phase"] = json!(c.phase);
                value["perfect"] = json!(c.is_perfect());
            }
            Ok(json_text(&value))
        }
        Format::Csv => Err(no_csv("pst")),
    }
}

fn ese_output(spectrum: &Spectrum, format: Format) -> Result<String, Failure> {
    let report = detect_ese(spectrum)?;
    match format {
        Format::Text => {
            let mut s = format!("spectrum: {}\n", spectrum_text(spectrum));
            s += &format!("T: {}\n", fmt15(report.pst_time));
            s += &format!("method: {}\n", report.method.as_str());
            s += &format!("count: {}\n", report.count);
            for (i, r) in report.roots.iter().enumerate() {
                let flag = if r.is_tangential() { " tangential" } else { "" };
                s += &format!("root {}: tau = {} in [{}, {}]{}\n", i + 1, fmt15(r.tau), fmt15(r.lo), fmt15(r.hi), flag);
            }
            Ok(s)
        }
        Format::Json => Ok(json_text(&serde_json::to_value(&report).expect("serializable"))),
        Format::Csv => {
            let mut s = String::from("index,lo,hi,tau\n");
            for (i, r) in report.roots.iter().enumerate() {
                s += &format!("{},{},{},{}\n", i + 1, fmt17(r.lo), fmt17(r.hi), fmt17(r.tau));
            }
            Ok(s)
        }
    }
}

fn family_output(family: Family, m: u32, format: Format) -> Result<(String, Outcome), Failure> {
    let case = families::FamilyCase::new(family, m)?;
    let count = case.certify()?;
    let verified = count == case.expected_ese;
    let spectrum = case.spectrum.to_spectrum();
    let text = match format {
        Format::Text => {
            let mut s = format!("family: {}\n", family_name(family));
            s += &format!("m: {m}\n");
            s += &format!("spectrum: {}\n", spectrum_text(&spectrum));
            s += &format!("expected: {}\n", case.expected_ese);
            s += &format!("certified: {count} (exact-sturm)\n");
            s += &format!("verified: {}\n", if verified { "yes" } else { "no" });
            s
        }
        Format::Json => json_text(&json!({
            "family": family,
            "m": m,
            "spectrum": spectrum.values(),
            "expected": case.expected_ese,
            "count": count,
            "method": "exact-sturm",
            "verified": verified,
        })),
        Format::Csv => return Err(no_csv("family")),
    };
    let verdict = if verified {
        Ok(())
    } else {
        Err(Failure::Mismatch(format!("expected {} exclusions, certified {count}", case.expected_ese)))
    };
    Ok((text, verdict))
}

fn family_name(family: Family) -> &'static str {
    match family {
        Family::NoEse => "no-ese {0, ±1, ±2m, ±(2m+1)}",
        Family::Ese => "ese {0, ±(2m+1), ±(2m+2), ±(2m+3)}",
    }
}

fn scan_output(records: &[ScanRecord], format: Format) -> Result<String, Failure> {
    let counter = families::counterexamples(records);
    let mut buf = Vec::new();
    match format {
        Format::Csv => families::write_scan_csv(&mut buf, records)?,
        Format::Json => families::write_scan_json(&mut buf, records)?,
        Format::Text => {
            writeln!(buf, "{:>4} {:>4} {:>4} {:>9} {:>5} {:>6}", "a", "b", "c", "divisible", "ese", "agrees")?;
            for r in records {
                writeln!(buf, "{:>4} {:>4} {:>4} {:>9} {:>5} {:>6}", r.a, r.b, r.c, r.divisible, r.ese_count, r.agrees)?;
            }
            let agreeing = records.len() - counter.len();
            writeln!(buf, "spectra: {}, agreeing: {agreeing}", records.len())?;
            if counter.is_empty() {
                writeln!(buf, "counterexamples: none")?;
            } else {
                for r in &counter {
                    writeln!(buf, "COUNTEREXAMPLE: {{0, ±{}, ±{}, ±{}}} divisible={} ese={}", r.a, r.b, r.c, r.divisible, r.ese_count)?;
                }
            }
        }
    }
    Ok(String::from_utf8(buf).expect("utf8"))
}
