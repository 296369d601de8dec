use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde_json::{json, Value};

use ffappell::appell::{appell, AppellKind, AppellSpec};
use ffappell::cyclo::Scalar;
use ffappell::field::{FieldContext, FieldElement};
use ffappell::hyperff::{greene_2f1_fieldsum, mccarthy_star, HypergeomSpec};
use ffappell::sums::{CharSums, ExactSums, FloatSums};
use ffappell::verify::{budget_from_env, Mode, Status, SuiteId, VerificationReport, Verifier};

#[derive(Parser)]
#[command(
    name = "ffappell",
    version,
    about = "Character sums, hypergeometric and Appell functions over finite fields"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Field inspection.
    Field {
        #[command(subcommand)]
        command: FieldCommand,
    },
    /// Evaluate one function at one argument.
    Eval(EvalArgs),
    /// Run verification suites.
    Verify(VerifyArgs),
}

#[derive(Subcommand)]
enum FieldCommand {
    /// Print order, modulus, generator and character group order.
    Info {
        #[command(flatten)]
        field: FieldArgs,
        #[arg(long, value_enum, default_value_t = InfoFormat::Text)]
        format: InfoFormat,
    },
}

#[derive(Args, Clone)]
struct FieldArgs {
    /// Characteristic (odd prime).
    #[arg(long)]
    p: Option<u32>,
    /// Extension degree.
    #[arg(long)]
    r: Option<u32>,
    /// Field order, as an alternative to --p/--r.
    #[arg(long, conflicts_with_all = ["p", "r"])]
    q: Option<u32>,
}

impl FieldArgs {
    fn context(&self) -> Result<Arc<FieldContext>> {
        let (p, r) = match (self.p, self.r, self.q) {
            (_, _, Some(q)) => prime_power(q).ok_or_else(|| anyhow!("q = {q} is not a prime power"))?,
            (Some(p), r, None) => (p, r.unwrap_or(1)),
            (None, _, None) => bail!("give the field as --p P [--r R] or --q Q"),
        };
        Ok(Arc::new(FieldContext::new(p, r)?))
    }
}

fn prime_power(q: u32) -> Option<(u32, u32)> {
    if q < 2 {
        return None;
    }
    let p = (2..=q).find(|d| q.is_multiple_of(*d))?;
    let (mut rest, mut r) = (q, 0);
    while rest % p == 0 {
        rest /= p;
        r += 1;
    }
    (rest == 1).then_some((p, r))
}

#[derive(Clone, Copy, ValueEnum)]
enum InfoFormat {
    Text,
    Json,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Function {
    Gauss,
    Jacobi,
    Binom,
    #[value(name = "2f1_greene")]
    Greene2f1,
    #[value(name = "nfn_star")]
    NfnStar,
    F1,
    F2,
    F3,
    F1star,
    F2star,
    F3star,
    F4star,
}

#[derive(Clone, Copy, ValueEnum)]
enum Backend {
    Exact,
    Float,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long = "fn", value_enum)]
    function: Function,
    #[command(flatten)]
    field: FieldArgs,
    /// Comma-separated character indices (k or chi_k).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    chars: Vec<String>,
    /// First argument, "0" or "g^k".
    #[arg(long)]
    x: Option<String>,
    /// Second argument of the Appell functions.
    #[arg(long)]
    y: Option<String>,
    #[arg(long, value_enum, default_value_t = Backend::Exact)]
    backend: Backend,
}

#[derive(Clone, Copy, ValueEnum)]
enum ReportFormat {
    Json,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Exhaustive,
    Sample,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Mode {
        match m {
            ModeArg::Exhaustive => Mode::Exhaustive,
            ModeArg::Sample => Mode::Sample,
        }
    }
}

#[derive(Args)]
struct VerifyArgs {
    /// Suite name, or "all".
    #[arg(long)]
    suite: String,
    #[command(flatten)]
    field: FieldArgs,
    /// Defaults to exhaustive for one suite; "all" schedules per suite
    /// against FFAPPELL_BUDGET unless a mode is given.
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    #[arg(long, default_value_t = ffappell::verify::DEFAULT_SAMPLES)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Report file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = ReportFormat::Json)]
    format: ReportFormat,
    /// Worker threads; defaults to the number of cores.
    #[arg(long)]
    threads: Option<usize>,
    /// Include wall-clock timings (makes reports non-reproducible).
    #[arg(long)]
    timings: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli, &mut std::io::stdout().lock()) {
        Ok(0) => ExitCode::SUCCESS,
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

/// Runs a parsed command, writing its output to `out`; returns the exit code.
fn run(cli: Cli, out: &mut dyn std::io::Write) -> Result<u8> {
    match cli.command {
        Command::Field {
            command: FieldCommand::Info { field, format },
        } => field_info(&field, format, out),
        Command::Eval(args) => eval(&args, out),
        Command::Verify(args) => verify(&args, out),
    }
}

fn field_info(args: &FieldArgs, format: InfoFormat, out: &mut dyn std::io::Write) -> Result<u8> {
    let f = args.context()?;
    let g = f.poly_string(f.generator());
    match format {
        InfoFormat::Text => {
            writeln!(
                out,
                "q = {} (p = {}, r = {})",
                f.order(),
                f.characteristic(),
                f.degree()
            )?;
            writeln!(out, "modulus: {}", f.modulus_string())?;
            writeln!(out, "generator: g = {g}")?;
            writeln!(out, "character group order: {}", f.group_order())?;
        }
        InfoFormat::Json => {
            let v = json!({
                "p": f.characteristic(),
                "r": f.degree(),
                "q": f.order(),
                "modulus": f.modulus(),
                "modulus_string": f.modulus_string(),
                "generator": g,
                "group_order": f.group_order(),
            });
            writeln!(out, "{}", serde_json::to_string_pretty(&v)?)?;
        }
    }
    Ok(0)
}

struct EvalInput {
    chars: Vec<u32>,
    x: Option<FieldElement>,
    y: Option<FieldElement>,
}

fn eval(args: &EvalArgs, out: &mut dyn std::io::Write) -> Result<u8> {
    let f = args.field.context()?;
    let chars = args
        .chars
        .iter()
        .map(|c| Ok(f.parse_character(c)?.index()))
        .collect::<Result<Vec<u32>>>()?;
    let parse = |s: &Option<String>| s.as_deref().map(|s| f.parse_label(s)).transpose();
    let input = EvalInput {
        chars,
        x: parse(&args.x)?,
        y: parse(&args.y)?,
    };
    match args.backend {
        Backend::Exact => {
            let v = evaluate(&ExactSums::new(f.clone()), args.function, &input)?;
            writeln!(out, "{v}")?;
            writeln!(out, "{}", complex_string(v.to_complex()))?;
        }
        Backend::Float => {
            let v = evaluate(&FloatSums::new(f.clone()), args.function, &input)?;
            writeln!(out, "{}", complex_string(v))?;
        }
    }
    Ok(0)
}

fn complex_string(z: Complex64) -> String {
    let re = if z.re == 0.0 { 0.0 } else { z.re };
    let im = if z.im == 0.0 { 0.0 } else { z.im };
    let sign = if im.is_sign_negative() { '-' } else { '+' };
    format!("{re:.12} {sign} {:.12}i", im.abs())
}

fn evaluate<V: Scalar>(s: &CharSums<V>, function: Function, input: &EvalInput) -> Result<V> {
    let f = s.field();
    let c = &input.chars;
    let arity = |n: usize| -> Result<()> {
        if c.len() != n {
            bail!("this function takes {n} character(s), got {}", c.len());
        }
        Ok(())
    };
    let need = |e: Option<FieldElement>, name: &str| e.ok_or_else(|| anyhow!("missing --{name}"));
    let mc = |k: u32| f.character(k as i64);
    Ok(match function {
        Function::Gauss => {
            arity(1)?;
            s.g(c[0]).clone()
        }
        Function::Jacobi => {
            arity(2)?;
            s.jacobi(c[0], c[1])
        }
        Function::Binom => {
            arity(2)?;
            s.binom(c[0], c[1]).clone()
        }
        Function::Greene2f1 => {
            arity(3)?;
            let x = need(input.x, "x")?;
            greene_2f1_fieldsum(s, c[0], c[1], c[2], x)
        }
        Function::NfnStar => {
            if c.len() < 3 || c.len().is_multiple_of(2) {
                bail!(
                    "nfn_star takes n + 1 upper then n lower characters (an odd count >= 3), got {}",
                    c.len()
                );
            }
            let x = need(input.x, "x")?;
            let n = c.len() / 2;
            let spec = HypergeomSpec::new(
                c[..=n].iter().map(|&k| mc(k)).collect(),
                c[n + 1..].iter().map(|&k| mc(k)).collect(),
                x,
            )?;
            mccarthy_star(s, &spec)?
        }
        _ => {
            let kind = match function {
                Function::F1 => AppellKind::F1,
                Function::F2 => AppellKind::F2,
                Function::F3 => AppellKind::F3,
                Function::F1star => AppellKind::F1Star,
                Function::F2star => AppellKind::F2Star,
                Function::F3star => AppellKind::F3Star,
                _ => AppellKind::F4Star,
            };
            let spec = AppellSpec::new(
                kind,
                c.iter().map(|&k| mc(k)).collect(),
                need(input.x, "x")?,
                need(input.y, "y")?,
            )?;
            appell(s, &spec)?
        }
    })
}

fn verify(args: &VerifyArgs, out: &mut dyn std::io::Write) -> Result<u8> {
    if let Some(n) = args.threads {
        if n == 0 {
            bail!("--threads must be positive");
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    let suites: Vec<SuiteId> = if args.suite.eq_ignore_ascii_case("all") {
        SuiteId::ALL.to_vec()
    } else {
        vec![args.suite.parse()?]
    };
    let all = args.suite.eq_ignore_ascii_case("all");
    let f = args.field.context()?;
    let verifier = Verifier::new(f.clone());
    let budget = budget_from_env();
    let mut reports = Vec::with_capacity(suites.len());
    for &suite in &suites {
        let mode = match args.mode {
            Some(m) => m.into(),
            None if all => verifier.schedule(suite, budget),
            None => Mode::Exhaustive,
        };
        reports.push(verifier.run_suite(suite, mode, Some(args.samples), Some(args.seed))?);
    }

    let text = match args.format {
        ReportFormat::Json => {
            let mut v = if all {
                json!({
                    "p": f.characteristic(),
                    "r": f.degree(),
                    "q": f.order(),
                    "seed": args.seed,
                    "reports": reports.iter().map(|r| r.to_json(args.timings)).collect::<Vec<_>>(),
                    "thm3_reading": thm3_reading(&reports),
                    "passed": reports.iter().all(VerificationReport::passed),
                })
            } else {
                reports[0].to_json(args.timings)
            };
            if !all {
                if let Some(obj) = v.as_object_mut() {
                    obj.insert("passed".into(), json!(reports[0].passed()));
                }
            }
            serde_json::to_string_pretty(&v)? + "\n"
        }
        ReportFormat::Csv => csv_report(&reports, args.timings)?,
    };
    match &args.out {
        Some(path) => {
            fs::write(path, &text).with_context(|| format!("writing {}", path.display()))?;
            for r in &reports {
                writeln!(
                    out,
                    "{:<16} {:<10} {:>9} tuples  {:<8} {} violation(s)",
                    r.suite.name(),
                    r.mode.name(),
                    r.tuples_tested,
                    r.status().name(),
                    r.violation_count
                )?;
            }
        }
        None => out.write_all(text.as_bytes())?,
    }
    Ok(if reports.iter().all(VerificationReport::passed) {
        0
    } else {
        1
    })
}

/// Which of the two thm3 readings held up.
fn thm3_reading(reports: &[VerificationReport]) -> Value {
    let status = |s: SuiteId| reports.iter().find(|r| r.suite == s).map(|r| r.status());
    let (a, b) = (status(SuiteId::Thm3), status(SuiteId::Thm3Variant));
    let ok = |s: Option<Status>| s == Some(Status::Verified);
    let verified = match (ok(a), ok(b)) {
        (true, true) => "both",
        (true, false) => "thm3",
        (false, true) => "thm3_variant",
        (false, false) => "none",
    };
    json!({
        "thm3": a.map(Status::name),
        "thm3_variant": b.map(Status::name),
        "verified": verified,
    })
}

fn csv_report(reports: &[VerificationReport], timings: bool) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec![
        "suite",
        "p",
        "r",
        "q",
        "mode",
        "seed",
        "tuples_tested",
        "status",
        "violation_count",
    ];
    if timings {
        header.push("elapsed_s");
    }
    w.write_record(&header)?;
    for r in reports {
        let mut row = vec![
            r.suite.name().to_string(),
            r.p.to_string(),
            r.r.to_string(),
            r.q.to_string(),
            r.mode.name().to_string(),
            r.seed.to_string(),
            r.tuples_tested.to_string(),
            r.status().name().to_string(),
            r.violation_count.to_string(),
        ];
        if timings {
            row.push(format!("{:.6}", r.elapsed_s));
        }
        w.write_record(&row)?;
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn call(args: &str) -> (Result<u8>, String) {
        let cli = Cli::try_parse_from(std::iter::once("ffappell").chain(args.split_whitespace())).unwrap();
        let mut out = Vec::new();
        let code = run(cli, &mut out);
        (code, String::from_utf8(out).unwrap())
    }

    fn first_line(args: &str) -> String {
        let (code, out) = call(args);
        assert_eq!(code.unwrap(), 0, "{args}");
        out.lines().next().unwrap().to_string()
    }

    #[test]
    fn field_info_examples() {
        let (_, out) = call("field info --p 3 --r 2");
        assert!(out.contains("q = 9"), "{out}");
        assert!(out.contains("modulus: x^2 + 1"), "{out}");
        assert!(out.contains("generator: g = t + 1"), "{out}");
        assert!(out.contains("character group order: 8"), "{out}");
        let (_, out) = call("field info --p 5 --r 1");
        assert!(out.contains("generator: g = 2"), "{out}");
        assert!(call("field info --p 4 --r 1").0.is_err());
        assert!(call("field info --q 12").0.is_err());
    }

    #[test]
    fn eval_examples() {
        assert_eq!(first_line("eval --fn gauss --q 5 --chars 0"), "-1");
        assert_eq!(
            first_line("eval --fn f4star --p 5 --r 1 --chars 1,2,3,1 --x g^1 --y 0"),
            "0"
        );
        assert_eq!(first_line("eval --fn jacobi --p 5 --r 1 --chars 2,2"), "-1");
        assert_eq!(first_line("eval --fn jacobi --p 5 --r 1 --chars chi_2,chi_2"), "-1");
        let (_, out) = call("eval --fn gauss --q 5 --chars 0 --backend float");
        assert_eq!(out.trim(), "-1.000000000000 + 0.000000000000i");
    }

    #[test]
    fn eval_errors() {
        assert!(call("eval --fn f1 --q 5 --chars 1,2 --x g^1 --y g^2").0.is_err());
        assert!(call("eval --fn nfn_star --q 5 --chars 1,2 --x g^1").0.is_err());
        assert!(call("eval --fn 2f1_greene --q 5 --chars 1,2,3 --x h^1").0.is_err());
        assert!(call("eval --fn 2f1_greene --q 5 --chars 1,2,3").0.is_err());
    }

    #[test]
    fn verify_examples() {
        let (code, out) = call("verify --suite thm1 --p 3 --r 1");
        assert_eq!(code.unwrap(), 0);
        let v: Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["tuples_tested"], 64);
        assert_eq!(v["status"], "verified");
        assert_eq!(v["elapsed_s"], Value::Null);

        let (code, out) = call("verify --suite thm2a --p 3 --r 1");
        assert_eq!(code.unwrap(), 0);
        let v: Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["status"], "vacuous");
        assert_eq!(v["tuples_tested"], 0);

        assert!(call("verify --suite nope --p 3 --r 1").0.is_err());
    }

    #[test]
    fn verify_all_reports_thm3_reading() {
        let (code, out) = call("verify --suite all --p 5 --r 1 --seed 7");
        // thm2a as written has violations at q = 5
        assert_eq!(code.unwrap(), 1);
        let v: Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["reports"].as_array().unwrap().len(), SuiteId::ALL.len());
        assert_eq!(v["thm3_reading"]["verified"], "thm3_variant");
        assert_eq!(out, call("verify --suite all --p 5 --r 1 --seed 7").1);
    }

    #[test]
    fn csv_has_one_row_per_suite() {
        let (_, out) = call("verify --suite all --p 3 --r 1 --format csv");
        assert_eq!(out.lines().count(), SuiteId::ALL.len() + 1);
        assert!(out.starts_with("suite,p,r,q,mode,seed,tuples_tested,status,violation_count\n"));
        let (_, out) = call("verify --suite rel1 --p 3 --r 1 --format csv --timings");
        assert!(out.lines().next().unwrap().ends_with(",elapsed_s"));
    }

    #[test]
    fn prime_powers() {
        assert_eq!(prime_power(9), Some((3, 2)));
        assert_eq!(prime_power(13), Some((13, 1)));
        assert_eq!(prime_power(12), None);
        assert_eq!(prime_power(1), None);
    }

    #[test]
    fn complex_formatting() {
        assert_eq!(
            complex_string(Complex64::new(-1.0, -0.0)),
            "-1.000000000000 + 0.000000000000i"
        );
        assert_eq!(
            complex_string(Complex64::new(0.5, -2.0)),
            "0.500000000000 - 2.000000000000i"
        );
    }
}
