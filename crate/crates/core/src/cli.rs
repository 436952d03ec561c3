//! Command-line front end. Output is JSON unless `--pretty` is given.
//!
//! Exit codes: 0 on success, 1 on a domain error (reported as
//! `{"error": kind, "message": ...}` on stdout), 2 on malformed input
//! (reported on stderr).

use std::io::Write;
use std::path::Path;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde_json::{json, Value};

use crate::catalog::{generalized_exp, hypergeom_pfq, make_h, CatalogTag};
use crate::error::{ParseError, WardError};
use crate::operators::{barrow_check, ftc_check, hadamard_derivative_identity_check, HSeries};
use crate::rat::{format_rat, parse_rat, rat, Rat};
use crate::riordan::RiordanPair;
use crate::series::Series;
use crate::sheffer::{classify_calculus, h_from_a, sheffer_expansion, CalculusVerdict, ClosedForm};
use crate::solver::{
    oracle_linear_solve, partial_fractions, solve_heaviside, solve_ivp_fixed_point, solve_via_roots, CharProblem,
    IvProblem, RhsSpec,
};

pub const DEFAULT_TRUNC: usize = 32;
pub const TRUNC_ENV: &str = "WARD_DEFAULT_TRUNC";

#[derive(Parser, Debug)]
#[command(name = "ward", version, about = "Exact Ward h-calculus on truncated power series")]
struct Cli {
    /// Print aligned fractions instead of JSON.
    #[arg(long, global = true)]
    pretty: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct HArgs {
    /// Catalog tag (pascal:S, polylog:A, fibonomial, q:P/Q) or file:<path>.
    #[arg(long, allow_hyphen_values = true)]
    h: Option<String>,
    /// Polynomial `a` with `h` its Pascal transform, as "a0,a1,...".
    #[arg(long, allow_hyphen_values = true)]
    a: Option<String>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Apply D_h (repeatedly with --times).
    Dh {
        #[command(flatten)]
        h: HArgs,
        #[arg(long, allow_hyphen_values = true)]
        series: String,
        #[arg(long)]
        trunc: Option<usize>,
        #[arg(long, default_value_t = 1)]
        times: usize,
    },
    /// Apply I_h (repeatedly with --times).
    Ih {
        #[command(flatten)]
        h: HArgs,
        #[arg(long, allow_hyphen_values = true)]
        series: String,
        #[arg(long)]
        trunc: Option<usize>,
        #[arg(long, default_value_t = 1)]
        times: usize,
    },
    /// Solve D_h^(n) y = G(y) by fixed-point iteration.
    Solve {
        #[command(flatten)]
        h: HArgs,
        #[arg(long)]
        order: usize,
        /// "identity", "zero", or JSON {"polynomial":[..]}, {"linear":{"q":..,"p":[..]}}, {"affine":{"f":..,"r":..}}.
        #[arg(long, allow_hyphen_values = true)]
        rhs: String,
        #[arg(long, allow_hyphen_values = true)]
        init: String,
        #[arg(long)]
        trunc: Option<usize>,
    },
    /// Solve D_h^(n) y = Σ a_k D_h^(k) y + q.
    Heaviside {
        #[arg(long, allow_hyphen_values = true)]
        h: String,
        /// Coefficients a_0,...,a_{n-1} of the equation.
        #[arg(long = "coeffs", allow_hyphen_values = true)]
        coeffs: String,
        #[arg(long, allow_hyphen_values = true, default_value = "0")]
        q: String,
        #[arg(long, allow_hyphen_values = true)]
        init: String,
        #[arg(long)]
        trunc: Option<usize>,
        #[arg(long, value_enum, default_value_t = Method::Heaviside)]
        method: Method,
    },
    /// Expand D_h in classical derivatives.
    Sheffer {
        #[command(flatten)]
        h: HArgs,
        #[arg(long)]
        trunc: Option<usize>,
    },
    /// Decide whether h generates a finite differential calculus.
    Classify {
        #[command(flatten)]
        h: HArgs,
        #[arg(long)]
        trunc: Option<usize>,
    },
    /// Materialize a Riordan matrix T(f|g).
    Riordan {
        /// "pascal", "inverse-pascal" or "identity"; overrides --f/--g.
        #[arg(long, allow_hyphen_values = true)]
        named: Option<String>,
        #[arg(long, allow_hyphen_values = true, default_value = "1")]
        f: String,
        #[arg(long, allow_hyphen_values = true, default_value = "1")]
        g: String,
        #[arg(long, default_value_t = 6)]
        rows: usize,
        #[arg(long)]
        inverse: bool,
    },
    /// Generalized exponential e_h.
    Exp {
        #[command(flatten)]
        h: HArgs,
        #[arg(long)]
        trunc: Option<usize>,
    },
    /// Hypergeometric series pFq(upper; lower; scale·x).
    Hyp {
        #[arg(long, allow_hyphen_values = true, default_value = "")]
        upper: String,
        #[arg(long, allow_hyphen_values = true, default_value = "")]
        lower: String,
        #[arg(long, allow_hyphen_values = true, default_value = "1")]
        scale: String,
        #[arg(long)]
        trunc: Option<usize>,
    },
    /// Randomized self-check of the structural identities.
    Check {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 20)]
        count: usize,
        #[arg(long)]
        trunc: Option<usize>,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Method {
    Heaviside,
    Roots,
    Oracle,
    FixedPoint,
}

impl Method {
    fn name(self) -> &'static str {
        match self {
            Method::Heaviside => "heaviside",
            Method::Roots => "roots",
            Method::Oracle => "oracle",
            Method::FixedPoint => "fixed-point",
        }
    }
}

enum Failure {
    Parse(String),
    Domain(WardError),
}

impl From<ParseError> for Failure {
    fn from(e: ParseError) -> Self {
        Failure::Parse(e.0)
    }
}

impl From<WardError> for Failure {
    fn from(e: WardError) -> Self {
        Failure::Domain(e)
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

/// What a subcommand produced: a JSON value and its `--pretty` rendering.
struct Output {
    json: String,
    pretty: String,
}

/// Runs the CLI with the default truncation taken from `WARD_DEFAULT_TRUNC`.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match default_trunc_from(std::env::var(TRUNC_ENV).ok().as_deref()) {
        Ok(t) => run_with_default(args, t, out, err),
        Err(e) => {
            let _ = writeln!(err, "error: {}", e.0);
            2
        }
    }
}

/// Parses the value of `WARD_DEFAULT_TRUNC`; unset means 32.
pub fn default_trunc_from(value: Option<&str>) -> std::result::Result<usize, ParseError> {
    match value {
        None => Ok(DEFAULT_TRUNC),
        Some(v) => {
            v.trim().parse().map_err(|_| ParseError(format!("{TRUNC_ENV} must be a non-negative integer, got {v:?}")))
        }
    }
}

pub fn run_with_default<I, T>(args: I, default_trunc: usize, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{text}");
                    0
                }
                _ => {
                    let _ = write!(err, "{text}");
                    2
                }
            };
        }
    };
    match dispatch(&cli.command, default_trunc) {
        Ok(o) => {
            let text = if cli.pretty { o.pretty } else { o.json };
            let _ = writeln!(out, "{text}");
            0
        }
        Err(Failure::Parse(msg)) => {
            let _ = writeln!(err, "parse error: {msg}");
            2
        }
        Err(Failure::Domain(e)) => {
            let _ = writeln!(out, "{}", json!({"error": e.kind(), "message": e.to_string()}));
            1
        }
    }
}

fn dispatch(cmd: &Command, default_trunc: usize) -> CliResult<Output> {
    let tr = |t: &Option<usize>| t.unwrap_or(default_trunc);
    match cmd {
        Command::Dh { h, series, trunc, times } => {
            let t = tr(trunc);
            let (h, _) = load_h(h, t)?;
            let mut s = parse_series(series, Some(t))?;
            for _ in 0..*times {
                s = h.derivative(&s)?;
            }
            Ok(series_output(&s))
        }
        Command::Ih { h, series, trunc, times } => {
            let t = tr(trunc);
            let (h, _) = load_h(h, t + times)?;
            let s = h.integral_n(&parse_series(series, Some(t))?, *times);
            Ok(series_output(&s))
        }
        Command::Solve { h, order, rhs, init, trunc } => {
            let t = tr(trunc);
            let working = t + order;
            let (h, _) = load_h(h, working)?;
            let rhs = parse_rhs(rhs, working)?;
            let init = parse_rats(init)?;
            let problem = IvProblem::new(h, *order, rhs, init)?;
            let sol = solve_ivp_fixed_point(&problem, t)?;
            Ok(solution_output(&sol.solution, "fixed-point", Some(sol.iterations)))
        }
        Command::Heaviside { h, coeffs, q, init, trunc, method } => {
            let t = tr(trunc);
            let a = parse_rats(coeffs)?;
            let working = t + a.len();
            let h = load_h_spec(h, working)?.0;
            let q = parse_series(q, Some(working))?;
            let p = CharProblem::new(h, a, q, parse_rats(init)?)?;
            let (y, iterations) = match method {
                Method::Heaviside => (solve_heaviside(&p, t)?, None),
                Method::Oracle => (oracle_linear_solve(&p, t)?, None),
                Method::Roots => {
                    let pf = partial_fractions(&p, None, t)?;
                    (solve_via_roots(&p, &pf, t)?, None)
                }
                Method::FixedPoint => {
                    let sol = solve_ivp_fixed_point(&p.as_ivp(working)?, t)?;
                    (sol.solution, Some(sol.iterations))
                }
            };
            Ok(solution_output(&y, method.name(), iterations))
        }
        Command::Sheffer { h, trunc } => {
            let (h, closed) = load_h(h, tr(trunc))?;
            let e = sheffer_expansion(&h, closed.as_ref())?;
            let verdict = classify_calculus(&h, closed.as_ref())?;
            let c: Vec<String> = e.coeffs().iter().map(format_rat).collect();
            let json = json!({
                "c": c,
                "finite_degree": e.finite_degree(),
                "verdict": verdict_name(verdict),
            });
            let mut pretty = aligned_column("c_", 1, e.coeffs());
            pretty.push_str(&format!("\nverdict {}", verdict_text(verdict)));
            Ok(Output { json: json.to_string(), pretty })
        }
        Command::Classify { h, trunc } => {
            let (h, closed) = load_h(h, tr(trunc))?;
            let verdict = classify_calculus(&h, closed.as_ref())?;
            let json = serde_json::to_value(verdict).expect("verdict serializes");
            Ok(Output { json: json.to_string(), pretty: verdict_text(verdict) })
        }
        Command::Riordan { named, f, g, rows, inverse } => {
            let t = *rows;
            let mut pair = match named.as_deref() {
                Some("pascal") => RiordanPair::pascal(t),
                Some("inverse-pascal") => RiordanPair::inverse_pascal(t),
                Some("identity") => RiordanPair::identity(t),
                Some(other) => return Err(Failure::Parse(format!("unknown Riordan matrix {other:?}"))),
                None => RiordanPair::new(parse_series(f, Some(t))?, parse_series(g, Some(t))?)?,
            };
            if *inverse {
                pair = pair.inverse();
            }
            let m = pair.materialize(t)?;
            let json = Value::Array(
                m.iter().map(|row| Value::Array(row.iter().map(|e| Value::String(format_rat(e))).collect())).collect(),
            );
            Ok(Output { json: json.to_string(), pretty: aligned_triangle(&m) })
        }
        Command::Exp { h, trunc } => {
            let t = tr(trunc);
            let (h, _) = load_h(h, t)?;
            Ok(series_output(&generalized_exp(&h, t)))
        }
        Command::Hyp { upper, lower, scale, trunc } => {
            let s = hypergeom_pfq(&parse_rats(upper)?, &parse_rats(lower)?, &parse_rat(scale)?, tr(trunc))?;
            Ok(series_output(&s))
        }
        Command::Check { seed, count, trunc } => self_check(*seed, *count, trunc.unwrap_or(default_trunc.min(16))),
    }
}

fn load_h(args: &HArgs, trunc: usize) -> CliResult<(HSeries, Option<ClosedForm>)> {
    match (&args.h, &args.a) {
        (Some(spec), None) => load_h_spec(spec, trunc),
        (None, Some(a)) => {
            let a = parse_series(a, Some(trunc))?;
            let h = h_from_a(&a, trunc)?;
            Ok((h, Some(ClosedForm::Polynomial(a))))
        }
        _ => Err(Failure::Parse("exactly one of --h and --a is required".into())),
    }
}

fn load_h_spec(spec: &str, trunc: usize) -> CliResult<(HSeries, Option<ClosedForm>)> {
    if let Some(path) = spec.strip_prefix("file:") {
        let s = read_series_file(Path::new(path))?;
        let h = HSeries::new(s)?;
        return Ok((h, None));
    }
    let tag: CatalogTag = spec.parse()?;
    let h = make_h(&tag, trunc)?;
    Ok((h, Some(ClosedForm::Catalog(tag))))
}

fn read_series_file(path: &Path) -> CliResult<Series> {
    let text =
        std::fs::read_to_string(path).map_err(|e| Failure::Parse(format!("cannot read {}: {e}", path.display())))?;
    Ok(Series::from_json(&text)?)
}

/// A comma list is a polynomial, padded with zeros (or cut) to `pad` when
/// given. A JSON object or a path to a JSON file keeps its own truncation.
pub fn parse_series_arg(text: &str, pad: Option<usize>) -> std::result::Result<Series, ParseError> {
    let t = text.trim();
    if t.starts_with('{') {
        return Series::from_json(t);
    }
    let path = Path::new(t);
    if t.ends_with(".json") || path.is_file() {
        let body = std::fs::read_to_string(path).map_err(|e| ParseError(format!("cannot read {t}: {e}")))?;
        return Series::from_json(&body);
    }
    let s = Series::parse_list(t)?;
    Ok(match pad {
        Some(p) => s.as_polynomial(p),
        None => s,
    })
}

fn parse_series(text: &str, pad: Option<usize>) -> CliResult<Series> {
    Ok(parse_series_arg(text, pad)?)
}

fn parse_rats(text: &str) -> CliResult<Vec<Rat>> {
    if text.trim().is_empty() {
        return Ok(Vec::new());
    }
    Ok(text.split(',').map(parse_rat).collect::<std::result::Result<_, _>>()?)
}

fn series_value(v: &Value, trunc: usize) -> CliResult<Series> {
    match v {
        Value::String(s) => parse_series(s, Some(trunc)),
        Value::Number(n) => parse_series(&n.to_string(), Some(trunc)),
        Value::Object(_) => {
            serde_json::from_value(v.clone()).map_err(|e| Failure::Parse(format!("bad series object: {e}")))
        }
        other => Err(Failure::Parse(format!("expected a series, got {other}"))),
    }
}

fn series_list(v: &Value, trunc: usize) -> CliResult<Vec<Series>> {
    match v {
        Value::Array(items) => items.iter().map(|i| series_value(i, trunc)).collect(),
        other => Err(Failure::Parse(format!("expected a list of series, got {other}"))),
    }
}

fn parse_rhs(text: &str, trunc: usize) -> CliResult<RhsSpec> {
    match text.trim() {
        "identity" => return Ok(RhsSpec::identity(trunc)),
        "zero" => return Ok(RhsSpec::Polynomial { q: Vec::new() }),
        _ => {}
    }
    let v: Value = serde_json::from_str(text).map_err(|e| Failure::Parse(format!("bad --rhs JSON: {e}")))?;
    let obj = v
        .as_object()
        .filter(|o| o.len() == 1)
        .ok_or_else(|| Failure::Parse("--rhs must be identity, zero, or a JSON object with one key".into()))?;
    let (key, body) = obj.iter().next().expect("one key");
    let field = |name: &str| -> CliResult<&Value> {
        body.get(name).ok_or_else(|| Failure::Parse(format!("--rhs {key} needs field {name:?}")))
    };
    match key.as_str() {
        "polynomial" => Ok(RhsSpec::Polynomial { q: series_list(body, trunc)? }),
        "linear" => Ok(RhsSpec::LinearDh { q: series_value(field("q")?, trunc)?, p: series_list(field("p")?, trunc)? }),
        "affine" => {
            Ok(RhsSpec::AffineIntegralOp { f: series_value(field("f")?, trunc)?, r: series_value(field("r")?, trunc)? })
        }
        other => Err(Failure::Parse(format!("unknown --rhs form {other:?}"))),
    }
}

fn series_output(s: &Series) -> Output {
    Output { json: s.to_json(), pretty: aligned_column("x^", 0, s.coeffs()) }
}

fn solution_output(y: &Series, method: &str, iterations: Option<usize>) -> Output {
    let coeffs: Vec<String> = y.coeffs().iter().map(format_rat).collect();
    let mut json = json!({ "coeffs": coeffs, "method": method });
    let mut pretty = aligned_column("x^", 0, y.coeffs());
    pretty.push_str(&format!("\nmethod {method}"));
    if let Some(m) = iterations {
        json["iterations"] = json!(m);
        pretty.push_str(&format!("\niterations {m}"));
    }
    Output { json: json.to_string(), pretty }
}

fn verdict_name(v: CalculusVerdict) -> &'static str {
    match v {
        CalculusVerdict::FiniteDegree(_) => "FiniteDegree",
        CalculusVerdict::InfiniteCertified => "InfiniteCertified",
        CalculusVerdict::FiniteUpToTrunc(_) => "FiniteUpToTrunc",
        CalculusVerdict::UnknownBeyondTrunc => "UnknownBeyondTrunc",
    }
}

fn verdict_text(v: CalculusVerdict) -> String {
    match v {
        CalculusVerdict::FiniteDegree(m) | CalculusVerdict::FiniteUpToTrunc(m) => format!("{} {m}", verdict_name(v)),
        _ => verdict_name(v).to_string(),
    }
}

/// Fractions with numerators right-aligned and slashes in one column.
fn align(values: &[Rat]) -> Vec<String> {
    let parts: Vec<(String, Option<String>)> = values
        .iter()
        .map(|r| {
            let text = format_rat(r);
            match text.split_once('/') {
                Some((n, d)) => (n.to_string(), Some(d.to_string())),
                None => (text, None),
            }
        })
        .collect();
    let wn = parts.iter().map(|(n, _)| n.len()).max().unwrap_or(0);
    let wd = parts.iter().filter_map(|(_, d)| d.as_ref().map(|d| d.len() + 1)).max().unwrap_or(0);
    parts
        .into_iter()
        .map(|(n, d)| {
            let tail = d.map(|d| format!("/{d}")).unwrap_or_default();
            format!("{n:>wn$}{tail:<wd$}")
        })
        .collect()
}

fn aligned_column(label: &str, first: usize, values: &[Rat]) -> String {
    let width = (first + values.len()).to_string().len();
    align(values)
        .into_iter()
        .enumerate()
        .map(|(i, v)| format!("{label}{:<width$}  {}", i + first, v.trim_end()))
        .collect::<Vec<_>>()
        .join("\n")
}

fn aligned_triangle(m: &[Vec<Rat>]) -> String {
    let width = m.iter().flatten().map(|e| format_rat(e).len()).max().unwrap_or(1);
    m.iter()
        .map(|row| row.iter().map(|e| format!("{:>width$}", format_rat(e))).collect::<Vec<_>>().join(" "))
        .collect::<Vec<_>>()
        .join("\n")
}

fn random_series(rng: &mut StdRng, trunc: usize) -> Series {
    Series::from_fn(trunc, |_| Rat::new(rng.gen_range(-9..=9).into(), rng.gen_range(1..=5).into()))
}

fn random_h(rng: &mut StdRng, trunc: usize) -> HSeries {
    let base = Series::from_fn(trunc, |k| {
        if k == 0 {
            return rat(0);
        }
        let n: i64 = rng.gen_range(1..=9) * if rng.gen_bool(0.5) { 1 } else { -1 };
        Rat::new(n.into(), rng.gen_range(1..=4).into())
    });
    HSeries::new(base).expect("nonzero coefficients")
}

fn self_check(seed: u64, count: usize, trunc: usize) -> CliResult<Output> {
    let mut rng = StdRng::seed_from_u64(seed);
    let (mut barrow, mut ftc, mut hadamard) = (0, 0, 0);
    for _ in 0..count {
        let h = random_h(&mut rng, trunc);
        let s = random_series(&mut rng, trunc);
        barrow += barrow_check(&h, &s) as usize;
        ftc += ftc_check(&h, &s) as usize;
        hadamard += hadamard_derivative_identity_check(&h, &s) as usize;
    }
    let ok = barrow == count && ftc == count && hadamard == count;
    let json = json!({
        "seed": seed,
        "count": count,
        "trunc": trunc,
        "barrow": barrow,
        "ftc": ftc,
        "hadamard": hadamard,
        "ok": ok,
    });
    if !ok {
        return Err(Failure::Domain(WardError::InvalidParameter(format!("self-check failed: {json}"))));
    }
    let pretty = format!("barrow   {barrow}/{count}\nftc      {ftc}/{count}\nhadamard {hadamard}/{count}");
    Ok(Output { json: json.to_string(), pretty })
}
