//! The `qmlab` command line.
//!
//! Exit codes: 0 when every check passes, 1 when a check fails, 2 on a usage
//! or configuration error.

pub mod form;
pub mod parse;

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{self, Write};
use std::ops::RangeInclusive;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use num_traits::{ToPrimitive, Zero};
use qmlab_core::arith::{factor_bounded, padic_valuation, rat_to_fraction, rat_to_string};
use qmlab_core::cmtaylor::{class_data, sweep_levels, TaylorChain};
use qmlab_core::padic::{filtration, ideal_valuation, reduce_poly};
use qmlab_core::qexp::eisenstein_qexp;
use qmlab_core::ssing::{brute_force_supersingular, ss_poly};
use qmlab_core::{BigRational, CmPoint, Registry, SweepMode};
use serde::Serialize;
use serde_json::json;
use thiserror::Error;

pub use form::{Form, FormSpec};
pub use parse::{parse_form, ParseError};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] qmlab_core::Error),
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("{path}: {source}")]
    Io { path: String, source: io::Error },
}

/// Outcome of a command that ran to completion.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
}

impl Status {
    pub fn code(self) -> i32 {
        match self {
            Status::Pass => 0,
            Status::Fail => 1,
        }
    }

    fn from_ok(ok: bool) -> Self {
        if ok {
            Status::Pass
        } else {
            Status::Fail
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "qmlab", version, about = "Quasimodular forms, CM Taylor coefficients and supersingular polynomials")]
pub struct Cli {
    /// CM point registry (JSON); defaults to the shipped points.
    #[arg(long, global = true, env = "QMLAB_REGISTRY")]
    pub registry: Option<PathBuf>,

    /// Write machine-readable JSON lines here.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct FormArgs {
    /// Built-in name (E4, E6, E8, E10, E14, delta, eisenstein:k) or a polynomial in P, Q, R.
    #[arg(long)]
    pub form: Option<String>,

    /// `FORM:n` for the n-th derivative D^n of FORM.
    #[arg(long)]
    pub form_deriv: Option<String>,
}

impl FormArgs {
    fn resolve(&self) -> Result<Form, CliError> {
        Form::from_flags(self.form.as_deref(), self.form_deriv.as_deref())
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print t_f(tau; n) with its factorization and valuations.
    Taylor {
        #[command(flatten)]
        form: FormArgs,
        #[arg(long)]
        point: String,
        #[arg(long)]
        n: u64,
        /// Primes whose valuations to report.
        #[arg(long, value_delimiter = ',')]
        primes: Vec<u64>,
        /// Trial-division bound for the displayed factorization (0 disables it).
        #[arg(long, default_value_t = 1_000_000)]
        factor_bound: u64,
    },
    /// Check v_p(t_f(tau; n)) >= m over a range of n.
    Sweep {
        #[command(flatten)]
        form: FormArgs,
        #[arg(long)]
        point: String,
        #[arg(long)]
        p: u64,
        /// One or more levels, comma separated.
        #[arg(long, value_delimiter = ',', required = true)]
        m: Vec<u32>,
        /// Inclusive range `A..B`, or a single `n`.
        #[arg(long)]
        n_range: String,
        /// weak, sharp or conjecture.
        #[arg(long, default_value = "weak")]
        mode: SweepMode,
    },
    /// Filtration of f mod p^m.
    Filtration {
        #[command(flatten)]
        form: FormArgs,
        #[arg(long)]
        p: u64,
        #[arg(long, default_value_t = 1)]
        m: u32,
    },
    /// The ideal valuation v(f) for (A^p, p).
    Valuation {
        #[command(flatten)]
        form: FormArgs,
        #[arg(long)]
        p: u64,
    },
    /// The supersingular polynomial ss_p(j).
    Sspoly {
        #[arg(long)]
        p: u64,
        /// Compare the roots with point counting (p <= 1000).
        #[arg(long)]
        check: bool,
    },
    /// Inspect the CM point registry.
    Registry {
        #[command(subcommand)]
        action: RegistryAction,
    },
}

#[derive(Debug, Subcommand)]
pub enum RegistryAction {
    List,
    /// Validate every point; `--numeric` also compares against q-series values.
    Validate {
        #[arg(long)]
        numeric: bool,
        /// Number of q-series coefficients for the numeric check.
        #[arg(long, default_value_t = 40)]
        precision: usize,
    },
}

/// Parses `A..B`, `A..=B` or `n`.
pub fn parse_range(text: &str) -> Result<RangeInclusive<u64>, CliError> {
    let bad = || CliError::Usage(format!("bad range {text:?}; expected A..B or n"));
    let num = |s: &str| s.trim().parse::<u64>().map_err(|_| bad());
    let range = match text.split_once("..") {
        Some((a, b)) => num(a)?..=num(b.strip_prefix('=').unwrap_or(b))?,
        None => {
            let n = num(text)?;
            n..=n
        }
    };
    if range.is_empty() {
        return Err(bad());
    }
    Ok(range)
}

fn load_registry(path: Option<&Path>) -> Result<Registry, CliError> {
    Ok(match path {
        Some(p) => Registry::load(p)?,
        None => Registry::builtin(),
    })
}

struct JsonSink {
    file: Option<(String, File)>,
}

impl JsonSink {
    fn open(path: Option<&Path>) -> Result<Self, CliError> {
        let file = match path {
            Some(p) => {
                let name = p.display().to_string();
                let f = File::create(p).map_err(|source| CliError::Io {
                    path: name.clone(),
                    source,
                })?;
                Some((name, f))
            }
            None => None,
        };
        Ok(JsonSink { file })
    }

    fn is_open(&self) -> bool {
        self.file.is_some()
    }

    fn row<T: Serialize>(&mut self, row: &T) -> Result<(), CliError> {
        if let Some((name, f)) = &mut self.file {
            let line = serde_json::to_string(row).expect("rows serialize");
            writeln!(f, "{line}").map_err(|source| CliError::Io {
                path: name.clone(),
                source,
            })?;
        }
        Ok(())
    }
}

fn factor_rational(x: &BigRational, bound: u64) -> Result<String, CliError> {
    if x.is_zero() {
        return Ok("0".into());
    }
    let num = factor_bounded(x.numer(), bound)?;
    if x.denom() == &1.into() {
        return Ok(num.to_string());
    }
    let den = factor_bounded(x.denom(), bound)?;
    Ok(format!("{num} / {den}"))
}

fn out_err(e: io::Error) -> CliError {
    CliError::Io {
        path: "<stdout>".into(),
        source: e,
    }
}

pub fn run(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<Status, CliError> {
    let mut sink = JsonSink::open(cli.output.as_deref())?;
    match &cli.command {
        Command::Taylor {
            form,
            point,
            n,
            primes,
            factor_bound,
        } => {
            let registry = load_registry(cli.registry.as_deref())?;
            let pt = registry.lookup(point)?;
            let form = form.resolve()?;
            if let Some(p) = primes.iter().find(|&&p| !qmlab_core::arith::is_prime(p)) {
                return Err(CliError::Usage(format!("--primes: {p} is not prime")));
            }
            let mut chain = TaylorChain::new(&form.poly, pt)?.with_form(&form.label);
            chain.seek(*n);
            let coeff = chain.current()?;
            let value = coeff.value();
            writeln!(out, "t({}, {}; {n}) = {}", form.label, pt.name(), rat_to_string(value)).map_err(out_err)?;
            let factored = if *factor_bound >= 2 {
                let f = factor_rational(value, *factor_bound)?;
                writeln!(out, "  = {f}").map_err(out_err)?;
                Some(f)
            } else {
                None
            };
            let mut valuations = BTreeMap::new();
            for &p in primes {
                let v = padic_valuation(value, p);
                writeln!(out, "  v_{p} = {v}").map_err(out_err)?;
                valuations.insert(p.to_string(), v);
            }
            sink.row(&json!({
                "form": coeff.form(),
                "point": coeff.point(),
                "n": coeff.n(),
                "value": rat_to_fraction(value),
                "factorization": factored,
                "valuations": valuations,
            }))?;
            Ok(Status::Pass)
        }
        Command::Sweep {
            form,
            point,
            p,
            m,
            n_range,
            mode,
        } => {
            let registry = load_registry(cli.registry.as_deref())?;
            let pt = registry.lookup(point)?;
            let form = form.resolve()?;
            let range = parse_range(n_range)?;
            let mut report = sweep_levels(&form.poly, pt, *p, m, range, *mode)?;
            report.relabel_form(&form.label);
            if sink.is_open() {
                for row in report.rows() {
                    sink.row(row)?;
                }
            } else {
                out.write_all(report.to_json_lines().as_bytes()).map_err(out_err)?;
            }
            let failures: Vec<_> = report.failures().collect();
            for row in &failures {
                writeln!(err, "FAIL n={} m={}: v_{} = {} < {}", row.n, row.m, row.p, row.valuation, row.m)
                    .map_err(out_err)?;
            }
            writeln!(
                err,
                "{} rows, {} checked, {} failed ({} mode, {} on {})",
                report.rows().len(),
                report.rows().iter().filter(|r| r.required.is_some()).count(),
                failures.len(),
                mode,
                form.label,
                pt.name()
            )
            .map_err(out_err)?;
            Ok(Status::from_ok(failures.is_empty()))
        }
        Command::Filtration { form, p, m } => {
            let form = form.resolve()?;
            let reduced = reduce_poly(&form.poly, *p, *m)?;
            let w = filtration(&reduced)?;
            writeln!(out, "w({} mod {p}^{m}) = {w}", form.label).map_err(out_err)?;
            sink.row(&json!({ "form": form.label, "p": p, "m": m, "filtration": w }))?;
            Ok(Status::Pass)
        }
        Command::Valuation { form, p } => {
            let form = form.resolve()?;
            let v = ideal_valuation(&form.poly, *p)?;
            writeln!(out, "v({}) = {v} at p = {p}", form.label).map_err(out_err)?;
            sink.row(&json!({ "form": form.label, "p": p, "valuation": v }))?;
            Ok(Status::Pass)
        }
        Command::Sspoly { p, check } => {
            let ss = ss_poly(*p)?;
            let roots = ss.roots();
            writeln!(out, "ss_{p}(j) = {ss}").map_err(out_err)?;
            let list: Vec<String> = roots.iter().map(u64::to_string).collect();
            writeln!(out, "roots in F_{p}: {{{}}}", list.join(", ")).map_err(out_err)?;
            let mut ok = true;
            let mut oracle = None;
            if *check {
                let brute = brute_force_supersingular(*p)?;
                ok = brute == roots;
                writeln!(out, "point-count oracle: {}", if ok { "agrees" } else { "DISAGREES" }).map_err(out_err)?;
                oracle = Some(brute);
            }
            sink.row(&json!({ "p": p, "coeffs": ss.coeffs(), "roots": roots, "oracle": oracle }))?;
            Ok(Status::from_ok(ok))
        }
        Command::Registry { action } => {
            let registry = load_registry(cli.registry.as_deref())?;
            match action {
                RegistryAction::List => {
                    for pt in registry.points() {
                        writeln!(out, "{pt}").map_err(out_err)?;
                        sink.row(pt)?;
                    }
                    Ok(Status::Pass)
                }
                RegistryAction::Validate { numeric, precision } => {
                    let mut ok = true;
                    for pt in registry.points() {
                        writeln!(out, "{}: structure ok", pt.name()).map_err(out_err)?;
                        let mut row = json!({ "point": pt.name(), "structure": true });
                        if *numeric {
                            let verdict = numeric_check(pt, *precision)?;
                            let line = match &verdict {
                                Some(err) if *err < 1e-9 => format!("numeric ok (max relative error {err:.1e})"),
                                Some(err) => {
                                    ok = false;
                                    format!("numeric MISMATCH (max relative error {err:.1e})")
                                }
                                None => "numeric check skipped (class number > 1)".into(),
                            };
                            writeln!(out, "{}: {line}", pt.name()).map_err(out_err)?;
                            row["numeric_error"] = json!(verdict);
                        }
                        sink.row(&row)?;
                    }
                    Ok(Status::from_ok(ok))
                }
            }
        }
    }
}

/// Compares the stored triple with `E_2, E_4, E_6` summed at the principal
/// point `(-b + sqrt(-d))/2` of discriminant `-d` (class number one only).
///
/// Returns the largest relative error, scaled by the size of each value.
fn numeric_check(pt: &CmPoint, precision: usize) -> Result<Option<f64>, CliError> {
    let d = pt.d();
    if class_data(d).0 != 1 {
        return Ok(None);
    }
    let pi = std::f64::consts::PI;
    let im = (d as f64).sqrt() / 2.0;
    // q = e^{2 pi i tau} is real here: the real part of tau is 0 or -1/2.
    let sign = if d % 2 == 1 { -1.0 } else { 1.0 };
    let q = sign * (-2.0 * pi * im).exp();
    let omega = pt.omega();
    let eval = |k: u32| -> Result<f64, CliError> { Ok(eisenstein_qexp(k, precision)?.eval_f64(q)) };
    let numeric = [eval(2)? - 3.0 / (pi * im), eval(4)?, eval(6)?];
    let mut worst: f64 = 0.0;
    for (i, (x, stored)) in numeric.iter().zip(pt.triple()).enumerate() {
        let expect = stored.to_f64().unwrap_or(f64::NAN) * omega.powi(2 * (i as i32 + 1));
        let scale = x.abs().max(expect.abs()).max(1.0);
        worst = worst.max((x - expect).abs() / scale);
    }
    Ok(Some(worst))
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn main_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { write!(out, "{text}") } else { write!(err, "{text}") };
            return code;
        }
    };
    match run(&cli, out, err) {
        Ok(status) => status.code(),
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            2
        }
    }
}
