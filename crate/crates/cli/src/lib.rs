//! Command implementations behind the `roymax` binary.
//!
//! Every command writes to the supplied sinks instead of the process streams
//! so it can be driven from tests.

pub mod args;

use std::fmt;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use roymax::eigdist::cdf_largest_euler;
use roymax::sampler::{ks_critical_value, sample_largest, write_samples_csv, EmpiricalCdf, RatioModel};
use roymax::*;
use serde::{Deserialize, Serialize};

use crate::args::*;

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "ROYMAX_OUT_DIR";

/// Sample sizes below this give a KS test with almost no power.
pub const MIN_USEFUL_SAMPLES: usize = 100;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Numerical(String),
    Io { path: PathBuf, source: io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Io { .. } => 4,
        }
    }

    fn io(path: impl Into<PathBuf>) -> impl FnOnce(io::Error) -> CliError {
        let path = path.into();
        move |source| CliError::Io { path, source }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(msg) => write!(f, "{msg}"),
            CliError::Numerical(msg) => write!(f, "numerical failure: {msg}"),
            CliError::Io { path, source } => write!(f, "{}: {source}", path.display()),
        }
    }
}

impl std::error::Error for CliError {}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        if e.is_numerical() {
            CliError::Numerical(e.to_string())
        } else {
            CliError::Usage(e.to_string())
        }
    }
}

type CliResult<T = ()> = Result<T, CliError>;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CdfReport {
    pub dims: ProblemDims,
    pub sigma: Vec<f64>,
    pub x: f64,
    pub value: CdfValue,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuantileReport {
    pub dims: ProblemDims,
    pub sigma: Vec<f64>,
    pub quantile: Quantile,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolyReport {
    pub dims: ProblemDims,
    pub polynomial: RationalPoly,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct McReport {
    pub mode: String,
    pub dims: ProblemDims,
    pub sigma: Vec<f64>,
    pub samples: usize,
    pub seed: u64,
    pub level: f64,
    pub ks_distance: f64,
    pub critical_value: f64,
    pub pass: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub warning: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Table1Row {
    pub m: usize,
    pub n: usize,
    pub p: usize,
    pub alpha: f64,
    pub x: f64,
}

/// Runs one parsed command. Diagnostics that are not errors go to `err`.
pub fn run(cli: Cli, out: &mut dyn Write, err: &mut dyn Write) -> CliResult {
    match cli.command {
        Command::Cdf(a) => cmd_cdf(&a, out),
        Command::Quantile(a) => cmd_quantile(&a, out),
        Command::Poly(a) => cmd_poly(&a, out),
        Command::PlotData(a) => cmd_plot_data(&a, out),
        Command::McVerify(a) => cmd_mc_verify(&a, out, err),
        Command::RoyTest(a) => cmd_roy_test(&a, out),
        Command::Table1(a) => cmd_table1(&a, out),
    }
}

fn problem_dims(a: &DimsArgs) -> CliResult<ProblemDims> {
    let beta = DivisionAlgebra::from_beta(a.beta)?;
    Ok(ProblemDims::new(a.m, a.n, a.p, beta)?)
}

fn parse_list(text: &str, what: &str) -> CliResult<Vec<f64>> {
    text.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| CliError::Usage(format!("cannot parse {what} entry `{s}`")))
        })
        .collect()
}

/// `identity` or comma-separated eigenvalues of length m.
pub fn parse_sigma(text: &str, m: usize) -> CliResult<ScaleSpectrum> {
    let scale = if text.trim().eq_ignore_ascii_case("identity") {
        ScaleSpectrum::identity(m)
    } else {
        ScaleSpectrum::new(parse_list(text, "sigma")?)?
    };
    if scale.dim() != m {
        return Err(CliError::Usage(format!(
            "sigma has {} eigenvalues but m = {m}",
            scale.dim()
        )));
    }
    Ok(scale)
}

fn policy(s: &SeriesArgs) -> CliResult<TruncationPolicy> {
    if !(s.tolerance >= 0.0) {
        return Err(CliError::Usage("tolerance must be non-negative".into()));
    }
    let mut p = TruncationPolicy::new(s.truncation);
    if s.tolerance > 0.0 {
        p = p.with_tail_tolerance(s.tolerance);
    }
    Ok(p)
}

fn write_json<T: Serialize>(out: &mut dyn Write, value: &T) -> CliResult {
    let text = serde_json::to_string_pretty(value).map_err(|e| CliError::Numerical(e.to_string()))?;
    writeln!(out, "{text}").map_err(CliError::io("<stdout>"))
}

macro_rules! emit {
    ($out:expr, $($arg:tt)*) => {
        writeln!($out, $($arg)*).map_err(CliError::io("<stdout>"))
    };
}

fn evaluate(route: RouteArg, x: f64, dims: &ProblemDims, scale: &ScaleSpectrum, trunc: &TruncationPolicy) -> CliResult<CdfValue> {
    let value = match route {
        RouteArg::Auto => cdf_largest(x, dims, scale, trunc),
        RouteArg::Theorem => cdf_largest_theorem(x, dims, scale, trunc),
        RouteArg::Positive => cdf_largest_positive(x, dims, scale, trunc),
        RouteArg::Finite => cdf_largest_finite(x, dims, scale),
        RouteArg::Euler => cdf_largest_euler(x, dims, scale, trunc),
        RouteArg::Identity => {
            if !scale.is_identity() {
                return Err(CliError::Usage("the identity route requires --sigma identity".into()));
            }
            cdf_largest_identity(x, dims, trunc)
        }
    };
    Ok(value?)
}

pub fn cmd_cdf(a: &CdfArgs, out: &mut dyn Write) -> CliResult {
    let dims = problem_dims(&a.dims)?;
    let scale = parse_sigma(&a.series.sigma, dims.m)?;
    if !(a.x > 0.0 && a.x.is_finite()) {
        return Err(CliError::Usage(format!("x must be positive, got {}", a.x)));
    }
    let value = evaluate(a.route, a.x, &dims, &scale, &policy(&a.series)?)?;
    match a.format {
        Format::Human => {
            emit!(out, "Pr(q1 < {}) = {:.10}", a.x, value.probability)?;
            emit!(
                out,
                "route {}, degree {}, last increment {:.3e}{}",
                value.route.name(),
                value.series.degree_used,
                value.series.last_increment,
                if value.series.converged { "" } else { ", not converged" }
            )?;
            if value.out_of_range {
                emit!(out, "warning: raw value {} lies outside [0, 1]", value.raw)?;
            }
            Ok(())
        }
        Format::Csv => {
            emit!(out, "x,cdf")?;
            emit!(out, "{:.16e},{:.16e}", a.x, value.probability)
        }
        Format::Json => write_json(
            out,
            &CdfReport { dims, sigma: scale.values().to_vec(), x: a.x, value },
        ),
    }
}

pub fn cmd_quantile(a: &QuantileArgs, out: &mut dyn Write) -> CliResult {
    if !(a.alpha > 0.0 && a.alpha < 1.0) {
        return Err(CliError::Usage(format!("alpha must lie in (0, 1), got {}", a.alpha)));
    }
    let dims = problem_dims(&a.dims)?;
    let scale = parse_sigma(&a.series.sigma, dims.m)?;
    let q = quantile(a.alpha, &dims, &scale, &policy(&a.series)?)?;
    match a.format {
        Format::Human => emit!(
            out,
            "x = {:.6} for alpha = {} (|F(x) - alpha| = {:.1e}, route {})",
            q.x,
            q.alpha,
            q.achieved_error,
            q.route.name()
        ),
        Format::Csv => {
            emit!(out, "alpha,x")?;
            emit!(out, "{:.16e},{:.16e}", q.alpha, q.x)
        }
        Format::Json => write_json(out, &QuantileReport { dims, sigma: scale.values().to_vec(), quantile: q }),
    }
}

pub fn cmd_poly(a: &PolyArgs, out: &mut dyn Write) -> CliResult {
    let dims = problem_dims(&a.dims)?;
    let poly = finite_series_polynomial(&dims)?;
    match a.format {
        Format::Human => {
            emit!(out, "F(x) = constant * t^leading_power * sum_j c_j t^j, t = x/(1+x)")?;
            write!(out, "{}", poly.to_text()).map_err(CliError::io("<stdout>"))
        }
        Format::Csv => {
            emit!(out, "power,coefficient")?;
            for (j, c) in poly.coefficients.iter().enumerate() {
                emit!(out, "{j},{}", specialfn::exact::format_rational(c))?;
            }
            Ok(())
        }
        Format::Json => write_json(out, &PolyReport { dims, polynomial: poly }),
    }
}

fn grid(a: &PlotArgs) -> CliResult<Vec<f64>> {
    let points = match &a.grid {
        Some(text) => parse_list(text, "grid")?,
        None => {
            if a.points == 0 {
                return Err(CliError::Usage("points must be positive".into()));
            }
            if a.points == 1 {
                vec![a.from]
            } else {
                if !(a.from < a.to) {
                    return Err(CliError::Usage("grid start must be below its end".into()));
                }
                (0..a.points)
                    .map(|i| a.from + (a.to - a.from) * i as f64 / (a.points - 1) as f64)
                    .collect()
            }
        }
    };
    if points.iter().any(|x| !(*x > 0.0 && x.is_finite())) {
        return Err(CliError::Usage("grid values must be positive".into()));
    }
    if points.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(CliError::Usage("grid values must be strictly increasing".into()));
    }
    Ok(points)
}

/// Output path: explicit, else inside `$ROYMAX_OUT_DIR`, else the working directory.
pub fn default_output(explicit: Option<&Path>, file_name: &str) -> PathBuf {
    match explicit {
        Some(p) => p.to_path_buf(),
        None => std::env::var_os(OUT_DIR_ENV)
            .map(PathBuf::from)
            .unwrap_or_default()
            .join(file_name),
    }
}

pub fn cmd_plot_data(a: &PlotArgs, out: &mut dyn Write) -> CliResult {
    let dims = problem_dims(&a.dims)?;
    let scale = parse_sigma(&a.series.sigma, dims.m)?;
    let xs = grid(a)?;
    let curve = cdf_curve(&xs, &dims, &scale, &policy(&a.series)?)?;

    let name = format!("cdf_m{}_n{}_p{}_beta{}.csv", dims.m, dims.n, dims.p, dims.beta.beta());
    let path = default_output(a.output.as_deref(), &name);
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(CliError::io(dir))?;
    }
    let mut text = String::from("x,cdf\n");
    for (x, v) in &curve {
        text.push_str(&format!("{x:.16e},{:.16e}\n", v.probability));
    }
    std::fs::write(&path, text).map_err(CliError::io(&path))?;
    emit!(out, "wrote {} rows to {}", curve.len(), path.display())
}

pub fn cmd_mc_verify(a: &McArgs, out: &mut dyn Write, err: &mut dyn Write) -> CliResult {
    if a.samples == 0 {
        return Err(CliError::Usage("samples must be positive".into()));
    }
    if !(a.level > 0.0 && a.level < 1.0) {
        return Err(CliError::Usage("level must lie in (0, 1)".into()));
    }
    let dims = problem_dims(&a.dims)?;
    let scale = parse_sigma(&a.sigma, dims.m)?;
    let (model, mode) = match a.mode {
        McMode::FMatrix => (
            RatioModel::FMatrix { dims, scale1: scale.values().to_vec(), scale2: vec![1.0; dims.m] },
            "f-matrix",
        ),
        McMode::MoorePenrose => {
            if !scale.is_identity() {
                return Err(CliError::Usage("moore-penrose mode uses identity scales only".into()));
            }
            if dims.p == dims.m {
                return Err(CliError::Usage("moore-penrose mode needs p > m".into()));
            }
            (
                RatioModel::MoorePenrose { p_dim: dims.p, m: dims.m, n: dims.n, beta: dims.beta },
                "moore-penrose",
            )
        }
    };
    let warning = (a.samples < MIN_USEFUL_SAMPLES).then(|| {
        format!(
            "only {} samples: the KS test has negligible power below {MIN_USEFUL_SAMPLES}",
            a.samples
        )
    });
    if let Some(w) = &warning {
        writeln!(err, "warning: {w}").map_err(CliError::io("<stderr>"))?;
    }

    let samples = sample_largest(&model, a.samples, a.seed)?;
    if let Some(path) = &a.dump {
        write_samples_csv(path, &samples).map_err(CliError::io(path))?;
    }
    let trunc = TruncationPolicy::new(a.truncation);
    let ecdf = EmpiricalCdf::new(samples)?;
    let ks = ecdf.ks_distance(|x| cdf_largest(x, &dims, &scale, &trunc).map(|v| v.probability))?;
    let critical = ks_critical_value(a.samples, a.level);
    let report = McReport {
        mode: mode.into(),
        dims,
        sigma: scale.values().to_vec(),
        samples: a.samples,
        seed: a.seed,
        level: a.level,
        ks_distance: ks,
        critical_value: critical,
        pass: ks < critical,
        warning,
    };
    match a.format {
        Format::Json => write_json(out, &report),
        Format::Csv => {
            emit!(out, "mode,samples,seed,level,ks_distance,critical_value,pass")?;
            emit!(
                out,
                "{},{},{},{},{:.16e},{:.16e},{}",
                report.mode, report.samples, report.seed, report.level, ks, critical, report.pass
            )
        }
        Format::Human => {
            emit!(out, "{} draws ({mode}, seed {})", a.samples, a.seed)?;
            emit!(out, "KS distance {ks:.5}, critical value {critical:.5} at level {}", a.level)?;
            emit!(out, "{}", if report.pass { "PASS" } else { "FAIL" })
        }
    }
}

pub fn cmd_roy_test(a: &RoyArgs, out: &mut dyn Write) -> CliResult {
    if !(a.alpha > 0.0 && a.alpha < 1.0) {
        return Err(CliError::Usage(format!("alpha must lie in (0, 1), got {}", a.alpha)));
    }
    let roots = match (&a.roots, a.observed) {
        (Some(text), _) => parse_list(text, "roots")?,
        (None, Some(x)) => vec![x],
        (None, None) => return Err(CliError::Usage("supply --roots or --observed".into())),
    };
    let report = roy_test(a.groups, a.variables, a.per_group, a.alpha, &roots, &TruncationPolicy::new(a.truncation))?;
    match a.format {
        Format::Json => write_json(out, &report),
        Format::Csv => {
            emit!(out, "m,n,p,alpha,critical_value,observed,proportion,reject")?;
            emit!(
                out,
                "{},{},{},{},{:.16e},{:.16e},{:.16e},{}",
                report.dims.m,
                report.dims.n,
                report.dims.p,
                report.alpha,
                report.critical_value,
                report.observed,
                report.proportion,
                report.reject
            )
        }
        Format::Human => {
            let d = &report.dims;
            emit!(out, "m = {} (variables), n = {} (groups - 1), p = {} (groups * (per group - 1))", d.m, d.n, d.p)?;
            emit!(out, "critical value at {}: {:.4}", report.alpha, report.critical_value)?;
            emit!(out, "observed largest root: {}", report.observed)?;
            if roots.len() > 1 {
                emit!(out, "largest-root proportion: {:.3}", report.proportion)?;
            }
            emit!(out, "decision: {}", if report.reject { "REJECT" } else { "FAIL-TO-REJECT" })
        }
    }
}

/// Percentiles for p = 20, n = 4, m ∈ {5, 15}.
pub fn table1_rows() -> CliResult<Vec<Table1Row>> {
    let alphas = [0.01, 0.05, 0.50, 0.95, 0.99];
    let mut rows = Vec::new();
    for m in [5, 15] {
        let dims = ProblemDims::real(m, 4, 20)?;
        for alpha in alphas {
            let q = quantile(alpha, &dims, &ScaleSpectrum::identity(m), &TruncationPolicy::default())?;
            rows.push(Table1Row { m, n: 4, p: 20, alpha, x: q.x });
        }
    }
    Ok(rows)
}

pub fn cmd_table1(a: &Table1Args, out: &mut dyn Write) -> CliResult {
    let rows = table1_rows()?;
    match a.format {
        Format::Json => write_json(out, &rows),
        Format::Csv => {
            emit!(out, "m,n,p,alpha,x")?;
            for r in &rows {
                emit!(out, "{},{},{},{},{:.16e}", r.m, r.n, r.p, r.alpha, r.x)?;
            }
            Ok(())
        }
        Format::Human => {
            emit!(out, "Percentiles of q1, p = 20, n = 4")?;
            emit!(out, "{:>6}  {:>10}  {:>10}", "alpha", "m = 5", "m = 15")?;
            let half = rows.len() / 2;
            for (left, right) in rows[..half].iter().zip(&rows[half..]) {
                emit!(out, "{:>6}  {:>10.4}  {:>10.4}", left.alpha, left.x, right.x)?;
            }
            Ok(())
        }
    }
}
