//! Command-line front end.

use std::collections::BTreeSet;
use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::bounds::{exponent_report, rho_for_beta, t0_maximizer, Ellipticity, ExponentReport};
use crate::counterexample::{build_v, divergence_scan, RadialProfile};
use crate::decay::{decay_counts, fit_decay, theoretical_ratio};
use crate::error::{Error, Result};
use crate::grid::{GridFunction, GridSpec};
use crate::lambert::{lambert_w0, lambert_wm1, ratio_a, wm1_envelope_bounds, wm1_of_neg_exp, BranchValue};
use crate::report::{Cell, Format, Provenance, Report, Table};
use crate::theta::{fit_tail_exponent, tail_distribution, theta_field, theta_field_bisection};

const BOUNDS_COLUMNS: &[&str] = &[
    "n",
    "ratio",
    "k",
    "c",
    "c_star",
    "c_star_index",
    "gamma0",
    "epsilon_interior",
    "gamma_star",
    "f_at_gamma_star",
    "closed_form_lower",
    "tau_n",
    "refined_lower",
    "abstract_lower",
    "epsilon_upper",
    "ass_conjecture",
    "epsilon_global",
    "stationarity_residual",
    "normalized_refined",
];

const BOUNDS_HELP: &str = "CSV columns: n, ratio, k, c, c_star, c_star_index, gamma0, epsilon_interior, \
gamma_star, f_at_gamma_star, closed_form_lower, tau_n, refined_lower, abstract_lower, epsilon_upper, \
ass_conjecture, epsilon_global, stationarity_residual, normalized_refined (= refined_lower * ratio^(n-k)).";

#[derive(Debug, Parser)]
#[command(
    name = "w2eps",
    version,
    about = "Hessian integrability exponent bounds, Lambert W, and a discrete convex-envelope lab",
    after_help = "Exit codes: 0 success, 2 invalid input or I/O failure, 3 degenerate data.\n\
A JSON --config file may supply any flag by its long name; flags given on the command line win."
)]
pub struct Cli {
    /// Output file; stdout when omitted. CSV output to a file also writes <file>.meta.json.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Omit the timestamp so identical runs give identical bytes.
    #[arg(long, global = true)]
    pub reproducible: bool,
    /// Worker threads for grid computations and sweeps.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// JSON object of flag values, keyed by long flag name.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Every exponent bound for one parameter set.
    #[command(after_help = BOUNDS_HELP)]
    Bounds(BoundsArgs),
    /// Bounds over a range of dimensions and ratios.
    #[command(after_help = BOUNDS_HELP)]
    Sweep(SweepArgs),
    /// Real Lambert W branches, or the lower-branch envelope bounds with --u.
    #[command(after_help = "CSV columns: z, branch, value, residual, derivative.\n\
With --u: u, lower, w_minus_one, upper, ratio_a.")]
    Lambertw(LambertArgs),
    /// Opening field of a sampled function and its tail distribution.
    #[command(after_help = "CSV columns: t, measure, fitted_exponent, fit_r_squared.")]
    Theta(ThetaArgs),
    /// Non-contact measure at geometrically growing openings.
    #[command(after_help = "CSV columns: j, opening, points, measure, tolerance, empirical_ratio, theoretical_ratio.")]
    Decay(DecayArgs),
    /// Closed-form divergence scan for the radial counterexample.
    #[command(after_help = "CSV columns: m, radius, alpha, balls, lower_bound.")]
    Counterexample(CounterexampleArgs),
    /// Maximizer x0 and value t0 as functions of the ratio, or the ratio for a target t0 with --beta.
    #[command(after_help = "CSV columns: n, ratio, beta, x0, t0, residual.")]
    T0(T0Args),
}

#[derive(Debug, Args, Serialize)]
pub struct BoundsArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub ratio: f64,
    #[arg(long, default_value_t = 1)]
    pub k: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct SweepArgs {
    /// Dimensions as `a:b` (inclusive) or a single value.
    #[arg(long, default_value = "3:20")]
    pub n_range: String,
    /// Comma-separated ellipticity ratios.
    #[arg(long, value_delimiter = ',', default_value = "2")]
    pub ratios: Vec<f64>,
    /// `one`, `below-half` (largest k < n/2), or a fixed integer.
    #[arg(long, default_value = "one")]
    pub k_rule: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BranchChoice {
    #[value(alias = "0")]
    Principal,
    #[value(alias = "-1")]
    MinusOne,
    Both,
}

#[derive(Debug, Args, Serialize)]
pub struct LambertArgs {
    /// Comma-separated arguments.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub z: Vec<f64>,
    #[arg(long, value_enum, default_value_t = BranchChoice::Both, allow_hyphen_values = true)]
    pub branch: BranchChoice,
    /// Comma-separated u >= 0 for the lower-branch envelope bounds.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub u: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ThetaMethod {
    Lp,
    Bisection,
}

#[derive(Debug, Args, Serialize)]
pub struct ThetaArgs {
    /// GridFunction JSON header.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, default_value_t = 1e6)]
    pub a_max: f64,
    #[arg(long, default_value_t = 0.5)]
    pub restrict_radius: f64,
    #[arg(long, value_enum, default_value_t = ThetaMethod::Lp)]
    pub method: ThetaMethod,
    #[arg(long, default_value_t = 1e-6)]
    pub bisect_tol: f64,
    #[arg(long, default_value_t = 1e-12)]
    pub contact_tol: f64,
    /// Number of log-spaced thresholds t in the tail table.
    #[arg(long, default_value_t = 40)]
    pub t_points: usize,
    /// Also write the Θ field as a GridFunction JSON file.
    #[arg(long)]
    pub field_output: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct DecayArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, default_value_t = 1.0)]
    pub delta: f64,
    #[arg(long, default_value_t = 8)]
    pub j_max: usize,
    /// Ellipticity dimension; defaults to the grid dimension.
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub ratio: f64,
    #[arg(long, default_value_t = 1)]
    pub k: usize,
    /// Contact tolerance; defaults to 10 h² (opening + 1).
    #[arg(long)]
    pub tol: Option<f64>,
}

#[derive(Debug, Args, Serialize)]
pub struct CounterexampleArgs {
    #[arg(long, default_value_t = 3)]
    pub n: usize,
    #[arg(long)]
    pub ratio: f64,
    #[arg(long)]
    pub eps: f64,
    /// Exponents m of R = 2^-m as `a:b` (inclusive).
    #[arg(long, default_value = "3:10")]
    pub mrange: String,
    /// Also sample v on a grid and write it as a GridFunction JSON file.
    #[arg(long)]
    pub emit_grid: Option<PathBuf>,
    #[arg(long, default_value_t = 4)]
    pub grid_m: u32,
    #[arg(long, default_value_t = 129)]
    pub grid_points: usize,
    #[arg(long, default_value_t = 2)]
    pub grid_dim: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct T0Args {
    #[arg(long)]
    pub n: usize,
    /// Comma-separated ratios > 1.
    #[arg(long, value_delimiter = ',')]
    pub ratio: Vec<f64>,
    /// Comma-separated beta in (1, n]; reports the ratio with t0 = n/beta.
    #[arg(long, value_delimiter = ',')]
    pub beta: Vec<f64>,
}

/// What a command produced and the exit code it wants.
pub struct Outcome {
    pub report: Report,
    pub exit_code: i32,
}

fn parse_range(s: &str) -> Result<(u32, u32)> {
    let bad = || Error::Domain(format!("expected a range `a:b` or a single integer; got `{s}`"));
    let (a, b) = match s.split_once(':') {
        Some((a, b)) => (a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?),
        None => {
            let v = s.trim().parse().map_err(|_| bad())?;
            (v, v)
        }
    };
    if a > b {
        return Err(bad());
    }
    Ok((a, b))
}

fn bounds_row(r: &ExponentReport) -> Vec<Cell> {
    let normalized = r.refined_lower.map(|v| v * r.ratio.powi(r.n as i32 - r.k as i32));
    vec![
        r.n.into(),
        r.ratio.into(),
        r.k.into(),
        r.c.into(),
        r.c_star.into(),
        r.c_star_index.into(),
        r.gamma0.into(),
        r.epsilon_interior.into(),
        r.gamma_star.into(),
        r.f_at_gamma_star.into(),
        r.closed_form_lower.into(),
        r.tau_n.into(),
        r.refined_lower.into(),
        r.abstract_lower.into(),
        r.epsilon_upper.into(),
        r.ass_conjecture.into(),
        r.epsilon_global.into(),
        r.stationarity_residual.into(),
        normalized.into(),
    ]
}

fn params<T: Serialize>(args: &T) -> Value {
    serde_json::to_value(args).unwrap_or(Value::Null)
}

fn outcome(table: Table, extra: Map<String, Value>, provenance: Provenance) -> Outcome {
    Outcome { report: Report { table, extra, provenance }, exit_code: 0 }
}

fn cmd_bounds(a: &BoundsArgs, reproducible: bool) -> Result<Outcome> {
    let rep = exponent_report(&Ellipticity::new(a.n, a.ratio, a.k)?)?;
    let mut table = Table::new(BOUNDS_COLUMNS);
    table.push(bounds_row(&rep));
    let mut prov = Provenance::new("bounds", params(a), reproducible);
    prov.warnings = rep.warnings.clone();
    let mut extra = Map::new();
    extra.insert("report".into(), serde_json::to_value(&rep)?);
    Ok(outcome(table, extra, prov))
}

fn k_for(rule: &str, n: usize) -> Result<usize> {
    match rule {
        "one" => Ok(1),
        "below-half" => Ok((n - 1) / 2),
        other => other.parse().map_err(|_| Error::Domain(format!("unknown k rule `{other}`"))),
    }
}

fn cmd_sweep(a: &SweepArgs, reproducible: bool) -> Result<Outcome> {
    let (lo, hi) = parse_range(&a.n_range)?;
    if a.ratios.is_empty() {
        return Err(Error::Domain("empty ratio list".into()));
    }
    let mut cases = Vec::new();
    for n in lo..=hi {
        for &r in &a.ratios {
            let n = n as usize;
            cases.push(Ellipticity::new(n, r, k_for(&a.k_rule, n)?)?);
        }
    }
    let reports: Vec<ExponentReport> = cases.par_iter().map(exponent_report).collect::<Result<_>>()?;
    let mut table = Table::new(BOUNDS_COLUMNS);
    let mut warnings = BTreeSet::new();
    for r in &reports {
        table.push(bounds_row(r));
        for w in &r.warnings {
            warnings.insert(format!("n={} ratio={} k={}: {w}", r.n, r.ratio, r.k));
        }
    }
    let mut prov = Provenance::new("sweep", params(a), reproducible);
    prov.warnings = warnings.into_iter().collect();
    let mut extra = Map::new();
    extra.insert("reports".into(), serde_json::to_value(&reports)?);
    Ok(outcome(table, extra, prov))
}

fn cmd_lambertw(a: &LambertArgs, reproducible: bool) -> Result<Outcome> {
    let prov = Provenance::new("lambertw", params(a), reproducible);
    if !a.u.is_empty() {
        let mut table = Table::new(&["u", "lower", "w_minus_one", "upper", "ratio_a"]);
        for &u in &a.u {
            let (lo, hi) = wm1_envelope_bounds(u)?;
            table.push(vec![u.into(), lo.into(), wm1_of_neg_exp(u + 1.0)?.into(), hi.into(), ratio_a(u)?.into()]);
        }
        return Ok(outcome(table, Map::new(), prov));
    }
    if a.z.is_empty() {
        return Err(Error::Domain("give --z or --u".into()));
    }
    let mut table = Table::new(&["z", "branch", "value", "residual", "derivative"]);
    let mut push = |z: f64, b: BranchValue, name: &str| {
        table.push(vec![z.into(), name.into(), b.value.into(), b.residual.into(), b.derivative(z).into()]);
    };
    for &z in &a.z {
        if matches!(a.branch, BranchChoice::Principal | BranchChoice::Both) {
            push(z, lambert_w0(z)?, "principal");
        }
        let wants_lower = match a.branch {
            BranchChoice::MinusOne => true,
            BranchChoice::Both => z < 0.0,
            BranchChoice::Principal => false,
        };
        if wants_lower {
            push(z, lambert_wm1(z)?, "minus_one");
        }
    }
    Ok(outcome(table, Map::new(), prov))
}

fn cmd_t0(a: &T0Args, reproducible: bool) -> Result<Outcome> {
    if a.ratio.is_empty() && a.beta.is_empty() {
        return Err(Error::Domain("give --ratio or --beta".into()));
    }
    let mut table = Table::new(&["n", "ratio", "beta", "x0", "t0", "residual"]);
    let row = |ratio: f64, beta: Option<f64>| -> Result<Vec<Cell>> {
        let p = t0_maximizer(a.n, ratio)?;
        let residual = (p.x0.ln() - (ratio - 2.0 + p.x0) / p.x0).abs();
        Ok(vec![a.n.into(), ratio.into(), beta.into(), p.x0.into(), p.t0.into(), residual.into()])
    };
    for &r in &a.ratio {
        table.push(row(r, None)?);
    }
    for &b in &a.beta {
        table.push(row(rho_for_beta(a.n, b)?, Some(b))?);
    }
    Ok(outcome(table, Map::new(), Provenance::new("t0", params(a), reproducible)))
}

fn cmd_theta(a: &ThetaArgs, reproducible: bool) -> Result<Outcome> {
    let v = GridFunction::load(&a.input)?;
    let field = match a.method {
        ThetaMethod::Lp => theta_field(&v, a.a_max)?,
        ThetaMethod::Bisection => theta_field_bisection(&v, a.a_max, a.bisect_tol, a.contact_tol)?,
    };
    if let Some(path) = &a.field_output {
        GridFunction { spec: v.spec.clone(), values: field.theta.clone() }.save_inline(path)?;
    }
    let spec = &v.spec;
    let in_ball: Vec<f64> = (0..spec.len())
        .filter(|&i| spec.inside(i) && spec.within(a.restrict_radius, i) && field.converged[i] && field.theta[i] > 0.0)
        .map(|i| field.theta[i])
        .collect();
    let t_grid: Vec<f64> = match (
        in_ball.iter().cloned().fold(f64::INFINITY, f64::min),
        in_ball.iter().cloned().fold(0.0, f64::max),
    ) {
        (lo, hi) if lo.is_finite() && hi > lo && a.t_points >= 2 => {
            let mut t: Vec<f64> =
                (0..a.t_points - 1).map(|i| lo * (hi / lo).powf(i as f64 / (a.t_points - 1) as f64)).collect();
            t.push(hi);
            t
        }
        (lo, _) if lo.is_finite() => vec![lo],
        _ => Vec::new(),
    };
    let tail = tail_distribution(&field, spec, a.restrict_radius, &t_grid)?;
    let mut prov = Provenance::new("theta", params(a), reproducible);
    prov.input_sha256 = Some(v.content_hash());
    let unconverged = spec.domain_points().into_iter().filter(|&i| !field.converged[i]).count();
    let boundary = field.boundary.iter().filter(|&&b| b).count();
    let mut extra = Map::new();
    extra.insert("unconverged_points".into(), json!(unconverged));
    extra.insert("boundary_points".into(), json!(boundary));
    let mut exit_code = 0;
    let (exponent, r2) = match fit_tail_exponent(&field, spec, a.restrict_radius) {
        Ok(fit) => {
            extra.insert("fit".into(), serde_json::to_value(&fit)?);
            (Some(fit.exponent), Some(fit.r_squared))
        }
        Err(Error::DegenerateData(msg)) => {
            prov.warnings.push(format!("tail fit skipped: {msg}"));
            exit_code = 3;
            (None, None)
        }
        Err(e) => return Err(e),
    };
    if unconverged > 0 {
        prov.warnings.push(format!("{unconverged} points exceed a_max = {} and count as Θ > t for every t", a.a_max));
    }
    let mut table = Table::new(&["t", "measure", "fitted_exponent", "fit_r_squared"]);
    for (t, m) in tail {
        table.push(vec![t.into(), m.into(), exponent.into(), r2.into()]);
    }
    Ok(Outcome { report: Report { table, extra, provenance: prov }, exit_code })
}

fn cmd_decay(a: &DecayArgs, reproducible: bool) -> Result<Outcome> {
    let v = GridFunction::load(&a.input)?;
    let e = Ellipticity::new(a.n.unwrap_or(v.spec.dim), a.ratio, a.k)?;
    let counts = decay_counts(&v, a.delta, a.j_max, a.tol)?;
    let theoretical = theoretical_ratio(&e, a.delta)?;
    let mut prov = Provenance::new("decay", params(a), reproducible);
    prov.input_sha256 = Some(v.content_hash());
    let mut extra = Map::new();
    extra.insert("theoretical_ratio".into(), json!(theoretical));
    let mut exit_code = 0;
    let empirical = match fit_decay(&counts) {
        Ok((ratio, r2)) => {
            extra.insert("empirical_ratio".into(), json!(ratio));
            extra.insert("fit_r_squared".into(), json!(r2));
            Some(ratio)
        }
        Err(Error::DegenerateData(msg)) => {
            prov.warnings.push(format!("no decay rate fitted: {msg}"));
            exit_code = 3;
            None
        }
        Err(err) => return Err(err),
    };
    extra.insert("counts".into(), serde_json::to_value(&counts)?);
    let mut table = Table::new(&["j", "opening", "points", "measure", "tolerance", "empirical_ratio", "theoretical_ratio"]);
    for c in &counts {
        table.push(vec![
            c.j.into(),
            c.opening.into(),
            c.points.into(),
            c.measure.into(),
            c.tolerance.into(),
            empirical.into(),
            theoretical.into(),
        ]);
    }
    Ok(Outcome { report: Report { table, extra, provenance: prov }, exit_code })
}

fn cmd_counterexample(a: &CounterexampleArgs, reproducible: bool) -> Result<Outcome> {
    let (lo, hi) = parse_range(&a.mrange)?;
    let ms: Vec<u32> = (lo..=hi).collect();
    let scan = divergence_scan(a.n, a.ratio, a.eps, &ms)?;
    let mut prov = Provenance::new("counterexample", params(a), reproducible);
    if let Some(note) = &scan.note {
        prov.warnings.push(note.clone());
    }
    let mut table = Table::new(&["m", "radius", "alpha", "balls", "lower_bound"]);
    for i in 0..scan.m_values.len() {
        table.push(vec![
            scan.m_values[i].into(),
            scan.r_sequence[i].into(),
            scan.alpha.into(),
            scan.ball_counts[i].into(),
            scan.lower_bounds[i].into(),
        ]);
    }
    let mut extra = Map::new();
    extra.insert("scan".into(), serde_json::to_value(&scan)?);
    if let Some(path) = &a.emit_grid {
        let radius = 2f64.powi(-(a.grid_m as i32));
        let p = RadialProfile::new(a.n, scan.alpha, radius, 1.0, a.ratio)?;
        let spec = GridSpec::cube(a.grid_dim, a.grid_points, 1.0)?;
        let built = build_v(&p, &spec)?;
        built.grid.save_inline(path)?;
        if built.sup_abs > 1.0 {
            prov.warnings.push(format!("sampled sup |v| = {} exceeds 1", built.sup_abs));
        }
        extra.insert("grid_sup_abs".into(), json!(built.sup_abs));
        extra.insert("grid_truncation_radius".into(), json!(built.truncation_radius));
        prov.input_sha256 = Some(built.grid.content_hash());
    }
    Ok(outcome(table, extra, prov))
}

fn dispatch(cli: &Cli) -> Result<Outcome> {
    let r = cli.reproducible;
    match &cli.command {
        Command::Bounds(a) => cmd_bounds(a, r),
        Command::Sweep(a) => cmd_sweep(a, r),
        Command::Lambertw(a) => cmd_lambertw(a, r),
        Command::Theta(a) => cmd_theta(a, r),
        Command::Decay(a) => cmd_decay(a, r),
        Command::Counterexample(a) => cmd_counterexample(a, r),
        Command::T0(a) => cmd_t0(a, r),
    }
}

fn config_path(args: &[OsString]) -> Option<PathBuf> {
    let mut it = args.iter();
    while let Some(a) = it.next() {
        let s = a.to_string_lossy();
        if s == "--config" {
            return it.next().map(PathBuf::from);
        }
        if let Some(rest) = s.strip_prefix("--config=") {
            return Some(PathBuf::from(rest));
        }
    }
    None
}

/// Append `--key value` for config keys not already given as flags.
fn merge_config(args: Vec<OsString>) -> Result<Vec<OsString>> {
    let Some(path) = config_path(&args) else { return Ok(args) };
    let text = std::fs::read_to_string(&path)?;
    let Value::Object(cfg) = serde_json::from_str::<Value>(&text)? else {
        return Err(Error::Domain("config file must hold a JSON object".into()));
    };
    let cmd = Cli::command();
    let sub_names: Vec<String> = cmd.get_subcommands().map(|s| s.get_name().to_string()).collect();
    let sub = args.iter().skip(1).map(|a| a.to_string_lossy().to_string()).find(|a| sub_names.contains(a));
    let given: BTreeSet<String> = args
        .iter()
        .filter_map(|a| a.to_str())
        .filter_map(|a| a.strip_prefix("--"))
        .map(|a| a.split('=').next().unwrap_or(a).to_string())
        .collect();
    let sub_cmd = sub.as_ref().and_then(|n| cmd.find_subcommand(n));
    let mut out = args.clone();
    for (key, value) in cfg {
        let long = key.replace('_', "-");
        if long == "config" {
            return Err(Error::Domain("config files cannot name another config".into()));
        }
        let arg = sub_cmd
            .and_then(|s| s.get_arguments().find(|a| a.get_long() == Some(long.as_str())))
            .or_else(|| cmd.get_arguments().find(|a| a.get_long() == Some(long.as_str())));
        let Some(arg) = arg else {
            return Err(Error::Domain(format!("unknown config key `{key}`")));
        };
        if given.contains(&long) {
            continue;
        }
        let takes_value = arg.get_action().takes_values();
        match value {
            Value::Bool(true) if !takes_value => out.push(format!("--{long}").into()),
            Value::Bool(false) if !takes_value => {}
            Value::Array(items) => {
                let joined: Vec<String> = items.iter().map(scalar_text).collect::<Result<_>>()?;
                out.push(format!("--{long}={}", joined.join(",")).into());
            }
            other => out.push(format!("--{long}={}", scalar_text(&other)?).into()),
        }
    }
    Ok(out)
}

fn scalar_text(v: &Value) -> Result<String> {
    match v {
        Value::String(s) => Ok(s.clone()),
        Value::Number(n) => Ok(n.to_string()),
        Value::Bool(b) => Ok(b.to_string()),
        other => Err(Error::Domain(format!("unsupported config value {other}"))),
    }
}

fn exit_code_for(e: &Error) -> i32 {
    match e {
        Error::DegenerateData(_) => 3,
        _ => 2,
    }
}

/// Run the CLI with explicit arguments and streams; returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let args = match merge_config(args) {
        Ok(a) => a,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return exit_code_for(&e);
        }
    };
    let cli = match Cli::try_parse_from(&args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let rendered = e.render().to_string();
            let _ = if e.use_stderr() { write!(err, "{rendered}") } else { write!(out, "{rendered}") };
            return code;
        }
    };
    if let Some(t) = cli.threads {
        // the global pool can only be set once per process
        let _ = rayon::ThreadPoolBuilder::new().num_threads(t.max(1)).build_global();
    }
    match dispatch(&cli) {
        Ok(o) => {
            for w in &o.report.provenance.warnings {
                let _ = writeln!(err, "warning: {w}");
            }
            if let Err(e) = o.report.write(cli.format, cli.output.as_deref(), out) {
                let _ = writeln!(err, "error: {e}");
                return exit_code_for(&e);
            }
            o.exit_code
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code_for(&e)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_capture(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = run(args.iter().map(|s| s.to_string()), &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn bounds_row_and_errors() {
        let (code, out, _) = run_capture(&["w2eps", "bounds", "--n", "3", "--ratio", "2", "--k", "1"]);
        assert_eq!(code, 0);
        let mut lines = out.lines();
        assert_eq!(lines.next().unwrap().split(',').count(), BOUNDS_COLUMNS.len());
        let row: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(row[14].parse::<f64>().unwrap(), 0.6);
        let (code, _, err) = run_capture(&["w2eps", "bounds", "--n", "3", "--ratio", "2", "--k", "3"]);
        assert_eq!(code, 2);
        assert!(err.contains("k must satisfy"));
    }

    #[test]
    fn ranges() {
        assert_eq!(parse_range("3:10").unwrap(), (3, 10));
        assert_eq!(parse_range("4").unwrap(), (4, 4));
        assert!(parse_range("5:3").is_err());
        assert!(parse_range("x").is_err());
    }

    #[test]
    fn negative_lambert_arguments() {
        let (code, out, _) = run_capture(&["w2eps", "lambertw", "--z", "-0.1", "--branch", "-1"]);
        assert_eq!(code, 0, "{out}");
        assert!(out.contains("minus_one"));
    }
}
