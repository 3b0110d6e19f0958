//! Command-line driver. [`run`] parses `argv`, writes the primary report to
//! stdout (or `--out`), diagnostics to stderr, and returns the exit code:
//! 0 success or certified, 1 inconclusive / residual violation / no angle,
//! 2 invalid input or usage.

use std::fmt::Write as _;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::certify::{
    certify_dimension, certify_fkm, certify_product, homogeneous_lists, sweep_fkm, sweep_products,
    to_csv, Certificate, Verdict,
};
use crate::clifford::{build_system, verify_relations, CliffordSystem};
use crate::error::{invalid, Error, Result};
use crate::foliation::{
    identity_report, sample_level_point_with, sample_minimal_point, sample_regular_point,
    FoliationParams, IdentityReport, Tolerances,
};
use crate::frames::{alpha_sq, build_frame, det_profile, shape_operators, ProfilePoint};
use crate::lawlor::{vanishing_angle, Profile, TabulatedProfile, VanishingAngleQuery};
use crate::radius::{geodesic_scan, normal_radius};
use crate::rng;

#[derive(Parser, Debug)]
#[command(
    name = "fkm-cone",
    version,
    about = "Isoparametric cones in Simons cones: construction, verification, certificates"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Emit the Clifford system for (m, k) as JSON
    Construct(SystemArgs),
    /// Check the foliation identities at sampled points
    Verify(VerifyArgs),
    /// Curvature bound α² and the determinant profile on the minimal leaf
    Curvature(CurvatureArgs),
    /// Lawlor vanishing angle
    Vanishing(VanishingArgs),
    /// Normal radius of the cone, closed form and geodesic oracle
    Radius(RadiusArgs),
    /// Certificate for one FKM cone, product cone, or product dimension
    Certify(CertifyArgs),
    /// Certificate table over parameter ranges
    Sweep(SweepArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum ProfileArg {
    BoundF,
    Limit,
    Numeric,
}

#[derive(Args, Debug)]
struct Output {
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Write the report here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SystemArgs {
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    k: Option<usize>,
    /// Clifford system JSON produced by `construct`
    #[arg(long, conflicts_with_all = ["m", "k"])]
    system: Option<PathBuf>,
    #[command(flatten)]
    output: Output,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[command(flatten)]
    sys: SystemArgs,
    #[arg(long, default_value_t = 100)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Tolerance for the gradient and Laplacian identities
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    /// Sample at this level instead of random regular levels
    #[arg(long)]
    level: Option<f64>,
}

#[derive(Args, Debug)]
struct CurvatureArgs {
    #[command(flatten)]
    sys: SystemArgs,
    #[arg(long, default_value_t = 4)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Allowed deviation of the α² estimate from 6(n-1)
    #[arg(long, default_value_t = 1e-4)]
    tol: f64,
    /// Largest t of the profile grid (default: 1/α)
    #[arg(long)]
    tmax: Option<f64>,
    /// Number of profile intervals
    #[arg(long, default_value_t = 32)]
    steps: usize,
}

#[derive(Args, Debug)]
struct VanishingArgs {
    /// Cone dimension
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long)]
    alpha2: Option<f64>,
    #[arg(long, value_enum, default_value_t = ProfileArg::BoundF)]
    profile: ProfileArg,
    /// System whose minimal leaf supplies the numeric profile
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long, conflicts_with_all = ["m", "k"])]
    system: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    output: Output,
}

#[derive(Args, Debug)]
struct RadiusArgs {
    #[arg(long)]
    m: Option<usize>,
    /// Sphere dimension; closed form only
    #[arg(long, conflicts_with_all = ["k", "system"])]
    n: Option<usize>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long, conflicts_with_all = ["m", "k"])]
    system: Option<PathBuf>,
    /// Base points for the geodesic oracle
    #[arg(long, default_value_t = 1)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Allowed oracle deviation from the closed form
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    #[command(flatten)]
    output: Output,
}

#[derive(Args, Debug)]
struct CertifyArgs {
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    k: Option<usize>,
    /// Product factors n_1,n_2,...
    #[arg(long, value_delimiter = ',', conflicts_with_all = ["m", "k", "dim"])]
    factors: Option<Vec<usize>>,
    /// Certify every product cone of this dimension
    #[arg(long, conflicts_with_all = ["m", "k"])]
    dim: Option<usize>,
    #[command(flatten)]
    output: Output,
}

#[derive(Args, Debug)]
struct SweepArgs {
    /// Range a..b (inclusive) or a single value
    #[arg(long)]
    m: Option<String>,
    #[arg(long)]
    k: Option<String>,
    /// Homogeneous product cones with dimension in this range
    #[arg(long, conflicts_with_all = ["m", "k"])]
    dim: Option<String>,
    #[command(flatten)]
    output: Output,
}

fn parse_range(s: &str) -> Result<std::ops::RangeInclusive<usize>> {
    let num = |t: &str| {
        t.trim()
            .parse::<usize>()
            .map_err(|_| invalid(format!("bad range `{s}`")))
    };
    match s.split_once("..") {
        Some((a, b)) => Ok(num(a)?..=num(b.trim_start_matches('='))?),
        None => {
            let v = num(s)?;
            Ok(v..=v)
        }
    }
}

fn load_system(
    m: Option<usize>,
    k: Option<usize>,
    path: Option<&PathBuf>,
) -> Result<CliffordSystem> {
    let sys = match (path, m, k) {
        (Some(p), _, _) => CliffordSystem::from_json(&std::fs::read_to_string(p)?)?,
        (None, Some(m), Some(k)) => build_system(m, k)?,
        _ => return Err(invalid("need --m and --k, or --system")),
    };
    let rel = verify_relations(&sys);
    if !rel.ok {
        return Err(invalid(format!(
            "system fails the Clifford relations: {:?}",
            rel.first_failure
        )));
    }
    Ok(sys)
}

/// Flattens a JSON object into `key: value` lines.
fn to_text(v: &Value) -> String {
    fn walk(prefix: &str, v: &Value, out: &mut String) {
        match v {
            Value::Object(map) => {
                for (k, v) in map {
                    let key = if prefix.is_empty() {
                        k.clone()
                    } else {
                        format!("{prefix}.{k}")
                    };
                    walk(&key, v, out);
                }
            }
            Value::Null => {
                let _ = writeln!(out, "{prefix}: -");
            }
            Value::String(s) => {
                let _ = writeln!(out, "{prefix}: {s}");
            }
            other => {
                let _ = writeln!(out, "{prefix}: {other}");
            }
        }
    }
    let mut s = String::new();
    walk("", v, &mut s);
    s
}

/// One header row and one value row of the flattened scalar fields.
fn to_flat_csv(v: &Value) -> String {
    let text = to_text(v);
    let (keys, vals): (Vec<&str>, Vec<&str>) = text
        .lines()
        .filter_map(|l| l.split_once(": "))
        .filter(|(_, v)| !v.starts_with('['))
        .map(|(k, v)| (k, if v == "-" { "" } else { v }))
        .unzip();
    format!("{}\n{}\n", keys.join(","), vals.join(","))
}

fn render<T: Serialize>(v: &T, format: Format) -> Result<String> {
    let value = serde_json::to_value(v)?;
    Ok(match format {
        Format::Json => serde_json::to_string_pretty(&value)? + "\n",
        Format::Text => to_text(&value),
        Format::Csv => to_flat_csv(&value),
    })
}

fn emit(out: &Output, body: &str, stdout: &mut dyn Write) -> Result<()> {
    match &out.out {
        Some(p) => std::fs::write(p, body)?,
        None => stdout.write_all(body.as_bytes())?,
    }
    Ok(())
}

/// Parses `argv` (including the program name) and runs the subcommand.
pub fn run<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(stdout, "{e}");
                    0
                }
                _ => {
                    let _ = write!(stderr, "{}", e.render());
                    2
                }
            };
        }
    };
    match dispatch(cli.command, stdout) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            match e {
                Error::InvalidParameter(_)
                | Error::Io(_)
                | Error::Json(_)
                | Error::FocalPoint { .. } => 2,
                Error::SolverFailure { .. } => 1,
            }
        }
    }
}

fn dispatch(cmd: Command, stdout: &mut dyn Write) -> Result<i32> {
    match cmd {
        Command::Construct(a) => {
            let sys = load_system(a.m, a.k, a.system.as_ref())?;
            let body = match a.output.format.unwrap_or(Format::Json) {
                Format::Json => sys.to_json()? + "\n",
                other => render(&serde_json::from_str::<Value>(&sys.to_json()?)?, other)?,
            };
            emit(&a.output, &body, stdout)?;
            Ok(0)
        }
        Command::Verify(a) => verify(a, stdout),
        Command::Curvature(a) => curvature(a, stdout),
        Command::Vanishing(a) => vanishing(a, stdout),
        Command::Radius(a) => radius(a, stdout),
        Command::Certify(a) => {
            let cert = match (&a.factors, a.dim, a.m, a.k) {
                (Some(f), _, _, _) => certify_product(f)?,
                (None, Some(d), _, _) => certify_dimension(d)?,
                (None, None, Some(m), Some(k)) => certify_fkm(m, k)?,
                _ => return Err(invalid("need --m and --k, --factors, or --dim")),
            };
            let body = match a.output.format.unwrap_or(Format::Json) {
                Format::Csv => to_csv(std::slice::from_ref(&cert))?,
                other => render(&cert, other)?,
            };
            emit(&a.output, &body, stdout)?;
            Ok(verdict_code(cert.verdict))
        }
        Command::Sweep(a) => {
            let certs: Vec<Certificate> = match (&a.dim, &a.m, &a.k) {
                (Some(d), _, _) => sweep_products(&homogeneous_lists(parse_range(d)?))?,
                (None, Some(m), Some(k)) => sweep_fkm(parse_range(m)?, parse_range(k)?)?,
                _ => return Err(invalid("need --m and --k ranges, or --dim range")),
            };
            let body = match a.output.format.unwrap_or(Format::Csv) {
                Format::Csv => to_csv(&certs)?,
                Format::Json => serde_json::to_string_pretty(&certs)? + "\n",
                Format::Text => certs
                    .iter()
                    .map(|c| render(c, Format::Text))
                    .collect::<Result<Vec<_>>>()?
                    .join("\n"),
            };
            emit(&a.output, &body, stdout)?;
            Ok(0)
        }
    }
}

fn verdict_code(v: Verdict) -> i32 {
    match v {
        Verdict::Certified => 0,
        Verdict::Inconclusive => 1,
        Verdict::Invalid => 2,
    }
}

#[derive(Serialize)]
struct VerifySummary {
    m: usize,
    k: usize,
    n: usize,
    relations_ok: bool,
    samples: usize,
    seed: u64,
    grad_identity: f64,
    laplacian_identity: f64,
    czero_identity: f64,
    c_value: f64,
    fd_delta: f64,
    max_abs: f64,
    tolerances: Tolerances,
    pass: bool,
}

fn verify(a: VerifyArgs, stdout: &mut dyn Write) -> Result<i32> {
    let sys = load_system(a.sys.m, a.sys.k, a.sys.system.as_ref())?;
    let params = FoliationParams::of(&sys)?;
    if a.samples == 0 {
        return Err(invalid("--samples must be >= 1"));
    }
    if let Some(s) = a.level {
        if !(s > 0.0 && s < 1.0) {
            return Err(invalid(format!("--level must lie in (0, 1), got {s}")));
        }
    }
    let tol = Tolerances {
        identity: a.tol,
        ..Default::default()
    };
    let reports: Vec<IdentityReport> = (0..a.samples as u64)
        .into_par_iter()
        .map(|i| {
            let p = match a.level {
                Some(s) => sample_level_point_with(&sys, s, &mut rng::stream(a.seed, i))?,
                None => sample_regular_point(&sys, a.seed, i),
            };
            identity_report(&sys, &p)
        })
        .collect::<Result<_>>()?;
    let max = |f: fn(&IdentityReport) -> f64| reports.iter().map(f).fold(0.0f64, f64::max);
    let pass = reports.iter().all(|r| r.within(&tol));
    let summary = VerifySummary {
        m: params.m,
        k: params.k,
        n: params.n,
        relations_ok: true,
        samples: a.samples,
        seed: a.seed,
        grad_identity: max(|r| r.grad_identity.abs()),
        laplacian_identity: max(|r| r.laplacian_identity.abs()),
        czero_identity: max(|r| r.czero_identity),
        c_value: max(|r| r.c_value.abs()),
        fd_delta: max(|r| r.fd_delta),
        max_abs: max(|r| r.max_abs),
        tolerances: tol,
        pass,
    };
    emit(
        &a.sys.output,
        &render(&summary, a.sys.output.format.unwrap_or(Format::Json))?,
        stdout,
    )?;
    Ok(if pass { 0 } else { 1 })
}

fn profile_points(sys: &CliffordSystem, seed: u64, ts: &[f64]) -> Result<Vec<ProfilePoint>> {
    let p = sample_minimal_point(sys, seed, 0)?;
    det_profile(sys, &build_frame(sys, &p)?, ts)
}

fn curvature(a: CurvatureArgs, stdout: &mut dyn Write) -> Result<i32> {
    let sys = load_system(a.sys.m, a.sys.k, a.sys.system.as_ref())?;
    let report = alpha_sq(&sys, a.samples, 256, a.seed)?;
    let alpha = report.closed_form.sqrt();
    let tmax = a.tmax.unwrap_or(1.0 / alpha);
    if !(tmax > 0.0) || a.steps == 0 {
        return Err(invalid("--tmax must be > 0 and --steps >= 1"));
    }
    let ts: Vec<f64> = (0..=a.steps)
        .map(|i| tmax * i as f64 / a.steps as f64)
        .collect();
    let profile = profile_points(&sys, a.seed, &ts)?;
    let ok = (report.estimate - report.closed_form).abs() <= a.tol;
    let body = match a.sys.output.format.unwrap_or(Format::Json) {
        Format::Csv => {
            let mut s = String::from("t,beta,frob_sq,trace,det_min\n");
            for p in &profile {
                let _ = writeln!(
                    s,
                    "{:.12},{:.12},{:.12},{:.12},{:.12}",
                    p.t, p.beta, p.frob_sq, p.trace, p.det_min
                );
            }
            s
        }
        other => render(&json!({ "alpha_sq": report, "profile": profile }), other)?,
    };
    emit(&a.sys.output, &body, stdout)?;
    Ok(if ok { 0 } else { 1 })
}

fn vanishing(a: VanishingArgs, stdout: &mut dyn Write) -> Result<i32> {
    let q = match a.profile {
        ProfileArg::BoundF | ProfileArg::Limit => {
            let (Some(dim), Some(a2)) = (a.dim, a.alpha2) else {
                return Err(invalid("need --dim and --alpha2"));
            };
            if !(a2 >= 0.0) {
                return Err(invalid(format!("--alpha2 must be >= 0, got {a2}")));
            }
            let profile = if a.profile == ProfileArg::Limit {
                Profile::Limit
            } else {
                Profile::BoundF
            };
            VanishingAngleQuery::new(dim, a2.sqrt(), profile)?
        }
        ProfileArg::Numeric => {
            let sys = load_system(a.m, a.k, a.system.as_ref())?;
            let dim = 2 * sys.n();
            if a.dim.is_some_and(|d| d != dim) {
                return Err(invalid(format!(
                    "numeric profile of this system has cone dimension {dim}"
                )));
            }
            let p = sample_minimal_point(&sys, a.seed, 0)?;
            let frame = build_frame(&sys, &p)?;
            let ops = shape_operators(&sys, &frame)?;
            let (g1, g2, _) = ops.gram();
            let kappa = g1.max(g2);
            let tmax = 4.0 / kappa.sqrt();
            let ts: Vec<f64> = (0..=400).map(|i| tmax * i as f64 / 400.0).collect();
            let prof = crate::frames::profile_from_operators(&ops, &ts);
            let tab = TabulatedProfile::new(kappa, ts, prof.iter().map(|p| p.det_min).collect())?;
            VanishingAngleQuery::new(dim, kappa.sqrt(), Profile::Numeric(tab))?
        }
    };
    let r = vanishing_angle(&q)?;
    let body = json!({
        "exists": r.exists,
        "theta_rad": r.theta,
        "theta_deg": r.theta.map(f64::to_degrees),
        "tan_theta": r.tan_theta(),
        "profile": r.profile,
        "steps": r.steps,
        "dim": q.dim,
        "alpha_sq": q.alpha * q.alpha,
        "termination": r.termination,
        "t_terminal": r.t_terminal,
    });
    emit(
        &a.output,
        &render(&body, a.output.format.unwrap_or(Format::Json))?,
        stdout,
    )?;
    Ok(if r.exists { 0 } else { 1 })
}

fn radius(a: RadiusArgs, stdout: &mut dyn Write) -> Result<i32> {
    if let (Some(m), Some(n)) = (a.m, a.n) {
        let r = normal_radius(m, n)?;
        emit(
            &a.output,
            &render(&r, a.output.format.unwrap_or(Format::Json))?,
            stdout,
        )?;
        return Ok(0);
    }
    let sys = load_system(a.m, a.k, a.system.as_ref())?;
    let closed = normal_radius(sys.m(), sys.n())?;
    if a.samples == 0 {
        return Err(invalid("--samples must be >= 1"));
    }
    let theta_max = 0.6 * std::f64::consts::PI;
    let scans: Vec<(Option<f64>, Option<[f64; 3]>)> = (0..a.samples as u64)
        .into_par_iter()
        .map(|i| {
            let p = sample_minimal_point(&sys, a.seed, i)?;
            let plus = geodesic_scan(&sys, &p, std::f64::consts::FRAC_PI_2, theta_max)?;
            let minus = geodesic_scan(&sys, &p, -std::f64::consts::FRAC_PI_2, theta_max)?;
            let best = [plus, minus]
                .into_iter()
                .filter(|s| s.theta_first.is_some())
                .min_by(|x, y| x.theta_first.unwrap().total_cmp(&y.theta_first.unwrap()));
            Ok(best.map_or((None, None), |s| (s.theta_first, s.residuals)))
        })
        .collect::<Result<_>>()?;
    let deviation = scans
        .iter()
        .map(|(t, _)| t.map_or(f64::INFINITY, |t| (t - closed.n_rad).abs()))
        .fold(0.0f64, f64::max);
    let residual = scans
        .iter()
        .filter_map(|(_, r)| *r)
        .flat_map(|r| r.into_iter())
        .fold(0.0f64, |a, v| a.max(v.abs()));
    let body = json!({
        "N_rad": closed.n_rad,
        "branch": closed.branch,
        "c": closed.c,
        "theta_first": scans[0].0,
        "residuals": scans[0].1,
        "samples": a.samples,
        "max_deviation": deviation,
        "max_residual": residual,
    });
    emit(
        &a.output,
        &render(&body, a.output.format.unwrap_or(Format::Json))?,
        stdout,
    )?;
    Ok(if deviation <= a.tol { 0 } else { 1 })
}
