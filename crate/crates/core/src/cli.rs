//! Command-line drivers and the on-disk coefficient format.
//!
//! Coefficient files are plain text: `#`-prefixed `key=value` header lines
//! (`format_version`, `x0`, `j_max`, `curve`, `scheme`) followed by one
//! `j k sign log2mag` row per stored coefficient. Magnitudes are printed
//! with 17 significant digits so parsing reproduces the field bit-exactly;
//! exact zeros are normally omitted and render as `-inf` when present.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::analysis;
use crate::error::{Error, Result};
use crate::field::CoefficientField;
use crate::frontier::FrontierCurve;
use crate::grid::SigmaGrid;
use crate::signal;
use crate::synthesis::{self, OffIndexPolicy, WeightScheme};

pub fn serialize_field(field: &CoefficientField) -> String {
    let mut out = String::new();
    out.push_str("# format_version=1\n");
    out.push_str(&format!("# x0={:.16e}\n", field.x0));
    out.push_str(&format!("# j_max={}\n", field.j_max));
    out.push_str(&format!("# curve={}\n", field.curve_desc));
    out.push_str(&format!("# scheme={}\n", field.scheme_tag));
    field.for_each_nonzero(|e| {
        out.push_str(&format!("{} {} {} {:.16e}\n", e.j, e.k, e.sign, e.log2_mag));
    });
    out
}

pub fn write_field(field: &CoefficientField, path: &Path) -> Result<()> {
    let mut f = std::fs::File::create(path)?;
    f.write_all(serialize_field(field).as_bytes())?;
    Ok(())
}

pub fn parse_field(text: &str) -> Result<CoefficientField> {
    let mut headers = std::collections::BTreeMap::new();
    let mut body: Vec<(u32, i64, i8, f64)> = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('#') {
            let rest = rest.trim();
            if let Some((k, v)) = rest.split_once('=') {
                headers.insert(k.trim().to_string(), v.trim().to_string());
            }
            continue;
        }
        let mut it = line.split_whitespace();
        let mut next = |what: &str| {
            it.next()
                .ok_or_else(|| Error::ParseField(format!("line {}: missing {what}", lineno + 1)))
        };
        let j: u32 = next("j")?
            .parse()
            .map_err(|_| Error::ParseField(format!("line {}: bad j", lineno + 1)))?;
        let k: i64 = next("k")?
            .parse()
            .map_err(|_| Error::ParseField(format!("line {}: bad k", lineno + 1)))?;
        let sign: i8 = match next("sign")? {
            "1" | "+1" => 1,
            "-1" => -1,
            other => return Err(Error::ParseField(format!("line {}: bad sign {other:?}", lineno + 1))),
        };
        let mag_str = next("log2mag")?;
        let mag: f64 = if mag_str == "-inf" {
            f64::NEG_INFINITY
        } else {
            mag_str
                .parse()
                .map_err(|_| Error::ParseField(format!("line {}: bad log2mag", lineno + 1)))?
        };
        body.push((j, k, sign, mag));
    }
    match headers.get("format_version").map(String::as_str) {
        Some("1") => {}
        other => return Err(Error::ParseField(format!("unsupported format_version {other:?}"))),
    }
    let x0: f64 = headers
        .get("x0")
        .ok_or_else(|| Error::ParseField("missing x0 header".into()))?
        .parse()
        .map_err(|_| Error::ParseField("bad x0 header".into()))?;
    let j_max: u32 = headers
        .get("j_max")
        .ok_or_else(|| Error::ParseField("missing j_max header".into()))?
        .parse()
        .map_err(|_| Error::ParseField("bad j_max header".into()))?;
    let mut field = CoefficientField::new(x0, j_max);
    field.curve_desc = headers.get("curve").cloned().unwrap_or_default();
    field.scheme_tag = headers.get("scheme").cloned().unwrap_or_default();
    for (j, k, sign, mag) in body {
        if !field.in_range(j, k) {
            return Err(Error::ParseField(format!("({j}, {k}) outside the admissible cone")));
        }
        if mag != f64::NEG_INFINITY {
            field.insert(j, k, mag, sign);
        }
    }
    Ok(field)
}

pub fn read_field(path: &Path) -> Result<CoefficientField> {
    parse_field(&std::fs::read_to_string(path)?)
}

#[derive(Debug, Parser)]
#[command(
    name = "microlocal",
    about = "Synthesize wavelet coefficient fields with a prescribed 2-microlocal frontier,\nestimate frontiers back from fields, and extract regularity exponents.",
    version
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SchemeArg {
    Unit,
    Meyer,
    Lvs,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum OffIndexArg {
    Equal,
    Zero,
}

#[derive(Debug, Subcommand)]
enum Cmd {
    /// Synthesize a coefficient field realizing a frontier curve.
    Synth(SynthArgs),
    /// Estimate the frontier of a coefficient field on a sigma grid.
    Estimate(EstimateArgs),
    /// Check a field against the necessary conditions of a linear frontier.
    CheckLinear(CheckLinearArgs),
    /// Sample the signal reconstruction of a coefficient field.
    Reconstruct(ReconstructArgs),
    /// Print regularity exponents, analytic or estimated.
    Exponents(ExponentsArgs),
}

#[derive(Debug, Args)]
struct SynthArgs {
    /// Curve descriptor: linear:alpha=..,gamma=.. | exp:sinf=..,lam=.. | softplus:c=..,beta=..
    #[arg(long)]
    frontier: String,
    #[arg(long, value_enum, default_value = "unit")]
    scheme: SchemeArg,
    #[arg(long, default_value_t = 0.0)]
    x0: f64,
    #[arg(long)]
    jmax: u32,
    /// Policy off the forced-equality index set (unit scheme only).
    #[arg(long, value_enum, default_value = "equal")]
    off_index: OffIndexArg,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct EstimateArgs {
    #[arg(long)]
    coeffs: PathBuf,
    /// Sigma grid lo:hi:step.
    #[arg(long, default_value = "-4:4:0.25")]
    sigma: String,
    /// Lower scale of the estimation window (default j_max/2).
    #[arg(long)]
    j0: Option<u32>,
    /// Upper scale of the estimation window (default j_max of the field).
    #[arg(long)]
    jmax: Option<u32>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct CheckLinearArgs {
    #[arg(long)]
    coeffs: PathBuf,
    #[arg(long)]
    alpha: f64,
    #[arg(long)]
    gamma: f64,
}

#[derive(Debug, Args)]
struct ReconstructArgs {
    #[arg(long)]
    coeffs: PathBuf,
    /// Sample range lo:hi.
    #[arg(long)]
    range: String,
    /// Number of samples.
    #[arg(long)]
    n: usize,
    /// Multiply all coefficients by this factor.
    #[arg(long, default_value_t = 1.0)]
    scale: f64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct ExponentsArgs {
    /// Analytic route: curve descriptor.
    #[arg(long)]
    frontier: Option<String>,
    /// Estimated route: coefficient file.
    #[arg(long)]
    coeffs: Option<PathBuf>,
    #[arg(long, default_value = "-4:4:0.25")]
    sigma: String,
    #[arg(long)]
    j0: Option<u32>,
    #[arg(long)]
    jmax: Option<u32>,
}

/// Exit codes: 0 success/PASS, 1 FAIL verdict, 2 usage or I/O error,
/// 3 scheme/curve incompatibility.
pub fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => e.exit(),
    };
    let outcome = match cli.cmd {
        Cmd::Synth(a) => cmd_synth(a),
        Cmd::Estimate(a) => cmd_estimate(a),
        Cmd::CheckLinear(a) => cmd_check_linear(a),
        Cmd::Reconstruct(a) => cmd_reconstruct(a),
        Cmd::Exponents(a) => cmd_exponents(a),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::SchemeCurveIncompatible(_) | Error::LinearCurveRejected | Error::NonConcaveCurve => 3,
                _ => 2,
            }
        }
    }
}

fn cmd_synth(a: SynthArgs) -> Result<i32> {
    let curve = FrontierCurve::parse_descriptor(&a.frontier)?;
    let policy = match a.off_index {
        OffIndexArg::Equal => OffIndexPolicy::EqualityEverywhere,
        OffIndexArg::Zero => OffIndexPolicy::ZeroOffIndex,
    };
    let (field, report) = match a.scheme {
        SchemeArg::Unit => {
            let scheme = WeightScheme::unit();
            let field = match &curve {
                FrontierCurve::Linear { alpha, gamma } => {
                    synthesis::synth_linear(*alpha, *gamma, &scheme, a.x0, a.jmax)?
                }
                _ => synthesis::synth_general(&curve, &scheme, a.x0, a.jmax, policy)?,
            };
            let report = synthesis::condition_check(&scheme, &curve, a.x0, a.jmax);
            (field, report)
        }
        SchemeArg::Meyer => {
            if curve.is_linear() {
                return Err(Error::SchemeCurveIncompatible(
                    "the Meyer scheme needs a strictly concave curve".into(),
                ));
            }
            let field = synthesis::synth_meyer(&curve, a.x0, a.jmax)?;
            let scheme = WeightScheme::meyer_style(&curve, a.x0, a.jmax)?;
            let report = synthesis::condition_check(&scheme, &curve, a.x0, a.jmax);
            (field, report)
        }
        SchemeArg::Lvs => {
            if curve.is_linear() {
                return Err(Error::SchemeCurveIncompatible(
                    "the LVS scheme needs a strictly concave curve".into(),
                ));
            }
            if a.x0 != 0.0 {
                return Err(Error::SchemeCurveIncompatible("the LVS construction works at x0 = 0".into()));
            }
            let gf = synthesis::g_from_curve(&curve)?;
            let field = synthesis::synth_lvs(&gf, a.jmax)?;
            let scheme = WeightScheme::lvs_style(&gf, a.jmax)?;
            let report = synthesis::condition_check(&scheme, &curve, a.x0, a.jmax);
            (field, report)
        }
    };
    write_field(&field, &a.out)?;
    println!("entries: {}", field.nonzero_count());
    println!("{}", report.summary());
    Ok(0)
}

fn fmt_val(v: f64) -> String {
    if v.is_infinite() {
        "inf".to_string()
    } else {
        format!("{v}")
    }
}

fn cmd_estimate(a: EstimateArgs) -> Result<i32> {
    let field = read_field(&a.coeffs)?;
    let grid = SigmaGrid::parse(&a.sigma)?;
    let jmax = a.jmax.unwrap_or(field.j_max);
    let j0 = a.j0.unwrap_or((jmax / 2).max(1));
    let ef = analysis::estimate_frontier(&field, &grid, j0, jmax)?;
    let mut out = String::from("sigma,s_hat,raw_s_hat,argmin_j,argmin_k\n");
    for p in &ef.points {
        let (aj, ak) = match p.argmin {
            Some((j, k)) => (j.to_string(), k.to_string()),
            None => ("inf".to_string(), "inf".to_string()),
        };
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            p.sigma,
            fmt_val(p.s_hat),
            fmt_val(p.raw_s_hat),
            aj,
            ak
        ));
    }
    std::fs::write(&a.out, out)?;
    Ok(0)
}

fn cmd_check_linear(a: CheckLinearArgs) -> Result<i32> {
    let field = read_field(&a.coeffs)?;
    let report = analysis::check_linear(&field, a.alpha, a.gamma)?;
    println!("alpha={}", report.alpha);
    println!("gamma={}", report.gamma);
    println!("support_violations={}", report.support_violations);
    println!("cond_i_surrogate={}", fmt_val(report.cond_i_surrogate));
    if let Some(&(j, c, l)) = report.cond_ii_best_trajectory.last() {
        println!("trajectory_terminal_j={j}");
        println!("trajectory_terminal_log2C_over_j={}", fmt_val(c));
        println!("trajectory_terminal_log2lambda_over_j={}", fmt_val(l));
    }
    for r in &report.reasons {
        println!("reason: {r}");
    }
    println!("verdict={}", report.verdict_str());
    Ok(if report.verdict { 0 } else { 1 })
}

fn cmd_reconstruct(a: ReconstructArgs) -> Result<i32> {
    let field = read_field(&a.coeffs)?;
    let (lo, hi) = a
        .range
        .split_once(':')
        .ok_or_else(|| Error::BadDescriptor(format!("range must be lo:hi, got {:?}", a.range)))?;
    let lo: f64 = lo
        .parse()
        .map_err(|_| Error::BadDescriptor("range lo is not a number".into()))?;
    let hi: f64 = hi
        .parse()
        .map_err(|_| Error::BadDescriptor("range hi is not a number".into()))?;
    let table = signal::build_meyer_table(1 << 16, 32.0)?;
    let samples = signal::reconstruct(&field, &table, lo, hi, a.n)?;
    let mut out = String::from("x,f\n");
    for (x, f) in samples.xs.iter().zip(&samples.fs) {
        out.push_str(&format!("{},{}\n", x, a.scale * f));
    }
    std::fs::write(&a.out, out)?;
    Ok(0)
}

fn cmd_exponents(a: ExponentsArgs) -> Result<i32> {
    let exps = match (&a.frontier, &a.coeffs) {
        (Some(desc), None) => FrontierCurve::parse_descriptor(desc)?.exponents(),
        (None, Some(path)) => {
            let field = read_field(path)?;
            let grid = SigmaGrid::parse(&a.sigma)?;
            let jmax = a.jmax.unwrap_or(field.j_max);
            let j0 = a.j0.unwrap_or((jmax / 2).max(1));
            let ef = analysis::estimate_frontier(&field, &grid, j0, jmax)?;
            analysis::estimate_exponents(&ef)?
        }
        _ => {
            return Err(Error::BadDescriptor(
                "pass exactly one of --frontier or --coeffs".into(),
            ))
        }
    };
    println!("pointwise_holder={}", fmt_val(exps.pointwise_holder));
    println!("local_holder={}", fmt_val(exps.local_holder));
    println!("chirp={}", fmt_val(exps.chirp));
    println!("oscillation={}", fmt_val(exps.oscillation));
    println!("weak_scaling={}", fmt_val(exps.weak_scaling));
    Ok(0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synthesis::{synth_linear, WeightScheme};

    #[test]
    fn field_round_trip_is_bit_exact() {
        let field = synth_linear(0.5, 0.5, &WeightScheme::unit(), 0.0, 16).unwrap();
        let text = serialize_field(&field);
        let parsed = parse_field(&text).unwrap();
        assert_eq!(serialize_field(&parsed), text);
        assert_eq!(parsed.x0, field.x0);
        assert_eq!(parsed.j_max, field.j_max);
        assert_eq!(parsed.curve_desc, field.curve_desc);
        assert_eq!(parsed.scheme_tag, field.scheme_tag);
        let mut pairs = Vec::new();
        field.for_each_nonzero(|e| pairs.push(e));
        let mut back = Vec::new();
        parsed.for_each_nonzero(|e| back.push(e));
        assert_eq!(pairs, back);
    }

    #[test]
    fn parse_rejects_garbage() {
        assert!(parse_field("# format_version=2\n# x0=0\n# j_max=1\n").is_err());
        assert!(parse_field("# format_version=1\n# j_max=1\n").is_err());
        let ok = "# format_version=1\n# x0=0.0e0\n# j_max=3\n# curve=\n# scheme=\n";
        assert!(parse_field(ok).is_ok());
        assert!(parse_field(&format!("{ok}9 1 1 0.0\n")).is_err(), "j above j_max");
        assert!(parse_field(&format!("{ok}2 9 1 0.0\n")).is_err(), "k outside cone");
        assert!(parse_field(&format!("{ok}2 1 2 0.0\n")).is_err(), "bad sign");
        // explicit -inf rows parse as absent coefficients
        let f = parse_field(&format!("{ok}2 1 1 -inf\n")).unwrap();
        assert_eq!(f.nonzero_count(), 0);
    }
}
