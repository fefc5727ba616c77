//! The `cuspkit` command line: argument parsing, command dispatch and report formatting.

use crate::cusps::{balance_cusps, minimal_l_curve, slope_length, CuspShape};
use crate::error::Error;
use crate::hmodel::Tolerance;
use crate::horoballs::{self, detect_symmetry, EnumOptions};
use crate::manifold::Manifold;
use crate::surfaces::{self, ReportOptions, SurfaceCandidate, SyntheticFixture, Verdict};
use crate::triangulate::{parse_triangulation, solve_shapes, volume};
use anyhow::{anyhow, bail, Context};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use std::ffi::OsString;
use std::path::{Path, PathBuf};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_NUMERIC: i32 = 2;
pub const EXIT_VERIFY: i32 = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Debug, Parser)]
#[command(name = "cuspkit", version, about = "Cusp geometry of hyperbolic knot and link complements")]
pub struct RunConfig {
    #[command(subcommand)]
    pub command: Command,
    /// Geometric tolerance (overrides CUSPKIT_TOL).
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Maximal word length for horoball enumeration.
    #[arg(long, global = true, default_value_t = 64)]
    pub max_depth: usize,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    /// Write the report here instead of standard output.
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve the gluing equations and report shapes and volume.
    Solve { path: PathBuf },
    /// Widths of l-curves on maximal (or balanced) cusps.
    Width {
        path: PathBuf,
        /// longitude, minimal, or p,q
        #[arg(long, default_value = "longitude")]
        curve: String,
        /// Expand all cusps together, keeping the widths equal.
        #[arg(long)]
        balance: bool,
    },
    /// Length of the slope p mu + q lambda on the maximal cusp.
    Slope {
        path: PathBuf,
        #[arg(allow_hyphen_values = true)]
        p: i64,
        #[arg(allow_hyphen_values = true)]
        q: i64,
        #[arg(long)]
        cusp: Option<usize>,
    },
    /// Horoball diagram of a maximal cusp.
    Horoballs {
        path: PathBuf,
        #[arg(long, default_value_t = 0.2)]
        cutoff: f64,
        #[arg(long)]
        cusp: Option<usize>,
        /// Also write the diagram as SVG.
        #[arg(long)]
        svg: Option<PathBuf>,
        /// Check for a translational symmetry of this order along the longitude.
        #[arg(long)]
        symmetry: Option<u32>,
    },
    /// Verify a surface candidate and evaluate the width theorems. With a single
    /// argument, the file is a synthetic plane/horoball fixture.
    Surface {
        path: PathBuf,
        candidate: Option<PathBuf>,
        /// Largest n-gon searched for.
        #[arg(long, default_value_t = 4)]
        ngons: usize,
    },
    /// Widths of the knots obtained by (1, p) filling of the drilled cusp.
    Twist {
        path: PathBuf,
        /// a..b, inclusive
        #[arg(long, default_value = "5..25")]
        range: String,
    },
}

/// A finished command: the report and the exit code it asks for.
pub struct Outcome {
    pub json: Value,
    pub text: String,
    pub code: i32,
}

impl Outcome {
    fn ok(json: Value, text: String) -> Outcome {
        Outcome { json, text, code: EXIT_OK }
    }
}

/// Parses `args` (including the program name), runs the command and returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cfg = match RunConfig::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match run(&cfg) {
        Ok(out) => {
            let body = match cfg.format {
                Format::Json => format!("{}\n", serde_json::to_string_pretty(&round_json(&out.json)).expect("json")),
                Format::Text => out.text,
            };
            let written = match &cfg.output {
                Some(p) => std::fs::write(p, body).with_context(|| format!("cannot write {}", p.display())),
                None => {
                    print!("{body}");
                    Ok(())
                }
            };
            if let Err(e) = written {
                eprintln!("error: {e:#}");
                return EXIT_USAGE;
            }
            out.code
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            exit_code(&e)
        }
    }
}

/// Usage and input errors give 1, numerical failures 2, failed verification 3.
pub fn exit_code(e: &anyhow::Error) -> i32 {
    match e.downcast_ref::<Error>() {
        Some(Error::NoConvergence { .. })
        | Some(Error::DevelopmentInconsistent(_))
        | Some(Error::DegenerateMatrix(_))
        | Some(Error::BudgetExceeded(_))
        | Some(Error::IncreaseDepth(_)) => EXIT_NUMERIC,
        Some(Error::Unverified) | Some(Error::NestedHoroballs) => EXIT_VERIFY,
        _ => EXIT_USAGE,
    }
}

/// Geometric tolerance from the flag, else CUSPKIT_TOL, else the default.
pub fn tolerance(flag: Option<f64>) -> anyhow::Result<Tolerance> {
    let value = match flag {
        Some(v) => Some(v),
        None => match std::env::var("CUSPKIT_TOL") {
            Ok(s) => Some(s.trim().parse::<f64>().map_err(|_| anyhow!("CUSPKIT_TOL is not a number: {s:?}"))?),
            Err(_) => None,
        },
    };
    match value {
        Some(v) => Ok(Tolerance::default().with_geometric(v)?),
        None => Ok(Tolerance::default()),
    }
}

pub fn run(cfg: &RunConfig) -> anyhow::Result<Outcome> {
    let tol = tolerance(cfg.tol)?;
    let opts = EnumOptions { max_depth: cfg.max_depth, ..EnumOptions::default() };
    match &cfg.command {
        Command::Solve { path } => cmd_solve(path),
        Command::Width { path, curve, balance } => cmd_width(&load(path, tol)?, curve, *balance, &opts),
        Command::Slope { path, p, q, cusp } => {
            if (*p, *q) == (0, 0) {
                bail!(Error::ZeroSlope);
            }
            cmd_slope(&load(path, tol)?, (*p, *q), *cusp, &opts)
        }
        Command::Horoballs { path, cutoff, cusp, svg, symmetry } => {
            cmd_horoballs(&load(path, tol)?, *cutoff, *cusp, svg.as_deref(), *symmetry, &opts)
        }
        Command::Surface { path, candidate, ngons } => match candidate {
            Some(c) => cmd_surface(&load(path, tol)?, &SurfaceCandidate::load(c)?, *ngons, &opts),
            None => cmd_fixture(path, *ngons, &tol),
        },
        Command::Twist { path, range } => cmd_twist(path, range, &tol, &opts),
    }
}

fn load(path: &Path, tol: Tolerance) -> anyhow::Result<Manifold> {
    Ok(Manifold::load(path, tol)?)
}

fn read(path: &Path) -> anyhow::Result<String> {
    std::fs::read_to_string(path).map_err(|e| anyhow!(Error::Invalid(format!("cannot read {}: {e}", path.display()))))
}

fn cmd_solve(path: &Path) -> anyhow::Result<Outcome> {
    let tri = parse_triangulation(&read(path)?)?;
    let sh = solve_shapes(&tri)?;
    let vol = volume(&sh);
    let mut text = format!("{}: {} tetrahedra\n", tri.name, tri.n);
    for (k, z) in sh.z.iter().enumerate() {
        text += &format!("  z{k} = {:.12} {:+.12}i\n", z.re, z.im);
    }
    text += &format!("residual {:.3e}\ngeometric {}\nvolume {:.12}\n", sh.residual, sh.geometric, vol);
    let json = json!({
        "manifold": tri.name,
        "tetrahedra": tri.n,
        "shapes": sh.z.iter().map(|z| [z.re, z.im]).collect::<Vec<_>>(),
        "residual": sh.residual,
        "geometric": sh.geometric,
        "volume": vol,
        "iterations": sh.iterations,
    });
    Ok(Outcome::ok(json, text))
}

/// Curve choice per cusp: longitude, the shortest l-curve, or a fixed slope.
fn parse_curve(spec: &str, shape: &CuspShape) -> anyhow::Result<(i64, i64)> {
    match spec {
        "longitude" => Ok((0, 1)),
        "minimal" => Ok(minimal_l_curve(shape).slope()),
        s => {
            let (p, q) = s.split_once(',').ok_or_else(|| anyhow!(Error::Invalid(format!("bad curve {s:?}"))))?;
            let p: i64 = p.trim().parse().map_err(|_| anyhow!(Error::Invalid(format!("bad curve {s:?}"))))?;
            let q: i64 = q.trim().parse().map_err(|_| anyhow!(Error::Invalid(format!("bad curve {s:?}"))))?;
            if (p, q) == (0, 0) {
                bail!(Error::ZeroSlope);
            }
            Ok((p, q))
        }
    }
}

/// Scale of each complete cusp, each maximal on its own.
fn maximal_scales(m: &Manifold, opts: &EnumOptions) -> anyhow::Result<Vec<f64>> {
    let max = horoballs::max_diameters(m, opts)?;
    let mut scales = vec![0.0; m.num_cusps()];
    for k in m.complete_cusps() {
        scales[k] = horoballs::maximal_scale(&max, k).ok_or(Error::IncreaseDepth(format!("no horoball found for cusp {k}")))?;
    }
    Ok(scales)
}

/// Scales of the cusps expanded together with equal longitude widths.
fn balanced_scales(m: &Manifold, opts: &EnumOptions) -> anyhow::Result<Vec<f64>> {
    let r = balance_cusps(m, None, opts)?;
    let mut scales = vec![0.0; m.num_cusps()];
    for (i, &k) in r.cusps.iter().enumerate() {
        scales[k] = r.scales[i];
    }
    Ok(scales)
}

fn cmd_width(m: &Manifold, curve: &str, balance: bool, opts: &EnumOptions) -> anyhow::Result<Outcome> {
    let cusps = m.complete_cusps();
    let shapes: Vec<CuspShape> = cusps.iter().map(|&k| m.cusp_shape(k)).collect::<Result<_, _>>()?;
    let curves: Vec<(i64, i64)> = shapes.iter().map(|s| parse_curve(curve, s)).collect::<anyhow::Result<_>>()?;
    let scales: Vec<f64> = if balance {
        balance_cusps(m, Some(&curves), opts)?.scales
    } else {
        let s = maximal_scales(m, opts)?;
        cusps.iter().map(|&k| s[k]).collect()
    };
    let mut rows = Vec::new();
    let mut text = format!("{}{}\n", m.name, if balance { " (balanced)" } else { "" });
    for (i, &k) in cusps.iter().enumerate() {
        let sh = shapes[i].at_scale(scales[i]);
        let (p, q) = curves[i];
        let len = slope_length(&sh, p, q)?;
        let w = sh.area() / len;
        text += &format!("  cusp {k}: curve ({p},{q}) length {len:.9} area {:.9} width {w:.9}\n", sh.area());
        rows.push(json!({"cusp": k, "curve": [p, q], "length": len, "area": sh.area(), "width": w, "scale": scales[i]}));
    }
    let common = rows.iter().map(|r| r["width"].as_f64().unwrap_or(f64::NAN)).fold(f64::INFINITY, f64::min);
    text += &format!("width {common:.9}\n");
    Ok(Outcome::ok(json!({"manifold": m.name, "balanced": balance, "cusps": rows, "width": common}), text))
}

fn cmd_slope(m: &Manifold, slope: (i64, i64), cusp: Option<usize>, opts: &EnumOptions) -> anyhow::Result<Outcome> {
    let scales = maximal_scales(m, opts)?;
    let cusps = match cusp {
        Some(k) => vec![k],
        None => m.complete_cusps(),
    };
    let mut rows = Vec::new();
    let mut text = String::new();
    for k in cusps {
        let sh = m.cusp_shape(k)?.at_scale(scales[k]);
        let len = slope_length(&sh, slope.0, slope.1)?;
        text += &format!("{} cusp {k}: slope ({},{}) length {len:.9}\n", m.name, slope.0, slope.1);
        rows.push(json!({"cusp": k, "slope": [slope.0, slope.1], "length": len}));
    }
    Ok(Outcome::ok(json!({"manifold": m.name, "lengths": rows}), text))
}

fn cmd_horoballs(
    m: &Manifold,
    cutoff: f64,
    cusp: Option<usize>,
    svg: Option<&Path>,
    symmetry: Option<u32>,
    opts: &EnumOptions,
) -> anyhow::Result<Outcome> {
    if !(cutoff > 0.0) {
        bail!(Error::Invalid("cutoff must be positive".into()));
    }
    let scales = balanced_scales(m, opts)?;
    let k = match cusp {
        Some(k) => k,
        None => *m.complete_cusps().first().ok_or(Error::Invalid("no complete cusp".into()))?,
    };
    let d = horoballs::enumerate(m, k, &scales, cutoff, opts)?;
    if let Some(p) = svg {
        std::fs::write(p, d.to_svg()).with_context(|| format!("cannot write {}", p.display()))?;
    }
    let full = d.full_sized(m.tol.tangency);
    let mut json = d.to_json();
    json["full_sized"] = json!(full);
    let mut text = format!(
        "{} cusp {k}: {} balls with diameter >= {cutoff}, {full} full-sized, verified {}\n",
        m.name,
        d.balls.len(),
        d.verified
    );
    let mut code = if d.verified { EXIT_OK } else { EXIT_VERIFY };
    if let Some(n) = symmetry {
        let s = detect_symmetry(&d, (0, 1), n, &m.tol)?;
        text += &format!("symmetry of order {n} along the longitude: {}\n", s.verified);
        json["symmetry"] = serde_json::to_value(&s)?;
        if !s.verified {
            code = EXIT_VERIFY;
        }
    }
    Ok(Outcome { json, text, code })
}

fn report_text(r: &surfaces::WidthTheoremReport) -> String {
    let mut text = format!(
        "{} {}: {}\n",
        r.manifold,
        r.candidate.as_deref().unwrap_or("candidate"),
        r.classification.name()
    );
    for (k, s) in &r.slopes {
        match s {
            Some((p, q)) => text += &format!("  cusp {k}: boundary slope ({p},{q})\n"),
            None => text += &format!("  cusp {k}: misses the cusp\n"),
        }
    }
    if let Some(w) = r.width {
        text += &format!("  balanced width {w:.9}\n");
    }
    for n in 2..=r.ngons.iter().map(|g| g.n).max().unwrap_or(0) {
        text += &format!("  {n}-gons: {}\n", r.count(n));
    }
    for c in &r.clauses {
        let v = match c.verdict {
            Verdict::Pass => "pass",
            Verdict::Fail => "FAIL",
            Verdict::Skipped => "skipped",
        };
        text += &format!("  [{v}] {}: {}\n", c.name, c.detail);
    }
    text
}

fn cmd_surface(m: &Manifold, cand: &SurfaceCandidate, ngons: usize, opts: &EnumOptions) -> anyhow::Result<Outcome> {
    let ro = ReportOptions { enumeration: *opts, max_n: ngons, ..ReportOptions::default() };
    let r = surfaces::width_theorem_report(m, cand, &ro)?;
    let code = if r.passed() { EXIT_OK } else { EXIT_VERIFY };
    Ok(Outcome { json: serde_json::to_value(&r)?, text: report_text(&r), code })
}

fn cmd_fixture(path: &Path, ngons: usize, tol: &Tolerance) -> anyhow::Result<Outcome> {
    let f = SyntheticFixture::from_json(&read(path)?)?;
    let found = f.ngons(ngons, tol);
    let mut text = format!("{}: {} n-gon(s)\n", f.name.as_deref().unwrap_or("fixture"), found.len());
    for w in &found {
        text += &format!("  {}-gon through {} planes\n", w.n, w.planes.len());
    }
    let json = json!({"fixture": f.name, "classification": surfaces::classify(&f.liftset(), tol)?, "ngons": found});
    Ok(Outcome::ok(json, text))
}

/// "a..b" (inclusive) or a single value.
pub fn parse_range(s: &str) -> anyhow::Result<Vec<i64>> {
    let bad = || anyhow!(Error::Invalid(format!("bad range {s:?}")));
    let (a, b) = match s.split_once("..") {
        Some((a, b)) => (a.trim().parse::<i64>().map_err(|_| bad())?, b.trim().trim_start_matches('=').parse::<i64>().map_err(|_| bad())?),
        None => {
            let v = s.trim().parse::<i64>().map_err(|_| bad())?;
            (v, v)
        }
    };
    if a > b {
        bail!(Error::Invalid(format!("empty range {s:?}")));
    }
    Ok((a..=b).collect())
}

fn cmd_twist(path: &Path, range: &str, tol: &Tolerance, opts: &EnumOptions) -> anyhow::Result<Outcome> {
    let ps = parse_range(range)?;
    let tri = parse_triangulation(&read(path)?)?;
    let series = surfaces::twist_series(&tri, &ps, tol, opts)?;
    let mut text = format!(
        "knot cusp {}, drilled cusp {}, framing shift {}\n{:>4} {:>14} {:>14} {:>14} {:>14}\n",
        series.knot_cusp, series.drilled_cusp, series.framing_shift, "p", "width", "|eta|", "area", "volume"
    );
    for pt in &series.points {
        text += &format!("{:>4} {:>14.9} {:>14.9} {:>14.9} {:>14.9}\n", pt.p, pt.width, pt.eta_length, pt.area, pt.volume);
    }
    for (p, why) in &series.skipped {
        text += &format!("{p:>4} skipped: {why}\n");
    }
    let from = series.below_one_from();
    if let Some(p0) = from {
        text += &format!("w < 1 for every p >= {p0}: no totally geodesic Seifert surface there\n");
    }
    let mut json = serde_json::to_value(&series)?;
    json["below_one_from"] = json!(from);
    let code = if series.points.is_empty() { EXIT_NUMERIC } else { EXIT_OK };
    Ok(Outcome { json, text, code })
}

/// Every float rounded to 12 significant digits, so reports are byte-stable.
pub fn round_json(v: &Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = n.as_f64().unwrap_or(f64::NAN);
            let r: f64 = format!("{x:.11e}").parse().unwrap_or(x);
            serde_json::Number::from_f64(r).map_or(Value::Null, Value::Number)
        }
        Value::Array(a) => Value::Array(a.iter().map(round_json).collect()),
        Value::Object(o) => Value::Object(o.iter().map(|(k, v)| (k.clone(), round_json(v))).collect()),
        other => other.clone(),
    }
}
