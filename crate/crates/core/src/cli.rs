//! Command-line front end. Exit codes: 0 ok, 1 usage/config error or a failed
//! verdict (verify, scenario), 2 Lipschitz blow-up (solve).

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::convex_projection::{kkt_report, projection_property_suite, ConvexSet, PropertyCheck, VBetaSet, WAlphaSet};
use crate::delay_functionals::{DelayFunctional, ThresholdParams};
use crate::error::{Error, Result};
use crate::grid_function::GridFunction;
use crate::picard_solver::{
    solve_fde, solve_sdde, BetaStep, FdeProblem, SddeProblem, SddeRhs, SolveOptions, SolveReport, SolveStatus,
};
use crate::scenarios::{self, Acceleration, BiologySpec, PositioningSpec, ScenarioOutput};
use crate::weighted_calculus::{sobolev_constant, verify_operator_bounds, BoundSummary};
use crate::write_atomic;

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_BLOWUP: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "sdde",
    version,
    about = "Projected Picard solver for state-dependent delay equations"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check the weighted operator bounds and the projection properties on random draws.
    Verify(VerifyArgs),
    /// Solve a problem described by a JSON config.
    Solve(SolveArgs),
    /// Project one window onto V_beta or W_alpha.
    Project(ProjectArgs),
    /// Run a builtin scenario.
    Scenario(ScenarioArgs),
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, default_value_t = 1000)]
    pub trials: usize,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long, value_delimiter = ',', default_value = "0.5,1,2,8")]
    pub rhos: Vec<f64>,
    /// Directory for `verify_report.json`.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    pub config: PathBuf,
    /// Output directory (default: current directory).
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ProjectArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, conflicts_with_all = ["alpha", "w", "wplus", "c"])]
    pub beta: Option<f64>,
    #[arg(long, requires_all = ["w", "wplus", "c"])]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub w: Option<f64>,
    #[arg(long)]
    pub wplus: Option<f64>,
    #[arg(long)]
    pub c: Option<f64>,
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    #[arg(long)]
    pub output: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum ScenarioName {
    Counterexample,
    Classical,
    Positioning,
    Biology,
}

#[derive(Debug, Args)]
pub struct ScenarioArgs {
    #[arg(value_enum)]
    pub name: ScenarioName,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    /// Step size override.
    #[arg(long)]
    pub dt: Option<f64>,
    /// Horizon override.
    #[arg(long = "t-end")]
    pub t_end: Option<f64>,
}

/// Parses `args` and runs; returns the process exit code.
pub fn run_from<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_ERROR
        }
    }
}

pub fn run(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Verify(a) => verify(&a),
        Command::Solve(a) => solve(&a),
        Command::Project(a) => project(&a),
        Command::Scenario(a) => scenario(&a),
    }
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| Error::Io(e.to_string()))?;
    text.push('\n');
    write_atomic(path, text.as_bytes())
}

fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(Error::from)
}

// ---------------------------------------------------------------------------
// verify

#[derive(Debug, Serialize)]
struct VerifyReport {
    trials: usize,
    seed: u64,
    rhos: Vec<f64>,
    operator_bounds: Vec<BoundSummary>,
    projection_properties: Vec<PropertyCheck>,
    pass: bool,
}

fn verify(a: &VerifyArgs) -> Result<i32> {
    if a.trials == 0 {
        return Err(Error::config("trials", "must be at least 1"));
    }
    if a.rhos.iter().any(|r| !(*r > 0.0)) {
        return Err(Error::config("rhos", "every rho must be positive"));
    }
    let bounds: Vec<BoundSummary> = verify_operator_bounds(a.trials, a.seed, &a.rhos)
        .iter()
        .map(|r| r.summary())
        .collect();
    let props = projection_property_suite(a.trials, a.seed)?;
    for b in &bounds {
        println!(
            "{} {:<20} rho={:<4} max_ratio={:.6e} bound={:.6e}",
            if b.pass { "PASS" } else { "FAIL" },
            b.name,
            b.rho,
            b.max_ratio,
            b.bound
        );
    }
    for p in &props {
        println!(
            "{} {:<32} worst={:.3e} threshold={:.3e}",
            if p.pass { "PASS" } else { "FAIL" },
            p.name,
            p.worst,
            p.threshold
        );
    }
    let pass = bounds.iter().all(|b| b.pass) && props.iter().all(|p| p.pass);
    if let Some(dir) = &a.out {
        ensure_dir(dir)?;
        write_json(
            &dir.join("verify_report.json"),
            &VerifyReport {
                trials: a.trials,
                seed: a.seed,
                rhos: a.rhos.clone(),
                operator_bounds: bounds,
                projection_properties: props,
                pass,
            },
        )?;
    }
    Ok(if pass { EXIT_OK } else { EXIT_ERROR })
}

// ---------------------------------------------------------------------------
// solve

#[derive(Debug, Clone, Copy, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum ProblemKind {
    Sdde,
    Fde,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    pub kind: ProblemKind,
    pub n: usize,
    pub h: f64,
    #[serde(rename = "T")]
    pub t_end: f64,
    pub dt: f64,
    pub rhs: RhsConfig,
    #[serde(rename = "L_g", default)]
    pub l_g: Option<f64>,
    pub delay: Option<DelayConfig>,
    pub phi: PhiConfig,
    #[serde(default)]
    pub opts: OptsConfig,
}

#[derive(Debug, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum RhsConfig {
    /// `"zero"`, `"growth"` (`g = x`) or `"negative_delayed"` (`g = -u`).
    Builtin(String),
    /// `g = A x + B u + c`.
    Affine {
        a: Vec<Vec<f64>>,
        b: Vec<Vec<f64>>,
        c: Vec<f64>,
    },
    /// `g = A x + B u + c(t)` with `c` interpolated linearly from a table.
    Table {
        a: Vec<Vec<f64>>,
        b: Vec<Vec<f64>>,
        times: Vec<f64>,
        values: Vec<Vec<f64>>,
    },
    /// Builtin cell-population model (FDE only, n = 2).
    Biology(BiologyConfig),
    /// Builtin positioning model (SDDE only, n = 2); replaces the delay block.
    Positioning(PositioningConfig),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BiologyConfig {
    pub mu: f64,
    pub x1: f64,
    pub x2: f64,
    pub eps: f64,
    #[serde(rename = "K")]
    pub k: f64,
    pub q0: f64,
    pub gamma0: f64,
    pub d0: f64,
    #[serde(default)]
    pub ds: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PositioningConfig {
    pub w: f64,
    pub w_plus: f64,
    pub c: f64,
    pub mu: f64,
    pub alpha: f64,
    /// Gain of `a(xi) = -gain * clamp(xi, -1, 1)`.
    pub gain: f64,
}

#[derive(Debug, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum DelayConfig {
    Constant {
        tau0: f64,
    },
    StateValue {
        cap: f64,
    },
    Threshold {
        eps: f64,
        #[serde(rename = "K")]
        k: f64,
        x1: f64,
        x2: f64,
        #[serde(default)]
        ds: Option<f64>,
        #[serde(default = "default_threshold_tol")]
        tol: f64,
        #[serde(default)]
        component: usize,
    },
    Echo {
        w: f64,
        w_plus: f64,
        c: f64,
        alpha: f64,
        #[serde(default = "default_echo_tol")]
        tol: f64,
        #[serde(default)]
        component: usize,
    },
}

fn default_threshold_tol() -> f64 {
    1e-10
}

fn default_echo_tol() -> f64 {
    1e-12
}

#[derive(Debug, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum PhiConfig {
    Constant(Vec<f64>),
    /// Nodal values on `[-h, 0]`, one row per node.
    Values(Vec<Vec<f64>>),
    /// CSV with header `t,x_1..x_n`; relative paths resolve against the config.
    Csv(PathBuf),
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptsConfig {
    pub tol: Option<f64>,
    pub target_q: Option<f64>,
    pub beta0: Option<f64>,
    pub beta_max: Option<f64>,
    pub rho: Option<f64>,
    pub max_iter: Option<usize>,
}

#[derive(Debug, Serialize)]
pub struct SolveReportFile {
    pub status: SolveStatus,
    #[serde(rename = "solved_T")]
    pub solved_t: f64,
    pub beta_trace: Vec<BetaStep>,
    pub rho: f64,
    pub q_bound: f64,
    pub ratios: Vec<f64>,
    pub residual_sup: f64,
    pub apriori_margin: Option<f64>,
}

impl From<&SolveReport> for SolveReportFile {
    fn from(r: &SolveReport) -> Self {
        Self {
            status: r.status,
            solved_t: r.solved_t,
            beta_trace: r.beta_trace.clone(),
            rho: r.rho_used,
            q_bound: r.q_bound,
            ratios: r.contraction_ratios.clone(),
            residual_sup: r.residual_sup,
            apriori_margin: r.apriori_margin,
        }
    }
}

fn positive(field: &str, v: f64) -> Result<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(Error::config(field, format!("must be positive and finite, got {v}")))
    }
}

fn matrix(field: &str, m: &[Vec<f64>], n: usize) -> Result<Vec<f64>> {
    if m.len() != n || m.iter().any(|r| r.len() != n) {
        return Err(Error::config(field, format!("expected a {n}x{n} matrix")));
    }
    Ok(m.iter().flatten().copied().collect())
}

fn frobenius(m: &[f64]) -> f64 {
    m.iter().map(|v| v * v).sum::<f64>().sqrt()
}

fn mat_vec(m: &[f64], v: &[f64], out: &mut [f64]) {
    let n = v.len();
    for i in 0..n {
        out[i] += (0..n).map(|j| m[i * n + j] * v[j]).sum::<f64>();
    }
}

/// Linear interpolation in a time table, constant outside.
fn table_lookup(times: &[f64], values: &[Vec<f64>], t: f64) -> Vec<f64> {
    if t <= times[0] {
        return values[0].clone();
    }
    if t >= times[times.len() - 1] {
        return values[values.len() - 1].clone();
    }
    let j = times.partition_point(|s| *s <= t) - 1;
    let w = (t - times[j]) / (times[j + 1] - times[j]);
    values[j]
        .iter()
        .zip(&values[j + 1])
        .map(|(a, b)| (1.0 - w) * a + w * b)
        .collect()
}

/// `g` and its Lipschitz constant for the linear right-hand sides.
fn linear_rhs(cfg: &RhsConfig, n: usize) -> Result<(SddeRhs, f64)> {
    match cfg {
        RhsConfig::Builtin(name) => match name.as_str() {
            "zero" => Ok((Arc::new(move |_, _, _| vec![0.0; n]), 0.0)),
            "growth" => Ok((Arc::new(|_, x, _| x.to_vec()), 1.0)),
            "negative_delayed" => Ok((Arc::new(|_, _, u| u.iter().map(|v| -v).collect()), 1.0)),
            other => Err(Error::config(
                "rhs.builtin",
                format!("unknown builtin `{other}` (expected zero, growth or negative_delayed)"),
            )),
        },
        RhsConfig::Affine { a, b, c } => {
            let a = matrix("rhs.affine.a", a, n)?;
            let b = matrix("rhs.affine.b", b, n)?;
            if c.len() != n {
                return Err(Error::config("rhs.affine.c", format!("expected {n} entries")));
            }
            let lip = frobenius(&a).max(frobenius(&b));
            let c = c.clone();
            Ok((
                Arc::new(move |_, x, u| {
                    let mut out = c.clone();
                    mat_vec(&a, x, &mut out);
                    mat_vec(&b, u, &mut out);
                    out
                }),
                lip,
            ))
        }
        RhsConfig::Table { a, b, times, values } => {
            let a = matrix("rhs.table.a", a, n)?;
            let b = matrix("rhs.table.b", b, n)?;
            if times.is_empty() || times.len() != values.len() {
                return Err(Error::config(
                    "rhs.table.times",
                    "needs as many times as value rows, at least one",
                ));
            }
            if times.windows(2).any(|w| !(w[1] > w[0])) {
                return Err(Error::config("rhs.table.times", "must be strictly increasing"));
            }
            if values.iter().any(|r| r.len() != n) {
                return Err(Error::config("rhs.table.values", format!("rows must have {n} entries")));
            }
            let lip = frobenius(&a).max(frobenius(&b));
            let (times, values) = (times.clone(), values.clone());
            Ok((
                Arc::new(move |t, x, u| {
                    let mut out = table_lookup(&times, &values, t);
                    mat_vec(&a, x, &mut out);
                    mat_vec(&b, u, &mut out);
                    out
                }),
                lip,
            ))
        }
        RhsConfig::Biology(_) | RhsConfig::Positioning(_) => unreachable!("handled by the caller"),
    }
}

fn build_delay(cfg: &DelayConfig, h: f64) -> Result<DelayFunctional> {
    match *cfg {
        DelayConfig::Constant { tau0 } => {
            DelayFunctional::constant(h, tau0).map_err(|e| Error::config("delay.constant.tau0", e.to_string()))
        }
        DelayConfig::StateValue { cap } => {
            DelayFunctional::state_value(h, cap).map_err(|e| Error::config("delay.state_value.cap", e.to_string()))
        }
        DelayConfig::Threshold {
            eps,
            k,
            x1,
            x2,
            ds,
            tol,
            component,
        } => {
            let spec = BiologySpec {
                eps,
                k,
                x1,
                x2,
                h,
                ds,
                ..BiologySpec::default()
            };
            DelayFunctional::threshold(
                h,
                ThresholdParams {
                    g: spec.rate(),
                    g_lip: spec.rate_lipschitz(),
                    eps,
                    k,
                    x1,
                    x2,
                    ds,
                    tol,
                    component,
                },
            )
        }
        DelayConfig::Echo {
            w,
            w_plus,
            c,
            alpha,
            tol,
            component,
        } => {
            let set = WAlphaSet::new(alpha, w, w_plus, c)?;
            if (set.h - h).abs() > 1e-12 * h.max(1.0) {
                return Err(Error::config(
                    "h",
                    format!("echo delay needs h = (2w + 2w_plus)/c = {}", set.h),
                ));
            }
            DelayFunctional::echo(set, tol, component, true)
        }
    }
}

fn load_phi(cfg: &ProblemConfig, base: &Path) -> Result<GridFunction> {
    let phi = match &cfg.phi {
        PhiConfig::Constant(v) => GridFunction::constant(-cfg.h, 0.0, cfg.dt, v)?,
        PhiConfig::Values(rows) => GridFunction::new(-cfg.h, 0.0, cfg.dt, rows)?,
        PhiConfig::Csv(p) => {
            let path = if p.is_absolute() { p.clone() } else { base.join(p) };
            let f = GridFunction::read_csv_path(&path)?;
            if (f.a() + cfg.h).abs() > 1e-9 || f.b().abs() > 1e-9 || (f.dt() - cfg.dt).abs() > 1e-12 * cfg.dt {
                return Err(Error::config("phi.csv", "grid must be [-h, 0] with step dt"));
            }
            f
        }
    };
    if phi.dim() != cfg.n {
        return Err(Error::config(
            "phi",
            format!("dimension {} does not match n = {}", phi.dim(), cfg.n),
        ));
    }
    Ok(phi)
}

fn options(cfg: &OptsConfig) -> Result<SolveOptions> {
    let mut o = SolveOptions::default();
    if let Some(v) = cfg.tol {
        o.tol = positive("opts.tol", v)?;
    }
    if let Some(v) = cfg.target_q {
        if !(v > 0.0 && v < 1.0) {
            return Err(Error::config("opts.target_q", "must lie in (0, 1)"));
        }
        o.target_q = v;
    }
    if let Some(v) = cfg.beta0 {
        o.beta0 = Some(positive("opts.beta0", v)?);
    }
    if let Some(v) = cfg.beta_max {
        o.beta_max = positive("opts.beta_max", v)?;
    }
    if let Some(v) = cfg.rho {
        o.rho = Some(positive("opts.rho", v)?);
    }
    if let Some(v) = cfg.max_iter {
        if v == 0 {
            return Err(Error::config("opts.max_iter", "must be at least 1"));
        }
        o.max_iter = v;
    }
    Ok(o)
}

/// Builds and solves the problem described by `cfg`.
pub fn solve_config(cfg: &ProblemConfig, base: &Path) -> Result<SolveReport> {
    if cfg.n == 0 {
        return Err(Error::config("n", "must be at least 1"));
    }
    positive("h", cfg.h)?;
    positive("T", cfg.t_end)?;
    positive("dt", cfg.dt)?;
    let opts = options(&cfg.opts)?;
    let phi = load_phi(cfg, base)?;
    match (&cfg.rhs, cfg.kind) {
        (RhsConfig::Biology(b), ProblemKind::Fde) => {
            if cfg.n != 2 {
                return Err(Error::config("n", "the biology model has n = 2"));
            }
            let spec = BiologySpec {
                mu: b.mu,
                x1: b.x1,
                x2: b.x2,
                eps: b.eps,
                k: b.k,
                q0: b.q0,
                gamma0: b.gamma0,
                d0: b.d0,
                h: cfg.h,
                ds: b.ds,
            };
            solve_fde(&spec.problem(phi, cfg.t_end)?, &opts)
        }
        (RhsConfig::Biology(_), ProblemKind::Sdde) => Err(Error::config("rhs.biology", "requires kind = fde")),
        (RhsConfig::Positioning(p), ProblemKind::Sdde) => {
            if cfg.n != 2 {
                return Err(Error::config("n", "the positioning model has n = 2"));
            }
            let spec = PositioningSpec {
                w: p.w,
                w_plus: p.w_plus,
                c: p.c,
                mu: p.mu,
                alpha: p.alpha,
                accel: Acceleration::ClampedLinear { gain: p.gain },
            };
            if (spec.h() - cfg.h).abs() > 1e-12 * cfg.h.max(1.0) {
                return Err(Error::config(
                    "h",
                    format!("positioning needs h = (2w + 2w_plus)/c = {}", spec.h()),
                ));
            }
            solve_sdde(&spec.problem(phi, cfg.t_end)?, &opts)
        }
        (RhsConfig::Positioning(_), ProblemKind::Fde) => Err(Error::config("rhs.positioning", "requires kind = sdde")),
        (rhs, kind) => {
            let (g, lip) = linear_rhs(rhs, cfg.n)?;
            let delay_cfg = cfg.delay.as_ref().ok_or_else(|| Error::config("delay", "missing"))?;
            let delay = build_delay(delay_cfg, cfg.h)?;
            let lg = match cfg.l_g {
                Some(l) if l >= lip * (1.0 - 1e-12) => l,
                Some(l) => {
                    return Err(Error::config("L_g", format!("{l} is below the matrix bound {lip}")));
                }
                None => lip,
            };
            match kind {
                ProblemKind::Sdde => solve_sdde(
                    &SddeProblem {
                        g,
                        lg,
                        delay,
                        phi,
                        t_end: cfg.t_end,
                    },
                    &opts,
                ),
                ProblemKind::Fde => {
                    // G(t, psi) = g(t, psi(0), psi(r(psi)))
                    let lip_r = delay.lip_hint();
                    let h = cfg.h;
                    let rhs: crate::picard_solver::FdeRhs = Arc::new(move |t, win| {
                        let r = delay.evaluate(win)?;
                        Ok(g(t, win.right_end(), &win.eval(r.value)?))
                    });
                    solve_fde(
                        &FdeProblem {
                            rhs,
                            l_of_beta: Arc::new(move |beta| lg * (2.0 * sobolev_constant(h) + beta * lip_r)),
                            phi,
                            t_end: cfg.t_end,
                        },
                        &opts,
                    )
                }
            }
        }
    }
}

fn read_config(path: &Path) -> Result<ProblemConfig> {
    let text = fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::config("config", e.to_string()))
}

fn solve(a: &SolveArgs) -> Result<i32> {
    let cfg = read_config(&a.config)?;
    let base = a.config.parent().unwrap_or(Path::new("."));
    let rep = solve_config(&cfg, base)?;
    ensure_dir(&a.out)?;
    rep.solution.write_csv_path(&a.out.join("solution.csv"))?;
    write_json(&a.out.join("report.json"), &SolveReportFile::from(&rep))?;
    println!(
        "status={:?} solved_T={} residual_sup={:.3e} rho={:.6e}",
        rep.status, rep.solved_t, rep.residual_sup, rep.rho_used
    );
    Ok(match rep.status {
        SolveStatus::Complete => EXIT_OK,
        SolveStatus::LipschitzBlowup => EXIT_BLOWUP,
    })
}

// ---------------------------------------------------------------------------
// project

fn project(a: &ProjectArgs) -> Result<i32> {
    positive("tol", a.tol)?;
    let phi = GridFunction::read_csv_path(&a.input)?;
    let (name, res) = match (a.beta, a.alpha) {
        (Some(beta), None) => {
            let set = VBetaSet::new(-phi.a(), positive("beta", beta)?)?.with_tol(a.tol);
            ("V_beta", set.project(&phi)?)
        }
        (None, Some(alpha)) => {
            let (w, wp, c) = (
                a.w.ok_or_else(|| Error::config("w", "missing"))?,
                a.wplus.ok_or_else(|| Error::config("wplus", "missing"))?,
                a.c.ok_or_else(|| Error::config("c", "missing"))?,
            );
            let set = WAlphaSet::new(alpha, w, wp, c)?.with_tol(a.tol);
            ("W_alpha", set.project(&phi)?)
        }
        _ => return Err(Error::config("beta", "give either --beta or --alpha/--w/--wplus/--c")),
    };
    res.projected.write_csv_path(&a.output)?;
    let line = serde_json::to_string(&kkt_report(name, &phi, &res)).map_err(|e| Error::Io(e.to_string()))?;
    println!("{line}");
    Ok(EXIT_OK)
}

// ---------------------------------------------------------------------------
// scenario

#[derive(Debug, Serialize)]
struct ScenarioReportFile<'a> {
    name: &'a str,
    pass: bool,
    verdicts: &'a [scenarios::Verdict],
    details: &'a serde_json::Value,
}

pub fn run_scenario(name: ScenarioName, dt: Option<f64>, t_end: Option<f64>) -> Result<ScenarioOutput> {
    if let Some(d) = dt {
        positive("dt", d)?;
    }
    if let Some(t) = t_end {
        positive("t-end", t)?;
    }
    match name {
        ScenarioName::Counterexample => {
            let solve_dts = dt.map(|d| vec![d]).unwrap_or_else(|| vec![1e-2, 1e-3]);
            scenarios::run_counterexample(&[1e-2, 1e-3, 1e-4], &solve_dts, t_end.unwrap_or(0.2))
        }
        ScenarioName::Classical => scenarios::run_classical(t_end.unwrap_or(1.0), dt.unwrap_or(1e-3)),
        ScenarioName::Positioning => scenarios::run_positioning(
            &PositioningSpec::default(),
            [0.1, 0.0],
            t_end.unwrap_or(5.0),
            dt.unwrap_or(1e-2),
            true,
        ),
        ScenarioName::Biology => scenarios::run_biology(
            &BiologySpec::default(),
            [1.0, 0.5],
            t_end.unwrap_or(5.0),
            dt.unwrap_or(1e-2),
            true,
        ),
    }
}

fn scenario(a: &ScenarioArgs) -> Result<i32> {
    let out = run_scenario(a.name, a.dt, a.t_end)?;
    ensure_dir(&a.out)?;
    for (name, traj) in &out.trajectories {
        traj.write_csv_path(&a.out.join(format!("{name}.csv")))?;
    }
    write_json(
        &a.out.join(format!("{}_report.json", out.name)),
        &ScenarioReportFile {
            name: out.name,
            pass: out.pass(),
            verdicts: &out.verdicts,
            details: &out.details,
        },
    )?;
    for v in &out.verdicts {
        println!(
            "{} {:<28} value={:.6e} threshold={:.6e}",
            if v.pass { "PASS" } else { "FAIL" },
            v.name,
            v.value,
            v.threshold
        );
    }
    Ok(if out.pass() { EXIT_OK } else { EXIT_ERROR })
}
