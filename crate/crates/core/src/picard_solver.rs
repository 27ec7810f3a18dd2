//! Projected Picard iteration in exponentially weighted `H^1` norms.
//!
//! The unknown is `y = x - phi_hat` on `[-h, T]`, where `phi_hat` is the
//! pre-history continued constantly by `phi(0)`. One Picard step evaluates the
//! right-hand side at every node `t_i >= 0` on the window `x_(t_i)`, projected
//! onto `V_beta` when its slopes exceed `beta`, and integrates from zero with
//! the trapezoid rule.

use std::collections::VecDeque;
use std::sync::Arc;

use rand::Rng;
use serde::Serialize;

use crate::convex_projection::{project_vbeta, MEMBERSHIP_SLACK};
use crate::delay_functionals::DelayFunctional;
use crate::error::{Error, Result};
use crate::grid_function::{norm, whole_cells, GridFunction, WindowView};
use crate::weighted_calculus::trial_rng;

/// `g(t, x, u)` for `x'(t) = g(t, x(t), x(t + r(x_(t))))`.
pub type SddeRhs = Arc<dyn Fn(f64, &[f64], &[f64]) -> Vec<f64> + Send + Sync>;
/// `G(t, psi)` for `x'(t) = G(t, x_(t))`.
pub type FdeRhs = Arc<dyn Fn(f64, &WindowView<'_>) -> Result<Vec<f64>> + Send + Sync>;
/// Almost-uniform Lipschitz constant of `G` on `V_beta`.
pub type LipschitzOfBeta = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

pub const RHO_FLOOR: f64 = 1e-6;
const RHO_REL_TOL: f64 = 1e-6;
const UNDERFLOW_WARN: f64 = 1e-280;
const BETA_FLOOR: f64 = 1.0;
const SLOPE_MARGIN: f64 = 1e-9;
const RATIO_NOISE: f64 = 1e-13;

#[derive(Clone)]
pub struct SddeProblem {
    pub g: SddeRhs,
    /// Lipschitz constant of `g` in `(x, u)`, in the sum of norms.
    pub lg: f64,
    pub delay: DelayFunctional,
    pub phi: GridFunction,
    pub t_end: f64,
}

#[derive(Clone)]
pub struct FdeProblem {
    pub rhs: FdeRhs,
    pub l_of_beta: LipschitzOfBeta,
    pub phi: GridFunction,
    pub t_end: f64,
}

/// What the solver needs from an equation.
pub trait PicardModel {
    fn phi(&self) -> &GridFunction;
    fn t_end(&self) -> f64;
    /// Right-hand side at `t >= 0`, given the current state `x(t)` and the
    /// (possibly projected) window.
    fn rhs(&self, t: f64, x: &[f64], window: &WindowView<'_>) -> Result<Vec<f64>>;
    /// Contraction bound `q(rho)` of the Picard map on `V_beta`.
    fn contraction_bound(&self, beta: f64, rho: f64) -> f64;

    fn h(&self) -> f64 {
        -self.phi().a()
    }

    /// Derivative forced at `t = 0` by the pre-history.
    fn initial_slope(&self) -> Result<Vec<f64>> {
        let phi = self.phi();
        self.rhs(0.0, phi.node(phi.cells()), &phi.as_window())
    }
}

/// `q(rho) = L (1/rho + (2 sqrt(h) + beta lip_r + 1/sqrt(h)) / sqrt(2 rho))`.
pub fn sdde_contraction(l: f64, h: f64, beta: f64, lip_r: f64, rho: f64) -> f64 {
    l * (1.0 / rho + (2.0 * h.sqrt() + beta * lip_r + 1.0 / h.sqrt()) / (2.0 * rho).sqrt())
}

/// `q(rho) = L (1/rho + 1/sqrt(2 rho))`.
pub fn fde_contraction(l: f64, rho: f64) -> f64 {
    l * (1.0 / rho + 1.0 / (2.0 * rho).sqrt())
}

impl PicardModel for SddeProblem {
    fn phi(&self) -> &GridFunction {
        &self.phi
    }

    fn t_end(&self) -> f64 {
        self.t_end
    }

    fn rhs(&self, t: f64, x: &[f64], window: &WindowView<'_>) -> Result<Vec<f64>> {
        let r = self.delay.evaluate(window)?;
        let u = window.eval(r.value)?;
        Ok((self.g)(t, x, &u))
    }

    fn contraction_bound(&self, beta: f64, rho: f64) -> f64 {
        sdde_contraction(self.lg, self.h(), beta, self.delay.lip_hint(), rho)
    }
}

impl PicardModel for FdeProblem {
    fn phi(&self) -> &GridFunction {
        &self.phi
    }

    fn t_end(&self) -> f64 {
        self.t_end
    }

    fn rhs(&self, t: f64, _x: &[f64], window: &WindowView<'_>) -> Result<Vec<f64>> {
        (self.rhs)(t, window)
    }

    fn contraction_bound(&self, beta: f64, rho: f64) -> f64 {
        fde_contraction((self.l_of_beta)(beta), rho)
    }
}

/// Smallest `rho >= RHO_FLOOR` with `q(rho) <= target_q`, by bisection on the
/// decreasing function `q`.
pub fn choose_rho_for<Q: Fn(f64) -> f64>(q: Q, target_q: f64) -> f64 {
    if q(RHO_FLOOR) <= target_q {
        return RHO_FLOOR;
    }
    let mut lo = RHO_FLOOR;
    let mut hi = 1.0;
    while q(hi) > target_q {
        lo = hi;
        hi *= 2.0;
    }
    while hi - lo > RHO_REL_TOL * hi {
        let mid = 0.5 * (lo + hi);
        if q(mid) <= target_q {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

pub fn choose_rho(l: f64, h: f64, beta: f64, lip_r: f64, target_q: f64) -> f64 {
    choose_rho_for(|rho| sdde_contraction(l, h, beta, lip_r, rho), target_q)
}

#[derive(Debug, Clone)]
pub struct SolveOptions {
    pub tol: f64,
    pub target_q: f64,
    pub beta0: Option<f64>,
    pub beta_max: f64,
    pub rho: Option<f64>,
    pub max_iter: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            target_q: 0.5,
            beta0: None,
            beta_max: 1e4,
            rho: None,
            max_iter: 500,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SolveStatus {
    Complete,
    LipschitzBlowup,
}

#[derive(Debug, Clone, Serialize)]
pub struct BetaStep {
    pub beta: f64,
    pub t_beta: f64,
    pub iterations: usize,
    pub rho: f64,
}

#[derive(Debug, Clone)]
pub struct SolveReport {
    /// `x` on `[-h, solved_t]`.
    pub solution: GridFunction,
    pub solved_t: f64,
    pub status: SolveStatus,
    pub beta_trace: Vec<BetaStep>,
    pub rho_used: f64,
    pub q_bound: f64,
    pub contraction_ratios: Vec<f64>,
    pub residual_sup: f64,
    pub apriori_margin: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct PicardOutcome {
    /// `y = x - phi_hat` on `[-h, T]`.
    pub y: GridFunction,
    pub iterations: usize,
    pub ratios: Vec<f64>,
    /// Nodes whose window was projected in the last sweep.
    pub projected_nodes: usize,
}

/// `phi_hat` on `[-h, T]`.
pub fn phi_hat<M: PicardModel + ?Sized>(model: &M) -> Result<GridFunction> {
    model.phi().extend_constant(model.t_end())
}

fn check_model<M: PicardModel + ?Sized>(model: &M) -> Result<()> {
    let phi = model.phi();
    if !(phi.b().abs() <= 1e-12 * phi.a().abs().max(1.0)) || phi.cells() == 0 {
        return Err(Error::config("phi", "pre-history must live on [-h, 0] with h > 0"));
    }
    if whole_cells(model.t_end(), phi.dt()).is_none_or(|c| c == 0) {
        return Err(Error::config(
            "T",
            format!(
                "horizon {} is not a positive multiple of dt = {}",
                model.t_end(),
                phi.dt()
            ),
        ));
    }
    Ok(())
}

/// Sliding maximum of cell slope norms over the `w` cells ending at each node.
fn window_slope_max(x: &GridFunction, w: usize) -> Vec<f64> {
    let slopes = x.cell_slope_norms();
    let mut out = vec![0.0; x.node_count()];
    let mut dq: VecDeque<usize> = VecDeque::new();
    for (i, slot) in out.iter_mut().enumerate().skip(1) {
        let c = i - 1;
        while dq.back().is_some_and(|&j| slopes[j] <= slopes[c]) {
            dq.pop_back();
        }
        dq.push_back(c);
        while dq.front().is_some_and(|&j| j + w < i) {
            dq.pop_front();
        }
        *slot = slopes[*dq.front().expect("non-empty")];
    }
    out
}

struct Sweep {
    image: GridFunction,
    projected: usize,
}

fn apply_inner<M: PicardModel + ?Sized>(model: &M, y: &GridFunction, hat: &GridFunction, beta: f64) -> Result<Sweep> {
    let x = y.add(hat)?;
    let m = model.phi().cells();
    let dim = x.dim();
    let lips = window_slope_max(&x, m);
    let mut rhs = vec![0.0; x.values().len()];
    let mut projected = 0;
    for i in m..=x.cells() {
        let t = x.node_time(i);
        let view = x.window_at_node(i, m);
        let value = if lips[i] <= beta + MEMBERSHIP_SLACK {
            model.rhs(t, x.node(i), &view)?
        } else {
            projected += 1;
            let p = project_vbeta(&view.to_grid_function(), beta, 1e-10)?.projected;
            model.rhs(t, x.node(i), &p.as_window())?
        };
        if value.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: value.len(),
            });
        }
        for (k, v) in value.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::NonFiniteValue { node: i, component: k });
            }
        }
        rhs[i * dim..(i + 1) * dim].copy_from_slice(&value);
    }
    let image = GridFunction::from_flat(x.a(), x.b(), x.dt(), dim, rhs)?.integrate_from_zero()?;
    Ok(Sweep { image, projected })
}

/// One Picard step `y -> F_beta y`.
pub fn picard_apply<M: PicardModel + ?Sized>(y: &GridFunction, model: &M, beta: f64) -> Result<GridFunction> {
    check_model(model)?;
    let hat = phi_hat(model)?;
    Ok(apply_inner(model, y, &hat, beta)?.image)
}

/// Norm of `f` on `[0, T]` in the `rho`-weighted `H^1` norm.
pub fn weighted_norm_on_horizon(f: &GridFunction, h_cells: usize, rho: f64) -> f64 {
    f.restrict_nodes(h_cells, f.cells()).weighted_h1_norm(rho)
}

/// Iterates `F_beta` from `init` (zero if `None`) until the a-posteriori bound
/// `q/(1-q) |y_{k+1} - y_k|_rho <= tol` holds and the sup-norm step is below
/// `tol`. The second test guards late times, which the weight all but hides.
pub fn picard_solve_projected<M: PicardModel + ?Sized>(
    model: &M,
    beta: f64,
    rho: f64,
    tol: f64,
    max_iter: usize,
    init: Option<&GridFunction>,
) -> Result<PicardOutcome> {
    check_model(model)?;
    let hat = phi_hat(model)?;
    let m = model.phi().cells();
    let q = model.contraction_bound(beta, rho).max(1e-300);
    let weighted_stop = if q < 1.0 { tol * (1.0 - q) / q } else { tol };
    if (-2.0 * rho * model.t_end()).exp() < UNDERFLOW_WARN {
        log::warn!(
            "weight exp(-2 rho T) underflows (rho = {rho}, T = {}); weighted norms ignore late times",
            model.t_end()
        );
    }
    let mut y = match init {
        Some(y0) => {
            let mut v = y0.values().to_vec();
            v[..(m + 1) * hat.dim()].iter_mut().for_each(|e| *e = 0.0);
            hat.with_values(hat.dim(), v)
        }
        None => hat.with_values(hat.dim(), vec![0.0; hat.values().len()]),
    };
    let mut ratios = Vec::new();
    let mut prev_diff: Option<f64> = None;
    let mut last_diff = f64::INFINITY;
    for iter in 1..=max_iter {
        let sweep = apply_inner(model, &y, &hat, beta)?;
        let step = sweep.image.sub(&y)?;
        let diff = weighted_norm_on_horizon(&step, m, rho);
        let sup = step.sup_norm();
        let scale = weighted_norm_on_horizon(&sweep.image, m, rho).max(1.0);
        if let Some(p) = prev_diff {
            if p > RATIO_NOISE * scale {
                ratios.push(diff / p);
            }
        }
        y = sweep.image;
        last_diff = diff;
        if diff <= weighted_stop && sup <= tol * y.sup_norm().max(1.0) {
            return Ok(PicardOutcome {
                y,
                iterations: iter,
                ratios,
                projected_nodes: sweep.projected,
            });
        }
        prev_diff = Some(diff);
    }
    Err(Error::MaxIterExceeded {
        iterations: max_iter,
        last_diff,
    })
}

/// First node time at which a slope of `x` on `[0, T]` reaches `beta`.
fn first_saturation(x: &GridFunction, h_cells: usize, beta: f64) -> Option<f64> {
    let slopes = x.cell_slope_norms();
    (h_cells..x.cells())
        .find(|&c| slopes[c] >= beta * (1.0 - SLOPE_MARGIN))
        .map(|c| x.node_time(c))
}

fn solve_with_continuation<M: PicardModel + ?Sized>(model: &M, opts: &SolveOptions) -> Result<SolveReport> {
    check_model(model)?;
    if !(opts.tol > 0.0 && opts.target_q > 0.0 && opts.target_q < 1.0) {
        return Err(Error::config("opts", "need tol > 0 and 0 < target_q < 1"));
    }
    let hat = phi_hat(model)?;
    let m = model.phi().cells();
    let mut beta = match opts.beta0 {
        Some(b) if b > 0.0 => b,
        Some(b) => return Err(Error::config("beta0", format!("must be positive, got {b}"))),
        None => {
            let b = 1.25 * model.phi().lip_seminorm().max(norm(&model.initial_slope()?));
            if b > 0.0 {
                b
            } else {
                BETA_FLOOR
            }
        }
    };
    let mut trace = Vec::new();
    let mut last: Option<(PicardOutcome, f64, f64)> = None;
    let mut stable_t = 0.0;
    while beta <= opts.beta_max {
        let rho = opts
            .rho
            .unwrap_or_else(|| choose_rho_for(|r| model.contraction_bound(beta, r), opts.target_q));
        let out = picard_solve_projected(model, beta, rho, opts.tol, opts.max_iter, None)?;
        let x = out.y.add(&hat)?;
        let q = model.contraction_bound(beta, rho);
        match first_saturation(&x, m, beta) {
            None => {
                trace.push(BetaStep {
                    beta,
                    t_beta: model.t_end(),
                    iterations: out.iterations,
                    rho,
                });
                return Ok(SolveReport {
                    solved_t: model.t_end(),
                    solution: x,
                    status: SolveStatus::Complete,
                    beta_trace: trace,
                    rho_used: rho,
                    q_bound: q,
                    contraction_ratios: out.ratios,
                    residual_sup: f64::NAN,
                    apriori_margin: None,
                });
            }
            Some(t_beta) => {
                log::info!("beta = {beta}: slope bound reached at t = {t_beta}, doubling");
                trace.push(BetaStep {
                    beta,
                    t_beta,
                    iterations: out.iterations,
                    rho,
                });
                stable_t = t_beta;
                last = Some((out, rho, q));
                beta *= 2.0;
            }
        }
    }
    let (out, rho, q) = match last {
        Some(l) => l,
        None => {
            return Err(Error::config(
                "beta_max",
                format!("beta_max {} is below beta0 {beta}", opts.beta_max),
            ))
        }
    };
    let x = out.y.add(&hat)?;
    let end = x.node_index(stable_t).unwrap_or(m);
    let solution = x.restrict_nodes(0, end.max(m));
    Ok(SolveReport {
        solution,
        solved_t: stable_t,
        status: SolveStatus::LipschitzBlowup,
        beta_trace: trace,
        rho_used: rho,
        q_bound: q,
        contraction_ratios: out.ratios,
        residual_sup: f64::NAN,
        apriori_margin: None,
    })
}

/// Solves an SDDE on `[0, T]` with beta-continuation, then fills in the
/// residual and the a-priori margin.
pub fn solve_sdde(problem: &SddeProblem, opts: &SolveOptions) -> Result<SolveReport> {
    let mut rep = solve_with_continuation(problem, opts)?;
    if rep.solved_t > 0.0 {
        rep.residual_sup = residual(&rep.solution, problem)?;
    } else {
        rep.residual_sup = 0.0;
    }
    rep.apriori_margin = Some(apriori_bound_check(&rep.solution, problem)?.margin);
    Ok(rep)
}

pub fn solve_fde(problem: &FdeProblem, opts: &SolveOptions) -> Result<SolveReport> {
    let mut rep = solve_with_continuation(problem, opts)?;
    rep.residual_sup = if rep.solved_t > 0.0 {
        residual(&rep.solution, problem)?
    } else {
        0.0
    };
    Ok(rep)
}

/// Max over interior nodes of `|central difference - rhs|`, with unprojected
/// windows.
pub fn residual<M: PicardModel + ?Sized>(x: &GridFunction, model: &M) -> Result<f64> {
    let m = model.phi().cells();
    let dt = x.dt();
    let mut worst: f64 = 0.0;
    for i in m + 1..x.cells() {
        let view = x.window_at_node(i, m);
        let g = model.rhs(x.node_time(i), x.node(i), &view)?;
        let (l, r) = (x.node(i - 1), x.node(i + 1));
        let err = (0..x.dim())
            .map(|k| ((r[k] - l[k]) / (2.0 * dt) - g[k]).powi(2))
            .sum::<f64>()
            .sqrt();
        worst = worst.max(err);
    }
    Ok(worst)
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct AprioriCheck {
    pub margin: f64,
    pub bound_at_end: f64,
    pub pass: bool,
}

/// Checks `|x(t)| <= (|phi|_inf + int_0^t |g(s, 0, 0)| ds) e^{2 L t}` on
/// every node of `[0, T']`.
pub fn apriori_bound_check(x: &GridFunction, problem: &SddeProblem) -> Result<AprioriCheck> {
    let m = problem.phi.cells();
    let dim = x.dim();
    let zero = vec![0.0; dim];
    let base = problem.phi.sup_norm();
    let mut integral = 0.0;
    let mut prev = norm(&(problem.g)(0.0, &zero, &zero));
    let mut margin = f64::INFINITY;
    let mut bound = base;
    for i in m..=x.cells() {
        let t = x.node_time(i);
        if i > m {
            let cur = norm(&(problem.g)(t, &zero, &zero));
            integral += 0.5 * x.dt() * (prev + cur);
            prev = cur;
        }
        bound = (base + integral) * (2.0 * problem.lg * t).exp();
        margin = margin.min(bound - norm(x.node(i)));
    }
    Ok(AprioriCheck {
        margin,
        bound_at_end: bound,
        pass: margin >= -1e-9 * bound,
    })
}

/// Largest node `T_eps` such that for all nodes `t` in `[0, T_eps]`
/// `sup_s |x(t+s) - phi(s)| + |x'(t) - g_0| <= eps`, with forward
/// differences for `x'`. Returns 0 if the first node already fails.
pub fn permanence_teps<M: PicardModel + ?Sized>(x: &GridFunction, model: &M, eps: f64) -> Result<f64> {
    let phi = model.phi();
    let m = phi.cells();
    let g0 = model.initial_slope()?;
    let dim = x.dim();
    let mut t_eps = 0.0;
    for i in m..=x.cells() {
        let mut shift: f64 = 0.0;
        for j in 0..=m {
            let (a, b) = (x.node(i - m + j), phi.node(j));
            shift = shift.max(norm(&a.iter().zip(b).map(|(p, q)| p - q).collect::<Vec<_>>()));
        }
        let (lo, hi) = if i < x.cells() { (i, i + 1) } else { (i - 1, i) };
        let slope_dev = (0..dim)
            .map(|k| ((x.node(hi)[k] - x.node(lo)[k]) / x.dt() - g0[k]).powi(2))
            .sum::<f64>()
            .sqrt();
        if shift + slope_dev > eps {
            break;
        }
        t_eps = x.node_time(i);
    }
    Ok(t_eps)
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct DependenceResult {
    pub sup_diff: f64,
    pub data_diff: f64,
    pub ratio: f64,
}

/// Solves with pre-histories `phi` and `psi` and compares on the common range.
pub fn continuous_dependence_study(
    problem: &SddeProblem,
    phi: &GridFunction,
    psi: &GridFunction,
    opts: &SolveOptions,
) -> Result<DependenceResult> {
    let mut a = problem.clone();
    a.phi = phi.clone();
    let mut b = problem.clone();
    b.phi = psi.clone();
    let ra = solve_sdde(&a, opts)?;
    let rb = solve_sdde(&b, opts)?;
    let m = phi.cells();
    let end = ra.solution.cells().min(rb.solution.cells());
    let sup_diff = ra
        .solution
        .restrict_nodes(m, end)
        .sup_distance(&rb.solution.restrict_nodes(m, end))?;
    let data_diff = phi.sup_distance(psi)?;
    Ok(DependenceResult {
        sup_diff,
        data_diff,
        ratio: if data_diff > 0.0 { sup_diff / data_diff } else { 0.0 },
    })
}

/// Random bounded start for uniqueness checks, zero on `[-h, 0]`.
pub fn random_initial_iterate<M: PicardModel + ?Sized>(model: &M, amplitude: f64, seed: u64) -> Result<GridFunction> {
    let hat = phi_hat(model)?;
    let m = model.phi().cells();
    let mut rng = trial_rng(seed, 0);
    let dim = hat.dim();
    let values = (0..hat.values().len())
        .map(|j| {
            if j < (m + 1) * dim {
                0.0
            } else {
                rng.random_range(-amplitude..=amplitude)
            }
        })
        .collect();
    Ok(hat.with_values(dim, values))
}
