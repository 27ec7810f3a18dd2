//! Delay functionals `r: H^1(-h, 0; R^n) -> [-h, 0]`.
//!
//! Threshold and echo delays compute an elapsed time `s* in [0, h]` and return
//! `-s*`, so that `x(t + r) = x(t - s*)`.

use std::fmt;
use std::sync::Arc;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::convex_projection::{project_walpha, ConvexSet, VBetaSet, WAlphaSet};
use crate::error::{Error, Result};
use crate::grid_function::{norm, GridFunction, WindowView};
use crate::weighted_calculus::{sobolev_constant, trial_rng};

/// Maturation rate `g(y, p)`.
pub type RateFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

const RANGE_SLACK: f64 = 1e-12;
const ECHO_MAX_ITER: usize = 100_000;

#[derive(Clone)]
pub struct ThresholdParams {
    pub g: RateFn,
    /// Lipschitz constant of `g` in each argument.
    pub g_lip: f64,
    pub eps: f64,
    pub k: f64,
    pub x1: f64,
    pub x2: f64,
    /// RK4 step; `None` means a quarter of the window step.
    pub ds: Option<f64>,
    pub tol: f64,
    /// Component of the window fed to `g` as `p`.
    pub component: usize,
}

impl fmt::Debug for ThresholdParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ThresholdParams")
            .field("g_lip", &self.g_lip)
            .field("eps", &self.eps)
            .field("k", &self.k)
            .field("x1", &self.x1)
            .field("x2", &self.x2)
            .field("ds", &self.ds)
            .field("tol", &self.tol)
            .field("component", &self.component)
            .finish()
    }
}

#[derive(Debug, Clone)]
pub struct EchoParams {
    pub set: WAlphaSet,
    pub tol: f64,
    pub component: usize,
    /// Project the window onto `W_alpha` before solving.
    pub project: bool,
}

#[derive(Debug, Clone)]
pub enum DelayKind {
    Constant { tau0: f64 },
    StateValue { cap: f64 },
    Threshold(ThresholdParams),
    Echo(EchoParams),
}

#[derive(Debug, Clone, Copy)]
pub enum ValiditySet {
    All,
    VBeta(VBetaSet),
    WAlpha(WAlphaSet),
}

#[derive(Debug, Clone)]
pub struct DelayFunctional {
    kind: DelayKind,
    h: f64,
    lip_hint: f64,
    validity: ValiditySet,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DelayValue {
    pub value: f64,
    /// The raw value left `[-h, 0]` and was clamped.
    pub clamped: bool,
}

/// Sampled path of the threshold ODE together with the crossing time.
#[derive(Debug, Clone)]
pub struct ThresholdPath {
    pub s_star: f64,
    pub s: Vec<f64>,
    pub y: Vec<f64>,
}

impl DelayFunctional {
    pub fn constant(h: f64, tau0: f64) -> Result<Self> {
        if !(tau0 >= -h && tau0 <= 0.0) {
            return Err(Error::OutOfRange {
                value: tau0,
                lo: -h,
                hi: 0.0,
            });
        }
        Ok(Self {
            kind: DelayKind::Constant { tau0 },
            h,
            lip_hint: 0.0,
            validity: ValiditySet::All,
        })
    }

    /// `r(phi) = -min{|phi(0)|, cap}`. Point evaluation costs the Sobolev
    /// constant, and `min`, `|.|` are 1-Lipschitz.
    pub fn state_value(h: f64, cap: f64) -> Result<Self> {
        if !(cap > 0.0 && cap <= h) {
            return Err(Error::OutOfRange {
                value: cap,
                lo: 0.0,
                hi: h,
            });
        }
        Ok(Self {
            kind: DelayKind::StateValue { cap },
            h,
            lip_hint: sobolev_constant(h),
            validity: ValiditySet::All,
        })
    }

    pub fn threshold(h: f64, params: ThresholdParams) -> Result<Self> {
        let ThresholdParams {
            eps, k, x1, x2, tol, ..
        } = params;
        if !(eps > 0.0 && eps <= k) {
            return Err(Error::config(
                "threshold.eps",
                format!("need 0 < eps <= K, got eps={eps}, K={k}"),
            ));
        }
        if !(x1 < x2) {
            return Err(Error::config("threshold.x1", format!("need x1 < x2, got {x1} >= {x2}")));
        }
        if h < (x2 - x1) / eps * (1.0 - 1e-12) {
            return Err(Error::config(
                "threshold.h",
                format!("window {h} shorter than (x2 - x1)/eps = {}", (x2 - x1) / eps),
            ));
        }
        if !(tol > 0.0) || params.ds.is_some_and(|d| !(d > 0.0)) {
            return Err(Error::config("threshold.tol", "tolerances and steps must be positive"));
        }
        let lip_hint = threshold_constant(params.g_lip, h) / eps;
        Ok(Self {
            kind: DelayKind::Threshold(params),
            h,
            lip_hint,
            validity: ValiditySet::All,
        })
    }

    /// Echo delay on `W_alpha`; the window length is `(2w + 2w_plus)/c`.
    pub fn echo(set: WAlphaSet, tol: f64, component: usize, project: bool) -> Result<Self> {
        if !(tol > 0.0) {
            return Err(Error::config("echo.tol", "must be positive"));
        }
        let h = set.h;
        Ok(Self {
            kind: DelayKind::Echo(EchoParams {
                set,
                tol,
                component,
                project,
            }),
            h,
            lip_hint: 2.0 / set.alpha * sobolev_constant(h),
            validity: ValiditySet::WAlpha(set),
        })
    }

    pub fn kind(&self) -> &DelayKind {
        &self.kind
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    /// Claimed Lipschitz constant with respect to the `H^1(-h, 0)` norm,
    /// valid on [`Self::validity_set`].
    pub fn lip_hint(&self) -> f64 {
        self.lip_hint
    }

    pub fn validity_set(&self) -> ValiditySet {
        self.validity
    }

    pub fn evaluate(&self, window: &WindowView<'_>) -> Result<DelayValue> {
        let raw = match &self.kind {
            DelayKind::Constant { tau0 } => *tau0,
            DelayKind::StateValue { cap } => -norm(window.right_end()).min(*cap),
            DelayKind::Threshold(p) => {
                let psi = |u: f64| window.eval_component(u, p.component);
                -threshold_crossing(p, self.h, window.dt(), psi, None)?
            }
            DelayKind::Echo(p) => {
                let phi = window.component_grid(p.component);
                let phi = if p.project && !p.set.contains(&phi) {
                    project_walpha(&phi, &p.set)?.projected
                } else {
                    phi
                };
                -echo_fixed_point(&phi, &p.set, p.tol)?.0
            }
        };
        Ok(self.clamp(raw))
    }

    /// Evaluates on a standalone function over `[-h, 0]`.
    pub fn evaluate_grid(&self, phi: &GridFunction) -> Result<DelayValue> {
        self.evaluate(&phi.as_window())
    }

    /// Full threshold path for a scalar profile `psi` on `[-h, 0]`.
    pub fn threshold_path(&self, window: &WindowView<'_>) -> Result<ThresholdPath> {
        let DelayKind::Threshold(p) = &self.kind else {
            return Err(Error::config("delay", "not a threshold delay"));
        };
        let mut path = ThresholdPath {
            s_star: 0.0,
            s: Vec::new(),
            y: Vec::new(),
        };
        let psi = |u: f64| window.eval_component(u, p.component);
        path.s_star = threshold_crossing(p, self.h, window.dt(), psi, Some((&mut path.s, &mut path.y)))?;
        Ok(path)
    }

    fn clamp(&self, raw: f64) -> DelayValue {
        let slack = RANGE_SLACK * self.h.max(1.0);
        if raw > 0.0 || raw < -self.h {
            let clamped = raw > slack || raw < -self.h - slack;
            DelayValue {
                value: raw.clamp(-self.h, 0.0),
                clamped,
            }
        } else {
            DelayValue {
                value: raw,
                clamped: false,
            }
        }
    }
}

/// Constant `C` in `eps |r(phi) - r(psi)| <= C |phi - psi|_{L2}`:
/// Gronwall gives `|y_phi - y_psi| <= L sqrt(t) e^{Lt} |phi - psi|`, which is
/// integrated over `[0, h]` and added to the direct term `L sqrt(h)`.
pub fn threshold_constant(g_lip: f64, h: f64) -> f64 {
    g_lip * g_lip * h.powf(1.5) * (g_lip * h).exp() + g_lip * h.sqrt()
}

fn checked_rate(p: &ThresholdParams, y: f64, q: f64) -> Result<f64> {
    let v = (p.g)(y, q);
    let slack = 1e-12 * p.k.abs().max(1.0);
    if !(v >= p.eps - slack && v <= p.k + slack) {
        return Err(Error::GBoundsViolated {
            value: v,
            eps: p.eps,
            k: p.k,
        });
    }
    Ok(v)
}

fn rk4_step<P>(p: &ThresholdParams, psi: &P, s: f64, y: f64, ds: f64) -> Result<f64>
where
    P: Fn(f64) -> Result<f64>,
{
    let f = |s: f64, y: f64| -> Result<f64> { Ok(-checked_rate(p, y, psi(-s)?)?) };
    let k1 = f(s, y)?;
    let k2 = f(s + 0.5 * ds, y + 0.5 * ds * k1)?;
    let k3 = f(s + 0.5 * ds, y + 0.5 * ds * k2)?;
    let k4 = f(s + ds, y + ds * k3)?;
    Ok(y + ds / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4))
}

/// Integrates `y' = -g(y, psi(-s))`, `y(0) = x2` until `y <= x1` and returns
/// the crossing time, refined by bisection on the step length of the last step.
fn threshold_crossing<P>(
    p: &ThresholdParams,
    h: f64,
    window_dt: f64,
    psi: P,
    mut trace: Option<(&mut Vec<f64>, &mut Vec<f64>)>,
) -> Result<f64>
where
    P: Fn(f64) -> Result<f64>,
{
    let ds_req = p.ds.unwrap_or(window_dt / 4.0);
    let steps = (h / ds_req).ceil().max(1.0) as usize;
    let ds = h / steps as f64;
    let mut y = p.x2;
    let mut record = |s: f64, y: f64| {
        if let Some((ss, ys)) = trace.as_mut() {
            ss.push(s);
            ys.push(y);
        }
    };
    record(0.0, y);
    for i in 0..steps {
        let s = i as f64 * ds;
        let next = rk4_step(p, &psi, s, y, ds)?;
        if next <= p.x1 {
            let (mut lo, mut hi) = (0.0, ds);
            while hi - lo > p.tol {
                let mid = 0.5 * (lo + hi);
                if rk4_step(p, &psi, s, y, mid)? <= p.x1 {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            let s_star = s + hi;
            record(s_star, p.x1);
            return Ok(s_star);
        }
        y = next;
        record(s + ds, y);
    }
    // boundary crossing at s = h, up to rounding of the integrator
    if y - p.x1 <= 1e-10 * (p.x2 - p.x1).max(1.0) {
        return Ok(h);
    }
    Err(Error::NoCrossing { s_max: h, y_end: y })
}

/// Solves `c s = phi(-s) + phi(0) + 2w` by fixed-point iteration from `s = 0`;
/// returns `(s, iterations)`.
pub fn echo_fixed_point(phi: &GridFunction, set: &WAlphaSet, tol: f64) -> Result<(f64, usize)> {
    let h = -phi.a();
    let window = phi.as_window();
    let right = window.right_end()[0];
    let mut s = 0.0;
    for iter in 1..=ECHO_MAX_ITER {
        let next = (window.eval_component(-s, 0)? + right + 2.0 * set.w) / set.c;
        if !(next >= -RANGE_SLACK && next <= h + RANGE_SLACK) {
            return Err(Error::NonConvergence {
                what: "echo fixed point left [0, h]",
                iterations: iter,
                residual: next,
            });
        }
        let next = next.clamp(0.0, h);
        if (next - s).abs() < tol {
            return Ok((next, iter));
        }
        s = next;
    }
    Err(Error::NonConvergence {
        what: "echo fixed point",
        iterations: ECHO_MAX_ITER,
        residual: f64::NAN,
    })
}

/// Random windows on `[-h, 0]`.
pub trait WindowSampler {
    fn sample(&self, rng: &mut ChaCha8Rng) -> GridFunction;
}

/// Random walks with slopes in the `beta` ball.
#[derive(Debug, Clone, Copy)]
pub struct VBetaSampler {
    pub h: f64,
    pub dt: f64,
    pub dim: usize,
    pub beta: f64,
    pub amplitude: f64,
}

impl WindowSampler for VBetaSampler {
    fn sample(&self, rng: &mut ChaCha8Rng) -> GridFunction {
        let cells = (self.h / self.dt).round() as usize;
        let mut values = Vec::with_capacity((cells + 1) * self.dim);
        let mut cur: Vec<f64> = (0..self.dim)
            .map(|_| rng.random_range(-self.amplitude..=self.amplitude))
            .collect();
        values.extend_from_slice(&cur);
        let speed = rng.random_range(0.0..=1.0) * self.beta;
        for _ in 0..cells {
            let dir: Vec<f64> = (0..self.dim).map(|_| rng.random_range(-1.0..=1.0)).collect();
            let len = norm(&dir).max(1.0);
            for k in 0..self.dim {
                cur[k] += self.dt * speed * dir[k] / len;
            }
            values.extend_from_slice(&cur);
        }
        GridFunction::from_flat(-self.h, 0.0, self.dt, self.dim, values).expect("aligned sampler grid")
    }
}

/// Clamped random walks inside `W_alpha`.
#[derive(Debug, Clone, Copy)]
pub struct WAlphaSampler {
    pub set: WAlphaSet,
    pub dt: f64,
}

impl WindowSampler for WAlphaSampler {
    fn sample(&self, rng: &mut ChaCha8Rng) -> GridFunction {
        let h = self.set.h;
        let cells = (h / self.dt).round() as usize;
        let (lo, hi, cap) = (self.set.lower(), self.set.upper(), self.set.slope_bound());
        let mut v = rng.random_range(lo..=hi);
        let mut values = vec![v];
        let drift = rng.random_range(-cap..=cap);
        for _ in 0..cells {
            let slope = (drift + rng.random_range(-cap..=cap)).clamp(-cap, cap);
            v = (v + self.dt * slope).clamp(lo, hi);
            values.push(v);
        }
        GridFunction::from_flat(-h, 0.0, self.dt, 1, values).expect("aligned sampler grid")
    }
}

#[derive(Debug, Clone)]
pub struct EmpiricalLipschitz {
    pub max_ratio: f64,
    pub pairs: usize,
    pub witness_pair: Option<(GridFunction, GridFunction)>,
}

/// Largest `|r(phi) - r(psi)| / |phi - psi|_{H^1}` over sampled pairs. The
/// second window of each pair is a random convex combination with a fresh
/// sample, so pairs stay inside convex validity sets and cover small distances.
pub fn empirical_lipschitz<S: WindowSampler>(
    r: &DelayFunctional,
    sampler: &S,
    pairs: usize,
    seed: u64,
) -> Result<EmpiricalLipschitz> {
    let mut out = EmpiricalLipschitz {
        max_ratio: 0.0,
        pairs,
        witness_pair: None,
    };
    for trial in 0..pairs {
        let mut rng = trial_rng(seed, trial as u64);
        let phi = sampler.sample(&mut rng);
        let other = sampler.sample(&mut rng);
        let lambda = 10f64.powf(rng.random_range(-4.0..=0.0));
        let psi = phi.scale(1.0 - lambda).add(&other.scale(lambda))?;
        let dist = phi.sub(&psi)?.weighted_h1_norm(0.0);
        if dist == 0.0 {
            continue;
        }
        let ratio = (r.evaluate_grid(&phi)?.value - r.evaluate_grid(&psi)?.value).abs() / dist;
        if ratio > out.max_ratio {
            out.max_ratio = ratio;
            out.witness_pair = Some((phi, psi));
        }
    }
    Ok(out)
}
