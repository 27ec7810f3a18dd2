//! Metric projections in the discrete `H^1(-h, 0)` inner product.
//!
//! Two closed convex sets are supported:
//! - `V_beta`: every cell slope has Euclidean norm at most `beta`;
//! - `W_alpha`: scalar functions with values in `[-w + alpha, w_plus - alpha]`
//!   and slopes bounded by `c - alpha`.
//!
//! The projection is the nearest piecewise-linear function on the same grid,
//! measured by the unweighted `H^1` norm. Members are returned unchanged.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid_function::GridFunction;

/// Slack used by every membership test.
pub const MEMBERSHIP_SLACK: f64 = 1e-12;
pub const DEFAULT_TOL: f64 = 1e-10;
pub const DEFAULT_MAX_ITER: usize = 100_000;

#[derive(Debug, Clone)]
pub struct ProjectionResult {
    pub projected: GridFunction,
    pub iterations: usize,
    pub kkt_residual: f64,
    /// The input was already a member and is returned unchanged.
    pub active: bool,
}

/// One-line solver report, as printed by the `project` subcommand.
#[derive(Debug, Clone, Serialize)]
pub struct KktReport {
    pub set: &'static str,
    pub iterations: usize,
    pub kkt_residual: f64,
    pub already_member: bool,
    pub distance_h1: f64,
}

/// A closed convex subset of window space with a metric projection.
pub trait ConvexSet {
    fn contains(&self, phi: &GridFunction) -> bool;
    fn project(&self, phi: &GridFunction) -> Result<ProjectionResult>;
}

#[derive(Debug, Clone, Copy)]
pub struct VBetaSet {
    pub h: f64,
    pub beta: f64,
    pub tol: f64,
    pub max_iter: usize,
}

impl VBetaSet {
    pub fn new(h: f64, beta: f64) -> Result<Self> {
        if !(beta > 0.0) {
            return Err(Error::OutOfRange {
                value: beta,
                lo: 0.0,
                hi: f64::INFINITY,
            });
        }
        Ok(Self {
            h,
            beta,
            tol: DEFAULT_TOL,
            max_iter: DEFAULT_MAX_ITER,
        })
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }
}

impl ConvexSet for VBetaSet {
    fn contains(&self, phi: &GridFunction) -> bool {
        phi.lip_seminorm() <= self.beta + MEMBERSHIP_SLACK
    }

    fn project(&self, phi: &GridFunction) -> Result<ProjectionResult> {
        project_vbeta_with(phi, self.beta, self.tol, self.max_iter)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct WAlphaSet {
    pub h: f64,
    pub alpha: f64,
    pub w: f64,
    pub w_plus: f64,
    pub c: f64,
    pub tol: f64,
    pub max_iter: usize,
}

impl WAlphaSet {
    /// Window length is `(2w + 2w_plus) / c`.
    pub fn new(alpha: f64, w: f64, w_plus: f64, c: f64) -> Result<Self> {
        if !(w > 0.0 && w_plus > 0.0 && c > 0.0) {
            return Err(Error::config("w/w_plus/c", "positioning parameters must be positive"));
        }
        let bound = c.min(w).min(w_plus);
        if !(alpha > 0.0 && alpha < bound) {
            return Err(Error::EmptySetParameters { alpha, bound });
        }
        Ok(Self {
            h: (2.0 * w + 2.0 * w_plus) / c,
            alpha,
            w,
            w_plus,
            c,
            tol: DEFAULT_TOL,
            max_iter: DEFAULT_MAX_ITER,
        })
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn lower(&self) -> f64 {
        -self.w + self.alpha
    }

    pub fn upper(&self) -> f64 {
        self.w_plus - self.alpha
    }

    pub fn slope_bound(&self) -> f64 {
        self.c - self.alpha
    }
}

impl ConvexSet for WAlphaSet {
    fn contains(&self, phi: &GridFunction) -> bool {
        phi.dim() == 1
            && phi
                .values()
                .iter()
                .all(|v| *v >= self.lower() - MEMBERSHIP_SLACK && *v <= self.upper() + MEMBERSHIP_SLACK)
            && phi.lip_seminorm() <= self.slope_bound() + MEMBERSHIP_SLACK
    }

    fn project(&self, phi: &GridFunction) -> Result<ProjectionResult> {
        project_walpha(phi, self)
    }
}

/// Projection onto `V_beta` with the default iteration cap.
pub fn project_vbeta(phi: &GridFunction, beta: f64, tol: f64) -> Result<ProjectionResult> {
    project_vbeta_with(phi, beta, tol, DEFAULT_MAX_ITER)
}

/// Parametrizes the window by its left value and its cell slopes, so the
/// constraint is a product of Euclidean balls. Solved by Jacobi-preconditioned
/// FISTA with adaptive restart; the step is `1/L` with `L` from power iteration.
pub fn project_vbeta_with(phi: &GridFunction, beta: f64, tol: f64, max_iter: usize) -> Result<ProjectionResult> {
    if !(beta > 0.0) {
        return Err(Error::OutOfRange {
            value: beta,
            lo: 0.0,
            hi: f64::INFINITY,
        });
    }
    if phi.lip_seminorm() <= beta + MEMBERSHIP_SLACK {
        return Ok(ProjectionResult {
            projected: phi.clone(),
            iterations: 0,
            kkt_residual: 0.0,
            active: true,
        });
    }
    let q = SlopeQp::new(phi);
    let (m, n) = (q.m, q.n);
    let dt = q.dt;

    // Jacobi preconditioner: total mass for the left value, mass of the
    // downstream indicator plus the derivative weight for each slope.
    let total_mass = dt * m as f64;
    let mut diag = vec![total_mass; m + 1];
    for i in 0..m {
        let downstream = dt * (m - i - 1) as f64 + dt / 3.0;
        diag[i + 1] = dt * dt * downstream + dt;
    }
    let lipschitz = q.scaled_max_eigenvalue(&diag) * 1.02;
    // relative to the size of the input, so that rounding cannot stall the loop
    let scale = {
        let mut acc = 0.0;
        for (blk, d) in diag.iter().enumerate() {
            for k in 0..n {
                acc += d * q.target[blk * n + k].powi(2);
            }
        }
        acc.sqrt().max(1.0)
    };

    let mut z = q.target.clone();
    clamp_slopes(&mut z, n, beta);
    let mut z_prev = z.clone();
    let mut y = z.clone();
    let mut t_k: f64 = 1.0;
    let mut grad = vec![0.0; z.len()];
    let mut scratch = vec![0.0; (m + 1) * n];
    let mut residual = f64::INFINITY;
    for iter in 1..=max_iter {
        q.gradient(&y, &mut grad, &mut scratch);
        let mut next = y.clone();
        for (blk, d) in diag.iter().enumerate() {
            for k in 0..n {
                next[blk * n + k] -= grad[blk * n + k] / (lipschitz * d);
            }
        }
        clamp_slopes(&mut next, n, beta);
        // Gradient mapping measured in the preconditioned metric.
        residual = {
            let mut acc = 0.0;
            for (blk, d) in diag.iter().enumerate() {
                for k in 0..n {
                    let g = y[blk * n + k] - next[blk * n + k];
                    acc += d * g * g;
                }
            }
            lipschitz * acc.sqrt()
        };
        // Restart when momentum points uphill.
        let uphill: f64 = grad
            .iter()
            .zip(next.iter().zip(&z))
            .map(|(g, (a, b))| g * (a - b))
            .sum();
        z_prev.clone_from(&z);
        z = next;
        if residual < tol * scale {
            let projected = q.reconstruct(&z, phi);
            return Ok(ProjectionResult {
                projected,
                iterations: iter,
                kkt_residual: residual,
                active: false,
            });
        }
        if uphill > 0.0 {
            t_k = 1.0;
            y.clone_from(&z);
            continue;
        }
        let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t_k * t_k).sqrt());
        let mom = (t_k - 1.0) / t_next;
        for j in 0..y.len() {
            y[j] = z[j] + mom * (z[j] - z_prev[j]);
        }
        t_k = t_next;
    }
    Err(Error::NonConvergence {
        what: "V_beta projection",
        iterations: max_iter,
        residual,
    })
}

fn clamp_slopes(z: &mut [f64], n: usize, beta: f64) {
    for cell in z[n..].chunks_exact_mut(n) {
        let norm = cell.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm > beta {
            let s = beta / norm;
            cell.iter_mut().for_each(|v| *v *= s);
        }
    }
}

/// `1/2 |psi(z) - phi|_{H^1}^2` in left-value / slope coordinates.
struct SlopeQp {
    m: usize,
    n: usize,
    dt: f64,
    /// `(phi(-h), slopes of phi)`.
    target: Vec<f64>,
}

impl SlopeQp {
    fn new(phi: &GridFunction) -> Self {
        let (m, n, dt) = (phi.cells(), phi.dim(), phi.dt());
        let mut target = Vec::with_capacity((m + 1) * n);
        target.extend_from_slice(phi.node(0));
        for i in 0..m {
            target.extend(phi.slope(i));
        }
        Self { m, n, dt, target }
    }

    /// Gradient at `z`; `nodal` is scratch of size `(m + 1) * n`.
    fn gradient(&self, z: &[f64], out: &mut [f64], nodal: &mut [f64]) {
        let (m, n, dt) = (self.m, self.n, self.dt);
        // nodal displacement from phi
        for k in 0..n {
            let mut acc = z[k] - self.target[k];
            nodal[k] = acc;
            for i in 0..m {
                acc += dt * (z[(i + 1) * n + k] - self.target[(i + 1) * n + k]);
                nodal[(i + 1) * n + k] = acc;
            }
        }
        // p = M * nodal, then suffix sums
        let c = dt / 6.0;
        for k in 0..n {
            let at = |j: usize| nodal[j * n + k];
            let p = |j: usize| -> f64 {
                if m == 0 {
                    return 0.0;
                }
                if j == 0 {
                    c * (2.0 * at(0) + at(1))
                } else if j == m {
                    c * (at(m - 1) + 2.0 * at(m))
                } else {
                    c * (at(j - 1) + 4.0 * at(j) + at(j + 1))
                }
            };
            let mut suffix = 0.0;
            for j in (1..=m).rev() {
                suffix += p(j);
                out[j * n + k] = dt * suffix + dt * (z[j * n + k] - self.target[j * n + k]);
            }
            out[k] = suffix + p(0);
        }
    }

    fn scaled_max_eigenvalue(&self, diag: &[f64]) -> f64 {
        let len = (self.m + 1) * self.n;
        let zero = SlopeQp {
            m: self.m,
            n: self.n,
            dt: self.dt,
            target: vec![0.0; len],
        };
        let mut x: Vec<f64> = (0..len).map(|j| 1.0 + ((j * 7919) % 13) as f64 / 13.0).collect();
        let mut hx = vec![0.0; len];
        let mut scratch = vec![0.0; len];
        let mut lambda = 0.0;
        for _ in 0..200 {
            let nrm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
            x.iter_mut().for_each(|v| *v /= nrm);
            let scaled: Vec<f64> = x.iter().enumerate().map(|(j, v)| v / diag[j / self.n].sqrt()).collect();
            zero.gradient(&scaled, &mut hx, &mut scratch);
            for (j, v) in hx.iter_mut().enumerate() {
                *v /= diag[j / self.n].sqrt();
            }
            let next: f64 = hx.iter().zip(&x).map(|(a, b)| a * b).sum();
            x.clone_from(&hx);
            if (next - lambda).abs() <= 1e-6 * next.abs() {
                lambda = next;
                break;
            }
            lambda = next;
        }
        lambda
    }

    fn reconstruct(&self, z: &[f64], like: &GridFunction) -> GridFunction {
        let (m, n, dt) = (self.m, self.n, self.dt);
        let mut values = vec![0.0; (m + 1) * n];
        values[..n].copy_from_slice(&z[..n]);
        for i in 0..m {
            for k in 0..n {
                values[(i + 1) * n + k] = values[i * n + k] + dt * z[(i + 1) * n + k];
            }
        }
        like.with_values(n, values)
    }
}

/// Projection onto `W_alpha` by consensus ADMM with a value-clamp block and a
/// slope-clamp block. The primal update is a tridiagonal solve.
pub fn project_walpha(phi: &GridFunction, set: &WAlphaSet) -> Result<ProjectionResult> {
    if phi.dim() != 1 {
        return Err(Error::DimensionMismatch {
            expected: 1,
            found: phi.dim(),
        });
    }
    if set.contains(phi) {
        return Ok(ProjectionResult {
            projected: phi.clone(),
            iterations: 0,
            kkt_residual: 0.0,
            active: true,
        });
    }
    let (lo, hi, cap) = (set.lower(), set.upper(), set.slope_bound());
    let m = phi.cells();
    let dt = phi.dt();
    let target: Vec<f64> = phi.values().to_vec();
    let n_nodes = m + 1;

    // Stiffness K = mass + (1/dt) * graph Laplacian, stored as tridiagonal bands.
    let mut k_diag = vec![0.0; n_nodes];
    let mut k_off = vec![0.0; m];
    for i in 0..m {
        k_diag[i] += dt / 3.0 + 1.0 / dt;
        k_diag[i + 1] += dt / 3.0 + 1.0 / dt;
        k_off[i] += dt / 6.0 - 1.0 / dt;
    }
    let k_phi: Vec<f64> = (0..n_nodes)
        .map(|j| {
            let mut v = k_diag[j] * target[j];
            if j > 0 {
                v += k_off[j - 1] * target[j - 1];
            }
            if j < m {
                v += k_off[j] * target[j + 1];
            }
            v
        })
        .collect();

    let mut sigma = 1.0;
    let mut v = target.iter().map(|x| x.clamp(lo, hi)).collect::<Vec<_>>();
    let mut z1 = v.clone();
    let mut z2: Vec<f64> = (0..m).map(|i| ((v[i + 1] - v[i]) / dt).clamp(-cap, cap)).collect();
    let mut u1 = vec![0.0; n_nodes];
    let mut u2 = vec![0.0; m];
    let mut rhs = vec![0.0; n_nodes];
    let mut diag = vec![0.0; n_nodes];
    let mut off = vec![0.0; m];
    let mut residual = f64::INFINITY;
    let sqrt_dt = dt.sqrt();

    for iter in 1..=set.max_iter {
        let (s1, s2) = (sigma * dt, sigma * dt);
        // (K + s1 I + s2/dt^2 D^T D) v = K phi + s1 (z1 - u1) + s2/dt D^T (z2 - u2)
        for j in 0..n_nodes {
            diag[j] = k_diag[j] + s1;
            rhs[j] = k_phi[j] + s1 * (z1[j] - u1[j]);
        }
        for i in 0..m {
            let w = s2 / (dt * dt);
            diag[i] += w;
            diag[i + 1] += w;
            off[i] = k_off[i] - w;
            let g = s2 / dt * (z2[i] - u2[i]);
            rhs[i] -= g;
            rhs[i + 1] += g;
        }
        solve_tridiagonal(&diag, &off, &mut rhs);
        v.copy_from_slice(&rhs);

        let mut primal = 0.0;
        let mut dual1 = vec![0.0; n_nodes];
        for j in 0..n_nodes {
            let nz = (v[j] + u1[j]).clamp(lo, hi);
            dual1[j] = s1 * (nz - z1[j]);
            z1[j] = nz;
            let r = v[j] - z1[j];
            u1[j] += r;
            primal += dt * r * r;
        }
        for i in 0..m {
            let slope = (v[i + 1] - v[i]) / dt;
            let nz = (slope + u2[i]).clamp(-cap, cap);
            let ds = s2 * (nz - z2[i]) / dt;
            dual1[i] -= ds;
            dual1[i + 1] += ds;
            z2[i] = nz;
            let r = slope - z2[i];
            u2[i] += r;
            primal += dt * r * r;
        }
        let primal = primal.sqrt();
        let dual = dual1.iter().map(|x| x * x).sum::<f64>().sqrt() / sqrt_dt;
        residual = primal.max(dual);
        if primal < set.tol && dual < set.tol {
            let projected = repair_walpha(&v, phi, lo, hi, cap);
            return Ok(ProjectionResult {
                projected,
                iterations: iter,
                kkt_residual: residual,
                active: false,
            });
        }
        if iter % 50 == 0 && primal > 0.0 && dual > 0.0 {
            let ratio = (primal / dual).sqrt();
            if !(0.2..=5.0).contains(&ratio) {
                let new_sigma = (sigma * ratio).clamp(1e-6, 1e6);
                // rescale the scaled duals
                let f = sigma / new_sigma;
                u1.iter_mut().for_each(|u| *u *= f);
                u2.iter_mut().for_each(|u| *u *= f);
                sigma = new_sigma;
            }
        }
    }
    Err(Error::NonConvergence {
        what: "W_alpha projection",
        iterations: set.max_iter,
        residual,
    })
}

/// Pulls the approximate ADMM iterate into the set by a convex combination with
/// the set's centre (mid value, zero slope), which has positive margin in every
/// constraint. The shift is of the order of the final residual.
fn repair_walpha(v: &[f64], like: &GridFunction, lo: f64, hi: f64, cap: f64) -> GridFunction {
    let mid = 0.5 * (lo + hi);
    let margin_box = 0.5 * (hi - lo);
    let dt = like.dt();
    let mut lambda: f64 = 0.0;
    for &x in v {
        let excess = (x - hi).max(lo - x);
        if excess > 0.0 {
            lambda = lambda.max(excess / (margin_box + excess));
        }
    }
    for w in v.windows(2) {
        let excess = ((w[1] - w[0]) / dt).abs() - cap;
        if excess > 0.0 {
            lambda = lambda.max(excess / (cap + excess));
        }
    }
    let values = if lambda > 0.0 {
        let lambda = (lambda * (1.0 + 1e-6)).min(1.0);
        v.iter().map(|x| (1.0 - lambda) * x + lambda * mid).collect()
    } else {
        v.to_vec()
    };
    like.with_values(1, values)
}

/// Thomas algorithm for a symmetric tridiagonal system; solution overwrites `rhs`.
fn solve_tridiagonal(diag: &[f64], off: &[f64], rhs: &mut [f64]) {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut d = diag[0];
    c[0] = if n > 1 { off[0] / d } else { 0.0 };
    rhs[0] /= d;
    for i in 1..n {
        d = diag[i] - off[i - 1] * c[i - 1];
        if i < n - 1 {
            c[i] = off[i] / d;
        }
        rhs[i] = (rhs[i] - off[i - 1] * rhs[i - 1]) / d;
    }
    for i in (0..n - 1).rev() {
        rhs[i] -= c[i] * rhs[i + 1];
    }
}

/// Lipschitz extension `F = f o P_C` of a map defined on a convex set `C`.
#[derive(Debug, Clone)]
pub struct ProjectedExtension<S, F> {
    set: S,
    f: F,
}

pub fn extend_via_projection<S, F, T>(f: F, set: S) -> ProjectedExtension<S, F>
where
    S: ConvexSet,
    F: Fn(&GridFunction) -> T,
{
    ProjectedExtension { set, f }
}

impl<S: ConvexSet, F> ProjectedExtension<S, F> {
    pub fn eval<T>(&self, phi: &GridFunction) -> Result<T>
    where
        F: Fn(&GridFunction) -> T,
    {
        let p = self.set.project(phi)?;
        Ok((self.f)(&p.projected))
    }

    pub fn set(&self) -> &S {
        &self.set
    }
}

/// Summary line for a finished projection.
pub fn kkt_report(set: &'static str, phi: &GridFunction, res: &ProjectionResult) -> KktReport {
    let dist = res
        .projected
        .sub(phi)
        .map(|d| d.weighted_h1_norm(0.0))
        .unwrap_or(f64::NAN);
    KktReport {
        set,
        iterations: res.iterations,
        kkt_residual: res.kkt_residual,
        already_member: res.active,
        distance_h1: dist,
    }
}

/// Outcome of one projection property over a sampled family.
#[derive(Debug, Clone, Serialize)]
pub struct PropertyCheck {
    pub name: String,
    pub trials: usize,
    pub worst: f64,
    pub threshold: f64,
    pub pass: bool,
}

fn random_window(rng: &mut rand_chacha::ChaCha8Rng, dim: usize, amplitude: f64) -> GridFunction {
    use rand::Rng;
    let cells = rng.random_range(2..=24usize);
    let dt = 1.0 / cells as f64;
    let values = (0..(cells + 1) * dim)
        .map(|_| rng.random_range(-amplitude..=amplitude))
        .collect();
    GridFunction::from_flat(-1.0, 0.0, dt, dim, values).expect("aligned grid")
}

fn same_grid(rng: &mut rand_chacha::ChaCha8Rng, like: &GridFunction, amplitude: f64) -> GridFunction {
    use rand::Rng;
    let values = (0..like.values().len())
        .map(|_| rng.random_range(-amplitude..=amplitude))
        .collect();
    like.with_values(like.dim(), values)
}

/// Idempotence, fixed points, membership, non-expansiveness and the
/// variational inequality for both sets over `pairs` seeded random pairs.
pub fn projection_property_suite(pairs: usize, seed: u64) -> Result<Vec<PropertyCheck>> {
    use rand::Rng;
    let tol = 1e-12;
    let mut idem: f64 = 0.0;
    let mut fixed: f64 = 0.0;
    let mut member_fail = 0usize;
    let mut expansion: f64 = 0.0;
    let mut vi: f64 = 0.0;
    let mut w_idem: f64 = 0.0;
    let mut w_member_fail = 0usize;
    let mut w_expansion: f64 = 0.0;
    let mut w_vi: f64 = 0.0;
    let wset = WAlphaSet::new(0.1, 1.0, 1.5, 2.0)?.with_tol(tol);
    for trial in 0..pairs {
        let mut rng = crate::weighted_calculus::trial_rng(seed, trial as u64);
        let dim = rng.random_range(1..=3usize);
        let beta = rng.random_range(0.2..=4.0);
        let set = VBetaSet::new(1.0, beta)?.with_tol(tol);
        let f = random_window(&mut rng, dim, 3.0);
        let g = same_grid(&mut rng, &f, 3.0);
        let pf = set.project(&f)?;
        let pg = set.project(&g)?;
        member_fail += usize::from(!set.contains(&pf.projected));
        let again = set.project(&pf.projected)?;
        idem = idem.max(again.projected.sup_distance(&pf.projected)?);
        fixed = fixed.max(if again.active { 0.0 } else { 1.0 });
        let num = pf.projected.sub(&pg.projected)?.weighted_h1_norm(0.0);
        let den = f.sub(&g)?.weighted_h1_norm(0.0);
        if den > 0.0 {
            expansion = expansion.max(num / den - 1.0);
        }
        let r = f.sub(&pf.projected)?;
        let d = pg.projected.sub(&pf.projected)?;
        let scale = (r.weighted_h1_norm(0.0) * d.weighted_h1_norm(0.0)).max(1.0);
        vi = vi.max(r.weighted_h1_inner(&d, 0.0)? / scale);

        let f1 = random_window(&mut rng, 1, 2.0);
        let g1 = same_grid(&mut rng, &f1, 2.0);
        let pf = wset.project(&f1)?;
        let pg = wset.project(&g1)?;
        w_member_fail += usize::from(!wset.contains(&pf.projected));
        let again = wset.project(&pf.projected)?;
        w_idem = w_idem.max(again.projected.sup_distance(&pf.projected)?);
        let num = pf.projected.sub(&pg.projected)?.weighted_h1_norm(0.0);
        let den = f1.sub(&g1)?.weighted_h1_norm(0.0);
        if den > 0.0 {
            w_expansion = w_expansion.max(num / den - 1.0);
        }
        let r = f1.sub(&pf.projected)?;
        let d = pg.projected.sub(&pf.projected)?;
        let scale = (r.weighted_h1_norm(0.0) * d.weighted_h1_norm(0.0)).max(1.0);
        w_vi = w_vi.max(r.weighted_h1_inner(&d, 0.0)? / scale);
    }
    let check = |name: &str, worst: f64, threshold: f64| PropertyCheck {
        name: name.to_string(),
        trials: pairs,
        worst,
        threshold,
        pass: worst <= threshold,
    };
    Ok(vec![
        check("vbeta_membership_failures", member_fail as f64, 0.0),
        check("vbeta_idempotence", idem, 1e-10),
        check("vbeta_fixed_points", fixed, 0.0),
        check("vbeta_nonexpansive_excess", expansion, 1e-8),
        check("vbeta_variational_inequality", vi, 1e-8),
        check("walpha_membership_failures", w_member_fail as f64, 0.0),
        check("walpha_idempotence", w_idem, 1e-10),
        check("walpha_nonexpansive_excess", w_expansion, 1e-8),
        check("walpha_variational_inequality", w_vi, 1e-8),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn ramp(dt: f64) -> GridFunction {
        GridFunction::from_scalar_fn(-1.0, 0.0, dt, |t| t).unwrap()
    }

    #[test]
    fn members_are_fixed() {
        let r = project_vbeta(&ramp(0.25), 2.0, 1e-10).unwrap();
        assert!(r.active);
        assert_eq!(r.projected, ramp(0.25));
        let c = GridFunction::constant(-1.0, 0.0, 0.1, &[3.0, -1.0]).unwrap();
        let r = project_vbeta(&c, 0.1, 1e-10).unwrap();
        assert!(r.active);
        assert_eq!(r.projected, c);
    }

    #[test]
    fn vbeta_projection_of_steep_ramp() {
        let r = project_vbeta(&ramp(0.5), 0.5, 1e-12).unwrap();
        assert!(!r.active);
        assert!(r.projected.lip_seminorm() <= 0.5 + MEMBERSHIP_SLACK);
        // odd symmetry about the midpoint -1/2 is preserved by the projection
        assert_relative_eq!(r.projected.node(1)[0], -0.5, epsilon = 1e-10);
        assert_relative_eq!(r.projected.node(2)[0] - r.projected.node(0)[0], 0.5, epsilon = 1e-10);
    }

    #[test]
    fn vbeta_vector_slopes_clamped_as_balls() {
        let phi = GridFunction::from_fn(-1.0, 0.0, 0.1, 2, |t| vec![3.0 * t, (5.0 * t).sin()]).unwrap();
        let r = project_vbeta(&phi, 1.0, 1e-11).unwrap();
        assert!(VBetaSet::new(1.0, 1.0).unwrap().contains(&r.projected));
        let again = project_vbeta(&r.projected, 1.0, 1e-11).unwrap();
        assert!(again.active);
    }

    #[test]
    fn walpha_examples() {
        let set = WAlphaSet::new(0.1, 1.0, 1.0, 1.0).unwrap();
        let zero = GridFunction::zeros(-4.0, 0.0, 0.5, 1).unwrap();
        let r = project_walpha(&zero, &set).unwrap();
        assert!(r.active);
        assert_eq!(r.projected, zero);
        assert!(matches!(
            WAlphaSet::new(1.0, 1.0, 1.0, 1.0),
            Err(Error::EmptySetParameters { .. })
        ));
        assert!(matches!(
            WAlphaSet::new(0.0, 1.0, 1.0, 1.0),
            Err(Error::EmptySetParameters { .. })
        ));
    }

    #[test]
    fn walpha_projection_of_constant_above_box() {
        let set = WAlphaSet::new(0.1, 1.0, 1.0, 4.0).unwrap();
        let phi = GridFunction::constant(-1.0, 0.0, 0.5, &[1.0]).unwrap();
        let r = project_walpha(&phi, &set).unwrap();
        assert!(set.contains(&r.projected));
        // a constant above the box projects onto the upper face
        for v in r.projected.values() {
            assert_relative_eq!(*v, 0.9, epsilon = 1e-9);
        }
    }

    #[test]
    fn walpha_rejects_vector_windows() {
        let set = WAlphaSet::new(0.1, 1.0, 1.0, 4.0).unwrap();
        let phi = GridFunction::constant(-1.0, 0.0, 0.5, &[1.0, 0.0]).unwrap();
        assert!(matches!(
            project_walpha(&phi, &set),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn extension_examples() {
        let set = VBetaSet::new(1.0, 1.0).unwrap();
        let sup = extend_via_projection(|p: &GridFunction| p.sup_norm(), set);
        let phi = GridFunction::from_scalar_fn(-1.0, 0.0, 0.1, |t| 0.5 * t + 0.2).unwrap();
        assert_eq!(sup.eval(&phi).unwrap(), phi.sup_norm());
        let constant = extend_via_projection(|_: &GridFunction| 4.0, set);
        let steep = GridFunction::from_scalar_fn(-1.0, 0.0, 0.1, |t| 9.0 * t).unwrap();
        assert_eq!(constant.eval(&steep).unwrap(), 4.0);
    }

    #[test]
    fn property_suite_passes() {
        let checks = projection_property_suite(60, 7).unwrap();
        for c in &checks {
            assert!(c.pass, "{c:?}");
        }
    }

    #[test]
    fn tridiagonal_solver() {
        let diag = [4.0, 4.0, 4.0];
        let off = [1.0, 1.0];
        let mut rhs = [5.0, 6.0, 5.0];
        solve_tridiagonal(&diag, &off, &mut rhs);
        for v in rhs {
            assert_relative_eq!(v, 1.0, epsilon = 1e-14);
        }
    }

    use proptest::prelude::*;

    fn arb_window(dim: usize) -> impl Strategy<Value = GridFunction> {
        (2usize..24, prop::collection::vec(-3.0f64..3.0, 25 * dim)).prop_map(move |(cells, raw)| {
            let dt = 1.0 / cells as f64;
            GridFunction::from_flat(-1.0, 0.0, dt, dim, raw[..(cells + 1) * dim].to_vec()).unwrap()
        })
    }

    fn arb_pair(dim: usize) -> impl Strategy<Value = (GridFunction, GridFunction)> {
        (2usize..24, prop::collection::vec(-3.0f64..3.0, 50 * dim)).prop_map(move |(cells, raw)| {
            let dt = 1.0 / cells as f64;
            let len = (cells + 1) * dim;
            let f = GridFunction::from_flat(-1.0, 0.0, dt, dim, raw[..len].to_vec()).unwrap();
            let g = GridFunction::from_flat(-1.0, 0.0, dt, dim, raw[len..2 * len].to_vec()).unwrap();
            (f, g)
        })
    }

    fn inner(a: &GridFunction, b: &GridFunction) -> f64 {
        a.weighted_h1_inner(b, 0.0).unwrap()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn vbeta_idempotent_and_member(phi in arb_window(2), beta in 0.2f64..4.0) {
            let set = VBetaSet::new(1.0, beta).unwrap();
            let p = set.project(&phi).unwrap();
            prop_assert!(set.contains(&p.projected));
            let pp = set.project(&p.projected).unwrap();
            prop_assert!(pp.active);
            prop_assert_eq!(pp.projected, p.projected);
        }

        #[test]
        fn vbeta_non_expansive((f, g) in arb_pair(1), beta in 0.2f64..4.0) {
            let set = VBetaSet::new(1.0, beta).unwrap().with_tol(1e-12);
            let pf = set.project(&f).unwrap().projected;
            let pg = set.project(&g).unwrap().projected;
            let lhs = pf.sub(&pg).unwrap().weighted_h1_norm(0.0);
            let rhs = f.sub(&g).unwrap().weighted_h1_norm(0.0);
            prop_assert!(lhs <= rhs * (1.0 + 1e-9) + 1e-9, "{lhs} > {rhs}");
        }

        #[test]
        fn vbeta_variational_inequality((f, g) in arb_pair(2), beta in 0.2f64..4.0) {
            let set = VBetaSet::new(1.0, beta).unwrap().with_tol(1e-12);
            let pf = set.project(&f).unwrap().projected;
            // any member serves as a test point
            let member = set.project(&g).unwrap().projected;
            let lhs = inner(&f.sub(&pf).unwrap(), &member.sub(&pf).unwrap());
            prop_assert!(lhs <= 1e-8, "{lhs}");
        }

        #[test]
        fn walpha_properties((f, g) in arb_pair(1), alpha in 0.01f64..0.5) {
            let set = WAlphaSet::new(alpha, 1.0, 1.5, 2.0).unwrap().with_tol(1e-12);
            let pf = set.project(&f).unwrap();
            prop_assert!(set.contains(&pf.projected));
            let again = set.project(&pf.projected).unwrap();
            prop_assert!(again.active);
            let pg = set.project(&g).unwrap().projected;
            let lhs = pf.projected.sub(&pg).unwrap().weighted_h1_norm(0.0);
            let rhs = f.sub(&g).unwrap().weighted_h1_norm(0.0);
            prop_assert!(lhs <= rhs * (1.0 + 1e-8) + 1e-8, "{lhs} > {rhs}");
            let vi = inner(&f.sub(&pf.projected).unwrap(), &pg.sub(&pf.projected).unwrap());
            prop_assert!(vi <= 1e-7, "{vi}");
        }
    }
}
