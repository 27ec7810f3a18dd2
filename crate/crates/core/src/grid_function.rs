//! Continuous piecewise-linear functions on a uniform grid.
//!
//! A [`GridFunction`] is the computable stand-in for an `H^1` function with
//! essentially bounded derivative: it is determined by its nodal values, is
//! affine on each cell, and all weighted `L_2` / `H^1` norms are integrated
//! exactly cell by cell against the density `exp(-2 rho t)`.

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative tolerance used when checking that an interval is a whole number of cells.
pub(crate) const GRID_TOL: f64 = 1e-12;

/// Distance (in index units) below which an evaluation point snaps to a node.
const NODE_SNAP: f64 = 1e-10;

/// Below this value of `|2 rho dt|` the per-cell exponential moments are
/// summed from their power series instead of the closed forms.
const SERIES_SWITCH: f64 = 0.5;

/// Number of whole cells in `length`, or `None` if `length / dt` is not integral.
pub(crate) fn whole_cells(length: f64, dt: f64) -> Option<usize> {
    let ratio = length / dt;
    if !ratio.is_finite() || ratio < -GRID_TOL {
        return None;
    }
    let rounded = ratio.round();
    if (ratio - rounded).abs() <= GRID_TOL * rounded.max(1.0) * 16.0 {
        Some(rounded as usize)
    } else {
        None
    }
}

/// `M_j(k) = int_0^1 theta^j exp(-k theta) dtheta` for `j = 0..=3`.
pub(crate) fn exp_moments(k: f64) -> [f64; 4] {
    let mut m = [0.0; 4];
    if k.abs() < SERIES_SWITCH {
        for (j, mj) in m.iter_mut().enumerate() {
            // sum_l (-k)^l / (l! (j + l + 1))
            let mut term = 1.0;
            let mut sum = 1.0 / (j as f64 + 1.0);
            for l in 1..60 {
                term *= -k / l as f64;
                let add = term / (j + l + 1) as f64;
                sum += add;
                if add.abs() < 1e-18 * sum.abs() {
                    break;
                }
            }
            *mj = sum;
        }
    } else {
        let e = (-k).exp();
        m[0] = -(-k).exp_m1() / k;
        for j in 1..4 {
            m[j] = (j as f64 * m[j - 1] - e) / k;
        }
    }
    m
}

/// Sup norm, Lipschitz seminorm and essential sup of the derivative.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Seminorms {
    pub sup_norm: f64,
    pub lip_seminorm: f64,
    pub sup_derivative: f64,
}

/// Piecewise-linear `R^n`-valued function on the uniform grid `a, a + dt, ..., b`.
///
/// Nodal values are stored row-major: node `i`, component `k` lives at
/// `values[i * dim + k]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    a: f64,
    dt: f64,
    cells: usize,
    dim: usize,
    values: Vec<f64>,
}

/// Structured-text form `{a, b, dt, n, values}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridRecord {
    pub a: f64,
    pub b: f64,
    pub dt: f64,
    pub n: usize,
    pub values: Vec<Vec<f64>>,
}

impl GridFunction {
    /// Builds a function from one row of `n` values per node.
    pub fn new(a: f64, b: f64, dt: f64, rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.first().map(Vec::len).unwrap_or(0);
        let mut flat = Vec::with_capacity(rows.len() * dim);
        for row in rows {
            if row.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: row.len(),
                });
            }
            flat.extend_from_slice(row);
        }
        Self::from_flat(a, b, dt, dim, flat)
    }

    /// Builds a function from row-major nodal values.
    pub fn from_flat(a: f64, b: f64, dt: f64, dim: usize, values: Vec<f64>) -> Result<Self> {
        if !(dt > 0.0) || !(b > a) || !a.is_finite() || !b.is_finite() {
            return Err(Error::NonIntegralGrid { length: b - a, dt });
        }
        let cells = whole_cells(b - a, dt).ok_or(Error::NonIntegralGrid { length: b - a, dt })?;
        if cells == 0 {
            return Err(Error::NonIntegralGrid { length: b - a, dt });
        }
        if dim == 0 {
            return Err(Error::DimensionMismatch { expected: 1, found: 0 });
        }
        if values.len() != (cells + 1) * dim {
            return Err(Error::DimensionMismatch {
                expected: (cells + 1) * dim,
                found: values.len(),
            });
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteValue {
                node: pos / dim,
                component: pos % dim,
            });
        }
        Ok(Self {
            a,
            dt,
            cells,
            dim,
            values,
        })
    }

    /// Samples `f` at every node of `[a, b]`.
    pub fn from_fn<F>(a: f64, b: f64, dt: f64, dim: usize, mut f: F) -> Result<Self>
    where
        F: FnMut(f64) -> Vec<f64>,
    {
        let cells = whole_cells(b - a, dt).ok_or(Error::NonIntegralGrid { length: b - a, dt })?;
        let mut values = Vec::with_capacity((cells + 1) * dim);
        for i in 0..=cells {
            let row = f(a + i as f64 * dt);
            if row.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: row.len(),
                });
            }
            values.extend(row);
        }
        Self::from_flat(a, b, dt, dim, values)
    }

    /// Scalar convenience wrapper around [`GridFunction::from_fn`].
    pub fn from_scalar_fn<F>(a: f64, b: f64, dt: f64, mut f: F) -> Result<Self>
    where
        F: FnMut(f64) -> f64,
    {
        Self::from_fn(a, b, dt, 1, |t| vec![f(t)])
    }

    pub fn constant(a: f64, b: f64, dt: f64, c: &[f64]) -> Result<Self> {
        Self::from_fn(a, b, dt, c.len(), |_| c.to_vec())
    }

    pub fn zeros(a: f64, b: f64, dt: f64, dim: usize) -> Result<Self> {
        Self::constant(a, b, dt, &vec![0.0; dim])
    }

    /// Same grid as `self`, new nodal values. Used internally when the grid is
    /// already known to be valid.
    pub(crate) fn with_values(&self, dim: usize, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), (self.cells + 1) * dim);
        Self {
            a: self.a,
            dt: self.dt,
            cells: self.cells,
            dim,
            values,
        }
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.a + self.cells as f64 * self.dt
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn cells(&self) -> usize {
        self.cells
    }

    pub fn node_count(&self) -> usize {
        self.cells + 1
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn node_time(&self, i: usize) -> f64 {
        self.a + i as f64 * self.dt
    }

    pub fn node(&self, i: usize) -> &[f64] {
        &self.values[i * self.dim..(i + 1) * self.dim]
    }

    /// Index of the node at time `t`, if `t` is (within tolerance) a node.
    pub fn node_index(&self, t: f64) -> Option<usize> {
        let x = (t - self.a) / self.dt;
        let i = x.round();
        if i < 0.0 || i > self.cells as f64 {
            return None;
        }
        if (x - i).abs() <= GRID_TOL * (self.cells as f64).max(1.0) * 16.0 {
            Some(i as usize)
        } else {
            None
        }
    }

    /// Evaluates at a fractional node coordinate `x = (t - a) / dt`.
    pub(crate) fn eval_coord_into(&self, x: f64, out: &mut [f64]) {
        let nearest = x.round();
        if (x - nearest).abs() <= NODE_SNAP {
            let i = (nearest.max(0.0) as usize).min(self.cells);
            out.copy_from_slice(self.node(i));
            return;
        }
        let cell = (x.floor().max(0.0) as usize).min(self.cells - 1);
        let theta = x - cell as f64;
        let left = self.node(cell);
        let right = self.node(cell + 1);
        for k in 0..self.dim {
            out[k] = left[k] + theta * (right[k] - left[k]);
        }
    }

    pub(crate) fn eval_coord_component(&self, x: f64, k: usize) -> f64 {
        let nearest = x.round();
        if (x - nearest).abs() <= NODE_SNAP {
            let i = (nearest.max(0.0) as usize).min(self.cells);
            return self.values[i * self.dim + k];
        }
        let cell = (x.floor().max(0.0) as usize).min(self.cells - 1);
        let theta = x - cell as f64;
        let l = self.values[cell * self.dim + k];
        let r = self.values[(cell + 1) * self.dim + k];
        l + theta * (r - l)
    }

    fn coord(&self, t: f64) -> Result<f64> {
        let b = self.b();
        let slack = GRID_TOL * (b - self.a).max(1.0);
        if !(t >= self.a - slack && t <= b + slack) {
            return Err(Error::OutOfDomain { t, a: self.a, b });
        }
        Ok(((t - self.a) / self.dt).clamp(0.0, self.cells as f64))
    }

    /// Linear interpolation between the bracketing nodes.
    pub fn eval(&self, t: f64) -> Result<Vec<f64>> {
        let x = self.coord(t)?;
        let mut out = vec![0.0; self.dim];
        self.eval_coord_into(x, &mut out);
        Ok(out)
    }

    pub fn eval_component(&self, t: f64, k: usize) -> Result<f64> {
        let x = self.coord(t)?;
        Ok(self.eval_coord_component(x, k))
    }

    /// Slope vector of cell `i`.
    pub fn slope(&self, i: usize) -> Vec<f64> {
        let (l, r) = (self.node(i), self.node(i + 1));
        l.iter().zip(r).map(|(l, r)| (r - l) / self.dt).collect()
    }

    /// Euclidean norm of every cell slope.
    pub fn cell_slope_norms(&self) -> Vec<f64> {
        (0..self.cells)
            .map(|i| {
                let (l, r) = (self.node(i), self.node(i + 1));
                l.iter().zip(r).map(|(l, r)| (r - l) * (r - l)).sum::<f64>().sqrt() / self.dt
            })
            .collect()
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.chunks_exact(self.dim).map(norm).fold(0.0, f64::max)
    }

    pub fn lip_seminorm(&self) -> f64 {
        self.cell_slope_norms().into_iter().fold(0.0, f64::max)
    }

    pub fn seminorms(&self) -> Seminorms {
        let lip = self.lip_seminorm();
        Seminorms {
            sup_norm: self.sup_norm(),
            lip_seminorm: lip,
            sup_derivative: lip,
        }
    }

    fn check_same_grid(&self, other: &Self) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: other.dim,
            });
        }
        if self.cells != other.cells
            || (self.a - other.a).abs() > GRID_TOL * self.dt
            || (self.dt - other.dt).abs() > GRID_TOL * self.dt
        {
            return Err(Error::DimensionMismatch {
                expected: self.node_count(),
                found: other.node_count(),
            });
        }
        Ok(())
    }

    /// `int f . g exp(-2 rho t) dt`, exact for piecewise-linear integrands.
    pub fn weighted_l2_inner(&self, other: &Self, rho: f64) -> Result<f64> {
        self.check_same_grid(other)?;
        let m = exp_moments(2.0 * rho * self.dt);
        let w_ll = m[0] - 2.0 * m[1] + m[2];
        let w_lr = m[1] - m[2];
        let w_rr = m[2];
        let mut total = 0.0;
        for i in 0..self.cells {
            let (fl, fr) = (self.node(i), self.node(i + 1));
            let (gl, gr) = (other.node(i), other.node(i + 1));
            let cell = w_ll * dot(fl, gl) + w_lr * (dot(fl, gr) + dot(fr, gl)) + w_rr * dot(fr, gr);
            if cell != 0.0 {
                total += self.dt * (-2.0 * rho * self.node_time(i)).exp() * cell;
            }
        }
        Ok(total)
    }

    /// `int f' . g' exp(-2 rho t) dt` with the piecewise-constant derivatives.
    pub fn weighted_derivative_inner(&self, other: &Self, rho: f64) -> Result<f64> {
        self.check_same_grid(other)?;
        let m0 = exp_moments(2.0 * rho * self.dt)[0];
        let inv = 1.0 / (self.dt * self.dt);
        let mut total = 0.0;
        for i in 0..self.cells {
            let (fl, fr) = (self.node(i), self.node(i + 1));
            let (gl, gr) = (other.node(i), other.node(i + 1));
            let cell: f64 = (0..self.dim).map(|k| (fr[k] - fl[k]) * (gr[k] - gl[k])).sum::<f64>() * inv;
            if cell != 0.0 {
                total += self.dt * (-2.0 * rho * self.node_time(i)).exp() * m0 * cell;
            }
        }
        Ok(total)
    }

    pub fn weighted_h1_inner(&self, other: &Self, rho: f64) -> Result<f64> {
        Ok(self.weighted_l2_inner(other, rho)? + self.weighted_derivative_inner(other, rho)?)
    }

    pub fn weighted_l2_norm(&self, rho: f64) -> f64 {
        self.weighted_l2_inner(self, rho).expect("same grid").max(0.0).sqrt()
    }

    /// Weighted `L_2` norm of the (piecewise-constant) derivative.
    pub fn weighted_derivative_norm(&self, rho: f64) -> f64 {
        self.weighted_derivative_inner(self, rho)
            .expect("same grid")
            .max(0.0)
            .sqrt()
    }

    pub fn weighted_h1_norm(&self, rho: f64) -> f64 {
        let l2 = self.weighted_l2_inner(self, rho).expect("same grid");
        let d = self.weighted_derivative_inner(self, rho).expect("same grid");
        (l2 + d).max(0.0).sqrt()
    }

    /// Extends a pre-history on `[-h, 0]` by its value at `0` up to `t_end`.
    pub fn extend_constant(&self, t_end: f64) -> Result<Self> {
        let extra = whole_cells(t_end, self.dt)
            .filter(|&c| c > 0)
            .ok_or(Error::NonIntegralGrid {
                length: t_end,
                dt: self.dt,
            })?;
        let mut values = self.values.clone();
        let last = self.node(self.cells).to_vec();
        for _ in 0..extra {
            values.extend_from_slice(&last);
        }
        Ok(Self {
            a: self.a,
            dt: self.dt,
            cells: self.cells + extra,
            dim: self.dim,
            values,
        })
    }

    /// The pre-history window `u -> f(s + u)` on `[-h, 0]`, with `h = -a`.
    pub fn window(&self, s: f64) -> Result<WindowView<'_>> {
        let zero = self
            .node_index(0.0)
            .ok_or(Error::MisalignedWindow { s: 0.0, dt: self.dt })?;
        if zero == 0 {
            return Err(Error::OutOfDomain {
                t: s,
                a: self.a,
                b: self.b(),
            });
        }
        if !(s >= -GRID_TOL && s <= self.b() + GRID_TOL * self.b().abs().max(1.0)) {
            return Err(Error::OutOfDomain {
                t: s,
                a: 0.0,
                b: self.b(),
            });
        }
        let anchor = self.node_index(s).ok_or(Error::MisalignedWindow { s, dt: self.dt })?;
        Ok(WindowView {
            parent: self,
            start: anchor - zero,
            cells: zero,
        })
    }

    /// Window ending at node `anchor`, `cells` cells long.
    pub(crate) fn window_at_node(&self, anchor: usize, cells: usize) -> WindowView<'_> {
        debug_assert!(anchor >= cells && anchor <= self.cells);
        WindowView {
            parent: self,
            start: anchor - cells,
            cells,
        }
    }

    /// Views a function on `[-h, 0]` as a window.
    pub fn as_window(&self) -> WindowView<'_> {
        WindowView {
            parent: self,
            start: 0,
            cells: self.cells,
        }
    }

    /// Nodal antiderivative from `t = 0`, zero on `[a, 0]`.
    pub fn integrate_from_zero(&self) -> Result<Self> {
        let zero = self.node_index(0.0).ok_or(Error::NonIntegralGrid {
            length: -self.a,
            dt: self.dt,
        })?;
        let mut out = vec![0.0; self.values.len()];
        let half = 0.5 * self.dt;
        for i in zero + 1..=self.cells {
            for k in 0..self.dim {
                out[i * self.dim + k] = out[(i - 1) * self.dim + k]
                    + half * (self.values[(i - 1) * self.dim + k] + self.values[i * self.dim + k]);
            }
        }
        Ok(self.with_values(self.dim, out))
    }

    /// Restriction to `[lo, hi]`; both ends must be nodes.
    pub fn restrict(&self, lo: f64, hi: f64) -> Result<Self> {
        let i0 = self
            .node_index(lo)
            .ok_or(Error::MisalignedWindow { s: lo, dt: self.dt })?;
        let i1 = self
            .node_index(hi)
            .ok_or(Error::MisalignedWindow { s: hi, dt: self.dt })?;
        if i1 <= i0 {
            return Err(Error::OutOfDomain {
                t: hi,
                a: lo,
                b: self.b(),
            });
        }
        Ok(self.restrict_nodes(i0, i1))
    }

    pub(crate) fn restrict_nodes(&self, i0: usize, i1: usize) -> Self {
        Self {
            a: self.node_time(i0),
            dt: self.dt,
            cells: i1 - i0,
            dim: self.dim,
            values: self.values[i0 * self.dim..(i1 + 1) * self.dim].to_vec(),
        }
    }

    /// Scalar function holding component `k`.
    pub fn component(&self, k: usize) -> Self {
        let values = self.values.iter().skip(k).step_by(self.dim).copied().collect();
        self.with_values(1, values)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_same_grid(other)?;
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect();
        Ok(self.with_values(self.dim, values))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same_grid(other)?;
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect();
        Ok(self.with_values(self.dim, values))
    }

    pub fn scale(&self, c: f64) -> Self {
        self.with_values(self.dim, self.values.iter().map(|v| c * v).collect())
    }

    /// Max nodal Euclidean distance; equals the sup distance for piecewise-linear functions.
    pub fn sup_distance(&self, other: &Self) -> Result<f64> {
        Ok(self.sub(other)?.sup_norm())
    }

    pub fn to_record(&self) -> GridRecord {
        GridRecord {
            a: self.a,
            b: self.b(),
            dt: self.dt,
            n: self.dim,
            values: self.values.chunks_exact(self.dim).map(<[f64]>::to_vec).collect(),
        }
    }

    pub fn from_record(rec: &GridRecord) -> Result<Self> {
        let f = Self::new(rec.a, rec.b, rec.dt, &rec.values)?;
        if f.dim != rec.n {
            return Err(Error::DimensionMismatch {
                expected: rec.n,
                found: f.dim,
            });
        }
        Ok(f)
    }

    /// CSV with header `t,x_1,...,x_n`, 16 significant digits.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header = vec!["t".to_string()];
        header.extend((1..=self.dim).map(|k| format!("x_{k}")));
        w.write_record(&header)?;
        for i in 0..=self.cells {
            let mut row = vec![format_sig16(self.node_time(i))];
            row.extend(self.node(i).iter().map(|v| format_sig16(*v)));
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut r = csv::Reader::from_reader(reader);
        let mut times = Vec::new();
        let mut rows = Vec::new();
        for rec in r.records() {
            let rec = rec?;
            let mut fields = rec.iter().map(|s| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|e| Error::Io(format!("bad number `{s}`: {e}")))
            });
            let t = fields.next().ok_or_else(|| Error::Io("empty CSV row".into()))??;
            times.push(t);
            rows.push(fields.collect::<Result<Vec<f64>>>()?);
        }
        if times.len() < 2 {
            return Err(Error::Io("CSV needs at least two rows".into()));
        }
        let a = times[0];
        let b = times[times.len() - 1];
        let dt = (b - a) / (times.len() - 1) as f64;
        for (i, t) in times.iter().enumerate() {
            if (t - (a + i as f64 * dt)).abs() > 1e-9 * dt.max(1e-300) * (times.len() as f64) {
                return Err(Error::Io(format!("non-uniform grid at row {}", i + 1)));
            }
        }
        Self::new(a, b, dt, &rows)
    }

    pub fn write_csv_path(&self, path: &Path) -> Result<()> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        crate::write_atomic(path, &buf)
    }

    pub fn read_csv_path(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        Self::read_csv(file)
    }
}

/// Pre-history window `u -> f(anchor + u)` on `[-h, 0]`, borrowed from its parent.
#[derive(Debug, Clone, Copy)]
pub struct WindowView<'a> {
    parent: &'a GridFunction,
    start: usize,
    cells: usize,
}

impl<'a> WindowView<'a> {
    pub fn h(&self) -> f64 {
        self.cells as f64 * self.parent.dt
    }

    pub fn dt(&self) -> f64 {
        self.parent.dt
    }

    pub fn cells(&self) -> usize {
        self.cells
    }

    pub fn dim(&self) -> usize {
        self.parent.dim
    }

    /// Node `j` of the window, `j = 0` at `u = -h`.
    pub fn node(&self, j: usize) -> &'a [f64] {
        self.parent.node(self.start + j)
    }

    /// Value at the right end `u = 0`.
    pub fn right_end(&self) -> &'a [f64] {
        self.node(self.cells)
    }

    fn coord(&self, u: f64) -> Result<f64> {
        let h = self.h();
        let slack = GRID_TOL * h.max(1.0);
        if !(u >= -h - slack && u <= slack) {
            return Err(Error::OutOfDomain { t: u, a: -h, b: 0.0 });
        }
        Ok(self.start as f64 + ((u + h) / self.parent.dt).clamp(0.0, self.cells as f64))
    }

    pub fn eval(&self, u: f64) -> Result<Vec<f64>> {
        let x = self.coord(u)?;
        let mut out = vec![0.0; self.dim()];
        self.parent.eval_coord_into(x, &mut out);
        Ok(out)
    }

    pub fn eval_into(&self, u: f64, out: &mut [f64]) -> Result<()> {
        let x = self.coord(u)?;
        self.parent.eval_coord_into(x, out);
        Ok(())
    }

    pub fn eval_component(&self, u: f64, k: usize) -> Result<f64> {
        let x = self.coord(u)?;
        Ok(self.parent.eval_coord_component(x, k))
    }

    pub fn lip_seminorm(&self) -> f64 {
        let dim = self.dim();
        (0..self.cells)
            .map(|j| {
                let (l, r) = (self.node(j), self.node(j + 1));
                (0..dim).map(|k| (r[k] - l[k]).powi(2)).sum::<f64>().sqrt() / self.parent.dt
            })
            .fold(0.0, f64::max)
    }

    /// Copies the window into a standalone function on `[-h, 0]`.
    pub fn to_grid_function(&self) -> GridFunction {
        let dim = self.dim();
        GridFunction {
            a: -self.h(),
            dt: self.parent.dt,
            cells: self.cells,
            dim,
            values: self.parent.values[self.start * dim..(self.start + self.cells + 1) * dim].to_vec(),
        }
    }

    /// Scalar copy of component `k`.
    pub fn component_grid(&self, k: usize) -> GridFunction {
        GridFunction {
            a: -self.h(),
            dt: self.parent.dt,
            cells: self.cells,
            dim: 1,
            values: (0..=self.cells).map(|j| self.node(j)[k]).collect(),
        }
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub(crate) fn format_sig16(v: f64) -> String {
    format!("{v:.15e}")
}
