#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use sdde_core::convex_projection::WAlphaSet;

/// Squared H^1 norm of a scalar nodal function, cell by cell.
pub fn h1_sq(x: &[f64], dt: f64) -> f64 {
    x.windows(2)
        .map(|w| dt / 3.0 * (w[0] * w[0] + w[0] * w[1] + w[1] * w[1]) + (w[1] - w[0]).powi(2) / dt)
        .sum()
}

/// Squared L2 norm of a scalar nodal function.
pub fn l2_sq(x: &[f64], dt: f64) -> f64 {
    x.windows(2)
        .map(|w| dt / 3.0 * (w[0] * w[0] + w[0] * w[1] + w[1] * w[1]))
        .sum()
}

pub struct Bound {
    pub row: Vec<f64>,
    pub lo: f64,
    pub hi: f64,
}

/// Exhaustive active-set search for `min |v - phi|_{H^1}^2` under two-sided
/// linear bounds. Every (free / lower / upper) choice per bound is solved as
/// an equality-constrained problem; the best feasible candidate wins.
pub fn brute_force_projection(phi: &[f64], dt: f64, bounds: &[Bound]) -> Vec<f64> {
    let n = phi.len();
    let unit = |i: usize| {
        let mut e = vec![0.0; n];
        e[i] = 1.0;
        e
    };
    let mut gram = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let mut e = unit(i);
            e[j] += 1.0;
            let both = h1_sq(&e, dt);
            gram[(i, j)] = if i == j {
                h1_sq(&unit(i), dt)
            } else {
                0.5 * (both - h1_sq(&unit(i), dt) - h1_sq(&unit(j), dt))
            };
        }
    }
    let phi_v = DVector::from_column_slice(phi);
    let feasible = |v: &DVector<f64>| {
        bounds.iter().all(|b| {
            let x: f64 = b.row.iter().zip(v.iter()).map(|(r, y)| r * y).sum();
            x >= b.lo - 1e-11 && x <= b.hi + 1e-11
        })
    };
    let objective = |v: &DVector<f64>| {
        let d = v - &phi_v;
        (d.transpose() * &gram * &d)[(0, 0)]
    };
    let mut best: Option<(f64, DVector<f64>)> = None;
    for code in 0..3usize.pow(bounds.len() as u32) {
        let mut active = Vec::new();
        let mut c = code;
        for b in bounds {
            match c % 3 {
                1 => active.push((&b.row, b.lo)),
                2 => active.push((&b.row, b.hi)),
                _ => {}
            }
            c /= 3;
        }
        let k = active.len();
        if k > n {
            continue;
        }
        let mut kkt = DMatrix::zeros(n + k, n + k);
        let mut rhs = DVector::zeros(n + k);
        kkt.view_mut((0, 0), (n, n)).copy_from(&(&gram * 2.0));
        rhs.rows_mut(0, n).copy_from(&(&gram * &phi_v * 2.0));
        for (r, (row, val)) in active.iter().enumerate() {
            for j in 0..n {
                kkt[(n + r, j)] = row[j];
                kkt[(j, n + r)] = row[j];
            }
            rhs[n + r] = *val;
        }
        let Some(sol) = kkt.clone().full_piv_lu().solve(&rhs) else {
            continue;
        };
        if !sol.iter().all(|x| x.is_finite()) || (&kkt * &sol - &rhs).norm() > 1e-9 * rhs.norm().max(1.0) {
            continue;
        }
        let v = sol.rows(0, n).into_owned();
        if !feasible(&v) {
            continue;
        }
        let obj = objective(&v);
        if best.as_ref().is_none_or(|(b, _)| obj < *b) {
            best = Some((obj, v));
        }
    }
    best.expect("feasible set is non-empty").1.iter().copied().collect()
}

pub fn slope_bounds(n: usize, dt: f64, cap: f64) -> Vec<Bound> {
    (0..n - 1)
        .map(|i| {
            let mut row = vec![0.0; n];
            row[i] = -1.0;
            row[i + 1] = 1.0;
            Bound {
                row,
                lo: -cap * dt,
                hi: cap * dt,
            }
        })
        .collect()
}

pub fn walpha_bounds(n: usize, dt: f64, set: &WAlphaSet) -> Vec<Bound> {
    let mut b = slope_bounds(n, dt, set.slope_bound());
    for i in 0..n {
        let mut row = vec![0.0; n];
        row[i] = 1.0;
        b.push(Bound {
            row,
            lo: set.lower(),
            hi: set.upper(),
        });
    }
    b
}
