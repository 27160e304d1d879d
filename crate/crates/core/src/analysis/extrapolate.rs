//! Exponential extrapolation of a fidelity series in the mitigation order.

use nalgebra::{DMatrix, Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Fit of `F(m) = F∞ − c·r^m` with `0 < r < 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Extrapolation {
    pub target: f64,
    pub value: f64,
    pub stderr: f64,
    pub f_inf: f64,
    pub c: f64,
    pub r: f64,
    /// Weighted residual sum of squares.
    pub residual: f64,
    /// False when the data are not monotone in the order, i.e. the model is
    /// a poor description; the fit is still returned.
    pub monotone: bool,
}

const R_MIN: f64 = 1e-9;
const R_MAX: f64 = 1.0 - 1e-9;

/// Weighted least squares for `(F∞, c)` at fixed `r`. Returns the residual.
fn linear_part(xs: &[f64], ys: &[f64], ws: &[f64], r: f64) -> (f64, f64, f64) {
    // Model y = f − c·g with g = r^x.
    let (mut sw, mut sg, mut sgg, mut sy, mut sgy) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for ((x, y), w) in xs.iter().zip(ys).zip(ws) {
        let g = r.powf(*x);
        sw += w;
        sg += w * g;
        sgg += w * g * g;
        sy += w * y;
        sgy += w * g * y;
    }
    let det = sw * sgg - sg * sg;
    let (f, c) = if det.abs() < 1e-300 * sw.max(1.0) {
        (sy / sw, 0.0)
    } else {
        let f = (sgg * sy - sg * sgy) / det;
        let neg_c = (sw * sgy - sg * sy) / det;
        (f, -neg_c)
    };
    let res = xs
        .iter()
        .zip(ys)
        .zip(ws)
        .map(|((x, y), w)| w * (y - (f - c * r.powf(*x))).powi(2))
        .sum();
    (f, c, res)
}

fn golden(xs: &[f64], ys: &[f64], ws: &[f64], mut a: f64, mut b: f64) -> f64 {
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    let cost = |r: f64| linear_part(xs, ys, ws, r).2;
    let mut c = b - phi * (b - a);
    let mut d = a + phi * (b - a);
    let (mut fc, mut fd) = (cost(c), cost(d));
    for _ in 0..200 {
        if (b - a).abs() < 1e-15 {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - phi * (b - a);
            fc = cost(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + phi * (b - a);
            fd = cost(d);
        }
    }
    0.5 * (a + b)
}

/// Fits the series and evaluates it at order `target`. With `sigmas` the fit
/// is weighted and the covariance uses them directly; otherwise the residual
/// variance scales an unweighted covariance.
pub fn extrapolate(
    orders: &[f64],
    values: &[f64],
    sigmas: Option<&[f64]>,
    target: f64,
) -> Result<Extrapolation> {
    if orders.len() != values.len() || sigmas.is_some_and(|s| s.len() != values.len()) {
        return Err(Error::DimensionMismatch {
            expected: orders.len(),
            actual: values.len(),
        });
    }
    if orders.len() < 3 {
        return Err(Error::InvalidArgument(
            "extrapolation needs at least three points".into(),
        ));
    }
    let ws: Vec<f64> = match sigmas {
        Some(s) => s
            .iter()
            .map(|s| if *s > 0.0 { 1.0 / (s * s) } else { 1e30 })
            .collect(),
        None => vec![1.0; values.len()],
    };
    // Log-spaced grid for the bracket, then golden-section refinement.
    let grid: Vec<f64> = (0..=400)
        .map(|i| {
            let t = i as f64 / 400.0;
            let r = (R_MIN.ln() * (1.0 - t)).exp();
            r.min(R_MAX)
        })
        .collect();
    let costs: Vec<f64> = grid
        .iter()
        .map(|&r| linear_part(orders, values, &ws, r).2)
        .collect();
    let best = costs
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .unwrap();
    let lo = grid[best.saturating_sub(1)];
    let hi = grid[(best + 1).min(grid.len() - 1)];
    let r = golden(orders, values, &ws, lo, hi);
    let (f_inf, c, residual) = linear_part(orders, values, &ws, r);

    // Covariance of (F∞, c, r) from the Jacobian.
    let n = orders.len();
    let jac = DMatrix::from_fn(n, 3, |i, k| {
        let x = orders[i];
        match k {
            0 => 1.0,
            1 => -r.powf(x),
            _ => -c * x * r.powf(x - 1.0),
        }
    });
    let w = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(ws.clone()));
    let info = jac.transpose() * &w * &jac;
    let info = Matrix3::from_fn(|i, k| info[(i, k)]);
    let scale = if sigmas.is_some() {
        1.0
    } else {
        residual / (n as f64 - 3.0).max(1.0)
    };
    let cov = info
        .pseudo_inverse(1e-12)
        .map_err(|e| Error::InvalidArgument(e.to_string()))?
        * scale;
    let grad = Vector3::new(1.0, -r.powf(target), -c * target * r.powf(target - 1.0));
    let var = (grad.transpose() * cov * grad)[(0, 0)];

    let diffs: Vec<f64> = values.windows(2).map(|p| p[1] - p[0]).collect();
    let monotone = diffs.iter().all(|d| *d >= 0.0) || diffs.iter().all(|d| *d <= 0.0);
    Ok(Extrapolation {
        target,
        value: f_inf - c * r.powf(target),
        stderr: var.max(0.0).sqrt(),
        f_inf,
        c,
        r,
        residual,
        monotone,
    })
}
