//! Per-qubit decay curves from repeated readouts, and outlier flagging.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::analysis::stats::median;
use crate::error::{Error, Result};
use crate::sim::record::RecordSet;

/// Population of the post-selected value at each slot, among shots whose
/// first readout of this qubit gave that value. Slot 0 is 1 by construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayCurve {
    pub qubit: usize,
    pub populations: Vec<f64>,
    /// Shots surviving the post-selection.
    pub n: usize,
}

/// `y(t) = a + b·e^(−λt)` fitted over slots 1.., with `rate = 1 − e^(−λ)`
/// the per-readout decay probability. Over a short train `a`, `b` and `λ`
/// trade off against each other; the initial slope `b·λ` does not.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub qubit: usize,
    pub a: f64,
    pub b: f64,
    pub lambda: f64,
    pub rate: f64,
    /// Initial decay per slot of the fitted curve, `b·λ`.
    pub slope: f64,
    /// Root-mean-square residual of the fit.
    pub residual: f64,
}

pub fn decay_curves(records: &RecordSet, post_select_bit: bool) -> Result<Vec<DecayCurve>> {
    if records.is_empty() {
        return Err(Error::Empty("decay curves from zero shots"));
    }
    if records.slots < 2 {
        return Err(Error::InvalidArgument(
            "decay curves need at least two slots".into(),
        ));
    }
    (0..records.n_qubits)
        .map(|q| {
            let mut hits = vec![0usize; records.slots];
            let mut n = 0;
            for r in &records.records {
                let seq = &r.qubits[q];
                if seq.get(0) != post_select_bit {
                    continue;
                }
                n += 1;
                for (t, h) in hits.iter_mut().enumerate() {
                    if seq.get(t) == post_select_bit {
                        *h += 1;
                    }
                }
            }
            if n == 0 {
                return Err(Error::Empty("no shot survives the first-readout selection"));
            }
            Ok(DecayCurve {
                qubit: q,
                populations: hits.iter().map(|&h| h as f64 / n as f64).collect(),
                n,
            })
        })
        .collect()
}

fn linear_ab(ts: &[f64], ys: &[f64], lambda: f64) -> (f64, f64, f64) {
    let n = ts.len() as f64;
    let g: Vec<f64> = ts.iter().map(|t| (-lambda * t).exp()).collect();
    let (sg, sgg): (f64, f64) = (g.iter().sum(), g.iter().map(|x| x * x).sum());
    let sy: f64 = ys.iter().sum();
    let sgy: f64 = g.iter().zip(ys).map(|(a, b)| a * b).sum();
    let det = n * sgg - sg * sg;
    let (a, b) = if det.abs() < 1e-300 {
        (sy / n, 0.0)
    } else {
        ((sgg * sy - sg * sgy) / det, (n * sgy - sg * sy) / det)
    };
    let sse = g.iter().zip(ys).map(|(g, y)| (y - a - b * g).powi(2)).sum();
    (a, b, sse)
}

pub fn fit_decay(curve: &DecayCurve) -> Result<DecayFit> {
    let ys = &curve.populations[1..];
    if ys.len() < 3 {
        return Err(Error::InvalidArgument(
            "decay fit needs at least four slots".into(),
        ));
    }
    let ts: Vec<f64> = (1..curve.populations.len()).map(|t| t as f64).collect();
    let cost = |l: f64| linear_ab(&ts, ys, l).2;
    // Grid over rates in (1e-6, 1), then golden section in λ.
    let grid: Vec<f64> = (0..=300)
        .map(|i| -(1.0 - 10f64.powf(-6.0 + 6.0 * i as f64 / 300.0)).ln())
        .map(|l| if l.is_finite() { l } else { 30.0 })
        .collect();
    let best = (0..grid.len())
        .min_by(|&i, &k| cost(grid[i]).total_cmp(&cost(grid[k])))
        .unwrap();
    let (mut lo, mut hi) = (grid[best.saturating_sub(1)], grid[(best + 1).min(grid.len() - 1)]);
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..200 {
        let c = hi - phi * (hi - lo);
        let d = lo + phi * (hi - lo);
        if cost(c) < cost(d) {
            hi = d;
        } else {
            lo = c;
        }
        if hi - lo < 1e-14 {
            break;
        }
    }
    let lambda = 0.5 * (lo + hi);
    let (a, b, sse) = linear_ab(&ts, ys, lambda);
    Ok(DecayFit {
        qubit: curve.qubit,
        a,
        b,
        lambda,
        rate: 1.0 - (-lambda).exp(),
        slope: b * lambda,
        residual: (sse / ys.len() as f64).sqrt(),
    })
}

/// Qubits whose initial slope is at least `factor` times the median slope.
pub fn flag_defective(fits: &[DecayFit], factor: f64) -> Vec<usize> {
    let slopes: Vec<f64> = fits.iter().map(|f| f.slope).collect();
    let med = median(&slopes);
    fits.iter()
        .filter(|f| f.slope >= factor * med)
        .map(|f| f.qubit)
        .collect()
}

/// CSV with columns `qubit,slot,population,n`.
pub fn write_curves_csv<W: Write>(mut w: W, curves: &[DecayCurve]) -> Result<()> {
    writeln!(w, "qubit,slot,population,n")?;
    for c in curves {
        for (t, p) in c.populations.iter().enumerate() {
            writeln!(w, "{},{},{},{}", c.qubit, t, p, c.n)?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::oracle::Oracle;
    use crate::bits::BitString;
    use crate::noise::{QubitNoise, ReadoutModel};

    // Exact curve from the oracle: P(read 1 at t | read 1 at 0).
    fn exact_curve(eps: f64, gamma: f64, slots: usize) -> DecayCurve {
        let one: BitString = "1".parse().unwrap();
        let o = Oracle::new(
            ReadoutModel::symmetric(&[eps]),
            QubitNoise::uniform(1, gamma, 0.0).unwrap(),
            &one,
        )
        .unwrap();
        let r = o.enumerate::<f64>(slots).unwrap();
        let mut joint = vec![0.0; slots];
        for (idx, p) in r.table.iter().enumerate() {
            if idx & 1 == 1 {
                for (t, j) in joint.iter_mut().enumerate() {
                    if idx >> t & 1 == 1 {
                        *j += p;
                    }
                }
            }
        }
        DecayCurve {
            qubit: 0,
            populations: joint.iter().map(|j| j / joint[0]).collect(),
            n: 1,
        }
    }

    #[test]
    fn exact_curve_is_single_exponential() {
        for (eps, gamma) in [(0.05, 0.01), (0.02, 0.1), (0.1, 0.3)] {
            let fit = fit_decay(&exact_curve(eps, gamma, 13)).unwrap();
            assert!(fit.residual < 1e-3, "{fit:?}");
            assert!((fit.rate - gamma).abs() < 1e-6, "{fit:?}");
        }
    }

    #[test]
    fn flags_outlier_only() {
        let fits: Vec<DecayFit> = [0.01, 0.011, 0.009, 0.1, 0.0105]
            .iter()
            .enumerate()
            .map(|(q, &rate)| DecayFit {
                qubit: q,
                a: 0.0,
                b: 1.0,
                lambda: -(1.0f64 - rate).ln(),
                rate,
                slope: -(1.0f64 - rate).ln(),
                residual: 0.0,
            })
            .collect();
        assert_eq!(flag_defective(&fits, 5.0), vec![3]);
    }

    #[test]
    fn csv_layout() {
        let c = DecayCurve {
            qubit: 2,
            populations: vec![1.0, 0.5],
            n: 4,
        };
        let mut out = Vec::new();
        write_curves_csv(&mut out, &[c]).unwrap();
        assert_eq!(
            String::from_utf8(out).unwrap(),
            "qubit,slot,population,n\n2,0,1,4\n2,1,0.5,4\n"
        );
    }
}
