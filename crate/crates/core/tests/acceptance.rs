//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.
//!
//! Reference values are computed here by independent routes (direct matrix
//! powers, decay-position sums, slot-by-slot correction) rather than through
//! the library paths under test.

use std::collections::BTreeMap;
use std::error::Error;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use parity_mitigation::analysis::{decay_curves, drift_experiment, fit_decay, flag_defective, Oracle};
use parity_mitigation::matrix::asymmetric_assignment;
use parity_mitigation::mitigation::{
    hybrid_inverse, mitigate, post_select, residual_prep_error, twirl_inverse, AmplifiedDistribution, Moments,
};
use parity_mitigation::sim::{
    run_shots, DriftSchedule, ExecutionOrder, Layout, NoiseOverride, Scheme, SequencePlan, SimConfig,
};
use parity_mitigation::{
    AssignmentMatrix, BitString, PrepMode, PrepModel, QubitNoise, ReadoutModel, TwirledChannel,
};

type Res<T> = Result<T, Box<dyn Error>>;
type Criterion = (&'static str, fn() -> Res<Verdict>);

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Res<Verdict> {
    Ok(Verdict {
        pass,
        detail: detail.into(),
    })
}

fn one() -> BitString {
    BitString::ones(1)
}

// ---- independent helpers -------------------------------------------------

/// Column-stochastic matrix `m[o][s]` applied `k` times to `q`.
fn power_apply(m: &[Vec<f64>], k: usize, q: &[f64]) -> Vec<f64> {
    let mut v = q.to_vec();
    for _ in 0..k {
        v = (0..m.len())
            .map(|o| (0..v.len()).map(|s| m[o][s] * v[s]).sum())
            .collect();
    }
    v
}

fn random_distribution(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    let w: Vec<f64> = (0..dim).map(|_| rng.gen::<f64>()).collect();
    let total: f64 = w.iter().sum();
    w.into_iter().map(|x| x / total).collect()
}

/// Mask weights with the identity carrying at least `keep`.
fn random_masks(rng: &mut ChaCha8Rng, dim: usize, keep: f64) -> Vec<f64> {
    let rest = random_distribution(rng, dim - 1);
    let mut w = vec![keep];
    w.extend(rest.into_iter().map(|x| x * (1.0 - keep)));
    w
}

fn channel(n: usize, w: &[f64]) -> Res<TwirledChannel> {
    let terms = w
        .iter()
        .enumerate()
        .map(|(f, &p)| (BitString::from_index(f as u64, n), p))
        .collect();
    Ok(TwirledChannel::new(n, terms, false)?)
}

/// Random column-stochastic matrix with a dominant diagonal.
fn random_stochastic(rng: &mut ChaCha8Rng, dim: usize) -> Vec<Vec<f64>> {
    let mut m = vec![vec![0.0; dim]; dim];
    for s in 0..dim {
        let keep = rng.gen_range(0.6..0.99);
        let off = random_distribution(rng, dim - 1);
        let mut k = 0;
        for (o, row) in m.iter_mut().enumerate() {
            if o == s {
                row[s] = keep;
            } else {
                row[s] = off[k] * (1.0 - keep);
                k += 1;
            }
        }
    }
    m
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Least-squares slope of ln y against ln x.
fn loglog_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / n, ly.iter().sum::<f64>() / n);
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

/// Probability of a single-qubit readout sequence for a qubit starting in
/// `1`, decaying with probability `g` before each readout, read with
/// symmetric error `e`. Sums over the slot before which the decay happens.
fn decay_position_prob(seq: &[u8], e: f64, g: f64) -> f64 {
    let l = seq.len();
    let read = |state: u8, out: u8| if state == out { 1.0 - e } else { e };
    (0..=l)
        .map(|d| {
            let p_d = if d == l {
                (1.0 - g).powi(l as i32)
            } else {
                (1.0 - g).powi(d as i32) * g
            };
            let reads: f64 = seq
                .iter()
                .enumerate()
                .map(|(t, &o)| read(if t < d { 1 } else { 0 }, o))
                .product();
            p_d * reads
        })
        .sum()
}

fn seq_str(seq: &[u8]) -> String {
    seq.iter().map(|b| char::from(b'0' + b)).collect()
}

fn all_sequences(l: usize) -> Vec<Vec<u8>> {
    (0..1u32 << l)
        .map(|i| (0..l).map(|t| (i >> t & 1) as u8).collect())
        .collect()
}

fn exact_tally(dist: &[f64], j: usize, scheme: Scheme, n: usize) -> AmplifiedDistribution {
    let outcomes: BTreeMap<BitString, Moments> = dist
        .iter()
        .enumerate()
        .map(|(o, &p)| (BitString::from_index(o as u64, n), Moments { sum: p, sumsq: p }))
        .collect();
    AmplifiedDistribution {
        j,
        scheme,
        n_qubits: n,
        n_shots: 1,
        outcomes,
    }
}

// ---- criteria ------------------------------------------------------------

fn c1() -> Res<Verdict> {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut worst = 0.0f64;
    for _ in 0..200 {
        let n = rng.gen_range(1..=3usize);
        let j = rng.gen_range(0..=3usize);
        let dim = 1 << n;
        let keep = rng.gen_range(0.5..0.98);
        let w = random_masks(&mut rng, dim, keep);
        let q = random_distribution(&mut rng, dim);
        let m: Vec<Vec<f64>> = (0..dim).map(|o| (0..dim).map(|s| w[o ^ s]).collect()).collect();
        let expect = power_apply(&m, 2 * j + 1, &q);
        let got = Oracle::new(
            ReadoutModel::Twirled(channel(n, &w)?),
            QubitNoise::none(n),
            &BitString::zeros(n),
        )?
        .with_initial(q)?
        .enumerate::<f64>(2 * j + 1)?
        .parity_distribution(0..2 * j + 1)?;
        worst = worst.max(max_diff(&got, &expect));
    }
    let secs = start.elapsed().as_secs_f64();
    verdict(
        worst <= 1e-12 && secs <= 30.0,
        format!("200 channels, max |parity - M^(2j+1)q| = {worst:.1e}, {secs:.1}s"),
    )
}

fn c2() -> Res<Verdict> {
    let start = Instant::now();
    let mut notes = Vec::new();
    let mut ok = true;
    // Weight column for three-readout sequences, first readout first.
    let weight = |s: &[u8]| -> f64 {
        match s {
            [1, 0, 0] | [0, 1, 1] => 0.0,
            [0, 0, 1] | [1, 1, 0] => 2.0,
            _ => 1.0,
        }
    };
    for (label, e, g, scheme, seed) in [
        ("table1", 0.1, 0.0, Scheme::Basic, 1101u64),
        ("table2", 0.05, 0.01, Scheme::Weighted, 1102u64),
    ] {
        let oracle = Oracle::new(
            ReadoutModel::symmetric(&[e]),
            QubitNoise::uniform(1, g, 0.0)?,
            &one(),
        )?;
        let table = oracle.enumerate::<f64>(3)?;
        let seqs = all_sequences(3);
        let mut worst = 0.0f64;
        for s in &seqs {
            let closed = if g == 0.0 {
                let zeros = s.iter().filter(|&&b| b == 0).count() as i32;
                e.powi(zeros) * (1.0 - e).powi(3 - zeros)
            } else {
                decay_position_prob(s, e, g)
            };
            worst = worst.max((table.prob_of(&[seq_str(s).as_str()])? - closed).abs());
        }
        // Tallied probability of outcome 1 at level 1.
        let tally_closed: f64 = seqs
            .iter()
            .filter(|s| s.iter().map(|&b| b as u32).sum::<u32>() % 2 == 1)
            .map(|s| {
                let w = if scheme == Scheme::Weighted {
                    weight(s)
                } else {
                    1.0
                };
                w * decay_position_prob(s, e, g)
            })
            .sum();
        let tally_oracle = oracle.level_distribution::<f64>(scheme, 1)?[1];
        worst = worst.max((tally_oracle - tally_closed).abs());
        ok &= worst <= 1e-12;

        // Monte Carlo at 1e6 shots.
        let n = 1_000_000u64;
        let config = SimConfig::new(
            ReadoutModel::symmetric(&[e]),
            QubitNoise::uniform(1, g, 0.0)?,
            one(),
        );
        let records = run_shots(config, SequencePlan::new(scheme, 1), Layout::Level(1), n, seed)?;
        let mut counts: BTreeMap<String, u64> = BTreeMap::new();
        for r in &records.records {
            *counts.entry(r.qubits[0].to_string()).or_default() += 1;
        }
        let mut worst_z = 0.0f64;
        let mut sum_w = 0.0;
        let mut sum_w2 = 0.0;
        for s in &seqs {
            let p = decay_position_prob(s, e, g);
            let f = *counts.get(&seq_str(s)).unwrap_or(&0) as f64 / n as f64;
            worst_z = worst_z.max((f - p).abs() / (p * (1.0 - p) / n as f64).sqrt());
            if s.iter().map(|&b| b as u32).sum::<u32>() % 2 == 1 {
                let w = if scheme == Scheme::Weighted {
                    weight(s)
                } else {
                    1.0
                };
                sum_w += w * f;
                sum_w2 += w * w * f;
            }
        }
        let sd = ((sum_w2 - sum_w * sum_w) / n as f64).sqrt();
        let tally_z = (sum_w - tally_closed).abs() / sd;
        worst_z = worst_z.max(tally_z);
        ok &= worst_z <= 4.0;
        notes.push(format!("{label}: exact dev {worst:.1e}, MC max |z| {worst_z:.2}"));
    }
    let secs = start.elapsed().as_secs_f64();
    ok &= secs <= 60.0;
    verdict(ok, format!("{}, {secs:.1}s", notes.join("; ")))
}

fn c3() -> Res<Verdict> {
    let grid = [0.01, 0.03, 0.05];
    let mut worst = (0.0f64, 0.0, 0.0, 0usize);
    for &e in &grid {
        for &g in &grid {
            let oracle = Oracle::new(
                ReadoutModel::symmetric(&[e]),
                QubitNoise::uniform(1, g, 0.0)?,
                &one(),
            )?;
            for j in 0..=3usize {
                let p = oracle.level_distribution::<f64>(Scheme::Basic, j)?[1];
                let law = (1.0 - e).powi(2 * j as i32 + 1) - (j as f64 + 1.0) * g;
                let c = (p - law).abs() / (g * g + g * e);
                if c > worst.0 {
                    worst = (c, e, g, j);
                }
            }
        }
    }
    let (c, e, g, j) = worst;
    verdict(
        c <= 10.0,
        format!("worst C = {c:.1} at eps={e}, gamma={g}, j={j} (bound 10)"),
    )
}

fn mitigated_at(scheme: Scheme, m: usize, e: f64, g: f64) -> Res<f64> {
    let oracle = Oracle::new(
        ReadoutModel::symmetric(&[e]),
        QubitNoise::formal(vec![g], vec![0.0]),
        &one(),
    )?;
    Ok(oracle.mitigated_distribution(scheme, m)?[1])
}

fn c4() -> Res<Verdict> {
    let h = 1e-4;
    let deriv = |scheme, m, e| -> Res<f64> {
        Ok((mitigated_at(scheme, m, e, h)? - mitigated_at(scheme, m, e, -h)?) / (2.0 * h))
    };
    let mut ok = true;
    let mut worst_ratio = 0.0f64;
    for scheme in [Scheme::Dummy, Scheme::Weighted] {
        for m in 1..=2 {
            for e in [0.01, 0.03, 0.05] {
                let d = deriv(scheme, m, e)?;
                worst_ratio = worst_ratio.max(d.abs() / e);
                ok &= d.abs() <= 10.0 * e;
            }
        }
    }
    let mut basic = Vec::new();
    for m in 1..=2 {
        let d = deriv(Scheme::Basic, m, 0.01)?;
        ok &= (d + 0.5).abs() <= 0.05;
        basic.push(format!("m={m}: {d:.3}"));
    }
    verdict(
        ok,
        format!(
            "dummy/weighted max |d|/eps = {worst_ratio:.2} (bound 10); basic at eps=0.01 {}",
            basic.join(", ")
        ),
    )
}

fn c5() -> Res<Verdict> {
    let eps = [0.02, 0.04, 0.08];
    let mut ok = true;
    let mut notes = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(505);
    // Fixed random shapes, scaled by eps.
    let shape2 = random_distribution(&mut rng, 3);
    let general = random_stochastic(&mut rng, 4);
    let target2 = BitString::from_index(2, 2);
    for m in 0..=3usize {
        // Symmetric single qubit.
        let r1: Vec<f64> = eps
            .iter()
            .map(|&e| {
                let o = Oracle::new(ReadoutModel::symmetric(&[e]), QubitNoise::none(1), &one())?;
                Ok((1.0 - o.mitigated_distribution(Scheme::Basic, m)?[1]).abs())
            })
            .collect::<Res<_>>()?;
        // Twirled two-qubit channel with eps total flip weight.
        let r2: Vec<f64> = eps
            .iter()
            .map(|&e| {
                let mut w = vec![1.0 - e];
                w.extend(shape2.iter().map(|x| x * e));
                let o = Oracle::new(
                    ReadoutModel::Twirled(channel(2, &w)?),
                    QubitNoise::none(2),
                    &target2,
                )?;
                Ok((1.0 - o.mitigated_distribution(Scheme::Basic, m)?[2]).abs())
            })
            .collect::<Res<_>>()?;
        let s1 = loglog_slope(&eps, &r1);
        let s2 = loglog_slope(&eps, &r2);
        ok &= (s1 - (m as f64 + 1.0)).abs() <= 0.2 && (s2 - (m as f64 + 1.0)).abs() <= 0.2;

        // Non-twirled: M = I + eps (G - I) for a fixed random stochastic G,
        // abscissa -ln p1 of the true state's column.
        let mut xs = Vec::new();
        let mut r3 = Vec::new();
        for &e in &eps {
            let rows: Vec<Vec<f64>> = (0..4)
                .map(|o| {
                    (0..4)
                        .map(|s| e * general[o][s] + if o == s { 1.0 - e } else { 0.0 })
                        .collect()
                })
                .collect();
            let p1 = rows[2][2];
            let o = Oracle::new(
                ReadoutModel::Dense(AssignmentMatrix::from_rows(&rows)?),
                QubitNoise::none(2),
                &target2,
            )?;
            xs.push(-p1.ln());
            r3.push((1.0 - o.mitigated_distribution(Scheme::Basic, m)?[2]).abs());
        }
        let s3 = loglog_slope(&xs, &r3);
        ok &= s3 >= m as f64 + 0.7;
        notes.push(format!("m={m}: {s1:.2}/{s2:.2}/{s3:.2}"));
    }
    verdict(
        ok,
        format!("slopes symmetric/twirled/non-twirled {}", notes.join(", ")),
    )
}

fn c6() -> Res<Verdict> {
    let maj = |e: f64, g: f64, m: usize| -> Res<f64> {
        let o = Oracle::new(
            ReadoutModel::symmetric(&[e]),
            QubitNoise::uniform(1, g, 0.0)?,
            &one(),
        )?;
        Ok(o.level_distribution::<f64>(Scheme::Majority, m)?[1])
    };
    let (e, g) = (0.02, 0.01);
    let mut ok = true;
    let mut notes = Vec::new();
    for m in 0..=3usize {
        let bias = maj(e, g, m)? - maj(e, 0.0, m)?;
        let expect = -(m as f64 + 1.0) * g;
        let rel = (bias / expect - 1.0).abs();
        ok &= rel <= 0.15;
        notes.push(format!("m={m}: {bias:.4}"));
    }
    let raw = maj(0.01, 0.03, 0)?;
    let m1 = maj(0.01, 0.03, 1)?;
    ok &= m1 < raw;
    verdict(
        ok,
        format!(
            "bias at gamma=0.01, eps=0.02 {}; at gamma=0.03, eps=0.01 m=1 {m1:.4} vs raw {raw:.4}",
            notes.join(", ")
        ),
    )
}

fn c7() -> Res<Verdict> {
    let mut rng = ChaCha8Rng::seed_from_u64(707);
    let mut worst = 0.0f64;
    for case in 0..100 {
        let n = 1 + case % 2;
        let dim = 1 << n;
        let j = rng.gen_range(0..=3usize);
        let rows = random_stochastic(&mut rng, dim);
        let q = random_distribution(&mut rng, dim);
        let expect = power_apply(&rows, 2 * j + 1, &q);
        let got = Oracle::new(
            ReadoutModel::Dense(AssignmentMatrix::from_rows(&rows)?),
            QubitNoise::none(n),
            &BitString::zeros(n),
        )?
        .with_initial(q)?
        .with_resets(true)
        .level_distribution::<f64>(Scheme::Reset, j)?;
        worst = worst.max(max_diff(&got, &expect));
    }
    verdict(worst <= 1e-12, format!("100 matrices, max deviation {worst:.1e}"))
}

/// Applies the quasi-channel `beta` to every slot of a sequence table, then
/// takes the parity over all slots.
fn correct_then_parity(table: &[f64], n: usize, slots: usize, beta: &TwirledChannel) -> Vec<f64> {
    let dim = 1usize << n;
    let mut cur = table.to_vec();
    for t in 0..slots {
        let shift = n * t;
        let mut next = vec![0.0; cur.len()];
        for (idx, &p) in cur.iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            for (f, w) in beta.terms() {
                next[idx ^ ((f.to_index() as usize) << shift)] += p * w;
            }
        }
        cur = next;
    }
    let mut out = vec![0.0; dim];
    for (idx, p) in cur.iter().enumerate() {
        let par = (0..slots).fold(0, |acc, t| acc ^ (idx >> (n * t)) & (dim - 1));
        out[par] += p;
    }
    out
}

fn c8() -> Res<Verdict> {
    let mut rng = ChaCha8Rng::seed_from_u64(808);
    let mut worst = 0.0f64;
    for _ in 0..60 {
        let n = rng.gen_range(1..=3usize);
        let j = rng.gen_range(0..=2usize);
        let dim = 1 << n;
        let (k1, k2) = (rng.gen_range(0.7..0.95), rng.gen_range(0.7..0.95));
        let w = random_masks(&mut rng, dim, k1);
        let approx = random_masks(&mut rng, dim, k2);
        let beta = channel(n, &approx)?.inverse()?;
        let oracle = Oracle::new(
            ReadoutModel::Twirled(channel(n, &w)?),
            QubitNoise::none(n),
            &BitString::zeros(n),
        )?
        .with_initial(random_distribution(&mut rng, dim))?;
        let slots = 2 * j + 1;
        let table = oracle.enumerate::<f64>(slots)?;
        let first = correct_then_parity(&table.table, n, slots, &beta);
        let tally = exact_tally(&table.parity_distribution(0..slots)?, j, Scheme::Basic, n);
        let corrected = hybrid_inverse(&tally, &beta, j)?;
        let second: Vec<f64> = (0..dim)
            .map(|o| corrected.prob(&BitString::from_index(o as u64, n)))
            .collect();
        worst = worst.max(max_diff(&first, &second));
    }

    // Acceleration with a 10% miscalibrated inverse.
    let (p01, p10) = (0.08, 0.12);
    let actual = asymmetric_assignment(p01, p10)?;
    let inverse = twirl_inverse(&asymmetric_assignment(p01 * 1.1, p10 * 0.9)?)?;
    let oracle = Oracle::new(ReadoutModel::Dense(actual).twirled(), QubitNoise::none(1), &one())?;
    let mut plain = Vec::new();
    let mut hybrid = Vec::new();
    for j in 0..=1 {
        let t = exact_tally(
            &oracle.level_distribution::<f64>(Scheme::Basic, j)?,
            j,
            Scheme::Basic,
            1,
        );
        hybrid.push(hybrid_inverse(&t, &inverse, j)?);
        plain.push(t);
    }
    let r_plain = (1.0 - mitigate(&plain, 1)?.value.at(&one())).abs();
    let r_hybrid = (1.0 - mitigate(&hybrid, 1)?.value.at(&one())).abs();
    verdict(
        worst <= 1e-12 && r_hybrid <= r_plain / 4.0,
        format!(
            "commutation max deviation {worst:.1e}; m=1 residual plain {r_plain:.2e}, hybrid {r_hybrid:.2e}"
        ),
    )
}

fn c9() -> Res<Verdict> {
    let (x, e) = (0.05, 0.05);
    let k3 = residual_prep_error(x, e, e, 3)?;
    let k2 = residual_prep_error(x, e, e, 2)?;
    let mut config = SimConfig::new(ReadoutModel::symmetric(&[e]), QubitNoise::none(1), one());
    config.prep = PrepModel::new(vec![x], PrepMode::PostSelected { k: 3 })?;
    let n = 1_000_000u64;
    let records = run_shots(
        config,
        SequencePlan::new(Scheme::Basic, 0),
        Layout::Shared,
        n,
        909,
    )?;
    let (_, rate) = post_select(&records, 3)?;
    let s = (1.0 - x) * (1.0 - e).powi(3);
    let z = (rate - s).abs() / (s * (1.0 - s) / n as f64).sqrt();
    verdict(
        (7e-6..=9e-6).contains(&k3) && (1.3e-4..=1.7e-4).contains(&k2) && z <= 4.0,
        format!("k=3 {k3:.3e}, k=2 {k2:.3e}, success rate {rate:.5} vs {s:.5} (|z| {z:.2})"),
    )
}

fn c10() -> Res<Verdict> {
    let start = Instant::now();
    let n = 1_000_000u64;
    let mut config = SimConfig::new(ReadoutModel::symmetric(&[0.05]), QubitNoise::none(1), one());
    let eps = |e: f64| NoiseOverride {
        epsilon: Some(vec![e]),
        ..Default::default()
    };
    config.drift = DriftSchedule::linear_ramp(n, eps(0.05), eps(0.15));
    let inter = drift_experiment(&config, Scheme::Basic, 1, n, ExecutionOrder::Interleaved, 1010)?;
    let blocked = drift_experiment(&config, Scheme::Basic, 1, n, ExecutionOrder::Blocked, 1010)?;
    let reference = inter.reference.ok_or("no drift-free reference")?;
    let envelope = (reference - 1.0).abs();
    let inter_bias = inter.estimate - reference;
    let blocked_bias = blocked.estimate - reference;
    let secs = start.elapsed().as_secs_f64();
    let ok = (inter.estimate - 1.0).abs() <= 2.0 * inter.stderr + envelope
        && blocked_bias.abs() >= 3.0 * inter_bias.abs().max(inter.stderr)
        && secs <= 300.0;
    verdict(
        ok,
        format!(
            "reference {reference:.5}; interleaved {:.5} ± {:.5} (drift bias {inter_bias:+.5}); blocked {:.5} (drift bias {blocked_bias:+.5}); {secs:.1}s",
            inter.estimate, inter.stderr, blocked.estimate
        ),
    )
}

fn c11() -> Res<Verdict> {
    let n_qubits = 21;
    let bad = 7;
    let mut gamma = vec![0.01; n_qubits];
    gamma[bad] = 0.1;
    let noise = QubitNoise::new(gamma, vec![0.0; n_qubits])?;
    let config = SimConfig::new(
        ReadoutModel::symmetric(&[0.05; 21]),
        noise,
        BitString::ones(n_qubits),
    );
    let records = run_shots(
        config,
        SequencePlan::new(Scheme::Basic, 6),
        Layout::Shared,
        100_000,
        1111,
    )?;
    let fits = decay_curves(&records, true)?
        .iter()
        .map(fit_decay)
        .collect::<Result<Vec<_>, _>>()?;
    let flagged = flag_defective(&fits, 5.0);
    let mut clean: Vec<f64> = fits.iter().filter(|f| f.qubit != bad).map(|f| f.slope).collect();
    clean.sort_by(f64::total_cmp);
    verdict(
        flagged == vec![bad],
        format!(
            "flagged {flagged:?} (defective {bad}); clean slopes {:.4}..{:.4}, defective {:.4}",
            clean[0],
            clean[clean.len() - 1],
            fits[bad].slope
        ),
    )
}

fn read_dir_bytes(dir: &Path) -> Res<BTreeMap<String, Vec<u8>>> {
    let mut out = BTreeMap::new();
    for entry in std::fs::read_dir(dir)? {
        let entry = entry?;
        out.insert(
            entry.file_name().to_string_lossy().into_owned(),
            std::fs::read(entry.path())?,
        );
    }
    Ok(out)
}

fn c12() -> Res<Verdict> {
    let bin = env!("CARGO_BIN_EXE_parmit");
    let tmp = tempfile::tempdir()?;
    let runs: [&[&str]; 2] = [
        &["report", "--preset", "table2"],
        &["simulate", "--preset", "reset-h1-desk", "--format", "bin"],
    ];
    let mut notes = Vec::new();
    let mut ok = true;
    for (r, args) in runs.iter().enumerate() {
        let mut outputs = Vec::new();
        for threads in [1, 4, 16] {
            let dir = tmp.path().join(format!("run{r}_t{threads}"));
            let status = Command::new(bin)
                .args(*args)
                .args(["--threads", &threads.to_string(), "--out"])
                .arg(&dir)
                .stdout(std::process::Stdio::null())
                .status()?;
            if !status.success() {
                return verdict(false, format!("{} exited with {status}", args.join(" ")));
            }
            outputs.push(read_dir_bytes(&dir)?);
        }
        let same = outputs.windows(2).all(|w| w[0] == w[1]);
        ok &= same && !outputs[0].is_empty();
        notes.push(format!(
            "{} ({} files) {}",
            args[..3].join(" "),
            outputs[0].len(),
            if same { "identical" } else { "DIFFER" }
        ));
    }
    verdict(ok, format!("threads 1/4/16: {}", notes.join("; ")))
}

fn main() {
    let criteria: [Criterion; 12] = [
        ("C1 parity-power theorem", c1),
        ("C2 table reproduction", c2),
        ("C3 decay-bias law", c3),
        ("C4 first-order decay cancellation", c4),
        ("C5 residual scaling", c5),
        ("C6 majority-vote bias", c6),
        ("C7 reset-power equivalence", c7),
        ("C8 hybrid commutativity and acceleration", c8),
        ("C9 post-selection", c9),
        ("C10 drift resilience", c10),
        ("C11 decay diagnostics", c11),
        ("C12 thread-count determinism", c12),
    ];
    let mut failed = 0;
    let total = Instant::now();
    for (name, f) in criteria {
        let start = Instant::now();
        let (pass, detail) = match f() {
            Ok(v) => (v.pass, v.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        let took = Duration::from_secs_f64(start.elapsed().as_secs_f64());
        println!(
            "{} {name}: {detail} [{:.1}s]",
            if pass { "PASS" } else { "FAIL" },
            took.as_secs_f64()
        );
        if !pass {
            failed += 1;
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed in {:.1}s",
        12 - failed,
        total.elapsed().as_secs_f64()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
