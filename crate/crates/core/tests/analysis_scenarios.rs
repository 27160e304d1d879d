//! Diagnostics, extrapolation and drift on simulated runs.

use parity_mitigation::analysis::{
    decay_curves, drift_experiment, extrapolate, fit_decay, flag_defective, Oracle,
};
use parity_mitigation::mitigation::mitigate_shared;
use parity_mitigation::sim::{
    run_shots, DriftSchedule, ExecutionOrder, Layout, NoiseOverride, Scheme, SequencePlan, SimConfig,
};
use parity_mitigation::{BitString, QubitNoise, ReadoutModel};

fn eps(e: f64) -> NoiseOverride {
    NoiseOverride {
        epsilon: Some(vec![e]),
        ..Default::default()
    }
}

#[test]
fn decay_curves_are_flat_without_decay() {
    let e = 0.05;
    let config = SimConfig::new(
        ReadoutModel::symmetric(&[e]),
        QubitNoise::none(1),
        BitString::ones(1),
    );
    let records = run_shots(
        config,
        SequencePlan::new(Scheme::Basic, 6),
        Layout::Shared,
        50_000,
        4,
    )
    .unwrap();
    let curve = &decay_curves(&records, true).unwrap()[0];
    assert_eq!(curve.populations.len(), 13);
    let sd = (e * (1.0 - e) / curve.n as f64).sqrt();
    for (t, p) in curve.populations.iter().enumerate().skip(1) {
        assert!((p - (1.0 - e)).abs() <= 4.0 * sd, "slot {t}: {p}");
    }
}

#[test]
fn fitted_decay_rate_tracks_gamma() {
    let g = 0.02;
    let config = SimConfig::new(
        ReadoutModel::symmetric(&[0.05]),
        QubitNoise::uniform(1, g, 0.0).unwrap(),
        BitString::ones(1),
    );
    let records = run_shots(
        config,
        SequencePlan::new(Scheme::Basic, 6),
        Layout::Shared,
        400_000,
        6,
    )
    .unwrap();
    let fit = fit_decay(&decay_curves(&records, true).unwrap()[0]).unwrap();
    assert!((fit.rate - g).abs() <= 0.25 * g, "rate {}", fit.rate);
}

#[test]
fn defective_qubit_from_mid_run_degradation_is_flagged() {
    let n_qubits = 8;
    let bad = 3;
    let n = 60_000;
    let base = vec![0.01; n_qubits];
    let mut worse = base.clone();
    worse[bad] = 0.3;
    let gamma = |g: &Vec<f64>| NoiseOverride {
        gamma_down: Some(g.clone()),
        ..Default::default()
    };
    let mut config = SimConfig::new(
        ReadoutModel::symmetric(&[0.05; 8]),
        QubitNoise::new(base.clone(), vec![0.0; n_qubits]).unwrap(),
        BitString::ones(n_qubits),
    );
    config.drift = DriftSchedule::step(n, n / 2, gamma(&base), gamma(&worse));
    let records = run_shots(config, SequencePlan::new(Scheme::Basic, 6), Layout::Shared, n, 8).unwrap();
    let fits: Vec<_> = decay_curves(&records, true)
        .unwrap()
        .iter()
        .map(|c| fit_decay(c).unwrap())
        .collect();
    assert_eq!(flag_defective(&fits, 5.0), vec![bad]);
    let others = fits
        .iter()
        .filter(|f| f.qubit != bad)
        .map(|f| f.slope)
        .fold(0.0, f64::max);
    assert!(fits[bad].slope >= 5.0 * others);
}

#[test]
fn extrapolated_series_reaches_the_exact_higher_order() {
    let one = BitString::ones(1);
    let readout = ReadoutModel::symmetric(&[0.08]);
    let noise = QubitNoise::uniform(1, 0.01, 0.0).unwrap();
    let plan = SequencePlan::new(Scheme::Weighted, 3);
    let config = SimConfig::new(readout.clone(), noise.clone(), one.clone());
    let records = run_shots(config, plan, Layout::Shared, 400_000, 17).unwrap();
    let (mut ms, mut vs, mut sds) = (Vec::new(), Vec::new(), Vec::new());
    for m in 0..=3 {
        let e = mitigate_shared(&records, &plan, m, 100, 17).unwrap();
        ms.push(m as f64);
        vs.push(e.value.at(&one));
        sds.push(e.stderr.at(&one));
    }
    let fit = extrapolate(&ms, &vs, Some(&sds), 5.0).unwrap();
    let exact = Oracle::new(readout, noise, &one)
        .unwrap()
        .mitigated_distribution(Scheme::Weighted, 5)
        .unwrap()[1];
    let combined = (fit.stderr.powi(2) + sds[3].powi(2)).sqrt();
    assert!(
        (fit.value - exact).abs() <= 2.0 * combined,
        "{} ± {} vs {exact}",
        fit.value,
        fit.stderr
    );
}

#[test]
fn constant_noise_orderings_agree() {
    let config = SimConfig::new(
        ReadoutModel::symmetric(&[0.08]),
        QubitNoise::none(1),
        BitString::ones(1),
    );
    let exact = Oracle::new(
        ReadoutModel::symmetric(&[0.08]),
        QubitNoise::none(1),
        &BitString::ones(1),
    )
    .unwrap()
    .mitigated_distribution(Scheme::Basic, 1)
    .unwrap()[1];
    for order in [ExecutionOrder::Interleaved, ExecutionOrder::Blocked] {
        let r = drift_experiment(&config, Scheme::Basic, 1, 200_000, order, 21).unwrap();
        assert!(
            (r.estimate - exact).abs() <= 4.0 * r.stderr,
            "{order:?}: {} vs {exact}",
            r.estimate
        );
        assert!((r.reference.unwrap() - exact).abs() < 1e-12);
    }
}

#[test]
fn step_drift_separates_orderings_at_second_order() {
    let n = 600_000;
    let mut config = SimConfig::new(
        ReadoutModel::symmetric(&[0.05]),
        QubitNoise::none(1),
        BitString::ones(1),
    );
    config.drift = DriftSchedule::step(n, n / 2, eps(0.05), eps(0.15));
    let inter = drift_experiment(&config, Scheme::Basic, 2, n, ExecutionOrder::Interleaved, 31).unwrap();
    let blocked = drift_experiment(&config, Scheme::Basic, 2, n, ExecutionOrder::Blocked, 31).unwrap();
    let reference = inter.reference.unwrap();
    let inter_bias = (inter.estimate - reference).abs();
    let blocked_bias = (blocked.estimate - reference).abs();
    assert!(
        inter_bias <= 4.0 * inter.stderr,
        "interleaved drift bias {inter_bias}"
    );
    assert!(
        blocked_bias >= 3.0 * inter_bias.max(inter.stderr),
        "blocked {blocked_bias} vs interleaved {inter_bias} ± {}",
        inter.stderr
    );
    // The per-bin oracle predicts the blocked estimate.
    assert!((blocked.estimate - blocked.expected.unwrap()).abs() <= 4.0 * blocked.stderr);
}
