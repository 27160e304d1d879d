//! Exact-oracle properties checked against closed forms written out here.

use parity_mitigation::analysis::Oracle;
use parity_mitigation::sim::Scheme;
use parity_mitigation::{AssignmentMatrix, BitString, QubitNoise, ReadoutModel};

fn one() -> BitString {
    BitString::ones(1)
}

fn single(e: f64, g: f64) -> Oracle {
    Oracle::new(
        ReadoutModel::symmetric(&[e]),
        QubitNoise::uniform(1, g, 0.0).unwrap(),
        &one(),
    )
    .unwrap()
}

fn formal(e: f64, gammas: Vec<f64>, state: &BitString) -> Oracle {
    let n = gammas.len();
    Oracle::new(
        ReadoutModel::symmetric(&vec![e; n]),
        QubitNoise::formal(gammas, vec![0.0; n]),
        state,
    )
    .unwrap()
}

#[test]
fn decay_law_holds_for_one_and_three_readouts() {
    // Decay-free part taken exactly: (1 + (1-2e)^(2j+1)) / 2.
    let grid = [0.01, 0.03, 0.05];
    for &e in &grid {
        for &g in &grid {
            for j in 0..=1usize {
                let p = single(e, g).level_distribution::<f64>(Scheme::Basic, j).unwrap()[1];
                let law = 0.5 * (1.0 + (1.0 - 2.0 * e).powi(2 * j as i32 + 1)) - (j as f64 + 1.0) * g;
                assert!(
                    (p - law).abs() <= 10.0 * (g * g + g * e),
                    "eps={e} gamma={g} j={j}: {p} vs {law}"
                );
            }
        }
    }
}

#[test]
fn decay_cost_grows_as_j_plus_one() {
    let h = 1e-5;
    for j in 0..=3usize {
        let p = |g| {
            formal(1e-3, vec![g], &one())
                .level_distribution::<f64>(Scheme::Basic, j)
                .unwrap()[1]
        };
        let d = (p(h) - p(-h)) / (2.0 * h);
        let expect = -(j as f64 + 1.0);
        assert!((d - expect).abs() <= 0.02 * expect.abs(), "j={j}: slope {d}");
    }
}

#[test]
fn three_readout_table_with_decay_to_first_order() {
    for (e, g) in [(0.01, 0.001), (0.02, 0.002), (0.05, 0.01)] {
        let table = single(e, g).enumerate::<f64>(3).unwrap();
        let envelope = 10.0 * (g * g + g * e + e * e * e);
        let first_order = [
            ("111", 1.0 - 3.0 * e - 3.0 * g + 3.0 * e * e),
            ("100", e * e + g),
            ("010", e * e),
            ("001", e * e),
            ("000", g),
            ("011", e - 2.0 * e * e),
            ("101", e - 2.0 * e * e),
            ("110", e - 2.0 * e * e + g),
        ];
        for (seq, approx) in first_order {
            let p = table.prob_of(&[seq]).unwrap();
            assert!(
                (p - approx).abs() <= envelope,
                "{seq} at eps={e}: {p} vs {approx}"
            );
        }
        let plain = table.parity_distribution(0..3).unwrap()[1];
        let weighted = table.weighted_distribution(0..3).unwrap()[1];
        // Summing rows adds up their neglected terms; the weighted sum has a
        // g*e coefficient of 11.
        let envelope = 15.0 * (g * g + g * e + e * e * e);
        assert!((plain - (1.0 - 3.0 * e - 2.0 * g + 6.0 * e * e)).abs() <= envelope);
        assert!((weighted - (1.0 - 3.0 * e - 3.0 * g + 6.0 * e * e)).abs() <= envelope);
    }
}

#[test]
fn feedforward_expectation_first_order_forms() {
    let (e, g) = (0.01, 0.001);
    let (a0, a1) = (-0.7, 1.3);
    let envelope = 10.0 * (g * g + g * e + e * e * e) * f64::abs(a0).max(a1);
    let table = single(e, g).enumerate::<f64>(3).unwrap();
    let plain = table.parity_distribution(0..3).unwrap();
    let weighted = table.weighted_distribution(0..3).unwrap();
    let a_plain = a0 * plain[0] + a1 * plain[1];
    let a_weighted = a0 * weighted[0] + a1 * weighted[1];
    let p0 = |k: f64| 3.0 * e + k * g - 6.0 * e * e;
    assert!((a_plain - (a0 * p0(2.0) + a1 * (1.0 - p0(2.0)))).abs() <= 2.0 * envelope);
    assert!((a_weighted - (a0 * p0(3.0) + a1 * (1.0 - p0(3.0)))).abs() <= 2.0 * envelope);
}

#[test]
fn weighted_parity_cancels_decay_per_qubit_on_two_qubits() {
    let state = BitString::ones(2);
    let h = 1e-5;
    for e in [0.01, 0.03] {
        for scheme in [Scheme::Basic, Scheme::Weighted] {
            let p = |g1: f64, g2: f64| {
                formal(e, vec![g1, g2], &state)
                    .mitigated_distribution(scheme, 1)
                    .unwrap()[3]
            };
            // Derivative with respect to each qubit's decay separately.
            let d1 = (p(h, 0.0) - p(-h, 0.0)) / (2.0 * h);
            let d2 = (p(0.0, h) - p(0.0, -h)) / (2.0 * h);
            match scheme {
                Scheme::Weighted => assert!(d1.abs() <= 10.0 * e && d2.abs() <= 10.0 * e, "{d1} {d2}"),
                _ => assert!((d1 + 0.5).abs() < 0.15 && (d2 + 0.5).abs() < 0.15, "{d1} {d2}"),
            }
        }
    }
}

#[test]
fn exact_parity_mitigation_of_symmetric_readout() {
    let o = single(0.1, 0.0);
    assert!((o.level_distribution::<f64>(Scheme::Basic, 0).unwrap()[1] - 0.9).abs() < 1e-12);
    assert!((o.level_distribution::<f64>(Scheme::Basic, 1).unwrap()[1] - 0.756).abs() < 1e-12);
    assert!((o.mitigated_distribution(Scheme::Basic, 1).unwrap()[1] - 0.972).abs() < 1e-12);
    assert!((o.mitigated_distribution(Scheme::Basic, 2).unwrap()[1] - (1.0 - 0.00856)).abs() < 1e-12);
}

#[test]
fn majority_closed_forms() {
    let p = single(0.1, 0.0)
        .level_distribution::<f64>(Scheme::Majority, 1)
        .unwrap()[1];
    assert!((p - (0.9f64.powi(3) + 3.0 * 0.81 * 0.1)).abs() < 1e-12);
    let g = 0.02;
    let p = single(0.0, g)
        .level_distribution::<f64>(Scheme::Majority, 1)
        .unwrap()[1];
    assert!((p - (1.0 - 2.0 * g + g * g)).abs() < 1e-12);
}

#[test]
fn reset_rounds_of_symmetric_readout() {
    let o = Oracle::new(ReadoutModel::symmetric(&[0.1]), QubitNoise::none(1), &one())
        .unwrap()
        .with_resets(true);
    let p = o.level_distribution::<f64>(Scheme::Reset, 2).unwrap()[1];
    let expect = 0.9f64.powi(5) + 10.0 * 0.9f64.powi(3) * 0.01 + 5.0 * 0.9 * 1e-4;
    assert!((p - expect).abs() < 1e-12);
}

#[test]
fn parity_of_non_twirled_readout_scales_with_diagonal() {
    // Without decay the readouts of a fixed state are iid, so the parity of
    // 2j+1 readouts only sees the state's own column of M.
    let rows = vec![
        vec![0.95, 0.03, 0.04, 0.004],
        vec![0.02, 0.935, 0.002, 0.036],
        vec![0.025, 0.003, 0.93, 0.03],
        vec![0.005, 0.032, 0.028, 0.93],
    ];
    let m = AssignmentMatrix::from_rows(&rows).unwrap();
    let state = BitString::from_index(3, 2);
    let o = Oracle::new(ReadoutModel::Dense(m), QubitNoise::none(2), &state).unwrap();
    // Flip-mask distribution seen by state 3.
    let mask: Vec<f64> = (0..4).map(|f| rows[3 ^ f][3]).collect();
    for j in 0..=2usize {
        let mut conv = mask.clone();
        for _ in 0..2 * j {
            conv = (0..4)
                .map(|f| (0..4).map(|a| conv[a] * mask[f ^ a]).sum())
                .collect();
        }
        let got = o.level_distribution::<f64>(Scheme::Basic, j).unwrap();
        for f in 0..4 {
            assert!((got[3 ^ f] - conv[f]).abs() < 1e-12, "j={j} mask {f}");
        }
    }
}
