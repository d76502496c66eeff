mod common;

use proptest::prelude::*;

use sentiment_measures::lexicon::{Lexicon, ShifterKind, ValenceTable};
use sentiment_measures::model::{
    elastic_net_fit, iteration_count, loss_data, Calibration, Criterion, FittedModel, IterResults, LossMetric,
    Performance,
};
use sentiment_measures::naming::MeasureName;
use sentiment_measures::sentiment::{cluster_windows, score_cluster, score_tokens};
use sentiment_measures::weights::{
    across_doc_weights, time_weights, within_weights, DocScheme, TimeScheme, WithinScheme,
};

const SHAPED: [WithinScheme; 4] = [
    WithinScheme::UShaped,
    WithinScheme::InverseUShaped,
    WithinScheme::Exponential,
    WithinScheme::InverseExponential,
];

fn unit_sum(w: &[f64]) -> bool {
    (w.iter().sum::<f64>() - 1.0).abs() < 1e-12 && w.iter().all(|x| *x >= 0.0)
}

fn time_scheme() -> impl Strategy<Value = TimeScheme> {
    prop_oneof![
        Just(TimeScheme::EqualWeight),
        Just(TimeScheme::Linear),
        (0.01f64..5.0).prop_map(|alpha| TimeScheme::Exponential { alpha }),
        (0.01f64..5.0).prop_map(|alpha| TimeScheme::InverseExponential { alpha }),
        (1u32..=4, 0u32..3, any::<bool>()).prop_map(|(order, extra, inverse)| TimeScheme::Almon {
            order,
            max_order: order + extra,
            inverse
        }),
        (1.0f64..6.0, 1.0f64..6.0).prop_map(|(a, b)| TimeScheme::Beta { a, b }),
    ]
}

/// Direct reading of the cluster rules in document mode: four tokens before and
/// two after each polarized word, never reaching back into the previous cluster.
fn cluster_oracle(tokens: &[&str], lexicon: &[(&str, f64)], shifters: &[(&str, ShifterKind)]) -> f64 {
    let score = |t: &str| lexicon.iter().find(|(w, _)| *w == t).map(|(_, s)| *s);
    let kind = |t: &str| {
        if score(t).is_some() {
            None
        } else {
            shifters.iter().find(|(w, _)| *w == t).map(|(_, k)| *k)
        }
    };
    let n = tokens.len();
    let mut total = 0.0;
    let mut floor = 0usize;
    let mut j = 0usize;
    while j < n {
        let s = match score(tokens[j]) {
            Some(s) if s != 0.0 => s,
            _ => {
                j += 1;
                continue;
            }
        };
        let lo = j.saturating_sub(4).max(floor);
        let hi = (j + 2).min(n - 1);
        let mut counts = [0usize; 3];
        for (m, t) in tokens.iter().enumerate().take(hi + 1).skip(lo) {
            if m == j {
                continue;
            }
            match kind(t) {
                Some(ShifterKind::Negator) => counts[0] += 1,
                Some(ShifterKind::Amplifier) => counts[1] += 1,
                Some(ShifterKind::Deamplifier) => counts[2] += 1,
                _ => {}
            }
        }
        let [neg, mut amp, mut deamp] = counts;
        let sign = if neg % 2 == 1 { -1.0 } else { 1.0 };
        if neg % 2 == 1 {
            deamp += amp;
            amp = 0;
        }
        let factor = 1.0 + (0.8 * (amp as f64 - deamp as f64)).max(-1.0);
        total += sign * factor * s;
        for t in &tokens[j + 1..=hi] {
            total += score(t).unwrap_or(0.0);
        }
        floor = hi + 1;
        j = hi + 1;
    }
    total
}

proptest! {
    #[test]
    fn shaped_within_weights_sum_to_one(q in 1usize..400, k in 0usize..4) {
        prop_assert!(unit_sum(&within_weights(SHAPED[k], q, 1, None).unwrap()));
    }

    #[test]
    fn across_doc_weights_sum_to_one(counts in prop::collection::vec(1usize..1000, 1..60), alpha in 0.01f64..3.0) {
        for scheme in [
            DocScheme::EqualWeight,
            DocScheme::Proportional,
            DocScheme::InverseProportional,
            DocScheme::Exponential,
            DocScheme::InverseExponential,
        ] {
            prop_assert!(unit_sum(&across_doc_weights(scheme, &counts, alpha).unwrap()));
        }
    }

    #[test]
    fn time_weights_sum_to_one(scheme in time_scheme(), lag in 1usize..300) {
        prop_assert!(unit_sum(&time_weights(&scheme, lag).unwrap()));
    }

    #[test]
    fn clusters_never_overlap(
        polarized in prop::collection::vec(any::<bool>(), 0..60),
        comma_mask in prop::collection::vec(prop::bool::weighted(0.15), 60),
        sentence in any::<bool>(),
    ) {
        let commas: Vec<usize> = (1..polarized.len()).filter(|&i| comma_mask[i]).collect();
        let windows = cluster_windows(&polarized, sentence.then_some(commas.as_slice()));
        let mut end = 0;
        for w in &windows {
            prop_assert!(polarized[w.center]);
            prop_assert!(w.before.start >= end);
            prop_assert_eq!(w.before.end, w.center);
            prop_assert_eq!(w.after.start, w.center + 1);
            let reach = if sentence { 5 } else { 4 };
            prop_assert!(w.center - w.before.start <= reach);
            prop_assert!(w.after.end - w.after.start <= 2);
            if sentence {
                for &c in &commas {
                    // a window may start at a clause break but never straddle one
                    prop_assert!(!(c > w.before.start && c <= w.center));
                    prop_assert!(!(c > w.center && c < w.after.end));
                }
            }
            end = w.after.end;
        }
    }

    #[test]
    fn cluster_scores_match_the_oracle(words in prop::collection::vec(0usize..8, 0..25)) {
        let vocab = ["good", "bad", "not", "very", "barely", "the", "never", "great"];
        let lexicon_entries = [("good", 1.0), ("bad", -1.0), ("great", 1.0)];
        let shifter_entries = [
            ("not", ShifterKind::Negator),
            ("never", ShifterKind::Negator),
            ("very", ShifterKind::Amplifier),
            ("barely", ShifterKind::Deamplifier),
        ];
        let tokens: Vec<&str> = words.iter().map(|&i| vocab[i]).collect();
        let owned: Vec<String> = tokens.iter().map(|t| t.to_string()).collect();
        let lexicon = Lexicon::new("l", lexicon_entries).unwrap();
        let ValenceTable::Cluster(shifters) = ValenceTable::cluster(shifter_entries).unwrap() else {
            unreachable!()
        };
        let got = score_cluster(&owned, &lexicon, &shifters, &vec![1.0; owned.len()], None);
        let expected = cluster_oracle(&tokens, &lexicon_entries, &shifter_entries);
        prop_assert!((got - expected).abs() < 1e-12, "{:?}: {} vs {}", tokens, got, expected);
    }

    #[test]
    fn scores_are_linear_in_lexicon_values(
        words in prop::collection::vec(0usize..6, 1..20),
        scale in -4.0f64..4.0,
        mode in 0usize..3,
    ) {
        let vocab = ["up", "down", "not", "very", "flat", "gain"];
        let tokens: Vec<String> = words.iter().map(|&i| vocab[i].to_string()).collect();
        let base = [("up", 1.0), ("down", -0.5), ("gain", 2.0)];
        let scaled: Vec<(&str, f64)> = base.iter().map(|(w, s)| (*w, s * scale)).collect();
        let valence = match mode {
            0 => None,
            1 => Some(ValenceTable::bigram([("not", -1.0), ("very", 2.0)]).unwrap()),
            _ => Some(ValenceTable::cluster([("not", ShifterKind::Negator), ("very", ShifterKind::Amplifier)]).unwrap()),
        };
        let weights = vec![1.0 / tokens.len() as f64; tokens.len()];
        let a = score_tokens(&tokens, &Lexicon::new("a", base).unwrap(), valence.as_ref(), &weights, None);
        // scaling by zero empties the polarized set, which is still linear
        let b = score_tokens(&tokens, &Lexicon::new("b", scaled).unwrap(), valence.as_ref(), &weights, None);
        prop_assert!((b - scale * a).abs() < 1e-9);
    }

    #[test]
    fn measure_names_round_trip(
        l in "[a-zA-Z][a-zA-Z0-9_]{0,8}",
        f in "[a-zA-Z][a-zA-Z0-9_]{0,8}",
        t in "[a-zA-Z][a-zA-Z0-9_.]{0,8}",
    ) {
        let name = MeasureName::new(&l, &f, &t);
        let parsed: MeasureName = name.to_string().parse().unwrap();
        prop_assert_eq!(parsed, name);
    }

    #[test]
    fn iteration_count_invariant(n in 10usize..400, m in 2usize..200, h in -10i64..10, oos in 0usize..10) {
        let needed = m + h.unsigned_abs() as usize + oos + 1;
        match iteration_count(n, m, h, oos) {
            Ok(k) => prop_assert_eq!(k, n - m - h.unsigned_abs() as usize - oos),
            Err(_) => prop_assert!(n < needed),
        }
    }

    #[test]
    fn rescaled_coefficients_predict_like_standardized_ones(seed in 0u64..1000, alpha in 0.0f64..1.0, intercept in any::<bool>()) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let columns: Vec<Vec<f64>> = (0..4)
            .map(|j| (0..30).map(|_| rng.gen_range(-1.0..1.0) * (j + 1) as f64 * 10.0 + j as f64).collect())
            .collect();
        let y: Vec<f64> = (0..30).map(|i| columns[0][i] * 0.3 - columns[3][i] * 0.1 + rng.gen_range(-1.0..1.0)).collect();
        let fit = elastic_net_fit(&columns, &y, alpha, 0.05, intercept, None).unwrap();
        let nf = y.len() as f64;
        let y_mean = if intercept { y.iter().sum::<f64>() / nf } else { 0.0 };
        let stats: Vec<(f64, f64)> = columns
            .iter()
            .map(|c| {
                let m = if intercept { c.iter().sum::<f64>() / nf } else { 0.0 };
                (m, (c.iter().map(|v| (v - m).powi(2)).sum::<f64>() / nf).sqrt())
            })
            .collect();
        for i in 0..30 {
            let row: Vec<f64> = columns.iter().map(|c| c[i]).collect();
            let original = fit.predict_row(&row);
            let standardized = y_mean
                + fit.standardized.iter().zip(&stats).zip(&row).map(|((b, (m, s)), v)| b * (v - m) / s).sum::<f64>();
            prop_assert!((original - standardized).abs() <= 1e-10 * (1.0 + original.abs()));
        }
    }

    #[test]
    fn predictions_are_affine(
        b in prop::collection::vec(-3.0f64..3.0, 3),
        x1 in prop::collection::vec(-5.0f64..5.0, 3),
        x2 in prop::collection::vec(-5.0f64..5.0, 3),
        a in -2.0f64..2.0,
        c in -2.0f64..2.0,
        delta in -1.0f64..1.0,
    ) {
        let model = stub_model(b, delta);
        let mix: Vec<f64> = x1.iter().zip(&x2).map(|(u, v)| a * u + c * v).collect();
        let lhs = model.predict_row(&mix);
        let rhs = a * model.predict_row(&x1) + c * model.predict_row(&x2) - (a + c - 1.0) * delta;
        prop_assert!((lhs - rhs).abs() < 1e-9);
        prop_assert_eq!(model.predict_row(&[0.0; 3]), delta);
    }

    #[test]
    fn absolute_losses_are_elementwise(
        predicted in prop::collection::vec(-5.0f64..5.0, 1..30),
        shift in -1.0f64..1.0,
    ) {
        let realized: Vec<f64> = predicted.iter().enumerate().map(|(i, p)| p + shift * (i as f64 - 3.0)).collect();
        let r = iter_stub(&predicted, &realized);
        let m = loss_data(&[("a", &r), ("b", &r)], LossMetric::AbsoluteError).unwrap();
        for i in 0..predicted.len() {
            prop_assert_eq!(m.values[0][i], (predicted[i] - realized[i]).abs());
        }
        prop_assert_eq!(&m.values[0], &m.values[1]);
        let sq = loss_data(&[("a", &r)], LossMetric::SquaredError).unwrap();
        for (e, l) in r.errors().iter().zip(&sq.values[0]) {
            prop_assert_eq!(e * e, *l);
        }
    }
}

fn stub_model(coefficients: Vec<f64>, intercept: f64) -> FittedModel {
    FittedModel {
        names: (0..coefficients.len()).map(|j| format!("x{j}")).collect(),
        n_measures: 0,
        intercept,
        coefficients,
        alpha: 1.0,
        lambda: 0.0,
        df: 0.0,
        calibration: Calibration { criterion: Criterion::Bic, alpha: 1.0, lambda: 0.0, points: Vec::new() },
        discarded: Vec::new(),
        dates: Vec::new(),
        target: Vec::new(),
        fitted: Vec::new(),
    }
}

fn iter_stub(predicted: &[f64], realized: &[f64]) -> IterResults {
    let n = predicted.len();
    IterResults {
        models: vec![stub_model(vec![], 0.0); n],
        dates: (0..n as u64).map(common::day).collect(),
        predicted: predicted.to_vec(),
        realized: realized.to_vec(),
        reference: vec![0.0; n],
        performance: Performance::new(predicted, realized, &vec![0.0; n]),
    }
}
