mod common;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use sentiment_measures::aggregation::{build_measures, AggregationConfig, Fill};
use sentiment_measures::attribution::{attributions, Attributions};
use sentiment_measures::model::{Calibration, Criterion, Design, FittedModel};
use sentiment_measures::weights::{DocScheme, TimeFamily};

fn random_attributions(seed: u64, fill: Fill) -> Attributions {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let corpus = common::random_corpus(&mut rng, 80, 40);
    let config = AggregationConfig {
        how_docs: DocScheme::Proportional,
        how_time: vec![TimeFamily::EqualWeight, TimeFamily::Linear],
        lag: 3,
        fill,
        ..Default::default()
    };
    let measures = build_measures(&corpus, &common::lexicons(), &config).unwrap();
    let design = Design::new(&measures, None, &[]).unwrap();
    // every coefficient nonzero, so every component carries weight
    let coefficients: Vec<f64> = (0..design.names.len()).map(|_| rng.gen_range(-2.0..2.0)).collect();
    let model = FittedModel {
        names: design.names.clone(),
        n_measures: design.n_measures,
        intercept: rng.gen_range(-1.0..1.0),
        coefficients,
        alpha: 1.0,
        lambda: 0.0,
        df: 0.0,
        calibration: Calibration { criterion: Criterion::Bic, alpha: 1.0, lambda: 0.0, points: Vec::new() },
        discarded: Vec::new(),
        dates: measures.dates().to_vec(),
        target: Vec::new(),
        fitted: Vec::new(),
    };
    let a = attributions(&model, &measures, None, None).unwrap();
    let predicted = model.predict(&design).unwrap();
    assert!(common::max_abs_diff(&a.predictions, &predicted) < 1e-10);
    a
}

fn norm(v: impl IntoIterator<Item = f64>) -> f64 {
    v.into_iter().map(|x| x * x).sum::<f64>().sqrt()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn attributions_add_up_to_the_prediction(seed in 0u64..10_000, fill in 0usize..3) {
        let fill = [Fill::Zero, Fill::Latest, Fill::None][fill];
        let a = random_attributions(seed, fill);
        for dim in ["lexicons", "features", "time", "lags", "documents"] {
            let e = a.identity_error(dim).unwrap();
            prop_assert!(e < 1e-10, "{}: {}", dim, e);
        }
    }

    #[test]
    fn normalized_attributions_have_unit_norm(seed in 0u64..10_000) {
        let n = random_attributions(seed, Fill::Zero).normalize();
        prop_assert!(n.normalized);
        for dim in ["lexicons", "features", "time", "lags"] {
            for row in &n.dimension(dim).unwrap().values {
                let r = norm(row.iter().copied());
                prop_assert!(r == 0.0 || (r - 1.0).abs() < 1e-12, "{}: {}", dim, r);
            }
        }
        for docs in n.documents.as_ref().unwrap() {
            let r = norm(docs.values().copied());
            prop_assert!(r == 0.0 || (r - 1.0).abs() < 1e-12);
        }
    }
}

#[test]
fn long_csv_round_trips() {
    let a = random_attributions(17, Fill::Latest);
    let file = tempfile::NamedTempFile::new().unwrap();
    a.write_long_csv(file.path()).unwrap();
    let b = Attributions::read_long_csv(file.path()).unwrap();
    assert_eq!(b.dates, a.dates);
    for dim in ["lexicons", "features", "time", "lags"] {
        let (x, y) = (a.dimension(dim).unwrap(), b.dimension(dim).unwrap());
        assert_eq!(x.components, y.components);
        for (r, s) in x.values.iter().zip(&y.values) {
            assert!(common::max_abs_diff(r, s) < 1e-12);
        }
    }
}
