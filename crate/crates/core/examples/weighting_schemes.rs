//! Within-document, across-document and across-time weights side by side.

use sentiment_measures::weights::{
    across_doc_weights, expand_time_schemes, within_weights, DocScheme, TimeFamily, TimeParams, WithinScheme,
};

fn show(label: &str, w: &[f64]) {
    let cells: Vec<String> = w.iter().map(|x| format!("{x:.3}")).collect();
    println!("{label:<24} {}", cells.join(" "));
}

fn main() -> sentiment_measures::Result<()> {
    println!("within a 8-token document with 3 polarized words");
    for scheme in [
        WithinScheme::Proportional,
        WithinScheme::ProportionalPol,
        WithinScheme::UShaped,
        WithinScheme::InverseUShaped,
        WithinScheme::Exponential,
        WithinScheme::InverseExponential,
    ] {
        show(scheme.as_str(), &within_weights(scheme, 8, 3, None)?);
    }

    println!("\nacross documents with word counts 10, 40, 25");
    for scheme in [DocScheme::EqualWeight, DocScheme::Proportional, DocScheme::InverseProportional] {
        show(scheme.as_str(), &across_doc_weights(scheme, &[10, 40, 25], 0.1)?);
    }

    println!("\nacross time, lag 10, oldest first");
    let params = TimeParams {
        alphas_exp: vec![0.3],
        orders_alm: vec![1, 3],
        a_beta: vec![2.0],
        b_beta: vec![5.0],
        ..Default::default()
    };
    let families = [
        TimeFamily::EqualWeight,
        TimeFamily::Linear,
        TimeFamily::Exponential,
        TimeFamily::Almon,
        TimeFamily::Beta,
    ];
    for scheme in expand_time_schemes(&families, &params)? {
        show(&scheme.name(), &scheme.weights(10)?);
    }
    Ok(())
}
