//! Weight generators for the three aggregation levels: within a document (or
//! sentence), across documents in a period (or sentences in a document), and
//! across time inside a lag window.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::format_number;
use crate::naming::check_component;

fn normalize(mut w: Vec<f64>) -> Result<Vec<f64>> {
    let total: f64 = w.iter().sum();
    if !(total.is_finite() && total > 0.0) {
        return Err(Error::Numerical(format!(
            "weights cannot be normalized (sum = {total})"
        )));
    }
    w.iter_mut().for_each(|x| *x /= total);
    Ok(w)
}

fn positive(name: &str, value: f64) -> Result<f64> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(Error::InvalidParameter(format!("{name} must be positive, got {value}")))
    }
}

macro_rules! string_enum {
    ($ty:ident { $($variant:ident => $text:literal),+ $(,)? }) => {
        impl $ty {
            pub fn as_str(self) -> &'static str {
                match self { $($ty::$variant => $text),+ }
            }
        }

        impl fmt::Display for $ty {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.as_str())
            }
        }

        impl FromStr for $ty {
            type Err = Error;

            fn from_str(s: &str) -> Result<Self> {
                match s {
                    $($text => Ok($ty::$variant),)+
                    other => Err(Error::InvalidParameter(format!(
                        "unknown {} `{other}`", stringify!($ty)
                    ))),
                }
            }
        }

        impl Serialize for $ty {
            fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
                s.serialize_str(self.as_str())
            }
        }

        impl<'de> Deserialize<'de> for $ty {
            fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
                let s = String::deserialize(d)?;
                s.parse().map_err(serde::de::Error::custom)
            }
        }
    };
}

/// Within-document weighting of unigram positions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum WithinScheme {
    Counts,
    #[default]
    Proportional,
    ProportionalPol,
    ProportionalSquareRoot,
    UShaped,
    InverseUShaped,
    Exponential,
    InverseExponential,
    Tfidf,
}

string_enum!(WithinScheme {
    Counts => "counts",
    Proportional => "proportional",
    ProportionalPol => "proportionalPol",
    ProportionalSquareRoot => "proportionalSquareRoot",
    UShaped => "UShaped",
    InverseUShaped => "inverseUShaped",
    Exponential => "exponential",
    InverseExponential => "inverseExponential",
    Tfidf => "TFIDF",
});

/// Document frequencies for TFIDF weighting: the number of units (documents or
/// sentences) in the corpus and, per token position, how many units contain that token.
#[derive(Debug, Clone, Copy)]
pub struct DocFrequencies<'a> {
    pub n_units: usize,
    pub per_token: &'a [usize],
}

/// Weights `ω_i` for positions `i = 1..q_d`.
///
/// `n_pol` is the number of tokens found in the lexicon. The four shaped schemes
/// are normalized to sum to one; the others are used as is.
pub fn within_weights(
    scheme: WithinScheme,
    q_d: usize,
    n_pol: usize,
    idf: Option<DocFrequencies<'_>>,
) -> Result<Vec<f64>> {
    if q_d == 0 {
        return match (scheme, idf) {
            (WithinScheme::Tfidf, None) => Err(Error::MissingIdf),
            _ => Ok(Vec::new()),
        };
    }
    let q = q_d as f64;
    let positions = (1..=q_d).map(|i| i as f64);
    let w = match scheme {
        WithinScheme::Counts => vec![1.0; q_d],
        WithinScheme::Proportional => vec![1.0 / q; q_d],
        WithinScheme::ProportionalPol => vec![1.0 / n_pol.max(1) as f64; q_d],
        WithinScheme::ProportionalSquareRoot => vec![1.0 / q.sqrt(); q_d],
        WithinScheme::UShaped => {
            if q_d == 1 {
                // (i - (Q+1)/2)^2 vanishes for a single token
                return Ok(vec![1.0]);
            }
            normalize(positions.map(|i| (i - (q + 1.0) / 2.0).powi(2)).collect())?
        }
        WithinScheme::InverseUShaped => normalize(
            positions
                .map(|i| 0.25 - (i - (q + 1.0) / 2.0).powi(2) / (q * q))
                .collect(),
        )?,
        WithinScheme::Exponential => {
            normalize(positions.map(|i| (5.0 * (i / q - 1.0)).exp()).collect())?
        }
        WithinScheme::InverseExponential => {
            normalize(positions.map(|i| (5.0 * (1.0 - i / q)).exp()).collect())?
        }
        WithinScheme::Tfidf => {
            let idf = idf.ok_or(Error::MissingIdf)?;
            if idf.per_token.len() != q_d {
                return Err(Error::ShapeMismatch(format!(
                    "{} document frequencies for {q_d} tokens",
                    idf.per_token.len()
                )));
            }
            if idf.n_units == 0 {
                return Err(Error::MissingIdf);
            }
            let n = idf.n_units as f64;
            idf.per_token
                .iter()
                .map(|&q_i| (n / (1.0 + q_i as f64)).log10())
                .collect()
        }
    };
    Ok(w)
}

/// Across-document (or across-sentence) weighting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum DocScheme {
    #[default]
    EqualWeight,
    Proportional,
    InverseProportional,
    Exponential,
    InverseExponential,
}

string_enum!(DocScheme {
    EqualWeight => "equal_weight",
    Proportional => "proportional",
    InverseProportional => "inverseProportional",
    Exponential => "exponential",
    InverseExponential => "inverseExponential",
});

/// Weights `θ_n` for documents with token counts `token_counts` sharing one
/// aggregation window. The exponential variants use `α = 10 × alpha_exp_docs`.
pub fn across_doc_weights(
    scheme: DocScheme,
    token_counts: &[usize],
    alpha_exp_docs: f64,
) -> Result<Vec<f64>> {
    let n = token_counts.len();
    if n == 0 {
        return Err(Error::InsufficientData {
            needed: 1,
            available: 0,
        });
    }
    let z: usize = token_counts.iter().sum();
    let needs_tokens = !matches!(scheme, DocScheme::EqualWeight);
    if needs_tokens && z == 0 {
        return Err(Error::ZeroTokens);
    }
    match scheme {
        DocScheme::EqualWeight => Ok(vec![1.0 / n as f64; n]),
        DocScheme::Proportional => normalize(token_counts.iter().map(|&q| q as f64).collect()),
        DocScheme::InverseProportional => {
            if token_counts.contains(&0) {
                return Err(Error::ZeroTokens);
            }
            normalize(token_counts.iter().map(|&q| 1.0 / q as f64).collect())
        }
        DocScheme::Exponential | DocScheme::InverseExponential => {
            let alpha = 10.0 * positive("alphaExpDocs", alpha_exp_docs)?;
            let z = z as f64;
            let sign = if scheme == DocScheme::Exponential { 1.0 } else { -1.0 };
            normalize(
                token_counts
                    .iter()
                    .map(|&q| (sign * alpha * (q as f64 / z - 1.0)).exp())
                    .collect(),
            )
        }
    }
}

/// One across-time weighting curve over a lag window.
#[derive(Debug, Clone, PartialEq)]
pub enum TimeScheme {
    EqualWeight,
    Linear,
    /// `alpha` is the user-facing parameter; the curve uses `10 × alpha`.
    Exponential { alpha: f64 },
    InverseExponential { alpha: f64 },
    /// Almon polynomial of order `order` within a family whose highest order is `max_order`.
    Almon { order: u32, max_order: u32, inverse: bool },
    Beta { a: f64, b: f64 },
    /// User-supplied weights, used as given.
    User { name: String, weights: Vec<f64> },
}

impl TimeScheme {
    /// Name used as the time component of measure names.
    pub fn name(&self) -> String {
        match self {
            TimeScheme::EqualWeight => "equal_weight".into(),
            TimeScheme::Linear => "linear".into(),
            TimeScheme::Exponential { alpha } => format!("exponential{}", format_number(*alpha)),
            TimeScheme::InverseExponential { alpha } => {
                format!("inverseExponential{}", format_number(*alpha))
            }
            TimeScheme::Almon { order, inverse, .. } => {
                if *inverse {
                    format!("almon{order}_inv")
                } else {
                    format!("almon{order}")
                }
            }
            TimeScheme::Beta { a, b } => {
                format!("beta{}_{}", format_number(*a), format_number(*b))
            }
            TimeScheme::User { name, .. } => name.clone(),
        }
    }

    /// Weights `b_t` for `t = 1..lag`, oldest first. A lag of one always gives `[1]`.
    pub fn weights(&self, lag: usize) -> Result<Vec<f64>> {
        time_weights(self, lag)
    }
}

pub fn time_weights(scheme: &TimeScheme, lag: usize) -> Result<Vec<f64>> {
    if lag == 0 {
        return Err(Error::InvalidParameter("lag must be at least 1".into()));
    }
    if let TimeScheme::User { name, weights } = scheme {
        if weights.len() != lag {
            return Err(Error::ShapeMismatch(format!(
                "user time weights `{name}` have {} values, lag is {lag}",
                weights.len()
            )));
        }
        if weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::InvalidValue(format!("user time weights `{name}` are not finite")));
        }
        return Ok(weights.clone());
    }
    match scheme {
        TimeScheme::Exponential { alpha } | TimeScheme::InverseExponential { alpha } => {
            positive("alphasExp", *alpha)?;
        }
        TimeScheme::Almon { order, max_order, .. } => {
            if *order == 0 || order > max_order {
                return Err(Error::InvalidParameter(format!(
                    "Almon order {order} must lie in 1..={max_order}"
                )));
            }
        }
        TimeScheme::Beta { a, b } if !(a.is_finite() && b.is_finite() && *a >= 1.0 && *b >= 1.0) => {
            return Err(Error::InvalidParameter(format!(
                "Beta parameters must be at least 1, got a = {a}, b = {b}"
            )));
        }
        _ => {}
    }
    if lag == 1 {
        return Ok(vec![1.0]);
    }
    let tau = lag as f64;
    let x = (1..=lag).map(|t| t as f64 / tau);
    let raw: Vec<f64> = match scheme {
        TimeScheme::EqualWeight => vec![1.0; lag],
        TimeScheme::Linear => x.collect(),
        TimeScheme::Exponential { alpha } => x.map(|x| (10.0 * alpha * (x - 1.0)).exp()).collect(),
        TimeScheme::InverseExponential { alpha } => {
            x.map(|x| (10.0 * alpha * (1.0 - x)).exp()).collect()
        }
        TimeScheme::Almon {
            order,
            max_order,
            inverse,
        } => {
            let r = *order as i32;
            let big_r = *max_order as i32;
            x.map(|x| {
                let x = if *inverse { 1.0 - x } else { x };
                (1.0 - x).powi(big_r - r) * (1.0 - (1.0 - x).powi(r))
            })
            .collect()
        }
        // The Gamma-function constant of the density cancels in the normalization.
        TimeScheme::Beta { a, b } => x.map(|x| x.powf(a - 1.0) * (1.0 - x).powf(b - 1.0)).collect(),
        TimeScheme::User { .. } => unreachable!(),
    };
    normalize(raw)
}

/// Families accepted in the across-time configuration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TimeFamily {
    EqualWeight,
    Linear,
    Exponential,
    Almon,
    Beta,
    User,
}

string_enum!(TimeFamily {
    EqualWeight => "equal_weight",
    Linear => "linear",
    Exponential => "exponential",
    Almon => "almon",
    Beta => "beta",
    User => "own",
});

/// Shape parameters for expanding [`TimeFamily`] entries into concrete schemes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TimeParams {
    pub alphas_exp: Vec<f64>,
    pub do_inverse_exp: bool,
    pub orders_alm: Vec<u32>,
    pub do_inverse_alm: bool,
    pub a_beta: Vec<f64>,
    pub b_beta: Vec<f64>,
    /// Named user weight columns, each of length `lag`.
    pub user: Vec<(String, Vec<f64>)>,
}

impl Default for TimeParams {
    fn default() -> Self {
        TimeParams {
            alphas_exp: vec![0.1, 0.2, 0.3, 0.4, 0.5],
            do_inverse_exp: false,
            orders_alm: vec![1, 2, 3],
            do_inverse_alm: true,
            a_beta: vec![1.0, 2.0, 3.0, 4.0],
            b_beta: vec![1.0, 2.0, 3.0, 4.0],
            user: Vec::new(),
        }
    }
}

/// Expands families into schemes: one per `alphas_exp` value (plus inverses), one
/// per Almon order (plus inverses), one per `(a, b)` pair, one per user column.
pub fn expand_time_schemes(families: &[TimeFamily], params: &TimeParams) -> Result<Vec<TimeScheme>> {
    if families.is_empty() {
        return Err(Error::InvalidParameter("at least one time weighting scheme is required".into()));
    }
    let mut out = Vec::new();
    for family in families {
        match family {
            TimeFamily::EqualWeight => out.push(TimeScheme::EqualWeight),
            TimeFamily::Linear => out.push(TimeScheme::Linear),
            TimeFamily::Exponential => {
                for &alpha in &params.alphas_exp {
                    out.push(TimeScheme::Exponential { alpha });
                }
                if params.do_inverse_exp {
                    for &alpha in &params.alphas_exp {
                        out.push(TimeScheme::InverseExponential { alpha });
                    }
                }
            }
            TimeFamily::Almon => {
                let max_order = params.orders_alm.iter().copied().max().ok_or_else(|| {
                    Error::InvalidParameter("Almon weighting needs at least one order".into())
                })?;
                for &order in &params.orders_alm {
                    out.push(TimeScheme::Almon {
                        order,
                        max_order,
                        inverse: false,
                    });
                }
                if params.do_inverse_alm {
                    for &order in &params.orders_alm {
                        out.push(TimeScheme::Almon {
                            order,
                            max_order,
                            inverse: true,
                        });
                    }
                }
            }
            TimeFamily::Beta => {
                for &a in &params.a_beta {
                    for &b in &params.b_beta {
                        out.push(TimeScheme::Beta { a, b });
                    }
                }
            }
            TimeFamily::User => {
                if params.user.is_empty() {
                    return Err(Error::InvalidParameter(
                        "user time weighting selected but no weights supplied".into(),
                    ));
                }
                for (name, weights) in &params.user {
                    check_component(name)?;
                    out.push(TimeScheme::User {
                        name: name.clone(),
                        weights: weights.clone(),
                    });
                }
            }
        }
    }
    let mut names = std::collections::HashSet::new();
    for s in &out {
        if !names.insert(s.name()) {
            return Err(Error::NameCollision(s.name()));
        }
    }
    if out.is_empty() {
        return Err(Error::InvalidParameter("time weighting expands to no schemes".into()));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn counts_are_ones() {
        assert_eq!(within_weights(WithinScheme::Counts, 4, 0, None).unwrap(), vec![1.0; 4]);
    }

    #[test]
    fn proportional_pol_guards_zero() {
        assert_eq!(
            within_weights(WithinScheme::ProportionalPol, 3, 0, None).unwrap(),
            vec![1.0; 3]
        );
        assert_eq!(
            within_weights(WithinScheme::ProportionalPol, 3, 2, None).unwrap(),
            vec![0.5; 3]
        );
    }

    #[test]
    fn tfidf_log_of_one_is_zero() {
        let w = within_weights(
            WithinScheme::Tfidf,
            1,
            0,
            Some(DocFrequencies {
                n_units: 10,
                per_token: &[9],
            }),
        )
        .unwrap();
        assert_eq!(w, vec![0.0]);
        assert!(matches!(
            within_weights(WithinScheme::Tfidf, 2, 0, None),
            Err(Error::MissingIdf)
        ));
    }

    #[test]
    fn exponential_within_matches_direct_evaluation() {
        // exp(5 (i/4 - 1)) for i = 1..4, normalized; values from an independent script.
        let expected = [
            0.016_893_627_221_766_207,
            0.058_964_552_799_477_34,
            0.205_806_511_603_542_63,
            0.718_335_308_375_213_8,
        ];
        let w = within_weights(WithinScheme::Exponential, 4, 0, None).unwrap();
        assert!(close(&w, &expected, 1e-12), "{w:?}");
    }

    #[test]
    fn shaped_within_schemes_sum_to_one() {
        for scheme in [
            WithinScheme::UShaped,
            WithinScheme::InverseUShaped,
            WithinScheme::Exponential,
            WithinScheme::InverseExponential,
        ] {
            for q in 1..40 {
                let w = within_weights(scheme, q, 0, None).unwrap();
                assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-12);
                assert!(w.iter().all(|&x| x >= 0.0));
            }
        }
    }

    #[test]
    fn across_doc_examples() {
        assert_eq!(
            across_doc_weights(DocScheme::EqualWeight, &[1, 2, 3, 4], 0.1).unwrap(),
            vec![0.25; 4]
        );
        assert!(close(
            &across_doc_weights(DocScheme::Proportional, &[10, 30], 0.1).unwrap(),
            &[0.25, 0.75],
            1e-15
        ));
        assert!(close(
            &across_doc_weights(DocScheme::InverseProportional, &[10, 30], 0.1).unwrap(),
            &[0.75, 0.25],
            1e-15
        ));
        assert!(matches!(
            across_doc_weights(DocScheme::Proportional, &[0, 0], 0.1),
            Err(Error::ZeroTokens)
        ));
    }

    #[test]
    fn across_doc_exponential_favors_long_documents() {
        let w = across_doc_weights(DocScheme::Exponential, &[10, 30], 0.1).unwrap();
        // α = 1: exp(0.25 - 1) vs exp(0.75 - 1)
        let a = (-0.75f64).exp();
        let b = (-0.25f64).exp();
        assert!(close(&w, &[a / (a + b), b / (a + b)], 1e-15));
    }

    #[test]
    fn time_examples() {
        assert!(close(
            &time_weights(&TimeScheme::EqualWeight, 30).unwrap(),
            &[1.0 / 30.0; 30],
            1e-15
        ));
        for s in [
            TimeScheme::Linear,
            TimeScheme::Exponential { alpha: 0.3 },
            TimeScheme::Beta { a: 2.0, b: 3.0 },
            TimeScheme::Almon {
                order: 1,
                max_order: 3,
                inverse: true,
            },
        ] {
            assert_eq!(time_weights(&s, 1).unwrap(), vec![1.0]);
        }
        assert!(close(
            &time_weights(&TimeScheme::Beta { a: 1.0, b: 1.0 }, 5).unwrap(),
            &[0.2; 5],
            1e-15
        ));
        // r = R = 1: (1 - (1 - t/4)) = t/4, normalized by 10/4.
        assert!(close(
            &time_weights(
                &TimeScheme::Almon {
                    order: 1,
                    max_order: 1,
                    inverse: false
                },
                4
            )
            .unwrap(),
            &[0.1, 0.2, 0.3, 0.4],
            1e-15
        ));
    }

    #[test]
    fn time_errors() {
        assert!(time_weights(&TimeScheme::EqualWeight, 0).is_err());
        assert!(time_weights(&TimeScheme::Beta { a: 0.0, b: 1.0 }, 5).is_err());
        assert!(time_weights(&TimeScheme::Beta { a: 0.5, b: 1.0 }, 5).is_err());
        let user = TimeScheme::User {
            name: "own".into(),
            weights: vec![0.5, 0.5],
        };
        assert!(matches!(time_weights(&user, 3), Err(Error::ShapeMismatch(_))));
        assert_eq!(time_weights(&user, 2).unwrap(), vec![0.5, 0.5]);
    }

    #[test]
    fn inverse_variants_substitute_one_minus_position() {
        let tau = 7;
        for alpha in [0.1, 0.7, 2.0] {
            let inv = time_weights(&TimeScheme::InverseExponential { alpha }, tau).unwrap();
            // exp(a(1-x)) is proportional to exp(-a x)
            let direct = normalize(
                (1..=tau)
                    .map(|t| (-10.0 * alpha * t as f64 / tau as f64).exp())
                    .collect(),
            )
            .unwrap();
            assert!(close(&inv, &direct, 1e-12));
        }
        for order in 1..=3u32 {
            let inv = time_weights(
                &TimeScheme::Almon {
                    order,
                    max_order: 3,
                    inverse: true,
                },
                tau,
            )
            .unwrap();
            let direct = normalize(
                (1..=tau)
                    .map(|t| {
                        let x = t as f64 / tau as f64;
                        x.powi(3 - order as i32) * (1.0 - x.powi(order as i32))
                    })
                    .collect(),
            )
            .unwrap();
            assert!(close(&inv, &direct, 1e-12));
        }
    }

    #[test]
    fn expansion_counts_and_names() {
        let params = TimeParams {
            alphas_exp: vec![0.2],
            orders_alm: vec![1, 2, 3],
            do_inverse_alm: true,
            a_beta: vec![1.0, 2.0, 3.0],
            b_beta: vec![1.0, 2.0],
            ..Default::default()
        };
        let s = expand_time_schemes(
            &[TimeFamily::Exponential, TimeFamily::EqualWeight],
            &params,
        )
        .unwrap();
        let names: Vec<String> = s.iter().map(TimeScheme::name).collect();
        assert_eq!(names, vec!["exponential0.2", "equal_weight"]);
        assert_eq!(expand_time_schemes(&[TimeFamily::Almon], &params).unwrap().len(), 6);
        assert_eq!(expand_time_schemes(&[TimeFamily::Beta], &params).unwrap().len(), 6);
        assert!(expand_time_schemes(&[], &params).is_err());
        assert!(expand_time_schemes(&[TimeFamily::User], &params).is_err());
    }
}
