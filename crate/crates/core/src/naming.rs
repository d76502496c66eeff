//! Dimension naming contract: measure names join lexicon, feature and time-scheme
//! components with a separator that no component may contain.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

pub const SEPARATOR: &str = "--";

pub(crate) fn check_component(name: &str) -> Result<()> {
    if name.trim().is_empty() {
        return Err(Error::InvalidName {
            name: name.to_string(),
            reason: "name is empty".into(),
        });
    }
    if name.contains(SEPARATOR) {
        return Err(Error::InvalidName {
            name: name.to_string(),
            reason: format!("name contains the reserved separator `{SEPARATOR}`"),
        });
    }
    Ok(())
}

/// `lexicon--feature`, the column name of a sentiment score.
pub fn score_column(lexicon: &str, feature: &str) -> String {
    format!("{lexicon}{SEPARATOR}{feature}")
}

/// Splits a `lexicon--feature` column name.
pub fn parse_score_column(name: &str) -> Result<(String, String)> {
    let parts: Vec<&str> = name.split(SEPARATOR).collect();
    match parts.as_slice() {
        [lex, feat] if !lex.is_empty() && !feat.is_empty() => {
            Ok((lex.to_string(), feat.to_string()))
        }
        _ => Err(Error::InvalidName {
            name: name.to_string(),
            reason: format!("expected `lexicon{SEPARATOR}feature`"),
        }),
    }
}

/// The (lexicon, feature, time scheme) triple identifying one sentiment measure.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MeasureName {
    pub lexicon: String,
    pub feature: String,
    pub time: String,
}

impl MeasureName {
    pub fn new(
        lexicon: impl Into<String>,
        feature: impl Into<String>,
        time: impl Into<String>,
    ) -> Self {
        MeasureName {
            lexicon: lexicon.into(),
            feature: feature.into(),
            time: time.into(),
        }
    }

    pub fn components(&self) -> [&str; 3] {
        [&self.lexicon, &self.feature, &self.time]
    }

    pub fn component(&self, dim: Dimension) -> &str {
        match dim {
            Dimension::Lexicons => &self.lexicon,
            Dimension::Features => &self.feature,
            Dimension::Time => &self.time,
        }
    }
}

impl fmt::Display for MeasureName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}{SEPARATOR}{}{SEPARATOR}{}",
            self.lexicon, self.feature, self.time
        )
    }
}

impl FromStr for MeasureName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(SEPARATOR).collect();
        match parts.as_slice() {
            [l, k, b] if !l.is_empty() && !k.is_empty() && !b.is_empty() => {
                Ok(MeasureName::new(*l, *k, *b))
            }
            _ => Err(Error::InvalidName {
                name: s.to_string(),
                reason: format!("expected `lexicon{SEPARATOR}feature{SEPARATOR}time`"),
            }),
        }
    }
}

/// One of the three measure dimensions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Dimension {
    Lexicons,
    Features,
    Time,
}

impl Dimension {
    pub const ALL: [Dimension; 3] = [Dimension::Lexicons, Dimension::Features, Dimension::Time];

    pub fn as_str(self) -> &'static str {
        match self {
            Dimension::Lexicons => "lexicons",
            Dimension::Features => "features",
            Dimension::Time => "time",
        }
    }
}
