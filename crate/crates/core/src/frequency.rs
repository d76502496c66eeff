use std::fmt;
use std::str::FromStr;

use chrono::{Datelike, Days, Months, NaiveDate};
use serde::{Deserialize, Serialize};

use crate::error::Error;

/// Calendar frequency at which documents are grouped into periods.
///
/// Weeks follow ISO-8601 and are labeled by their Monday; months by their first
/// day; years by January 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Frequency {
    #[default]
    Day,
    Week,
    Month,
    Year,
}

impl Frequency {
    pub fn period_start(self, date: NaiveDate) -> NaiveDate {
        match self {
            Frequency::Day => date,
            Frequency::Week => date - Days::new(date.weekday().num_days_from_monday() as u64),
            Frequency::Month => date.with_day(1).expect("day 1 exists"),
            Frequency::Year => NaiveDate::from_ymd_opt(date.year(), 1, 1).expect("Jan 1 exists"),
        }
    }

    /// Start of the period following the one containing `date`.
    pub fn next(self, date: NaiveDate) -> NaiveDate {
        let start = self.period_start(date);
        match self {
            Frequency::Day => start + Days::new(1),
            Frequency::Week => start + Days::new(7),
            Frequency::Month => start + Months::new(1),
            Frequency::Year => start + Months::new(12),
        }
    }

    /// All period starts from the period of `from` through the period of `to`, inclusive.
    pub fn grid(self, from: NaiveDate, to: NaiveDate) -> Vec<NaiveDate> {
        let mut out = Vec::new();
        let end = self.period_start(to);
        let mut cur = self.period_start(from);
        while cur <= end {
            out.push(cur);
            cur = self.next(cur);
        }
        out
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Frequency::Day => "day",
            Frequency::Week => "week",
            Frequency::Month => "month",
            Frequency::Year => "year",
        }
    }
}

impl fmt::Display for Frequency {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Frequency {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "day" => Ok(Frequency::Day),
            "week" => Ok(Frequency::Week),
            "month" => Ok(Frequency::Month),
            "year" => Ok(Frequency::Year),
            other => Err(Error::InvalidParameter(format!(
                "unknown frequency `{other}` (expected day, week, month or year)"
            ))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(s: &str) -> NaiveDate {
        NaiveDate::parse_from_str(s, "%Y-%m-%d").unwrap()
    }

    #[test]
    fn iso_week_starts_on_monday() {
        // 2021-01-03 is a Sunday belonging to ISO week 53 of 2020.
        assert_eq!(Frequency::Week.period_start(d("2021-01-03")), d("2020-12-28"));
        assert_eq!(Frequency::Week.period_start(d("2021-01-04")), d("2021-01-04"));
    }

    #[test]
    fn month_and_year_labels() {
        assert_eq!(Frequency::Month.period_start(d("2020-02-29")), d("2020-02-01"));
        assert_eq!(Frequency::Month.next(d("2020-01-31")), d("2020-02-01"));
        assert_eq!(Frequency::Year.period_start(d("2020-07-04")), d("2020-01-01"));
    }

    #[test]
    fn grid_is_inclusive() {
        let g = Frequency::Week.grid(d("2021-01-06"), d("2021-01-20"));
        assert_eq!(g, vec![d("2021-01-04"), d("2021-01-11"), d("2021-01-18")]);
    }
}
