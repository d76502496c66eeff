//! Lexicon-based textual sentiment, aggregation of sentiment into time series
//! measures, sparse regression on those measures, and attribution of predictions.

pub mod aggregation;
pub mod attribution;
pub mod cli;
pub mod corpus;
pub mod error;
pub mod frequency;
pub mod io;
pub mod lexicon;
pub mod measures;
pub mod model;
pub mod naming;
pub mod sentiment;
pub mod tokenize;
pub mod weights;

pub use error::{Error, ErrorClass, Result};
