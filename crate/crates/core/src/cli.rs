//! Command line front end: a TOML pipeline description plus subcommands that
//! run the pipeline up to a given stage and write CSV outputs.
//!
//! Thread count precedence: `--threads`, then `SENTIMENT_MEASURES_THREADS`, then
//! `threads` in the config file, then all cores. `--output` likewise overrides
//! `output` in the file.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use log::info;
use serde::Deserialize;

use crate::aggregation::{aggregate, AggregationConfig};
use crate::attribution::{attributions, attributions_iter};
use crate::corpus::{Corpus, FeatureSpec};
use crate::error::{Error, ErrorClass, Result};
use crate::io::{format_number, Table};
use crate::lexicon::{LanguageDispatch, Lexicon, LexiconSet, ValenceTable};
use crate::measures::MeasureSet;
use crate::model::{dated_columns, fit_model, fit_model_iter, Design, Externals, ModelConfig};
use crate::sentiment::{compute_sentiment, with_threads, Lexicons, SentimentOptions, SentimentTable};

pub const CONFIG_VERSION: u32 = 1;
pub const THREADS_ENV: &str = "SENTIMENT_MEASURES_THREADS";

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LexiconPaths {
    /// `word,score` files; each lexicon is named after its file stem.
    #[serde(default)]
    pub lexicons: Vec<PathBuf>,
    pub valence: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Paths {
    /// CSV, or JSON lines for `.jsonl`/`.ndjson`.
    pub corpus: Option<PathBuf>,
    #[serde(default)]
    pub lexicons: Vec<PathBuf>,
    pub valence: Option<PathBuf>,
    /// Per-language lexicons, for corpora with a `language` column.
    #[serde(default)]
    pub languages: BTreeMap<String, LexiconPaths>,
    /// Precomputed document-level sentiment, used instead of scoring the corpus.
    pub sentiment: Option<PathBuf>,
    /// `date` plus one column per external regressor.
    pub externals: Option<PathBuf>,
    /// `date` plus the target column.
    pub target: Option<PathBuf>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FeatureConfig {
    pub name: String,
    pub keywords: Option<Vec<String>>,
    pub regex: Option<String>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AttributionConfig {
    pub do_normalize: bool,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub version: u32,
    #[serde(default)]
    pub paths: Paths,
    /// Keyword or regex features added to the corpus before scoring.
    #[serde(default)]
    pub features: Vec<FeatureConfig>,
    #[serde(default)]
    pub features_binary: bool,
    /// Target column name; defaults to the only non-date column.
    pub target_column: Option<String>,
    #[serde(default)]
    pub aggregation: AggregationConfig,
    #[serde(default)]
    pub model: ModelConfig,
    #[serde(default)]
    pub attribution: AttributionConfig,
    #[serde(default = "default_output")]
    pub output: PathBuf,
    /// Recorded for reproducibility; the pipeline itself draws no random numbers.
    #[serde(default)]
    pub seed: u64,
    pub threads: Option<usize>,
}

fn default_output() -> PathBuf {
    PathBuf::from("output")
}

impl PipelineConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let config: PipelineConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        if config.version != CONFIG_VERSION {
            return Err(Error::Config(format!(
                "unsupported config version {} (expected {CONFIG_VERSION})",
                config.version
            )));
        }
        Ok(config)
    }

    /// Reads a config file; relative paths inside it are resolved against its directory.
    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let mut config = Self::from_toml(&text).map_err(|e| e.context(path.display().to_string()))?;
        let base = path.parent().unwrap_or(Path::new(""));
        config.resolve(base);
        Ok(config)
    }

    fn resolve(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        let p = &mut self.paths;
        for slot in [&mut p.corpus, &mut p.valence, &mut p.sentiment, &mut p.externals, &mut p.target] {
            if let Some(x) = slot.as_mut() {
                fix(x);
            }
        }
        p.lexicons.iter_mut().for_each(fix);
        for l in p.languages.values_mut() {
            l.lexicons.iter_mut().for_each(fix);
            if let Some(v) = l.valence.as_mut() {
                fix(v);
            }
        }
        fix(&mut self.output);
    }

    /// Every input file the config names.
    pub fn input_files(&self) -> Vec<&Path> {
        let p = &self.paths;
        let mut files: Vec<&Path> = [&p.corpus, &p.valence, &p.sentiment, &p.externals, &p.target]
            .into_iter()
            .flatten()
            .map(PathBuf::as_path)
            .collect();
        files.extend(p.lexicons.iter().map(PathBuf::as_path));
        for l in p.languages.values() {
            files.extend(l.lexicons.iter().map(PathBuf::as_path));
            files.extend(l.valence.as_deref());
        }
        files
    }

    pub fn validate(&self) -> Result<()> {
        for f in self.input_files() {
            if !f.is_file() {
                return Err(Error::Config(format!("input file {} does not exist", f.display())));
            }
        }
        let p = &self.paths;
        if p.sentiment.is_none() {
            if p.corpus.is_none() {
                return Err(Error::Config("paths.corpus or paths.sentiment is required".into()));
            }
            if p.lexicons.is_empty() == p.languages.is_empty() {
                return Err(Error::Config(
                    "give either paths.lexicons or paths.languages".into(),
                ));
            }
        }
        for f in &self.features {
            if f.keywords.is_some() == f.regex.is_some() {
                return Err(Error::Config(format!(
                    "feature `{}` needs exactly one of keywords or regex",
                    f.name
                )));
            }
        }
        self.aggregation.validate()?;
        self.model.validate()
    }
}

fn lexicon_set(paths: &[PathBuf], valence: Option<&Path>) -> Result<LexiconSet> {
    let lexicons = paths.iter().map(Lexicon::read_csv).collect::<Result<Vec<_>>>()?;
    let valence = valence.map(ValenceTable::read_csv).transpose()?;
    LexiconSet::new(lexicons, valence)
}

enum LoadedLexicons {
    Single(LexiconSet),
    ByLanguage(LanguageDispatch),
}

impl LoadedLexicons {
    fn as_lexicons(&self) -> Lexicons<'_> {
        match self {
            LoadedLexicons::Single(s) => s.into(),
            LoadedLexicons::ByLanguage(d) => d.into(),
        }
    }
}

/// A config plus the run-time overrides.
pub struct Pipeline {
    pub config: PipelineConfig,
    pub threads: Option<usize>,
}

impl Pipeline {
    pub fn new(config: PipelineConfig, threads: Option<usize>) -> Self {
        let threads = threads.or(config.threads);
        Pipeline { config, threads }
    }

    pub fn corpus(&self) -> Result<Corpus> {
        let path = self
            .config
            .paths
            .corpus
            .as_ref()
            .ok_or_else(|| Error::Config("paths.corpus is required".into()))?;
        let corpus = Corpus::read(path)?;
        if self.config.features.is_empty() {
            return Ok(corpus);
        }
        let specs: Vec<FeatureSpec> = self
            .config
            .features
            .iter()
            .map(|f| match (&f.keywords, &f.regex) {
                (Some(k), None) => Ok(FeatureSpec::keywords(&f.name, k.iter().cloned())),
                (None, Some(r)) => Ok(FeatureSpec::regex(&f.name, r.clone())),
                _ => Err(Error::Config(format!("feature `{}` needs exactly one of keywords or regex", f.name))),
            })
            .collect::<Result<_>>()?;
        corpus.add_features(&specs, self.config.features_binary)
    }

    fn lexicons(&self) -> Result<LoadedLexicons> {
        let p = &self.config.paths;
        if !p.languages.is_empty() {
            let sets = p
                .languages
                .iter()
                .map(|(lang, l)| Ok((lang.clone(), lexicon_set(&l.lexicons, l.valence.as_deref())?)))
                .collect::<Result<Vec<_>>>()?;
            return Ok(LoadedLexicons::ByLanguage(LanguageDispatch::new(sets)?));
        }
        Ok(LoadedLexicons::Single(lexicon_set(&p.lexicons, p.valence.as_deref())?))
    }

    /// Document- or sentence-level scores, read from `paths.sentiment` when given.
    pub fn sentiment(&self) -> Result<SentimentTable> {
        if let Some(path) = &self.config.paths.sentiment {
            return SentimentTable::read_csv(path);
        }
        let corpus = self.corpus()?;
        let lexicons = self.lexicons()?;
        let opts = SentimentOptions {
            how: self.config.aggregation.how_within,
            do_sentence: self.config.aggregation.do_sentence,
            threads: self.threads,
        };
        compute_sentiment(&corpus, lexicons.as_lexicons(), &opts)
    }

    pub fn measures(&self) -> Result<MeasureSet> {
        let sentiment = self.sentiment()?;
        with_threads(self.threads, || aggregate(&sentiment, &self.config.aggregation))?
    }

    pub fn externals(&self) -> Result<Option<Externals>> {
        self.config.paths.externals.as_ref().map(Externals::read_csv).transpose()
    }

    /// The target at each of `dates`.
    pub fn target(&self, dates: &[chrono::NaiveDate]) -> Result<Vec<f64>> {
        let path = self
            .config
            .paths
            .target
            .as_ref()
            .ok_or_else(|| Error::Config("paths.target is required".into()))?;
        let table = Table::read_csv(path)?;
        let (target_dates, names, columns) =
            dated_columns(&table).map_err(|e| e.context(path.display().to_string()))?;
        let j = match &self.config.target_column {
            Some(name) => names
                .iter()
                .position(|n| n == name)
                .ok_or_else(|| Error::MissingColumn(name.clone()))?,
            None if names.len() == 1 => 0,
            None => {
                return Err(Error::Config(
                    "the target file has several columns; set target_column".into(),
                ))
            }
        };
        dates
            .iter()
            .map(|d| {
                target_dates
                    .iter()
                    .position(|t| t == d)
                    .map(|i| columns[j][i])
                    .ok_or_else(|| Error::KeyMismatch(format!("no target value for {d}")))
            })
            .collect()
    }

    fn model_config(&self) -> ModelConfig {
        let mut m = self.config.model.clone();
        m.threads = self.threads.or(m.threads);
        m
    }

    fn output_dir(&self) -> Result<&Path> {
        let dir = self.config.output.as_path();
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        Ok(dir)
    }

    fn write(&self, name: &str, table: &Table) -> Result<PathBuf> {
        let path = self.output_dir()?.join(name);
        table.write_csv_file(&path)?;
        info!("wrote {}", path.display());
        Ok(path)
    }
}

#[derive(Debug, Parser)]
#[command(name = "sentiment-measures", version, about = "Textual sentiment time series and sparse regression")]
pub struct Cli {
    /// Pipeline configuration (TOML).
    #[arg(short, long, global = true, default_value = "pipeline.toml")]
    pub config: PathBuf,
    /// Worker threads; overrides the config file.
    #[arg(long, global = true, env = THREADS_ENV)]
    pub threads: Option<usize>,
    /// Output directory; overrides the config file.
    #[arg(short, long, global = true)]
    pub output: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check the config and parse every input.
    Validate,
    /// Score the corpus: sentiment.csv.
    Sentiment,
    /// Aggregate into measures: measures.csv, measures_long.csv, measures_stats.csv.
    Measures,
    /// Fit the model: coefficients and calibration, or rolling predictions and performance.
    Model,
    /// Attribute predictions: attributions.csv.
    Attribute,
    /// Corpus counts per period: corpus_summary.csv.
    Summarize,
}

pub fn run(cli: &Cli) -> Result<()> {
    let mut config = PipelineConfig::read(&cli.config)?;
    if let Some(out) = &cli.output {
        config.output = out.clone();
    }
    if cli.threads == Some(0) {
        return Err(Error::Config("--threads must be positive".into()));
    }
    config.validate()?;
    let pipeline = Pipeline::new(config, cli.threads);
    match cli.command {
        Command::Validate => validate(&pipeline),
        Command::Sentiment => {
            let s = pipeline.sentiment()?;
            pipeline.write("sentiment.csv", &s.to_table())?;
            Ok(())
        }
        Command::Measures => {
            let m = pipeline.measures()?;
            pipeline.write("measures.csv", &m.to_wide_table())?;
            pipeline.write("measures_long.csv", &m.to_long_table())?;
            pipeline.write("measures_stats.csv", &m.stats().to_table())?;
            println!("{} measures over {} dates", m.n_measures(), m.len());
            Ok(())
        }
        Command::Model => model(&pipeline),
        Command::Attribute => attribute(&pipeline),
        Command::Summarize => {
            let corpus = pipeline.corpus()?;
            let summary = corpus.summarize(pipeline.config.aggregation.by)?;
            pipeline.write("corpus_summary.csv", &summary.to_long_table())?;
            Ok(())
        }
    }
}

fn validate(pipeline: &Pipeline) -> Result<()> {
    let c = &pipeline.config;
    if c.paths.sentiment.is_none() {
        let corpus = pipeline.corpus()?;
        println!("corpus: {} documents, {} features", corpus.len(), corpus.feature_names().len());
        match pipeline.lexicons()? {
            LoadedLexicons::Single(s) => println!("lexicons: {}", s.names().collect::<Vec<_>>().join(", ")),
            LoadedLexicons::ByLanguage(d) => {
                for (lang, s) in d.iter() {
                    println!("lexicons[{lang}]: {}", s.names().collect::<Vec<_>>().join(", "));
                }
            }
        }
    } else {
        let s = pipeline.sentiment()?;
        println!("sentiment: {} rows, {} columns", s.len(), s.columns().len());
    }
    let schemes = c.aggregation.time_schemes()?;
    println!(
        "time schemes: {}",
        schemes.iter().map(|s| s.name()).collect::<Vec<_>>().join(", ")
    );
    if let Some(e) = pipeline.externals()? {
        println!("externals: {}", e.names.join(", "));
    }
    println!("ok");
    Ok(())
}

fn design(pipeline: &Pipeline) -> Result<(MeasureSet, Option<Externals>, Design, Vec<f64>)> {
    let measures = pipeline.measures()?;
    let externals = pipeline.externals()?;
    let design = Design::new(&measures, externals.as_ref(), &pipeline.config.model.do_shrinkage_x)?;
    let y = pipeline.target(measures.dates())?;
    Ok((measures, externals, design, y))
}

fn model(pipeline: &Pipeline) -> Result<()> {
    let (_, _, design, y) = design(pipeline)?;
    let cfg = pipeline.model_config();
    if cfg.do_iter {
        let r = fit_model_iter(&design, &y, &cfg)?;
        pipeline.write("predictions.csv", &r.predictions_table())?;
        pipeline.write("performance.csv", &r.performance_table())?;
        pipeline.write("iteration_coefficients.csv", &r.coefficients_table())?;
        println!("iterations: {}", r.len());
        println!("RMSE: {}", format_number(r.performance.rmse));
        println!("MAD: {}", format_number(r.performance.mad));
        println!("MDA: {}", format_number(r.performance.mda));
    } else {
        let fit = fit_model(&design, &y, &cfg)?;
        pipeline.write("coefficients.csv", &fit.coefficients_table())?;
        pipeline.write("calibration.csv", &fit.calibration_table())?;
        let fitted = Table::new(
            ["date", "target", "fitted"].map(String::from).to_vec(),
            (0..fit.dates.len())
                .map(|i| {
                    vec![fit.dates[i].to_string(), format_number(fit.target[i]), format_number(fit.fitted[i])]
                })
                .collect(),
        );
        pipeline.write("fitted.csv", &fitted)?;
        println!("alpha: {}", format_number(fit.alpha));
        println!("lambda: {}", format_number(fit.lambda));
        println!("nonzero coefficients: {}", fit.coefficients.iter().filter(|b| **b != 0.0).count());
        if !fit.discarded.is_empty() {
            println!("discarded: {}", fit.discarded.join(", "));
        }
    }
    Ok(())
}

fn attribute(pipeline: &Pipeline) -> Result<()> {
    let (measures, externals, design, y) = design(pipeline)?;
    let cfg = pipeline.model_config();
    let a = if cfg.do_iter {
        let r = fit_model_iter(&design, &y, &cfg)?;
        attributions_iter(&r, &measures, externals.as_ref())?
    } else {
        let fit = fit_model(&design, &y, &cfg)?;
        attributions(&fit, &measures, externals.as_ref(), None)?
    };
    let a = if pipeline.config.attribution.do_normalize { a.normalize() } else { a };
    pipeline.write("attributions.csv", &a.to_long_table())?;
    Ok(())
}

pub fn exit_code(error: &Error) -> u8 {
    match error.class() {
        ErrorClass::Config => 2,
        ErrorClass::Data => 3,
        ErrorClass::Numerical => 4,
    }
}

/// Entry point for the binary.
pub fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_parses_with_defaults() {
        let c = PipelineConfig::from_toml(
            r#"
            version = 1
            [paths]
            corpus = "corpus.csv"
            lexicons = ["a.csv"]
            [aggregation]
            how_time = ["equal_weight", "linear"]
            lag = 3
            [model]
            type = "AIC"
            h = 1
            "#,
        )
        .unwrap();
        assert_eq!(c.aggregation.lag, 3);
        assert_eq!(c.model.h, 1);
        assert_eq!(c.output, PathBuf::from("output"));
    }

    #[test]
    fn wrong_version_is_a_config_error() {
        let e = PipelineConfig::from_toml("version = 7").unwrap_err();
        assert_eq!(exit_code(&e), 2);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(PipelineConfig::from_toml("version = 1\nbogus = 3").is_err());
    }

    #[test]
    fn relative_paths_follow_the_config() {
        let mut c = PipelineConfig::from_toml("version = 1\n[paths]\ncorpus = \"c.csv\"").unwrap();
        c.resolve(Path::new("/data/run"));
        assert_eq!(c.paths.corpus.unwrap(), PathBuf::from("/data/run/c.csv"));
        assert_eq!(c.output, PathBuf::from("/data/run/output"));
    }
}
