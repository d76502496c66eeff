mod common;

use std::fmt::Write as _;
use std::path::Path;
use std::process::{Command, Output};

use chrono::{Months, NaiveDate};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn run(config: &Path, out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sentiment-measures"))
        .args(["--config".as_ref(), config.as_os_str()])
        .args(["--output".as_ref(), out.as_os_str()])
        .args(args)
        .output()
        .unwrap()
}

fn csv_shape(path: &Path) -> (usize, usize) {
    let text = std::fs::read_to_string(path).unwrap();
    let header = text.lines().next().unwrap().split(',').count();
    (header, text.lines().count() - 1)
}

#[test]
fn fixture_measures_have_one_column_per_combination() {
    let out = tempfile::tempdir().unwrap();
    let result = run(&common::data_dir().join("pipeline.toml"), out.path(), &["measures"]);
    assert!(result.status.success(), "{}", String::from_utf8_lossy(&result.stderr));
    // 2 lexicons, 3 features, 6 time weightings, plus the date column
    let (columns, rows) = csv_shape(&out.path().join("measures.csv"));
    assert_eq!(columns, 1 + 2 * 3 * 6);
    assert_eq!(String::from_utf8_lossy(&result.stdout).trim(), format!("36 measures over {rows} dates"));
}

#[test]
fn fixture_model_writes_its_tables() {
    let out = tempfile::tempdir().unwrap();
    let result = run(&common::data_dir().join("pipeline.toml"), out.path(), &["model"]);
    assert!(result.status.success(), "{}", String::from_utf8_lossy(&result.stderr));
    for file in ["coefficients.csv", "calibration.csv", "fitted.csv"] {
        assert!(out.path().join(file).exists(), "{file}");
    }
    let coefficients = std::fs::read_to_string(out.path().join("coefficients.csv")).unwrap();
    assert!(coefficients.lines().nth(1).unwrap().starts_with("(Intercept),"));
}

#[test]
fn config_errors_exit_with_2() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        "version = 2\n[paths]\ncorpus = \"c.csv\"\nlexicons = [\"l.csv\"]\n",
        "version = 1\ncolour = \"blue\"\n[paths]\ncorpus = \"c.csv\"\nlexicons = [\"l.csv\"]\n",
        "version = 1\n[paths]\nlexicons = [\"l.csv\"]\n",
    ];
    for (i, text) in cases.iter().enumerate() {
        let config = dir.path().join(format!("bad{i}.toml"));
        std::fs::write(&config, text).unwrap();
        let result = run(&config, dir.path(), &["validate"]);
        assert_eq!(result.status.code(), Some(2), "{text}: {}", String::from_utf8_lossy(&result.stderr));
        assert!(String::from_utf8_lossy(&result.stderr).starts_with("error: "));
    }
    let result = run(&common::data_dir().join("pipeline.toml"), dir.path(), &["--threads", "0", "validate"]);
    assert_eq!(result.status.code(), Some(2));
}

#[test]
fn data_errors_exit_with_3() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("lex.csv"), "word,score\ngood,1\n").unwrap();
    std::fs::write(dir.path().join("corpus.csv"), "id,date,text\n1,2021-13-01,good\n").unwrap();
    let config = dir.path().join("p.toml");
    std::fs::write(&config, "version = 1\n[paths]\ncorpus = \"corpus.csv\"\nlexicons = [\"lex.csv\"]\n").unwrap();
    let result = run(&config, &dir.path().join("out"), &["sentiment"]);
    assert_eq!(result.status.code(), Some(3), "{}", String::from_utf8_lossy(&result.stderr));

    // a referenced file that does not exist is a configuration problem
    std::fs::write(&config, "version = 1\n[paths]\ncorpus = \"missing.csv\"\nlexicons = [\"lex.csv\"]\n").unwrap();
    let result = run(&config, &dir.path().join("out"), &["sentiment"]);
    assert_eq!(result.status.code(), Some(2));
}

#[test]
fn rolling_forecast_over_232_months() {
    let dir = tempfile::tempdir().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(232);
    let start = NaiveDate::from_ymd_opt(1996, 1, 1).unwrap();
    let months: Vec<NaiveDate> = (0..232).map(|m| start + Months::new(m)).collect();

    let mut sentiment = String::from("id,date,word_count,a--f,b--f,c--f\n");
    let mut target = String::from("date,vix\n");
    let mut level = 20.0;
    for (m, date) in months.iter().enumerate() {
        let s: [f64; 3] = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
        writeln!(sentiment, "d{m},{},{},{},{},{}", date.format("%Y-%m-15"), 100, s[0], s[1], s[2]).unwrap();
        level = 0.8 * level + 4.0 + 2.0 * s[0] + rng.gen_range(-0.5..0.5);
        writeln!(target, "{date},{level}").unwrap();
    }
    std::fs::write(dir.path().join("sentiment.csv"), sentiment).unwrap();
    std::fs::write(dir.path().join("target.csv"), target).unwrap();
    let config = dir.path().join("p.toml");
    std::fs::write(
        &config,
        r#"version = 1
target_column = "vix"

[paths]
sentiment = "sentiment.csv"
target = "target.csv"

[aggregation]
how_docs = "equal_weight"
how_time = ["equal_weight"]
by = "month"
lag = 1

[model]
type = "BIC"
alphas = [0.5, 1.0]
h = 6
oos = 5
do_iter = true
n_sample = 60
"#,
    )
    .unwrap();
    let out = dir.path().join("out");
    let result = run(&config, &out, &["--threads", "1", "model"]);
    assert!(result.status.success(), "{}", String::from_utf8_lossy(&result.stderr));
    let (_, rows) = csv_shape(&out.join("predictions.csv"));
    assert_eq!(rows, 232 - 60 - 6 - 5);
    let (_, metrics) = csv_shape(&out.join("performance.csv"));
    assert_eq!(metrics, 3);
}
