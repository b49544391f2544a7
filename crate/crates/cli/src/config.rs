//! Line-oriented experiment configuration.
//!
//! ```text
//! # comment
//! name = fixed-n
//! mode = sweep-k
//! n = 10
//! k = 1..10          # inclusive integer range
//! lambda = {0.5, 1}  # explicit list
//! mu = 3
//! ```
//!
//! Every key may appear at most once. Numeric keys accept a scalar, a
//! `lo..hi` integer range or a `{a,b,c}` list.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use coded_delay::sim::{
    CancelPolicy, DEFAULT_ECDF_POINTS, DEFAULT_REPLICATIONS, DEFAULT_REQUESTS, DEFAULT_SEED, DEFAULT_WARMUP,
};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ConfigError {
    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: duplicate key `{key}`")]
    Duplicate { line: usize, key: String },
    #[error("`{key}`: {reason}")]
    Range { key: String, reason: String },
    #[error("missing required key `{key}` for mode {mode}")]
    Missing { key: &'static str, mode: Mode },
}

impl ConfigError {
    fn range(key: &str, reason: impl Into<String>) -> Self {
        ConfigError::Range {
            key: key.to_string(),
            reason: reason.into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// Analytic fork-join bounds only.
    Bounds,
    FountainAnalytic,
    /// Fountain simulation checked against the closed form.
    FountainSim,
    /// Fork-join simulation plus bounds over the full grid.
    ForkJoinSim,
    /// Fork-join simulation over `k` for a single `(n, lambda, mu)`.
    SweepK,
    /// Fork-join simulation over `k` with `n = expansion * k`.
    SweepNFixedRate,
    /// Fork-join simulation emitting the response-time ECDF.
    Cdf,
}

impl Mode {
    pub const ALL: [Mode; 7] = [
        Mode::Bounds,
        Mode::FountainAnalytic,
        Mode::FountainSim,
        Mode::ForkJoinSim,
        Mode::SweepK,
        Mode::SweepNFixedRate,
        Mode::Cdf,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Bounds => "bounds",
            Mode::FountainAnalytic => "fountain-analytic",
            Mode::FountainSim => "fountain-sim",
            Mode::ForkJoinSim => "forkjoin-sim",
            Mode::SweepK => "sweep-k",
            Mode::SweepNFixedRate => "sweep-n-fixed-rate",
            Mode::Cdf => "cdf",
        }
    }

    pub fn is_fountain(self) -> bool {
        matches!(self, Mode::FountainAnalytic | Mode::FountainSim)
    }

    pub fn simulates(self) -> bool {
        !matches!(self, Mode::Bounds | Mode::FountainAnalytic)
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Mode::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| format!("unknown mode `{s}`"))
    }
}

/// Grid axes. Empty axes are unused by the chosen mode.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Grid {
    pub n: Vec<usize>,
    pub k: Vec<usize>,
    pub lambda: Vec<f64>,
    pub mu: Vec<f64>,
    pub delivery: Vec<f64>,
    pub wait_scale: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub name: String,
    pub mode: Mode,
    pub grid: Grid,
    pub requests: usize,
    pub warmup: usize,
    pub seed: u64,
    pub replications: usize,
    pub ecdf_points: usize,
    pub cancel: CancelPolicy,
    /// `n / k` ratio for [`Mode::SweepNFixedRate`].
    pub expansion: usize,
    pub output: Option<PathBuf>,
}

const KEYS: [&str; 17] = [
    "name",
    "mode",
    "n",
    "k",
    "lambda",
    "mu",
    "delivery",
    "wait_scale",
    "requests",
    "warmup",
    "seed",
    "replications",
    "ecdf_points",
    "cancel",
    "expansion",
    "output",
    "D",
];

/// One `key = value` entry as written.
#[derive(Debug, Clone)]
struct Entry {
    line: usize,
    key: String,
    value: String,
}

#[derive(Debug, Clone, PartialEq)]
enum Value {
    Scalar(String),
    List(Vec<String>),
    Range(i64, i64),
}

fn parse_value(raw: &str, line: usize) -> Result<Value, ConfigError> {
    let err = |reason: String| ConfigError::Parse { line, reason };
    if let Some(inner) = raw.strip_prefix('{') {
        let inner = inner
            .strip_suffix('}')
            .ok_or_else(|| err(format!("unterminated list `{raw}`")))?;
        let items: Vec<String> = inner.split(',').map(|s| s.trim().to_string()).collect();
        if items.iter().any(|s| s.is_empty()) {
            return Err(err(format!("empty list element in `{raw}`")));
        }
        return Ok(Value::List(items));
    }
    if let Some((lo, hi)) = raw.split_once("..") {
        let lo: i64 = lo
            .trim()
            .parse()
            .map_err(|_| err(format!("bad range start in `{raw}`")))?;
        let hi: i64 = hi
            .trim()
            .parse()
            .map_err(|_| err(format!("bad range end in `{raw}`")))?;
        return Ok(Value::Range(lo, hi));
    }
    Ok(Value::Scalar(raw.to_string()))
}

fn split_entries(text: &str) -> Result<Vec<Entry>, ConfigError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let (key, value) = body.split_once('=').ok_or_else(|| ConfigError::Parse {
            line,
            reason: format!("expected `key = value`, found `{body}`"),
        })?;
        let (key, value) = (key.trim(), value.trim());
        if key.is_empty() || value.is_empty() {
            return Err(ConfigError::Parse {
                line,
                reason: format!("expected `key = value`, found `{body}`"),
            });
        }
        if !KEYS.contains(&key) {
            return Err(ConfigError::UnknownKey {
                line,
                key: key.to_string(),
            });
        }
        let key = if key == "D" { "delivery" } else { key };
        if out.iter().any(|e: &Entry| e.key == key) {
            return Err(ConfigError::Duplicate {
                line,
                key: key.to_string(),
            });
        }
        out.push(Entry {
            line,
            key: key.to_string(),
            value: value.to_string(),
        });
    }
    Ok(out)
}

fn scalar<T: FromStr>(e: &Entry) -> Result<T, ConfigError> {
    match parse_value(&e.value, e.line)? {
        Value::Scalar(s) => s.parse().map_err(|_| ConfigError::Parse {
            line: e.line,
            reason: format!("`{}`: cannot parse `{s}`", e.key),
        }),
        _ => Err(ConfigError::range(&e.key, "expects a single value")),
    }
}

fn axis<T: FromStr + Copy>(e: &Entry, from_int: impl Fn(i64) -> Option<T>) -> Result<Vec<T>, ConfigError> {
    let parse = |s: &str| {
        s.parse::<T>().map_err(|_| ConfigError::Parse {
            line: e.line,
            reason: format!("`{}`: cannot parse `{s}`", e.key),
        })
    };
    match parse_value(&e.value, e.line)? {
        Value::Scalar(s) => Ok(vec![parse(&s)?]),
        Value::List(items) => items.iter().map(|s| parse(s)).collect(),
        Value::Range(lo, hi) => {
            if lo > hi {
                return Err(ConfigError::range(&e.key, format!("empty range {lo}..{hi}")));
            }
            (lo..=hi)
                .map(|v| from_int(v).ok_or_else(|| ConfigError::range(&e.key, format!("{v} out of range"))))
                .collect()
        }
    }
}

fn check_counts(key: &str, xs: &[usize]) -> Result<(), ConfigError> {
    match xs.iter().find(|&&x| x == 0) {
        Some(_) => Err(ConfigError::range(key, "must be at least 1")),
        None => Ok(()),
    }
}

fn check_reals(key: &str, xs: &[f64], positive: bool) -> Result<(), ConfigError> {
    for &x in xs {
        if !x.is_finite() || x < 0.0 || (positive && x == 0.0) {
            let want = if positive { "positive" } else { "nonnegative" };
            return Err(ConfigError::range(key, format!("{x} is not finite and {want}")));
        }
    }
    Ok(())
}

/// Parses a configuration document.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, ConfigError> {
    parse_config_with_overrides(text, &[])
}

/// Parses `text`, then applies `overrides` (key, raw value) on top. An
/// override replaces the document's entry for the same key.
pub fn parse_config_with_overrides(
    text: &str,
    overrides: &[(String, String)],
) -> Result<ExperimentConfig, ConfigError> {
    let mut entries = split_entries(text)?;
    for (key, value) in overrides {
        if !KEYS.contains(&key.as_str()) {
            return Err(ConfigError::UnknownKey {
                line: 0,
                key: key.clone(),
            });
        }
        let key = if key == "D" { "delivery" } else { key.as_str() };
        entries.retain(|e| e.key != key);
        entries.push(Entry {
            line: 0,
            key: key.to_string(),
            value: value.trim().to_string(),
        });
    }
    build(&entries)
}

fn build(entries: &[Entry]) -> Result<ExperimentConfig, ConfigError> {
    let get = |key: &str| entries.iter().find(|e| e.key == key);
    let int_usize = |v: i64| usize::try_from(v).ok();
    let int_f64 = |v: i64| Some(v as f64);

    let mode: Mode = match get("mode") {
        Some(e) => e
            .value
            .parse()
            .map_err(|reason| ConfigError::Parse { line: e.line, reason })?,
        None => return Err(ConfigError::range("mode", "is required")),
    };

    let mut grid = Grid::default();
    if let Some(e) = get("n") {
        grid.n = axis(e, int_usize)?;
    }
    if let Some(e) = get("k") {
        grid.k = axis(e, int_usize)?;
    }
    if let Some(e) = get("lambda") {
        grid.lambda = axis(e, int_f64)?;
    }
    if let Some(e) = get("mu") {
        grid.mu = axis(e, int_f64)?;
    }
    if let Some(e) = get("delivery") {
        grid.delivery = axis(e, int_f64)?;
    }
    if let Some(e) = get("wait_scale") {
        grid.wait_scale = axis(e, int_f64)?;
    }
    check_counts("n", &grid.n)?;
    check_counts("k", &grid.k)?;
    check_reals("lambda", &grid.lambda, false)?;
    check_reals("mu", &grid.mu, true)?;
    check_reals("delivery", &grid.delivery, false)?;
    check_reals("wait_scale", &grid.wait_scale, false)?;

    let required: &[(&'static str, &Vec<f64>)] = if mode.is_fountain() {
        &[("delivery", &grid.delivery), ("wait_scale", &grid.wait_scale)]
    } else {
        &[("lambda", &grid.lambda), ("mu", &grid.mu)]
    };
    for (key, xs) in required {
        if xs.is_empty() {
            return Err(ConfigError::Missing { key, mode });
        }
    }
    if grid.k.is_empty() {
        return Err(ConfigError::Missing { key: "k", mode });
    }
    if mode != Mode::SweepNFixedRate && grid.n.is_empty() {
        return Err(ConfigError::Missing { key: "n", mode });
    }
    if mode == Mode::SweepK && (grid.n.len() != 1 || grid.lambda.len() != 1 || grid.mu.len() != 1) {
        return Err(ConfigError::range("k", "sweep-k needs a single n, lambda and mu"));
    }

    let opt = |key: &str| -> Result<Option<String>, ConfigError> { Ok(get(key).map(|e| e.value.clone())) };
    let num = |key: &str, default: usize| -> Result<usize, ConfigError> { get(key).map_or(Ok(default), scalar) };
    let requests = num("requests", DEFAULT_REQUESTS)?;
    let warmup = num("warmup", DEFAULT_WARMUP)?;
    let replications = num("replications", DEFAULT_REPLICATIONS)?;
    let ecdf_points = num("ecdf_points", DEFAULT_ECDF_POINTS)?;
    let expansion = num("expansion", 2)?;
    let seed = get("seed").map_or(Ok(DEFAULT_SEED), scalar)?;
    if mode.simulates() {
        if warmup >= requests {
            return Err(ConfigError::range("requests", format!("must exceed warmup ({warmup})")));
        }
        if requests - warmup < 2 {
            return Err(ConfigError::range("requests", "leaves fewer than 2 recorded samples"));
        }
    }
    if replications == 0 {
        return Err(ConfigError::range("replications", "must be at least 1"));
    }
    if ecdf_points == 0 {
        return Err(ConfigError::range("ecdf_points", "must be at least 1"));
    }
    if expansion == 0 {
        return Err(ConfigError::range("expansion", "must be at least 1"));
    }
    let cancel = match opt("cancel")?.as_deref() {
        None | Some("preempt") => CancelPolicy::Preempt,
        Some("queued-only") => CancelPolicy::QueuedOnly,
        Some(other) => {
            return Err(ConfigError::range(
                "cancel",
                format!("`{other}` is not preempt or queued-only"),
            ))
        }
    };

    Ok(ExperimentConfig {
        name: opt("name")?.unwrap_or_else(|| mode.as_str().to_string()),
        mode,
        grid,
        requests,
        warmup,
        seed,
        replications,
        ecdf_points,
        cancel,
        expansion,
        output: opt("output")?.map(PathBuf::from),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn err_key(r: Result<ExperimentConfig, ConfigError>) -> String {
        match r {
            Err(ConfigError::Range { key, .. }) => key,
            other => panic!("expected range error, got {other:?}"),
        }
    }

    #[test]
    fn minimal_doc_gets_defaults() {
        let c = parse_config("mode = forkjoin-sim\nn = 10\nk = 5\nlambda = 1\nmu = 3\n").unwrap();
        assert_eq!(c.requests, 1_000_000);
        assert_eq!(c.warmup, 10_000);
        assert_eq!(c.seed, 1);
        assert_eq!(c.replications, 10);
        assert_eq!(c.cancel, CancelPolicy::Preempt);
        assert_eq!(c.grid.n, vec![10]);
        assert_eq!(c.name, "forkjoin-sim");
        assert!(c.output.is_none());
    }

    #[test]
    fn k_zero_names_k() {
        let r = parse_config("mode = bounds\nn = 10\nk = 0\nlambda = 1\nmu = 3");
        assert_eq!(err_key(r), "k");
        let r = parse_config("mode = bounds\nn = 10\nk = 0..3\nlambda = 1\nmu = 3");
        assert_eq!(err_key(r), "k");
    }

    #[test]
    fn range_and_list_expand() {
        let c = parse_config("mode = bounds\nn = 10\nk = 1..10\nlambda = {0.5, 1,2}\nmu = 3").unwrap();
        assert_eq!(c.grid.k, (1..=10).collect::<Vec<_>>());
        assert_eq!(c.grid.lambda, vec![0.5, 1.0, 2.0]);
    }

    #[test]
    fn comments_and_blank_lines() {
        let doc = "# header\n\nmode = bounds # trailing\n  n = 4\nk=2\nlambda = 1\nmu = 3\n";
        assert!(parse_config(doc).is_ok());
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let r = parse_config("mode = bounds\nn 10\n");
        assert_eq!(
            r,
            Err(ConfigError::Parse {
                line: 2,
                reason: "expected `key = value`, found `n 10`".into()
            })
        );
        let r = parse_config("mode = bounds\n\nn = ten\n");
        assert!(matches!(r, Err(ConfigError::Parse { line: 3, .. })));
        let r = parse_config("mode = bounds\nk = {1,2\n");
        assert!(matches!(r, Err(ConfigError::Parse { line: 2, .. })));
    }

    #[test]
    fn unknown_and_duplicate_keys() {
        assert_eq!(
            parse_config("mode = bounds\nrate = 3\n"),
            Err(ConfigError::UnknownKey {
                line: 2,
                key: "rate".into()
            })
        );
        assert!(matches!(
            parse_config("mode = bounds\nn = 3\nn = 4\n"),
            Err(ConfigError::Duplicate { line: 3, .. })
        ));
        assert!(matches!(
            parse_config("mode = fountain-analytic\nD = 3\ndelivery = 4\n"),
            Err(ConfigError::Duplicate { .. })
        ));
    }

    #[test]
    fn missing_and_bad_values() {
        assert!(matches!(parse_config("n = 3"), Err(ConfigError::Range { .. })));
        assert!(matches!(
            parse_config("mode = bounds\nn = 3\nk = 1\nmu = 3"),
            Err(ConfigError::Missing { key: "lambda", .. })
        ));
        assert_eq!(
            err_key(parse_config("mode = bounds\nn = 3\nk = 1\nlambda = 1\nmu = 0")),
            "mu"
        );
        assert_eq!(
            err_key(parse_config("mode = bounds\nn = 3\nk = 1\nlambda = -1\nmu = 1")),
            "lambda"
        );
        assert_eq!(
            err_key(parse_config("mode = bounds\nn = 3\nk = 4..2\nlambda = 1\nmu = 1")),
            "k"
        );
        let sim = "mode = forkjoin-sim\nn = 3\nk = 1\nlambda = 1\nmu = 3\n";
        assert_eq!(
            err_key(parse_config(&format!("{sim}requests = 10\nwarmup = 10"))),
            "requests"
        );
        assert_eq!(err_key(parse_config(&format!("{sim}replications = 0"))), "replications");
        assert_eq!(err_key(parse_config(&format!("{sim}cancel = never"))), "cancel");
        assert_eq!(err_key(parse_config(&format!("{sim}seed = {{1,2}}"))), "seed");
        assert!(parse_config("mode = sideways\n").is_err());
    }

    #[test]
    fn mode_specific_requirements() {
        let c = parse_config("mode = fountain-analytic\nn = 10\nk = 1..10\nD = 5\nwait_scale = {0,2,4,6}").unwrap();
        assert_eq!(c.grid.delivery, vec![5.0]);
        assert_eq!(c.grid.wait_scale.len(), 4);
        let c = parse_config("mode = sweep-n-fixed-rate\nk = 1..10\nlambda = 1\nmu = 3").unwrap();
        assert_eq!(c.expansion, 2);
        assert!(parse_config("mode = sweep-k\nn = {4,5}\nk = 1..4\nlambda = 1\nmu = 3").is_err());
        assert!(parse_config("mode = cdf\nk = 1\nlambda = 1\nmu = 3").is_err());
    }

    #[test]
    fn overrides_win() {
        let doc = "mode = bounds\nn = 10\nk = 1..10\nlambda = 1\nmu = 3\n";
        let c = parse_config_with_overrides(doc, &[("k".into(), "3".into()), ("seed".into(), "9".into())]).unwrap();
        assert_eq!(c.grid.k, vec![3]);
        assert_eq!(c.seed, 9);
        let c = parse_config_with_overrides(doc, &[("output".into(), "../out.csv".into())]).unwrap();
        assert_eq!(c.output, Some(PathBuf::from("../out.csv")));
        assert!(parse_config_with_overrides(doc, &[("bogus".into(), "1".into())]).is_err());
    }
}
