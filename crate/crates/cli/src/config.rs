//! Experiment configuration: `key = value` files, defaults and overrides.

use std::collections::BTreeMap;
use std::path::PathBuf;

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Experiment {
    ExactTable,
    RecursionTable,
    DiagramMc,
    FTable,
    MiniSmc,
    CrsClt,
}

pub const ALL_EXPERIMENTS: [Experiment; 6] = [
    Experiment::ExactTable,
    Experiment::RecursionTable,
    Experiment::DiagramMc,
    Experiment::FTable,
    Experiment::MiniSmc,
    Experiment::CrsClt,
];

const SPLIT_DEFAULTS: [(&str, &str); 6] = [
    ("rho", "1"),
    ("pop_tol", "0"),
    ("attempts", "1000"),
    ("redraw_cap", "1000"),
    ("cut_mode", "all-pieces"),
    ("node_weights", "none"),
];

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::ExactTable => "exact-table",
            Experiment::RecursionTable => "recursion-table",
            Experiment::DiagramMc => "diagram-mc",
            Experiment::FTable => "f-table",
            Experiment::MiniSmc => "mini-smc",
            Experiment::CrsClt => "crs-clt",
        }
    }

    /// Subcommand that runs this experiment.
    pub fn command(self) -> &'static str {
        match self {
            Experiment::ExactTable => "exact",
            Experiment::RecursionTable => "recursion",
            Experiment::DiagramMc => "simulate",
            Experiment::FTable => "ftable",
            Experiment::MiniSmc => "minismc",
            Experiment::CrsClt => "crs",
        }
    }

    /// Accepts either the experiment name or its subcommand.
    pub fn parse(s: &str) -> Option<Self> {
        ALL_EXPERIMENTS
            .into_iter()
            .find(|e| e.name() == s || e.command() == s)
    }

    /// Key that `--trials` sets, if any.
    pub fn trials_key(self) -> Option<&'static str> {
        match self {
            Experiment::DiagramMc | Experiment::FTable => Some("trials"),
            Experiment::MiniSmc => Some("runs"),
            Experiment::CrsClt => Some("replications"),
            _ => None,
        }
    }

    /// Every key this experiment understands with its default value.
    pub fn defaults(self) -> Vec<(&'static str, &'static str)> {
        let mut d = vec![("seed", "1")];
        match self {
            Experiment::ExactTable => d.extend([
                ("sizes", "2,3,4,5,6"),
                ("districts", "2,3,4,5,6"),
                ("alignment", "shifted"),
            ]),
            Experiment::RecursionTable => d.extend([
                ("sizes", "10,100,1000,5000"),
                ("max_index", "10"),
                ("tol", "1e-6"),
            ]),
            Experiment::DiagramMc => d.extend([
                ("sizes", "5,20,50"),
                ("districts", "40"),
                ("trials", "10000"),
                ("weights", "uniform"),
                ("shares", "0.25,0.5,0.75,1"),
                ("threshold", "at-least"),
                ("square", "false"),
                ("alignment", "shifted"),
            ]),
            Experiment::FTable => d.extend([
                ("sizes", "10,100,1000"),
                ("shares", "0.25,0.5,0.75,1"),
                ("weights", "uniform"),
                ("trials", "1000"),
                ("threshold", "at-least"),
                ("max_levels", "none"),
            ]),
            Experiment::MiniSmc => {
                d.extend([
                    ("graph", "grid:6x6"),
                    ("districts", "6"),
                    ("particles", "100"),
                    ("runs", "1"),
                    ("j", "all"),
                ]);
                d.extend(SPLIT_DEFAULTS);
            }
            Experiment::CrsClt => {
                d.extend([
                    ("graph", "grid:3x3"),
                    ("districts", "3"),
                    ("sizes", "100,1000,10000"),
                    ("alpha", "0.3333333333333333"),
                    ("exponent", "none"),
                    ("replications", "500"),
                    ("plan", "0"),
                ]);
                d.extend(SPLIT_DEFAULTS);
            }
        }
        d
    }
}

/// `key = value` pairs of a config file, in file order, with line numbers.
pub type RawEntries = Vec<(usize, String, String)>;

/// Parses a config file. Blank lines and text after `#` are ignored; a key
/// may appear only once.
pub fn parse_config_text(text: &str) -> Result<RawEntries, CliError> {
    let mut seen = BTreeMap::new();
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let (k, v) = body
            .split_once('=')
            .ok_or_else(|| CliError::config(format!("line {line}: expected `key = value`")))?;
        let (k, v) = (k.trim(), v.trim());
        if k.is_empty() || !k.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
            return Err(CliError::config(format!("line {line}: bad key `{k}`")));
        }
        if v.is_empty() {
            return Err(CliError::config(format!("line {line}: `{k}` has no value")));
        }
        if let Some(first) = seen.insert(k.to_string(), line) {
            return Err(CliError::config(format!(
                "line {line}: `{k}` already set on line {first}"
            )));
        }
        out.push((line, k.to_string(), v.to_string()));
    }
    Ok(out)
}

/// Fully resolved settings for one experiment.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub settings: BTreeMap<String, String>,
    pub out: PathBuf,
}

/// Command-line inputs that override the config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub trials: Option<usize>,
    pub graph: Option<String>,
    pub out: Option<PathBuf>,
    /// `key=value` pairs from `--set`.
    pub set: Vec<String>,
}

impl ExperimentConfig {
    /// Layers defaults, the config file (if any) and `overrides`, in that
    /// order. Unknown keys are rejected.
    pub fn resolve(
        command: Option<Experiment>,
        file: Option<&str>,
        overrides: &Overrides,
    ) -> Result<Self, CliError> {
        let entries = match file {
            Some(text) => parse_config_text(text)?,
            None => Vec::new(),
        };
        let named = entries
            .iter()
            .find(|e| e.1 == "experiment")
            .map(|e| {
                Experiment::parse(&e.2)
                    .ok_or_else(|| CliError::config(format!("line {}: unknown experiment `{}`", e.0, e.2)))
            })
            .transpose()?;
        let experiment = match (command, named) {
            (Some(c), Some(n)) if c != n => {
                return Err(CliError::config(format!(
                    "config is for `{}` but `{}` was requested",
                    n.name(),
                    c.command()
                )))
            }
            (Some(c), _) => c,
            (None, Some(n)) => n,
            (None, None) => return Err(CliError::config("no experiment given")),
        };
        let mut settings: BTreeMap<String, String> = experiment
            .defaults()
            .into_iter()
            .map(|(k, v)| (k.to_string(), v.to_string()))
            .collect();
        let mut out = None;
        let mut apply = |key: &str, value: String, origin: &str| -> Result<(), CliError> {
            if key == "experiment" {
                return Ok(());
            }
            if key == "out" {
                out = Some(PathBuf::from(value));
                return Ok(());
            }
            match settings.get_mut(key) {
                Some(slot) => {
                    *slot = value;
                    Ok(())
                }
                None => Err(CliError::config(format!(
                    "{origin}: `{key}` is not a setting of {}",
                    experiment.name()
                ))),
            }
        };
        for (line, k, v) in entries {
            apply(&k, v, &format!("line {line}"))?;
        }
        for pair in &overrides.set {
            let (k, v) = pair
                .split_once('=')
                .ok_or_else(|| CliError::config(format!("--set expects key=value, got `{pair}`")))?;
            apply(k.trim(), v.trim().to_string(), "--set")?;
        }
        if let Some(seed) = overrides.seed {
            apply("seed", seed.to_string(), "--seed")?;
        }
        if let Some(trials) = overrides.trials {
            let key = experiment
                .trials_key()
                .ok_or_else(|| CliError::config(format!("--trials does not apply to {}", experiment.name())))?;
            apply(key, trials.to_string(), "--trials")?;
        }
        if let Some(graph) = &overrides.graph {
            apply("graph", graph.clone(), "--graph")?;
        }
        if let Some(o) = &overrides.out {
            out = Some(o.clone());
        }
        let out = out.ok_or_else(|| CliError::config("no output directory (use --out or `out = ...`)"))?;
        Ok(ExperimentConfig {
            experiment,
            settings,
            out,
        })
    }

    /// Canonical text of the resolved settings: one sorted `key = value`
    /// line each, experiment first. The output directory is not included.
    pub fn canonical_text(&self) -> String {
        let mut s = format!("experiment = {}\n", self.experiment.name());
        for (k, v) in &self.settings {
            s.push_str(&format!("{k} = {v}\n"));
        }
        s
    }

    pub fn get(&self, key: &str) -> &str {
        self.settings
            .get(key)
            .map(String::as_str)
            .unwrap_or_else(|| panic!("`{key}` has a default for every experiment that reads it"))
    }

    fn bad(&self, key: &str, what: &str) -> CliError {
        CliError::config(format!("`{key} = {}`: {what}", self.get(key)))
    }

    pub fn seed(&self) -> Result<u64, CliError> {
        self.get("seed").parse().map_err(|_| self.bad("seed", "expected a 64-bit unsigned integer"))
    }

    pub fn usize(&self, key: &str) -> Result<usize, CliError> {
        self.get(key).parse().map_err(|_| self.bad(key, "expected a non-negative integer"))
    }

    pub fn positive(&self, key: &str) -> Result<usize, CliError> {
        match self.usize(key)? {
            0 => Err(self.bad(key, "must be positive")),
            v => Ok(v),
        }
    }

    pub fn float(&self, key: &str) -> Result<f64, CliError> {
        match self.get(key).parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(v),
            _ => Err(self.bad(key, "expected a finite number")),
        }
    }

    pub fn optional_float(&self, key: &str) -> Result<Option<f64>, CliError> {
        if self.get(key) == "none" {
            Ok(None)
        } else {
            self.float(key).map(Some)
        }
    }

    pub fn optional_usize(&self, key: &str) -> Result<Option<usize>, CliError> {
        if self.get(key) == "none" {
            Ok(None)
        } else {
            self.positive(key).map(Some)
        }
    }

    pub fn flag(&self, key: &str) -> Result<bool, CliError> {
        match self.get(key) {
            "true" | "yes" | "1" => Ok(true),
            "false" | "no" | "0" => Ok(false),
            _ => Err(self.bad(key, "expected true or false")),
        }
    }

    /// Comma-separated integers; `a..b` stands for `a` through `b`.
    pub fn usize_list(&self, key: &str) -> Result<Vec<usize>, CliError> {
        let bad = || self.bad(key, "expected a comma-separated list of integers or ranges a..b");
        let mut list = Vec::new();
        for item in self.get(key).split(',').map(str::trim) {
            match item.split_once("..") {
                Some((a, b)) => {
                    let a: usize = a.trim().parse().map_err(|_| bad())?;
                    let b: usize = b.trim().parse().map_err(|_| bad())?;
                    if a > b || b - a > 100_000 {
                        return Err(bad());
                    }
                    list.extend(a..=b);
                }
                None => list.push(item.parse().map_err(|_| bad())?),
            }
        }
        if list.is_empty() || list.contains(&0) {
            return Err(self.bad(key, "entries must be positive"));
        }
        Ok(list)
    }

    pub fn float_list(&self, key: &str) -> Result<Vec<f64>, CliError> {
        let list: Vec<f64> = self
            .get(key)
            .split(',')
            .map(|x| x.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|_| self.bad(key, "expected a comma-separated list of numbers"))?;
        if list.iter().any(|v| !v.is_finite()) {
            return Err(self.bad(key, "entries must be finite"));
        }
        Ok(list)
    }
}
