//! Experiment configuration.
//!
//! A configuration is a flat JSON object; every field is optional and falls
//! back to [`ExperimentConfig::default`]. Command-line flags are collected in
//! [`ConfigOverrides`] and applied on top of a file, so the precedence is
//! flags over file over defaults. The full schema is documented in
//! `docs/config.md`.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::lemmas::{Params, LEMMA_IDS};
use crate::blockenc::SvdBackend;
use crate::budget::Budget;
use crate::error::{QsepError, Result};
use crate::oracle::StretchFn;
use crate::tomography::TomographyMode;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    /// The lemma ids listed in `lemmas`.
    Lemmas,
    SuiteFast,
    SuiteAll,
    AttackPru,
    AttackPri,
    AttackPriVsHri,
    PrfsgGame,
}

impl std::str::FromStr for ExperimentKind {
    type Err = QsepError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lemmas" => Ok(ExperimentKind::Lemmas),
            "suite-fast" | "fast" => Ok(ExperimentKind::SuiteFast),
            "suite-all" | "all" => Ok(ExperimentKind::SuiteAll),
            "attack-pru" => Ok(ExperimentKind::AttackPru),
            "attack-pri" => Ok(ExperimentKind::AttackPri),
            "attack-pri-vs-hri" => Ok(ExperimentKind::AttackPriVsHri),
            "prfsg-game" => Ok(ExperimentKind::PrfsgGame),
            other => Err(QsepError::Usage(format!("invalid config field `experiment`: unknown kind {other}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    #[default]
    Json,
    Csv,
}

impl std::str::FromStr for ReportFormat {
    type Err = QsepError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(ReportFormat::Json),
            "csv" => Ok(ReportFormat::Csv),
            other => Err(QsepError::Usage(format!("invalid config field `format`: unknown format {other}"))),
        }
    }
}

/// One-parameter sweep: the experiment is repeated with `param` set to each
/// value in turn.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sweep {
    pub param: String,
    pub values: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub lambda: Option<usize>,
    pub ell: Option<usize>,
    pub s: Option<usize>,
    pub c: Option<usize>,
    pub t_function: StretchFn,
    pub p: Option<u64>,
    pub trials: Option<usize>,
    pub seed: u64,
    pub backend: SvdBackend,
    pub tomography: TomographyMode,
    pub output: Option<PathBuf>,
    pub format: ReportFormat,
    /// Record wall-clock runtimes. Reports are byte-identical across runs
    /// only with this off.
    pub timing: bool,
    /// Lemma ids for the `lemmas` experiment.
    pub lemmas: Vec<String>,
    /// Extra named parameters passed to every lemma check.
    pub params: Params,
    /// Key count of the toy candidate in attack experiments.
    pub keys: Option<usize>,
    /// Oracle-call sizes of the toy candidate in attack experiments.
    pub calls: Option<Vec<usize>>,
    pub sweep: Option<Sweep>,
    pub budget: Budget,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            experiment: ExperimentKind::Lemmas,
            lambda: None,
            ell: None,
            s: None,
            c: None,
            t_function: StretchFn::identity(),
            p: None,
            trials: None,
            seed: 0,
            backend: SvdBackend::Ideal,
            tomography: TomographyMode::Sampled,
            output: None,
            format: ReportFormat::Json,
            timing: true,
            lemmas: Vec::new(),
            params: Params::new(),
            keys: None,
            calls: None,
            sweep: None,
            budget: Budget::default(),
        }
    }
}

fn field_error(field: &str, msg: impl std::fmt::Display) -> QsepError {
    QsepError::Usage(format!("invalid config field `{field}`: {msg}"))
}

fn sizing_error(field: &str, msg: impl std::fmt::Display) -> QsepError {
    QsepError::Sizing(format!("config field `{field}`: {msg}"))
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            QsepError::Usage(format!("invalid config field `{path}`: {}", e.into_inner()))
        })
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| QsepError::Usage(format!("cannot read config file {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        let b = &self.budget;
        if let Some(lambda) = self.lambda {
            if lambda == 0 {
                return Err(field_error("lambda", "must be at least 1"));
            }
            if 2 * lambda + self.s.unwrap_or(0) > b.max_total_qubits {
                return Err(sizing_error("lambda", format!("a {lambda}-bit key register exceeds the {}-qubit budget", b.max_total_qubits)));
            }
        }
        if self.ell == Some(0) {
            return Err(field_error("ell", "must be at least 1"));
        }
        if let Some(p) = self.p {
            if p < 2 {
                return Err(field_error("p", format!("must be at least 2, got {p}")));
            }
        }
        if self.trials == Some(0) {
            return Err(field_error("trials", "must be at least 1"));
        }
        if self.keys == Some(0) {
            return Err(field_error("keys", "must be at least 1"));
        }
        if let Some(calls) = &self.calls {
            if let Some(&n) = calls.iter().find(|&&n| n > b.max_dense_oracle_n) {
                return Err(sizing_error("calls", format!("oracle size n = {n} exceeds the dense-oracle budget {}", b.max_dense_oracle_n)));
            }
        }
        if let StretchFn::Power { exponent, scale } = self.t_function {
            if !(exponent >= 1.0) || !(scale > 0.0) {
                return Err(field_error("t_function", "power stretch needs exponent >= 1 and scale > 0"));
            }
        }
        if let Some(id) = self.lemmas.iter().find(|id| !LEMMA_IDS.contains(&id.as_str())) {
            return Err(field_error("lemmas", format!("unknown lemma id {id}")));
        }
        if let Some((k, v)) = self.params.iter().find(|(_, v)| !v.is_finite()) {
            return Err(field_error("params", format!("{k} = {v} is not finite")));
        }
        if b.max_total_qubits == 0 || b.max_total_qubits > 20 {
            return Err(field_error("budget", "max_total_qubits must lie in 1..=20"));
        }
        if let Some(sw) = &self.sweep {
            if sw.param.is_empty() {
                return Err(field_error("sweep", "parameter name is empty"));
            }
            if sw.values.is_empty() {
                return Err(field_error("sweep", "no values given"));
            }
            if let Some(v) = sw.values.iter().find(|v| !v.is_finite()) {
                return Err(field_error("sweep", format!("value {v} is not finite")));
            }
            for &v in &sw.values {
                self.with_param(&sw.param, v)?.validate_sizes()?;
            }
        }
        Ok(())
    }

    fn validate_sizes(&self) -> Result<()> {
        let mut c = self.clone();
        c.sweep = None;
        c.validate()
    }

    /// Copy of the configuration with one named parameter set. The typed
    /// fields are recognized by name; anything else lands in `params`.
    pub fn with_param(&self, name: &str, value: f64) -> Result<Self> {
        let mut c = self.clone();
        let int = |v: f64| -> Result<usize> {
            if v >= 0.0 && v.fract() == 0.0 && v < 1e15 {
                Ok(v as usize)
            } else {
                Err(field_error("sweep", format!("{name} must be a nonnegative integer, got {v}")))
            }
        };
        match name {
            "lambda" => c.lambda = Some(int(value)?),
            "ell" => c.ell = Some(int(value)?),
            "s" => c.s = Some(int(value)?),
            "c" => c.c = Some(int(value)?),
            "p" => c.p = Some(int(value)? as u64),
            "trials" => c.trials = Some(int(value)?),
            "keys" => c.keys = Some(int(value)?),
            "seed" => c.seed = int(value)? as u64,
            _ => {
                c.params.insert(name.to_string(), value);
            }
        }
        Ok(c)
    }

    /// Parameters handed to a lemma check: the explicitly set typed fields
    /// followed by `params`, which wins on a clash.
    pub fn lemma_params(&self) -> Params {
        let mut out = Params::new();
        let typed = [
            ("lambda", self.lambda.map(|v| v as f64)),
            ("ell", self.ell.map(|v| v as f64)),
            ("s", self.s.map(|v| v as f64)),
            ("c", self.c.map(|v| v as f64)),
            ("p", self.p.map(|v| v as f64)),
            ("trials", self.trials.map(|v| v as f64)),
            ("keys", self.keys.map(|v| v as f64)),
        ];
        for (k, v) in typed {
            if let Some(v) = v {
                out.insert(k.to_string(), v);
            }
        }
        out.extend(self.params.iter().map(|(k, v)| (k.clone(), *v)));
        out
    }
}

/// Values given on the command line. Unset fields leave the file or default
/// value in place.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ConfigOverrides {
    pub experiment: Option<ExperimentKind>,
    pub lambda: Option<usize>,
    pub ell: Option<usize>,
    pub s: Option<usize>,
    pub c: Option<usize>,
    pub p: Option<u64>,
    pub trials: Option<usize>,
    pub seed: Option<u64>,
    pub backend: Option<SvdBackend>,
    pub tomography: Option<TomographyMode>,
    pub output: Option<PathBuf>,
    pub format: Option<ReportFormat>,
    pub timing: Option<bool>,
    pub lemmas: Option<Vec<String>>,
    pub params: Params,
    pub sweep: Option<Sweep>,
}

impl ConfigOverrides {
    pub fn apply(&self, cfg: &mut ExperimentConfig) {
        macro_rules! set {
            ($($f:ident),*) => { $( if let Some(v) = &self.$f { cfg.$f = v.clone(); } )* };
        }
        set!(experiment, seed, backend, tomography, format, timing, lemmas);
        macro_rules! set_opt {
            ($($f:ident),*) => { $( if self.$f.is_some() { cfg.$f = self.$f.clone(); } )* };
        }
        set_opt!(lambda, ell, s, c, p, trials, output, sweep);
        cfg.params.extend(self.params.iter().map(|(k, v)| (k.clone(), *v)));
    }
}

/// Defaults, then the optional file, then the flags.
pub fn resolve_config(file: Option<&Path>, overrides: &ConfigOverrides) -> Result<ExperimentConfig> {
    let mut cfg = match file {
        Some(p) => ExperimentConfig::from_file(p)?,
        None => ExperimentConfig::default(),
    };
    overrides.apply(&mut cfg);
    cfg.validate()?;
    Ok(cfg)
}
