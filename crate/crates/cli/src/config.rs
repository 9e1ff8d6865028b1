use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use weakmeas_core::{EstimateMode, Scheme};

use crate::error::CliError;

pub const SEED_ENV: &str = "WEAKMEAS_SEED";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum Experiment {
    Saturation,
    Drift,
    Single,
    Equivalence,
    Propagator,
    Completeness,
    SequenceVsContinuum,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::Saturation => "saturation",
            Experiment::Drift => "drift",
            Experiment::Single => "single",
            Experiment::Equivalence => "equivalence",
            Experiment::Propagator => "propagator",
            Experiment::Completeness => "completeness",
            Experiment::SequenceVsContinuum => "sequence_vs_continuum",
        }
    }

    pub fn columns(self) -> &'static [&'static str] {
        match self {
            Experiment::Saturation => &["n", "t", "fbar_mc", "fbar_se", "fbar_closed"],
            Experiment::Drift => &["t", "mean_s2", "se_s2", "drift_closed"],
            Experiment::Single => &["delta", "fbar", "se"],
            Experiment::Equivalence => &["delta", "f_direct", "se_direct", "f_hypo", "se_hypo"],
            Experiment::Propagator => &[
                "t",
                "tr_rho",
                "tr_rho_prime",
                "tr_rho_q",
                "bloch_dev_vs_direct",
            ],
            Experiment::Completeness => &["delta", "residual"],
            Experiment::SequenceVsContinuum => &[
                "n",
                "t",
                "fbar_discrete",
                "se",
                "fbar_sde",
                "se_sde",
                "fbar_closed",
            ],
        }
    }

    fn required(self) -> &'static [&'static str] {
        match self {
            Experiment::Saturation => &["delta", "n_steps", "trajectories", "seed"],
            Experiment::Drift => &["dt", "t_end", "trajectories", "seed"],
            Experiment::Single | Experiment::Equivalence => &["delta", "samples", "seed"],
            Experiment::Propagator => &["dt", "t_end", "seed"],
            Experiment::Completeness => &["delta"],
            Experiment::SequenceVsContinuum => &["delta", "n_steps", "dt", "trajectories", "seed"],
        }
    }
}

/// Experiment description as read from a JSON file. Every field is optional
/// here; which ones must be present depends on `experiment`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub experiment: Option<Experiment>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    /// Sweep over several precisions; takes the place of `delta` where a
    /// sweep makes sense.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub deltas: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_steps: Option<usize>,
    /// Spacing of the recorded measurement counts.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_stride: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_end: Option<f64>,
    /// Spacing of the recorded times.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_record: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trajectories: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub estimate_mode: Option<EstimateMode>,
    /// Discretization of the Bloch and density equations.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scheme: Option<Scheme>,
    /// Bloch vector of the apriori state of the propagator experiment.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub apriori: Option<[f64; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out_path: Option<String>,
}

/// Values given on the command line; they win over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub trajectories: Option<usize>,
    pub samples: Option<usize>,
    pub delta: Option<f64>,
    pub dt: Option<f64>,
    pub t_end: Option<f64>,
    pub n_steps: Option<usize>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Validation(format!("config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io {
            path: path.to_path_buf(),
            source: e,
        })?;
        Self::from_json(&text)
    }

    /// Applies flag overrides, then the environment seed if no seed is set.
    pub fn with_overrides(
        mut self,
        o: &Overrides,
        env_seed: Option<&str>,
    ) -> Result<Self, CliError> {
        if let Some(d) = o.delta {
            self.delta = Some(d);
            self.deltas = None;
        }
        macro_rules! take {
            ($($f:ident),*) => { $( if o.$f.is_some() { self.$f = o.$f; } )* };
        }
        take!(seed, trajectories, samples, dt, t_end, n_steps);
        if let Some(out) = &o.out {
            self.out_path = Some(out.to_string_lossy().into_owned());
        }
        if self.seed.is_none() {
            if let Some(s) = env_seed {
                let seed = s.trim().parse().map_err(|_| {
                    CliError::Validation(format!(
                        "{SEED_ENV}: '{s}' is not a 64-bit unsigned integer"
                    ))
                })?;
                self.seed = Some(seed);
            }
        }
        Ok(self)
    }

    fn present(&self, field: &str) -> bool {
        match field {
            "delta" => self.delta.is_some() || self.deltas.as_ref().is_some_and(|d| !d.is_empty()),
            "n_steps" => self.n_steps.is_some(),
            "dt" => self.dt.is_some(),
            "t_end" => self.t_end.is_some(),
            "trajectories" => self.trajectories.is_some(),
            "samples" => self.samples.is_some(),
            "seed" => self.seed.is_some(),
            _ => true,
        }
    }

    /// Checks that the fields the experiment needs are present and sane.
    pub fn validate(&self) -> Result<Experiment, CliError> {
        let exp = self
            .experiment
            .ok_or_else(|| CliError::Validation("missing field 'experiment'".into()))?;
        for f in exp.required() {
            if !self.present(f) {
                return Err(CliError::Validation(format!(
                    "experiment '{}' requires field '{f}'",
                    exp.name()
                )));
            }
        }
        if self.out_path.as_deref().is_none_or(str::is_empty) {
            return Err(CliError::Validation(
                "missing field 'out_path' (or --out)".into(),
            ));
        }
        for d in self.deltas() {
            if !(d > 0.0 && d.is_finite()) {
                return Err(CliError::Validation(format!(
                    "field 'delta': {d} must be positive"
                )));
            }
        }
        let positive = |name: &str, v: Option<f64>| match v {
            Some(x) if !(x > 0.0 && x.is_finite()) => Err(CliError::Validation(format!(
                "field '{name}': {x} must be positive"
            ))),
            _ => Ok(()),
        };
        positive("dt", self.dt)?;
        positive("t_end", self.t_end)?;
        positive("t_record", self.t_record)?;
        let nonzero = |name: &str, v: Option<usize>| match v {
            Some(0) => Err(CliError::Validation(format!(
                "field '{name}' must be at least 1"
            ))),
            _ => Ok(()),
        };
        nonzero("trajectories", self.trajectories)?;
        nonzero("samples", self.samples)?;
        nonzero("n_stride", self.n_stride)?;
        if let Some(a) = self.apriori {
            let n2: f64 = a.iter().map(|x| x * x).sum();
            if !(n2.sqrt() <= 1.0 + 1e-12) {
                return Err(CliError::Validation(format!(
                    "field 'apriori': norm {} exceeds 1",
                    n2.sqrt()
                )));
            }
        }
        Ok(exp)
    }

    /// `deltas` if given, else `[delta]`.
    pub fn deltas(&self) -> Vec<f64> {
        match (&self.deltas, self.delta) {
            (Some(d), _) if !d.is_empty() => d.clone(),
            (_, Some(d)) => vec![d],
            _ => Vec::new(),
        }
    }

    pub fn single_delta(&self) -> f64 {
        self.deltas()[0]
    }

    pub fn mode(&self) -> EstimateMode {
        self.estimate_mode.unwrap_or_default()
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme.unwrap_or_default()
    }
}
