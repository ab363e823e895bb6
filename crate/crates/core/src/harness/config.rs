use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::HarnessError;
use crate::geometry::FeasibleSet;
use crate::learners::{Algorithm, ScheduleOverrides};
use crate::losses::LossFamily;

/// Environment variable naming the default directory for trace files.
pub const OUTPUT_DIR_ENV: &str = "ONSEG_OUTPUT_DIR";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Task {
    Regression,
    Classification,
    Portfolio,
    SyntheticQuadratic,
}

impl Task {
    pub fn as_str(self) -> &'static str {
        match self {
            Task::Regression => "regression",
            Task::Classification => "classification",
            Task::Portfolio => "portfolio",
            Task::SyntheticQuadratic => "synthetic-quadratic",
        }
    }

    pub fn loss_family(self) -> LossFamily {
        match self {
            Task::Regression => LossFamily::Squared,
            Task::Classification => LossFamily::Logistic,
            Task::Portfolio => LossFamily::Return,
            Task::SyntheticQuadratic => LossFamily::Quadratic,
        }
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Task {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "regression" => Ok(Task::Regression),
            "classification" => Ok(Task::Classification),
            "portfolio" => Ok(Task::Portfolio),
            "synthetic-quadratic" | "quadratic" => Ok(Task::SyntheticQuadratic),
            _ => Err(format!("unknown task {s:?}")),
        }
    }
}

/// A fixed round count, or a multiple of the dataset size written `150n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Horizon {
    Rounds(u64),
    PerSample(u64),
}

impl Horizon {
    pub fn resolve(self, n: usize) -> Result<u64, HarnessError> {
        let t = match self {
            Horizon::Rounds(t) => Some(t),
            Horizon::PerSample(k) => k.checked_mul(n as u64),
        };
        match t {
            Some(t) if t > 0 => Ok(t),
            _ => Err(HarnessError::Config(format!(
                "horizon {self} does not resolve to a positive round count"
            ))),
        }
    }
}

impl Default for Horizon {
    fn default() -> Self {
        Horizon::PerSample(150)
    }
}

impl fmt::Display for Horizon {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Horizon::Rounds(t) => write!(f, "{t}"),
            Horizon::PerSample(k) => write!(f, "{k}n"),
        }
    }
}

impl FromStr for Horizon {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let bad = || format!("invalid horizon {s:?}; expected a positive integer or a multiple like \"150n\"");
        match s.strip_suffix('n') {
            Some("") => Ok(Horizon::PerSample(1)),
            Some(k) => k.parse().map(Horizon::PerSample).map_err(|_| bad()),
            None => s.parse().map(Horizon::Rounds).map_err(|_| bad()),
        }
    }
}

impl Serialize for Horizon {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Horizon::Rounds(t) => s.serialize_u64(*t),
            Horizon::PerSample(_) => s.serialize_str(&self.to_string()),
        }
    }
}

impl<'de> Deserialize<'de> for Horizon {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Int(u64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Int(t) => Ok(Horizon::Rounds(t)),
            Raw::Text(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum SetConfig {
    Ball { diameter: f64, inner_radius: f64 },
    Simplex,
}

impl SetConfig {
    /// Ball of diameter 10 and inner radius 1, except the simplex for
    /// portfolios.
    pub fn default_for(task: Task) -> Self {
        match task {
            Task::Portfolio => SetConfig::Simplex,
            _ => SetConfig::Ball {
                diameter: 10.0,
                inner_radius: 1.0,
            },
        }
    }

    pub fn build(self, dim: usize) -> Result<FeasibleSet, HarnessError> {
        let set = match self {
            SetConfig::Ball { diameter, inner_radius } => FeasibleSet::ball(dim, diameter, inner_radius),
            SetConfig::Simplex => FeasibleSet::simplex(dim),
        };
        set.map_err(|e| HarnessError::Config(e.to_string()))
    }
}

/// Which closed-form schedule sets δ and γ for the bandit learners.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScheduleKind {
    /// Bounded losses only.
    #[default]
    Bounded,
    /// Lipschitz losses.
    Lipschitz,
}

impl FromStr for ScheduleKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "bounded" => Ok(ScheduleKind::Bounded),
            "lipschitz" => Ok(ScheduleKind::Lipschitz),
            _ => Err(format!("unknown schedule {s:?}; expected bounded or lipschitz")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub task: Task,
    pub algo: Algorithm,
    pub data_path: Option<PathBuf>,
    /// Feasible set; `None` picks the task default.
    pub set: Option<SetConfig>,
    pub schedule: ScheduleKind,
    pub delta: Option<f64>,
    pub gamma: Option<f64>,
    pub beta: Option<f64>,
    pub sigma: f64,
    /// Loss bound `F`; estimated from the data when absent.
    pub loss_bound: Option<f64>,
    /// Gradient bound `G`; estimated from the data when absent.
    pub grad_bound: Option<f64>,
    /// Lipschitz constant `L`; estimated from the data when absent.
    pub lipschitz: Option<f64>,
    pub horizon: Horizon,
    pub seed: u64,
    pub trials: usize,
    pub out: Option<PathBuf>,
    pub shuffle: bool,
    /// Whether to solve the offline problem and fill in the regret column.
    pub regret: bool,
    /// Dimension of the built-in quadratic stream when no data is given.
    pub dim: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            task: Task::SyntheticQuadratic,
            algo: Algorithm::Onseg,
            data_path: None,
            set: None,
            schedule: ScheduleKind::Bounded,
            delta: None,
            gamma: None,
            beta: None,
            sigma: 1.0,
            loss_bound: None,
            grad_bound: None,
            lipschitz: None,
            horizon: Horizon::default(),
            seed: 0,
            trials: 1,
            out: None,
            shuffle: false,
            regret: true,
            dim: 2,
        }
    }
}

impl ExperimentConfig {
    pub fn new(task: Task, algo: Algorithm) -> Self {
        Self {
            task,
            algo,
            ..Self::default()
        }
    }

    pub fn set_config(&self) -> SetConfig {
        self.set.unwrap_or_else(|| SetConfig::default_for(self.task))
    }

    pub fn overrides(&self) -> ScheduleOverrides {
        ScheduleOverrides {
            delta: self.delta,
            gamma: self.gamma,
            beta: self.beta,
        }
    }

    pub fn from_json(text: &str) -> Result<Self, HarnessError> {
        let config: Self = serde_json::from_str(text).map_err(|e| HarnessError::Config(format!("invalid config: {e}")))?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let positive = |name: &str, v: Option<f64>| match v {
            Some(x) if !(x.is_finite() && x > 0.0) => Err(HarnessError::Config(format!("{name} must be positive, got {x}"))),
            _ => Ok(()),
        };
        positive("sigma", Some(self.sigma))?;
        positive("delta", self.delta)?;
        positive("gamma", self.gamma)?;
        positive("beta", self.beta)?;
        positive("loss bound", self.loss_bound)?;
        positive("gradient bound", self.grad_bound)?;
        positive("lipschitz constant", self.lipschitz)?;
        if self.trials == 0 {
            return Err(HarnessError::Config("trials must be at least 1".into()));
        }
        if self.dim == 0 {
            return Err(HarnessError::Config("dim must be at least 1".into()));
        }
        if self.task == Task::Portfolio && matches!(self.set, Some(SetConfig::Ball { .. })) {
            return Err(HarnessError::Config("portfolio task requires the simplex".into()));
        }
        Ok(())
    }

    /// Output path for one trial: the configured path (or a default name in
    /// the output directory) with `-trial<i>` appended when there are
    /// several trials.
    pub fn trace_path(&self, trial: usize) -> PathBuf {
        let base = self.out.clone().unwrap_or_else(|| {
            let dir = std::env::var_os(OUTPUT_DIR_ENV)
                .map(PathBuf::from)
                .unwrap_or_else(|| PathBuf::from("."));
            dir.join(format!("{}-{}-seed{}.csv", self.task, self.algo, self.seed))
        });
        if self.trials <= 1 {
            return base;
        }
        let stem = base.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        let name = match base.extension() {
            Some(ext) => format!("{stem}-trial{trial}.{}", ext.to_string_lossy()),
            None => format!("{stem}-trial{trial}"),
        };
        base.with_file_name(name)
    }
}
