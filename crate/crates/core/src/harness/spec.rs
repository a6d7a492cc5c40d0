use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::adapt::AdaptConfig;
use crate::baselines::{OracleConfig, RansacConfig, RansacRefit};
use crate::datagen::RegistrationScenario;
use crate::harness::HarnessError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProblemKind {
    Registration,
    Linear,
}

impl ProblemKind {
    /// Degrees of freedom of one measurement's normalized squared residual.
    pub fn residual_dof(self) -> u32 {
        match self {
            Self::Registration => 3,
            Self::Linear => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Method {
    Adapt,
    Greedy,
    Oracle,
    Ransac,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::Adapt, Method::Greedy, Method::Oracle, Method::Ransac];

    pub fn name(self) -> &'static str {
        match self {
            Self::Adapt => "adapt",
            Self::Greedy => "greedy",
            Self::Oracle => "oracle",
            Self::Ransac => "ransac",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Method::ALL.into_iter().find(|m| m.name() == s.trim()).ok_or_else(|| {
            format!(
                "unknown method '{}' (expected adapt, greedy, oracle or ransac)",
                s.trim()
            )
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegistrationParams {
    pub n_points: usize,
    pub noise_sigma_frac: f64,
    pub max_translation_frac: f64,
    /// ASCII PLY cloud to subsample instead of the unit cube.
    pub cloud: Option<PathBuf>,
}

impl Default for RegistrationParams {
    fn default() -> Self {
        Self {
            n_points: 453,
            noise_sigma_frac: 2.5e-4,
            max_translation_frac: RegistrationScenario::DEFAULT_MAX_TRANSLATION_FRAC,
            cloud: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearParams {
    pub n: usize,
    pub m: usize,
    pub noise_sigma: f64,
    pub outlier_magnitude_range: (f64, f64),
}

impl Default for LinearParams {
    fn default() -> Self {
        Self {
            n: 2,
            m: 12,
            noise_sigma: 0.1,
            outlier_magnitude_range: (5.0, 10.0),
        }
    }
}

/// Everything a sweep or bound experiment needs. Trial `j` uses seed
/// `base_seed + j` for every fraction and every method.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub kind: ProblemKind,
    pub fractions: Vec<f64>,
    pub trials: usize,
    pub methods: Vec<Method>,
    pub adapt: AdaptConfig,
    pub ransac_iterations: usize,
    pub ransac_refit: RansacRefit,
    /// Probability of the chi-square quantile that sets RANSAC's threshold and
    /// the oracle's per-measurement budget.
    pub threshold_probability: f64,
    pub registration: RegistrationParams,
    pub linear: LinearParams,
    /// Planted outlier counts for the bound experiment.
    pub planted_counts: Vec<usize>,
    pub base_seed: u64,
    pub output: Option<PathBuf>,
}

impl SweepSpec {
    pub fn registration() -> Self {
        Self {
            kind: ProblemKind::Registration,
            fractions: (0..10).map(|i| f64::from(i) / 10.0).collect(),
            trials: 10,
            methods: vec![Method::Adapt, Method::Ransac],
            adapt: AdaptConfig::bunny(),
            ransac_iterations: RansacConfig::DEFAULT_MAX_ITERATIONS,
            ransac_refit: RansacRefit::ConsensusSet,
            threshold_probability: 0.99,
            registration: RegistrationParams::default(),
            linear: LinearParams::default(),
            planted_counts: vec![1, 2, 3, 4],
            base_seed: 0,
            output: None,
        }
    }

    pub fn linear() -> Self {
        Self {
            kind: ProblemKind::Linear,
            fractions: vec![0.0, 0.1, 0.2, 0.3],
            methods: vec![Method::Adapt, Method::Greedy, Method::Ransac],
            adapt: AdaptConfig::new(5e-2, 1),
            ..Self::registration()
        }
    }

    pub fn bound_experiment() -> Self {
        Self {
            methods: vec![Method::Greedy, Method::Adapt],
            ..Self::linear()
        }
    }

    pub fn measurement_count(&self) -> usize {
        match self.kind {
            ProblemKind::Registration => self.registration.n_points,
            ProblemKind::Linear => self.linear.m,
        }
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.fractions.is_empty() {
            return Err(HarnessError::config(
                "outliers",
                "at least one outlier fraction is required",
            ));
        }
        if let Some(f) = self.fractions.iter().find(|f| !(0.0..1.0).contains(*f)) {
            return Err(HarnessError::config(
                "outliers",
                format!("fraction {f} is outside [0, 1)"),
            ));
        }
        if self.trials == 0 {
            return Err(HarnessError::config("trials", "must be at least 1"));
        }
        if self.methods.is_empty() {
            return Err(HarnessError::config("methods", "at least one method is required"));
        }
        if self.ransac_iterations == 0 {
            return Err(HarnessError::config("ransac_iterations", "must be at least 1"));
        }
        if !(self.threshold_probability > 0.0 && self.threshold_probability < 1.0) {
            return Err(HarnessError::config("threshold_probability", "must lie in (0, 1)"));
        }
        self.adapt
            .validate()
            .map_err(|e| HarnessError::config("adapt", e.to_string()))?;
        let m = self.measurement_count();
        if self.methods.contains(&Method::Oracle) && m > OracleConfig::DEFAULT_CAP {
            return Err(HarnessError::config(
                "methods",
                format!(
                    "oracle needs at most {} measurements, scenario has {m}",
                    OracleConfig::DEFAULT_CAP
                ),
            ));
        }
        match self.kind {
            ProblemKind::Registration => {
                if self.registration.n_points < 4 {
                    return Err(HarnessError::config("points", "need at least 4 points"));
                }
                if self.registration.noise_sigma_frac.is_nan() || self.registration.noise_sigma_frac < 0.0 {
                    return Err(HarnessError::config("noise_frac", "must be non-negative"));
                }
            }
            ProblemKind::Linear => {
                let l = &self.linear;
                if l.n == 0 || l.m < l.n {
                    return Err(HarnessError::config("linear_m", "need m >= n >= 1"));
                }
                if l.noise_sigma.is_nan() || l.noise_sigma < 0.0 {
                    return Err(HarnessError::config("noise_sigma", "must be non-negative"));
                }
            }
        }
        Ok(())
    }

    /// Applies one `key = value` setting.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), HarnessError> {
        let value = value.trim();
        match key {
            "outliers" => self.fractions = parse_list(key, value)?,
            "trials" => self.trials = parse(key, value)?,
            "seed" => self.base_seed = parse(key, value)?,
            "methods" => {
                self.methods = value
                    .split(',')
                    .map(|s| s.parse::<Method>().map_err(|e| HarnessError::config(key, e)))
                    .collect::<Result<_, _>>()?;
                self.methods.sort();
                self.methods.dedup();
            }
            "out" => self.output = Some(PathBuf::from(value)),
            "points" => self.registration.n_points = parse(key, value)?,
            "noise_frac" => self.registration.noise_sigma_frac = parse(key, value)?,
            "translation_frac" => self.registration.max_translation_frac = parse(key, value)?,
            "cloud" => self.registration.cloud = Some(PathBuf::from(value)),
            "linear_n" => self.linear.n = parse(key, value)?,
            "linear_m" => self.linear.m = parse(key, value)?,
            "noise_sigma" => self.linear.noise_sigma = parse(key, value)?,
            "outlier_min" => self.linear.outlier_magnitude_range.0 = parse(key, value)?,
            "outlier_max" => self.linear.outlier_magnitude_range.1 = parse(key, value)?,
            "planted" => self.planted_counts = parse_list(key, value)?,
            "gamma" => self.adapt.gamma = parse(key, value)?,
            "delta" => self.adapt.delta = parse(key, value)?,
            "t_conv" => self.adapt.t_conv = parse(key, value)?,
            "g_step" => self.adapt.g_step = parse(key, value)?,
            "max_solver_calls" => self.adapt.max_solver_calls = Some(parse(key, value)?),
            "ransac_iterations" => self.ransac_iterations = parse(key, value)?,
            "ransac_refit" => {
                self.ransac_refit = match value {
                    "consensus" => RansacRefit::ConsensusSet,
                    "sample" => RansacRefit::BestSample,
                    _ => return Err(HarnessError::config(key, "expected 'consensus' or 'sample'")),
                }
            }
            "threshold_probability" => self.threshold_probability = parse(key, value)?,
            _ => return Err(HarnessError::config(key, "unknown setting")),
        }
        Ok(())
    }

    /// Applies a line-oriented `key = value` document. Blank lines and lines
    /// starting with `#` are ignored.
    pub fn apply_config(&mut self, text: &str) -> Result<(), HarnessError> {
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(HarnessError::config(
                    format!("line {}", n + 1),
                    "expected 'key = value'",
                ));
            };
            self.set(key.trim(), value)?;
        }
        Ok(())
    }

    pub fn load_config(&mut self, path: &Path) -> Result<(), HarnessError> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
        self.apply_config(&text)
    }
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T, HarnessError> {
    value
        .parse()
        .map_err(|_| HarnessError::config(key, format!("cannot parse '{value}'")))
}

fn parse_list<T: FromStr>(key: &str, value: &str) -> Result<Vec<T>, HarnessError> {
    value.split(',').map(|v| parse(key, v.trim())).collect()
}
