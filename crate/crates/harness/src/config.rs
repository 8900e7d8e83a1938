//! Experiment configuration, built-in profiles and the configuration hash.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anneal_core::dynamics::default_steps;
use anneal_core::operators::{DEFAULT_LAMBDA, DEFAULT_TOTAL_TIME};
use anneal_core::spectrum::{DEFAULT_COARSE_POINTS, DEFAULT_LEVELS};
use anneal_core::DriverKind;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{HarnessError, Result};

/// Integrator resolution for each system size.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepPolicy {
    Fixed(usize),
    PerSize(BTreeMap<usize, usize>),
    /// Certify by step doubling on the first instance of every size.
    AutoCertify { start: usize, max: usize },
}

impl StepPolicy {
    /// Step count for size `n`, or `None` when it has to be certified.
    pub fn steps_for(&self, n: usize) -> Option<usize> {
        match self {
            Self::Fixed(steps) => Some(*steps),
            Self::PerSize(map) => map.get(&n).copied(),
            Self::AutoCertify { .. } => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumSettings {
    pub coarse_points: usize,
    pub levels: usize,
    pub prominence: f64,
}

impl Default for SpectrumSettings {
    fn default() -> Self {
        Self {
            coarse_points: DEFAULT_COARSE_POINTS,
            levels: DEFAULT_LEVELS,
            prominence: 0.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MixedSeedMode {
    /// One sign pattern per system size, shared by its instances.
    PerSize,
    PerInstance,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub sizes: Vec<usize>,
    /// Instances per size.
    pub instances: usize,
    pub base_seed: u64,
    pub drivers: Vec<DriverKind>,
    pub lambda: f64,
    pub total_time: f64,
    pub steps: StepPolicy,
    #[serde(default)]
    pub spectrum: SpectrumSettings,
    pub mixed_seeds: MixedSeedMode,
    #[serde(default)]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub workers: Option<usize>,
}

/// The fields that determine results; output location and worker count do
/// not.
#[derive(Serialize)]
struct HashedFields<'a> {
    sizes: &'a [usize],
    instances: usize,
    base_seed: u64,
    drivers: &'a [DriverKind],
    lambda: f64,
    total_time: f64,
    steps: &'a StepPolicy,
    spectrum: &'a SpectrumSettings,
    mixed_seeds: MixedSeedMode,
}

impl ExperimentConfig {
    /// The full-scale setting: sizes 6 to 17, 10000 instances each.
    pub fn paper() -> Self {
        let steps = (6..=17)
            .map(|n| (n, if n <= 12 { default_steps(DEFAULT_TOTAL_TIME) } else { 2 * default_steps(DEFAULT_TOTAL_TIME) }))
            .collect();
        Self {
            sizes: (6..=17).collect(),
            instances: 10_000,
            base_seed: 1,
            drivers: DriverKind::ALL.to_vec(),
            lambda: DEFAULT_LAMBDA,
            total_time: DEFAULT_TOTAL_TIME,
            steps: StepPolicy::PerSize(steps),
            spectrum: SpectrumSettings::default(),
            mixed_seeds: MixedSeedMode::PerSize,
            output_dir: PathBuf::from("results/paper"),
            workers: None,
        }
    }

    /// Sizes 6 to 10 with 1000 instances each.
    pub fn desk() -> Self {
        Self {
            sizes: (6..=10).collect(),
            instances: 1000,
            steps: StepPolicy::Fixed(default_steps(DEFAULT_TOTAL_TIME)),
            output_dir: PathBuf::from("results/desk"),
            ..Self::paper()
        }
    }

    pub fn profile(name: &str) -> Result<Self> {
        match name {
            "paper" => Ok(Self::paper()),
            "desk" => Ok(Self::desk()),
            other => Err(HarnessError::Usage(format!("unknown profile '{other}' (expected paper or desk)"))),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let config: Self = serde_json::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("configuration serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(HarnessError::Config(msg));
        if self.sizes.is_empty() {
            return fail("no system sizes".into());
        }
        if let Some(&n) = self.sizes.iter().find(|&&n| !(2..=anneal_core::instance::MAX_ENUMERATION_SPINS).contains(&n)) {
            return fail(format!("system size {n} outside 2..=24"));
        }
        let mut sizes = self.sizes.clone();
        sizes.sort_unstable();
        sizes.dedup();
        if sizes.len() != self.sizes.len() {
            return fail("repeated system size".into());
        }
        if self.instances == 0 {
            return fail("instances per size must be positive".into());
        }
        if self.drivers.is_empty() {
            return fail("no drivers".into());
        }
        let mut drivers = self.drivers.clone();
        drivers.sort_unstable();
        drivers.dedup();
        if drivers.len() != self.drivers.len() {
            return fail("repeated driver".into());
        }
        if !(self.lambda.is_finite() && self.total_time.is_finite() && self.total_time > 0.0) {
            return fail("lambda must be finite and total time positive".into());
        }
        match &self.steps {
            StepPolicy::Fixed(0) => return fail("step count must be positive".into()),
            StepPolicy::PerSize(map) => {
                if let Some(n) = self.sizes.iter().find(|n| map.get(n).is_none_or(|&s| s == 0)) {
                    return fail(format!("no positive step count for size {n}"));
                }
            }
            StepPolicy::AutoCertify { start, max } if *start == 0 || max < start => {
                return fail("certification needs 0 < start <= max".into());
            }
            _ => {}
        }
        if self.spectrum.coarse_points < 3 || self.spectrum.levels < 2 {
            return fail("spectrum needs at least 3 coarse points and 2 levels".into());
        }
        if !(self.spectrum.prominence >= 0.0) {
            return fail("prominence must be non-negative".into());
        }
        if self.workers == Some(0) {
            return fail("worker count must be positive".into());
        }
        Ok(())
    }

    /// Hex SHA-256 of the result-determining fields.
    pub fn hash(&self) -> String {
        let fields = HashedFields {
            sizes: &self.sizes,
            instances: self.instances,
            base_seed: self.base_seed,
            drivers: &self.drivers,
            lambda: self.lambda,
            total_time: self.total_time,
            steps: &self.steps,
            spectrum: &self.spectrum,
            mixed_seeds: self.mixed_seeds,
        };
        let bytes = serde_json::to_vec(&fields).expect("hash fields serialize");
        Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
    }
}
