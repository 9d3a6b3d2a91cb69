//! Experiment configuration: one JSON document with flag overrides.

use crate::CliError;
use exotic_core::exotic_basis::{ExoticFrame, FrameSpec};
use exotic_core::graded_space::{GradedVector, WeightFamily, WeightKind};
use exotic_core::Complex64;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct Weights {
    pub base: WeightKind,
    pub exotic: WeightKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Truncations {
    /// Base dimension; must equal `M_terms` when given.
    #[serde(rename = "K")]
    pub k: Option<usize>,
    /// Highest chaos order accepted in input data.
    #[serde(rename = "Nmax")]
    pub nmax: usize,
}

impl Default for Truncations {
    fn default() -> Self {
        Self { k: None, nmax: 8 }
    }
}

/// A named base-coordinate test vector: sparse 1-based entries plus an
/// optional `scale · m^{-power}` profile over every coordinate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TestPoint {
    pub label: String,
    #[serde(default)]
    pub entries: Vec<(usize, f64, f64)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub profile: Option<Profile>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Profile {
    pub scale: f64,
    pub power: f64,
}

impl TestPoint {
    pub fn vector(&self, dim: usize) -> Result<GradedVector, CliError> {
        let mut v = match self.profile {
            Some(Profile { scale, power }) => GradedVector::new(
                (1..=dim)
                    .map(|m| Complex64::new(scale * (m as f64).powf(-power), 0.0))
                    .collect(),
            ),
            None => GradedVector::zeros(dim),
        };
        for &(i, re, im) in &self.entries {
            if i == 0 || i > dim {
                return Err(CliError::Config(format!(
                    "test point {:?}: index {i} outside 1..={dim}",
                    self.label
                )));
            }
            v.coeffs_mut()[i - 1] += Complex64::new(re, im);
        }
        Ok(v)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    /// Diagonal and off-diagonal Cesàro deviations, added to the rate term.
    pub c1: f64,
    /// `C` in the `C N^{-(2a-1)}` allowance for orthogonality defects.
    pub c1_rate_constant: f64,
    pub c3_sigma_min: f64,
    pub recovery: f64,
    pub intertwining: f64,
    pub semigroup: f64,
    pub heat_fd: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            c1: 1e-12,
            c1_rate_constant: 5.0,
            c3_sigma_min: 1e-3,
            recovery: 1e-8,
            intertwining: 2e-2,
            semigroup: 1e-10,
            heat_fd: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EmbedSettings {
    /// Coefficient file; the bundled examples when absent.
    pub coefficients: Option<PathBuf>,
    /// Seeded random lemma cases appended to the file cases.
    pub random_cases: usize,
    pub random_max_degree: usize,
    /// Recovery trials per degree; `0` skips the probe.
    pub injectivity_trials: usize,
    pub injectivity_degrees: Vec<usize>,
    /// `M_terms` of the recovery frame (capped by the main frame).
    pub injectivity_m_terms: usize,
}

impl Default for EmbedSettings {
    fn default() -> Self {
        Self {
            coefficients: None,
            random_cases: 100,
            random_max_degree: 4,
            injectivity_trials: 10,
            injectivity_degrees: vec![1, 2],
            injectivity_m_terms: 400,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HeatSettings {
    /// Initial exotic Fock vector; the bundled `f_2` example when absent.
    pub initial: Option<PathBuf>,
    /// Central-difference step.
    pub h: f64,
}

impl Default for HeatSettings {
    fn default() -> Self {
        Self {
            initial: None,
            h: 1e-4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct TestMode {
    /// Repeat the first frequency so the frame is linearly dependent.
    pub duplicate_q: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub weights: Weights,
    pub frame: FrameSpec,
    pub truncations: Truncations,
    pub ladder: Vec<usize>,
    pub test_points: Vec<TestPoint>,
    pub time_grid: Vec<f64>,
    pub p: f64,
    pub tolerances: Tolerances,
    pub embed: EmbedSettings,
    pub heat: HeatSettings,
    pub output_dir: PathBuf,
    pub seed: u64,
    pub test_mode: TestMode,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            weights: Weights::default(),
            frame: FrameSpec::default(),
            truncations: Truncations::default(),
            ladder: vec![100, 1000, 10_000],
            test_points: vec![
                TestPoint {
                    label: "origin".into(),
                    entries: vec![],
                    profile: None,
                },
                TestPoint {
                    label: "spike".into(),
                    entries: vec![(1, 0.5, 0.0), (3, -0.25, 0.1)],
                    profile: None,
                },
                TestPoint {
                    label: "harmonic".into(),
                    entries: vec![],
                    profile: Some(Profile {
                        scale: 0.3,
                        power: 1.0,
                    }),
                },
            ],
            time_grid: vec![0.0, 1.0, 5.0, 10.0, 13.0],
            p: 2.0,
            tolerances: Tolerances::default(),
            embed: EmbedSettings::default(),
            heat: HeatSettings::default(),
            output_dir: PathBuf::from("out"),
            seed: 0,
            test_mode: TestMode::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Consistency checks that do not need the frame.
    pub fn validate(&self) -> Result<(), CliError> {
        let m = self.frame.m_terms;
        if let Some(k) = self.truncations.k {
            if k != m {
                return Err(CliError::Config(format!(
                    "truncations.K = {k} differs from frame.M_terms = {m}"
                )));
            }
        }
        exotic_core::cesaro::validate_ladder(&self.ladder)?;
        if let Some(&top) = self.ladder.last() {
            if top > m {
                return Err(CliError::Config(format!(
                    "ladder reaches {top} but M_terms = {m}"
                )));
            }
        }
        let mut labels: Vec<&str> = self.test_points.iter().map(|t| t.label.as_str()).collect();
        labels.sort_unstable();
        if labels.windows(2).any(|w| w[0] == w[1]) {
            return Err(CliError::Config("duplicate test point labels".into()));
        }
        if !self.p.is_finite() {
            return Err(CliError::Config(format!("p = {}", self.p)));
        }
        Ok(())
    }

    pub fn base_weights(&self) -> Result<WeightFamily, CliError> {
        Ok(WeightFamily::new(
            self.weights.base.clone(),
            self.frame.m_terms,
        )?)
    }

    pub fn exotic_weights(&self) -> Result<WeightFamily, CliError> {
        Ok(WeightFamily::new(
            self.weights.exotic.clone(),
            self.frame.k_a,
        )?)
    }

    pub fn build_frame(&self) -> Result<ExoticFrame, CliError> {
        self.frame_with_terms(self.frame.m_terms)
    }

    /// The configured frame truncated to `m_terms` base coordinates.
    pub fn frame_with_terms(&self, m_terms: usize) -> Result<ExoticFrame, CliError> {
        let spec = FrameSpec {
            m_terms,
            ..self.frame
        };
        let weights = self.exotic_weights()?;
        if self.test_mode.duplicate_q {
            let mut qs = exotic_core::exotic_basis::enumerate_rationals(spec.k_a.max(2));
            let last = qs.len() - 1;
            qs[last] = qs[0];
            let weights = WeightFamily::new(self.weights.exotic.clone(), qs.len())?;
            return Ok(ExoticFrame::from_rationals_unchecked(
                spec.a, qs, m_terms, weights,
            )?);
        }
        Ok(ExoticFrame::new(spec, weights)?)
    }

    pub fn test_vectors(&self) -> Result<Vec<GradedVector>, CliError> {
        self.test_points
            .iter()
            .map(|t| t.vector(self.frame.m_terms))
            .collect()
    }

    pub fn labels(&self) -> Vec<String> {
        self.test_points.iter().map(|t| t.label.clone()).collect()
    }
}
