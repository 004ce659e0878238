//! Experiment configuration, read from JSON with lower_snake_case keys.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use cone_harmonic::warping::{WarpingTable, DEFAULT_R_MAX};
use cone_harmonic::{
    build_spectrum, BoundaryData, CustomSpectrum, EigenMode, LinkKind, LinkSpectrum, WarpingFunction, WarpingKind,
};
use serde::{Deserialize, Serialize};

use crate::{config_error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentName {
    ModeDecay,
    LiouvilleCollapse,
    BoundComparison,
    GrowthFit,
}

impl ExperimentName {
    pub const ALL: [ExperimentName; 4] = [
        ExperimentName::ModeDecay,
        ExperimentName::LiouvilleCollapse,
        ExperimentName::BoundComparison,
        ExperimentName::GrowthFit,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ExperimentName::ModeDecay => "mode_decay",
            ExperimentName::LiouvilleCollapse => "liouville_collapse",
            ExperimentName::BoundComparison => "bound_comparison",
            ExperimentName::GrowthFit => "growth_fit",
        }
    }
}

impl std::str::FromStr for ExperimentName {
    type Err = crate::CliError;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.replace('-', "_");
        Self::ALL
            .into_iter()
            .find(|e| e.as_str() == key)
            .ok_or_else(|| config_error(format!("unknown experiment `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WarpingSpec {
    Euclidean,
    Hyperbolic,
    Bounded,
    /// CSV with header `r,phi,phi_p,phi_pp`.
    Tabulated {
        path: PathBuf,
    },
}

impl WarpingSpec {
    /// `euclidean`, `hyperbolic`, `bounded`, or a path to a table.
    pub fn parse(s: &str) -> Self {
        match s {
            "euclidean" | "flat" => WarpingSpec::Euclidean,
            "hyperbolic" | "sinh" => WarpingSpec::Hyperbolic,
            "bounded" => WarpingSpec::Bounded,
            path => WarpingSpec::Tabulated { path: path.into() },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LinkSpec {
    Circle,
    Sphere2,
    /// Round `S^{n−1}`, eigenvalues only.
    Sphere,
    /// Eigenvalue table `m,lambda_sq[,multiplicity]`, optionally with sampled
    /// eigenfunctions (`weight,mode_0,mode_1,...`).
    Custom {
        eigenvalues: PathBuf,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        samples: Option<PathBuf>,
    },
}

impl LinkSpec {
    /// `circle`, `sphere2`, `sphere`, or a path to an eigenvalue table.
    pub fn parse(s: &str) -> Self {
        match s {
            "circle" => LinkSpec::Circle,
            "sphere2" => LinkSpec::Sphere2,
            "sphere" => LinkSpec::Sphere,
            path => LinkSpec::Custom {
                eigenvalues: path.into(),
                samples: None,
            },
        }
    }
}

/// Boundary data shape on `∂M_R`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BoundarySpec {
    Constant {
        value: f64,
    },
    Mode {
        m: usize,
        k: usize,
    },
    Combination {
        terms: Vec<(EigenMode, f64)>,
    },
    /// Coefficients uniform in `[−1, 1]` on bands `min_band..=m_max`, drawn
    /// from the configuration's seed.
    Random {
        #[serde(default)]
        min_band: usize,
    },
    /// `node_index[,theta[,phi_angle]],h` on the quadrature grid.
    File {
        path: PathBuf,
    },
}

/// Amplitude schedule `α(R)` of the collapse experiment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Amplitude {
    /// `α = ln R`.
    LnR,
    /// `α = ln φ₁(R)`, with `φ₁` normalized to 1 at `r = 1`.
    LogPhi1,
    /// `α = φ₁(R)`: grows exactly like the first mode (negative control).
    Phi1,
    Constant {
        value: f64,
    },
    Zero,
}

impl Amplitude {
    /// Whether the schedule is `o(φ₁)`, so the interior should collapse.
    pub fn is_sublinear(self) -> bool {
        !matches!(self, Amplitude::Phi1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Relative agreement of measured and predicted interior sups.
    pub ratio_rel: f64,
    /// Interior sup at the largest radius in the collapse experiment.
    pub collapse: f64,
    /// Slack allowed in `bound_exp ≤ true_exp`.
    pub bound_gap: f64,
    /// Relative error of fitted growth exponents.
    pub fit_rel: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            ratio_rel: 1e-6,
            collapse: 1e-2,
            bound_gap: 1e-12,
            fit_rel: 1e-4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentName,
    pub warping: WarpingSpec,
    /// Defaults to `max(10³, largest R)`.
    pub r_max: Option<f64>,
    pub link: LinkSpec,
    pub n: usize,
    pub m_max: usize,
    /// Outer radii, strictly increasing.
    pub r_schedule: Vec<f64>,
    /// Interior radius where sups are measured.
    pub r0: f64,
    pub boundary: BoundarySpec,
    pub amplitude: Amplitude,
    /// Cone dimensions for the bound comparison.
    pub dims: Vec<usize>,
    /// First link eigenvalue for the bound comparison; round sphere when absent.
    pub lambda1: Option<f64>,
    pub seed: Option<u64>,
    /// Angular samples per dimension for sup norms; `0` picks `4·m_max + 1`.
    pub density: usize,
    pub output: Option<PathBuf>,
    pub tolerances: Tolerances,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            experiment: ExperimentName::ModeDecay,
            warping: WarpingSpec::Euclidean,
            r_max: None,
            link: LinkSpec::Circle,
            n: 2,
            m_max: 8,
            r_schedule: (1..=10).map(|k| f64::from(1u32 << k)).collect(),
            r0: 1.0,
            boundary: BoundarySpec::Mode { m: 1, k: 0 },
            amplitude: Amplitude::LnR,
            dims: (3..=10).collect(),
            lambda1: None,
            seed: None,
            density: 0,
            output: None,
            tolerances: Tolerances::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn for_experiment(experiment: ExperimentName) -> Self {
        Self {
            experiment,
            ..Self::default()
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| config_error(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Single-line JSON used as the report header.
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("configuration is always serializable")
    }

    pub fn validate(&self) -> Result<()> {
        if self.r_schedule.is_empty() {
            return Err(config_error("r_schedule is empty"));
        }
        if self.r_schedule.iter().any(|r| !(r.is_finite() && *r > 0.0)) {
            return Err(config_error("r_schedule entries must be positive and finite"));
        }
        if self.r_schedule.windows(2).any(|p| p[1] <= p[0]) {
            return Err(config_error("r_schedule must be strictly increasing"));
        }
        if !(self.r0 > 0.0 && self.r0 < self.r_schedule[0]) {
            return Err(config_error(format!(
                "r0 = {} must lie in (0, min r_schedule = {})",
                self.r0, self.r_schedule[0]
            )));
        }
        if matches!(self.boundary, BoundarySpec::Random { .. }) && self.seed.is_none() {
            return Err(config_error("random boundary data needs a seed"));
        }
        if self.m_max == 0 {
            return Err(config_error("m_max must be at least 1"));
        }
        if let Some(r_max) = self.r_max {
            if r_max < self.largest_radius() {
                return Err(config_error(format!(
                    "r_max = {r_max} is below the largest scheduled radius {}",
                    self.largest_radius()
                )));
            }
        }
        Ok(())
    }

    pub fn largest_radius(&self) -> f64 {
        self.r_schedule.last().copied().unwrap_or(1.0)
    }

    pub fn warping_function(&self) -> Result<WarpingFunction> {
        let kind = match &self.warping {
            WarpingSpec::Euclidean => WarpingKind::Euclidean,
            WarpingSpec::Hyperbolic => WarpingKind::Hyperbolic,
            WarpingSpec::Bounded => WarpingKind::Bounded,
            WarpingSpec::Tabulated { path } => WarpingKind::Tabulated(Arc::new(WarpingTable::read_csv(path)?)),
        };
        let r_max = match (&self.warping, self.r_max) {
            (_, Some(r)) => r,
            // a table cannot be extrapolated past its last sample
            (WarpingSpec::Tabulated { .. }, None) => match &kind {
                WarpingKind::Tabulated(t) => t.samples().last().map(|s| s.r).unwrap_or(DEFAULT_R_MAX),
                _ => unreachable!(),
            },
            (_, None) => DEFAULT_R_MAX.max(self.largest_radius()),
        };
        Ok(WarpingFunction::new(kind, r_max)?)
    }

    pub fn link_kind(&self) -> Result<LinkKind> {
        Ok(match &self.link {
            LinkSpec::Circle => LinkKind::Circle,
            LinkSpec::Sphere2 => LinkKind::RoundSphere2,
            LinkSpec::Sphere => LinkKind::RoundSphereGeneral,
            LinkSpec::Custom { eigenvalues, samples } => {
                let mut custom = CustomSpectrum::read_csv(eigenvalues)?;
                if let Some(path) = samples {
                    custom = custom.with_samples(cone_harmonic::link_spectrum::SampledModes::read_csv(path)?);
                }
                LinkKind::Custom(custom)
            }
        })
    }

    pub fn spectrum(&self) -> Result<LinkSpectrum> {
        Ok(build_spectrum(self.link_kind()?, self.n, self.m_max)?)
    }

    /// Boundary samples for the configured shape, before any normalization.
    pub fn boundary_data(&self, spectrum: &LinkSpectrum) -> Result<BoundaryData> {
        Ok(match &self.boundary {
            BoundarySpec::Constant { value } => BoundaryData::constant(spectrum, *value)?,
            BoundarySpec::Mode { m, k } => BoundaryData::single_mode(spectrum, EigenMode { m: *m, k: *k }, 1.0)?,
            BoundarySpec::Combination { terms } => BoundaryData::combination(spectrum, terms)?,
            BoundarySpec::Random { min_band } => {
                let seed = self
                    .seed
                    .ok_or_else(|| config_error("random boundary data needs a seed"))?;
                BoundaryData::random(spectrum, seed, *min_band)?
            }
            BoundarySpec::File { path } => BoundaryData::read_csv(spectrum, path)?,
        })
    }
}
