//! Experiment configuration files.
//!
//! A config names one experiment, a root seed, an output directory and any
//! number of parameter sections. Registered experiments read exactly one
//! section and fall back to its defaults when it is absent; `custom` runs
//! every section that is present. Fields missing from a section take their
//! default values. Complex numbers are written `[re, im]`.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::berezin::bosonization::TestFunction;
use crate::ensemble::{Boundary, ProfileConfig, Scaling};
use crate::error::{Error, Result};
use crate::spectra::RatioVariant;
use crate::transfer::GridSpec;

/// Registered experiment identifiers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ExperimentId {
    A1,
    A2,
    A3,
    A4,
    A5,
    A6,
    A7,
    A8,
    A9,
    #[serde(rename = "custom")]
    Custom,
}

impl ExperimentId {
    pub const REGISTERED: [ExperimentId; 9] = [
        ExperimentId::A1,
        ExperimentId::A2,
        ExperimentId::A3,
        ExperimentId::A4,
        ExperimentId::A5,
        ExperimentId::A6,
        ExperimentId::A7,
        ExperimentId::A8,
        ExperimentId::A9,
    ];

    /// The parameter section a registered experiment reads.
    pub fn section(self) -> Option<SectionKind> {
        use SectionKind::*;
        Some(match self {
            ExperimentId::A1 => Semicircle,
            ExperimentId::A2 => Crossover,
            ExperimentId::A3 => Berezin,
            ExperimentId::A4 => Bosonization,
            ExperimentId::A5 => Transfer,
            ExperimentId::A6 => SineKernel,
            ExperimentId::A7 => DetRatio,
            ExperimentId::A8 => SpectralIdentities,
            ExperimentId::A9 => Participation,
            ExperimentId::Custom => return None,
        })
    }
}

impl fmt::Display for ExperimentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExperimentId::Custom => f.write_str("custom"),
            other => write!(f, "{other:?}"),
        }
    }
}

impl FromStr for ExperimentId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ExperimentId::REGISTERED
            .into_iter()
            .chain([ExperimentId::Custom])
            .find(|id| id.to_string().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::ConfigInvalid(format!("unknown experiment '{s}'")))
    }
}

/// Names of the parameter sections.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SectionKind {
    Semicircle,
    Crossover,
    Berezin,
    Bosonization,
    Transfer,
    SineKernel,
    DetRatio,
    SpectralIdentities,
    Participation,
}

impl SectionKind {
    pub fn key(self) -> &'static str {
        match self {
            SectionKind::Semicircle => "semicircle",
            SectionKind::Crossover => "crossover",
            SectionKind::Berezin => "berezin",
            SectionKind::Bosonization => "bosonization",
            SectionKind::Transfer => "transfer",
            SectionKind::SineKernel => "sine_kernel",
            SectionKind::DetRatio => "det_ratio",
            SectionKind::SpectralIdentities => "spectral_identities",
            SectionKind::Participation => "participation",
        }
    }
}

/// Pooled spectrum of one profile against the semicircle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SemicircleSection {
    pub profile: ProfileConfig,
    pub samples: usize,
}

impl Default for SemicircleSection {
    fn default() -> Self {
        Self {
            profile: ProfileConfig {
                d: 1,
                n: 10,
                w: 30,
                beta: 1.0,
                scaling: Scaling::Sigma,
                boundary: Boundary::Neumann,
            },
            samples: 200,
        }
    }
}

/// Mean gap ratios of a delocalised and a localised profile against GUE
/// and Poisson oracles.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CrossoverSection {
    pub window_half_width: f64,
    pub delocalized: ProfileConfig,
    pub delocalized_samples: usize,
    pub gue_size: usize,
    pub gue_samples: usize,
    pub gue_tolerance: f64,
    pub localized: ProfileConfig,
    pub localized_samples: usize,
    pub poisson_length: usize,
    pub poisson_samples: usize,
    pub poisson_tolerance: f64,
}

impl Default for CrossoverSection {
    fn default() -> Self {
        let band = |n, w| ProfileConfig {
            d: 1,
            n,
            w,
            beta: 0.2,
            scaling: Scaling::Band,
            boundary: Boundary::Neumann,
        };
        Self {
            window_half_width: 1.0,
            delocalized: band(2, 128),
            delocalized_samples: 150,
            gue_size: 256,
            gue_samples: 150,
            gue_tolerance: 0.01,
            localized: band(256, 4),
            localized_samples: 8,
            poisson_length: 1000,
            poisson_samples: 20,
            poisson_tolerance: 0.02,
        }
    }
}

/// Gaussian Berezin integrals of random complex matrices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BerezinSection {
    pub matrices: usize,
    pub max_size: usize,
    pub tolerance: f64,
}

impl Default for BerezinSection {
    fn default() -> Self {
        Self {
            matrices: 100,
            max_size: 8,
            tolerance: 1e-12,
        }
    }
}

/// Vector-side Monte Carlo and matrix-side quadrature of the bosonization
/// identity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BosonizationSection {
    pub function: TestFunction,
    pub blocks: Vec<usize>,
    pub samples: usize,
    pub matrix_tolerance: f64,
    pub sigmas: f64,
}

impl Default for BosonizationSection {
    fn default() -> Self {
        Self {
            function: TestFunction::ExpTrace,
            blocks: vec![2, 3],
            samples: 1_000_000,
            matrix_tolerance: 1e-6,
            sigmas: 3.0,
        }
    }
}

/// Transfer-operator evaluations against the closed-form limit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TransferSection {
    pub energy: f64,
    pub eps: f64,
    pub beta_tilde: f64,
    pub n: usize,
    /// Shift tuples `(ξ₁, ξ₂, ξ₁′, ξ₂′)`.
    pub points: Vec<[Complex64; 4]>,
    /// Overrides the suggested grid when present.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridSpec>,
    /// Multiplies `n log²n / β̃` in the deviation tolerance.
    pub deviation_constant: f64,
    pub doubling_tolerance: f64,
}

impl Default for TransferSection {
    fn default() -> Self {
        let real = |v: [f64; 4]| v.map(|x| Complex64::new(x, 0.0));
        Self {
            energy: 0.0,
            eps: 0.5,
            beta_tilde: 1e4,
            n: 8,
            points: vec![
                real([0.5, -0.5, 0.25, -0.25]),
                real([0.3, -0.2, 0.3, -0.2]),
                real([0.0, 0.0, 0.5, 0.5]),
            ],
            grid: None,
            deviation_constant: 5.0,
            doubling_tolerance: 1e-4,
        }
    }
}

/// Sine-kernel limit assembled from the closed forms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SineKernelSection {
    pub energies: Vec<f64>,
    pub points: Vec<f64>,
    pub tolerance: f64,
}

impl Default for SineKernelSection {
    fn default() -> Self {
        Self {
            energies: vec![0.0, 1.0],
            points: vec![0.25, 0.5, 1.5],
            tolerance: 1e-8,
        }
    }
}

/// Determinant-ratio Monte Carlo over a sequence of block sizes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DetRatioSection {
    pub variant: RatioVariant,
    pub d: usize,
    pub n: usize,
    pub beta: f64,
    pub scaling: Scaling,
    pub boundary: Boundary,
    /// Increasing block sizes `W`.
    pub blocks: Vec<usize>,
    pub energy: f64,
    pub eps: f64,
    pub xi: [Complex64; 4],
    pub samples: usize,
    /// Allowed increase of the distance to the limit, in standard errors.
    pub sigmas: f64,
}

impl Default for DetRatioSection {
    fn default() -> Self {
        Self {
            variant: RatioVariant::PlusPlus,
            d: 1,
            n: 2,
            beta: 0.5,
            scaling: Scaling::Sigma,
            boundary: Boundary::Neumann,
            blocks: vec![8, 16, 32],
            energy: 0.0,
            eps: 0.5,
            xi: [0.0, 0.0, 0.5, 0.5].map(|x| Complex64::new(x, 0.0)),
            samples: 10_000,
            sigmas: 3.0,
        }
    }
}

/// Sector eigenvalue identities and the Nyström cross-check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpectralIdentitiesSection {
    pub beta_tildes: Vec<f64>,
    /// `l ≤ asymptotic_max_l` in `|λ^(l) − (1 − l(l+1)/β̃)| ≤ c·l⁴/β̃²`.
    pub asymptotic_max_l: u32,
    pub asymptotic_constant: f64,
    pub recursion_max_l: u32,
    /// Bound on `β̃ ×` the off-diagonal recursion residual.
    pub recursion_constant: f64,
    pub moment_ls: Vec<u32>,
    pub moment_rhos: Vec<f64>,
    pub nystrom_beta_tilde: f64,
    pub nystrom_max_l: u32,
    pub nystrom_tolerance: f64,
}

impl Default for SpectralIdentitiesSection {
    fn default() -> Self {
        Self {
            beta_tildes: vec![1e2, 1e3, 1e4],
            asymptotic_max_l: 5,
            asymptotic_constant: 5.0,
            recursion_max_l: 4,
            recursion_constant: 10.0,
            moment_ls: vec![0, 1, 2, 3, 4, 5],
            moment_rhos: vec![0.0, 0.5, 1.0, 2.0],
            nystrom_beta_tilde: 200.0,
            nystrom_max_l: 6,
            nystrom_tolerance: 1e-6,
        }
    }
}

/// Eigenvector participation ratios for two block sizes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ParticipationSection {
    pub n: usize,
    pub beta: f64,
    pub blocks: [usize; 2],
    pub samples: usize,
    pub window_half_width: f64,
    /// Accepted range of the ratio of median localization lengths
    /// `1/IPR` between the larger and the smaller block.
    pub ratio_range: [f64; 2],
}

impl Default for ParticipationSection {
    fn default() -> Self {
        Self {
            n: 128,
            beta: 0.2,
            blocks: [4, 8],
            samples: 3,
            window_half_width: 0.5,
            ratio_range: [2.5, 6.0],
        }
    }
}

/// Top-level configuration file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentId,
    pub seed: u64,
    pub output: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub semicircle: Option<SemicircleSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub crossover: Option<CrossoverSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub berezin: Option<BerezinSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bosonization: Option<BosonizationSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub transfer: Option<TransferSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sine_kernel: Option<SineKernelSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub det_ratio: Option<DetRatioSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spectral_identities: Option<SpectralIdentitiesSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub participation: Option<ParticipationSection>,
}

impl ExperimentConfig {
    /// A registered experiment with all parameters at their defaults.
    pub fn new(experiment: ExperimentId, seed: u64, output: impl Into<PathBuf>) -> Self {
        Self {
            experiment,
            seed,
            output: output.into(),
            semicircle: None,
            crossover: None,
            berezin: None,
            bosonization: None,
            transfer: None,
            sine_kernel: None,
            det_ratio: None,
            spectral_identities: None,
            participation: None,
        }
    }

    /// The same config with the default section of its experiment filled in.
    pub fn with_defaults(mut self) -> Self {
        match self.experiment.section() {
            Some(SectionKind::Semicircle) => {
                self.semicircle.get_or_insert_with(Default::default);
            }
            Some(SectionKind::Crossover) => {
                self.crossover.get_or_insert_with(Default::default);
            }
            Some(SectionKind::Berezin) => {
                self.berezin.get_or_insert_with(Default::default);
            }
            Some(SectionKind::Bosonization) => {
                self.bosonization.get_or_insert_with(Default::default);
            }
            Some(SectionKind::Transfer) => {
                self.transfer.get_or_insert_with(Default::default);
            }
            Some(SectionKind::SineKernel) => {
                self.sine_kernel.get_or_insert_with(Default::default);
            }
            Some(SectionKind::DetRatio) => {
                self.det_ratio.get_or_insert_with(Default::default);
            }
            Some(SectionKind::SpectralIdentities) => {
                self.spectral_identities.get_or_insert_with(Default::default);
            }
            Some(SectionKind::Participation) => {
                self.participation.get_or_insert_with(Default::default);
            }
            None => {}
        }
        self
    }

    /// Sections present in this config.
    pub fn present_sections(&self) -> Vec<SectionKind> {
        use SectionKind::*;
        [
            (Semicircle, self.semicircle.is_some()),
            (Crossover, self.crossover.is_some()),
            (Berezin, self.berezin.is_some()),
            (Bosonization, self.bosonization.is_some()),
            (Transfer, self.transfer.is_some()),
            (SineKernel, self.sine_kernel.is_some()),
            (DetRatio, self.det_ratio.is_some()),
            (SpectralIdentities, self.spectral_identities.is_some()),
            (Participation, self.participation.is_some()),
        ]
        .into_iter()
        .filter_map(|(kind, present)| present.then_some(kind))
        .collect()
    }

    /// Rejects sections a registered experiment would ignore and `custom`
    /// configs without any section.
    pub fn validate(&self) -> Result<()> {
        let present = self.present_sections();
        match self.experiment.section() {
            Some(own) => {
                if let Some(extra) = present.iter().find(|&&s| s != own) {
                    return Err(Error::ConfigInvalid(format!(
                        "section [{}] is not used by experiment {}",
                        extra.key(),
                        self.experiment
                    )));
                }
            }
            None if present.is_empty() => {
                return Err(Error::ConfigInvalid(
                    "a custom experiment needs at least one parameter section".into(),
                ));
            }
            None => {}
        }
        Ok(())
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let config: Self = toml::from_str(text).map_err(|e| Error::ConfigInvalid(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::ConfigInvalid(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::ConfigInvalid(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }
}
