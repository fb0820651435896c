use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::record::{BlurLevel, PlotRange, TextBackground};

/// Weights for the consistency / output-stability / judge dimensions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Weights {
    pub consistency: f64,
    pub stability: f64,
    pub judge: f64,
}

impl Default for Weights {
    fn default() -> Self {
        Weights {
            consistency: 1.0,
            stability: 1.0,
            judge: 1.0,
        }
    }
}

impl Weights {
    pub fn validate(&self) -> Result<(), ConfigError> {
        for (name, w) in [
            ("weights.consistency", self.consistency),
            ("weights.stability", self.stability),
            ("weights.judge", self.judge),
        ] {
            if !(w.is_finite() && w >= 0.0) {
                return Err(ConfigError::Invalid {
                    field: name.into(),
                    reason: format!("weight must be finite and non-negative, got {w}"),
                });
            }
        }
        Ok(())
    }
}

pub const DEFAULT_CLASSES: [&str; 10] = [
    "shiba dog", "cat", "bear", "eagle", "snake", "panda", "turtle", "fish", "car", "plane",
];

pub const TEXT_MATRIX_WORDS: [&str; 8] = [
    "dog", "cat", "bird", "lion", "tiger", "zebra", "monkey", "panda",
];

pub const TEXT_MATRIX_SIZES: [usize; 6] = [8, 16, 24, 32, 40, 64];

/// Synthetic-task campaign settings; defaults mirror the published setup.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CampaignConfig {
    pub ranges: Vec<PlotRange>,
    pub coordinate_dims: Vec<u8>,
    pub coordinate_samples_per_config: usize,
    pub path_point_counts: Vec<usize>,
    pub path_samples_per_config: usize,
    pub text_sizes: Vec<usize>,
    pub text_words: Vec<String>,
    pub text_backgrounds: Vec<TextBackground>,
    pub text_samples_per_config: usize,
    /// Source sentences for the corrupted-text task; `None` uses the bundled list.
    pub ocr_texts: Option<Vec<String>>,
    pub ocr_replacements: usize,
    pub ocr_blur_levels: Vec<BlurLevel>,
}

impl Default for CampaignConfig {
    fn default() -> Self {
        CampaignConfig {
            ranges: PlotRange::STANDARD.to_vec(),
            coordinate_dims: vec![1, 2],
            coordinate_samples_per_config: 100,
            path_point_counts: (2..=6).collect(),
            path_samples_per_config: 100,
            text_sizes: TEXT_MATRIX_SIZES.to_vec(),
            text_words: TEXT_MATRIX_WORDS.iter().map(|s| s.to_string()).collect(),
            text_backgrounds: vec![TextBackground::Asterisks, TextBackground::RandomWords],
            text_samples_per_config: 1,
            ocr_texts: None,
            ocr_replacements: 3,
            ocr_blur_levels: BlurLevel::ALL.to_vec(),
        }
    }
}

/// Top-level run configuration, loadable from TOML.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub grid: usize,
    pub canvas: [u32; 2],
    pub scales: Vec<f64>,
    pub rotations: Vec<f64>,
    pub contexts: Vec<String>,
    pub classes: Vec<String>,
    pub output_dir: PathBuf,
    pub weights: Weights,
    pub campaign: CampaignConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 0,
            grid: 5,
            canvas: [672, 672],
            scales: vec![1.0 / 2.0, 1.0 / 3.0, 1.0 / 5.0, 1.0 / 10.0, 1.0 / 15.0, 1.0 / 20.0],
            rotations: (0..8).map(|i| i as f64 * 45.0).collect(),
            contexts: vec!["white".into()],
            classes: DEFAULT_CLASSES.iter().map(|s| s.to_string()).collect(),
            output_dir: PathBuf::from("out"),
            weights: Weights::default(),
            campaign: CampaignConfig::default(),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("config {path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("config field `{field}`: {reason}")]
    Invalid { field: String, reason: String },
}

impl RunConfig {
    pub fn from_toml_str(text: &str, path: &Path) -> Result<Self, ConfigError> {
        let config: RunConfig = toml::from_str(text).map_err(|e| ConfigError::Parse {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml_str(&text, path)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.weights.validate()?;
        let invalid = |field: &str, reason: String| ConfigError::Invalid {
            field: field.into(),
            reason,
        };
        if self.classes.is_empty() {
            return Err(invalid("classes", "at least one class is required".into()));
        }
        let c = &self.campaign;
        if let Some(r) = c.ranges.iter().find(|r| !r.is_supported()) {
            return Err(invalid(
                "campaign.ranges",
                format!("unsupported range {r}; expected one of [-5,5], [-10,10], [0,10], [0,20]"),
            ));
        }
        if let Some(d) = c.coordinate_dims.iter().find(|d| !matches!(d, 1 | 2)) {
            return Err(invalid(
                "campaign.coordinate_dims",
                format!("dimensionality {d} unsupported (1 or 2)"),
            ));
        }
        if let Some(n) = c.path_point_counts.iter().find(|n| !(2..=6).contains(*n)) {
            return Err(invalid(
                "campaign.path_point_counts",
                format!("point count {n} outside [2, 6]"),
            ));
        }
        if let Some(s) = c.text_sizes.iter().find(|s| !TEXT_MATRIX_SIZES.contains(s)) {
            return Err(invalid(
                "campaign.text_sizes",
                format!("matrix size {s} unsupported"),
            ));
        }
        if let Some(w) = c.text_words.iter().find(|w| w.is_empty() || w.contains(char::is_whitespace)) {
            return Err(invalid(
                "campaign.text_words",
                format!("`{w}` is not a single word"),
            ));
        }
        Ok(())
    }
}
