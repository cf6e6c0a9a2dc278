//! Declarative run configuration: one TOML file names every input and
//! numeric knob; command-line flags override individual fields.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::ahp::AhpVariant;
use crate::importance::OobMode;
use crate::strategy::HardeningMode;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("failed to read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("failed to parse {path}: {source}")]
    Parse {
        path: String,
        source: toml::de::Error,
    },
    #[error("configuration: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    ModelDriven,
    Hybrid,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::ModelDriven => "model-driven",
            Mode::Hybrid => "hybrid",
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct PathsSection {
    buses: PathBuf,
    generators: PathBuf,
    corridors: PathBuf,
    terrain: Option<PathBuf>,
    typhoon: PathBuf,
    marginals: PathBuf,
    pairwise: Option<PathBuf>,
    strategies: Option<PathBuf>,
    /// Pre-computed weight schemes (three rows); replaces forest training.
    weights: Option<PathBuf>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TerrainSection {
    pub origin_lat: f64,
    pub origin_lon: f64,
    #[serde(default = "default_cell_km")]
    pub cell_km: f64,
    #[serde(default)]
    pub default_altitude_m: f64,
    #[serde(default)]
    pub default_slope_deg: f64,
    #[serde(default)]
    pub default_rain24h_mm: f64,
}

fn default_cell_km() -> f64 {
    1.0
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
#[serde(tag = "source")]
pub enum DatasetSection {
    /// Seeded stand-in corpus; the seed derives from the run seed.
    Synthetic {
        #[serde(default = "default_dataset_size")]
        size: usize,
    },
    File {
        path: PathBuf,
    },
}

fn default_dataset_size() -> usize {
    640
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "snake_case")]
struct RunSection {
    mode: Mode,
    #[serde(default)]
    seed: u64,
    #[serde(default = "default_spacing")]
    spacing_m: f64,
    #[serde(default = "default_j")]
    j_max: usize,
    #[serde(default = "default_r_set")]
    r_set_mw: f64,
    #[serde(default = "default_trees")]
    trees: usize,
    /// Depth cap for forest trees; unlimited when absent.
    max_depth: Option<usize>,
    #[serde(default = "default_min_leaf")]
    min_leaf: usize,
    #[serde(default = "default_cost_rate")]
    cost_rate_per_km: f64,
    threads: Option<usize>,
    #[serde(default)]
    ahp_variant: AhpVariantConfig,
    #[serde(default)]
    oob_mode: OobModeConfig,
    /// Flip the operation-time hazard direction to positive (older assets
    /// more fragile). The shipped default keeps the published negative
    /// direction; see the README discussion before flipping.
    #[serde(default)]
    op_time_positive: bool,
    /// Force every correction coefficient to one while keeping the hybrid
    /// code path; for model-driven/hybrid consistency checks.
    #[serde(default)]
    force_unit_corrections: bool,
    #[serde(default)]
    hardening: HardeningConfig,
}

fn default_spacing() -> f64 {
    500.0
}
fn default_j() -> usize {
    2
}
fn default_r_set() -> f64 {
    17.0e-5
}
fn default_trees() -> usize {
    50
}
fn default_min_leaf() -> usize {
    1
}
fn default_cost_rate() -> f64 {
    1.0e6
}

#[derive(Debug, Clone, Copy, Default, Deserialize)]
#[serde(rename_all = "kebab-case")]
enum AhpVariantConfig {
    #[default]
    GeometricMean,
    ColumnNormalization,
}

#[derive(Debug, Clone, Copy, Default, Deserialize)]
#[serde(rename_all = "kebab-case")]
enum OobModeConfig {
    #[default]
    Permute,
    Gaussian,
}

#[derive(Debug, Clone, Copy, Default, Deserialize)]
#[serde(rename_all = "kebab-case")]
enum HardeningConfig {
    #[default]
    Immunize,
    Parallel,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RunConfigFile {
    paths: PathsSection,
    terrain: Option<TerrainSection>,
    dataset: Option<DatasetSection>,
    run: RunSection,
}

/// Fully resolved configuration: paths absolute, knobs defaulted, overrides
/// applied.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub config_path: PathBuf,
    pub buses: PathBuf,
    pub generators: PathBuf,
    pub corridors: PathBuf,
    pub terrain: Option<PathBuf>,
    pub typhoon: PathBuf,
    pub marginals: PathBuf,
    pub pairwise: Option<PathBuf>,
    pub strategies: Option<PathBuf>,
    pub weights: Option<PathBuf>,
    pub terrain_grid: Option<TerrainSection>,
    pub dataset: Option<DatasetSection>,
    pub mode: Mode,
    pub seed: u64,
    pub spacing_m: f64,
    pub j_max: usize,
    pub r_set_mw: f64,
    pub trees: usize,
    pub max_depth: Option<usize>,
    pub min_leaf: usize,
    pub cost_rate_per_km: f64,
    pub threads: Option<usize>,
    pub ahp_variant: AhpVariant,
    pub oob_mode: OobMode,
    pub op_time_positive: bool,
    pub force_unit_corrections: bool,
    pub hardening: HardeningMode,
    pub dt_min_override: Option<f64>,
}

/// Field-level command-line overrides (flags beat the file).
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub mode: Option<Mode>,
    pub seed: Option<u64>,
    pub j_max: Option<usize>,
    pub spacing_m: Option<f64>,
    pub dt_min: Option<f64>,
    pub threads: Option<usize>,
}

impl RunConfig {
    pub fn load(config_path: &Path, overrides: &Overrides) -> Result<Self, ConfigError> {
        let display = config_path.display().to_string();
        let text = std::fs::read_to_string(config_path).map_err(|source| ConfigError::Io {
            path: display.clone(),
            source,
        })?;
        let file: RunConfigFile = toml::from_str(&text).map_err(|source| ConfigError::Parse {
            path: display,
            source,
        })?;

        let base = config_path.parent().unwrap_or(Path::new("."));
        let resolve = |p: &PathBuf| {
            if p.is_absolute() {
                p.clone()
            } else {
                base.join(p)
            }
        };

        let config = RunConfig {
            config_path: config_path.to_path_buf(),
            buses: resolve(&file.paths.buses),
            generators: resolve(&file.paths.generators),
            corridors: resolve(&file.paths.corridors),
            terrain: file.paths.terrain.as_ref().map(&resolve),
            typhoon: resolve(&file.paths.typhoon),
            marginals: resolve(&file.paths.marginals),
            pairwise: file.paths.pairwise.as_ref().map(&resolve),
            strategies: file.paths.strategies.as_ref().map(&resolve),
            weights: file.paths.weights.as_ref().map(&resolve),
            terrain_grid: file.terrain,
            dataset: file.dataset.map(|d| match d {
                DatasetSection::File { path } => DatasetSection::File {
                    path: resolve(&path),
                },
                synthetic => synthetic,
            }),
            mode: overrides.mode.unwrap_or(file.run.mode),
            seed: overrides.seed.unwrap_or(file.run.seed),
            spacing_m: overrides.spacing_m.unwrap_or(file.run.spacing_m),
            j_max: overrides.j_max.unwrap_or(file.run.j_max),
            r_set_mw: file.run.r_set_mw,
            trees: file.run.trees,
            max_depth: file.run.max_depth,
            min_leaf: file.run.min_leaf,
            cost_rate_per_km: file.run.cost_rate_per_km,
            threads: overrides.threads.or(file.run.threads),
            ahp_variant: match file.run.ahp_variant {
                AhpVariantConfig::GeometricMean => AhpVariant::GeometricMean,
                AhpVariantConfig::ColumnNormalization => AhpVariant::ColumnNormalization,
            },
            oob_mode: match file.run.oob_mode {
                OobModeConfig::Permute => OobMode::Permute,
                OobModeConfig::Gaussian => OobMode::Gaussian,
            },
            op_time_positive: file.run.op_time_positive,
            force_unit_corrections: file.run.force_unit_corrections,
            hardening: match file.run.hardening {
                HardeningConfig::Immunize => HardeningMode::Immunize,
                HardeningConfig::Parallel => HardeningMode::ParallelRedundancy,
            },
            dt_min_override: overrides.dt_min,
        };
        config.validate()?;
        Ok(config)
    }

    fn validate(&self) -> Result<(), ConfigError> {
        if self.j_max < 1 {
            return Err(ConfigError::Invalid("j_max must be at least 1".into()));
        }
        if !(self.spacing_m > 0.0) {
            return Err(ConfigError::Invalid("spacing_m must be positive".into()));
        }
        let mut required: Vec<(&str, &PathBuf)> = vec![
            ("buses", &self.buses),
            ("generators", &self.generators),
            ("corridors", &self.corridors),
            ("typhoon", &self.typhoon),
            ("marginals", &self.marginals),
        ];
        for opt in [
            ("terrain", &self.terrain),
            ("pairwise", &self.pairwise),
            ("strategies", &self.strategies),
            ("weights", &self.weights),
        ] {
            if let (name, Some(p)) = opt {
                required.push((name, p));
            }
        }
        if let Some(DatasetSection::File { path }) = &self.dataset {
            required.push(("dataset", path));
        }
        for (name, path) in required {
            if !path.exists() {
                return Err(ConfigError::Invalid(format!(
                    "{name} path {} does not exist",
                    path.display()
                )));
            }
        }
        if self.mode == Mode::Hybrid {
            if self.pairwise.is_none() {
                return Err(ConfigError::Invalid(
                    "hybrid mode requires a pairwise matrix path".into(),
                ));
            }
            if self.dataset.is_none() && self.weights.is_none() {
                return Err(ConfigError::Invalid(
                    "hybrid mode requires a dataset (file or synthetic) or a weights file".into(),
                ));
            }
        }
        if self.terrain.is_some() && self.terrain_grid.is_none() {
            return Err(ConfigError::Invalid(
                "a terrain raster path needs a [terrain] section with the grid origin".into(),
            ));
        }
        Ok(())
    }
}
