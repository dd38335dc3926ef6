//! JSON run configuration.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use omnicell::channel::ScenarioConfig;
use omnicell::cost::PriceTable;
use omnicell::geometry::ray_spacing;
use omnicell::geometry::{
    approximate_ray_count, min_central_distance, strict_ray_count, RaaParams, SizingMode, UcaParams,
    UlaSectorParams,
};
use omnicell::pattern::{
    build_dft_codebook, build_parametric_codebook, full_circle_codewords, Codebook, ElementPattern,
    ParametricCodebookOptions,
};
use omnicell::selection::{NoiseModel, Strategy};
use omnicell::Architecture;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub scenario: ScenarioConfig,
    #[serde(default)]
    pub raa: RaaConfig,
    #[serde(default)]
    pub ula: UlaConfig,
    #[serde(default)]
    pub uca: UcaConfig,
    #[serde(default)]
    pub prices: PriceTable,
    #[serde(default)]
    pub run: RunConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RaaConfig {
    /// Elements per ray.
    pub m: usize,
    pub sizing: SizingMode,
    /// Overrides the ray count chosen by `sizing`.
    pub num_rays: Option<usize>,
    /// Overrides the minimum central distance.
    pub central_distance_m: Option<f64>,
    pub allow_overlap: bool,
    pub pattern: ElementPattern,
}

impl Default for RaaConfig {
    fn default() -> Self {
        RaaConfig {
            m: 64,
            sizing: SizingMode::Strict,
            num_rays: None,
            central_distance_m: None,
            allow_overlap: false,
            pattern: ElementPattern::directional(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct UlaConfig {
    pub m: usize,
    pub num_sectors: usize,
    pub pattern: ElementPattern,
}

impl Default for UlaConfig {
    fn default() -> Self {
        UlaConfig {
            m: 64,
            num_sectors: 3,
            pattern: ElementPattern::directional(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct UcaConfig {
    pub n: usize,
    /// Defaults to `Nλ/(4π)`.
    pub radius_m: Option<f64>,
    /// Codeword spacing; defaults to the RAA ray spacing `arcsin(2/M)`.
    pub spacing_rad: Option<f64>,
    /// Defaults to `⌊2π/χ⌋`.
    pub num_codewords: Option<usize>,
    /// Defaults to `-π + χ/2`.
    pub first_target_rad: Option<f64>,
    pub semicircle: bool,
    pub pattern: ElementPattern,
}

impl Default for UcaConfig {
    fn default() -> Self {
        UcaConfig {
            n: 100,
            radius_m: None,
            spacing_rad: None,
            num_codewords: None,
            first_target_rad: None,
            semicircle: false,
            pattern: ElementPattern::Isotropic,
        }
    }
}

/// Inclusive SNR sweep in dB.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SnrGrid {
    pub lo: f64,
    pub hi: f64,
    pub step: f64,
}

impl Default for SnrGrid {
    fn default() -> Self {
        SnrGrid {
            lo: -10.0,
            hi: 10.0,
            step: 1.0,
        }
    }
}

impl SnrGrid {
    pub fn points(&self) -> Vec<f64> {
        let count = ((self.hi - self.lo) / self.step + 1e-9).floor() as usize + 1;
        (0..count).map(|i| self.lo + i as f64 * self.step).collect()
    }

    fn validate(&self) -> Result<()> {
        if !(self.lo.is_finite() && self.hi.is_finite() && self.step.is_finite()) {
            bail!("run.snr_db: values must be finite");
        }
        if self.step <= 0.0 {
            bail!("run.snr_db.step: must be positive, got {}", self.step);
        }
        if self.hi < self.lo {
            bail!("run.snr_db: hi ({}) is below lo ({})", self.hi, self.lo);
        }
        Ok(())
    }
}

impl std::str::FromStr for SnrGrid {
    type Err = anyhow::Error;

    /// Parses `lo:hi:step`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let [lo, hi, step] = parts.as_slice() else {
            bail!("--snr: expected lo:hi:step, got `{s}`");
        };
        let num = |v: &str, what: &str| -> Result<f64> {
            v.trim()
                .parse()
                .with_context(|| format!("--snr: bad {what} `{v}`"))
        };
        let grid = SnrGrid {
            lo: num(lo, "lo")?,
            hi: num(hi, "hi")?,
            step: num(step, "step")?,
        };
        grid.validate()?;
        Ok(grid)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub seed: u64,
    /// Monte Carlo realisations; realisation `i` uses seed `seed + i`.
    pub num_seeds: usize,
    pub snr_db: SnrGrid,
    pub strategy: Strategy,
    pub out_dir: PathBuf,
    pub angle_grid: usize,
    pub architectures: Vec<Architecture>,
    pub noise_model: NoiseModel,
    /// Also write the paths of the first realisation.
    pub dump_channels: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 0,
            num_seeds: 100,
            snr_db: SnrGrid::default(),
            strategy: Strategy::Greedy,
            out_dir: PathBuf::from("out"),
            angle_grid: 4096,
            architectures: Architecture::ALL.to_vec(),
            noise_model: NoiseModel::AsWritten,
            dump_channels: false,
        }
    }
}

/// Command-line overrides applied on top of the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub out_dir: Option<PathBuf>,
    pub architectures: Option<Vec<Architecture>>,
    pub strategy: Option<Strategy>,
    pub snr_db: Option<SnrGrid>,
}

/// All arrays and codebooks a configuration describes.
#[derive(Debug, Clone)]
pub struct Arrays {
    pub raa: RaaParams,
    pub ula: UlaSectorParams,
    pub dft: Codebook,
    pub uca: UcaParams,
    pub parametric: Codebook,
}

impl Config {
    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: Config = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            anyhow::anyhow!("config field `{path}`: {}", e.into_inner())
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        Self::from_json(&text).with_context(|| format!("in config {}", path.display()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serialises")
    }

    pub fn apply(&mut self, o: &Overrides) -> Result<()> {
        if let Some(seed) = o.seed {
            self.run.seed = seed;
        }
        if let Some(out) = &o.out_dir {
            self.run.out_dir = out.clone();
        }
        if let Some(arch) = &o.architectures {
            self.run.architectures = arch.clone();
        }
        if let Some(s) = o.strategy {
            self.run.strategy = s;
        }
        if let Some(g) = o.snr_db {
            self.run.snr_db = g;
        }
        self.validate()
    }

    pub fn validate(&self) -> Result<()> {
        self.scenario.validate().context("scenario")?;
        self.prices.validate().context("prices")?;
        if self.raa.m < 2 {
            bail!("raa.m: at least 2 elements per ray required, got {}", self.raa.m);
        }
        if self.ula.m < 2 {
            bail!("ula.m: at least 2 elements required, got {}", self.ula.m);
        }
        if self.ula.num_sectors == 0 {
            bail!("ula.num_sectors: must be positive");
        }
        if self.uca.n < 3 {
            bail!("uca.n: at least 3 elements required, got {}", self.uca.n);
        }
        if self.run.num_seeds == 0 {
            bail!("run.num_seeds: must be positive");
        }
        if self.run.angle_grid == 0 {
            bail!("run.angle_grid: must be positive");
        }
        if self.run.architectures.is_empty() {
            bail!("run.architectures: select at least one architecture");
        }
        self.run.snr_db.validate()
    }

    pub fn build_raa(&self) -> Result<RaaParams> {
        let c = &self.raa;
        let lambda = self.scenario.wavelength();
        let d = c
            .central_distance_m
            .unwrap_or_else(|| min_central_distance(c.m, lambda));
        let n = c.num_rays.unwrap_or_else(|| match c.sizing {
            SizingMode::Strict => strict_ray_count(c.m, lambda, d),
            SizingMode::Approximate => approximate_ray_count(c.m),
        });
        RaaParams::with_layout(c.m, lambda, d, n, c.allow_overlap).context("raa")
    }

    pub fn build_arrays(&self) -> Result<Arrays> {
        let lambda = self.scenario.wavelength();
        let raa = self.build_raa()?;
        let ula = UlaSectorParams::build(self.ula.m, lambda, self.ula.num_sectors).context("ula")?;
        let dft = build_dft_codebook(self.ula.m, ula.sector_halfwidth()).context("ula")?;
        let uca = match self.uca.radius_m {
            Some(a) => UcaParams::with_radius(self.uca.n, lambda, a),
            None => UcaParams::build(self.uca.n, lambda),
        }
        .context("uca")?;
        let spacing = self.uca.spacing_rad.unwrap_or_else(|| ray_spacing(self.raa.m));
        let options = ParametricCodebookOptions {
            spacing,
            num_codewords: self
                .uca
                .num_codewords
                .unwrap_or_else(|| full_circle_codewords(spacing)),
            first_target: self.uca.first_target_rad,
            semicircle: self.uca.semicircle,
        };
        let parametric = build_parametric_codebook(&uca, &options).context("uca")?;
        Ok(Arrays {
            raa,
            ula,
            dft,
            uca,
            parametric,
        })
    }
}
