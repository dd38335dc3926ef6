//! Clustered multipath users and their projections into branch space.
//!
//! Each user has a nominal bearing `θ_k ~ U(-π, π)`. Around it `N_c`
//! clusters scatter with Laplacian azimuth offsets (the first cluster sits on
//! `θ_k`), each carrying `N_r` rays at fixed intra-cluster offsets. Cluster
//! powers decay exponentially with cluster index and every ray has a uniform
//! random phase. The model is narrowband: one snapshot, no delays.
//!
//! Randomness comes from ChaCha8 streams keyed per `(seed, user)`; uniform
//! and Laplacian draws are derived from raw `u64` words so the output does
//! not depend on any distribution implementation.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::geometry::{wavelength_from_carrier, wrap_angle, RaaParams, UcaParams, UlaSectorParams};
use crate::pattern::{
    raa_response, uca_response_vector, ula_response_vector, ElementPattern, ResponseMethod,
};
use crate::{Architecture, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PowerDecay {
    #[default]
    Exponential,
    Uniform,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GainNormalization {
    /// Deterministic ray amplitudes; `Σ|α|² = 1` for every realisation.
    #[default]
    Exact,
    /// Rayleigh ray amplitudes with `E[Σ|α|²] = 1`.
    Expected,
}

/// Scenario parameters. Angles are in radians.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub f_c: f64,
    #[serde(default = "defaults::users")]
    pub num_users: usize,
    #[serde(default = "defaults::rf_chains")]
    pub num_rf_chains: usize,
    #[serde(default = "defaults::clusters")]
    pub num_clusters: usize,
    #[serde(default = "defaults::rays_per_cluster")]
    pub rays_per_cluster: usize,
    /// RMS azimuth spread of cluster centres around the user bearing.
    #[serde(default = "defaults::cluster_spread")]
    pub cluster_angle_spread: f64,
    /// RMS azimuth spread of rays within a cluster.
    #[serde(default = "defaults::intra_spread")]
    pub intra_cluster_spread: f64,
    #[serde(default)]
    pub power_decay: PowerDecay,
    #[serde(default = "defaults::decay_db")]
    pub decay_db_per_cluster: f64,
    #[serde(default)]
    pub normalization: GainNormalization,
}

mod defaults {
    pub fn users() -> usize {
        10
    }
    pub fn rf_chains() -> usize {
        10
    }
    pub fn clusters() -> usize {
        20
    }
    pub fn rays_per_cluster() -> usize {
        20
    }
    pub fn cluster_spread() -> f64 {
        22f64.to_radians()
    }
    pub fn intra_spread() -> f64 {
        3f64.to_radians()
    }
    pub fn decay_db() -> f64 {
        3.0
    }
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            f_c: 47.2e9,
            num_users: defaults::users(),
            num_rf_chains: defaults::rf_chains(),
            num_clusters: defaults::clusters(),
            rays_per_cluster: defaults::rays_per_cluster(),
            cluster_angle_spread: defaults::cluster_spread(),
            intra_cluster_spread: defaults::intra_spread(),
            power_decay: PowerDecay::Exponential,
            decay_db_per_cluster: defaults::decay_db(),
            normalization: GainNormalization::Exact,
        }
    }
}

impl ScenarioConfig {
    pub fn wavelength(&self) -> f64 {
        wavelength_from_carrier(self.f_c)
    }

    pub fn paths_per_user(&self) -> usize {
        self.num_clusters * self.rays_per_cluster
    }

    /// Checks counts and spreads; the error names the offending field.
    pub fn validate(&self) -> Result<()> {
        let field = |name: &str, msg: &str| Err(Error::InvalidParameter(format!("{name}: {msg}")));
        if !(self.f_c.is_finite() && self.f_c > 0.0) {
            return field("f_c", "carrier frequency must be positive");
        }
        if self.num_users == 0 {
            return field("num_users", "must be positive");
        }
        if self.num_rf_chains == 0 {
            return field("num_rf_chains", "must be positive");
        }
        if self.num_clusters == 0 {
            return field("num_clusters", "must be positive");
        }
        if self.rays_per_cluster == 0 {
            return field("rays_per_cluster", "must be positive");
        }
        if !(self.cluster_angle_spread.is_finite() && self.cluster_angle_spread >= 0.0) {
            return field("cluster_angle_spread", "must be non-negative");
        }
        if !(self.intra_cluster_spread.is_finite() && self.intra_cluster_spread >= 0.0) {
            return field("intra_cluster_spread", "must be non-negative");
        }
        if !(self.decay_db_per_cluster.is_finite() && self.decay_db_per_cluster >= 0.0) {
            return field("decay_db_per_cluster", "must be non-negative");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Path {
    pub gain: Complex64,
    pub azimuth: f64,
}

/// Propagation paths of one user.
#[derive(Debug, Clone, PartialEq)]
pub struct PathSet {
    pub user: usize,
    pub los_azimuth: f64,
    pub paths: Vec<Path>,
}

impl PathSet {
    pub fn total_power(&self) -> f64 {
        self.paths.iter().map(|p| p.gain.norm_sqr()).sum()
    }

    /// Rescales gains so the total power is one.
    pub fn normalize(&mut self) {
        let total = self.total_power();
        if total > 0.0 {
            let scale = total.sqrt().recip();
            for p in &mut self.paths {
                p.gain *= scale;
            }
        }
    }

    /// Azimuth of the strongest path (first wins on ties).
    pub fn dominant_azimuth(&self) -> f64 {
        let mut best = (f64::NEG_INFINITY, self.los_azimuth);
        for p in &self.paths {
            let power = p.gain.norm_sqr();
            if power > best.0 {
                best = (power, p.azimuth);
            }
        }
        best.1
    }

    /// Union of two path sets (keeps `self`'s user and bearing).
    pub fn merged(&self, other: &PathSet) -> PathSet {
        let mut paths = self.paths.clone();
        paths.extend_from_slice(&other.paths);
        PathSet {
            user: self.user,
            los_azimuth: self.los_azimuth,
            paths,
        }
    }
}

/// SplitMix64 finaliser.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Independent stream for user `k` under run seed `seed`.
pub fn user_stream(seed: u64, user: usize) -> ChaCha8Rng {
    let key = seed ^ mix64(user as u64);
    let mut bytes = [0u8; 32];
    let mut state = key;
    for chunk in bytes.chunks_exact_mut(8) {
        state = mix64(state);
        chunk.copy_from_slice(&state.to_le_bytes());
    }
    ChaCha8Rng::from_seed(bytes)
}

/// Uniform draw on the open interval `(0, 1)`.
fn uniform_open(rng: &mut impl RngCore) -> f64 {
    ((rng.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
}

/// Laplacian draw with the given RMS spread.
fn laplace(rng: &mut impl RngCore, rms: f64) -> f64 {
    let scale = rms / std::f64::consts::SQRT_2;
    let u = uniform_open(rng) - 0.5;
    -scale * u.signum() * (1.0 - 2.0 * u.abs()).ln()
}

/// Standard complex Gaussian `CN(0, 1)` via Box–Muller.
fn complex_gaussian(rng: &mut impl RngCore) -> Complex64 {
    let r = (-uniform_open(rng).ln()).sqrt();
    let theta = TAU * uniform_open(rng);
    Complex64::from_polar(r, theta)
}

/// Unit-RMS intra-cluster offsets: Laplacian quantiles at `(j + ½)/N_r`,
/// symmetric about zero, rescaled to unit RMS. A single ray sits at zero.
pub fn intra_cluster_offsets(rays: usize) -> Vec<f64> {
    if rays <= 1 {
        return vec![0.0; rays];
    }
    let raw: Vec<f64> = (0..rays)
        .map(|j| {
            let u = (j as f64 + 0.5) / rays as f64 - 0.5;
            -u.signum() * (1.0 - 2.0 * u.abs()).ln()
        })
        .collect();
    let rms = (raw.iter().map(|x| x * x).sum::<f64>() / rays as f64).sqrt();
    raw.into_iter().map(|x| x / rms).collect()
}

/// Relative power of each cluster, summing to one.
pub fn cluster_powers(cfg: &ScenarioConfig) -> Vec<f64> {
    let raw: Vec<f64> = (0..cfg.num_clusters)
        .map(|c| match cfg.power_decay {
            PowerDecay::Uniform => 1.0,
            PowerDecay::Exponential => 10f64.powf(-cfg.decay_db_per_cluster * c as f64 / 10.0),
        })
        .collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|p| p / total).collect()
}

/// Draws the paths of user `user` from `rng`.
pub fn draw_user_paths(cfg: &ScenarioConfig, rng: &mut impl RngCore, user: usize) -> PathSet {
    let los_azimuth = -PI + TAU * uniform_open(rng);
    let offsets = intra_cluster_offsets(cfg.rays_per_cluster);
    let powers = cluster_powers(cfg);
    let mut paths = Vec::with_capacity(cfg.paths_per_user());
    for (c, power) in powers.iter().enumerate() {
        let centre = if c == 0 {
            los_azimuth
        } else {
            wrap_angle(los_azimuth + laplace(rng, cfg.cluster_angle_spread))
        };
        let ray_power = power / cfg.rays_per_cluster as f64;
        for offset in &offsets {
            let azimuth = wrap_angle(centre + offset * cfg.intra_cluster_spread);
            let gain = match cfg.normalization {
                GainNormalization::Exact => Complex64::from_polar(ray_power.sqrt(), TAU * uniform_open(rng)),
                GainNormalization::Expected => complex_gaussian(rng) * ray_power.sqrt(),
            };
            paths.push(Path { gain, azimuth });
        }
    }
    let mut set = PathSet {
        user,
        los_azimuth,
        paths,
    };
    if cfg.normalization == GainNormalization::Exact {
        set.normalize();
    }
    set
}

/// Draws all users of one Monte Carlo realisation.
pub fn draw_scenario(cfg: &ScenarioConfig, seed: u64) -> Vec<PathSet> {
    (0..cfg.num_users)
        .map(|k| draw_user_paths(cfg, &mut user_stream(seed, k), k))
        .collect()
}

/// Channel of one user as seen by one array.
#[derive(Debug, Clone, PartialEq)]
pub struct BeamSpaceChannel {
    pub architecture: Architecture,
    /// RAA: per-ray outputs. ULA/UCA: per-element responses.
    pub values: Vec<Complex64>,
    /// Sector whose panel produced `values` (ULA only).
    pub sector: Option<usize>,
}

impl BeamSpaceChannel {
    pub fn energy(&self) -> f64 {
        self.values.iter().map(Complex64::norm_sqr).sum()
    }
}

fn accumulate(acc: &mut [Complex64], gain: Complex64, response: &[Complex64]) {
    for (a, r) in acc.iter_mut().zip(response) {
        *a += gain * r;
    }
}

/// `h = Σ_l α_l · r(φ_l)` over the RAA rays.
pub fn project_raa(paths: &PathSet, raa: &RaaParams, pattern: &ElementPattern) -> BeamSpaceChannel {
    let mut values = vec![Complex64::new(0.0, 0.0); raa.num_rays()];
    for p in &paths.paths {
        let r = raa_response(raa, pattern, p.azimuth, ResponseMethod::ClosedForm);
        accumulate(&mut values, p.gain, &r.values);
    }
    BeamSpaceChannel {
        architecture: Architecture::Raa,
        values,
        sector: None,
    }
}

/// Element-space channel seen by the panel of `sector`.
pub fn project_ula(
    paths: &PathSet,
    ula: &UlaSectorParams,
    pattern: &ElementPattern,
    sector: usize,
) -> BeamSpaceChannel {
    let m = ula.elements_per_array();
    let mut values = vec![Complex64::new(0.0, 0.0); m];
    for p in &paths.paths {
        let rel = ula.relative_angle(p.azimuth, sector);
        let a = ula_response_vector(m, rel);
        accumulate(&mut values, p.gain * pattern.amplitude(rel), &a);
    }
    BeamSpaceChannel {
        architecture: Architecture::Ula,
        values,
        sector: Some(sector),
    }
}

/// Element-space channel of the UCA (isotropic elements).
pub fn project_uca(paths: &PathSet, uca: &UcaParams) -> BeamSpaceChannel {
    let mut values = vec![Complex64::new(0.0, 0.0); uca.num_elements()];
    for p in &paths.paths {
        accumulate(&mut values, p.gain, &uca_response_vector(uca, p.azimuth));
    }
    BeamSpaceChannel {
        architecture: Architecture::Uca,
        values,
        sector: None,
    }
}

/// Sector collecting the most element-pattern-weighted path power.
/// Near-ties (relative 1e-12) go to the lowest sector index.
pub fn assign_sector(paths: &PathSet, ula: &UlaSectorParams, pattern: &ElementPattern) -> usize {
    let mut best = (0usize, f64::NEG_INFINITY);
    for p in 0..ula.num_sectors() {
        let score: f64 = paths
            .paths
            .iter()
            .map(|path| path.gain.norm_sqr() * pattern.gain(ula.relative_angle(path.azimuth, p)))
            .sum();
        if score > best.1 * (1.0 + 1e-12) + f64::MIN_POSITIVE {
            best = (p, score);
        }
    }
    best.0
}
