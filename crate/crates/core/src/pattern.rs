//! Element patterns, array responses and codebooks.
//!
//! All relative angles are wrapped to `(-π, π]` before the element pattern
//! is evaluated.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::geometry::{ray_spacing, wrap_angle, RaaParams, UcaParams};
use crate::{Architecture, Error, Result};

/// Below this `|sin x|` the Dirichlet ratio switches to its limit value.
pub const DIRICHLET_SINGULAR_EPS: f64 = 1e-10;

/// Guards `floor` for codebook sizes that should be integral.
const COUNT_EPS: f64 = 1e-9;

/// Radiation pattern of a single antenna element.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ElementPattern {
    Isotropic,
    /// Parabolic-in-dB pattern `-min(12 (ζ/ζ_3dB)², A_max)`.
    Directional3gpp {
        #[serde(default = "default_beamwidth")]
        beamwidth_3db_rad: f64,
        #[serde(default = "default_max_attenuation")]
        max_attenuation_db: f64,
    },
}

fn default_beamwidth() -> f64 {
    65f64.to_radians()
}

fn default_max_attenuation() -> f64 {
    30.0
}

impl Default for ElementPattern {
    fn default() -> Self {
        ElementPattern::directional()
    }
}

impl ElementPattern {
    /// 3GPP directional element: 65° half-power beamwidth, 30 dB floor.
    pub fn directional() -> Self {
        ElementPattern::Directional3gpp {
            beamwidth_3db_rad: default_beamwidth(),
            max_attenuation_db: default_max_attenuation(),
        }
    }

    /// Gain in dB relative to boresight at relative angle `zeta`.
    pub fn gain_db(&self, zeta: f64) -> f64 {
        match *self {
            ElementPattern::Isotropic => 0.0,
            ElementPattern::Directional3gpp {
                beamwidth_3db_rad,
                max_attenuation_db,
            } => {
                let ratio = wrap_angle(zeta) / beamwidth_3db_rad;
                -(12.0 * ratio * ratio).min(max_attenuation_db)
            }
        }
    }

    /// Linear power gain.
    pub fn gain(&self, zeta: f64) -> f64 {
        match self {
            ElementPattern::Isotropic => 1.0,
            _ => 10f64.powf(self.gain_db(zeta) / 10.0),
        }
    }

    /// Field amplitude, `sqrt(gain)`.
    pub fn amplitude(&self, zeta: f64) -> f64 {
        self.gain(zeta).sqrt()
    }
}

/// `sin(M x) / sin(x)` with its removable singularities at `x = kπ`.
pub fn dirichlet(m: usize, x: f64) -> f64 {
    let mf = m as f64;
    let s = x.sin();
    if s.abs() < DIRICHLET_SINGULAR_EPS {
        let k = (x / PI).round();
        let delta = x - k * PI;
        let sign = if (k as i64 * (m as i64 - 1)) % 2 == 0 {
            1.0
        } else {
            -1.0
        };
        sign * mf * (1.0 - (mf * mf - 1.0) * delta * delta / 6.0)
    } else {
        (mf * x).sin() / s
    }
}

/// Response of an `M`-element half-wavelength sULA to relative angle `zeta`:
/// entry `m` (0-based) is `exp(jπ m sin ζ)`.
pub fn sula_response_vector(m: usize, zeta: f64) -> Vec<Complex64> {
    let step = PI * zeta.sin();
    (0..m)
        .map(|i| Complex64::from_polar(1.0, step * i as f64))
        .collect()
}

/// Complex response of the first element on ray `n`: element amplitude
/// times the propagation phase over the central distance.
pub fn raa_first_element_factor(raa: &RaaParams, pattern: &ElementPattern, phi: f64, n: i64) -> Complex64 {
    let zeta = wrap_angle(phi - raa.orientation(n));
    let phase = TAU / raa.wavelength() * raa.central_distance() * zeta.sin();
    Complex64::from_polar(pattern.amplitude(zeta), phase)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ResponseMethod {
    /// Dirichlet-kernel closed form.
    #[default]
    ClosedForm,
    /// Explicit element-by-element summation.
    BruteForce,
}

/// Per-branch complex output of an architecture for one plane wave.
#[derive(Debug, Clone, PartialEq)]
pub struct ResponseEvaluation {
    pub architecture: Architecture,
    pub aoa: f64,
    pub values: Vec<Complex64>,
}

impl ResponseEvaluation {
    pub fn branch_count(&self) -> usize {
        self.values.len()
    }

    pub fn magnitudes(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.norm()).collect()
    }

    /// Largest magnitude over branches.
    pub fn envelope(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }
}

/// Output of a single ray (0-based slot) for AoA `phi`.
pub fn raa_ray_response(
    raa: &RaaParams,
    pattern: &ElementPattern,
    phi: f64,
    slot: usize,
    method: ResponseMethod,
) -> Complex64 {
    let n = raa.ray_index(slot);
    let m = raa.elements_per_ray();
    let zeta = wrap_angle(phi - raa.orientation(n));
    let first = raa_first_element_factor(raa, pattern, phi, n);
    match method {
        ResponseMethod::ClosedForm => {
            let s = zeta.sin();
            let half = FRAC_PI_2 * s;
            let kernel = dirichlet(m, half);
            first * Complex64::from_polar(kernel, (m as f64 - 1.0) * half)
        }
        ResponseMethod::BruteForce => {
            let sum: Complex64 = sula_response_vector(m, zeta).into_iter().sum();
            first * sum
        }
    }
}

/// Outputs of all `N` rays for a plane wave from `phi`, in slot order.
pub fn raa_response(
    raa: &RaaParams,
    pattern: &ElementPattern,
    phi: f64,
    method: ResponseMethod,
) -> ResponseEvaluation {
    let values = (0..raa.num_rays())
        .map(|slot| raa_ray_response(raa, pattern, phi, slot, method))
        .collect();
    ResponseEvaluation {
        architecture: Architecture::Raa,
        aoa: phi,
        values,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CodebookKind {
    DftUla,
    ParametricUca,
}

/// Analog beamforming codebook. Column `j` of `codewords` is the steering
/// vector towards `target_angles[j]`; beams are formed as `Aᴴ·a(φ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Codebook {
    pub kind: CodebookKind,
    /// Column-major: `codewords[j]` is codeword `j`.
    pub codewords: Vec<Vec<Complex64>>,
    /// Target angles in the array's own frame.
    pub target_angles: Vec<f64>,
}

impl Codebook {
    pub fn num_codewords(&self) -> usize {
        self.codewords.len()
    }

    pub fn num_elements(&self) -> usize {
        self.codewords.first().map_or(0, Vec::len)
    }

    /// `Aᴴ·v` for an element-space vector `v`.
    pub fn project(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(v.len(), self.num_elements(), "element count mismatch");
        self.codewords
            .iter()
            .map(|w| w.iter().zip(v).map(|(a, b)| a.conj() * b).sum())
            .collect()
    }

    /// Squared norm of every codeword (its combining gain).
    pub fn codeword_gains(&self) -> Vec<f64> {
        self.codewords
            .iter()
            .map(|w| w.iter().map(Complex64::norm_sqr).sum())
            .collect()
    }
}

/// ULA steering vector for a boresight-relative angle.
pub fn ula_response_vector(m: usize, phi: f64) -> Vec<Complex64> {
    sula_response_vector(m, phi)
}

/// Number of DFT codewords for an `M`-element ULA covering `±halfwidth`:
/// odd, symmetric, target sines `2/M` apart.
pub fn dft_codebook_size(m: usize, sector_halfwidth: f64) -> usize {
    let half = (m as f64 * sector_halfwidth.sin() / 2.0 + COUNT_EPS).floor() as usize;
    2 * half + 1
}

pub fn build_dft_codebook(m: usize, sector_halfwidth: f64) -> Result<Codebook> {
    if m < 2 {
        return Err(Error::InvalidParameter(format!(
            "DFT codebook needs at least 2 elements, got {m}"
        )));
    }
    if !(sector_halfwidth > 0.0 && sector_halfwidth <= FRAC_PI_2 + 1e-12) {
        return Err(Error::InvalidParameter(format!(
            "sector halfwidth must lie in (0, π/2], got {sector_halfwidth}"
        )));
    }
    let count = dft_codebook_size(m, sector_halfwidth);
    let centre = (count as i64 - 1) / 2;
    let step = 2.0 / m as f64;
    let target_angles: Vec<f64> = (0..count as i64)
        .map(|i| ((i - centre) as f64 * step).clamp(-1.0, 1.0).asin())
        .collect();
    let codewords = target_angles.iter().map(|&t| ula_response_vector(m, t)).collect();
    Ok(Codebook {
        kind: CodebookKind::DftUla,
        codewords,
        target_angles,
    })
}

/// Target sines of a DFT codebook.
pub fn dft_target_sines(codebook: &Codebook) -> Vec<f64> {
    codebook.target_angles.iter().map(|t| t.sin()).collect()
}

/// HBF output of one ULA panel for a boresight-relative angle `phi_rel`:
/// `sqrt(G(φ')) · sin(πM(sin φ' − sin φ_n)/2) / sin(π(sin φ' − sin φ_n)/2)`.
pub fn ula_hbf_response_relative(
    m: usize,
    codebook: &Codebook,
    pattern: &ElementPattern,
    phi_rel: f64,
) -> Vec<f64> {
    let phi_rel = wrap_angle(phi_rel);
    let amp = pattern.amplitude(phi_rel);
    let s = phi_rel.sin();
    codebook
        .target_angles
        .iter()
        .map(|t| amp * dirichlet(m, FRAC_PI_2 * (s - t.sin())))
        .collect()
}

/// HBF output of sector `sector` for a global AoA `phi`.
pub fn ula_hbf_response(
    ula: &crate::geometry::UlaSectorParams,
    codebook: &Codebook,
    pattern: &ElementPattern,
    phi: f64,
    sector: usize,
) -> ResponseEvaluation {
    let rel = ula.relative_angle(phi, sector);
    let values = ula_hbf_response_relative(ula.elements_per_array(), codebook, pattern, rel)
        .into_iter()
        .map(|v| Complex64::new(v, 0.0))
        .collect();
    ResponseEvaluation {
        architecture: Architecture::Ula,
        aoa: phi,
        values,
    }
}

/// UCA steering vector. Entry `n` carries the phase of element `n` relative
/// to element 1, `(4π/λ)·a·sin((2φ − φ_1 − φ_n)/2)·sin((φ_n − φ_1)/2)`.
pub fn uca_response_vector(uca: &UcaParams, phi: f64) -> Vec<Complex64> {
    let k = 4.0 * PI / uca.wavelength() * uca.radius();
    let first = uca.orientations()[0];
    uca.orientations()
        .iter()
        .map(|&phi_n| {
            let phase = k * ((2.0 * phi - (first + phi_n)) / 2.0).sin() * ((phi_n - first) / 2.0).sin();
            Complex64::from_polar(1.0, phase)
        })
        .collect()
}

/// Options for the parametric UCA codebook.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParametricCodebookOptions {
    /// Target-angle step `χ`.
    pub spacing: f64,
    pub num_codewords: usize,
    /// First target angle; defaults to `-π + χ/2`.
    pub first_target: Option<f64>,
    /// Keep only the elements facing each codeword's target.
    pub semicircle: bool,
}

impl ParametricCodebookOptions {
    /// Full-circle codebook with the RAA's ray spacing `arcsin(2/M)`.
    pub fn matching_raa(elements_per_ray: usize) -> Self {
        let spacing = ray_spacing(elements_per_ray);
        ParametricCodebookOptions {
            spacing,
            num_codewords: full_circle_codewords(spacing),
            first_target: None,
            semicircle: false,
        }
    }
}

/// `⌊2π/χ⌋`.
pub fn full_circle_codewords(spacing: f64) -> usize {
    (TAU / spacing + COUNT_EPS).floor() as usize
}

pub fn build_parametric_codebook(uca: &UcaParams, options: &ParametricCodebookOptions) -> Result<Codebook> {
    let chi = options.spacing;
    if !(chi.is_finite() && chi > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "codeword spacing must be positive, got {chi}"
        )));
    }
    if options.num_codewords == 0 {
        return Err(Error::InvalidParameter(
            "codebook needs at least one codeword".into(),
        ));
    }
    if options.num_codewords as f64 * chi > TAU + chi + 1e-9 {
        return Err(Error::InvalidParameter(format!(
            "{} codewords spaced {chi} rad wrap past the full circle",
            options.num_codewords
        )));
    }
    let start = options.first_target.unwrap_or(-PI + 0.5 * chi);
    let target_angles: Vec<f64> = (0..options.num_codewords)
        .map(|i| wrap_angle(start + i as f64 * chi))
        .collect();
    let codewords = target_angles
        .iter()
        .map(|&target| {
            let mut w = uca_response_vector(uca, target);
            if options.semicircle {
                for (entry, phi_n) in w.iter_mut().zip(uca.orientations()) {
                    if wrap_angle(target - phi_n).abs() > FRAC_PI_2 {
                        *entry = Complex64::new(0.0, 0.0);
                    }
                }
            }
            w
        })
        .collect();
    Ok(Codebook {
        kind: CodebookKind::ParametricUca,
        codewords,
        target_angles,
    })
}

/// `sqrt(G(φ))·Aᴴ·a(φ)` for the UCA.
pub fn uca_response(
    uca: &UcaParams,
    codebook: &Codebook,
    pattern: &ElementPattern,
    phi: f64,
) -> ResponseEvaluation {
    let amp = pattern.amplitude(phi);
    let values = codebook
        .project(&uca_response_vector(uca, phi))
        .into_iter()
        .map(|v| v * amp)
        .collect();
    ResponseEvaluation {
        architecture: Architecture::Uca,
        aoa: phi,
        values,
    }
}

/// Uniform grid of `points` angles over `(-π, π]`; the last point is `π`.
pub fn angle_grid(points: usize) -> Vec<f64> {
    (1..=points)
        .map(|i| -PI + TAU * i as f64 / points as f64)
        .collect()
}
