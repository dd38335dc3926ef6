//! Full-angle ray antenna array (RAA) and omnicell link-level simulation.
//!
//! The crate models three base-station architectures that serve a full
//! 360° azimuth:
//!
//! - a full-angle RAA, where `N` hard-wired uniform linear sub-arrays
//!   ("rays") fan out from a common centre and beams are steered purely by
//!   switching rays onto RF chains,
//! - a three-sector ULA panel set using DFT-codebook hybrid beamforming,
//! - a uniform circular array (UCA) using a parametric codebook.
//!
//! Modules are layered bottom-up: [`geometry`] builds the arrays,
//! [`pattern`] evaluates element gains, array responses and codebooks,
//! [`channel`] draws clustered multipath users and projects them into each
//! architecture's branch space, [`selection`] solves the RF-chain assignment
//! with MMSE baseband combining, and [`cost`] reproduces the hardware cost
//! comparison.
//!
//! # Angle conventions
//!
//! Ray orientations `η_n` are measured from the positive y axis while plane
//! wave angles of arrival `φ` are measured from the positive x axis. With
//! this pairing a ray with orientation `η` has its broadside peak at
//! `φ = η`. See [`geometry::ray_orientation_to_heading`] for converting a
//! ray orientation into the physical heading of the ray line.

pub mod channel;
pub mod cost;
mod error;
pub mod geometry;
pub mod pattern;
pub mod selection;

pub use error::{Error, Result};
pub use num_complex::Complex64;

use serde::{Deserialize, Serialize};

/// The three base-station architectures compared by the simulator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Architecture {
    /// Full-angle ray antenna array (omnicell).
    Raa,
    /// Three-sector ULA with DFT-codebook hybrid beamforming.
    Ula,
    /// Uniform circular array with a parametric codebook.
    Uca,
}

impl Architecture {
    pub const ALL: [Architecture; 3] = [Architecture::Raa, Architecture::Ula, Architecture::Uca];

    pub fn name(self) -> &'static str {
        match self {
            Architecture::Raa => "raa",
            Architecture::Ula => "ula",
            Architecture::Uca => "uca",
        }
    }
}

impl std::fmt::Display for Architecture {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Architecture {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "raa" | "omnicell" => Ok(Architecture::Raa),
            "ula" | "ula_hbf" => Ok(Architecture::Ula),
            "uca" => Ok(Architecture::Uca),
            other => Err(Error::InvalidParameter(format!(
                "unknown architecture `{other}` (expected raa, ula or uca)"
            ))),
        }
    }
}
