//! Global system parameters of the cellular network.

use serde::{Deserialize, Serialize};

use crate::channel::dbm_to_mw;
use crate::error::{Error, Result};

/// Scalar parameters shared by every cell: array size, cell load, coherence
/// block split, transmit/noise powers and the angular spread of the local
/// scattering model. Powers are linear (mW).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemConfig {
    /// BS antennas per cell (M).
    pub antennas: usize,
    /// UEs per cell (K).
    pub ues_per_cell: usize,
    /// Number of cells (L); must be a perfect square for the grid layout.
    pub cells: usize,
    /// Coherence block length in samples.
    pub coherence_len: usize,
    /// Pilot length in samples (also the number of orthogonal pilots).
    pub pilot_len: usize,
    /// UL transmit power per UE, mW.
    pub ul_power_mw: f64,
    /// Total receiver noise power, mW.
    pub noise_mw: f64,
    /// Angular standard deviation of local scattering, degrees.
    pub asd_deg: f64,
    /// Channel bandwidth, Hz (informational only).
    pub bandwidth_hz: f64,
}

impl SystemConfig {
    /// The 16-cell baseline: M=100, K=10, 200-sample blocks with 10 pilots,
    /// 10 dBm per UE, -94 dBm noise, 10 degree angular spread.
    pub fn paper_defaults() -> Self {
        SystemConfig {
            antennas: 100,
            ues_per_cell: 10,
            cells: 16,
            coherence_len: 200,
            pilot_len: 10,
            ul_power_mw: 10.0,
            noise_mw: dbm_to_mw(-94.0),
            asd_deg: 10.0,
            bandwidth_hz: 20e6,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.antennas == 0 {
            return Err(Error::InvalidConfiguration("antennas must be >= 1".into()));
        }
        if self.ues_per_cell == 0 || self.cells == 0 {
            return Err(Error::InvalidConfiguration(
                "ues_per_cell and cells must be >= 1".into(),
            ));
        }
        if self.pilot_len < self.ues_per_cell {
            return Err(Error::InvalidConfiguration(format!(
                "pilot_len ({}) must be >= ues_per_cell ({}) for orthogonal intra-cell pilots",
                self.pilot_len, self.ues_per_cell
            )));
        }
        if self.coherence_len <= self.pilot_len {
            return Err(Error::InvalidConfiguration(format!(
                "coherence_len ({}) must exceed pilot_len ({})",
                self.coherence_len, self.pilot_len
            )));
        }
        if !(self.ul_power_mw > 0.0) || !self.ul_power_mw.is_finite() {
            return Err(Error::InvalidConfiguration(
                "ul_power_mw must be positive and finite".into(),
            ));
        }
        if !(self.noise_mw > 0.0) || !self.noise_mw.is_finite() {
            return Err(Error::InvalidConfiguration(
                "noise_mw must be positive and finite".into(),
            ));
        }
        if self.asd_deg < 0.0 || !self.asd_deg.is_finite() {
            return Err(Error::InvalidConfiguration(
                "asd_deg must be non-negative and finite".into(),
            ));
        }
        Ok(())
    }

    /// Samples left for UL data in each coherence block.
    pub fn data_len(&self) -> usize {
        self.coherence_len - self.pilot_len
    }

    /// Pre-log factor of the SE expression.
    pub fn prelog(&self) -> f64 {
        self.data_len() as f64 / self.coherence_len as f64
    }

    /// Angular standard deviation in radians.
    pub fn asd_rad(&self) -> f64 {
        self.asd_deg.to_radians()
    }

    /// Total number of UEs in the network.
    pub fn total_ues(&self) -> usize {
        self.cells * self.ues_per_cell
    }

    /// Copy with a different antenna count (used by antenna sweeps).
    pub fn with_antennas(&self, antennas: usize) -> Self {
        SystemConfig {
            antennas,
            ..self.clone()
        }
    }
}
