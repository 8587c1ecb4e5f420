//! Per-link channel statistics.
//!
//! Every BS-UE link is described by a deterministic LoS mean vector plus a
//! Hermitian PSD covariance matrix for the NLoS scattering. Large-scale
//! gains follow the 3GPP urban path-loss curves with log-normal shadowing,
//! the array response is a half-wavelength ULA, and the NLoS spatial
//! correlation uses the Gaussian local scattering model.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::config::SystemConfig;
use crate::error::{Error, Result};

/// Shadow-fading standard deviation applied to the LoS gain, dB.
pub const LOS_SHADOW_STD_DB: f64 = 4.0;
/// Shadow-fading standard deviation applied to the NLoS gain, dB.
pub const NLOS_SHADOW_STD_DB: f64 = 10.0;

/// Whether links keep their LoS component or have it blocked.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FadingMode {
    /// LoS mean plus correlated NLoS scattering.
    Rician,
    /// LoS blocked: zero mean, identical NLoS covariance.
    Rayleigh,
}

impl FadingMode {
    pub fn label(&self) -> &'static str {
        match self {
            FadingMode::Rician => "rician",
            FadingMode::Rayleigh => "rayleigh",
        }
    }
}

/// First- and second-order statistics of one BS-UE link.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkStats {
    /// LoS component (zero vector in Rayleigh mode).
    pub mean: DVector<Complex64>,
    /// NLoS spatial correlation matrix, Hermitian PSD.
    pub cov: DMatrix<Complex64>,
    /// Shadow-inclusive LoS large-scale gain, dB.
    pub beta_los_db: f64,
    /// Shadow-inclusive NLoS large-scale gain, dB.
    pub beta_nlos_db: f64,
    /// Nominal angle seen from the BS, radians.
    pub angle_rad: f64,
}

impl LinkStats {
    pub fn antennas(&self) -> usize {
        self.mean.len()
    }

    /// Same covariance with the LoS component blocked.
    pub fn blocked_los(&self) -> LinkStats {
        LinkStats {
            mean: DVector::zeros(self.mean.len()),
            ..self.clone()
        }
    }

    /// Trace of the covariance (total NLoS gain over the array); real by
    /// construction.
    pub fn cov_trace(&self) -> f64 {
        self.cov.diagonal().iter().map(|z| z.re).sum()
    }
}

/// Converts a dB value to linear scale.
pub fn db_to_linear(x_db: f64) -> f64 {
    10f64.powf(x_db / 10.0)
}

/// Converts a linear value to dB.
pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

/// Converts dBm to mW (same mapping as [`db_to_linear`], distinct name for
/// call-site clarity).
pub fn dbm_to_mw(x_dbm: f64) -> f64 {
    10f64.powf(x_dbm / 10.0)
}

/// ULA array response for half-wavelength spacing: entry m is
/// `exp(i*pi*m*sin(angle))`.
pub fn ula_steering(angle_rad: f64, antennas: usize) -> Result<DVector<Complex64>> {
    if antennas == 0 {
        return Err(Error::InvalidArgument(
            "steering vector needs at least one antenna".into(),
        ));
    }
    if !angle_rad.is_finite() {
        return Err(Error::InvalidArgument("angle must be finite".into()));
    }
    let phase = std::f64::consts::PI * angle_rad.sin();
    Ok(DVector::from_fn(antennas, |m, _| {
        Complex64::from_polar(1.0, phase * m as f64)
    }))
}

/// LoS path loss in dB: `-30.18 - 26 log10(d) + shadow`.
pub fn pathloss_los(distance_m: f64, shadow_db: f64) -> Result<f64> {
    if !(distance_m > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "distance must be positive, got {distance_m}"
        )));
    }
    Ok(-30.18 - 26.0 * distance_m.log10() + shadow_db)
}

/// NLoS path loss in dB: `-34.53 - 38 log10(d) + shadow`.
pub fn pathloss_nlos(distance_m: f64, shadow_db: f64) -> Result<f64> {
    if !(distance_m > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "distance must be positive, got {distance_m}"
        )));
    }
    Ok(-34.53 - 38.0 * distance_m.log10() + shadow_db)
}

/// Gaussian local scattering covariance. Entry (s,m) is
/// `beta * exp(i*pi*(s-m)*sin(angle)) * exp(-asd^2/2 * (pi*(s-m)*cos(angle))^2)`.
///
/// The matrix is Toeplitz-Hermitian, so only `antennas` distinct lags are
/// evaluated.
pub fn local_scattering_cov(
    beta_nlos_linear: f64,
    angle_rad: f64,
    asd_rad: f64,
    antennas: usize,
) -> DMatrix<Complex64> {
    let sin_phi = angle_rad.sin();
    let cos_phi = angle_rad.cos();
    let lags: Vec<Complex64> = (0..antennas)
        .map(|d| {
            let d = d as f64;
            let gauss = (-0.5 * asd_rad * asd_rad
                * (std::f64::consts::PI * d * cos_phi).powi(2))
            .exp();
            Complex64::from_polar(beta_nlos_linear * gauss, std::f64::consts::PI * d * sin_phi)
        })
        .collect();
    DMatrix::from_fn(antennas, antennas, |s, m| {
        if s >= m {
            lags[s - m]
        } else {
            lags[m - s].conj()
        }
    })
}

/// Assembles the statistics of one link from its geometry: `shadow_z` is a
/// standard-normal draw shared between the LoS and NLoS shadow terms (scaled
/// by their respective standard deviations).
pub fn build_link_stats(
    cfg: &SystemConfig,
    distance_m: f64,
    angle_rad: f64,
    shadow_z: f64,
    mode: FadingMode,
) -> Result<LinkStats> {
    let beta_los_db = pathloss_los(distance_m, LOS_SHADOW_STD_DB * shadow_z)?;
    let beta_nlos_db = pathloss_nlos(distance_m, NLOS_SHADOW_STD_DB * shadow_z)?;
    // dB -> linear exactly once per link.
    let beta_los = db_to_linear(beta_los_db);
    let beta_nlos = db_to_linear(beta_nlos_db);
    let cov = local_scattering_cov(beta_nlos, angle_rad, cfg.asd_rad(), cfg.antennas);
    let mean = match mode {
        FadingMode::Rician => ula_steering(angle_rad, cfg.antennas)?.scale(beta_los.sqrt()),
        FadingMode::Rayleigh => DVector::zeros(cfg.antennas),
    };
    Ok(LinkStats {
        mean,
        cov,
        beta_los_db,
        beta_nlos_db,
        angle_rad,
    })
}
