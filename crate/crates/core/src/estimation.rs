//! Pilot processing and channel estimation.
//!
//! A BS correlates its received pilot block with a UE's pilot sequence,
//! which collapses onto the copilot set: the processed observation is
//! `y = sum_{members} sqrt(p) tau_p h + n` with effective noise covariance
//! `tau_p sigma^2 I`. From `y` the MMSE estimator uses the known link
//! statistics while the LS estimator only rescales. Both estimators'
//! first- and second-order statistics are available in closed form.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use num_complex::Complex64;

use crate::channel::LinkStats;
use crate::error::{Error, Result};

/// Shared statistics of one pilot group at one BS.
///
/// `psi_inv` is the Hermitian positive-definite matrix
/// `sum_{members} p tau_p R + sigma^2 I`; its inverse (applied through the
/// cached Cholesky factorization, never formed explicitly) is the
/// whitening matrix of the processed pilot. `y_bar` is the deterministic
/// part of the observation. All UEs sharing the pilot see the same group
/// statistics.
#[derive(Debug, Clone)]
pub struct PilotGroupStats {
    pub psi_inv: DMatrix<Complex64>,
    pub y_bar: DVector<Complex64>,
    /// Copilot set, ascending UE indices.
    pub members: Vec<usize>,
    /// Transmit power of each member, aligned with `members`.
    pub member_powers: Vec<f64>,
    pub tau_p: f64,
    pub sigma2: f64,
    chol: Cholesky<Complex64, Dyn>,
    tr_psi_inv: f64,
}

impl PilotGroupStats {
    pub fn antennas(&self) -> usize {
        self.y_bar.len()
    }

    pub fn contains(&self, ue: usize) -> bool {
        self.members.binary_search(&ue).is_ok()
    }

    /// Power of member `ue`.
    pub fn power_of(&self, ue: usize) -> Option<f64> {
        self.members
            .binary_search(&ue)
            .ok()
            .map(|i| self.member_powers[i])
    }

    /// Applies the whitening matrix to a vector via a Hermitian solve.
    pub fn apply_psi(&self, v: &DVector<Complex64>) -> DVector<Complex64> {
        self.chol.solve(v)
    }

    /// Applies the whitening matrix to every column of `m`.
    pub fn apply_psi_mat(&self, m: &DMatrix<Complex64>) -> DMatrix<Complex64> {
        self.chol.solve(m)
    }

    /// Trace of `psi_inv` (real by construction).
    pub fn tr_psi_inv(&self) -> f64 {
        self.tr_psi_inv
    }
}

/// Builds the pilot-group statistics from the member links.
///
/// `member_links[i]` and `member_powers[i]` describe the UE
/// `members[i]`; `members` must be sorted ascending.
pub fn psi_matrix(
    member_links: &[&LinkStats],
    member_powers: &[f64],
    members: Vec<usize>,
    tau_p: usize,
    sigma2: f64,
) -> Result<PilotGroupStats> {
    if member_links.is_empty() || member_links.len() != member_powers.len()
        || member_links.len() != members.len()
    {
        return Err(Error::InvalidArgument(
            "pilot group needs aligned non-empty members/links/powers".into(),
        ));
    }
    if members.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument(
            "pilot group members must be sorted ascending".into(),
        ));
    }
    if !(sigma2 > 0.0) {
        return Err(Error::InvalidConfiguration(
            "noise power must be positive (a singular whitening matrix is rejected)".into(),
        ));
    }
    let m = member_links[0].antennas();
    let tau = tau_p as f64;
    let mut psi_inv = DMatrix::<Complex64>::identity(m, m) * Complex64::new(sigma2, 0.0);
    let mut y_bar = DVector::<Complex64>::zeros(m);
    for (link, &p) in member_links.iter().zip(member_powers) {
        if link.antennas() != m {
            return Err(Error::InvalidArgument(
                "pilot group links must share the antenna count".into(),
            ));
        }
        psi_inv += link.cov.scale(p * tau);
        y_bar += link.mean.scale(p.sqrt() * tau);
    }
    let tr_psi_inv = psi_inv.diagonal().iter().map(|z| z.re).sum();
    let chol = Cholesky::new(psi_inv.clone()).ok_or_else(|| {
        Error::Internal("pilot-group matrix is not positive definite".into())
    })?;
    Ok(PilotGroupStats {
        psi_inv,
        y_bar,
        members,
        member_powers: member_powers.to_vec(),
        tau_p: tau,
        sigma2,
        chol,
        tr_psi_inv,
    })
}

/// Processed received pilot: `sum_members sqrt(p) tau_p h + noise`.
///
/// `member_channels` must align with `group.members`; `noise` is the
/// effective noise draw with covariance `tau_p sigma^2 I`.
pub fn processed_pilot(
    group: &PilotGroupStats,
    member_channels: &[DVector<Complex64>],
    noise: &DVector<Complex64>,
) -> Result<DVector<Complex64>> {
    let m = group.antennas();
    if member_channels.len() != group.members.len() {
        return Err(Error::InvalidArgument(format!(
            "expected {} member channels, got {}",
            group.members.len(),
            member_channels.len()
        )));
    }
    if noise.len() != m || member_channels.iter().any(|h| h.len() != m) {
        return Err(Error::InvalidArgument(
            "pilot observation dimension mismatch".into(),
        ));
    }
    let mut y = noise.clone();
    for (h, &p) in member_channels.iter().zip(&group.member_powers) {
        y += h.scale(p.sqrt() * group.tau_p);
    }
    Ok(y)
}

/// First/second-order description of an estimator output.
#[derive(Debug, Clone)]
pub struct EstimateStats {
    pub mean: DVector<Complex64>,
    pub cov: DMatrix<Complex64>,
    pub error_mean: DVector<Complex64>,
    pub error_cov: DMatrix<Complex64>,
}

/// MMSE channel estimate `h_bar + sqrt(p) R Psi (y - y_bar)`.
pub fn mmse_estimate(
    target_ue: usize,
    target: &LinkStats,
    power: f64,
    group: &PilotGroupStats,
    y: &DVector<Complex64>,
) -> Result<DVector<Complex64>> {
    if !group.contains(target_ue) {
        return Err(Error::InvalidArgument(format!(
            "UE {target_ue} is not in this pilot group"
        )));
    }
    if y.len() != group.antennas() || target.antennas() != group.antennas() {
        return Err(Error::InvalidArgument(
            "estimate dimension mismatch".into(),
        ));
    }
    let innovation = group.apply_psi(&(y - &group.y_bar));
    Ok(&target.mean + (&target.cov * innovation).scale(power.sqrt()))
}

/// MMSE error covariance `C = R - p tau_p R Psi R` and its trace (the
/// per-link MSE).
pub fn mmse_error_cov(
    target: &LinkStats,
    power: f64,
    group: &PilotGroupStats,
) -> Result<(DMatrix<Complex64>, f64)> {
    let x = group.apply_psi_mat(&target.cov);
    let c = &target.cov - (&target.cov * &x).scale(power * group.tau_p);
    let mse = c.diagonal().iter().map(|z| z.re).sum();
    Ok((c, mse))
}

/// Distribution of the MMSE estimate and its error: the estimate is
/// `CN(h_bar, R - C)`, the error an independent `CN(0, C)`.
pub fn mmse_estimate_stats(
    target: &LinkStats,
    power: f64,
    group: &PilotGroupStats,
) -> Result<EstimateStats> {
    let (c, _) = mmse_error_cov(target, power, group)?;
    Ok(EstimateStats {
        mean: target.mean.clone(),
        cov: &target.cov - &c,
        error_mean: DVector::zeros(target.antennas()),
        error_cov: c,
    })
}

/// LS channel estimate `y / (sqrt(p) tau_p)`.
pub fn ls_estimate(y: &DVector<Complex64>, power: f64, tau_p: usize) -> DVector<Complex64> {
    y.scale(1.0 / (power.sqrt() * tau_p as f64))
}

/// Distribution of the LS estimate and its (correlated) error:
/// the estimate is `CN(y_bar/(sqrt(p) tau_p), psi_inv/(p tau_p))`, the
/// error `CN(h_bar - y_bar/(sqrt(p) tau_p), psi_inv/(p tau_p) - R)`.
pub fn ls_estimate_stats(
    target: &LinkStats,
    power: f64,
    group: &PilotGroupStats,
) -> Result<EstimateStats> {
    let scale = 1.0 / (power * group.tau_p);
    let mean = group.y_bar.scale(1.0 / (power.sqrt() * group.tau_p));
    let cov = group.psi_inv.scale(scale);
    Ok(EstimateStats {
        error_mean: &target.mean - &mean,
        error_cov: &cov - &target.cov,
        mean,
        cov,
    })
}
