//! Closed-form uplink SINR and SE under MR combining.
//!
//! For a target UE the effective SINR needs only the first and second
//! moments of `v^H h` over the channel ensemble. With MR combining based on
//! either the MMSE or the LS estimate, every moment reduces to traces and
//! quadratic forms of the link covariances, the pilot-group whitening
//! matrix and the LoS means. Each SINR is assembled twice, once from the
//! normalized interference terms and once from the raw moments, and the two
//! routes must agree to 1e-10; a mismatch signals a transcription bug and
//! raises an internal error. Analytically real quantities are checked for
//! imaginary residue before the imaginary part is discarded.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::channel::LinkStats;
use crate::config::SystemConfig;
use crate::error::{Error, Result};
use crate::estimation::{psi_matrix, PilotGroupStats};

/// Maximum tolerated imaginary residue, relative to the term magnitude.
const IM_RESIDUE_REL: f64 = 1e-9;
/// Maximum tolerated relative gap between the two SINR assembly routes.
const ROUTE_EQUIV_REL: f64 = 1e-10;

/// Discards the imaginary part of an analytically real quantity; `scale`
/// is the accumulated term magnitude the residue is compared against.
fn re_checked(z: Complex64, scale: f64) -> Result<f64> {
    if z.im.abs() <= IM_RESIDUE_REL * z.re.abs().max(scale) {
        Ok(z.re)
    } else {
        Err(Error::Internal(format!(
            "imaginary residue {:e} exceeds {IM_RESIDUE_REL:e} of scale {:e}",
            z.im,
            z.re.abs().max(scale)
        )))
    }
}

/// Frobenius inner product `sum conj(a) .* b` together with the L1
/// magnitude of the summands (the natural scale for cancellation checks).
/// Equals `tr(A B)` whenever `A` is Hermitian.
fn frob_inner_mag(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> (Complex64, f64) {
    debug_assert_eq!(a.shape(), b.shape());
    let mut re = 0.0;
    let mut im = 0.0;
    let mut mag = 0.0;
    for (x, y) in a.as_slice().iter().zip(b.as_slice()) {
        let pr = x.re * y.re + x.im * y.im;
        let pi = x.re * y.im - x.im * y.re;
        re += pr;
        im += pi;
        mag += pr.abs() + pi.abs();
    }
    (Complex64::new(re, im), mag)
}

/// `tr(A B)` for Hermitian `A`, checked real.
fn trace_prod(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> Result<f64> {
    let (z, mag) = frob_inner_mag(a, b);
    re_checked(z, mag)
}

/// `v^H A v` for Hermitian `A`, checked real.
fn hermitian_quad(a: &DMatrix<Complex64>, v: &DVector<Complex64>) -> Result<f64> {
    let u = a * v;
    let z = v.dotc(&u);
    re_checked(z, v.norm() * u.norm())
}

/// SE from an effective SINR: prelog times `log2(1 + sinr)`.
pub fn se_from_sinr(sinr: f64, cfg: &SystemConfig) -> f64 {
    cfg.prelog() * (1.0 + sinr).log2()
}

/// SINR decomposition for MR combining on the MMSE estimate.
#[derive(Debug, Clone)]
pub struct SinrBreakdownMmse {
    /// Numerator: `p^2 tau_p tr(R Psi R) + p ||h_bar||^2`.
    pub signal: f64,
    /// Non-coherent interference per interferer (normalized), full UE list.
    pub xi: Vec<f64>,
    /// Coherent interference per copilot UE excluding the target.
    pub gamma_coh: Vec<(usize, f64)>,
    /// Self-term subtracted in the denominator.
    pub nu: f64,
    /// Noise power.
    pub noise: f64,
    pub sinr: f64,
    pub se: f64,
}

/// SINR decomposition for MR combining on the LS estimate.
#[derive(Debug, Clone)]
pub struct SinrBreakdownLs {
    /// Mean of `v^H h` for the target; complex because copilot LoS inner
    /// products are complex. Only `|eta|^2` enters the SINR.
    pub eta: Complex64,
    /// Mean of `||v||^2`; strictly positive.
    pub mu: f64,
    /// Second moment `E|v^H h|^2` per interferer, full UE list.
    pub chi: Vec<f64>,
    /// Noise power.
    pub noise: f64,
    pub sinr: f64,
    pub se: f64,
}

/// Per-target work shared by the signal moment and every interference term.
struct MmseTargetCache {
    /// `Psi R_t`.
    x: DMatrix<Complex64>,
    /// `R_t Psi R_t`, Hermitian.
    b: DMatrix<Complex64>,
    /// `p tau_p tr(R_t Psi R_t) + ||h_bar_t||^2` (the common moment value).
    d: f64,
    mean_norm2: f64,
}

fn mmse_target_cache(
    target: &LinkStats,
    target_power: f64,
    group: &PilotGroupStats,
) -> Result<MmseTargetCache> {
    let x = group.apply_psi_mat(&target.cov);
    let b = &target.cov * &x;
    let tr_rpsir = trace_prod(&target.cov, &x)?;
    let mean_norm2 = target.mean.norm_squared();
    let d = target_power * group.tau_p * tr_rpsir + mean_norm2;
    Ok(MmseTargetCache {
        x,
        b,
        d,
        mean_norm2,
    })
}

/// Base (non-coherent) part of `E|v^H h_li|^2` plus the coherent extra for
/// copilot interferers.
fn mmse_pair_terms(
    cache: &MmseTargetCache,
    target: &LinkStats,
    target_power: f64,
    tau_p: f64,
    interferer: &LinkStats,
    interferer_power: f64,
    in_copilot: bool,
) -> Result<(f64, Option<f64>)> {
    let pt_tau = target_power * tau_p;
    let base = pt_tau * trace_prod(&interferer.cov, &cache.b)?
        + pt_tau * hermitian_quad(&cache.b, &interferer.mean)?
        + hermitian_quad(&interferer.cov, &target.mean)?
        + interferer.mean.dotc(&target.mean).norm_sqr();
    if !in_copilot {
        return Ok((base, None));
    }
    let (tr_cross, _) = frob_inner_mag(&interferer.cov, &cache.x);
    let mean_cross = interferer.mean.dotc(&target.mean);
    let extra = target_power * interferer_power * tau_p * tau_p * tr_cross.norm_sqr()
        + 2.0 * (target_power * interferer_power).sqrt() * tau_p * (tr_cross * mean_cross).re;
    Ok((base, Some(extra)))
}

/// Mean of `v^H h` and of `||v||^2` for MR on the MMSE estimate; the two
/// moments are the same expression and are returned as a pair.
pub fn mmse_signal_moments(
    target: &LinkStats,
    target_power: f64,
    group: &PilotGroupStats,
) -> Result<(f64, f64)> {
    let cache = mmse_target_cache(target, target_power, group)?;
    Ok((cache.d, cache.d))
}

/// Second moment `E|v^H h_li|^2` for MR on the target's MMSE estimate.
pub fn mmse_cross_moment(
    interferer: &LinkStats,
    interferer_power: f64,
    in_copilot: bool,
    target: &LinkStats,
    target_power: f64,
    group: &PilotGroupStats,
) -> Result<f64> {
    let cache = mmse_target_cache(target, target_power, group)?;
    let (base, extra) = mmse_pair_terms(
        &cache,
        target,
        target_power,
        group.tau_p,
        interferer,
        interferer_power,
        in_copilot,
    )?;
    Ok(base + extra.unwrap_or(0.0))
}

/// Mean of `v^H h` (eta) and of `||v||^2` (mu) for MR on the LS estimate.
pub fn ls_moments(
    links: &[LinkStats],
    powers: &[f64],
    target: usize,
    group: &PilotGroupStats,
) -> Result<(Complex64, f64)> {
    let t = &links[target];
    let p_t = powers[target];
    let mut eta = Complex64::new(t.cov_trace(), 0.0);
    for (&m, &p_m) in group.members.iter().zip(&group.member_powers) {
        eta += links[m].mean.dotc(&t.mean) * Complex64::new((p_m / p_t).sqrt(), 0.0);
    }
    let mu = group.tr_psi_inv() / (p_t * group.tau_p)
        + group.y_bar.norm_squared() / (p_t * group.tau_p * group.tau_p);
    Ok((eta, mu))
}

/// Second moment `E|v^H h_li|^2` (chi) for MR on the LS estimate.
///
/// For non-copilot interferers the combiner is independent of the channel
/// and only the four mean/trace terms survive; the cross term proportional
/// to `sqrt(p_li)` exists only when the interferer shares the pilot.
fn ls_pair_chi(
    group: &PilotGroupStats,
    interferer: &LinkStats,
    interferer_power: f64,
    in_copilot: bool,
    target_power: f64,
) -> Result<f64> {
    let tau = group.tau_p;
    let y_bar = &group.y_bar;
    let scale_floor = tau * group.tr_psi_inv();

    let t_noise = tau * trace_prod(&interferer.cov, &group.psi_inv)?;
    let r_y = &interferer.cov * y_bar;
    let y_r_y = re_checked(y_bar.dotc(&r_y), y_bar.norm() * r_y.norm())?;
    let h_psi_h = hermitian_quad(&group.psi_inv, &interferer.mean)?;
    let y_h = y_bar.dotc(&interferer.mean);

    let total = if !in_copilot {
        t_noise + y_r_y + tau * h_psi_h + y_h.norm_sqr()
    } else {
        let sp_tau = interferer_power.sqrt() * tau;
        let tr_r = interferer.cov_trace();
        let mean_norm2 = interferer.mean.norm_squared();
        let r_h = &interferer.cov * &interferer.mean;
        let y_r_h = y_bar.dotc(&r_h);
        let h_r_h = re_checked(
            interferer.mean.dotc(&r_h),
            interferer.mean.norm() * r_h.norm(),
        )?;
        // x_bar = y_bar - sqrt(p) tau h_bar appears only through these
        // contractions, expanded to reuse the shared pieces.
        let x_r_x = y_r_y - 2.0 * sp_tau * y_r_h.re + sp_tau * sp_tau * h_r_h;
        let omega_quad = tau * (h_psi_h - interferer_power * tau * h_r_h);
        let x_h = y_h - Complex64::new(sp_tau * mean_norm2, 0.0);
        t_noise
            + 2.0 * sp_tau * (y_h.re * tr_r + y_r_h.re)
            + interferer_power * tau * tau * tr_r * tr_r
            + x_r_x
            + omega_quad
            + x_h.norm_sqr()
            + interferer_power * tau * tau * mean_norm2 * mean_norm2
            + 2.0 * sp_tau * x_h.re * mean_norm2
    };
    let chi = total / (target_power * tau * tau);
    if chi < -IM_RESIDUE_REL * scale_floor {
        return Err(Error::Internal(format!(
            "second moment chi = {chi:e} is negative beyond tolerance"
        )));
    }
    Ok(chi.max(0.0))
}

/// Public wrapper around the per-interferer LS second moment.
pub fn ls_cross_moment(
    interferer: &LinkStats,
    interferer_power: f64,
    in_copilot: bool,
    target_power: f64,
    group: &PilotGroupStats,
) -> Result<f64> {
    ls_pair_chi(group, interferer, interferer_power, in_copilot, target_power)
}

fn check_route_equivalence(label: &str, normalized: f64, raw: f64) -> Result<()> {
    let scale = normalized.abs().max(raw.abs());
    if (normalized - raw).abs() > ROUTE_EQUIV_REL * scale.max(f64::MIN_POSITIVE) {
        return Err(Error::Internal(format!(
            "{label} SINR routes disagree: normalized {normalized:e} vs raw {raw:e}"
        )));
    }
    Ok(())
}

fn sinr_mmse_with_group(
    cfg: &SystemConfig,
    links: &[LinkStats],
    powers: &[f64],
    target: usize,
    group: &PilotGroupStats,
) -> Result<SinrBreakdownMmse> {
    let tau = group.tau_p;
    let p_t = powers[target];
    let cache = mmse_target_cache(&links[target], p_t, group)?;
    if cache.d <= 0.0 {
        return Err(Error::InvalidArgument(
            "target link carries no energy (zero mean and covariance)".into(),
        ));
    }
    let nu = cache.mean_norm2 * cache.mean_norm2 / cache.d;
    let signal = p_t * cache.d;

    let mut xi = Vec::with_capacity(links.len());
    let mut gamma_coh = Vec::new();
    let mut den_norm = cfg.noise_mw - p_t * nu;
    let mut raw_interference = 0.0;
    for (li, link) in links.iter().enumerate() {
        let p_li = powers[li];
        let (base, extra) = mmse_pair_terms(
            &cache,
            &links[target],
            p_t,
            tau,
            link,
            p_li,
            group.contains(li),
        )?;
        let xi_li = base / cache.d;
        xi.push(xi_li);
        den_norm += p_li * xi_li;
        raw_interference += p_li * base;
        if let Some(extra) = extra {
            raw_interference += p_li * extra;
            if li != target {
                let gamma = extra / cache.d;
                gamma_coh.push((li, gamma));
                den_norm += p_li * gamma;
            }
        }
    }
    if den_norm <= 0.0 {
        return Err(Error::Internal(format!(
            "non-positive MMSE SINR denominator {den_norm:e}"
        )));
    }
    let sinr = signal / den_norm;

    // Raw assembly of the generic SINR from the unnormalized moments.
    let raw_den = raw_interference - p_t * cache.d * cache.d + cfg.noise_mw * cache.d;
    let raw_sinr = p_t * cache.d * cache.d / raw_den;
    check_route_equivalence("mmse", sinr, raw_sinr)?;

    Ok(SinrBreakdownMmse {
        signal,
        xi,
        gamma_coh,
        nu,
        noise: cfg.noise_mw,
        sinr,
        se: se_from_sinr(sinr, cfg),
    })
}

fn sinr_ls_with_group(
    cfg: &SystemConfig,
    links: &[LinkStats],
    powers: &[f64],
    target: usize,
    group: &PilotGroupStats,
) -> Result<SinrBreakdownLs> {
    let p_t = powers[target];
    let (eta, mu) = ls_moments(links, powers, target, group)?;
    let mut chi = Vec::with_capacity(links.len());
    let mut interference = 0.0;
    for (li, link) in links.iter().enumerate() {
        let c = ls_pair_chi(group, link, powers[li], group.contains(li), p_t)?;
        chi.push(c);
        interference += powers[li] * c;
    }
    let signal = p_t * eta.norm_sqr();
    let den = interference - signal + mu * cfg.noise_mw;
    if den <= 0.0 {
        return Err(Error::Internal(format!(
            "non-positive LS SINR denominator {den:e}"
        )));
    }
    let sinr = signal / den;

    // Raw assembly accumulates the unnormalized moments in reverse order;
    // the result must match the normalized route bit-for-bit up to rounding.
    let mut raw_interference = 0.0;
    for (li, &c) in chi.iter().enumerate().rev() {
        raw_interference += powers[li] * c * p_t * group.tau_p * group.tau_p;
    }
    let raw_scale = p_t * group.tau_p * group.tau_p;
    let raw_den = raw_interference / raw_scale - signal + mu * cfg.noise_mw;
    let raw_sinr = signal / raw_den;
    check_route_equivalence("ls", sinr, raw_sinr)?;

    Ok(SinrBreakdownLs {
        eta,
        mu,
        chi,
        noise: cfg.noise_mw,
        sinr,
        se: se_from_sinr(sinr, cfg),
    })
}

fn group_for_target(
    links: &[LinkStats],
    powers: &[f64],
    pilots: &[usize],
    target: usize,
    cfg: &SystemConfig,
) -> Result<PilotGroupStats> {
    let members = crate::network::copilot_set(pilots, target);
    let member_links: Vec<&LinkStats> = members.iter().map(|&m| &links[m]).collect();
    let member_powers: Vec<f64> = members.iter().map(|&m| powers[m]).collect();
    psi_matrix(
        &member_links,
        &member_powers,
        members,
        cfg.pilot_len,
        cfg.noise_mw,
    )
}

/// SINR of `target` with MR combining on the MMSE estimate, evaluated from
/// the link statistics at the target's serving BS and the pilot map.
pub fn sinr_mmse(
    cfg: &SystemConfig,
    links: &[LinkStats],
    powers: &[f64],
    pilots: &[usize],
    target: usize,
) -> Result<SinrBreakdownMmse> {
    let group = group_for_target(links, powers, pilots, target, cfg)?;
    sinr_mmse_with_group(cfg, links, powers, target, &group)
}

/// SINR of `target` with MR combining on the LS estimate.
pub fn sinr_ls(
    cfg: &SystemConfig,
    links: &[LinkStats],
    powers: &[f64],
    pilots: &[usize],
    target: usize,
) -> Result<SinrBreakdownLs> {
    let group = group_for_target(links, powers, pilots, target, cfg)?;
    sinr_ls_with_group(cfg, links, powers, target, &group)
}

/// Batch evaluator for all UEs served by one BS.
///
/// Pilot-group whitening factorizations are built once and shared between
/// the MMSE and LS routes and across targets; per-target caches hold the
/// `Psi R` products that dominate the cost at large antenna counts.
pub struct SeEvaluator<'a> {
    cfg: &'a SystemConfig,
    links: &'a [LinkStats],
    powers: &'a [f64],
    groups: Vec<Option<PilotGroupStats>>,
    pilot_of: &'a [usize],
}

impl<'a> SeEvaluator<'a> {
    pub fn new(
        cfg: &'a SystemConfig,
        links: &'a [LinkStats],
        powers: &'a [f64],
        pilots: &'a [usize],
    ) -> Result<Self> {
        if links.len() != powers.len() || links.len() != pilots.len() || links.is_empty() {
            return Err(Error::InvalidArgument(
                "links, powers and pilots must be aligned and non-empty".into(),
            ));
        }
        let n_pilots = pilots.iter().max().unwrap() + 1;
        let mut groups = Vec::with_capacity(n_pilots);
        for pilot in 0..n_pilots {
            let members: Vec<usize> =
                (0..links.len()).filter(|&u| pilots[u] == pilot).collect();
            if members.is_empty() {
                groups.push(None);
                continue;
            }
            let member_links: Vec<&LinkStats> = members.iter().map(|&m| &links[m]).collect();
            let member_powers: Vec<f64> = members.iter().map(|&m| powers[m]).collect();
            groups.push(Some(psi_matrix(
                &member_links,
                &member_powers,
                members,
                cfg.pilot_len,
                cfg.noise_mw,
            )?));
        }
        Ok(SeEvaluator {
            cfg,
            links,
            powers,
            groups,
            pilot_of: pilots,
        })
    }

    pub fn group(&self, target: usize) -> &PilotGroupStats {
        self.groups[self.pilot_of[target]]
            .as_ref()
            .expect("target pilot group exists by construction")
    }

    pub fn sinr_mmse(&self, target: usize) -> Result<SinrBreakdownMmse> {
        sinr_mmse_with_group(self.cfg, self.links, self.powers, target, self.group(target))
    }

    pub fn sinr_ls(&self, target: usize) -> Result<SinrBreakdownLs> {
        sinr_ls_with_group(self.cfg, self.links, self.powers, target, self.group(target))
    }
}
