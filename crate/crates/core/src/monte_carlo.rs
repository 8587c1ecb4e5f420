//! Monte Carlo estimation of the combiner moments.
//!
//! Draws channels, pilot noise and combining vectors trial by trial and
//! averages the exact quantities the SINR depends on. This is the
//! independent oracle for the closed forms and the only SE route for
//! combiners without one. Data symbols are never drawn: the bound needs
//! only channel/combiner moments, so moment estimation replaces
//! symbol-level simulation at identical value and far lower variance.
//!
//! Every trial derives its own random substreams from
//! (seed, drop, trial, link), so results are a pure function of the
//! configuration and are reproduced bit-for-bit at any worker count;
//! accumulation happens in fixed-size chunks merged in order.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::closed_form::SeEvaluator;
use crate::error::{Error, Result};
use crate::estimation::{psi_matrix, PilotGroupStats};
use crate::network::NetworkRealization;
use crate::rng::{channel_rng, pilot_noise_rng};

/// Trials per accumulation chunk; fixed so that the merge tree does not
/// depend on the worker count.
const CHUNK: usize = 4096;

/// Receive combiner selection.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Combiner {
    /// MR combining on the MMSE channel estimate.
    MrMmse,
    /// MR combining on the LS channel estimate.
    MrLs,
}

impl Combiner {
    pub fn label(&self) -> &'static str {
        match self {
            Combiner::MrMmse => "mmse",
            Combiner::MrLs => "ls",
        }
    }
}

/// Monte Carlo run parameters.
#[derive(Debug, Clone)]
pub struct McConfig {
    pub n_realizations: usize,
    pub seed: u64,
    /// Pass threshold in propagated standard errors.
    pub se_multiplier: f64,
    /// Informational relative-error target reported alongside.
    pub rel_tol: f64,
}

impl Default for McConfig {
    fn default() -> Self {
        McConfig {
            n_realizations: 100_000,
            seed: 1,
            se_multiplier: 5.0,
            rel_tol: 0.03,
        }
    }
}

/// Sampler for a circularly symmetric complex Gaussian vector.
///
/// The covariance factor comes from a Hermitian eigendecomposition with
/// negative eigenvalues clipped to zero, so rank-deficient covariances
/// (down to the rank-one zero-spread limit) are handled exactly.
#[derive(Debug, Clone)]
pub struct CnSampler {
    mean: DVector<Complex64>,
    factor: DMatrix<Complex64>,
}

impl CnSampler {
    pub fn new(mean: DVector<Complex64>, cov: DMatrix<Complex64>) -> Result<Self> {
        let m = mean.len();
        if cov.nrows() != m || cov.ncols() != m {
            return Err(Error::InvalidArgument(
                "covariance shape must match the mean length".into(),
            ));
        }
        let scale = cov.norm();
        if (&cov - cov.adjoint()).norm() > 1e-12 * scale.max(f64::MIN_POSITIVE) {
            return Err(Error::InvalidArgument(
                "covariance must be Hermitian".into(),
            ));
        }
        let trace: f64 = cov.diagonal().iter().map(|z| z.re).sum();
        let eig = cov.symmetric_eigen();
        let floor = -1e-9 * trace.max(0.0) / m.max(1) as f64;
        let mut factor = eig.eigenvectors;
        for (j, &lambda) in eig.eigenvalues.iter().enumerate() {
            if lambda < floor {
                return Err(Error::InvalidArgument(format!(
                    "covariance eigenvalue {lambda:e} below tolerance {floor:e}"
                )));
            }
            let s = lambda.max(0.0).sqrt();
            factor.column_mut(j).scale_mut(s);
        }
        Ok(CnSampler { mean, factor })
    }

    pub fn sample(&self, rng: &mut impl Rng) -> DVector<Complex64> {
        let m = self.mean.len();
        let z = DVector::from_fn(m, |_, _| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
        });
        &self.mean + &self.factor * z
    }
}

/// One draw of `CN(mean, cov)`.
pub fn sample_cn(
    mean: &DVector<Complex64>,
    cov: &DMatrix<Complex64>,
    rng: &mut impl Rng,
) -> Result<DVector<Complex64>> {
    Ok(CnSampler::new(mean.clone(), cov.clone())?.sample(rng))
}

/// Effective processed-pilot noise draw, `CN(0, tau_p sigma2 I)`.
pub fn pilot_noise(
    antennas: usize,
    tau_p: f64,
    sigma2: f64,
    rng: &mut impl Rng,
) -> DVector<Complex64> {
    let s = (tau_p * sigma2 / 2.0).sqrt();
    DVector::from_fn(antennas, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex64::new(re * s, im * s)
    })
}

/// Sample moments of the combiner statistics for one target UE.
#[derive(Debug, Clone)]
pub struct McMoments {
    pub n: usize,
    /// Mean of `v^H h` for the target, with its standard error.
    pub mean_vh: Complex64,
    pub se_mean_vh: f64,
    /// `E|v^H h_li|^2` per interferer, with standard errors.
    pub second_moments: Vec<f64>,
    pub se_second_moments: Vec<f64>,
    /// Mean of `||v||^2`, with its standard error.
    pub norm2: f64,
    pub se_norm2: f64,
    /// Power-weighted interference sum (the moment entering the SINR).
    pub weighted_interference: f64,
    /// Covariance of the sample means of (Re mean_vh, Im mean_vh,
    /// weighted_interference, norm2); drives the delta-method SINR error.
    pub mean_cov: [[f64; 4]; 4],
}

struct ChunkSums {
    a: Complex64,
    u: [f64; 4],
    uu: [[f64; 4]; 4],
    b: Vec<f64>,
    b2: Vec<f64>,
}

impl ChunkSums {
    fn new(n_ue: usize) -> Self {
        ChunkSums {
            a: Complex64::new(0.0, 0.0),
            u: [0.0; 4],
            uu: [[0.0; 4]; 4],
            b: vec![0.0; n_ue],
            b2: vec![0.0; n_ue],
        }
    }

    fn merge(&mut self, other: &ChunkSums) {
        self.a += other.a;
        for i in 0..4 {
            self.u[i] += other.u[i];
            for j in 0..4 {
                self.uu[i][j] += other.uu[i][j];
            }
        }
        for (x, y) in self.b.iter_mut().zip(&other.b) {
            *x += y;
        }
        for (x, y) in self.b2.iter_mut().zip(&other.b2) {
            *x += y;
        }
    }
}

/// Per-target context shared by all trials.
struct TrialContext<'a> {
    realization: &'a NetworkRealization,
    samplers: Vec<CnSampler>,
    group: PilotGroupStats,
    /// `sqrt(p_t) (Psi R_t)^H` for the MMSE combiner.
    w_adj: Option<DMatrix<Complex64>>,
    target: usize,
    serving: usize,
    combiner: Combiner,
    seed: u64,
}

impl<'a> TrialContext<'a> {
    fn new(
        realization: &'a NetworkRealization,
        target: usize,
        combiner: Combiner,
        seed: u64,
    ) -> Result<Self> {
        let geo = &realization.geometry;
        let serving = geo.serving[target];
        let links = &realization.links[serving];
        let members = geo.copilot_set(target);
        let member_links: Vec<_> = members.iter().map(|&m| &links[m]).collect();
        let member_powers: Vec<f64> = members.iter().map(|&m| geo.powers[m]).collect();
        let group = psi_matrix(
            &member_links,
            &member_powers,
            members,
            realization.config.pilot_len,
            realization.config.noise_mw,
        )?;
        let samplers = links
            .iter()
            .map(|l| CnSampler::new(l.mean.clone(), l.cov.clone()))
            .collect::<Result<Vec<_>>>()?;
        let w_adj = match combiner {
            Combiner::MrMmse => {
                let x = group.apply_psi_mat(&links[target].cov);
                Some(x.adjoint().scale(geo.powers[target].sqrt()))
            }
            Combiner::MrLs => None,
        };
        Ok(TrialContext {
            realization,
            samplers,
            group,
            w_adj,
            target,
            serving,
            combiner,
            seed,
        })
    }

    fn run_trial(&self, trial: u32, sums: &mut ChunkSums) {
        let geo = &self.realization.geometry;
        let cfg = &self.realization.config;
        let drop = geo.drop_index;
        let bs = self.serving as u32;
        let n_ue = self.samplers.len();

        let channels: Vec<DVector<Complex64>> = (0..n_ue)
            .map(|li| {
                self.samplers[li]
                    .sample(&mut channel_rng(self.seed, drop, trial, li as u32, bs))
            })
            .collect();
        let noise = pilot_noise(
            cfg.antennas,
            self.group.tau_p,
            cfg.noise_mw,
            &mut pilot_noise_rng(self.seed, drop, trial, bs),
        );
        let mut y = noise;
        for (&m, &p) in self.group.members.iter().zip(&self.group.member_powers) {
            y += channels[m].scale(p.sqrt() * self.group.tau_p);
        }

        let v = match self.combiner {
            Combiner::MrMmse => {
                let links = &self.realization.links[self.serving];
                let innovation = &y - &self.group.y_bar;
                &links[self.target].mean
                    + self.w_adj.as_ref().expect("mmse context") * innovation
            }
            Combiner::MrLs => {
                y.scale(1.0 / (geo.powers[self.target].sqrt() * self.group.tau_p))
            }
        };

        let a = v.dotc(&channels[self.target]);
        let mut weighted = 0.0;
        for li in 0..n_ue {
            let b = v.dotc(&channels[li]).norm_sqr();
            sums.b[li] += b;
            sums.b2[li] += b * b;
            weighted += geo.powers[li] * b;
        }
        let norm2 = v.norm_squared();

        sums.a += a;
        let u = [a.re, a.im, weighted, norm2];
        for i in 0..4 {
            sums.u[i] += u[i];
            for j in 0..4 {
                sums.uu[i][j] += u[i] * u[j];
            }
        }
    }
}

/// Estimates all SINR moments of `target` under `combiner` by averaging
/// `mc.n_realizations` independent channel/noise draws.
pub fn mc_moments(
    realization: &NetworkRealization,
    target: usize,
    combiner: Combiner,
    mc: &McConfig,
) -> Result<McMoments> {
    if mc.n_realizations == 0 {
        return Err(Error::InvalidArgument(
            "need at least one Monte Carlo realization".into(),
        ));
    }
    if target >= realization.total_ues() {
        return Err(Error::InvalidArgument(format!(
            "target {target} out of range"
        )));
    }
    let ctx = TrialContext::new(realization, target, combiner, mc.seed)?;
    let n = mc.n_realizations;
    let n_ue = realization.total_ues();
    let n_chunks = n.div_ceil(CHUNK);

    let partials: Vec<ChunkSums> = (0..n_chunks)
        .into_par_iter()
        .map(|chunk| {
            let mut sums = ChunkSums::new(n_ue);
            let lo = chunk * CHUNK;
            let hi = ((chunk + 1) * CHUNK).min(n);
            for trial in lo..hi {
                ctx.run_trial(trial as u32, &mut sums);
            }
            sums
        })
        .collect();
    let mut total = ChunkSums::new(n_ue);
    for p in &partials {
        total.merge(p);
    }

    let nf = n as f64;
    let mean_vh = total.a / Complex64::new(nf, 0.0);
    let u_mean = [
        total.u[0] / nf,
        total.u[1] / nf,
        total.u[2] / nf,
        total.u[3] / nf,
    ];
    let mut mean_cov = [[f64::INFINITY; 4]; 4];
    if n > 1 {
        for i in 0..4 {
            for j in 0..4 {
                let s = (total.uu[i][j] - nf * u_mean[i] * u_mean[j]) / (nf - 1.0);
                mean_cov[i][j] = s / nf;
            }
        }
    }
    let second_moments: Vec<f64> = total.b.iter().map(|s| s / nf).collect();
    let se_second_moments: Vec<f64> = total
        .b
        .iter()
        .zip(&total.b2)
        .map(|(&s, &s2)| {
            if n > 1 {
                let var = ((s2 - s * s / nf) / (nf - 1.0)).max(0.0);
                (var / nf).sqrt()
            } else {
                f64::INFINITY
            }
        })
        .collect();
    let se_mean_vh = if n > 1 {
        (mean_cov[0][0].max(0.0) + mean_cov[1][1].max(0.0)).sqrt()
    } else {
        f64::INFINITY
    };
    let se_norm2 = if n > 1 {
        mean_cov[3][3].max(0.0).sqrt()
    } else {
        f64::INFINITY
    };

    Ok(McMoments {
        n,
        mean_vh,
        se_mean_vh,
        second_moments,
        se_second_moments,
        norm2: u_mean[3],
        se_norm2,
        weighted_interference: u_mean[2],
        mean_cov,
    })
}

/// Plugs the sample moments into the generic SINR and propagates the
/// moment uncertainty through the ratio (delta method with the full 4x4
/// covariance of the contributing means). Returns (sinr, standard error).
pub fn mc_sinr(moments: &McMoments, target_power: f64, noise_mw: f64) -> (f64, f64) {
    let a = moments.mean_vh;
    let signal_mag = a.norm_sqr();
    let num = target_power * signal_mag;
    let den = moments.weighted_interference - num + noise_mw * moments.norm2;
    if den <= 0.0 || !den.is_finite() {
        return (f64::NAN, f64::INFINITY);
    }
    let sinr = num / den;
    if !moments.mean_cov[0][0].is_finite() {
        return (sinr, f64::INFINITY);
    }

    let d_a = target_power * (den + num) / (den * den);
    let g = [
        d_a * 2.0 * a.re,
        d_a * 2.0 * a.im,
        -num / (den * den),
        -num * noise_mw / (den * den),
    ];
    let mut var = 0.0;
    for i in 0..4 {
        for j in 0..4 {
            var += g[i] * moments.mean_cov[i][j] * g[j];
        }
    }
    (sinr, var.max(0.0).sqrt())
}

/// Per-UE comparison of the Monte Carlo SINR against the closed form.
#[derive(Debug, Clone)]
pub struct UeValidation {
    pub ue: usize,
    pub cell: usize,
    pub index_in_cell: usize,
    pub serving: usize,
    pub gamma_closed: f64,
    pub gamma_mc: f64,
    pub se_mc: f64,
    pub rel_err: f64,
    pub pass: bool,
}

/// Validates every UE's closed-form SINR against Monte Carlo moments;
/// a UE passes when the gap is within `se_multiplier` propagated standard
/// errors.
pub fn validate(
    realization: &NetworkRealization,
    combiner: Combiner,
    mc: &McConfig,
) -> Result<Vec<UeValidation>> {
    let geo = &realization.geometry;
    let cfg = &realization.config;
    let mut rows = Vec::with_capacity(realization.total_ues());
    for bs in 0..cfg.cells {
        let targets: Vec<usize> = (0..realization.total_ues())
            .filter(|&u| geo.serving[u] == bs)
            .collect();
        if targets.is_empty() {
            continue;
        }
        let links = &realization.links[bs];
        let eval = SeEvaluator::new(cfg, links, &geo.powers, &geo.pilots)?;
        for t in targets {
            let gamma_closed = match combiner {
                Combiner::MrMmse => eval.sinr_mmse(t)?.sinr,
                Combiner::MrLs => eval.sinr_ls(t)?.sinr,
            };
            let moments = mc_moments(realization, t, combiner, mc)?;
            let (gamma_mc, se_mc) = mc_sinr(&moments, geo.powers[t], cfg.noise_mw);
            let rel_err = (gamma_mc - gamma_closed).abs() / gamma_closed;
            let pass = (gamma_mc - gamma_closed).abs() <= mc.se_multiplier * se_mc;
            rows.push(UeValidation {
                ue: t,
                cell: geo.cell_of(t),
                index_in_cell: geo.index_in_cell(t),
                serving: bs,
                gamma_closed,
                gamma_mc,
                se_mc,
                rel_err,
                pass,
            });
        }
    }
    rows.sort_by_key(|r| r.ue);
    Ok(rows)
}
