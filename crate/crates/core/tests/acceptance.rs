//! Acceptance suite: one test per release criterion, each printing a
//! PASS/FAIL line (visible with `cargo test --test acceptance -- --nocapture`).
//!
//! Criteria:
//! 1. scalar analytic oracle (gamma = 1/4 for both estimators, exact)
//! 2. pure-LoS oracle (gamma = p ||h||^2 / sigma^2, linear in M)
//! 3. dual-route SINR assembly equivalence on 1000 random configs
//! 4. Monte Carlo agreement on the 4-cell wrap-around network
//! 5. estimator statistics reproduction on a contaminated 2-cell link set
//! 6. antenna-sweep qualitative reproduction (full 16-cell setup)
//! 7. SE-distribution qualitative reproduction at M=100
//! 8. byte-identical CSV across reruns and thread counts

mod common;

use std::time::Instant;

use common::*;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rician_mimo::channel::{build_link_stats, FadingMode};
use rician_mimo::closed_form::{
    ls_cross_moment, ls_moments, mmse_cross_moment, mmse_signal_moments, sinr_ls, sinr_mmse,
};
use rician_mimo::config::SystemConfig;
use rician_mimo::error::Result;
use rician_mimo::estimation::{
    ls_estimate, ls_estimate_stats, mmse_estimate, mmse_estimate_stats, processed_pilot,
    psi_matrix,
};
use rician_mimo::experiment::{
    run_fig1, run_fig2, run_validate, CurvePoint, Estimator, ExperimentConfig, Preset,
};
use rician_mimo::monte_carlo::{pilot_noise, CnSampler};
use rician_mimo::network::copilot_set;
use rician_mimo::rng::{channel_rng, pilot_noise_rng, substream, Domain};

fn report(criterion: &str, pass: bool, detail: &str) {
    println!(
        "{} criterion {criterion}: {detail}",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass, "criterion {criterion} failed: {detail}");
}

/// Criterion 1: single cell, M=1, K=1, zero mean, beta=1, p=1, tau_p=1,
/// sigma2=1 gives gamma = 0.25 for both estimators, exact to 1e-12.
#[test]
fn criterion_1_scalar_analytic_oracle() {
    let cfg = SystemConfig {
        antennas: 1,
        ues_per_cell: 1,
        cells: 1,
        coherence_len: 2,
        pilot_len: 1,
        ul_power_mw: 1.0,
        noise_mw: 1.0,
        asd_deg: 10.0,
        bandwidth_hz: 20e6,
    };
    let links = vec![raw_link(DVector::zeros(1), DMatrix::identity(1, 1))];
    let mmse = sinr_mmse(&cfg, &links, &[1.0], &[0], 0).unwrap();
    let ls = sinr_ls(&cfg, &links, &[1.0], &[0], 0).unwrap();
    let err_mmse = (mmse.sinr - 0.25).abs();
    let err_ls = (ls.sinr - 0.25).abs();
    // derived intermediates pin the whole chain
    let intermediates_ok = (ls.eta - c(1.0, 0.0)).norm() < 1e-12
        && (ls.mu - 2.0).abs() < 1e-12
        && (ls.chi[0] - 3.0).abs() < 1e-12
        && (mmse.signal - 0.5).abs() < 1e-12;
    report(
        "1 (scalar analytic oracle)",
        err_mmse <= 1e-12 && err_ls <= 1e-12 && intermediates_ok,
        &format!("gamma_mmse err {err_mmse:.2e}, gamma_ls err {err_ls:.2e}"),
    );
}

/// Criterion 2: with every covariance zero and a single UE, the MMSE SINR
/// is exactly p ||h_bar||^2 / sigma^2 and grows linearly in M.
#[test]
fn criterion_2_pure_los_oracle() {
    let p = 10.0;
    let sigma2 = 3.981e-10;
    let beta: f64 = 1e-8;
    let mut worst: f64 = 0.0;
    let mut gammas = Vec::new();
    for &m in &[1usize, 4, 64] {
        let cfg = SystemConfig {
            antennas: m,
            ues_per_cell: 1,
            cells: 1,
            coherence_len: 200,
            pilot_len: 1,
            ul_power_mw: p,
            noise_mw: sigma2,
            asd_deg: 10.0,
            bandwidth_hz: 20e6,
        };
        let mean = rician_mimo::channel::ula_steering(0.35, m)
            .unwrap()
            .scale(beta.sqrt());
        let links = vec![raw_link(mean.clone(), DMatrix::zeros(m, m))];
        let b = sinr_mmse(&cfg, &links, &[p], &[0], 0).unwrap();
        let expect = p * mean.norm_squared() / sigma2;
        worst = worst.max((b.sinr - expect).abs() / expect);
        gammas.push(b.sinr);
    }
    let linear = (gammas[1] / gammas[0] - 4.0).abs() < 1e-12 * 4.0
        && (gammas[2] / gammas[0] - 64.0).abs() < 1e-12 * 64.0;
    report(
        "2 (pure-LoS oracle)",
        worst <= 1e-12 && linear,
        &format!("max rel err {worst:.2e} over M in {{1,4,64}}, linear in M: {linear}"),
    );
}

/// Random small scenario for the route-equivalence sweep.
fn random_small_scenario(
    rng: &mut impl Rng,
) -> (SystemConfig, Vec<rician_mimo::LinkStats>, Vec<f64>, Vec<usize>) {
    let m = rng.random_range(1..=8);
    let cells = rng.random_range(1..=4);
    let k = rng.random_range(1..=2);
    let tau_p = rng.random_range(k..=k + 2);
    let n_ue = cells * k;
    let rician = rng.random_range(0..3) > 0;
    let scale = 10f64.powf(rng.random_range(-2.0..2.0));
    let links: Vec<_> = (0..n_ue)
        .map(|_| {
            let mut l = random_link(m, rician, rng);
            l.cov = l.cov.scale(scale);
            l.mean = l.mean.scale(scale.sqrt());
            l
        })
        .collect();
    let powers: Vec<f64> = (0..n_ue).map(|_| rng.random_range(0.1..10.0)).collect();
    let mut pilots = Vec::with_capacity(n_ue);
    for _ in 0..cells {
        // distinct pilots within a cell
        let mut avail: Vec<usize> = (0..tau_p).collect();
        for _ in 0..k {
            let i = rng.random_range(0..avail.len());
            pilots.push(avail.swap_remove(i));
        }
    }
    let cfg = SystemConfig {
        antennas: m,
        ues_per_cell: k,
        cells,
        coherence_len: 4 * tau_p,
        pilot_len: tau_p,
        ul_power_mw: 1.0,
        noise_mw: 10f64.powf(rng.random_range(-3.0..1.0)),
        asd_deg: 10.0,
        bandwidth_hz: 20e6,
    };
    (cfg, links, powers, pilots)
}

/// Criterion 3: normalized and raw SINR assemblies agree to 1e-10 on 1000
/// randomized small configs for both estimators.
#[test]
fn criterion_3_route_equivalence() {
    let mut rng = substream(301, Domain::Synthetic, [0; 4]);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let (cfg, links, powers, pilots) = random_small_scenario(&mut rng);
        let target = rng.random_range(0..links.len());
        let members = copilot_set(&pilots, target);
        let member_links: Vec<_> = members.iter().map(|&u| &links[u]).collect();
        let member_powers: Vec<f64> = members.iter().map(|&u| powers[u]).collect();
        let group = psi_matrix(
            &member_links,
            &member_powers,
            members.clone(),
            cfg.pilot_len,
            cfg.noise_mw,
        )
        .unwrap();

        // normalized assemblies (also internally checked at 1e-10)
        let mmse = sinr_mmse(&cfg, &links, &powers, &pilots, target).unwrap();
        let ls = sinr_ls(&cfg, &links, &powers, &pilots, target).unwrap();

        // raw generic-SINR assembly from the public moment operations
        let p_t = powers[target];
        let (signal, norm2) = mmse_signal_moments(&links[target], p_t, &group).unwrap();
        let mut interference = 0.0;
        for li in 0..links.len() {
            interference += powers[li]
                * mmse_cross_moment(
                    &links[li],
                    powers[li],
                    members.contains(&li),
                    &links[target],
                    p_t,
                    &group,
                )
                .unwrap();
        }
        let raw_mmse =
            p_t * signal * signal / (interference - p_t * signal * signal + cfg.noise_mw * norm2);
        worst = worst.max((raw_mmse - mmse.sinr).abs() / mmse.sinr.abs().max(raw_mmse.abs()));

        let (eta, mu) = ls_moments(&links, &powers, target, &group).unwrap();
        let mut interference = 0.0;
        for li in 0..links.len() {
            interference += powers[li]
                * ls_cross_moment(&links[li], powers[li], members.contains(&li), p_t, &group)
                    .unwrap();
        }
        let raw_ls = p_t * eta.norm_sqr()
            / (interference - p_t * eta.norm_sqr() + mu * cfg.noise_mw);
        worst = worst.max((raw_ls - ls.sinr).abs() / ls.sinr.abs().max(raw_ls.abs()));
    }
    report(
        "3 (route equivalence)",
        worst <= 1e-10,
        &format!("max relative route gap {worst:.2e} over 1000 configs"),
    );
}

/// Criterion 4: on the 4-cell wrap-around network with full pilot reuse,
/// every UE's Monte Carlo SINR at N=1e5 sits within 5 propagated standard
/// errors and 3% of the closed form, for both estimators and fading modes
/// at M=8 and M=32.
#[test]
fn criterion_4_monte_carlo_agreement() {
    let start = Instant::now();
    let mut cfg = ExperimentConfig::preset(Preset::Validate);
    cfg.seed = 404;
    cfg.mc_trials = 100_000;
    assert_eq!(cfg.system.cells, 4);
    assert_eq!(cfg.system.ues_per_cell, 2);
    assert_eq!(cfg.system.pilot_len, 2);
    assert_eq!(cfg.sweep, vec![8, 32]);
    let (rows, all_pass) = run_validate(&cfg).unwrap();
    let n_rows = rows.len();
    assert_eq!(n_rows, 2 * 2 * 2 * 8); // m x fading x estimator x UEs
    let worst_rel = rows.iter().map(|r| r.rel_err).fold(0.0, f64::max);
    let worst_se = rows
        .iter()
        .map(|r| (r.gamma_mc - r.gamma_closed).abs() / r.mc_se)
        .fold(0.0, f64::max);
    report(
        "4 (Monte Carlo agreement)",
        all_pass && worst_rel <= 0.03,
        &format!(
            "{n_rows} UE checks, worst rel err {worst_rel:.4}, worst |gap|/se {worst_se:.2}, elapsed {:.1}s",
            start.elapsed().as_secs_f64()
        ),
    );
}

/// Criterion 5: empirical mean and covariance of the MMSE and LS estimates
/// on a contaminated 2-cell scenario match their predicted distributions
/// entrywise within 5 standard errors at N=1e5.
#[test]
fn criterion_5_estimator_statistics_reproduction() {
    let n = 100_000;
    let m = 4;
    let cfg = SystemConfig {
        antennas: m,
        ues_per_cell: 1,
        cells: 2,
        coherence_len: 200,
        pilot_len: 1,
        ..SystemConfig::paper_defaults()
    };
    // Two copilot UEs seen from the serving BS: one in-cell, one interferer
    // in the neighboring cell. Realistic path-loss scale.
    let own = build_link_stats(&cfg, 120.0, 0.4, 0.3, FadingMode::Rician).unwrap();
    let other = build_link_stats(&cfg, 310.0, -0.9, -1.1, FadingMode::Rician).unwrap();
    let powers = [cfg.ul_power_mw, cfg.ul_power_mw];
    let group = psi_matrix(
        &[&own, &other],
        &powers,
        vec![0, 1],
        cfg.pilot_len,
        cfg.noise_mw,
    )
    .unwrap();
    let samplers = [
        CnSampler::new(own.mean.clone(), own.cov.clone()).unwrap(),
        CnSampler::new(other.mean.clone(), other.cov.clone()).unwrap(),
    ];
    let mmse_stats = mmse_estimate_stats(&own, powers[0], &group).unwrap();
    let ls_stats = ls_estimate_stats(&own, powers[0], &group).unwrap();

    let mut sums = [DVector::<Complex64>::zeros(m), DVector::zeros(m)];
    let mut outers = [DMatrix::<Complex64>::zeros(m, m), DMatrix::zeros(m, m)];
    for t in 0..n {
        let h0 = samplers[0].sample(&mut channel_rng(505, 0, t as u32, 0, 0));
        let h1 = samplers[1].sample(&mut channel_rng(505, 0, t as u32, 1, 0));
        let noise = pilot_noise(
            m,
            group.tau_p,
            cfg.noise_mw,
            &mut pilot_noise_rng(505, 0, t as u32, 0),
        );
        let y = processed_pilot(&group, &[h0, h1], &noise).unwrap();
        let est_mmse = mmse_estimate(0, &own, powers[0], &group, &y).unwrap();
        let est_ls = ls_estimate(&y, powers[0], cfg.pilot_len);
        sums[0] += &est_mmse;
        let d = &est_mmse - &mmse_stats.mean;
        outers[0] += &d * d.adjoint();
        sums[1] += &est_ls;
        let d = &est_ls - &ls_stats.mean;
        outers[1] += &d * d.adjoint();
    }
    let nf = n as f64;
    let mut worst_sigma: f64 = 0.0;
    for (which, stats) in [(0usize, &mmse_stats), (1, &ls_stats)] {
        let emp_mean = &sums[which] / c(nf, 0.0);
        let emp_cov = &outers[which] / c(nf, 0.0);
        for i in 0..m {
            let se = (stats.cov[(i, i)].re / nf).sqrt();
            worst_sigma = worst_sigma.max((emp_mean[i] - stats.mean[i]).norm() / se);
            for j in 0..m {
                let se = (stats.cov[(i, i)].re * stats.cov[(j, j)].re / nf).sqrt();
                worst_sigma =
                    worst_sigma.max((emp_cov[(i, j)] - stats.cov[(i, j)]).norm() / se);
            }
        }
    }
    report(
        "5 (estimator statistics reproduction)",
        worst_sigma <= 5.0,
        &format!("worst entry deviation {worst_sigma:.2} standard errors (N={n})"),
    );
}

fn point<'a>(
    points: &'a [CurvePoint],
    m: usize,
    est: Estimator,
    fad: FadingMode,
) -> &'a CurvePoint {
    points
        .iter()
        .find(|p| p.m == m && p.estimator == est && p.fading == fad)
        .expect("curve point exists")
}

/// Criterion 6: full 16-cell antenna sweep over 50 drops. MMSE dominates
/// LS at every M for both fading modes, Rician dominates Rayleigh at every
/// M for both estimators, and the Rician MMSE-LS gap widens from M=10 to
/// M=100.
#[test]
fn criterion_6_antenna_sweep_reproduction() {
    let start = Instant::now();
    let mut cfg = ExperimentConfig::preset(Preset::PaperFig1);
    cfg.seed = 606;
    assert_eq!(cfg.drops, 50);
    assert_eq!(cfg.system.cells, 16);
    assert_eq!(cfg.system.ues_per_cell, 10);
    let points = run_fig1(&cfg).unwrap();

    let mut mmse_ge_ls = true;
    let mut rician_ge_rayleigh = true;
    for &m in &cfg.sweep {
        for &fad in &[FadingMode::Rician, FadingMode::Rayleigh] {
            let a = point(&points, m, Estimator::Mmse, fad).mean_sum_se;
            let b = point(&points, m, Estimator::Ls, fad).mean_sum_se;
            if a < b {
                mmse_ge_ls = false;
            }
        }
        for &est in &[Estimator::Mmse, Estimator::Ls] {
            let a = point(&points, m, est, FadingMode::Rician).mean_sum_se;
            let b = point(&points, m, est, FadingMode::Rayleigh).mean_sum_se;
            if a < b {
                rician_ge_rayleigh = false;
            }
        }
    }
    let gap = |m: usize| {
        point(&points, m, Estimator::Mmse, FadingMode::Rician).mean_sum_se
            - point(&points, m, Estimator::Ls, FadingMode::Rician).mean_sum_se
    };
    let gap_widens = gap(100) > gap(10);
    report(
        "6 (antenna-sweep reproduction)",
        mmse_ge_ls && rician_ge_rayleigh && gap_widens,
        &format!(
            "mmse>=ls {mmse_ge_ls}, rician>=rayleigh {rician_ge_rayleigh}, gap(100)={:.2} > gap(10)={:.2}: {gap_widens}, elapsed {:.0}s",
            gap(100),
            gap(10),
            start.elapsed().as_secs_f64()
        ),
    );
}

/// Criterion 7: per-UE SE distribution at M=100. Rician quantiles dominate
/// Rayleigh at 0.1..0.9 for both estimators, and the Rician MMSE-LS gap is
/// larger at the 0.1 quantile than at the 0.9 quantile.
#[test]
fn criterion_7_se_distribution_reproduction() {
    let start = Instant::now();
    let mut cfg = ExperimentConfig::preset(Preset::PaperFig2);
    cfg.seed = 707;
    let points = run_fig2(&cfg).unwrap();
    let quantile = |est: Estimator, fad: FadingMode, q: f64| -> f64 {
        let pool: Vec<f64> = points
            .iter()
            .filter(|p| p.estimator == est && p.fading == fad)
            .map(|p| p.se)
            .collect();
        // pool is sorted ascending by construction
        let idx = ((pool.len() as f64 * q).ceil() as usize).clamp(1, pool.len()) - 1;
        pool[idx]
    };
    let mut rician_right = true;
    for &est in &[Estimator::Mmse, Estimator::Ls] {
        for dec in 1..=9 {
            let q = dec as f64 / 10.0;
            if quantile(est, FadingMode::Rician, q) <= quantile(est, FadingMode::Rayleigh, q) {
                rician_right = false;
            }
        }
    }
    let gap_01 = quantile(Estimator::Mmse, FadingMode::Rician, 0.1)
        - quantile(Estimator::Ls, FadingMode::Rician, 0.1);
    let gap_09 = quantile(Estimator::Mmse, FadingMode::Rician, 0.9)
        - quantile(Estimator::Ls, FadingMode::Rician, 0.9);
    report(
        "7 (SE distribution reproduction)",
        rician_right && gap_01 > gap_09,
        &format!(
            "rician right of rayleigh at deciles: {rician_right}, gap(q=0.1)={gap_01:.3} > gap(q=0.9)={gap_09:.3}, elapsed {:.0}s",
            start.elapsed().as_secs_f64()
        ),
    );
}

/// Criterion 8: reruns with the same config and seed produce byte-identical
/// CSV regardless of the thread count, through the actual CLI binary.
#[test]
fn criterion_8_determinism_across_threads() {
    let dir = tempfile::tempdir().unwrap();
    let config_path = dir.path().join("exp.toml");
    std::fs::write(
        &config_path,
        r#"
schema = 1
scenario = "custom"
seed = 808
drops = 3
sweep = [4, 8]

[system]
antennas = 8
ues_per_cell = 2
cells = 4
pilot_len = 2
"#,
    )
    .unwrap();
    let bin = env!("CARGO_BIN_EXE_rician-mimo");
    let run = |sub: &str, out: &str, threads: &str| -> Result<Vec<u8>> {
        let out_path = dir.path().join(out);
        let status = std::process::Command::new(bin)
            .args([
                sub,
                "--config",
                config_path.to_str().unwrap(),
                "--out",
                out_path.to_str().unwrap(),
                "--threads",
                threads,
            ])
            .output()
            .expect("binary runs");
        assert!(
            status.status.success(),
            "{sub} failed: {}",
            String::from_utf8_lossy(&status.stderr)
        );
        Ok(std::fs::read(&out_path).unwrap())
    };
    let a = run("fig1", "a.csv", "1").unwrap();
    let b = run("fig1", "b.csv", "4").unwrap();
    let c1 = run("fig2", "c.csv", "1").unwrap();
    let d = run("fig2", "d.csv", "2").unwrap();
    let same = a == b && c1 == d;
    report(
        "8 (determinism)",
        same && !a.is_empty() && !c1.is_empty(),
        &format!(
            "fig1 bytes {} identical across 1/4 threads, fig2 bytes {} identical across 1/2 threads",
            a.len(),
            c1.len()
        ),
    );
}
