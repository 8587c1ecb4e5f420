//! Shared helpers for the integration test suites.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rician_mimo::channel::{FadingMode, LinkStats};
use rician_mimo::config::SystemConfig;
use rician_mimo::network::{synthetic_realization, NetworkRealization};

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn raw_link(mean: DVector<Complex64>, cov: DMatrix<Complex64>) -> LinkStats {
    LinkStats {
        mean,
        cov,
        beta_los_db: 0.0,
        beta_nlos_db: 0.0,
        angle_rad: 0.0,
    }
}

/// Random Hermitian PSD matrix with O(1) entries.
pub fn random_psd(m: usize, rng: &mut impl Rng) -> DMatrix<Complex64> {
    let g = DMatrix::<Complex64>::from_fn(m, m, |_, _| {
        c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    });
    (&g * g.adjoint()).scale(1.0 / m as f64)
}

pub fn random_mean(m: usize, rng: &mut impl Rng) -> DVector<Complex64> {
    DVector::from_fn(m, |_, _| {
        c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    })
}

pub fn random_link(m: usize, rician: bool, rng: &mut impl Rng) -> LinkStats {
    let mean = if rician {
        random_mean(m, rng)
    } else {
        DVector::zeros(m)
    };
    raw_link(mean, random_psd(m, rng))
}

/// Synthetic multi-cell network with unit-scale random links: `cells`
/// cells of `ues_per_cell` UEs, every UE served by its own cell, pilots
/// assigned round-robin within each cell (full inter-cell reuse when
/// `ues_per_cell == pilot_len`).
pub fn random_network(
    m: usize,
    cells: usize,
    ues_per_cell: usize,
    pilot_len: usize,
    noise_mw: f64,
    fading: FadingMode,
    rng: &mut impl Rng,
) -> NetworkRealization {
    let cfg = SystemConfig {
        antennas: m,
        ues_per_cell,
        cells,
        coherence_len: 200,
        pilot_len,
        ul_power_mw: 1.0,
        noise_mw,
        asd_deg: 10.0,
        bandwidth_hz: 20e6,
    };
    let n_ue = cfg.total_ues();
    let rician = fading == FadingMode::Rician;
    let links: Vec<Vec<LinkStats>> = (0..cells)
        .map(|_| (0..n_ue).map(|_| random_link(m, rician, rng)).collect())
        .collect();
    let pilots: Vec<usize> = (0..n_ue).map(|u| u % ues_per_cell % pilot_len).collect();
    let serving: Vec<usize> = (0..n_ue).map(|u| u / ues_per_cell).collect();
    synthetic_realization(cfg, fading, links, pilots, vec![1.0; n_ue], serving).unwrap()
}
