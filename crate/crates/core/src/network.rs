//! Cellular layout, UE drops and pilot allocation.
//!
//! Cells are 250 m squares on a wrap-around grid with the BS at each
//! center. UEs drop uniformly per cell (at least 35 m from their own BS),
//! get one shadow-fading draw per BS link, are served by the BS with the
//! strongest shadow-inclusive large-scale gain, and receive pilots by a
//! uniformly random injection within each cell.

use std::io::Write;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::channel::{build_link_stats, FadingMode, LinkStats};
use crate::config::SystemConfig;
use crate::error::{Error, Result};

/// Side length of one square cell, meters.
pub const CELL_SIDE_M: f64 = 250.0;
/// Minimum distance between a UE and its own-cell BS, meters.
pub const MIN_UE_BS_DISTANCE_M: f64 = 35.0;

/// Which large-scale coefficient drives the serving-BS choice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AssignmentRule {
    /// Shadow-inclusive NLoS gain (dominates the channel trace).
    #[default]
    Nlos,
    /// Shadow-inclusive LoS gain, for sensitivity checks.
    Los,
}

/// Geometry, shadowing, serving map and pilot allocation of one UE drop.
/// Everything here is independent of the antenna count, so one geometry
/// serves a whole antenna sweep.
#[derive(Debug, Clone)]
pub struct NetworkGeometry {
    pub cells: usize,
    pub ues_per_cell: usize,
    pub pilot_len: usize,
    /// Wrap-around world size, meters.
    pub world_size: f64,
    /// Drop index used for substream derivation.
    pub drop_index: u32,
    pub bs_positions: Vec<[f64; 2]>,
    /// UE positions, flat-indexed `cell * ues_per_cell + k`.
    pub ue_positions: Vec<[f64; 2]>,
    /// Standard-normal shadow draw per (BS, UE) link.
    pub shadow: Vec<Vec<f64>>,
    /// Wrap distance per (BS, UE) link, meters.
    pub distances: Vec<Vec<f64>>,
    /// Direction of the wrap-minimizing displacement BS -> UE, radians.
    pub angles: Vec<Vec<f64>>,
    /// Shadow-inclusive LoS gain per (BS, UE) link, dB.
    pub beta_los_db: Vec<Vec<f64>>,
    /// Shadow-inclusive NLoS gain per (BS, UE) link, dB.
    pub beta_nlos_db: Vec<Vec<f64>>,
    /// Serving BS per UE.
    pub serving: Vec<usize>,
    /// Pilot index per UE, in `0..pilot_len`.
    pub pilots: Vec<usize>,
    /// UL transmit power per UE, mW.
    pub powers: Vec<f64>,
}

impl NetworkGeometry {
    pub fn total_ues(&self) -> usize {
        self.cells * self.ues_per_cell
    }

    pub fn ue_index(&self, cell: usize, k: usize) -> usize {
        cell * self.ues_per_cell + k
    }

    pub fn cell_of(&self, ue: usize) -> usize {
        ue / self.ues_per_cell
    }

    pub fn index_in_cell(&self, ue: usize) -> usize {
        ue % self.ues_per_cell
    }

    /// All UEs sharing `ue`'s pilot (including `ue`), ascending.
    pub fn copilot_set(&self, ue: usize) -> Vec<usize> {
        copilot_set(&self.pilots, ue)
    }

    /// All UEs using pilot `pilot`, ascending.
    pub fn pilot_group(&self, pilot: usize) -> Vec<usize> {
        (0..self.total_ues())
            .filter(|&u| self.pilots[u] == pilot)
            .collect()
    }

    /// Link statistics from every UE to BS `bs` for a given antenna count
    /// and fading mode.
    pub fn links_at_bs(
        &self,
        cfg: &SystemConfig,
        mode: FadingMode,
        bs: usize,
    ) -> Result<Vec<LinkStats>> {
        (0..self.total_ues())
            .map(|ue| {
                build_link_stats(
                    cfg,
                    self.distances[bs][ue],
                    self.angles[bs][ue],
                    self.shadow[bs][ue],
                    mode,
                )
            })
            .collect()
    }
}

/// A geometry together with the full L x (L*K) table of link statistics.
#[derive(Debug, Clone)]
pub struct NetworkRealization {
    pub config: SystemConfig,
    pub fading: FadingMode,
    pub geometry: NetworkGeometry,
    /// `links[bs][ue]`.
    pub links: Vec<Vec<LinkStats>>,
}

impl NetworkRealization {
    pub fn total_ues(&self) -> usize {
        self.geometry.total_ues()
    }
}

/// Minimum-distance displacement from `a` to `b` on the wrap-around square.
///
/// All nine shifted copies of `b` (offsets in {-world, 0, +world}^2,
/// row-major over (dx, dy)) are compared; ties keep the earliest offset.
/// Returns (distance, direction of the minimizing displacement).
pub fn wrap_displacement(a: [f64; 2], b: [f64; 2], world_size: f64) -> (f64, f64) {
    let offsets = [-world_size, 0.0, world_size];
    let mut best = f64::INFINITY;
    let mut best_vec = [0.0, 0.0];
    for &dx in &offsets {
        for &dy in &offsets {
            let vx = b[0] + dx - a[0];
            let vy = b[1] + dy - a[1];
            let d2 = vx * vx + vy * vy;
            if d2 < best {
                best = d2;
                best_vec = [vx, vy];
            }
        }
    }
    (best.sqrt(), best_vec[1].atan2(best_vec[0]))
}

/// BS grid positions for a perfect-square cell count.
pub fn bs_grid(cells: usize) -> Result<Vec<[f64; 2]>> {
    let side = (cells as f64).sqrt().round() as usize;
    if side * side != cells {
        return Err(Error::InvalidConfiguration(format!(
            "cell count {cells} is not a perfect square; the grid layout needs one (e.g. 4, 9, 16)"
        )));
    }
    let mut out = Vec::with_capacity(cells);
    for gy in 0..side {
        for gx in 0..side {
            out.push([
                (gx as f64 + 0.5) * CELL_SIDE_M,
                (gy as f64 + 0.5) * CELL_SIDE_M,
            ]);
        }
    }
    Ok(out)
}

/// Uniform UE positions per cell, rejection-resampled until at least
/// [`MIN_UE_BS_DISTANCE_M`] from the own-cell BS.
pub fn drop_ues(
    cfg: &SystemConfig,
    bs_positions: &[[f64; 2]],
    world_size: f64,
    rng: &mut impl Rng,
) -> Vec<[f64; 2]> {
    let mut out = Vec::with_capacity(cfg.total_ues());
    for (cell, bs) in bs_positions.iter().enumerate() {
        let x0 = (cell % (bs_positions.len() as f64).sqrt().round() as usize) as f64 * CELL_SIDE_M;
        let y0 = (cell / (bs_positions.len() as f64).sqrt().round() as usize) as f64 * CELL_SIDE_M;
        for _ in 0..cfg.ues_per_cell {
            loop {
                let p = [
                    x0 + rng.random_range(0.0..CELL_SIDE_M),
                    y0 + rng.random_range(0.0..CELL_SIDE_M),
                ];
                let (d, _) = wrap_displacement(*bs, p, world_size);
                if d >= MIN_UE_BS_DISTANCE_M {
                    out.push(p);
                    break;
                }
            }
        }
    }
    out
}

/// Serving BS per UE: argmax of the shadow-inclusive gain, lowest index on
/// ties.
pub fn assign_serving_bs(beta_db: &[Vec<f64>]) -> Vec<usize> {
    let n_ue = beta_db[0].len();
    (0..n_ue)
        .map(|ue| {
            let mut best = 0;
            for bs in 1..beta_db.len() {
                if beta_db[bs][ue] > beta_db[best][ue] {
                    best = bs;
                }
            }
            best
        })
        .collect()
}

/// Pilot index per UE: an independent uniformly random injection of each
/// cell's UEs into `0..pilot_len`.
pub fn allocate_pilots(cfg: &SystemConfig, rng: &mut impl Rng) -> Result<Vec<usize>> {
    if cfg.ues_per_cell > cfg.pilot_len {
        return Err(Error::InvalidConfiguration(format!(
            "cannot allocate {} distinct pilots per cell out of {}",
            cfg.ues_per_cell, cfg.pilot_len
        )));
    }
    let mut pilots = Vec::with_capacity(cfg.total_ues());
    for _ in 0..cfg.cells {
        let mut perm: Vec<usize> = (0..cfg.pilot_len).collect();
        perm.shuffle(rng);
        pilots.extend_from_slice(&perm[..cfg.ues_per_cell]);
    }
    Ok(pilots)
}

/// The copilot set of `ue` under a pilot map, ascending and including `ue`.
pub fn copilot_set(pilots: &[usize], ue: usize) -> Vec<usize> {
    let p = pilots[ue];
    (0..pilots.len()).filter(|&u| pilots[u] == p).collect()
}

/// Draws one complete network geometry: positions, shadowing, serving map
/// and pilots.
pub fn realize_geometry(
    cfg: &SystemConfig,
    rng: &mut impl Rng,
    drop_index: u32,
) -> Result<NetworkGeometry> {
    cfg.validate()?;
    let bs_positions = bs_grid(cfg.cells)?;
    let world_size = (cfg.cells as f64).sqrt().round() * CELL_SIDE_M;
    let n_ue = cfg.total_ues();

    let ue_positions = drop_ues(cfg, &bs_positions, world_size, rng);
    let shadow: Vec<Vec<f64>> = (0..cfg.cells)
        .map(|_| (0..n_ue).map(|_| rng.sample(StandardNormal)).collect())
        .collect();
    let pilots = allocate_pilots(cfg, rng)?;

    let mut distances = vec![vec![0.0; n_ue]; cfg.cells];
    let mut angles = vec![vec![0.0; n_ue]; cfg.cells];
    let mut beta_los_db = vec![vec![0.0; n_ue]; cfg.cells];
    let mut beta_nlos_db = vec![vec![0.0; n_ue]; cfg.cells];
    for bs in 0..cfg.cells {
        for ue in 0..n_ue {
            let (d, phi) = wrap_displacement(bs_positions[bs], ue_positions[ue], world_size);
            distances[bs][ue] = d;
            angles[bs][ue] = phi;
            let z = shadow[bs][ue];
            beta_los_db[bs][ue] =
                crate::channel::pathloss_los(d, crate::channel::LOS_SHADOW_STD_DB * z)?;
            beta_nlos_db[bs][ue] =
                crate::channel::pathloss_nlos(d, crate::channel::NLOS_SHADOW_STD_DB * z)?;
        }
    }
    let serving = assign_serving_bs(&beta_nlos_db);

    Ok(NetworkGeometry {
        cells: cfg.cells,
        ues_per_cell: cfg.ues_per_cell,
        pilot_len: cfg.pilot_len,
        world_size,
        drop_index,
        bs_positions,
        ue_positions,
        shadow,
        distances,
        angles,
        beta_los_db,
        beta_nlos_db,
        serving,
        pilots,
        powers: vec![cfg.ul_power_mw; n_ue],
    })
}

/// Draws a geometry and materializes the full link-statistics table.
pub fn realize_network(
    cfg: &SystemConfig,
    fading: FadingMode,
    rng: &mut impl Rng,
    drop_index: u32,
) -> Result<NetworkRealization> {
    let geometry = realize_geometry(cfg, rng, drop_index)?;
    let links = (0..cfg.cells)
        .map(|bs| geometry.links_at_bs(cfg, fading, bs))
        .collect::<Result<Vec<_>>>()?;
    Ok(NetworkRealization {
        config: cfg.clone(),
        fading,
        geometry,
        links,
    })
}

/// Builds a realization around an externally supplied link table, for
/// synthetic scenarios that bypass the geometric layout (positions and
/// shadow draws are zeroed). `links[bs][ue]` must cover every BS row.
pub fn synthetic_realization(
    config: SystemConfig,
    fading: FadingMode,
    links: Vec<Vec<LinkStats>>,
    pilots: Vec<usize>,
    powers: Vec<f64>,
    serving: Vec<usize>,
) -> Result<NetworkRealization> {
    let n_ue = config.total_ues();
    if links.len() != config.cells
        || links.iter().any(|row| row.len() != n_ue)
        || pilots.len() != n_ue
        || powers.len() != n_ue
        || serving.len() != n_ue
    {
        return Err(Error::InvalidArgument(
            "synthetic realization tables must match the configured network size".into(),
        ));
    }
    if serving.iter().any(|&s| s >= config.cells) {
        return Err(Error::InvalidArgument(
            "serving indices must address existing BSs".into(),
        ));
    }
    if pilots.iter().any(|&p| p >= config.pilot_len) {
        return Err(Error::InvalidArgument(
            "pilot indices must be below the pilot length".into(),
        ));
    }
    let geometry = NetworkGeometry {
        cells: config.cells,
        ues_per_cell: config.ues_per_cell,
        pilot_len: config.pilot_len,
        world_size: (config.cells as f64).sqrt() * CELL_SIDE_M,
        drop_index: 0,
        bs_positions: vec![[0.0, 0.0]; config.cells],
        ue_positions: vec![[0.0, 0.0]; n_ue],
        shadow: vec![vec![0.0; n_ue]; config.cells],
        distances: vec![vec![0.0; n_ue]; config.cells],
        angles: vec![vec![0.0; n_ue]; config.cells],
        beta_los_db: vec![vec![0.0; n_ue]; config.cells],
        beta_nlos_db: vec![vec![0.0; n_ue]; config.cells],
        serving,
        pilots,
        powers,
    };
    Ok(NetworkRealization {
        config,
        fading,
        geometry,
        links,
    })
}

/// Writes a realization's geometry as UTF-8 text, one record per line.
///
/// Record layout:
/// `net <world_size_m> <cells> <ues_per_cell> <pilot_len>`,
/// `bs <bs> <x_m> <y_m>`,
/// `ue <cell> <k> <x_m> <y_m> <serving_bs> <pilot>`,
/// `link <bs> <cell> <k> <distance_m> <angle_rad> <shadow_z> <beta_los_db> <beta_nlos_db>`.
pub fn dump_network(geometry: &NetworkGeometry, mut out: impl Write) -> std::io::Result<()> {
    writeln!(out, "# rician-mimo network dump v1")?;
    writeln!(
        out,
        "net {} {} {} {}",
        geometry.world_size, geometry.cells, geometry.ues_per_cell, geometry.pilot_len
    )?;
    for (bs, p) in geometry.bs_positions.iter().enumerate() {
        writeln!(out, "bs {} {} {}", bs, p[0], p[1])?;
    }
    for ue in 0..geometry.total_ues() {
        let p = geometry.ue_positions[ue];
        writeln!(
            out,
            "ue {} {} {} {} {} {}",
            geometry.cell_of(ue),
            geometry.index_in_cell(ue),
            p[0],
            p[1],
            geometry.serving[ue],
            geometry.pilots[ue]
        )?;
    }
    for bs in 0..geometry.cells {
        for ue in 0..geometry.total_ues() {
            writeln!(
                out,
                "link {} {} {} {} {} {} {} {}",
                bs,
                geometry.cell_of(ue),
                geometry.index_in_cell(ue),
                geometry.distances[bs][ue],
                geometry.angles[bs][ue],
                geometry.shadow[bs][ue],
                geometry.beta_los_db[bs][ue],
                geometry.beta_nlos_db[bs][ue]
            )?;
        }
    }
    Ok(())
}

/// Per-antenna digest of a link table ignoring the means; used to confirm
/// that paired fading modes share identical covariances.
pub fn cov_digest(links: &[Vec<LinkStats>]) -> u64 {
    // FNV-1a over the raw covariance bytes.
    let mut h: u64 = 0xcbf29ce484222325;
    let mut eat = |x: f64| {
        for b in x.to_le_bytes() {
            h ^= b as u64;
            h = h.wrapping_mul(0x100000001b3);
        }
    };
    for row in links {
        for link in row {
            for z in link.cov.iter() {
                eat(z.re);
                eat(z.im);
            }
        }
    }
    h
}

/// Sum of squared channel means per link table (zero iff LoS blocked).
pub fn mean_energy(links: &[Vec<LinkStats>]) -> f64 {
    links
        .iter()
        .flat_map(|row| row.iter())
        .map(|l| l.mean.norm_squared())
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::geometry_rng;
    use std::f64::consts::PI;

    fn small_cfg() -> SystemConfig {
        SystemConfig {
            antennas: 2,
            ues_per_cell: 2,
            cells: 4,
            coherence_len: 200,
            pilot_len: 2,
            ..SystemConfig::paper_defaults()
        }
    }

    #[test]
    fn wrap_zero_for_same_point() {
        let (d, phi) = wrap_displacement([10.0, 20.0], [10.0, 20.0], 1000.0);
        assert_eq!(d, 0.0);
        assert_eq!(phi, 0.0);
    }

    #[test]
    fn wrap_goes_through_edge() {
        let (d, phi) = wrap_displacement([0.0, 0.0], [950.0, 0.0], 1000.0);
        assert!((d - 50.0).abs() < 1e-12);
        assert!((phi - PI).abs() < 1e-12 || (phi + PI).abs() < 1e-12);
    }

    #[test]
    fn wrap_distance_symmetric_and_never_longer_than_direct() {
        let mut rng = geometry_rng(11, 0);
        for _ in 0..200 {
            let a = [rng.random_range(0.0..1000.0), rng.random_range(0.0..1000.0)];
            let b = [rng.random_range(0.0..1000.0), rng.random_range(0.0..1000.0)];
            let (dab, _) = wrap_displacement(a, b, 1000.0);
            let (dba, _) = wrap_displacement(b, a, 1000.0);
            assert!((dab - dba).abs() < 1e-9);
            let direct = ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt();
            assert!(dab <= direct + 1e-9);
        }
    }

    #[test]
    fn grid_matches_expected_positions() {
        let bs = bs_grid(16).unwrap();
        for a in 0..4 {
            for b in 0..4 {
                let p = bs[b * 4 + a];
                assert_eq!(p[0], 125.0 + 250.0 * a as f64);
                assert_eq!(p[1], 125.0 + 250.0 * b as f64);
            }
        }
        assert!(bs_grid(6).is_err());
    }

    #[test]
    fn drops_respect_min_distance_and_determinism() {
        let cfg = small_cfg();
        let g1 = realize_geometry(&cfg, &mut geometry_rng(3, 0), 0).unwrap();
        let g2 = realize_geometry(&cfg, &mut geometry_rng(3, 0), 0).unwrap();
        assert_eq!(g1.ue_positions, g2.ue_positions);
        assert_eq!(g1.pilots, g2.pilots);
        for ue in 0..g1.total_ues() {
            let cell = g1.cell_of(ue);
            let (d, _) = wrap_displacement(g1.bs_positions[cell], g1.ue_positions[ue], g1.world_size);
            assert!(d >= MIN_UE_BS_DISTANCE_M);
            // serving BS is never closer than the minimum either
            assert!(g1.distances[g1.serving[ue]][ue] >= MIN_UE_BS_DISTANCE_M);
        }
    }

    #[test]
    fn drops_are_uniform_on_average() {
        let cfg = SystemConfig {
            ues_per_cell: 10,
            cells: 4,
            pilot_len: 10,
            ..SystemConfig::paper_defaults()
        };
        let mut sum = [0.0, 0.0];
        let mut n = 0usize;
        for drop in 0..300 {
            let g = realize_geometry(&cfg, &mut geometry_rng(5, drop), drop).unwrap();
            for k in 0..cfg.ues_per_cell {
                let p = g.ue_positions[g.ue_index(0, k)];
                sum[0] += p[0];
                sum[1] += p[1];
                n += 1;
            }
        }
        // Rejection of the 35 m disc is symmetric around the center, so the
        // mean stays at the cell center. se ~ 250/sqrt(12 n) ~ 1.3 m.
        let mean = [sum[0] / n as f64, sum[1] / n as f64];
        assert!((mean[0] - 125.0).abs() < 6.0, "mean x = {}", mean[0]);
        assert!((mean[1] - 125.0).abs() < 6.0, "mean y = {}", mean[1]);
    }

    #[test]
    fn serving_matches_brute_force_scan() {
        let mut rng = geometry_rng(9, 1);
        let beta: Vec<Vec<f64>> = (0..5)
            .map(|_| (0..30).map(|_| rng.random_range(-120.0..-60.0)).collect())
            .collect();
        let assign = assign_serving_bs(&beta);
        for ue in 0..30 {
            let mut best = 0;
            let mut best_v = f64::NEG_INFINITY;
            for bs in 0..5 {
                if beta[bs][ue] > best_v {
                    best_v = beta[bs][ue];
                    best = bs;
                }
            }
            assert_eq!(assign[ue], best);
        }
        // argmax is invariant to a constant offset
        let shifted: Vec<Vec<f64>> = beta
            .iter()
            .map(|row| row.iter().map(|v| v + 17.25).collect())
            .collect();
        assert_eq!(assign_serving_bs(&shifted), assign);
    }

    #[test]
    fn single_cell_serves_everything() {
        let cfg = SystemConfig {
            cells: 1,
            ues_per_cell: 3,
            pilot_len: 3,
            ..SystemConfig::paper_defaults()
        };
        let g = realize_geometry(&cfg, &mut geometry_rng(2, 0), 0).unwrap();
        assert!(g.serving.iter().all(|&s| s == 0));
    }

    #[test]
    fn pilots_distinct_within_cell() {
        let cfg = small_cfg();
        for drop in 0..50 {
            let g = realize_geometry(&cfg, &mut geometry_rng(4, drop), drop).unwrap();
            for cell in 0..cfg.cells {
                let mut seen = vec![false; cfg.pilot_len];
                for k in 0..cfg.ues_per_cell {
                    let p = g.pilots[g.ue_index(cell, k)];
                    assert!(!seen[p], "pilot reuse within cell {cell}");
                    seen[p] = true;
                }
            }
        }
    }

    #[test]
    fn pilot_marginal_is_uniform() {
        let cfg = SystemConfig {
            ues_per_cell: 3,
            cells: 1,
            pilot_len: 5,
            ..SystemConfig::paper_defaults()
        };
        let n = 20_000;
        let mut counts = vec![0usize; cfg.pilot_len];
        for drop in 0..n {
            let mut rng = geometry_rng(6, drop);
            let pilots = allocate_pilots(&cfg, &mut rng).unwrap();
            counts[pilots[0]] += 1;
        }
        let p = 1.0 / cfg.pilot_len as f64;
        let se = (p * (1.0 - p) / n as f64).sqrt();
        for &c in &counts {
            let freq = c as f64 / n as f64;
            assert!((freq - p).abs() < 5.0 * se, "freq {freq} vs {p}");
        }
    }

    #[test]
    fn copilot_sets_match_definition() {
        let pilots = vec![0, 1, 0, 1, 1, 2];
        assert_eq!(copilot_set(&pilots, 0), vec![0, 2]);
        assert_eq!(copilot_set(&pilots, 4), vec![1, 3, 4]);
        assert_eq!(copilot_set(&pilots, 5), vec![5]);
        // always contains the UE itself
        for ue in 0..pilots.len() {
            assert!(copilot_set(&pilots, ue).contains(&ue));
        }
    }

    #[test]
    fn full_reuse_copilot_spans_all_cells() {
        let cfg = SystemConfig {
            ues_per_cell: 1,
            cells: 4,
            pilot_len: 1,
            ..SystemConfig::paper_defaults()
        };
        let g = realize_geometry(&cfg, &mut geometry_rng(8, 0), 0).unwrap();
        assert_eq!(g.copilot_set(0).len(), 4);
    }

    #[test]
    fn realization_has_full_link_table() {
        let cfg = small_cfg();
        let net =
            realize_network(&cfg, FadingMode::Rician, &mut geometry_rng(10, 0), 0).unwrap();
        assert_eq!(net.links.len(), cfg.cells);
        assert_eq!(
            net.links.iter().map(|r| r.len()).sum::<usize>(),
            cfg.cells * cfg.total_ues()
        );
        assert!((net.geometry.world_size - 500.0).abs() < 1e-12);
        for row in &net.links {
            for link in row {
                let herm = (&link.cov - link.cov.adjoint()).norm();
                assert!(herm < 1e-12 * link.cov.norm().max(1e-300));
            }
        }
    }

    #[test]
    fn paired_modes_share_covariances() {
        let cfg = small_cfg();
        let ric = realize_network(&cfg, FadingMode::Rician, &mut geometry_rng(12, 0), 0).unwrap();
        let ray =
            realize_network(&cfg, FadingMode::Rayleigh, &mut geometry_rng(12, 0), 0).unwrap();
        assert_eq!(cov_digest(&ric.links), cov_digest(&ray.links));
        assert!(mean_energy(&ric.links) > 0.0);
        assert_eq!(mean_energy(&ray.links), 0.0);
    }

    #[test]
    fn serving_distance_distribution_identical_across_cells() {
        // Kolmogorov-Smirnov between per-cell samples of the UE -> serving-BS
        // distance; wrap-around makes all cells statistically identical.
        let cfg = SystemConfig {
            ues_per_cell: 10,
            cells: 16,
            pilot_len: 10,
            ..SystemConfig::paper_defaults()
        };
        let mut per_cell: Vec<Vec<f64>> = vec![Vec::new(); cfg.cells];
        for drop in 0..25 {
            let g = realize_geometry(&cfg, &mut geometry_rng(14, drop), drop).unwrap();
            for ue in 0..g.total_ues() {
                per_cell[g.cell_of(ue)].push(g.distances[g.serving[ue]][ue]);
            }
        }
        for cell in &mut per_cell {
            cell.sort_by(|a, b| a.partial_cmp(b).unwrap());
        }
        let ks = |a: &[f64], b: &[f64]| -> f64 {
            let mut i = 0;
            let mut j = 0;
            let mut d: f64 = 0.0;
            while i < a.len() && j < b.len() {
                if a[i] <= b[j] {
                    i += 1;
                } else {
                    j += 1;
                }
                d = d.max((i as f64 / a.len() as f64 - j as f64 / b.len() as f64).abs());
            }
            d
        };
        let n = per_cell[0].len() as f64;
        // alpha ~ 1e-3 two-sample critical value
        let crit = 1.95 * (2.0 / n).sqrt();
        for cell in 1..cfg.cells {
            let d = ks(&per_cell[0], &per_cell[cell]);
            assert!(d < crit, "cell {cell}: KS {d:.3} >= {crit:.3}");
        }
    }

    #[test]
    fn dump_is_line_structured() {
        let cfg = small_cfg();
        let g = realize_geometry(&cfg, &mut geometry_rng(15, 0), 0).unwrap();
        let mut buf = Vec::new();
        dump_network(&g, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        // 1 comment + 1 net + L bs + L*K ue + L*(L*K) link records
        assert_eq!(lines.len(), 2 + 4 + 8 + 32);
        assert!(lines[1].starts_with("net 500 4 2 2"));
        assert_eq!(text.matches("\nbs ").count(), 4);
        assert_eq!(text.matches("\nue ").count(), 8);
        assert_eq!(text.matches("\nlink ").count(), 32);
    }
}
