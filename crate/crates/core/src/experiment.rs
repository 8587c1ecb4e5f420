//! Experiment presets, runners and file outputs.
//!
//! Experiments are described by a small TOML file: a schema version, a
//! scenario preset, optional `[system]` overrides and run knobs. Unknown
//! keys are rejected. Runners execute drops in parallel but reduce in
//! drop order, so a rerun with the same config and seed yields
//! byte-identical CSV at any thread count.

use std::io::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Deserialize;

use crate::channel::FadingMode;
use crate::closed_form::SeEvaluator;
use crate::config::SystemConfig;
use crate::error::{Error, Result};
use crate::monte_carlo::{mc_moments, mc_sinr, validate, Combiner, McConfig};
use crate::network::{bs_grid, dump_network, realize_geometry, NetworkGeometry, NetworkRealization};
use crate::rng::geometry_rng;

/// Supported config schema version.
pub const SCHEMA_VERSION: u32 = 1;

/// Channel estimator selection for experiment runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Estimator {
    Mmse,
    Ls,
}

impl Estimator {
    pub fn label(&self) -> &'static str {
        match self {
            Estimator::Mmse => "mmse",
            Estimator::Ls => "ls",
        }
    }

    pub fn combiner(&self) -> Combiner {
        match self {
            Estimator::Mmse => Combiner::MrMmse,
            Estimator::Ls => Combiner::MrLs,
        }
    }
}

/// Scenario presets bundling default parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
pub enum Preset {
    #[serde(rename = "paper-fig1")]
    PaperFig1,
    #[serde(rename = "paper-fig2")]
    PaperFig2,
    #[serde(rename = "validate")]
    Validate,
    #[serde(rename = "custom")]
    Custom,
}

impl Preset {
    pub fn label(&self) -> &'static str {
        match self {
            Preset::PaperFig1 => "paper-fig1",
            Preset::PaperFig2 => "paper-fig2",
            Preset::Validate => "validate",
            Preset::Custom => "custom",
        }
    }
}

/// Fully resolved experiment description.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub scenario: Preset,
    pub system: SystemConfig,
    /// Antenna counts to evaluate.
    pub sweep: Vec<usize>,
    /// Independent UE drops.
    pub drops: usize,
    pub estimators: Vec<Estimator>,
    pub fading: Vec<FadingMode>,
    /// Monte Carlo trials for validation runs.
    pub mc_trials: usize,
    pub seed: u64,
    pub out: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn preset(p: Preset) -> Self {
        let both_est = vec![Estimator::Mmse, Estimator::Ls];
        let both_fad = vec![FadingMode::Rician, FadingMode::Rayleigh];
        match p {
            Preset::PaperFig1 => ExperimentConfig {
                scenario: p,
                system: SystemConfig::paper_defaults(),
                sweep: (1..=10).map(|i| i * 10).collect(),
                drops: 50,
                estimators: both_est,
                fading: both_fad,
                mc_trials: 100_000,
                seed: 1,
                out: None,
            },
            Preset::PaperFig2 => ExperimentConfig {
                scenario: p,
                sweep: vec![100],
                ..Self::preset(Preset::PaperFig1)
            },
            Preset::Validate => ExperimentConfig {
                scenario: p,
                system: SystemConfig {
                    antennas: 8,
                    ues_per_cell: 2,
                    cells: 4,
                    pilot_len: 2,
                    ..SystemConfig::paper_defaults()
                },
                sweep: vec![8, 32],
                drops: 1,
                ..Self::preset(Preset::PaperFig1)
            },
            Preset::Custom => ExperimentConfig {
                scenario: p,
                sweep: vec![100],
                drops: 1,
                ..Self::preset(Preset::PaperFig1)
            },
        }
    }

    /// Parses a TOML config on top of a preset's defaults. The file must
    /// carry `schema = 1`; unknown keys are errors.
    pub fn from_toml_str(text: &str, default_preset: Preset) -> Result<Self> {
        let raw: RawConfig = toml::from_str(text)
            .map_err(|e| Error::InvalidConfiguration(format!("config parse error: {e}")))?;
        if raw.schema != SCHEMA_VERSION {
            return Err(Error::InvalidConfiguration(format!(
                "unsupported schema version {} (expected {SCHEMA_VERSION})",
                raw.schema
            )));
        }
        let mut cfg = Self::preset(raw.scenario.unwrap_or(default_preset));
        if let Some(sys) = raw.system {
            sys.apply(&mut cfg.system);
        }
        if let Some(v) = raw.sweep {
            cfg.sweep = v;
        }
        if let Some(v) = raw.drops {
            cfg.drops = v;
        }
        if let Some(v) = raw.estimators {
            cfg.estimators = v;
        }
        if let Some(v) = raw.fading {
            cfg.fading = v;
        }
        if let Some(mc) = raw.mc {
            if let Some(t) = mc.trials {
                cfg.mc_trials = t;
            }
        }
        if let Some(v) = raw.seed {
            cfg.seed = v;
        }
        if let Some(v) = raw.out {
            cfg.out = Some(PathBuf::from(v));
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path, default_preset: Preset) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::io(path.display().to_string(), e))?;
        Self::from_toml_str(&text, default_preset)
    }

    pub fn validate(&self) -> Result<()> {
        self.system.validate()?;
        bs_grid(self.system.cells)?;
        if self.sweep.is_empty() {
            return Err(Error::InvalidConfiguration("sweep must not be empty".into()));
        }
        if self.sweep.iter().any(|&m| m == 0) {
            return Err(Error::InvalidConfiguration(
                "sweep entries must be positive antenna counts".into(),
            ));
        }
        if self.drops == 0 {
            return Err(Error::InvalidConfiguration("drops must be >= 1".into()));
        }
        if self.estimators.is_empty() || self.fading.is_empty() {
            return Err(Error::InvalidConfiguration(
                "estimators and fading lists must not be empty".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    schema: u32,
    scenario: Option<Preset>,
    sweep: Option<Vec<usize>>,
    drops: Option<usize>,
    estimators: Option<Vec<Estimator>>,
    fading: Option<Vec<FadingMode>>,
    seed: Option<u64>,
    out: Option<String>,
    system: Option<RawSystem>,
    mc: Option<RawMc>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSystem {
    antennas: Option<usize>,
    ues_per_cell: Option<usize>,
    cells: Option<usize>,
    coherence_len: Option<usize>,
    pilot_len: Option<usize>,
    ul_power_mw: Option<f64>,
    noise_mw: Option<f64>,
    asd_deg: Option<f64>,
    bandwidth_hz: Option<f64>,
}

impl RawSystem {
    fn apply(&self, sys: &mut SystemConfig) {
        if let Some(v) = self.antennas {
            sys.antennas = v;
        }
        if let Some(v) = self.ues_per_cell {
            sys.ues_per_cell = v;
        }
        if let Some(v) = self.cells {
            sys.cells = v;
        }
        if let Some(v) = self.coherence_len {
            sys.coherence_len = v;
        }
        if let Some(v) = self.pilot_len {
            sys.pilot_len = v;
        }
        if let Some(v) = self.ul_power_mw {
            sys.ul_power_mw = v;
        }
        if let Some(v) = self.noise_mw {
            sys.noise_mw = v;
        }
        if let Some(v) = self.asd_deg {
            sys.asd_deg = v;
        }
        if let Some(v) = self.bandwidth_hz {
            sys.bandwidth_hz = v;
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMc {
    trials: Option<usize>,
}

/// One aggregated sweep point: average per-cell sum SE over drops.
#[derive(Debug, Clone)]
pub struct CurvePoint {
    pub m: usize,
    pub estimator: Estimator,
    pub fading: FadingMode,
    pub mean_sum_se: f64,
    pub std_error: f64,
}

/// One empirical CDF sample.
#[derive(Debug, Clone)]
pub struct CdfPoint {
    pub estimator: Estimator,
    pub fading: FadingMode,
    pub se: f64,
    pub cdf: f64,
}

/// One per-UE result record.
#[derive(Debug, Clone)]
pub struct ResultRow {
    pub drop: usize,
    pub cell: usize,
    pub ue: usize,
    pub m: usize,
    pub estimator: Estimator,
    pub fading: FadingMode,
    pub se_closed: f64,
    pub se_mc: Option<f64>,
}

/// One per-UE validation record.
#[derive(Debug, Clone)]
pub struct ValidateRow {
    pub m: usize,
    pub fading: FadingMode,
    pub estimator: Estimator,
    pub drop: usize,
    pub cell: usize,
    pub ue: usize,
    pub gamma_closed: f64,
    pub gamma_mc: f64,
    pub mc_se: f64,
    pub rel_err: f64,
    pub pass: bool,
}

/// Closed-form per-UE SEs of one drop at one antenna count, for every
/// requested (fading, estimator) pair. Rician and Rayleigh evaluations
/// share the covariance matrices by construction.
fn evaluate_drop_m(
    system: &SystemConfig,
    geometry: &NetworkGeometry,
    m: usize,
    fading: &[FadingMode],
    estimators: &[Estimator],
) -> Result<Vec<(FadingMode, Estimator, Vec<f64>)>> {
    let cfg = system.with_antennas(m);
    let n_ue = geometry.total_ues();
    let mut out: Vec<(FadingMode, Estimator, Vec<f64>)> = fading
        .iter()
        .flat_map(|&f| estimators.iter().map(move |&e| (f, e, vec![0.0; n_ue])))
        .collect();

    for bs in 0..geometry.cells {
        let targets: Vec<usize> = (0..n_ue).filter(|&u| geometry.serving[u] == bs).collect();
        if targets.is_empty() {
            continue;
        }
        let rician_links = geometry.links_at_bs(&cfg, FadingMode::Rician, bs)?;
        for &mode in fading {
            let blocked;
            let links = match mode {
                FadingMode::Rician => &rician_links,
                FadingMode::Rayleigh => {
                    blocked = rician_links.iter().map(|l| l.blocked_los()).collect::<Vec<_>>();
                    &blocked
                }
            };
            let eval = SeEvaluator::new(&cfg, links, &geometry.powers, &geometry.pilots)?;
            for slot in out.iter_mut().filter(|(f, _, _)| *f == mode) {
                for &t in &targets {
                    slot.2[t] = match slot.1 {
                        Estimator::Mmse => eval.sinr_mmse(t)?.se,
                        Estimator::Ls => eval.sinr_ls(t)?.se,
                    };
                }
            }
        }
    }
    Ok(out)
}

/// Average UL sum SE per cell as a function of the antenna count.
pub fn run_fig1(cfg: &ExperimentConfig) -> Result<Vec<CurvePoint>> {
    cfg.validate()?;
    let per_drop: Vec<Vec<(usize, FadingMode, Estimator, f64)>> = (0..cfg.drops)
        .into_par_iter()
        .map(|drop| -> Result<_> {
            let geometry =
                realize_geometry(&cfg.system, &mut geometry_rng(cfg.seed, drop as u32), drop as u32)?;
            let mut rows = Vec::new();
            for &m in &cfg.sweep {
                for (fad, est, ses) in
                    evaluate_drop_m(&cfg.system, &geometry, m, &cfg.fading, &cfg.estimators)?
                {
                    let sum_per_cell = ses.iter().sum::<f64>() / cfg.system.cells as f64;
                    rows.push((m, fad, est, sum_per_cell));
                }
            }
            Ok(rows)
        })
        .collect::<Result<Vec<_>>>()?;

    let mut points = Vec::new();
    for &m in &cfg.sweep {
        for &est in &cfg.estimators {
            for &fad in &cfg.fading {
                let samples: Vec<f64> = per_drop
                    .iter()
                    .flat_map(|rows| {
                        rows.iter()
                            .filter(|(rm, rf, re, _)| *rm == m && *rf == fad && *re == est)
                            .map(|(_, _, _, v)| *v)
                    })
                    .collect();
                let n = samples.len() as f64;
                let mean = samples.iter().sum::<f64>() / n;
                let std_error = if samples.len() > 1 {
                    let var = samples.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
                    (var / n).sqrt()
                } else {
                    0.0
                };
                points.push(CurvePoint {
                    m,
                    estimator: est,
                    fading: fad,
                    mean_sum_se: mean,
                    std_error,
                });
            }
        }
    }
    Ok(points)
}

/// Per-UE closed-form rows over all drops at the first sweep entry
/// (optionally with a Monte Carlo SE per row).
pub fn run_rows(cfg: &ExperimentConfig, with_mc: bool) -> Result<Vec<ResultRow>> {
    cfg.validate()?;
    let m = cfg.sweep[0];
    let per_drop: Vec<Vec<ResultRow>> = (0..cfg.drops)
        .into_par_iter()
        .map(|drop| -> Result<_> {
            let geometry =
                realize_geometry(&cfg.system, &mut geometry_rng(cfg.seed, drop as u32), drop as u32)?;
            let mut rows = Vec::new();
            let evals = evaluate_drop_m(&cfg.system, &geometry, m, &cfg.fading, &cfg.estimators)?;
            let sys_m = cfg.system.with_antennas(m);
            for (fad, est, ses) in evals {
                let mc_ses: Option<Vec<f64>> = if with_mc && cfg.mc_trials > 0 {
                    let realization = materialize(&sys_m, &geometry, fad)?;
                    let mc = McConfig {
                        n_realizations: cfg.mc_trials,
                        seed: cfg.seed,
                        ..McConfig::default()
                    };
                    let mut v = Vec::with_capacity(ses.len());
                    for ue in 0..ses.len() {
                        let mom = mc_moments(&realization, ue, est.combiner(), &mc)?;
                        let (gamma, _) = mc_sinr(&mom, geometry.powers[ue], sys_m.noise_mw);
                        v.push(crate::closed_form::se_from_sinr(gamma, &sys_m));
                    }
                    Some(v)
                } else {
                    None
                };
                for (ue, &se) in ses.iter().enumerate() {
                    rows.push(ResultRow {
                        drop,
                        cell: geometry.cell_of(ue),
                        ue: geometry.index_in_cell(ue),
                        m,
                        estimator: est,
                        fading: fad,
                        se_closed: se,
                        se_mc: mc_ses.as_ref().map(|v| v[ue]),
                    });
                }
            }
            Ok(rows)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(per_drop.into_iter().flatten().collect())
}

/// Empirical CDF of the per-UE SE, pooled over drops and cells.
pub fn run_fig2(cfg: &ExperimentConfig) -> Result<Vec<CdfPoint>> {
    let rows = run_rows(cfg, false)?;
    let mut points = Vec::new();
    for &est in &cfg.estimators {
        for &fad in &cfg.fading {
            let mut pool: Vec<f64> = rows
                .iter()
                .filter(|r| r.estimator == est && r.fading == fad)
                .map(|r| r.se_closed)
                .collect();
            pool.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let n = pool.len() as f64;
            points.extend(pool.iter().enumerate().map(|(i, &se)| CdfPoint {
                estimator: est,
                fading: fad,
                se,
                cdf: (i + 1) as f64 / n,
            }));
        }
    }
    Ok(points)
}

fn materialize(
    system: &SystemConfig,
    geometry: &NetworkGeometry,
    fading: FadingMode,
) -> Result<NetworkRealization> {
    let links = (0..geometry.cells)
        .map(|bs| geometry.links_at_bs(system, fading, bs))
        .collect::<Result<Vec<_>>>()?;
    Ok(NetworkRealization {
        config: system.clone(),
        fading,
        geometry: geometry.clone(),
        links,
    })
}

/// Closed form vs Monte Carlo for every UE, antenna count, fading mode
/// and estimator. Returns the rows plus the overall verdict.
pub fn run_validate(cfg: &ExperimentConfig) -> Result<(Vec<ValidateRow>, bool)> {
    cfg.validate()?;
    let mc = McConfig {
        n_realizations: cfg.mc_trials.max(1),
        seed: cfg.seed,
        ..McConfig::default()
    };
    let mut rows = Vec::new();
    for drop in 0..cfg.drops {
        let geometry =
            realize_geometry(&cfg.system, &mut geometry_rng(cfg.seed, drop as u32), drop as u32)?;
        for &m in &cfg.sweep {
            let sys_m = cfg.system.with_antennas(m);
            for &fad in &cfg.fading {
                let realization = materialize(&sys_m, &geometry, fad)?;
                for &est in &cfg.estimators {
                    let report = validate(&realization, est.combiner(), &mc)?;
                    for r in report {
                        rows.push(ValidateRow {
                            m,
                            fading: fad,
                            estimator: est,
                            drop,
                            cell: r.cell,
                            ue: r.index_in_cell,
                            gamma_closed: r.gamma_closed,
                            gamma_mc: r.gamma_mc,
                            mc_se: r.se_mc,
                            rel_err: r.rel_err,
                            pass: r.pass,
                        });
                    }
                }
            }
        }
    }
    let all_pass = rows.iter().all(|r| r.pass);
    Ok((rows, all_pass))
}

/// Writes the drop-0 network geometry dump.
pub fn dump_network_file(cfg: &ExperimentConfig, path: &Path) -> Result<()> {
    cfg.validate()?;
    let geometry = realize_geometry(&cfg.system, &mut geometry_rng(cfg.seed, 0), 0)?;
    let mut buf = Vec::new();
    dump_network(&geometry, &mut buf).map_err(|e| Error::io(path.display().to_string(), e))?;
    write_bytes(path, &buf)
}

pub fn fig1_csv(points: &[CurvePoint]) -> String {
    let mut s = String::from("m,estimator,fading,mean_sum_se,std_error\n");
    for p in points {
        s.push_str(&format!(
            "{},{},{},{},{}\n",
            p.m,
            p.estimator.label(),
            p.fading.label(),
            p.mean_sum_se,
            p.std_error
        ));
    }
    s
}

pub fn fig2_csv(points: &[CdfPoint]) -> String {
    let mut s = String::from("estimator,fading,se,cdf\n");
    for p in points {
        s.push_str(&format!(
            "{},{},{},{}\n",
            p.estimator.label(),
            p.fading.label(),
            p.se,
            p.cdf
        ));
    }
    s
}

pub fn validate_csv(rows: &[ValidateRow]) -> String {
    let mut s = String::from(
        "m,fading,estimator,drop,cell,ue,gamma_closed,gamma_mc,mc_se,rel_err,pass\n",
    );
    for r in rows {
        s.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{}\n",
            r.m,
            r.fading.label(),
            r.estimator.label(),
            r.drop,
            r.cell,
            r.ue,
            r.gamma_closed,
            r.gamma_mc,
            r.mc_se,
            r.rel_err,
            r.pass
        ));
    }
    s
}

pub fn rows_csv(rows: &[ResultRow]) -> String {
    let mut s = String::from("drop,cell,ue,m,estimator,fading,se_closed,se_mc\n");
    for r in rows {
        s.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            r.drop,
            r.cell,
            r.ue,
            r.m,
            r.estimator.label(),
            r.fading.label(),
            r.se_closed,
            r.se_mc.map(|v| v.to_string()).unwrap_or_default()
        ));
    }
    s
}

pub fn write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir).map_err(|e| Error::io(dir.display().to_string(), e))?;
        }
    }
    let mut f =
        std::fs::File::create(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    f.write_all(bytes)
        .map_err(|e| Error::io(path.display().to_string(), e))
}

/// Writes a gnuplot script rendering a fig1/fig2 CSV; returns the script
/// path (the CSV path with a `.gp` extension). Regeneration is idempotent.
pub fn emit_plot_script(csv_path: &Path, preset: Preset) -> Result<PathBuf> {
    let script_path = csv_path.with_extension("gp");
    let csv_name = csv_path
        .file_name()
        .ok_or_else(|| Error::InvalidArgument("csv path has no file name".into()))?
        .to_string_lossy()
        .into_owned();
    let curves = [
        ("mmse", "rician", "MMSE, Rician"),
        ("ls", "rician", "LS, Rician"),
        ("mmse", "rayleigh", "MMSE, Rayleigh"),
        ("ls", "rayleigh", "LS, Rayleigh"),
    ];
    let mut s = String::new();
    s.push_str("set datafile separator \",\"\n");
    s.push_str("set key bottom right\n");
    s.push_str("set grid\n");
    match preset {
        Preset::PaperFig2 => {
            s.push_str("set xlabel \"SE per UE [bit/s/Hz]\"\n");
            s.push_str("set ylabel \"CDF\"\n");
            s.push_str("set yrange [0:1]\n");
            let mut first = true;
            for (est, fad, title) in curves {
                s.push_str(if first { "plot " } else { ",\\\n     " });
                first = false;
                s.push_str(&format!(
                    "\"{csv_name}\" skip 1 using (strcol(1) eq \"{est}\" && strcol(2) eq \"{fad}\" ? $3 : NaN):4 with lines title \"{title}\""
                ));
            }
            s.push('\n');
        }
        _ => {
            s.push_str("set xlabel \"Number of BS antennas (M)\"\n");
            s.push_str("set ylabel \"Average sum SE [bit/s/Hz/cell]\"\n");
            let mut first = true;
            for (est, fad, title) in curves {
                s.push_str(if first { "plot " } else { ",\\\n     " });
                first = false;
                s.push_str(&format!(
                    "\"{csv_name}\" skip 1 using 1:(strcol(2) eq \"{est}\" && strcol(3) eq \"{fad}\" ? $4 : NaN) with linespoints title \"{title}\""
                ));
            }
            s.push('\n');
        }
    }
    write_bytes(&script_path, s.as_bytes())?;
    Ok(script_path)
}
