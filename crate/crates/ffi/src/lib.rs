//! C ABI for the uplink SE calculator.
//!
//! The surface is deliberately small: build a system configuration,
//! realize a network drop for a seed, and read back the per-UE closed-form
//! SE or SINR for either estimator. Handles are opaque; every fallible
//! call returns an [`RmimoStatus`] and writes results through out
//! pointers. Objects must be released with their matching `_free`
//! function. The generated header lives in `include/rician_mimo.h`.

#![deny(unsafe_op_in_unsafe_fn)]

use std::ffi::{c_char, CStr};

use rician_mimo::closed_form::SeEvaluator;
use rician_mimo::error::Error;
use rician_mimo::network::realize_network;
use rician_mimo::rng::geometry_rng;
use rician_mimo::{FadingMode, NetworkRealization, SystemConfig};

/// Status codes returned by every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RmimoStatus {
    RmimoOk = 0,
    RmimoNullPointer = 1,
    RmimoInvalidArgument = 2,
    RmimoInvalidConfiguration = 3,
    RmimoValidationFailed = 4,
    RmimoInternalError = 5,
    RmimoIoError = 6,
    RmimoBufferTooSmall = 7,
}

impl From<&Error> for RmimoStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::InvalidArgument(_) => RmimoStatus::RmimoInvalidArgument,
            Error::InvalidConfiguration(_) => RmimoStatus::RmimoInvalidConfiguration,
            Error::ValidationFailed(_) => RmimoStatus::RmimoValidationFailed,
            Error::Internal(_) => RmimoStatus::RmimoInternalError,
            Error::Io { .. } => RmimoStatus::RmimoIoError,
        }
    }
}

/// Fading mode selector.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RmimoFading {
    RmimoFadingRician = 0,
    RmimoFadingRayleigh = 1,
}

impl From<RmimoFading> for FadingMode {
    fn from(f: RmimoFading) -> Self {
        match f {
            RmimoFading::RmimoFadingRician => FadingMode::Rician,
            RmimoFading::RmimoFadingRayleigh => FadingMode::Rayleigh,
        }
    }
}

/// Channel estimator selector for MR combining.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RmimoEstimator {
    RmimoEstimatorMmse = 0,
    RmimoEstimatorLs = 1,
}

/// Opaque system configuration handle.
pub struct RmimoConfig(SystemConfig);

/// Opaque realized-network handle.
pub struct RmimoNetwork(NetworkRealization);

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn rmimo_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Human-readable name of a status code (static string).
#[no_mangle]
pub extern "C" fn rmimo_status_name(status: RmimoStatus) -> *const c_char {
    let s: &'static str = match status {
        RmimoStatus::RmimoOk => "ok\0",
        RmimoStatus::RmimoNullPointer => "null pointer\0",
        RmimoStatus::RmimoInvalidArgument => "invalid argument\0",
        RmimoStatus::RmimoInvalidConfiguration => "invalid configuration\0",
        RmimoStatus::RmimoValidationFailed => "validation failed\0",
        RmimoStatus::RmimoInternalError => "internal error\0",
        RmimoStatus::RmimoIoError => "i/o error\0",
        RmimoStatus::RmimoBufferTooSmall => "buffer too small\0",
    };
    s.as_ptr() as *const c_char
}

/// Configuration with the 16-cell baseline parameters. Never fails.
/// Release with [`rmimo_config_free`].
#[no_mangle]
pub extern "C" fn rmimo_config_paper_default() -> *mut RmimoConfig {
    Box::into_raw(Box::new(RmimoConfig(SystemConfig::paper_defaults())))
}

/// Validated configuration from explicit parameters. On success writes the
/// handle to `out`; release with [`rmimo_config_free`].
///
/// # Safety
/// `out` must be a valid pointer to writable memory.
#[no_mangle]
pub unsafe extern "C" fn rmimo_config_new(
    antennas: u32,
    ues_per_cell: u32,
    cells: u32,
    coherence_len: u32,
    pilot_len: u32,
    ul_power_mw: f64,
    noise_mw: f64,
    asd_deg: f64,
    out: *mut *mut RmimoConfig,
) -> RmimoStatus {
    if out.is_null() {
        return RmimoStatus::RmimoNullPointer;
    }
    let cfg = SystemConfig {
        antennas: antennas as usize,
        ues_per_cell: ues_per_cell as usize,
        cells: cells as usize,
        coherence_len: coherence_len as usize,
        pilot_len: pilot_len as usize,
        ul_power_mw,
        noise_mw,
        asd_deg,
        bandwidth_hz: 20e6,
    };
    if let Err(e) = cfg.validate() {
        return (&e).into();
    }
    unsafe { *out = Box::into_raw(Box::new(RmimoConfig(cfg))) };
    RmimoStatus::RmimoOk
}

/// Releases a configuration handle; a null pointer is a no-op.
///
/// # Safety
/// `cfg` must be null or a pointer obtained from this library and not yet
/// freed.
#[no_mangle]
pub unsafe extern "C" fn rmimo_config_free(cfg: *mut RmimoConfig) {
    if !cfg.is_null() {
        drop(unsafe { Box::from_raw(cfg) });
    }
}

/// Realizes one network drop (geometry, shadowing, pilots and the full
/// link-statistics table) for a seed and drop index. Release with
/// [`rmimo_network_free`].
///
/// # Safety
/// `cfg` must be a live configuration handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn rmimo_network_realize(
    cfg: *const RmimoConfig,
    fading: RmimoFading,
    seed: u64,
    drop_index: u32,
    out: *mut *mut RmimoNetwork,
) -> RmimoStatus {
    if cfg.is_null() || out.is_null() {
        return RmimoStatus::RmimoNullPointer;
    }
    let cfg = unsafe { &(*cfg).0 };
    match realize_network(
        cfg,
        fading.into(),
        &mut geometry_rng(seed, drop_index),
        drop_index,
    ) {
        Ok(net) => {
            unsafe { *out = Box::into_raw(Box::new(RmimoNetwork(net))) };
            RmimoStatus::RmimoOk
        }
        Err(e) => (&e).into(),
    }
}

/// Releases a network handle; a null pointer is a no-op.
///
/// # Safety
/// `net` must be null or a pointer obtained from this library and not yet
/// freed.
#[no_mangle]
pub unsafe extern "C" fn rmimo_network_free(net: *mut RmimoNetwork) {
    if !net.is_null() {
        drop(unsafe { Box::from_raw(net) });
    }
}

/// Number of UEs in the network (the required length of result buffers).
///
/// # Safety
/// `net` must be a live network handle.
#[no_mangle]
pub unsafe extern "C" fn rmimo_network_ue_count(net: *const RmimoNetwork) -> u32 {
    if net.is_null() {
        return 0;
    }
    unsafe { &(*net).0 }.total_ues() as u32
}

fn fill_metric(
    net: &NetworkRealization,
    estimator: RmimoEstimator,
    out: &mut [f64],
    want_se: bool,
) -> RmimoStatus {
    let geo = &net.geometry;
    for bs in 0..net.config.cells {
        let targets: Vec<usize> = (0..net.total_ues())
            .filter(|&u| geo.serving[u] == bs)
            .collect();
        if targets.is_empty() {
            continue;
        }
        let eval = match SeEvaluator::new(&net.config, &net.links[bs], &geo.powers, &geo.pilots) {
            Ok(e) => e,
            Err(e) => return (&e).into(),
        };
        for t in targets {
            let r = match estimator {
                RmimoEstimator::RmimoEstimatorMmse => eval.sinr_mmse(t).map(|b| (b.sinr, b.se)),
                RmimoEstimator::RmimoEstimatorLs => eval.sinr_ls(t).map(|b| (b.sinr, b.se)),
            };
            match r {
                Ok((sinr, se)) => out[t] = if want_se { se } else { sinr },
                Err(e) => return (&e).into(),
            }
        }
    }
    RmimoStatus::RmimoOk
}

/// Per-UE closed-form SE (bit/s/Hz) under MR combining with the chosen
/// estimator, written to `out[0..len]`; `len` must be at least the UE
/// count. Entry order is `cell * ues_per_cell + k`.
///
/// # Safety
/// `net` must be a live network handle and `out` must point to `len`
/// writable doubles.
#[no_mangle]
pub unsafe extern "C" fn rmimo_network_se(
    net: *const RmimoNetwork,
    estimator: RmimoEstimator,
    out: *mut f64,
    len: usize,
) -> RmimoStatus {
    if net.is_null() || out.is_null() {
        return RmimoStatus::RmimoNullPointer;
    }
    let net = unsafe { &(*net).0 };
    if len < net.total_ues() {
        return RmimoStatus::RmimoBufferTooSmall;
    }
    let out = unsafe { std::slice::from_raw_parts_mut(out, len) };
    fill_metric(net, estimator, out, true)
}

/// Per-UE closed-form effective SINR (linear), same contract as
/// [`rmimo_network_se`].
///
/// # Safety
/// `net` must be a live network handle and `out` must point to `len`
/// writable doubles.
#[no_mangle]
pub unsafe extern "C" fn rmimo_network_sinr(
    net: *const RmimoNetwork,
    estimator: RmimoEstimator,
    out: *mut f64,
    len: usize,
) -> RmimoStatus {
    if net.is_null() || out.is_null() {
        return RmimoStatus::RmimoNullPointer;
    }
    let net = unsafe { &(*net).0 };
    if len < net.total_ues() {
        return RmimoStatus::RmimoBufferTooSmall;
    }
    let out = unsafe { std::slice::from_raw_parts_mut(out, len) };
    fill_metric(net, estimator, out, false)
}

/// Writes the network geometry dump (UTF-8 text records) to `path`.
///
/// # Safety
/// `net` must be a live network handle and `path` a NUL-terminated UTF-8
/// string.
#[no_mangle]
pub unsafe extern "C" fn rmimo_network_dump(
    net: *const RmimoNetwork,
    path: *const c_char,
) -> RmimoStatus {
    if net.is_null() || path.is_null() {
        return RmimoStatus::RmimoNullPointer;
    }
    let net = unsafe { &(*net).0 };
    let path = match unsafe { CStr::from_ptr(path) }.to_str() {
        Ok(s) => s,
        Err(_) => return RmimoStatus::RmimoInvalidArgument,
    };
    let mut buf = Vec::new();
    if rician_mimo::network::dump_network(&net.geometry, &mut buf).is_err() {
        return RmimoStatus::RmimoInternalError;
    }
    match rician_mimo::experiment::write_bytes(std::path::Path::new(path), &buf) {
        Ok(()) => RmimoStatus::RmimoOk,
        Err(e) => (&e).into(),
    }
}

/// SE from a linear SINR for a coherence block split: the pre-log factor
/// `(tau_c - tau_p)/tau_c` times `log2(1+sinr)`. Returns NaN for invalid
/// block lengths or a negative SINR.
#[no_mangle]
pub extern "C" fn rmimo_se_from_sinr(sinr: f64, coherence_len: u32, pilot_len: u32) -> f64 {
    if coherence_len == 0 || pilot_len >= coherence_len || sinr < 0.0 {
        return f64::NAN;
    }
    let prelog = (coherence_len - pilot_len) as f64 / coherence_len as f64;
    prelog * (1.0 + sinr).log2()
}

/// LoS path loss in dB for a distance in meters plus a shadow term.
/// Writes the result to `out`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rmimo_pathloss_los_db(
    distance_m: f64,
    shadow_db: f64,
    out: *mut f64,
) -> RmimoStatus {
    if out.is_null() {
        return RmimoStatus::RmimoNullPointer;
    }
    match rician_mimo::channel::pathloss_los(distance_m, shadow_db) {
        Ok(v) => {
            unsafe { *out = v };
            RmimoStatus::RmimoOk
        }
        Err(e) => (&e).into(),
    }
}

/// NLoS path loss in dB, same contract as [`rmimo_pathloss_los_db`].
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rmimo_pathloss_nlos_db(
    distance_m: f64,
    shadow_db: f64,
    out: *mut f64,
) -> RmimoStatus {
    if out.is_null() {
        return RmimoStatus::RmimoNullPointer;
    }
    match rician_mimo::channel::pathloss_nlos(distance_m, shadow_db) {
        Ok(v) => {
            unsafe { *out = v };
            RmimoStatus::RmimoOk
        }
        Err(e) => (&e).into(),
    }
}
