//! Deterministic random substreams.
//!
//! Every random draw in the crate comes from a ChaCha stream keyed by the
//! global seed plus a (domain, drop, trial, link, extra) tuple. Distinct
//! tuples give independent streams, so any trial or link can be regenerated
//! in isolation and parallel execution cannot change results.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Key domains keep unrelated draws on disjoint streams.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u8)]
pub enum Domain {
    /// Network geometry: UE drops, shadow fading, pilot allocation.
    Geometry = 1,
    /// Per-trial channel realizations.
    Channel = 2,
    /// Per-trial processed pilot noise.
    PilotNoise = 3,
    /// Randomized synthetic configurations in tests and sweeps.
    Synthetic = 4,
}

/// Stream for a (seed, domain, ids) tuple.
pub fn substream(seed: u64, domain: Domain, ids: [u32; 4]) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8] = domain as u8;
    for (slot, id) in ids.iter().enumerate() {
        let at = 12 + 4 * slot;
        key[at..at + 4].copy_from_slice(&id.to_le_bytes());
    }
    ChaCha8Rng::from_seed(key)
}

/// Stream driving all geometry draws of one UE drop.
pub fn geometry_rng(seed: u64, drop: u32) -> ChaCha8Rng {
    substream(seed, Domain::Geometry, [drop, 0, 0, 0])
}

/// Stream for the channel of link `link` (at BS `bs`) in Monte Carlo trial
/// `trial`.
pub fn channel_rng(seed: u64, drop: u32, trial: u32, link: u32, bs: u32) -> ChaCha8Rng {
    substream(seed, Domain::Channel, [drop, trial, link, bs])
}

/// Stream for the effective pilot noise at BS `bs` in trial `trial`.
pub fn pilot_noise_rng(seed: u64, drop: u32, trial: u32, bs: u32) -> ChaCha8Rng {
    substream(seed, Domain::PilotNoise, [drop, trial, 0, bs])
}
