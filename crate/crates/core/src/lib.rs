//! Multi-cell massive MIMO uplink spectral efficiency under spatially
//! correlated Rician fading.
//!
//! The crate models a wrap-around grid of square cells whose BS-UE links
//! carry a deterministic LoS component plus spatially correlated NLoS
//! scattering. Channels are estimated from uplink pilots with either the
//! MMSE or the LS estimator and used for MR combining; the resulting
//! per-UE effective SINR and SE are available both in closed form and by
//! Monte Carlo moment estimation, and the two routes cross-validate each
//! other. The `experiment` module and the `rician-mimo` binary drive
//! antenna sweeps, SE distribution studies and validation runs from
//! declarative TOML configs, emitting CSV plus gnuplot scripts.

pub mod channel;
pub mod closed_form;
pub mod config;
pub mod error;
pub mod estimation;
pub mod experiment;
pub mod monte_carlo;
pub mod network;
pub mod rng;

pub use channel::{FadingMode, LinkStats};
pub use closed_form::{SeEvaluator, SinrBreakdownLs, SinrBreakdownMmse};
pub use config::SystemConfig;
pub use error::{Error, Result};
pub use estimation::{EstimateStats, PilotGroupStats};
pub use monte_carlo::{Combiner, McConfig, McMoments};
pub use network::{NetworkGeometry, NetworkRealization};
