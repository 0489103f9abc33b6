//! Hybrid analog/digital beamformer design for a millimeter-wave transmitter
//! that serves downlink communication and radar sensing at once.
//!
//! The design problem minimizes a weighted sum of distances to two
//! fully-digital references, a zero-forcing communication precoder and a
//! minimum-ISMR radar beamformer, under the hardware constraints of an analog
//! phase-shifter network. Two Riemannian solvers cover the two hardware
//! layouts:
//!
//! - [`madmm::madmm_solve`]: ADMM with a Riemannian conjugate-gradient inner
//!   step on the complex circle manifold, for fully-connected phase-shifter
//!   networks.
//! - [`rpmtr::rpmtr_solve`]: a trust-region method on the circle x sphere
//!   product manifold, for partially-connected networks.
//!
//! The surrounding simulation stack (clustered mmWave channels, transmit
//! beampatterns, spectral efficiency, ISMR) lives in [`channel`] and
//! [`scene`]; [`harness`] adds a reproducible experiment layer with JSON
//! configs and CSV export, exposed by the `dfrc` binary and mirrored by the
//! runnable examples in `examples/`.

// Positivity guards are written `!(x > 0.0)` on purpose: NaN must take the
// error path, which `x <= 0.0` would not do.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod beamformer;
pub mod channel;
pub mod error;
pub mod harness;
pub mod madmm;
pub mod manifold;
pub mod numerics;
pub mod objective;
pub mod rpmtr;
pub mod scene;

pub use beamformer::{FeasibilityReport, HybridBeamformer, SolverReport, SolverStatus, Structure};
pub use channel::{sample_channel, seeded_rng, spectral_efficiency, zf_precoder, ChannelRealization, LinkBudget, PowerMode};
pub use error::{Error, Result};
pub use harness::{ExperimentConfig, ResultRow, StructureChoice, SweepAxis};
pub use madmm::{madmm_solve, MadmmConfig, MadmmState, RcgConfig};
pub use manifold::{CirclePoint, SpherePoint, TangentPair};
pub use numerics::{CMat, CVec};
pub use objective::{weighted_objective, ConnectionMask, PartialPoint, ReferencePair, TradeoffConfig};
pub use rpmtr::{rpmtr_solve, TrConfig};
pub use scene::{beampattern, ismr, radar_reference, steering, AngularRegion, RadarScene, SceneGeometry, SystemConfig};
