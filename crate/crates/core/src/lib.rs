//! Random sequential adsorption of segments and disks whose size shrinks in
//! time towards a final value.
//!
//! Monte Carlo engines ([`sim1d`], [`sim2d`]), a deterministic gap-density
//! solver ([`kinetics1d`]), the exact fixed-size solution ([`exact1d`]), and
//! peak/fit analysis ([`analysis`]). [`config`] and [`execute`] tie them to
//! JSON configs and file outputs.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod config;
pub mod error;
pub mod exact1d;
pub mod execute;
pub mod histogram;
pub mod kinetics1d;
mod quad;
pub mod replicas;
pub mod schedules;
pub mod sim1d;
pub mod sim2d;

pub use error::{Error, Result};
pub use histogram::{DistributionHistogram, HistogramKind};
pub use schedules::{ScheduleKind, SizeSchedule};
