//! Kinematic analytics for music-cued upper-limb rehabilitation.
//!
//! Motion-capture trials (`.trc`) are ingested into a directory-backed
//! store, each trial is reduced to displacement, velocity, smoothness
//! (spectral arc length), periodicity (auto-correlation) and spectrum
//! summaries, and the results are rolled up per session and per patient.
//! The [`api`] module serves those views as JSON.

pub mod aggregate;
pub mod api;
pub mod cli;
pub mod kinematics;
pub mod signal;
pub mod store;
pub mod trc;
