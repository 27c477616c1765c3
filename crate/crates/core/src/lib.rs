//! Femtocell/macrocell interference simulator with dynamic frequency re-use.
//!
//! The crate is organised bottom-up:
//!
//! - [`spectrum`]: bands and the four allocation schemes (dedicated, same,
//!   partial, dynamic re-use) with co-channel indicators.
//! - [`topology`]: macro BS, FAP placement for scenarios A–D, neighbor graph.
//! - [`channel`]: path loss, wall loss and exponential fading per link.
//! - [`outage`]: closed-form conditional outage and Monte Carlo estimation.
//! - [`son`]: edge-band coloring, power requests and FAP admission.
//! - [`config`] and [`experiment`]: key=value experiment files, named
//!   experiments and CSV output.

pub mod channel;
pub mod config;
pub mod error;
pub mod experiment;
pub mod outage;
pub mod son;
pub mod spectrum;
pub mod topology;

pub use error::{Error, Result};
