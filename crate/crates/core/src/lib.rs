//! Spectrally sliced PAM4 IM/DD link simulation and reservoir-computing
//! equalization.
//!
//! The crate is organized after the signal chain:
//!
//! - [`link_sim`]: PAM4 frame generation, RRC shaping, MZM, fiber chromatic
//!   dispersion, optical spectral slicing and per-slice square-law detection
//!   with AWGN.
//! - [`esn`]: the sliding-window echo state network with multi-symbol
//!   readout (weights, windowing, state evolution, masked ridge training).
//! - [`eval`]: hard decisions, BER accounting, FEC-threshold SNR reading and
//!   the real-multiplications-per-symbol complexity measure.
//! - [`harness`]: experiment configuration, seeded sweeps and CSV output.
//!
//! Batch evaluation over sweep points runs on rayon when the `parallel`
//! feature is enabled (the default) and sequentially otherwise; see [`par`].

pub mod error;
pub mod esn;
pub mod eval;
pub mod harness;
pub mod link_sim;
pub mod par;
pub mod rng;

pub use error::{Error, Result};
