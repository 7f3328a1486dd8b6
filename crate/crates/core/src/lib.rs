//! Robust joint design of UAV trajectory, RIS passive beamforming and
//! transmit power for secrecy-rate maximization in an RIS-assisted UAV
//! uplink/downlink, with bounded uncertainty on the eavesdropper channels.
//!
//! The crate is organized bottom-up:
//!
//! * [`channel`]: scenario geometry, path loss, URA steering vectors, Rician
//!   fading draws and composite link gains.
//! * [`csi`]: the deterministic error ball and its closed-form worst case.
//! * [`power`]: closed-form DL/UL power control with a dual bisection.
//! * [`conic`]: a solver-agnostic cone program, the Clarabel adapter and an
//!   independent residual verifier.
//! * [`beamforming`]: per-slot S-Procedure LMIs, SDR and Gaussian randomization.
//! * [`trajectory`]: one SCA step of the joint-slot trajectory program.
//! * [`ao`]: the alternating driver, secrecy evaluation and benchmarks.
//! * [`experiment`]: configuration files, seeded sweeps and CSV output.

// Links the system OpenBLAS/LAPACK used by the SDP backend.
extern crate openblas_src;

pub mod ao;
pub mod beamforming;
pub mod channel;
pub mod conic;
pub mod csi;
pub mod experiment;
pub mod linalg;
pub mod power;
pub mod trajectory;

mod error;

pub use error::{Error, Result};

pub use ao::{Algorithm, Design, SecrecyReport};
pub use channel::{ChannelRealization, Scenario};
