//! Robust downlink multi-antenna precoding for one URLLC user, known only
//! through a history of past channel measurements, sharing a resource block
//! with `K` eMBB users whose instantaneous channels are known.
//!
//! The crate is organised bottom-up:
//!
//! * [`channel`]: deployments, Rician channels and the URLLC measurement history.
//! * [`stats`]: history statistics, candidate-channel synthesis, Student-t
//!   quantiles and the Chernoff outage certificate.
//! * [`precoders`]: ZF, TPM and MRT direction matrices.
//! * [`power`]: SINR evaluation and the target-SINR power allocation.
//! * [`solver`]: the randomized candidate search returning the
//!   minimum-power certified precoder.
//! * [`eval`]: Monte-Carlo outage, ensemble fits, confidence values and sweeps.

// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod channel;
pub mod config;
pub mod error;
pub mod eval;
pub mod linalg;
pub mod power;
pub mod precoders;
pub mod rng;
pub mod solver;
pub mod stats;

pub use config::{PrecoderKind, ScenarioConfig, ScenarioFile};
pub use error::{Error, Result};
pub use linalg::{CMatrix, CVector, Complex64};
pub use rng::{Purpose, RandomStream};
