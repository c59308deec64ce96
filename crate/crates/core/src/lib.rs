//! Security bounds for the SARG04 protocol and its BB84 comparison
//! points: single-photon lower and upper bounds on the key rate, the
//! attenuated-laser detection model, photon-number-splitting attacks and
//! the optimization of Alice's operating parameters.

pub mod detection;
pub mod error;
pub mod exec;
pub mod incoherent;
pub mod lower_bound;
pub mod lp;
pub mod optim;
pub mod pns;
pub mod qmath;
pub mod sweep;

pub use error::{QkdError, Result};
pub use exec::Execution;
