//! Network-GME certification: fidelity witnesses from multipartite product
//! overlaps, and Wigner-Yanase-Dyson Bell-type inequalities for genuine
//! multipartite entanglement and entanglement depth.

pub mod bell;
pub mod bounds;
pub mod error;
pub mod ledger;
pub mod oracle;
pub mod state_spec;
pub mod states;
pub mod suite;
pub mod tensor;
pub mod witness;

pub use error::{Error, Result, MAX_TOTAL_DIM};
