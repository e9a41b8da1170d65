//! Storage, networking, file formats and the command line around
//! `voxplay-core`.

pub mod cli;
pub mod protocol;
pub mod server;
pub mod sim;
pub mod store;
pub mod wav;

pub use store::{checksum, SaveOutcome, SessionStore, StoreError};
