pub mod config;
pub mod error;
pub mod simulate;
pub mod dualize;
pub mod sample;
pub mod verify;
