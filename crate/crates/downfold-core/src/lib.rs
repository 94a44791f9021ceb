//! Core algorithms for recursive Hamiltonian downfolding.
//!
//! The crate is `no_std` with `alloc`; file I/O, threading and the command
//! line live in the `downfold` crate.

#![no_std]

extern crate alloc;

pub mod error;
pub mod fermion;
pub mod fock_oracle;
pub mod integrals;
pub mod qres;
pub mod rhd;
pub mod tensor;
pub mod tensorfactor;

pub use error::{Error, Result};
