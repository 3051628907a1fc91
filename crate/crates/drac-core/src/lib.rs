//! Executable reference architecture for a design-center window-covering
//! ordering domain.
//!
//! The crate is organized around role components ("DRACs": Designer, Measurer,
//! Installer, Customer) described in a small line-oriented spec language. A
//! parsed architecture can be validated for dangling references and dataflow
//! loose ends, turned into a service dependency graph, and executed under a
//! deterministic discrete-event engine with contract checking, a lossy fax
//! channel, and an order lifecycle state machine.
//!
//! The crate is `no_std` (alloc required); file IO, the CLI and the persistent
//! order store live in the companion `drac-cli` crate.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod channel;
pub mod domain;
pub mod engine;
pub mod pricing;
pub mod scenario;
pub mod spec;

mod rng;

pub use rng::SplitMix64;
