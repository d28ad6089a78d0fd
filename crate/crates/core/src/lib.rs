//! Exact sum-of-squares certificates for polynomial nonnegativity.
//!
//! The crate is `no_std` (with `alloc`). File formats, networking and the
//! command line live in the companion `soscert` crate.

#![cfg_attr(not(test), no_std)]
#![allow(clippy::needless_range_loop, reason = "index loops mirror the matrix algebra")]

extern crate alloc;

pub mod bigfloat;
pub mod poly;
pub mod exact;
pub mod gram;
pub mod sym;
pub mod recover;
pub mod lean;
pub mod verify;
pub mod deadline;
pub mod refine;
pub mod datagen;
pub mod conjecture;
pub mod reward;
pub mod prove;
