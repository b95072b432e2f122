//! Numerical laboratory for quantitative propagation of chaos.
//!
//! Modules: [`base`] (shared types), [`transport`], [`sobolev`], [`information`],
//! [`kacsphere`], [`clt`], [`chaos`], [`mixtures`] and [`cli`].

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod base;
pub mod chaos;
pub mod cli;
pub mod clt;
pub mod error;
pub mod information;
pub mod kacsphere;
pub mod mixtures;
pub mod sobolev;
pub mod transport;

pub use error::{Error, Result};
