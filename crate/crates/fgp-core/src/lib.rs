//! Discrete-time engine for functionally generated trading strategies on the
//! open unit simplex.
//!
//! The market is a fixed sequence of weight vectors `μ(t)`; all values are
//! measured relative to the market portfolio. A generating function `φ`
//! produces a self-financing trading strategy under one of three schemes
//! (multiplicative, additive, or the two-parameter `(α, C)` family), and the
//! value of every such strategy decomposes pathwise into a drift term
//! `φ(μ(t)) − φ(μ(0))` plus an accumulated divergence.
//!
//! Modules:
//! - [`market`]: simplex arithmetic, market paths, value processes and the
//!   self-financing machinery.
//! - [`genfun`]: generating functions (evaluation, gradients, concavity
//!   diagnostics) and the builtin catalog.
//! - [`divergence`]: the L-, Bregman- and `L^(α)`-divergences together with
//!   their local quadratic (Riemannian) structure.
//! - [`strategy`]: strategy construction, execution over paths, and the
//!   pathwise value decompositions.
//! - [`geomtrans`]: optimal-transport monotonicity oracles, dually flat
//!   Bregman geometry, the rebalancing comparison and the scale-function ODE.
//! - [`sample`]: seeded random interior points, tangent vectors and paths,
//!   used by diagnostics and verification suites.
//!
//! The crate is `no_std`-compatible (requires `alloc`); disable the default
//! `std` feature for embedded or wasm targets.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod divergence;
pub mod genfun;
pub mod geomtrans;
pub mod market;
pub mod sample;
pub mod strategy;

pub use divergence::{DivergenceError, DivergenceKind, MetricMatrix};
pub use genfun::{CrossEntropy, Diversity, GenFunError, GeneratingFunction, NegHalfSquaredNorm};
pub use market::{MarketError, MarketPath, ShareVector, SimplexPoint, TangentVector, ValueSeries};
pub use strategy::{DecompositionReport, GenerationScheme, SchemeKind, StrategyError, StrategyRun};
