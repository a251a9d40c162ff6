//! A numerical laboratory for the Schrodinger maximal function at a single scale `R`.
//!
//! The crate is organised around five library modules and a command-line front end:
//!
//! * [`field`]: spectral propagation of the free Schrodinger equation on a periodic grid,
//!   mixed `L^p_x L^q_t` norms, maximal functions, Littlewood-Paley slicing, parabolic
//!   rescaling and log-log exponent fitting.
//! * [`wavepacket`]: the tile frame `phi_{theta,nu}`, analysis/synthesis, tubes and
//!   localisation diagnostics.
//! * [`partition`]: polynomial ham-sandwich bisection, cells and walls, line crossings,
//!   tube-cell incidence and tangency classification.
//! * [`strichartz`]: cube unions, dyadic pigeonholing, decoupling ratios and refined
//!   (bilinear) Strichartz ratios.
//! * [`experiments`]: the packet-spread and sparse-focusing constructions and the named
//!   scaling experiments.
//! * [`io`] and [`cli`]: file formats, manifests, plots and the `schrodinger-lab` binary.
//!
//! Every capability has a runnable program under `examples/`; start with
//! `cargo run --release --example propagate`.

pub mod bump;
pub mod cli;
mod error;
pub mod experiments;
pub mod field;
pub mod io;
pub mod partition;
pub mod rng;
pub mod strichartz;
pub mod wavepacket;

pub use error::{Error, Result};
