//! Ferromagnetic thin films as reservoir computers.
//!
//! The crate simulates micromagnetic spin dynamics of Ni/Co/Fe films,
//! drives them with weighted input fields, trains a linear readout, and
//! benchmarks them against echo-state-network baselines on NARMA and
//! chaotic-laser tasks. A microbial genetic algorithm searches reservoir
//! configurations; kernel-rank and memory-capacity metrics characterise
//! the dynamics.
//!
//! Layering, bottom up:
//!
//! * [`spin`] — material database, cell-level constants, effective fields,
//!   stochastic Heun integration of the Landau–Lifshitz–Gilbert equation.
//! * [`reservoir`] — film and ESN reservoirs behind one drive interface.
//! * [`readout`] / [`tasks`] — ridge-regression readout, NMSE, benchmark data.
//! * [`metrics`] — kernel rank, memory capacity, rank-sum test.
//! * [`evolve`] — microbial GA and random-search baselines.
//! * [`eval`] — the drive → filter → train → score pipeline shared by all of it.
//!
//! All magnetic fields are in tesla. All randomness flows through seeded
//! [`rng`] streams so identical seeds give bit-identical results.

pub mod constants;
pub mod error;
pub mod eval;
pub mod evolve;
pub mod metrics;
pub mod readout;
pub mod reservoir;
pub mod rng;
pub mod spin;
pub mod tasks;
pub mod vec3;

pub use error::Error;
pub use eval::{EsnKind, EsnSearchConfig, EvalScore, FilmSearchConfig};
pub use readout::Readout;
pub use reservoir::{EsnConfig, FilmReservoir, Reservoir, ReservoirGenome, StateMatrix};
pub use spin::{CellParams, Film, FilmState, MaterialParams};
pub use tasks::TaskData;
pub use vec3::Vec3;

pub type Result<T> = std::result::Result<T, Error>;
