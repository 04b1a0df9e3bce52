//! Micromagnetic physics engine: material constants, cell-level
//! parameter derivation, Hamiltonian field terms, and stochastic Heun
//! integration of the Landau–Lifshitz–Gilbert equation.

mod cell;
mod film;
mod material;
pub mod snapshot;

pub use cell::{derive_cell_params, CellParams};
pub use film::{thermal_field, FieldSample, Film, FilmState, StepScratch};
pub use material::{Crystal, Material, MaterialParams, TempRescale};
