//! Reservoirs behind one drive interface: magnetic films interpreted as
//! reservoirs, and the digital echo-state-network baselines.

mod esn;
mod film_res;
mod state_matrix;

pub use esn::{esn_update, make_lattice_esn, make_random_esn, EsnConfig, EsnReservoir, Topology};
pub use film_res::{relax_film, FilmReservoir, ReservoirGenome, RELAX_MAX_STEPS, RELAX_TOL};
pub use state_matrix::{leaky_filter, StateMatrix};

use crate::Result;

/// Anything that maps a scalar input sequence to a matrix of observed
/// states, starting from a fixed initial condition on every call.
pub trait Reservoir {
    /// Number of observed state components per time step.
    fn state_dim(&self) -> usize;

    /// Drive with `input` and collect one state row per input step.
    /// Implementations reset to their initial condition first, so repeated
    /// calls with the same input give identical results.
    fn drive(&mut self, input: &[f64]) -> Result<StateMatrix>;
}
