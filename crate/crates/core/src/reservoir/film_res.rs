use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::constants::{CELL_SIZE, INPUT_INTERVAL};
use crate::error::Error;
use crate::reservoir::state_matrix::StateMatrix;
use crate::reservoir::Reservoir;
use crate::spin::{derive_cell_params, Film, FilmState, MaterialParams, StepScratch};
use crate::vec3::Vec3;
use crate::Result;

/// Relaxation stops once the largest per-step change of any moment
/// component falls below this.
pub const RELAX_TOL: f64 = 1e-7;

/// Relaxation step cap; hitting it returns the current state with a flag.
pub const RELAX_MAX_STEPS: usize = 50_000;

/// Evolvable film-reservoir configuration: the input weight map plus the
/// tunable scalars, bound to a material, grid and operating point.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ReservoirGenome {
    /// Per-cell `[w_u, w_bias]` weights (tesla per unit input).
    pub w_in: Vec<[f64; 2]>,
    /// Field-intensity scaling, in (0, 2].
    pub b: f64,
    /// Gilbert damping, in (0, 1].
    pub alpha_damping: f64,
    /// Post-collection leak filter, in (0, 1].
    pub leak_a: f64,
    pub material: MaterialParams,
    pub nx: usize,
    pub ny: usize,
    /// Film thickness (m).
    pub thickness: f64,
    /// Operating temperature (K).
    pub temperature: f64,
}

impl ReservoirGenome {
    pub fn n_cells(&self) -> usize {
        self.nx * self.ny
    }

    pub fn validate(&self) -> Result<()> {
        if self.w_in.len() != self.n_cells() {
            return Err(Error::config(format!(
                "w_in has {} rows for {} cells",
                self.w_in.len(),
                self.n_cells()
            )));
        }
        if self
            .w_in
            .iter()
            .any(|w| !w[0].is_finite() || !w[1].is_finite())
        {
            return Err(Error::config("w_in entries must be finite"));
        }
        if !(self.b > 0.0 && self.b <= 2.0) {
            return Err(Error::config(format!(
                "b must lie in (0, 2], got {}",
                self.b
            )));
        }
        if !(self.alpha_damping > 0.0 && self.alpha_damping <= 1.0) {
            return Err(Error::config(format!(
                "alpha must lie in (0, 1], got {}",
                self.alpha_damping
            )));
        }
        if !(self.leak_a > 0.0 && self.leak_a <= 1.0) {
            return Err(Error::config(format!(
                "leak must lie in (0, 1], got {}",
                self.leak_a
            )));
        }
        if !(self.temperature >= 0.0) {
            return Err(Error::config("temperature must be non-negative"));
        }
        Ok(())
    }

    /// Per-cell applied field along z for input `u`: `b (w_u u + w_bias)`,
    /// with the bias source fixed at 1. This is the seam between task input
    /// and physics; everything downstream sees tesla.
    pub fn applied_field_for(&self, u: f64) -> Vec<f64> {
        self.w_in
            .iter()
            .map(|w| self.b * (w[0] * u + w[1]))
            .collect()
    }
}

/// Integrate the undriven film from the all-+x state until quiescent or the
/// step cap is reached. Returns the state and whether it converged; the cap
/// case is usable (the echo-state washout absorbs residual transients) but
/// flagged so callers can warn.
pub fn relax_film(film: &Film, dt: f64) -> (FilmState, bool) {
    let n = film.n_cells();
    let mut state = film.initial_state();
    let applied = vec![Vec3::ZERO; n];
    let mut scratch = StepScratch::new(n);
    // Relaxation is undriven and athermal, so the RNG is never consulted.
    let mut rng = ChaCha8Rng::seed_from_u64(0);

    let mut prev = state.m.clone();
    for _ in 0..RELAX_MAX_STEPS {
        if film
            .llg_step(&mut state, &applied, 0.0, dt, &mut rng, &mut scratch)
            .is_err()
        {
            return (state, false);
        }
        let mut max_change = 0.0f64;
        for (a, b) in state.m.iter().zip(prev.iter()) {
            let d = *a - *b;
            max_change = max_change.max(d.x.abs()).max(d.y.abs()).max(d.z.abs());
        }
        if max_change < RELAX_TOL {
            return (state, true);
        }
        prev.copy_from_slice(&state.m);
    }
    (state, false)
}

/// A film bound to its genome, relaxed once and re-driven from that state
/// for every input sequence, so train/validation/test phases start
/// identically.
#[derive(Clone, Debug)]
pub struct FilmReservoir {
    genome: ReservoirGenome,
    film: Film,
    relaxed: FilmState,
    relax_converged: bool,
    dt: f64,
    substeps: usize,
    thermal_seed: u64,
}

impl FilmReservoir {
    pub fn new(genome: ReservoirGenome, dt: f64, thermal_seed: u64) -> Result<FilmReservoir> {
        FilmReservoir::with_dipole_cutoff(genome, dt, thermal_seed, None)
    }

    pub fn with_dipole_cutoff(
        genome: ReservoirGenome,
        dt: f64,
        thermal_seed: u64,
        dipole_cutoff: Option<f64>,
    ) -> Result<FilmReservoir> {
        genome.validate()?;
        if !(dt > 0.0 && dt <= INPUT_INTERVAL) {
            return Err(Error::config(format!(
                "integrator dt must lie in (0, 10 ps], got {dt}"
            )));
        }
        let substeps = (INPUT_INTERVAL / dt).round() as usize;
        let cell = derive_cell_params(
            &genome.material,
            CELL_SIZE,
            genome.thickness,
            genome.alpha_damping,
        )?;
        let film = Film::with_dipole_cutoff(
            cell,
            genome.material.rescale(),
            genome.nx,
            genome.ny,
            dipole_cutoff,
        )?;
        // Relaxation happens at 0 K regardless of the operating temperature.
        let (relaxed, relax_converged) = relax_film(&film, dt);
        Ok(FilmReservoir {
            genome,
            film,
            relaxed,
            relax_converged,
            dt,
            substeps,
            thermal_seed,
        })
    }

    pub fn genome(&self) -> &ReservoirGenome {
        &self.genome
    }

    pub fn film(&self) -> &Film {
        &self.film
    }

    pub fn relaxed_state(&self) -> &FilmState {
        &self.relaxed
    }

    pub fn relax_converged(&self) -> bool {
        self.relax_converged
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn substeps_per_input(&self) -> usize {
        self.substeps
    }

    /// Drive and invoke `observer` with the film state at the end of each
    /// 10 ps input window (the sampling instant).
    pub fn drive_with_observer(
        &mut self,
        input: &[f64],
        mut observer: impl FnMut(usize, &FilmState),
    ) -> Result<StateMatrix> {
        self.drive_from_with_observer(self.relaxed.clone(), input, &mut observer)
    }

    /// Drive from an explicit initial state. Used directly by the
    /// echo-state convergence check; normal runs start from the relaxed
    /// state.
    pub fn drive_from_with_observer(
        &mut self,
        initial: FilmState,
        input: &[f64],
        observer: &mut dyn FnMut(usize, &FilmState),
    ) -> Result<StateMatrix> {
        let n = self.film.n_cells();
        let mut state = initial;
        state.time = 0.0;
        let mut rng = ChaCha8Rng::seed_from_u64(self.thermal_seed);
        let mut scratch = StepScratch::new(n);
        let mut applied = vec![Vec3::ZERO; n];

        let mut rows: Vec<Vec<f64>> = Vec::with_capacity(input.len());
        for (step, &u) in input.iter().enumerate() {
            for (cell, field_z) in applied.iter_mut().zip(self.genome.applied_field_for(u)) {
                *cell = Vec3::new(0.0, 0.0, field_z);
            }
            for _ in 0..self.substeps {
                self.film
                    .llg_step(
                        &mut state,
                        &applied,
                        self.genome.temperature,
                        self.dt,
                        &mut rng,
                        &mut scratch,
                    )
                    .map_err(|e| Error::DriveFailure {
                        step,
                        source: Box::new(e),
                    })?;
            }
            let mut row = Vec::with_capacity(3 * n);
            for m in &state.m {
                row.push(m.x);
                row.push(m.y);
                row.push(m.z);
            }
            rows.push(row);
            observer(step, &state);
        }
        StateMatrix::from_rows(&rows, 0)
    }

    /// Echo-state washout check: drive the same input prefix from the
    /// relaxed state and from the unrelaxed all-+x state; the genome is
    /// valid if the row distance decays below `tol` within `horizon` steps.
    pub fn echo_state_check(&mut self, prefix: &[f64], horizon: usize, tol: f64) -> Result<bool> {
        let a = self.drive_with_observer(prefix, |_, _| {})?;
        let b = self.drive_from_with_observer(self.film.initial_state(), prefix, &mut |_, _| {})?;
        let last = horizon.min(a.n_rows());
        if last == 0 {
            return Ok(false);
        }
        for t in (0..last).rev() {
            let mut dist_sq = 0.0;
            for c in 0..a.n_cols() {
                let d = a.data()[(t, c)] - b.data()[(t, c)];
                dist_sq += d * d;
            }
            // Require convergence at the horizon and keep it thereafter.
            if dist_sq.sqrt() > tol {
                return Ok(t + 1 < last);
            }
        }
        Ok(true)
    }
}

impl Reservoir for FilmReservoir {
    fn state_dim(&self) -> usize {
        3 * self.film.n_cells()
    }

    fn drive(&mut self, input: &[f64]) -> Result<StateMatrix> {
        self.drive_with_observer(input, |_, _| {})
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spin::Material;

    fn genome(nx: usize, ny: usize) -> ReservoirGenome {
        ReservoirGenome {
            w_in: vec![[0.4, 0.1]; nx * ny],
            b: 1.0,
            alpha_damping: 0.2,
            leak_a: 1.0,
            material: MaterialParams::builtin(Material::Co),
            nx,
            ny,
            thickness: 0.5e-9,
            temperature: 0.0,
        }
    }

    #[test]
    fn applied_field_scales_linearly_with_b() {
        let mut g = genome(2, 2);
        g.w_in = vec![[0.3, -0.2], [0.0, 0.5], [1.0, 0.0], [-0.4, 0.4]];
        let base = g.applied_field_for(0.7);
        g.b *= 2.0;
        let doubled = g.applied_field_for(0.7);
        for (b2, b1) in doubled.iter().zip(base.iter()) {
            assert_eq!(*b2, 2.0 * *b1, "doubling b must exactly double the field");
        }
        // And the bias source is the constant 1.
        let g2 = ReservoirGenome {
            w_in: vec![[0.0, 0.5]],
            ..genome(1, 1)
        };
        assert_eq!(g2.applied_field_for(123.0)[0], 0.5);
    }

    #[test]
    fn genome_validation_catches_out_of_range_scalars() {
        let mut g = genome(2, 2);
        g.b = 2.5;
        assert!(g.validate().is_err());
        let mut g = genome(2, 2);
        g.leak_a = 0.0;
        assert!(g.validate().is_err());
        let mut g = genome(2, 2);
        g.w_in[1][0] = f64::NAN;
        assert!(g.validate().is_err());
        let mut g = genome(2, 2);
        g.w_in.pop();
        assert!(g.validate().is_err());
    }

    #[test]
    fn relax_returns_immediately_for_a_stationary_start() {
        // Without pairwise dipole coupling and anisotropy torque, the
        // uniform +x state is an exact fixed point.
        let g = genome(3, 3);
        let cell =
            derive_cell_params(&g.material, CELL_SIZE, g.thickness, g.alpha_damping).unwrap();
        let film = Film::with_dipole_cutoff(cell, g.material.rescale(), 3, 3, Some(0.0)).unwrap();
        let (state, converged) = relax_film(&film, 1e-13);
        assert!(converged);
        for m in &state.m {
            assert!((m.x - 1.0).abs() < 1e-12 && m.y.abs() < 1e-12 && m.z.abs() < 1e-12);
        }
    }

    #[test]
    fn relaxation_is_deterministic_and_unit_norm() {
        let g = genome(3, 3);
        let r1 = FilmReservoir::new(g.clone(), 1e-13, 7).unwrap();
        let r2 = FilmReservoir::new(g, 1e-13, 7).unwrap();
        assert_eq!(r1.relaxed_state(), r2.relaxed_state());
        assert!(r1.relaxed_state().max_norm_error() < 1e-9);
    }

    #[test]
    fn unforced_film_repeats_its_relaxed_state() {
        // Zero input weights at 0 K: every state row equals the relaxed
        // configuration (dipole coupling off so relaxation is exact).
        let mut g = genome(3, 3);
        g.w_in = vec![[0.0, 0.0]; 9];
        let mut res = FilmReservoir::with_dipole_cutoff(g, 1e-13, 0, Some(0.0)).unwrap();
        let states = res.drive(&[0.3, 0.9, 0.1, 0.5]).unwrap();
        let relaxed = res.relaxed_state().clone();
        for t in 0..states.n_rows() {
            for (i, m) in relaxed.m.iter().enumerate() {
                assert!((states.data()[(t, 3 * i)] - m.x).abs() < 1e-12);
                assert!((states.data()[(t, 3 * i + 1)] - m.y).abs() < 1e-12);
                assert!((states.data()[(t, 3 * i + 2)] - m.z).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn state_dim_is_three_per_cell_and_drives_are_repeatable() {
        let mut res = FilmReservoir::new(genome(2, 3), 1e-13, 42).unwrap();
        assert_eq!(res.state_dim(), 18);
        let input = [0.2, 0.5, 0.0, 0.4, 0.1];
        let a = res.drive(&input).unwrap();
        let b = res.drive(&input).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.n_rows(), 5);
        assert_eq!(a.n_cols(), 18);
    }

    #[test]
    fn substep_count_follows_integrator_dt() {
        let r100 = FilmReservoir::new(genome(1, 1), 1e-13, 0).unwrap();
        assert_eq!(r100.substeps_per_input(), 100);
        let r1 = FilmReservoir::new(genome(1, 1), 1e-15, 0).unwrap();
        assert_eq!(r1.substeps_per_input(), 10_000);
    }

    #[test]
    fn echo_state_check_passes_for_a_damped_genome() {
        let mut g = genome(2, 2);
        g.alpha_damping = 0.5;
        g.w_in = vec![[0.5, 0.2]; 4];
        let mut res = FilmReservoir::new(g, 1e-13, 0).unwrap();
        let mut rng = crate::rng::stream_rng(5, 0);
        use rand::Rng;
        let prefix: Vec<f64> = (0..120).map(|_| rng.gen_range(0.0..0.5)).collect();
        assert!(res.echo_state_check(&prefix, 50, 1e-3).unwrap());
    }

    #[test]
    fn drive_failure_reports_input_step() {
        // Force instability with an oversized integrator step.
        let mut g = genome(1, 1);
        g.w_in = vec![[1.0, 1.0]];
        g.b = 2.0;
        let mut res = FilmReservoir::new(g, 10e-12, 0).unwrap();
        let err = res.drive(&[0.5, 0.5]).unwrap_err();
        match err {
            Error::DriveFailure { step, .. } => assert_eq!(step, 0),
            other => panic!("unexpected error {other:?}"),
        }
    }
}
