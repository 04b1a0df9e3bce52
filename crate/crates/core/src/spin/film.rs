use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::constants::{K_B, MU_0};
use crate::error::Error;
use crate::spin::cell::CellParams;
use crate::spin::material::TempRescale;
use crate::vec3::Vec3;
use crate::Result;

/// Per-cell unit magnetisation grid plus simulated time.
#[derive(Clone, Debug, PartialEq)]
pub struct FilmState {
    /// Unit vectors, row-major: index = iy * nx + ix.
    pub m: Vec<Vec3>,
    /// Simulated time (s).
    pub time: f64,
}

impl FilmState {
    pub fn uniform(n_cells: usize, dir: Vec3) -> FilmState {
        FilmState {
            m: vec![dir.normalized(); n_cells],
            time: 0.0,
        }
    }

    /// Largest deviation of any cell moment from unit length.
    pub fn max_norm_error(&self) -> f64 {
        self.m
            .iter()
            .map(|m| (m.norm() - 1.0).abs())
            .fold(0.0, f64::max)
    }
}

/// Per-cell field vectors for each Hamiltonian term (tesla).
#[derive(Clone, Debug)]
pub struct FieldSample {
    pub applied: Vec<Vec3>,
    pub anisotropy: Vec<Vec3>,
    pub exchange: Vec<Vec3>,
    pub dipole: Vec<Vec3>,
    pub thermal: Vec<Vec3>,
}

impl FieldSample {
    /// Sum of all terms at cell `i`.
    pub fn total(&self, i: usize) -> Vec3 {
        self.applied[i] + self.anisotropy[i] + self.exchange[i] + self.dipole[i] + self.thermal[i]
    }
}

/// Reusable integration buffers so the drive loop never allocates.
#[derive(Clone, Debug)]
pub struct StepScratch {
    field: Vec<Vec3>,
    slope: Vec<Vec3>,
    predictor: Vec<Vec3>,
    thermal: Vec<Vec3>,
    m_flat: DVector<f64>,
    dip_flat: DVector<f64>,
}

impl StepScratch {
    pub fn new(n_cells: usize) -> StepScratch {
        StepScratch {
            field: vec![Vec3::ZERO; n_cells],
            slope: vec![Vec3::ZERO; n_cells],
            predictor: vec![Vec3::ZERO; n_cells],
            thermal: vec![Vec3::ZERO; n_cells],
            m_flat: DVector::zeros(3 * n_cells),
            dip_flat: DVector::zeros(3 * n_cells),
        }
    }
}

/// Demagnetising factors of a rectangular prism with edge lengths
/// `(dx, dy, dz)`, magnetised uniformly (Aharoni's closed form). The
/// factors are positive and sum to 1; a cube gives 1/3 per axis and a
/// thin platelet pushes the short-axis factor towards 1.
pub fn prism_demag_factors(dx: f64, dy: f64, dz: f64) -> (f64, f64, f64) {
    // D along the third (c) semi-axis.
    fn d_along(a: f64, b: f64, c: f64) -> f64 {
        let (a2, b2, c2) = (a * a, b * b, c * c);
        let rabc = (a2 + b2 + c2).sqrt();
        let rab = (a2 + b2).sqrt();
        let rbc = (b2 + c2).sqrt();
        let rac = (a2 + c2).sqrt();
        let pi_d = (b2 - c2) / (2.0 * b * c) * ((rabc - a) / (rabc + a)).ln()
            + (a2 - c2) / (2.0 * a * c) * ((rabc - b) / (rabc + b)).ln()
            + b / (2.0 * c) * ((rab + a) / (rab - a)).ln()
            + a / (2.0 * c) * ((rab + b) / (rab - b)).ln()
            + c / (2.0 * a) * ((rbc - b) / (rbc + b)).ln()
            + c / (2.0 * b) * ((rac - a) / (rac + a)).ln()
            + 2.0 * (a * b / (c * rabc)).atan()
            + (a2 * a + b2 * b - 2.0 * c2 * c) / (3.0 * a * b * c)
            + (a2 + b2 - 2.0 * c2) / (3.0 * a * b * c) * rabc
            + c / (a * b) * (rac + rbc)
            - (rab.powi(3) + rbc.powi(3) + rac.powi(3)) / (3.0 * a * b * c);
        pi_d / std::f64::consts::PI
    }
    let (a, b, c) = (dx / 2.0, dy / 2.0, dz / 2.0);
    let nz = d_along(a, b, c);
    let nx = d_along(b, c, a);
    let ny = d_along(c, a, b);
    (nx, ny, nz)
}

/// A rectangular film of coarse-grained cells with precomputed
/// interaction geometry. Field evaluation and integration live here;
/// the magnetisation itself lives in [`FilmState`] so independent
/// trajectories can share one `Film`.
#[derive(Clone, Debug)]
pub struct Film {
    cell: CellParams,
    rescale: TempRescale,
    nx: usize,
    ny: usize,
    /// Pairwise dipole cutoff radius (m); `None` sums over all pairs.
    dipole_cutoff: Option<f64>,
    /// (3N × 3N) dipole operator: pairwise point-dipole tensors plus the
    /// per-cell self-demagnetisation block −μ0·Ms·diag(Nx, Ny, Nz) on the
    /// diagonal, with the prism factors of the cell geometry. (A sphere
    /// term −μ0·Ms/3 would be torque-free and let the uniaxial z
    /// anisotropy pull thin films out of plane, killing their response to
    /// z-axis input fields; the platelet factors keep them in-plane.)
    dipole: DMatrix<f64>,
    /// Up to four in-plane nearest neighbours per cell, open boundaries.
    neighbours: Vec<[u32; 4]>,
    neighbour_count: Vec<u8>,
    /// Exchange prefactor 2A / (Ms Δ² m_e²)  (T per unit Δm).
    c_exchange: f64,
    /// Anisotropy prefactor 2 k_u / Ms  (T).
    c_anisotropy: f64,
}

impl Film {
    pub fn new(cell: CellParams, rescale: TempRescale, nx: usize, ny: usize) -> Result<Film> {
        Film::with_dipole_cutoff(cell, rescale, nx, ny, None)
    }

    pub fn with_dipole_cutoff(
        cell: CellParams,
        rescale: TempRescale,
        nx: usize,
        ny: usize,
        dipole_cutoff: Option<f64>,
    ) -> Result<Film> {
        if nx == 0 || ny == 0 {
            return Err(Error::config("film grid must be at least 1×1"));
        }
        if !(cell.alpha_damping >= 0.0 && cell.alpha_damping <= 1.0) {
            return Err(Error::config(format!(
                "damping must lie in [0, 1], got {}",
                cell.alpha_damping
            )));
        }
        let n = nx * ny;
        let delta = cell.cell_size_delta;

        let mut neighbours = vec![[0u32; 4]; n];
        let mut neighbour_count = vec![0u8; n];
        for iy in 0..ny {
            for ix in 0..nx {
                let i = iy * nx + ix;
                let mut push = |j: usize| {
                    neighbours[i][neighbour_count[i] as usize] = j as u32;
                    neighbour_count[i] += 1;
                };
                if ix > 0 {
                    push(i - 1);
                }
                if ix + 1 < nx {
                    push(i + 1);
                }
                if iy > 0 {
                    push(i - nx);
                }
                if iy + 1 < ny {
                    push(i + nx);
                }
            }
        }

        // Dipole operator: field at i from the moment of j is
        //   (μ0 / 4π) Ms V (3 (m_j·r̂) r̂ − m_j) / |r|³
        // with r the vector from j to i; the diagonal holds the cell's own
        // demagnetising field −μ0 Ms (Nx mx, Ny my, Nz mz).
        let prefactor = MU_0 * cell.ms * cell.volume() / (4.0 * std::f64::consts::PI);
        let (n_x, n_y, n_z) = prism_demag_factors(delta, delta, cell.thickness);
        let self_terms = [
            -MU_0 * cell.ms * n_x,
            -MU_0 * cell.ms * n_y,
            -MU_0 * cell.ms * n_z,
        ];
        let mut dipole = DMatrix::<f64>::zeros(3 * n, 3 * n);
        for i in 0..n {
            for c in 0..3 {
                dipole[(3 * i + c, 3 * i + c)] = self_terms[c];
            }
            let (ix, iy) = (i % nx, i / nx);
            for j in 0..n {
                if j == i {
                    continue;
                }
                let (jx, jy) = (j % nx, j / nx);
                let r = Vec3::new(
                    (ix as f64 - jx as f64) * delta,
                    (iy as f64 - jy as f64) * delta,
                    0.0,
                );
                let dist = r.norm();
                if let Some(cutoff) = dipole_cutoff {
                    if dist > cutoff {
                        continue;
                    }
                }
                let rh = r / dist;
                let k = prefactor / (dist * dist * dist);
                let rhat = [rh.x, rh.y, rh.z];
                for row in 0..3 {
                    for col in 0..3 {
                        let identity = if row == col { 1.0 } else { 0.0 };
                        dipole[(3 * i + row, 3 * j + col)] =
                            k * (3.0 * rhat[row] * rhat[col] - identity);
                    }
                }
            }
        }

        let c_exchange = 2.0 * cell.a_ex / (cell.ms * delta * delta * cell.m_e * cell.m_e);
        let c_anisotropy = 2.0 * cell.k_u / cell.ms;

        Ok(Film {
            cell,
            rescale,
            nx,
            ny,
            dipole_cutoff,
            dipole,
            neighbours,
            neighbour_count,
            c_exchange,
            c_anisotropy,
        })
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn n_cells(&self) -> usize {
        self.nx * self.ny
    }

    pub fn cell(&self) -> &CellParams {
        &self.cell
    }

    pub fn rescale(&self) -> &TempRescale {
        &self.rescale
    }

    pub fn dipole_cutoff(&self) -> Option<f64> {
        self.dipole_cutoff
    }

    /// The per-cell self-demagnetisation field for a given moment
    /// direction: −μ0 Ms (Nx mx, Ny my, Nz mz).
    pub fn self_demag_field(&self, m: Vec3) -> Vec3 {
        let (n_x, n_y, n_z) = prism_demag_factors(
            self.cell.cell_size_delta,
            self.cell.cell_size_delta,
            self.cell.thickness,
        );
        Vec3::new(
            -MU_0 * self.cell.ms * n_x * m.x,
            -MU_0 * self.cell.ms * n_y * m.y,
            -MU_0 * self.cell.ms * n_z * m.z,
        )
    }

    /// All spins along +x, the configured initial state.
    pub fn initial_state(&self) -> FilmState {
        FilmState::uniform(self.n_cells(), Vec3::X)
    }

    /// Dipole field for every cell: one dense mat-vec against the
    /// precomputed operator.
    fn dipole_field(&self, m: &[Vec3], m_flat: &mut DVector<f64>, dip_flat: &mut DVector<f64>) {
        for (i, mi) in m.iter().enumerate() {
            m_flat[3 * i] = mi.x;
            m_flat[3 * i + 1] = mi.y;
            m_flat[3 * i + 2] = mi.z;
        }
        dip_flat.gemv(1.0, &self.dipole, m_flat, 0.0);
    }

    fn exchange_field(&self, m: &[Vec3], i: usize) -> Vec3 {
        let mut nsum = Vec3::ZERO;
        let count = self.neighbour_count[i] as usize;
        for k in 0..count {
            nsum += m[self.neighbours[i][k] as usize];
        }
        self.c_exchange * (nsum - (count as f64) * m[i])
    }

    fn anisotropy_field(&self, m: &[Vec3], i: usize) -> Vec3 {
        Vec3::new(0.0, 0.0, self.c_anisotropy * m[i].z)
    }

    /// Sum of all deterministic terms plus an optional pre-sampled thermal
    /// field, written into `out`. This is the one field-assembly path; the
    /// integrator and [`Film::effective_field`] both go through it.
    fn assemble_total_field(
        &self,
        m: &[Vec3],
        applied: &[Vec3],
        thermal: Option<&[Vec3]>,
        m_flat: &mut DVector<f64>,
        dip_flat: &mut DVector<f64>,
        out: &mut [Vec3],
    ) {
        self.dipole_field(m, m_flat, dip_flat);
        for i in 0..m.len() {
            let dipole = Vec3::new(dip_flat[3 * i], dip_flat[3 * i + 1], dip_flat[3 * i + 2]);
            out[i] = applied[i] + self.anisotropy_field(m, i) + self.exchange_field(m, i) + dipole;
            if let Some(xi) = thermal {
                out[i] += xi[i];
            }
        }
    }

    /// Evaluate every Hamiltonian field term for inspection. Thermal noise is
    /// sampled from `rng` when `temperature > 0`; its standard deviation
    /// depends on the integrator step `dt` (see [`thermal_field`]).
    pub fn effective_field(
        &self,
        state: &FilmState,
        applied: &[Vec3],
        temperature: f64,
        dt: f64,
        rng: &mut impl Rng,
    ) -> Result<FieldSample> {
        let n = self.n_cells();
        assert_eq!(
            applied.len(),
            n,
            "applied field length must match cell count"
        );
        let m = &state.m;

        let mut m_flat = DVector::zeros(3 * n);
        let mut dip_flat = DVector::zeros(3 * n);
        self.dipole_field(m, &mut m_flat, &mut dip_flat);
        let dipole: Vec<Vec3> = (0..n)
            .map(|i| Vec3::new(dip_flat[3 * i], dip_flat[3 * i + 1], dip_flat[3 * i + 2]))
            .collect();
        let exchange: Vec<Vec3> = (0..n).map(|i| self.exchange_field(m, i)).collect();
        let anisotropy: Vec<Vec3> = (0..n).map(|i| self.anisotropy_field(m, i)).collect();

        let mut thermal = vec![Vec3::ZERO; n];
        if temperature > 0.0 {
            thermal_field_into(
                &self.cell,
                &self.rescale,
                temperature,
                dt,
                rng,
                &mut thermal,
            );
        }

        let sample = FieldSample {
            applied: applied.to_vec(),
            anisotropy,
            exchange,
            dipole,
            thermal,
        };
        for i in 0..n {
            if !sample.total(i).is_finite() {
                return Err(Error::NumericalFailure {
                    cell: i,
                    time: state.time,
                });
            }
        }
        Ok(sample)
    }

    /// One Heun predictor–corrector step of the LLG equation
    ///
    ///   dm/dt = −γ/(1+λ²) [ m × H  +  λ m × (m × H) ]
    ///
    /// with the thermal field held fixed across both stages and post-step
    /// renormalisation. Fails if the pre-renormalisation norm drifts by
    /// more than 1e-6, which signals the step size is too large.
    pub fn llg_step(
        &self,
        state: &mut FilmState,
        applied: &[Vec3],
        temperature: f64,
        dt: f64,
        rng: &mut impl Rng,
        scratch: &mut StepScratch,
    ) -> Result<()> {
        debug_assert!(dt > 0.0);
        let n = self.n_cells();
        let gamma = self.cell.gamma;
        let lambda = self.cell.alpha_damping;
        let coeff = -gamma / (1.0 + lambda * lambda);

        let StepScratch {
            field,
            slope,
            predictor,
            thermal,
            m_flat,
            dip_flat,
        } = scratch;

        let xi: Option<&[Vec3]> = if temperature > 0.0 {
            thermal_field_into(&self.cell, &self.rescale, temperature, dt, rng, thermal);
            Some(thermal)
        } else {
            None
        };

        let rhs = |m: Vec3, b: Vec3| -> Vec3 {
            let p = m.cross(b);
            coeff * (p + lambda * m.cross(p))
        };

        self.assemble_total_field(&state.m, applied, xi, m_flat, dip_flat, field);
        for i in 0..n {
            if !field[i].is_finite() {
                return Err(Error::NumericalFailure {
                    cell: i,
                    time: state.time,
                });
            }
            slope[i] = rhs(state.m[i], field[i]);
            predictor[i] = state.m[i] + dt * slope[i];
        }

        self.assemble_total_field(predictor, applied, xi, m_flat, dip_flat, field);
        let mut max_drift = 0.0f64;
        for i in 0..n {
            if !field[i].is_finite() {
                return Err(Error::NumericalFailure {
                    cell: i,
                    time: state.time,
                });
            }
            let k2 = rhs(predictor[i], field[i]);
            let m_new = state.m[i] + (0.5 * dt) * (slope[i] + k2);
            let drift = (m_new.norm() - 1.0).abs();
            if drift > max_drift {
                max_drift = drift;
            }
            state.m[i] = m_new;
        }
        if max_drift > 1e-6 {
            return Err(Error::Instability {
                drift: max_drift,
                time: state.time,
            });
        }
        for m in state.m.iter_mut() {
            *m = m.normalized();
        }
        state.time += dt;
        Ok(())
    }

    /// Total magnetic energy (J) of the configuration under a constant
    /// applied field: Zeeman, uniaxial anisotropy `k_u V (mx² + my²)`,
    /// pairwise exchange, and the dipole terms (self-demagnetisation
    /// contributes only a constant shift for unit moments).
    pub fn energy(&self, state: &FilmState, applied: &[Vec3]) -> f64 {
        let n = self.n_cells();
        let m = &state.m;
        let moment = self.cell.cell_moment();
        let k_u_v = self.cell.k_u * self.cell.volume();

        let mut e = 0.0;
        for i in 0..n {
            e -= moment * m[i].dot(applied[i]);
            e += k_u_v * (m[i].x * m[i].x + m[i].y * m[i].y);
            let count = self.neighbour_count[i] as usize;
            for k in 0..count {
                let j = self.neighbours[i][k] as usize;
                let d = m[i] - m[j];
                // Each unordered pair appears twice in this loop.
                e += 0.25 * self.c_exchange * moment * d.norm_squared();
            }
        }

        let mut m_flat = DVector::zeros(3 * n);
        let mut dip_flat = DVector::zeros(3 * n);
        self.dipole_field(m, &mut m_flat, &mut dip_flat);
        for i in 0..n {
            let dipole = Vec3::new(dip_flat[3 * i], dip_flat[3 * i + 1], dip_flat[3 * i + 2]);
            e -= 0.5 * moment * m[i].dot(dipole);
        }
        e
    }
}

/// Per-component standard deviation of the thermal field (tesla):
/// `sqrt(2 λ k_B T_int / (γ Ms V dt))` with the rescaled internal
/// temperature `T_int = T_C (T / T_C)^exponent`.
pub fn thermal_sigma(cell: &CellParams, rescale: &TempRescale, temperature: f64, dt: f64) -> f64 {
    if temperature <= 0.0 {
        return 0.0;
    }
    let t_int = rescale.internal(temperature);
    (2.0 * cell.alpha_damping * K_B * t_int / (cell.gamma * cell.ms * cell.volume() * dt)).sqrt()
}

/// Gaussian thermal field, one vector per cell; the zero field at `T = 0`.
pub fn thermal_field(
    cell: &CellParams,
    rescale: &TempRescale,
    n_cells: usize,
    temperature: f64,
    dt: f64,
    rng: &mut impl Rng,
) -> Vec<Vec3> {
    let mut out = vec![Vec3::ZERO; n_cells];
    thermal_field_into(cell, rescale, temperature, dt, rng, &mut out);
    out
}

fn thermal_field_into(
    cell: &CellParams,
    rescale: &TempRescale,
    temperature: f64,
    dt: f64,
    rng: &mut impl Rng,
    out: &mut [Vec3],
) {
    let sigma = thermal_sigma(cell, rescale, temperature, dt);
    if sigma == 0.0 {
        out.fill(Vec3::ZERO);
        return;
    }
    for v in out.iter_mut() {
        let x: f64 = rng.sample(StandardNormal);
        let y: f64 = rng.sample(StandardNormal);
        let z: f64 = rng.sample(StandardNormal);
        *v = Vec3::new(sigma * x, sigma * y, sigma * z);
    }
}
