//! Physical constants (SI, CODATA 2018).

/// Bohr magneton (J/T).
pub const MU_B: f64 = 9.274_010_078_3e-24;

/// Boltzmann constant (J/K).
pub const K_B: f64 = 1.380_649e-23;

/// Vacuum permeability (T·m/A).
pub const MU_0: f64 = 1.256_637_062_12e-6;

/// Electron gyromagnetic ratio (rad s⁻¹ T⁻¹).
pub const GAMMA_E: f64 = 1.760_859_630_23e11;

/// Mean-field correction factor for the 3D Heisenberg model
/// (spin-wave correction to the classical mean-field Curie temperature).
pub const MEAN_FIELD_EPSILON: f64 = 0.86;

/// Micromagnetic cell edge length (m): atomistic detail is coarse
/// grained into 5 nm cells.
pub const CELL_SIZE: f64 = 5e-9;

/// Interval between reservoir inputs (s): 10 ps, i.e. 100 GHz drive.
pub const INPUT_INTERVAL: f64 = 10e-12;
