use serde::{Deserialize, Serialize};

use crate::constants::{GAMMA_E, MU_B};
use crate::error::Error;
use crate::spin::material::MaterialParams;
use crate::Result;

/// Derived micromagnetic constants for one coarse-grained cell.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CellParams {
    /// Spontaneous magnetisation (A/m).
    pub ms: f64,
    /// Uniaxial anisotropy energy density (J/m³), easy axis along z.
    pub k_u: f64,
    /// Micromagnetic exchange constant (J/m).
    pub a_ex: f64,
    /// Gyromagnetic ratio (rad s⁻¹ T⁻¹).
    pub gamma: f64,
    /// Gilbert damping, in (0, 1].
    pub alpha_damping: f64,
    /// In-plane cell edge length Δ (m).
    pub cell_size_delta: f64,
    /// Film thickness (m).
    pub thickness: f64,
    /// Equilibrium reduced magnetisation; 1 at 0 K.
    pub m_e: f64,
    /// Atoms contained in one cell (coarse-grained average, need not be integral).
    pub n_atoms_per_cell: f64,
}

impl CellParams {
    /// Cell volume (m³).
    pub fn volume(&self) -> f64 {
        self.cell_size_delta * self.cell_size_delta * self.thickness
    }

    /// Magnetic moment of one cell (A·m² = J/T).
    pub fn cell_moment(&self) -> f64 {
        self.ms * self.volume()
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.ms > 0.0 && self.k_u > 0.0 && self.a_ex > 0.0) {
            return Err(Error::config("Ms, k_u and A_ex must be strictly positive"));
        }
        if !(self.alpha_damping > 0.0 && self.alpha_damping <= 1.0) {
            return Err(Error::config(format!(
                "damping must lie in (0, 1], got {}",
                self.alpha_damping
            )));
        }
        if !(self.m_e > 0.0 && self.m_e <= 1.0) {
            return Err(Error::config(format!(
                "m_e must lie in (0, 1], got {}",
                self.m_e
            )));
        }
        Ok(())
    }
}

/// Coarse-grain atomistic constants into cell-level micromagnetic parameters.
///
/// Each cell of in-plane edge `cell_size` and the given `thickness` contains
/// `n_uc · V / a³` atoms: spontaneous magnetisation and anisotropy density
/// are the per-volume sums of the atomic moments and anisotropies, the
/// exchange constant follows the lattice link-count rule
/// `A = n_uc · J_ij / (2a)`, and the gyromagnetic ratio is the atomic
/// average (the free-electron value, all atoms being identical).
pub fn derive_cell_params(
    mat: &MaterialParams,
    cell_size: f64,
    thickness: f64,
    alpha_damping: f64,
) -> Result<CellParams> {
    mat.validate()?;
    if !(cell_size > 0.0) {
        return Err(Error::config(format!(
            "cell size must be positive, got {cell_size}"
        )));
    }
    if !(thickness > 0.0) {
        return Err(Error::config(format!(
            "thickness must be positive, got {thickness}"
        )));
    }

    let a = mat.unit_cell_size_a;
    let n_uc = mat.crystal.atoms_per_unit_cell();
    let volume = cell_size * cell_size * thickness;
    let n_atoms = n_uc * volume / (a * a * a);

    let params = CellParams {
        ms: n_atoms * mat.atomic_moment_mu_s * MU_B / volume,
        k_u: n_atoms * mat.anisotropy_k / volume,
        a_ex: n_uc * mat.exchange_j_ij / (2.0 * a),
        gamma: GAMMA_E,
        alpha_damping,
        cell_size_delta: cell_size,
        thickness,
        m_e: 1.0,
        n_atoms_per_cell: n_atoms,
    };
    params.validate()?;
    Ok(params)
}
