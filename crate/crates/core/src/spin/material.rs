use serde::{Deserialize, Serialize};

use crate::constants::{K_B, MEAN_FIELD_EPSILON};
use crate::error::Error;
use crate::Result;

/// Built-in ferromagnetic metals.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Material {
    Ni,
    Co,
    Fe,
}

impl Material {
    pub const ALL: [Material; 3] = [Material::Ni, Material::Co, Material::Fe];

    pub fn name(self) -> &'static str {
        match self {
            Material::Ni => "Ni",
            Material::Co => "Co",
            Material::Fe => "Fe",
        }
    }
}

impl std::str::FromStr for Material {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ni" | "nickel" => Ok(Material::Ni),
            "co" | "cobalt" => Ok(Material::Co),
            "fe" | "iron" => Ok(Material::Fe),
            other => Err(Error::config(format!("unknown material '{other}'"))),
        }
    }
}

/// Cubic crystal structures supported by the coarse-graining rules.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Crystal {
    Fcc,
    Bcc,
}

impl Crystal {
    /// Atoms per cubic unit cell.
    pub fn atoms_per_unit_cell(self) -> f64 {
        match self {
            Crystal::Fcc => 4.0,
            Crystal::Bcc => 2.0,
        }
    }

    /// Nearest-neighbour coordination number.
    pub fn nearest_neighbours(self) -> usize {
        match self {
            Crystal::Fcc => 12,
            Crystal::Bcc => 8,
        }
    }
}

/// Power-law mapping of experimental to internal simulation temperature,
/// correcting classical spin statistics.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct TempRescale {
    pub exponent: f64,
    pub curie_t: f64,
}

impl TempRescale {
    /// Internal temperature: `T_C * (T / T_C)^exponent`; identity at `T = T_C`.
    pub fn internal(&self, temperature: f64) -> f64 {
        if temperature <= 0.0 {
            0.0
        } else {
            self.curie_t * (temperature / self.curie_t).powf(self.exponent)
        }
    }
}

/// Atomistic constants for one material (one database row).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MaterialParams {
    pub name: Material,
    pub crystal: Crystal,
    /// Unit cell size a (m).
    pub unit_cell_size_a: f64,
    /// Atomic spin moment μs (Bohr magnetons).
    pub atomic_moment_mu_s: f64,
    /// Exchange energy J_ij (J/link).
    pub exchange_j_ij: f64,
    /// Second-order uniaxial anisotropy k (J/atom).
    pub anisotropy_k: f64,
    /// Temperature rescaling exponent (dimensionless).
    pub rescaling_exponent: f64,
    /// Rescaling Curie temperature (K).
    pub rescaling_curie_t: f64,
}

const ANGSTROM: f64 = 1e-10;

impl MaterialParams {
    /// Database row for a built-in material.
    pub fn builtin(material: Material) -> MaterialParams {
        match material {
            Material::Ni => MaterialParams {
                name: Material::Ni,
                crystal: Crystal::Fcc,
                unit_cell_size_a: 3.524 * ANGSTROM,
                atomic_moment_mu_s: 0.606,
                exchange_j_ij: 2.757e-21,
                anisotropy_k: 5.47e-26,
                rescaling_exponent: 2.322,
                rescaling_curie_t: 635.0,
            },
            Material::Co => MaterialParams {
                name: Material::Co,
                crystal: Crystal::Fcc,
                unit_cell_size_a: 2.507 * ANGSTROM,
                atomic_moment_mu_s: 1.72,
                exchange_j_ij: 6.064e-21,
                anisotropy_k: 6.69e-24,
                rescaling_exponent: 2.369,
                rescaling_curie_t: 1395.0,
            },
            Material::Fe => MaterialParams {
                name: Material::Fe,
                crystal: Crystal::Bcc,
                unit_cell_size_a: 2.866 * ANGSTROM,
                atomic_moment_mu_s: 2.22,
                exchange_j_ij: 7.050e-21,
                anisotropy_k: 5.65e-25,
                rescaling_exponent: 2.876,
                rescaling_curie_t: 1049.0,
            },
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positives = [
            ("unit_cell_size_a", self.unit_cell_size_a),
            ("atomic_moment_mu_s", self.atomic_moment_mu_s),
            ("exchange_j_ij", self.exchange_j_ij),
            ("anisotropy_k", self.anisotropy_k),
            ("rescaling_exponent", self.rescaling_exponent),
            ("rescaling_curie_t", self.rescaling_curie_t),
        ];
        for (field, value) in positives {
            if !(value > 0.0) || !value.is_finite() {
                return Err(Error::config(format!(
                    "material {}: {field} must be strictly positive, got {value}",
                    self.name.name()
                )));
            }
        }
        Ok(())
    }

    pub fn rescale(&self) -> TempRescale {
        TempRescale {
            exponent: self.rescaling_exponent,
            curie_t: self.rescaling_curie_t,
        }
    }

    /// Mean-field Curie temperature from the atomistic exchange:
    /// the exchange sum over every nearest-neighbour link of every atom in a
    /// cell, divided by `3 k_B N_c` and corrected by the spin-wave factor ε.
    /// With identical atoms this reduces to `ε z J_ij / (3 k_B)`.
    pub fn mean_field_curie_t(&self) -> f64 {
        let z = self.crystal.nearest_neighbours() as f64;
        MEAN_FIELD_EPSILON * z * self.exchange_j_ij / (3.0 * K_B)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_rows_match_published_constants() {
        let ni = MaterialParams::builtin(Material::Ni);
        assert_eq!(ni.crystal, Crystal::Fcc);
        assert_eq!(ni.unit_cell_size_a, 3.524e-10);
        assert_eq!(ni.atomic_moment_mu_s, 0.606);
        assert_eq!(ni.exchange_j_ij, 2.757e-21);
        assert_eq!(ni.anisotropy_k, 5.47e-26);
        assert_eq!(ni.rescaling_exponent, 2.322);
        assert_eq!(ni.rescaling_curie_t, 635.0);

        let co = MaterialParams::builtin(Material::Co);
        assert_eq!(co.crystal, Crystal::Fcc);
        assert_eq!(co.unit_cell_size_a, 2.507e-10);
        assert_eq!(co.atomic_moment_mu_s, 1.72);
        assert_eq!(co.exchange_j_ij, 6.064e-21);
        assert_eq!(co.anisotropy_k, 6.69e-24);
        assert_eq!(co.rescaling_exponent, 2.369);
        assert_eq!(co.rescaling_curie_t, 1395.0);

        let fe = MaterialParams::builtin(Material::Fe);
        assert_eq!(fe.crystal, Crystal::Bcc);
        assert_eq!(fe.unit_cell_size_a, 2.866e-10);
        assert_eq!(fe.atomic_moment_mu_s, 2.22);
        assert_eq!(fe.exchange_j_ij, 7.050e-21);
        assert_eq!(fe.anisotropy_k, 5.65e-25);
        assert_eq!(fe.rescaling_exponent, 2.876);
        assert_eq!(fe.rescaling_curie_t, 1049.0);

        for m in Material::ALL {
            MaterialParams::builtin(m).validate().unwrap();
        }
    }

    #[test]
    fn curie_t_is_zero_without_exchange() {
        let mut co = MaterialParams::builtin(Material::Co);
        co.exchange_j_ij = 0.0;
        assert_eq!(co.mean_field_curie_t(), 0.0);
    }

    #[test]
    fn curie_t_is_linear_in_exchange() {
        let co = MaterialParams::builtin(Material::Co);
        let mut doubled = co.clone();
        doubled.exchange_j_ij *= 2.0;
        let ratio = doubled.mean_field_curie_t() / co.mean_field_curie_t();
        assert!((ratio - 2.0).abs() < 1e-12);
    }

    #[test]
    fn curie_t_matches_closed_form_and_table_value() {
        // Independent arithmetic: ε · z · J / (3 k_B) for fcc Co.
        let expected = 0.86 * 12.0 * 6.064e-21 / (3.0 * 1.380_649e-23);
        let co = MaterialParams::builtin(Material::Co);
        let got = co.mean_field_curie_t();
        assert!((got - expected).abs() / expected < 1e-12);
        // Cross-check against the published rescaling Curie temperature.
        assert!((got - 1395.0).abs() / 1395.0 < 0.15, "Co T_C = {got}");

        let ni = MaterialParams::builtin(Material::Ni);
        assert!((ni.mean_field_curie_t() - 635.0).abs() / 635.0 < 0.15);
        let fe = MaterialParams::builtin(Material::Fe);
        // bcc: 8 nearest neighbours.
        let fe_expected = 0.86 * 8.0 * 7.050e-21 / (3.0 * 1.380_649e-23);
        assert!((fe.mean_field_curie_t() - fe_expected).abs() / fe_expected < 1e-12);
        assert!((fe.mean_field_curie_t() - 1049.0).abs() / 1049.0 < 0.15);
    }

    #[test]
    fn rescale_fixes_the_curie_point() {
        for m in Material::ALL {
            let p = MaterialParams::builtin(m);
            let r = p.rescale();
            let at_tc = r.internal(p.rescaling_curie_t);
            assert!((at_tc - p.rescaling_curie_t).abs() / p.rescaling_curie_t < 1e-12);
            assert_eq!(r.internal(0.0), 0.0);
        }
    }

    #[test]
    fn validate_rejects_nonpositive_fields() {
        let mut p = MaterialParams::builtin(Material::Fe);
        p.exchange_j_ij = -1.0;
        assert!(matches!(p.validate(), Err(Error::Config(_))));
    }
}
