//! Numerical tolerances and construction radii.
//!
//! Every threshold used by the pipeline lives here so that a run is fully
//! described by a `Tolerances` value (plus the perturbation seed).

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{MorseError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Membership and boundary-activity slack.
    pub tol_geom: f64,
    /// Gradient norm accepted as critical.
    pub tol_crit: f64,
    /// Minimum |det| of a hessian (or |h| of a tangential hessian).
    pub tol_nondeg: f64,
    /// Minimum separation of critical values.
    pub tol_val: f64,
    /// Minimum |<df, n>| at a boundary critical point.
    pub tol_type: f64,
    pub newton_max_iter: usize,
    pub seed_grid_density: usize,
    pub boundary_samples: usize,
    /// Radius of the type-N model patches.
    pub r_n: f64,
    /// Collar width.
    pub delta_c: f64,
    /// Strength of the inward correction in the collar.
    pub eps_n: f64,
    /// Exclusion radius around critical points during certification.
    pub r_excl: f64,
    /// Tangential-gradient floor below which the collar correction is reported.
    pub g_min: f64,
    pub r_launch: f64,
    pub eps_lvl: f64,
    pub r_conv: f64,
    pub t_max: f64,
    pub ode_rtol: f64,
    pub ode_atol: f64,
    /// Largest integration step, which also bounds polyline chord error.
    pub ode_h_max: f64,
    pub bisect_tol: f64,
    /// Magnitude of the seeded perturbation field.
    pub perturbation: f64,
    pub cert_interior_samples: usize,
    pub cert_boundary_samples: usize,
    /// Number of launch angles around an index-2 source.
    pub angle_samples: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            tol_geom: 1e-9,
            tol_crit: 1e-10,
            tol_nondeg: 1e-8,
            tol_val: 1e-6,
            tol_type: 1e-8,
            newton_max_iter: 50,
            seed_grid_density: 40,
            boundary_samples: 400,
            r_n: 0.15,
            delta_c: 0.1,
            eps_n: 0.2,
            r_excl: 0.05,
            g_min: 1e-3,
            r_launch: 1e-4,
            eps_lvl: 1e-3,
            r_conv: 1e-5,
            t_max: 1e3,
            ode_rtol: 1e-10,
            ode_atol: 1e-12,
            ode_h_max: 1e-2,
            bisect_tol: 1e-10,
            perturbation: 1e-3,
            cert_interior_samples: 10_000,
            cert_boundary_samples: 2_000,
            angle_samples: 360,
        }
    }
}

impl Tolerances {
    /// Applies a `{name: value}` map, as read from `MORSE_TOL_OVERRIDES`.
    pub fn with_overrides(&self, overrides: &BTreeMap<String, f64>) -> Result<Self> {
        let mut value = serde_json::to_value(self).expect("tolerances serialize");
        let map = value.as_object_mut().expect("tolerances are an object");
        for (name, v) in overrides {
            let slot = map.get_mut(name).ok_or_else(|| MorseError::InvalidOverride(format!("unknown tolerance `{name}`")))?;
            if !v.is_finite() || *v <= 0.0 {
                return Err(MorseError::InvalidOverride(format!("`{name}` must be positive")));
            }
            *slot = if slot.is_u64() {
                if v.fract() != 0.0 {
                    return Err(MorseError::InvalidOverride(format!("`{name}` must be an integer")));
                }
                serde_json::json!(*v as u64)
            } else {
                serde_json::json!(*v)
            };
        }
        serde_json::from_value(value).map_err(|e| MorseError::InvalidOverride(e.to_string()))
    }

    /// Parses the JSON override map format.
    pub fn parse_overrides(text: &str) -> Result<BTreeMap<String, f64>> {
        serde_json::from_str(text).map_err(|e| MorseError::InvalidOverride(e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overrides_apply_by_name() {
        let mut m = BTreeMap::new();
        m.insert("r_launch".to_string(), 5e-5);
        m.insert("angle_samples".to_string(), 90.0);
        let t = Tolerances::default().with_overrides(&m).unwrap();
        assert_eq!(t.r_launch, 5e-5);
        assert_eq!(t.angle_samples, 90);
    }

    #[test]
    fn unknown_or_bad_overrides_rejected() {
        let mut m = BTreeMap::new();
        m.insert("nope".to_string(), 1.0);
        assert!(Tolerances::default().with_overrides(&m).is_err());
        let mut m = BTreeMap::new();
        m.insert("angle_samples".to_string(), 1.5);
        assert!(Tolerances::default().with_overrides(&m).is_err());
        assert!(Tolerances::parse_overrides("{\"r_n\": 0.1}").is_ok());
    }
}
