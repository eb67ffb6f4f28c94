//! Schema-versioned result records.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SupportRecord {
    pub support_radius: f64,
    pub truncation_radius: f64,
    pub stable: bool,
    pub decay_slope: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RefinementRecord {
    pub h: f64,
    pub value_h: f64,
    pub h_half: f64,
    pub value_h_half: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ResultRecord {
    pub schema_version: u32,
    /// canonical config text; re-parses to the executed configuration
    pub config_echo: String,
    pub converged: bool,
    pub objective_value: f64,
    pub constraint_residual: f64,
    pub duality_gap: Option<f64>,
    pub el_residual: Option<f64>,
    pub multiplier: f64,
    pub support: Option<SupportRecord>,
    pub refinement: Option<RefinementRecord>,
    pub wall_time_s: f64,
    /// recipe- or objective-specific scalars (sup-norm M, eigenvalues, …)
    pub extras: BTreeMap<String, f64>,
}

impl ResultRecord {
    /// Reject NaN/∞ anywhere before the record is written out.
    pub fn validate_finite(&self) -> Result<(), String> {
        let check = |name: &str, v: f64| {
            if v.is_finite() {
                Ok(())
            } else {
                Err(format!("non-finite field `{name}` = {v}"))
            }
        };
        check("objective_value", self.objective_value)?;
        check("constraint_residual", self.constraint_residual)?;
        check("multiplier", self.multiplier)?;
        check("wall_time_s", self.wall_time_s)?;
        if let Some(g) = self.duality_gap {
            check("duality_gap", g)?;
        }
        if let Some(r) = self.el_residual {
            check("el_residual", r)?;
        }
        if let Some(s) = &self.support {
            check("support_radius", s.support_radius)?;
            check("truncation_radius", s.truncation_radius)?;
            if let Some(d) = s.decay_slope {
                check("decay_slope", d)?;
            }
        }
        if let Some(r) = &self.refinement {
            check("refinement.h", r.h)?;
            check("refinement.value_h", r.value_h)?;
            check("refinement.h_half", r.h_half)?;
            check("refinement.value_h_half", r.value_h_half)?;
        }
        for (k, v) in &self.extras {
            check(k, *v)?;
        }
        Ok(())
    }
}
