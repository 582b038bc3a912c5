//! Versioned default parameters, expressed relative to the domain's shorter
//! side so they apply to any layout scale.
//!
//! The built-in file is compiled in; setting `CELLSCAPE_DEFAULTS` to a path
//! replaces it at runtime.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::layout::{BandwidthSet, Domain, RadiusGrid};
use crate::topology::{DensityScope, DiagramConfig, PersistenceBuckets};

pub const DEFAULTS_ENV: &str = "CELLSCAPE_DEFAULTS";

const BUILTIN: &str = include_str!("../defaults.json");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthesisDefaults {
    pub steps: usize,
    pub init_jitter_sigma: f64,
    pub move_scale: f64,
    pub teleport_probability: f64,
    pub initial_temperature: f64,
    pub temperature_decay: f64,
    pub lambda_cc: f64,
    pub lambda_k: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Defaults {
    pub version: u32,
    pub radius_count: usize,
    pub radius_min_fraction: f64,
    pub radius_max_fraction: f64,
    pub sigma_fractions: Vec<f64>,
    pub grid_h_fraction: f64,
    pub synthesis_grid_h_fraction: f64,
    pub persistence_floor_factor: f64,
    pub bucket_fractions: Vec<f64>,
    pub min_separation_fraction: f64,
    pub synthesis: SynthesisDefaults,
}

impl Defaults {
    pub fn builtin() -> Self {
        serde_json::from_str(BUILTIN).expect("built-in defaults parse")
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }

    /// Built-in defaults unless the environment points at another file.
    pub fn load() -> Result<Self> {
        match std::env::var_os(DEFAULTS_ENV) {
            Some(p) if !p.is_empty() => Self::from_file(Path::new(&p)),
            _ => Ok(Self::builtin()),
        }
    }

    pub fn radii(&self, domain: &Domain) -> Result<RadiusGrid> {
        let s = domain.shorter_side();
        RadiusGrid::linspace(
            self.radius_min_fraction * s,
            self.radius_max_fraction * s,
            self.radius_count,
        )
    }

    pub fn sigmas(&self, domain: &Domain) -> Result<BandwidthSet> {
        BandwidthSet::new(self.sigma_fractions.clone())?.scaled(domain.shorter_side())
    }

    pub fn grid_h(&self, domain: &Domain) -> f64 {
        self.grid_h_fraction * domain.shorter_side()
    }

    pub fn synthesis_grid_h(&self, domain: &Domain) -> f64 {
        self.synthesis_grid_h_fraction * domain.shorter_side()
    }

    pub fn buckets(&self, domain: &Domain) -> Result<PersistenceBuckets> {
        PersistenceBuckets::new(self.bucket_fractions.clone())?.scaled(domain.shorter_side())
    }

    pub fn min_separation(&self, domain: &Domain) -> f64 {
        self.min_separation_fraction * domain.shorter_side()
    }

    /// Diagram configuration at full reporting resolution.
    pub fn diagram_config(&self, domain: &Domain) -> Result<DiagramConfig> {
        let h = self.grid_h(domain);
        Ok(DiagramConfig {
            radii: self.radii(domain)?,
            sigmas: self.sigmas(domain)?,
            h,
            persistence_floor: Some(self.persistence_floor_factor * h),
            density_scope: DensityScope::AllClasses,
        })
    }
}
