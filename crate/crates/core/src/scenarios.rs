//! The bundled case-study configurations: six charge-noise T2 maps and three
//! EWJN T1 maps at different gate conductivities.

use serde::{Deserialize, Serialize};

use crate::census::{census, CensusOptions};
use crate::coherence::EwjnOptions;
use crate::device::{case_study, DeviceParams};
use crate::error::Result;
use crate::map::{calibrate_models, sweep, AnisotropyMap, Quantity, Reference, Resolution};
use crate::noise::{ModelSpec, DEFAULT_HYPERFINE_RATE};
use crate::units;

/// Expected topology of a scenario map.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExpectedCensus {
    Counts { n_max: usize, n_min: usize, n_saddle: usize },
    Degenerate,
}

#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: &'static str,
    pub description: &'static str,
    pub quantity: Quantity,
    pub device: DeviceParams,
    /// Noise models; charge models without a strength are calibrated
    /// against the reference T2.
    pub models: Vec<ModelSpec>,
    pub expected: ExpectedCensus,
}

const fn counts(n_max: usize, n_min: usize, n_saddle: usize) -> ExpectedCensus {
    ExpectedCensus::Counts { n_max, n_min, n_saddle }
}

fn charge(spec: ModelSpec) -> Vec<ModelSpec> {
    vec![spec, ModelSpec::Hyperfine { rate_per_s: Some(DEFAULT_HYPERFINE_RATE) }]
}

fn cluster_dipole(pos: [f64; 3]) -> ModelSpec {
    ModelSpec::ClusterDipole { position_nm: pos, p0_c_m: None, tau_s: None }
}

fn cluster_trap(pos: [f64; 3]) -> ModelSpec {
    ModelSpec::ClusterTrap { position_nm: pos, p0_c_m: None, tau_s: None }
}

/// Conductivities of the three EWJN maps, S/m.
pub const EWJN_SIGMAS: [f64; 3] = [2e8, 2e7, 2e6];

pub fn scenarios() -> Vec<Scenario> {
    let dev = case_study();
    let t2 = |name, description, spec, expected| Scenario {
        name,
        description,
        quantity: Quantity::T2,
        device: dev.clone(),
        models: charge(spec),
        expected,
    };
    let t1 = |name, description, sigma: f64, expected| Scenario {
        name,
        description,
        quantity: Quantity::T1,
        device: dev.with_conductivity(units::conductivity_from_si(sigma)),
        models: vec![ModelSpec::Ewjn {}],
        expected,
    };
    vec![
        t2("ud", "uniform dipoles in the oxide", ModelSpec::UniformDipole { rho_v_per_cm3: None, p0_c_m: None, tau_s: None }, counts(2, 2, 2)),
        t2("ut", "uniform interface traps", ModelSpec::UniformTrap { rho_a_per_cm2: None, p0_c_m: None, tau_s: None }, counts(2, 2, 2)),
        t2("cd_x", "dipole cluster at (37, 0, 37) nm", cluster_dipole([37.0, 0.0, 37.0]), counts(2, 2, 2)),
        t2("cd_y", "dipole cluster at (0, 37, 37) nm", cluster_dipole([0.0, 37.0, 37.0]), counts(2, 2, 2)),
        t2("ct_x", "trap cluster at (37, 0, 137) nm", cluster_trap([37.0, 0.0, 137.0]), ExpectedCensus::Degenerate),
        t2("ct_y", "trap cluster at (0, 37, 137) nm", cluster_trap([0.0, 37.0, 137.0]), ExpectedCensus::Degenerate),
        t1("ewjn_2e8", "EWJN T1, sigma = 2e8 S/m", EWJN_SIGMAS[0], counts(1, 1, 0)),
        t1("ewjn_2e7", "EWJN T1, sigma = 2e7 S/m", EWJN_SIGMAS[1], counts(2, 2, 2)),
        t1("ewjn_2e6", "EWJN T1, sigma = 2e6 S/m", EWJN_SIGMAS[2], counts(2, 2, 2)),
    ]
}

pub fn scenario(name: &str) -> Option<Scenario> {
    scenarios().into_iter().find(|s| s.name == name)
}

/// Set τ on every charge model that does not fix its own.
pub fn with_default_tau(specs: &[ModelSpec], tau: f64) -> Vec<ModelSpec> {
    specs
        .iter()
        .map(|s| match s.clone() {
            ModelSpec::UniformDipole { rho_v_per_cm3, p0_c_m, tau_s } => {
                ModelSpec::UniformDipole { rho_v_per_cm3, p0_c_m, tau_s: tau_s.or(Some(tau)) }
            }
            ModelSpec::UniformTrap { rho_a_per_cm2, p0_c_m, tau_s } => {
                ModelSpec::UniformTrap { rho_a_per_cm2, p0_c_m, tau_s: tau_s.or(Some(tau)) }
            }
            ModelSpec::ClusterDipole { position_nm, p0_c_m, tau_s } => {
                ModelSpec::ClusterDipole { position_nm, p0_c_m, tau_s: tau_s.or(Some(tau)) }
            }
            ModelSpec::ClusterTrap { position_nm, p0_c_m, tau_s } => {
                ModelSpec::ClusterTrap { position_nm, p0_c_m, tau_s: tau_s.or(Some(tau)) }
            }
            other => other,
        })
        .collect()
}

/// Calibrate (if needed), sweep, and attach the census.
pub fn build_map(
    quantity: Quantity,
    specs: &[ModelSpec],
    device: &DeviceParams,
    reference: &Reference,
    resolution: Resolution,
    opts: EwjnOptions,
) -> Result<AnisotropyMap> {
    let models = specs.iter().map(ModelSpec::to_model).collect::<Result<Vec<_>>>()?;
    let needs: Vec<bool> = specs.iter().map(ModelSpec::needs_calibration).collect();
    let (models, records) = calibrate_models(&models, &needs, device, reference, opts)?;
    let mut map = sweep(quantity, &models, device, resolution, opts)?;
    map.metadata.calibration = records;
    map.metadata.census = Some(census(&map, &CensusOptions::default()));
    Ok(map)
}

impl Scenario {
    pub fn build(&self, resolution: Resolution, tau: f64) -> Result<AnisotropyMap> {
        build_map(
            self.quantity,
            &with_default_tau(&self.models, tau),
            &self.device,
            &Reference::default(),
            resolution,
            EwjnOptions::default(),
        )
    }

    pub fn matches(&self, map: &AnisotropyMap) -> bool {
        let Some(c) = &map.metadata.census else { return false };
        match self.expected {
            ExpectedCensus::Degenerate => c.degenerate,
            ExpectedCensus::Counts { n_max, n_min, n_saddle } => {
                !c.degenerate && c.counts() == (n_max, n_min, n_saddle)
            }
        }
    }
}
