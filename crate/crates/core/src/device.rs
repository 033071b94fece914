//! Device description: geometry, materials, micromagnet gradients and the
//! operating point, plus ingestion of the JSON device config.

use std::f64::consts::PI;
use std::path::Path;

use nalgebra::Matrix3x2;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::units::{self, cgs};

/// Config document for the bundled case-study device.
pub const CASE_STUDY_JSON: &str = include_str!("../../../cases/kawakami2014.json");

/// Above this d/δ ratio the half-space near-field formulas are flagged.
pub const NEAR_FIELD_WARN_RATIO: f64 = 0.5;

/// Micromagnet field gradients ∂Bᵢ/∂xⱼ, i ∈ {x,y,z}, j ∈ {x,y}, in G/cm.
///
/// There is no z column: the dot is treated as two-dimensional, so motion
/// along the growth axis never enters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradientMatrix {
    g: [[f64; 2]; 3],
}

impl GradientMatrix {
    pub fn from_gauss_per_cm(g: [[f64; 2]; 3]) -> Self {
        Self { g }
    }

    pub fn from_mt_per_nm(g: [[f64; 2]; 3]) -> Self {
        let mut out = [[0.0; 2]; 3];
        for (row, src) in out.iter_mut().zip(g.iter()) {
            for (o, s) in row.iter_mut().zip(src.iter()) {
                *o = units::gradient_from_mt_per_nm(*s);
            }
        }
        Self { g: out }
    }

    pub fn zero() -> Self {
        Self { g: [[0.0; 2]; 3] }
    }

    /// ∂B_component/∂x_axis, G/cm.
    pub fn get(&self, component: usize, axis: usize) -> f64 {
        self.g[component][axis]
    }

    pub fn as_matrix(&self) -> Matrix3x2<f64> {
        Matrix3x2::new(
            self.g[0][0], self.g[0][1], self.g[1][0], self.g[1][1], self.g[2][0], self.g[2][1],
        )
    }

    /// Copy with the x and y columns taken to be identical (first column).
    pub fn with_isotropic_columns(&self) -> Self {
        let mut g = self.g;
        for row in g.iter_mut() {
            row[1] = row[0];
        }
        Self { g }
    }
}

/// Device parameters in Gaussian-CGS.
#[derive(Debug, Clone, PartialEq)]
pub struct DeviceParams {
    /// Qubit to gate distance, cm.
    pub gate_distance: f64,
    /// Oxide layer thickness, cm.
    pub oxide_thickness: f64,
    pub eps_d: f64,
    /// Gate conductivity, s⁻¹.
    pub conductivity: f64,
    /// In-plane effective mass, g. Enters the spring constants only.
    pub effective_mass: f64,
    /// Lowest orbital excitation frequency, rad/s.
    pub omega_orb: f64,
    /// Qubit operating frequency, rad/s.
    pub omega_op: f64,
    /// Kelvin.
    pub temperature: f64,
    pub gradients: GradientMatrix,
    pub g_factor: f64,
    /// Carrier charge, statC.
    pub charge: f64,
}

impl DeviceParams {
    /// kₓ = k_y = m ω_orb²; k_z is infinite and never used.
    pub fn spring_constant(&self) -> f64 {
        self.effective_mass * self.omega_orb * self.omega_orb
    }

    /// ħω/2k_BT at frequency `omega`.
    pub fn thermal_ratio(&self, omega: f64) -> f64 {
        cgs::HBAR * omega / (2.0 * cgs::K_B * self.temperature)
    }

    pub fn thermal_coth(&self, omega: f64) -> f64 {
        1.0 / self.thermal_ratio(omega).tanh()
    }

    pub fn with_conductivity(&self, conductivity: f64) -> Self {
        Self {
            conductivity,
            ..self.clone()
        }
    }

    pub fn with_gradients(&self, gradients: GradientMatrix) -> Self {
        Self {
            gradients,
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let checks = [
            ("d_nm", self.gate_distance),
            ("l_nm", self.oxide_thickness),
            ("eps_d", self.eps_d),
            ("sigma_S_per_m", self.conductivity),
            ("m_eff_me", self.effective_mass),
            ("omega_orb_rad_s", self.omega_orb),
            ("f_op_GHz", self.omega_op),
            ("temperature_mK", self.temperature),
            ("g_factor", self.g_factor),
        ];
        for (key, value) in checks {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::config(key, format!("must be finite and > 0, got {value}")));
            }
        }
        for i in 0..3 {
            for j in 0..2 {
                if !self.gradients.get(i, j).is_finite() {
                    return Err(Error::config("gradients_mT_per_nm", "non-finite gradient"));
                }
            }
        }
        Ok(())
    }

    pub fn to_config(&self) -> DeviceConfig {
        let g = |i, j| units::gradient_to_mt_per_nm(self.gradients.get(i, j));
        DeviceConfig {
            d_nm: units::cm_to_nm(self.gate_distance),
            l_nm: units::cm_to_nm(self.oxide_thickness),
            eps_d: self.eps_d,
            sigma_s_per_m: units::conductivity_to_si(self.conductivity),
            m_eff_me: self.effective_mass / cgs::M_E,
            omega_orb_rad_s: self.omega_orb,
            f_op_ghz: self.omega_op / (2.0 * PI * 1e9),
            temperature_mk: self.temperature * 1e3,
            g_factor: self.g_factor,
            gradients_mt_per_nm: GradientConfig {
                dbx_dx: g(0, 0),
                dby_dx: g(1, 0),
                dbz_dx: g(2, 0),
                dbx_dy: g(0, 1),
                dby_dy: g(1, 1),
                dbz_dy: g(2, 1),
            },
        }
    }

    /// SHA-256 of the canonical lab-unit config, hex encoded.
    pub fn fingerprint(&self) -> String {
        let doc = serde_json::to_string(&self.to_config()).expect("device config serializes");
        hex::encode(Sha256::digest(doc.as_bytes()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GradientConfig {
    #[serde(rename = "dBx_dx")]
    pub dbx_dx: f64,
    #[serde(rename = "dBy_dx")]
    pub dby_dx: f64,
    #[serde(rename = "dBz_dx")]
    pub dbz_dx: f64,
    #[serde(rename = "dBx_dy")]
    pub dbx_dy: f64,
    #[serde(rename = "dBy_dy")]
    pub dby_dy: f64,
    #[serde(rename = "dBz_dy")]
    pub dbz_dy: f64,
}

/// The JSON device document, in lab units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeviceConfig {
    pub d_nm: f64,
    pub l_nm: f64,
    pub eps_d: f64,
    #[serde(rename = "sigma_S_per_m")]
    pub sigma_s_per_m: f64,
    pub m_eff_me: f64,
    pub omega_orb_rad_s: f64,
    #[serde(rename = "f_op_GHz")]
    pub f_op_ghz: f64,
    #[serde(rename = "temperature_mK")]
    pub temperature_mk: f64,
    #[serde(default = "default_g_factor")]
    pub g_factor: f64,
    #[serde(rename = "gradients_mT_per_nm")]
    pub gradients_mt_per_nm: GradientConfig,
}

fn default_g_factor() -> f64 {
    2.0
}

impl DeviceConfig {
    pub fn to_params(&self) -> Result<DeviceParams> {
        let g = &self.gradients_mt_per_nm;
        let params = DeviceParams {
            gate_distance: units::nm_to_cm(self.d_nm),
            oxide_thickness: units::nm_to_cm(self.l_nm),
            eps_d: self.eps_d,
            conductivity: units::conductivity_from_si(self.sigma_s_per_m),
            effective_mass: self.m_eff_me * cgs::M_E,
            omega_orb: self.omega_orb_rad_s,
            omega_op: units::angular_from_ghz(self.f_op_ghz),
            temperature: units::kelvin_from_mk(self.temperature_mk),
            gradients: GradientMatrix::from_mt_per_nm([
                [g.dbx_dx, g.dbx_dy],
                [g.dby_dx, g.dby_dy],
                [g.dbz_dx, g.dbz_dy],
            ]),
            g_factor: self.g_factor,
            charge: cgs::E_CHARGE,
        };
        params.validate()?;
        Ok(params)
    }
}

/// Parse a JSON device document into internal units.
pub fn load_config(document: &str) -> Result<DeviceParams> {
    let config: DeviceConfig = serde_json::from_str(document)?;
    config.to_params()
}

pub fn load_config_file(path: impl AsRef<Path>) -> Result<DeviceParams> {
    let text = std::fs::read_to_string(path)?;
    load_config(&text)
}

/// The case-study device shipped in `cases/kawakami2014.json`.
pub fn case_study() -> DeviceParams {
    load_config(CASE_STUDY_JSON).expect("bundled case-study config is valid")
}

/// δ = c/√(2πσω), cm. `sigma` in s⁻¹.
pub fn skin_depth(sigma: f64, omega: f64) -> f64 {
    cgs::C / (2.0 * PI * sigma * omega).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RegimeReport {
    /// cm
    pub distance: f64,
    /// cm
    pub skin_depth: f64,
    pub ratio: f64,
    pub warn: bool,
}

pub fn check_near_field_regime(device: &DeviceParams) -> RegimeReport {
    let delta = skin_depth(device.conductivity, device.omega_op);
    let ratio = device.gate_distance / delta;
    RegimeReport {
        distance: device.gate_distance,
        skin_depth: delta,
        ratio,
        warn: ratio > NEAR_FIELD_WARN_RATIO,
    }
}
