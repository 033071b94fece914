//! Noise sources and the field correlation tensors they produce at the qubit.
//!
//! Charge-noise models are split into a spatial part (a 3×3 electric-field
//! weight, statV²/cm²) and a spectral part supplied by a [`SpectralShape`].
//! The spatial part is multiplied by the spectral weight at ω for relaxation
//! or by the temporal factor for the dephasing exponent.

use std::f64::consts::PI;

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::device::DeviceParams;
use crate::error::{Error, Result};
use crate::units::{self, cgs};

/// rms dipole moment used when a config omits one, C·m.
pub const DEFAULT_P0_C_M: f64 = 2.0e-29;
/// Placeholder fluctuator switching time, s. Anisotropy topology does not
/// depend on it; absolute rates do.
pub const DEFAULT_TAU_S: f64 = 1.0e-6;
/// Isotropic hyperfine dephasing rate, s⁻¹.
pub const DEFAULT_HYPERFINE_RATE: f64 = 1.0 / 2.01e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldKind {
    Electric,
    Magnetic,
    EffectiveMagnetic,
}

/// Spectral density ⟨FᵢFⱼ⟩_ω of an electric or magnetic field at the qubit.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationTensor {
    pub entries: Matrix3<f64>,
    pub kind: FieldKind,
    /// rad/s
    pub frequency: f64,
}

impl CorrelationTensor {
    pub fn is_symmetric(&self, tol: f64) -> bool {
        (self.entries - self.entries.transpose()).abs().max() <= tol * self.entries.abs().max()
    }

    pub fn is_positive_semidefinite(&self, rel_tol: f64) -> bool {
        is_psd(&self.entries, rel_tol)
    }
}

pub(crate) fn is_psd(m: &Matrix3<f64>, rel_tol: f64) -> bool {
    let scale = m.abs().max();
    if scale == 0.0 {
        return true;
    }
    let sym = (m + m.transpose()) * 0.5;
    sym.symmetric_eigenvalues().iter().all(|&l| l >= -rel_tol * scale)
}

/// Time correlation of a single fluctuator, in both domains.
pub trait SpectralShape {
    /// Fourier transform g(ω) of the normalized time correlation, s.
    fn spectral_weight(&self, omega: f64) -> f64;
    /// (t²/2)∫g(ω) sinc²(ωt/2) dω, s².
    fn temporal_factor(&self, t: f64) -> f64;
}

/// Random telegraph switching, g(t) = e^{−|t|/τ}.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lorentzian {
    pub tau: f64,
}

impl SpectralShape for Lorentzian {
    fn spectral_weight(&self, omega: f64) -> f64 {
        lorentzian_spectrum(self.tau, omega)
    }

    fn temporal_factor(&self, t: f64) -> f64 {
        temporal_factor(self.tau, t)
    }
}

/// g(ω) = 2τ/(1+(ωτ)²).
pub fn lorentzian_spectrum(tau: f64, omega: f64) -> f64 {
    let wt = omega * tau;
    2.0 * tau / (1.0 + wt * wt)
}

/// 2πτ(t + (e^{−t/τ} − 1)τ), evaluated without cancellation for t ≪ τ.
pub fn temporal_factor(tau: f64, t: f64) -> f64 {
    let x = t / tau;
    // x + e^{-x} - 1
    let core = if x < 0.1 {
        // alternating series Σ_{k≥2} (-x)^k / k!
        let mut term = x * x / 2.0;
        let mut sum = term;
        for k in 3..24 {
            term *= -x / k as f64;
            sum += term;
        }
        sum
    } else {
        x + (-x).exp_m1()
    };
    2.0 * PI * tau * tau * core
}

/// A noise source, parameters in Gaussian-CGS.
#[derive(Debug, Clone, PartialEq)]
pub enum NoiseModel {
    /// Random dipoles uniformly filling the oxide layer.
    UniformDipole { rho_v: f64, p0: f64, tau: f64 },
    /// Interface traps uniformly covering the gate plane.
    UniformTrap { rho_a: f64, p0: f64, tau: f64 },
    /// A localized cluster of randomly oriented dipoles at `position` (cm,
    /// relative to the qubit).
    ClusterDipole { position: Vector3<f64>, p0: f64, tau: f64 },
    /// A localized trap cluster, dipole axis along z.
    ClusterTrap { position: Vector3<f64>, p0: f64, tau: f64 },
    /// Evanescent-wave Johnson noise from the gate layer.
    Ewjn,
    /// Isotropic additive dephasing rate, s⁻¹.
    Hyperfine { rate: f64 },
}

impl NoiseModel {
    pub fn name(&self) -> &'static str {
        match self {
            NoiseModel::UniformDipole { .. } => "UD",
            NoiseModel::UniformTrap { .. } => "UT",
            NoiseModel::ClusterDipole { .. } => "cluster_dipole",
            NoiseModel::ClusterTrap { .. } => "cluster_trap",
            NoiseModel::Ewjn => "EWJN",
            NoiseModel::Hyperfine { .. } => "hyperfine",
        }
    }

    pub fn is_charge(&self) -> bool {
        self.tau().is_some()
    }

    pub fn tau(&self) -> Option<f64> {
        match *self {
            NoiseModel::UniformDipole { tau, .. }
            | NoiseModel::UniformTrap { tau, .. }
            | NoiseModel::ClusterDipole { tau, .. }
            | NoiseModel::ClusterTrap { tau, .. } => Some(tau),
            _ => None,
        }
    }

    pub fn spectrum(&self) -> Option<Lorentzian> {
        self.tau().map(|tau| Lorentzian { tau })
    }

    pub fn with_tau(&self, new_tau: f64) -> Self {
        let mut m = self.clone();
        match &mut m {
            NoiseModel::UniformDipole { tau, .. }
            | NoiseModel::UniformTrap { tau, .. }
            | NoiseModel::ClusterDipole { tau, .. }
            | NoiseModel::ClusterTrap { tau, .. } => *tau = new_tau,
            _ => {}
        }
        m
    }

    /// Multiply the strength parameter (density, or p₀² for clusters) by
    /// `factor`. Every charge-noise correlation is linear in it.
    pub fn scaled(&self, factor: f64) -> Self {
        let mut m = self.clone();
        match &mut m {
            NoiseModel::UniformDipole { rho_v, .. } => *rho_v *= factor,
            NoiseModel::UniformTrap { rho_a, .. } => *rho_a *= factor,
            NoiseModel::ClusterDipole { p0, .. } | NoiseModel::ClusterTrap { p0, .. } => {
                *p0 *= factor.sqrt()
            }
            NoiseModel::Hyperfine { rate } => *rate *= factor,
            NoiseModel::Ewjn => {}
        }
        m
    }

    /// Name and lab-unit value of the parameter that calibration fits.
    pub fn fit_parameter(&self) -> Option<(&'static str, f64)> {
        match *self {
            NoiseModel::UniformDipole { rho_v, .. } => Some(("rho_v_per_cm3", rho_v)),
            NoiseModel::UniformTrap { rho_a, .. } => Some(("rho_a_per_cm2", rho_a)),
            NoiseModel::ClusterDipole { p0, .. } | NoiseModel::ClusterTrap { p0, .. } => {
                Some(("p0_Cm", units::dipole_to_si(p0)))
            }
            _ => None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::InvalidArgument(format!(
                    "{}: {name} must be finite and > 0, got {v}",
                    self.name()
                )))
            }
        };
        match *self {
            NoiseModel::UniformDipole { rho_v, p0, tau } => {
                positive("rho_v", rho_v)?;
                positive("p0", p0)?;
                positive("tau", tau)
            }
            NoiseModel::UniformTrap { rho_a, p0, tau } => {
                positive("rho_a", rho_a)?;
                positive("p0", p0)?;
                positive("tau", tau)
            }
            NoiseModel::ClusterDipole { position, p0, tau } => {
                positive("p0", p0)?;
                positive("tau", tau)?;
                if position.norm() == 0.0 {
                    return Err(Error::SingularSource("cluster sits on the qubit".into()));
                }
                Ok(())
            }
            NoiseModel::ClusterTrap { position, p0, tau } => {
                positive("p0", p0)?;
                positive("tau", tau)?;
                if position.norm() == 0.0 {
                    return Err(Error::SingularSource("cluster sits on the qubit".into()));
                }
                if position.z <= 0.0 {
                    return Err(Error::InvalidArgument(format!(
                        "cluster_trap must lie above the qubit (z > 0), got z={} nm",
                        units::cm_to_nm(position.z)
                    )));
                }
                Ok(())
            }
            NoiseModel::Ewjn => Ok(()),
            NoiseModel::Hyperfine { rate } => {
                if rate.is_finite() && rate >= 0.0 {
                    Ok(())
                } else {
                    Err(Error::InvalidArgument(format!("hyperfine rate must be ≥ 0, got {rate}")))
                }
            }
        }
    }

    /// Spatial electric-field weight, spectral part factored out.
    ///
    /// Uniform models only fill the in-plane diagonal; the z row never
    /// reaches the qubit because vertical confinement is taken as rigid.
    pub fn electric_weights(&self, device: &DeviceParams) -> Result<Matrix3<f64>> {
        match self {
            NoiseModel::UniformDipole { .. } | NoiseModel::UniformTrap { .. } => {
                let w = charge_uniform_efield_weights(self, device)?;
                Ok(Matrix3::from_diagonal(&Vector3::new(w.xx, w.yy, 0.0)))
            }
            NoiseModel::ClusterDipole { .. } | NoiseModel::ClusterTrap { .. } => cluster_spatial(self),
            _ => Err(Error::InvalidArgument(format!(
                "{} is not a charge-noise model",
                self.name()
            ))),
        }
    }
}

/// In-plane electric weights of a uniform charge-noise model, statV²/cm².
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InPlaneWeights {
    pub xx: f64,
    pub yy: f64,
}

/// Closed-form in-plane weights for the uniform dipole and trap models.
///
/// UD: S_xx = S_yy = (πρᵥp₀²/12)(1/l³ − 1/d³).
/// UT: S_xx = (9π+6)ρₐp₀²/(32d⁴), S_yy = (9π−6)ρₐp₀²/(32d⁴).
/// S_xy is zero in both cases.
pub fn charge_uniform_efield_weights(model: &NoiseModel, device: &DeviceParams) -> Result<InPlaneWeights> {
    let d = device.gate_distance;
    match *model {
        NoiseModel::UniformDipole { rho_v, p0, .. } => {
            let l = device.oxide_thickness;
            let s = PI * rho_v * p0 * p0 / 12.0 * (l.powi(-3) - d.powi(-3));
            Ok(InPlaneWeights { xx: s, yy: s })
        }
        NoiseModel::UniformTrap { rho_a, p0, .. } => {
            let base = rho_a * p0 * p0 / (32.0 * d.powi(4));
            Ok(InPlaneWeights {
                xx: (9.0 * PI + 6.0) * base,
                yy: (9.0 * PI - 6.0) * base,
            })
        }
        _ => Err(Error::InvalidArgument(format!(
            "{} is not a uniform charge-noise model",
            model.name()
        ))),
    }
}

fn cluster_spatial(model: &NoiseModel) -> Result<Matrix3<f64>> {
    match *model {
        NoiseModel::ClusterDipole { position, p0, .. } => {
            let r = -position;
            let r2 = r.norm_squared();
            if r2 == 0.0 {
                return Err(Error::SingularSource("cluster_dipole at the qubit".into()));
            }
            let m = (r * r.transpose() * 3.0 + Matrix3::identity() * r2) / r2.powi(4);
            Ok(m * (p0 * p0 / 3.0))
        }
        NoiseModel::ClusterTrap { position, p0, .. } => {
            let r = -position;
            let r2 = r.norm_squared();
            if r2 == 0.0 {
                return Err(Error::SingularSource("cluster_trap at the qubit".into()));
            }
            let (rz, ez) = (r.z, Vector3::<f64>::z());
            let mut m = Matrix3::zeros();
            for i in 0..3 {
                for j in 0..3 {
                    m[(i, j)] = 9.0 * rz * rz * r[i] * r[j]
                        - 3.0 * rz * r[j] * r2 * ez[i]
                        - 3.0 * rz * r[i] * r2 * ez[j]
                        + r2 * r2 * ez[i] * ez[j];
                }
            }
            Ok(m * (p0 * p0 / r2.powi(5)))
        }
        _ => Err(Error::InvalidArgument(format!("{} is not a cluster model", model.name()))),
    }
}

/// Electric correlation at the qubit from a single cluster, at frequency ω.
pub fn cluster_efield_tensor(model: &NoiseModel, omega: f64) -> Result<CorrelationTensor> {
    let spatial = cluster_spatial(model)?;
    let tau = model.tau().expect("cluster models carry tau");
    Ok(CorrelationTensor {
        entries: spatial * lorentzian_spectrum(tau, omega),
        kind: FieldKind::Electric,
        frequency: omega,
    })
}

fn check_frequency(omega: f64) -> Result<()> {
    if omega.is_finite() && omega > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "EWJN tensors need ω > 0, got {omega}; use the white-noise limit for ω → 0"
        )))
    }
}

/// Half-space Johnson-noise electric field: ⟨EzEz⟩ = ħωε_d/(8πσd³)·coth(ħω/2k_BT),
/// in-plane components half of that, no off-diagonals.
pub fn ewjn_electric_tensor(device: &DeviceParams, omega: f64) -> Result<CorrelationTensor> {
    check_frequency(omega)?;
    let d = device.gate_distance;
    let zz = cgs::HBAR * omega * device.eps_d / (8.0 * PI * device.conductivity * d.powi(3))
        * device.thermal_coth(omega);
    Ok(CorrelationTensor {
        entries: Matrix3::from_diagonal(&Vector3::new(0.5, 0.5, 1.0)) * zz,
        kind: FieldKind::Electric,
        frequency: omega,
    })
}

/// Half-space Johnson-noise magnetic field: ⟨BzBz⟩ = πħσω/(2c²d)·coth(ħω/2k_BT),
/// in-plane components half of that, no off-diagonals.
pub fn ewjn_magnetic_tensor(device: &DeviceParams, omega: f64) -> Result<CorrelationTensor> {
    check_frequency(omega)?;
    let zz = PI * cgs::HBAR * device.conductivity * omega / (2.0 * cgs::C * cgs::C * device.gate_distance)
        * device.thermal_coth(omega);
    Ok(CorrelationTensor {
        entries: Matrix3::from_diagonal(&Vector3::new(0.5, 0.5, 1.0)) * zz,
        kind: FieldKind::Magnetic,
        frequency: omega,
    })
}

/// The configured rate; zero for any other model.
pub fn hyperfine_rate(model: &NoiseModel) -> f64 {
    match *model {
        NoiseModel::Hyperfine { rate } => rate,
        _ => 0.0,
    }
}

/// Hyperfine share of dephasing estimated as the difference between the
/// rates of a natural-abundance and an isotopically purified sample.
pub fn hyperfine_rate_from_isotope_difference(natural_t2: f64, purified_t2: f64) -> f64 {
    1.0 / natural_t2 - 1.0 / purified_t2
}

/// JSON form of a noise model, lab units. Absent strength fields mark a
/// model as awaiting calibration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", deny_unknown_fields)]
pub enum ModelSpec {
    #[serde(rename = "UD")]
    UniformDipole {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        rho_v_per_cm3: Option<f64>,
        #[serde(rename = "p0_Cm", default, skip_serializing_if = "Option::is_none")]
        p0_c_m: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        tau_s: Option<f64>,
    },
    #[serde(rename = "UT")]
    UniformTrap {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        rho_a_per_cm2: Option<f64>,
        #[serde(rename = "p0_Cm", default, skip_serializing_if = "Option::is_none")]
        p0_c_m: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        tau_s: Option<f64>,
    },
    #[serde(rename = "cluster_dipole")]
    ClusterDipole {
        position_nm: [f64; 3],
        #[serde(rename = "p0_Cm", default, skip_serializing_if = "Option::is_none")]
        p0_c_m: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        tau_s: Option<f64>,
    },
    #[serde(rename = "cluster_trap")]
    ClusterTrap {
        position_nm: [f64; 3],
        #[serde(rename = "p0_Cm", default, skip_serializing_if = "Option::is_none")]
        p0_c_m: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        tau_s: Option<f64>,
    },
    #[serde(rename = "EWJN")]
    Ewjn {},
    #[serde(rename = "hyperfine")]
    Hyperfine {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        rate_per_s: Option<f64>,
    },
}

impl ModelSpec {
    /// True when the strength parameter is missing and must be fitted.
    pub fn needs_calibration(&self) -> bool {
        match self {
            ModelSpec::UniformDipole { rho_v_per_cm3, .. } => rho_v_per_cm3.is_none(),
            ModelSpec::UniformTrap { rho_a_per_cm2, .. } => rho_a_per_cm2.is_none(),
            ModelSpec::ClusterDipole { p0_c_m, .. } | ModelSpec::ClusterTrap { p0_c_m, .. } => {
                p0_c_m.is_none()
            }
            _ => false,
        }
    }

    /// Internal model. Missing strengths become unit placeholders (density 1,
    /// or the default p₀ for clusters) that calibration rescales.
    pub fn to_model(&self) -> Result<NoiseModel> {
        let p0 = |v: &Option<f64>| units::dipole_from_si(v.unwrap_or(DEFAULT_P0_C_M));
        let tau = |v: &Option<f64>| v.unwrap_or(DEFAULT_TAU_S);
        let pos = |p: &[f64; 3]| Vector3::new(units::nm_to_cm(p[0]), units::nm_to_cm(p[1]), units::nm_to_cm(p[2]));
        let model = match self {
            ModelSpec::UniformDipole { rho_v_per_cm3, p0_c_m, tau_s } => NoiseModel::UniformDipole {
                rho_v: rho_v_per_cm3.unwrap_or(1.0),
                p0: p0(p0_c_m),
                tau: tau(tau_s),
            },
            ModelSpec::UniformTrap { rho_a_per_cm2, p0_c_m, tau_s } => NoiseModel::UniformTrap {
                rho_a: rho_a_per_cm2.unwrap_or(1.0),
                p0: p0(p0_c_m),
                tau: tau(tau_s),
            },
            ModelSpec::ClusterDipole { position_nm, p0_c_m, tau_s } => NoiseModel::ClusterDipole {
                position: pos(position_nm),
                p0: p0(p0_c_m),
                tau: tau(tau_s),
            },
            ModelSpec::ClusterTrap { position_nm, p0_c_m, tau_s } => NoiseModel::ClusterTrap {
                position: pos(position_nm),
                p0: p0(p0_c_m),
                tau: tau(tau_s),
            },
            ModelSpec::Ewjn {} => NoiseModel::Ewjn,
            ModelSpec::Hyperfine { rate_per_s } => NoiseModel::Hyperfine {
                rate: rate_per_s.unwrap_or(DEFAULT_HYPERFINE_RATE),
            },
        };
        model.validate()?;
        Ok(model)
    }

    pub fn from_model(model: &NoiseModel) -> Self {
        let pos = |p: &Vector3<f64>| [units::cm_to_nm(p.x), units::cm_to_nm(p.y), units::cm_to_nm(p.z)];
        match *model {
            NoiseModel::UniformDipole { rho_v, p0, tau } => ModelSpec::UniformDipole {
                rho_v_per_cm3: Some(rho_v),
                p0_c_m: Some(units::dipole_to_si(p0)),
                tau_s: Some(tau),
            },
            NoiseModel::UniformTrap { rho_a, p0, tau } => ModelSpec::UniformTrap {
                rho_a_per_cm2: Some(rho_a),
                p0_c_m: Some(units::dipole_to_si(p0)),
                tau_s: Some(tau),
            },
            NoiseModel::ClusterDipole { position, p0, tau } => ModelSpec::ClusterDipole {
                position_nm: pos(&position),
                p0_c_m: Some(units::dipole_to_si(p0)),
                tau_s: Some(tau),
            },
            NoiseModel::ClusterTrap { position, p0, tau } => ModelSpec::ClusterTrap {
                position_nm: pos(&position),
                p0_c_m: Some(units::dipole_to_si(p0)),
                tau_s: Some(tau),
            },
            NoiseModel::Ewjn => ModelSpec::Ewjn {},
            NoiseModel::Hyperfine { rate } => ModelSpec::Hyperfine { rate_per_s: Some(rate) },
        }
    }
}
