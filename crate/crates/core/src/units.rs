//! Physical constants and lab-unit conversions.
//!
//! Everything inside the crate is Gaussian-CGS: lengths in cm, fields in
//! gauss and statvolt/cm, conductivity in s⁻¹, charge in statcoulomb. Config
//! documents use lab units (nm, mT/nm, S/m, mK, GHz, C·m) and are converted
//! once at load time.

/// Gaussian-CGS values (CODATA 2018).
pub mod cgs {
    /// Reduced Planck constant, erg·s.
    pub const HBAR: f64 = 1.054_571_817e-27;
    /// Boltzmann constant, erg/K.
    pub const K_B: f64 = 1.380_649e-16;
    /// Speed of light, cm/s.
    pub const C: f64 = 2.997_924_58e10;
    /// Elementary charge, statC.
    pub const E_CHARGE: f64 = 4.803_204_712_570_263e-10;
    /// Electron rest mass, g.
    pub const M_E: f64 = 9.109_383_701_5e-28;
}

/// SI values of the same constants, used only for cross-checks.
pub mod si {
    pub const HBAR: f64 = 1.054_571_817e-34;
    pub const K_B: f64 = 1.380_649e-23;
    pub const C: f64 = 299_792_458.0;
    pub const E_CHARGE: f64 = 1.602_176_634e-19;
    pub const M_E: f64 = 9.109_383_701_5e-31;
}

pub const CM_PER_NM: f64 = 1e-7;
/// 1 mT/nm = 10 G per 1e-7 cm.
pub const GAUSS_PER_CM_PER_MT_PER_NM: f64 = 1e8;
/// σ[s⁻¹] = σ[S/m] / (4πε₀) = σ[S/m] · c²·10⁻⁷.
pub const PER_S_PER_S_PER_M: f64 = si::C * si::C * 1e-7;
/// 1 C·m in statC·cm.
pub const STATC_CM_PER_C_M: f64 = 2.997_924_58e11;

pub fn nm_to_cm(nm: f64) -> f64 {
    nm * CM_PER_NM
}

pub fn cm_to_nm(cm: f64) -> f64 {
    cm / CM_PER_NM
}

pub fn conductivity_from_si(sigma_s_per_m: f64) -> f64 {
    sigma_s_per_m * PER_S_PER_S_PER_M
}

pub fn conductivity_to_si(sigma: f64) -> f64 {
    sigma / PER_S_PER_S_PER_M
}

pub fn gradient_from_mt_per_nm(g: f64) -> f64 {
    g * GAUSS_PER_CM_PER_MT_PER_NM
}

pub fn gradient_to_mt_per_nm(g: f64) -> f64 {
    g / GAUSS_PER_CM_PER_MT_PER_NM
}

pub fn dipole_from_si(p_c_m: f64) -> f64 {
    p_c_m * STATC_CM_PER_C_M
}

pub fn dipole_to_si(p: f64) -> f64 {
    p / STATC_CM_PER_C_M
}

pub fn kelvin_from_mk(mk: f64) -> f64 {
    mk * 1e-3
}

pub fn angular_from_ghz(f_ghz: f64) -> f64 {
    2.0 * std::f64::consts::PI * f_ghz * 1e9
}
