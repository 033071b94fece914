//! Relaxation and dephasing times from noise correlation tensors.
//!
//! Electric noise reaches the spin through the micromagnet: a field E shifts
//! the dot by Δx = qE/2k, and the gradient turns that shift into an effective
//! magnetic field. Only the in-plane components couple; vertical confinement
//! is treated as infinitely stiff.

use std::f64::consts::PI;

use nalgebra::{Matrix2, Matrix3, Matrix3x2, Vector3};
use serde::{Deserialize, Serialize};

use crate::device::DeviceParams;
use crate::error::{Error, Result};
use crate::geometry::{longitudinal_weight, transverse_weight, FieldDirection};
use crate::noise::{
    ewjn_electric_tensor, ewjn_magnetic_tensor, is_psd, lorentzian_spectrum, temporal_factor,
    CorrelationTensor, FieldKind, NoiseModel,
};
use crate::units::cgs;

/// Bracket expansion limit for the dephasing root.
pub const MAX_DOUBLINGS: usize = 200;

/// A coherence time, or the absence of any decay channel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Lifetime {
    Finite(f64),
    NoDecay,
}

impl Lifetime {
    pub fn from_rate(rate: f64) -> Self {
        if rate > 0.0 {
            Lifetime::Finite(1.0 / rate)
        } else {
            Lifetime::NoDecay
        }
    }

    /// Seconds; `f64::INFINITY` for no decay.
    pub fn seconds(&self) -> f64 {
        match *self {
            Lifetime::Finite(t) => t,
            Lifetime::NoDecay => f64::INFINITY,
        }
    }

    pub fn rate(&self) -> f64 {
        match *self {
            Lifetime::Finite(t) => 1.0 / t,
            Lifetime::NoDecay => 0.0,
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, Lifetime::Finite(_))
    }
}

/// Correlation of the total magnetic field seen by the spin, G²·s.
#[derive(Debug, Clone, PartialEq)]
pub struct EffectiveTensor {
    pub entries: Matrix3<f64>,
    /// Names of contributing noise sources.
    pub provenance: Vec<String>,
    /// rad/s; `None` for a spatial weight not yet tied to a frequency.
    pub frequency: Option<f64>,
}

impl EffectiveTensor {
    pub fn zero(frequency: Option<f64>) -> Self {
        Self {
            entries: Matrix3::zeros(),
            provenance: Vec::new(),
            frequency,
        }
    }

    pub fn combined(mut self, other: &EffectiveTensor) -> Self {
        self.entries += other.entries;
        self.provenance.extend(other.provenance.iter().cloned());
        self
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        (self.entries - self.entries.transpose()).abs().max() <= tol * self.entries.abs().max()
    }

    pub fn is_positive_semidefinite(&self, rel_tol: f64) -> bool {
        is_psd(&self.entries, rel_tol)
    }
}

/// C = qG/2k, mapping in-plane electric field to effective magnetic field.
pub fn coupling_matrix(device: &DeviceParams) -> Matrix3x2<f64> {
    device.gradients.as_matrix() * (device.charge / (2.0 * device.spring_constant()))
}

/// C·E₂ₓ₂·Cᵀ for an in-plane electric correlation block.
pub fn convert_electric(device: &DeviceParams, electric: &Matrix3<f64>) -> Matrix3<f64> {
    let c = coupling_matrix(device);
    let e2: Matrix2<f64> = electric.fixed_view::<2, 2>(0, 0).into_owned();
    c * e2 * c.transpose()
}

/// Effective magnetic correlation from an electric one. The z row and
/// column of `electric` are ignored.
pub fn effective_from_electric(electric: &CorrelationTensor, device: &DeviceParams) -> Result<EffectiveTensor> {
    if electric.kind != FieldKind::Electric {
        return Err(Error::InvalidArgument(format!(
            "expected an electric tensor, got {:?}",
            electric.kind
        )));
    }
    Ok(EffectiveTensor {
        entries: convert_electric(device, &electric.entries),
        provenance: vec!["electric".into()],
        frequency: Some(electric.frequency),
    })
}

/// (qg/4m_ec)², the relaxation-rate prefactor in s⁻¹ per G²·s.
pub fn relaxation_prefactor(device: &DeviceParams) -> f64 {
    let a = device.charge * device.g_factor / (4.0 * cgs::M_E * cgs::C);
    a * a
}

/// (qg/2m_ec)², the dephasing prefactor.
pub fn dephasing_prefactor(device: &DeviceParams) -> f64 {
    let a = device.charge * device.g_factor / (2.0 * cgs::M_E * cgs::C);
    a * a
}

/// 1/T1 = (qg/4m_ec)² Σᵢⱼ Q⁽¹⁾ᵢⱼ Sᵢⱼ(ω_op).
pub fn t1_from_tensor(eff: &EffectiveTensor, dir: &FieldDirection, device: &DeviceParams) -> Lifetime {
    Lifetime::from_rate(relaxation_prefactor(device) * transverse_weight(dir).contract(&eff.entries))
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct EwjnOptions {
    /// Replace the exact direct-magnetic contraction, which varies as
    /// (2 + sin²θ)/4, by its angle-free shorthand πħσω/(c²d)·coth.
    #[serde(default)]
    pub constant_alpha: bool,
}

/// Direct magnetic plus gradient-converted electric EWJN correlation at ω_op.
pub fn ewjn_effective_tensor(device: &DeviceParams) -> Result<EffectiveTensor> {
    let w = device.omega_op;
    let b = ewjn_magnetic_tensor(device, w)?;
    let e = ewjn_electric_tensor(device, w)?;
    let mut eff = effective_from_electric(&e, device)?;
    eff.entries += b.entries;
    eff.provenance = vec!["EWJN".into()];
    Ok(eff)
}

/// Angle-free direct-magnetic EWJN rate, before the prefactor.
fn ewjn_alpha(device: &DeviceParams) -> f64 {
    PI * cgs::HBAR * device.conductivity * device.omega_op / (cgs::C * cgs::C * device.gate_distance)
        * device.thermal_coth(device.omega_op)
}

pub fn ewjn_t1_rate(device: &DeviceParams, dir: &FieldDirection, opts: EwjnOptions) -> Result<f64> {
    let pref = relaxation_prefactor(device);
    if opts.constant_alpha {
        let e = ewjn_electric_tensor(device, device.omega_op)?;
        let converted = convert_electric(device, &e.entries);
        Ok(pref * (ewjn_alpha(device) + transverse_weight(dir).contract(&converted)))
    } else {
        let eff = ewjn_effective_tensor(device)?;
        Ok(pref * transverse_weight(dir).contract(&eff.entries))
    }
}

pub fn ewjn_t1(device: &DeviceParams, dir: &FieldDirection, opts: EwjnOptions) -> Result<Lifetime> {
    ewjn_t1_rate(device, dir, opts).map(Lifetime::from_rate)
}

/// Low-frequency white-noise factor 2πk_BT/(ħω coth(ħω/2k_BT)) that carries
/// the EWJN tensor from ω_op down to the dephasing band.
fn ewjn_white_factor(device: &DeviceParams) -> f64 {
    let w = device.omega_op;
    2.0 * PI * cgs::K_B * device.temperature / (cgs::HBAR * w * device.thermal_coth(w))
}

/// Pure-dephasing rate from EWJN, s⁻¹.
pub fn ewjn_dephasing_rate(device: &DeviceParams, dir: &FieldDirection) -> Result<f64> {
    let eff = ewjn_effective_tensor(device)?;
    Ok(dephasing_prefactor(device) * longitudinal_weight(dir).contract(&eff.entries) * ewjn_white_factor(device))
}

/// 1/T2 = 1/Tφ + additive rates, plus 1/2T1 when `t1` is supplied.
pub fn combine_t2(tphi: Lifetime, additive_rate: f64, t1: Option<Lifetime>) -> Lifetime {
    let mut rate = tphi.rate() + additive_rate;
    if let Some(t1) = t1 {
        rate += 0.5 * t1.rate();
    }
    Lifetime::from_rate(rate)
}

fn charge_models(models: &[NoiseModel]) -> Result<Vec<&NoiseModel>> {
    models
        .iter()
        .map(|m| {
            if m.is_charge() {
                Ok(m)
            } else {
                Err(Error::InvalidArgument(format!(
                    "{} enters as a rate, not through the dephasing exponent",
                    m.name()
                )))
            }
        })
        .collect()
}

/// Γ(t) for a set of charge-noise models.
pub fn gamma(t: f64, dir: &FieldDirection, models: &[NoiseModel], device: &DeviceParams) -> Result<f64> {
    let kernel = DecoherenceKernel::new(&charge_models(models)?.into_iter().cloned().collect::<Vec<_>>(), device, EwjnOptions::default())?;
    kernel.gamma(t, dir)
}

/// Charge-only Tφ solving Γ(Tφ) = 1.
pub fn dephasing_time(dir: &FieldDirection, models: &[NoiseModel], device: &DeviceParams) -> Result<Lifetime> {
    let kernel = DecoherenceKernel::new(&charge_models(models)?.into_iter().cloned().collect::<Vec<_>>(), device, EwjnOptions::default())?;
    kernel.charge_dephasing_time(dir)
}

/// T1 from one charge-noise model, using g(ω_op).
pub fn charge_t1(dir: &FieldDirection, model: &NoiseModel, device: &DeviceParams) -> Result<Lifetime> {
    let tau = model
        .tau()
        .ok_or_else(|| Error::InvalidArgument(format!("{} is not a charge-noise model", model.name())))?;
    let eff = convert_electric(device, &model.electric_weights(device)?);
    let rate = relaxation_prefactor(device)
        * transverse_weight(dir).contract(&eff)
        * lorentzian_spectrum(tau, device.omega_op);
    Ok(Lifetime::from_rate(rate))
}

#[derive(Debug, Clone)]
struct ChargeTerm {
    /// (qg/2m_ec)²·C S Cᵀ
    weight: Matrix3<f64>,
    tau: f64,
}

/// Direction-independent parts of every rate, assembled once per model set
/// so a map sweep only evaluates quadratic forms.
#[derive(Debug, Clone)]
pub struct DecoherenceKernel {
    charge: Vec<ChargeTerm>,
    /// Summed relaxation tensor, prefactor included, s⁻¹.
    relaxation: Matrix3<f64>,
    /// Angle-free relaxation rate (constant-α option), s⁻¹.
    relaxation_offset: f64,
    /// Dephasing tensor of white-noise sources, s⁻¹.
    white: Matrix3<f64>,
    /// Isotropic dephasing rate, s⁻¹.
    isotropic: f64,
}

impl DecoherenceKernel {
    pub fn new(models: &[NoiseModel], device: &DeviceParams, opts: EwjnOptions) -> Result<Self> {
        let pref1 = relaxation_prefactor(device);
        let pref2 = dephasing_prefactor(device);
        let mut k = DecoherenceKernel {
            charge: Vec::new(),
            relaxation: Matrix3::zeros(),
            relaxation_offset: 0.0,
            white: Matrix3::zeros(),
            isotropic: 0.0,
        };
        for model in models {
            model.validate()?;
            match model {
                NoiseModel::Hyperfine { rate } => k.isotropic += rate,
                NoiseModel::Ewjn => {
                    let eff = ewjn_effective_tensor(device)?;
                    k.white += eff.entries * (pref2 * ewjn_white_factor(device));
                    if opts.constant_alpha {
                        let e = ewjn_electric_tensor(device, device.omega_op)?;
                        k.relaxation += convert_electric(device, &e.entries) * pref1;
                        k.relaxation_offset += pref1 * ewjn_alpha(device);
                    } else {
                        k.relaxation += eff.entries * pref1;
                    }
                }
                _ => {
                    let tau = model.tau().expect("charge model");
                    let eff = convert_electric(device, &model.electric_weights(device)?);
                    k.relaxation += eff * (pref1 * lorentzian_spectrum(tau, device.omega_op));
                    k.charge.push(ChargeTerm { weight: eff * pref2, tau });
                }
            }
        }
        Ok(k)
    }

    pub fn has_charge_noise(&self) -> bool {
        !self.charge.is_empty()
    }

    pub fn t1(&self, dir: &FieldDirection) -> Lifetime {
        Lifetime::from_rate(self.relaxation_offset + transverse_weight(dir).contract(&self.relaxation))
    }

    /// White-noise and isotropic dephasing rates at `dir`.
    pub fn additive_rate(&self, dir: &FieldDirection) -> f64 {
        self.isotropic + quad(&self.white, &dir.unit_vector())
    }

    fn coefficients(&self, n: &Vector3<f64>) -> Vec<(f64, f64)> {
        self.charge.iter().map(|c| (quad(&c.weight, n), c.tau)).collect()
    }

    pub fn gamma(&self, t: f64, dir: &FieldDirection) -> Result<f64> {
        if t.is_nan() || t < 0.0 {
            return Err(Error::InvalidArgument(format!("time must be ≥ 0, got {t}")));
        }
        Ok(gamma_sum(&self.coefficients(&dir.unit_vector()), t))
    }

    pub fn charge_dephasing_time(&self, dir: &FieldDirection) -> Result<Lifetime> {
        solve_unit_exponent(&self.coefficients(&dir.unit_vector()))
    }

    pub fn t2(&self, dir: &FieldDirection) -> Result<Lifetime> {
        let tphi = self.charge_dephasing_time(dir)?;
        Ok(combine_t2(tphi, self.additive_rate(dir), None))
    }
}

fn quad(m: &Matrix3<f64>, n: &Vector3<f64>) -> f64 {
    (n.transpose() * m * n)[(0, 0)]
}

fn gamma_sum(coeffs: &[(f64, f64)], t: f64) -> f64 {
    coeffs.iter().map(|&(u, tau)| u * temporal_factor(tau, t)).sum()
}

/// Smallest t with Σ uₘ·tf(τₘ, t) = 1. Each term is nondecreasing, so
/// bracket by doubling and bisect.
fn solve_unit_exponent(coeffs: &[(f64, f64)]) -> Result<Lifetime> {
    let active: Vec<(f64, f64)> = coeffs.iter().copied().filter(|&(u, _)| u > 0.0).collect();
    if active.is_empty() {
        return Ok(Lifetime::NoDecay);
    }
    let f = |t: f64| gamma_sum(&active, t);
    let tau_min = active.iter().map(|&(_, tau)| tau).fold(f64::INFINITY, f64::min);
    let mut hi = tau_min / 100.0;
    let mut lo = 0.0;
    let mut steps = 0;
    while f(hi) >= 1.0 {
        hi *= 0.5;
        steps += 1;
        if steps > MAX_DOUBLINGS || hi == 0.0 {
            return Err(Error::SolverFailure("dephasing exponent exceeds 1 at t → 0".into()));
        }
    }
    steps = 0;
    while f(hi) < 1.0 {
        lo = hi;
        hi *= 2.0;
        steps += 1;
        if steps > MAX_DOUBLINGS || !hi.is_finite() {
            return Err(Error::SolverFailure(format!(
                "no bracket for Γ(t) = 1 after {MAX_DOUBLINGS} doublings"
            )));
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) < 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(Lifetime::Finite(0.5 * (lo + hi)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::device::{case_study, GradientMatrix};
    use crate::noise::DEFAULT_HYPERFINE_RATE;
    use crate::units;
    use proptest::prelude::*;

    const P0: f64 = 2.0e-29 * units::STATC_CM_PER_C_M;

    fn dir(theta: f64, phi: f64) -> FieldDirection {
        FieldDirection::new(theta, phi).unwrap()
    }

    fn ud(rho_v: f64, tau: f64) -> NoiseModel {
        NoiseModel::UniformDipole { rho_v, p0: P0, tau }
    }

    #[test]
    fn zero_gradient_gives_zero_effective_tensor() {
        let dev = case_study().with_gradients(GradientMatrix::zero());
        let e = ewjn_electric_tensor(&dev, dev.omega_op).unwrap();
        assert_eq!(effective_from_electric(&e, &dev).unwrap().entries, Matrix3::zeros());
    }

    #[test]
    fn single_component_expansion() {
        let dev = case_study();
        let e = CorrelationTensor {
            entries: Matrix3::from_diagonal(&Vector3::new(2.5, 0.0, 7.0)),
            kind: FieldKind::Electric,
            frequency: 1.0,
        };
        let eff = effective_from_electric(&e, &dev).unwrap().entries;
        let k = dev.spring_constant();
        let q = dev.charge;
        for i in 0..3 {
            for j in 0..3 {
                let hand = q * q / (4.0 * k * k) * dev.gradients.get(i, 0) * dev.gradients.get(j, 0) * 2.5;
                assert!((eff[(i, j)] - hand).abs() <= 1e-12 * hand.abs().max(1e-300));
            }
        }
    }

    #[test]
    fn isotropic_in_plane_off_diagonals() {
        let dev = case_study();
        let s = 3.0;
        let e = CorrelationTensor {
            entries: Matrix3::from_diagonal(&Vector3::new(s, s, 0.0)),
            kind: FieldKind::Electric,
            frequency: 1.0,
        };
        let eff = effective_from_electric(&e, &dev).unwrap().entries;
        let c = dev.charge / (2.0 * dev.spring_constant());
        let g = |i, m| dev.gradients.get(i, m);
        for (i, j) in [(0, 1), (0, 2), (1, 2)] {
            let hand = c * c * s * (g(i, 0) * g(j, 0) + g(i, 1) * g(j, 1));
            assert!((eff[(i, j)] / hand - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn magnetic_tensor_is_rejected_as_electric() {
        let dev = case_study();
        let b = ewjn_magnetic_tensor(&dev, dev.omega_op).unwrap();
        assert!(effective_from_electric(&b, &dev).is_err());
    }

    #[test]
    fn t1_along_z_sums_in_plane_components() {
        let dev = case_study();
        let eff = EffectiveTensor {
            entries: Matrix3::from_diagonal(&Vector3::new(2.0, 3.0, 5.0)),
            provenance: vec![],
            frequency: None,
        };
        let rate = t1_from_tensor(&eff, &dir(0.0, 0.0), &dev).rate();
        assert!((rate / (relaxation_prefactor(&dev) * 5.0) - 1.0).abs() < 1e-14);
        assert_eq!(t1_from_tensor(&EffectiveTensor::zero(None), &dir(1.0, 1.0), &dev), Lifetime::NoDecay);
    }

    #[test]
    fn ewjn_in_plane_isotropy_without_gradients() {
        let dev = case_study().with_gradients(GradientMatrix::zero());
        let t0 = ewjn_t1(&dev, &dir(PI / 2.0, 0.0), EwjnOptions::default()).unwrap().seconds();
        for k in 1..12 {
            let t = ewjn_t1(&dev, &dir(PI / 2.0, k as f64 * 0.5), EwjnOptions::default()).unwrap().seconds();
            assert!((t / t0 - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn ewjn_direct_term_angle_dependence() {
        let dev = case_study().with_gradients(GradientMatrix::zero());
        let pole = ewjn_t1_rate(&dev, &dir(0.0, 0.0), EwjnOptions::default()).unwrap();
        let eq = ewjn_t1_rate(&dev, &dir(PI / 2.0, 0.0), EwjnOptions::default()).unwrap();
        assert!((eq / pole - 1.5).abs() < 1e-12);
        let opts = EwjnOptions { constant_alpha: true };
        let a = ewjn_t1_rate(&dev, &dir(0.0, 0.0), opts).unwrap();
        let b = ewjn_t1_rate(&dev, &dir(1.1, 2.0), opts).unwrap();
        assert_eq!(a, b);
        assert!((a / pole - 2.0).abs() < 1e-12);
    }

    #[test]
    fn ewjn_sigma_two_term_form() {
        // rate(σ) = Aσ + B/σ: two samples fix A and B, a third must agree.
        let dev = case_study();
        let d = dir(0.7, 1.9);
        let rate = |s: f64| ewjn_t1_rate(&dev.with_conductivity(s), &d, EwjnOptions::default()).unwrap();
        let (s1, s2) = (1e14, 1e17);
        let (r1, r2) = (rate(s1), rate(s2));
        let a = (r2 * s2 - r1 * s1) / (s2 * s2 - s1 * s1);
        let b = r1 * s1 - a * s1 * s1;
        for s in [3e14, 2e15, 5e16, 1.7e18] {
            assert!(((a * s + b / s) / rate(s) - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn ewjn_dephasing_scale_and_cold_limit() {
        let dev = case_study();
        let tphi = 1.0 / ewjn_dephasing_rate(&dev, &dir(PI / 2.0, 0.0)).unwrap();
        assert!(tphi > 1e-2 && tphi < 10.0, "{tphi}");
        assert!(tphi / 840e-9 > 1e5);
        let mut cold = dev.clone();
        cold.temperature = 1e-6;
        assert!(ewjn_dephasing_rate(&cold, &dir(PI / 2.0, 0.0)).unwrap() < 1e-3 / tphi);
    }

    #[test]
    fn gamma_basic_properties() {
        let dev = case_study();
        let m = [ud(1e13, 1e-6)];
        let d = dir(PI / 2.0, 0.0);
        assert_eq!(gamma(0.0, &d, &m, &dev).unwrap(), 0.0);
        assert!(gamma(-1.0, &d, &m, &dev).is_err());
        assert!(gamma(1.0, &d, &[NoiseModel::Ewjn], &dev).is_err());
    }

    #[test]
    fn gamma_symmetric_under_gradient_axis_swap_for_ud() {
        let dev = case_study();
        let mut g = [[0.0; 2]; 3];
        for (i, row) in g.iter_mut().enumerate() {
            *row = [dev.gradients.get(i, 1), dev.gradients.get(i, 0)];
        }
        let swapped = dev.with_gradients(GradientMatrix::from_gauss_per_cm(g));
        let m = [ud(1e13, 1e-6)];
        let d = dir(1.2, 4.0);
        let a = gamma(3e-7, &d, &m, &dev).unwrap();
        let b = gamma(3e-7, &d, &m, &swapped).unwrap();
        assert!((a / b - 1.0).abs() < 1e-12);
    }

    #[test]
    fn solver_hits_unit_exponent() {
        let dev = case_study();
        for tau in [1e-8, 1e-6, 1e-4, 1e-1] {
            let m = [ud(2e13, tau)];
            let d = dir(PI / 2.0, 0.0);
            let t = dephasing_time(&d, &m, &dev).unwrap().seconds();
            let g = gamma(t, &d, &m, &dev).unwrap();
            assert!((g - 1.0).abs() < 1e-9, "tau={tau} g={g}");
        }
    }

    #[test]
    fn no_noise_means_no_decay() {
        let dev = case_study().with_gradients(GradientMatrix::zero());
        let d = dir(0.3, 0.3);
        assert_eq!(dephasing_time(&d, &[ud(1e13, 1e-6)], &dev).unwrap(), Lifetime::NoDecay);
        assert_eq!(dephasing_time(&d, &[], &dev).unwrap(), Lifetime::NoDecay);
        assert_eq!(charge_t1(&d, &ud(1e13, 1e-6), &dev).unwrap(), Lifetime::NoDecay);
    }

    #[test]
    fn motional_narrowing_limit() {
        let dev = case_study();
        let tau = 1e-9;
        let m = [ud(1e15, tau)];
        let d = dir(PI / 2.0, 0.0);
        let kernel = DecoherenceKernel::new(&m, &dev, EwjnOptions::default()).unwrap();
        let u = kernel.coefficients(&d.unit_vector())[0].0;
        let t = dephasing_time(&d, &m, &dev).unwrap().seconds();
        assert!(t / tau > 100.0);
        assert!((t * u * 2.0 * PI * tau - 1.0).abs() < 0.01);
    }

    #[test]
    fn density_rescale_keeps_unit_exponent() {
        let dev = case_study();
        let d = dir(1.0, 2.0);
        let m = ud(1e13, 1e-6);
        let t1 = dephasing_time(&d, std::slice::from_ref(&m), &dev).unwrap().seconds();
        let t2 = dephasing_time(&d, &[m.scaled(4.0)], &dev).unwrap().seconds();
        assert!(t2 < t1);
        assert!((gamma(t2, &d, &[m.scaled(4.0)], &dev).unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn combine_rates() {
        let t = combine_t2(Lifetime::NoDecay, DEFAULT_HYPERFINE_RATE, None).seconds();
        assert!((t / 2.01e-6 - 1.0).abs() < 1e-12);
        let tphi = Lifetime::Finite(1.0 / (1.0 / 840e-9 - DEFAULT_HYPERFINE_RATE));
        let t = combine_t2(tphi, DEFAULT_HYPERFINE_RATE, None).seconds();
        assert!((t / 840e-9 - 1.0).abs() < 1e-12);
        let with_t1 = combine_t2(tphi, DEFAULT_HYPERFINE_RATE, Some(Lifetime::Finite(1.0))).seconds();
        assert!((with_t1 / t - 1.0).abs() < 1e-6);
        assert_eq!(combine_t2(Lifetime::NoDecay, 0.0, None), Lifetime::NoDecay);
    }

    #[test]
    fn zero_gradients_give_infinite_charge_t1() {
        let dev = case_study().with_gradients(GradientMatrix::zero());
        assert_eq!(charge_t1(&dir(PI / 2.0, 0.0), &ud(1e13, 1e-6), &dev).unwrap(), Lifetime::NoDecay);
    }

    #[test]
    fn kernel_matches_free_functions() {
        let dev = case_study();
        let models = vec![
            ud(2e13, 1e-6),
            NoiseModel::Ewjn,
            NoiseModel::Hyperfine { rate: DEFAULT_HYPERFINE_RATE },
        ];
        let k = DecoherenceKernel::new(&models, &dev, EwjnOptions::default()).unwrap();
        let d = dir(0.9, 5.0);
        let t1 = 1.0 / (charge_t1(&d, &models[0], &dev).unwrap().rate()
            + ewjn_t1_rate(&dev, &d, EwjnOptions::default()).unwrap());
        assert!((k.t1(&d).seconds() / t1 - 1.0).abs() < 1e-12);
        let tphi = dephasing_time(&d, &models[..1], &dev).unwrap();
        let t2 = combine_t2(tphi, DEFAULT_HYPERFINE_RATE + ewjn_dephasing_rate(&dev, &d).unwrap(), None);
        assert!((k.t2(&d).unwrap().seconds() / t2.seconds() - 1.0).abs() < 1e-12);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn antipodal_symmetry(theta in 0.0..PI, phi in 0.0..2.0 * PI, cx in -60.0..60.0f64, cy in -60.0..60.0f64) {
            let dev = case_study();
            let models = vec![
                ud(2e13, 1e-6),
                NoiseModel::ClusterTrap {
                    position: Vector3::new(units::nm_to_cm(cx), units::nm_to_cm(cy), units::nm_to_cm(137.0)),
                    p0: P0,
                    tau: 3e-6,
                },
                NoiseModel::Ewjn,
                NoiseModel::Hyperfine { rate: DEFAULT_HYPERFINE_RATE },
            ];
            let k = DecoherenceKernel::new(&models, &dev, EwjnOptions::default()).unwrap();
            let d = dir(theta, phi);
            let a = d.antipode();
            let (t2a, t2b) = (k.t2(&d).unwrap().seconds(), k.t2(&a).unwrap().seconds());
            prop_assert!((t2a / t2b - 1.0).abs() < 1e-9);
            let (t1a, t1b) = (k.t1(&d).seconds(), k.t1(&a).seconds());
            prop_assert!((t1a / t1b - 1.0).abs() < 1e-9);
        }

        #[test]
        fn gamma_monotone(theta in 0.0..PI, phi in 0.0..2.0 * PI, t1 in 1e-9..1e-3f64, f in 1.0..100.0f64) {
            let dev = case_study();
            let models = [ud(2e13, 1e-6), NoiseModel::ClusterDipole {
                position: Vector3::new(3.7e-6, 0.0, 3.7e-6), p0: P0, tau: 1e-5 }];
            let d = dir(theta, phi);
            prop_assert!(gamma(t1 * f, &d, &models, &dev).unwrap() >= gamma(t1, &d, &models, &dev).unwrap());
        }

        #[test]
        fn isotropic_tensor_is_direction_independent(theta in 0.0..PI, phi in 0.0..2.0 * PI, lam in 1e-10..1e3f64) {
            let dev = case_study();
            let eff = EffectiveTensor { entries: Matrix3::identity() * lam, provenance: vec![], frequency: None };
            let a = t1_from_tensor(&eff, &dir(theta, phi), &dev).seconds();
            let b = t1_from_tensor(&eff, &dir(0.0, 0.0), &dev).seconds();
            prop_assert!((a / b - 1.0).abs() < 1e-10);
        }

        #[test]
        fn gaussian_then_linear_regimes(tau in 1e-8..1e-4f64) {
            let dev = case_study();
            let d = dir(PI / 2.0, 0.0);
            let m = [ud(1e13, tau)];
            let g = |t: f64| gamma(t, &d, &m, &dev).unwrap();
            let short = g(2e-4 * tau) / g(1e-4 * tau);
            prop_assert!((short / 4.0 - 1.0).abs() < 0.01);
            let long = g(2e4 * tau) / g(1e4 * tau);
            prop_assert!((long / 2.0 - 1.0).abs() < 0.01);
        }

        #[test]
        fn effective_tensor_psd(theta in 0.0..PI, phi in 0.0..2.0 * PI) {
            let dev = case_study();
            let eff = ewjn_effective_tensor(&dev).unwrap();
            prop_assert!(eff.is_symmetric(1e-14));
            prop_assert!(eff.is_positive_semidefinite(1e-10));
            prop_assert!(ewjn_t1(&dev, &dir(theta, phi), EwjnOptions::default()).unwrap().seconds() > 0.0);
        }
    }
}
