//! Calibration against a reference measurement, (θ, φ) sweeps, and map
//! import/export.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::census::CriticalPointCensus;
use crate::coherence::{combine_t2, DecoherenceKernel, EwjnOptions, Lifetime};
use crate::device::DeviceParams;
use crate::error::{Error, Result};
use crate::geometry::FieldDirection;
use crate::noise::{ModelSpec, NoiseModel};

/// Measured T2 along the field direction of the reference experiment.
pub const REFERENCE_T2_S: f64 = 840e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Quantity {
    T1,
    T2,
}

impl FromStr for Quantity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "t1" => Ok(Quantity::T1),
            "t2" => Ok(Quantity::T2),
            other => Err(Error::InvalidArgument(format!("quantity must be t1 or t2, got {other:?}"))),
        }
    }
}

impl std::fmt::Display for Quantity {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Quantity::T1 => "t1",
            Quantity::T2 => "t2",
        })
    }
}

/// Grid size: `n_theta` rows spanning [0, π] inclusive, `n_phi` columns
/// spanning [0, 2π) periodic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Resolution {
    pub n_theta: usize,
    pub n_phi: usize,
}

impl Resolution {
    pub const DEFAULT: Resolution = Resolution { n_theta: 181, n_phi: 360 };
    pub const LOW: Resolution = Resolution { n_theta: 91, n_phi: 180 };

    pub fn new(n_theta: usize, n_phi: usize) -> Result<Self> {
        if n_theta < 5 || n_phi < 8 {
            return Err(Error::InvalidArgument(format!(
                "resolution needs n_theta ≥ 5 and n_phi ≥ 8, got {n_theta}x{n_phi}"
            )));
        }
        Ok(Self { n_theta, n_phi })
    }

    pub fn theta_grid(&self) -> Vec<f64> {
        let last = (self.n_theta - 1) as f64;
        (0..self.n_theta)
            .map(|i| if i + 1 == self.n_theta { PI } else { PI * i as f64 / last })
            .collect()
    }

    pub fn phi_grid(&self) -> Vec<f64> {
        (0..self.n_phi).map(|j| 2.0 * PI * j as f64 / self.n_phi as f64).collect()
    }
}

impl Default for Resolution {
    fn default() -> Self {
        Self::DEFAULT
    }
}

impl FromStr for Resolution {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidArgument(format!("resolution must look like 91x180, got {s:?}"));
        let (a, b) = s.split_once(['x', 'X']).ok_or_else(bad)?;
        let n_theta = a.trim().parse().map_err(|_| bad())?;
        let n_phi = b.trim().parse().map_err(|_| bad())?;
        Resolution::new(n_theta, n_phi)
    }
}

impl std::fmt::Display for Resolution {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}x{}", self.n_theta, self.n_phi)
    }
}

/// Reference measurement used to fix an unknown noise strength.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Reference {
    pub theta_rad: f64,
    pub phi_rad: f64,
    #[serde(rename = "T2_s")]
    pub t2_s: f64,
}

impl Reference {
    pub fn direction(&self) -> Result<FieldDirection> {
        FieldDirection::new(self.theta_rad, self.phi_rad)
    }
}

impl Default for Reference {
    fn default() -> Self {
        Self {
            theta_rad: PI / 2.0,
            phi_rad: 0.0,
            t2_s: REFERENCE_T2_S,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationRecord {
    pub model: String,
    /// Name of the fitted parameter, lab units.
    pub parameter: String,
    pub value: f64,
    pub tau_s: f64,
    pub reference: Reference,
    /// Charge-only Tφ the fitted model must produce at the reference.
    pub charge_tphi_s: f64,
    /// White-noise and hyperfine share of 1/T2 at the reference, s⁻¹.
    pub additive_rate_per_s: f64,
    /// T2 recomputed with the fitted model.
    pub achieved_t2_s: f64,
}

/// Fit the strength of `model` so T2 at the reference equals the target,
/// with only the isotropic `hyperfine_rate` as background.
pub fn calibrate(
    model: &NoiseModel,
    device: &DeviceParams,
    reference: &Reference,
    hyperfine_rate: f64,
) -> Result<(NoiseModel, CalibrationRecord)> {
    let background = [NoiseModel::Hyperfine { rate: hyperfine_rate }];
    calibrate_with_background(model, &background, device, reference, EwjnOptions::default())
}

/// Fit the strength of `model` with the already-fixed `background` models
/// also acting on the qubit. Γ is linear in strength, so one evaluation at
/// the target charge Tφ determines the scale.
pub fn calibrate_with_background(
    model: &NoiseModel,
    background: &[NoiseModel],
    device: &DeviceParams,
    reference: &Reference,
    opts: EwjnOptions,
) -> Result<(NoiseModel, CalibrationRecord)> {
    let tau = model
        .tau()
        .ok_or_else(|| Error::InvalidArgument(format!("{} has no strength to calibrate", model.name())))?;
    if !(reference.t2_s.is_finite() && reference.t2_s > 0.0) {
        return Err(Error::InvalidArgument(format!("target T2 must be > 0, got {}", reference.t2_s)));
    }
    let dir = reference.direction()?;
    let bg = DecoherenceKernel::new(background, device, opts)?;
    let additive = bg.additive_rate(&dir);
    let charge_rate = 1.0 / reference.t2_s - additive;
    if charge_rate <= 0.0 {
        return Err(Error::InfeasibleCalibration(format!(
            "background dephasing {additive:e} s⁻¹ already meets or exceeds the target rate {:e} s⁻¹",
            1.0 / reference.t2_s
        )));
    }
    let target = 1.0 / charge_rate;
    let gamma_bg = bg.gamma(target, &dir)?;
    if gamma_bg >= 1.0 {
        return Err(Error::InfeasibleCalibration(format!(
            "background charge noise alone reaches Γ = {gamma_bg} at the target Tφ"
        )));
    }
    let unit = DecoherenceKernel::new(std::slice::from_ref(model), device, opts)?;
    let gamma_unit = unit.gamma(target, &dir)?;
    if gamma_unit <= 0.0 {
        return Err(Error::InfeasibleCalibration(format!(
            "{} does not dephase the qubit along the reference direction",
            model.name()
        )));
    }
    let fitted = model.scaled((1.0 - gamma_bg) / gamma_unit);

    let mut all = background.to_vec();
    all.push(fitted.clone());
    let achieved = DecoherenceKernel::new(&all, device, opts)?.t2(&dir)?.seconds();
    let (parameter, value) = fitted.fit_parameter().expect("charge model");
    let record = CalibrationRecord {
        model: fitted.name().to_string(),
        parameter: parameter.to_string(),
        value,
        tau_s: tau,
        reference: *reference,
        charge_tphi_s: target,
        additive_rate_per_s: additive,
        achieved_t2_s: achieved,
    };
    Ok((fitted, record))
}

/// Calibrate every model flagged in `needs_fit` against the reference. At
/// most one charge model may be unknown, since one measurement fixes one
/// strength.
pub fn calibrate_models(
    models: &[NoiseModel],
    needs_fit: &[bool],
    device: &DeviceParams,
    reference: &Reference,
    opts: EwjnOptions,
) -> Result<(Vec<NoiseModel>, Vec<CalibrationRecord>)> {
    let unknown: Vec<usize> = (0..models.len()).filter(|&i| needs_fit[i]).collect();
    match unknown.as_slice() {
        [] => Ok((models.to_vec(), Vec::new())),
        [k] => {
            let background: Vec<NoiseModel> =
                models.iter().enumerate().filter(|&(i, _)| i != *k).map(|(_, m)| m.clone()).collect();
            let (fitted, record) = calibrate_with_background(&models[*k], &background, device, reference, opts)?;
            let mut out = models.to_vec();
            out[*k] = fitted;
            Ok((out, vec![record]))
        }
        _ => Err(Error::InfeasibleCalibration(format!(
            "{} models lack a strength but one reference measurement fixes only one",
            unknown.len()
        ))),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapMetadata {
    pub device_hash: String,
    pub models: Vec<ModelSpec>,
    pub tau_s: Vec<f64>,
    #[serde(default)]
    pub calibration: Vec<CalibrationRecord>,
    #[serde(default)]
    pub ewjn: EwjnOptions,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub census: Option<CriticalPointCensus>,
}

impl MapMetadata {
    fn empty() -> Self {
        Self {
            device_hash: String::new(),
            models: Vec::new(),
            tau_s: Vec::new(),
            calibration: Vec::new(),
            ewjn: EwjnOptions::default(),
            census: None,
        }
    }
}

/// T1 or T2 over the sphere, θ-major. `f64::INFINITY` marks no decay.
#[derive(Debug, Clone, PartialEq)]
pub struct AnisotropyMap {
    pub quantity: Quantity,
    pub theta: Vec<f64>,
    pub phi: Vec<f64>,
    pub values: Vec<f64>,
    pub metadata: MapMetadata,
}

/// Evaluate `quantity` on every grid direction. Pole rows are computed once
/// and broadcast.
pub fn sweep(
    quantity: Quantity,
    models: &[NoiseModel],
    device: &DeviceParams,
    resolution: Resolution,
    opts: EwjnOptions,
) -> Result<AnisotropyMap> {
    if models.is_empty() {
        return Err(Error::InvalidArgument("at least one noise model is required".into()));
    }
    device.validate()?;
    let kernel = DecoherenceKernel::new(models, device, opts)?;
    let theta = resolution.theta_grid();
    let phi = resolution.phi_grid();
    let eval = |t: f64, p: f64| -> Result<f64> {
        let dir = FieldDirection::new(t, p)?;
        let value = match quantity {
            Quantity::T1 => kernel.t1(&dir),
            Quantity::T2 => kernel.t2(&dir)?,
        };
        Ok(value.seconds())
    };
    let rows: Vec<Vec<f64>> = theta
        .par_iter()
        .enumerate()
        .map(|(i, &t)| -> Result<Vec<f64>> {
            let wrap = |p: f64, e: Error| Error::GridPoint { theta: t, phi: p, source: Box::new(e) };
            if i == 0 || i + 1 == theta.len() {
                let v = eval(t, 0.0).map_err(|e| wrap(0.0, e))?;
                return Ok(vec![v; phi.len()]);
            }
            phi.iter().map(|&p| eval(t, p).map_err(|e| wrap(p, e))).collect()
        })
        .collect::<Result<_>>()?;

    let metadata = MapMetadata {
        device_hash: device.fingerprint(),
        models: models.iter().map(ModelSpec::from_model).collect(),
        tau_s: models.iter().filter_map(NoiseModel::tau).collect(),
        calibration: Vec::new(),
        ewjn: opts,
        census: None,
    };
    Ok(AnisotropyMap {
        quantity,
        theta,
        phi,
        values: rows.concat(),
        metadata,
    })
}

/// T2 at one direction with the same rate combination the sweep uses.
pub fn t2_at(models: &[NoiseModel], device: &DeviceParams, dir: &FieldDirection, opts: EwjnOptions) -> Result<Lifetime> {
    let kernel = DecoherenceKernel::new(models, device, opts)?;
    let tphi = kernel.charge_dephasing_time(dir)?;
    Ok(combine_t2(tphi, kernel.additive_rate(dir), None))
}

#[derive(Serialize, Deserialize)]
struct MapDocument {
    quantity: Quantity,
    theta_rad: Vec<f64>,
    phi_rad: Vec<f64>,
    /// Rows over θ; `null` marks no decay.
    values_s: Vec<Vec<Option<f64>>>,
    #[serde(default = "MapMetadata::empty")]
    metadata: MapMetadata,
}

impl AnisotropyMap {
    pub fn n_theta(&self) -> usize {
        self.theta.len()
    }

    pub fn n_phi(&self) -> usize {
        self.phi.len()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.phi.len() + j]
    }

    pub fn resolution(&self) -> Resolution {
        Resolution { n_theta: self.n_theta(), n_phi: self.n_phi() }
    }

    fn check_shape(&self) -> Result<()> {
        if self.theta.len() < 3 || self.phi.len() < 3 || self.values.len() != self.theta.len() * self.phi.len() {
            return Err(Error::Parse(format!(
                "map has {} values for a {}x{} grid",
                self.values.len(),
                self.theta.len(),
                self.phi.len()
            )));
        }
        if self.values.iter().any(|v| v.is_nan() || *v <= 0.0) {
            return Err(Error::Parse("map values must be positive or no-decay".into()));
        }
        Ok(())
    }

    /// Largest relative deviation between antipodal grid points, or `None`
    /// when the grid has no antipodal pairing (odd `n_phi`).
    pub fn antipodal_deviation(&self) -> Option<f64> {
        let (nt, np) = (self.n_theta(), self.n_phi());
        if np % 2 != 0 {
            return None;
        }
        let mut worst: f64 = 0.0;
        for i in 0..nt {
            for j in 0..np {
                let a = self.get(i, j);
                let b = self.get(nt - 1 - i, (j + np / 2) % np);
                if a.is_infinite() || b.is_infinite() {
                    if a != b {
                        return Some(f64::INFINITY);
                    }
                    continue;
                }
                worst = worst.max((a - b).abs() / a.abs().max(b.abs()));
            }
        }
        Some(worst)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(self.values.len() * 64);
        out.push_str("theta_rad,phi_rad,value_s\n");
        for (i, t) in self.theta.iter().enumerate() {
            for (j, p) in self.phi.iter().enumerate() {
                let v = self.get(i, j);
                if v.is_infinite() {
                    writeln!(out, "{t:e},{p:e},inf").unwrap();
                } else {
                    writeln!(out, "{t:e},{p:e},{v:e}").unwrap();
                }
            }
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines.next().ok_or_else(|| Error::Parse("empty map file".into()))?;
        if header.trim() != "theta_rad,phi_rad,value_s" {
            return Err(Error::Parse(format!("unexpected CSV header {header:?}")));
        }
        let mut theta: Vec<f64> = Vec::new();
        let mut phi: Vec<f64> = Vec::new();
        let mut values = Vec::new();
        for (n, line) in lines.enumerate() {
            let bad = || Error::Parse(format!("line {}: {line:?}", n + 2));
            let mut fields = line.split(',');
            let mut next = || -> Result<f64> { fields.next().ok_or_else(bad)?.trim().parse::<f64>().map_err(|_| bad()) };
            let (t, p, v) = (next()?, next()?, next()?);
            if theta.last() != Some(&t) {
                theta.push(t);
            }
            if theta.len() == 1 {
                phi.push(p);
            }
            values.push(v);
        }
        let map = AnisotropyMap {
            quantity: Quantity::T2,
            theta,
            phi,
            values,
            metadata: MapMetadata::empty(),
        };
        map.check_shape()?;
        Ok(map)
    }

    pub fn to_json(&self) -> String {
        let doc = MapDocument {
            quantity: self.quantity,
            theta_rad: self.theta.clone(),
            phi_rad: self.phi.clone(),
            values_s: self
                .values
                .chunks(self.n_phi())
                .map(|row| row.iter().map(|&v| v.is_finite().then_some(v)).collect())
                .collect(),
            metadata: self.metadata.clone(),
        };
        serde_json::to_string_pretty(&doc).expect("map serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: MapDocument = serde_json::from_str(text)?;
        if doc.values_s.iter().any(|r| r.len() != doc.phi_rad.len()) {
            return Err(Error::Parse("ragged value rows".into()));
        }
        let map = AnisotropyMap {
            quantity: doc.quantity,
            theta: doc.theta_rad,
            phi: doc.phi_rad,
            values: doc.values_s.into_iter().flatten().map(|v| v.unwrap_or(f64::INFINITY)).collect(),
            metadata: doc.metadata,
        };
        map.check_shape()?;
        Ok(map)
    }

    /// Read a CSV or JSON export, chosen by content.
    pub fn read_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        if text.trim_start().starts_with('{') {
            Self::from_json(&text)
        } else {
            Self::from_csv(&text)
        }
    }

    /// Binary grayscale PGM-style P5 image, one pixel per grid point, rows
    /// over θ. Linear from the finite minimum (black) to maximum (white);
    /// no-decay points are white.
    pub fn to_ppm(&self) -> Vec<u8> {
        let finite = self.values.iter().copied().filter(|v| v.is_finite());
        let lo = finite.clone().fold(f64::INFINITY, f64::min);
        let hi = finite.fold(f64::NEG_INFINITY, f64::max);
        let mut out = format!("P5\n{} {}\n255\n", self.n_phi(), self.n_theta()).into_bytes();
        out.extend(self.values.iter().map(|&v| {
            if !v.is_finite() {
                255
            } else if hi > lo {
                ((v - lo) / (hi - lo) * 255.0).round() as u8
            } else {
                0
            }
        }));
        out
    }
}
