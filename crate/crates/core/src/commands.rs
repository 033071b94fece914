//! Subcommand implementations behind the `spin-aniso` binary.
//!
//! Every command takes a resolved [`RunConfig`]: a JSON run file, if given,
//! supplies defaults and explicit command-line values override it.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::census::{census, euler_check, extremal_ratio, CensusOptions};
use crate::coherence::EwjnOptions;
use crate::device::{case_study, check_near_field_regime, load_config_file, DeviceParams};
use crate::error::{Error, Result};
use crate::map::{calibrate_models, AnisotropyMap, CalibrationRecord, Quantity, Reference, Resolution};
use crate::noise::{ModelSpec, DEFAULT_TAU_S};
use crate::reproduce;
use crate::scenarios::{build_map, with_default_tau};
use crate::units;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
    Ppm,
}

impl std::str::FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            "ppm" => Ok(Format::Ppm),
            other => Err(Error::InvalidArgument(format!("unknown format {other:?}; use csv, json or ppm"))),
        }
    }
}

pub fn parse_formats(list: &str) -> Result<Vec<Format>> {
    let mut out: Vec<Format> = Vec::new();
    for f in list.split(',').filter(|s| !s.trim().is_empty()) {
        let f = f.parse()?;
        if !out.contains(&f) {
            out.push(f);
        }
    }
    if out.is_empty() {
        return Err(Error::InvalidArgument("no output format given".into()));
    }
    Ok(out)
}

/// Models inline or as a path to a JSON array.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ModelsEntry {
    Path(PathBuf),
    Inline(Vec<ModelSpec>),
}

/// On-disk run file. Relative paths resolve against the file's directory.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunFile {
    pub device: Option<PathBuf>,
    pub models: Option<ModelsEntry>,
    pub quantity: Option<Quantity>,
    pub resolution: Option<String>,
    pub reference: Option<Reference>,
    pub hyperfine_rate_per_s: Option<f64>,
    pub out: Option<PathBuf>,
    pub format: Option<Vec<Format>>,
    pub tau_s: Option<f64>,
    #[serde(rename = "sigma_S_per_m")]
    pub sigma_s_per_m: Option<f64>,
    pub constant_alpha: Option<bool>,
}

/// Command-line values; `None` defers to the run file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub config: Option<PathBuf>,
    pub device: Option<PathBuf>,
    pub models: Option<PathBuf>,
    pub quantity: Option<Quantity>,
    pub resolution: Option<Resolution>,
    pub out: Option<PathBuf>,
    pub formats: Option<Vec<Format>>,
    pub tau: Option<f64>,
    pub sigma: Option<f64>,
    pub reference_t2: Option<f64>,
    pub hyperfine_rate: Option<f64>,
    pub constant_alpha: bool,
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub device: DeviceParams,
    /// Where the device came from, for reports.
    pub device_source: String,
    pub models: Vec<ModelSpec>,
    pub quantity: Quantity,
    pub resolution: Resolution,
    pub reference: Reference,
    pub out: PathBuf,
    pub formats: Vec<Format>,
    pub tau: f64,
    pub ewjn: EwjnOptions,
}

fn resolve(base: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

pub fn load_models_file(path: &Path) -> Result<Vec<ModelSpec>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config { key: "models".into(), reason: format!("{}: {e}", path.display()) })?;
    let models: Vec<ModelSpec> = serde_json::from_str(&text)
        .map_err(|e| Error::Config { key: "models".into(), reason: format!("{}: {e}", path.display()) })?;
    Ok(models)
}

impl RunConfig {
    pub fn resolve(o: &Overrides) -> Result<Self> {
        let (file, base) = match &o.config {
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| Error::Config { key: "config".into(), reason: format!("{}: {e}", p.display()) })?;
                let file: RunFile = serde_json::from_str(&text)
                    .map_err(|e| Error::Config { key: "config".into(), reason: e.to_string() })?;
                (file, p.parent().map(Path::to_path_buf).unwrap_or_default())
            }
            None => (RunFile::default(), PathBuf::new()),
        };

        let device_path = o.device.clone().or_else(|| file.device.as_ref().map(|p| resolve(&base, p)));
        let (mut device, mut device_source) = match &device_path {
            Some(p) => (load_config_file(p)?, p.display().to_string()),
            None => (case_study(), "bundled case study".to_string()),
        };
        let sigma = o.sigma.or(file.sigma_s_per_m);
        if let Some(s) = sigma {
            if !(s.is_finite() && s > 0.0) {
                return Err(Error::config("sigma_S_per_m", format!("must be > 0, got {s}")));
            }
            device = device.with_conductivity(units::conductivity_from_si(s));
            device_source.push_str(&format!(" with sigma = {s:e} S/m"));
        }

        let mut models = match (&o.models, &file.models) {
            (Some(p), _) => load_models_file(p)?,
            (None, Some(ModelsEntry::Path(p))) => load_models_file(&resolve(&base, p))?,
            (None, Some(ModelsEntry::Inline(v))) => v.clone(),
            (None, None) => Vec::new(),
        };
        if let Some(rate) = o.hyperfine_rate.or(file.hyperfine_rate_per_s) {
            if !(rate.is_finite() && rate >= 0.0) {
                return Err(Error::config("hyperfine_rate_per_s", format!("must be ≥ 0, got {rate}")));
            }
            models.retain(|m| !matches!(m, ModelSpec::Hyperfine { .. }));
            models.push(ModelSpec::Hyperfine { rate_per_s: Some(rate) });
        }
        if models.is_empty() {
            return Err(Error::config("models", "at least one noise model is required"));
        }

        let tau = o.tau.or(file.tau_s).unwrap_or(DEFAULT_TAU_S);
        if !(tau.is_finite() && tau > 0.0) {
            return Err(Error::config("tau_s", format!("must be > 0, got {tau}")));
        }
        let resolution = match (o.resolution, &file.resolution) {
            (Some(r), _) => r,
            (None, Some(s)) => s.parse().map_err(|e: Error| Error::config("resolution", e.to_string()))?,
            (None, None) => Resolution::default(),
        };
        let mut reference = file.reference.unwrap_or_default();
        if let Some(t2) = o.reference_t2 {
            reference.t2_s = t2;
        }
        let out = o.out.clone().or_else(|| file.out.as_ref().map(|p| resolve(&base, p))).unwrap_or_else(|| PathBuf::from("."));
        let formats = o.formats.clone().or(file.format).unwrap_or_else(|| vec![Format::Csv]);
        let ewjn = EwjnOptions { constant_alpha: o.constant_alpha || file.constant_alpha.unwrap_or(false) };

        Ok(RunConfig {
            device,
            device_source,
            models: with_default_tau(&models, tau),
            quantity: o.quantity.or(file.quantity).unwrap_or(Quantity::T2),
            resolution,
            reference,
            out,
            formats,
            tau,
            ewjn,
        })
    }

    fn warn_regime(&self) {
        let r = check_near_field_regime(&self.device);
        if r.warn {
            log::warn!(
                "gate distance {:.1} nm is {:.2} of the skin depth {:.1} nm; the half-space EWJN formulas assume d << delta",
                units::cm_to_nm(r.distance),
                r.ratio,
                units::cm_to_nm(r.skin_depth)
            );
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CalibrationReport {
    pub device: String,
    pub device_hash: String,
    pub records: Vec<CalibrationRecord>,
}

pub fn cmd_calibrate(run: &RunConfig) -> Result<String> {
    run.warn_regime();
    let models = run.models.iter().map(ModelSpec::to_model).collect::<Result<Vec<_>>>()?;
    let needs: Vec<bool> = run.models.iter().map(ModelSpec::needs_calibration).collect();
    let (_, records) = calibrate_models(&models, &needs, &run.device, &run.reference, run.ewjn)?;

    let mut text = String::new();
    writeln!(text, "device: {} ({})", run.device_source, &run.device.fingerprint()[..12]).unwrap();
    writeln!(
        text,
        "reference: T2 = {:e} s at theta = {:.4} rad, phi = {:.4} rad",
        run.reference.t2_s, run.reference.theta_rad, run.reference.phi_rad
    )
    .unwrap();
    if records.is_empty() {
        writeln!(text, "all models carry a strength; nothing to calibrate").unwrap();
    }
    for r in &records {
        writeln!(text, "model {}: {} = {:.6e} (tau = {:e} s)", r.model, r.parameter, r.value, r.tau_s).unwrap();
        writeln!(text, "  charge-only T_phi = {:.6e} s", r.charge_tphi_s).unwrap();
        writeln!(text, "  hyperfine and white-noise share = {:.6e} s^-1", r.additive_rate_per_s).unwrap();
        writeln!(text, "  reference check: T2 = {:.6e} s", r.achieved_t2_s).unwrap();
    }
    let report = CalibrationReport {
        device: run.device_source.clone(),
        device_hash: run.device.fingerprint(),
        records,
    };
    std::fs::create_dir_all(&run.out)?;
    std::fs::write(
        run.out.join("calibration.json"),
        serde_json::to_string_pretty(&report).expect("report serializes"),
    )?;
    Ok(text)
}

/// Write `map` in every requested format under `out`, named `stem.ext`.
pub fn write_map(map: &AnisotropyMap, out: &Path, stem: &str, formats: &[Format]) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(out)?;
    let mut written = Vec::new();
    for f in formats {
        let (path, bytes) = match f {
            Format::Csv => (out.join(format!("{stem}.csv")), map.to_csv().into_bytes()),
            Format::Json => (out.join(format!("{stem}.json")), map.to_json().into_bytes()),
            Format::Ppm => (out.join(format!("{stem}.ppm")), map.to_ppm()),
        };
        std::fs::write(&path, bytes)?;
        written.push(path);
    }
    Ok(written)
}

pub fn cmd_map(run: &RunConfig) -> Result<String> {
    run.warn_regime();
    let map = build_map(run.quantity, &run.models, &run.device, &run.reference, run.resolution, run.ewjn)?;
    let c = map.metadata.census.as_ref().expect("census attached");
    if c.degenerate {
        log::warn!("map census is degenerate; the Morse relation does not apply");
    }
    let stem = format!("{}_map", run.quantity);
    let written = write_map(&map, &run.out, &stem, &run.formats)?;
    let mut text = String::new();
    writeln!(text, "{} map {} from {}", run.quantity, run.resolution, run.device_source).unwrap();
    for r in &map.metadata.calibration {
        writeln!(text, "calibrated {}: {} = {:.6e}", r.model, r.parameter, r.value).unwrap();
    }
    writeln!(text, "{}", census_text(c)).unwrap();
    for p in written {
        writeln!(text, "wrote {}", p.display()).unwrap();
    }
    Ok(text)
}

fn census_text(c: &crate::census::CriticalPointCensus) -> String {
    let euler = if c.degenerate {
        "not applicable"
    } else if euler_check(c) {
        "pass"
    } else {
        "fail"
    };
    format!(
        "N_max = {}, N_min = {}, N_s = {}, degenerate = {}, Euler relation: {}",
        c.n_max, c.n_min, c.n_saddle, c.degenerate, euler
    )
}

pub fn cmd_critical_points(path: &Path) -> Result<String> {
    let map = AnisotropyMap::read_file(path)?;
    let c = census(&map, &CensusOptions::default());
    if c.degenerate {
        log::warn!("{}: degenerate census ({} flagged cells)", path.display(), c.flagged.len());
    }
    let mut text = census_text(&c);
    if let Ok(r) = extremal_ratio(&map) {
        write!(text, "\nmax/min = {r:.6}").unwrap();
    }
    Ok(text)
}

pub fn cmd_validate_config(run: &RunConfig) -> Result<String> {
    run.device.validate()?;
    let mut text = String::new();
    let r = check_near_field_regime(&run.device);
    writeln!(text, "device: {} (sha256 {})", run.device_source, run.device.fingerprint()).unwrap();
    writeln!(
        text,
        "skin depth {:.1} nm, d/delta = {:.3}{}",
        units::cm_to_nm(r.skin_depth),
        r.ratio,
        if r.warn { " (outside the near-field regime)" } else { "" }
    )
    .unwrap();
    for m in &run.models {
        m.to_model()?;
        let tag = serde_json::to_value(m).expect("spec serializes")["type"].as_str().unwrap_or("?").to_string();
        writeln!(text, "model {tag}{}", if m.needs_calibration() { " (to be calibrated)" } else { "" }).unwrap();
    }
    let unknown = run.models.iter().filter(|m| m.needs_calibration()).count();
    if unknown > 1 {
        return Err(Error::config("models", format!("{unknown} models lack a strength; at most one can be calibrated")));
    }
    writeln!(text, "quantity {}, resolution {}, tau {:e} s", run.quantity, run.resolution, run.tau).unwrap();
    writeln!(text, "ok").unwrap();
    Ok(text)
}

/// Regenerate every case-study map and the summary table. Returns the
/// summary text and whether every check passed.
pub fn cmd_reproduce_paper(out: &Path, resolution: Resolution, tau: f64, formats: &[Format]) -> Result<(String, bool)> {
    let report = reproduce::run(resolution, tau)?;
    std::fs::create_dir_all(out)?;
    for (name, map) in &report.maps {
        write_map(map, out, name, formats)?;
    }
    let md = report.to_markdown();
    std::fs::write(out.join("summary.md"), &md)?;
    std::fs::write(
        out.join("summary.json"),
        serde_json::to_string_pretty(&report).expect("report serializes"),
    )?;
    Ok((md, report.all_pass()))
}
