//! End-to-end case-study checks: published anchors against computed values.

use std::f64::consts::PI;

use serde::Serialize;

use crate::census::{euler_check, extremal_ratio, global_argmin};
use crate::coherence::{charge_t1, ewjn_dephasing_rate};
use crate::device::{case_study, skin_depth, DeviceParams};
use crate::error::Result;
use crate::geometry::FieldDirection;
use crate::map::{calibrate, AnisotropyMap, Reference, Resolution};
use crate::noise::{hyperfine_rate_from_isotope_difference, NoiseModel, DEFAULT_HYPERFINE_RATE, DEFAULT_P0_C_M};
use crate::scenarios::{scenarios, ExpectedCensus};
use crate::units;

#[derive(Debug, Clone, Serialize)]
pub struct CheckRow {
    pub name: String,
    pub computed: String,
    pub expected: String,
    pub pass: bool,
}

impl CheckRow {
    fn new(name: impl Into<String>, computed: impl Into<String>, expected: impl Into<String>, pass: bool) -> Self {
        Self { name: name.into(), computed: computed.into(), expected: expected.into(), pass }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub resolution: Resolution,
    pub tau_s: f64,
    pub rows: Vec<CheckRow>,
    #[serde(skip)]
    pub maps: Vec<(String, AnisotropyMap)>,
}

impl Report {
    pub fn all_pass(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }

    pub fn to_markdown(&self) -> String {
        let mut s = format!(
            "# Case-study reproduction\n\nresolution {}, tau {:e} s\n\n| check | computed | expected | result |\n|---|---|---|---|\n",
            self.resolution, self.tau_s
        );
        for r in &self.rows {
            s.push_str(&format!(
                "| {} | {} | {} | {} |\n",
                r.name,
                r.computed,
                r.expected,
                if r.pass { "PASS" } else { "FAIL" }
            ));
        }
        s
    }
}

fn within(value: f64, target: f64, rel: f64) -> bool {
    ((value - target) / target).abs() <= rel
}

pub fn ud_model(tau: f64) -> NoiseModel {
    NoiseModel::UniformDipole { rho_v: 1.0, p0: units::dipole_from_si(DEFAULT_P0_C_M), tau }
}

pub fn ut_model(tau: f64) -> NoiseModel {
    NoiseModel::UniformTrap { rho_a: 1.0, p0: units::dipole_from_si(DEFAULT_P0_C_M), tau }
}

/// Fitted (ρᵥ, ρₐ) at the reference for switching time `tau`.
pub fn fitted_densities(device: &DeviceParams, tau: f64) -> Result<(f64, f64)> {
    let r = Reference::default();
    let (_, ud) = calibrate(&ud_model(tau), device, &r, DEFAULT_HYPERFINE_RATE)?;
    let (_, ut) = calibrate(&ut_model(tau), device, &r, DEFAULT_HYPERFINE_RATE)?;
    Ok((ud.value, ut.value))
}

/// Switching times spanning two decades for the T1 ratio check.
pub const T1_RATIO_TAUS: [f64; 3] = [1e-7, 1e-6, 1e-5];

#[derive(Debug, Clone, Copy, Serialize)]
pub struct DensityFit {
    pub tau_s: f64,
    pub rho_v: f64,
    pub rho_a: f64,
}

/// Fitted densities on a log grid of τ over [10 ns, 10 µs].
pub fn density_scan(device: &DeviceParams) -> Result<Vec<DensityFit>> {
    (0..=60)
        .map(|k| {
            let tau = 10f64.powf(-8.0 + 3.0 * k as f64 / 60.0);
            let (rho_v, rho_a) = fitted_densities(device, tau)?;
            Ok(DensityFit { tau_s: tau, rho_v, rho_a })
        })
        .collect()
}

/// The τ whose worse relative density error is smallest.
pub fn best_density_fit(scan: &[DensityFit]) -> DensityFit {
    let err = |f: &DensityFit| ((f.rho_v / 2.39e13 - 1.0).abs()).max((f.rho_a / 5.33e7 - 1.0).abs());
    *scan.iter().min_by(|a, b| err(a).total_cmp(&err(b))).expect("non-empty scan")
}

/// T1_UT / T1_UD at the reference direction, each model calibrated.
pub fn charge_t1_ratio(device: &DeviceParams, tau: f64) -> Result<f64> {
    let r = Reference::default();
    let dir = r.direction()?;
    let (ud, _) = calibrate(&ud_model(tau), device, &r, DEFAULT_HYPERFINE_RATE)?;
    let (ut, _) = calibrate(&ut_model(tau), device, &r, DEFAULT_HYPERFINE_RATE)?;
    Ok(charge_t1(&dir, &ut, device)?.seconds() / charge_t1(&dir, &ud, device)?.seconds())
}

/// Grid steps between two grid cells, with φ periodic and poles collapsing φ.
pub fn grid_distance(map: &AnisotropyMap, a: (usize, usize), b: (usize, usize)) -> usize {
    let np = map.n_phi();
    let di = a.0.abs_diff(b.0);
    let at_pole = |i: usize| i == 0 || i + 1 == map.n_theta();
    if at_pole(a.0) || at_pole(b.0) {
        return di;
    }
    let dj = a.1.abs_diff(b.1);
    di.max(dj.min(np - dj))
}

/// Nearest grid cell to (θ, φ).
pub fn nearest_cell(map: &AnisotropyMap, theta: f64, phi: f64) -> (usize, usize) {
    let dt = PI / (map.n_theta() - 1) as f64;
    let dp = 2.0 * PI / map.n_phi() as f64;
    let i = (theta / dt).round() as usize;
    let j = ((phi.rem_euclid(2.0 * PI) / dp).round() as usize) % map.n_phi();
    (i.min(map.n_theta() - 1), j)
}

pub fn argmin_near(map: &AnisotropyMap, targets: &[(f64, f64)], steps: usize) -> bool {
    global_argmin(map, 1e-12).iter().any(|&cell| {
        targets.iter().any(|&(t, p)| grid_distance(map, cell, nearest_cell(map, t, p)) <= steps)
    })
}

/// Run every check at `resolution` with charge-noise switching time `tau`.
pub fn run(resolution: Resolution, tau: f64) -> Result<Report> {
    let dev = case_study();
    let mut rows = Vec::new();

    let delta = units::cm_to_nm(skin_depth(dev.conductivity, dev.omega_op));
    rows.push(CheckRow::new("skin depth", format!("{delta:.1} nm"), "313 nm ± 1%", within(delta, 313.0, 0.01)));

    let x = FieldDirection::x_axis();
    let tphi = 1.0 / ewjn_dephasing_rate(&dev, &x)?;
    rows.push(CheckRow::new("EWJN T2 along x", format!("{tphi:.3} s"), "0.22 s ± 15%", within(tphi, 0.22, 0.15)));

    let hyper = 1.0 / hyperfine_rate_from_isotope_difference(1.83e-6, 20.4e-6);
    rows.push(CheckRow::new(
        "hyperfine (1.83 us)^-1 - (20.4 us)^-1",
        format!("({:.3} us)^-1", hyper * 1e6),
        "(2.01 us)^-1 ± 1%",
        within(hyper, 2.01e-6, 0.01),
    ));

    let scan = density_scan(&dev)?;
    let best = best_density_fit(&scan);
    rows.push(CheckRow::new(
        format!("fitted rho_v, best tau in [1e-8, 1e-5] s = {:.3e} s", best.tau_s),
        format!("{:.3e} cm^-3", best.rho_v),
        "2.39e13 cm^-3 ± 20%",
        within(best.rho_v, 2.39e13, 0.2),
    ));
    rows.push(CheckRow::new(
        format!("fitted rho_a, same tau = {:.3e} s", best.tau_s),
        format!("{:.3e} cm^-2", best.rho_a),
        "5.33e7 cm^-2 ± 20%",
        within(best.rho_a, 5.33e7, 0.2),
    ));

    let ratios: Vec<f64> = T1_RATIO_TAUS.iter().map(|&t| charge_t1_ratio(&dev, t)).collect::<Result<_>>()?;
    let spread = ratios.iter().fold(0.0f64, |m, r| m.max((r / ratios[0] - 1.0).abs()));
    rows.push(CheckRow::new(
        "T1_UT / T1_UD at (pi/2, 0), tau = 1e-7, 1e-6, 1e-5 s",
        ratios.iter().map(|r| format!("{r:.3}")).collect::<Vec<_>>().join(", "),
        "2.65 ± 15%, tau-independent",
        ratios.iter().all(|&r| within(r, 2.65, 0.15)) && spread < 1e-6,
    ));

    let mut maps = Vec::new();
    for s in scenarios() {
        let map = s.build(resolution, tau)?;
        let c = map.metadata.census.clone().expect("census attached");
        let expected = match s.expected {
            ExpectedCensus::Counts { n_max, n_min, n_saddle } => format!("({n_max}, {n_min}, {n_saddle})"),
            ExpectedCensus::Degenerate => "degenerate".into(),
        };
        let computed = format!(
            "({}, {}, {}){}",
            c.n_max,
            c.n_min,
            c.n_saddle,
            if c.degenerate { " degenerate" } else { "" }
        );
        rows.push(CheckRow::new(
            format!("census {} ({})", s.name, s.description),
            computed,
            expected,
            s.matches(&map) && euler_check(&c),
        ));
        let dev_sym = map.antipodal_deviation().unwrap_or(f64::INFINITY);
        rows.push(CheckRow::new(
            format!("antipodal symmetry {}", s.name),
            format!("{dev_sym:.1e}"),
            "<= 1e-9",
            dev_sym <= 1e-9,
        ));
        maps.push((s.name.to_string(), map));
    }

    let ratio_of = |name: &str| extremal_ratio(&maps.iter().find(|(n, _)| n == name).expect("scenario").1);
    let (ud, ut) = (ratio_of("ud")?, ratio_of("ut")?);
    for (name, r) in [("UD", ud), ("UT", ut)] {
        rows.push(CheckRow::new(
            format!("{name} T2 max/min"),
            format!("{r:.3}"),
            "in [1.6, 2.5]",
            (1.6..=2.5).contains(&r),
        ));
    }
    for name in ["ct_x", "ct_y"] {
        let r = ratio_of(name)?;
        rows.push(CheckRow::new(
            format!("{name} T2 max/min exceeds UT"),
            format!("{r:.3} vs {ut:.3}"),
            "greater",
            r > ut,
        ));
    }

    let map_of = |name: &str| &maps.iter().find(|(n, _)| n == name).expect("scenario").1;
    let e_ok = argmin_near(map_of("ct_x"), &[(PI / 2.0, 0.0), (PI / 2.0, PI), (0.0, 0.0), (PI, 0.0)], 2);
    rows.push(CheckRow::new(
        "ct_x argmin near (pi/2, 0) or (0, 0)",
        argmin_text(map_of("ct_x")),
        "within 2 grid steps",
        e_ok,
    ));
    let f_ok = argmin_near(map_of("ct_y"), &[(PI / 2.0, PI / 2.0), (PI / 2.0, 3.0 * PI / 2.0)], 2);
    rows.push(CheckRow::new(
        "ct_y argmin near (pi/2, pi/2)",
        argmin_text(map_of("ct_y")),
        "within 2 grid steps",
        f_ok,
    ));

    let trend: Vec<f64> = ["ewjn_2e8", "ewjn_2e7", "ewjn_2e6"].iter().map(|n| ratio_of(n)).collect::<Result<_>>()?;
    rows.push(CheckRow::new(
        "EWJN T1 max/min vs sigma 2e8, 2e7, 2e6",
        format!("{:.3}, {:.3}, {:.3}", trend[0], trend[1], trend[2]),
        "strictly increasing",
        trend[0] < trend[1] && trend[1] < trend[2],
    ));

    Ok(Report { resolution, tau_s: tau, rows, maps })
}

pub fn argmin_text(map: &AnisotropyMap) -> String {
    global_argmin(map, 1e-12)
        .iter()
        .map(|&(i, j)| format!("({:.0}, {:.0}) deg", map.theta[i].to_degrees(), map.phi[j].to_degrees()))
        .collect::<Vec<_>>()
        .join(" ")
}

