//! Critical-point census of a map on the sphere.
//!
//! The grid is triangulated by splitting every (θ, φ) cell along the
//! (i, j) to (i+1, j+1) diagonal, and each pole row collapses to one vertex.
//! A vertex is classified from the cyclic sign pattern of value differences
//! around its link: no sign changes means an extremum, 2k changes with k ≥ 2
//! a saddle of multiplicity k − 1. Ties are broken by grid index so every
//! vertex is classified. Adjacent critical vertices are merged and counted
//! by their net index, which removes discretization pairs that a smooth
//! function would not have.

use nalgebra::{DMatrix, DVector, Matrix2, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::map::AnisotropyMap;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CensusOptions {
    /// Relative difference below which two neighbouring values count as equal.
    pub flat_tolerance: f64,
    /// Smallest-to-largest |eigenvalue| of the fitted Hessian below which a
    /// critical point counts as near-singular.
    pub singular_ratio: f64,
    /// Number of near-singular critical vertices that marks a ridge of
    /// higher-order critical points.
    pub ridge_count: usize,
}

impl Default for CensusOptions {
    fn default() -> Self {
        Self {
            flat_tolerance: 1e-9,
            singular_ratio: 1e-2,
            ridge_count: 8,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CriticalKind {
    Maximum,
    Minimum,
    Saddle,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalPoint {
    pub kind: CriticalKind,
    /// Saddle multiplicity; 1 for extrema.
    pub multiplicity: usize,
    pub i: usize,
    pub j: usize,
    pub theta: f64,
    pub phi: f64,
    pub value: f64,
    pub hessian_ratio: f64,
    /// A link neighbour is within the flat tolerance.
    pub flat: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalPointCensus {
    pub n_max: usize,
    pub n_min: usize,
    pub n_saddle: usize,
    pub degenerate: bool,
    /// Grid cells (i, j) responsible for the degenerate flag.
    pub flagged: Vec<(usize, usize)>,
    /// One representative per counted critical point.
    pub points: Vec<CriticalPoint>,
    /// Critical vertices before merging.
    pub raw_vertices: usize,
}

impl CriticalPointCensus {
    pub fn counts(&self) -> (usize, usize, usize) {
        (self.n_max, self.n_min, self.n_saddle)
    }
}

/// N_max + N_min = N_s + 2, or not applicable because the map is degenerate.
pub fn euler_check(census: &CriticalPointCensus) -> bool {
    census.degenerate || census.n_max + census.n_min == census.n_saddle + 2
}

type Vertex = (usize, usize);

struct Grid<'a> {
    map: &'a AnisotropyMap,
    nt: usize,
    np: usize,
}

impl<'a> Grid<'a> {
    fn new(map: &'a AnisotropyMap) -> Self {
        Self { map, nt: map.n_theta(), np: map.n_phi() }
    }

    fn is_pole(&self, i: usize) -> bool {
        i == 0 || i + 1 == self.nt
    }

    fn canon(&self, i: usize, j: usize) -> Vertex {
        if self.is_pole(i) {
            (i, 0)
        } else {
            (i, j % self.np)
        }
    }

    fn value(&self, v: Vertex) -> f64 {
        self.map.get(v.0, v.1)
    }

    fn index(&self, v: Vertex) -> usize {
        v.0 * self.np + v.1
    }

    /// Strict total order: value, then grid index.
    fn above(&self, a: Vertex, b: Vertex) -> bool {
        let (va, vb) = (self.value(a), self.value(b));
        match va.partial_cmp(&vb) {
            Some(std::cmp::Ordering::Greater) => true,
            Some(std::cmp::Ordering::Less) => false,
            _ => self.index(a) > self.index(b),
        }
    }

    fn nearly_equal(&self, a: Vertex, b: Vertex, tol: f64) -> bool {
        let (va, vb) = (self.value(a), self.value(b));
        if va.is_infinite() || vb.is_infinite() {
            return va == vb;
        }
        (va - vb).abs() <= tol * va.abs().max(vb.abs())
    }

    fn vertices(&self) -> impl Iterator<Item = Vertex> + '_ {
        (0..self.nt).flat_map(move |i| {
            let cols = if self.is_pole(i) { 1 } else { self.np };
            (0..cols).map(move |j| (i, j))
        })
    }

    /// Cyclically ordered link in the triangulation.
    fn link(&self, (i, j): Vertex) -> Vec<Vertex> {
        let np = self.np;
        if i == 0 {
            return (0..np).map(|k| (1, k)).collect();
        }
        if i + 1 == self.nt {
            return (0..np).rev().map(|k| (i - 1, k)).collect();
        }
        let raw = [
            self.canon(i - 1, j + np - 1),
            self.canon(i - 1, j),
            self.canon(i, j + 1),
            self.canon(i + 1, j + 1),
            self.canon(i + 1, j),
            self.canon(i, j + np - 1),
        ];
        let mut out: Vec<Vertex> = Vec::with_capacity(6);
        for v in raw {
            if out.last() != Some(&v) {
                out.push(v);
            }
        }
        if out.len() > 1 && out.first() == out.last() {
            out.pop();
        }
        out
    }

    /// 8-neighbourhood, poles joined to their full ring.
    fn neighbours(&self, (i, j): Vertex) -> Vec<Vertex> {
        let np = self.np;
        if i == 0 {
            return (0..np).map(|k| (1, k)).collect();
        }
        if i + 1 == self.nt {
            return (0..np).map(|k| (i - 1, k)).collect();
        }
        let mut out = Vec::with_capacity(8);
        for di in [i - 1, i, i + 1] {
            for dj in [j + np - 1, j, j + 1] {
                let v = self.canon(di, dj);
                if v != (i, j) && !out.contains(&v) {
                    out.push(v);
                }
            }
        }
        out
    }

    fn unit(&self, (i, j): Vertex) -> Vector3<f64> {
        let t = self.map.theta[i];
        let p = if self.is_pole(i) { 0.0 } else { self.map.phi[j] };
        Vector3::new(t.sin() * p.cos(), t.sin() * p.sin(), t.cos())
    }

    /// Eigenvalue ratio of a least-squares quadratic fit over the
    /// 8-neighbourhood, in tangent-plane coordinates.
    fn hessian_ratio(&self, v: Vertex) -> f64 {
        let c = self.unit(v);
        let (e1, e2) = if self.is_pole(v.0) {
            (Vector3::x(), Vector3::y())
        } else {
            let t = self.map.theta[v.0];
            let p = self.map.phi[v.1];
            let et = Vector3::new(t.cos() * p.cos(), t.cos() * p.sin(), -t.sin());
            (et, c.cross(&et))
        };
        let nbs = self.neighbours(v);
        if nbs.iter().chain(std::iter::once(&v)).any(|&u| !self.value(u).is_finite()) {
            return 0.0;
        }
        let rows = nbs.len() + 1;
        let mut a = DMatrix::<f64>::zeros(rows, 6);
        let mut y = DVector::<f64>::zeros(rows);
        for (r, &u) in nbs.iter().chain(std::iter::once(&v)).enumerate() {
            let pu = self.unit(u);
            let (x1, x2) = if u == v { (0.0, 0.0) } else { (pu.dot(&e1), pu.dot(&e2)) };
            let row = [1.0, x1, x2, 0.5 * x1 * x1, x1 * x2, 0.5 * x2 * x2];
            for (k, val) in row.iter().enumerate() {
                a[(r, k)] = *val;
            }
            y[r] = self.value(u);
        }
        let Ok(sol) = a.svd(true, true).solve(&y, 1e-14) else {
            return 0.0;
        };
        let h = Matrix2::new(sol[3], sol[4], sol[4], sol[5]);
        let ev = h.symmetric_eigenvalues();
        let (lo, hi) = (ev[0].abs().min(ev[1].abs()), ev[0].abs().max(ev[1].abs()));
        if hi == 0.0 {
            0.0
        } else {
            lo / hi
        }
    }
}

struct RawCritical {
    v: Vertex,
    /// +1 for extrema, −m for saddles of multiplicity m.
    index: i64,
    kind: CriticalKind,
    flat: bool,
    ratio: f64,
}

/// Count maxima, minima and saddles of `map`.
pub fn census(map: &AnisotropyMap, opts: &CensusOptions) -> CriticalPointCensus {
    let g = Grid::new(map);
    let mut raw: Vec<RawCritical> = Vec::new();
    for v in g.vertices() {
        let link = g.link(v);
        let signs: Vec<bool> = link.iter().map(|&u| g.above(u, v)).collect();
        let changes = (0..signs.len()).filter(|&k| signs[k] != signs[(k + 1) % signs.len()]).count();
        let (kind, index) = match changes {
            0 if signs[0] => (CriticalKind::Minimum, 1),
            0 => (CriticalKind::Maximum, 1),
            2 => continue,
            c => (CriticalKind::Saddle, -((c / 2) as i64 - 1)),
        };
        let flat = link.iter().any(|&u| g.nearly_equal(u, v, opts.flat_tolerance));
        raw.push(RawCritical { v, index, kind, flat, ratio: g.hessian_ratio(v) });
    }

    let mut flagged: Vec<Vertex> = raw.iter().filter(|r| r.flat).map(|r| r.v).collect();
    let singular: Vec<Vertex> = raw.iter().filter(|r| r.ratio < opts.singular_ratio).map(|r| r.v).collect();
    if singular.len() >= opts.ridge_count {
        flagged.extend(singular);
    }
    flagged.sort_unstable();
    flagged.dedup();

    let (mut n_max, mut n_min, mut n_saddle) = (0, 0, 0);
    let mut points = Vec::new();
    for cluster in clusters(&g, &raw) {
        let net: i64 = cluster.iter().map(|&k| raw[k].index).sum();
        if net == 0 {
            continue;
        }
        let (members_of, table) = (&cluster, &raw);
        let members = |kind| members_of.iter().copied().filter(move |&k| table[k].kind == kind);
        let (kind, count) = if net > 0 {
            let (maxima, minima) = (members(CriticalKind::Maximum).count(), members(CriticalKind::Minimum).count());
            let kind = if maxima >= minima { CriticalKind::Maximum } else { CriticalKind::Minimum };
            (kind, net as usize)
        } else {
            (CriticalKind::Saddle, (-net) as usize)
        };
        let rep = match kind {
            CriticalKind::Maximum => members(kind).max_by(|&a, &b| g.value(raw[a].v).total_cmp(&g.value(raw[b].v))),
            CriticalKind::Minimum => members(kind).min_by(|&a, &b| g.value(raw[a].v).total_cmp(&g.value(raw[b].v))),
            CriticalKind::Saddle => members(kind).min_by_key(|&k| raw[k].index),
        }
        .expect("cluster has a member of its net kind");
        match kind {
            CriticalKind::Maximum => n_max += count,
            CriticalKind::Minimum => n_min += count,
            CriticalKind::Saddle => n_saddle += count,
        }
        let r = &raw[rep];
        points.push(CriticalPoint {
            kind,
            multiplicity: count,
            i: r.v.0,
            j: r.v.1,
            theta: map.theta[r.v.0],
            phi: if g.is_pole(r.v.0) { 0.0 } else { map.phi[r.v.1] },
            value: g.value(r.v),
            hessian_ratio: r.ratio,
            flat: cluster.iter().any(|&k| raw[k].flat),
        });
    }

    CriticalPointCensus {
        n_max,
        n_min,
        n_saddle,
        degenerate: !flagged.is_empty(),
        flagged,
        points,
        raw_vertices: raw.len(),
    }
}

/// Connected components of critical vertices under 8-adjacency.
fn clusters(g: &Grid, raw: &[RawCritical]) -> Vec<Vec<usize>> {
    let mut slot = std::collections::HashMap::new();
    for (k, r) in raw.iter().enumerate() {
        slot.insert(r.v, k);
    }
    let mut seen = vec![false; raw.len()];
    let mut out = Vec::new();
    for start in 0..raw.len() {
        if seen[start] {
            continue;
        }
        seen[start] = true;
        let mut stack = vec![start];
        let mut members = Vec::new();
        while let Some(k) = stack.pop() {
            members.push(k);
            for u in g.neighbours(raw[k].v) {
                if let Some(&m) = slot.get(&u) {
                    if !seen[m] {
                        seen[m] = true;
                        stack.push(m);
                    }
                }
            }
        }
        members.sort_unstable();
        out.push(members);
    }
    out
}

/// max/min over finite entries; no-decay entries are skipped with a warning.
pub fn extremal_ratio(map: &AnisotropyMap) -> Result<f64> {
    let skipped = map.values.iter().filter(|v| !v.is_finite()).count();
    if skipped > 0 {
        log::warn!("extremal ratio ignores {skipped} no-decay grid points");
    }
    let finite = map.values.iter().copied().filter(|v| v.is_finite());
    let lo = finite.clone().fold(f64::INFINITY, f64::min);
    let hi = finite.fold(f64::NEG_INFINITY, f64::max);
    if !lo.is_finite() {
        return Err(Error::InvalidArgument("map has no finite values".into()));
    }
    Ok(hi / lo)
}

/// (θ, φ) of every non-flat minimum in the census.
pub fn argmin_locations(census: &CriticalPointCensus) -> Vec<(f64, f64)> {
    census
        .points
        .iter()
        .filter(|p| p.kind == CriticalKind::Minimum && !p.flat)
        .map(|p| (p.theta, p.phi))
        .collect()
}

/// Grid coordinates of the smallest value and every point tied with it.
pub fn global_argmin(map: &AnisotropyMap, rel_tol: f64) -> Vec<(usize, usize)> {
    let lo = map.values.iter().copied().fold(f64::INFINITY, f64::min);
    let mut out = Vec::new();
    for i in 0..map.n_theta() {
        for j in 0..map.n_phi() {
            if map.get(i, j) <= lo * (1.0 + rel_tol) {
                out.push((i, j));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::map::{MapMetadata, Quantity, Resolution};
    use proptest::prelude::*;

    fn map_from(res: Resolution, f: impl Fn(Vector3<f64>) -> f64) -> AnisotropyMap {
        let theta = res.theta_grid();
        let phi = res.phi_grid();
        let mut values = Vec::new();
        for &t in &theta {
            for &p in &phi {
                let p = if t == 0.0 || t == std::f64::consts::PI { 0.0 } else { p };
                values.push(f(Vector3::new(t.sin() * p.cos(), t.sin() * p.sin(), t.cos())));
            }
        }
        AnisotropyMap {
            quantity: Quantity::T2,
            theta,
            phi,
            values,
            metadata: serde_json::from_str::<MapMetadata>(r#"{"device_hash":"","models":[],"tau_s":[]}"#).unwrap(),
        }
    }

    fn quadratic(a: f64, b: f64, c: f64) -> impl Fn(Vector3<f64>) -> f64 {
        move |n| 1.0 + a * n.x * n.x + b * n.y * n.y + c * n.z * n.z
    }

    #[test]
    fn generic_quadratic_form_has_two_of_each() {
        for res in [Resolution::new(31, 60).unwrap(), Resolution::LOW] {
            let m = map_from(res, quadratic(0.3, 1.1, 2.0));
            let c = census(&m, &CensusOptions::default());
            assert_eq!(c.counts(), (2, 2, 2), "{res}");
            assert!(!c.degenerate);
            assert!(euler_check(&c));
        }
    }

    #[test]
    fn tilted_quadratic_form() {
        let rot = nalgebra::Rotation3::from_euler_angles(0.3, 0.7, 1.1);
        let f = quadratic(0.5, 1.3, 2.9);
        let m = map_from(Resolution::LOW, move |n| f(rot * n));
        let c = census(&m, &CensusOptions::default());
        assert_eq!(c.counts(), (2, 2, 2));
        assert!(!c.degenerate);
    }

    #[test]
    fn single_bump_has_one_max_one_min() {
        let axis = Vector3::new(0.3, -0.5, 0.8).normalize();
        let m = map_from(Resolution::LOW, move |n| 2.0 + n.dot(&axis));
        let c = census(&m, &CensusOptions::default());
        assert_eq!(c.counts(), (1, 1, 0));
        assert!(euler_check(&c));
    }

    #[test]
    fn constant_map_is_degenerate() {
        let m = map_from(Resolution::new(11, 20).unwrap(), |_| 3.0);
        let c = census(&m, &CensusOptions::default());
        assert!(c.degenerate);
        assert!(euler_check(&c));
        assert!(argmin_locations(&c).is_empty());
        assert_eq!(extremal_ratio(&m).unwrap(), 1.0);
    }

    #[test]
    fn euler_relation() {
        let mk = |n_max, n_min, n_saddle, degenerate| CriticalPointCensus {
            n_max,
            n_min,
            n_saddle,
            degenerate,
            flagged: vec![],
            points: vec![],
            raw_vertices: 0,
        };
        assert!(euler_check(&mk(2, 2, 2, false)));
        assert!(euler_check(&mk(1, 1, 0, false)));
        assert!(!euler_check(&mk(2, 1, 2, false)));
        assert!(euler_check(&mk(2, 1, 2, true)));
    }

    #[test]
    fn ridge_is_flagged() {
        // Rank-one form: minimum along a whole great circle.
        let e = Vector3::new(0.2, 0.9, 0.4).normalize();
        let m = map_from(Resolution::LOW, move |n| 1.0 / (1e-3 + n.dot(&e).powi(2)));
        let c = census(&m, &CensusOptions::default());
        assert!(c.degenerate, "{:?}", c.counts());
    }

    #[test]
    fn minima_locations() {
        let m = map_from(Resolution::LOW, quadratic(0.1, 1.0, 2.0));
        let c = census(&m, &CensusOptions::default());
        let mins = argmin_locations(&c);
        assert_eq!(mins.len(), 2);
        for (t, p) in mins {
            assert!((t - std::f64::consts::FRAC_PI_2).abs() < 1e-9);
            assert!(p.abs() < 1e-9 || (p - std::f64::consts::PI).abs() < 1e-9);
        }
        let g = global_argmin(&m, 1e-12);
        assert_eq!(g.len(), 2);
    }

    #[test]
    fn no_decay_entries_are_skipped_in_ratio() {
        let mut m = map_from(Resolution::new(11, 20).unwrap(), quadratic(0.0, 1.0, 0.0));
        m.values[50] = f64::INFINITY;
        assert!((extremal_ratio(&m).unwrap() - 2.0).abs() < 1e-12);
        m.values.iter_mut().for_each(|v| *v = f64::INFINITY);
        assert!(extremal_ratio(&m).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn census_invariant_under_positive_rescaling(
            a in 0.1..1.0f64, b in 1.2..2.0f64, c in 2.2..3.0f64, k in 0u32..8
        ) {
            let m = map_from(Resolution::new(31, 60).unwrap(), quadratic(a, b, c));
            let mut scaled = m.clone();
            let s = 2f64.powi(k as i32 - 4);
            scaled.values.iter_mut().for_each(|v| *v *= s);
            let c0 = census(&m, &CensusOptions::default());
            let c1 = census(&scaled, &CensusOptions::default());
            prop_assert_eq!(c0.counts(), c1.counts());
            prop_assert_eq!(c0.degenerate, c1.degenerate);
        }

        #[test]
        fn antipodal_maps_have_even_counts(
            a in 0.1..1.0f64, b in 1.2..2.0f64, c in 2.2..3.0f64,
            x in -1.0..1.0f64, y in -1.0..1.0f64, z in -1.0..1.0f64
        ) {
            let rot = nalgebra::Rotation3::from_euler_angles(x, y, z);
            let f = quadratic(a, b, c);
            let m = map_from(Resolution::new(31, 60).unwrap(), move |n| f(rot * n));
            let cen = census(&m, &CensusOptions::default());
            if !cen.degenerate {
                prop_assert_eq!(cen.n_max % 2, 0);
                prop_assert_eq!(cen.n_min % 2, 0);
                prop_assert_eq!(cen.n_saddle % 2, 0);
            }
        }
    }
}
