//! Applied-field direction and the angular weights that contract a noise
//! correlation tensor into a relaxation or dephasing rate.

use std::f64::consts::{PI, TAU};

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Orientation of the applied field, polar angle in `[0, π]` and azimuth in
/// `[0, 2π)`. Construct through [`FieldDirection::new`] so both angles are
/// canonical.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FieldDirection {
    theta: f64,
    phi: f64,
}

impl FieldDirection {
    pub fn new(theta: f64, phi: f64) -> Result<Self> {
        if !theta.is_finite() || !phi.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "field direction must be finite, got theta={theta}, phi={phi}"
            )));
        }
        let mut theta = theta.rem_euclid(TAU);
        let mut phi = phi;
        if theta > PI {
            theta = TAU - theta;
            phi += PI;
        }
        Ok(Self {
            theta,
            phi: wrap_azimuth(phi),
        })
    }

    /// Field along +x, the direction used in the reference measurement.
    pub fn x_axis() -> Self {
        Self {
            theta: PI / 2.0,
            phi: 0.0,
        }
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    pub fn unit_vector(&self) -> Vector3<f64> {
        let (st, ct) = self.theta.sin_cos();
        let (sp, cp) = self.phi.sin_cos();
        Vector3::new(st * cp, st * sp, ct)
    }

    /// The reversed field, (π − θ, φ + π).
    pub fn antipode(&self) -> Self {
        Self {
            theta: PI - self.theta,
            phi: wrap_azimuth(self.phi + PI),
        }
    }
}

fn wrap_azimuth(phi: f64) -> f64 {
    let p = phi.rem_euclid(TAU);
    // rem_euclid can round up to exactly 2π for tiny negative inputs
    if p >= TAU {
        0.0
    } else {
        p
    }
}

pub fn direction_from_angles(theta: f64, phi: f64) -> Result<FieldDirection> {
    FieldDirection::new(theta, phi)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightKind {
    /// Q⁽¹⁾, selects noise perpendicular to the field (relaxation).
    Transverse,
    /// Q⁽²⁾, selects noise along the field (dephasing).
    Longitudinal,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightMatrix {
    entries: Matrix3<f64>,
    kind: WeightKind,
}

impl WeightMatrix {
    pub fn entries(&self) -> &Matrix3<f64> {
        &self.entries
    }

    pub fn kind(&self) -> WeightKind {
        self.kind
    }

    /// Σᵢⱼ Qᵢⱼ Sᵢⱼ.
    pub fn contract(&self, tensor: &Matrix3<f64>) -> f64 {
        self.entries.component_mul(tensor).sum()
    }
}

/// Q⁽¹⁾ written out entry by entry; algebraically I − n nᵀ.
pub fn transverse_weight(dir: &FieldDirection) -> WeightMatrix {
    let (st, ct) = dir.theta.sin_cos();
    let (sp, cp) = dir.phi.sin_cos();
    let xy = -cp * sp * st * st;
    let xz = -cp * ct * st;
    let yz = -sp * ct * st;
    let entries = Matrix3::new(
        cp * cp * ct * ct + sp * sp,
        xy,
        xz,
        xy,
        sp * sp * ct * ct + cp * cp,
        yz,
        xz,
        yz,
        st * st,
    );
    WeightMatrix {
        entries,
        kind: WeightKind::Transverse,
    }
}

/// Q⁽²⁾ written out entry by entry; algebraically n nᵀ.
pub fn longitudinal_weight(dir: &FieldDirection) -> WeightMatrix {
    let (st, ct) = dir.theta.sin_cos();
    let (sp, cp) = dir.phi.sin_cos();
    let xy = cp * sp * st * st;
    let xz = cp * ct * st;
    let yz = sp * ct * st;
    let entries = Matrix3::new(
        cp * cp * st * st,
        xy,
        xz,
        xy,
        sp * sp * st * st,
        yz,
        xz,
        yz,
        ct * ct,
    );
    WeightMatrix {
        entries,
        kind: WeightKind::Longitudinal,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn dir(theta: f64, phi: f64) -> FieldDirection {
        FieldDirection::new(theta, phi).unwrap()
    }

    #[test]
    fn axis_directions() {
        assert_abs_diff_eq!(dir(0.0, 1.234).unit_vector(), Vector3::z(), epsilon = 1e-15);
        assert_abs_diff_eq!(dir(PI / 2.0, 0.0).unit_vector(), Vector3::x(), epsilon = 1e-15);
        assert_abs_diff_eq!(dir(PI / 2.0, PI / 2.0).unit_vector(), Vector3::y(), epsilon = 1e-15);
    }

    #[test]
    fn rejects_non_finite() {
        assert!(FieldDirection::new(f64::NAN, 0.0).is_err());
        assert!(FieldDirection::new(0.0, f64::INFINITY).is_err());
    }

    #[test]
    fn canonicalizes_out_of_range_angles() {
        let d = dir(-0.3, 0.5);
        assert_abs_diff_eq!(d.theta(), 0.3, epsilon = 1e-15);
        assert_abs_diff_eq!(d.phi(), 0.5 + PI, epsilon = 1e-15);
        let raw = Vector3::new((-0.3f64).sin() * 0.5f64.cos(), (-0.3f64).sin() * 0.5f64.sin(), (-0.3f64).cos());
        assert_abs_diff_eq!(d.unit_vector(), raw, epsilon = 1e-14);

        let d = dir(1.0, -0.25);
        assert_abs_diff_eq!(d.phi(), TAU - 0.25, epsilon = 1e-15);
        let d = dir(1.0, 7.0 * PI);
        assert_abs_diff_eq!(d.phi(), PI, epsilon = 1e-12);
    }

    #[test]
    fn printed_weights_at_axes() {
        let q1 = transverse_weight(&dir(0.0, 0.0));
        assert_abs_diff_eq!(*q1.entries(), Matrix3::from_diagonal(&Vector3::new(1.0, 1.0, 0.0)), epsilon = 1e-15);
        let q1 = transverse_weight(&dir(PI / 2.0, 0.0));
        assert_abs_diff_eq!(*q1.entries(), Matrix3::from_diagonal(&Vector3::new(0.0, 1.0, 1.0)), epsilon = 1e-15);
        let q2 = longitudinal_weight(&dir(0.0, 0.0));
        assert_abs_diff_eq!(*q2.entries(), Matrix3::from_diagonal(&Vector3::new(0.0, 0.0, 1.0)), epsilon = 1e-15);
        let q2 = longitudinal_weight(&dir(PI / 2.0, 0.0));
        assert_abs_diff_eq!(*q2.entries(), Matrix3::from_diagonal(&Vector3::new(1.0, 0.0, 0.0)), epsilon = 1e-15);
    }

    proptest! {
        #[test]
        fn weights_match_outer_products(theta in 0.0..PI, phi in 0.0..TAU) {
            let d = dir(theta, phi);
            let n = d.unit_vector();
            let nnt = n * n.transpose();
            let q1 = transverse_weight(&d);
            let q2 = longitudinal_weight(&d);
            prop_assert!((q1.entries() - (Matrix3::identity() - nnt)).abs().max() < 1e-12);
            prop_assert!((q2.entries() - nnt).abs().max() < 1e-12);
            prop_assert!((q1.entries() + q2.entries() - Matrix3::identity()).abs().max() < 1e-12);
            prop_assert!((q1.entries() - q1.entries().transpose()).abs().max() < 1e-15);
            prop_assert!((q2.entries() - q2.entries().transpose()).abs().max() < 1e-15);
            prop_assert!((q1.entries() * q1.entries() - q1.entries()).abs().max() < 1e-12);
            prop_assert!((q2.entries() * q2.entries() - q2.entries()).abs().max() < 1e-12);
            prop_assert!((q1.entries().trace() - 2.0).abs() < 1e-12);
            prop_assert!((q2.entries().trace() - 1.0).abs() < 1e-12);
            prop_assert!((n.norm() - 1.0).abs() < 1e-12);
        }

        #[test]
        fn weights_eigenvalues(theta in 0.0..PI, phi in 0.0..TAU) {
            let d = dir(theta, phi);
            let mut e1: Vec<f64> = transverse_weight(&d).entries().symmetric_eigenvalues().iter().copied().collect();
            let mut e2: Vec<f64> = longitudinal_weight(&d).entries().symmetric_eigenvalues().iter().copied().collect();
            e1.sort_by(f64::total_cmp);
            e2.sort_by(f64::total_cmp);
            for (a, b) in e1.iter().zip([0.0, 1.0, 1.0]) {
                prop_assert!((a - b).abs() < 1e-12);
            }
            for (a, b) in e2.iter().zip([0.0, 0.0, 1.0]) {
                prop_assert!((a - b).abs() < 1e-12);
            }
        }

        #[test]
        fn antipodal_invariance(theta in 0.0..PI, phi in 0.0..TAU) {
            let d = dir(theta, phi);
            let a = d.antipode();
            prop_assert!((transverse_weight(&d).entries() - transverse_weight(&a).entries()).abs().max() < 1e-12);
            prop_assert!((longitudinal_weight(&d).entries() - longitudinal_weight(&a).entries()).abs().max() < 1e-12);
        }

        #[test]
        fn longitudinal_contraction_is_quadratic_form(
            theta in 0.0..PI, phi in 0.0..TAU,
            a in -1.0..1.0f64, b in -1.0..1.0f64, c in -1.0..1.0f64,
            x in -1.0..1.0f64, y in -1.0..1.0f64, z in -1.0..1.0f64,
        ) {
            let d = dir(theta, phi);
            let s = Matrix3::new(a, x, y, x, b, z, y, z, c);
            let n = d.unit_vector();
            let direct = (n.transpose() * s * n)[(0, 0)];
            prop_assert!((longitudinal_weight(&d).contract(&s) - direct).abs() < 1e-12);
        }
    }
}
