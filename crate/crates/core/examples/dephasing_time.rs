//! Γ(t) and the dephasing time of a dipole cluster across switching times.

use std::f64::consts::PI;

use nalgebra::Vector3;
use spin_aniso::coherence::{dephasing_time, gamma};
use spin_aniso::{case_study, units, FieldDirection, NoiseModel};

fn main() -> spin_aniso::Result<()> {
    let dev = case_study();
    let dir = FieldDirection::new(PI / 2.0, 0.0)?;
    let pos = Vector3::new(37.0, 0.0, 37.0).map(units::nm_to_cm);
    for tau in [1e-8, 1e-6, 1e-4] {
        let model = NoiseModel::ClusterDipole { position: pos, p0: units::dipole_from_si(2e-29), tau };
        let tphi = dephasing_time(&dir, std::slice::from_ref(&model), &dev)?;
        let g = gamma(tphi.seconds(), &dir, std::slice::from_ref(&model), &dev)?;
        println!("tau = {tau:e} s: Tphi = {:.4e} s, Gamma(Tphi) = {g:.12}", tphi.seconds());
    }
    Ok(())
}
