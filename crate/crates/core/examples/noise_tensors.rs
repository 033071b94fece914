//! Electric correlation tensors of the charge and Johnson noise sources.

use nalgebra::Vector3;
use spin_aniso::noise::{
    charge_uniform_efield_weights, cluster_efield_tensor, ewjn_electric_tensor, ewjn_magnetic_tensor,
};
use spin_aniso::{case_study, units, NoiseModel};

fn main() -> spin_aniso::Result<()> {
    let dev = case_study();
    let p0 = units::dipole_from_si(2e-29);
    for model in [
        NoiseModel::UniformDipole { rho_v: 2.39e13, p0, tau: 1e-6 },
        NoiseModel::UniformTrap { rho_a: 5.33e7, p0, tau: 1e-6 },
    ] {
        let w = charge_uniform_efield_weights(&model, &dev)?;
        println!("{}: S_xx = {:.4e}, S_yy = {:.4e} statV^2/cm^2", model.name(), w.xx, w.yy);
    }
    let pos = Vector3::new(37.0, 0.0, 137.0).map(units::nm_to_cm);
    let trap = NoiseModel::ClusterTrap { position: pos, p0, tau: 1e-6 };
    let s = cluster_efield_tensor(&trap, 0.0)?;
    println!("cluster trap at (37, 0, 137) nm, omega = 0:\n{}", s.entries);
    let e = ewjn_electric_tensor(&dev, dev.omega_op)?;
    let b = ewjn_magnetic_tensor(&dev, dev.omega_op)?;
    println!("EWJN E_zz = {:.4e}, B_zz = {:.4e} at the operating frequency", e.entries[(2, 2)], b.entries[(2, 2)]);
    println!("PSD: {} {}", e.is_positive_semidefinite(1e-12), b.is_positive_semidefinite(1e-12));
    Ok(())
}
