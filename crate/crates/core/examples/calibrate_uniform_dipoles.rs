//! Fit the uniform-dipole density to the reference T2 for several τ.

use spin_aniso::map::{calibrate, Reference};
use spin_aniso::noise::DEFAULT_HYPERFINE_RATE;
use spin_aniso::reproduce::{ud_model, ut_model};
use spin_aniso::case_study;

fn main() -> spin_aniso::Result<()> {
    let dev = case_study();
    let reference = Reference::default();
    for tau in [1e-7, 1e-6, 1e-5, 1e-3] {
        let (_, ud) = calibrate(&ud_model(tau), &dev, &reference, DEFAULT_HYPERFINE_RATE)?;
        let (_, ut) = calibrate(&ut_model(tau), &dev, &reference, DEFAULT_HYPERFINE_RATE)?;
        println!(
            "tau = {tau:e} s: rho_v = {:.4e} cm^-3, rho_a = {:.4e} cm^-2, charge Tphi = {:.4e} s, T2 = {:.4e} s",
            ud.value, ut.value, ud.charge_tphi_s, ud.achieved_t2_s
        );
    }
    Ok(())
}
