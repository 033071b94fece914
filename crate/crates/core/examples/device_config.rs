//! Load a device, report its regime, and vary the gate conductivity.

use spin_aniso::device::{check_near_field_regime, load_config, CASE_STUDY_JSON};
use spin_aniso::units;

fn main() -> spin_aniso::Result<()> {
    let dev = load_config(CASE_STUDY_JSON)?;
    println!("fingerprint {}", dev.fingerprint());
    for sigma in [2e8, 2e7, 2e6] {
        let d = dev.with_conductivity(units::conductivity_from_si(sigma));
        let r = check_near_field_regime(&d);
        println!(
            "sigma {sigma:e} S/m: skin depth {:.1} nm, d/delta {:.3}{}",
            units::cm_to_nm(r.skin_depth),
            r.ratio,
            if r.warn { " (near-field formulas questionable)" } else { "" }
        );
    }
    let g = dev.gradients;
    println!("dBz/dx = {:.3} mT/nm", units::gradient_to_mt_per_nm(g.get(2, 0)));
    Ok(())
}
