//! EWJN relaxation and dephasing along the coordinate axes.

use std::f64::consts::PI;

use spin_aniso::coherence::{ewjn_dephasing_rate, ewjn_t1, EwjnOptions};
use spin_aniso::{case_study, units, FieldDirection};

fn main() -> spin_aniso::Result<()> {
    let dirs = [("x", PI / 2.0, 0.0), ("y", PI / 2.0, PI / 2.0), ("z", 0.0, 0.0)];
    for sigma in [2e8, 2e7, 2e6] {
        let dev = case_study().with_conductivity(units::conductivity_from_si(sigma));
        println!("sigma = {sigma:e} S/m");
        for (name, theta, phi) in dirs {
            let dir = FieldDirection::new(theta, phi)?;
            let t1 = ewjn_t1(&dev, &dir, EwjnOptions::default())?.seconds();
            let t1_const = ewjn_t1(&dev, &dir, EwjnOptions { constant_alpha: true })?.seconds();
            let tphi = 1.0 / ewjn_dephasing_rate(&dev, &dir)?;
            println!("  along {name}: T1 = {t1:.4e} s (constant alpha {t1_const:.4e} s), Tphi = {tphi:.4} s");
        }
    }
    Ok(())
}
