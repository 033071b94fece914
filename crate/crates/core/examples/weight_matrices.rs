//! Transverse and longitudinal weights for a few field directions.

use std::f64::consts::PI;

use spin_aniso::{longitudinal_weight, transverse_weight, FieldDirection};

fn main() -> spin_aniso::Result<()> {
    for (theta, phi) in [(0.0, 0.0), (PI / 2.0, 0.0), (PI / 2.0, PI / 2.0), (PI / 4.0, PI / 3.0)] {
        let dir = FieldDirection::new(theta, phi)?;
        let q1 = transverse_weight(&dir);
        let q2 = longitudinal_weight(&dir);
        println!("theta = {theta:.4}, phi = {phi:.4}, n = {:?}", dir.unit_vector().as_slice());
        println!("  Q1 trace {:.3}, Q2 trace {:.3}", q1.entries().trace(), q2.entries().trace());
        println!("  Q1 = {}", q1.entries());
        println!("  Q2 = {}", q2.entries());
    }
    Ok(())
}
