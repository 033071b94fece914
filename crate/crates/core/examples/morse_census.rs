//! Critical-point census of every bundled scenario.

use spin_aniso::census::{euler_check, extremal_ratio};
use spin_aniso::map::Resolution;
use spin_aniso::scenarios::scenarios;

fn main() -> spin_aniso::Result<()> {
    for s in scenarios() {
        let map = s.build(Resolution::LOW, 1e-6)?;
        let c = map.metadata.census.as_ref().expect("census attached");
        println!(
            "{:6} {:34} (max, min, saddle) = {:?}, degenerate {}, Euler {}, max/min {:.3}, expected {:?}",
            s.name,
            s.description,
            c.counts(),
            c.degenerate,
            euler_check(c),
            extremal_ratio(&map)?,
            s.expected
        );
    }
    Ok(())
}
