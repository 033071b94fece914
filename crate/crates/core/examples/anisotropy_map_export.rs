//! Build the uniform-trap T2 map and write it as CSV, JSON and PPM.

use spin_aniso::commands::{write_map, Format};
use spin_aniso::map::Resolution;
use spin_aniso::scenarios::scenario;

fn main() -> spin_aniso::Result<()> {
    let out = std::env::temp_dir().join("spin-aniso-example");
    let map = scenario("ut").expect("bundled scenario").build(Resolution::LOW, 1e-6)?;
    for p in write_map(&map, &out, "ut_t2", &[Format::Csv, Format::Json, Format::Ppm])? {
        println!("wrote {}", p.display());
    }
    let (lo, hi) = map.values.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &v| (a.min(v), b.max(v)));
    println!("T2 spans {lo:.4e} .. {hi:.4e} s");
    Ok(())
}
