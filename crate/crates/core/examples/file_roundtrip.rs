//! Simulate snapshots, store them as JSON and CSV, read both back and check the
//! estimate is unchanged.
//!
//!     cargo run --release --example file_roundtrip [dir]

use hetdoa::io::{read_snapshots, write_snapshots};
use hetdoa::prelude::*;

fn main() -> Result<()> {
    let dir = std::env::args().nth(1).map_or_else(std::env::temp_dir, Into::into);
    std::fs::create_dir_all(&dir)?;
    let dict = build_dictionary(&ArrayGeometry::ula(12, 0.5)?, &AngularGrid::uniform(-90.0, 89.5, 0.5)?);
    let sim = simulate(&dict, &SourceScenario::single(24.5, 0.0), &NoiseSpec::new(NoiseCase::II, -5.0), 30, 42)?;
    let cfg = SblConfig::new(1, NoiseModel::CaseII);
    let direct = sbl_run(&sim.snapshots, &dict, &cfg)?.doas_deg(&dict);
    for name in ["snapshots.json", "snapshots.csv"] {
        let path = dir.join(name);
        write_snapshots(&path, &sim.snapshots)?;
        let back = read_snapshots(&path)?;
        assert_eq!(back.data(), sim.snapshots.data());
        let doas = sbl_run(&back, &dict, &cfg)?.doas_deg(&dict);
        assert_eq!(doas, direct);
        let bytes = std::fs::metadata(&path)?.len();
        println!("{}: {} x {}, {bytes} bytes, SBL2 doa {:?}", path.display(), back.n_sensors(), back.n_snapshots(), doas);
    }
    Ok(())
}
