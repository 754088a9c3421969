//! One -3 deg source at -25 dB SNR under Case III noise: compare the beamformer
//! spectra with the SBL3 power spectrum.
//!
//!     cargo run --release --example beam_spectra [seed] [out_dir]

use hetdoa::io::spectrum_csv;
use hetdoa::prelude::*;

fn main() -> Result<()> {
    let mut args = std::env::args().skip(1);
    let seed: u64 = args.next().map_or(3, |s| s.parse().expect("seed"));
    let out = args.next();

    let dict = build_dictionary(&ArrayGeometry::ula(20, 0.5)?, &AngularGrid::uniform(-90.0, 89.5, 0.5)?);
    let sim = simulate(
        &dict,
        &SourceScenario::single(-3.0, 0.0),
        &NoiseSpec::new(NoiseCase::III, -25.0),
        50,
        seed,
    )?;
    let settings = SolverSettings::default();
    println!("{:<10} {:>9} {:>12}", "method", "peak deg", "sidelobe dB");
    for m in [Method::Cbf, Method::Cbf2, Method::CbfPhase, Method::Music, Method::Sbl3] {
        let o = run_method(m, &sim.snapshots, &dict, 1, &settings)?;
        let db = o.spectrum.values_db();
        let peak = o.estimate.angles_deg[0];
        let ip = dict.grid().index_of(peak).expect("peaks lie on the grid");
        // highest level more than 5 deg away from the peak, relative to it
        let side = (0..db.len())
            .filter(|i| (dict.grid().angle(*i) - peak).abs() > 5.0)
            .map(|i| db[i])
            .fold(f64::NEG_INFINITY, f64::max)
            - db[ip];
        println!("{:<10} {:>9.1} {:>12.1}", m.name(), peak, side);
        if let Some(dir) = &out {
            std::fs::create_dir_all(dir)?;
            let f = format!("{dir}/spectrum_{}.csv", m.name().to_lowercase());
            std::fs::write(&f, spectrum_csv(&o.spectrum))?;
        }
    }
    Ok(())
}
