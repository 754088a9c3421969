//! Three sources with unequal powers under Case II noise. Runs every method on
//! a handful of trials and reports the matched RMSE.
//!
//!     cargo run --release --example three_sources [snr_db] [trials]

use hetdoa::prelude::*;

fn main() -> Result<()> {
    let mut args = std::env::args().skip(1);
    let snr: f64 = args.next().map_or(-10.0, |s| s.parse().expect("snr_db"));
    let trials: u64 = args.next().map_or(5, |s| s.parse().expect("trials"));

    let dict = build_dictionary(&ArrayGeometry::ula(20, 0.5)?, &AngularGrid::uniform(-90.0, 89.5, 0.5)?);
    let scenario = SourceScenario::new(vec![-20.0, -3.0, 15.0], vec![0.0, -3.0, -6.0])?;
    let settings = SolverSettings::default();
    println!("sources {:?} deg, powers {:?} dB, Case II, SNR {snr} dB", scenario.doas_deg, scenario.powers_db);
    for m in Method::ALL {
        let mut ests = Vec::new();
        for t in 0..trials {
            let sim = simulate(&dict, &scenario, &NoiseSpec::new(NoiseCase::II, snr), 50, 100 + t)?;
            ests.push(run_method(m, &sim.snapshots, &dict, 3, &settings)?.estimate);
        }
        let r = match_and_rmse(&ests, &scenario)?;
        let last = &ests.last().expect("at least one trial").angles_deg;
        println!("{:<10} rmse {:>6.2} deg   last trial {:?}", m.name(), r.rmse_deg, last);
    }
    Ok(())
}
