//! Three sources, SBL2 run while assuming 1 to 5 sources. Shows how the
//! assumed count changes convergence and which peaks are reported.
//!
//!     cargo run --release --example misspecified_k [snr_db] [trials]

use hetdoa::prelude::*;

fn main() -> Result<()> {
    let mut args = std::env::args().skip(1);
    let snr: f64 = args.next().map_or(-5.0, |s| s.parse().expect("snr_db"));
    let trials: u64 = args.next().map_or(5, |s| s.parse().expect("trials"));

    let dict = build_dictionary(&ArrayGeometry::ula(20, 0.5)?, &AngularGrid::uniform(-90.0, 89.5, 0.5)?);
    let scenario = SourceScenario::new(vec![-3.0, 2.0, 50.0], vec![10.0, 22.0, 20.0])?;
    println!("true DOAs {:?}, Case II, SNR {snr} dB", scenario.doas_deg);
    println!("{:>2} {:>10} {:>10}  last trial", "K", "mean iter", "converged");
    for k in 1..=5 {
        let (mut iters, mut conv, mut last) = (0, 0, Vec::new());
        for t in 0..trials {
            let sim = simulate(&dict, &scenario, &NoiseSpec::new(NoiseCase::II, snr), 50, 40 + t)?;
            let res = sbl_run(&sim.snapshots, &dict, &SblConfig::new(k, NoiseModel::CaseII))?;
            iters += res.iterations;
            conv += res.converged as u64;
            last = res.doas_deg(&dict);
        }
        println!(
            "{k:>2} {:>10.1} {:>7}/{trials}  {last:?}",
            iters as f64 / trials as f64,
            conv
        );
    }
    Ok(())
}
