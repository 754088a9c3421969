//! Each SBL noise estimator on data from each noise case: iterations,
//! estimated DOA and how well the noise level was recovered.
//!
//!     cargo run --release --example single_source_sbl [snr_db] [seed]

use hetdoa::prelude::*;

fn main() -> Result<()> {
    let mut args = std::env::args().skip(1);
    let snr: f64 = args.next().map_or(-10.0, |s| s.parse().expect("snr_db"));
    let seed: u64 = args.next().map_or(11, |s| s.parse().expect("seed"));

    let dict = build_dictionary(&ArrayGeometry::ula(20, 0.5)?, &AngularGrid::uniform(-90.0, 89.5, 0.5)?);
    let scenario = SourceScenario::single(-3.0, 0.0);
    println!("source at -3 deg, SNR {snr} dB, N=20, L=50");
    println!("{:<5} {:<8} {:>5} {:>5} {:>8} {:>12}", "data", "model", "iter", "conv", "doa", "sigma2 ratio");
    for case in [NoiseCase::I, NoiseCase::II, NoiseCase::III] {
        let sim = simulate(&dict, &scenario, &NoiseSpec::new(case, snr), 50, seed)?;
        let tv = sim.noise_std().snapshot_variances();
        let true_var = tv.iter().sum::<f64>() / tv.len() as f64;
        for model in [NoiseModel::CaseI, NoiseModel::CaseII, NoiseModel::CaseIIEm, NoiseModel::CaseIII] {
            let res = sbl_run(&sim.snapshots, &dict, &SblConfig::new(1, model))?;
            let est = res.noise.snapshot_variances();
            let est_var = est.iter().sum::<f64>() / est.len() as f64;
            println!(
                "{:<5} {:<8} {:>5} {:>5} {:>8.1} {:>12.3}",
                case.label(),
                model.label(),
                res.iterations,
                res.converged,
                res.doas_deg(&dict)[0],
                est_var / true_var
            );
        }
    }
    Ok(())
}
