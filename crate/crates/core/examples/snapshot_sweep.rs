//! RMSE against the number of snapshots at a fixed SNR.
//!
//!     cargo run --release --example snapshot_sweep [trials]

use hetdoa::prelude::*;

fn main() -> Result<()> {
    let mut cfg = ExperimentConfig::parse(include_str!("../configs/snapshot_sweep.toml"))?;
    cfg.n_trials = std::env::args().nth(1).map_or(10, |s| s.parse().expect("trials"));
    let report = run_benchmark(&cfg)?;
    let snr = cfg.noise.snr_values()?[0];
    println!("Case III, SNR {snr} dB, {} trials per cell", cfg.n_trials);
    println!("{:>5} {:>10} {:>10}", "L", cfg.methods[0].name(), cfg.methods[1].name());
    for &l in &cfg.snapshots {
        let r: Vec<f64> = cfg
            .methods
            .iter()
            .map(|m| report.cell(*m, NoiseCase::III, snr, l).expect("cell").rmse_deg())
            .collect();
        println!("{l:>5} {:>10.2} {:>10.2}", r[0], r[1]);
    }
    Ok(())
}
