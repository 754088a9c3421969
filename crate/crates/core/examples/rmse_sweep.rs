//! RMSE against SNR for one source in Case III noise, with the breakdown SNR of
//! each method (highest SNR where the RMSE exceeds 10 deg).
//!
//!     cargo run --release --example rmse_sweep [trials] [out_dir]

use hetdoa::harness::breakdown_snr;
use hetdoa::prelude::*;

fn main() -> Result<()> {
    let mut args = std::env::args().skip(1);
    let mut cfg = ExperimentConfig::parse(include_str!("../configs/rmse_case3.toml"))?;
    cfg.n_trials = args.next().map_or(10, |s| s.parse().expect("trials"));
    let out = args.next();

    let report = run_benchmark(&cfg)?;
    let snrs = cfg.noise.snr_values()?;
    print!("{:>7}", "SNR");
    for m in &cfg.methods {
        print!(" {:>10}", m.name());
    }
    println!();
    for &snr in &snrs {
        print!("{snr:>7.1}");
        for &m in &cfg.methods {
            let c = report.cell(m, NoiseCase::III, snr, 50).expect("cell");
            print!(" {:>10.2}", c.rmse_deg());
        }
        println!();
    }
    for &m in &cfg.methods {
        let b = breakdown_snr(&report.rmse_series(m, NoiseCase::III, 50), 10.0);
        match b {
            Some(s) => println!("{:<10} breaks down at {s} dB", m.name()),
            None => println!("{:<10} never breaks down in this sweep", m.name()),
        }
    }
    if let Some(dir) = out {
        for p in report.write(std::path::Path::new(&dir))? {
            println!("wrote {}", p.display());
        }
    }
    Ok(())
}
