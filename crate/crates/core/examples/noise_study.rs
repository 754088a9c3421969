//! How fast the Case II noise estimates of SBL2 and SBL2-EM approach the true
//! per-snapshot variance. Prints the mean ratio estimate/truth per iteration.
//!
//!     cargo run --release --example noise_study [trials] [out_dir]

use hetdoa::prelude::*;

fn main() -> Result<()> {
    let mut args = std::env::args().skip(1);
    let mut cfg = ExperimentConfig::parse(include_str!("../configs/noise_study.toml"))?;
    cfg.n_trials = args.next().map_or(5, |s| s.parse().expect("trials"));
    let out = args.next();

    let report = run_noise_study(&cfg)?;
    for cell in &report.cells {
        println!("SNR {} dB, L = {}", cell.snr_db, cell.n_snapshots);
        for e in &cell.estimators {
            let tr = e.mean_trace();
            let head: Vec<String> = tr.iter().take(6).map(|r| format!("{r:.3}")).collect();
            println!(
                "  {:<8} iterations {:>3}  first [{}]  final {:.3}",
                e.method.name(),
                tr.len(),
                head.join(" "),
                e.converged_mean()
            );
        }
    }
    if let Some(dir) = out {
        report.write(std::path::Path::new(&dir))?;
    }
    Ok(())
}
