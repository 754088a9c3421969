use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use hetdoa::array::{build_dictionary, AngularGrid, ArrayGeometry};
use hetdoa::error::{DoaError, Result};
use hetdoa::harness::{plot, run_benchmark, run_noise_study, with_threads, ExperimentConfig};
use hetdoa::io::{read_snapshots, sbl_gamma_csv, spectrum_csv, write_snapshots, SblRunMeta};
use hetdoa::methods::{run_method, Method, SolverSettings};
use hetdoa::synthesis::simulate;

#[derive(Parser)]
#[command(name = "hetdoa", version, about = "DOA estimation under heteroscedastic noise")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Draw one realization from a config and write a snapshot container
    Simulate(SimulateArgs),
    /// Run one method on a snapshot container and write its spectrum
    Spectrum(SpectrumArgs),
    /// Monte Carlo RMSE sweep
    Benchmark(RunArgs),
    /// Noise-variance ratio study for SBL2 and SBL2-EM
    NoiseStudy(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    /// Overrides base_seed
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides output_dir
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, env = "HETDOA_THREADS")]
    threads: Option<usize>,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Container file name inside the output directory (.json or .csv)
    #[arg(long, default_value = "snapshots.json")]
    name: String,
}

#[derive(Args)]
struct SpectrumArgs {
    /// Snapshot container (.json or .csv)
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value = "CBF")]
    method: Method,
    /// Number of sources to look for
    #[arg(long, default_value_t = 1)]
    sources: usize,
    /// Optional experiment config supplying array geometry, grid and solver settings
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

fn load(path: &Path, seed: Option<u64>, out: Option<PathBuf>) -> Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::load(path)?;
    if let Some(s) = seed {
        cfg.base_seed = s;
    }
    if let Some(o) = out {
        cfg.output_dir = o;
    }
    Ok(cfg)
}

fn report(files: &[PathBuf]) {
    for f in files {
        println!("wrote {}", f.display());
    }
}

fn simulate_cmd(a: SimulateArgs) -> Result<()> {
    let cfg = load(&a.config, a.seed, a.out)?;
    let dict = cfg.dictionary()?;
    let snr = cfg.noise.snr_values()?[0];
    let spec = cfg.noise.spec(cfg.noise.cases[0], snr);
    let sim = simulate(&dict, &cfg.scenario, &spec, cfg.snapshots[0], cfg.base_seed)?;
    std::fs::create_dir_all(&cfg.output_dir)?;
    let path = cfg.output_dir.join(&a.name);
    write_snapshots(&path, &sim.snapshots)?;
    report(&[path]);
    Ok(())
}

fn spectrum_cmd(a: SpectrumArgs) -> Result<()> {
    let y = read_snapshots(&a.input)?;
    let (dict, settings) = match &a.config {
        Some(p) => {
            let cfg = ExperimentConfig::load(p)?;
            (cfg.dictionary()?, cfg.solver_settings())
        }
        None => (
            build_dictionary(
                &ArrayGeometry::ula(y.n_sensors(), 0.5)?,
                &AngularGrid::uniform(-90.0, 89.5, 0.5)?,
            ),
            SolverSettings::default(),
        ),
    };
    if dict.n_sensors() != y.n_sensors() {
        return Err(DoaError::Config(format!(
            "container has {} sensors but the array has {}",
            y.n_sensors(),
            dict.n_sensors()
        )));
    }
    let out = run_method(a.method, &y, &dict, a.sources, &settings)?;
    std::fs::create_dir_all(&a.out)?;
    let mut files = vec![a.out.join("spectrum.csv"), a.out.join("spectrum.gp")];
    std::fs::write(&files[0], spectrum_csv(&out.spectrum))?;
    std::fs::write(&files[1], plot::spectrum_script("spectrum.csv", "spectrum.png"))?;
    if let Some(res) = &out.sbl {
        let meta = SblRunMeta::new(a.method.name(), res, &dict, y.seed);
        let g = a.out.join("sbl_gamma.csv");
        let m = a.out.join("sbl_meta.json");
        std::fs::write(&g, sbl_gamma_csv(res, &dict))?;
        std::fs::write(&m, serde_json::to_string_pretty(&meta).expect("meta serializes"))?;
        files.extend([g, m]);
    }
    report(&files);
    let doas: Vec<String> = out.estimate.angles_deg.iter().map(|d| d.to_string()).collect();
    println!("{}: DOA estimate [{}] deg", a.method, doas.join(", "));
    Ok(())
}

fn benchmark_cmd(a: RunArgs) -> Result<bool> {
    let cfg = load(&a.config, a.seed, a.out)?;
    let rep = with_threads(a.threads, || run_benchmark(&cfg))??;
    report(&rep.write(&cfg.output_dir)?);
    let failed = rep.failed_cells().count();
    if failed > 0 {
        eprintln!("{failed} cells had more than 10% failed trials");
    }
    Ok(failed == 0)
}

fn noise_study_cmd(a: RunArgs) -> Result<()> {
    let cfg = load(&a.config, a.seed, a.out)?;
    let rep = with_threads(a.threads, || run_noise_study(&cfg))??;
    report(&rep.write(&cfg.output_dir)?);
    for c in &rep.cells {
        for e in &c.estimators {
            println!(
                "SNR {} dB, L {}: {} converged mean ratio {:.3}",
                c.snr_db,
                c.n_snapshots,
                e.method,
                e.converged_mean()
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let res = match cli.cmd {
        Cmd::Simulate(a) => simulate_cmd(a).map(|_| true),
        Cmd::Spectrum(a) => spectrum_cmd(a).map(|_| true),
        Cmd::Benchmark(a) => benchmark_cmd(a),
        Cmd::NoiseStudy(a) => noise_study_cmd(a).map(|_| true),
    };
    match res {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(3),
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_numeric() {
                ExitCode::from(3)
            } else {
                ExitCode::from(2)
            }
        }
    }
}
