//! Synthetic data: stochastic source amplitudes, heteroscedastic noise
//! levels and snapshots `Y = A X + N`.
//!
//! Complex Gaussian convention: a variable of variance `v` has
//! `E|z|^2 = v`, with independent real and imaginary parts of variance
//! `v / 2` each.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::array::{AngularGrid, SteeringDictionary};
use crate::error::{DoaError, Result};

/// Generator used for every random draw in the crate.
pub type SimRng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> SimRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// splitmix64 finalizer.
fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derives an independent seed from a base seed and a list of stream ids.
pub fn derive_seed(base: u64, stream: &[u64]) -> u64 {
    stream
        .iter()
        .fold(mix64(base), |acc, s| mix64(acc ^ mix64(*s)))
}

/// Structure of the noise standard deviations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum NoiseCase {
    /// One level for every sensor and snapshot.
    #[serde(rename = "I", alias = "1", alias = "i")]
    I,
    /// One level per snapshot.
    #[serde(rename = "II", alias = "2", alias = "ii")]
    II,
    /// One level per sensor and snapshot.
    #[serde(rename = "III", alias = "3", alias = "iii")]
    III,
}

impl NoiseCase {
    pub fn label(&self) -> &'static str {
        match self {
            NoiseCase::I => "I",
            NoiseCase::II => "II",
            NoiseCase::III => "III",
        }
    }
}

impl std::fmt::Display for NoiseCase {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

impl std::str::FromStr for NoiseCase {
    type Err = DoaError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "I" | "1" => Ok(NoiseCase::I),
            "II" | "2" => Ok(NoiseCase::II),
            "III" | "3" => Ok(NoiseCase::III),
            other => Err(DoaError::invalid(format!("unknown noise case '{other}'"))),
        }
    }
}

/// True source directions and powers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SourceScenario {
    pub doas_deg: Vec<f64>,
    pub powers_db: Vec<f64>,
}

impl SourceScenario {
    pub fn new(doas_deg: Vec<f64>, powers_db: Vec<f64>) -> Result<Self> {
        let s = Self {
            doas_deg,
            powers_db,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn single(doa_deg: f64, power_db: f64) -> Self {
        Self {
            doas_deg: vec![doa_deg],
            powers_db: vec![power_db],
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.doas_deg.is_empty() {
            return Err(DoaError::invalid("scenario needs at least one source"));
        }
        if self.doas_deg.len() != self.powers_db.len() {
            return Err(DoaError::invalid(format!(
                "{} DOAs but {} powers",
                self.doas_deg.len(),
                self.powers_db.len()
            )));
        }
        if self
            .doas_deg
            .iter()
            .chain(&self.powers_db)
            .any(|v| !v.is_finite())
        {
            return Err(DoaError::invalid("scenario values must be finite"));
        }
        let mut sorted = self.doas_deg.clone();
        sorted.sort_by(f64::total_cmp);
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(DoaError::invalid("source DOAs must be distinct"));
        }
        Ok(())
    }

    pub fn n_sources(&self) -> usize {
        self.doas_deg.len()
    }

    /// Linear powers `10^(dB / 10)`.
    pub fn powers_linear(&self) -> Vec<f64> {
        self.powers_db.iter().map(|p| 10f64.powf(p / 10.0)).collect()
    }

    /// Grid index of every source; errors if a DOA is off the grid.
    pub fn grid_indices(&self, grid: &AngularGrid) -> Result<Vec<usize>> {
        self.validate()?;
        self.doas_deg
            .iter()
            .map(|d| {
                grid.index_of(*d).ok_or_else(|| {
                    DoaError::invalid(format!("source DOA {d} is not a grid point"))
                })
            })
            .collect()
    }

    /// `E ||A x_l||^2 = N * sum_k gamma_k` for unit-modulus steering vectors.
    pub fn expected_signal_power(&self, n_sensors: usize) -> f64 {
        n_sensors as f64 * self.powers_linear().iter().sum::<f64>()
    }
}

/// Parameters of the noise-level law.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub case: NoiseCase,
    /// Half-width of the uniform law on `log10(sigma)`.
    pub decades: f64,
    pub snr_db: f64,
    /// Rescale the realized standard deviations to mean 1 before SNR scaling.
    #[serde(default = "default_true")]
    pub normalize: bool,
}

fn default_true() -> bool {
    true
}

impl NoiseSpec {
    pub fn new(case: NoiseCase, snr_db: f64) -> Self {
        Self {
            case,
            decades: 1.0,
            snr_db,
            normalize: true,
        }
    }
}

/// N x L matrix of noise standard deviations.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseStdMatrix {
    values: DMatrix<f64>,
}

impl NoiseStdMatrix {
    pub fn new(values: DMatrix<f64>) -> Result<Self> {
        if values.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(DoaError::invalid(
                "noise standard deviations must be finite and nonnegative",
            ));
        }
        Ok(Self { values })
    }

    pub fn constant(n: usize, l: usize, sigma: f64) -> Self {
        Self {
            values: DMatrix::from_element(n, l, sigma),
        }
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    pub fn get(&self, n: usize, l: usize) -> f64 {
        self.values[(n, l)]
    }

    pub fn mean(&self) -> f64 {
        self.values.mean()
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            values: &self.values * c,
        }
    }

    /// Mean over snapshots of `sum_n sigma_nl^2`.
    pub fn mean_snapshot_power(&self) -> f64 {
        self.values.iter().map(|s| s * s).sum::<f64>() / self.values.ncols() as f64
    }

    /// Per-snapshot true noise power `sum_n sigma_nl^2 / N`.
    pub fn snapshot_variances(&self) -> Vec<f64> {
        let n = self.values.nrows() as f64;
        self.values
            .column_iter()
            .map(|c| c.iter().map(|s| s * s).sum::<f64>() / n)
            .collect()
    }

    pub fn is_column_constant(&self) -> bool {
        self.values
            .column_iter()
            .all(|c| c.iter().all(|v| *v == c[0]))
    }

    pub fn is_constant(&self) -> bool {
        let first = self.values[(0, 0)];
        self.values.iter().all(|v| *v == first)
    }
}

/// N x L complex observations, optionally carrying the synthetic truth.
#[derive(Debug, Clone, PartialEq)]
pub struct SnapshotMatrix {
    data: DMatrix<Complex64>,
    pub truth: Option<GroundTruth>,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    pub amplitudes: DMatrix<Complex64>,
    pub noise_std: NoiseStdMatrix,
}

impl SnapshotMatrix {
    pub fn new(data: DMatrix<Complex64>) -> Result<Self> {
        if data.ncols() == 0 || data.nrows() == 0 {
            return Err(DoaError::invalid("snapshot matrix must be non-empty"));
        }
        if data.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(DoaError::invalid("snapshot data must be finite"));
        }
        Ok(Self {
            data,
            truth: None,
            seed: None,
        })
    }

    pub fn data(&self) -> &DMatrix<Complex64> {
        &self.data
    }

    pub fn n_sensors(&self) -> usize {
        self.data.nrows()
    }

    pub fn n_snapshots(&self) -> usize {
        self.data.ncols()
    }

    pub(crate) fn from_parts(
        data: DMatrix<Complex64>,
        truth: Option<GroundTruth>,
        seed: Option<u64>,
    ) -> Self {
        Self { data, truth, seed }
    }
}

fn complex_normal<R: Rng + ?Sized>(rng: &mut R, std: f64) -> Complex64 {
    let s = std * std::f64::consts::FRAC_1_SQRT_2;
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re * s, im * s)
}

/// M x L source amplitudes: zero rows off the source set, i.i.d. circular
/// complex Gaussian rows of variance `10^(p / 10)` on it.
pub fn draw_source_amplitudes<R: Rng + ?Sized>(
    scenario: &SourceScenario,
    grid: &AngularGrid,
    n_snapshots: usize,
    rng: &mut R,
) -> Result<DMatrix<Complex64>> {
    if n_snapshots == 0 {
        return Err(DoaError::invalid("need at least one snapshot"));
    }
    let indices = scenario.grid_indices(grid)?;
    let powers = scenario.powers_linear();
    let mut x = DMatrix::zeros(grid.len(), n_snapshots);
    for (idx, p) in indices.iter().zip(&powers) {
        let std = p.sqrt();
        for l in 0..n_snapshots {
            x[(*idx, l)] = complex_normal(rng, std);
        }
    }
    Ok(x)
}

/// Noise standard deviations `10^u`, `u ~ U(-decades, decades)`, drawn once
/// (case I), per snapshot (case II) or per entry (case III).
pub fn draw_noise_std<R: Rng + ?Sized>(
    spec: &NoiseSpec,
    n_sensors: usize,
    n_snapshots: usize,
    rng: &mut R,
) -> Result<NoiseStdMatrix> {
    if !(spec.decades >= 0.0 && spec.decades.is_finite()) {
        return Err(DoaError::invalid(format!(
            "decades must be >= 0, got {}",
            spec.decades
        )));
    }
    let mut draw = || {
        let u = if spec.decades > 0.0 {
            rng.gen_range(-spec.decades..spec.decades)
        } else {
            0.0
        };
        10f64.powf(u)
    };
    let mut values = DMatrix::zeros(n_sensors, n_snapshots);
    match spec.case {
        NoiseCase::I => values.fill(draw()),
        NoiseCase::II => {
            for l in 0..n_snapshots {
                let s = draw();
                values.column_mut(l).fill(s);
            }
        }
        NoiseCase::III => {
            for l in 0..n_snapshots {
                for n in 0..n_sensors {
                    values[(n, l)] = draw();
                }
            }
        }
    }
    if spec.normalize {
        let mean = values.mean();
        values /= mean;
        if spec.case == NoiseCase::I {
            values.fill(1.0);
        }
    }
    NoiseStdMatrix::new(values)
}

/// Scale factor `c` such that `c * vn` realizes the requested array SNR in
/// expectation over the source prior.
pub fn snr_scale(
    vn: &NoiseStdMatrix,
    scenario: &SourceScenario,
    dict: &SteeringDictionary,
    snr_db: f64,
) -> Result<f64> {
    scenario.grid_indices(dict.grid())?;
    if !snr_db.is_finite() {
        return Err(DoaError::invalid("SNR must be finite"));
    }
    let noise_power = vn.mean_snapshot_power();
    if noise_power <= 0.0 {
        return Err(DoaError::invalid("noise standard deviations are all zero"));
    }
    let signal = scenario.expected_signal_power(dict.n_sensors());
    Ok((signal * 10f64.powf(-snr_db / 10.0) / noise_power).sqrt())
}

pub fn scale_noise_to_snr(
    vn: &NoiseStdMatrix,
    scenario: &SourceScenario,
    dict: &SteeringDictionary,
    snr_db: f64,
) -> Result<NoiseStdMatrix> {
    Ok(vn.scaled(snr_scale(vn, scenario, dict, snr_db)?))
}

/// `y_l = A x_l + n_l` with `n_nl ~ CN(0, sigma_nl^2)`.
pub fn synthesize_snapshots<R: Rng + ?Sized>(
    dict: &SteeringDictionary,
    x: &DMatrix<Complex64>,
    vn: &NoiseStdMatrix,
    rng: &mut R,
) -> Result<SnapshotMatrix> {
    let n = dict.n_sensors();
    if x.nrows() != dict.n_grid() {
        return Err(DoaError::ShapeMismatch(format!(
            "amplitudes have {} rows, dictionary has {} columns",
            x.nrows(),
            dict.n_grid()
        )));
    }
    let l = x.ncols();
    if vn.values().shape() != (n, l) {
        return Err(DoaError::ShapeMismatch(format!(
            "noise std is {:?}, expected ({n}, {l})",
            vn.values().shape()
        )));
    }
    // Only the support of X contributes.
    let support: Vec<usize> = (0..x.nrows())
        .filter(|m| x.row(*m).iter().any(|z| *z != Complex64::new(0.0, 0.0)))
        .collect();
    let mut y = if support.is_empty() {
        DMatrix::zeros(n, l)
    } else {
        dict.columns(&support) * x.select_rows(&support)
    };
    for col in 0..l {
        for row in 0..n {
            let s = vn.get(row, col);
            if s > 0.0 {
                y[(row, col)] += complex_normal(rng, s);
            }
        }
    }
    Ok(SnapshotMatrix::from_parts(
        y,
        Some(GroundTruth {
            amplitudes: x.clone(),
            noise_std: vn.clone(),
        }),
        None,
    ))
}

/// One synthetic realization with everything needed to score it.
#[derive(Debug, Clone)]
pub struct Simulation {
    pub snapshots: SnapshotMatrix,
    /// Noise standard deviations before SNR scaling (mean 1 when normalized).
    pub unit_noise_std: NoiseStdMatrix,
    /// Factor applied to `unit_noise_std` to reach the requested SNR.
    pub noise_scale: f64,
}

impl Simulation {
    pub fn noise_std(&self) -> &NoiseStdMatrix {
        &self
            .snapshots
            .truth
            .as_ref()
            .expect("simulated data carries truth")
            .noise_std
    }
}

/// Draws amplitudes, noise levels and noise from a single seeded stream.
pub fn simulate(
    dict: &SteeringDictionary,
    scenario: &SourceScenario,
    noise: &NoiseSpec,
    n_snapshots: usize,
    seed: u64,
) -> Result<Simulation> {
    let mut rng = rng_from_seed(seed);
    let x = draw_source_amplitudes(scenario, dict.grid(), n_snapshots, &mut rng)?;
    let unit = draw_noise_std(noise, dict.n_sensors(), n_snapshots, &mut rng)?;
    let c = snr_scale(&unit, scenario, dict, noise.snr_db)?;
    let mut snapshots = synthesize_snapshots(dict, &x, &unit.scaled(c), &mut rng)?;
    snapshots.seed = Some(seed);
    Ok(Simulation {
        snapshots,
        unit_noise_std: unit,
        noise_scale: c,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::array::{build_dictionary, ArrayGeometry};

    fn dict(n: usize) -> SteeringDictionary {
        build_dictionary(
            &ArrayGeometry::ula(n, 0.5).unwrap(),
            &AngularGrid::uniform(-90.0, 89.5, 0.5).unwrap(),
        )
    }

    #[test]
    fn amplitude_variance_monte_carlo() {
        let d = dict(4);
        let sc = SourceScenario::single(-3.0, 0.0);
        let mut rng = rng_from_seed(11);
        let x = draw_source_amplitudes(&sc, d.grid(), 10_000, &mut rng).unwrap();
        let idx = d.grid().index_of(-3.0).unwrap();
        let p = x.row(idx).iter().map(|z| z.norm_sqr()).sum::<f64>() / 10_000.0;
        assert!((p - 1.0).abs() < 0.05, "sample power {p}");
        let re = x.row(idx).iter().map(|z| z.re * z.re).sum::<f64>() / 10_000.0;
        assert!((re - 0.5).abs() < 0.05);
        for m in 0..d.n_grid() {
            if m != idx {
                assert!(x.row(m).iter().all(|z| *z == Complex64::new(0.0, 0.0)));
            }
        }
    }

    #[test]
    fn amplitudes_are_deterministic_and_checked() {
        let d = dict(4);
        let sc = SourceScenario::new(vec![-3.0, 2.0], vec![0.0, 3.0]).unwrap();
        let a = draw_source_amplitudes(&sc, d.grid(), 8, &mut rng_from_seed(5)).unwrap();
        let b = draw_source_amplitudes(&sc, d.grid(), 8, &mut rng_from_seed(5)).unwrap();
        assert_eq!(a, b);
        let off = SourceScenario::single(-3.25, 0.0);
        assert!(draw_source_amplitudes(&off, d.grid(), 8, &mut rng_from_seed(5)).is_err());
        assert!(SourceScenario::new(vec![1.0, 1.0], vec![0.0, 0.0]).is_err());
    }

    #[test]
    fn noise_std_structure() {
        let mut rng = rng_from_seed(3);
        let c1 = draw_noise_std(&NoiseSpec::new(NoiseCase::I, 0.0), 20, 50, &mut rng).unwrap();
        assert!(c1.is_constant());
        assert_eq!(c1.mean(), 1.0);

        let c2 = draw_noise_std(&NoiseSpec::new(NoiseCase::II, 0.0), 20, 50, &mut rng).unwrap();
        assert!(c2.is_column_constant());
        assert!(!c2.is_constant());
        assert!((c2.mean() - 1.0).abs() < 1e-12);

        let c3 = draw_noise_std(&NoiseSpec::new(NoiseCase::III, 0.0), 20, 50, &mut rng).unwrap();
        assert!(!c3.is_column_constant());
        assert!((c3.mean() - 1.0).abs() < 1e-12);

        let mut flat = NoiseSpec::new(NoiseCase::III, 0.0);
        flat.decades = 0.0;
        let c4 = draw_noise_std(&flat, 5, 7, &mut rng).unwrap();
        assert!(c4.values().iter().all(|v| *v == 1.0));
    }

    #[test]
    fn unnormalized_draws_span_two_decades() {
        let mut spec = NoiseSpec::new(NoiseCase::II, 0.0);
        spec.normalize = false;
        let v = draw_noise_std(&spec, 3, 2000, &mut rng_from_seed(9)).unwrap();
        let (lo, hi) = v
            .values()
            .iter()
            .fold((f64::MAX, 0.0f64), |(a, b), x| (a.min(*x), b.max(*x)));
        assert!(lo >= 0.1 && hi <= 10.0);
        assert!(hi / lo > 50.0);
    }

    #[test]
    fn snr_scaling_examples() {
        let d = dict(20);
        let ones = NoiseStdMatrix::constant(20, 50, 1.0);
        let sc = SourceScenario::single(-3.0, 0.0);
        let c0 = snr_scale(&ones, &sc, &d, 0.0).unwrap();
        assert!((c0 - 1.0).abs() < 1e-12);
        let c10 = snr_scale(&ones, &sc, &d, -10.0).unwrap();
        assert!((c10 / c0 - 10f64.sqrt()).abs() < 1e-12);

        let three = SourceScenario::new(vec![-3.0, 2.0, 50.0], vec![10.0, 22.0, 20.0]).unwrap();
        let expected = 20.0 * (10.0 + 158.489_319_246_111_35 + 100.0);
        assert!((three.expected_signal_power(20) - expected).abs() < 1e-6);

        let zero = NoiseStdMatrix::constant(20, 50, 0.0);
        assert!(snr_scale(&zero, &sc, &d, 0.0).is_err());
    }

    #[test]
    fn noiseless_synthesis_is_exact() {
        let d = dict(6);
        let sc = SourceScenario::single(10.0, 0.0);
        let mut rng = rng_from_seed(1);
        let x = draw_source_amplitudes(&sc, d.grid(), 4, &mut rng).unwrap();
        let y = synthesize_snapshots(&d, &x, &NoiseStdMatrix::constant(6, 4, 0.0), &mut rng)
            .unwrap();
        let want = d.matrix() * &x;
        assert!((y.data() - want).norm() < 1e-12);
        let bad = NoiseStdMatrix::constant(5, 4, 1.0);
        assert!(synthesize_snapshots(&d, &x, &bad, &mut rng).is_err());
    }

    #[test]
    fn noise_moments_monte_carlo() {
        let d = dict(3);
        let x = DMatrix::zeros(d.n_grid(), 10_000);
        let mut vals = DMatrix::zeros(3, 10_000);
        for l in 0..10_000 {
            vals[(0, l)] = 0.5;
            vals[(1, l)] = 1.0;
            vals[(2, l)] = 3.0;
        }
        let vn = NoiseStdMatrix::new(vals).unwrap();
        let y = synthesize_snapshots(&d, &x, &vn, &mut rng_from_seed(21)).unwrap();
        for (n, s) in [0.5f64, 1.0, 3.0].iter().enumerate() {
            let p = y.data().row(n).iter().map(|z| z.norm_sqr()).sum::<f64>() / 10_000.0;
            assert!((p / (s * s) - 1.0).abs() < 0.05, "row {n}: {p}");
        }
    }

    #[test]
    fn pure_noise_phase_is_uniform() {
        let d = dict(4);
        let x = DMatrix::zeros(d.n_grid(), 2500);
        let mut spec = NoiseSpec::new(NoiseCase::III, 0.0);
        spec.decades = 1.0;
        let mut rng = rng_from_seed(77);
        let vn = draw_noise_std(&spec, 4, 2500, &mut rng).unwrap();
        let y = synthesize_snapshots(&d, &x, &vn, &mut rng).unwrap();
        let mut u: Vec<f64> = y
            .data()
            .iter()
            .map(|z| (z.arg() + std::f64::consts::PI) / (2.0 * std::f64::consts::PI))
            .collect();
        u.sort_by(f64::total_cmp);
        let n = u.len() as f64;
        let ks = u
            .iter()
            .enumerate()
            .map(|(i, v)| ((i as f64 + 1.0) / n - v).abs().max((v - i as f64 / n).abs()))
            .fold(0.0, f64::max);
        // 1% critical value
        assert!(ks < 1.63 / n.sqrt(), "KS statistic {ks}");
    }

    #[test]
    fn realized_snr_matches_target() {
        let d = dict(20);
        let sc = SourceScenario::new(vec![-3.0, 2.0, 50.0], vec![10.0, 22.0, 20.0]).unwrap();
        for case in [NoiseCase::I, NoiseCase::II, NoiseCase::III] {
            let spec = NoiseSpec::new(case, -5.0);
            let sim = simulate(&d, &sc, &spec, 10_000, 4).unwrap();
            let truth = sim.snapshots.truth.as_ref().unwrap();
            let signal = (d.matrix() * &truth.amplitudes).norm_squared();
            let noise = (sim.snapshots.data() - d.matrix() * &truth.amplitudes).norm_squared();
            let snr = 10.0 * (signal / noise).log10();
            assert!((snr + 5.0).abs() < 0.5, "case {case}: realized {snr}");
        }
    }

    #[test]
    fn case_nesting() {
        let mut rng = rng_from_seed(8);
        let c1 = draw_noise_std(&NoiseSpec::new(NoiseCase::I, 0.0), 6, 9, &mut rng).unwrap();
        let c2 = draw_noise_std(&NoiseSpec::new(NoiseCase::II, 0.0), 6, 9, &mut rng).unwrap();
        assert!(c1.is_column_constant());
        assert!(c1.values().iter().all(|v| *v >= 0.0));
        assert!(c2.values().iter().all(|v| *v >= 0.0));
    }

    #[test]
    fn simulation_is_reproducible() {
        let d = dict(8);
        let sc = SourceScenario::single(20.0, 0.0);
        let spec = NoiseSpec::new(NoiseCase::III, -10.0);
        let a = simulate(&d, &sc, &spec, 12, 99).unwrap();
        let b = simulate(&d, &sc, &spec, 12, 99).unwrap();
        assert_eq!(a.snapshots, b.snapshots);
        let c = simulate(&d, &sc, &spec, 12, 100).unwrap();
        assert_ne!(a.snapshots.data(), c.snapshots.data());
    }

    #[test]
    fn derived_seeds_differ() {
        let s: Vec<u64> = (0..100).map(|t| derive_seed(42, &[1, t])).collect();
        let mut sorted = s.clone();
        sorted.sort();
        sorted.dedup();
        assert_eq!(sorted.len(), s.len());
        assert_eq!(derive_seed(42, &[1, 3]), derive_seed(42, &[1, 3]));
        assert_ne!(derive_seed(42, &[1, 3]), derive_seed(42, &[3, 1]));
    }
}
