//! Array geometry, DOA grid and steering dictionary.
//!
//! The steering vector of sensor `n` for a plane wave from `theta` is
//! `exp(-j * (omega * d_n / c) * sin(theta))`. Only the product
//! `omega * d_n / c` enters, but geometries keep the physical quantities so
//! non-uniform layouts can be described the same way.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{DoaError, Result};

/// Sound speed used by the wavelength-based constructors, in m/s.
const DEFAULT_SOUND_SPEED: f64 = 1500.0;
/// Wavelength used by the wavelength-based constructors, in m.
const DEFAULT_WAVELENGTH: f64 = 1.0;

const GRID_MATCH_TOL: f64 = 1e-9;

/// Sensor positions (offsets from the reference element, meters), angular
/// frequency (rad/s) and propagation speed (m/s).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArrayGeometry {
    positions: Vec<f64>,
    frequency: f64,
    sound_speed: f64,
}

impl ArrayGeometry {
    pub fn new(positions: Vec<f64>, frequency: f64, sound_speed: f64) -> Result<Self> {
        if positions.len() < 2 {
            return Err(DoaError::invalid(format!(
                "array needs at least 2 sensors, got {}",
                positions.len()
            )));
        }
        if positions.iter().any(|p| !p.is_finite()) {
            return Err(DoaError::invalid("sensor positions must be finite"));
        }
        if !(frequency > 0.0 && frequency.is_finite()) {
            return Err(DoaError::invalid(format!("frequency must be > 0, got {frequency}")));
        }
        if !(sound_speed > 0.0 && sound_speed.is_finite()) {
            return Err(DoaError::invalid(format!(
                "sound speed must be > 0, got {sound_speed}"
            )));
        }
        Ok(Self {
            positions,
            frequency,
            sound_speed,
        })
    }

    /// Uniform linear array with `spacing_wavelengths` between neighbours.
    pub fn ula(n_sensors: usize, spacing_wavelengths: f64) -> Result<Self> {
        if n_sensors < 2 {
            return Err(DoaError::invalid(format!(
                "array needs at least 2 sensors, got {n_sensors}"
            )));
        }
        if !(spacing_wavelengths > 0.0 && spacing_wavelengths.is_finite()) {
            return Err(DoaError::invalid(format!(
                "spacing must be > 0, got {spacing_wavelengths}"
            )));
        }
        let wavelength = DEFAULT_WAVELENGTH;
        let frequency = 2.0 * PI * DEFAULT_SOUND_SPEED / wavelength;
        let positions = (0..n_sensors)
            .map(|n| n as f64 * spacing_wavelengths * wavelength)
            .collect();
        Self::new(positions, frequency, DEFAULT_SOUND_SPEED)
    }

    pub fn n_sensors(&self) -> usize {
        self.positions.len()
    }

    pub fn positions(&self) -> &[f64] {
        &self.positions
    }

    pub fn frequency(&self) -> f64 {
        self.frequency
    }

    pub fn sound_speed(&self) -> f64 {
        self.sound_speed
    }

    pub fn wavelength(&self) -> f64 {
        2.0 * PI * self.sound_speed / self.frequency
    }

    /// Electrical phase factors `omega * d_n / c` for every sensor.
    pub fn phase_factors(&self) -> Vec<f64> {
        let k = self.frequency / self.sound_speed;
        self.positions.iter().map(|d| k * d).collect()
    }

    /// Phase increment between neighbours when the sensors are equally
    /// spaced (up to a common offset), `None` otherwise.
    pub(crate) fn uniform_phase_step(&self) -> Option<f64> {
        let phases = self.phase_factors();
        let step = phases[1] - phases[0];
        let scale = phases.iter().fold(1.0_f64, |acc, p| acc.max(p.abs()));
        let uniform = phases
            .iter()
            .enumerate()
            .all(|(n, p)| ((p - phases[0]) - n as f64 * step).abs() <= 1e-12 * scale);
        uniform.then_some(step)
    }
}

/// Strictly increasing list of candidate DOAs in degrees, all in [-90, 90].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AngularGrid {
    angles_deg: Vec<f64>,
}

impl AngularGrid {
    pub fn new(angles_deg: Vec<f64>) -> Result<Self> {
        if angles_deg.len() < 2 {
            return Err(DoaError::invalid("grid needs at least 2 angles"));
        }
        if angles_deg
            .iter()
            .any(|a| !a.is_finite() || *a < -90.0 || *a > 90.0)
        {
            return Err(DoaError::invalid("grid angles must lie in [-90, 90] degrees"));
        }
        if angles_deg.windows(2).any(|w| w[1] <= w[0]) {
            return Err(DoaError::invalid("grid angles must be strictly increasing"));
        }
        Ok(Self { angles_deg })
    }

    /// Inclusive, uniformly spaced grid from `min_deg` to `max_deg`.
    pub fn uniform(min_deg: f64, max_deg: f64, step_deg: f64) -> Result<Self> {
        if !(step_deg > 0.0 && step_deg.is_finite()) {
            return Err(DoaError::invalid(format!("grid step must be > 0, got {step_deg}")));
        }
        if !(min_deg < max_deg) {
            return Err(DoaError::invalid(format!(
                "grid bounds inverted: min {min_deg} >= max {max_deg}"
            )));
        }
        let intervals = (max_deg - min_deg) / step_deg;
        let rounded = intervals.round();
        if (intervals - rounded).abs() > 1e-9 {
            return Err(DoaError::invalid(format!(
                "step {step_deg} does not divide the span [{min_deg}, {max_deg}]"
            )));
        }
        let count = rounded as usize + 1;
        let angles = (0..count)
            .map(|m| {
                if m + 1 == count {
                    max_deg
                } else {
                    min_deg + m as f64 * step_deg
                }
            })
            .collect();
        Self::new(angles)
    }

    pub fn len(&self) -> usize {
        self.angles_deg.len()
    }

    pub fn is_empty(&self) -> bool {
        self.angles_deg.is_empty()
    }

    pub fn angles_deg(&self) -> &[f64] {
        &self.angles_deg
    }

    pub fn angle(&self, index: usize) -> f64 {
        self.angles_deg[index]
    }

    /// Index of the grid point equal to `angle_deg` (to 1e-9 degrees).
    pub fn index_of(&self, angle_deg: f64) -> Option<usize> {
        let pos = self
            .angles_deg
            .partition_point(|a| *a < angle_deg - GRID_MATCH_TOL);
        (pos < self.angles_deg.len()
            && (self.angles_deg[pos] - angle_deg).abs() <= GRID_MATCH_TOL)
            .then_some(pos)
    }
}

/// Steering vector for a single direction.
pub fn steering_vector(geom: &ArrayGeometry, theta_deg: f64) -> Result<DVector<Complex64>> {
    if !(-90.0..=90.0).contains(&theta_deg) {
        return Err(DoaError::invalid(format!(
            "DOA {theta_deg} outside [-90, 90] degrees"
        )));
    }
    let s = theta_deg.to_radians().sin();
    Ok(DVector::from_iterator(
        geom.n_sensors(),
        geom.phase_factors()
            .into_iter()
            .map(|k| Complex64::from_polar(1.0, -k * s)),
    ))
}

/// The N x M matrix of steering vectors over a grid.
///
/// For equally spaced sensors, quadratic forms `a_m^H Q a_m` and the
/// covariance `A diag(g) A^H` are evaluated through lag sums, which is what
/// keeps the Monte Carlo harness cheap. Other geometries use dense products.
#[derive(Debug, Clone)]
pub struct SteeringDictionary {
    matrix: DMatrix<Complex64>,
    geometry: ArrayGeometry,
    grid: AngularGrid,
    /// `lags[m * n + d] = exp(-j * phi_m * d)`, present for uniform arrays.
    lags: Option<Vec<Complex64>>,
}

impl SteeringDictionary {
    pub fn new(geometry: ArrayGeometry, grid: AngularGrid) -> Self {
        let n = geometry.n_sensors();
        let m = grid.len();
        let phases = geometry.phase_factors();
        let sines: Vec<f64> = grid
            .angles_deg()
            .iter()
            .map(|a| a.to_radians().sin())
            .collect();
        let matrix = DMatrix::from_fn(n, m, |row, col| {
            Complex64::from_polar(1.0, -phases[row] * sines[col])
        });
        let lags = geometry.uniform_phase_step().map(|step| {
            let mut table = Vec::with_capacity(n * m);
            for s in &sines {
                let phi = step * s;
                table.extend((0..n).map(|d| Complex64::from_polar(1.0, -phi * d as f64)));
            }
            table
        });
        Self {
            matrix,
            geometry,
            grid,
            lags,
        }
    }

    /// Same dictionary with the lag-sum fast path disabled.
    pub fn dense(geometry: ArrayGeometry, grid: AngularGrid) -> Self {
        let mut dict = Self::new(geometry, grid);
        dict.lags = None;
        dict
    }

    pub fn n_sensors(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn n_grid(&self) -> usize {
        self.matrix.ncols()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn geometry(&self) -> &ArrayGeometry {
        &self.geometry
    }

    pub fn grid(&self) -> &AngularGrid {
        &self.grid
    }

    pub fn column(&self, m: usize) -> DVector<Complex64> {
        self.matrix.column(m).into_owned()
    }

    /// Columns of the dictionary at the given grid indices.
    pub fn columns(&self, indices: &[usize]) -> DMatrix<Complex64> {
        self.matrix.select_columns(indices)
    }

    /// `Re(a_m^H Q a_m)` for every grid point. `q` must be Hermitian.
    pub fn quadratic_forms(&self, q: &DMatrix<Complex64>) -> Vec<f64> {
        let n = self.n_sensors();
        match &self.lags {
            Some(lags) => {
                // q_d = sum_i Q[i, i + d]; a^H Q a = Re q_0 + 2 Re sum_d q_d e^{-j phi d}
                let diag_sums: Vec<Complex64> = (0..n)
                    .map(|d| (0..n - d).map(|i| q[(i, i + d)]).sum())
                    .collect();
                lags.chunks_exact(n)
                    .map(|row| {
                        let mut acc = diag_sums[0].re;
                        for d in 1..n {
                            acc += 2.0 * (diag_sums[d] * row[d]).re;
                        }
                        acc
                    })
                    .collect()
            }
            None => (0..self.n_grid())
                .map(|m| {
                    let a = self.matrix.column(m);
                    let qa = q * a;
                    a.dotc(&qa).re
                })
                .collect(),
        }
    }

    /// `A diag(weights) A^H`, skipping zero weights.
    pub fn weighted_gram(&self, weights: &[f64]) -> DMatrix<Complex64> {
        let n = self.n_sensors();
        match &self.lags {
            Some(lags) => {
                // Toeplitz: entry (i, k) depends on i - k only.
                let mut t = vec![Complex64::new(0.0, 0.0); n];
                for (w, row) in weights.iter().zip(lags.chunks_exact(n)) {
                    if *w == 0.0 {
                        continue;
                    }
                    for (acc, z) in t.iter_mut().zip(row) {
                        *acc += z * *w;
                    }
                }
                DMatrix::from_fn(n, n, |i, k| {
                    if i >= k {
                        t[i - k]
                    } else {
                        t[k - i].conj()
                    }
                })
            }
            None => {
                let mut out = DMatrix::zeros(n, n);
                for (m, w) in weights.iter().enumerate() {
                    if *w == 0.0 {
                        continue;
                    }
                    let a = self.matrix.column(m);
                    out.gerc(Complex64::new(*w, 0.0), &a, &a, Complex64::new(1.0, 0.0));
                }
                out
            }
        }
    }

    /// `A^H v` for a single vector.
    pub fn adjoint_apply(&self, v: &DVector<Complex64>) -> DVector<Complex64> {
        self.matrix.ad_mul(v)
    }
}

/// Builds the dictionary for `geom` over `grid`.
pub fn build_dictionary(geom: &ArrayGeometry, grid: &AngularGrid) -> SteeringDictionary {
    SteeringDictionary::new(geom.clone(), grid.clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn ula_half_wavelength_phases() {
        let g = ArrayGeometry::ula(20, 0.5).unwrap();
        for (n, k) in g.phase_factors().iter().enumerate() {
            assert_abs_diff_eq!(*k, PI * n as f64, epsilon = 1e-9);
        }
        let g2 = ArrayGeometry::ula(2, 0.5).unwrap();
        assert_abs_diff_eq!(g2.positions()[1], g2.wavelength() / 2.0, epsilon = 1e-12);
        let g3 = ArrayGeometry::ula(20, 1.0).unwrap();
        assert_abs_diff_eq!(g3.phase_factors()[3], 6.0 * PI, epsilon = 1e-9);
    }

    #[test]
    fn ula_rejects_bad_input() {
        assert!(ArrayGeometry::ula(1, 0.5).is_err());
        assert!(ArrayGeometry::ula(4, 0.0).is_err());
        assert!(ArrayGeometry::ula(4, -1.0).is_err());
        assert!(ArrayGeometry::new(vec![0.0, f64::NAN], 1.0, 1.0).is_err());
        assert!(ArrayGeometry::new(vec![0.0, 1.0], 0.0, 1.0).is_err());
    }

    #[test]
    fn grid_counts() {
        assert_eq!(AngularGrid::uniform(-90.0, 90.0, 0.5).unwrap().len(), 361);
        let g = AngularGrid::uniform(-90.0, 89.5, 0.5).unwrap();
        assert_eq!(g.len(), 360);
        assert_eq!(g.angle(359), 89.5);
        assert_eq!(
            AngularGrid::uniform(0.0, 10.0, 5.0).unwrap().angles_deg(),
            &[0.0, 5.0, 10.0]
        );
        assert!(AngularGrid::uniform(10.0, 0.0, 5.0).is_err());
        assert!(AngularGrid::uniform(0.0, 10.0, 3.0).is_err());
        assert!(AngularGrid::new(vec![0.0, 0.0, 1.0]).is_err());
        assert!(AngularGrid::new(vec![-91.0, 0.0]).is_err());
    }

    #[test]
    fn grid_index_lookup() {
        let g = AngularGrid::uniform(-90.0, 89.5, 0.5).unwrap();
        assert_eq!(g.index_of(-3.0), Some(174));
        assert_eq!(g.index_of(50.0), Some(280));
        assert_eq!(g.index_of(-3.25), None);
        assert_eq!(g.index_of(90.0), None);
    }

    #[test]
    fn steering_examples() {
        let g = ArrayGeometry::ula(20, 0.5).unwrap();
        let a0 = steering_vector(&g, 0.0).unwrap();
        assert!(a0.iter().all(|z| (z - Complex64::new(1.0, 0.0)).norm() < 1e-15));
        let a30 = steering_vector(&g, 30.0).unwrap();
        for (n, z) in a30.iter().enumerate() {
            let want = Complex64::from_polar(1.0, -PI * n as f64 / 2.0);
            assert!((z - want).norm() < 1e-12);
        }
        assert_abs_diff_eq!(a30.norm_squared(), 20.0, epsilon = 1e-12);
        assert!(steering_vector(&g, 90.5).is_err());
    }

    #[test]
    fn conjugate_symmetry() {
        let g = ArrayGeometry::ula(12, 0.5).unwrap();
        for theta in [3.0, 17.5, 42.0, 89.0] {
            let p = steering_vector(&g, theta).unwrap();
            let q = steering_vector(&g, -theta).unwrap();
            for (x, y) in p.iter().zip(q.iter()) {
                assert!((x.conj() - y).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn dictionary_columns() {
        let geom = ArrayGeometry::ula(20, 0.5).unwrap();
        let grid = AngularGrid::uniform(-90.0, 90.0, 0.5).unwrap();
        let dict = build_dictionary(&geom, &grid);
        assert_eq!((dict.n_sensors(), dict.n_grid()), (20, 361));
        let zero = grid.index_of(0.0).unwrap();
        assert!(dict
            .column(zero)
            .iter()
            .all(|z| (z - Complex64::new(1.0, 0.0)).norm() < 1e-15));
        for m in 0..dict.n_grid() {
            let col = dict.column(m);
            assert!(col.iter().all(|z| (z.norm() - 1.0).abs() < 1e-12));
            assert!((col.norm_squared() - 20.0).abs() < 1e-9 * 20.0);
        }
        let again = build_dictionary(&geom, &grid);
        assert_eq!(dict.matrix(), again.matrix());
    }

    #[test]
    fn reordered_grid_permutes_columns() {
        let geom = ArrayGeometry::ula(6, 0.5).unwrap();
        let a = build_dictionary(&geom, &AngularGrid::new(vec![-10.0, 5.0, 30.0]).unwrap());
        let b = build_dictionary(&geom, &AngularGrid::new(vec![-10.0, 20.0, 30.0]).unwrap());
        assert_eq!(a.column(0), b.column(0));
        assert_eq!(a.column(2), b.column(2));
    }

    fn random_hermitian(n: usize, seed: u64) -> DMatrix<Complex64> {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let b = DMatrix::from_fn(n, n, |_, _| {
            Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        });
        &b * b.adjoint()
    }

    #[test]
    fn lag_sums_match_dense_products() {
        let geom = ArrayGeometry::ula(9, 0.5).unwrap();
        let grid = AngularGrid::uniform(-90.0, 90.0, 2.5).unwrap();
        let fast = SteeringDictionary::new(geom.clone(), grid.clone());
        let dense = SteeringDictionary::dense(geom, grid);
        let q = random_hermitian(9, 7);
        for (x, y) in fast.quadratic_forms(&q).iter().zip(dense.quadratic_forms(&q)) {
            assert!((x - y).abs() < 1e-9 * y.abs().max(1.0));
        }
        let w: Vec<f64> = (0..fast.n_grid()).map(|m| (m % 5) as f64 * 0.3).collect();
        let diff = fast.weighted_gram(&w) - dense.weighted_gram(&w);
        assert!(diff.norm() < 1e-9);
    }

    #[test]
    fn non_uniform_geometry_uses_dense_path() {
        let geom = ArrayGeometry::new(vec![0.0, 0.4, 1.3, 1.7], 2.0 * PI * 1500.0, 1500.0).unwrap();
        assert!(geom.uniform_phase_step().is_none());
        let grid = AngularGrid::uniform(-60.0, 60.0, 10.0).unwrap();
        let dict = build_dictionary(&geom, &grid);
        let q = random_hermitian(4, 3);
        let forms = dict.quadratic_forms(&q);
        let a = dict.column(5);
        let want = a.dotc(&(&q * &a)).re;
        assert!((forms[5] - want).abs() < 1e-12 * want.abs().max(1.0));
    }
}
