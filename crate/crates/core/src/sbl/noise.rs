//! Noise variance estimators.
//!
//! All estimators work on the residual `(I - P) y_l` left after projecting
//! out the active steering vectors, except the EM-style update which uses
//! the posterior moments over the whole grid. Every variance is clamped to a floor so the data
//! covariances stay invertible.

use nalgebra::DMatrix;

use super::posterior::snapshot_covariance;
use super::{GammaSpectrum, NoiseModel};
use crate::array::SteeringDictionary;
use crate::error::{DoaError, Result};
use crate::linalg::CMatrix;
use crate::synthesis::SnapshotMatrix;

/// Per-sensor, per-snapshot noise variances (N x L) plus the model that
/// produced them.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseEstimate {
    variances: DMatrix<f64>,
    model: NoiseModel,
}

impl NoiseEstimate {
    pub fn new(variances: DMatrix<f64>, model: NoiseModel) -> Result<Self> {
        if variances.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(DoaError::invalid("noise variances must be finite and positive"));
        }
        Ok(Self { variances, model })
    }

    pub fn constant(n: usize, l: usize, var: f64) -> Self {
        Self {
            variances: DMatrix::from_element(n, l, var),
            model: NoiseModel::CaseI,
        }
    }

    pub fn variances(&self) -> &DMatrix<f64> {
        &self.variances
    }

    pub fn model(&self) -> NoiseModel {
        self.model
    }

    pub fn n_snapshots(&self) -> usize {
        self.variances.ncols()
    }

    /// Per-snapshot variance averaged over sensors.
    pub fn snapshot_variances(&self) -> Vec<f64> {
        self.variances.column_iter().map(|c| c.mean()).collect()
    }

    /// Standard deviations `sqrt(var)`, N x L.
    pub fn std_devs(&self) -> DMatrix<f64> {
        self.variances.map(f64::sqrt)
    }

    pub fn is_constant(&self) -> bool {
        let first = self.variances[(0, 0)];
        self.variances.iter().all(|v| *v == first)
    }

    pub fn is_column_constant(&self) -> bool {
        self.variances
            .column_iter()
            .all(|c| c.iter().all(|v| *v == c[0]))
    }
}

fn residual(y: &SnapshotMatrix, p: Option<&CMatrix>) -> Result<CMatrix> {
    match p {
        None => Ok(y.data().clone()),
        Some(p) => {
            if p.shape() != (y.n_sensors(), y.n_sensors()) {
                return Err(DoaError::ShapeMismatch("projector size".into()));
            }
            Ok(y.data() - p * y.data())
        }
    }
}

fn check_k(n: usize, k: usize) -> Result<()> {
    if k >= n {
        return Err(DoaError::invalid(format!("need K < N, got K = {k}, N = {n}")));
    }
    Ok(())
}

/// Single variance `tr[(I - P) S_y] / (N - K)`, replicated over N x L.
/// `p = None` stands for `P = 0`.
pub fn noise_estimate_case1(
    y: &SnapshotMatrix,
    p: Option<&CMatrix>,
    k: usize,
    floor: f64,
) -> Result<NoiseEstimate> {
    let (n, l) = y.data().shape();
    check_k(n, k)?;
    let r = residual(y, p)?;
    let var = (r.norm_squared() / (l * (n - k)) as f64).max(floor);
    Ok(NoiseEstimate {
        variances: DMatrix::from_element(n, l, var),
        model: NoiseModel::CaseI,
    })
}

/// Per-snapshot variance `||(I - P) y_l||^2 / (N - K)`.
pub fn noise_estimate_case2(
    y: &SnapshotMatrix,
    p: Option<&CMatrix>,
    k: usize,
    floor: f64,
) -> Result<NoiseEstimate> {
    let (n, l) = y.data().shape();
    check_k(n, k)?;
    let r = residual(y, p)?;
    let mut variances = DMatrix::zeros(n, l);
    for (col, rc) in r.column_iter().enumerate() {
        let var = (rc.norm_squared() / (n - k) as f64).max(floor);
        variances.column_mut(col).fill(var);
    }
    Ok(NoiseEstimate {
        variances,
        model: NoiseModel::CaseII,
    })
}

/// Per-entry variance: the diagonal of `(I - P) y_l y_l^H (I - P)`, i.e.
/// `|[(I - P) y_l]_n|^2`. With `P = 0` this is `|y_nl|^2`.
pub fn noise_estimate_case3(
    y: &SnapshotMatrix,
    p: Option<&CMatrix>,
    floor: f64,
) -> Result<NoiseEstimate> {
    let r = residual(y, p)?;
    Ok(NoiseEstimate {
        variances: r.map(|z| z.norm_sqr().max(floor)),
        model: NoiseModel::CaseIII,
    })
}

/// EM-style per-snapshot update
/// `(||y_l - A x_l||^2 + s_old * sum_i (1 - Sx_ii / gamma_i)) / N`
/// over the whole grid. With `Sx = Gamma - Gamma A^H Sy^-1 A Gamma` the sum is
/// `tr(Sy^-1 A Gamma A^H) = N - s_old tr(Sy^-1)` and the residual is
/// `s_old Sy^-1 y_l`, so zero powers drop out without dividing by them.
pub fn noise_estimate_em(
    y: &SnapshotMatrix,
    dict: &SteeringDictionary,
    gamma: &GammaSpectrum,
    noise_old: &NoiseEstimate,
    floor: f64,
) -> Result<NoiseEstimate> {
    if gamma.support().is_empty() {
        return Err(DoaError::InvalidState(
            "EM noise update needs at least one nonzero source power".into(),
        ));
    }
    let (n, l) = y.data().shape();
    let gram = dict.weighted_gram(gamma.values());
    let mut variances = DMatrix::zeros(n, l);
    for col in 0..l {
        let old = noise_old.variances()[(0, col)];
        let f = snapshot_covariance(&gram, noise_old, col)?;
        let w = f.solve(&y.data().column(col).into_owned());
        let resid = old * old * w.norm_squared();
        let tr_inv: f64 = f.inverse().diagonal().iter().map(|z| z.re).sum();
        let dof = n as f64 - old * tr_inv;
        let var = (resid + old * dof) / n as f64;
        variances.column_mut(col).fill(var.max(floor));
    }
    Ok(NoiseEstimate {
        variances,
        model: NoiseModel::CaseIIEm,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::array::{build_dictionary, AngularGrid, ArrayGeometry};
    use crate::sbl::projection_matrix;
    use crate::synthesis::{simulate, NoiseCase, NoiseSpec, SourceScenario};
    use num_complex::Complex64;

    fn dict() -> SteeringDictionary {
        build_dictionary(
            &ArrayGeometry::ula(20, 0.5).unwrap(),
            &AngularGrid::uniform(-90.0, 89.5, 0.5).unwrap(),
        )
    }

    fn sim(case: NoiseCase, seed: u64) -> SnapshotMatrix {
        simulate(
            &dict(),
            &SourceScenario::new(vec![-3.0, 50.0], vec![0.0, 0.0]).unwrap(),
            &NoiseSpec::new(case, 0.0),
            30,
            seed,
        )
        .unwrap()
        .snapshots
    }

    #[test]
    fn case1_without_projection_is_mean_power() {
        let y = sim(NoiseCase::I, 1);
        let e = noise_estimate_case1(&y, None, 0, 1e-300).unwrap();
        let want = y.data().norm_squared() / 600.0;
        assert!((e.variances()[(3, 7)] - want).abs() < 1e-12 * want);
        assert!(e.is_constant());
        assert!(noise_estimate_case1(&y, None, 20, 1e-300).is_err());
    }

    #[test]
    fn in_span_data_hits_floor() {
        let d = dict();
        let active = [174, 280];
        let x = CMatrix::from_fn(2, 5, |i, j| Complex64::new(i as f64 + 1.0, j as f64));
        let y = SnapshotMatrix::new(d.columns(&active) * x).unwrap();
        let p = projection_matrix(&d, &active).unwrap();
        let floor = 1e-6;
        let e1 = noise_estimate_case1(&y, Some(&p), 2, floor).unwrap();
        assert_eq!(e1.variances()[(0, 0)], floor);
        let e2 = noise_estimate_case2(&y, Some(&p), 2, floor).unwrap();
        assert!(e2.variances().iter().all(|v| *v == floor));
        let e3 = noise_estimate_case3(&y, Some(&p), floor).unwrap();
        assert!(e3.variances().iter().all(|v| *v == floor));
    }

    #[test]
    fn case2_averages_to_case1() {
        let d = dict();
        let y = sim(NoiseCase::I, 2);
        let p = projection_matrix(&d, &[174, 280]).unwrap();
        let e1 = noise_estimate_case1(&y, Some(&p), 2, 1e-300).unwrap();
        let e2 = noise_estimate_case2(&y, Some(&p), 2, 1e-300).unwrap();
        assert!(e2.is_column_constant());
        let mean: f64 = e2.snapshot_variances().iter().sum::<f64>() / 30.0;
        assert!((mean - e1.variances()[(0, 0)]).abs() < 1e-12 * mean);
    }

    #[test]
    fn case3_is_diagonal_of_rank_one_residual() {
        let d = dict();
        let y = sim(NoiseCase::III, 3);
        let p = projection_matrix(&d, &[174]).unwrap();
        let e = noise_estimate_case3(&y, Some(&p), 1e-300).unwrap();
        let ip = CMatrix::identity(20, 20) - &p;
        for l in [0, 11, 29] {
            let r = &ip * y.data().column(l);
            let full = &r * r.adjoint();
            for n in 0..20 {
                assert!((e.variances()[(n, l)] - full[(n, n)].re).abs() < 1e-10 * full[(n, n)].re);
            }
        }
        let raw = noise_estimate_case3(&y, None, 1e-300).unwrap();
        for (v, z) in raw.std_devs().iter().zip(y.data().iter()) {
            assert!((v - z.norm()).abs() < 1e-12 * z.norm());
        }
    }

    #[test]
    fn case3_averages_to_case1_on_constant_noise() {
        let d = build_dictionary(
            &ArrayGeometry::ula(20, 0.5).unwrap(),
            &AngularGrid::uniform(-90.0, 89.5, 0.5).unwrap(),
        );
        let y = simulate(
            &d,
            &SourceScenario::single(-3.0, 0.0),
            &NoiseSpec::new(NoiseCase::I, -10.0),
            2000,
            4,
        )
        .unwrap()
        .snapshots;
        let p = projection_matrix(&d, &[174]).unwrap();
        let e1 = noise_estimate_case1(&y, Some(&p), 1, 1e-300).unwrap();
        let e3 = noise_estimate_case3(&y, Some(&p), 1e-300).unwrap();
        // the per-entry residual is not rescaled by N / (N - K)
        let mean3 = e3.variances().mean() * 20.0 / 19.0;
        assert!((mean3 / e1.variances()[(0, 0)] - 1.0).abs() < 0.02);
    }

    #[test]
    fn em_requires_support() {
        let d = dict();
        let y = sim(NoiseCase::II, 5);
        let noise = noise_estimate_case2(&y, None, 0, 1e-12).unwrap();
        let g = GammaSpectrum::zeros(d.n_grid());
        let err = noise_estimate_em(&y, &d, &g, &noise, 1e-12).unwrap_err();
        assert!(matches!(err, DoaError::InvalidState(_)));
    }

    #[test]
    fn em_exact_fit_has_no_residual_term() {
        // Huge source power at the true index: the posterior mean
        // reproduces noise-free data and only the trace term remains.
        let d = dict();
        let idx = 174;
        let x = CMatrix::from_fn(1, 4, |_, j| Complex64::new(1.0 + j as f64, -0.5));
        let y = SnapshotMatrix::new(d.columns(&[idx]) * x).unwrap();
        let mut g = vec![0.0; d.n_grid()];
        g[idx] = 1e8;
        let g = GammaSpectrum::new(g).unwrap();
        let noise = NoiseEstimate::new(DMatrix::from_element(20, 4, 1e-3), NoiseModel::CaseII)
            .unwrap();
        let e = noise_estimate_em(&y, &d, &g, &noise, 1e-300).unwrap();
        for l in 0..4 {
            // residual ~ 0, one degree of freedom taken by the source => 1e-3 / 20
            let v = e.variances()[(0, l)];
            assert!((v - 1e-3 / 20.0).abs() < 1e-8, "{v}");
        }
    }

    #[test]
    fn em_vanishing_powers_give_data_power() {
        let d = dict();
        let y = sim(NoiseCase::II, 6);
        let mut g = vec![0.0; d.n_grid()];
        g[174] = 1e-14;
        let g = GammaSpectrum::new(g).unwrap();
        let noise = noise_estimate_case2(&y, None, 0, 1e-12).unwrap();
        let e = noise_estimate_em(&y, &d, &g, &noise, 1e-12).unwrap();
        for l in 0..30 {
            let want = y.data().column(l).norm_squared() / 20.0;
            assert!((e.variances()[(0, l)] - want).abs() < 1e-6 * want);
        }
    }

    #[test]
    fn em_matches_full_posterior_sum() {
        // small grid where the M x M posterior is cheap to form directly
        let d = build_dictionary(
            &ArrayGeometry::ula(6, 0.5).unwrap(),
            &AngularGrid::uniform(-80.0, 80.0, 10.0).unwrap(),
        );
        let m = d.n_grid();
        let y = simulate(&d, &SourceScenario::single(10.0, 0.0), &NoiseSpec::new(NoiseCase::II, 0.0), 4, 8)
            .unwrap()
            .snapshots;
        let g: Vec<f64> = (0..m).map(|i| 0.05 + 0.1 * (i % 5) as f64).collect();
        let gamma = GammaSpectrum::new(g.clone()).unwrap();
        let old = DMatrix::from_fn(6, 4, |_, l| 0.5 + 0.25 * l as f64);
        let noise = NoiseEstimate::new(old.clone(), NoiseModel::CaseII).unwrap();
        let e = noise_estimate_em(&y, &d, &gamma, &noise, 1e-12).unwrap();
        let a = d.matrix();
        for l in 0..4 {
            let s = old[(0, l)];
            let mut info = a.ad_mul(a) / Complex64::new(s, 0.0);
            for i in 0..m {
                info[(i, i)] += Complex64::new(1.0 / g[i], 0.0);
            }
            let sx = info.try_inverse().unwrap();
            let x = &sx * a.adjoint() * y.data().column(l) / Complex64::new(s, 0.0);
            let resid = (y.data().column(l) - a * x).norm_squared();
            let shrink: f64 = (0..m).map(|i| sx[(i, i)].re / g[i]).sum();
            let want = (resid + s * (m as f64 - shrink)) / 6.0;
            let got = e.variances()[(0, l)];
            assert!((got - want).abs() < 1e-9 * want, "{got} vs {want}");
        }
    }
}
