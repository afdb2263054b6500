//! Random-matrix ensembles and initial-state measures: GUE observables,
//! Haar unitaries, Hilbert-Schmidt and Bures density matrices, plus the
//! run configuration shared by the command-line tools.

use crate::error::{Error, Result};
use crate::linalg::{self, CMat, CVec};
use ndarray::Array1;
use ndarray_linalg::QR;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

/// Initial-state measure for environment density matrices.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Measure {
    #[serde(rename = "hs")]
    HilbertSchmidt,
    #[serde(rename = "bures")]
    Bures,
}

impl FromStr for Measure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "hs" => Ok(Measure::HilbertSchmidt),
            "bures" => Ok(Measure::Bures),
            other => Err(Error::Parameter(format!(
                "unknown measure '{other}' (expected 'hs' or 'bures')"
            ))),
        }
    }
}

impl fmt::Display for Measure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Measure::HilbertSchmidt => "hs",
            Measure::Bures => "bures",
        })
    }
}

/// Model sizes and scales for one run.
///
/// The environment splits into n = n_uno + n_obs subsystems: n_uno
/// unobserved, n_obs observed and grouped into m macrofractions of n_mac
/// each. Couplings are g = 1 / sqrt(eta_s * eta_e).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnsembleConfig {
    pub d: usize,
    pub d_s: usize,
    pub eta_e: f64,
    pub eta_s: f64,
    pub n: usize,
    pub n_uno: usize,
    pub n_obs: usize,
    pub m: usize,
    pub n_mac: usize,
    pub measure: Measure,
    pub master_seed: u64,
}

impl EnsembleConfig {
    pub fn validate(&self) -> Result<()> {
        if self.d < 2 {
            return Err(Error::Parameter(format!(
                "environment dimension d = {} must be >= 2",
                self.d
            )));
        }
        if self.d_s < 2 {
            return Err(Error::Parameter(format!(
                "system dimension d_s = {} must be >= 2",
                self.d_s
            )));
        }
        for (name, v) in [("eta_e", self.eta_e), ("eta_s", self.eta_s)] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::Parameter(format!(
                    "{name} = {v} must be positive and finite"
                )));
            }
        }
        if self.n_uno == 0 || self.m == 0 || self.n_mac == 0 {
            return Err(Error::Parameter(
                "n_uno, m and n_mac must all be >= 1".into(),
            ));
        }
        if self.n_obs != self.m * self.n_mac {
            return Err(Error::Parameter(format!(
                "n_obs = {} must equal m * n_mac = {}",
                self.n_obs,
                self.m * self.n_mac
            )));
        }
        if self.n != self.n_uno + self.n_obs {
            return Err(Error::Parameter(format!(
                "n = {} must equal n_uno + n_obs = {}",
                self.n,
                self.n_uno + self.n_obs
            )));
        }
        Ok(())
    }

    /// Coupling strength implied by the two Gaussian widths.
    pub fn g(&self) -> f64 {
        1.0 / (self.eta_s * self.eta_e).sqrt()
    }
}

/// Hermitian observable with its eigendecomposition attached.
#[derive(Clone, Debug)]
pub struct HermitianObservable {
    matrix: CMat,
    eigenvalues: Array1<f64>,
    eigenvectors: CMat,
}

impl HermitianObservable {
    /// Symmetrize and eigendecompose. Eigenvalues come out ascending.
    pub fn new(mut matrix: CMat) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() || matrix.nrows() == 0 {
            return Err(Error::Parameter(format!(
                "observable must be square and nonempty, got {} x {}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        linalg::hermitize(&mut matrix);
        let (eigenvalues, eigenvectors) = linalg::eigh(&matrix)?;
        #[cfg(debug_assertions)]
        {
            let lambda = CMat::from_diag(
                &eigenvalues.mapv(|v| Complex64::new(v, 0.0)),
            );
            let rebuilt = eigenvectors
                .dot(&lambda)
                .dot(&linalg::adjoint(&eigenvectors));
            let scale = linalg::max_abs(&matrix).max(1.0);
            let dev = linalg::max_abs(&(&rebuilt - &matrix)) / scale;
            debug_assert!(dev <= 1e-10, "eigendecomposition deviation {dev}");
            debug_assert!(
                eigenvalues.windows(2).into_iter().all(|w| w[0] <= w[1]),
                "eigenvalues not ascending"
            );
        }
        Ok(HermitianObservable {
            matrix,
            eigenvalues,
            eigenvectors,
        })
    }

    /// Observable already diagonal in the computational basis; the given
    /// order is preserved (it fixes the pointer labels, so it is not sorted).
    pub fn from_diagonal(values: &[f64]) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Parameter("diagonal must be nonempty".into()));
        }
        let d = values.len();
        let mut matrix = CMat::zeros((d, d));
        for (j, &v) in values.iter().enumerate() {
            matrix[(j, j)] = Complex64::new(v, 0.0);
        }
        Ok(HermitianObservable {
            matrix,
            eigenvalues: Array1::from_vec(values.to_vec()),
            eigenvectors: linalg::identity(d),
        })
    }

    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    pub fn eigenvalues(&self) -> &Array1<f64> {
        &self.eigenvalues
    }

    pub fn eigenvectors(&self) -> &CMat {
        &self.eigenvectors
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }
}

/// Density matrix validated on construction: Hermitian, unit trace, purity
/// inside [1/d, 1]. Positivity is spot-checked in debug builds only (it costs
/// an eigendecomposition).
#[derive(Clone, Debug)]
pub struct DensityMatrix {
    matrix: CMat,
    purity: f64,
}

impl DensityMatrix {
    pub fn new(matrix: CMat) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() || matrix.nrows() == 0 {
            return Err(Error::Parameter(format!(
                "density matrix must be square and nonempty, got {} x {}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        let herm_dev = linalg::herm_deviation(&matrix);
        if herm_dev > 1e-12 {
            return Err(Error::Parameter(format!(
                "density matrix not Hermitian: deviation {herm_dev:e}"
            )));
        }
        let tr = linalg::trace(&matrix);
        if (tr.re - 1.0).abs() > 1e-12 || tr.im.abs() > 1e-12 {
            return Err(Error::Parameter(format!(
                "density matrix trace {tr} differs from 1"
            )));
        }
        let d = matrix.nrows();
        let purity = matrix.iter().map(|z| z.norm_sqr()).sum::<f64>();
        let lo = 1.0 / d as f64;
        if purity < lo - 1e-10 || purity > 1.0 + 1e-10 {
            return Err(Error::Parameter(format!(
                "purity {purity} outside [{lo}, 1]"
            )));
        }
        #[cfg(debug_assertions)]
        {
            let (eigs, _) = linalg::eigh(&matrix)?;
            debug_assert!(
                eigs.iter().all(|&e| e >= -1e-10),
                "density matrix not positive semidefinite: min eig {}",
                eigs[0]
            );
        }
        Ok(DensityMatrix { matrix, purity })
    }

    pub fn maximally_mixed(d: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::Parameter("dimension must be positive".into()));
        }
        let mut matrix = CMat::zeros((d, d));
        let w = Complex64::new(1.0 / d as f64, 0.0);
        for j in 0..d {
            matrix[(j, j)] = w;
        }
        DensityMatrix::new(matrix)
    }

    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    pub fn purity(&self) -> f64 {
        self.purity
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }
}

/// GUE sample with density proportional to e^{-(eta/2) tr H^2}: diagonal
/// entries N(0, 1/eta), off-diagonal real and imaginary parts N(0, 1/(2 eta)).
pub fn sample_gue<R: Rng + ?Sized>(
    d: usize,
    eta: f64,
    rng: &mut R,
) -> Result<HermitianObservable> {
    if d == 0 {
        return Err(Error::Parameter("dimension must be positive".into()));
    }
    if !(eta > 0.0) || !eta.is_finite() {
        return Err(Error::Parameter(format!(
            "non-positive eta: GUE width requires eta > 0, got {eta}"
        )));
    }
    let sigma_diag = eta.sqrt().recip();
    let sigma_off = (2.0 * eta).sqrt().recip();
    let mut h = CMat::zeros((d, d));
    for j in 0..d {
        let x: f64 = rng.sample(StandardNormal);
        h[(j, j)] = Complex64::new(sigma_diag * x, 0.0);
        for k in (j + 1)..d {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            let z = Complex64::new(sigma_off * re, sigma_off * im);
            h[(j, k)] = z;
            h[(k, j)] = z.conj();
        }
    }
    HermitianObservable::new(h)
}

fn ginibre<R: Rng + ?Sized>(d: usize, rng: &mut R) -> CMat {
    CMat::from_shape_fn((d, d), |_| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex64::new(re, im)
    })
}

/// Haar-distributed unitary via QR of a Ginibre matrix with the R-diagonal
/// phase absorbed into Q.
pub fn sample_haar_unitary<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Result<CMat> {
    if d == 0 {
        return Err(Error::Parameter("dimension must be positive".into()));
    }
    let z = ginibre(d, rng);
    let (mut q, r) = z.qr().map_err(|e| Error::Linalg(format!("qr failed: {e}")))?;
    for j in 0..d {
        let rjj = r[(j, j)];
        let phase = if rjj.norm() == 0.0 {
            Complex64::new(1.0, 0.0)
        } else {
            rjj / rjj.norm()
        };
        for i in 0..d {
            q[(i, j)] *= phase;
        }
    }
    Ok(q)
}

/// Random density matrix under the given measure.
///
/// Hilbert-Schmidt: G G^dag normalized. Bures: (I + U) G G^dag (I + U)^dag
/// normalized, with U Haar.
pub fn sample_state<R: Rng + ?Sized>(
    d: usize,
    measure: Measure,
    rng: &mut R,
) -> Result<DensityMatrix> {
    if d == 0 {
        return Err(Error::Parameter("dimension must be positive".into()));
    }
    let g = ginibre(d, rng);
    let mut w = match measure {
        Measure::HilbertSchmidt => {
            let gh = linalg::adjoint(&g);
            g.dot(&gh)
        }
        Measure::Bures => {
            let u = sample_haar_unitary(d, rng)?;
            let mut iu = u;
            for j in 0..d {
                iu[(j, j)] += 1.0;
            }
            let a = iu.dot(&g);
            let ah = linalg::adjoint(&a);
            a.dot(&ah)
        }
    };
    linalg::hermitize(&mut w);
    let tr = linalg::trace(&w).re;
    if !(tr > 0.0) || !tr.is_finite() {
        return Err(Error::Internal(format!(
            "state normalization trace {tr} not positive"
        )));
    }
    w.mapv_inplace(|z| z / tr);
    // Nudge the trace to exactly 1 ulp-wise so downstream checks see 1.
    let tr2 = linalg::trace(&w).re;
    if tr2 != 1.0 {
        w.mapv_inplace(|z| z / tr2);
    }
    DensityMatrix::new(w)
}

/// Normalized Gaussian vector: Haar-uniform pure state.
pub fn sample_pure_state<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Result<CVec> {
    if d == 0 {
        return Err(Error::Parameter("dimension must be positive".into()));
    }
    loop {
        let mut v = CVec::from_shape_fn(d, |_| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            Complex64::new(re, im)
        });
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-150 {
            v.mapv_inplace(|z| z / norm);
            return Ok(v);
        }
    }
}

/// Wigner semicircle radius 2 sqrt(d / eta) for GUE(d, eta).
pub fn semicircle_radius(d: usize, eta: f64) -> Result<f64> {
    if d == 0 || !(eta > 0.0) || !eta.is_finite() {
        return Err(Error::Parameter(format!(
            "semicircle radius needs d >= 1 and eta > 0, got d = {d}, eta = {eta}"
        )));
    }
    Ok(2.0 * (d as f64 / eta).sqrt())
}

/// CDF of the semicircle law on [-R, R]:
///   F(x) = 1/2 + x sqrt(R^2 - x^2) / (pi R^2) + asin(x / R) / pi.
pub fn semicircle_cdf(x: f64, radius: f64) -> f64 {
    if x <= -radius {
        return 0.0;
    }
    if x >= radius {
        return 1.0;
    }
    let r2 = radius * radius;
    0.5 + x * (r2 - x * x).sqrt() / (std::f64::consts::PI * r2)
        + (x / radius).asin() / std::f64::consts::PI
}

/// Density of the semicircle law: 2 sqrt(R^2 - x^2) / (pi R^2) inside [-R, R].
pub fn semicircle_density(x: f64, radius: f64) -> f64 {
    if x.abs() >= radius {
        return 0.0;
    }
    2.0 * (radius * radius - x * x).sqrt() / (std::f64::consts::PI * radius * radius)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{domain, substream};
    use approx::assert_abs_diff_eq;

    fn config() -> EnsembleConfig {
        EnsembleConfig {
            d: 4,
            d_s: 2,
            eta_e: 1.0,
            eta_s: 4.0,
            n: 3,
            n_uno: 1,
            n_obs: 2,
            m: 2,
            n_mac: 1,
            measure: Measure::Bures,
            master_seed: 7,
        }
    }

    /// Two-sample Kolmogorov-Smirnov statistic.
    fn ks_two_sample(a: &mut [f64], b: &mut [f64]) -> f64 {
        a.sort_by(|x, y| x.partial_cmp(y).unwrap());
        b.sort_by(|x, y| x.partial_cmp(y).unwrap());
        let (n, m) = (a.len(), b.len());
        let (mut i, mut j, mut d) = (0usize, 0usize, 0.0f64);
        while i < n && j < m {
            if a[i] <= b[j] {
                i += 1;
            } else {
                j += 1;
            }
            d = d.max((i as f64 / n as f64 - j as f64 / m as f64).abs());
        }
        d
    }

    /// Asymptotic Kolmogorov p-value with Stephens' small-sample correction.
    fn ks_p_value(d: f64, n: usize, m: usize) -> f64 {
        let ne = (n * m) as f64 / (n + m) as f64;
        let lambda = (ne.sqrt() + 0.12 + 0.11 / ne.sqrt()) * d;
        let mut p = 0.0;
        for k in 1..=100 {
            let term = 2.0 * (-2.0 * (k as f64) * (k as f64) * lambda * lambda).exp();
            p += if k % 2 == 1 { term } else { -term };
        }
        p.clamp(0.0, 1.0)
    }

    #[test]
    fn config_validation() {
        let good = config();
        assert!(good.validate().is_ok());
        assert_abs_diff_eq!(good.g(), 0.5, epsilon = 1e-15);

        let mut bad = config();
        bad.n = 5;
        assert!(bad.validate().is_err());
        bad = config();
        bad.n_obs = 3;
        assert!(bad.validate().is_err());
        bad = config();
        bad.eta_e = 0.0;
        assert!(bad.validate().is_err());
        bad = config();
        bad.d = 1;
        assert!(bad.validate().is_err());
    }

    #[test]
    fn measure_round_trips_through_serde_and_strings() {
        for (m, s) in [(Measure::HilbertSchmidt, "hs"), (Measure::Bures, "bures")] {
            assert_eq!(m.to_string(), s);
            assert_eq!(s.parse::<Measure>().unwrap(), m);
            assert_eq!(serde_json::to_string(&m).unwrap(), format!("\"{s}\""));
            assert_eq!(
                serde_json::from_str::<Measure>(&format!("\"{s}\"")).unwrap(),
                m
            );
        }
        assert!("haar".parse::<Measure>().is_err());
    }

    #[test]
    fn gue_matches_prescribed_variances() {
        let mut rng = substream(11, domain::TEST, 0);
        let (d, eta, samples) = (20usize, 2.5f64, 300usize);
        let (mut diag_sq, mut off_re_sq, mut off_im_sq) = (0.0, 0.0, 0.0);
        let (mut n_diag, mut n_off) = (0usize, 0usize);
        for _ in 0..samples {
            let h = sample_gue(d, eta, &mut rng).unwrap();
            let m = h.matrix();
            for j in 0..d {
                diag_sq += m[(j, j)].re * m[(j, j)].re;
                n_diag += 1;
                for k in (j + 1)..d {
                    off_re_sq += m[(j, k)].re * m[(j, k)].re;
                    off_im_sq += m[(j, k)].im * m[(j, k)].im;
                    n_off += 1;
                }
            }
        }
        let var_diag = diag_sq / n_diag as f64;
        let var_off_re = off_re_sq / n_off as f64;
        let var_off_im = off_im_sq / n_off as f64;
        assert!((var_diag - 1.0 / eta).abs() < 0.1 / eta, "diag {var_diag}");
        assert!(
            (var_off_re - 0.5 / eta).abs() < 0.04 / eta,
            "off re {var_off_re}"
        );
        assert!(
            (var_off_im - 0.5 / eta).abs() < 0.04 / eta,
            "off im {var_off_im}"
        );
    }

    #[test]
    fn gue_offdiagonal_is_gaussian_by_ks() {
        let mut rng = substream(13, domain::TEST, 0);
        let mut a = Vec::with_capacity(1000);
        let (d, eta) = (10usize, 3.0f64);
        'outer: loop {
            let h = sample_gue(d, eta, &mut rng).unwrap();
            for j in 0..d {
                for k in (j + 1)..d {
                    a.push(h.matrix()[(j, k)].re * (2.0 * eta).sqrt());
                    if a.len() == 1000 {
                        break 'outer;
                    }
                }
            }
        }
        let mut b: Vec<f64> = (0..1000)
            .map(|_| rng.sample::<f64, _>(StandardNormal))
            .collect();
        let ks = ks_two_sample(&mut a, &mut b);
        let p = ks_p_value(ks, 1000, 1000);
        assert!(p > 0.01, "KS = {ks}, p = {p}");
    }

    #[test]
    fn gue_eigendecomposition_is_consistent() {
        let mut rng = substream(17, domain::TEST, 0);
        let h = sample_gue(6, 1.0, &mut rng).unwrap();
        assert!(h
            .eigenvalues()
            .windows(2)
            .into_iter()
            .all(|w| w[0] <= w[1]));
        // Rebuild from the decomposition.
        let lam = CMat::from_diag(&h.eigenvalues().mapv(|v| Complex64::new(v, 0.0)));
        let rebuilt = h.eigenvectors().dot(&lam).dot(&linalg::adjoint(h.eigenvectors()));
        assert!(linalg::max_abs(&(&rebuilt - h.matrix())) < 1e-12);
        // Exactly Hermitian by construction.
        assert_eq!(linalg::herm_deviation(h.matrix()), 0.0);
    }

    #[test]
    fn haar_unitary_is_unitary_and_uniform_in_first_entry() {
        let mut rng = substream(19, domain::TEST, 0);
        let u = sample_haar_unitary(5, &mut rng).unwrap();
        let uhu = linalg::adjoint(&u).dot(&u);
        let dev = linalg::max_abs(&(&uhu - &linalg::identity(5)));
        assert!(dev < 1e-12, "U^dag U deviates by {dev}");

        // For d = 2, |U_00|^2 is uniform on [0, 1].
        let mut a: Vec<f64> = (0..800)
            .map(|_| {
                let u = sample_haar_unitary(2, &mut rng).unwrap();
                u[(0, 0)].norm_sqr()
            })
            .collect();
        let mut b: Vec<f64> = (0..800).map(|_| rng.random::<f64>()).collect();
        let ks = ks_two_sample(&mut a, &mut b);
        let p = ks_p_value(ks, 800, 800);
        assert!(p > 0.01, "KS = {ks}, p = {p}");
    }

    #[test]
    fn sampled_states_are_valid_for_both_measures() {
        let mut rng = substream(23, domain::TEST, 0);
        for measure in [Measure::HilbertSchmidt, Measure::Bures] {
            for d in [1usize, 2, 5, 9] {
                let rho = sample_state(d, measure, &mut rng).unwrap();
                assert_eq!(rho.dim(), d);
                let tr = linalg::trace(rho.matrix());
                assert_abs_diff_eq!(tr.re, 1.0, epsilon = 1e-12);
                assert!(rho.purity() <= 1.0 + 1e-10);
                assert!(rho.purity() >= 1.0 / d as f64 - 1e-10);
                if d == 1 {
                    assert_abs_diff_eq!(rho.matrix()[(0, 0)].re, 1.0, epsilon = 1e-14);
                    assert_abs_diff_eq!(rho.purity(), 1.0, epsilon = 1e-14);
                }
            }
        }
    }

    #[test]
    fn pure_states_are_normalized() {
        let mut rng = substream(29, domain::TEST, 0);
        for d in [1usize, 3, 8] {
            let v = sample_pure_state(d, &mut rng).unwrap();
            let norm: f64 = v.iter().map(|z| z.norm_sqr()).sum();
            assert_abs_diff_eq!(norm, 1.0, epsilon = 1e-13);
        }
    }

    #[test]
    fn density_matrix_rejects_bad_inputs() {
        // Non-unit trace.
        let m = CMat::eye(2);
        assert!(DensityMatrix::new(m).is_err());
        // Non-Hermitian.
        let mut m = CMat::zeros((2, 2));
        m[(0, 0)] = Complex64::new(0.5, 0.0);
        m[(1, 1)] = Complex64::new(0.5, 0.0);
        m[(0, 1)] = Complex64::new(0.3, 0.0);
        assert!(DensityMatrix::new(m).is_err());
        // Maximally mixed is fine and has purity 1/d.
        let mm = DensityMatrix::maximally_mixed(4).unwrap();
        assert_abs_diff_eq!(mm.purity(), 0.25, epsilon = 1e-15);
    }

    #[test]
    fn observable_from_diagonal_keeps_order() {
        let values = [1.5, -0.25, 0.0];
        let a = HermitianObservable::from_diagonal(&values).unwrap();
        for (j, &v) in values.iter().enumerate() {
            assert_eq!(a.eigenvalues()[j], v);
            assert_eq!(a.matrix()[(j, j)], Complex64::new(v, 0.0));
        }
        assert_eq!(a.eigenvectors(), &linalg::identity(3));
    }

    #[test]
    fn semicircle_cdf_and_density_are_consistent() {
        let r = semicircle_radius(50, 2.0).unwrap();
        assert_abs_diff_eq!(r, 10.0, epsilon = 1e-15);
        assert_eq!(semicircle_cdf(-r, r), 0.0);
        assert_eq!(semicircle_cdf(r, r), 1.0);
        assert_abs_diff_eq!(semicircle_cdf(0.0, r), 0.5, epsilon = 1e-15);
        // CDF slope matches the density.
        for x in [-7.0, -2.0, 0.3, 6.5] {
            let h = 1e-5;
            let slope = (semicircle_cdf(x + h, r) - semicircle_cdf(x - h, r)) / (2.0 * h);
            assert_abs_diff_eq!(slope, semicircle_density(x, r), epsilon = 1e-7);
        }
        // Mass integrates to 1.
        let total = crate::quad::adaptive(
            |x| semicircle_density(x, r),
            -r,
            r,
            32,
            8,
            1e-10,
            1e-12,
            12,
        )
        .unwrap();
        assert_abs_diff_eq!(total, 1.0, epsilon = 1e-9);
    }

    #[test]
    fn sampling_is_reproducible_per_stream() {
        let mut r1 = substream(31, domain::TEST, 5);
        let mut r2 = substream(31, domain::TEST, 5);
        let h1 = sample_gue(4, 1.0, &mut r1).unwrap();
        let h2 = sample_gue(4, 1.0, &mut r2).unwrap();
        assert_eq!(h1.matrix(), h2.matrix());
        let s1 = sample_state(3, Measure::Bures, &mut r1).unwrap();
        let s2 = sample_state(3, Measure::Bures, &mut r2).unwrap();
        assert_eq!(s1.matrix(), s2.matrix());
    }
}
