//! Closed-form spectrum averages for the dephasing model.
//!
//! Everything here is a function of the environment dimension d, an initial
//! purity p, and the dimensionless detuning-time. The two observables are the
//! decoherence factor (squared phase-trace) and the superfidelity upper bound
//! on macrofraction fidelity; both average to
//!   floor + f(dt) * coefficient
//! where f is a Laguerre pair sum damped by a Gaussian, f(0) = d(d-1)/2, and
//! the floors are reached as f -> 0.

use crate::ensembles::Measure;
use crate::error::{Error, Result};
use crate::quad::KahanSum;
use crate::specfun::MAX_DIM;

/// Dimensionless detuning-time: (pointer gap) * time / sqrt(eta_E).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DeltaTilde(f64);

impl DeltaTilde {
    pub fn new(value: f64) -> Result<Self> {
        if !value.is_finite() {
            return Err(Error::Parameter(format!(
                "detuning-time must be finite, got {value}"
            )));
        }
        Ok(DeltaTilde(value))
    }

    pub fn from_gap_time(gap: f64, t: f64, eta_e: f64) -> Result<Self> {
        if !(eta_e > 0.0) || !eta_e.is_finite() {
            return Err(Error::Parameter(format!(
                "eta_e must be positive and finite, got {eta_e}"
            )));
        }
        DeltaTilde::new(gap * t / eta_e.sqrt())
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// Where an initial-purity value came from. Averaged formulas are exact for
/// the measure averages; `Fixed`/`Sampled` plug a concrete purity into the
/// same expressions.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PuritySource {
    HsAverage,
    BuresAverage,
    Fixed,
    Sampled,
}

/// Initial-state purity tr(rho^2) together with its provenance.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Purity {
    value: f64,
    source: PuritySource,
}

impl Purity {
    pub fn hs_average(d: usize) -> Result<Self> {
        Ok(Purity {
            value: purity_avg(Measure::HilbertSchmidt, d)?,
            source: PuritySource::HsAverage,
        })
    }

    pub fn bures_average(d: usize) -> Result<Self> {
        Ok(Purity {
            value: purity_avg(Measure::Bures, d)?,
            source: PuritySource::BuresAverage,
        })
    }

    pub fn measure_average(measure: Measure, d: usize) -> Result<Self> {
        match measure {
            Measure::HilbertSchmidt => Purity::hs_average(d),
            Measure::Bures => Purity::bures_average(d),
        }
    }

    pub fn fixed(value: f64) -> Result<Self> {
        if !value.is_finite() || value <= 0.0 || value > 1.0 + 1e-10 {
            return Err(Error::Parameter(format!(
                "purity must lie in (0, 1], got {value}"
            )));
        }
        Ok(Purity { value, source: PuritySource::Fixed })
    }

    pub fn sampled(value: f64) -> Result<Self> {
        let p = Purity::fixed(value)?;
        Ok(Purity { source: PuritySource::Sampled, ..p })
    }

    pub fn value(self) -> f64 {
        self.value
    }

    pub fn source(self) -> PuritySource {
        self.source
    }

    /// A purity is only meaningful for dimension d if it lies in [1/d, 1].
    pub fn check_for_dim(self, d: usize) -> Result<()> {
        let lo = 1.0 / d as f64;
        if self.value < lo - 1e-10 || self.value > 1.0 + 1e-10 {
            return Err(Error::Parameter(format!(
                "purity {} incompatible with dimension {d}: valid range [{lo}, 1]",
                self.value
            )));
        }
        Ok(())
    }
}

/// Which averaged quantity a curve or floor refers to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FactorKind {
    Decoherence,
    Superfidelity,
}

/// Measure average of the initial purity over d-dimensional density matrices.
pub fn purity_avg(measure: Measure, d: usize) -> Result<f64> {
    if d == 0 {
        return Err(Error::Parameter("dimension must be positive".into()));
    }
    let df = d as f64;
    Ok(match measure {
        Measure::HilbertSchmidt => 2.0 * df / (df * df + 1.0),
        Measure::Bures => (5.0 * df * df + 1.0) / (2.0 * df * (df * df + 2.0)),
    })
}

fn check_formula_dim(d: usize) -> Result<()> {
    if !(2..=MAX_DIM).contains(&d) {
        return Err(Error::Parameter(format!(
            "environment dimension {d} outside 2..={MAX_DIM}"
        )));
    }
    Ok(())
}

/// Laguerre pair sum P(d, x) with x = (detuning-time)^2:
///   sum_{n<m<d} [ L_n(x) L_m(x) - (n!/m!) x^{m-n} (L_n^{(m-n)}(x))^2 ].
/// P(d, 0) = d(d-1)/2 exactly (every bracket is 1 - 0 at x = 0).
pub fn p_poly(d: usize, x: f64) -> Result<f64> {
    check_formula_dim(d)?;
    if !(x >= 0.0) || !x.is_finite() {
        return Err(Error::Parameter(format!(
            "squared detuning-time must be >= 0 and finite, got {x}"
        )));
    }
    // One table pass: lag[alpha][n] = L_n^{(alpha)}(x) for alpha, n < d.
    let mut lag = vec![vec![0.0_f64; d]; d];
    for (alpha, col) in lag.iter_mut().enumerate() {
        let a = alpha as f64;
        col[0] = 1.0;
        if d > 1 {
            col[1] = 1.0 + a - x;
            for n in 1..d - 1 {
                let nf = n as f64;
                col[n + 1] =
                    ((2.0 * nf + 1.0 + a - x) * col[n] - (nf + a) * col[n - 1]) / (nf + 1.0);
            }
        }
    }
    let mut acc = KahanSum::new();
    for n in 0..d {
        for m in (n + 1)..d {
            acc.add(lag[0][n] * lag[0][m]);
        }
    }
    // Grouped by j = m - n so the factorial ratio and x^j update incrementally.
    // (ratio * x^j) is applied before squaring the Laguerre value; for d <= 64
    // and x <= ~6e3 every factor stays inside f64 range.
    for j in 1..d {
        let xj = x.powi(j as i32);
        let mut fr = 1.0; // n!/(n+j)! at n = 0
        for k in 1..=j {
            fr /= k as f64;
        }
        for n in 0..d - j {
            let l = lag[j][n];
            acc.add(-(fr * xj) * l * l);
            let nf = n as f64;
            fr *= (nf + 1.0) / (nf + 1.0 + j as f64);
        }
    }
    let p = acc.value();
    if !p.is_finite() {
        return Err(Error::Envelope(format!(
            "pair sum overflowed at d = {d}, x = {x}"
        )));
    }
    Ok(p)
}

/// Spectrum-average f(dt) = P(d, dt^2) e^{-dt^2}. Even in dt; f(0) = d(d-1)/2.
///
/// Beyond dt^2 >= 745 the value is returned as exactly 0: there
/// |P| e^{-x} <= e^{-300} for every d <= 64, far below any tolerance used by
/// callers, and e^{-x} itself leaves the f64 normal range.
pub fn f_avg(d: usize, delta: DeltaTilde) -> Result<f64> {
    check_formula_dim(d)?;
    let x = delta.value() * delta.value();
    if x >= 745.0 {
        return Ok(0.0);
    }
    Ok(p_poly(d, x)? * (-x).exp())
}

/// Spectrum-averaged decoherence factor:
///   (1+p)/(d+1) + f(dt) * 2(d-p) / (d(d^2-1)).
pub fn gamma_avg(d: usize, purity: Purity, delta: DeltaTilde) -> Result<f64> {
    check_formula_dim(d)?;
    purity.check_for_dim(d)?;
    let (df, p) = (d as f64, purity.value());
    let f = f_avg(d, delta)?;
    Ok((1.0 + p) / (df + 1.0) + f * 2.0 * (df - p) / (df * (df * df - 1.0)))
}

/// Spectrum-averaged superfidelity:
///   (1-p) + (1+p)/(d+1) + f(dt) * 2(dp-1) / (d(d^2-1)).
pub fn superfid_avg(d: usize, purity: Purity, delta: DeltaTilde) -> Result<f64> {
    check_formula_dim(d)?;
    purity.check_for_dim(d)?;
    let (df, p) = (d as f64, purity.value());
    let f = f_avg(d, delta)?;
    Ok((1.0 - p) + (1.0 + p) / (df + 1.0) + f * 2.0 * (df * p - 1.0) / (df * (df * df - 1.0)))
}

/// Long-time floor of the averaged decoherence factor.
pub fn gamma_floor(d: usize, purity: Purity) -> Result<f64> {
    check_formula_dim(d)?;
    purity.check_for_dim(d)?;
    Ok((1.0 + purity.value()) / (d as f64 + 1.0))
}

/// Long-time floor of the averaged superfidelity.
pub fn superfid_floor(d: usize, purity: Purity) -> Result<f64> {
    check_formula_dim(d)?;
    purity.check_for_dim(d)?;
    Ok((1.0 - purity.value()) + (1.0 + purity.value()) / (d as f64 + 1.0))
}

pub fn factor_avg(kind: FactorKind, d: usize, purity: Purity, delta: DeltaTilde) -> Result<f64> {
    match kind {
        FactorKind::Decoherence => gamma_avg(d, purity, delta),
        FactorKind::Superfidelity => superfid_avg(d, purity, delta),
    }
}

pub fn factor_floor(kind: FactorKind, d: usize, purity: Purity) -> Result<f64> {
    match kind {
        FactorKind::Decoherence => gamma_floor(d, purity),
        FactorKind::Superfidelity => superfid_floor(d, purity),
    }
}

/// Macrofraction factor: the single-environment average raised to the number
/// of independent environments in the fraction.
pub fn macro_factor(
    kind: FactorKind,
    d: usize,
    purity: Purity,
    delta: DeltaTilde,
    n: u32,
) -> Result<f64> {
    if n == 0 {
        return Err(Error::Parameter("macrofraction size must be >= 1".into()));
    }
    Ok(factor_avg(kind, d, purity, delta)?.powi(n as i32))
}

/// Gaussian short-time form of the macrofraction factor,
/// exp(-n * dt^2 * (d - p)) resp. exp(-n * dt^2 * (dp - 1)).
pub fn shorttime_macro(
    kind: FactorKind,
    d: usize,
    purity: Purity,
    delta: DeltaTilde,
    n: u32,
) -> Result<f64> {
    if n == 0 {
        return Err(Error::Parameter("macrofraction size must be >= 1".into()));
    }
    check_formula_dim(d)?;
    purity.check_for_dim(d)?;
    let (df, p) = (d as f64, purity.value());
    let coef = match kind {
        FactorKind::Decoherence => df - p,
        FactorKind::Superfidelity => df * p - 1.0,
    };
    Ok((-(n as f64) * delta.value() * delta.value() * coef).exp())
}

/// Gaussian-regime timescales of the two macrofraction factors, plus the
/// constants of the per-pair decay time sqrt(eta_E) / (sqrt(d+1) |gap|).
#[derive(Clone, Copy, Debug)]
pub struct TauScales {
    pub tau_dec: f64,
    pub tau_fid: f64,
    sqrt_eta_e: f64,
    d: usize,
}

impl TauScales {
    pub fn ratio(&self) -> f64 {
        self.tau_fid / self.tau_dec
    }

    pub fn sqrt_eta_e(&self) -> f64 {
        self.sqrt_eta_e
    }

    pub fn sqrt_d_plus_one(&self) -> f64 {
        (self.d as f64 + 1.0).sqrt()
    }

    /// Coefficient c in the per-pair decay time c / |gap|.
    pub fn pair_coefficient(&self) -> f64 {
        self.sqrt_eta_e / self.sqrt_d_plus_one()
    }

    pub fn tau_pair(&self, gap: f64) -> Result<f64> {
        if gap == 0.0 || !gap.is_finite() {
            return Err(Error::Parameter(format!(
                "pointer gap must be nonzero and finite, got {gap}"
            )));
        }
        Ok(self.pair_coefficient() / gap.abs())
    }
}

/// Timescales for a given ensemble, using the measure-averaged purity:
///   tau_dec = [8 g^2 N_uno d_S (d - p)]^{-1/2}
///   tau_fid = [8 g^2 N_mac d_S (d p - 1)]^{-1/2}
pub fn tau_scales(config: &crate::ensembles::EnsembleConfig) -> Result<TauScales> {
    config.validate()?;
    check_formula_dim(config.d)?;
    let p = purity_avg(config.measure, config.d)?;
    let g2 = config.g() * config.g();
    let (df, dsf) = (config.d as f64, config.d_s as f64);
    let dec_coef = 8.0 * g2 * config.n_uno as f64 * dsf * (df - p);
    let fid_coef = 8.0 * g2 * config.n_mac as f64 * dsf * (df * p - 1.0);
    if dec_coef <= 0.0 || fid_coef <= 0.0 {
        return Err(Error::Parameter(
            "timescales undefined: purity at or below 1/d".into(),
        ));
    }
    Ok(TauScales {
        tau_dec: dec_coef.sqrt().recip(),
        tau_fid: fid_coef.sqrt().recip(),
        sqrt_eta_e: config.eta_e.sqrt(),
        d: config.d,
    })
}

/// Single-exponential ansatz for the decoherence factor:
///   (1+p)/(d+1) + ((d-p)/(d+1)) e^{-(d+1) dt^2}.
/// Equals the exact average at dt = 0 and dominates it pointwise.
pub fn ansatz_gamma(d: usize, purity: Purity, delta: DeltaTilde) -> Result<f64> {
    check_formula_dim(d)?;
    purity.check_for_dim(d)?;
    let (df, p) = (d as f64, purity.value());
    let e = (-(df + 1.0) * delta.value() * delta.value()).exp();
    Ok((1.0 + p) / (df + 1.0) + (df - p) / (df + 1.0) * e)
}

/// Single-exponential ansatz for the superfidelity:
///   (1-p) + (1+p)/(d+1) + ((dp-1)/(d+1)) e^{-(d+1) dt^2}.
pub fn ansatz_superfid(d: usize, purity: Purity, delta: DeltaTilde) -> Result<f64> {
    check_formula_dim(d)?;
    purity.check_for_dim(d)?;
    let (df, p) = (d as f64, purity.value());
    let e = (-(df + 1.0) * delta.value() * delta.value()).exp();
    Ok((1.0 - p) + (1.0 + p) / (df + 1.0) + (df * p - 1.0) / (df + 1.0) * e)
}

pub fn ansatz_factor(kind: FactorKind, d: usize, purity: Purity, delta: DeltaTilde) -> Result<f64> {
    match kind {
        FactorKind::Decoherence => ansatz_gamma(d, purity, delta),
        FactorKind::Superfidelity => ansatz_superfid(d, purity, delta),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensembles::EnsembleConfig;
    use crate::specfun::laguerre;
    use approx::assert_abs_diff_eq;

    /// Partially summed form of the pair sum, used only as a cross-check:
    ///   L_{d-1}^{(1)} L_{d-2}^{(1)} - sum_{n<=d-2} L_n L_n^{(1)}
    ///   - sum_{n<m} (n!/m!) x^{m-n} (L_n^{(m-n)})^2.
    fn p_poly_partially_summed(d: usize, x: f64) -> f64 {
        let mut acc = KahanSum::new();
        acc.add(laguerre(d - 1, 1, x) * laguerre(d - 2, 1, x));
        for n in 0..=d - 2 {
            acc.add(-laguerre(n, 0, x) * laguerre(n, 1, x));
        }
        for n in 0..d {
            for m in (n + 1)..d {
                let j = m - n;
                // n!/m! = 1/((n+1)(n+2)...m), no large factorials involved.
                let mut fr = 1.0;
                for k in (n + 1)..=m {
                    fr /= k as f64;
                }
                let l = laguerre(n, j, x);
                acc.add(-(fr * x.powi(j as i32)) * l * l);
            }
        }
        acc.value()
    }

    #[test]
    fn purity_average_worked_values() {
        assert_eq!(purity_avg(Measure::HilbertSchmidt, 2).unwrap(), 0.8);
        assert_eq!(purity_avg(Measure::Bures, 2).unwrap(), 0.875);
        assert_eq!(purity_avg(Measure::HilbertSchmidt, 1).unwrap(), 1.0);
        assert_eq!(purity_avg(Measure::Bures, 1).unwrap(), 1.0);
        assert_abs_diff_eq!(
            purity_avg(Measure::Bures, 10).unwrap(),
            501.0 / 2040.0,
            epsilon = 1e-16
        );
    }

    #[test]
    fn floor_worked_values() {
        let bures2 = Purity::bures_average(2).unwrap();
        assert_abs_diff_eq!(gamma_floor(2, bures2).unwrap(), 0.625, epsilon = 1e-15);
        let pure = Purity::fixed(1.0).unwrap();
        assert_abs_diff_eq!(gamma_floor(4, pure).unwrap(), 0.4, epsilon = 1e-15);
        let bures10 = Purity::bures_average(10).unwrap();
        assert_abs_diff_eq!(
            gamma_floor(10, bures10).unwrap(),
            0.11323529411764705,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            superfid_floor(10, bures10).unwrap(),
            0.8676470588235294,
            epsilon = 1e-15
        );
    }

    #[test]
    fn pair_sum_exact_at_zero() {
        for d in 2..=MAX_DIM {
            let want = (d * (d - 1) / 2) as f64;
            assert_eq!(p_poly(d, 0.0).unwrap(), want, "d = {d}");
        }
    }

    #[test]
    fn pair_sum_matches_partially_summed_form() {
        for d in [2usize, 3, 7, 12, 20] {
            for x in [0.0, 0.3, 1.1, 2.7, 6.1] {
                let direct = p_poly(d, x).unwrap();
                let partial = p_poly_partially_summed(d, x);
                let tol = 1e-9 * direct.abs().max(1.0);
                assert!(
                    (direct - partial).abs() <= tol,
                    "d = {d}, x = {x}: {direct} vs {partial}"
                );
            }
        }
    }

    #[test]
    fn pair_sum_d2_closed_form() {
        // d = 2: single bracket, L_0 L_1 - x L_0^{(1)}^2 = (1 - x) - x = 1 - 2x.
        for x in [0.0, 0.4, 1.0, 3.7, 10.0] {
            assert_abs_diff_eq!(p_poly(2, x).unwrap(), 1.0 - 2.0 * x, epsilon = 1e-12);
        }
    }

    #[test]
    fn averages_are_one_at_zero_detuning() {
        let zero = DeltaTilde::new(0.0).unwrap();
        for d in [2usize, 3, 8, 16, 33, 64] {
            let purities = [
                Purity::hs_average(d).unwrap(),
                Purity::bures_average(d).unwrap(),
                Purity::fixed(1.0).unwrap(),
                Purity::fixed(1.0 / d as f64).unwrap(),
            ];
            for p in purities {
                assert_abs_diff_eq!(gamma_avg(d, p, zero).unwrap(), 1.0, epsilon = 1e-10);
                assert_abs_diff_eq!(superfid_avg(d, p, zero).unwrap(), 1.0, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn averages_even_in_detuning() {
        for d in [2usize, 5, 17] {
            let p = Purity::bures_average(d).unwrap();
            for v in [0.1, 0.9, 2.4, 7.7] {
                let plus = DeltaTilde::new(v).unwrap();
                let minus = DeltaTilde::new(-v).unwrap();
                assert_eq!(
                    gamma_avg(d, p, plus).unwrap(),
                    gamma_avg(d, p, minus).unwrap()
                );
                assert_eq!(
                    superfid_avg(d, p, plus).unwrap(),
                    superfid_avg(d, p, minus).unwrap()
                );
            }
        }
    }

    #[test]
    fn f_avg_short_circuits_far_past_decay() {
        let big = DeltaTilde::new(746.0_f64.sqrt()).unwrap();
        assert_eq!(f_avg(64, big).unwrap(), 0.0);
        // Just below the cutoff the value must be negligible, not discontinuous.
        let near = DeltaTilde::new(744.0_f64.sqrt()).unwrap();
        assert!(f_avg(64, near).unwrap().abs() < 1e-100);
    }

    #[test]
    fn averages_approach_floors_at_large_detuning() {
        let d = 6;
        let p = Purity::hs_average(d).unwrap();
        let far = DeltaTilde::new(30.0).unwrap();
        assert_abs_diff_eq!(
            gamma_avg(d, p, far).unwrap(),
            gamma_floor(d, p).unwrap(),
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            superfid_avg(d, p, far).unwrap(),
            superfid_floor(d, p).unwrap(),
            epsilon = 1e-12
        );
    }

    #[test]
    fn timescale_worked_value() {
        let config = EnsembleConfig {
            d: 2,
            d_s: 2,
            eta_e: 1.0,
            eta_s: 1.0,
            n: 2,
            n_uno: 1,
            n_obs: 1,
            m: 1,
            n_mac: 1,
            measure: Measure::HilbertSchmidt,
            master_seed: 1,
        };
        let tau = tau_scales(&config).unwrap();
        assert_abs_diff_eq!(tau.tau_dec, 19.2_f64.sqrt().recip(), epsilon = 1e-15);
        assert_abs_diff_eq!(tau.tau_fid, 9.6_f64.sqrt().recip(), epsilon = 1e-15);
        assert_abs_diff_eq!(tau.ratio(), 2.0_f64.sqrt(), epsilon = 1e-14);
        // Per-pair coefficient sqrt(eta_E)/sqrt(d+1) and the gap scaling.
        assert_abs_diff_eq!(tau.pair_coefficient(), 3.0_f64.sqrt().recip(), epsilon = 1e-15);
        assert_abs_diff_eq!(
            tau.tau_pair(2.0).unwrap(),
            0.5 * 3.0_f64.sqrt().recip(),
            epsilon = 1e-15
        );
        assert!(tau.tau_pair(0.0).is_err());
    }

    #[test]
    fn ansatz_exact_at_zero_and_dominant_nearby() {
        let zero = DeltaTilde::new(0.0).unwrap();
        for d in [2usize, 6, 20] {
            let p = Purity::bures_average(d).unwrap();
            assert_abs_diff_eq!(ansatz_gamma(d, p, zero).unwrap(), 1.0, epsilon = 1e-14);
            assert_abs_diff_eq!(ansatz_superfid(d, p, zero).unwrap(), 1.0, epsilon = 1e-14);
            for v in [0.05, 0.3, 1.0, 4.0] {
                let dt = DeltaTilde::new(v).unwrap();
                assert!(
                    ansatz_gamma(d, p, dt).unwrap() >= gamma_avg(d, p, dt).unwrap() - 1e-12
                );
                assert!(
                    ansatz_superfid(d, p, dt).unwrap()
                        >= superfid_avg(d, p, dt).unwrap() - 1e-12
                );
            }
        }
    }

    #[test]
    fn ansatz_gap_vanishes_quartically() {
        // gamma_ansatz - gamma_avg must be O(dt^4): the ratio between dt and
        // 2 dt should be ~16.
        let d = 2;
        let p = Purity::bures_average(d).unwrap();
        let gap = |v: f64| {
            let dt = DeltaTilde::new(v).unwrap();
            ansatz_gamma(d, p, dt).unwrap() - gamma_avg(d, p, dt).unwrap()
        };
        let (g1, g2) = (gap(1e-3), gap(2e-3));
        assert!(g1 > 0.0);
        let ratio = g2 / g1;
        assert!((ratio - 16.0).abs() < 0.5, "ratio {ratio}");
    }

    #[test]
    fn shorttime_form_matches_macro_factor_at_small_detuning() {
        let d = 3;
        let p = Purity::bures_average(d).unwrap();
        let dt = DeltaTilde::new(1e-3).unwrap();
        for kind in [FactorKind::Decoherence, FactorKind::Superfidelity] {
            let exact = macro_factor(kind, d, p, dt, 5).unwrap();
            let gauss = shorttime_macro(kind, d, p, dt, 5).unwrap();
            assert_abs_diff_eq!(exact, gauss, epsilon = 1e-9);
        }
    }

    #[test]
    fn purity_dimension_guard() {
        let too_mixed = Purity::fixed(0.3).unwrap();
        assert!(too_mixed.check_for_dim(2).is_err());
        assert!(too_mixed.check_for_dim(4).is_ok());
        assert!(Purity::fixed(0.0).is_err());
        assert!(Purity::fixed(1.5).is_err());
    }

    #[test]
    fn macro_factor_requires_positive_count() {
        let p = Purity::hs_average(2).unwrap();
        let dt = DeltaTilde::new(0.5).unwrap();
        assert!(macro_factor(FactorKind::Decoherence, 2, p, dt, 0).is_err());
        let single = factor_avg(FactorKind::Decoherence, 2, p, dt).unwrap();
        let triple = macro_factor(FactorKind::Decoherence, 2, p, dt, 3).unwrap();
        assert_abs_diff_eq!(triple, single.powi(3), epsilon = 1e-16);
    }
}
