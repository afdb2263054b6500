//! Average of macrofraction factors over the pointer observable's spectrum.
//!
//! The pointer observable is one GUE(d_S) draw, so the eigenvalue gap u of a
//! pointer pair is distributed with density W(u) obtained by integrating the
//! two-point correlation R2 along the center-of-mass direction. Conditioned
//! on a gap, the environment average of a per-copy factor is closed form, and
//! independent copies multiply, so the observable curve is
//!
//!   <<X^N>>(g t) = int du W(u) X(u g t)^N / int du W(u).
//!
//! Numerator and denominator share one quadrature rule, which pins the value
//! at t = 0 to exactly 1 at every refinement level and cancels the common
//! truncation error of the eigenvalue support window.
//!
//! Units: gaps are taken in unit-variance spectral coordinates, so time
//! enters only through the product g t with g = 1/sqrt(eta_S eta_E); callers
//! convert physical times before building the grid.

use crate::analytic::{factor_avg, DeltaTilde, FactorKind, Purity};
use crate::ensembles::EnsembleConfig;
use crate::error::{Error, Result};
use crate::quad::{adaptive, GaussLegendre, KahanSum};
use crate::specfun::KernelContext;
use rayon::prelude::*;

/// Hard ceiling on outer composite-rule nodes before giving up.
const MAX_OUTER_NODES: usize = 400_000;

/// Half-width of the spectral window in unit-variance coordinates. The
/// semicircle edge sits at 2 sqrt(d_S); the margin absorbs edge fluctuations.
pub fn support_half_width(d_s: usize) -> f64 {
    2.0 * (d_s as f64).sqrt() * 1.25
}

/// Pair-gap density W(u) of a GUE(d_S) spectrum in unit-variance coordinates:
/// the number of ordered eigenvalue pairs at distance u, normalized so that
/// the integral over u >= 0 is d_S (d_S - 1).
///
/// W(u) = 2 int dc R2(c + u/2, c - u/2), with both arguments restricted to
/// the spectral window; the integrand is even in c, so half the range is
/// integrated and doubled again.
pub fn pair_gap_weight(d_s: usize, u: f64) -> Result<f64> {
    if !u.is_finite() || u < 0.0 {
        return Err(Error::Parameter(format!(
            "pair gap must be finite and nonnegative, got {u}"
        )));
    }
    let half_width = support_half_width(d_s);
    let top = half_width - 0.5 * u;
    if top <= 0.0 {
        return Ok(0.0);
    }
    let mut ctx = KernelContext::new(d_s)?;
    let value = adaptive(
        |c| {
            ctx.r2(c + 0.5 * u, c - 0.5 * u)
                .expect("kernel arguments stay inside the validated window")
        },
        0.0,
        top,
        16,
        4,
        1e-8,
        1e-12 * d_s as f64,
        12,
    )?;
    Ok((4.0 * value).max(0.0))
}

/// Outer quadrature controls for the gap average.
#[derive(Clone, Copy, Debug)]
pub struct QuadratureSpec {
    pub order: usize,
    pub init_panels: usize,
    pub rel_tol: f64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            order: 16,
            init_panels: 8,
            rel_tol: 1e-6,
        }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<()> {
        if self.order < 2 {
            return Err(Error::Parameter(format!(
                "quadrature order must be at least 2, got {}",
                self.order
            )));
        }
        if self.init_panels < 1 {
            return Err(Error::Parameter(
                "quadrature needs at least one initial panel".into(),
            ));
        }
        if !(self.rel_tol > 0.0 && self.rel_tol <= 1e-3) {
            return Err(Error::Parameter(format!(
                "quadrature tolerance must lie in (0, 1e-3], got {}",
                self.rel_tol
            )));
        }
        Ok(())
    }
}

/// A request for the spectrum-averaged factor curve.
#[derive(Clone, Debug)]
pub struct CurveRequest {
    pub config: EnsembleConfig,
    pub kind: FactorKind,
    /// Number of independent environment copies (the exponent N).
    pub power: u32,
    /// Grid of g t values, each finite and nonnegative.
    pub g_t_grid: Vec<f64>,
    pub quadrature: QuadratureSpec,
}

impl CurveRequest {
    pub fn validate(&self) -> Result<()> {
        self.config.validate()?;
        self.quadrature.validate()?;
        if self.power == 0 {
            return Err(Error::Parameter("copy count must be at least 1".into()));
        }
        if self.power > 1_000_000 {
            return Err(Error::Parameter(format!(
                "copy count {} is unreasonably large",
                self.power
            )));
        }
        if self.g_t_grid.is_empty() {
            return Err(Error::Parameter("time grid must not be empty".into()));
        }
        for &t in &self.g_t_grid {
            if !t.is_finite() || t < 0.0 {
                return Err(Error::Parameter(format!(
                    "time grid entries must be finite and nonnegative, got {t}"
                )));
            }
        }
        Ok(())
    }
}

/// Curve values on the requested grid; stderrs stay None for quadrature
/// results and carry per-point errors for Monte Carlo curves.
#[derive(Clone, Debug)]
pub struct FactorCurve {
    pub g_t: Vec<f64>,
    pub values: Vec<f64>,
    pub stderrs: Option<Vec<f64>>,
}

/// Evaluate <<X^N>> on the whole grid.
///
/// Each grid point freezes at the first refinement level whose value agrees
/// with the previous level to rel_tol, so a converged point never moves when
/// the grid around it changes; a single-point request reproduces the curve
/// entry bitwise.
pub fn system_average_curve(request: &CurveRequest) -> Result<FactorCurve> {
    request.validate()?;
    let cfg = &request.config;
    let purity = Purity::measure_average(cfg.measure, cfg.d)?;
    // One probe call so the hot loops below cannot hit a formula domain error.
    factor_avg(request.kind, cfg.d, purity, DeltaTilde::new(0.0)?)?;

    let rule = GaussLegendre::new(request.quadrature.order);
    let gap_max = 2.0 * support_half_width(cfg.d_s);
    let n_t = request.g_t_grid.len();
    let mut values = vec![f64::NAN; n_t];
    let mut prev = vec![f64::NAN; n_t];
    let mut last_err = vec![f64::INFINITY; n_t];
    let mut frozen = vec![false; n_t];
    let mut panels = request.quadrature.init_panels;

    loop {
        let (nodes, weights) = rule.panel_nodes(0.0, gap_max, panels);
        // The gap density at each node, in parallel; every reduction below is
        // sequential, so results do not depend on the thread schedule.
        let density: Vec<f64> = nodes
            .par_iter()
            .map(|&u| pair_gap_weight(cfg.d_s, u))
            .collect::<Result<_>>()?;
        let mut denom = KahanSum::new();
        for (w, rho) in weights.iter().zip(&density) {
            denom.add(w * rho);
        }
        let denom = denom.value();
        if !(denom > 0.0) || !denom.is_finite() {
            return Err(Error::Internal(format!(
                "degenerate pair-gap normalization {denom}"
            )));
        }

        for (ti, &tau) in request.g_t_grid.iter().enumerate() {
            if frozen[ti] {
                continue;
            }
            let mut num = KahanSum::new();
            for i in 0..nodes.len() {
                let delta = DeltaTilde::new(nodes[i] * tau)
                    .expect("validated grid keeps the scaled gap finite");
                let x = factor_avg(request.kind, cfg.d, purity, delta)
                    .expect("formula domain was checked by the probe call");
                num.add(weights[i] * density[i] * x.powi(request.power as i32));
            }
            let cur = num.value() / denom;
            if prev[ti].is_finite() {
                let err = (cur - prev[ti]).abs();
                last_err[ti] = err;
                if err <= request.quadrature.rel_tol * cur.abs().max(1e-30) {
                    values[ti] = cur;
                    frozen[ti] = true;
                    continue;
                }
            }
            prev[ti] = cur;
        }

        if frozen.iter().all(|&f| f) {
            break;
        }
        let next = panels * 2;
        if next * request.quadrature.order > MAX_OUTER_NODES {
            // Report the worst still-moving point.
            let ti = (0..n_t)
                .filter(|&i| !frozen[i])
                .max_by(|&a, &b| last_err[a].total_cmp(&last_err[b]))
                .expect("at least one unfrozen point");
            return Err(Error::QuadratureNoConvergence {
                estimate: prev[ti],
                achieved: last_err[ti],
                tolerance: request.quadrature.rel_tol,
            });
        }
        panels = next;
    }

    Ok(FactorCurve {
        g_t: request.g_t_grid.clone(),
        values,
        stderrs: None,
    })
}

/// Single-point convenience wrapper; bitwise identical to the corresponding
/// curve entry.
pub fn system_average_point(
    config: &EnsembleConfig,
    kind: FactorKind,
    power: u32,
    g_t: f64,
    quadrature: QuadratureSpec,
) -> Result<f64> {
    let request = CurveRequest {
        config: config.clone(),
        kind,
        power,
        g_t_grid: vec![g_t],
        quadrature,
    };
    Ok(system_average_curve(&request)?.values[0])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::factor_floor;
    use crate::ensembles::{sample_gue, Measure};
    use crate::montecarlo::estimate;
    use approx::assert_abs_diff_eq;

    fn config(d: usize, d_s: usize, measure: Measure) -> EnsembleConfig {
        EnsembleConfig {
            d,
            d_s,
            eta_e: 1.0,
            eta_s: 1.0,
            n: 2,
            n_uno: 1,
            n_obs: 1,
            m: 1,
            n_mac: 1,
            measure,
            master_seed: 1,
        }
    }

    fn request(
        d: usize,
        d_s: usize,
        kind: FactorKind,
        power: u32,
        grid: Vec<f64>,
    ) -> CurveRequest {
        CurveRequest {
            config: config(d, d_s, Measure::Bures),
            kind,
            power,
            g_t_grid: grid,
            quadrature: QuadratureSpec::default(),
        }
    }

    #[test]
    fn value_at_zero_time_is_exactly_one() {
        for d_s in [2usize, 10] {
            for kind in [FactorKind::Decoherence, FactorKind::Superfidelity] {
                let curve =
                    system_average_curve(&request(4, d_s, kind, 20, vec![0.0])).unwrap();
                assert_eq!(curve.values[0], 1.0);
            }
        }
    }

    #[test]
    fn two_level_gap_density_matches_closed_form() {
        // d_S = 2: R2(x, y) = e^{-(x^2+y^2)/2} (x - y)^2 / (2 pi), so the
        // c-integrand collapses to u^2 e^{-u^2/4} e^{-c^2} / (2 pi). Check
        // against that closed form over the same clipped window.
        let rule = GaussLegendre::new(24);
        let l = support_half_width(2);
        for u in [0.3_f64, 1.0, 2.5, 4.0] {
            let top = l - 0.5 * u;
            let want = 4.0
                * rule.integrate_panels(0.0, top, 8, |c| {
                    u * u * (-u * u / 4.0 - c * c).exp()
                        / (2.0 * std::f64::consts::PI)
                });
            let got = pair_gap_weight(2, u).unwrap();
            assert_abs_diff_eq!(got, want, epsilon = 1e-9 * want.max(1e-4));
        }
        // Against the untruncated form W(u) = u^2 e^{-u^2/4} / sqrt(pi) the
        // window clips only an erfc-sized tail in the bulk.
        let u = 1.0;
        let full = u * u * (-u * u / 4.0_f64).exp() / std::f64::consts::PI.sqrt();
        assert_abs_diff_eq!(pair_gap_weight(2, u).unwrap(), full, epsilon = 5e-5 * full);
        // Total mass: exactly the R2 integral over the same square window
        // (pins the rotation Jacobian), and d_S (d_S - 1) up to the soft-edge
        // tail of a small spectrum.
        let d_s = 3;
        let lw = support_half_width(d_s);
        let mass = rule.integrate_panels(0.0, 2.0 * lw, 40, |u| {
            pair_gap_weight(d_s, u).unwrap()
        });
        let (xs, ws) = rule.panel_nodes(-lw, lw, 24);
        let mut ctx = KernelContext::new(d_s).unwrap();
        let mut window = KahanSum::new();
        for (i, &x) in xs.iter().enumerate() {
            for (j, &y) in xs.iter().enumerate() {
                window.add(ws[i] * ws[j] * ctx.r2(x, y).unwrap());
            }
        }
        assert_abs_diff_eq!(mass, window.value(), epsilon = 1e-6 * mass);
        assert_abs_diff_eq!(mass, (d_s * (d_s - 1)) as f64, epsilon = 0.01 * mass);
    }

    #[test]
    fn curve_matches_two_dimensional_tensor_quadrature() {
        // Independent oracle: average X(|x - y| tau)^N directly against
        // R2(x, y) on the square window with a fixed tensor rule.
        let d = 3;
        let d_s = 2;
        let tau = 0.7;
        let power = 2;
        let kind = FactorKind::Decoherence;
        let purity = Purity::measure_average(Measure::Bures, d).unwrap();
        let l = support_half_width(d_s);
        let rule = GaussLegendre::new(16);
        let (xs, ws) = rule.panel_nodes(-l, l, 24);
        let mut ctx = KernelContext::new(d_s).unwrap();
        let mut num = KahanSum::new();
        let mut den = KahanSum::new();
        for (i, &x) in xs.iter().enumerate() {
            for (j, &y) in xs.iter().enumerate() {
                let r2 = ctx.r2(x, y).unwrap();
                let delta = DeltaTilde::new((x - y).abs() * tau).unwrap();
                let f = factor_avg(kind, d, purity, delta).unwrap();
                num.add(ws[i] * ws[j] * r2 * f.powi(power as i32));
                den.add(ws[i] * ws[j] * r2);
            }
        }
        let want = num.value() / den.value();
        let got =
            system_average_point(&config(d, d_s, Measure::Bures), kind, power, tau, QuadratureSpec::default())
                .unwrap();
        assert_abs_diff_eq!(got, want, epsilon = 1e-5);
    }

    #[test]
    fn curve_matches_eigenvalue_pair_monte_carlo() {
        // Draw GUE(d_S) spectra, average the closed-form per-copy factor over
        // all ordered eigenvalue pairs, and compare. The quadrature window
        // clips eigenvalues beyond the margin, a relative effect of order
        // 1e-4 here, well under the Monte Carlo resolution.
        let d = 3;
        let d_s = 2;
        let tau = 1.0;
        let kind = FactorKind::Superfidelity;
        let purity = Purity::measure_average(Measure::Bures, d).unwrap();
        let est = estimate(
            |rng| {
                let spec = sample_gue(d_s, 1.0, rng).unwrap();
                let lam = spec.eigenvalues();
                let mut acc = 0.0;
                for a in 0..d_s {
                    for b in 0..d_s {
                        if a == b {
                            continue;
                        }
                        let delta = DeltaTilde::new((lam[a] - lam[b]).abs() * tau).unwrap();
                        acc += factor_avg(kind, d, purity, delta).unwrap();
                    }
                }
                acc / (d_s * (d_s - 1)) as f64
            },
            20_000,
            7,
            0,
        )
        .unwrap();
        let got = system_average_point(
            &config(d, d_s, Measure::Bures),
            kind,
            1,
            tau,
            QuadratureSpec::default(),
        )
        .unwrap();
        let z = (got - est.mean) / est.stderr;
        assert!(z.abs() <= 4.0, "z = {z} (quadrature {got} vs mc {})", est.mean);
    }

    #[test]
    fn curve_depends_on_time_only_through_g_t() {
        // eta only rescales physical time; on a g t grid the curve is the
        // same function, bitwise.
        let grid = vec![0.0, 0.4, 1.1, 3.0];
        let mut cfg_a = config(4, 3, Measure::HilbertSchmidt);
        let mut cfg_b = config(4, 3, Measure::HilbertSchmidt);
        cfg_a.eta_s = 9.0;
        cfg_b.eta_e = 0.25;
        let mk = |cfg: EnsembleConfig| CurveRequest {
            config: cfg,
            kind: FactorKind::Decoherence,
            power: 3,
            g_t_grid: grid.clone(),
            quadrature: QuadratureSpec::default(),
        };
        let a = system_average_curve(&mk(cfg_a)).unwrap();
        let b = system_average_curve(&mk(cfg_b)).unwrap();
        assert_eq!(a.values, b.values);
    }

    #[test]
    fn point_reproduces_curve_entry_bitwise() {
        let req = request(5, 2, FactorKind::Superfidelity, 4, vec![0.0, 0.9, 2.2]);
        let curve = system_average_curve(&req).unwrap();
        for (i, &tau) in req.g_t_grid.iter().enumerate() {
            let point = system_average_point(
                &req.config,
                req.kind,
                req.power,
                tau,
                req.quadrature,
            )
            .unwrap();
            assert_eq!(point, curve.values[i]);
        }
    }

    #[test]
    fn long_time_value_approaches_the_floor() {
        let d = 4;
        let cfg = config(d, 2, Measure::Bures);
        let purity = Purity::measure_average(Measure::Bures, d).unwrap();
        for kind in [FactorKind::Decoherence, FactorKind::Superfidelity] {
            let floor = factor_floor(kind, d, purity).unwrap();
            let v = system_average_point(&cfg, kind, 1, 30.0, QuadratureSpec::default())
                .unwrap();
            assert!(
                (v - floor).abs() <= 5e-3 * floor,
                "{kind:?}: value {v} vs floor {floor}"
            );
        }
    }

    #[test]
    fn curve_values_stay_in_the_unit_interval() {
        let grid: Vec<f64> = (0..40).map(|i| 0.25 * i as f64).collect();
        for kind in [FactorKind::Decoherence, FactorKind::Superfidelity] {
            let curve = system_average_curve(&request(3, 4, kind, 2, grid.clone())).unwrap();
            for (&tau, &v) in curve.g_t.iter().zip(&curve.values) {
                assert!(
                    (-1e-12..=1.0 + 1e-12).contains(&v),
                    "{kind:?} at g t = {tau}: {v}"
                );
            }
        }
    }

    #[test]
    fn invalid_requests_are_rejected() {
        let mut req = request(3, 2, FactorKind::Decoherence, 1, vec![0.0]);
        req.power = 0;
        assert!(system_average_curve(&req).is_err());
        let mut req = request(3, 2, FactorKind::Decoherence, 1, vec![]);
        req.quadrature.rel_tol = 1e-2;
        assert!(req.validate().is_err());
        let req = request(3, 2, FactorKind::Decoherence, 1, vec![-1.0]);
        assert!(req.validate().is_err());
        assert!(pair_gap_weight(2, -0.5).is_err());
        assert!(pair_gap_weight(2, 1e3).unwrap() == 0.0);
    }
}
