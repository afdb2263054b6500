//! Python bindings: thin scalar/list wrappers over the core crate.
//!
//! Every function takes and returns plain Python scalars, strings, lists, or
//! dicts; domain errors surface as ValueError.

use std::collections::HashMap;

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use vnm_core::analytic::{self, DeltaTilde, FactorKind, Purity};
use vnm_core::ensembles::{sample_gue, sample_state, EnsembleConfig, Measure};
use vnm_core::montecarlo::{self, estimate};
use vnm_core::rng::{domain, substream};
use vnm_core::sbs;
use vnm_core::sysavg::{self, CurveRequest, QuadratureSpec};

fn vy<T>(r: vnm_core::Result<T>) -> PyResult<T> {
    r.map_err(|e| PyValueError::new_err(e.to_string()))
}

fn parse_measure(s: &str) -> PyResult<Measure> {
    vy(s.parse::<Measure>())
}

fn parse_kind(s: &str) -> PyResult<FactorKind> {
    match s {
        "gamma" => Ok(FactorKind::Decoherence),
        "superfid" => Ok(FactorKind::Superfidelity),
        other => Err(PyValueError::new_err(format!(
            "kind must be 'gamma' or 'superfid', got '{other}'"
        ))),
    }
}

fn fixed_purity(p: f64) -> PyResult<Purity> {
    vy(Purity::fixed(p))
}

fn delta(v: f64) -> PyResult<DeltaTilde> {
    vy(DeltaTilde::new(v))
}

/// Measure average of the initial purity: 2d/(d^2+1) or (5d^2+1)/(2d(d^2+2)).
#[pyfunction]
fn purity_avg(measure: &str, d: usize) -> PyResult<f64> {
    vy(analytic::purity_avg(parse_measure(measure)?, d))
}

/// Ensemble-averaged decoherence factor at fixed purity.
#[pyfunction]
fn gamma_avg(d: usize, purity: f64, delta_t: f64) -> PyResult<f64> {
    vy(analytic::gamma_avg(d, fixed_purity(purity)?, delta(delta_t)?))
}

/// Ensemble-averaged super-fidelity at fixed purity.
#[pyfunction]
fn superfid_avg(d: usize, purity: f64, delta_t: f64) -> PyResult<f64> {
    vy(analytic::superfid_avg(d, fixed_purity(purity)?, delta(delta_t)?))
}

/// Spectrum pair-sum average f(d, delta_t).
#[pyfunction]
fn f_avg(d: usize, delta_t: f64) -> PyResult<f64> {
    vy(analytic::f_avg(d, delta(delta_t)?))
}

/// Exponential envelope for the decoherence factor.
#[pyfunction]
fn ansatz_gamma(d: usize, purity: f64, delta_t: f64) -> PyResult<f64> {
    vy(analytic::ansatz_gamma(d, fixed_purity(purity)?, delta(delta_t)?))
}

/// Exponential envelope for the super-fidelity.
#[pyfunction]
fn ansatz_superfid(d: usize, purity: f64, delta_t: f64) -> PyResult<f64> {
    vy(analytic::ansatz_superfid(d, fixed_purity(purity)?, delta(delta_t)?))
}

/// Long-time floor of either factor ('gamma' or 'superfid').
#[pyfunction]
fn factor_floor(kind: &str, d: usize, purity: f64) -> PyResult<f64> {
    vy(analytic::factor_floor(parse_kind(kind)?, d, fixed_purity(purity)?))
}

fn build_config(
    d: usize,
    d_s: usize,
    n_uno: usize,
    n_mac: usize,
    m: usize,
    measure: Measure,
    seed: u64,
) -> EnsembleConfig {
    EnsembleConfig {
        d,
        d_s,
        eta_e: 1.0,
        eta_s: 1.0,
        n: n_uno + m * n_mac,
        n_uno,
        n_obs: m * n_mac,
        m,
        n_mac,
        measure,
        master_seed: seed,
    }
}

/// Decoherence and fidelity timescales for unit GUE weights.
///
/// Returns a dict with tau_dec, tau_fid, and their ratio.
#[pyfunction]
#[pyo3(signature = (d, d_s=2, n_uno=1, n_mac=1, m=1, measure="bures"))]
fn tau_scales(
    d: usize,
    d_s: usize,
    n_uno: usize,
    n_mac: usize,
    m: usize,
    measure: &str,
) -> PyResult<HashMap<&'static str, f64>> {
    let cfg = build_config(d, d_s, n_uno, n_mac, m, parse_measure(measure)?, 1);
    let scales = vy(analytic::tau_scales(&cfg))?;
    Ok(HashMap::from([
        ("tau_dec", scales.tau_dec),
        ("tau_fid", scales.tau_fid),
        ("ratio", scales.ratio()),
    ]))
}

/// Monte Carlo mean and standard error of the decoherence factor at unit
/// coupling scale and unit time, so delta_t is the pointer gap.
#[pyfunction]
#[pyo3(signature = (d, measure, delta_t, samples=10_000, seed=1, workers=0))]
fn mc_gamma(
    d: usize,
    measure: &str,
    delta_t: f64,
    samples: usize,
    seed: u64,
    workers: usize,
) -> PyResult<(f64, f64)> {
    let measure = parse_measure(measure)?;
    let est = vy(estimate(
        move |rng| {
            let b = sample_gue(d, 1.0, rng).expect("valid sampler arguments");
            let rho = sample_state(d, measure, rng).expect("valid sampler arguments");
            montecarlo::decoherence_factor(&b, &rho, delta_t, 1.0)
        },
        samples,
        seed,
        workers,
    ))?;
    Ok((est.mean, est.stderr))
}

/// Monte Carlo mean and standard error of the state purity under a measure.
#[pyfunction]
#[pyo3(signature = (d, measure, samples=10_000, seed=1, workers=0))]
fn mc_purity(
    d: usize,
    measure: &str,
    samples: usize,
    seed: u64,
    workers: usize,
) -> PyResult<(f64, f64)> {
    let measure = parse_measure(measure)?;
    let est = vy(estimate(
        move |rng| sample_state(d, measure, rng).expect("valid sampler arguments").purity(),
        samples,
        seed,
        workers,
    ))?;
    Ok((est.mean, est.stderr))
}

/// Spectrum-averaged factor curve <<X^power>> on a grid of g t values.
#[pyfunction]
#[pyo3(signature = (d, d_s, measure, kind, power, g_t_grid))]
fn system_curve(
    d: usize,
    d_s: usize,
    measure: &str,
    kind: &str,
    power: u32,
    g_t_grid: Vec<f64>,
) -> PyResult<Vec<f64>> {
    let kind = parse_kind(kind)?;
    let copies = power.max(1) as usize;
    let cfg = match kind {
        FactorKind::Decoherence => {
            build_config(d, d_s, copies, 1, 1, parse_measure(measure)?, 1)
        }
        FactorKind::Superfidelity => {
            build_config(d, d_s, 1, copies, 1, parse_measure(measure)?, 1)
        }
    };
    let request = CurveRequest {
        config: cfg,
        kind,
        power,
        g_t_grid,
        quadrature: QuadratureSpec::default(),
    };
    Ok(vy(sysavg::system_average_curve(&request))?.values)
}

/// Eigenvalues of one GUE draw, ascending; deterministic in the seed.
#[pyfunction]
#[pyo3(signature = (d, eta=1.0, seed=1))]
fn gue_eigenvalues(d: usize, eta: f64, seed: u64) -> PyResult<Vec<f64>> {
    let mut rng = substream(seed, domain::BINDINGS, 0);
    let h = vy(sample_gue(d, eta, &mut rng))?;
    Ok(h.eigenvalues().to_vec())
}

/// Late-time mean of the broadcast-distance bound:
/// d_s (d_s - 1) [gamma_floor^(n_uno/2) + m superfid_floor^(n_mac/2)].
#[pyfunction]
fn epsilon_asymptote(
    d_s: usize,
    gamma_floor: f64,
    superfid_floor: f64,
    n_uno: u32,
    n_mac: u32,
    m: u32,
) -> f64 {
    sbs::epsilon_average_asymptote(d_s, gamma_floor, superfid_floor, n_uno, n_mac, m)
}

#[pymodule]
fn vnm_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(purity_avg, m)?)?;
    m.add_function(wrap_pyfunction!(gamma_avg, m)?)?;
    m.add_function(wrap_pyfunction!(superfid_avg, m)?)?;
    m.add_function(wrap_pyfunction!(f_avg, m)?)?;
    m.add_function(wrap_pyfunction!(ansatz_gamma, m)?)?;
    m.add_function(wrap_pyfunction!(ansatz_superfid, m)?)?;
    m.add_function(wrap_pyfunction!(factor_floor, m)?)?;
    m.add_function(wrap_pyfunction!(tau_scales, m)?)?;
    m.add_function(wrap_pyfunction!(mc_gamma, m)?)?;
    m.add_function(wrap_pyfunction!(mc_purity, m)?)?;
    m.add_function(wrap_pyfunction!(system_curve, m)?)?;
    m.add_function(wrap_pyfunction!(gue_eigenvalues, m)?)?;
    m.add_function(wrap_pyfunction!(epsilon_asymptote, m)?)?;
    Ok(())
}
