//! Broadcast-structure error bounds and small exact reference evolutions.
//!
//! The system couples to n environment copies through H = A (x) sum_k B_k
//! with A diagonal in the pointer basis. Tracing the unobserved copies
//! leaves each pointer coherence (a, a') multiplied by a product of phase
//! traces, and each observed copy in a conditionally rotated operator; the
//! distance to the ideal broadcast state is controlled by the realized
//! decoherence and fidelity factors.

use crate::ensembles::{sample_gue, sample_state, DensityMatrix, EnsembleConfig, HermitianObservable};
use crate::error::{Error, Result};
use crate::linalg::{self, CMat};
use crate::montecarlo::{decoherence_factor, phase_trace, superfidelity};
use crate::quad::KahanSum;
use crate::rng::{domain, substream};
use ndarray::{Array2, Array3};
use num_complex::Complex64;
use rayon::prelude::*;

/// Largest observed-sector Hilbert space dimension for exact evolutions.
pub const MAX_MICRO_DIM: usize = 64;

/// Inputs of the broadcast-distance bound for one realization: branch
/// weights p, coherences c, per-pair unobserved decoherence factors, and
/// per-pair per-macrofraction fidelity factors.
#[derive(Clone, Debug)]
pub struct SbsBoundTerms {
    pub d_s: usize,
    pub p: Vec<f64>,
    pub c: Array2<f64>,
    pub gamma_uno: Array2<f64>,
    pub fid_mac: Array3<f64>,
}

impl SbsBoundTerms {
    pub fn validate(&self) -> Result<()> {
        let d = self.d_s;
        if d < 2 {
            return Err(Error::Invariant("bound needs at least two branches".into()));
        }
        if self.p.len() != d
            || self.c.dim() != (d, d)
            || self.gamma_uno.dim() != (d, d)
            || self.fid_mac.dim().0 != d
            || self.fid_mac.dim().1 != d
        {
            return Err(Error::Invariant("bound term shapes disagree".into()));
        }
        let mut mass = KahanSum::new();
        for &pa in &self.p {
            if !(0.0..=1.0 + 1e-10).contains(&pa) {
                return Err(Error::Invariant(format!("branch weight {pa} outside [0, 1]")));
            }
            mass.add(pa);
        }
        if (mass.value() - 1.0).abs() > 1e-10 {
            return Err(Error::Invariant(format!(
                "branch weights sum to {}, not 1",
                mass.value()
            )));
        }
        for a in 0..d {
            for b in 0..d {
                let cab = self.c[(a, b)];
                if (cab - self.c[(b, a)]).abs() > 1e-10 {
                    return Err(Error::Invariant("coherence magnitudes not symmetric".into()));
                }
                if cab < 0.0 || cab > (self.p[a] * self.p[b]).sqrt() + 1e-10 {
                    return Err(Error::Invariant(format!(
                        "coherence {cab} exceeds sqrt(p_a p_b) at ({a}, {b})"
                    )));
                }
                if a == b {
                    continue;
                }
                let g = self.gamma_uno[(a, b)];
                if !(-1e-10..=1.0 + 1e-10).contains(&g) {
                    return Err(Error::Invariant(format!(
                        "decoherence factor {g} outside [0, 1] at ({a}, {b})"
                    )));
                }
                for i in 0..self.fid_mac.dim().2 {
                    let f = self.fid_mac[(a, b, i)];
                    if !(-1e-10..=1.0 + 1e-10).contains(&f) {
                        return Err(Error::Invariant(format!(
                            "fidelity factor {f} outside [0, 1] at ({a}, {b}, {i})"
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}

/// Broadcast-distance bound of one realization: over ordered pointer pairs,
///   sum_{a != a'} [ c_aa' sqrt(Gamma_aa') + sqrt(p_a p_a') sum_i sqrt(F_aa'^i) ].
pub fn epsilon_bound(terms: &SbsBoundTerms) -> Result<f64> {
    terms.validate()?;
    let d = terms.d_s;
    let m = terms.fid_mac.dim().2;
    let mut acc = KahanSum::new();
    for a in 0..d {
        for b in 0..d {
            if a == b {
                continue;
            }
            acc.add(terms.c[(a, b)] * terms.gamma_uno[(a, b)].max(0.0).sqrt());
            let w = (terms.p[a] * terms.p[b]).sqrt();
            for i in 0..m {
                acc.add(w * terms.fid_mac[(a, b, i)].max(0.0).sqrt());
            }
        }
    }
    Ok(acc.value())
}

/// Ensemble-average asymptote of the bound once every pair sits at its
/// floor: d_S (d_S - 1) [ floor_Gamma^(N_uno/2) + M floor_G^(N_mac/2) ].
pub fn epsilon_average_asymptote(
    d_s: usize,
    gamma_floor: f64,
    superfid_floor: f64,
    n_uno: u32,
    n_mac: u32,
    m: u32,
) -> f64 {
    let pairs = (d_s * (d_s - 1)) as f64;
    pairs
        * (gamma_floor.powf(n_uno as f64 / 2.0)
            + m as f64 * superfid_floor.powf(n_mac as f64 / 2.0))
}

/// One row of the concentration experiment.
#[derive(Clone, Copy, Debug)]
pub struct HoeffdingRow {
    pub delta: f64,
    pub empirical_prob: f64,
    pub bound: f64,
}

/// Draw independent realizations of the bound proxy, clip to [0, 1], and
/// compare the empirical deviation-from-mean tail against 2 exp(-2 delta^2).
///
/// Each sample works in the pointer eigenbasis of its own GUE(d_S) draw: the
/// pointer values are that draw's eigenvalues and the system state is drawn
/// from the unitarily invariant measure directly in that basis, which is
/// distributionally identical to rotating a fixed-basis draw.
pub fn hoeffding_experiment(
    config: &EnsembleConfig,
    t: f64,
    n_samples: usize,
    delta_grid: &[f64],
    workers: usize,
) -> Result<Vec<HoeffdingRow>> {
    config.validate()?;
    if !t.is_finite() || t < 0.0 {
        return Err(Error::Parameter(format!("time must be finite and nonnegative, got {t}")));
    }
    if n_samples < 100 {
        return Err(Error::Parameter(format!(
            "concentration experiment needs at least 100 samples, got {n_samples}"
        )));
    }
    if delta_grid.is_empty() {
        return Err(Error::Parameter("delta grid must not be empty".into()));
    }
    for &dlt in delta_grid {
        if !dlt.is_finite() || dlt <= 0.0 {
            return Err(Error::Parameter(format!("deviation {dlt} must be positive")));
        }
    }

    let cfg = config.clone();
    let sample_one = move |rng: &mut rand_chacha::ChaCha12Rng| -> Result<f64> {
        let pointer = sample_gue(cfg.d_s, cfg.eta_s, rng)?;
        let values = pointer.eigenvalues();
        let rho_s = sample_state(cfg.d_s, cfg.measure, rng)?;
        // One shared environment: the unobserved copies feed every pair's
        // decoherence factor, the observed ones every fidelity factor.
        let mut copies = Vec::with_capacity(cfg.n);
        for _ in 0..cfg.n {
            let b = sample_gue(cfg.d, cfg.eta_e, rng)?;
            let rho = sample_state(cfg.d, cfg.measure, rng)?;
            copies.push((b, rho));
        }
        let d_s = cfg.d_s;
        let mut p = vec![0.0; d_s];
        let mut c = Array2::zeros((d_s, d_s));
        for a in 0..d_s {
            p[a] = rho_s.matrix()[(a, a)].re.max(0.0);
            for b in 0..d_s {
                c[(a, b)] = rho_s.matrix()[(a, b)].norm();
            }
        }
        let mut gamma_uno = Array2::zeros((d_s, d_s));
        let mut fid_mac = Array3::zeros((d_s, d_s, cfg.m));
        for a in 0..d_s {
            for b in 0..d_s {
                if a == b {
                    continue;
                }
                let gap = values[a] - values[b];
                let mut g = 1.0_f64;
                for (bk, rk) in &copies[..cfg.n_uno] {
                    g *= decoherence_factor(bk, rk, gap, t);
                }
                gamma_uno[(a, b)] = g;
                for i in 0..cfg.m {
                    let mut f = 1.0_f64;
                    let start = cfg.n_uno + i * cfg.n_mac;
                    for (bk, rk) in &copies[start..start + cfg.n_mac] {
                        // Super-fidelity dominates fidelity, so the product
                        // keeps the bound an upper bound.
                        f *= superfidelity(bk, rk, gap, t);
                    }
                    fid_mac[(a, b, i)] = f;
                }
            }
        }
        let terms = SbsBoundTerms { d_s, p, c, gamma_uno, fid_mac };
        Ok(epsilon_bound(&terms)?.clamp(0.0, 1.0))
    };

    let seed = config.master_seed;
    let run = || -> Result<Vec<f64>> {
        (0..n_samples)
            .into_par_iter()
            .map(|i| {
                let mut rng = substream(seed, domain::HOEFFDING, i as u64);
                sample_one(&mut rng)
            })
            .collect()
    };
    let samples = if workers == 0 {
        run()?
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .map_err(|e| Error::Internal(format!("thread pool: {e}")))?;
        pool.install(run)?
    };

    let mut mean = KahanSum::new();
    for &x in &samples {
        mean.add(x);
    }
    let mean = mean.value() / n_samples as f64;
    let rows = delta_grid
        .iter()
        .map(|&delta| {
            let hits = samples.iter().filter(|&&x| (x - mean).abs() >= delta).count();
            HoeffdingRow {
                delta,
                empirical_prob: hits as f64 / n_samples as f64,
                bound: 2.0 * (-2.0 * delta * delta).exp(),
            }
        })
        .collect();
    Ok(rows)
}

/// Reduced state of system plus observed copies after exact evolution.
#[derive(Clone, Debug)]
pub struct MicroState {
    d_s: usize,
    d_env: usize,
    n_obs: usize,
    matrix: CMat,
}

impl MicroState {
    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    /// (d_S, per-copy dimension, observed copy count).
    pub fn dims(&self) -> (usize, usize, usize) {
        (self.d_s, self.d_env, self.n_obs)
    }

    /// Owned copy of the pointer block (a, a'), an operator on the observed
    /// copies.
    pub fn block(&self, a: usize, a_p: usize) -> CMat {
        let e = self.d_env.pow(self.n_obs as u32);
        self.matrix
            .slice(ndarray::s![a * e..(a + 1) * e, a_p * e..(a_p + 1) * e])
            .to_owned()
    }
}

/// Conditionally rotated observed-copy operator
/// e^{-i a B t} rho e^{+i a' B t}, assembled as a Hadamard phase product in
/// the eigenbasis of B.
fn evolve_pair(
    b: &HermitianObservable,
    rho: &DensityMatrix,
    a: f64,
    a_p: f64,
    t: f64,
) -> CMat {
    let v = b.eigenvectors();
    let lam = b.eigenvalues();
    let mut rot = linalg::adjoint(v).dot(&rho.matrix().dot(v));
    let d = b.dim();
    for j in 0..d {
        for k in 0..d {
            let theta = -a * lam[j] * t + a_p * lam[k] * t;
            rot[(j, k)] *= Complex64::new(theta.cos(), theta.sin());
        }
    }
    v.dot(&rot).dot(&linalg::adjoint(v))
}

/// Exact reduced evolution under H = A (x) sum_k B_k with A diagonal.
///
/// The first n_uno environment copies are traced out; each contributes one
/// phase trace per pointer pair. The remaining copies stay in the state.
/// Pointer values are read off A's diagonal in the given order, so system
/// state entries and pointer branches share indexing.
pub fn micro_evolve(
    a_obs: &HermitianObservable,
    bs: &[HermitianObservable],
    rho0_s: &DensityMatrix,
    rho0_env: &[DensityMatrix],
    t: f64,
    n_uno: usize,
) -> Result<MicroState> {
    let d_s = a_obs.dim();
    if rho0_s.dim() != d_s {
        return Err(Error::Parameter(format!(
            "system state dimension {} does not match the observable's {}",
            rho0_s.dim(),
            d_s
        )));
    }
    if bs.len() != rho0_env.len() || bs.is_empty() {
        return Err(Error::Parameter(
            "need one initial state per environment copy".into(),
        ));
    }
    if n_uno > bs.len() {
        return Err(Error::Parameter(format!(
            "cannot trace {n_uno} of {} copies",
            bs.len()
        )));
    }
    let d_env = bs[0].dim();
    for (b, r) in bs.iter().zip(rho0_env) {
        if b.dim() != d_env || r.dim() != d_env {
            return Err(Error::Parameter("environment copy dimensions differ".into()));
        }
    }
    if !t.is_finite() {
        return Err(Error::Parameter(format!("time must be finite, got {t}")));
    }
    let n_obs = bs.len() - n_uno;
    let e_dim = d_env
        .checked_pow(n_obs as u32)
        .filter(|e| d_s.saturating_mul(*e) <= MAX_MICRO_DIM)
        .ok_or_else(|| {
            Error::DimensionGuard(format!(
                "observed sector {d_s} x {d_env}^{n_obs} exceeds {MAX_MICRO_DIM}"
            ))
        })?;
    // Pointer values come from the diagonal as given; reject couplings that
    // are not already in their pointer basis.
    let a_mat = a_obs.matrix();
    for i in 0..d_s {
        for j in 0..d_s {
            if i != j && a_mat[(i, j)].norm() > 1e-12 {
                return Err(Error::Parameter(
                    "system coupling must be diagonal in the pointer basis".into(),
                ));
            }
        }
    }
    let values: Vec<f64> = (0..d_s).map(|i| a_mat[(i, i)].re).collect();

    let dim = d_s * e_dim;
    let mut out = CMat::zeros((dim, dim));
    for a in 0..d_s {
        for ap in 0..d_s {
            let gap = values[a] - values[ap];
            let mut coeff = rho0_s.matrix()[(a, ap)];
            for k in 0..n_uno {
                coeff *= phase_trace(&bs[k], &rho0_env[k], gap, t);
            }
            if n_obs == 0 {
                out[(a, ap)] = coeff;
                continue;
            }
            let mut block = evolve_pair(&bs[n_uno], &rho0_env[n_uno], values[a], values[ap], t);
            for k in n_uno + 1..bs.len() {
                let next = evolve_pair(&bs[k], &rho0_env[k], values[a], values[ap], t);
                block = linalg::kron(&block, &next);
            }
            for i in 0..e_dim {
                for j in 0..e_dim {
                    out[(a * e_dim + i, ap * e_dim + j)] = coeff * block[(i, j)];
                }
            }
        }
    }

    let tr = linalg::trace(&out);
    if (tr.re - 1.0).abs() > 1e-10 || tr.im.abs() > 1e-10 {
        return Err(Error::Internal(format!("evolved state trace {tr} drifted from 1")));
    }
    if linalg::herm_deviation(&out) > 1e-10 {
        return Err(Error::Internal("evolved state lost hermiticity".into()));
    }
    #[cfg(debug_assertions)]
    {
        let (eigs, _) = linalg::eigh(&out)?;
        let min = eigs.iter().cloned().fold(f64::INFINITY, f64::min);
        debug_assert!(min >= -1e-10, "evolved state eigenvalue {min}");
    }
    Ok(MicroState {
        d_s,
        d_env,
        n_obs,
        matrix: out,
    })
}

/// Trace distance from the evolved state to its pointer-block-diagonal part:
/// half the trace norm of the off-diagonal blocks.
pub fn micro_offdiag_norm(state: &MicroState) -> Result<f64> {
    let e = state.d_env.pow(state.n_obs as u32);
    let mut off = state.matrix.clone();
    for a in 0..state.d_s {
        for i in 0..e {
            for j in 0..e {
                off[(a * e + i, a * e + j)] = Complex64::new(0.0, 0.0);
            }
        }
    }
    Ok(0.5 * linalg::trace_norm_hermitian(&off)?)
}
