//! Monte Carlo estimators for the decoherence factor and the conditional
//! state overlaps, plus a deterministic mean/stderr reducer.
//!
//! Conventions: a pointer pair with gap a - a' evolves one environment copy
//! by e^{-i a B t} versus e^{-i a' B t}; every quantity below depends on the
//! pair only through gap = a - a' and the product gap * t.

use crate::analytic::FactorKind;
use crate::ensembles::{DensityMatrix, HermitianObservable};
use crate::error::{Error, Result};
use crate::linalg::{self, CMat};
use crate::quad::KahanSum;
use crate::rng::{domain, substream};
use num_complex::Complex64;
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;

/// rho expressed in the eigenbasis of b: V^dag rho V.
pub(crate) fn rotate_to_eigenbasis(b: &HermitianObservable, rho: &DensityMatrix) -> CMat {
    let v = b.eigenvectors();
    linalg::adjoint(v).dot(&rho.matrix().dot(v))
}

/// tr[e^{-i gap B t} rho], the phase trace of one environment copy.
pub fn phase_trace(b: &HermitianObservable, rho: &DensityMatrix, gap: f64, t: f64) -> Complex64 {
    let v = b.eigenvectors();
    let y = rho.matrix().dot(v);
    let d = b.dim();
    let mut acc = Complex64::new(0.0, 0.0);
    for j in 0..d {
        // (V^dag rho V)_jj
        let mut diag = Complex64::new(0.0, 0.0);
        for i in 0..d {
            diag += v[(i, j)].conj() * y[(i, j)];
        }
        let theta = -gap * b.eigenvalues()[j] * t;
        acc += Complex64::new(theta.cos(), theta.sin()) * diag;
    }
    acc
}

/// Decoherence factor |tr[e^{-i gap B t} rho]|^2 of one copy, clamped to [0, 1].
pub fn decoherence_factor(
    b: &HermitianObservable,
    rho: &DensityMatrix,
    gap: f64,
    t: f64,
) -> f64 {
    // Identity evolution: exactly 1, free of basis-rotation rounding.
    if gap * t == 0.0 {
        return 1.0;
    }
    phase_trace(b, rho, gap, t).norm_sqr().clamp(0.0, 1.0)
}

/// Hilbert-Schmidt overlap tr(rho_a rho_a') of the two conditionally evolved
/// states: sum_{jk} |rho_jk|^2 cos(gap t (lambda_j - lambda_k)) in the B
/// eigenbasis.
pub fn hs_overlap(b: &HermitianObservable, rho: &DensityMatrix, gap: f64, t: f64) -> f64 {
    // Identity evolution leaves the overlap at the state's purity.
    if gap * t == 0.0 {
        return rho.purity();
    }
    let rot = rotate_to_eigenbasis(b, rho);
    let lam = b.eigenvalues();
    let d = b.dim();
    let mut acc = KahanSum::new();
    for j in 0..d {
        for k in 0..d {
            let theta = gap * t * (lam[j] - lam[k]);
            acc.add(rot[(j, k)].norm_sqr() * theta.cos());
        }
    }
    acc.value().clamp(0.0, 1.0)
}

/// Super-fidelity of two arbitrary states:
///   G = tr(rho sigma) + sqrt((1 - tr rho^2)(1 - tr sigma^2)).
pub fn superfidelity_states(rho: &DensityMatrix, sigma: &DensityMatrix) -> f64 {
    let overlap = linalg::trace_product_hermitian(rho.matrix(), sigma.matrix());
    let a = (1.0 - rho.purity()).max(0.0);
    let b = (1.0 - sigma.purity()).max(0.0);
    (overlap + (a * b).sqrt()).clamp(0.0, 1.0)
}

/// Super-fidelity of the two conditionally evolved copies of rho. Unitary
/// evolution preserves purity, so the mixedness term uses rho's purity twice.
pub fn superfidelity(b: &HermitianObservable, rho: &DensityMatrix, gap: f64, t: f64) -> f64 {
    if gap * t == 0.0 {
        return 1.0;
    }
    let overlap = hs_overlap(b, rho, gap, t);
    let mixed = (1.0 - rho.purity()).max(0.0);
    (overlap + mixed).clamp(0.0, 1.0)
}

/// Uhlmann fidelity F(rho, sigma) = (tr sqrt(sqrt(rho) sigma sqrt(rho)))^2.
pub fn fidelity(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(Error::Parameter(format!(
            "fidelity needs equal dimensions, got {} and {}",
            rho.dim(),
            sigma.dim()
        )));
    }
    let s = linalg::sqrtm_psd(rho.matrix())?;
    let mut m = s.dot(sigma.matrix()).dot(&s);
    #[cfg(debug_assertions)]
    {
        let dev = linalg::herm_deviation(&m);
        debug_assert!(dev <= 1e-9, "inner fidelity matrix deviation {dev}");
    }
    linalg::hermitize(&mut m);
    let (eigs, _) = linalg::eigh(&m)?;
    let mut acc = KahanSum::new();
    for &e in eigs.iter() {
        acc.add(e.max(0.0).sqrt());
    }
    Ok((acc.value() * acc.value()).clamp(0.0, 1.0))
}

/// One independently drawn environment copy with its pointer gap and time.
#[derive(Clone, Debug)]
pub struct Realization {
    pub b: HermitianObservable,
    pub rho0: DensityMatrix,
    pub gap: f64,
    pub t: f64,
}

impl Realization {
    /// The per-copy factor of the requested kind.
    pub fn factor(&self, kind: FactorKind) -> f64 {
        match kind {
            FactorKind::Decoherence => decoherence_factor(&self.b, &self.rho0, self.gap, self.t),
            FactorKind::Superfidelity => superfidelity(&self.b, &self.rho0, self.gap, self.t),
        }
    }
}

/// Macrofraction factor of a set of independent copies: the plain product.
pub fn realization_macro(rsl: &[Realization], kind: FactorKind) -> f64 {
    rsl.iter().map(|r| r.factor(kind)).product()
}

/// Sample mean with its standard error.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Estimate {
    pub mean: f64,
    pub stderr: f64,
    pub n: usize,
}

/// Monte Carlo reduction of n evaluations of `f`, each on its own counted
/// RNG substream.
///
/// Deterministic by construction: sample i always sees the same stream no
/// matter how samples are scheduled, and the mean/variance pass over the
/// collected values is sequential. `workers = 0` uses the global thread pool;
/// `workers >= 1` pins a dedicated pool of that size. Both give bitwise
/// identical results.
pub fn estimate<F>(f: F, n: usize, master_seed: u64, workers: usize) -> Result<Estimate>
where
    F: Fn(&mut ChaCha12Rng) -> f64 + Sync,
{
    if n < 2 {
        return Err(Error::Parameter(format!(
            "estimator needs n >= 2 samples, got {n}"
        )));
    }
    let run = || -> Vec<f64> {
        (0..n)
            .into_par_iter()
            .map(|i| {
                let mut rng = substream(master_seed, domain::ESTIMATE, i as u64);
                f(&mut rng)
            })
            .collect()
    };
    let values = if workers == 0 {
        run()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .map_err(|e| Error::Internal(format!("thread pool: {e}")))?;
        pool.install(run)
    };
    let mut mean = 0.0_f64;
    let mut m2 = 0.0_f64;
    for (i, &x) in values.iter().enumerate() {
        if !x.is_finite() {
            return Err(Error::Internal(format!("sample {i} not finite: {x}")));
        }
        let k = (i + 1) as f64;
        let delta = x - mean;
        mean += delta / k;
        m2 += delta * (x - mean);
    }
    let stderr = (m2.max(0.0) / ((n - 1) as f64 * n as f64)).sqrt();
    Ok(Estimate { mean, stderr, n })
}
