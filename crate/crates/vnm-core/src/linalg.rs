//! Thin complex linear-algebra helpers shared across modules.

use crate::error::Result;
use ndarray::{Array1, Array2};
use ndarray_linalg::{Eigh, UPLO};
use num_complex::Complex64;

pub type CMat = Array2<Complex64>;
pub type CVec = Array1<Complex64>;

/// Hermitian eigendecomposition; eigenvalues ascending (LAPACK order).
pub fn eigh(h: &CMat) -> Result<(Array1<f64>, CMat)> {
    let (vals, mut vecs) = h.eigh(UPLO::Lower)?;
    // LAPACK reads the row-major buffer as its transpose, so the columns it
    // returns are eigenvectors of conj(H); one conjugation restores the
    // standard convention H = V diag(vals) V^dag.
    vecs.mapv_inplace(|z| z.conj());
    Ok((vals, vecs))
}

pub fn adjoint(m: &CMat) -> CMat {
    let mut out = m.t().to_owned();
    out.mapv_inplace(|z| z.conj());
    out
}

/// (M + M†)/2, in place.
pub fn hermitize(m: &mut CMat) {
    let adj = adjoint(m);
    *m += &adj;
    m.mapv_inplace(|z| 0.5 * z);
}

/// max_ij |M_ij - conj(M_ji)|, the Hermiticity deviation.
pub fn herm_deviation(m: &CMat) -> f64 {
    let n = m.nrows();
    let mut dev: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            dev = dev.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    dev
}

pub fn max_abs(m: &CMat) -> f64 {
    m.iter().fold(0.0_f64, |acc, z| acc.max(z.norm()))
}

pub fn trace(m: &CMat) -> Complex64 {
    m.diag().sum()
}

/// tr(A B) for Hermitian A, B: equals the real Frobenius inner product.
pub fn trace_product_hermitian(a: &CMat, b: &CMat) -> f64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for (x, y) in a.iter().zip(b.iter()) {
        acc += x * y.conj();
    }
    acc.re
}

pub fn kron(a: &CMat, b: &CMat) -> CMat {
    let (ar, ac) = a.dim();
    let (br, bc) = b.dim();
    let mut out = CMat::zeros((ar * br, ac * bc));
    for i in 0..ar {
        for j in 0..ac {
            let aij = a[(i, j)];
            for k in 0..br {
                for l in 0..bc {
                    out[(i * br + k, j * bc + l)] = aij * b[(k, l)];
                }
            }
        }
    }
    out
}

/// Partial trace over the factors with keep[i] == false.
/// `dims` lists the tensor factors from most to least significant index.
/// Dense index walk; intended for the small spaces of the micro oracle.
pub fn partial_trace(rho: &CMat, dims: &[usize], keep: &[bool]) -> CMat {
    assert_eq!(dims.len(), keep.len());
    let total: usize = dims.iter().product();
    assert_eq!(rho.nrows(), total);
    assert_eq!(rho.ncols(), total);
    let kept: usize = dims
        .iter()
        .zip(keep)
        .filter(|(_, &k)| k)
        .map(|(&d, _)| d)
        .product();
    let mut out = CMat::zeros((kept, kept));
    let nfac = dims.len();
    let mut digits_r = vec![0usize; nfac];
    let mut digits_c = vec![0usize; nfac];
    for row in 0..total {
        decompose(row, dims, &mut digits_r);
        for col in 0..total {
            decompose(col, dims, &mut digits_c);
            let mut traced_match = true;
            let mut kr = 0usize;
            let mut kc = 0usize;
            for f in 0..nfac {
                if keep[f] {
                    kr = kr * dims[f] + digits_r[f];
                    kc = kc * dims[f] + digits_c[f];
                } else if digits_r[f] != digits_c[f] {
                    traced_match = false;
                    break;
                }
            }
            if traced_match {
                out[(kr, kc)] += rho[(row, col)];
            }
        }
    }
    out
}

fn decompose(mut idx: usize, dims: &[usize], out: &mut [usize]) {
    for f in (0..dims.len()).rev() {
        out[f] = idx % dims[f];
        idx /= dims[f];
    }
}

/// Trace norm of a Hermitian matrix: sum of |eigenvalues|.
pub fn trace_norm_hermitian(m: &CMat) -> Result<f64> {
    let (vals, _) = eigh(m)?;
    Ok(vals.iter().map(|v| v.abs()).sum())
}

/// PSD square root via eigendecomposition; eigenvalues clamped at 0.
pub fn sqrtm_psd(m: &CMat) -> Result<CMat> {
    let (vals, vecs) = eigh(m)?;
    let d = m.nrows();
    let mut out = CMat::zeros((d, d));
    for k in 0..d {
        let s = vals[k].max(0.0).sqrt();
        if s == 0.0 {
            continue;
        }
        for i in 0..d {
            for j in 0..d {
                out[(i, j)] += Complex64::new(s, 0.0) * vecs[(i, k)] * vecs[(j, k)].conj();
            }
        }
    }
    Ok(out)
}

/// exp(i * factor * H) for Hermitian H.
pub fn exp_i_hermitian(h: &CMat, factor: f64) -> Result<CMat> {
    let (vals, vecs) = eigh(h)?;
    let d = h.nrows();
    let mut out = CMat::zeros((d, d));
    for k in 0..d {
        let phase = Complex64::from_polar(1.0, factor * vals[k]);
        for i in 0..d {
            for j in 0..d {
                out[(i, j)] += phase * vecs[(i, k)] * vecs[(j, k)].conj();
            }
        }
    }
    Ok(out)
}

/// Build a diagonal complex matrix from real entries.
pub fn diag_real(entries: &[f64]) -> CMat {
    let d = entries.len();
    let mut m = CMat::zeros((d, d));
    for (i, &x) in entries.iter().enumerate() {
        m[(i, i)] = Complex64::new(x, 0.0);
    }
    m
}

pub fn identity(d: usize) -> CMat {
    diag_real(&vec![1.0; d])
}
