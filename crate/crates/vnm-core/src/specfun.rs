//! Special functions for the spectral-average formulas: probabilist Hermite
//! polynomials, harmonic-oscillator wavefunctions, associated Laguerre
//! polynomials, the displacement overlap J_{n,m}, the Christoffel-Darboux
//! kernel K_d, and the eigenvalue 2-point correlation R2.
//!
//! Stability envelope (documented, enforced): kernel dimension d <= 64,
//! arguments |x| <= 40, displacement |alpha| <= 20. Factorial ratios go
//! through log space; polynomial sums use compensated summation.

use crate::error::{Error, Result};
use crate::quad::KahanSum;
use num_complex::Complex64;
use std::sync::OnceLock;

/// Largest kernel dimension (number of wavefunctions) supported.
pub const MAX_DIM: usize = 64;
/// Largest |x| for wavefunction and kernel evaluation.
pub const MAX_ARG: f64 = 40.0;
/// Largest |alpha| for displacement overlaps.
pub const MAX_ALPHA: f64 = 20.0;

const LN_FACT_LEN: usize = 256;

/// ln(n!) from a cached table of compensated partial sums of ln k.
pub(crate) fn ln_factorial(n: usize) -> f64 {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    let table = TABLE.get_or_init(|| {
        let mut t = Vec::with_capacity(LN_FACT_LEN);
        let mut acc = KahanSum::new();
        t.push(0.0);
        for k in 1..LN_FACT_LEN {
            acc.add((k as f64).ln());
            t.push(acc.value());
        }
        t
    });
    table[n]
}

/// Probabilist Hermite polynomial He_n(x) by the three-term recurrence
/// He_{n+1} = x He_n - n He_{n-1}.
pub fn hermite_he(n: usize, x: f64) -> f64 {
    if n == 0 {
        return 1.0;
    }
    let mut prev = 1.0;
    let mut cur = x;
    for k in 1..n {
        let next = x * cur - k as f64 * prev;
        prev = cur;
        cur = next;
    }
    cur
}

fn check_arg(x: f64) -> Result<()> {
    if !x.is_finite() || x.abs() > MAX_ARG {
        return Err(Error::Envelope(format!(
            "argument {x} outside |x| <= {MAX_ARG}"
        )));
    }
    Ok(())
}

/// phi_n from an already computed He_n(x). Direct normalization while n! is
/// exact in f64; log space above n = 20.
fn phi_from_he(n: usize, he: f64, x: f64) -> Result<f64> {
    let quarter_sq = 0.25 * x * x;
    let v = if n <= 20 {
        let mut fact = 1.0;
        for k in 1..=n {
            fact *= k as f64;
        }
        he * (-quarter_sq).exp() / ((2.0 * std::f64::consts::PI).sqrt() * fact).sqrt()
    } else {
        let ln_norm = 0.25 * (2.0 * std::f64::consts::PI).ln() + 0.5 * ln_factorial(n);
        he.signum() * (he.abs().ln() - quarter_sq - ln_norm).exp()
    };
    if !v.is_finite() {
        return Err(Error::Envelope(format!(
            "oscillator wavefunction overflow at n = {n}, x = {x}"
        )));
    }
    Ok(v)
}

/// Oscillator wavefunction phi_n(x) = He_n(x) e^{-x^2/4} / sqrt(sqrt(2 pi) n!).
pub fn oscillator_phi(n: usize, x: f64) -> Result<f64> {
    check_arg(x)?;
    if n >= MAX_DIM {
        return Err(Error::Envelope(format!("n = {n} outside n < {MAX_DIM}")));
    }
    phi_from_he(n, hermite_he(n, x), x)
}

/// Associated Laguerre polynomial L_n^{(alpha)}(x), standardization with
/// leading coefficient (-1)^n / n!.
pub fn laguerre(n: usize, alpha: usize, x: f64) -> f64 {
    debug_assert!(x >= 0.0, "laguerre defined here for x >= 0");
    let a = alpha as f64;
    if n == 0 {
        return 1.0;
    }
    let mut prev = 1.0;
    let mut cur = 1.0 + a - x;
    for k in 1..n {
        let kf = k as f64;
        let next = ((2.0 * kf + 1.0 + a - x) * cur - (kf + a) * prev) / (kf + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

/// Displacement overlap J_{n,m}(alpha) = integral of phi_n phi_m e^{i alpha x}.
///
/// Closed form (indices ordered so m >= n):
/// e^{-alpha^2/2} sqrt(n!/m!) (i alpha)^{m-n} L_n^{(m-n)}(alpha^2).
pub fn displacement_overlap(n: usize, m: usize, alpha: f64) -> Result<Complex64> {
    if !alpha.is_finite() || alpha.abs() > MAX_ALPHA {
        return Err(Error::Envelope(format!(
            "alpha = {alpha} outside |alpha| <= {MAX_ALPHA}"
        )));
    }
    let (lo, hi) = if m >= n { (n, m) } else { (m, n) };
    if hi >= MAX_DIM {
        return Err(Error::Envelope(format!(
            "index {hi} outside n, m < {MAX_DIM}"
        )));
    }
    let j = hi - lo;
    let x = alpha * alpha;
    let lag = laguerre(lo, j, x);
    let ln_ratio = 0.5 * (ln_factorial(lo) - ln_factorial(hi));
    let ln_alpha_pow = if j == 0 { 0.0 } else { j as f64 * alpha.abs().ln() };
    let magnitude = (-0.5 * x + ln_ratio + ln_alpha_pow).exp() * lag;
    // (i alpha)^j = i^j sign(alpha)^j |alpha|^j; i^j cycles with period 4.
    let sign = if alpha < 0.0 && j % 2 == 1 { -1.0 } else { 1.0 };
    let phased = match j % 4 {
        0 => Complex64::new(magnitude, 0.0),
        1 => Complex64::new(0.0, magnitude),
        2 => Complex64::new(-magnitude, 0.0),
        _ => Complex64::new(0.0, -magnitude),
    } * sign;
    if !phased.re.is_finite() || !phased.im.is_finite() {
        return Err(Error::Envelope(format!(
            "displacement overlap overflow at n = {n}, m = {m}, alpha = {alpha}"
        )));
    }
    Ok(phased)
}

/// Evaluation context for the rank-d projector kernel
/// K(x, y) = sum_{j<d} phi_j(x) phi_j(y) and R2(x, y) = K(x,x)K(y,y) - K(x,y)^2.
/// Holds per-thread wavefunction buffers; not shared across threads.
#[derive(Clone, Debug)]
pub struct KernelContext {
    d: usize,
    buf_x: Vec<f64>,
    buf_y: Vec<f64>,
}

impl KernelContext {
    pub fn new(d: usize) -> Result<Self> {
        if d == 0 || d > MAX_DIM {
            return Err(Error::Envelope(format!(
                "kernel dimension {d} outside 1..={MAX_DIM}"
            )));
        }
        Ok(KernelContext {
            d,
            buf_x: vec![0.0; d],
            buf_y: vec![0.0; d],
        })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    /// Fill out[j] = phi_j(x) for j < d with a single He recurrence pass.
    fn fill(d: usize, x: f64, out: &mut [f64]) -> Result<()> {
        check_arg(x)?;
        let mut prev = 1.0; // He_{j-1}
        let mut cur = x; // He_j for j = 1
        out[0] = phi_from_he(0, 1.0, x)?;
        if d == 1 {
            return Ok(());
        }
        out[1] = phi_from_he(1, cur, x)?;
        for j in 2..d {
            let next = x * cur - (j - 1) as f64 * prev;
            prev = cur;
            cur = next;
            out[j] = phi_from_he(j, cur, x)?;
        }
        Ok(())
    }

    pub fn kernel_k(&mut self, x: f64, y: f64) -> Result<f64> {
        Self::fill(self.d, x, &mut self.buf_x)?;
        Self::fill(self.d, y, &mut self.buf_y)?;
        let mut acc = KahanSum::new();
        for j in 0..self.d {
            acc.add(self.buf_x[j] * self.buf_y[j]);
        }
        Ok(acc.value())
    }

    /// R2(x, y); exactly zero on the diagonal by construction.
    pub fn r2(&mut self, x: f64, y: f64) -> Result<f64> {
        Self::fill(self.d, x, &mut self.buf_x)?;
        Self::fill(self.d, y, &mut self.buf_y)?;
        let mut kxx = KahanSum::new();
        let mut kyy = KahanSum::new();
        let mut kxy = KahanSum::new();
        for j in 0..self.d {
            kxx.add(self.buf_x[j] * self.buf_x[j]);
            kyy.add(self.buf_y[j] * self.buf_y[j]);
            kxy.add(self.buf_x[j] * self.buf_y[j]);
        }
        Ok(kxx.value() * kyy.value() - kxy.value() * kxy.value())
    }
}
