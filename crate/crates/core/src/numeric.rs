//! Small numerical kernels shared by the modules.

use num_complex::Complex64;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// `base^s` for real `base > 0`, principal branch `exp(s ln base)`.
#[inline]
pub fn rpow(base: f64, s: Complex64) -> Complex64 {
    (s * base.ln()).exp()
}

/// `exp(ln_base * s)`, for bases given by their logarithm (n! for large n).
#[inline]
pub fn rpow_ln(ln_base: f64, s: Complex64) -> Complex64 {
    (s * ln_base).exp()
}

/// Complex `exp(z) - 1` without cancellation for small |z|.
pub fn expm1(z: Complex64) -> Complex64 {
    let (x, y) = (z.re, z.im);
    let em1 = x.exp_m1();
    let s2 = (0.5 * y).sin();
    Complex64::new(em1 * y.cos() - 2.0 * s2 * s2, x.exp() * y.sin())
}

/// `(exp(z) - 1)/z`, equal to 1 at z = 0.
pub fn exprel(z: Complex64) -> Complex64 {
    if z.norm() < 1e-5 {
        ONE + z * (0.5 + z * (1.0 / 6.0 + z / 24.0))
    } else {
        expm1(z) / z
    }
}

/// Deterministic pairwise summation; the order of operations depends only on
/// the length of the slice.
pub fn pairwise_sum(v: &[Complex64]) -> Complex64 {
    if v.len() <= 32 {
        return v.iter().fold(ZERO, |a, &b| a + b);
    }
    let mid = v.len() / 2;
    pairwise_sum(&v[..mid]) + pairwise_sum(&v[mid..])
}

pub fn pairwise_sum_real(v: &[f64]) -> f64 {
    if v.len() <= 32 {
        return v.iter().sum();
    }
    let mid = v.len() / 2;
    pairwise_sum_real(&v[..mid]) + pairwise_sum_real(&v[mid..])
}

/// Ordinary least squares `y = slope x + intercept`.
#[derive(Clone, Copy, Debug)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    /// Standard error of the slope.
    pub slope_se: f64,
    /// Root mean square of the residuals.
    pub rms: f64,
}

pub fn linear_fit(x: &[f64], y: &[f64]) -> Option<LineFit> {
    let n = x.len();
    if n < 2 || y.len() != n {
        return None;
    }
    let nf = n as f64;
    let mx = x.iter().sum::<f64>() / nf;
    let my = y.iter().sum::<f64>() / nf;
    let (mut sxx, mut sxy) = (0.0, 0.0);
    for i in 0..n {
        let dx = x[i] - mx;
        sxx += dx * dx;
        sxy += dx * (y[i] - my);
    }
    if sxx <= 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss: f64 = (0..n)
        .map(|i| {
            let r = y[i] - slope * x[i] - intercept;
            r * r
        })
        .sum();
    let rms = (ss / nf).sqrt();
    let slope_se = if n > 2 {
        (ss / (nf - 2.0) / sxx).sqrt()
    } else {
        0.0
    };
    Some(LineFit {
        slope,
        intercept,
        slope_se,
        rms,
    })
}

/// B_2, B_4, ..., B_30.
const BERNOULLI_EVEN: [f64; 15] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
    43867.0 / 798.0,
    -174611.0 / 330.0,
    854513.0 / 138.0,
    -236364091.0 / 2730.0,
    8553103.0 / 6.0,
    -23749461029.0 / 870.0,
    8615841276005.0 / 14322.0,
];

/// Hurwitz zeta `sum_{j>=0} (n + j)^{-z}` by Euler-Maclaurin at the base
/// point `n`. Accurate when `n` is large compared with `|z|/(2 pi)`; callers
/// pick `n >= max(64, |z|)`. Returns the value and the size of the last
/// correction term as an error estimate. Valid for every `z != 1`.
pub fn hurwitz_zeta(z: Complex64, n: f64) -> (Complex64, f64) {
    let nz = rpow(n, -z);
    let mut sum = nz * n / (z - 1.0) + nz * 0.5;
    // rising factorial (z)_{2k-1} and n^{-z-2k+1}
    let mut rising = z;
    let mut pw = nz / n;
    let mut fact = 2.0; // (2k)!
    let mut err = f64::INFINITY;
    for (k, b) in BERNOULLI_EVEN.iter().enumerate() {
        let k = k + 1;
        let term = rising * pw * (b / fact);
        sum += term;
        let t = term.norm();
        if t > err && k > 3 {
            // asymptotic series started to grow; the previous term is the error scale
            sum -= term;
            break;
        }
        err = t;
        if t <= 1e-18 * sum.norm() {
            break;
        }
        let kk = 2.0 * k as f64;
        rising = rising * (z + (kk - 1.0)) * (z + kk);
        pw /= n * n;
        fact *= (kk + 1.0) * (kk + 2.0);
    }
    (sum, err)
}
