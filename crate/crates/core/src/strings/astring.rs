//! The a-string l_j = j^{-a} - (j+1)^{-a}: stable lengths, rank queries and
//! an asymptotic expansion of its Dirichlet tails.

use num_complex::Complex64;

use crate::numeric::{hurwitz_zeta, rpow, ONE, ZERO};

/// l_j computed without cancellation for large j.
#[inline]
pub fn length(a: f64, j: f64) -> f64 {
    -j.powf(-a) * (-a * (1.0 / j).ln_1p()).exp_m1()
}

/// Number of indices j >= 1 with l_j >= x (as a float; exact below 2^53).
pub fn count_at_least(a: f64, x: f64) -> f64 {
    if !(x > 0.0) {
        return f64::INFINITY;
    }
    if x > length(a, 1.0) {
        return 0.0;
    }
    // a (j+1)^{-a-1} <= l_j <= a j^{-a-1}
    let r = (a / x).powf(1.0 / (a + 1.0));
    let mut lo = (r - 1.0).floor().max(1.0);
    let mut hi = r.ceil() + 1.0;
    while length(a, lo) < x && lo > 1.0 {
        lo = (lo * 0.5).floor().max(1.0);
    }
    while length(a, hi) >= x {
        hi *= 2.0;
    }
    // invariant: l_lo >= x > l_hi
    while hi - lo > 1.0 && hi - lo > hi * 4e-16 {
        let mid = (0.5 * (lo + hi)).floor();
        let mid = if mid <= lo {
            lo + 1.0
        } else if mid >= hi {
            hi - 1.0
        } else {
            mid
        };
        if length(a, mid) >= x {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// Smallest index from which the tail expansion is used.
pub fn em_start(a: f64, s: Complex64) -> f64 {
    let p = (a + 1.0) * s.norm();
    (p + 64.0).max(64.0).ceil()
}

/// sum_{j >= j0} l_j^s via l_j^s = a^s j^{-(a+1)s} sum_n q_n j^{-n} and
/// Hurwitz zeta values. Valid for every s with (a+1)s != 1 once j0 >= em_start.
pub fn tail_sum(a: f64, s: Complex64, j0: f64) -> (Complex64, f64) {
    const NMAX: usize = 60;
    // 1 - (1+x)^{-a} = a x P(x),  P = sum p_n x^n
    let mut p = [0.0f64; NMAX + 1];
    p[0] = 1.0;
    for k in 1..=NMAX {
        p[k] = p[k - 1] * (-(a + k as f64) / (k as f64 + 1.0));
    }
    // Q = P^s by the power recurrence
    let mut q = vec![ZERO; NMAX + 1];
    q[0] = ONE;
    let z0 = s * (a + 1.0);
    let (mut sum, mut err) = (ZERO, 0.0);
    for n in 0..=NMAX {
        if n > 0 {
            let mut acc = ZERO;
            for k in 1..=n {
                acc += ((s + 1.0) * k as f64 - n as f64) * p[k] * q[n - k];
            }
            q[n] = acc / n as f64;
        }
        let (h, e) = hurwitz_zeta(z0 + n as f64, j0);
        let term = q[n] * h;
        sum += term;
        err += q[n].norm() * e;
        if n > 2 && term.norm() < 1e-18 * sum.norm() {
            err += term.norm();
            break;
        }
    }
    let scale = rpow(a, s);
    (scale * sum, scale.norm() * err)
}

/// Meromorphic continuation of the a-string zeta function, pole at s = 1/(a+1).
pub fn zeta_continued(a: f64, s: Complex64) -> Complex64 {
    let j0 = em_start(a, s);
    let mut head = ZERO;
    let mut j = 1.0;
    while j < j0 {
        head += rpow(length(a, j), s);
        j += 1.0;
    }
    head + tail_sum(a, s, j0).0
}
