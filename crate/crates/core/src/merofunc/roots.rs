//! Roots of the Moran function h(s) = 1 - sum_j c_j r_j^s.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::numeric::{rpow, ONE, ZERO};

/// h(s) and h'(s) for grouped ratios (r_j, count_j).
pub fn moran_h(ratios: &[(f64, f64)], s: Complex64) -> (Complex64, Complex64) {
    let (mut h, mut dh) = (ONE, ZERO);
    for &(r, c) in ratios {
        let t = rpow(r, s) * c;
        h -= t;
        dh -= t * r.ln();
    }
    (h, dh)
}

/// The unique real root of h (h is increasing on the real line).
pub fn moran_real_root(ratios: &[(f64, f64)]) -> f64 {
    let h = |x: f64| 1.0 - ratios.iter().map(|(r, c)| c * r.powf(x)).sum::<f64>();
    let (mut lo, mut hi) = (-1.0, 1.0);
    while h(lo) > 0.0 {
        lo *= 2.0;
    }
    while h(hi) < 0.0 {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if h(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Newton polish of a root of h from a seed. None when the iteration leaves
/// the region or fails to settle.
pub fn moran_newton(ratios: &[(f64, f64)], seed: Complex64, d: f64) -> Option<Complex64> {
    let mut s = seed;
    for _ in 0..100 {
        let (h, dh) = moran_h(ratios, s);
        let step = h / dh;
        if !step.re.is_finite() || !step.im.is_finite() {
            return None;
        }
        s -= step;
        if s.re > d + 1.0 || (s - seed).norm() > 50.0 {
            return None;
        }
        if step.norm() < 1e-14 * (1.0 + s.norm()) {
            let (h, _) = moran_h(ratios, s);
            return (h.norm() < 1e-10).then_some(s);
        }
    }
    None
}

/// Roots of h in the closed box re x im, found by Newton from a seed grid and
/// deduplicated within `tol`. Every root has Re <= D, the real root.
pub fn moran_roots_in(
    ratios: &[(f64, f64)],
    re: (f64, f64),
    im: (f64, f64),
    tol: f64,
) -> Result<Vec<Complex64>> {
    if !(tol > 0.0) || !(re.0 <= re.1) || !(im.0 <= im.1) {
        return Err(Error::InvalidParameters(
            "empty window or nonpositive tolerance".into(),
        ));
    }
    let d = moran_real_root(ratios);
    let rmin = ratios.iter().map(|r| r.0).fold(1.0, f64::min);
    let step = (0.25 * std::f64::consts::PI / (1.0 / rmin).ln()).min(0.25);
    let (re_lo, re_hi) = (re.0.max(d - 10.0), re.1.min(d));
    let mut out: Vec<Complex64> = Vec::new();
    let inside = |z: Complex64| {
        let e = tol.max(1e-12);
        z.re >= re.0 - e && z.re <= re.1 + e && z.im >= im.0 - e && z.im <= im.1 + e
    };
    let push = |z: Complex64, out: &mut Vec<Complex64>| {
        if inside(z) && !out.iter().any(|w| (w - z).norm() < tol) {
            out.push(z);
        }
    };
    if d >= re.0 && d <= re.1 && im.0 <= 0.0 && im.1 >= 0.0 {
        push(Complex64::new(d, 0.0), &mut out);
    }
    if re_lo > re_hi {
        return Ok(out);
    }
    let nre = 6usize;
    let nim = (((im.1 - im.0) / step).ceil() as usize).max(1);
    let (mut tried, mut failed, mut first_fail) = (0, 0, None);
    for i in 0..nre {
        let x = if nre == 1 {
            re_hi
        } else {
            re_hi - (re_hi - re_lo) * i as f64 / (nre - 1) as f64
        };
        for j in 0..=nim {
            let y = im.0 + (im.1 - im.0) * j as f64 / nim as f64;
            let seed = Complex64::new(x, y);
            tried += 1;
            match moran_newton(ratios, seed, d) {
                Some(z) => push(z, &mut out),
                None => {
                    failed += 1;
                    first_fail.get_or_insert(seed);
                }
            }
        }
    }
    if failed == tried && out.is_empty() {
        return Err(Error::NewtonDiverged {
            seed: first_fail.unwrap_or(ZERO),
        });
    }
    out.sort_by(|a, b| a.im.total_cmp(&b.im).then(a.re.total_cmp(&b.re)));
    Ok(out)
}
