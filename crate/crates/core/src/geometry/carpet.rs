//! The Sierpinski carpet and its iterates: exact distances, exact tube
//! volumes, the per-square decomposition of the distance zeta function and
//! grid quadrature.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::Estimate;
use crate::error::{Error, Result};
use crate::numeric::{pairwise_sum, rpow, ONE};

/// Below this delta the deleted squares are not inside A_delta.
pub const CARPET_MIN_DELTA: f64 = 1.0 / 6.0;

const THIRD: f64 = 1.0 / 3.0;

pub(super) fn distance(x: f64, y: f64, level: Option<u32>) -> f64 {
    let dx = (-x).max(x - 1.0).max(0.0);
    let dy = (-y).max(y - 1.0).max(0.0);
    if dx > 0.0 || dy > 0.0 {
        return dx.hypot(dy);
    }
    let (mut ox, mut oy, mut sc) = (0.0f64, 0.0f64, 1.0f64);
    let max = level.unwrap_or(u32::MAX);
    let mut k = 0;
    while k < max && sc > 1e-300 {
        let u = (x - ox) / sc;
        let v = (y - oy) / sc;
        let i = (3.0 * u).floor().clamp(0.0, 2.0);
        let j = (3.0 * v).floor().clamp(0.0, 2.0);
        if i == 1.0 && j == 1.0 {
            let d = (u - THIRD)
                .min(2.0 * THIRD - u)
                .min(v - THIRD)
                .min(2.0 * THIRD - v);
            return d.max(0.0) * sc;
        }
        ox += i * sc * THIRD;
        oy += j * sc * THIRD;
        sc *= THIRD;
        k += 1;
    }
    0.0
}

/// |A_t| = 1 + 4t + pi t^2 - sum_k 8^{k-1} (3^{-k} - 2t)_+^2 rearranged so
/// that nothing cancels as t -> 0: each deleted square of side a contributes
/// the area 4ta - 4t^2 of its inner collar while a > 2t and its full area
/// afterwards.
pub(super) fn tube(t: f64, level: Option<u32>) -> f64 {
    let max = level.unwrap_or(u32::MAX);
    let mut v = 4.0 * t + PI * t * t + level.map_or(0.0, |l| (8.0f64 / 9.0).powi(l as i32));
    let mut k = 1u32;
    // ca = 8^{k-1} a_k stays finite where 8^{k-1} alone would overflow
    let (mut a, mut ca) = (THIRD, THIRD);
    while k <= max && a > 2.0 * t {
        v += 4.0 * t * ca * (1.0 - t / a);
        k += 1;
        a *= THIRD;
        ca *= 8.0 * THIRD;
    }
    if k <= max {
        // squares k..=level are fully covered: sum 8^{j-1} 9^{-j}
        let q = 8.0f64 / 9.0;
        let head = q.powi(k as i32) * 9.0 / 8.0;
        let tail = level.map_or(0.0, |l| q.powi(l as i32 + 1) * 9.0 / 8.0);
        v += head - tail;
    }
    v
}

pub(super) fn tube_grid(t: f64, level: Option<u32>, resolution: usize) -> Result<Estimate<f64>> {
    if resolution < 64 {
        return Err(Error::GridTooCoarse(format!(
            "resolution {resolution} < 64"
        )));
    }
    if !(t > 0.0) {
        return Err(Error::InvalidParameters(format!(
            "tube radius must be > 0, got {t}"
        )));
    }
    let h = (1.0 + 2.0 * t) / resolution as f64;
    let half_diag = h * std::f64::consts::FRAC_1_SQRT_2;
    let (mut inside, mut undecided) = (0usize, 0usize);
    for i in 0..resolution {
        let x = -t + (i as f64 + 0.5) * h;
        for j in 0..resolution {
            let d = distance(x, -t + (j as f64 + 0.5) * h, level);
            if d < t {
                inside += 1;
            }
            if (d - t).abs() <= half_diag {
                undecided += 1;
            }
        }
    }
    let value = inside as f64 * h * h;
    let error = undecided as f64 * h * h;
    if error > 0.5 * value {
        return Err(Error::GridTooCoarse(format!(
            "cell size {h:e} too large for t = {t:e}"
        )));
    }
    Ok(Estimate { value, error })
}

fn grid_sum(s: Complex64, delta: f64, level: Option<u32>, n: usize) -> Result<Complex64> {
    let h = (1.0 + 2.0 * delta) / n as f64;
    let area = h * h;
    let p = s - 2.0;
    let two = Complex64::new(2.0, 0.0);
    let mut rows = Vec::with_capacity(n);
    for i in 0..n {
        let x = -delta + (i as f64 + 0.5) * h;
        let mut row = Vec::with_capacity(n);
        for j in 0..n {
            let d = distance(x, -delta + (j as f64 + 0.5) * h, level);
            if d >= delta {
                continue;
            }
            if d == 0.0 {
                // a cell centre on A: 0^{s-2}
                if s == two {
                    row.push(ONE * area);
                } else if s.re <= 2.0 {
                    return Err(Error::DivergentAt(s));
                }
                continue;
            }
            row.push((p * d.ln()).exp() * area);
        }
        rows.push(pairwise_sum(&row));
    }
    Ok(pairwise_sum(&rows))
}

pub(super) fn distance_zeta_grid(
    s: Complex64,
    delta: f64,
    level: Option<u32>,
    resolution: usize,
) -> Result<Estimate<Complex64>> {
    if resolution < 64 {
        return Err(Error::GridTooCoarse(format!(
            "resolution {resolution} < 64"
        )));
    }
    if s.re <= 1.0 {
        // the carpet contains segments, along which d^{s-2} is not integrable
        return Err(Error::DivergentAt(s));
    }
    let fine = grid_sum(s, delta, level, resolution)?;
    let coarse = grid_sum(s, delta, level, resolution / 2)?;
    Ok(Estimate {
        value: fine,
        error: (fine - coarse).norm(),
    })
}

/// Distance zeta of an open square of side a relative to its boundary:
/// four right triangles give 8 2^{-s} a^s / (s (s-1)).
pub fn carpet_square_zeta(a: f64, s: Complex64) -> Complex64 {
    rpow(2.0, -s) * rpow(a, s) * 8.0 / (s * (s - 1.0))
}

/// Distance zeta function of the carpet (or an iterate) assembled from the
/// deleted squares and the outer collar 2 pi delta^s / s + 4 delta^{s-1}/(s-1).
pub fn carpet_distance_zeta_exact(
    level: Option<u32>,
    s: Complex64,
    delta: f64,
) -> Result<Complex64> {
    if delta < CARPET_MIN_DELTA {
        return Err(Error::DeltaTooSmall {
            delta,
            min: CARPET_MIN_DELTA,
        });
    }
    if s.re <= 1.0 {
        return Err(Error::DivergentAt(s));
    }
    if s == Complex64::new(2.0, 0.0) {
        return Ok(Complex64::new(tube(delta, level), 0.0));
    }
    let collar = rpow(delta, s) * 2.0 * PI / s + rpow(delta, s - 1.0) * 4.0 / (s - 1.0);
    let squares = match level {
        None => rpow(2.0, -s) * 8.0 / (s * (s - 1.0) * (rpow(3.0, s) - 8.0)),
        Some(l) => {
            let terms: Vec<Complex64> = (1..=l as i32)
                .map(|k| carpet_square_zeta(3f64.powi(-k), s) * 8f64.powi(k - 1))
                .collect();
            if s.re < 2.0 {
                // the remaining squares have positive area
                return Err(Error::DivergentAt(s));
            }
            pairwise_sum(&terms)
        }
    };
    Ok(collar + squares)
}

/// (x, y, side) of every deleted square up to `level` (at most 7).
pub fn deleted_squares(level: u32) -> Result<Vec<(f64, f64, f64)>> {
    if level > 7 {
        return Err(Error::InvalidParameters(format!(
            "listing carpet squares is limited to level 7, got {level}"
        )));
    }
    let mut out = Vec::new();
    let mut cells = vec![(0.0f64, 0.0f64)];
    let mut sc = 1.0f64;
    for _ in 0..level {
        let a = sc * THIRD;
        let mut next = Vec::with_capacity(cells.len() * 8);
        for (x, y) in cells {
            for i in 0..3 {
                for j in 0..3 {
                    let (cx, cy) = (x + i as f64 * a, y + j as f64 * a);
                    if i == 1 && j == 1 {
                        out.push((cx, cy, a));
                    } else {
                        next.push((cx, cy));
                    }
                }
            }
        }
        cells = next;
        sc = a;
    }
    Ok(out)
}
