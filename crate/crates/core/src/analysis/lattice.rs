use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::merofunc::roots::{moran_real_root, moran_roots_in};
use crate::strings::group_ratios;

/// Comparison of the roots with log_{1/r} J + (2 pi / log(1/r)) i Z, for J
/// equal ratios r.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LatticeCheck {
    pub real_part: f64,
    pub spacing: f64,
    /// largest distance of a root to the nearest lattice point
    pub max_deviation: f64,
    /// lattice points in the window without a root within tol
    pub missing: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MoranRoots {
    /// the unique real root
    #[serde(rename = "D")]
    pub d: f64,
    /// all roots with imaginary part in the window, sorted by Im then Re
    pub roots: Vec<Complex64>,
    pub lattice: Option<LatticeCheck>,
}

/// Real x with c r^x = 1 + sum of the others, r the smallest ratio: no root
/// of the Moran equation has a smaller real part.
fn left_bound(groups: &[(f64, f64)]) -> f64 {
    let (rm, cm) = *groups.last().expect("nonempty");
    let f = |x: f64| {
        cm * rm.powf(x)
            - 1.0
            - groups[..groups.len() - 1]
                .iter()
                .map(|(r, c)| c * r.powf(x))
                .sum::<f64>()
    };
    let mut hi = moran_real_root(groups);
    let mut lo = hi - 1.0;
    while f(lo) < 0.0 && lo > -1e3 {
        hi = lo;
        lo -= 2.0 * (hi - lo).max(1.0);
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// Complex solutions of sum_j r_j^s = 1 with Im s in `im`, deduplicated
/// within `tol`.
pub fn moran_roots(ratios: &[f64], im: (f64, f64), tol: f64) -> Result<MoranRoots> {
    if ratios.is_empty() || ratios.iter().any(|r| !(*r > 0.0 && *r < 1.0)) {
        return Err(Error::InvalidRatios("ratios must lie in (0, 1)".into()));
    }
    if ratios.iter().sum::<f64>() >= 1.0 {
        return Err(Error::InvalidRatios(format!(
            "sum of ratios {} must be < 1",
            ratios.iter().sum::<f64>()
        )));
    }
    if !(tol > 0.0) || !(im.0 <= im.1) {
        return Err(Error::InvalidParameters(
            "need tol > 0 and a nonempty imaginary window".into(),
        ));
    }
    let groups = group_ratios(ratios);
    let d = moran_real_root(&groups);
    let lo = if groups.len() == 1 {
        d
    } else {
        left_bound(&groups)
    };
    let roots = moran_roots_in(&groups, (lo - tol, d + tol), im, tol)?;
    let lattice = (groups.len() == 1).then(|| {
        let (r, j) = groups[0];
        let real_part = j.ln() / (1.0 / r).ln();
        let spacing = 2.0 * PI / (1.0 / r).ln();
        let nearest = |z: Complex64| Complex64::new(real_part, (z.im / spacing).round() * spacing);
        let max_deviation = roots
            .iter()
            .map(|&z| (z - nearest(z)).norm())
            .fold(0.0, f64::max);
        let k0 = (im.0 / spacing).ceil() as i64;
        let k1 = (im.1 / spacing).floor() as i64;
        let missing = (k0..=k1)
            .filter(|&k| {
                let p = Complex64::new(real_part, k as f64 * spacing);
                !roots.iter().any(|&z| (z - p).norm() < tol)
            })
            .count();
        LatticeCheck {
            real_part,
            spacing,
            max_deviation,
            missing,
        }
    });
    Ok(MoranRoots { d, roots, lattice })
}

fn check_sequence(d: f64, m_seq: &[u64], k: usize, window: f64) -> Result<()> {
    if k == 0 {
        return Err(Error::EmptyUnion);
    }
    if k > m_seq.len() {
        return Err(Error::InvalidParameters(format!(
            "K = {k} exceeds the {} given m_k",
            m_seq.len()
        )));
    }
    if m_seq[0] < 2 || m_seq.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidParameters(
            "m_k must be strictly increasing with m_1 >= 2".into(),
        ));
    }
    if !(d > 0.0 && window > 0.0 && window.is_finite()) {
        return Err(Error::InvalidParameters(format!(
            "need D > 0 and window > 0, got {d}, {window}"
        )));
    }
    Ok(())
}

/// Largest gap between consecutive points of the union over k <= K of the
/// lattices p_k Z, p_k = 2 pi D / log m_k, inside [0, window] (0 included,
/// the stretch from the last point to `window` not counted). A union
/// reduced to {0} has the whole window as its gap.
pub fn hyperfractal_density(d: f64, m_seq: &[u64], k: usize, window: f64) -> Result<f64> {
    check_sequence(d, m_seq, k, window)?;
    let mut pts = vec![0.0f64];
    for &m in &m_seq[..k] {
        let p = 2.0 * PI * d / (m as f64).ln();
        let mut j = 1.0;
        while j * p <= window * (1.0 + 1e-15) {
            pts.push(j * p);
            j += 1.0;
        }
    }
    pts.sort_by(f64::total_cmp);
    if pts.len() == 1 {
        return Ok(window);
    }
    Ok(pts.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max))
}

/// hyperfractal_density for K = 1..=k_max.
pub fn hyperfractal_gaps(d: f64, m_seq: &[u64], k_max: usize, window: f64) -> Result<Vec<f64>> {
    check_sequence(d, m_seq, k_max, window)?;
    (1..=k_max)
        .map(|k| hyperfractal_density(d, m_seq, k, window))
        .collect()
}
