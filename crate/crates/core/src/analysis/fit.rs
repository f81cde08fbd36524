use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::TubeSamples;
use crate::numeric::{linear_fit, LineFit};

/// Coefficient of variation of the detrended tube above which the
/// oscillating (non-measurable) branch is chosen.
pub const PERIODIC_CV: f64 = 1e-3;

/// Points per decade of the uniform log grid the fits run on.
const GRID_PER_DECADE: f64 = 32.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    Measurable,
    Periodic,
}

/// |A_t| ~ t^{N-D} (M + O(t^alpha)) in the measurable case, and
/// t^{N-D} G(log 1/t) with G oscillating otherwise.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MinkowskiFit {
    #[serde(rename = "D")]
    pub d: f64,
    /// content, measurable branch only
    #[serde(rename = "M")]
    pub m: Option<f64>,
    /// min and max of t^{D-N}|A_t| over the final sampled decade
    #[serde(rename = "M_lower")]
    pub m_lower: f64,
    #[serde(rename = "M_upper")]
    pub m_upper: f64,
    /// exponent of the correction t^{D-N}|A_t| - M, when it is resolved
    pub alpha: Option<f64>,
    pub branch: Branch,
    /// rms of the log-log fit
    pub residual: f64,
    pub ambient_dim: u32,
}

/// (ln t, ln |A_t|) on a uniform grid in ln t over [lo, hi].
fn log_grid(tube: &TubeSamples, lo: f64, hi: f64) -> (Vec<f64>, Vec<f64>) {
    let n = ((hi / lo).log10() * GRID_PER_DECADE).ceil().max(8.0) as usize;
    let (a, b) = (lo.ln(), hi.ln());
    (0..=n)
        .filter_map(|i| {
            let x = a + (b - a) * i as f64 / n as f64;
            let v = tube.interpolate(x.exp().clamp(lo, hi))?;
            (v > 0.0).then(|| (x, v.ln()))
        })
        .unzip()
}

fn fit_on(tube: &TubeSamples, lo: f64, hi: f64) -> Result<(LineFit, Vec<f64>, Vec<f64>)> {
    let (x, y) = log_grid(tube, lo, hi);
    let f = linear_fit(&x, &y)
        .ok_or_else(|| Error::InsufficientSamples("not enough positive samples to fit".into()))?;
    Ok((f, x, y))
}

fn coefficient_of_variation(v: &[f64]) -> f64 {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    var.sqrt() / mean
}

/// Minkowski dimension and content bounds from a sampled tube function.
/// Only samples flagged exact are used; they must span 3 decades.
///
/// The final decade decides the branch: a fit there is free of the
/// oscillation only if the set is measurable. Measurable sets keep that fit
/// (it sees the least of the O(t^alpha) correction); oscillating ones are
/// refitted over the whole range, which averages over many periods.
pub fn fit_minkowski(tube: &TubeSamples) -> Result<MinkowskiFit> {
    let tube = tube
        .exact_only()
        .map_err(|_| Error::InsufficientSamples("fewer than 2 samples flagged exact".into()))?;
    if tube.decades() < 3.0 - 1e-9 {
        return Err(Error::InsufficientSamples(format!(
            "exact samples span {:.2} decades, need 3",
            tube.decades()
        )));
    }
    let n = tube.ambient_dim as f64;
    let (t_lo, t_hi) = (tube.t_min(), tube.t_max());
    let last_hi = 10.0 * t_lo;
    let (last, x, y) = fit_on(&tube, t_lo, last_hi)?;
    let detrended: Vec<f64> = x
        .iter()
        .zip(&y)
        .map(|(x, y)| (y - last.slope * x - last.intercept).exp())
        .collect();
    let cv = coefficient_of_variation(&detrended);
    let branch = if cv > PERIODIC_CV {
        Branch::Periodic
    } else {
        Branch::Measurable
    };
    let fit = match branch {
        Branch::Measurable => last,
        Branch::Periodic => fit_on(&tube, t_lo, t_hi)?.0,
    };
    let d = n - fit.slope;
    if !(d >= -1e-9 && d <= n + 1e-9) {
        return Err(Error::DegenerateFit(format!(
            "slope {} gives D = {d} outside [0, {n}]",
            fit.slope
        )));
    }
    let d = d.clamp(0.0, n);

    // content proxies over the final decade: grid points and the samples
    let scaled = |t: f64, v: f64| v * t.powf(d - n);
    let mut w: Vec<f64> = x
        .iter()
        .zip(&y)
        .map(|(x, y)| scaled(x.exp(), y.exp()))
        .collect();
    w.extend(
        tube.samples
            .iter()
            .filter(|p| p.t <= last_hi)
            .map(|p| scaled(p.t, p.volume)),
    );
    let m_lower = w.iter().copied().fold(f64::INFINITY, f64::min);
    let m_upper = w.iter().copied().fold(0.0, f64::max);

    let (m, alpha) = match branch {
        Branch::Periodic => (None, None),
        Branch::Measurable => {
            let m = fit.intercept.exp();
            (Some(m), correction_exponent(&tube, d, m))
        }
    };
    Ok(MinkowskiFit {
        d,
        m,
        m_lower,
        m_upper,
        alpha,
        branch,
        residual: fit.rms,
        ambient_dim: tube.ambient_dim,
    })
}

/// Slope of log |t^{D-N}|A_t|/M - 1| against log t where the relative
/// correction is between 1e-3 (below, errors in D and M dominate) and 0.5;
/// None when too few grid points qualify.
fn correction_exponent(tube: &TubeSamples, d: f64, m: f64) -> Option<f64> {
    let n = tube.ambient_dim as f64;
    let (x, y) = log_grid(tube, tube.t_min(), tube.t_max());
    let (u, v): (Vec<f64>, Vec<f64>) = x
        .iter()
        .zip(&y)
        .filter_map(|(&lx, &ly)| {
            let r = ((ly + (d - n) * lx).exp() / m - 1.0).abs();
            (r > 1e-3 && r < 0.5).then(|| (lx, r.ln()))
        })
        .unzip();
    if u.len() < 8 {
        return None;
    }
    let f = linear_fit(&u, &v)?;
    (f.slope > 0.0).then_some(f.slope)
}

/// Period (in log 1/t) of the oscillation of the detrended tube, from the
/// first autocorrelation peak. Advisory only: None when no clear peak.
pub fn detect_period(tube: &TubeSamples) -> Option<f64> {
    let tube = tube.exact_only().ok()?;
    let (x, y) = log_grid(&tube, tube.t_min(), tube.t_max());
    let f = linear_fit(&x, &y)?;
    let r: Vec<f64> = x
        .iter()
        .zip(&y)
        .map(|(x, y)| y - f.slope * x - f.intercept)
        .collect();
    let n = r.len();
    if n < 32 {
        return None;
    }
    let h = (x[n - 1] - x[0]) / (n - 1) as f64;
    let c0: f64 = r.iter().map(|v| v * v).sum::<f64>() / n as f64;
    if c0 <= 0.0 {
        return None;
    }
    let acf: Vec<f64> = (0..n / 2)
        .map(|lag| (0..n - lag).map(|i| r[i] * r[i + lag]).sum::<f64>() / ((n - lag) as f64 * c0))
        .collect();
    let first_neg = acf.iter().position(|&a| a < 0.0)?;
    let mut best = None;
    for k in first_neg.max(1)..acf.len() - 1 {
        if acf[k] >= acf[k - 1] && acf[k] >= acf[k + 1] {
            best = Some(k);
            break;
        }
    }
    let k = best?;
    if acf[k] < 0.5 {
        return None;
    }
    // parabolic refinement of the peak
    let (a, b, c) = (acf[k - 1], acf[k], acf[k + 1]);
    let den = a - 2.0 * b + c;
    let shift = if den != 0.0 { 0.5 * (a - c) / den } else { 0.0 };
    Some((k as f64 + shift) * h)
}
