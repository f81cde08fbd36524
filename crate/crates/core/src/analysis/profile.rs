use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::TubeSamples;
use crate::merofunc::{Order, PoleRecord, PoleStatus, Provenance};

/// Grid points per period of an extracted profile.
pub const PROFILE_GRID: usize = 4096;

/// Largest disagreement between folded periods, relative to max G, that is
/// still accepted as the same profile.
pub const FOLD_RTOL: f64 = 1e-3;

/// G on a uniform grid of one period: |A_t| = t^{N-D} G(log 1/t).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PeriodicProfile {
    #[serde(rename = "T")]
    pub period: f64,
    #[serde(rename = "D")]
    pub d: f64,
    pub tau_grid: Vec<f64>,
    #[serde(rename = "G_values")]
    pub g_values: Vec<f64>,
    /// number of whole periods folded together
    pub periods: usize,
    /// max |G_p(tau) - G(tau)| over the folded periods p
    pub fold_deviation: f64,
    /// every sample used was flagged exact
    pub exact: bool,
    /// G is constant to rounding, which the oscillating branch excludes
    pub constant: bool,
}

impl PeriodicProfile {
    /// The Fourier transform of G restricted to one period at k/T:
    /// int_0^T e^{-2 pi i k tau / T} G(tau) dtau, by the trapezoid rule,
    /// which is the periodic one on the uniform grid.
    pub fn coefficient(&self, k: i64) -> Complex64 {
        let n = self.g_values.len() as i128;
        let sum: Complex64 = self
            .g_values
            .iter()
            .enumerate()
            .map(|(j, &g)| {
                // reduce k j mod n so the angle stays exact for large k
                let m = (k as i128 * j as i128).rem_euclid(n) as f64;
                Complex64::from_polar(g, -2.0 * PI * m / n as f64)
            })
            .sum();
        sum * (self.period / n as f64)
    }

    pub fn min(&self) -> f64 {
        self.g_values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.g_values.iter().copied().fold(0.0, f64::max)
    }

    /// (1/T) int_0^T G, the average Minkowski content.
    pub fn mean(&self) -> f64 {
        self.g_values.iter().sum::<f64>() / self.g_values.len() as f64
    }
}

pub fn extract_g(tube: &TubeSamples, d: f64, period: f64) -> Result<PeriodicProfile> {
    extract_g_with(tube, d, period, PROFILE_GRID)
}

/// Folds t^{D-N}|A_t| onto tau = log 1/t mod T. The tube is interpolated
/// linearly in t (exact for sets in R sampled at their breakpoints), each
/// whole period inside the sampled range is read on the grid and the
/// periods are averaged; they must agree to FOLD_RTOL.
pub fn extract_g_with(
    tube: &TubeSamples,
    d: f64,
    period: f64,
    grid: usize,
) -> Result<PeriodicProfile> {
    if !(d >= 0.0 && period > 0.0 && period.is_finite()) {
        return Err(Error::InvalidParameters(format!(
            "need D >= 0 and T > 0, got D = {d}, T = {period}"
        )));
    }
    if grid < 16 {
        return Err(Error::InvalidParameters(format!(
            "profile grid of {grid} points is too coarse"
        )));
    }
    let exact = tube.samples.iter().all(|p| p.exact);
    let tube = tube
        .exact_only()
        .map_err(|_| Error::InsufficientSamples("fewer than 2 samples flagged exact".into()))?;
    let n = tube.ambient_dim as f64;
    let (tau_lo, tau_hi) = (-tube.t_max().ln(), -tube.t_min().ln());
    let p0 = (tau_lo / period).ceil() as i64;
    let p1 = (tau_hi / period).floor() as i64;
    let periods = (p1 - p0).max(0) as usize;
    if periods < 3 {
        return Err(Error::InsufficientSamples(format!(
            "tube covers {:.2} periods of length {period}, need 3",
            (tau_hi - tau_lo) / period
        )));
    }
    let tau_grid: Vec<f64> = (0..grid).map(|j| period * j as f64 / grid as f64).collect();
    let mut rows = Vec::with_capacity(periods);
    for p in p0..p1 {
        let row: Vec<f64> = tau_grid
            .iter()
            .map(|&tau| {
                let abs = p as f64 * period + tau;
                let t = (-abs).exp().clamp(tube.t_min(), tube.t_max());
                tube.interpolate(t).expect("inside the sampled range") * t.powf(d - n)
            })
            .collect();
        rows.push(row);
    }
    let g_values: Vec<f64> = (0..grid)
        .map(|j| rows.iter().map(|r| r[j]).sum::<f64>() / periods as f64)
        .collect();
    let gmax = g_values.iter().copied().fold(0.0, f64::max);
    let fold_deviation = rows
        .iter()
        .flat_map(|r| r.iter().zip(&g_values).map(|(a, b)| (a - b).abs()))
        .fold(0.0, f64::max);
    if fold_deviation > FOLD_RTOL * gmax {
        return Err(Error::PeriodMismatch {
            deviation: fold_deviation / gmax,
            tolerance: FOLD_RTOL,
        });
    }
    let gmin = g_values.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(PeriodicProfile {
        period,
        d,
        tau_grid,
        g_values,
        periods,
        fold_deviation,
        exact,
        constant: gmax - gmin <= 1e-9 * gmax,
    })
}

/// Residues (1/T) hat G_0(k/T) of the tube zeta function at
/// s_k = D + 2 pi i k / T, |k| <= k_max, keeping those above the noise
/// floor: 1e-9 max |hat G_0| for exact tubes, ten times the fold deviation
/// (as a coefficient error) otherwise.
pub fn fourier_residues(profile: &PeriodicProfile, k_max: usize) -> Result<Vec<PoleRecord>> {
    let coeffs: Vec<(i64, Complex64)> = (-(k_max as i64)..=k_max as i64)
        .map(|k| (k, profile.coefficient(k)))
        .collect();
    let top = coeffs.iter().map(|c| c.1.norm()).fold(0.0, f64::max);
    if !(top > 0.0 && top.is_finite()) {
        return Err(Error::NoiseFloorUndetermined(format!(
            "largest coefficient is {top}"
        )));
    }
    let floor = if profile.exact {
        1e-9 * top
    } else {
        10.0 * profile.fold_deviation * profile.period
    };
    if !floor.is_finite() || floor >= top {
        return Err(Error::NoiseFloorUndetermined(format!(
            "floor {floor:e} not below the largest coefficient {top:e}"
        )));
    }
    let t = profile.period;
    Ok(coeffs
        .into_iter()
        .filter(|(k, c)| *k == 0 || c.norm() > floor)
        .map(|(k, c)| PoleRecord {
            location: Complex64::new(profile.d, 2.0 * PI * k as f64 / t),
            order: Order::Finite(1),
            residue: c / t,
            provenance: Provenance::NumericFourier,
            status: PoleStatus::Confirmed,
        })
        .collect())
}

/// Residues of the distance zeta function from those of the tube zeta
/// function: res(zeta_A, w) = (N - w) res(tilde zeta_A, w).
pub fn distance_residues_from_tube(
    records: &[PoleRecord],
    ambient_dim: u32,
) -> Result<Vec<PoleRecord>> {
    let n = Complex64::new(ambient_dim as f64, 0.0);
    records
        .iter()
        .map(|r| {
            if (r.location - n).norm() <= 1e-14 * n.norm().max(1.0) {
                return Err(Error::OmegaEqualsN(r.location));
            }
            Ok(PoleRecord {
                residue: r.residue * (n - r.location),
                ..r.clone()
            })
        })
        .collect()
}
