//! Sampled tube functions and the tube zeta function computed from them.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{carpet, line::Line, BoundedSet};
use crate::error::{Error, Result};
use crate::numeric::{exprel, linear_fit, pairwise_sum, rpow, ZERO};

/// At most this many breakpoints of a piecewise linear tube are added as
/// extra sample nodes (the largest ones).
pub const KINK_CAP: usize = 100_000;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TubeSample {
    pub t: f64,
    pub volume: f64,
    /// the value is that of the set itself (limit set for iterates), not a
    /// proxy below the resolution of the representation
    pub exact: bool,
}

/// Samples of t -> |A_t| with t strictly decreasing.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TubeSamples {
    pub ambient_dim: u32,
    pub samples: Vec<TubeSample>,
}

impl TubeSamples {
    pub fn new(ambient_dim: u32, samples: Vec<TubeSample>) -> Result<Self> {
        if samples.len() < 2 {
            return Err(Error::InsufficientSamples(format!(
                "{} samples",
                samples.len()
            )));
        }
        for w in samples.windows(2) {
            if !(w[1].t < w[0].t) {
                return Err(Error::InvalidParameters(
                    "sample radii must be strictly decreasing".into(),
                ));
            }
            if w[1].volume > w[0].volume * (1.0 + 1e-12) {
                return Err(Error::InvalidParameters(format!(
                    "tube volume increases as t decreases at t = {:e}",
                    w[1].t
                )));
            }
        }
        if samples
            .iter()
            .any(|p| !(p.t > 0.0 && p.volume >= 0.0 && p.volume.is_finite()))
        {
            return Err(Error::InvalidParameters(
                "samples need t > 0 and finite volume >= 0".into(),
            ));
        }
        Ok(TubeSamples {
            ambient_dim,
            samples,
        })
    }

    /// Log-spaced samples of an arbitrary tube function, all flagged exact.
    pub fn from_fn(
        ambient_dim: u32,
        t_min: f64,
        t_max: f64,
        n_per_decade: usize,
        f: impl Fn(f64) -> f64,
    ) -> Result<Self> {
        let nodes = log_nodes(t_min, t_max, n_per_decade)?;
        Self::new(
            ambient_dim,
            nodes
                .into_iter()
                .map(|t| TubeSample {
                    t,
                    volume: f(t),
                    exact: true,
                })
                .collect(),
        )
    }

    pub fn t_max(&self) -> f64 {
        self.samples[0].t
    }

    pub fn t_min(&self) -> f64 {
        self.samples[self.samples.len() - 1].t
    }

    pub fn decades(&self) -> f64 {
        (self.t_max() / self.t_min()).log10()
    }

    /// The samples flagged exact, as a tube of their own.
    pub fn exact_only(&self) -> Result<TubeSamples> {
        Self::new(
            self.ambient_dim,
            self.samples.iter().copied().filter(|p| p.exact).collect(),
        )
    }

    /// |A_t| interpolated linearly in t; exact for tubes in R when the
    /// breakpoints are sample nodes. None outside [t_min, t_max].
    pub fn interpolate(&self, t: f64) -> Option<f64> {
        let smp = &self.samples;
        if !(t <= self.t_max() && t >= self.t_min()) {
            return None;
        }
        // first index with sample t < t
        let i = smp.partition_point(|p| p.t >= t);
        if i == 0 {
            return Some(smp[0].volume);
        }
        if i == smp.len() {
            return Some(smp[i - 1].volume);
        }
        let (hi, lo) = (smp[i - 1], smp[i]);
        Some(lo.volume + (hi.volume - lo.volume) * ((t - lo.t) / (hi.t - lo.t)))
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,volume,exact\n");
        for p in &self.samples {
            out.push_str(&format!("{:?},{:?},{}\n", p.t, p.volume + 0.0, p.exact));
        }
        out
    }

    pub fn from_csv(ambient_dim: u32, text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        match lines.next() {
            Some(h) if h.trim() == "t,volume,exact" => {}
            _ => {
                return Err(Error::InvalidParameters(
                    "expected header t,volume,exact".into(),
                ))
            }
        }
        let mut samples = Vec::new();
        for l in lines {
            let f: Vec<&str> = l.split(',').map(str::trim).collect();
            let parse = |x: &str| {
                x.parse::<f64>()
                    .map_err(|e| Error::InvalidParameters(format!("bad number {x:?}: {e}")))
            };
            if f.len() != 3 {
                return Err(Error::InvalidParameters(format!("bad row {l:?}")));
            }
            let exact = f[2]
                .parse::<bool>()
                .map_err(|e| Error::InvalidParameters(format!("bad flag {:?}: {e}", f[2])))?;
            samples.push(TubeSample {
                t: parse(f[0])?,
                volume: parse(f[1])?,
                exact,
            });
        }
        Self::new(ambient_dim, samples)
    }
}

fn log_nodes(t_min: f64, t_max: f64, n_per_decade: usize) -> Result<Vec<f64>> {
    if !(t_min > 0.0 && t_min < t_max && t_max.is_finite()) {
        return Err(Error::InvalidParameters(format!(
            "need 0 < t_min < t_max, got {t_min:e}, {t_max:e}"
        )));
    }
    if n_per_decade < 8 {
        return Err(Error::InvalidParameters(format!(
            "need at least 8 samples per decade, got {n_per_decade}"
        )));
    }
    let mut v = Vec::new();
    for k in 0.. {
        let t = t_max * 10f64.powf(-(k as f64) / n_per_decade as f64);
        if t <= t_min * (1.0 + 1e-12) {
            break;
        }
        v.push(t);
    }
    v.push(t_min);
    Ok(v)
}

/// Log-spaced samples of |A_t| on [t_min, t_max]. The breakpoints of the
/// tube are added as nodes (g/2 for the gaps g of a set in R, where the tube
/// is piecewise linear and interpolation between samples is exact; 3^{-k}/2
/// for the carpet, where it is piecewise quadratic).
pub fn sample_tube(
    a: &BoundedSet,
    t_min: f64,
    t_max: f64,
    n_per_decade: usize,
) -> Result<TubeSamples> {
    a.validate()?;
    let mut nodes = log_nodes(t_min, t_max, n_per_decade)?;
    let omitted = a.omitted_scale()?;
    let line = match a {
        BoundedSet::CarpetComplement { .. } => None,
        _ => Some(Line::new(a)?),
    };
    let kinks: Vec<f64> = match (&line, a) {
        (Some(l), _) => l
            .gap_lengths_at_least(2.0 * t_min, KINK_CAP)
            .into_iter()
            .map(|g| 0.5 * g)
            .collect(),
        (None, BoundedSet::CarpetComplement { level }) => (1..=level.unwrap_or(u32::MAX).min(700)
            as i32)
            .map(|k| 0.5 * 3f64.powi(-k))
            .take_while(|&t| t > t_min)
            .collect(),
        _ => Vec::new(),
    };
    nodes.extend(kinks.into_iter().filter(|&t| t > t_min && t < t_max));
    nodes.sort_by(|x, y| y.total_cmp(x));
    nodes.dedup_by(|x, y| (*y - *x).abs() <= 1e-12 * *y);
    let mut samples = Vec::with_capacity(nodes.len());
    for t in nodes {
        let volume = match (&line, a) {
            (Some(l), _) => l.tube(t)?,
            (None, BoundedSet::CarpetComplement { level }) => carpet::tube(t, *level),
            _ => unreachable!(),
        };
        samples.push(TubeSample {
            t,
            volume,
            exact: 2.0 * t >= omitted,
        });
    }
    TubeSamples::new(a.ambient_dim(), samples)
}

/// Tube zeta function from samples.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TubeZeta {
    /// integral over (0, delta), tail included
    pub value: Complex64,
    /// power-law estimate of the part over (0, t_min)
    pub tail: Complex64,
    /// error estimate of the tail
    pub error: f64,
    /// dimension fitted on the last sampled decade, used for the tail
    pub dim_fit: f64,
}

/// int_a^b t^q dt without cancellation, also at q = -1.
fn power_integral(q: Complex64, a: f64, b: f64) -> Complex64 {
    let u = (b / a).ln();
    rpow(b, q + 1.0) * u * exprel(-(q + 1.0) * u)
}

/// int_0^delta t^{s-N-1} |A_t| dt with |A_t| interpolated linearly in t
/// between samples (t^{s-N-1} times each linear piece is integrated
/// exactly) and a power-law tail below the last sample.
pub fn tube_zeta_numeric(tube: &TubeSamples, s: Complex64, delta: f64) -> Result<TubeZeta> {
    let smp = &tube.samples;
    if !(delta > 0.0) {
        return Err(Error::InvalidParameters(format!(
            "delta must be > 0, got {delta}"
        )));
    }
    if tube.t_max() < delta * (1.0 - 1e-12) {
        return Err(Error::InsufficientSamples(format!(
            "samples end at t = {:e} below delta = {delta:e}",
            tube.t_max()
        )));
    }
    let below = smp.iter().filter(|p| p.t < delta).count();
    if below < 3 {
        return Err(Error::InsufficientSamples(format!(
            "only {below} samples below delta"
        )));
    }
    let n = tube.ambient_dim as f64;
    let p = s - n - 1.0;
    let mut pieces = Vec::with_capacity(smp.len());
    for w in smp.windows(2) {
        let (hi, lo) = (w[0], w[1]);
        if lo.t >= delta {
            continue;
        }
        let b = hi.t.min(delta);
        let beta = (hi.volume - lo.volume) / (hi.t - lo.t);
        // V(t) = lo.volume + beta (t - lo.t)
        let ip = power_integral(p, lo.t, b);
        let ip1 = power_integral(p + 1.0, lo.t, b);
        pieces.push(ip * lo.volume + (ip1 - ip * lo.t) * beta);
    }
    let body = pairwise_sum(&pieces);

    let t_min = tube.t_min();
    let last: Vec<&TubeSample> = smp
        .iter()
        .filter(|q| q.t <= 10.0 * t_min && q.volume > 0.0)
        .collect();
    let last = if last.len() >= 3 {
        last
    } else {
        smp.iter().rev().take(3).collect()
    };
    let (x, y): (Vec<f64>, Vec<f64>) = last
        .iter()
        .map(|q| (q.t.ln(), q.volume.max(f64::MIN_POSITIVE).ln()))
        .unzip();
    let fit = linear_fit(&x, &y)
        .ok_or_else(|| Error::InsufficientSamples("cannot fit the tail".into()))?;
    let dim_fit = n - fit.slope;
    if s.re <= dim_fit {
        return Err(Error::DivergentAt(s));
    }
    let v_min = smp[smp.len() - 1].volume;
    let tail = if v_min > 0.0 {
        rpow(t_min, s - n) * v_min / (s - dim_fit)
    } else {
        ZERO
    };
    let scaled: Vec<f64> = last
        .iter()
        .map(|q| q.volume * q.t.powf(-fit.slope))
        .collect();
    let (mn, mx) = scaled
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(a, b), &v| (a.min(v), b.max(v)));
    let spread = if mx > 0.0 { (mx - mn) / mx } else { 0.0 };
    let value = body + tail;
    Ok(TubeZeta {
        value,
        tail,
        error: tail.norm() * spread + 1e-15 * value.norm(),
        dim_fit,
    })
}

/// Closed form of the tube function of the ternary Cantor set,
/// |A_t| = t^{1-D} 2^{1-D} (2^{-x} + (3/2)^x), x = frac(log_3 (2t)^{-1}).
pub fn cantor_tube_exact(t: f64) -> Result<f64> {
    if !(t > 0.0 && t <= 0.5) {
        return Err(Error::OutOfRange {
            value: t,
            range: "(0, 1/2]".into(),
        });
    }
    let d = 2f64.ln() / 3f64.ln();
    let x = -(2.0 * t).ln() / 3f64.ln();
    let f = x - x.floor();
    Ok(t.powf(1.0 - d) * 2f64.powf(1.0 - d) * (2f64.powf(-f) + 1.5f64.powf(f)))
}
