//! Compact subsets of R through their gaps. With hull length H, measure |A|
//! and bounded gaps g: |A_t| = |A| + 2t + sum_g min(g, 2t), and the distance
//! zeta function is a sum over the gaps of 2 min(g/2, delta)^s / s.

use num_complex::Complex64;

use super::{string_total, BoundedSet, MAX_MATERIALIZED};
use crate::error::{Error, Result};
use crate::numeric::rpow;
use crate::strings::{self, FractalString, Group, StringSpec};

pub(super) enum Gaps {
    /// decreasing, equal lengths merged
    Finite(Vec<Group>),
    String(FractalString),
}

pub(super) struct Line {
    pub measure: f64,
    pub gaps: Gaps,
    pub omitted: f64,
}

fn group(mut v: Vec<f64>) -> Vec<Group> {
    v.sort_by(|a, b| b.total_cmp(a));
    let mut out: Vec<Group> = Vec::new();
    for g in v {
        match out.last_mut() {
            Some(h) if (h.length - g).abs() <= 1e-12 * h.length => h.multiplicity += 1.0,
            _ => out.push(Group {
                length: g,
                multiplicity: 1.0,
            }),
        }
    }
    out
}

fn cantor_line(m: u32, a: f64, level: Option<u32>) -> Result<Line> {
    let mf = m as f64;
    let g = (1.0 - mf * a) / (mf - 1.0);
    Ok(match level {
        None => Line {
            measure: 0.0,
            gaps: Gaps::String(strings::build(&StringSpec::GeneralizedCantor { m, a })?),
            omitted: 0.0,
        },
        Some(l) => Line {
            measure: (mf * a).powi(l as i32),
            gaps: Gaps::Finite(
                (1..=l as i32)
                    .map(|k| Group {
                        length: g * a.powi(k - 1),
                        multiplicity: (mf - 1.0) * mf.powi(k - 1),
                    })
                    .collect(),
            ),
            omitted: g * a.powi(l as i32),
        },
    })
}

impl Line {
    pub fn new(set: &BoundedSet) -> Result<Line> {
        match set {
            BoundedSet::IntervalUnion { intervals } => Ok(Line {
                measure: intervals.iter().map(|(a, b)| b - a).sum(),
                gaps: Gaps::Finite(group(
                    intervals.windows(2).map(|w| w[1].0 - w[0].1).collect(),
                )),
                omitted: 0.0,
            }),
            BoundedSet::PointSet { points } => Ok(Line {
                measure: 0.0,
                gaps: Gaps::Finite(group(points.windows(2).map(|w| w[1] - w[0]).collect())),
                omitted: 0.0,
            }),
            BoundedSet::CantorIterate { level } => cantor_line(2, 1.0 / 3.0, *level),
            BoundedSet::GeneralizedCantorIterate { m, a, level } => cantor_line(*m, *a, *level),
            BoundedSet::StringSet { spec, depth } => {
                let (l, total) = string_total(spec)?;
                match depth {
                    None => Ok(Line {
                        measure: 0.0,
                        gaps: Gaps::String(l),
                        omitted: 0.0,
                    }),
                    Some(n) => {
                        let mut it = l.lengths();
                        let head: Vec<f64> = it.by_ref().take(n - 1).collect();
                        let next = it.next();
                        let measure = match next {
                            Some(_) => (total - head.iter().sum::<f64>()).max(0.0),
                            None => 0.0,
                        };
                        Ok(Line {
                            measure,
                            gaps: Gaps::Finite(group(head)),
                            omitted: next.unwrap_or(0.0),
                        })
                    }
                }
            }
            BoundedSet::CarpetComplement { .. } => {
                Err(Error::DimensionMismatch("the carpet lives in R^2".into()))
            }
        }
    }

    pub fn tube(&self, t: f64) -> Result<f64> {
        let (n, _) = self.gaps.count_sum_at_least(2.0 * t)?;
        Ok(self.measure + 2.0 * t * (1.0 + n) + self.gaps.mass_below(2.0 * t)?)
    }

    pub fn distance_zeta(&self, s: Complex64, delta: f64) -> Result<Complex64> {
        if s.re <= 0.0 {
            return Err(Error::DivergentAt(s));
        }
        if s == Complex64::new(1.0, 0.0) {
            // the integrand is 1
            return Ok(Complex64::new(self.tube(delta)?, 0.0));
        }
        let (n, _) = self.gaps.count_sum_at_least(2.0 * delta)?;
        let v = rpow(delta, s) * (2.0 * (1.0 + n)) / s
            + rpow(2.0, -s) * 2.0 / s * self.gaps.zeta_below(s, 2.0 * delta)?;
        if self.measure > 0.0 && s.re <= 1.0 {
            // d = 0 on A itself
            return Err(Error::DivergentAt(s));
        }
        Ok(v)
    }

    /// Distinct gap lengths >= x, largest first, at most `cap` of them.
    pub fn gap_lengths_at_least(&self, x: f64, cap: usize) -> Vec<f64> {
        match &self.gaps {
            Gaps::Finite(v) => v
                .iter()
                .take_while(|g| g.length >= x)
                .take(cap)
                .map(|g| g.length)
                .collect(),
            Gaps::String(l) => l
                .groups()
                .take_while(|g| g.length >= x)
                .take(cap)
                .map(|g| g.length)
                .collect(),
        }
    }
}

impl Gaps {
    fn count_sum_at_least(&self, x: f64) -> Result<(f64, f64)> {
        match self {
            Gaps::Finite(v) => Ok(v
                .iter()
                .take_while(|g| g.length >= x)
                .fold((0.0, 0.0), |(c, s), g| {
                    (c + g.multiplicity, s + g.multiplicity * g.length)
                })),
            Gaps::String(l) => l.count_sum_at_least(x),
        }
    }

    fn mass_below(&self, x: f64) -> Result<f64> {
        match self {
            Gaps::Finite(v) => Ok(v
                .iter()
                .filter(|g| g.length < x)
                .map(|g| g.multiplicity * g.length)
                .sum()),
            Gaps::String(l) => l.mass_below(x),
        }
    }

    /// sum of g^s over gaps g < x
    fn zeta_below(&self, s: Complex64, x: f64) -> Result<Complex64> {
        match self {
            Gaps::Finite(v) => Ok(v
                .iter()
                .filter(|g| g.length < x)
                .map(|g| rpow(g.length, s) * g.multiplicity)
                .sum()),
            Gaps::String(l) => {
                let full = match strings::geometric_zeta(l, s, 1e-13) {
                    Ok(z) => z.value,
                    Err(Error::NotConvergent { .. }) => return Err(Error::DivergentAt(s)),
                    Err(e) => return Err(e),
                };
                Ok(full - l.partial_sum(s, x)?)
            }
        }
    }
}

/// The 2^l (or m^l) intervals of a Cantor iterate.
pub(super) fn cantor_intervals(m: u32, a: f64, level: u32) -> Result<Vec<(f64, f64)>> {
    if (m as f64).powi(level as i32) > MAX_MATERIALIZED {
        return Err(Error::InvalidParameters(format!(
            "{m}^{level} intervals are too many to list"
        )));
    }
    let step = a + (1.0 - m as f64 * a) / (m as f64 - 1.0);
    let mut cur = vec![(0.0f64, 1.0f64)];
    for _ in 0..level {
        let mut next = Vec::with_capacity(cur.len() * m as usize);
        for (lo, hi) in cur {
            let w = hi - lo;
            for i in 0..m {
                let x = lo + w * step * i as f64;
                next.push((x, x + w * a));
            }
        }
        cur = next;
    }
    Ok(cur)
}

pub(super) fn distance(x: f64, set: &BoundedSet) -> Result<f64> {
    match set {
        BoundedSet::IntervalUnion { intervals } => {
            let i = intervals.partition_point(|iv| iv.1 < x);
            if i < intervals.len() && intervals[i].0 <= x {
                return Ok(0.0);
            }
            let right = intervals.get(i).map_or(f64::INFINITY, |iv| iv.0 - x);
            let left = if i > 0 {
                x - intervals[i - 1].1
            } else {
                f64::INFINITY
            };
            Ok(left.min(right))
        }
        BoundedSet::PointSet { points } => {
            let i = points.partition_point(|&p| p < x);
            let right = points.get(i).map_or(f64::INFINITY, |p| p - x);
            let left = if i > 0 {
                x - points[i - 1]
            } else {
                f64::INFINITY
            };
            Ok(left.min(right))
        }
        BoundedSet::CantorIterate { level } => Ok(cantor_distance(x, 2, 1.0 / 3.0, *level)),
        BoundedSet::GeneralizedCantorIterate { m, a, level } => {
            Ok(cantor_distance(x, *m, *a, *level))
        }
        BoundedSet::StringSet { spec, depth } => string_distance(x, spec, *depth),
        BoundedSet::CarpetComplement { .. } => {
            Err(Error::DimensionMismatch("the carpet lives in R^2".into()))
        }
    }
}

fn cantor_distance(x: f64, m: u32, a: f64, level: Option<u32>) -> f64 {
    if x <= 0.0 {
        return -x;
    }
    if x >= 1.0 {
        return x - 1.0;
    }
    let step = a + (1.0 - m as f64 * a) / (m as f64 - 1.0);
    let (mut off, mut sc) = (0.0f64, 1.0f64);
    let max_level = level.unwrap_or(u32::MAX);
    let mut k = 0;
    while k < max_level && sc > 1e-300 {
        let u = (x - off) / sc;
        let i = ((u / step).floor().max(0.0) as u32).min(m - 1);
        let local = u - i as f64 * step;
        if local <= a {
            off += i as f64 * step * sc;
            sc *= a;
            k += 1;
            continue;
        }
        return (local - a).min(step - local) * sc;
    }
    0.0
}

fn string_distance(x: f64, spec: &StringSpec, depth: Option<usize>) -> Result<f64> {
    let (l, total) = string_total(spec)?;
    if x <= 0.0 {
        return Ok(-x);
    }
    if x >= total {
        return Ok(x - total);
    }
    if let Some(n) = depth {
        let mut pos = total;
        let mut it = l.lengths();
        for _ in 1..n {
            let Some(len) = it.next() else {
                return Ok(x.min(pos - x).max(0.0));
            };
            let next = pos - len;
            if x >= next {
                return Ok((x - next).min(pos - x));
            }
            pos = next;
        }
        return Ok(0.0);
    }
    // Points are a_k = mass of the lengths below l_k; locate the group of
    // lengths whose points bracket x by bisection on the length threshold.
    let p = |y: f64| l.mass_below(y);
    let mut hi = l.first_length() * (1.0 + 1e-9);
    let mut lo = hi;
    for _ in 0..4000 {
        lo *= 0.5;
        if p(lo)? <= x || lo == 0.0 {
            break;
        }
    }
    if lo == 0.0 {
        return Ok(0.0);
    }
    while hi / lo > 1.0 + 1e-13 {
        let mid = (lo * hi).sqrt();
        if p(mid)? <= x {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let base = p(lo)?;
    let m = l.count_sum_at_least(lo)?.0 - l.count_sum_at_least(hi)?.0;
    if m < 1.0 {
        return Ok((x - base).abs());
    }
    let len = (p(hi)? - base) / m;
    let i = ((x - base) / len).floor().clamp(0.0, m - 1.0);
    let left = base + i * len;
    Ok((x - left).min(left + len - x).max(0.0))
}
