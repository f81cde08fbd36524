//! Concrete bounded sets in R and R^2, their tube functions |A_t| and the
//! distance and tube zeta functions computed from them.

mod carpet;
mod line;
mod tube;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::strings::{self, StringSpec};

pub use carpet::{
    carpet_distance_zeta_exact, carpet_square_zeta, deleted_squares, CARPET_MIN_DELTA,
};
pub use tube::{
    cantor_tube_exact, sample_tube, tube_zeta_numeric, TubeSample, TubeSamples, TubeZeta,
};

/// Iterates with more components are only handled through their gap structure.
pub const MAX_MATERIALIZED: f64 = 4_194_304.0;

/// A compact set in R (N = 1) or R^2 (N = 2). Serialized with a `kind` tag.
///
/// Levels are optional: `None` denotes the limit set itself (Cantor set,
/// generalized Cantor set, Sierpinski carpet, the full set A_L).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BoundedSet {
    /// sorted disjoint closed intervals [a, b]
    IntervalUnion { intervals: Vec<(f64, f64)> },
    /// sorted distinct reals
    PointSet { points: Vec<f64> },
    /// level l: 2^l intervals of length 3^{-l} in [0,1]
    CantorIterate {
        #[serde(default)]
        level: Option<u32>,
    },
    /// m equidistant intervals of length a per step
    GeneralizedCantorIterate {
        m: u32,
        a: f64,
        #[serde(default)]
        level: Option<u32>,
    },
    /// [0,1]^2 minus the open squares deleted up to `level`
    CarpetComplement {
        #[serde(default)]
        level: Option<u32>,
    },
    /// A_L = {a_k = sum_{j>=k} l_j} with 0; `depth` keeps a_1..a_{depth-1}
    /// and replaces the rest by the interval [0, a_depth]
    StringSet {
        spec: StringSpec,
        #[serde(default)]
        depth: Option<usize>,
    },
}

/// A numerical value with an error estimate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Estimate<T> {
    pub value: T,
    pub error: f64,
}

impl BoundedSet {
    pub fn ambient_dim(&self) -> u32 {
        match self {
            BoundedSet::CarpetComplement { .. } => 2,
            _ => 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameters(m));
        match self {
            BoundedSet::IntervalUnion { intervals } => {
                if intervals.is_empty() {
                    return bad("empty interval union".into());
                }
                for (i, &(a, b)) in intervals.iter().enumerate() {
                    if !(a.is_finite() && b.is_finite() && a <= b) {
                        return bad(format!("bad interval [{a}, {b}]"));
                    }
                    if i > 0 && !(intervals[i - 1].1 < a) {
                        return bad("intervals must be sorted and disjoint".into());
                    }
                }
            }
            BoundedSet::PointSet { points } => {
                if points.is_empty() {
                    return bad("empty point set".into());
                }
                if points.iter().any(|x| !x.is_finite())
                    || points.windows(2).any(|w| !(w[0] < w[1]))
                {
                    return bad("points must be finite, sorted and distinct".into());
                }
            }
            BoundedSet::CantorIterate { .. } | BoundedSet::CarpetComplement { .. } => {}
            BoundedSet::GeneralizedCantorIterate { m, a, .. } => {
                if *m < 2 || !(*a > 0.0 && *m as f64 * a < 1.0) {
                    return bad(format!(
                        "generalized Cantor set needs m >= 2 and 0 < m a < 1 (m = {m}, a = {a})"
                    ));
                }
            }
            BoundedSet::StringSet { spec, depth } => {
                spec.validate()?;
                if *depth == Some(0) {
                    return bad("string set depth must be >= 1".into());
                }
            }
        }
        Ok(())
    }

    /// lambda A for explicit interval unions and point sets.
    pub fn scaled(&self, lambda: f64) -> Result<BoundedSet> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::InvalidParameters(format!(
                "scale must be > 0, got {lambda}"
            )));
        }
        match self {
            BoundedSet::IntervalUnion { intervals } => Ok(BoundedSet::IntervalUnion {
                intervals: intervals
                    .iter()
                    .map(|(a, b)| (lambda * a, lambda * b))
                    .collect(),
            }),
            BoundedSet::PointSet { points } => Ok(BoundedSet::PointSet {
                points: points.iter().map(|x| lambda * x).collect(),
            }),
            _ => Err(Error::InvalidParameters(
                "scaling is implemented for interval unions and point sets".into(),
            )),
        }
    }

    /// Explicit intervals of a 1-D set with finitely many components.
    pub fn intervals(&self) -> Result<Vec<(f64, f64)>> {
        self.validate()?;
        match self {
            BoundedSet::IntervalUnion { intervals } => Ok(intervals.clone()),
            BoundedSet::PointSet { points } => Ok(points.iter().map(|&x| (x, x)).collect()),
            BoundedSet::CantorIterate { level: Some(l) } => {
                line::cantor_intervals(2, 1.0 / 3.0, *l)
            }
            BoundedSet::GeneralizedCantorIterate {
                m,
                a,
                level: Some(l),
            } => line::cantor_intervals(*m, *a, *l),
            _ => Err(Error::InvalidParameters(
                "set has no finite interval representation".into(),
            )),
        }
    }

    /// Minkowski dimension of the set, known in closed form except for
    /// string sets without an analytic abscissa, where it is estimated.
    pub fn dimension_hint(&self) -> Result<f64> {
        self.validate()?;
        Ok(match self {
            BoundedSet::IntervalUnion { intervals } => {
                if intervals.iter().any(|(a, b)| b > a) {
                    1.0
                } else {
                    0.0
                }
            }
            BoundedSet::PointSet { .. } => 0.0,
            BoundedSet::CantorIterate { level: None } => 2f64.ln() / 3f64.ln(),
            BoundedSet::GeneralizedCantorIterate { m, a, level: None } => {
                (*m as f64).ln() / (1.0 / a).ln()
            }
            BoundedSet::CarpetComplement { level: None } => 8f64.ln() / 3f64.ln(),
            BoundedSet::CarpetComplement { .. } => 2.0,
            BoundedSet::StringSet { spec, depth: None } => {
                let v = strings::abscissa_estimate(&strings::build(spec)?).value;
                if !v.is_finite() {
                    return Err(Error::InvalidParameters(
                        "no dimension estimate for this string".into(),
                    ));
                }
                v
            }
            _ => {
                if line::Line::new(self)?.measure > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
        })
    }

    /// Largest feature of the limit set that this representation omits:
    /// tube values for t >= omitted/2 coincide with those of the limit set.
    pub fn omitted_scale(&self) -> Result<f64> {
        match self {
            BoundedSet::CarpetComplement { level } => {
                Ok(level.map_or(0.0, |l| 3f64.powi(-(l as i32) - 1)))
            }
            _ => Ok(line::Line::new(self)?.omitted),
        }
    }
}

fn want_dim(a: &BoundedSet, n: u32) -> Result<()> {
    if a.ambient_dim() != n {
        return Err(Error::DimensionMismatch(format!(
            "operation needs a set in R^{n}, got one in R^{}",
            a.ambient_dim()
        )));
    }
    Ok(())
}

/// Euclidean distance from `x` (of length N) to the set.
pub fn distance_to_set(x: &[f64], a: &BoundedSet) -> Result<f64> {
    a.validate()?;
    if x.len() != a.ambient_dim() as usize {
        return Err(Error::DimensionMismatch(format!(
            "point has {} coordinates, set lives in R^{}",
            x.len(),
            a.ambient_dim()
        )));
    }
    match a {
        BoundedSet::CarpetComplement { level } => Ok(carpet::distance(x[0], x[1], *level)),
        _ => line::distance(x[0], a),
    }
}

/// |A_t|, the N-dimensional volume of the open t-neighbourhood.
pub fn tube_volume(a: &BoundedSet, t: f64) -> Result<f64> {
    a.validate()?;
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::InvalidParameters(format!(
            "tube radius must be > 0, got {t}"
        )));
    }
    match a {
        BoundedSet::CarpetComplement { level } => Ok(carpet::tube(t, *level)),
        _ => line::Line::new(a)?.tube(t),
    }
}

/// |A_t| for a planar set by counting grid cells whose centre lies within t,
/// with the cell-size error bound (cells whose distance is within half a
/// diagonal of t are undecided).
pub fn tube_volume_grid(a: &BoundedSet, t: f64, resolution: usize) -> Result<Estimate<f64>> {
    a.validate()?;
    want_dim(a, 2)?;
    let BoundedSet::CarpetComplement { level } = a else {
        unreachable!()
    };
    carpet::tube_grid(t, *level, resolution)
}

/// Distance zeta function of a set in R, summed in closed form over the gaps.
pub fn distance_zeta_1d(a: &BoundedSet, s: Complex64, delta: f64) -> Result<Complex64> {
    a.validate()?;
    want_dim(a, 1)?;
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::InvalidParameters(format!(
            "delta must be > 0, got {delta}"
        )));
    }
    line::Line::new(a)?.distance_zeta(s, delta)
}

/// Distance zeta function of a planar set by the midpoint rule on a
/// `resolution` x `resolution` grid over [-delta, 1 + delta]^2; the error
/// is the difference to the half-resolution grid.
pub fn distance_zeta_2d(
    a: &BoundedSet,
    s: Complex64,
    delta: f64,
    resolution: usize,
) -> Result<Estimate<Complex64>> {
    a.validate()?;
    want_dim(a, 2)?;
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::InvalidParameters(format!(
            "delta must be > 0, got {delta}"
        )));
    }
    let BoundedSet::CarpetComplement { level } = a else {
        unreachable!()
    };
    carpet::distance_zeta_grid(s, delta, *level, resolution)
}

/// Total length of a string set's hull, used for A_L.
fn string_total(spec: &StringSpec) -> Result<(strings::FractalString, f64)> {
    let l = strings::build(spec)?;
    let total = strings::total_length(&l, 1e-15)?;
    Ok((l, total))
}

#[cfg(test)]
mod tests;
