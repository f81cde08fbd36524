use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Integer sequence given either explicitly or by an arithmetic rule
/// `first + step (k - 1)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum IntSequence {
    List(Vec<u64>),
    Arithmetic { first: u64, step: u64 },
}

/// Real sequence given explicitly or by a geometric rule `first ratio^{k-1}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RealSequence {
    List(Vec<f64>),
    Geometric { first: f64, ratio: f64 },
}

impl IntSequence {
    pub fn get(&self, k: usize) -> Option<u64> {
        match self {
            IntSequence::List(v) => v.get(k).copied(),
            IntSequence::Arithmetic { first, step } => Some(first + step * k as u64),
        }
    }
    pub fn len(&self) -> Option<usize> {
        match self {
            IntSequence::List(v) => Some(v.len()),
            IntSequence::Arithmetic { .. } => None,
        }
    }
}

impl RealSequence {
    pub fn get(&self, k: usize) -> Option<f64> {
        match self {
            RealSequence::List(v) => v.get(k).copied(),
            RealSequence::Geometric { first, ratio } => Some(first * ratio.powi(k as i32)),
        }
    }
    pub fn len(&self) -> Option<usize> {
        match self {
            RealSequence::List(v) => Some(v.len()),
            RealSequence::Geometric { .. } => None,
        }
    }
}

/// Declarative description of a fractal string. Serialized as JSON with a
/// `kind` tag, e.g. `{"kind": "a_string", "a": 1.0}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StringSpec {
    /// l_j = j^{-a} - (j+1)^{-a}
    AString {
        a: f64,
    },
    /// 3^{-k} with multiplicity 2^{k-1}
    CantorString,
    /// gap string of the m-fold Cantor set with contraction a
    GeneralizedCantor {
        m: u32,
        a: f64,
    },
    NthOrderCantor {
        n: u32,
    },
    ExtendedSelfSimilar {
        base: Box<StringSpec>,
        ratios: Vec<f64>,
    },
    Scaled {
        c: f64,
        inner: Box<StringSpec>,
    },
    Union {
        parts: Vec<StringSpec>,
    },
    Tensor {
        left: Box<StringSpec>,
        right: Box<StringSpec>,
    },
    /// union over k of c_k times the generalized Cantor string with m = m_k,
    /// a_k = m_k^{-1/dim}; `components` bounds how many are built
    Hyperfractal {
        dim: f64,
        m: IntSequence,
        c: RealSequence,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        components: Option<usize>,
    },
    Trivial {
        length: f64,
    },
    /// small explicit list of lengths (any order)
    Finite {
        lengths: Vec<f64>,
    },
}

pub(crate) const DEFAULT_HYPER_COMPONENTS: usize = 64;

fn bad(msg: impl Into<String>) -> Error {
    Error::InvalidSpec(msg.into())
}

pub(crate) fn check_ratios(ratios: &[f64]) -> Result<()> {
    if ratios.is_empty() {
        return Err(Error::InvalidRatios("empty ratio list".into()));
    }
    if ratios
        .iter()
        .any(|r| !(r.is_finite() && *r > 0.0 && *r < 1.0))
    {
        return Err(Error::InvalidRatios("every ratio must lie in (0,1)".into()));
    }
    let sum: f64 = ratios.iter().sum();
    if sum >= 1.0 {
        return Err(Error::InvalidRatios(format!(
            "sum of ratios {sum} is not < 1"
        )));
    }
    Ok(())
}

impl StringSpec {
    /// Checks the parameter constraints of every node.
    pub fn validate(&self) -> Result<()> {
        match self {
            StringSpec::AString { a } => {
                if !(a.is_finite() && *a > 0.0) {
                    return Err(bad(format!("a-string needs a > 0, got {a}")));
                }
            }
            StringSpec::CantorString => {}
            StringSpec::GeneralizedCantor { m, a } => {
                if *m < 2 {
                    return Err(bad(format!("generalized Cantor needs m >= 2, got {m}")));
                }
                if !(a.is_finite() && *a > 0.0 && (*m as f64) * a < 1.0) {
                    return Err(bad(format!(
                        "generalized Cantor needs 0 < a < 1/m, got m a = {}",
                        *m as f64 * a
                    )));
                }
            }
            StringSpec::NthOrderCantor { n } => {
                if *n < 1 {
                    return Err(bad("n-th order Cantor string needs n >= 1"));
                }
            }
            StringSpec::ExtendedSelfSimilar { base, ratios } => {
                check_ratios(ratios).map_err(|e| bad(e.to_string()))?;
                base.validate()?;
            }
            StringSpec::Scaled { c, inner } => {
                if !(c.is_finite() && *c > 0.0) {
                    return Err(bad(format!("scale factor must be > 0, got {c}")));
                }
                inner.validate()?;
            }
            StringSpec::Union { parts } => {
                if parts.is_empty() {
                    return Err(bad("union of no strings"));
                }
                for p in parts {
                    p.validate()?;
                }
            }
            StringSpec::Tensor { left, right } => {
                left.validate()?;
                right.validate()?;
            }
            StringSpec::Hyperfractal {
                dim,
                m,
                c,
                components,
            } => {
                if !(*dim > 0.0 && *dim < 1.0) {
                    return Err(bad(format!(
                        "hyperfractal dimension must lie in (0,1), got {dim}"
                    )));
                }
                let k = hyper_component_count(m, c, *components)?;
                let mut prev = 1u64;
                for i in 0..k {
                    let mi = m.get(i).unwrap();
                    if mi < 2 || mi <= prev {
                        return Err(bad(
                            "hyperfractal m_k must be strictly increasing integers with m_1 >= 2",
                        ));
                    }
                    prev = mi;
                    let ci = c.get(i).unwrap();
                    if !(ci.is_finite() && ci > 0.0) {
                        return Err(bad("hyperfractal c_k must be positive"));
                    }
                }
                if let IntSequence::Arithmetic { step, .. } = m {
                    if *step == 0 {
                        return Err(bad("arithmetic m_k rule needs step >= 1"));
                    }
                }
                if let RealSequence::Geometric { ratio, .. } = c {
                    if !(*ratio > 0.0 && *ratio < 1.0) {
                        return Err(bad("geometric c_k rule needs ratio in (0,1)"));
                    }
                }
            }
            StringSpec::Trivial { length } => {
                if !(length.is_finite() && *length > 0.0) {
                    return Err(bad(format!("nonpositive length {length}")));
                }
            }
            StringSpec::Finite { lengths } => {
                if lengths.iter().any(|l| !(l.is_finite() && *l > 0.0)) {
                    return Err(bad("finite string with a nonpositive length"));
                }
            }
        }
        Ok(())
    }
}

/// Number of hyperfractal components actually built.
pub(crate) fn hyper_component_count(
    m: &IntSequence,
    c: &RealSequence,
    components: Option<usize>,
) -> Result<usize> {
    let list_len = match (m.len(), c.len()) {
        (Some(a), Some(b)) => Some(a.min(b)),
        (Some(a), None) | (None, Some(a)) => Some(a),
        (None, None) => None,
    };
    let k = match (components, list_len) {
        (Some(k), Some(l)) => k.min(l),
        (Some(k), None) => k,
        (None, Some(l)) => l,
        (None, None) => DEFAULT_HYPER_COMPONENTS,
    };
    if k == 0 {
        return Err(bad("hyperfractal with no components"));
    }
    Ok(k)
}
