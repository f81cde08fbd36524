//! Fractal strings: construction from a [`StringSpec`], the algebra of
//! scaling, unions and tensor products, and Dirichlet sums with certified
//! truncation bounds.

pub mod astring;
mod node;
mod spec;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub use node::Group;
pub use spec::{IntSequence, RealSequence, StringSpec};

use crate::error::{Error, Result};
use crate::geometry::BoundedSet;
pub(crate) use node::group_ratios;
use node::{Budget, Node, Omitted};
pub(crate) use spec::check_ratios;

/// Maximum number of groups a single summation may visit.
pub const GROUP_BUDGET: usize = 10_000_000;

/// Relative tolerance under which adjacent enumerated lengths are merged.
const TIE_TOL: f64 = 1e-12;

/// A built fractal string: an immutable, lazily enumerable multiset of
/// lengths with certified tail bounds.
#[derive(Clone, Debug)]
pub struct FractalString {
    spec: StringSpec,
    node: Node,
}

/// A Dirichlet sum together with how it was obtained.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct ZetaSum {
    pub value: Complex64,
    /// bound (certified sums) or estimate (accelerated sums) of the error
    pub error: f64,
    /// all lengths >= threshold were summed explicitly
    pub threshold: f64,
    /// number of groups visited
    pub groups: usize,
}

/// Abscissa of convergence, analytic or fitted.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct Abscissa {
    pub value: f64,
    /// confidence interval of a numerical fit
    pub interval: Option<(f64, f64)>,
    pub analytic: bool,
}

pub fn build(spec: &StringSpec) -> Result<FractalString> {
    spec.validate()?;
    Ok(FractalString {
        spec: spec.clone(),
        node: to_node(spec)?,
    })
}

fn geometric_cantor(m: f64, a: f64) -> Node {
    let g = (1.0 - m * a) / (m - 1.0);
    Node::Geometric {
        first: g,
        ratio: a,
        mult0: m - 1.0,
        growth: m,
    }
}

fn to_node(spec: &StringSpec) -> Result<Node> {
    Ok(match spec {
        StringSpec::AString { a } => Node::AString { a: *a },
        StringSpec::CantorString => geometric_cantor(2.0, 1.0 / 3.0),
        StringSpec::GeneralizedCantor { m, a } => geometric_cantor(*m as f64, *a),
        StringSpec::NthOrderCantor { n } => {
            let mut node = geometric_cantor(2.0, 1.0 / 3.0);
            for _ in 1..*n {
                node = Node::Tensor(
                    Box::new(node),
                    Box::new(Node::Moran {
                        ratios: vec![(1.0 / 3.0, 2.0)],
                    }),
                );
            }
            node
        }
        StringSpec::ExtendedSelfSimilar { base, ratios } => Node::Tensor(
            Box::new(to_node(base)?),
            Box::new(Node::Moran {
                ratios: group_ratios(ratios),
            }),
        ),
        StringSpec::Scaled { c, inner } => Node::Scaled {
            c: *c,
            inner: Box::new(to_node(inner)?),
        },
        StringSpec::Union { parts } => {
            Node::Union(parts.iter().map(to_node).collect::<Result<_>>()?)
        }
        StringSpec::Tensor { left, right } => {
            Node::Tensor(Box::new(to_node(left)?), Box::new(to_node(right)?))
        }
        StringSpec::Hyperfractal {
            dim,
            m,
            c,
            components,
        } => {
            let k = spec::hyper_component_count(m, c, *components)?;
            let part = |i: usize| -> Node {
                let mi = m.get(i).unwrap() as f64;
                Node::Scaled {
                    c: c.get(i).unwrap(),
                    inner: Box::new(geometric_cantor(mi, mi.powf(-1.0 / dim))),
                }
            };
            let parts: Vec<Node> = (0..k).map(part).collect();
            let omitted = match (m.len(), c.len()) {
                (None, None) => {
                    let (
                        IntSequence::Arithmetic { step, .. },
                        RealSequence::Geometric { ratio, .. },
                    ) = (m, c)
                    else {
                        unreachable!()
                    };
                    Some(Omitted::Rule {
                        dim: *dim,
                        c_next: c.get(k).unwrap(),
                        q: *ratio,
                        m_next: m.get(k).unwrap() as f64,
                        step: *step as f64,
                    })
                }
                (a, b) => {
                    let avail = a.unwrap_or(usize::MAX).min(b.unwrap_or(usize::MAX));
                    (avail > k).then(|| Omitted::Finite((k..avail).map(part).collect()))
                }
            };
            Node::Hyper { parts, omitted }
        }
        StringSpec::Trivial { length } => Node::Finite(vec![Group {
            length: *length,
            multiplicity: 1.0,
        }]),
        StringSpec::Finite { lengths } => {
            let mut v = lengths.clone();
            v.sort_by(|a, b| b.total_cmp(a));
            let mut groups: Vec<Group> = Vec::new();
            for l in v {
                match groups.last_mut() {
                    Some(g) if g.length == l => g.multiplicity += 1.0,
                    _ => groups.push(Group {
                        length: l,
                        multiplicity: 1.0,
                    }),
                }
            }
            Node::Finite(groups)
        }
    })
}

impl FractalString {
    pub fn spec(&self) -> &StringSpec {
        &self.spec
    }

    /// Largest length (0 for an empty string).
    pub fn first_length(&self) -> f64 {
        self.node.first().unwrap_or(0.0)
    }

    /// Groups of equal lengths in nonincreasing order.
    pub fn groups(&self) -> impl Iterator<Item = Group> + '_ {
        let mut inner = self.node.groups().peekable();
        std::iter::from_fn(move || {
            let mut g = inner.next()?;
            while let Some(h) = inner.peek() {
                if (g.length - h.length).abs() <= TIE_TOL * g.length {
                    g.multiplicity += h.multiplicity;
                    inner.next();
                } else {
                    break;
                }
            }
            Some(g)
        })
    }

    /// Individual lengths, each repeated according to its multiplicity.
    pub fn lengths(&self) -> impl Iterator<Item = f64> + '_ {
        self.groups()
            .flat_map(|g| std::iter::repeat(g.length).take(g.multiplicity.round() as usize))
    }

    /// Upper bound on sum of l^sigma over lengths l < theta. `theta = inf`
    /// bounds the whole series. `None` when sigma is not above the abscissa.
    pub fn tail_bound(&self, sigma: f64, theta: f64) -> Option<f64> {
        self.node.tail_bound(sigma, theta)
    }

    /// Exact total length when known in closed form.
    pub fn total_length_hint(&self) -> Option<f64> {
        self.node.total()
    }

    /// Abscissa of convergence of the geometric zeta function (-inf for
    /// finite strings).
    pub fn abscissa(&self) -> f64 {
        self.node.abscissa()
    }

    /// Number and total length of the lengths >= x.
    pub fn count_sum_at_least(&self, x: f64) -> Result<(f64, f64)> {
        self.node
            .count_sum_at_least(x, &mut Budget::new(GROUP_BUDGET))
    }

    /// Total length of the lengths < x, accurate also when it is tiny.
    pub fn mass_below(&self, x: f64) -> Result<f64> {
        self.node.mass_below(x, &mut Budget::new(GROUP_BUDGET))
    }

    /// Mass of hyperfractal components that were not built (0 otherwise).
    pub fn omitted_mass(&self) -> f64 {
        fn walk(n: &Node) -> f64 {
            match n {
                Node::Hyper { parts, omitted } => {
                    parts.iter().map(walk).sum::<f64>()
                        + omitted.as_ref().and_then(|o| o.mass()).unwrap_or(0.0)
                }
                Node::Scaled { c, inner } => c * walk(inner),
                Node::Union(p) => p.iter().map(walk).sum(),
                _ => 0.0,
            }
        }
        walk(&self.node)
    }

    /// Sum of l^s over l >= theta.
    pub fn partial_sum(&self, s: Complex64, theta: f64) -> Result<Complex64> {
        self.node.partial(s, theta, &mut Budget::new(GROUP_BUDGET))
    }
}

/// Sum of all lengths to absolute accuracy `eps`.
pub fn total_length(l: &FractalString, eps: f64) -> Result<f64> {
    if !(eps > 0.0) {
        return Err(Error::InvalidParameters(format!(
            "eps must be > 0, got {eps}"
        )));
    }
    if let Some(t) = l.total_length_hint() {
        return Ok(t);
    }
    let z = certified_sum(l, Complex64::new(1.0, 0.0), eps)?;
    Ok(z.value.re)
}

fn find_threshold(
    l: &FractalString,
    eps: f64,
    bound: impl Fn(f64) -> Option<f64>,
) -> Result<(f64, f64)> {
    let mut theta = l.first_length();
    if theta <= 0.0 {
        return Ok((f64::INFINITY, 0.0));
    }
    let check = |t: f64| match bound(t) {
        Some(b) => Ok((b <= eps, b)),
        None => Err(Error::TailBoundUnavailable(format!(
            "no tail bound at threshold {t:e}"
        ))),
    };
    // coarse steps of 1/16, then bisect in log scale down to a factor of 2
    let mut hi = theta;
    loop {
        let (ok, b) = check(theta)?;
        if ok {
            if theta == hi {
                return Ok((theta, b));
            }
            break;
        }
        hi = theta;
        theta /= 16.0;
        if theta < 1e-300 {
            return Err(Error::TailBoundUnavailable(format!(
                "tail bound does not reach {eps:e}; omitted mass {:e}",
                l.omitted_mass()
            )));
        }
    }
    let (mut lo, mut best) = (theta, check(theta)?.1);
    while hi / lo > 2.0 {
        let mid = (hi * lo).sqrt();
        let (ok, b) = check(mid)?;
        if ok {
            lo = mid;
            best = b;
        } else {
            hi = mid;
        }
    }
    Ok((lo, best))
}

fn certified_sum(l: &FractalString, s: Complex64, eps: f64) -> Result<ZetaSum> {
    let d = l.abscissa();
    if s.re <= d {
        return Err(Error::NotConvergent {
            re: s.re,
            abscissa: d,
        });
    }
    let (theta, bound) = find_threshold(l, eps, |t| l.tail_bound(s.re, t))?;
    let mut budget = Budget::new(GROUP_BUDGET);
    let value = l.node.partial(s, theta, &mut budget)?;
    Ok(ZetaSum {
        value,
        error: bound,
        threshold: theta,
        groups: budget.used(),
    })
}

/// Partial sum of the geometric zeta function with certified remainder <= eps.
pub fn geometric_zeta_partial(l: &FractalString, s: Complex64, eps: f64) -> Result<Complex64> {
    Ok(geometric_zeta_partial_detailed(l, s, eps)?.value)
}

pub fn geometric_zeta_partial_detailed(
    l: &FractalString,
    s: Complex64,
    eps: f64,
) -> Result<ZetaSum> {
    if !(eps > 0.0) {
        return Err(Error::InvalidParameters(format!(
            "eps must be > 0, got {eps}"
        )));
    }
    certified_sum(l, s, eps)
}

/// Geometric zeta function with the a-string tails replaced by their
/// asymptotic expansion; the error is an estimate, not a bound, for those
/// tails. Needed close to the abscissa where certified sums are too long.
pub fn geometric_zeta(l: &FractalString, s: Complex64, eps: f64) -> Result<ZetaSum> {
    let d = l.abscissa();
    if s.re <= d {
        return Err(Error::NotConvergent {
            re: s.re,
            abscissa: d,
        });
    }
    if let StringSpec::Tensor { left, right } = &l.spec {
        return tensor_zeta(left, right, s, eps);
    }
    let (theta, _) = find_threshold(l, eps, |t| l.node.tail_estimate(s, t).map(|x| x.1))?;
    let (tail, err) = l
        .node
        .tail_estimate(s, theta)
        .expect("checked by find_threshold");
    let mut budget = Budget::new(GROUP_BUDGET);
    let head = l.node.partial(s, theta, &mut budget)?;
    Ok(ZetaSum {
        value: head + tail,
        error: err,
        threshold: theta,
        groups: budget.used(),
    })
}

/// zeta_{L1 (x) L2} = zeta_{L1} zeta_{L2}: products of lengths are too many
/// to enumerate near the abscissa. `threshold` is 0 since no single cut
/// describes which products were summed.
fn tensor_zeta(left: &StringSpec, right: &StringSpec, s: Complex64, eps: f64) -> Result<ZetaSum> {
    let (a, b) = (build(left)?, build(right)?);
    let full = |l: &FractalString| {
        l.node.tail_bound(s.re, f64::INFINITY).ok_or_else(|| {
            Error::TailBoundUnavailable(format!("no bound on the factor zeta at Re s = {}", s.re))
        })
    };
    let (ba, bb) = (full(&a)?, full(&b)?);
    let za = geometric_zeta(&a, s, eps / (2.0 * (bb + 1.0)))?;
    let zb = geometric_zeta(&b, s, eps / (2.0 * (ba + 1.0)))?;
    Ok(ZetaSum {
        value: za.value * zb.value,
        error: za.value.norm() * zb.error + za.error * zb.value.norm() + za.error * zb.error,
        threshold: 0.0,
        groups: za.groups + zb.groups,
    })
}

/// Analytic abscissa when the spec admits one, otherwise an exponent fit.
pub fn abscissa_estimate(l: &FractalString) -> Abscissa {
    let d = l.abscissa();
    if d.is_finite() {
        return Abscissa {
            value: d,
            interval: None,
            analytic: true,
        };
    }
    if matches!(l.node, Node::Finite(_)) {
        // a finite set of points has box dimension 0
        return Abscissa {
            value: 0.0,
            interval: None,
            analytic: true,
        };
    }
    let lengths: Vec<f64> = l.lengths().take(100_000).collect();
    fit_abscissa(&lengths).unwrap_or(Abscissa {
        value: f64::NAN,
        interval: None,
        analytic: false,
    })
}

/// Fits l_j ~ j^{-1/D} by least squares on the last decade of indices.
pub fn fit_abscissa(lengths: &[f64]) -> Option<Abscissa> {
    let n = lengths.len();
    if n < 20 {
        return None;
    }
    let start = n / 10;
    let (x, y): (Vec<f64>, Vec<f64>) = (start..n)
        .map(|i| (((i + 1) as f64).ln(), lengths[i].ln()))
        .unzip();
    let f = crate::numeric::linear_fit(&x, &y)?;
    if f.slope >= 0.0 {
        return None;
    }
    let d = -1.0 / f.slope;
    let (b1, b2) = (f.slope - 2.0 * f.slope_se, f.slope + 2.0 * f.slope_se);
    let (d1, d2) = (-1.0 / b1, if b2 < 0.0 { -1.0 / b2 } else { f64::INFINITY });
    Some(Abscissa {
        value: d,
        interval: Some((d1.min(d2), d1.max(d2))),
        analytic: false,
    })
}

/// The set A_L = {a_k = sum_{j>=k} l_j} of the string, truncated after
/// `depth` points (`None` keeps the whole countable set).
pub fn string_to_set(l: &FractalString, depth: Option<usize>) -> BoundedSet {
    BoundedSet::StringSet {
        spec: l.spec().clone(),
        depth,
    }
}

#[cfg(test)]
mod tests;
