//! Internal representation of a built fractal string and the recursive
//! kernels (enumeration, partial sums, rank queries, tail bounds).

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::astring;
use crate::error::{Error, Result};
use crate::numeric::{rpow, ZERO};

/// A run of equal lengths.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Group {
    pub length: f64,
    pub multiplicity: f64,
}

#[derive(Clone, Debug)]
pub(crate) enum Node {
    /// sorted decreasing, equal lengths merged
    Finite(Vec<Group>),
    AString {
        a: f64,
    },
    /// lengths first ratio^k with multiplicity mult0 growth^k, k >= 0
    Geometric {
        first: f64,
        ratio: f64,
        mult0: f64,
        growth: f64,
    },
    /// all words over the ratios (empty word included); distinct ratios in
    /// decreasing order together with how often each occurs
    Moran {
        ratios: Vec<(f64, f64)>,
    },
    Scaled {
        c: f64,
        inner: Box<Node>,
    },
    Union(Vec<Node>),
    Tensor(Box<Node>, Box<Node>),
    Hyper {
        parts: Vec<Node>,
        omitted: Option<Omitted>,
    },
}

/// Hyperfractal components that were not built.
#[derive(Clone, Debug)]
pub(crate) enum Omitted {
    Finite(Vec<Node>),
    /// c_k = c_next q^i and m_k = m_next + step i for i >= 0
    Rule {
        dim: f64,
        c_next: f64,
        q: f64,
        m_next: f64,
        step: f64,
    },
}

/// Caps the number of groups visited by one summation.
pub(crate) struct Budget {
    left: usize,
    total: usize,
}

impl Budget {
    pub fn new(n: usize) -> Self {
        Budget { left: n, total: n }
    }
    #[inline]
    fn spend(&mut self) -> Result<()> {
        if self.left == 0 {
            return Err(Error::BudgetExceeded(self.total));
        }
        self.left -= 1;
        Ok(())
    }
    /// Fails early when `n` more groups would not fit.
    fn reserve(&self, n: f64) -> Result<()> {
        if n > self.left as f64 {
            return Err(Error::BudgetExceeded(self.total));
        }
        Ok(())
    }
    pub fn used(&self) -> usize {
        self.total - self.left
    }
}

#[derive(Clone, Copy, PartialEq)]
struct Key(f64);
impl Eq for Key {}
impl PartialOrd for Key {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Key {
    fn cmp(&self, o: &Self) -> Ordering {
        self.0.total_cmp(&o.0)
    }
}

pub(crate) type GroupIter<'a> = Box<dyn Iterator<Item = Group> + 'a>;

/// Smallest sigma-weighted geometric level count: number of k >= 0 with
/// first ratio^k >= theta.
fn levels_at_least(first: f64, ratio: f64, theta: f64) -> u64 {
    if theta > first {
        return 0;
    }
    // lengths below the smallest subnormal are zero anyway
    let theta = theta.max(f64::MIN_POSITIVE);
    let mut k = ((theta / first).ln() / ratio.ln()).floor().max(0.0) as u64;
    // repair rounding at exact powers
    while first * ratio.powi(k as i32 + 1) >= theta {
        k += 1;
    }
    while k > 0 && first * ratio.powi(k as i32) < theta {
        k -= 1;
    }
    k + 1
}

impl Node {
    pub fn first(&self) -> Option<f64> {
        match self {
            Node::Finite(v) => v.first().map(|g| g.length),
            Node::AString { a } => Some(astring::length(*a, 1.0)),
            Node::Geometric { first, .. } => Some(*first),
            Node::Moran { .. } => Some(1.0),
            Node::Scaled { c, inner } => inner.first().map(|l| c * l),
            Node::Union(parts) | Node::Hyper { parts, .. } => parts
                .iter()
                .filter_map(|p| p.first())
                .fold(None, |m, l| Some(m.map_or(l, |m: f64| m.max(l)))),
            Node::Tensor(l, r) => Some(l.first()? * r.first()?),
        }
    }

    /// True when lengths are distinct with polynomial decay, so that a range
    /// of lengths holds many groups. Tensor loops put such factors inside.
    fn dense(&self) -> bool {
        match self {
            Node::AString { .. } => true,
            Node::Scaled { inner, .. } => inner.dense(),
            Node::Union(parts) | Node::Hyper { parts, .. } => parts.iter().any(|p| p.dense()),
            Node::Tensor(l, r) => l.dense() || r.dense(),
            _ => false,
        }
    }

    /// (outer, inner) factors of a tensor product.
    fn tensor_order<'a>(l: &'a Node, r: &'a Node) -> (&'a Node, &'a Node) {
        if l.dense() && !r.dense() {
            (r, l)
        } else {
            (l, r)
        }
    }

    /// Abscissa of convergence of the Dirichlet series; -inf for finite strings.
    pub fn abscissa(&self) -> f64 {
        match self {
            Node::Finite(_) => f64::NEG_INFINITY,
            Node::AString { a } => 1.0 / (1.0 + a),
            Node::Geometric { ratio, growth, .. } => growth.ln() / (1.0 / ratio).ln(),
            Node::Moran { ratios } => moran_dimension_weighted(ratios),
            Node::Scaled { inner, .. } => inner.abscissa(),
            Node::Union(parts) => parts
                .iter()
                .map(|p| p.abscissa())
                .fold(f64::NEG_INFINITY, f64::max),
            Node::Hyper { parts, omitted } => {
                let d = parts
                    .iter()
                    .map(|p| p.abscissa())
                    .fold(f64::NEG_INFINITY, f64::max);
                match omitted {
                    Some(Omitted::Rule { dim, .. }) => d.max(*dim),
                    Some(Omitted::Finite(v)) => v.iter().map(|p| p.abscissa()).fold(d, f64::max),
                    None => d,
                }
            }
            Node::Tensor(l, r) => l.abscissa().max(r.abscissa()),
        }
    }

    pub fn total(&self) -> Option<f64> {
        match self {
            Node::Finite(v) => Some(v.iter().map(|g| g.length * g.multiplicity).sum()),
            Node::AString { .. } => Some(1.0),
            Node::Geometric {
                first,
                ratio,
                mult0,
                growth,
            } => {
                let q = growth * ratio;
                (q < 1.0).then(|| mult0 * first / (1.0 - q))
            }
            Node::Moran { ratios } => {
                let s: f64 = ratios.iter().map(|(r, c)| r * c).sum();
                (s < 1.0).then(|| 1.0 / (1.0 - s))
            }
            Node::Scaled { c, inner } => inner.total().map(|t| c * t),
            Node::Union(parts) => parts.iter().map(|p| p.total()).sum(),
            Node::Hyper { parts, omitted } => {
                let t: Option<f64> = parts.iter().map(|p| p.total()).sum();
                Some(t? + omitted.as_ref().map_or(Some(0.0), |o| o.mass())?)
            }
            Node::Tensor(l, r) => Some(l.total()? * r.total()?),
        }
    }

    /// Lazy enumeration in nonincreasing order of length. Equal lengths may be
    /// split over adjacent groups.
    pub fn groups(&self) -> GroupIter<'_> {
        match self {
            Node::Finite(v) => Box::new(v.iter().copied()),
            Node::AString { a } => {
                let a = *a;
                Box::new((1u64..).map(move |j| Group {
                    length: astring::length(a, j as f64),
                    multiplicity: 1.0,
                }))
            }
            Node::Geometric {
                first,
                ratio,
                mult0,
                growth,
            } => {
                let (first, ratio, mult0, growth) = (*first, *ratio, *mult0, *growth);
                Box::new((0i32..).map_while(move |k| {
                    let length = first * ratio.powi(k);
                    (length > 0.0).then(|| Group {
                        length,
                        multiplicity: mult0 * growth.powi(k),
                    })
                }))
            }
            Node::Moran { ratios } => Box::new(MoranIter::new(ratios)),
            Node::Scaled { c, inner } => {
                let c = *c;
                Box::new(inner.groups().map(move |g| Group {
                    length: c * g.length,
                    multiplicity: g.multiplicity,
                }))
            }
            Node::Union(parts) | Node::Hyper { parts, .. } => {
                Box::new(MergeIter::new(parts.iter().map(|p| p.groups()).collect()))
            }
            Node::Tensor(l, r) => Box::new(TensorIter::new(l.groups(), r.groups())),
        }
    }

    /// Sum of mult l^s over lengths l >= theta.
    pub fn partial(&self, s: Complex64, theta: f64, budget: &mut Budget) -> Result<Complex64> {
        match self {
            Node::Finite(v) => {
                let mut acc = ZERO;
                for g in v.iter().take_while(|g| g.length >= theta) {
                    budget.spend()?;
                    acc += rpow(g.length, s) * g.multiplicity;
                }
                Ok(acc)
            }
            Node::AString { a } => {
                let n = astring::count_at_least(*a, theta);
                budget.reserve(n)?;
                let mut acc = ZERO;
                let mut j = 1.0;
                while j <= n {
                    budget.spend()?;
                    acc += rpow(astring::length(*a, j), s);
                    j += 1.0;
                }
                Ok(acc)
            }
            Node::Geometric {
                first,
                ratio,
                mult0,
                growth,
            } => {
                let k = levels_at_least(*first, *ratio, theta);
                let mut acc = ZERO;
                for i in 0..k as i32 {
                    budget.spend()?;
                    acc += rpow(first * ratio.powi(i), s) * (mult0 * growth.powi(i));
                }
                Ok(acc)
            }
            Node::Moran { ratios } => {
                let mut acc = ZERO;
                moran_dfs(ratios, theta, budget, &mut |l, m| acc += rpow(l, s) * m)?;
                Ok(acc)
            }
            Node::Scaled { c, inner } => Ok(rpow(*c, s) * inner.partial(s, theta / c, budget)?),
            Node::Union(parts) | Node::Hyper { parts, .. } => {
                let mut acc = ZERO;
                for p in parts {
                    acc += p.partial(s, theta, budget)?;
                }
                Ok(acc)
            }
            Node::Tensor(l, r) => {
                let (l, r) = Node::tensor_order(l, r);
                let Some(r1) = r.first() else { return Ok(ZERO) };
                let mut acc = ZERO;
                for g in l.groups() {
                    if g.length * r1 < theta {
                        break;
                    }
                    budget.spend()?;
                    acc += rpow(g.length, s)
                        * g.multiplicity
                        * r.partial(s, theta / g.length, budget)?;
                }
                Ok(acc)
            }
        }
    }

    /// (number of lengths >= x, sum of those lengths), counted with multiplicity.
    pub fn count_sum_at_least(&self, x: f64, budget: &mut Budget) -> Result<(f64, f64)> {
        match self {
            Node::Finite(v) => Ok(v
                .iter()
                .take_while(|g| g.length >= x)
                .fold((0.0, 0.0), |(c, s), g| {
                    (c + g.multiplicity, s + g.multiplicity * g.length)
                })),
            Node::AString { a } => {
                let n = astring::count_at_least(*a, x);
                Ok((n, 1.0 - (n + 1.0).powf(-a)))
            }
            Node::Geometric {
                first,
                ratio,
                mult0,
                growth,
            } => {
                let k = levels_at_least(*first, *ratio, x) as i32;
                let count = if *growth == 1.0 {
                    mult0 * k as f64
                } else {
                    mult0 * (growth.powi(k) - 1.0) / (growth - 1.0)
                };
                let q = growth * ratio;
                let sum = if q == 1.0 {
                    mult0 * first * k as f64
                } else {
                    mult0 * first * (1.0 - q.powi(k)) / (1.0 - q)
                };
                Ok((count, sum))
            }
            Node::Moran { ratios } => {
                let (mut c, mut s) = (0.0, 0.0);
                moran_dfs(ratios, x, budget, &mut |l, m| {
                    c += m;
                    s += l * m;
                })?;
                Ok((c, s))
            }
            Node::Scaled { c, inner } => {
                let (n, s) = inner.count_sum_at_least(x / c, budget)?;
                Ok((n, c * s))
            }
            Node::Union(parts) | Node::Hyper { parts, .. } => {
                let (mut n, mut s) = (0.0, 0.0);
                for p in parts {
                    let (a, b) = p.count_sum_at_least(x, budget)?;
                    n += a;
                    s += b;
                }
                Ok((n, s))
            }
            Node::Tensor(l, r) => {
                let (l, r) = Node::tensor_order(l, r);
                let Some(r1) = r.first() else {
                    return Ok((0.0, 0.0));
                };
                let (mut n, mut s) = (0.0, 0.0);
                for g in l.groups() {
                    if g.length * r1 < x {
                        break;
                    }
                    budget.spend()?;
                    let (a, b) = r.count_sum_at_least(x / g.length, budget)?;
                    n += g.multiplicity * a;
                    s += g.multiplicity * g.length * b;
                }
                Ok((n, s))
            }
        }
    }

    /// Sum of mult l over lengths l < x, computed directly rather than as
    /// total minus head (which cancels when x is small).
    pub fn mass_below(&self, x: f64, budget: &mut Budget) -> Result<f64> {
        let none = || Error::TailBoundUnavailable("total length unknown".into());
        match self {
            Node::Finite(v) => Ok(v
                .iter()
                .filter(|g| g.length < x)
                .map(|g| g.multiplicity * g.length)
                .sum()),
            Node::AString { a } => Ok((astring::count_at_least(*a, x) + 1.0).powf(-a)),
            Node::Geometric {
                first,
                ratio,
                mult0,
                growth,
            } => {
                let k = levels_at_least(*first, *ratio, x) as i32;
                let q = growth * ratio;
                if q >= 1.0 {
                    return Err(none());
                }
                Ok(mult0 * first * q.powi(k) / (1.0 - q))
            }
            Node::Moran { ratios } => {
                let total = self.total().ok_or_else(none)?;
                if x > 1.0 {
                    return Ok(total);
                }
                // every word below x extends a unique longest prefix >= x by one letter
                let mut acc = 0.0;
                moran_dfs(ratios, x, budget, &mut |l, m| {
                    for &(r, c) in ratios {
                        if l * r < x {
                            acc += m * c * l * r;
                        }
                    }
                })?;
                Ok(acc * total)
            }
            Node::Scaled { c, inner } => Ok(c * inner.mass_below(x / c, budget)?),
            Node::Union(parts) => parts.iter().map(|p| p.mass_below(x, budget)).sum(),
            Node::Hyper { parts, omitted } => {
                let m: f64 = parts
                    .iter()
                    .map(|p| p.mass_below(x, budget))
                    .sum::<Result<f64>>()?;
                Ok(m + omitted
                    .as_ref()
                    .map_or(Some(0.0), |o| o.mass())
                    .ok_or_else(none)?)
            }
            Node::Tensor(l, r) => {
                let (l, r) = Node::tensor_order(l, r);
                let Some(r1) = r.first() else { return Ok(0.0) };
                let mut acc = 0.0;
                for g in l.groups() {
                    if g.length * r1 < x {
                        break;
                    }
                    budget.spend()?;
                    acc += g.multiplicity * g.length * r.mass_below(x / g.length, budget)?;
                }
                Ok(acc + l.mass_below(x / r1, budget)? * r.total().ok_or_else(none)?)
            }
        }
    }

    /// Upper bound on sum of mult l^sigma over lengths l < theta (theta may be
    /// +inf, giving a bound on the whole Dirichlet series at sigma).
    pub fn tail_bound(&self, sigma: f64, theta: f64) -> Option<f64> {
        if sigma <= self.abscissa() {
            return None;
        }
        match self {
            Node::Finite(v) => Some(
                v.iter()
                    .filter(|g| g.length < theta)
                    .fold(0.0, |acc, g| acc + g.multiplicity * g.length.powf(sigma)),
            ),
            Node::AString { a } => {
                let p = (a + 1.0) * sigma;
                let j = if theta.is_finite() {
                    astring::count_at_least(*a, theta) + 1.0
                } else {
                    1.0
                };
                Some(a.powf(sigma) * (j.powf(-p) + j.powf(1.0 - p) / (p - 1.0)))
            }
            Node::Geometric {
                first,
                ratio,
                mult0,
                growth,
            } => {
                let q = growth * ratio.powf(sigma);
                let k = if theta.is_finite() {
                    levels_at_least(*first, *ratio, theta) as i32
                } else {
                    0
                };
                Some(mult0 * first.powf(sigma) * q.powi(k) / (1.0 - q))
            }
            Node::Moran { ratios } => {
                let rho = moran_rho(ratios, sigma);
                let full = 1.0 / (1.0 - rho);
                if !theta.is_finite() || theta > 1.0 {
                    return Some(full);
                }
                let rmin = ratios.last().unwrap().0;
                let n0 = ((theta.ln() / rmin.ln()).floor() + 1.0).max(0.0);
                let mut best = rho.powf(n0) * full;
                // Rankin: sum_{l<theta} l^sigma <= theta^{sigma-s'} Z(s')
                let d = self.abscissa();
                for f in [0.2, 0.4, 0.6, 0.8] {
                    let sp = d + f * (sigma - d);
                    let b = theta.powf(sigma - sp) / (1.0 - moran_rho(ratios, sp));
                    best = best.min(b);
                }
                Some(best)
            }
            Node::Scaled { c, inner } => Some(c.powf(sigma) * inner.tail_bound(sigma, theta / c)?),
            Node::Union(parts) => parts.iter().map(|p| p.tail_bound(sigma, theta)).sum(),
            Node::Hyper { parts, omitted } => {
                let t: Option<f64> = parts.iter().map(|p| p.tail_bound(sigma, theta)).sum();
                Some(
                    t? + omitted
                        .as_ref()
                        .map_or(Some(0.0), |o| o.zeta_bound(sigma))?,
                )
            }
            Node::Tensor(l, r) => {
                let (l, r) = Node::tensor_order(l, r);
                let zr = r.tail_bound(sigma, f64::INFINITY)?;
                if !theta.is_finite() {
                    return Some(l.tail_bound(sigma, f64::INFINITY)? * zr);
                }
                let r1 = r.first()?;
                const CAP: usize = 200_000;
                let mut acc = 0.0;
                for (i, g) in l.groups().enumerate() {
                    if g.length * r1 < theta || i >= CAP {
                        // every remaining left length is <= g.length
                        let eta = g.length * (1.0 + 1e-12);
                        return Some(acc + l.tail_bound(sigma, eta)? * zr);
                    }
                    acc += g.multiplicity
                        * g.length.powf(sigma)
                        * r.tail_bound(sigma, theta / g.length)?;
                }
                Some(acc)
            }
        }
    }

    /// Value estimate and error bound for sum_{l<theta} mult l^s, using the
    /// asymptotic tail expansion of a-strings where it applies.
    pub fn tail_estimate(&self, s: Complex64, theta: f64) -> Option<(Complex64, f64)> {
        match self {
            Node::AString { a } => {
                let j = astring::count_at_least(*a, theta) + 1.0;
                if j >= astring::em_start(*a, s) {
                    let (v, e) = astring::tail_sum(*a, s, j);
                    Some((v, e))
                } else {
                    Some((ZERO, self.tail_bound(s.re, theta)?))
                }
            }
            Node::Scaled { c, inner } => {
                let (v, e) = inner.tail_estimate(s, theta / c)?;
                Some((rpow(*c, s) * v, c.powf(s.re) * e))
            }
            Node::Union(parts) => {
                let mut acc = (ZERO, 0.0);
                for p in parts {
                    let (v, e) = p.tail_estimate(s, theta)?;
                    acc = (acc.0 + v, acc.1 + e);
                }
                Some(acc)
            }
            Node::Hyper { parts, omitted } => {
                let mut acc = (ZERO, 0.0);
                for p in parts {
                    let (v, e) = p.tail_estimate(s, theta)?;
                    acc = (acc.0 + v, acc.1 + e);
                }
                if let Some(o) = omitted {
                    acc.1 += o.zeta_bound(s.re)?;
                }
                Some(acc)
            }
            Node::Geometric {
                first,
                ratio,
                mult0,
                growth,
            } => {
                // exact: sum over the levels k >= K of a geometric series
                let q = rpow(*ratio, s) * *growth;
                if q.norm() >= 1.0 {
                    return None;
                }
                let k = if theta.is_finite() {
                    levels_at_least(*first, *ratio, theta) as i32
                } else {
                    0
                };
                Some((rpow(*first, s) * *mult0 * q.powi(k) / (1.0 - q), 0.0))
            }
            _ => Some((ZERO, self.tail_bound(s.re, theta)?)),
        }
    }
}

impl Omitted {
    pub fn mass(&self) -> Option<f64> {
        match self {
            Omitted::Finite(v) => v.iter().map(|p| p.total()).sum(),
            Omitted::Rule { c_next, q, .. } => Some(c_next / (1.0 - q)),
        }
    }

    /// Bound on the full Dirichlet series of the omitted components at sigma.
    pub fn zeta_bound(&self, sigma: f64) -> Option<f64> {
        match self {
            Omitted::Finite(v) => v.iter().map(|p| p.tail_bound(sigma, f64::INFINITY)).sum(),
            Omitted::Rule {
                dim,
                c_next,
                q,
                m_next,
                step,
            } => {
                if sigma <= *dim {
                    return None;
                }
                let denom = 1.0 - m_next.powf(1.0 - sigma / dim);
                let t0 = c_next.powf(sigma) * (m_next - 1.0).powf(1.0 - sigma);
                let rho = if sigma >= 1.0 {
                    q.powf(sigma)
                } else {
                    q.powf(sigma) * (1.0 + step / (m_next - 1.0)).powf(1.0 - sigma)
                };
                (rho < 1.0).then(|| t0 / (1.0 - rho) / denom)
            }
        }
    }
}

pub(crate) fn moran_rho(ratios: &[(f64, f64)], sigma: f64) -> f64 {
    ratios.iter().map(|(r, c)| c * r.powf(sigma)).sum()
}

/// Unique real root of sum_j r_j^sigma = 1 (0 when there is a single ratio).
pub(crate) fn moran_dimension_weighted(ratios: &[(f64, f64)]) -> f64 {
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    if moran_rho(ratios, 0.0) <= 1.0 {
        return 0.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if moran_rho(ratios, mid) > 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-17 {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// Groups equal ratios and sorts them in decreasing order.
pub(crate) fn group_ratios(ratios: &[f64]) -> Vec<(f64, f64)> {
    let mut v: Vec<f64> = ratios.to_vec();
    v.sort_by(|a, b| b.total_cmp(a));
    let mut out: Vec<(f64, f64)> = Vec::new();
    for r in v {
        match out.last_mut() {
            Some((q, c)) if *q == r => *c += 1.0,
            _ => out.push((r, 1.0)),
        }
    }
    out
}

/// Visits every exponent vector alpha with prod r^alpha >= theta, reporting
/// the length and the number of words (multinomial times copy counts).
fn moran_dfs(
    ratios: &[(f64, f64)],
    theta: f64,
    budget: &mut Budget,
    f: &mut dyn FnMut(f64, f64),
) -> Result<()> {
    if 1.0 < theta {
        return Ok(());
    }
    // stack entries: (length, mult, last index, word length, alpha_last)
    let mut stack: Vec<(f64, f64, usize, f64, f64)> = vec![(1.0, 1.0, 0, 0.0, 0.0)];
    while let Some((len, mult, last, n, a_last)) = stack.pop() {
        budget.spend()?;
        f(len, mult);
        for (j, &(r, c)) in ratios.iter().enumerate().skip(last) {
            let l2 = len * r;
            if l2 < theta {
                continue;
            }
            let aj = if j == last { a_last } else { 0.0 };
            let m2 = mult * (n + 1.0) / (aj + 1.0) * c;
            stack.push((l2, m2, j, n + 1.0, aj + 1.0));
        }
    }
    Ok(())
}

struct MoranIter<'a> {
    ratios: &'a [(f64, f64)],
    heap: BinaryHeap<(Key, usize, u64)>,
    // per heap entry payload, indexed by the usize in the heap key
    slots: Vec<(f64, usize, f64, f64)>,
    free: Vec<usize>,
    seq: u64,
}

impl<'a> MoranIter<'a> {
    fn new(ratios: &'a [(f64, f64)]) -> Self {
        let mut it = MoranIter {
            ratios,
            heap: BinaryHeap::new(),
            slots: Vec::new(),
            free: Vec::new(),
            seq: 0,
        };
        it.push(1.0, (1.0, 0, 0.0, 0.0));
        it
    }
    fn push(&mut self, len: f64, payload: (f64, usize, f64, f64)) {
        let idx = match self.free.pop() {
            Some(i) => {
                self.slots[i] = payload;
                i
            }
            None => {
                self.slots.push(payload);
                self.slots.len() - 1
            }
        };
        // ties broken by insertion order (earlier first) for determinism
        self.seq += 1;
        self.heap.push((Key(len), idx, u64::MAX - self.seq));
    }
}

impl Iterator for MoranIter<'_> {
    type Item = Group;
    fn next(&mut self) -> Option<Group> {
        let (Key(len), idx, _) = self.heap.pop()?;
        let (mult, last, n, a_last) = self.slots[idx];
        self.free.push(idx);
        for j in last..self.ratios.len() {
            let (r, c) = self.ratios[j];
            let aj = if j == last { a_last } else { 0.0 };
            let m2 = mult * (n + 1.0) / (aj + 1.0) * c;
            self.push(len * r, (m2, j, n + 1.0, aj + 1.0));
        }
        Some(Group {
            length: len,
            multiplicity: mult,
        })
    }
}

/// k-way merge of nonincreasing group streams.
struct MergeIter<'a> {
    iters: Vec<GroupIter<'a>>,
    heads: Vec<Option<Group>>,
    heap: BinaryHeap<(Key, std::cmp::Reverse<usize>)>,
}

impl<'a> MergeIter<'a> {
    fn new(mut iters: Vec<GroupIter<'a>>) -> Self {
        let mut heap = BinaryHeap::new();
        let heads: Vec<Option<Group>> = iters.iter_mut().map(|i| i.next()).collect();
        for (i, h) in heads.iter().enumerate() {
            if let Some(g) = h {
                heap.push((Key(g.length), std::cmp::Reverse(i)));
            }
        }
        MergeIter { iters, heads, heap }
    }
}

impl Iterator for MergeIter<'_> {
    type Item = Group;
    fn next(&mut self) -> Option<Group> {
        let (_, std::cmp::Reverse(i)) = self.heap.pop()?;
        let g = self.heads[i].take()?;
        self.heads[i] = self.iters[i].next();
        if let Some(h) = self.heads[i] {
            self.heap.push((Key(h.length), std::cmp::Reverse(i)));
        }
        Some(g)
    }
}

/// Best-first enumeration of pairwise products of two nonincreasing streams.
struct TensorIter<'a> {
    left: GroupIter<'a>,
    right: GroupIter<'a>,
    lbuf: Vec<Group>,
    rbuf: Vec<Group>,
    ldone: bool,
    rdone: bool,
    heap: BinaryHeap<(Key, std::cmp::Reverse<(usize, usize)>)>,
}

impl<'a> TensorIter<'a> {
    fn new(left: GroupIter<'a>, right: GroupIter<'a>) -> Self {
        let mut it = TensorIter {
            left,
            right,
            lbuf: vec![],
            rbuf: vec![],
            ldone: false,
            rdone: false,
            heap: BinaryHeap::new(),
        };
        if it.fetch_left(0) && it.fetch_right(0) {
            let p = it.lbuf[0].length * it.rbuf[0].length;
            it.heap.push((Key(p), std::cmp::Reverse((0, 0))));
        }
        it
    }
    fn fetch_left(&mut self, i: usize) -> bool {
        while self.lbuf.len() <= i && !self.ldone {
            match self.left.next() {
                Some(g) => self.lbuf.push(g),
                None => self.ldone = true,
            }
        }
        i < self.lbuf.len()
    }
    fn fetch_right(&mut self, j: usize) -> bool {
        while self.rbuf.len() <= j && !self.rdone {
            match self.right.next() {
                Some(g) => self.rbuf.push(g),
                None => self.rdone = true,
            }
        }
        j < self.rbuf.len()
    }
}

impl Iterator for TensorIter<'_> {
    type Item = Group;
    fn next(&mut self) -> Option<Group> {
        let (Key(p), std::cmp::Reverse((i, j))) = self.heap.pop()?;
        let mult = self.lbuf[i].multiplicity * self.rbuf[j].multiplicity;
        if self.fetch_right(j + 1) {
            let q = self.lbuf[i].length * self.rbuf[j + 1].length;
            self.heap.push((Key(q), std::cmp::Reverse((i, j + 1))));
        }
        if j == 0 && self.fetch_left(i + 1) {
            let q = self.lbuf[i + 1].length * self.rbuf[0].length;
            self.heap.push((Key(q), std::cmp::Reverse((i + 1, 0))));
        }
        Some(Group {
            length: p,
            multiplicity: mult,
        })
    }
}
