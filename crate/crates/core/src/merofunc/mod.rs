//! Closed-form meromorphic zeta functions with analytic pole catalogs, and
//! contour machinery (residues, Laurent coefficients, pole orders) that works
//! on any evaluable function.

mod catalog;
mod contour;
mod expr;
pub mod roots;

#[cfg(test)]
mod tests;

use std::fmt::Write as _;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};

pub use catalog::*;
pub use contour::*;
pub use expr::Expr;

/// Pole order: a positive integer or an essential singularity.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "OrderRepr", try_from = "OrderRepr")]
pub enum Order {
    Finite(u32),
    Essential,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum OrderRepr {
    N(u32),
    Flag(String),
}

impl From<Order> for OrderRepr {
    fn from(o: Order) -> Self {
        match o {
            Order::Finite(n) => OrderRepr::N(n),
            Order::Essential => OrderRepr::Flag("essential".into()),
        }
    }
}

impl TryFrom<OrderRepr> for Order {
    type Error = String;
    fn try_from(r: OrderRepr) -> std::result::Result<Self, String> {
        match r {
            OrderRepr::N(0) => Err("pole order must be >= 1".into()),
            OrderRepr::N(n) => Ok(Order::Finite(n)),
            OrderRepr::Flag(f) if f == "essential" => Ok(Order::Essential),
            OrderRepr::Flag(f) => Err(format!("unknown order flag {f}")),
        }
    }
}

impl std::fmt::Display for Order {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Order::Finite(n) => write!(f, "{n}"),
            Order::Essential => f.write_str("essential"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Analytic,
    NumericContour,
    /// residue read off the Fourier coefficients of a periodic tube profile
    NumericFourier,
}

impl Provenance {
    pub fn as_str(&self) -> &'static str {
        match self {
            Provenance::Analytic => "analytic",
            Provenance::NumericContour => "numeric-contour",
            Provenance::NumericFourier => "numeric-fourier",
        }
    }
}

/// Whether a catalog candidate is known to be a genuine pole.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PoleStatus {
    Confirmed,
    /// a zero of the numerator could cancel it; not checked
    Unverified,
    /// the singularity cancels (zero residue at a simple candidate, or a
    /// vanishing numerator)
    Removable,
}

fn confirmed() -> PoleStatus {
    PoleStatus::Confirmed
}

/// One pole. For order > 1 `residue` holds the leading coefficient
/// c_{-order} of the Laurent expansion.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PoleRecord {
    pub location: Complex64,
    pub order: Order,
    pub residue: Complex64,
    pub provenance: Provenance,
    #[serde(default = "confirmed")]
    pub status: PoleStatus,
}

pub const POLE_CSV_HEADER: &str = "re,im,order,res_re,res_im,provenance";

/// CSV with header `re,im,order,res_re,res_im,provenance`.
pub fn poles_to_csv(records: &[PoleRecord]) -> String {
    let mut out = String::from(POLE_CSV_HEADER);
    out.push('\n');
    for r in records {
        let _ = writeln!(
            out,
            "{:?},{:?},{},{:?},{:?},{}",
            r.location.re + 0.0,
            r.location.im + 0.0,
            r.order,
            r.residue.re + 0.0,
            r.residue.im + 0.0,
            r.provenance.as_str()
        );
    }
    out
}

pub type ResidueRule = Arc<dyn Fn(Complex64) -> Complex64 + Send + Sync>;

/// Status of the points of a family: fixed, or decided per point from a
/// numerator that could cancel the pole.
#[derive(Clone)]
pub enum Status {
    Fixed(PoleStatus),
    Numerator(ResidueRule),
}

/// |numerator| below this demotes a candidate to removable.
pub const CANCELLATION_THRESHOLD: f64 = 1e-10;

impl Status {
    fn at(&self, w: Complex64) -> PoleStatus {
        match self {
            Status::Fixed(s) => *s,
            Status::Numerator(f) => {
                if f(w).norm() < CANCELLATION_THRESHOLD {
                    PoleStatus::Removable
                } else {
                    PoleStatus::Unverified
                }
            }
        }
    }
    fn shifted(&self, d: f64) -> Status {
        match self {
            Status::Fixed(s) => Status::Fixed(*s),
            Status::Numerator(f) => {
                let f = f.clone();
                Status::Numerator(Arc::new(move |w| f(w - d)))
            }
        }
    }
}

/// Analytic description of a set of poles. `residue` is None where only a
/// numerical value is available (essential singularities).
#[derive(Clone)]
pub enum PoleFamily {
    Point {
        at: Complex64,
        order: Order,
        residue: Option<Complex64>,
        status: Status,
    },
    /// re + i period k, k in Z
    Lattice {
        re: f64,
        period: f64,
        order: Order,
        residue: Option<ResidueRule>,
        status: Status,
    },
    /// roots of 1 - sum count_j r_j^{s - shift}
    Moran {
        ratios: Vec<(f64, f64)>,
        shift: f64,
        order: Order,
        residue: Option<ResidueRule>,
        status: Status,
    },
}

#[derive(Clone, Default)]
pub struct Catalog {
    pub families: Vec<PoleFamily>,
}

/// Catalog candidate before numerical completion.
#[derive(Clone, Debug)]
pub struct Candidate {
    pub location: Complex64,
    pub order: Order,
    pub residue: Option<Complex64>,
    pub status: PoleStatus,
}

impl PoleFamily {
    fn candidates(&self, re: (f64, f64), im: (f64, f64), out: &mut Vec<Candidate>) -> Result<()> {
        let inb = |z: Complex64| z.re >= re.0 && z.re <= re.1 && z.im >= im.0 && z.im <= im.1;
        match self {
            PoleFamily::Point {
                at,
                order,
                residue,
                status,
            } => {
                if inb(*at) {
                    out.push(Candidate {
                        location: *at,
                        order: *order,
                        residue: *residue,
                        status: status.at(*at),
                    });
                }
            }
            PoleFamily::Lattice {
                re: x,
                period,
                order,
                residue,
                status,
            } => {
                if *x >= re.0 && *x <= re.1 {
                    let k0 = (im.0 / period).ceil() as i64;
                    let k1 = (im.1 / period).floor() as i64;
                    for k in k0..=k1 {
                        let w = Complex64::new(*x, *period * k as f64);
                        out.push(Candidate {
                            location: w,
                            order: *order,
                            residue: residue.as_ref().map(|f| f(w)),
                            status: status.at(w),
                        });
                    }
                }
            }
            PoleFamily::Moran {
                ratios,
                shift,
                order,
                residue,
                status,
            } => {
                let roots = roots::moran_roots_in(ratios, (re.0 - shift, re.1 - shift), im, 1e-9)?;
                for z in roots {
                    let w = z + shift;
                    out.push(Candidate {
                        location: w,
                        order: *order,
                        residue: residue.as_ref().map(|f| f(w)),
                        status: status.at(w),
                    });
                }
            }
        }
        Ok(())
    }

    /// Closest point of the family to s (approximate for Moran roots, valid
    /// when s is already close).
    fn nearest(&self, s: Complex64) -> Option<Complex64> {
        match self {
            PoleFamily::Point { at, .. } => Some(*at),
            PoleFamily::Lattice { re, period, .. } => {
                Some(Complex64::new(*re, period * (s.im / period).round()))
            }
            PoleFamily::Moran { ratios, shift, .. } => {
                let (h, dh) = roots::moran_h(ratios, s - shift);
                let step = h / dh;
                step.re.is_finite().then(|| s - step)
            }
        }
    }

    pub(crate) fn shifted(&self, d: f64, factor: f64) -> PoleFamily {
        let rule = |r: &Option<ResidueRule>| {
            r.as_ref().map(|f| {
                let f = f.clone();
                Arc::new(move |w: Complex64| factor * f(w - d)) as ResidueRule
            })
        };
        match self {
            PoleFamily::Point {
                at,
                order,
                residue,
                status,
            } => PoleFamily::Point {
                at: at + d,
                order: *order,
                residue: residue.map(|r| r * factor),
                status: status.shifted(d),
            },
            PoleFamily::Lattice {
                re,
                period,
                order,
                residue,
                status,
            } => PoleFamily::Lattice {
                re: re + d,
                period: *period,
                order: *order,
                residue: rule(residue),
                status: status.shifted(d),
            },
            PoleFamily::Moran {
                ratios,
                shift,
                order,
                residue,
                status,
            } => PoleFamily::Moran {
                ratios: ratios.clone(),
                shift: shift + d,
                order: *order,
                residue: rule(residue),
                status: status.shifted(d),
            },
        }
    }

    /// Same family with residues transformed by `f(omega, residue)`.
    pub(crate) fn map_residue(
        &self,
        f: impl Fn(Complex64, Complex64) -> Complex64 + Send + Sync + Clone + 'static,
    ) -> PoleFamily {
        let rule = |r: &Option<ResidueRule>| {
            r.as_ref().map(|g| {
                let (g, f) = (g.clone(), f.clone());
                Arc::new(move |w: Complex64| f(w, g(w))) as ResidueRule
            })
        };
        match self {
            PoleFamily::Point {
                at,
                order,
                residue,
                status,
            } => PoleFamily::Point {
                at: *at,
                order: *order,
                residue: residue.map(|r| f(*at, r)),
                status: status.clone(),
            },
            PoleFamily::Lattice {
                re,
                period,
                order,
                residue,
                status,
            } => PoleFamily::Lattice {
                re: *re,
                period: *period,
                order: *order,
                residue: rule(residue),
                status: status.clone(),
            },
            PoleFamily::Moran {
                ratios,
                shift,
                order,
                residue,
                status,
            } => PoleFamily::Moran {
                ratios: ratios.clone(),
                shift: *shift,
                order: *order,
                residue: rule(residue),
                status: status.clone(),
            },
        }
    }
}

fn merge_tol(w: Complex64) -> f64 {
    1e-9 * (1.0 + w.norm())
}

impl Catalog {
    /// Candidates in the closed window, coincident points merged: equal
    /// orders add their residues, otherwise the higher order wins.
    pub fn candidates(&self, re: (f64, f64), im: (f64, f64)) -> Result<Vec<Candidate>> {
        let mut raw = Vec::new();
        for f in &self.families {
            f.candidates(re, im, &mut raw)?;
        }
        raw.sort_by(|a, b| {
            a.location
                .im
                .total_cmp(&b.location.im)
                .then(a.location.re.total_cmp(&b.location.re))
        });
        let mut out: Vec<Candidate> = Vec::new();
        for c in raw {
            if let Some(p) = out
                .iter_mut()
                .find(|p| (p.location - c.location).norm() < merge_tol(c.location))
            {
                match (p.order, c.order) {
                    (Order::Essential, _) | (_, Order::Essential) => {
                        p.order = Order::Essential;
                        p.residue = None;
                    }
                    (Order::Finite(a), Order::Finite(b)) if a == b => {
                        p.residue = match (p.residue, c.residue) {
                            (Some(x), Some(y)) => Some(x + y),
                            _ => None,
                        };
                    }
                    (Order::Finite(a), Order::Finite(b)) => {
                        if b > a {
                            p.order = c.order;
                            p.residue = c.residue;
                        }
                    }
                }
                if c.status == PoleStatus::Confirmed || p.status == PoleStatus::Confirmed {
                    p.status = PoleStatus::Confirmed;
                }
            } else {
                out.push(c);
            }
        }
        Ok(out)
    }

    fn nearest(&self, s: Complex64) -> Option<Complex64> {
        self.families
            .iter()
            .filter_map(|f| f.nearest(s))
            .min_by(|a, b| (a - s).norm().total_cmp(&(b - s).norm()))
    }
}

/// Abscissae of absolute convergence, holomorphic and meromorphic
/// continuation. None when unknown; infinities are allowed.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Meta {
    #[serde(serialize_with = "ser_ext")]
    pub d_abs: Option<f64>,
    #[serde(serialize_with = "ser_ext")]
    pub d_hol: Option<f64>,
    #[serde(serialize_with = "ser_ext")]
    pub d_mer: Option<f64>,
}

fn ser_ext<S: Serializer>(x: &Option<f64>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match x {
        None => s.serialize_none(),
        Some(v) if v.is_finite() => s.serialize_f64(*v),
        Some(v) => s.serialize_str(if *v > 0.0 { "inf" } else { "-inf" }),
    }
}

impl Meta {
    pub const UNKNOWN: Meta = Meta {
        d_abs: None,
        d_hol: None,
        d_mer: None,
    };

    pub fn new(d_abs: f64, d_hol: f64, d_mer: f64) -> Meta {
        Meta {
            d_abs: Some(d_abs),
            d_hol: Some(d_hol),
            d_mer: Some(d_mer),
        }
    }

    /// D_mer <= D_hol <= D_abs wherever both sides are known.
    pub fn is_ordered(&self) -> bool {
        let le = |a: Option<f64>, b: Option<f64>| match (a, b) {
            (Some(a), Some(b)) => a <= b + 1e-12,
            _ => true,
        };
        le(self.d_mer, self.d_hol) && le(self.d_hol, self.d_abs) && le(self.d_mer, self.d_abs)
    }

    fn map(&self, f: impl Fn(f64) -> f64) -> Meta {
        Meta {
            d_abs: self.d_abs.map(&f),
            d_hol: self.d_hol.map(&f),
            d_mer: self.d_mer.map(&f),
        }
    }
}

/// Truncated series zeta0(t) sum_{n<=n_max} (n!)^{-t} (scale^{-t} h(t))^{-n}
/// at t = s - shift, times weight(s). Used to bound what the truncation left out.
#[derive(Clone, Debug)]
pub(crate) struct Remainder {
    pub weight: Expr,
    pub shift: f64,
    pub zeta0: Expr,
    pub ln_scale: f64,
    pub h: Expr,
    pub n_max: usize,
}

impl Remainder {
    /// Bound on the omitted terms n > n_max; infinite where the terms do not
    /// decay from n_max on.
    fn bound(&self, s: Complex64) -> f64 {
        let t = s - self.shift;
        let sigma = t.re;
        if !(sigma > 0.0) {
            return f64::INFINITY;
        }
        let x = ((-t * self.ln_scale).exp() * self.h.eval(t)).norm();
        let n = self.n_max as f64;
        let q = (n + 2.0).powf(-sigma) / x;
        if !(q < 1.0) {
            return f64::INFINITY;
        }
        let ln_fact: f64 = (2..=self.n_max + 1).map(|k| (k as f64).ln()).sum();
        let ln_term = self.zeta0.eval(t).norm().ln() - sigma * ln_fact - (n + 1.0) * x.ln();
        self.weight.eval(s).norm() * ln_term.exp() / (1.0 - q)
    }
}

/// Relative truncation error above which evaluation is refused.
pub const TRUNCATION_TOLERANCE: f64 = 1e-8;

/// A zeta function given in closed form, with its abscissae and (optionally)
/// an analytic pole catalog.
#[derive(Clone)]
pub struct ClosedZeta {
    pub name: String,
    pub expr: Expr,
    pub meta: Meta,
    pub catalog: Option<Catalog>,
    /// largest length of the underlying fractal string, when this is a
    /// geometric zeta function
    pub lead_length: Option<f64>,
    pub(crate) remainders: Vec<Remainder>,
}

impl std::fmt::Debug for ClosedZeta {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ClosedZeta")
            .field("name", &self.name)
            .field("meta", &self.meta)
            .finish_non_exhaustive()
    }
}

/// Radius inside which evaluation next to a catalog pole is refused.
pub fn guard_radius(s: Complex64) -> f64 {
    1e-8 * (1.0 + s.norm())
}

impl ClosedZeta {
    /// Bare expression without catalog; pole search falls back to numerics.
    pub fn from_expr(name: impl Into<String>, expr: Expr) -> ClosedZeta {
        ClosedZeta {
            name: name.into(),
            expr,
            meta: Meta::UNKNOWN,
            catalog: None,
            lead_length: None,
            remainders: Vec::new(),
        }
    }

    /// Geometric zeta of the one-length string {l}: l^s.
    pub fn trivial(l: f64) -> ClosedZeta {
        let ninf = f64::NEG_INFINITY;
        ClosedZeta {
            name: format!("trivial({l})"),
            expr: if l == 1.0 { Expr::c(1.0) } else { Expr::pow(l) },
            meta: Meta::new(ninf, ninf, ninf),
            catalog: Some(Catalog::default()),
            lead_length: Some(l),
            remainders: Vec::new(),
        }
    }

    pub fn is_constant_one(&self) -> bool {
        self.expr.is_one()
    }

    /// Catalog point closest to s, if any family is listed.
    pub fn nearest_pole(&self, s: Complex64) -> Option<Complex64> {
        self.catalog.as_ref()?.nearest(s)
    }

    /// Upper bound on the truncation error at s (0 for exact expressions).
    pub fn remainder_bound(&self, s: Complex64) -> f64 {
        self.remainders.iter().fold(0.0, |acc, r| acc + r.bound(s))
    }

    /// Value at s with the truncation error bound.
    pub fn eval_with_remainder(&self, s: Complex64) -> Result<(Complex64, f64)> {
        if let Some(p) = self.nearest_pole(s) {
            if (p - s).norm() < guard_radius(s) {
                return Err(Error::PoleProximity { s, pole: p });
            }
        }
        let v = self.expr.eval(s);
        if !(v.re.is_finite() && v.im.is_finite()) {
            return Err(Error::PoleProximity { s, pole: s });
        }
        let r = self.remainder_bound(s);
        if !(r <= TRUNCATION_TOLERANCE * (1.0 + v.norm())) {
            return Err(Error::TruncationUnstable {
                s,
                reason: format!("truncation error bound {r:e} for |value| {:e}", v.norm()),
            });
        }
        Ok((v, r))
    }

    pub fn eval(&self, s: Complex64) -> Result<Complex64> {
        Ok(self.eval_with_remainder(s)?.0)
    }

    /// Catalog candidates in the window, removable ones included.
    pub fn candidates(&self, re: (f64, f64), im: (f64, f64)) -> Result<Vec<Candidate>> {
        match &self.catalog {
            Some(c) => c.candidates(re, im),
            None => Ok(Vec::new()),
        }
    }

    /// JSON document: name, meta and expression tree.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "schema_version": crate::SCHEMA_VERSION,
            "name": self.name,
            "meta": self.meta,
            "lead_length": self.lead_length,
            "truncated": !self.remainders.is_empty(),
            "expr": self.expr,
        })
    }
}

/// Anything that can be evaluated on the complex plane; closures qualify.
pub trait Evaluable {
    fn eval_at(&self, s: Complex64) -> Result<Complex64>;

    /// Known singular points within `radius` of `center` (removable ones
    /// excluded). Used to reject contours that enclose or touch them.
    fn poles_near(&self, _center: Complex64, _radius: f64) -> Vec<Complex64> {
        Vec::new()
    }
}

impl<F: Fn(Complex64) -> Complex64> Evaluable for F {
    fn eval_at(&self, s: Complex64) -> Result<Complex64> {
        Ok(self(s))
    }
}

impl Evaluable for ClosedZeta {
    fn eval_at(&self, s: Complex64) -> Result<Complex64> {
        self.eval(s)
    }

    fn poles_near(&self, c: Complex64, r: f64) -> Vec<Complex64> {
        self.candidates((c.re - r, c.re + r), (c.im - r, c.im + r))
            .unwrap_or_default()
            .into_iter()
            .filter(|p| p.status != PoleStatus::Removable && (p.location - c).norm() <= r)
            .map(|p| p.location)
            .collect()
    }
}
