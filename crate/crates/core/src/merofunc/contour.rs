//! Trapezoid-rule contour integrals on circles: Laurent coefficients,
//! residues, winding numbers and pole search for functions without catalog.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use super::{guard_radius, ClosedZeta, Evaluable, Order, PoleRecord, PoleStatus, Provenance};
use crate::error::{Error, Result};
use crate::numeric::ZERO;

pub const MIN_NODES: usize = 64;
pub const MAX_NODES: usize = 1 << 14;
/// Successive node doublings must agree to this relative accuracy.
pub const CONTOUR_RTOL: f64 = 1e-10;
pub const DEFAULT_RADIUS: f64 = 0.1;
pub const DEFAULT_PROBE_DEPTH: u32 = 5;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ContourEstimate {
    pub value: Complex64,
    /// difference between the last two node doublings
    pub error: f64,
    pub nodes: usize,
    /// max |Z| on the circle
    pub max_abs: f64,
}

impl ContourEstimate {
    /// Indistinguishable from zero: below the roundoff floor of the
    /// integrand or the quadrature error.
    pub fn is_zero(&self, n: i32, radius: f64) -> bool {
        let floor = 1e-9 * self.max_abs * radius.powi(n);
        self.value.norm() <= floor.max(10.0 * self.error)
    }
}

fn check_contour<E: Evaluable + ?Sized>(z: &E, center: Complex64, radius: f64) -> Result<()> {
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::InvalidParameters(format!(
            "contour radius must be > 0, got {radius}"
        )));
    }
    for p in z.poles_near(center, radius * (1.0 + 1e-3)) {
        if (p - center).norm() > guard_radius(center) {
            return Err(Error::ContourCrossesPole {
                center,
                radius,
                pole: p,
            });
        }
    }
    Ok(())
}

fn sample<E: Evaluable + ?Sized>(
    z: &E,
    center: Complex64,
    radius: f64,
    theta: f64,
) -> Result<Complex64> {
    let s = center + Complex64::from_polar(radius, theta);
    match z.eval_at(s) {
        Ok(v) if v.re.is_finite() && v.im.is_finite() => Ok(v),
        Ok(_) => Err(Error::ContourCrossesPole {
            center,
            radius,
            pole: s,
        }),
        Err(Error::PoleProximity { pole, .. }) => Err(Error::ContourCrossesPole {
            center,
            radius,
            pole,
        }),
        Err(e) => Err(e),
    }
}

/// c_{-n} = (1/2 pi i) oint Z(s) (s - center)^{n-1} ds for every n in `ns`,
/// sharing the function values. Nodes double from `n_start` until every
/// coefficient is stable to CONTOUR_RTOL (or sits at the roundoff floor).
pub fn contour_coefficients<E: Evaluable + ?Sized>(
    z: &E,
    center: Complex64,
    radius: f64,
    ns: &[i32],
    n_start: usize,
) -> Result<Vec<ContourEstimate>> {
    check_contour(z, center, radius)?;
    let mut n = n_start.max(8);
    let mut sums = vec![ZERO; ns.len()];
    let mut max_abs: f64 = 0.0;
    let add_nodes = |thetas: &mut dyn Iterator<Item = f64>,
                     sums: &mut [Complex64],
                     max_abs: &mut f64|
     -> Result<()> {
        for th in thetas {
            let v = sample(z, center, radius, th)?;
            *max_abs = max_abs.max(v.norm());
            for (acc, &k) in sums.iter_mut().zip(ns) {
                *acc += v * Complex64::from_polar(1.0, k as f64 * th);
            }
        }
        Ok(())
    };
    add_nodes(
        &mut (0..n).map(|j| 2.0 * PI * j as f64 / n as f64),
        &mut sums,
        &mut max_abs,
    )?;
    let est = |sums: &[Complex64], n: usize| -> Vec<Complex64> {
        sums.iter()
            .zip(ns)
            .map(|(s, &k)| s * radius.powi(k) / n as f64)
            .collect()
    };
    let mut prev = est(&sums, n);
    loop {
        let m = n;
        add_nodes(
            &mut (0..m).map(|j| PI * (2 * j + 1) as f64 / m as f64),
            &mut sums,
            &mut max_abs,
        )?;
        n *= 2;
        let cur = est(&sums, n);
        let mut worst: f64 = 0.0;
        let mut ok = true;
        for ((c, p), &k) in cur.iter().zip(&prev).zip(ns) {
            let diff = (c - p).norm();
            let floor = 1e-14 * max_abs * radius.powi(k);
            if diff > CONTOUR_RTOL * c.norm() && diff > floor {
                ok = false;
            }
            worst = worst.max(diff);
        }
        if ok {
            return Ok(cur
                .iter()
                .zip(&prev)
                .map(|(c, p)| ContourEstimate {
                    value: *c,
                    error: (c - p).norm(),
                    nodes: n,
                    max_abs,
                })
                .collect());
        }
        if n >= MAX_NODES {
            return Err(Error::NotConverged(worst));
        }
        prev = cur;
    }
}

/// n-th principal Laurent coefficient c_{-n} at `center`.
pub fn laurent_coeff<E: Evaluable + ?Sized>(
    z: &E,
    center: Complex64,
    n: i32,
    radius: f64,
) -> Result<ContourEstimate> {
    if n < 1 {
        return Err(Error::InvalidOrder(n as i64));
    }
    Ok(contour_coefficients(z, center, radius, &[n], MIN_NODES)?[0])
}

/// Residue by the trapezoid rule with `n_nodes` initial nodes.
pub fn residue_numeric<E: Evaluable + ?Sized>(
    z: &E,
    center: Complex64,
    radius: f64,
    n_nodes: usize,
) -> Result<ContourEstimate> {
    if n_nodes < MIN_NODES {
        return Err(Error::InvalidParameters(format!(
            "need at least {MIN_NODES} nodes, got {n_nodes}"
        )));
    }
    Ok(contour_coefficients(z, center, radius, &[1], n_nodes)?[0])
}

/// Winding number of Z along the circle (zeros minus poles inside).
pub fn winding_number<E: Evaluable + ?Sized>(z: &E, center: Complex64, radius: f64) -> Result<i64> {
    check_contour(z, center, radius)?;
    let mut n = 256;
    loop {
        let mut vals = Vec::with_capacity(n);
        for j in 0..n {
            vals.push(sample(z, center, radius, 2.0 * PI * j as f64 / n as f64)?);
        }
        let max = vals.iter().map(|v| v.norm()).fold(0.0, f64::max);
        if let Some(j) = vals.iter().position(|v| v.norm() <= 1e-13 * max) {
            return Err(Error::ZeroOnContour(
                center + Complex64::from_polar(radius, 2.0 * PI * j as f64 / n as f64),
            ));
        }
        let mut total = 0.0;
        let mut biggest: f64 = 0.0;
        for j in 0..n {
            let d = (vals[(j + 1) % n] / vals[j]).arg();
            biggest = biggest.max(d.abs());
            total += d;
        }
        let w = total / (2.0 * PI);
        if biggest < PI / 3.0 && (w - w.round()).abs() < 1e-6 {
            return Ok(w.round() as i64);
        }
        n *= 2;
        if n > MAX_NODES {
            return Err(Error::Ambiguous(format!(
                "argument increments up to {biggest:.3} rad at {MAX_NODES} nodes, winding {w:.4}"
            )));
        }
    }
}

/// Result of `order_numeric`: -(winding number) when the Laurent probes
/// agree with a pole of that order (0 means regular, negative a zero), or
/// evidence of an essential singularity.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum NumericOrder {
    Order(i64),
    EssentialSuspect,
}

pub fn order_numeric<E: Evaluable + ?Sized>(
    z: &E,
    center: Complex64,
    radius: f64,
) -> Result<NumericOrder> {
    order_numeric_depth(z, center, radius, DEFAULT_PROBE_DEPTH)
}

/// Winding number cross-checked against the Laurent probes c_{-1..-depth}.
/// Nonzero probes all the way to the depth with no consistent finite order
/// report `EssentialSuspect`; this is evidence, not proof. When zeros near
/// the point spoil the winding number the radius is halved (up to 8 times).
pub fn order_numeric_depth<E: Evaluable + ?Sized>(
    z: &E,
    center: Complex64,
    radius: f64,
    depth: u32,
) -> Result<NumericOrder> {
    let mut r = radius;
    for attempt in 0..8 {
        match order_at_radius(z, center, r, depth) {
            Err(Error::Ambiguous(_) | Error::ZeroOnContour(_)) if attempt < 7 => r *= 0.5,
            other => return other,
        }
    }
    unreachable!()
}

fn order_at_radius<E: Evaluable + ?Sized>(
    z: &E,
    center: Complex64,
    radius: f64,
    depth: u32,
) -> Result<NumericOrder> {
    let wind = winding_number(z, center, radius);
    let p = match &wind {
        Ok(w) => -w,
        Err(_) => 0,
    };
    let top = (depth as i64).max(p + 1) as i32;
    let ns: Vec<i32> = (1..=top).collect();
    let probes = contour_coefficients(z, center, radius, &ns, MIN_NODES)?;
    let zero = |n: i64| probes[(n - 1) as usize].is_zero(n as i32, radius);
    let all_nonzero = (1..=depth as i64).all(|n| !zero(n));
    match wind {
        Ok(_) if p >= 1 && !zero(p) && (p + 1..=top as i64).all(zero) => Ok(NumericOrder::Order(p)),
        Ok(_) if p <= 0 && (1..=top as i64).all(zero) => Ok(NumericOrder::Order(p)),
        _ if all_nonzero => Ok(NumericOrder::EssentialSuspect),
        Ok(_) => Err(Error::Ambiguous(format!(
            "winding gives order {p} but Laurent probes disagree: {:?}",
            probes.iter().map(|c| c.value.norm()).collect::<Vec<_>>()
        ))),
        Err(e) => Err(e),
    }
}

fn sort_records(v: &mut [PoleRecord]) {
    v.sort_by(|a, b| {
        a.location
            .im
            .total_cmp(&b.location.im)
            .then(a.location.re.total_cmp(&b.location.re))
    });
}

/// Poles in the closed window, sorted by imaginary part. Catalog entries are
/// used when present (removable candidates omitted, essential residues
/// computed by contour); otherwise a grid-seeded Newton search on 1/Z with
/// contour confirmation.
pub fn poles_in_window(z: &ClosedZeta, re: (f64, f64), im: (f64, f64)) -> Result<Vec<PoleRecord>> {
    if !(re.0 <= re.1 && im.0 <= im.1) {
        return Err(Error::InvalidParameters("empty window".into()));
    }
    let Some(cat) = &z.catalog else {
        return search_poles(z, re, im);
    };
    let cands = cat.candidates(re, im)?;
    let mut out = Vec::new();
    for (i, c) in cands.iter().enumerate() {
        if c.status == PoleStatus::Removable {
            continue;
        }
        let (residue, provenance) = match c.residue {
            Some(r) => (r, Provenance::Analytic),
            None => {
                let sep = cands
                    .iter()
                    .enumerate()
                    .filter(|(j, _)| *j != i)
                    .map(|(_, d)| (d.location - c.location).norm())
                    .fold(f64::INFINITY, f64::min);
                let r = DEFAULT_RADIUS.min(0.4 * sep);
                let n = match c.order {
                    Order::Finite(n) => n as i32,
                    Order::Essential => 1,
                };
                (
                    laurent_coeff(z, c.location, n, r)?.value,
                    Provenance::NumericContour,
                )
            }
        };
        out.push(PoleRecord {
            location: c.location,
            order: c.order,
            residue,
            provenance,
            status: c.status,
        });
    }
    sort_records(&mut out);
    Ok(out)
}

/// Grid-seeded Newton iteration on 1/Z, each hit confirmed by
/// `order_numeric`; residues (leading coefficients) by contour.
pub fn search_poles<E: Evaluable + ?Sized>(
    z: &E,
    re: (f64, f64),
    im: (f64, f64),
) -> Result<Vec<PoleRecord>> {
    let g = |s: Complex64| -> Option<Complex64> {
        match z.eval_at(s) {
            Ok(v) if v.re.is_finite() && v.im.is_finite() => Some(1.0 / v),
            Ok(_) | Err(Error::PoleProximity { .. }) => Some(ZERO),
            Err(_) => None,
        }
    };
    let nre = 6usize;
    let nim = (((im.1 - im.0) / 0.5).ceil() as usize).max(1);
    let (mut evaluated, mut hits) = (0usize, Vec::<Complex64>::new());
    let mut seeds = Vec::new();
    for i in 0..nre {
        let x = re.0 + (re.1 - re.0) * (i as f64 + 0.5) / nre as f64;
        for j in 0..=nim {
            seeds.push(Complex64::new(
                x,
                im.0 + (im.1 - im.0) * j as f64 / nim as f64,
            ));
        }
    }
    // Newton on 1/Z only converges within the distance to the nearest zero of Z,
    // which is tiny next to a weak pole. Moment ratios over covering discs give
    // seeds that are exact for an isolated simple pole.
    let cell = 0.5f64;
    let (ncx, ncy) = ((((re.1 - re.0) / cell).ceil() as usize).max(1), nim);
    for i in 0..ncx {
        for j in 0..ncy {
            let a = Complex64::new(
                re.0 + (re.1 - re.0) * (i as f64 + 0.5) / ncx as f64,
                im.0 + (im.1 - im.0) * (j as f64 + 0.5) / ncy as f64,
            );
            let hx = 0.5 * (re.1 - re.0) / ncx as f64;
            let hy = 0.5 * (im.1 - im.0) / ncy as f64;
            let r = 1.05 * hx.hypot(hy);
            let Ok(c) = contour_coefficients(z, a, r, &[1, 2], MIN_NODES) else {
                continue;
            };
            if !c[0].is_zero(1, r) {
                seeds.push(a + c[1].value / c[0].value);
            } else if !c[1].is_zero(2, r) {
                seeds.push(a);
            }
        }
    }
    for seed in seeds {
        let mut s = seed;
        let Some(mut gs) = g(s) else { continue };
        evaluated += 1;
        let mut converged = false;
        for _ in 0..200 {
            if gs == ZERO {
                converged = true;
                break;
            }
            let h = 1e-6 * (1.0 + s.norm());
            let (Some(a), Some(b)) = (g(s + h), g(s - h)) else {
                break;
            };
            let step = gs / ((a - b) / (2.0 * h));
            if !(step.re.is_finite() && step.im.is_finite()) {
                break;
            }
            s -= step;
            if (s.re - 0.5 * (re.0 + re.1)).abs() > 2.0 * (re.1 - re.0) + 1.0
                || s.im < im.0 - 5.0
                || s.im > im.1 + 5.0
            {
                break;
            }
            match g(s) {
                Some(v) => gs = v,
                None => break,
            }
            if step.norm() < 1e-12 * (1.0 + s.norm()) {
                converged = true;
                break;
            }
        }
        let inside = s.re >= re.0 && s.re <= re.1 && s.im >= im.0 && s.im <= im.1;
        if converged
            && inside
            && !hits
                .iter()
                .any(|w| (w - s).norm() < 1e-6 * (1.0 + s.norm()))
        {
            hits.push(s);
        }
    }
    if evaluated == 0 {
        return Err(Error::CatalogMissingAndSearchFailed(format!(
            "function could not be evaluated on any seed in [{}, {}] x [{}, {}]",
            re.0, re.1, im.0, im.1
        )));
    }
    let mut out = Vec::new();
    for (i, &w) in hits.iter().enumerate() {
        let sep = hits
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != i)
            .map(|(_, v)| (v - w).norm())
            .fold(f64::INFINITY, f64::min);
        let r = DEFAULT_RADIUS.min(0.4 * sep);
        let order = match order_numeric(z, w, r) {
            Ok(NumericOrder::Order(p)) if p >= 1 => Order::Finite(p as u32),
            Ok(NumericOrder::EssentialSuspect) => Order::Essential,
            _ => continue,
        };
        let n = match order {
            Order::Finite(p) => p as i32,
            Order::Essential => 1,
        };
        let residue = laurent_coeff(z, w, n, r)?.value;
        out.push(PoleRecord {
            location: w,
            order,
            residue,
            provenance: Provenance::NumericContour,
            status: PoleStatus::Confirmed,
        });
    }
    sort_records(&mut out);
    Ok(out)
}
