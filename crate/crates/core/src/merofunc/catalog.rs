//! Closed-form zeta functions with analytic pole catalogs.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;

use super::expr::moran_denominator;
use super::roots::{moran_h, moran_real_root};
use super::{
    Catalog, ClosedZeta, Expr, Meta, Order, PoleFamily, PoleStatus, Remainder, ResidueRule, Status,
};
use crate::error::{Error, Result};
use crate::strings::{check_ratios, group_ratios};

fn ln3() -> f64 {
    3f64.ln()
}

fn constant_rule(c: f64) -> Option<ResidueRule> {
    Some(Arc::new(move |_| Complex64::new(c, 0.0)))
}

fn inv_s() -> Expr {
    Expr::powi(Expr::S, -1)
}

fn inv_s_minus(a: f64) -> Expr {
    Expr::powi(Expr::add(vec![Expr::S, Expr::c(-a)]), -1)
}

fn confirmed() -> Status {
    Status::Fixed(PoleStatus::Confirmed)
}

/// Status of a simple candidate from its residue: removable when it vanishes
/// relative to the size of the terms that produced it.
fn status_from_residue(res: f64, scale: f64) -> Status {
    if res.abs() <= 1e-12 * scale.max(1.0) {
        Status::Fixed(PoleStatus::Removable)
    } else {
        confirmed()
    }
}

/// 3^{-s}/(1 - 2 3^{-s}), evaluated as 1/(3^s - 2): simple poles on
/// log_3 2 + (2 pi/log 3) i Z, each with residue 1/(2 log 3).
pub fn catalog_cantor_geometric() -> ClosedZeta {
    let t = ln3();
    let d = 2f64.ln() / t;
    let expr = Expr::div(Expr::c(1.0), Expr::add(vec![Expr::pow(3.0), Expr::c(-2.0)]));
    ClosedZeta {
        name: "cantor-geometric".into(),
        expr,
        meta: Meta::new(d, d, f64::NEG_INFINITY),
        catalog: Some(Catalog {
            families: vec![PoleFamily::Lattice {
                re: d,
                period: 2.0 * PI / t,
                order: Order::Finite(1),
                residue: constant_rule(1.0 / (2.0 * t)),
                status: confirmed(),
            }],
        }),
        lead_length: Some(1.0 / 3.0),
        remainders: Vec::new(),
    }
}

/// zeta0(s)/(1 - sum r_j^s). Poles of zeta0 keep their order (residue divided
/// by the denominator) unless they sit on the Moran lattice, where orders add.
/// New Moran poles are confirmed only for zeta0 = 1; otherwise they are
/// unverified, or removable where zeta0 vanishes.
pub fn catalog_extended_self_similar(zeta0: &ClosedZeta, ratios: &[f64]) -> Result<ClosedZeta> {
    check_ratios(ratios)?;
    let g = group_ratios(ratios);
    let h = moran_denominator(&g);
    let d = moran_real_root(&g);
    let lattice = (g.len() == 1).then(|| 2.0 * PI / (1.0 / g[0].0).ln());
    let hp: Arc<dyn Fn(Complex64) -> Complex64 + Send + Sync> = {
        let g = g.clone();
        Arc::new(move |w| moran_h(&g, w).1)
    };
    let hv: Arc<dyn Fn(Complex64) -> Complex64 + Send + Sync> = {
        let h = h.clone();
        Arc::new(move |w| h.eval(w))
    };
    let z0 = zeta0.expr.clone();
    let mut families = Vec::new();
    let mut merged = false;
    for f in zeta0.catalog.iter().flat_map(|c| c.families.iter()) {
        let same = match (f, lattice) {
            (PoleFamily::Lattice { re, period, .. }, Some(p)) => {
                (re - d).abs() < 1e-12 && (period - p).abs() < 1e-12 * p
            }
            (
                PoleFamily::Moran {
                    ratios: r, shift, ..
                },
                None,
            ) => *shift == 0.0 && *r == g,
            _ => false,
        };
        if !same {
            let hv = hv.clone();
            families.push(f.map_residue(move |w, r| r / hv(w)));
            continue;
        }
        merged = true;
        let bump = |o: &Order| match o {
            Order::Finite(n) => Order::Finite(n + 1),
            Order::Essential => Order::Essential,
        };
        // leading coefficient: c_{-n}(zeta0) / h'(omega)
        let lead = |r: &Option<ResidueRule>| {
            r.as_ref().map(|f| {
                let (f, hp) = (f.clone(), hp.clone());
                Arc::new(move |w: Complex64| f(w) / hp(w)) as ResidueRule
            })
        };
        families.push(match f {
            PoleFamily::Lattice {
                re,
                period,
                order,
                residue,
                status,
            } => PoleFamily::Lattice {
                re: *re,
                period: *period,
                order: bump(order),
                residue: lead(residue),
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
                order: bump(order),
                residue: lead(residue),
                status: status.clone(),
            },
            PoleFamily::Point { .. } => unreachable!(),
        });
    }
    if !merged {
        let residue: ResidueRule = {
            let (z0, hp) = (z0.clone(), hp.clone());
            Arc::new(move |w| z0.eval(w) / hp(w))
        };
        let status = if zeta0.is_constant_one() {
            confirmed()
        } else {
            let z0 = z0.clone();
            Status::Numerator(Arc::new(move |w| z0.eval(w)))
        };
        families.push(match lattice {
            Some(p) => PoleFamily::Lattice {
                re: d,
                period: p,
                order: Order::Finite(1),
                residue: Some(residue),
                status,
            },
            None => PoleFamily::Moran {
                ratios: g.clone(),
                shift: 0.0,
                order: Order::Finite(1),
                residue: Some(residue),
                status,
            },
        });
    }
    let meta = Meta {
        d_abs: zeta0.meta.d_abs.map(|x| x.max(d)),
        d_hol: zeta0.meta.d_hol.map(|x| x.max(d)),
        d_mer: zeta0.meta.d_mer,
    };
    let remainders = zeta0
        .remainders
        .iter()
        .map(|r| Remainder {
            weight: Expr::div(r.weight.clone(), h.clone()),
            ..r.clone()
        })
        .collect();
    Ok(ClosedZeta {
        name: format!("extended({}, {ratios:?})", zeta0.name),
        expr: Expr::div(z0, h),
        meta,
        catalog: Some(Catalog { families }),
        lead_length: zeta0.lead_length,
        remainders,
    })
}

/// 3^{(n-1)s}/(3^s - 2)^n, poles of order n on the Cantor lattice with
/// leading coefficient 1/(2 log^n 3).
pub fn catalog_nth_order_cantor(n: i64) -> Result<ClosedZeta> {
    if n < 1 {
        return Err(Error::InvalidOrder(n));
    }
    let t = ln3();
    let d = 2f64.ln() / t;
    let expr = Expr::div(
        Expr::pow(3f64.powi(n as i32 - 1)),
        Expr::powi(Expr::add(vec![Expr::pow(3.0), Expr::c(-2.0)]), n as i32),
    );
    Ok(ClosedZeta {
        name: format!("nth-order-cantor({n})"),
        expr,
        meta: Meta::new(d, d, f64::NEG_INFINITY),
        catalog: Some(Catalog {
            families: vec![PoleFamily::Lattice {
                re: d,
                period: 2.0 * PI / t,
                order: Order::Finite(n as u32),
                residue: constant_rule(0.5 / t.powi(n as i32)),
                status: confirmed(),
            }],
        }),
        lead_length: Some(1.0 / 3.0),
        remainders: Vec::new(),
    })
}

/// zeta0(s) sum_{n=1}^{n_max} (n!)^{-s} (rho^{-s} (1 - sum r_j^s))^{-n} with
/// rho the largest ratio; for zeta0 = 3^{-s} and ratios {1/3, 1/3} this is
/// 3^{-s} sum 1/((n!)^s (3^s - 2)^n). Lattice points are listed as essential
/// singularities; evaluation reports the truncation bound and refuses points
/// where it is not small.
pub fn catalog_infinite_order(
    zeta0: &ClosedZeta,
    ratios: &[f64],
    n_max: usize,
) -> Result<ClosedZeta> {
    check_ratios(ratios)?;
    if n_max < 1 {
        return Err(Error::InvalidOrder(n_max as i64));
    }
    let g = group_ratios(ratios);
    let rho = g[0].0;
    let d = moran_real_root(&g);
    let h = moran_denominator(&g);
    let base = Expr::mul(vec![Expr::Pow { ln_base: -rho.ln(), base: None }, h.clone()]);
    let mut ln_fact = 0.0;
    let mut terms = Vec::with_capacity(n_max);
    for n in 1..=n_max {
        ln_fact += (n as f64).ln();
        terms.push(Expr::mul(vec![
            Expr::Pow { ln_base: -ln_fact, base: None },
            Expr::powi(base.clone(), -(n as i32)),
        ]));
    }
    let series = Expr::add(terms);
    let mut families: Vec<PoleFamily> = Vec::new();
    for f in zeta0.catalog.iter().flat_map(|c| c.families.iter()) {
        let series = series.clone();
        families.push(f.map_residue(move |w, r| r * series.eval(w)));
    }
    families.push(if g.len() == 1 {
        PoleFamily::Lattice {
            re: d,
            period: 2.0 * PI / (1.0 / rho).ln(),
            order: Order::Essential,
            residue: None,
            status: confirmed(),
        }
    } else {
        PoleFamily::Moran {
            ratios: g.clone(),
            shift: 0.0,
            order: Order::Essential,
            residue: None,
            status: confirmed(),
        }
    });
    let meta = Meta {
        d_abs: zeta0.meta.d_abs.map(|x| x.max(d)),
        d_hol: zeta0.meta.d_hol.map(|x| x.max(d)),
        d_mer: Some(d),
    };
    Ok(ClosedZeta {
        name: format!("infinite-order({}, {ratios:?}, {n_max})", zeta0.name),
        expr: Expr::mul(vec![zeta0.expr.clone(), series]),
        meta,
        catalog: Some(Catalog { families }),
        lead_length: zeta0.lead_length.map(|l| l * rho),
        remainders: vec![Remainder {
            weight: Expr::c(1.0),
            shift: 0.0,
            zeta0: zeta0.expr.clone(),
            ln_scale: rho.ln(),
            h,
            n_max,
        }],
    })
}

/// Infinite-order series truncated just far enough that the truncation bound
/// stays below `tol` on the circle |s - center| = radius.
pub fn catalog_infinite_order_for_contour(
    zeta0: &ClosedZeta,
    ratios: &[f64],
    center: Complex64,
    radius: f64,
    tol: f64,
) -> Result<ClosedZeta> {
    let mut n = 8usize;
    loop {
        let z = catalog_infinite_order(zeta0, ratios, n)?;
        let worst = (0..256)
            .map(|j| {
                z.remainder_bound(
                    center + Complex64::from_polar(radius, 2.0 * PI * j as f64 / 256.0),
                )
            })
            .fold(0.0, f64::max);
        if worst <= tol {
            return Ok(z);
        }
        if n > 2000 {
            return Err(Error::TruncationUnstable {
                s: center,
                reason: format!(
                    "truncation bound {worst:e} on the contour of radius {radius} with {n} terms"
                ),
            });
        }
        n = (n as f64 * 1.25).ceil() as usize;
    }
}

/// The Cantor L_infinity series 3^{-s} sum 1/((n!)^s (3^s - 2)^n).
pub fn catalog_cantor_infinite_order(n_max: usize) -> Result<ClosedZeta> {
    catalog_infinite_order(
        &ClosedZeta::trivial(1.0 / 3.0),
        &[1.0 / 3.0, 1.0 / 3.0],
        n_max,
    )
}

/// Distance zeta of the set A_L realizing a fractal string:
/// s^{-1} 2^{1-s} zeta_L(s) + 2 delta^s/s. Poles of zeta_L keep their order;
/// s = 0 is a candidate with residue 2 zeta_L(0) + 2 (removable when that
/// vanishes, as for every string with zeta_L(0) = -1).
pub fn catalog_distance_string(zeta_l: &ClosedZeta, delta: f64) -> Result<ClosedZeta> {
    let l1 = zeta_l.lead_length.ok_or_else(|| {
        Error::InvalidParameters(format!("first length of {} unknown", zeta_l.name))
    })?;
    if !(delta >= l1 / 2.0) {
        return Err(Error::DeltaTooSmall {
            delta,
            min: l1 / 2.0,
        });
    }
    let u = Expr::mul(vec![Expr::c(2.0), Expr::pow(0.5), inv_s()]);
    let v = Expr::mul(vec![Expr::c(2.0), Expr::pow(delta), inv_s()]);
    let mut families: Vec<PoleFamily> = Vec::new();
    for f in zeta_l.catalog.iter().flat_map(|c| c.families.iter()) {
        let u = u.clone();
        families.push(f.map_residue(move |w, r| u.eval(w) * r));
    }
    let z0 = zeta_l.expr.eval(Complex64::new(0.0, 0.0));
    if z0.re.is_finite() && z0.im.is_finite() {
        let res = 2.0 * z0 + 2.0;
        families.push(PoleFamily::Point {
            at: Complex64::new(0.0, 0.0),
            order: Order::Finite(1),
            residue: Some(res),
            status: status_from_residue(res.norm(), 2.0 * z0.norm() + 2.0),
        });
    }
    let meta = Meta {
        d_abs: zeta_l.meta.d_abs.map(|x| x.max(0.0)),
        d_hol: zeta_l.meta.d_hol.map(|x| x.max(0.0)),
        d_mer: zeta_l.meta.d_mer,
    };
    let remainders = zeta_l
        .remainders
        .iter()
        .map(|r| Remainder {
            weight: Expr::mul(vec![u.clone(), r.weight.clone()]),
            ..r.clone()
        })
        .collect();
    Ok(ClosedZeta {
        name: format!("distance({}, delta={delta})", zeta_l.name),
        expr: Expr::add(vec![Expr::mul(vec![u, zeta_l.expr.clone()]), v]),
        meta,
        catalog: Some(Catalog { families }),
        lead_length: None,
        remainders,
    })
}

/// Distance zeta of the generalized Cantor set C^(m,a):
/// g^{s-1} (1-ma)/(s (1 - m a^s)) + 2 delta^s/s with g = (1-ma)/(2(m-1)).
pub fn catalog_generalized_cantor_distance(m: u32, a: f64, delta: f64) -> Result<ClosedZeta> {
    let mf = m as f64;
    if m < 2 || !(a > 0.0 && mf * a < 1.0) {
        return Err(Error::InvalidParameters(format!(
            "need m >= 2 and 0 < a < 1/m, got m = {m}, a = {a}"
        )));
    }
    let gap = (1.0 - mf * a) / (2.0 * (mf - 1.0));
    if !(delta >= gap) {
        return Err(Error::DeltaTooSmall { delta, min: gap });
    }
    let t = (1.0 / a).ln();
    let d = mf.ln() / t;
    let k = 1.0 - mf * a;
    let expr = Expr::add(vec![
        Expr::mul(vec![
            Expr::c(k / gap),
            Expr::pow(gap),
            inv_s(),
            Expr::powi(
                Expr::add(vec![
                    Expr::c(1.0),
                    Expr::mul(vec![Expr::c(-mf), Expr::pow(a)]),
                ]),
                -1,
            ),
        ]),
        Expr::mul(vec![Expr::c(2.0), Expr::pow(delta), inv_s()]),
    ]);
    let rule: ResidueRule = Arc::new(move |w: Complex64| (w - 1.0).expf(gap) * k / (w * t));
    let r0 = k / (gap * (1.0 - mf)) + 2.0;
    Ok(ClosedZeta {
        name: format!("generalized-cantor-distance(m={m}, a={a}, delta={delta})"),
        expr,
        meta: Meta::new(d, d, f64::NEG_INFINITY),
        catalog: Some(Catalog {
            families: vec![
                PoleFamily::Lattice {
                    re: d,
                    period: 2.0 * PI / t,
                    order: Order::Finite(1),
                    residue: Some(rule),
                    status: confirmed(),
                },
                PoleFamily::Point {
                    at: Complex64::new(0.0, 0.0),
                    order: Order::Finite(1),
                    residue: Some(Complex64::new(r0, 0.0)),
                    status: status_from_residue(r0, 4.0),
                },
            ],
        }),
        lead_length: None,
        remainders: Vec::new(),
    })
}

/// Distance zeta of the Sierpinski carpet:
/// 8/(2^s s (s-1)(3^s-8)) + 2 pi delta^s/s + 4 delta^{s-1}/(s-1).
pub fn catalog_sierpinski_carpet(delta: f64) -> Result<ClosedZeta> {
    if !(delta > 1.0 / 6.0) {
        return Err(Error::DeltaTooSmall {
            delta,
            min: 1.0 / 6.0,
        });
    }
    let t = ln3();
    let d = 8f64.ln() / t;
    let expr = Expr::add(vec![
        Expr::mul(vec![
            Expr::c(8.0),
            Expr::pow(0.5),
            inv_s(),
            inv_s_minus(1.0),
            Expr::powi(Expr::add(vec![Expr::pow(3.0), Expr::c(-8.0)]), -1),
        ]),
        Expr::mul(vec![Expr::c(2.0 * PI), Expr::pow(delta), inv_s()]),
        Expr::mul(vec![
            Expr::c(4.0 / delta),
            Expr::pow(delta),
            inv_s_minus(1.0),
        ]),
    ]);
    let rule: ResidueRule = Arc::new(move |w: Complex64| (-w).expf(2.0) / (t * w * (w - 1.0)));
    let point = |x: f64, r: f64| PoleFamily::Point {
        at: Complex64::new(x, 0.0),
        order: Order::Finite(1),
        residue: Some(Complex64::new(r, 0.0)),
        status: confirmed(),
    };
    Ok(ClosedZeta {
        name: format!("sierpinski-carpet(delta={delta})"),
        expr,
        meta: Meta::new(d, d, f64::NEG_INFINITY),
        catalog: Some(Catalog {
            families: vec![
                PoleFamily::Lattice {
                    re: d,
                    period: 2.0 * PI / t,
                    order: Order::Finite(1),
                    residue: Some(rule),
                    status: confirmed(),
                },
                point(0.0, 8.0 / 7.0 + 2.0 * PI),
                point(1.0, 8.0 / (2.0 * -5.0) + 4.0),
            ],
        }),
        lead_length: None,
        remainders: Vec::new(),
    })
}

fn binomial(m: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (m - i) as f64 / (i + 1) as f64)
}

/// Distance zeta of the grill A x [0,1]^m: sum_{k=0}^m C(m,k) zeta_A(s - m + k).
/// Every pole family appears shifted by m - k with residues times C(m,k).
pub fn catalog_grill(zeta_a: &ClosedZeta, m: u32) -> Result<ClosedZeta> {
    if m < 1 {
        return Err(Error::InvalidParameters("grill needs m >= 1".into()));
    }
    let mut terms = Vec::new();
    let mut families = Vec::new();
    let mut remainders = Vec::new();
    for k in 0..=m {
        let c = binomial(m, k);
        let d = (m - k) as f64;
        terms.push(Expr::mul(vec![Expr::c(c), zeta_a.expr.shift(d)]));
        for f in zeta_a.catalog.iter().flat_map(|c| c.families.iter()) {
            families.push(f.shifted(d, c));
        }
        for r in &zeta_a.remainders {
            remainders.push(Remainder {
                weight: Expr::mul(vec![Expr::c(c), r.weight.shift(d)]),
                shift: r.shift + d,
                ..r.clone()
            });
        }
    }
    Ok(ClosedZeta {
        name: format!("grill({}, m={m})", zeta_a.name),
        expr: Expr::add(terms),
        meta: zeta_a.meta.map(|x| x + m as f64),
        catalog: zeta_a.catalog.as_ref().map(|_| Catalog { families }),
        lead_length: None,
        remainders,
    })
}

/// Zeta function of the set scaled by lambda: lambda^s zeta(s), residues
/// times lambda^omega.
pub fn catalog_scaled(zeta: &ClosedZeta, lambda: f64) -> Result<ClosedZeta> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidParameters(format!(
            "scale factor must be > 0, got {lambda}"
        )));
    }
    let ll = lambda.ln();
    Ok(ClosedZeta {
        name: format!("scaled({}, {lambda})", zeta.name),
        expr: Expr::mul(vec![Expr::pow(lambda), zeta.expr.clone()]),
        meta: zeta.meta,
        catalog: zeta.catalog.as_ref().map(|c| Catalog {
            families: c
                .families
                .iter()
                .map(|f| f.map_residue(move |w, r| (w * ll).exp() * r))
                .collect(),
        }),
        lead_length: zeta.lead_length.map(|l| l * lambda),
        remainders: zeta
            .remainders
            .iter()
            .map(|r| Remainder {
                weight: Expr::mul(vec![Expr::pow(lambda), r.weight.clone()]),
                ..r.clone()
            })
            .collect(),
    })
}

/// Geometric zeta of the trivial string {l}: alias kept for catalog lookups.
pub fn catalog_trivial(l: f64) -> ClosedZeta {
    ClosedZeta::trivial(l)
}
