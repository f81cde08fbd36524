use std::fs;

use fzeta_core::geometry::BoundedSet;
use fzeta_core::merofunc::{
    catalog_cantor_geometric, catalog_cantor_infinite_order, catalog_distance_string, catalog_generalized_cantor_distance,
    catalog_grill, catalog_nth_order_cantor, catalog_sierpinski_carpet, ClosedZeta,
};
use fzeta_core::strings::StringSpec;
use serde_json::{json, Value};

use crate::{at, Failure, Opts};

pub const CATALOGS: &[&str] = &[
    "cantor-geometric",
    "nth-order-cantor",
    "cantor-infinite-order",
    "cantor-distance",
    "generalized-cantor-distance",
    "sierpinski-carpet",
    "cantor-grill",
];

pub enum Target {
    Catalog(ClosedZeta),
    String(StringSpec),
    Set(BoundedSet),
}

impl Target {
    pub fn describe(&self) -> Value {
        match self {
            Target::Catalog(z) => json!({"catalog": z.name, "meta": z.meta}),
            Target::String(s) => json!({"string": s}),
            Target::Set(a) => json!({"set": a}),
        }
    }
}

fn generalized(opts: &Opts) -> (u32, f64) {
    (opts.m.unwrap_or(2), opts.a.unwrap_or(0.25))
}

/// Default delta: 1/3 for the carpet (its closed form needs delta >= 1/6),
/// 1/2 otherwise.
pub fn delta_for(opts: &Opts, planar: bool) -> Result<f64, Failure> {
    let d = opts.delta.unwrap_or(if planar { 1.0 / 3.0 } else { 0.5 });
    if !(d > 0.0 && d.is_finite()) {
        return Err(Failure::config(format!("--delta must be > 0, got {d}")));
    }
    Ok(d)
}

pub fn catalog(name: &str, opts: &Opts) -> Result<ClosedZeta, Failure> {
    let op = at("merofunc::catalog");
    match name {
        "cantor-geometric" => Ok(catalog_cantor_geometric()),
        "nth-order-cantor" => catalog_nth_order_cantor(opts.n.unwrap_or(2)).map_err(op),
        "cantor-infinite-order" => {
            let n = opts.n.unwrap_or(30);
            if n < 1 {
                return Err(Failure::config(format!("--n must be >= 1, got {n}")));
            }
            catalog_cantor_infinite_order(n as usize).map_err(op)
        }
        "cantor-distance" => catalog_distance_string(&catalog_cantor_geometric(), delta_for(opts, false)?).map_err(op),
        "generalized-cantor-distance" => {
            let (m, a) = generalized(opts);
            catalog_generalized_cantor_distance(m, a, delta_for(opts, false)?).map_err(op)
        }
        "sierpinski-carpet" => catalog_sierpinski_carpet(delta_for(opts, true)?).map_err(op),
        "cantor-grill" => {
            let base = catalog_distance_string(&catalog_cantor_geometric(), delta_for(opts, false)?).map_err(&op)?;
            catalog_grill(&base, opts.m.unwrap_or(1)).map_err(op)
        }
        other => Err(Failure::config(format!("unknown catalog {other}; known: {}", CATALOGS.join(", ")))),
    }
}

fn named_set(name: &str, opts: &Opts) -> Result<BoundedSet, Failure> {
    match name {
        "cantor" => Ok(BoundedSet::CantorIterate { level: None }),
        "generalized-cantor" => {
            let (m, a) = generalized(opts);
            Ok(BoundedSet::GeneralizedCantorIterate { m, a, level: None })
        }
        "carpet" => Ok(BoundedSet::CarpetComplement { level: None }),
        "a-string" => Ok(BoundedSet::StringSet { spec: StringSpec::AString { a: opts.a.unwrap_or(1.0) }, depth: None }),
        other => Err(Failure::config(format!("unknown set {other}; known: cantor, generalized-cantor, carpet, a-string"))),
    }
}

/// A spec file holds either a bounded set or a string; their `kind` tags
/// do not overlap.
fn read_spec(path: &std::path::Path) -> Result<Target, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::config(format!("cannot read {}: {e}", path.display())))?;
    if let Ok(a) = serde_json::from_str::<BoundedSet>(&text) {
        a.validate().map_err(at("geometry::validate"))?;
        return Ok(Target::Set(a));
    }
    match serde_json::from_str::<StringSpec>(&text) {
        Ok(s) => {
            s.validate().map_err(at("strings::validate"))?;
            Ok(Target::String(s))
        }
        Err(e) => Err(Failure::config(format!("{} is neither a string spec nor a set spec: {e}", path.display()))),
    }
}

pub fn resolve(opts: &Opts) -> Result<Target, Failure> {
    match (&opts.catalog, &opts.spec, &opts.set) {
        (Some(name), None, None) => Ok(Target::Catalog(catalog(name, opts)?)),
        (None, Some(path), None) => read_spec(path),
        (None, None, Some(name)) => {
            let a = named_set(name, opts)?;
            a.validate().map_err(at("geometry::validate"))?;
            Ok(Target::Set(a))
        }
        (None, None, None) => Err(Failure::config("give a target: --catalog, --spec or --set")),
        _ => Err(Failure::config("give only one of --catalog, --spec, --set")),
    }
}

/// Oscillation period in log(1/t) of the self-similar sets.
pub fn known_period(a: &BoundedSet) -> Option<f64> {
    match a {
        BoundedSet::CantorIterate { level: None } | BoundedSet::CarpetComplement { level: None } => Some(3f64.ln()),
        BoundedSet::GeneralizedCantorIterate { a, level: None, .. } => Some((1.0 / a).ln()),
        _ => None,
    }
}

/// Closed-form distance zeta function of a set, when the catalog has one.
pub fn catalog_for_set(a: &BoundedSet, delta: f64) -> Option<Result<ClosedZeta, Failure>> {
    let op = at("merofunc::catalog");
    match a {
        BoundedSet::CantorIterate { level: None } => {
            Some(catalog_distance_string(&catalog_cantor_geometric(), delta).map_err(op))
        }
        BoundedSet::GeneralizedCantorIterate { m, a, level: None } => {
            Some(catalog_generalized_cantor_distance(*m, *a, delta).map_err(op))
        }
        BoundedSet::CarpetComplement { level: None } => Some(catalog_sierpinski_carpet(delta).map_err(op)),
        _ => None,
    }
}

/// Default window for pole listings: real parts from -1 to half a unit
/// right of the abscissa of convergence.
pub fn default_re_range(z: &ClosedZeta) -> (f64, f64) {
    let d = z.meta.d_abs.filter(|d| d.is_finite()).unwrap_or(2.0);
    (-1.0, d + 0.5)
}
