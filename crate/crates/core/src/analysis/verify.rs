use num_complex::Complex64;
use serde::Serialize;
use serde_json::{json, Value};

use super::fit::{Branch, MinkowskiFit};
use crate::error::{Error, Result};
use crate::geometry::{
    carpet_distance_zeta_exact, distance_zeta_1d, sample_tube, tube_volume, tube_zeta_numeric,
    BoundedSet,
};
use crate::merofunc::PoleRecord;
use crate::numeric::rpow;
use crate::SCHEMA_VERSION;

/// One checked quantity.
#[derive(Clone, Debug, Serialize)]
pub struct Defect {
    pub label: String,
    pub value: f64,
    pub tolerance: f64,
    pub pass: bool,
    #[serde(skip_serializing_if = "Value::is_null")]
    pub detail: Value,
}

/// Outcome of a verification, serialized as
/// `{check, inputs, defects, pass, schema_version}`.
#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub check: String,
    pub inputs: Value,
    pub defects: Vec<Defect>,
    pub pass: bool,
    pub schema_version: String,
}

impl Report {
    pub fn new(check: &str, inputs: Value, defects: Vec<Defect>) -> Report {
        let pass = !defects.is_empty() && defects.iter().all(|d| d.pass);
        Report {
            check: check.into(),
            inputs,
            defects,
            pass,
            schema_version: SCHEMA_VERSION.into(),
        }
    }

    pub fn max_defect(&self) -> f64 {
        self.defects.iter().map(|d| d.value).fold(0.0, f64::max)
    }
}

fn cjson(z: Complex64) -> Value {
    json!([z.re, z.im])
}

/// Sample density of the tube (the tube is also sampled at twice this
/// density for a Richardson step). Kink nodes keep planar tubes at O(h^2)
/// after the step; at this density the carpet defect stays near 1e-7.
const FE_PER_DECADE: usize = 128;

/// Smallest radius the tube is sampled down to.
const FE_T_FLOOR: f64 = 1e-280;

/// Checks delta^{s-N}|A_delta| + (N-s) tilde zeta_A(s) = zeta_A(s) at every s.
///
/// The distance zeta function comes from the gap sums (N = 1) or the square
/// decomposition (the carpet), the tube zeta function from sampled tubes:
/// linear interpolation in t, Richardson-extrapolated from two densities,
/// with samples down to where the power-law tail is below tol * 1e-3.
pub fn verify_functional_equation(
    a: &BoundedSet,
    s_list: &[Complex64],
    delta: f64,
    tol: f64,
) -> Result<Report> {
    if s_list.is_empty() || !(tol > 0.0) || !(delta > 0.0) {
        return Err(Error::InvalidParameters(
            "need s points, tol > 0 and delta > 0".into(),
        ));
    }
    let n = a.ambient_dim() as f64;
    let dim = a.dimension_hint()?;
    let nn = Complex64::new(n, 0.0);
    let mut sigma_min = f64::INFINITY;
    for &s in s_list {
        if s != nn {
            if s.re <= dim {
                return Err(Error::DivergentAt(s));
            }
            sigma_min = sigma_min.min(s.re);
        }
    }
    let volume = tube_volume(a, delta)?;
    let tubes = if sigma_min.is_finite() {
        let decades = ((-(tol * 1e-3).log10()) / (sigma_min - dim)).max(4.0);
        let t_min = (delta * 10f64.powf(-decades)).max(FE_T_FLOOR);
        Some((
            sample_tube(a, t_min, delta, FE_PER_DECADE)?,
            sample_tube(a, t_min, delta, 2 * FE_PER_DECADE)?,
        ))
    } else {
        None
    };
    let mut defects = Vec::with_capacity(s_list.len());
    for &s in s_list {
        let lhs = match a {
            BoundedSet::CarpetComplement { level } => carpet_distance_zeta_exact(*level, s, delta)?,
            _ => distance_zeta_1d(a, s, delta)?,
        };
        let head = rpow(delta, s - n) * volume;
        let (rhs, tail_err) = match (&tubes, s == nn) {
            (Some((coarse, fine)), false) => {
                let z1 = tube_zeta_numeric(coarse, s, delta)?;
                let z2 = tube_zeta_numeric(fine, s, delta)?;
                let z = z2.value + (z2.value - z1.value) / 3.0;
                (head + (nn - s) * z, (nn - s).norm() * z2.error)
            }
            _ => (head, 0.0),
        };
        let defect = (lhs - rhs).norm();
        defects.push(Defect {
            label: format!("s = {} {:+}i", s.re, s.im),
            value: defect,
            tolerance: tol,
            pass: defect < tol,
            detail: json!({"distance_zeta": cjson(lhs), "tube_side": cjson(rhs), "tail_error": tail_err}),
        });
    }
    let inputs = json!({
        "set": a,
        "delta": delta,
        "tol": tol,
        "s": s_list.iter().map(|&s| cjson(s)).collect::<Vec<_>>(),
        "t_min": tubes.as_ref().map(|t| t.0.t_min()),
    });
    Ok(Report::new("functional-equation", inputs, defects))
}

/// Checks (N-D) M_lower <= res(zeta_A, D) <= (N-D) M_upper, strictly for the
/// oscillating branch, and res(zeta_A, D) = (N-D) M for the measurable one;
/// `tol` is the relative slack of the non-strict comparisons.
pub fn verify_residue_content(
    fit: &MinkowskiFit,
    records: &[PoleRecord],
    ambient_dim: u32,
    tol: f64,
) -> Result<Report> {
    let d = fit.d;
    let principal = records
        .iter()
        .filter(|r| r.location.im.abs() < 1e-8 && (r.location.re - d).abs() < 0.02)
        .min_by(|a, b| {
            (a.location.re - d)
                .abs()
                .total_cmp(&(b.location.re - d).abs())
        })
        .ok_or(Error::MissingPrincipalPole(d))?;
    let res = principal.residue.re;
    let k = ambient_dim as f64 - d;
    let (lo, hi) = (k * fit.m_lower, k * fit.m_upper);
    let scale = res.abs().max(f64::MIN_POSITIVE);
    let mut defects = Vec::new();
    match fit.branch {
        Branch::Periodic => {
            defects.push(Defect {
                label: "(N-D) M_lower < res".into(),
                value: (lo - res) / scale,
                tolerance: 0.0,
                pass: lo < res,
                detail: json!({"bound": lo, "residue": res}),
            });
            defects.push(Defect {
                label: "res < (N-D) M_upper".into(),
                value: (res - hi) / scale,
                tolerance: 0.0,
                pass: res < hi,
                detail: json!({"bound": hi, "residue": res}),
            });
        }
        Branch::Measurable => {
            let below = ((lo - res) / scale).max(0.0);
            let above = ((res - hi) / scale).max(0.0);
            defects.push(Defect {
                label: "(N-D) M_lower <= res".into(),
                value: below,
                tolerance: tol,
                pass: below <= tol,
                detail: json!({"bound": lo, "residue": res}),
            });
            defects.push(Defect {
                label: "res <= (N-D) M_upper".into(),
                value: above,
                tolerance: tol,
                pass: above <= tol,
                detail: json!({"bound": hi, "residue": res}),
            });
            let m = fit.m.ok_or_else(|| {
                Error::InvalidParameters("measurable fit without a content".into())
            })?;
            let rel = (res - k * m).abs() / (k * m).abs().max(f64::MIN_POSITIVE);
            defects.push(Defect {
                label: "res = (N-D) M".into(),
                value: rel,
                tolerance: tol,
                pass: rel <= tol,
                detail: json!({"content_side": k * m, "residue": res}),
            });
        }
    }
    let inputs = json!({
        "fit": fit,
        "pole": cjson(principal.location),
        "residue": cjson(principal.residue),
        "ambient_dim": ambient_dim,
        "tol": tol,
    });
    Ok(Report::new("residue-content", inputs, defects))
}
