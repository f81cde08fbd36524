use fzeta_core::analysis::{
    detect_period, distance_residues_from_tube, extract_g, fit_minkowski, fourier_residues, verify_functional_equation,
    verify_residue_content, Defect, PeriodicProfile, Report,
};
use fzeta_core::geometry::{
    carpet_distance_zeta_exact, distance_zeta_1d, distance_zeta_2d, sample_tube, BoundedSet, TubeSamples,
};
use fzeta_core::merofunc::{laurent_coeff, poles_in_window, poles_to_csv, ClosedZeta, Order, PoleRecord, Provenance};
use fzeta_core::strings::{abscissa_estimate, build, geometric_zeta, total_length, Group, StringSpec};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::output::{cjson, emit, num, Artifact, Table};
use crate::target::{catalog_for_set, default_re_range, delta_for, known_period, resolve, Target};
use crate::{at, Command, Failure, Format, Opts};

pub fn run(cmd: Command, opts: &Opts) -> Result<(), Failure> {
    let target = resolve(opts)?;
    match cmd {
        Command::Construct => emit(opts, &construct(&target, opts)?, Format::Csv),
        Command::Eval => emit(opts, &eval(&target, opts)?, Format::Csv),
        Command::Poles => emit(opts, &poles(&target, opts)?, Format::Csv),
        Command::Residues => emit(opts, &residues(&target, opts)?, Format::Csv),
        Command::Tube => emit(opts, &tube(&target, opts)?, Format::Csv),
        Command::Fit => emit(opts, &fit(&target, opts)?, Format::Csv),
        Command::Verify => {
            let report = verify(&target, opts)?;
            emit(opts, &report_artifact(&report), Format::Json)?;
            if report.pass {
                Ok(())
            } else {
                Err(Failure::verification(format!("check {} failed (max defect {:e})", report.check, report.max_defect())))
            }
        }
        Command::Report => {
            let (doc, pass) = report(&target, opts)?;
            emit(opts, &Artifact { json: doc, csv: None }, Format::Json)?;
            if pass {
                Ok(())
            } else {
                Err(Failure::verification("report contains failed checks"))
            }
        }
    }
}

fn range(v: &[f64], name: &str, default: (f64, f64)) -> Result<(f64, f64), Failure> {
    match v {
        [] => Ok(default),
        [lo, hi] if lo <= hi => Ok((*lo, *hi)),
        _ => Err(Failure::config(format!("--{name} takes LO HI with LO <= HI"))),
    }
}

/// The --s points followed by --random-s seeded points with real part in
/// (dim + 0.15, dim + 1.5) and imaginary part in (-10, 10).
fn points(opts: &Opts, dim: f64) -> Vec<Complex64> {
    let mut pts: Vec<Complex64> = opts.s.chunks(2).map(|p| Complex64::new(p[0], p[1])).collect();
    if let Some(n) = opts.random_s {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        for _ in 0..n {
            pts.push(Complex64::new(dim + rng.gen_range(0.15..1.5), rng.gen_range(-10.0..10.0)));
        }
    }
    pts
}

/// Ten points right of the critical line, used when no point is given.
fn default_points(dim: f64) -> Vec<Complex64> {
    (0..10).map(|i| Complex64::new(dim + 0.2 + 0.12 * i as f64, -5.0 + 1.1 * i as f64)).collect()
}

fn want_set(target: &Target) -> Result<&BoundedSet, Failure> {
    match target {
        Target::Set(a) => Ok(a),
        _ => Err(Failure::config("this command needs a set (--set or a set --spec)")),
    }
}

fn want_catalog(target: &Target) -> Result<&ClosedZeta, Failure> {
    match target {
        Target::Catalog(z) => Ok(z),
        _ => Err(Failure::config("this command needs --catalog")),
    }
}

fn set_delta(a: &BoundedSet, opts: &Opts) -> Result<f64, Failure> {
    delta_for(opts, a.ambient_dim() == 2)
}

fn construct(target: &Target, opts: &Opts) -> Result<Artifact, Failure> {
    let spec: &StringSpec = match target {
        Target::String(s) => s,
        Target::Set(BoundedSet::StringSet { spec, .. }) => spec,
        _ => return Err(Failure::config("construct needs a string spec (--spec file.json)")),
    };
    let l = build(spec).map_err(at("strings::build"))?;
    let groups: Vec<Group> = l.groups().take(opts.count).collect();
    let mut t = Table::new(&["length", "multiplicity"]);
    for g in &groups {
        t.row(&[num(g.length), num(g.multiplicity)]);
    }
    let json = json!({
        "spec": spec,
        "abscissa": abscissa_estimate(&l),
        "total_length": total_length(&l, 1e-12).ok(),
        "groups": groups,
    });
    Ok(Artifact { json, csv: Some(t.into_string()) })
}

/// Value and error estimate of the target's zeta function at s.
fn zeta_at(target: &Target, s: Complex64, opts: &Opts) -> Result<(Complex64, f64), Failure> {
    match target {
        Target::Catalog(z) => z.eval_with_remainder(s).map_err(at("merofunc::eval")),
        Target::String(spec) => {
            let l = build(spec).map_err(at("strings::build"))?;
            let eps = opts.eps.unwrap_or(1e-10);
            let r = geometric_zeta(&l, s, eps).map_err(at("strings::geometric_zeta"))?;
            Ok((r.value, r.error))
        }
        Target::Set(a) => {
            let delta = set_delta(a, opts)?;
            match (a, opts.resolution) {
                (BoundedSet::CarpetComplement { .. }, Some(n)) => {
                    let e = distance_zeta_2d(a, s, delta, resolution(n)?).map_err(at("geometry::distance_zeta_2d"))?;
                    Ok((e.value, e.error))
                }
                (BoundedSet::CarpetComplement { level }, None) => Ok((
                    carpet_distance_zeta_exact(*level, s, delta).map_err(at("geometry::carpet_distance_zeta_exact"))?,
                    0.0,
                )),
                _ => Ok((distance_zeta_1d(a, s, delta).map_err(at("geometry::distance_zeta_1d"))?, 0.0)),
            }
        }
    }
}

fn resolution(n: usize) -> Result<usize, Failure> {
    if n >= 2 && n.is_power_of_two() {
        Ok(n)
    } else {
        Err(Failure::config(format!("--resolution must be a power of two >= 2, got {n}")))
    }
}

fn eval(target: &Target, opts: &Opts) -> Result<Artifact, Failure> {
    let pts = points(opts, 1.0);
    if pts.is_empty() {
        return Err(Failure::config("eval needs at least one --s RE IM"));
    }
    let mut t = Table::new(&["s_re", "s_im", "value_re", "value_im", "error"]);
    let mut rows = Vec::new();
    for s in pts {
        let (v, e) = zeta_at(target, s, opts)?;
        t.row(&[num(s.re), num(s.im), num(v.re), num(v.im), num(e)]);
        rows.push(json!({"s": cjson(s), "value": cjson(v), "error": e}));
    }
    Ok(Artifact { json: json!({"target": target.describe(), "values": rows}), csv: Some(t.into_string()) })
}

fn pole_window(z: &ClosedZeta, opts: &Opts) -> Result<((f64, f64), (f64, f64)), Failure> {
    Ok((range(&opts.re_range, "re-range", default_re_range(z))?, range(&opts.im_range, "im-range", (-10.0, 10.0))?))
}

fn poles(target: &Target, opts: &Opts) -> Result<Artifact, Failure> {
    let z = want_catalog(target)?;
    let (re, im) = pole_window(z, opts)?;
    let recs = poles_in_window(z, re, im).map_err(at("merofunc::poles_in_window"))?;
    let json = json!({"target": target.describe(), "re_range": [re.0, re.1], "im_range": [im.0, im.1], "poles": recs});
    Ok(Artifact { json, csv: Some(poles_to_csv(&recs)) })
}

/// Leading Laurent coefficients by contour at every finite-order pole of
/// the window, the circle kept to 0.4 of the distance to the next pole.
fn contour_residues(z: &ClosedZeta, opts: &Opts) -> Result<Vec<(PoleRecord, PoleRecord)>, Failure> {
    let (re, im) = pole_window(z, opts)?;
    let recs = poles_in_window(z, re, im).map_err(at("merofunc::poles_in_window"))?;
    let radius = opts.radius.unwrap_or(0.1);
    if !(radius > 0.0) {
        return Err(Failure::config(format!("--radius must be > 0, got {radius}")));
    }
    let mut out = Vec::new();
    for (i, r) in recs.iter().enumerate() {
        let Order::Finite(n) = r.order else { continue };
        let sep = recs
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != i)
            .map(|(_, q)| (q.location - r.location).norm())
            .fold(f64::INFINITY, f64::min);
        let c = laurent_coeff(z, r.location, n as i32, radius.min(0.4 * sep)).map_err(at("merofunc::laurent_coeff"))?;
        let numeric = PoleRecord { residue: c.value, provenance: Provenance::NumericContour, ..r.clone() };
        out.push((r.clone(), numeric));
    }
    Ok(out)
}

struct Spectrum {
    profile: PeriodicProfile,
    tube_residues: Vec<PoleRecord>,
    residues: Vec<PoleRecord>,
}

/// Planar tubes carry t and t^2 terms (the poles at 1 and 0) that decay
/// only like t^{D-1} relative to t^{2-D} G; below 1e-8 they are under 1e-6
/// of the oscillating term for the carpet.
const PLANAR_T_MAX: f64 = 1e-8;

/// The carpet tube is piecewise quadratic; the profile interpolates it
/// linearly, which damps mode k by about (pi k h / T)^2 / 3 for a node
/// spacing h in log t. 1024 per decade keeps k <= 5 within 4e-4.
const PLANAR_PER_DECADE: usize = 1024;

fn sampled_tube(a: &BoundedSet, opts: &Opts) -> Result<TubeSamples, Failure> {
    let delta = set_delta(a, opts)?;
    let t_max = opts.t_max.unwrap_or(if a.ambient_dim() == 2 { PLANAR_T_MAX.min(delta) } else { delta });
    let t_min = opts.t_min.unwrap_or(1e-20);
    if !(t_min > 0.0 && t_min < t_max && t_max <= delta) {
        return Err(Failure::config(format!("need 0 < t_min < t_max <= delta, got {t_min}, {t_max}, {delta}")));
    }
    let per_decade = opts.per_decade.unwrap_or(if a.ambient_dim() == 2 { PLANAR_PER_DECADE } else { 32 });
    if per_decade < 2 {
        return Err(Failure::config("--per-decade must be >= 2"));
    }
    sample_tube(a, t_min, t_max, per_decade).map_err(at("geometry::sample_tube"))
}

fn period_of(a: &BoundedSet, opts: &Opts) -> Option<f64> {
    opts.period.or_else(|| known_period(a))
}

fn spectrum(a: &BoundedSet, tube: &TubeSamples, period: f64, opts: &Opts) -> Result<Spectrum, Failure> {
    let d = a.dimension_hint().map_err(at("geometry::dimension_hint"))?;
    let profile = extract_g(tube, d, period).map_err(at("analysis::extract_g"))?;
    let tube_residues = fourier_residues(&profile, opts.k_max).map_err(at("analysis::fourier_residues"))?;
    let residues =
        distance_residues_from_tube(&tube_residues, a.ambient_dim()).map_err(at("analysis::distance_residues_from_tube"))?;
    Ok(Spectrum { profile, tube_residues, residues })
}

fn profile_json(p: &PeriodicProfile) -> Value {
    json!({
        "T": p.period,
        "D": p.d,
        "min": p.min(),
        "max": p.max(),
        "mean": p.mean(),
        "periods": p.periods,
        "fold_deviation": p.fold_deviation,
        "exact": p.exact,
        "constant": p.constant,
    })
}

fn residues(target: &Target, opts: &Opts) -> Result<Artifact, Failure> {
    match target {
        Target::Catalog(z) => {
            let pairs = contour_residues(z, opts)?;
            let numeric: Vec<PoleRecord> = pairs.iter().map(|p| p.1.clone()).collect();
            let rows: Vec<Value> = pairs
                .iter()
                .map(|(a, n)| json!({"location": cjson(a.location), "analytic": cjson(a.residue), "contour": cjson(n.residue)}))
                .collect();
            Ok(Artifact { json: json!({"target": target.describe(), "residues": rows}), csv: Some(poles_to_csv(&numeric)) })
        }
        Target::Set(a) => {
            let period = period_of(a, opts).ok_or_else(|| Failure::config("no known period for this set; give --period"))?;
            let tube = sampled_tube(a, opts)?;
            let sp = spectrum(a, &tube, period, opts)?;
            let json = json!({
                "target": target.describe(),
                "profile": profile_json(&sp.profile),
                "tube_residues": sp.tube_residues,
                "residues": sp.residues,
            });
            Ok(Artifact { json, csv: Some(poles_to_csv(&sp.residues)) })
        }
        Target::String(_) => Err(Failure::config("residues needs --catalog or a set")),
    }
}

fn tube(target: &Target, opts: &Opts) -> Result<Artifact, Failure> {
    let a = want_set(target)?;
    let tube = sampled_tube(a, opts)?;
    Ok(Artifact { csv: Some(tube.to_csv()), json: json!({"target": target.describe(), "tube": tube}) })
}

fn opt_num(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

fn fit(target: &Target, opts: &Opts) -> Result<Artifact, Failure> {
    let a = want_set(target)?;
    let tube = sampled_tube(a, opts)?;
    let f = fit_minkowski(&tube).map_err(at("analysis::fit_minkowski"))?;
    let mut t = Table::new(&["D", "M", "M_lower", "M_upper", "alpha", "branch", "residual"]);
    let branch = serde_json::to_value(f.branch).expect("serializable");
    t.row(&[
        num(f.d),
        opt_num(f.m),
        num(f.m_lower),
        num(f.m_upper),
        opt_num(f.alpha),
        branch.as_str().unwrap_or_default().to_string(),
        num(f.residual),
    ]);
    let json = json!({"target": target.describe(), "fit": f, "detected_period": detect_period(&tube)});
    Ok(Artifact { json, csv: Some(t.into_string()) })
}

fn report_artifact(r: &Report) -> Artifact {
    let mut t = Table::new(&["label", "value", "tolerance", "pass"]);
    for d in &r.defects {
        t.row(&[format!("\"{}\"", d.label), num(d.value), num(d.tolerance), d.pass.to_string()]);
    }
    Artifact { json: serde_json::to_value(r).expect("serializable"), csv: Some(t.into_string()) }
}

fn rel_defect(label: String, got: Complex64, want: Complex64, tol: f64) -> Defect {
    let value = (got - want).norm() / want.norm().max(f64::MIN_POSITIVE);
    Defect {
        label,
        value,
        tolerance: tol,
        pass: value <= tol,
        detail: json!({"computed": cjson(got), "closed_form": cjson(want)}),
    }
}

/// Computed residues against the closed-form catalog, relative error each.
fn compare_with_catalog(z: &ClosedZeta, got: &[PoleRecord], tol: f64) -> Result<Report, Failure> {
    let mut defects = Vec::new();
    for r in got {
        let w = r.location;
        let cat = poles_in_window(z, (w.re - 1e-6, w.re + 1e-6), (w.im - 1e-6, w.im + 1e-6))
            .map_err(at("merofunc::poles_in_window"))?;
        let label = format!("res at {} {:+}i", w.re, w.im);
        match cat.first() {
            Some(c) => defects.push(rel_defect(label, r.residue, c.residue, tol)),
            None => defects.push(Defect {
                label,
                value: f64::INFINITY,
                tolerance: tol,
                pass: false,
                detail: json!({"computed": cjson(r.residue), "closed_form": null}),
            }),
        }
    }
    let inputs = json!({"catalog": z.name, "tol": tol});
    Ok(Report::new("catalog-residues", inputs, defects))
}

fn check_functional_equation(a: &BoundedSet, opts: &Opts) -> Result<Report, Failure> {
    let dim = a.dimension_hint().map_err(at("geometry::dimension_hint"))?;
    let mut pts = points(opts, dim);
    if pts.is_empty() {
        pts = default_points(dim);
    }
    let tol = opts.eps.unwrap_or(1e-6);
    verify_functional_equation(a, &pts, set_delta(a, opts)?, tol).map_err(at("analysis::verify_functional_equation"))
}

fn check_residue_content(a: &BoundedSet, opts: &Opts) -> Result<Report, Failure> {
    let period = period_of(a, opts).ok_or_else(|| Failure::config("no known period for this set; give --period"))?;
    let tube = sampled_tube(a, opts)?;
    let f = fit_minkowski(&tube).map_err(at("analysis::fit_minkowski"))?;
    let sp = spectrum(a, &tube, period, opts)?;
    verify_residue_content(&f, &sp.residues, a.ambient_dim(), opts.eps.unwrap_or(1e-3))
        .map_err(at("analysis::verify_residue_content"))
}

fn check_catalog_residues(target: &Target, opts: &Opts) -> Result<Report, Failure> {
    match target {
        Target::Catalog(z) => {
            let numeric: Vec<PoleRecord> = contour_residues(z, opts)?.into_iter().map(|p| p.1).collect();
            compare_with_catalog(z, &numeric, opts.eps.unwrap_or(1e-8))
        }
        Target::Set(a) => {
            let z = catalog_for_set(a, set_delta(a, opts)?)
                .ok_or_else(|| Failure::config("no closed form for this set to compare with"))??;
            let period = period_of(a, opts).ok_or_else(|| Failure::config("no known period for this set; give --period"))?;
            let sp = spectrum(a, &sampled_tube(a, opts)?, period, opts)?;
            compare_with_catalog(&z, &sp.residues, opts.eps.unwrap_or(1e-3))
        }
        Target::String(_) => Err(Failure::config("catalog-residues needs --catalog or a set")),
    }
}

fn verify(target: &Target, opts: &Opts) -> Result<Report, Failure> {
    let check = opts.check.as_deref().ok_or_else(|| {
        Failure::config("verify needs --check functional-equation|residue-content|catalog-residues")
    })?;
    match check {
        "functional-equation" => check_functional_equation(want_set(target)?, opts),
        "residue-content" => check_residue_content(want_set(target)?, opts),
        "catalog-residues" => check_catalog_residues(target, opts),
        other => Err(Failure::config(format!("unknown check {other}"))),
    }
}

/// Closed form against the numerical routes at each s: the exact
/// decomposition (or gap sums in R) and, for planar sets, the grid.
fn zeta_table(a: &BoundedSet, z: &ClosedZeta, pts: &[Complex64], opts: &Opts) -> Result<Vec<Value>, Failure> {
    let delta = set_delta(a, opts)?;
    let mut rows = Vec::new();
    for &s in pts {
        let closed = z.eval(s).map_err(at("merofunc::eval"))?;
        let mut row = json!({"s": cjson(s), "closed_form": cjson(closed)});
        match a {
            BoundedSet::CarpetComplement { level } => {
                let exact = carpet_distance_zeta_exact(*level, s, delta).map_err(at("geometry::carpet_distance_zeta_exact"))?;
                let n = resolution(opts.resolution.unwrap_or(512))?;
                let grid = distance_zeta_2d(a, s, delta, n).map_err(at("geometry::distance_zeta_2d"))?;
                row["decomposition"] = cjson(exact);
                row["grid"] = json!({"resolution": n, "value": cjson(grid.value), "error": grid.error});
                row["grid_rel_error"] = json!((grid.value - closed).norm() / closed.norm());
            }
            _ => {
                let v = distance_zeta_1d(a, s, delta).map_err(at("geometry::distance_zeta_1d"))?;
                row["gap_sum"] = cjson(v);
                row["rel_error"] = json!((v - closed).norm() / closed.norm());
            }
        }
        rows.push(row);
    }
    Ok(rows)
}

fn report(target: &Target, opts: &Opts) -> Result<(Value, bool), Failure> {
    match target {
        Target::Set(a) => {
            let tube = sampled_tube(a, opts)?;
            let f = fit_minkowski(&tube).map_err(at("analysis::fit_minkowski"))?;
            let mut checks = vec![check_functional_equation(a, opts)?];
            let mut doc = json!({"target": target.describe(), "delta": set_delta(a, opts)?, "fit": f});
            if let Some(period) = period_of(a, opts) {
                let sp = spectrum(a, &tube, period, opts)?;
                checks.push(
                    verify_residue_content(&f, &sp.residues, a.ambient_dim(), opts.eps.unwrap_or(1e-3))
                        .map_err(at("analysis::verify_residue_content"))?,
                );
                doc["profile"] = profile_json(&sp.profile);
                doc["residues"] = json!(sp.residues);
            }
            if let Some(z) = catalog_for_set(a, set_delta(a, opts)?) {
                let z = z?;
                if doc.get("residues").is_some() {
                    checks.push(check_catalog_residues(target, opts)?);
                }
                let mut pts = points(opts, f.d);
                if pts.is_empty() {
                    pts = match a {
                        BoundedSet::CarpetComplement { .. } => vec![Complex64::new(3.0, 0.0), Complex64::new(4.0, 0.0)],
                        _ => vec![Complex64::new(1.5, 0.0), Complex64::new(2.0, 1.0)],
                    };
                }
                doc["zeta_table"] = json!(zeta_table(a, &z, &pts, opts)?);
            }
            let pass = checks.iter().all(|c| c.pass);
            doc["checks"] = json!(checks);
            doc["pass"] = json!(pass);
            Ok((doc, pass))
        }
        Target::String(spec) => {
            let l = build(spec).map_err(at("strings::build"))?;
            let ab = abscissa_estimate(&l);
            let mut pts = points(opts, ab.value);
            if pts.is_empty() {
                pts = vec![Complex64::new(1.0, 0.0)];
            }
            let mut rows = Vec::new();
            for s in pts {
                let (v, e) = zeta_at(target, s, opts)?;
                rows.push(json!({"s": cjson(s), "value": cjson(v), "error": e}));
            }
            let doc = json!({"target": target.describe(), "D": ab.value, "abscissa": ab, "zeta_table": rows, "checks": [], "pass": true});
            Ok((doc, true))
        }
        Target::Catalog(z) => {
            let (re, im) = pole_window(z, opts)?;
            let recs = poles_in_window(z, re, im).map_err(at("merofunc::poles_in_window"))?;
            let check = check_catalog_residues(target, opts)?;
            let pass = check.pass;
            let doc = json!({"target": z.to_json(), "poles": recs, "checks": [check], "pass": pass});
            Ok((doc, pass))
        }
    }
}
