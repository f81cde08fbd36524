use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::strings::{build, geometric_zeta_partial, StringSpec};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn ln3() -> f64 {
    3f64.ln()
}

fn d_cantor() -> f64 {
    2f64.ln() / 3f64.ln()
}

fn lattice_point(d: f64, t: f64, k: i32) -> Complex64 {
    c(d, 2.0 * PI * k as f64 / t)
}

fn close(a: Complex64, b: Complex64, rel: f64) -> bool {
    (a - b).norm() <= rel * b.norm().max(1e-300)
}

#[test]
fn cantor_geometric_values() {
    let z = catalog_cantor_geometric();
    assert!((z.eval(c(1.0, 0.0)).unwrap() - 1.0).norm() < 1e-15);
    assert!((z.eval(c(0.0, 0.0)).unwrap() + 1.0).norm() < 1e-15);
    let l = build(&StringSpec::CantorString).unwrap();
    for &im in &[0.0, 1.0, -7.5] {
        let s = c(d_cantor() + 0.5, im);
        let direct = geometric_zeta_partial(&l, s, 1e-12).unwrap();
        assert!((z.eval(s).unwrap() - direct).norm() < 1e-10);
    }
}

#[test]
fn cantor_geometric_residues_numeric() {
    let z = catalog_cantor_geometric();
    let want = c(1.0 / (2.0 * ln3()), 0.0);
    for k in -2..=2 {
        let w = lattice_point(d_cantor(), ln3(), k);
        let r = residue_numeric(&z, w, 0.1, 64).unwrap();
        assert!(close(r.value, want, 1e-8), "k={k}: {}", r.value);
        assert!(r.error < 1e-9);
    }
}

#[test]
fn guard_radius_refuses_poles() {
    let z = catalog_cantor_geometric();
    let w = lattice_point(d_cantor(), ln3(), 3);
    assert!(matches!(z.eval(w), Err(Error::PoleProximity { .. })));
    assert!(z.eval(w + 1e-6).is_ok());
}

#[test]
fn extended_with_trivial_base() {
    let one = ClosedZeta::trivial(1.0);
    let z = catalog_extended_self_similar(&one, &[1.0 / 3.0, 1.0 / 3.0]).unwrap();
    let cantor = catalog_cantor_geometric();
    // 1/(1 - 2 3^{-s}) = 3^s times the Cantor zeta
    let s = c(1.3, 2.2);
    assert!(close(
        z.eval(s).unwrap(),
        rpow3(s) * cantor.eval(s).unwrap(),
        1e-14
    ));
    let poles = poles_in_window(&z, (-1.0, 2.0), (-10.0, 10.0)).unwrap();
    assert_eq!(poles.len(), 3);
    for p in &poles {
        assert!((p.location.re - d_cantor()).abs() < 1e-14);
        assert_eq!(p.status, PoleStatus::Confirmed);
    }
    let z = catalog_extended_self_similar(&one, &[0.25, 0.25]).unwrap();
    let real: Vec<_> = poles_in_window(&z, (-1.0, 2.0), (-0.1, 0.1)).unwrap();
    assert_eq!(real.len(), 1);
    assert!((real[0].location - 0.5).norm() < 1e-14);
    assert!(matches!(
        catalog_extended_self_similar(&one, &[0.6, 0.5]),
        Err(Error::InvalidRatios(_))
    ));
}

fn rpow3(s: Complex64) -> Complex64 {
    crate::numeric::rpow(3.0, s)
}

#[test]
fn nested_extension_raises_order() {
    let z = catalog_extended_self_similar(&catalog_cantor_geometric(), &[1.0 / 3.0, 1.0 / 3.0])
        .unwrap();
    let n2 = catalog_nth_order_cantor(2).unwrap();
    for &s in &[c(1.1, 0.3), c(0.2, -4.0), c(-1.0, 9.0)] {
        assert!(close(z.eval(s).unwrap(), n2.eval(s).unwrap(), 1e-12));
    }
    let poles = poles_in_window(&z, (0.0, 1.0), (-1.0, 1.0)).unwrap();
    assert_eq!(poles.len(), 1);
    assert_eq!(poles[0].order, Order::Finite(2));
    let want = 1.0 / (2.0 * ln3() * ln3());
    assert!((poles[0].residue.re - want).abs() < 1e-14);
    assert!((want - 0.4143).abs() < 1e-4);
}

#[test]
fn extended_nonlattice_and_cancellation() {
    let base = ClosedZeta::trivial(0.5);
    let z = catalog_extended_self_similar(&base, &[0.5, 0.3]).unwrap();
    let poles = poles_in_window(&z, (-2.0, 1.0), (0.0, 15.0)).unwrap();
    assert!(poles.len() >= 3);
    for p in &poles {
        assert_eq!(p.status, PoleStatus::Unverified);
        let num = residue_numeric(&z, p.location, 0.05, 64).unwrap();
        assert!(close(num.value, p.residue, 1e-8), "{:?}", p);
    }
    // numerator 1 - 2 3^{-s} cancels every root of the denominator
    let num = ClosedZeta::from_expr(
        "cancelling",
        Expr::add(vec![
            Expr::c(1.0),
            Expr::mul(vec![Expr::c(-2.0), Expr::pow(1.0 / 3.0)]),
        ]),
    );
    let z = catalog_extended_self_similar(&num, &[1.0 / 3.0, 1.0 / 3.0]).unwrap();
    let cands = z.candidates((0.0, 1.0), (-1.0, 1.0)).unwrap();
    assert_eq!(cands.len(), 1);
    assert_eq!(cands[0].status, PoleStatus::Removable);
    assert!(poles_in_window(&z, (0.0, 1.0), (-1.0, 1.0))
        .unwrap()
        .is_empty());
}

#[test]
fn nth_order_cantor() {
    assert!(matches!(
        catalog_nth_order_cantor(0),
        Err(Error::InvalidOrder(0))
    ));
    let one = catalog_nth_order_cantor(1).unwrap();
    let cantor = catalog_cantor_geometric();
    for &s in &[c(0.9, 0.0), c(0.3, 5.0)] {
        assert!(close(one.eval(s).unwrap(), cantor.eval(s).unwrap(), 1e-13));
    }
    let w0 = lattice_point(d_cantor(), ln3(), 0);
    let z = catalog_nth_order_cantor(2).unwrap();
    assert_eq!(order_numeric(&z, w0, 0.1).unwrap(), NumericOrder::Order(2));
    let c2 = laurent_coeff(&z, w0, 2, 0.1).unwrap();
    assert!((c2.value - 1.0 / (2.0 * ln3() * ln3())).norm() < 1e-10);
    let z3 = catalog_nth_order_cantor(3).unwrap();
    assert_eq!(order_numeric(&z3, w0, 0.1).unwrap(), NumericOrder::Order(3));
}

#[test]
fn simple_closed_forms() {
    let f = |s: Complex64| 1.0 / (s - 2.0);
    let r = residue_numeric(&f, c(2.0, 0.0), 0.5, 64).unwrap();
    assert!((r.value - 1.0).norm() < 1e-12);
    let c2 = laurent_coeff(&f, c(2.0, 0.0), 2, 0.5).unwrap();
    assert!(c2.value.norm() < 1e-12 && c2.is_zero(2, 0.5));
    let c1 = laurent_coeff(&f, c(2.0, 0.0), 1, 0.5).unwrap();
    assert_eq!(c1.value, r.value);
    let g = |s: Complex64| 1.0 / ((s - c(0.0, 1.0)) * (s - c(0.0, 1.0)));
    assert_eq!(
        order_numeric(&g, c(0.0, 1.0), 0.3).unwrap(),
        NumericOrder::Order(2)
    );
    let h = |s: Complex64| s.exp();
    assert_eq!(
        order_numeric(&h, c(0.0, 0.0), 0.3).unwrap(),
        NumericOrder::Order(0)
    );
    assert!(matches!(
        laurent_coeff(&f, c(2.0, 0.0), 0, 0.5),
        Err(Error::InvalidOrder(0))
    ));
    assert!(matches!(
        residue_numeric(&f, c(2.0, 0.0), 0.5, 16),
        Err(Error::InvalidParameters(_))
    ));
}

#[test]
fn essential_singularity_evidence() {
    let w0 = lattice_point(d_cantor(), ln3(), 0);
    let z = catalog_infinite_order_for_contour(
        &ClosedZeta::trivial(1.0 / 3.0),
        &[1.0 / 3.0, 1.0 / 3.0],
        w0,
        0.1,
        1e-12,
    )
    .unwrap();
    for n in 1..=5 {
        let cn = laurent_coeff(&z, w0, n, 0.1).unwrap();
        assert!(
            cn.value.norm() > 1e-12 && cn.error < cn.value.norm(),
            "n={n}: {cn:?}"
        );
    }
    assert_eq!(
        order_numeric(&z, w0, 0.1).unwrap(),
        NumericOrder::EssentialSuspect
    );
    let poles = poles_in_window(&z, (0.0, 1.0), (-1.0, 1.0)).unwrap();
    assert_eq!(poles[0].order, Order::Essential);
    assert_eq!(poles[0].provenance, Provenance::NumericContour);
}

#[test]
fn infinite_order_values() {
    let z = catalog_cantor_infinite_order(30).unwrap();
    let v = z.eval(c(1.0, 0.0)).unwrap();
    assert!((v.re - (1f64.exp() - 1.0) / 3.0).abs() < 1e-14);
    let mut brute = 0.0;
    let mut fact = 1.0;
    for n in 1..40 {
        fact *= n as f64;
        brute += 1.0 / (fact * fact * 7f64.powi(n));
    }
    brute /= 9.0;
    assert!((z.eval(c(2.0, 0.0)).unwrap().re - brute).abs() < 1e-15);
    // a few terms cannot represent the function next to the lattice
    let few = catalog_cantor_infinite_order(3).unwrap();
    let near = lattice_point(d_cantor(), ln3(), 0) + 0.05;
    assert!(matches!(
        few.eval(near),
        Err(Error::TruncationUnstable { .. })
    ));
    assert!(matches!(
        few.eval(c(-0.5, 0.0)),
        Err(Error::TruncationUnstable { .. })
    ));
}

#[test]
fn cantor_distance_zeta() {
    let z = catalog_distance_string(&catalog_cantor_geometric(), 0.5).unwrap();
    // |A_delta| for the Cantor set with delta = 1/2 is 1 + 2 delta = 2
    assert!((z.eval(c(1.0, 0.0)).unwrap() - 2.0).norm() < 1e-14);
    assert!(matches!(
        catalog_distance_string(&catalog_cantor_geometric(), 0.1),
        Err(Error::DeltaTooSmall { .. })
    ));
    let cands = z.candidates((-0.5, 1.0), (-7.0, 7.0)).unwrap();
    assert_eq!(cands.len(), 4);
    let zero = cands.iter().find(|c| c.location.norm() < 1e-12).unwrap();
    assert_eq!(zero.status, PoleStatus::Removable);
    assert!(zero.residue.unwrap().norm() < 1e-15);
    // the numerical residue at 0 vanishes as well
    assert!(
        residue_numeric(&z, c(0.0, 0.0), 0.2, 64)
            .unwrap()
            .value
            .norm()
            < 1e-12
    );
    let poles = poles_in_window(&z, (-0.5, 1.0), (-7.0, 7.0)).unwrap();
    assert_eq!(poles.len(), 3);
    let t = ln3();
    for p in &poles {
        let w = p.location;
        let want = (-w).expf(2.0) / (t * w);
        assert!(close(p.residue, want, 1e-13));
        let num = residue_numeric(&z, w, 0.1, 64).unwrap();
        assert!(close(num.value, want, 1e-8), "{w}: {} vs {want}", num.value);
    }
}

#[test]
fn generalized_cantor_distance() {
    let z = catalog_generalized_cantor_distance(2, 1.0 / 3.0, 0.5).unwrap();
    assert!((z.meta.d_abs.unwrap() - d_cantor()).abs() < 1e-15);
    // agrees with the string route for the same set
    let s = c(1.4, 0.8);
    let via_string = catalog_distance_string(&catalog_cantor_geometric(), 0.5)
        .unwrap()
        .eval(s)
        .unwrap();
    assert!(close(z.eval(s).unwrap(), via_string, 1e-13));
    let d = d_cantor();
    let want = (1.0 - 2.0 / 3.0) / (d * ln3()) * (1.0f64 / 6.0).powf(d - 1.0);
    let num = residue_numeric(&z, c(d, 0.0), 0.1, 64).unwrap();
    assert!((num.value.re - want).abs() < 1e-8 * want);
    let z3 = catalog_generalized_cantor_distance(3, 0.2, 1.0).unwrap();
    assert!((z3.meta.d_abs.unwrap() - 0.6826).abs() < 1e-4);
    let quarter = catalog_generalized_cantor_distance(2, 0.25, 0.5).unwrap();
    let poles = poles_in_window(&quarter, (0.4, 0.6), (-10.0, 10.0)).unwrap();
    let p = 2.0 * PI / 4f64.ln();
    assert_eq!(poles.len(), 5);
    for (i, pole) in poles.iter().enumerate() {
        assert!((pole.location - c(0.5, p * (i as f64 - 2.0))).norm() < 1e-14);
    }
    assert!(matches!(
        catalog_generalized_cantor_distance(1, 0.2, 1.0),
        Err(Error::InvalidParameters(_))
    ));
    assert!(matches!(
        catalog_generalized_cantor_distance(2, 0.25, 0.1),
        Err(Error::DeltaTooSmall { .. })
    ));
}

#[test]
fn carpet_catalog() {
    let z = catalog_sierpinski_carpet(1.0 / 3.0).unwrap();
    let v = z.eval(c(3.0, 0.0)).unwrap();
    let want = 8.0 / (8.0 * 3.0 * 2.0 * 19.0) + 2.0 * PI / 81.0 + 4.0 / 9.0 / 2.0;
    assert!((v.re - want).abs() < 1e-14 && v.im.abs() < 1e-15);
    assert!(z.eval(c(4.0, 0.0)).unwrap().re > 0.0);
    let poles = poles_in_window(&z, (1.5, 2.0), (-10.0, 10.0)).unwrap();
    assert_eq!(poles.len(), 3);
    let all = poles_in_window(&z, (-0.5, 2.0), (-10.0, 10.0)).unwrap();
    assert_eq!(all.len(), 5);
    for p in &all {
        let num = residue_numeric(&z, p.location, 0.1, 64).unwrap();
        assert!(
            close(num.value, p.residue, 1e-8),
            "{:?} vs {}",
            p,
            num.value
        );
    }
    assert!(matches!(
        catalog_sierpinski_carpet(0.1),
        Err(Error::DeltaTooSmall { .. })
    ));
}

#[test]
fn grill_shift() {
    let a = catalog_distance_string(&catalog_cantor_geometric(), 0.5).unwrap();
    let g = catalog_grill(&a, 1).unwrap();
    let s = c(2.5, 0.7);
    assert!(close(
        g.eval(s).unwrap(),
        a.eval(s - 1.0).unwrap() + a.eval(s).unwrap(),
        1e-14
    ));
    assert!((g.meta.d_abs.unwrap() - (1.0 + d_cantor())).abs() < 1e-15);
    let poles = poles_in_window(&g, (1.2, 2.0), (-7.0, 7.0)).unwrap();
    assert_eq!(poles.len(), 3);
    for p in &poles {
        assert!((p.location.re - 1.0 - d_cantor()).abs() < 1e-14);
        assert_eq!(
            order_numeric(&g, p.location, 0.1).unwrap(),
            NumericOrder::Order(1)
        );
    }
    let g2 = catalog_grill(&a, 2).unwrap();
    assert!((g2.meta.d_abs.unwrap() - (2.0 + d_cantor())).abs() < 1e-15);
    assert!(matches!(
        catalog_grill(&a, 0),
        Err(Error::InvalidParameters(_))
    ));
}

#[test]
fn conjugate_symmetry() {
    let families = vec![
        catalog_sierpinski_carpet(0.5).unwrap(),
        catalog_generalized_cantor_distance(3, 0.2, 1.0).unwrap(),
        catalog_extended_self_similar(&ClosedZeta::trivial(1.0), &[0.5, 0.3]).unwrap(),
    ];
    for z in families {
        let poles = poles_in_window(&z, (-1.0, 2.0), (-12.0, 12.0)).unwrap();
        for p in &poles {
            let q = poles
                .iter()
                .find(|q| (q.location - p.location.conj()).norm() < 1e-9)
                .expect("conjugate pole");
            assert!(close(q.residue, p.residue.conj(), 1e-9));
        }
    }
}

#[test]
fn scaling_law() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for &lambda in &[1.0 / 3.0, 2.0] {
        let base = catalog_distance_string(&catalog_cantor_geometric(), 0.5).unwrap();
        let scaled_string = catalog_scaled(&catalog_cantor_geometric(), lambda).unwrap();
        let direct = catalog_distance_string(&scaled_string, 0.5 * lambda).unwrap();
        for _ in 0..10 {
            let s = c(rng.gen_range(0.7..3.0), rng.gen_range(-20.0..20.0));
            let want = crate::numeric::rpow(lambda, s) * base.eval(s).unwrap();
            assert!(close(direct.eval(s).unwrap(), want, 1e-12));
        }
        let pb = poles_in_window(&base, (0.0, 1.0), (-7.0, 7.0)).unwrap();
        let pd = poles_in_window(&direct, (0.0, 1.0), (-7.0, 7.0)).unwrap();
        for (a, b) in pb.iter().zip(&pd) {
            assert!(close(
                b.residue,
                crate::numeric::rpow(lambda, a.location) * a.residue,
                1e-12
            ));
        }
    }
}

#[test]
fn tube_residue_decay() {
    // tube residues res / (1 - omega) decay like k^{-2}
    let z = catalog_distance_string(&catalog_cantor_geometric(), 0.5).unwrap();
    let poles = poles_in_window(&z, (0.5, 0.7), (0.1, 20.5 * 2.0 * PI / ln3())).unwrap();
    assert_eq!(poles.len(), 20);
    let x: Vec<f64> = (1..=20).map(|k| (k as f64).ln()).collect();
    let y: Vec<f64> = poles
        .iter()
        .map(|p| (p.residue / (1.0 - p.location)).norm().ln())
        .collect();
    let fit = crate::numeric::linear_fit(&x, &y).unwrap();
    assert!((fit.slope + 2.0).abs() < 0.1, "slope {}", fit.slope);
}

#[test]
fn meta_ordering() {
    let one = ClosedZeta::trivial(1.0);
    let all = vec![
        catalog_cantor_geometric(),
        catalog_extended_self_similar(&one, &[0.2, 0.3]).unwrap(),
        catalog_nth_order_cantor(3).unwrap(),
        catalog_cantor_infinite_order(20).unwrap(),
        catalog_distance_string(&catalog_cantor_geometric(), 1.0).unwrap(),
        catalog_generalized_cantor_distance(3, 0.2, 1.0).unwrap(),
        catalog_sierpinski_carpet(0.5).unwrap(),
        catalog_grill(&catalog_sierpinski_carpet(0.5).unwrap(), 2).unwrap(),
    ];
    for z in all {
        assert!(z.meta.is_ordered(), "{}: {:?}", z.name, z.meta);
        assert!(z.meta.d_abs.is_some());
    }
}

#[test]
fn contour_must_isolate() {
    let z = catalog_sierpinski_carpet(0.5).unwrap();
    assert!(matches!(
        residue_numeric(&z, c(1.0, 0.0), 1.5, 64),
        Err(Error::ContourCrossesPole { .. })
    ));
    // a circle through a pole
    let d = 8f64.ln() / ln3();
    assert!(matches!(
        residue_numeric(&z, c(d - 0.5, 0.0), 0.5, 64),
        Err(Error::ContourCrossesPole { .. })
    ));
}

#[test]
fn search_without_catalog() {
    let carpet = catalog_sierpinski_carpet(0.5).unwrap();
    let bare = ClosedZeta::from_expr("carpet", carpet.expr.clone());
    let found = poles_in_window(&bare, (1.5, 2.2), (-6.0, 6.0)).unwrap();
    let want = poles_in_window(&carpet, (1.5, 2.2), (-6.0, 6.0)).unwrap();
    assert_eq!(found.len(), want.len(), "{found:?}");
    for (f, w) in found.iter().zip(&want) {
        assert!((f.location - w.location).norm() < 1e-8);
        assert!(close(f.residue, w.residue, 1e-6));
        assert_eq!(f.provenance, Provenance::NumericContour);
    }
    let empty = poles_in_window(
        &ClosedZeta::from_expr("cantor", catalog_cantor_geometric().expr),
        (1.0, 2.0),
        (-3.0, 3.0),
    )
    .unwrap();
    assert!(empty.is_empty());
}

#[test]
fn records_serialize() {
    let recs = vec![
        PoleRecord {
            location: c(0.5, 1.0),
            order: Order::Finite(2),
            residue: c(0.25, -0.5),
            provenance: Provenance::Analytic,
            status: PoleStatus::Confirmed,
        },
        PoleRecord {
            location: c(0.6, 0.0),
            order: Order::Essential,
            residue: c(1.0, 0.0),
            provenance: Provenance::NumericContour,
            status: PoleStatus::Confirmed,
        },
    ];
    let csv = poles_to_csv(&recs);
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "re,im,order,res_re,res_im,provenance");
    assert_eq!(lines[1], "0.5,1.0,2,0.25,-0.5,analytic");
    assert_eq!(lines[2], "0.6,0.0,essential,1.0,0.0,numeric-contour");
    let j = serde_json::to_string(&recs).unwrap();
    let back: Vec<PoleRecord> = serde_json::from_str(&j).unwrap();
    assert_eq!(back, recs);
    let z = catalog_sierpinski_carpet(0.5).unwrap();
    let doc = z.to_json();
    assert_eq!(doc["schema_version"], crate::SCHEMA_VERSION);
    assert_eq!(doc["meta"]["d_mer"], "-inf");
    let e: Expr = serde_json::from_value(doc["expr"].clone()).unwrap();
    assert_eq!(e, z.expr);
}
