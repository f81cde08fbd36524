use super::*;
use crate::merofunc::{
    catalog_cantor_geometric, catalog_distance_string, catalog_sierpinski_carpet,
};
use crate::strings::StringSpec;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn cantor() -> BoundedSet {
    BoundedSet::CantorIterate { level: None }
}

fn astring_set() -> BoundedSet {
    BoundedSet::StringSet {
        spec: StringSpec::AString { a: 1.0 },
        depth: None,
    }
}

fn close(a: Complex64, b: Complex64, rel: f64) -> bool {
    (a - b).norm() <= rel * b.norm().max(1e-300)
}

/// Midpoint rule for int f over [lo, hi] with n cells.
fn midpoint(lo: f64, hi: f64, n: usize, f: impl Fn(f64) -> Complex64) -> Complex64 {
    let h = (hi - lo) / n as f64;
    (0..n)
        .map(|i| f(lo + (i as f64 + 0.5) * h))
        .sum::<Complex64>()
        * h
}

#[test]
fn distances() {
    assert!((distance_to_set(&[0.5], &cantor()).unwrap() - 1.0 / 6.0).abs() < 1e-15);
    for x in [0.0, 1.0, 1.0 / 3.0, 2.0 / 9.0, 0.25] {
        // 1/4 = 0.0202..._3 lies in the Cantor set
        assert!(distance_to_set(&[x], &cantor()).unwrap() < 1e-15, "{x}");
    }
    assert!((distance_to_set(&[1.5], &cantor()).unwrap() - 0.5).abs() < 1e-15);
    let carpet = BoundedSet::CarpetComplement { level: None };
    assert!((distance_to_set(&[0.5, 0.5], &carpet).unwrap() - 1.0 / 6.0).abs() < 1e-15);
    assert!((distance_to_set(&[0.5, 0.5 / 3.0], &carpet).unwrap() - 1.0 / 18.0).abs() < 1e-15);
    assert!(distance_to_set(&[0.1, 0.0], &carpet).unwrap() == 0.0);
    assert!((distance_to_set(&[-3.0, 5.0], &carpet).unwrap() - 5.0).abs() < 1e-15);
    // level 1 only deletes the middle square
    let l1 = BoundedSet::CarpetComplement { level: Some(1) };
    assert_eq!(distance_to_set(&[0.5, 0.5 / 3.0], &l1).unwrap(), 0.0);
    let iu = BoundedSet::IntervalUnion {
        intervals: vec![(0.0, 0.1), (0.5, 0.6)],
    };
    assert!((distance_to_set(&[0.2], &iu).unwrap() - 0.1).abs() < 1e-15);
    assert_eq!(distance_to_set(&[0.55], &iu).unwrap(), 0.0);
    assert!(matches!(
        distance_to_set(&[0.5, 0.5], &iu),
        Err(Error::DimensionMismatch(_))
    ));
}

#[test]
fn string_set_distances_match_explicit_points() {
    // A_L of the 1-string is {1/k} with 0
    let a = astring_set();
    for k in [1.0, 2.0, 7.0, 1000.0, 123456.0] {
        assert!(distance_to_set(&[1.0 / k], &a).unwrap() < 1e-12 / k, "{k}");
    }
    for x in [0.3f64, 0.61, 0.0123, 3.3e-7] {
        let k = (1.0 / x).floor();
        let want = (x - 1.0 / (k + 1.0)).min(1.0 / k - x);
        let got = distance_to_set(&[x], &a).unwrap();
        assert!((got - want).abs() < 1e-12 * x, "{x}: {got} vs {want}");
    }
    // L = (1/2, 1/4, 1/8, 1/16): points 15/16, 7/16, 3/16, 1/16, 0
    let spec = StringSpec::Finite {
        lengths: vec![0.5, 0.25, 0.125, 0.0625],
    };
    let sset = BoundedSet::StringSet { spec, depth: None };
    let pts = BoundedSet::PointSet {
        points: vec![0.0, 1.0 / 16.0, 3.0 / 16.0, 7.0 / 16.0, 15.0 / 16.0],
    };
    for x in [-0.1, 0.02, 0.1, 0.3, 0.9, 1.2] {
        let (u, v) = (
            distance_to_set(&[x], &sset).unwrap(),
            distance_to_set(&[x], &pts).unwrap(),
        );
        assert!((u - v).abs() < 1e-15, "{x}: {u} vs {v}");
    }
    for t in [0.01, 0.05, 0.2] {
        assert!((tube_volume(&sset, t).unwrap() - tube_volume(&pts, t).unwrap()).abs() < 1e-15);
    }
}

#[test]
fn tube_examples() {
    assert!((tube_volume(&cantor(), 1.0 / 6.0).unwrap() - 4.0 / 3.0).abs() < 1e-15);
    assert!(
        (tube_volume(&BoundedSet::CantorIterate { level: Some(1) }, 1.0 / 6.0).unwrap()
            - 4.0 / 3.0)
            .abs()
            < 1e-15
    );
    let p = BoundedSet::PointSet { points: vec![0.3] };
    for t in [1e-9, 0.1, 3.0] {
        assert!((tube_volume(&p, t).unwrap() - 2.0 * t).abs() < 1e-15 * t);
    }
    let exact = cantor_tube_exact(0.1).unwrap();
    let it = tube_volume(&BoundedSet::CantorIterate { level: Some(12) }, 0.1).unwrap();
    assert!((exact - it).abs() < 1e-6);
    assert!((cantor_tube_exact(1.0 / 6.0).unwrap() - 4.0 / 3.0).abs() < 1e-14);
    assert!((cantor_tube_exact(0.5).unwrap() - 2.0).abs() < 1e-14);
    assert!(matches!(
        cantor_tube_exact(0.6),
        Err(Error::OutOfRange { .. })
    ));
    assert!(matches!(
        cantor_tube_exact(0.0),
        Err(Error::OutOfRange { .. })
    ));
    let l3 = tube_volume(&BoundedSet::CantorIterate { level: Some(3) }, 1.0 / 18.0).unwrap();
    assert!((cantor_tube_exact(1.0 / 18.0).unwrap() - l3).abs() < 1e-14);
}

#[test]
fn cantor_tube_formula_against_gap_sums() {
    // from t = 1e-300 up: the gap-sum evaluation and the closed form agree
    let mut t = 0.49;
    while t > 1e-290 {
        let a = cantor_tube_exact(t).unwrap();
        let b = tube_volume(&cantor(), t).unwrap();
        assert!((a - b).abs() <= 1e-12 * a, "t={t:e}: {a} vs {b}");
        t *= 0.173;
    }
}

#[test]
fn iterate_structure() {
    for l in 0..8u32 {
        let iv = BoundedSet::CantorIterate { level: Some(l) }
            .intervals()
            .unwrap();
        assert_eq!(iv.len(), 1 << l);
        for (a, b) in &iv {
            assert!(((b - a) - 3f64.powi(-(l as i32))).abs() < 1e-15);
        }
        assert!(iv.windows(2).all(|w| w[0].1 < w[1].0));
    }
    let g = BoundedSet::GeneralizedCantorIterate {
        m: 3,
        a: 0.2,
        level: Some(2),
    }
    .intervals()
    .unwrap();
    assert_eq!(g.len(), 9);
    assert!((g[8].1 - 1.0).abs() < 1e-15);
    for level in 1..=5u32 {
        let sq = deleted_squares(level).unwrap();
        for k in 1..=level as i32 {
            let side = 3f64.powi(-k);
            let n = sq.iter().filter(|q| (q.2 - side).abs() < 1e-15).count();
            assert_eq!(n, 8usize.pow(k as u32 - 1), "level {level} k {k}");
        }
        assert_eq!(
            sq.len(),
            (1..=level).map(|k| 8usize.pow(k - 1)).sum::<usize>()
        );
    }
}

#[test]
fn tube_scaling_of_interval_unions() {
    let a = BoundedSet::IntervalUnion {
        intervals: vec![(0.0, 0.1), (0.15, 0.2), (0.7, 1.0)],
    };
    for lambda in [1.0 / 3.0, 2.0] {
        let b = a.scaled(lambda).unwrap();
        for t in [0.001, 0.02, 0.1, 0.4] {
            let lhs = tube_volume(&b, lambda * t).unwrap();
            let rhs = lambda * tube_volume(&a, t).unwrap();
            assert!((lhs - rhs).abs() < 1e-15 * rhs.max(1.0));
        }
    }
}

#[test]
fn distance_zeta_1d_examples() {
    let p = BoundedSet::PointSet { points: vec![0.0] };
    for s in [c(0.5, 0.0), c(1.5, 2.0), c(3.0, -1.0)] {
        assert!(close(distance_zeta_1d(&p, s, 1.0).unwrap(), 2.0 / s, 1e-15));
    }
    // A_L of the Cantor string against the closed form
    let set = BoundedSet::StringSet {
        spec: StringSpec::CantorString,
        depth: None,
    };
    let cat = catalog_distance_string(&catalog_cantor_geometric(), 0.5).unwrap();
    let d = 2f64.ln() / 3f64.ln();
    for x in [d + 0.05, 0.8, 1.0, 1.7, 3.0] {
        let s = c(x, 0.0);
        let got = distance_zeta_1d(&set, s, 0.5).unwrap();
        assert!(close(got, cat.eval(s).unwrap(), 1e-8), "s={x}");
    }
    // s = 1 gives |A_delta|
    let sets = [
        cantor(),
        astring_set(),
        BoundedSet::IntervalUnion {
            intervals: vec![(0.0, 0.1), (0.3, 0.35), (0.9, 1.0)],
        },
        BoundedSet::CantorIterate { level: Some(4) },
    ];
    for a in &sets {
        for delta in [0.05, 0.5] {
            let z = distance_zeta_1d(a, c(1.0, 0.0), delta).unwrap();
            let v = tube_volume(a, delta).unwrap();
            assert!(
                (z.re - v).abs() < 1e-10 && z.im.abs() < 1e-15,
                "{a:?} {delta}: {z} vs {v}"
            );
        }
    }
    assert!(matches!(
        distance_zeta_1d(&cantor(), c(0.5, 0.0), 0.5),
        Err(Error::DivergentAt(_))
    ));
    assert!(matches!(
        distance_zeta_1d(&sets[2], c(0.5, 0.0), 0.5),
        Err(Error::DivergentAt(_))
    ));
}

#[test]
fn distance_zeta_1d_against_quadrature() {
    let a = BoundedSet::IntervalUnion {
        intervals: vec![(0.0, 0.1), (0.3, 0.35), (0.9, 1.0)],
    };
    let delta = 0.2;
    for s in [c(1.7, 0.0), c(2.5, 1.5)] {
        let want = midpoint(-delta, 1.0 + delta, 2_000_000, |x| {
            let d = distance_to_set(&[x], &a).unwrap();
            if d > 0.0 && d < delta {
                (s - 1.0).scale(d.ln()).exp()
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        let got = distance_zeta_1d(&a, s, delta).unwrap();
        // the midpoint rule is first order at the jumps d = delta
        assert!(close(got, want, 1e-5), "{s}: {got} vs {want}");
    }
}

#[test]
fn square_formula_against_quadrature() {
    let s = c(2.6, 0.4);
    let n = 800;
    let h = 1.0 / n as f64;
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..n {
        for j in 0..n {
            let (x, y) = ((i as f64 + 0.5) * h, (j as f64 + 0.5) * h);
            let d = x.min(1.0 - x).min(y).min(1.0 - y);
            acc += (s - 2.0).scale(d.ln()).exp();
        }
    }
    acc *= h * h;
    assert!(close(carpet_square_zeta(1.0, s), acc, 1e-4), "{acc}");
}

#[test]
fn carpet_exact_decomposition() {
    let s = c(3.0, 0.0);
    let full = carpet_distance_zeta_exact(None, s, 1.0 / 3.0).unwrap();
    let cat = catalog_sierpinski_carpet(1.0 / 3.0)
        .unwrap()
        .eval(s)
        .unwrap();
    assert!(close(full, cat, 1e-14));
    let rho = 8.0 * 3f64.powf(-s.re);
    for l in 1..12u32 {
        let part = carpet_distance_zeta_exact(Some(l), s, 1.0 / 3.0).unwrap();
        let next_term =
            carpet_square_zeta(3f64.powi(-(l as i32) - 1), s).norm() * 8f64.powi(l as i32);
        assert!(
            (full - part).norm() <= next_term / (1.0 - rho) * (1.0 + 1e-9) + 1e-15,
            "level {l}: {} vs {}",
            (full - part).norm(),
            next_term / (1.0 - rho)
        );
    }
    // s = N gives the area of A_delta
    for l in [1u32, 3, 6] {
        let z = carpet_distance_zeta_exact(Some(l), c(2.0, 0.0), 0.25).unwrap();
        let v = tube_volume(&BoundedSet::CarpetComplement { level: Some(l) }, 0.25).unwrap();
        assert!((z.re - v).abs() < 1e-13, "level {l}: {z} vs {v}");
    }
    assert!(matches!(
        carpet_distance_zeta_exact(None, s, 0.1),
        Err(Error::DeltaTooSmall { .. })
    ));
}

#[test]
fn carpet_tube_exact_vs_grid() {
    for (l, t) in [(Some(2u32), 0.05), (Some(4), 0.01), (None, 0.02)] {
        let a = BoundedSet::CarpetComplement { level: l };
        let exact = tube_volume(&a, t).unwrap();
        let g = tube_volume_grid(&a, t, 1024).unwrap();
        assert!(
            (g.value - exact).abs() <= g.error,
            "{l:?} {t}: {} +- {} vs {exact}",
            g.value,
            g.error
        );
    }
    // limit carpet has zero area
    // and |A_t| ~ t^{2-D} with D = log 8 / log 3
    let v = tube_volume(&BoundedSet::CarpetComplement { level: None }, 1e-200).unwrap();
    assert!(v > 0.0 && v < 1e-19, "{v}");
    assert!(matches!(
        tube_volume_grid(&BoundedSet::CarpetComplement { level: None }, 1e-4, 64),
        Err(Error::GridTooCoarse(_))
    ));
}

#[test]
fn carpet_distance_zeta_grid() {
    let a = BoundedSet::CarpetComplement { level: None };
    let cat = catalog_sierpinski_carpet(1.0 / 3.0).unwrap();
    let s = c(3.0, 0.0);
    let z = distance_zeta_2d(&a, s, 1.0 / 3.0, 1024).unwrap();
    let want = cat.eval(s).unwrap();
    assert!(close(z.value, want, 1e-2), "{} vs {want}", z.value);
    assert!(z.error < 1e-2 * want.norm());
    // s = 2: area of A_delta within grid error
    let z2 = distance_zeta_2d(
        &BoundedSet::CarpetComplement { level: Some(3) },
        c(2.0, 0.0),
        0.25,
        512,
    )
    .unwrap();
    let area = tube_volume(&BoundedSet::CarpetComplement { level: Some(3) }, 0.25).unwrap();
    assert!(
        (z2.value.re - area).abs() < 5.0 * z2.error.max(1e-3),
        "{} vs {area}",
        z2.value
    );
    assert!(matches!(
        distance_zeta_2d(&a, c(1.0, 0.0), 0.3, 256),
        Err(Error::DivergentAt(_))
    ));
    assert!(matches!(
        distance_zeta_2d(&a, s, 0.3, 32),
        Err(Error::GridTooCoarse(_))
    ));
    assert!(matches!(
        distance_zeta_1d(&a, s, 0.3),
        Err(Error::DimensionMismatch(_))
    ));
}

#[test]
fn sampling() {
    let t = sample_tube(&cantor(), 1e-4, 0.5, 16).unwrap();
    assert!(t.decades() > 3.0);
    assert!(t.samples.iter().all(|p| p.exact));
    assert!(t.samples.windows(2).all(|w| w[1].volume <= w[0].volume));
    // breakpoints 3^{-k}/2 are nodes
    for k in 1..8 {
        let b = 0.5 * 3f64.powi(-k);
        assert!(
            t.samples.iter().any(|p| (p.t - b).abs() < 1e-12 * b),
            "k={k}"
        );
    }
    let p = sample_tube(&BoundedSet::PointSet { points: vec![0.0] }, 1e-6, 1.0, 8).unwrap();
    assert!(p
        .samples
        .iter()
        .all(|q| (q.volume - 2.0 * q.t).abs() < 1e-15 * q.t));
    let cs = sample_tube(
        &BoundedSet::CarpetComplement { level: Some(6) },
        1e-6,
        0.3,
        16,
    )
    .unwrap();
    let cut = 0.5 * 3f64.powi(-7);
    for q in &cs.samples {
        assert_eq!(q.exact, q.t >= cut, "t={}", q.t);
    }
    assert!(cs.samples.windows(2).all(|w| w[1].volume <= w[0].volume));
    assert!(matches!(
        sample_tube(&cantor(), 1e-4, 0.5, 4),
        Err(Error::InvalidParameters(_))
    ));
}

#[test]
fn csv_and_json_round_trip() {
    let t = sample_tube(&cantor(), 1e-30, 0.5, 8).unwrap();
    let back = TubeSamples::from_csv(1, &t.to_csv()).unwrap();
    assert_eq!(back, t);
    assert!(t.to_csv().starts_with("t,volume,exact\n"));
    let sets = vec![
        cantor(),
        BoundedSet::GeneralizedCantorIterate {
            m: 2,
            a: 0.25,
            level: Some(3),
        },
        BoundedSet::CarpetComplement { level: Some(4) },
        BoundedSet::IntervalUnion {
            intervals: vec![(0.0, 0.5)],
        },
        astring_set(),
    ];
    for s in sets {
        let j = serde_json::to_string(&s).unwrap();
        let b: BoundedSet = serde_json::from_str(&j).unwrap();
        assert_eq!(b, s);
    }
    let parsed: BoundedSet = serde_json::from_str(r#"{"kind": "cantor_iterate"}"#).unwrap();
    assert_eq!(parsed, cantor());
}

#[test]
fn tube_zeta_of_constant_and_power_laws() {
    let delta = 0.5;
    let k = 3.0;
    let tube = TubeSamples::from_fn(1, 1e-10, delta, 16, |_| k).unwrap();
    for s in [c(2.5, 1.0), c(1.2, -3.0)] {
        let z = tube_zeta_numeric(&tube, s, delta).unwrap();
        let want = rpow_f(delta, s - 1.0) * k / (s - 1.0);
        assert!(close(z.value, want, 1e-12), "{s}: {} vs {want}", z.value);
    }
    // |A_t| = 2t: zeta = 2 delta^s / s, the tail below t_min is exact
    let tube = TubeSamples::from_fn(1, 1e-6, delta, 8, |t| 2.0 * t).unwrap();
    let s = c(0.3, 2.0);
    let z = tube_zeta_numeric(&tube, s, delta).unwrap();
    assert!(close(z.value, rpow_f(delta, s) * 2.0 / s, 1e-12));
    assert!(z.dim_fit.abs() < 1e-9);
    assert!(matches!(
        tube_zeta_numeric(&tube, c(-0.1, 0.0), delta),
        Err(Error::DivergentAt(_))
    ));
    assert!(matches!(
        tube_zeta_numeric(&tube, s, 1.0),
        Err(Error::InsufficientSamples(_))
    ));
}

fn rpow_f(b: f64, s: Complex64) -> Complex64 {
    (s * b.ln()).exp()
}

#[test]
fn cantor_functional_equation_quick() {
    let a = cantor();
    let delta = 0.5;
    let tube = sample_tube(&a, 1e-120, delta, 16).unwrap();
    for s in [c(0.8, 0.0), c(1.3, 2.0), c(1.9, -0.5)] {
        let lhs = distance_zeta_1d(&a, s, delta).unwrap();
        let tz = tube_zeta_numeric(&tube, s, delta).unwrap().value;
        let rhs = rpow_f(delta, s - 1.0) * tube_volume(&a, delta).unwrap() + (1.0 - s) * tz;
        assert!((lhs - rhs).norm() < 1e-9, "{s}: {}", (lhs - rhs).norm());
    }
}
