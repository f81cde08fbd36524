use super::*;
use num_complex::Complex64;
use proptest::prelude::*;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn cantor() -> FractalString {
    build(&StringSpec::CantorString).unwrap()
}

fn cantor_closed(s: Complex64) -> Complex64 {
    let t = (-s * 3f64.ln()).exp();
    t / (1.0 - 2.0 * t)
}

#[test]
fn cantor_lengths_and_multiplicities() {
    let g: Vec<Group> = cantor().groups().take(4).collect();
    for (k, g) in g.iter().enumerate() {
        assert!((g.length - 3f64.powi(-(k as i32 + 1))).abs() < 1e-16);
        assert_eq!(g.multiplicity, 2f64.powi(k as i32));
    }
    let l: Vec<f64> = cantor().lengths().take(7).collect();
    assert_eq!(l.len(), 7);
    assert!(
        (l[1] - 1.0 / 9.0).abs() < 1e-16
            && (l[2] - 1.0 / 9.0).abs() < 1e-16
            && (l[6] - 1.0 / 27.0).abs() < 1e-16
    );
}

#[test]
fn tensor_with_trivial_one_is_identity() {
    let spec = StringSpec::Tensor {
        left: Box::new(StringSpec::Trivial { length: 1.0 }),
        right: Box::new(StringSpec::CantorString),
    };
    let t = build(&spec).unwrap();
    let a: Vec<Group> = t.groups().take(30).collect();
    let b: Vec<Group> = cantor().groups().take(30).collect();
    assert_eq!(a, b);
}

#[test]
fn tensor_cantor_cantor_matches_brute_force() {
    // all pairwise products of the first 12 Cantor levels, sorted
    let levels: Vec<(f64, f64)> = (1..=12)
        .map(|k| (3f64.powi(-k), 2f64.powi(k - 1)))
        .collect();
    let mut brute: Vec<f64> = Vec::new();
    for &(l1, m1) in &levels {
        for &(l2, m2) in &levels {
            for _ in 0..(m1 * m2) as usize {
                brute.push(l1 * l2);
            }
        }
    }
    brute.sort_by(|a, b| b.total_cmp(a));
    let spec = StringSpec::Tensor {
        left: Box::new(StringSpec::CantorString),
        right: Box::new(StringSpec::CantorString),
    };
    let t = build(&spec).unwrap();
    // products of two levels with i + j <= 13 are complete in the brute list
    let got: Vec<f64> = t
        .lengths()
        .take_while(|&l| l >= 3f64.powi(-13) * 0.999)
        .collect();
    let want: Vec<f64> = brute
        .iter()
        .copied()
        .take_while(|&l| l >= 3f64.powi(-13) * 0.999)
        .collect();
    assert_eq!(got.len(), want.len());
    for (g, w) in got.iter().zip(&want) {
        assert!((g - w).abs() <= 1e-15 * w);
    }
    assert!((got[0] - 1.0 / 9.0).abs() < 1e-16);
    assert!(got[1..5].iter().all(|&l| (l - 1.0 / 27.0).abs() < 1e-16));
}

#[test]
fn moran_counts_words() {
    // (1/3) L(1/3, 1/3) is the Cantor string
    let spec = StringSpec::ExtendedSelfSimilar {
        base: Box::new(StringSpec::Trivial { length: 1.0 / 3.0 }),
        ratios: vec![1.0 / 3.0, 1.0 / 3.0],
    };
    let l = build(&spec).unwrap();
    let a: Vec<Group> = l.groups().take(20).collect();
    let b: Vec<Group> = cantor().groups().take(20).collect();
    for (x, y) in a.iter().zip(&b) {
        assert!((x.length - y.length).abs() < 1e-16 && x.multiplicity == y.multiplicity);
    }
}

#[test]
fn moran_unequal_ratios_match_word_enumeration() {
    let r = [0.5, 0.3, 0.1];
    // brute force: every word up to length 14, keep lengths >= 1e-3
    let mut words = vec![1.0f64];
    let mut frontier = vec![1.0f64];
    for _ in 0..14 {
        let next: Vec<f64> = frontier
            .iter()
            .flat_map(|&l| r.iter().map(move |&q| l * q))
            .filter(|&l| l >= 1e-3)
            .collect();
        words.extend(&next);
        frontier = next;
    }
    words.sort_by(|a, b| b.total_cmp(a));
    let spec = StringSpec::ExtendedSelfSimilar {
        base: Box::new(StringSpec::Trivial { length: 1.0 }),
        ratios: r.to_vec(),
    };
    let l = build(&spec).unwrap();
    let got: Vec<f64> = l.lengths().take_while(|&x| x >= 1e-3).collect();
    assert_eq!(got.len(), words.len());
    for (g, w) in got.iter().zip(&words) {
        assert!((g - w).abs() < 1e-15);
    }
    let (n, s) = l.count_sum_at_least(1e-3).unwrap();
    assert_eq!(n, words.len() as f64);
    assert!((s - words.iter().sum::<f64>()).abs() < 1e-12);
}

#[test]
fn total_lengths() {
    assert_eq!(
        total_length(&build(&StringSpec::AString { a: 1.0 }).unwrap(), 1e-12).unwrap(),
        1.0
    );
    assert!((total_length(&cantor(), 1e-12).unwrap() - 1.0).abs() < 1e-15);
    let hyper = StringSpec::Hyperfractal {
        dim: 0.5,
        m: IntSequence::Arithmetic { first: 2, step: 1 },
        c: RealSequence::Geometric {
            first: 0.5,
            ratio: 0.5,
        },
        components: Some(40),
    };
    let h = build(&hyper).unwrap();
    assert!((total_length(&h, 1e-12).unwrap() - 1.0).abs() < 1e-15);
    // the built part alone misses exactly the omitted mass 2^-40
    let (_, built) = h.count_sum_at_least(1e-300).unwrap();
    assert!((1.0 - built - h.omitted_mass()).abs() < 1e-13);
}

#[test]
fn total_length_certified_without_hint() {
    let l = build(&StringSpec::Finite {
        lengths: vec![0.5, 0.25, 0.25, 0.125],
    })
    .unwrap();
    assert_eq!(total_length(&l, 1e-9).unwrap(), 1.125);
}

#[test]
fn cantor_zeta_examples() {
    let l = cantor();
    assert!((geometric_zeta_partial(&l, c(1.0, 0.0), 1e-12).unwrap() - 1.0).norm() < 1e-11);
    assert!((geometric_zeta_partial(&l, c(2.0, 0.0), 1e-12).unwrap() - 1.0 / 7.0).norm() < 1e-12);
    let t = build(&StringSpec::Trivial { length: 1.0 }).unwrap();
    assert!((geometric_zeta_partial(&t, c(-3.0, 5.0), 1e-12).unwrap() - 1.0).norm() < 1e-15);
}

#[test]
fn cantor_zeta_off_axis() {
    let l = cantor();
    let d = 2f64.ln() / 3f64.ln();
    for &(re, im) in &[(d + 0.1, 0.0), (d + 0.1, 7.0), (0.9, -20.0), (1.5, 3.0)] {
        let s = c(re, im);
        let z = geometric_zeta_partial_detailed(&l, s, 1e-10).unwrap();
        assert!(
            (z.value - cantor_closed(s)).norm() <= 1e-10 + 1e-13,
            "{s}: {} vs {}",
            z.value,
            cantor_closed(s)
        );
    }
}

#[test]
fn not_convergent_below_abscissa() {
    let err = geometric_zeta_partial(&cantor(), c(0.6, 0.0), 1e-6).unwrap_err();
    assert!(matches!(err, Error::NotConvergent { .. }));
}

#[test]
fn abscissa_examples() {
    let a = abscissa_estimate(&build(&StringSpec::AString { a: 2.0 }).unwrap());
    assert!(a.analytic && (a.value - 1.0 / 3.0).abs() < 1e-15);
    let g =
        abscissa_estimate(&build(&StringSpec::GeneralizedCantor { m: 2, a: 1.0 / 3.0 }).unwrap());
    assert!((g.value - 0.6309297535714574).abs() < 1e-12);
    let t = StringSpec::Tensor {
        left: Box::new(StringSpec::CantorString),
        right: Box::new(StringSpec::AString { a: 1.0 }),
    };
    assert!((abscissa_estimate(&build(&t).unwrap()).value - 2f64.ln() / 3f64.ln()).abs() < 1e-12);
    let e = StringSpec::ExtendedSelfSimilar {
        base: Box::new(StringSpec::AString { a: 3.0 }),
        ratios: vec![0.25, 0.25],
    };
    assert!((abscissa_estimate(&build(&e).unwrap()).value - 0.5).abs() < 1e-12);
}

#[test]
fn fitted_abscissa_of_power_law() {
    // l_j = j^{-2}: D = 1/2
    let l: Vec<f64> = (1..=20000).map(|j| (j as f64).powi(-2)).collect();
    let a = fit_abscissa(&l).unwrap();
    assert!((a.value - 0.5).abs() < 1e-9);
    let (lo, hi) = a.interval.unwrap();
    assert!(lo <= a.value && a.value <= hi);
}

#[test]
fn nth_order_cantor_closed_form() {
    for n in 1..=3u32 {
        let l = build(&StringSpec::NthOrderCantor { n }).unwrap();
        for &s in &[c(1.2, 0.0), c(1.0, 2.0), c(0.8, -1.0)] {
            let t = (s * 3f64.ln()).exp();
            let closed = ((s * ((n - 1) as f64)) * 3f64.ln()).exp() / (t - 2.0).powi(n as i32);
            let z = geometric_zeta_partial(&l, s, 1e-10).unwrap();
            assert!((z - closed).norm() < 1e-9, "n={n} s={s}: {z} vs {closed}");
        }
    }
}

#[test]
fn extended_self_similar_zeta_formula() {
    let ratios = vec![0.4, 0.2, 0.1];
    let spec = StringSpec::ExtendedSelfSimilar {
        base: Box::new(StringSpec::AString { a: 2.0 }),
        ratios: ratios.clone(),
    };
    let l = build(&spec).unwrap();
    let s = c(2.3, 0.7);
    let z0 = astring::zeta_continued(2.0, s);
    let h: Complex64 = ratios.iter().map(|&r| crate::numeric::rpow(r, s)).sum();
    let want = z0 / (1.0 - h);
    let got = geometric_zeta_partial(&l, s, 1e-11).unwrap();
    assert!((got - want).norm() < 2e-11, "{got} vs {want}");
}

#[test]
fn tail_bounds_dominate_true_tails() {
    let specs = vec![
        (StringSpec::CantorString, c(0.75, 0.0)),
        (StringSpec::AString { a: 1.0 }, c(0.8, 0.0)),
        (StringSpec::GeneralizedCantor { m: 3, a: 0.2 }, c(0.9, 0.0)),
        (StringSpec::NthOrderCantor { n: 2 }, c(0.9, 0.0)),
        (
            StringSpec::ExtendedSelfSimilar {
                base: Box::new(StringSpec::CantorString),
                ratios: vec![0.5, 0.2],
            },
            c(1.1, 0.0),
        ),
    ];
    for (spec, s) in specs {
        let l = build(&spec).unwrap();
        let full = geometric_zeta(&l, s, 1e-13).unwrap().value.re;
        let mut prev = f64::INFINITY;
        for k in 1..25 {
            let theta = l.first_length() * 0.37f64.powi(k);
            let head = l.partial_sum(s, theta).unwrap().re;
            let b = l.tail_bound(s.re, theta).unwrap();
            assert!(
                full - head <= b * (1.0 + 1e-9) + 1e-12,
                "{spec:?} theta={theta}: tail {} bound {b}",
                full - head
            );
            assert!(b <= prev * (1.0 + 1e-12), "bound not monotone for {spec:?}");
            prev = b;
        }
    }
}

#[test]
fn mass_below_matches_enumeration() {
    let specs = vec![
        StringSpec::CantorString,
        StringSpec::AString { a: 1.0 },
        StringSpec::GeneralizedCantor { m: 3, a: 0.2 },
        StringSpec::NthOrderCantor { n: 2 },
        StringSpec::ExtendedSelfSimilar {
            base: Box::new(StringSpec::CantorString),
            ratios: vec![0.5, 0.2],
        },
        StringSpec::Scaled {
            c: 2.0,
            inner: Box::new(StringSpec::AString { a: 2.0 }),
        },
    ];
    for spec in specs {
        let l = build(&spec).unwrap();
        let total = l.total_length_hint().unwrap();
        for x in [0.3, 0.05, 1e-3] {
            let head: f64 = l
                .groups()
                .take_while(|g| g.length >= x)
                .map(|g| g.length * g.multiplicity)
                .sum();
            let m = l.mass_below(x).unwrap();
            assert!(
                (m - (total - head)).abs() < 1e-12,
                "{spec:?} x={x}: {m} vs {}",
                total - head
            );
        }
        // no cancellation far below
        let tiny = l.mass_below(1e-40).unwrap();
        assert!(tiny > 0.0 && tiny < 1e-8, "{spec:?}: {tiny}");
    }
}

#[test]
fn astring_accelerated_matches_certified_far_right() {
    let l = build(&StringSpec::AString { a: 1.0 }).unwrap();
    let s = c(2.0, 1.0);
    let a = geometric_zeta(&l, s, 1e-13).unwrap().value;
    let b = geometric_zeta_partial(&l, s, 1e-11).unwrap();
    assert!((a - b).norm() < 2e-11);
}

#[test]
fn astring_accelerated_near_abscissa() {
    let l = build(&StringSpec::AString { a: 1.0 }).unwrap();
    let s = c(0.6, 2.0);
    let z = geometric_zeta(&l, s, 1e-12).unwrap();
    assert!((z.value - astring::zeta_continued(1.0, s)).norm() < 1e-12);
    // the certified route cannot get there within the group budget
    assert!(matches!(
        geometric_zeta_partial(&l, s, 1e-10),
        Err(Error::BudgetExceeded(_))
    ));
}

#[test]
fn hyperfractal_zeta_and_tail() {
    let spec = StringSpec::Hyperfractal {
        dim: 0.5,
        m: IntSequence::Arithmetic { first: 2, step: 1 },
        c: RealSequence::Geometric {
            first: 0.5,
            ratio: 0.5,
        },
        components: Some(30),
    };
    let l = build(&spec).unwrap();
    assert!((abscissa_estimate(&l).value - 0.5).abs() < 1e-15);
    let s = c(1.5, 0.0);
    // components by closed form: c^s (m-1) g^s / (1 - m a^s)
    let mut want = 0.0;
    for k in 1..400 {
        let m = (k + 1) as f64;
        let a = m.powf(-2.0);
        let g = (1.0 - m * a) / (m - 1.0);
        want += 0.5f64.powi(k).powf(1.5) * (m - 1.0) * g.powf(1.5) / (1.0 - m * a.powf(1.5));
    }
    let got = geometric_zeta_partial(&l, s, 1e-10).unwrap();
    assert!((got.re - want).abs() < 1e-10, "{got} vs {want}");
    // below the omitted-component bound no certificate exists
    assert!(matches!(total_length(&build(&StringSpec::Hyperfractal {
        dim: 0.5,
        m: IntSequence::List(vec![2, 3]),
        c: RealSequence::List(vec![0.5, 0.25, 0.125]),
        components: None,
    }).unwrap(), 1e-9), Ok(t) if (t - 0.75).abs() < 1e-15));
}

#[test]
fn invalid_specs_rejected() {
    assert!(build(&StringSpec::GeneralizedCantor { m: 3, a: 0.34 }).is_err());
    assert!(build(&StringSpec::ExtendedSelfSimilar {
        base: Box::new(StringSpec::CantorString),
        ratios: vec![0.5, 0.5]
    })
    .is_err());
    assert!(build(&StringSpec::Trivial { length: 0.0 }).is_err());
    assert!(build(&StringSpec::AString { a: -1.0 }).is_err());
}

#[test]
fn spec_json_round_trip() {
    let spec = StringSpec::Tensor {
        left: Box::new(StringSpec::Scaled {
            c: 0.5,
            inner: Box::new(StringSpec::CantorString),
        }),
        right: Box::new(StringSpec::Hyperfractal {
            dim: 0.5,
            m: IntSequence::Arithmetic { first: 2, step: 1 },
            c: RealSequence::List(vec![0.5, 0.25]),
            components: None,
        }),
    };
    let j = serde_json::to_string(&spec).unwrap();
    assert!(j.contains("\"kind\":\"tensor\""));
    let back: StringSpec = serde_json::from_str(&j).unwrap();
    assert_eq!(back, spec);
    let a: StringSpec = serde_json::from_str(r#"{"kind":"a_string","a":1.0}"#).unwrap();
    assert_eq!(a, StringSpec::AString { a: 1.0 });
}

#[test]
fn enumeration_is_nonincreasing() {
    let specs = vec![
        StringSpec::CantorString,
        StringSpec::AString { a: 0.5 },
        StringSpec::NthOrderCantor { n: 3 },
        StringSpec::Union {
            parts: vec![
                StringSpec::CantorString,
                StringSpec::AString { a: 2.0 },
                StringSpec::Trivial { length: 0.2 },
            ],
        },
        StringSpec::Tensor {
            left: Box::new(StringSpec::AString { a: 1.0 }),
            right: Box::new(StringSpec::GeneralizedCantor { m: 4, a: 0.1 }),
        },
        StringSpec::ExtendedSelfSimilar {
            base: Box::new(StringSpec::CantorString),
            ratios: vec![0.3, 0.2, 0.2, 0.1],
        },
        StringSpec::Hyperfractal {
            dim: 0.7,
            m: IntSequence::Arithmetic { first: 2, step: 2 },
            c: RealSequence::Geometric {
                first: 0.3,
                ratio: 0.6,
            },
            components: Some(10),
        },
    ];
    for spec in specs {
        let l = build(&spec).unwrap();
        let v: Vec<f64> = l.lengths().take(10_000).collect();
        assert_eq!(v.len(), 10_000);
        assert!(v.windows(2).all(|w| w[0] >= w[1]), "{spec:?}");
    }
}

fn finite_strategy() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.01f64..1.0, 1..12)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn tensor_is_multiplicative(a in finite_strategy(), b in finite_strategy(), re in 1.0f64..3.0, im in -10.0f64..10.0) {
        let s = c(re, im);
        let la = build(&StringSpec::Finite { lengths: a.clone() }).unwrap();
        let lb = build(&StringSpec::Finite { lengths: b.clone() }).unwrap();
        let t = build(&StringSpec::Tensor { left: Box::new(StringSpec::Finite { lengths: a }), right: Box::new(StringSpec::Finite { lengths: b }) }).unwrap();
        let za = geometric_zeta_partial(&la, s, 1e-12).unwrap();
        let zb = geometric_zeta_partial(&lb, s, 1e-12).unwrap();
        let zt = geometric_zeta_partial(&t, s, 1e-12).unwrap();
        prop_assert!((zt - za * zb).norm() < 1e-11 * (1.0 + (za * zb).norm()));
    }

    #[test]
    fn union_is_additive(a in finite_strategy(), b in finite_strategy(), re in 0.5f64..3.0, im in -10.0f64..10.0) {
        let s = c(re, im);
        let la = build(&StringSpec::Finite { lengths: a.clone() }).unwrap();
        let lb = build(&StringSpec::Finite { lengths: b.clone() }).unwrap();
        let u = build(&StringSpec::Union { parts: vec![StringSpec::Finite { lengths: a.clone() }, StringSpec::Finite { lengths: b.clone() }] }).unwrap();
        let z = geometric_zeta_partial(&u, s, 1e-12).unwrap();
        let w = geometric_zeta_partial(&la, s, 1e-12).unwrap() + geometric_zeta_partial(&lb, s, 1e-12).unwrap();
        prop_assert!((z - w).norm() < 1e-12 * (1.0 + w.norm()));
        let ta = total_length(&la, 1e-12).unwrap();
        let tb = total_length(&lb, 1e-12).unwrap();
        let tu = total_length(&u, 1e-12).unwrap();
        prop_assert!((tu - (ta + tb)).abs() <= 1e-14 * tu);
    }

    #[test]
    fn scaling_law(ci in 0usize..3, re in 0.75f64..2.5, im in -15.0f64..15.0) {
        let cs = [1.0 / 3.0, 0.5, 2.0][ci];
        let s = c(re, im);
        let l = cantor();
        let sc = build(&StringSpec::Scaled { c: cs, inner: Box::new(StringSpec::CantorString) }).unwrap();
        let z = geometric_zeta_partial(&sc, s, 1e-11).unwrap();
        let w = crate::numeric::rpow(cs, s) * geometric_zeta_partial(&l, s, 1e-11).unwrap();
        prop_assert!((z - w).norm() < 1e-10);
    }
}
