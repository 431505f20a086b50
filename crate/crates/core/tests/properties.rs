use std::f64::consts::PI;

use proptest::prelude::*;

use steklov::asymptotics::{multiplicity_report, CLUSTER_TOL};
use steklov::dtn::{solve_mixed_steklov, MixedProblem, SolverParams};
use steklov::geometry::{boundary_data, double, make_family, BlobSymmetry, BoundaryData, FamilySpec, ReflectionAxis, Similarity, Vec2};
use steklov::model_spectra::{canonicalize, model_spectrum, recover_boundary_data, ExchangePair, ProblemKind};
use steklov::symmetry::quotient;

fn lengths(max: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.2f64..5.0, 0..=max)
}

fn exchange_pair() -> impl Strategy<Value = ExchangePair> {
    (lengths(3), lengths(3))
        .prop_filter("nonempty Steklov boundary", |(s, t)| !s.is_empty() || !t.is_empty())
        .prop_map(|(s, t)| ExchangePair::new(s, t))
}

fn sn_data(p: &ExchangePair) -> BoundaryData {
    BoundaryData { l_s: p.l_s.clone(), l_n: p.l_star.clone(), ..BoundaryData::default() }
}

proptest! {
    #[test]
    fn model_spectrum_is_sorted_and_nonnegative(p in exchange_pair(), k in 1usize..80) {
        let s = model_spectrum(&sn_data(&p), k).unwrap();
        prop_assert_eq!(s.len(), k);
        prop_assert!(s.is_sorted());
        prop_assert!(s.values.iter().all(|&v| v >= 0.0));
        // one zero mode per component
        let zeros = s.values.iter().filter(|&&v| v == 0.0).count();
        prop_assert_eq!(zeros, (p.n() + p.m()).min(k));
    }

    #[test]
    fn model_spectrum_scales_inversely(p in exchange_pair(), t in 0.1f64..10.0) {
        let d = sn_data(&p);
        let a = model_spectrum(&d, 60).unwrap();
        let b = model_spectrum(&d.scaled(t), 60).unwrap();
        for (x, y) in a.values.iter().zip(&b.values) {
            prop_assert!((x - y * t).abs() <= 1e-12 * x.abs().max(1.0));
        }
    }

    #[test]
    fn exchanges_preserve_model_spectrum_and_class(p in exchange_pair()) {
        let s = model_spectrum(&sn_data(&p), 120).unwrap();
        let class = canonicalize(&p);
        for q in p.neighbours() {
            let t = model_spectrum(&sn_data(&q), 120).unwrap();
            for (x, y) in s.values.iter().zip(&t.values) {
                prop_assert!((x - y).abs() <= 1e-12 * x.abs().max(1.0));
            }
            let other = canonicalize(&q);
            prop_assert_eq!(class.l_s.len(), other.l_s.len());
            for (x, y) in class.l_s.iter().chain(&class.l_star).zip(other.l_s.iter().chain(&other.l_star)) {
                prop_assert!((x - y).abs() <= 1e-9 * x.abs());
            }
        }
    }

    #[test]
    fn model_spectra_respect_multiplicity_bound(p in exchange_pair()) {
        let d = sn_data(&p);
        let s = model_spectrum(&d, 150).unwrap();
        prop_assert!(multiplicity_report(&s, CLUSTER_TOL, &d, 0).pass);
    }

    #[test]
    fn recovery_inverts_model_spectrum(
        circles in prop::collection::vec(1u32..=6, 0..=2),
        intervals in prop::collection::vec(1u32..=6, 0..=2),
        dirichlet in any::<bool>(),
    ) {
        prop_assume!(!circles.is_empty() || !intervals.is_empty());
        // commensurable lengths, as for polygons built from unit pieces
        let l_s: Vec<f64> = circles.iter().map(|&c| c as f64).collect();
        let l_star: Vec<f64> = intervals.iter().map(|&c| c as f64 * 0.5).collect();
        let (kind, data) = if dirichlet {
            (ProblemKind::Sd, BoundaryData { l_s: l_s.clone(), l_d: l_star.clone(), ..BoundaryData::default() })
        } else {
            (ProblemKind::Sn, BoundaryData { l_s: l_s.clone(), l_n: l_star.clone(), ..BoundaryData::default() })
        };
        let r = recover_boundary_data(&model_spectrum(&data, 200).unwrap(), kind, 1e-9).unwrap();
        let want = canonicalize(&ExchangePair::new(l_s, l_star));
        prop_assert_eq!(r.n, want.l_s.len());
        prop_assert_eq!(r.m, want.l_star.len());
        for (x, y) in r.class.l_s.iter().chain(&r.class.l_star).zip(want.l_s.iter().chain(&want.l_star)) {
            prop_assert!((x - y).abs() <= 1e-9 * y);
        }
    }

    #[test]
    fn family_tags_parse_back(k in 1usize..4, eps in 0.01f64..0.5, w in 0.1f64..4.0, h in 0.1f64..4.0) {
        for spec in [
            FamilySpec::GpChain { k, eps },
            FamilySpec::BandleChain { p: k + 2, m: k, eps },
            FamilySpec::Strip { w, h },
            FamilySpec::Disk { radius: w },
            FamilySpec::HalfDisk { radius: h, condition: "dirichlet".into() },
        ] {
            prop_assert_eq!(FamilySpec::parse(&spec.tag()).unwrap(), spec);
        }
    }

    #[test]
    fn boundary_data_follows_similarities(
        seed in 0u64..1000,
        t in 0.2f64..5.0,
        angle in -PI..PI,
        dx in -3.0f64..3.0,
        dy in -3.0f64..3.0,
    ) {
        let d = make_family(&FamilySpec::Strip { w: 1.0 + (seed % 7) as f64 * 0.3, h: 0.7 }).unwrap();
        let m = Similarity { scale: t, angle, reflect: false, shift: Vec2::new(dx, dy) };
        let image = d.transformed(&m);
        prop_assert!(boundary_data(&image).unwrap().approx_eq(&boundary_data(&d).unwrap().scaled(t), 1e-12));
        prop_assert!((image.steklov_mass() - t * d.steklov_mass()).abs() <= 1e-12 * t * d.steklov_mass());
    }

    #[test]
    fn quotient_then_double_restores_boundary_data(seed in 0u64..10_000) {
        let d = make_family(&FamilySpec::random_blob(seed, 5, 0.2, BlobSymmetry::Reflect)).unwrap();
        let axis = ReflectionAxis::horizontal(0.0);
        let q = quotient(&d, &axis, steklov::geometry::Condition::Neumann).unwrap();
        let back = double(&q.domain, &axis).unwrap();
        prop_assert!(boundary_data(&back).unwrap().approx_eq(&boundary_data(&d).unwrap(), 1e-12));
        prop_assert!((back.outer().signed_area() - d.outer().signed_area()).abs() <= 1e-10);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn normalized_spectrum_is_similarity_invariant(
        seed in 0u64..1000,
        t in 0.3f64..3.0,
        angle in -PI..PI,
        dx in -2.0f64..2.0,
    ) {
        let d = make_family(&FamilySpec::random_blob(seed, 4, 0.15, BlobSymmetry::None)).unwrap();
        let m = Similarity { scale: t, angle, reflect: seed % 2 == 1, shift: Vec2::new(dx, 0.5) };
        let image = d.transformed(&m);
        let params = SolverParams { k: 8, nodes_per_unit_length: 24.0, ..SolverParams::default() };
        let solve = |dom: steklov::geometry::PlanarDomain| {
            let l = dom.steklov_mass();
            let r = solve_mixed_steklov(&MixedProblem::new(dom, ProblemKind::Steklov).unwrap(), &params).unwrap();
            r.spectrum.values.iter().map(|v| v * l).collect::<Vec<_>>()
        };
        let (a, b) = (solve(d), solve(image));
        for (x, y) in a.iter().zip(&b).skip(1) {
            prop_assert!((x - y).abs() <= 1e-8 * x.abs(), "{x} vs {y}");
        }
    }

    #[test]
    fn steklov_eigenvalues_obey_weinstock(seed in 0u64..1000) {
        let d = make_family(&FamilySpec::random_blob(seed, 6, 0.2, BlobSymmetry::None)).unwrap();
        let l = d.steklov_mass();
        let params = SolverParams { k: 3, ..SolverParams::default() };
        let r = solve_mixed_steklov(&MixedProblem::new(d, ProblemKind::Steklov).unwrap(), &params).unwrap();
        prop_assert!(r.spectrum.values[0].abs() < 1e-8);
        prop_assert!(r.spectrum.values[1] * l <= 2.0 * PI * (1.0 + 1e-9));
    }
}
