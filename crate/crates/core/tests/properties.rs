use kgframe::constructions::{random_kg_system, scale_dual_weights, scale_weights};
use kgframe::duals::{approx_defect, canonical_kg_dual, exactify_dual, perturbed_dual};
use kgframe::gsystem::bisect_kg_lower;
use kgframe::linops::{adjoint, eig_extremes, min_singular_value, op_norm, Operator};
use kgframe::random::{complex_gaussian_vector, rng};
use kgframe::redundancy::{brute_force_erasure_search, erasure_invertibility};
use kgframe::KGSystem;
use num_complex::Complex64;
use proptest::prelude::*;

fn instance() -> impl Strategy<Value = KGSystem> {
    (
        2usize..=7,
        prop::collection::vec(1usize..=3, 2..=5),
        any::<u64>(),
    )
        .prop_flat_map(|(n, dims, seed)| {
            let total: usize = dims.iter().sum();
            (1..=n.min(total)).prop_map(move |rank| {
                random_kg_system(n, &dims, rank, seed).expect("generation succeeds")
            })
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn optimal_bounds_sandwich_random_vectors(ksys in instance(), seed in any::<u64>()) {
        let b = ksys.optimal_bounds();
        let a = b.kg_lower_opt.expect("generated systems are KG-frames");
        let mut r = rng(seed);
        for _ in 0..20 {
            let f = complex_gaussian_vector(&mut r, ksys.ambient_dim());
            let energy = ksys.system().analysis(&f).unwrap().norm_squared();
            let lower = a * (adjoint(ksys.k()) * &f).norm_squared();
            let upper = b.bessel_upper_opt * f.norm_squared();
            let scale = 1e-9 * upper.max(1.0);
            prop_assert!(lower <= energy + scale);
            prop_assert!(energy <= upper + scale);
        }
    }

    #[test]
    fn douglas_agrees_with_bisection(ksys in instance()) {
        let douglas = ksys.optimal_bounds().kg_lower_opt.unwrap();
        let bisect = bisect_kg_lower(&ksys, 1e-10);
        prop_assert!((douglas - bisect).abs() <= 1e-7 * douglas.max(1.0),
            "douglas {} bisection {}", douglas, bisect);
    }

    #[test]
    fn bounded_below_adjoint_implies_g_frame(ksys in instance()) {
        let cls = ksys.classify(1e-8);
        if cls.kstar_lower > 1e-6 {
            prop_assert!(cls.g_frame_implied);
            prop_assert!(cls.is_g_frame);
            let a = cls.bounds.kg_lower_opt.unwrap();
            prop_assert!(cls.bounds.g_lower_opt >= a * cls.kstar_lower.powi(2) * (1.0 - 1e-8));
        }
    }

    #[test]
    fn canonical_dual_is_exact_and_exactify_is_idempotent(ksys in instance(), seed in any::<u64>()) {
        let theta = canonical_kg_dual(&ksys).unwrap();
        let cert = approx_defect(ksys.system(), &theta, ksys.k()).unwrap();
        prop_assert!(cert.is_exact_dual && cert.defect <= 1e-9);
        let again = exactify_dual(ksys.system(), &theta, ksys.k()).unwrap();
        let cert2 = approx_defect(ksys.system(), &again, ksys.k()).unwrap();
        prop_assert!(cert2.defect <= 1e-9);

        let eps = 0.5;
        let perturbed = perturbed_dual(&ksys, eps, seed).unwrap();
        let c = approx_defect(ksys.system(), &perturbed, ksys.k()).unwrap();
        prop_assert!((c.defect - eps).abs() <= 1e-9);
        prop_assert!(c.leakage <= 1e-9);
        prop_assert!(c.interchange_defect <= c.defect + 1e-12);
    }

    #[test]
    fn weighted_pairs_keep_the_mixed_operator(ksys in instance(), seed in any::<u64>()) {
        let theta = perturbed_dual(&ksys, 0.4, seed).unwrap();
        let mut r = rng(seed);
        let w: Vec<Complex64> = (0..ksys.system().len())
            .map(|_| complex_gaussian_vector(&mut r, 1)[0] + Complex64::new(0.1, 0.0))
            .collect();
        let (weighted, _) = scale_weights(&ksys, &w).unwrap();
        let theta_w = scale_dual_weights(&theta, &w).unwrap();
        let m = ksys.system().mixed_operator(&theta).unwrap();
        let mw = weighted.system().mixed_operator(&theta_w).unwrap();
        prop_assert!(op_norm(&(m - mw)) <= 1e-8 * (1.0 + op_norm(&ksys.system().frame_operator())));
    }

    #[test]
    fn frame_operator_is_hermitian_psd(ksys in instance()) {
        let s = ksys.system().frame_operator();
        prop_assert!(op_norm(&(&s - adjoint(&s))) <= 1e-12 * op_norm(&s).max(1.0));
        let (lo, _) = eig_extremes(&s);
        prop_assert!(lo >= -1e-10 * op_norm(&s).max(1.0));
    }
}

#[test]
fn invertibility_criterion_matches_brute_force_on_full_rank_k() {
    for seed in 0..20u64 {
        let dims = [1, 2, 1, 2, 1];
        let ksys = random_kg_system(4, &dims, 4, 900 + seed).unwrap();
        assert_full_rank(ksys.k());
        let truth = brute_force_erasure_search(&ksys, 3).unwrap();
        for report in truth.iter().filter(|r| !r.removed.is_empty()) {
            let inv = erasure_invertibility(&ksys, &report.removed).unwrap();
            assert_eq!(
                inv.survives, report.survives,
                "seed {seed}, removed {:?}",
                report.removed
            );
            if let (Some(p), Some(a)) = (inv.predicted_lower_bound, report.actual_lower_bound) {
                assert!(p <= a + 1e-8, "seed {seed}: predicted {p} > actual {a}");
            }
        }
    }
}

fn assert_full_rank(k: &Operator) {
    assert!(min_singular_value(k) > 1e-8);
}
