use std::sync::Arc;

use proptest::prelude::*;

use ma_lab_core::covering::maximal_value;
use ma_lab_core::fit::decay_fit;
use ma_lab_core::good_sets::{distribution, good_sets, quasi_ratios, GoodSetOptions, Neighborhood};
use ma_lab_core::iteration::{check_sequence, recursion_bounds};
use ma_lab_core::section::{section, SectionScratch};
use ma_lab_core::{ConvexDomain, Grid, PotentialField, Region, ScalarField};

fn disc(h: f64) -> Arc<Grid> {
    Arc::new(Grid::new(ConvexDomain::disc(1.0).unwrap(), h).unwrap())
}

/// `|x|^2 / 2 + eps (x^4 + y^4) / 12 + shear x y`, convex for the ranges used.
fn potential(grid: &Arc<Grid>, eps: f64, shear: f64) -> PotentialField {
    PotentialField::from_fn(grid.clone(), |p| {
        0.5 * (p[0] * p[0] + p[1] * p[1])
            + eps * (p[0].powi(4) + p[1].powi(4)) / 12.0
            + shear * p[0] * p[1]
    })
    .unwrap()
}

fn trig_field(grid: &Arc<Grid>, a: [f64; 4]) -> ScalarField {
    ScalarField::from_fn(grid.clone(), |p| {
        a[0] + a[1] * (2.0 * p[0]).sin() + a[2] * (3.0 * p[1]).cos() + a[3] * p[0] * p[1]
    })
}

fn coeffs() -> impl Strategy<Value = [f64; 4]> {
    prop::array::uniform4(-2.0..2.0f64)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn norm_homogeneity(a in coeffs(), c in -10.0..10.0f64, p in prop_oneof![1.0..8.0f64, Just(f64::INFINITY)]) {
        let g = disc(1.0 / 16.0);
        let f = trig_field(&g, a);
        let lhs = f.scaled(c).lp_norm(p, &Region::Domain).unwrap();
        let rhs = c.abs() * f.lp_norm(p, &Region::Domain).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs.max(1e-300));
    }

    #[test]
    fn averaged_norms_increase_with_exponent(a in coeffs(), p in 1.0..4.0f64, dp in 0.1..4.0f64) {
        let g = disc(1.0 / 16.0);
        let f = trig_field(&g, a);
        let lo = g.mean_lp_norm(&f.values, p, &Region::Domain).unwrap();
        let hi = g.mean_lp_norm(&f.values, p + dp, &Region::Domain).unwrap();
        let top = g.mean_lp_norm(&f.values, f64::INFINITY, &Region::Domain).unwrap();
        prop_assert!(lo <= hi * (1.0 + 1e-12));
        prop_assert!(hi <= top * (1.0 + 1e-12));
    }

    #[test]
    fn sections_grow_with_height(
        eps in 0.0..0.5f64,
        shear in -0.3..0.3f64,
        node in 0usize..10_000,
        t1 in 0.01..0.3f64,
        dt in 0.0..0.3f64,
    ) {
        let g = disc(1.0 / 16.0);
        let pot = potential(&g, eps, shear);
        let x = g.active_nodes()[node % g.active_nodes().len()];
        let small = section(&pot, x, t1).unwrap();
        let big = section(&pot, x, t1 + dt).unwrap();
        prop_assert!(small.is_subset_of(&big));
    }

    #[test]
    fn good_sets_grow_with_m_and_local_sets_shrink_with_sigma(
        eps in 0.0..0.5f64,
        a in coeffs(),
        m1 in 0.0..5.0f64,
        dm in 0.0..5.0f64,
        s1 in 0.0..1.0f64,
        ds in 0.0..1.0f64,
    ) {
        let g = disc(1.0 / 12.0);
        let pot = potential(&g, eps, 0.0);
        let u = trig_field(&g, a);
        let good = good_sets(&pot, &u, &GoodSetOptions::default()).unwrap();
        let (small, big) = (good.contains(m1), good.contains(m1 + dm));
        prop_assert!(small.iter().zip(&big).all(|(s, b)| !s || *b));
        prop_assert!(good.complement_measure(m1 + dm) <= good.complement_measure(m1));

        let ratios = quasi_ratios(&pot, Neighborhood::default());
        let (wide, narrow) = (ratios.contains(s1), ratios.contains(s1 + ds));
        prop_assert!(narrow.iter().zip(&wide).all(|(n, w)| !n || *w));
    }

    #[test]
    fn f2_is_non_increasing_in_beta(eps in 0.0..0.5f64, a in coeffs(), m in 1.1..3.0f64) {
        let g = disc(1.0 / 12.0);
        let pot = potential(&g, eps, 0.0);
        let u = trig_field(&g, a);
        let good = good_sets(&pot, &u, &GoodSetOptions::default()).unwrap();
        let ratios = quasi_ratios(&pot, Neighborhood::default());
        let betas: Vec<f64> = (0..12).map(|k| 0.1 * 1.5f64.powi(k)).collect();
        let d = distribution(&good, &ratios, 1.0, m, &betas);
        prop_assert!(d.windows(2).all(|w| w[1].f2 <= w[0].f2));
    }

    #[test]
    fn maximal_function_is_monotone_and_homogeneous(
        eps in 0.0..0.5f64,
        a in coeffs(),
        bump in prop::array::uniform4(0.0..1.0f64),
        node in 0usize..10_000,
    ) {
        let g = disc(1.0 / 12.0);
        let pot = potential(&g, eps, 0.0);
        let f = trig_field(&g, a);
        // |f| <= |f| + |bump| pointwise
        let b = trig_field(&g, bump);
        let larger = ScalarField::new(
            g.clone(),
            f.values.iter().zip(&b.values).map(|(x, y)| x.abs() + y.abs()).collect(),
        )
        .unwrap();
        let x = g.active_nodes()[node % g.active_nodes().len()];
        let mut scratch = SectionScratch::new(&g);
        let cap = 0.5;
        let mf = maximal_value(&pot, &f.values, x, cap, &mut scratch);
        let ml = maximal_value(&pot, &larger.values, x, cap, &mut scratch);
        prop_assert!(mf <= ml * (1.0 + 1e-12));
        let m2 = maximal_value(&pot, &f.scaled(-2.0).values, x, cap, &mut scratch);
        prop_assert_eq!(m2, 2.0 * mf);
    }

    #[test]
    fn planted_decay_is_recovered(tau in 0.2..4.0f64, c in 0.1..10.0f64) {
        let samples: Vec<(f64, f64)> = (0..10)
            .map(|k| {
                let beta = 1.3f64.powi(k);
                (beta, c * beta.powf(-tau))
            })
            .collect();
        let fit = decay_fit(&samples, 0.0).unwrap();
        prop_assert!((fit.tau - tau).abs() <= 1e-9 * tau.max(1.0));
        prop_assert!((fit.c / c - 1.0).abs() <= 1e-9);
    }

    #[test]
    fn recursion_bounds_unroll(
        a1 in 0.0..10.0f64,
        b in prop::collection::vec(0.0..1.0f64, 1..12),
        eps0 in 0.01..0.49f64,
    ) {
        let s = (2.0 * eps0).sqrt();
        let bounds = recursion_bounds(a1, &b, eps0, b.len()).unwrap();
        let mut prev = a1;
        for (k, &bound) in bounds.iter().enumerate() {
            let step = s * (prev + b[k]);
            prop_assert!((bound - step).abs() <= 1e-12 * step.max(1.0));
            prev = bound;
        }
        // the extremal sequence is accepted, and raising any term is flagged
        let mut a = vec![a1];
        a.extend(&bounds);
        prop_assert_eq!(check_sequence(&a, &b, eps0).unwrap().first_violation, None);
        let k = b.len();
        a[k] = a[k] * 1.01 + 1e-3;
        prop_assert_eq!(check_sequence(&a, &b, eps0).unwrap().first_violation, Some(k + 1));
    }
}
