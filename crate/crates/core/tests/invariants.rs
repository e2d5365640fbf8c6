use fbdp::adm::build_psi;
use fbdp::linear::{extinction_cdf, pmf_linear, LinearParams};
use fbdp::special_fn::ml::ml_one;
use fbdp::RateModel;
use proptest::prelude::*;
use twofloat::TwoFloat;

fn table() -> impl Strategy<Value = RateModel> {
    (
        prop::collection::vec(0.0..5.0f64, 14),
        prop::collection::vec(0.0..5.0f64, 14),
    )
        .prop_map(|(mut l, mut m)| {
            l[0] = 0.0;
            m[0] = 0.0;
            RateModel::table(l, m).unwrap()
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn psi_rows_cancel(model in table()) {
        let psi = build_psi(&model, 12).unwrap();
        for k in 1..=12 {
            let mut prod = TwoFloat::from(1.0);
            for j in 1..=k {
                prod *= model.lambda_at(j).unwrap();
            }
            let full = psi.signed_row_sum(k, k + 1).unwrap();
            let scale = (0..=k + 1).map(|n| psi.get(n, k).unwrap()).fold(1.0, f64::max);
            prop_assert!(full.hi().abs() <= 1e-25 * scale);
            let part = psi.signed_row_sum(k, k).unwrap();
            prop_assert!(((part + prod).hi()).abs() <= 1e-9 * prod.hi().abs().max(1e-300));
            for n in 0..=k + 1 {
                prop_assert!(psi.get(n, k).unwrap() >= 0.0);
            }
        }
    }

    #[test]
    fn psi_homogeneous(model in table(), c in 0.1..4.0f64) {
        let a = build_psi(&model, 12).unwrap();
        let b = build_psi(&model.scaled(c).unwrap(), 12).unwrap();
        for k in 0..=12 {
            for n in 0..=k + 1 {
                let want = a.get(n, k).unwrap() * c.powi(k as i32);
                let got = b.get(n, k).unwrap();
                prop_assert!((got - want).abs() <= 1e-12 * want.abs());
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn pmf_sums_to_one(l in 0.1..2.0f64, m in 0.1..2.0f64, alpha in 0.3..1.0f64, t in 0.05..2.0f64) {
        let p = LinearParams::new(l, m, alpha).unwrap();
        let mut total = 0.0;
        let mut decayed = false;
        for n in 0..400 {
            let v = pmf_linear(&p, n, t, 10_000).unwrap();
            prop_assert!(v >= -1e-14, "n = {}: {}", n, v);
            total += v;
            if n > 20 && v < 1e-18 {
                decayed = true;
                break;
            }
        }
        // heavy supercritical tails need not decay within the window
        prop_assert!(total <= 1.0 + 1e-8, "total {}", total);
        if decayed {
            prop_assert!((total - 1.0).abs() < 1e-8, "total {}", total);
        }
    }

    #[test]
    fn extinction_cdf_is_monotone(l in 0.1..2.0f64, m in 0.1..2.0f64, alpha in 0.3..1.0f64) {
        let p = LinearParams::new(l, m, alpha).unwrap();
        let mut prev = 0.0;
        for i in 0..30 {
            let t = 0.01 * 1.3f64.powi(i);
            let v = extinction_cdf(&p, t).unwrap();
            prop_assert!(v >= prev - 1e-12, "t {}: {} < {}", t, v, prev);
            prop_assert!(v <= 1.0 + 1e-12);
            prev = v;
        }
    }

    #[test]
    fn ml_decreases_on_negative_axis(alpha in 0.2..1.0f64, x in 0.0..40.0f64, dx in 0.01..5.0f64) {
        let a = ml_one(alpha, -x).unwrap();
        let b = ml_one(alpha, -x - dx).unwrap();
        prop_assert!(b <= a + 1e-14);
        prop_assert!(b > 0.0 && a <= 1.0);
    }
}
