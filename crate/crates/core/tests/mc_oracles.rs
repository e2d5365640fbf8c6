//! Monte Carlo samplers against exact laws, and the sampling routes against
//! each other.

use fbdp::adm::pmf_adm;
use fbdp::linear::{
    classical_extinction, extinction_cdf_zero_asymptote, pmf_linear, LinearParams,
    SubordinatorModel,
};
use fbdp::mc::{
    extinction_time_samples, fbdp_pmf_mc_range, gillespie, positive_stable_cdf, replicates,
    sample_inverse_stable, sample_inverse_subordinator_path, sample_positive_stable,
    uniformization_pmf, ExtinctionSample, MCEstimate, PmfMode, RngSpec,
};
use fbdp::special_fn::gamma::gamma;
use fbdp::{FractionalOrder, RateModel};
use rand::Rng;

fn estimate(xs: &[f64]) -> MCEstimate {
    MCEstimate::from_samples(xs).unwrap()
}

#[test]
fn stable_laplace_transform() {
    let alpha = 0.7;
    let s = replicates(RngSpec::new(5, 0), 100_000, |rng| {
        sample_positive_stable(alpha, rng)
    })
    .unwrap();
    for eta in [0.5f64, 1.0, 2.0] {
        let xs: Vec<f64> = s.iter().map(|x| (-eta * x).exp()).collect();
        let e = estimate(&xs);
        let want = (-eta.powf(alpha)).exp();
        assert!(e.z_score(want) < 3.0, "eta {eta}: {e:?} vs {want}");
    }
}

#[test]
fn stable_tail_exponent() {
    // Pr{S > x} ~ x^{-α} / Γ(1-α)
    let alpha = 0.6;
    let n = 200_000;
    let s = replicates(RngSpec::new(6, 0), n, |rng| sample_positive_stable(alpha, rng)).unwrap();
    let x = 1e4f64;
    let frac = s.iter().filter(|v| **v > x).count() as f64 / n as f64;
    let want = x.powf(-alpha) / gamma(1.0 - alpha);
    let exact = 1.0 - positive_stable_cdf(alpha, x).unwrap();
    assert!((exact / want - 1.0).abs() < 0.01);
    let sd = (want * (1.0 - want) / n as f64).sqrt();
    assert!((frac - exact).abs() < 3.0 * sd, "{frac} vs {exact}");
}

#[test]
fn inverse_stable_mean() {
    let (alpha, t) = (0.6, 2.0f64);
    let xs = replicates(RngSpec::new(7, 0), 100_000, |rng| {
        sample_inverse_stable(alpha, t, rng)
    })
    .unwrap();
    let want = t.powf(alpha) / gamma(1.0 + alpha);
    assert!(estimate(&xs).z_score(want) < 3.0);
}

#[test]
fn gillespie_extinction_matches_classical() {
    let m = RateModel::linear(0.5, 1.0).unwrap();
    let xs = replicates(RngSpec::new(8, 0), 100_000, |rng| {
        let p = gillespie(&m, 1.0, rng)?;
        for w in p.jump_times.windows(2) {
            assert!(w[1] >= w[0]);
        }
        assert_eq!(
            p.births as i64 - p.deaths as i64,
            *p.states.last().unwrap() as i64 - 1
        );
        Ok(if *p.states.last().unwrap() == 0 { 1.0 } else { 0.0 })
    })
    .unwrap();
    let want = classical_extinction(0.5, 1.0, 1.0).unwrap();
    assert!(estimate(&xs).z_score(want) < 3.0);
}

#[test]
fn pmf_modes_agree_with_closed_form() {
    let m = RateModel::linear(0.5, 1.0).unwrap();
    let p = LinearParams::new(0.5, 1.0, 0.7).unwrap();
    let n = 40_000;
    let path = fbdp_pmf_mc_range(&m, 0.7, 3, 1.0, n, RngSpec::new(9, 0), PmfMode::Path).unwrap();
    let uni = fbdp_pmf_mc_range(
        &m,
        0.7,
        3,
        1.0,
        n,
        RngSpec::new(9, 1),
        PmfMode::Uniformization { n_max: 200 },
    )
    .unwrap();
    for k in 0..=3 {
        let want = pmf_linear(&p, k, 1.0, 10_000).unwrap();
        let (a, b) = (path[k], uni[k]);
        let combined = (a.stderr.powi(2) + b.stderr.powi(2)).sqrt();
        assert!((a.mean - b.mean).abs() < 3.0 * combined, "n = {k}");
        assert!(b.z_score(want) < 3.0, "n = {k}: {b:?} vs {want}");
        // conditioning on the time change can only lower the variance
        assert!(b.stderr <= a.stderr);
    }
}

#[test]
fn adm_matches_uniformization_on_random_tables() {
    let mut rng = RngSpec::new(10, 0).rng();
    let one = FractionalOrder::new(1.0).unwrap();
    for _ in 0..20 {
        let mut l = vec![0.0; 13];
        let mut mu = vec![0.0; 13];
        for j in 1..=12 {
            l[j] = rng.random_range(0.0..=5.0);
            mu[j] = rng.random_range(0.0..=5.0);
        }
        let model = RateModel::table(l, mu).unwrap();
        let u = uniformization_pmf(&model, 12, 0.1).unwrap();
        for n in 0..=6 {
            let (v, _) = pmf_adm(&model, one, n, 0.1, 12, 1e-16).unwrap();
            assert!((v - u.get(n)).abs() < 1e-6, "n = {n}: {v} vs {}", u.get(n));
        }
    }
}

#[test]
fn extinction_near_zero_quantile() {
    // the empirical cdf is exactly 1e-3 at its 0.1% quantile
    let (alpha, l, m) = (0.6, 0.5, 1.0);
    let sub = SubordinatorModel::stable(alpha).unwrap();
    let n = 1_000_000;
    let s = extinction_time_samples(&sub, l, m, f64::INFINITY, n, RngSpec::new(11, 0)).unwrap();
    let mut times: Vec<f64> = s
        .iter()
        .map(|x| match x {
            ExtinctionSample::Finite(v) => *v,
            ExtinctionSample::Censored => f64::INFINITY,
        })
        .collect();
    times.sort_by(f64::total_cmp);
    let q = times[n / 1000 - 1];
    let ratio = 1e-3 / extinction_cdf_zero_asymptote(&sub, l, m, q).unwrap();
    assert!((ratio - 1.0).abs() < 0.1, "ratio {ratio} at q = {q}");
}

/// Kolmogorov distance between the empirical law of `xs` and the exact law
/// of E(t), Pr{E(t) ≤ x} = 1 - F_S(t x^{-1/α}), read at 1000 order statistics.
fn ks_inverse_stable(mut xs: Vec<f64>, alpha: f64, t: f64) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len();
    let mut d = 0.0f64;
    for i in 1..=1000 {
        let k = i * n / 1000 - 1;
        let x = xs[k];
        let f = 1.0 - positive_stable_cdf(alpha, t * x.powf(-1.0 / alpha)).unwrap();
        let lo = k as f64 / n as f64;
        let hi = (k + 1) as f64 / n as f64;
        d = d.max((f - lo).abs()).max((f - hi).abs());
    }
    d
}

#[test]
fn subordinator_path_matches_exact_inverse_stable() {
    let (alpha, t) = (0.6, 1.0);
    let sub = SubordinatorModel::stable(alpha).unwrap();
    let n = 100_000;
    let path = replicates(RngSpec::new(12, 0), n, |rng| {
        sample_inverse_subordinator_path(&sub, t, 2e-3, rng)
    })
    .unwrap();
    let exact = replicates(RngSpec::new(12, 1), n, |rng| {
        sample_inverse_stable(alpha, t, rng)
    })
    .unwrap();
    let d_path = ks_inverse_stable(path, alpha, t);
    let d_exact = ks_inverse_stable(exact, alpha, t);
    assert!(d_exact < 0.01, "{d_exact}");
    assert!(d_path < 0.01, "{d_path}");
}
