use std::ffi::CStr;
use std::ptr;

use fbdp_ffi::*;

fn last_error() -> String {
    let p = fbdp_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn ml_matches_exponential() {
    let mut v = 0.0;
    assert_eq!(unsafe { fbdp_ml(1.0, 1.0, -2.0, &mut v) }, FbdpStatus::Ok);
    assert!((v - (-2.0f64).exp()).abs() < 1e-15);
}

#[test]
fn errors_map_to_codes() {
    let mut v = 0.0;
    let s = unsafe { fbdp_pmf_linear(1.0, 0.5, 1.5, 1, 1.0, &mut v) };
    assert_eq!(s, FbdpStatus::AlphaOutOfRange);
    assert!(last_error().contains("alpha"));
    let s = unsafe { fbdp_ml(0.5, 1.0, 1.0, ptr::null_mut()) };
    assert_eq!(s, FbdpStatus::NullPointer);
    assert!(last_error().contains("null"));
    let mut m = ptr::null_mut();
    let s = unsafe { fbdp_model_linear(-1.0, 0.5, &mut m) };
    assert_eq!(s, FbdpStatus::InvalidParameter);
    assert!(m.is_null());
}

#[test]
fn linear_quantities() {
    let (l, mu, a, t) = (0.5, 1.0, 1.0, 1.0);
    let (mut p0, mut cdf, mut mean) = (0.0, 0.0, 0.0);
    unsafe {
        assert_eq!(fbdp_pmf_linear(l, mu, a, 0, t, &mut p0), FbdpStatus::Ok);
        assert_eq!(fbdp_extinction_cdf(l, mu, a, t, &mut cdf), FbdpStatus::Ok);
        assert_eq!(fbdp_mean_linear(l, mu, a, t, &mut mean), FbdpStatus::Ok);
    }
    assert_eq!(p0, cdf);
    assert!((mean - (-0.5f64).exp()).abs() < 1e-14);
}

#[test]
fn handles_round_trip() {
    let lambdas: Vec<f64> = (0..=12).map(|n| 0.5 * n as f64).collect();
    let mus: Vec<f64> = (0..=12).map(|n| n as f64).collect();
    unsafe {
        let mut model = ptr::null_mut();
        assert_eq!(
            fbdp_model_table(lambdas.as_ptr(), mus.as_ptr(), lambdas.len(), &mut model),
            FbdpStatus::Ok
        );
        let mut psi = ptr::null_mut();
        assert_eq!(fbdp_psi_build(model, 12, &mut psi), FbdpStatus::Ok);
        let mut v = 0.0;
        assert_eq!(fbdp_psi_get(psi, 0, 0, &mut v), FbdpStatus::Ok);
        assert_eq!(v, 0.0);
        assert_eq!(fbdp_psi_get(psi, 2, 30, &mut v), FbdpStatus::KBeyondTable);

        let mut probs = vec![0.0; 13];
        let mut leak = 0.0;
        assert_eq!(
            fbdp_uniformization_pmf(model, 12, 0.1, probs.as_mut_ptr(), &mut leak),
            FbdpStatus::Ok
        );
        for n in 0..=4 {
            let mut adm = 0.0;
            let mut lin = 0.0;
            let s = fbdp_pmf_adm(psi, 1.0, n, 0.1, 1e-16, &mut adm);
            assert!(matches!(s, FbdpStatus::Ok | FbdpStatus::Unconverged), "{s:?}");
            assert_eq!(fbdp_pmf_linear(0.5, 1.0, 1.0, n, 0.1, &mut lin), FbdpStatus::Ok);
            assert!((adm - probs[n]).abs() < 1e-8, "n = {n}");
            assert!((adm - lin).abs() < 1e-8, "n = {n}");
        }
        fbdp_psi_free(psi);
        fbdp_model_free(model);
        fbdp_model_free(ptr::null_mut());
    }
}

#[test]
fn divergence_is_reported() {
    unsafe {
        let mut model = ptr::null_mut();
        assert_eq!(fbdp_model_linear(0.5, 1.0, &mut model), FbdpStatus::Ok);
        let mut psi = ptr::null_mut();
        assert_eq!(fbdp_psi_build(model, 40, &mut psi), FbdpStatus::Ok);
        let mut v = f64::NAN;
        let s = fbdp_pmf_adm(psi, 0.7, 1, 0.5, 1e-15, &mut v);
        assert_eq!(s, FbdpStatus::Divergent);
        assert!(v.is_finite());
        assert!(last_error().contains("diverges"));
        fbdp_psi_free(psi);
        fbdp_model_free(model);
    }
}

#[test]
fn header_declares_the_api() {
    let h = include_str!("../include/fbdp.h");
    for name in [
        "fbdp_last_error",
        "fbdp_model_linear",
        "fbdp_model_table",
        "fbdp_model_free",
        "fbdp_psi_build",
        "fbdp_psi_get",
        "fbdp_psi_free",
        "fbdp_pmf_adm",
        "fbdp_uniformization_pmf",
        "fbdp_ml",
        "fbdp_pmf_linear",
        "fbdp_mean_linear",
        "fbdp_extinction_cdf",
        "typedef struct FbdpModel FbdpModel",
        "FBDP_STATUS_OK = 0",
        "FBDP_STATUS_DIVERGENT = 13",
    ] {
        assert!(h.contains(name), "{name}");
    }
}
