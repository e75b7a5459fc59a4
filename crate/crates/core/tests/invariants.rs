mod support;

use proptest::prelude::*;
use qesmms_core::conformal::{duality_map, ScaleTuple};
use qesmms_core::families::{format_number, lyapunov_log_rate, product_flat, product_warped, Fiber};
use qesmms_core::{qe_verify, Density, Descriptor, DimParam, Geometry, Poles, ProfileFn, QeOptions, RadialSmms};

fn dim_param() -> impl Strategy<Value = DimParam> {
    prop_oneof![
        (-6.0f64..12.0).prop_map(DimParam::Finite),
        Just(DimParam::Finite(0.0)),
        Just(DimParam::Finite(1.0)),
        Just(DimParam::PosInfinity),
        Just(DimParam::NegInfinity),
    ]
}

/// `(n, m, ψ, density)` from closed-form profiles on `[0.2, 1.4]`.
fn smms() -> impl Strategy<Value = RadialSmms> {
    (1usize..=5, dim_param(), 0.5f64..1.5, -0.8f64..0.8, 0.6f64..1.8, -0.4f64..0.4, -0.5f64..0.5).prop_map(|(n, m, a, b, c, d, e)| {
        let psi = (n >= 2).then(|| ProfileFn::cosh(a, b, 0.1));
        let density = if m.is_infinite() {
            Density::Phi(ProfileFn::polynomial(vec![d, e, 0.5 * d]))
        } else {
            Density::V(ProfileFn::exp_quadratic(c, d, e))
        };
        RadialSmms::new(n, (0.2, 1.4), psi, density, m, Poles::default()).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn trace_of_weighted_ricci_plus_drift_laplacian_is_weighted_scalar(s in smms(), t in 0.05f64..0.95) {
        let r = 0.2 + 1.2 * t;
        let p = s.curvature_point(r).unwrap();
        let nf = s.n() as f64;
        let lhs = p.ric_rr + (nf - 1.0) * p.ric_tan + p.lap_phi;
        prop_assert!((lhs - p.scalar_w).abs() <= 1e-10 * (1.0 + p.scalar_w.abs()));
    }

    #[test]
    fn weighted_bianchi_identities_hold(s in smms(), t in 0.05f64..0.95) {
        let r = 0.2 + 1.2 * t;
        prop_assert!(s.bianchi_residual(r).unwrap().abs() <= 1e-9);
        prop_assert!(s.bianchi_operator_residual(r).unwrap().abs() <= 1e-9);
    }

    #[test]
    fn changing_m_to_zero_gives_plain_curvature(s in smms(), t in 0.05f64..0.95) {
        let r = 0.2 + 1.2 * t;
        let z = s.with_m(DimParam::Finite(0.0)).unwrap();
        prop_assert_eq!(z.weighted_scalar(r).unwrap(), z.scalar(r).unwrap());
        prop_assert!((z.scalar(r).unwrap() - s.scalar(r).unwrap()).abs() <= 1e-12 * (1.0 + s.scalar(r).unwrap().abs()));
    }

    #[test]
    fn descriptors_round_trip(s in smms()) {
        let d = s.to_descriptor().unwrap();
        let json = serde_json::to_string(&d).unwrap();
        let back: Descriptor = serde_json::from_str(&json).unwrap();
        let t = RadialSmms::from_descriptor(back).unwrap();
        for r in [0.3, 0.9, 1.3] {
            prop_assert_eq!(s.curvature_point(r).unwrap(), t.curvature_point(r).unwrap());
        }
    }

    #[test]
    fn duality_is_an_involution(m in -8.0f64..8.0, n in 1usize..6, lambda in -3.0f64..3.0, mu in -3.0f64..3.0, a in 0.2f64..2.0) {
        let t = ScaleTuple {
            u: ProfileFn::cosh(1.0, a, 0.0),
            v: ProfileFn::exp_quadratic(1.0, 0.1, a),
            lambda,
            mu,
            m: DimParam::Finite(m),
            n,
            psi: (n >= 2).then(|| ProfileFn::sinh(1.0, a, 0.0)),
            domain: Some([0.0, 2.0]),
        };
        let d = duality_map(&t).tuple;
        prop_assert_eq!(d.m, DimParam::Finite(2.0 - m - n as f64));
        let dd = duality_map(&d).tuple;
        prop_assert_eq!((dd.lambda, dd.mu, dd.n), (lambda, mu, n));
        prop_assert!((dd.m.as_f64() - m).abs() <= 1e-12 * (1.0 + m.abs()));
        let (x, y) = (t.residuals(1.0).unwrap(), d.residuals(1.0).unwrap());
        prop_assert!((x.tracefree - y.tracefree).abs() <= 1e-12 * (1.0 + x.tracefree.abs()));
        prop_assert!((x.lambda - y.mu).abs() <= 1e-12 * (1.0 + x.lambda.abs()));
        prop_assert!((x.mu - y.lambda).abs() <= 1e-12 * (1.0 + x.mu.abs()));
    }

    #[test]
    fn dimensional_parameter_tokens_round_trip(m in dim_param()) {
        let back: DimParam = m.token().parse().unwrap();
        prop_assert_eq!(back, m);
        let json = serde_json::to_string(&m).unwrap();
        prop_assert_eq!(serde_json::from_str::<DimParam>(&json).unwrap(), m);
    }

    #[test]
    fn formatted_numbers_round_trip(x in proptest::num::f64::ANY) {
        let s = format_number(x);
        if x.is_nan() {
            prop_assert_eq!(s, "nan");
        } else if x.is_infinite() {
            prop_assert_eq!(s, if x > 0.0 { "+inf" } else { "-inf" });
        } else {
            prop_assert_eq!(s.parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn lyapunov_rate_is_never_positive(n in 3usize..8, m in 1.5f64..40.0, x in 0.0f64..1.0) {
        prop_assert!(lyapunov_log_rate(n, DimParam::Finite(m), x).unwrap() <= 0.0);
        prop_assert!(lyapunov_log_rate(n, DimParam::PosInfinity, x).unwrap() <= 0.0);
    }

    #[test]
    fn empty_fibers_do_not_change_the_base(s in smms()) {
        let grid = [0.3, 0.8, 1.3];
        let opts = QeOptions { estimates: false, ..QeOptions::tol(1e30) };
        let flat = product_flat(&s, Fiber { k: 0, einstein_const: 0.0 }, &grid, opts).unwrap();
        for &r in &grid {
            prop_assert_eq!(flat.product.point(r).unwrap(), s.point(r).unwrap());
        }
        if matches!(s.m(), DimParam::Finite(m) if m != 0.0) {
            let w = product_warped(&s, Fiber { k: 0, einstein_const: 0.0 }, &grid, opts).unwrap();
            for &r in &grid {
                prop_assert_eq!(w.product.point(r).unwrap(), s.point(r).unwrap());
            }
        }
    }
}

#[test]
fn quasi_einstein_verification_is_invariant_under_grid_refinement() {
    let s = qesmms_core::families::elliptic_gaussian(3, DimParam::Finite(4.0), qesmms_core::families::Sign::Positive).unwrap();
    let a = qe_verify(&s, &s.sample_grid(20), QeOptions::default()).unwrap();
    let b = qe_verify(&s, &s.sample_grid(200), QeOptions::default()).unwrap();
    assert!((a.lambda_fit - b.lambda_fit).abs() < 1e-12);
    assert!((a.mu_fit.unwrap() - b.mu_fit.unwrap()).abs() < 1e-12);
}

#[test]
fn warped_oracle_reproduces_round_spheres() {
    // dr² + sin²r g_{S^{n−1}} is the unit sphere, Ric = n − 1.
    for n in 2..=5 {
        let one = ProfileFn::constant(1.0);
        let (rr, tan, _) = support::warped_product_ricci(n, &ProfileFn::sin(1.0, 1.0, 0.0), &one, 0, 1.0, 0.8);
        assert!((rr - (n as f64 - 1.0)).abs() < 1e-12);
        assert!((tan.unwrap() - (n as f64 - 1.0)).abs() < 1e-12);
    }
}
