use crate::dim::DimParam;
use crate::error::{Error, Result};
use crate::profile::ProfileFn;
use crate::smms::{Density, Poles, RadialSmms};
use serde::{Deserialize, Serialize};
use std::f64::consts::FRAC_PI_2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sign {
    Positive,
    Negative,
}

impl Sign {
    pub fn value(self) -> f64 {
        match self {
            Sign::Positive => 1.0,
            Sign::Negative => -1.0,
        }
    }
}

/// The elliptic Gaussian with quasi-Einstein constant `±1`.
///
/// Finite `m`: `k = √(m+n−1)`, `ψ = k sin(r/k)`, `v = cos(r/k)` on the open
/// hemisphere `[0, kπ/2)` (positive), or `ψ = k sinh(r/k)`, `v = cosh(r/k)` on
/// hyperbolic space (negative). `m = +∞`: flat space with `φ = ±r²/2`. For
/// `n = 1` the line (or the interval `(−kπ/2, kπ/2)`) is used.
pub fn elliptic_gaussian(n: usize, m: DimParam, sign: Sign) -> Result<RadialSmms> {
    if n == 0 {
        return Err(Error::invalid("n must be at least 1"));
    }
    let nf = n as f64;
    let poles = Poles { left: n >= 2, right: false };
    match m {
        DimParam::NegInfinity => Err(Error::Unsupported("elliptic Gaussians are defined for m > 1 − n or m = +inf".into())),
        DimParam::PosInfinity => {
            let domain = if n == 1 { (f64::NEG_INFINITY, f64::INFINITY) } else { (0.0, f64::INFINITY) };
            let psi = (n >= 2).then(ProfileFn::identity);
            let phi = ProfileFn::polynomial(vec![0.0, 0.0, 0.5 * sign.value()]);
            RadialSmms::new(n, domain, psi, Density::Phi(phi), m, poles)
        }
        DimParam::Finite(mm) => {
            if !(mm > 1.0 - nf) {
                return Err(Error::invalid(format!("elliptic Gaussians need m > 1 − n, got m = {mm} with n = {n}")));
            }
            let k = (mm + nf - 1.0).sqrt();
            let (domain, psi, v) = match sign {
                Sign::Positive => {
                    let end = k * FRAC_PI_2;
                    let lo = if n == 1 { -end } else { 0.0 };
                    ((lo, end), ProfileFn::sin(k, 1.0 / k, 0.0), ProfileFn::cos(1.0, 1.0 / k, 0.0))
                }
                Sign::Negative => {
                    let lo = if n == 1 { f64::NEG_INFINITY } else { 0.0 };
                    ((lo, f64::INFINITY), ProfileFn::sinh(k, 1.0 / k, 0.0), ProfileFn::cosh(1.0, 1.0 / k, 0.0))
                }
            };
            RadialSmms::new(n, domain, (n >= 2).then_some(psi), Density::V(v), m, poles)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qe::{qe_verify, QeOptions};

    #[test]
    fn two_dimensional_positive_gaussian_at_m_three() {
        let s = elliptic_gaussian(2, DimParam::Finite(3.0), Sign::Positive).unwrap();
        for r in [0.1, 0.7, 1.5, 2.9] {
            let (a, b) = s.bakry_emery_ricci(r).unwrap();
            assert!((a - 1.0).abs() < 1e-12 && (b - 1.0).abs() < 1e-12);
        }
        let rep = qe_verify(&s, &s.sample_grid(64), QeOptions::default()).unwrap();
        assert!(rep.passed(), "{rep:?}");
        assert!((rep.mu_fit.unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn gaussian_expander() {
        let s = elliptic_gaussian(3, DimParam::PosInfinity, Sign::Negative).unwrap();
        let rep = qe_verify(&s, &s.sample_grid(32), QeOptions::default()).unwrap();
        assert!((rep.lambda_fit + 1.0).abs() < 1e-12 && rep.max_residual < 1e-12);
    }

    #[test]
    fn one_dimensional_model() {
        let s = elliptic_gaussian(1, DimParam::Finite(2.0), Sign::Positive).unwrap();
        let rep = qe_verify(&s, &s.sample_grid(32), QeOptions::default()).unwrap();
        assert!(rep.passed(), "{rep:?}");
        assert!((rep.mu_fit.unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn rejects_small_m() {
        assert!(elliptic_gaussian(2, DimParam::Finite(-1.0), Sign::Positive).is_err());
        assert!(elliptic_gaussian(3, DimParam::NegInfinity, Sign::Positive).is_err());
    }
}
