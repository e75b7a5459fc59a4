//! Radial reduction of the weighted curvature calculus.
//!
//! Everything here is written in arclength `s` for the metric
//! `ds² + ψ(s)² dθ²_{n−1}` and is generic over [`Scalar`], so evaluating with
//! dual numbers yields exact `s`-derivatives of every output.

use crate::jet::Scalar;

/// The density at a point, in the representation dictated by `m`.
#[derive(Debug, Clone, Copy)]
pub(crate) enum DensityJet<T> {
    /// `v, v′, v″` for finite nonzero `m`.
    Finite { m: f64, v: T, v1: T, v2: T },
    /// `φ, φ′, φ″` for `m = ±∞`.
    Infinite { p1: T, p2: T },
    /// `m = 0`: the density is ignored.
    Trivial,
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct Radial<T> {
    /// Mean curvature `(n−1)ψ′/ψ` of the distance spheres.
    pub h: T,
    pub ric_rr0: T,
    pub ric_tan0: T,
    pub scalar: T,
    pub ric_rr: T,
    pub ric_tan: T,
    pub scalar_w: T,
    /// `Δ_φ φ`.
    pub lap_phi: T,
    /// `(1/m) Δ_φ φ` for finite nonzero `m`, zero otherwise.
    pub lap_phi_over_m: T,
    /// `φ′`.
    pub dphi: T,
}

/// `psi = (ψ, ψ′, ψ″)`, absent when `n = 1`.
pub(crate) fn radial<T: Scalar>(n: usize, psi: Option<[T; 3]>, dens: DensityJet<T>) -> Radial<T> {
    let zero = T::cst(0.0);
    let nf = n as f64;
    let (p, ric_rr0, ric_tan0) = match psi {
        Some([w, w1, w2]) if n >= 2 => {
            let p = w1 / w;
            let q = w2 / w;
            let rr = -q.sc(nf - 1.0);
            let tan = if n >= 3 {
                -q - (w1 * w1 - T::cst(1.0)) / (w * w) * T::cst(nf - 2.0)
            } else {
                -q
            };
            (p, rr, tan)
        }
        _ => (zero, zero, zero),
    };
    let h = p.sc(nf - 1.0);
    let scalar = ric_rr0 + ric_tan0.sc(nf - 1.0);
    match dens {
        DensityJet::Finite { m, v, v1, v2 } => {
            let a = v1 / v;
            let b = v2 / v;
            let ric_rr = ric_rr0 - b.sc(m);
            let ric_tan = ric_tan0 - (p * a).sc(m);
            let lap_v_over_v = b + h * a;
            let scalar_w = scalar - lap_v_over_v.sc(2.0 * m) - (a * a).sc(m * (m - 1.0));
            let over_m = -lap_v_over_v - (a * a).sc(m - 1.0);
            Radial {
                h,
                ric_rr0,
                ric_tan0,
                scalar,
                ric_rr,
                ric_tan,
                scalar_w,
                lap_phi: over_m.sc(m),
                lap_phi_over_m: over_m,
                dphi: a.sc(-m),
            }
        }
        DensityJet::Infinite { p1, p2, .. } => {
            let lap = p2 + h * p1;
            Radial {
                h,
                ric_rr0,
                ric_tan0,
                scalar,
                ric_rr: ric_rr0 + p2,
                ric_tan: ric_tan0 + p * p1,
                scalar_w: scalar + lap.sc(2.0) - p1 * p1,
                lap_phi: lap - p1 * p1,
                lap_phi_over_m: zero,
                dphi: p1,
            }
        }
        DensityJet::Trivial => Radial {
            h,
            ric_rr0,
            ric_tan0,
            scalar,
            ric_rr: ric_rr0,
            ric_tan: ric_tan0,
            scalar_w: scalar,
            lap_phi: zero,
            lap_phi_over_m: zero,
            dphi: zero,
        },
    }
}

/// Radial component of `δ_φ T` for `T = A ds² + B ψ² dθ²`, given `A` with its
/// derivative and `B`, `H`, `φ′` at the point.
pub(crate) fn radial_divergence(a: f64, da: f64, b: f64, h: f64, dphi: f64) -> f64 {
    da + h * (a - b) - dphi * a
}

/// Area of the unit `(n−1)`-sphere; `ω₀ = 1` (a single interval).
pub fn sphere_area(n: usize) -> f64 {
    if n <= 1 {
        return 1.0;
    }
    let k = n as f64 / 2.0;
    2.0 * std::f64::consts::PI.powf(k) / gamma(k)
}

/// `Γ(x)` for half-integers `x ≥ 1/2`.
fn gamma(x: f64) -> f64 {
    let mut g = if x.fract() == 0.0 { 1.0 } else { std::f64::consts::PI.sqrt() };
    let mut y = if x.fract() == 0.0 { 1.0 } else { 0.5 };
    while y < x - 1e-12 {
        g *= y;
        y += 1.0;
    }
    g
}
