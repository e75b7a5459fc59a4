//! Conformal changes `(g, v^m dvol) ↦ (u^{−2}g, u^{−m−n}v^m dvol)`, the
//! quasi-Einstein scale system and its duality.

use crate::dim::DimParam;
use crate::error::{Error, Result};
use crate::jet::Jet;
use crate::profile::ProfileFn;
use crate::quadrature::{gauss_legendre, Quadrature};
use crate::smms::{Density, Poles, RadialSmms};
use serde::{Deserialize, Serialize};

/// An SMMS together with a conformal scale.
///
/// `scale` is `u` for finite `m`. For `m = ±∞` the change degenerates to a
/// measure shift and `scale` is read as the shift `f` in `φ ↦ φ + f`.
#[derive(Debug, Clone)]
pub struct ConformalDatum {
    pub base: RadialSmms,
    pub scale: ProfileFn,
}

impl ConformalDatum {
    pub fn new(base: RadialSmms, scale: ProfileFn) -> Self {
        ConformalDatum { base, scale }
    }

    /// `f = (m+n−2) log u`, or the stored shift when `m = ±∞`.
    pub fn f_profile(&self) -> ProfileFn {
        match self.base.m() {
            DimParam::Finite(m) => self.scale.ln().scaled(m + self.base.n() as f64 - 2.0),
            _ => self.scale.clone(),
        }
    }
}

/// `(u, v, λ, μ, m)` on a radial metric `dr² + ψ² dθ²`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScaleTuple {
    pub u: ProfileFn,
    pub v: ProfileFn,
    pub lambda: f64,
    pub mu: f64,
    pub m: DimParam,
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub psi: Option<ProfileFn>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domain: Option<[f64; 2]>,
}

/// Residuals of the scale system at one point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScaleResiduals {
    /// Radial component of the tracefree equation.
    pub tracefree: f64,
    pub lambda: f64,
    pub mu: f64,
}

impl ScaleResiduals {
    pub fn max_abs(&self) -> f64 {
        self.tracefree.abs().max(self.lambda.abs()).max(self.mu.abs())
    }
}

#[derive(Debug, Clone)]
pub struct Duality {
    pub tuple: ScaleTuple,
    /// Set when `m = ±∞`, where the map is the identity.
    pub self_dual_limit: bool,
}

/// Curvature of the transformed SMMS in the original coordinates, as
/// components on `g`-unit vectors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TransformedCurvature {
    pub ric_rr: f64,
    pub ric_tan: f64,
    /// `R_{f,φ}^m`; the transformed weighted scalar is `u² R_{f,φ}^m`.
    pub scalar: f64,
    pub u: f64,
}

impl TransformedCurvature {
    /// Components on `ĝ`-unit vectors.
    pub fn hat(&self) -> (f64, f64, f64) {
        let u2 = self.u * self.u;
        (u2 * self.ric_rr, u2 * self.ric_tan, u2 * self.scalar)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct TransformOptions {
    pub nodes: usize,
    pub order: usize,
}

impl Default for TransformOptions {
    fn default() -> Self {
        TransformOptions { nodes: 2001, order: 10 }
    }
}

/// A transformed SMMS with the arclength map back to the base.
#[derive(Debug, Clone)]
pub struct ConformalImage {
    pub smms: RadialSmms,
    base_lo: f64,
    scale: ProfileFn,
    finite: bool,
}

impl ConformalImage {
    /// `r̂(r) = r₀ + ∫_{r₀}^r dr/u`.
    pub fn hat_coordinate(&self, r: f64) -> Result<f64> {
        if !self.finite {
            return Ok(r);
        }
        let q = Quadrature::new(1e-14, 1e-14).integrate(|x| Ok(1.0 / self.scale.value(x)?), self.base_lo, r)?;
        Ok(self.base_lo + q.value)
    }
}

pub fn conformal_transform(c: &ConformalDatum) -> Result<RadialSmms> {
    Ok(conformal_transform_with(c, TransformOptions::default())?.smms)
}

/// Materializes the transformed SMMS by sampling `ψ/u` and `v/u` against the
/// new arclength. Pole flags survive when the transformed data still meet
/// the smooth-pole conditions.
pub fn conformal_transform_with(c: &ConformalDatum, opts: TransformOptions) -> Result<ConformalImage> {
    let base = &c.base;
    if base.lapse().is_some() {
        return Err(Error::Unsupported("conformal change of a metric with a lapse".into()));
    }
    let (lo, hi) = base.domain();
    if base.m().is_infinite() {
        let Density::Phi(phi) = base.density() else {
            return Err(Error::invalid("m = ±inf carries the density as phi"));
        };
        let smms = RadialSmms::new(base.n(), (lo, hi), base.psi().cloned(), Density::Phi(phi.plus(&c.scale)), base.m(), base.poles())?;
        return Ok(ConformalImage { smms, base_lo: lo, scale: c.scale.clone(), finite: false });
    }
    if !hi.is_finite() {
        let q = Quadrature::default().integrate(|x| Ok(1.0 / c.scale.value(x)?), lo, hi);
        return match q {
            Err(Error::Divergent(_)) => Err(Error::Divergent("1/u is not integrable on the domain".into())),
            Err(e) => Err(e),
            Ok(_) => Err(Error::Unsupported("conformal_transform needs a bounded domain; truncate it first".into())),
        };
    }
    if opts.nodes < opts.order + 3 {
        return Err(Error::invalid("too few nodes for the interpolation order"));
    }
    let k = opts.nodes;
    let rs: Vec<f64> = (0..k).map(|i| lo + (hi - lo) * i as f64 / (k - 1) as f64).collect();
    let mut us = Vec::with_capacity(k);
    for &r in &rs {
        let u = c.scale.value(r)?;
        if !(u > 0.0) {
            return Err(Error::degenerate(format!("u is not positive at r = {r}")));
        }
        us.push(u);
    }
    let (gx, gw) = gauss_legendre(8);
    let mut s = Vec::with_capacity(k);
    s.push(lo);
    for i in 1..k {
        let (a, b) = (rs[i - 1], rs[i]);
        let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
        let mut acc = 0.0;
        for (x, w) in gx.iter().zip(&gw) {
            acc += w / c.scale.value(mid + half * x)?;
        }
        s.push(s[i - 1] + half * acc);
    }
    let psi_hat = match base.psi() {
        Some(p) if base.n() >= 2 => {
            let vals: Result<Vec<f64>> = rs.iter().zip(&us).map(|(&r, u)| Ok(p.value(r)? / u)).collect();
            Some(ProfileFn::sampled(s.clone(), vals?, opts.order)?)
        }
        _ => None,
    };
    let density = match base.density() {
        Density::V(v) => {
            let vals: Result<Vec<f64>> = rs.iter().zip(&us).map(|(&r, u)| Ok(v.value(r)? / u)).collect();
            Density::V(ProfileFn::sampled(s.clone(), vals?, opts.order)?)
        }
        Density::Phi(phi) => {
            let vals: Result<Vec<f64>> = rs.iter().map(|&r| phi.value(r)).collect();
            Density::Phi(ProfileFn::sampled(s.clone(), vals?, opts.order)?)
        }
    };
    let dom = (s[0], s[k - 1]);
    let plain = RadialSmms::new(base.n(), dom, psi_hat, density, base.m(), Poles::default())?;
    let smms = match plain.clone().with_poles(base.poles()) {
        Ok(p) => p,
        Err(_) => plain,
    };
    Ok(ConformalImage { smms, base_lo: lo, scale: c.scale.clone(), finite: true })
}

/// `Ric_{f,φ}^m` and `R_{f,φ}^m` evaluated in the base coordinates.
pub fn transformed_curvature(c: &ConformalDatum, r: f64) -> Result<TransformedCurvature> {
    let base = &c.base;
    let k = base.eval(r)?;
    let s = c.scale.jet(r)?;
    let p = match base.psi() {
        Some(psi) if base.n() >= 2 => {
            let j = psi.jet(r)?;
            j.d1 / j.v
        }
        _ => 0.0,
    };
    let nf = base.n() as f64;
    match base.m() {
        DimParam::Finite(m) => {
            let u = s.v;
            if !(u > 0.0) {
                return Err(Error::degenerate(format!("u is not positive at r = {r}")));
            }
            let (u1, u2) = (s.d1 / u, s.d2 / u);
            let lap_phi_u = u2 + (k.h - k.dphi) * u1;
            let trace = lap_phi_u - (m + nf - 1.0) * u1 * u1;
            Ok(TransformedCurvature {
                ric_rr: k.ric_rr + (m + nf - 2.0) * u2 + trace,
                ric_tan: k.ric_tan + (m + nf - 2.0) * p * u1 + trace,
                scalar: k.scalar_w + 2.0 * (m + nf - 1.0) * lap_phi_u - (m + nf) * (m + nf - 1.0) * u1 * u1,
                u,
            })
        }
        _ => {
            let lap_phi_f = s.d2 + (k.h - k.dphi) * s.d1;
            Ok(TransformedCurvature {
                ric_rr: k.ric_rr + s.d2,
                ric_tan: k.ric_tan + p * s.d1,
                scalar: k.scalar_w + 2.0 * lap_phi_f - s.d1 * s.d1,
                u: 1.0,
            })
        }
    }
}

/// The scale system for jets of `ψ`, `u`, `v` at one point.
fn scale_residuals_at(n: usize, psi: Option<Jet>, u: Jet, v: Jet, lambda: f64, mu: f64, m: f64) -> ScaleResiduals {
    let nf = n as f64;
    let (p, ric_rr, ric_tan) = match psi {
        Some(w) if n >= 2 => {
            let p = w.d1 / w.v;
            let q = w.d2 / w.v;
            (p, -(nf - 1.0) * q, -q - (nf - 2.0) * (w.d1 * w.d1 - 1.0) / (w.v * w.v))
        }
        _ => (0.0, 0.0, 0.0),
    };
    let h = (nf - 1.0) * p;
    let scalar = ric_rr + (nf - 1.0) * ric_tan;
    let lap_u = u.d2 + h * u.d1;
    let lap_v = v.d2 + h * v.d1;
    let (uu, vv) = (u.v, v.v);
    let t_rr = uu * vv * ric_rr + (m + nf - 2.0) * vv * u.d2 - m * uu * v.d2;
    let t_tan = uu * vv * ric_tan + (m + nf - 2.0) * vv * p * u.d1 - m * uu * p * v.d1;
    let uv2 = (uu * vv) * (uu * vv);
    let res_lambda = uv2 * scalar + (m + 2.0 * nf - 2.0) * uu * vv * vv * lap_u - m * uu * uu * vv * lap_v
        - (m + nf - 1.0) * nf * vv * vv * u.d1 * u.d1
        + m * nf * uu * vv * u.d1 * v.d1
        - nf * lambda * vv * vv;
    let res_mu = uv2 * scalar + (m + nf - 2.0) * uu * vv * vv * lap_u - (m - nf) * uu * uu * vv * lap_v
        - (m + nf - 2.0) * nf * uu * vv * u.d1 * v.d1
        + (m - 1.0) * nf * uu * uu * v.d1 * v.d1
        - nf * mu * uu * uu;
    ScaleResiduals { tracefree: (nf - 1.0) / nf * (t_rr - t_tan), lambda: res_lambda, mu: res_mu }
}

/// Residuals of the scale system for `u` on `base` with characteristic
/// constant `mu`. Sign changes of `u` and `v` are allowed.
pub fn scale_system_residuals(base: &RadialSmms, mu: f64, u: &ProfileFn, lambda: f64, r: f64) -> Result<ScaleResiduals> {
    let m = base.m().finite().ok_or_else(|| Error::Unsupported("the scale system needs finite m".into()))?;
    let (lo, hi) = base.domain();
    if !(r > lo && r < hi) {
        return Err(Error::OutOfDomain { r, lo, hi });
    }
    let v = match base.density() {
        Density::V(v) => v.jet(r)?,
        Density::Phi(_) => Jet::constant(1.0),
    };
    let psi = match base.psi() {
        Some(p) if base.n() >= 2 => Some(p.jet(r)?),
        _ => None,
    };
    Ok(scale_residuals_at(base.n(), psi, u.jet(r)?, v, lambda, mu, m))
}

impl ScaleTuple {
    pub fn residuals(&self, r: f64) -> Result<ScaleResiduals> {
        let m = self.m.finite().ok_or_else(|| Error::Unsupported("the scale system needs finite m".into()))?;
        if let Some([lo, hi]) = self.domain {
            if !(r > lo && r < hi) {
                return Err(Error::OutOfDomain { r, lo, hi });
            }
        }
        let psi = match &self.psi {
            Some(p) if self.n >= 2 => Some(p.jet(r)?),
            None if self.n >= 2 => return Err(Error::invalid("n ≥ 2 needs psi")),
            _ => None,
        };
        Ok(scale_residuals_at(self.n, psi, self.u.jet(r)?, self.v.jet(r)?, self.lambda, self.mu, m))
    }

    /// Residuals normalized to the transformed metric: the tracefree part on
    /// `ĝ`-unit vectors and the constants' pointwise defects.
    pub fn natural_residuals(&self, r: f64) -> Result<ScaleResiduals> {
        let raw = self.residuals(r)?;
        let (u, v) = (self.u.value(r)?, self.v.value(r)?);
        let nf = self.n as f64;
        Ok(ScaleResiduals {
            tracefree: raw.tracefree * u / v,
            lambda: raw.lambda / (nf * v * v),
            mu: raw.mu / (nf * u * u),
        })
    }
}

/// `(u, v, λ, μ, m) ↦ (v, u, μ, λ, 2−m−n)`; the identity when `m = ±∞`.
pub fn duality_map(t: &ScaleTuple) -> Duality {
    match t.m {
        DimParam::Finite(m) => Duality {
            tuple: ScaleTuple {
                u: t.v.clone(),
                v: t.u.clone(),
                lambda: t.mu,
                mu: t.lambda,
                m: DimParam::Finite(2.0 - m - t.n as f64),
                n: t.n,
                psi: t.psi.clone(),
                domain: t.domain,
            },
            self_dual_limit: false,
        },
        _ => Duality { tuple: t.clone(), self_dual_limit: true },
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct EquivalenceReport {
    /// Normalized sup-residuals of the four characterizations, in order:
    /// scale on `(g, v^m)`, quasi-Einstein `(u⁻²g, (v/u)^m)`, scale on
    /// `(g, u^{2−m−n})`, quasi-Einstein `(v⁻²g, (u/v)^{2−m−n})`.
    pub residuals: [f64; 4],
    pub tol: f64,
    pub all_small: bool,
    /// `max/min ≤ 10` over the four residuals.
    pub within_band: bool,
}

impl EquivalenceReport {
    pub fn consistent(&self) -> bool {
        self.all_small || self.within_band
    }
}

/// Sup over the grid of the quasi-Einstein defect of the transformed SMMS:
/// `ĝ`-frame Ricci components against `λ` and pointwise `μ` against `mu`.
fn transformed_qe_defect(c: &ConformalDatum, grid: &[f64], lambda: f64, mu: f64) -> Result<f64> {
    let m = c.base.m().finite().ok_or_else(|| Error::Unsupported("finite m required".into()))?;
    let nf = c.base.n() as f64;
    let mut sup: f64 = 0.0;
    for &r in grid {
        let t = transformed_curvature(c, r)?;
        let (rr, tan, scal) = t.hat();
        let mut d = (rr - lambda).abs();
        if c.base.n() >= 2 {
            d = d.max((tan - lambda).abs());
        }
        if m != 0.0 {
            let vhat = match c.base.density() {
                Density::V(v) => v.value(r)? / t.u,
                Density::Phi(_) => 1.0 / t.u,
            };
            let mu_pt = ((m + nf) * lambda - scal) * vhat * vhat / m;
            d = d.max((mu_pt - mu).abs());
        }
        sup = sup.max(d);
    }
    Ok(sup)
}

/// Evaluates the four equivalent characterizations of a quasi-Einstein
/// scale on a shared grid and checks that they agree.
pub fn four_equivalences_check(t: &ScaleTuple, grid: &[f64], tol: f64) -> Result<EquivalenceReport> {
    let m = t.m.finite().ok_or_else(|| Error::Unsupported("finite m required".into()))?;
    if grid.is_empty() {
        return Err(Error::invalid("empty grid"));
    }
    for &r in grid {
        if !(t.u.value(r)? > 0.0 && t.v.value(r)? > 0.0) {
            return Err(Error::degenerate(format!("u and v must be positive (r = {r})")));
        }
    }
    let dual = duality_map(t).tuple;
    let norm = t.lambda.abs() + t.mu.abs() + 1.0;
    let sup_scale = |tt: &ScaleTuple| -> Result<f64> {
        let mut s: f64 = 0.0;
        for &r in grid {
            s = s.max(tt.natural_residuals(r)?.max_abs());
        }
        Ok(s)
    };
    let datum = |tt: &ScaleTuple, mm: f64| -> Result<ConformalDatum> {
        let (lo, hi) = match tt.domain {
            Some([a, b]) => (a, b),
            None => (grid[0], grid[grid.len() - 1]),
        };
        let base = RadialSmms::new(tt.n, (lo, hi), tt.psi.clone(), Density::V(tt.v.clone()), DimParam::Finite(mm), Poles::default())?;
        Ok(ConformalDatum::new(base, tt.u.clone()))
    };
    let r1 = sup_scale(t)?;
    let r2 = transformed_qe_defect(&datum(t, m)?, grid, t.lambda, t.mu)?;
    let r3 = sup_scale(&dual)?;
    let dm = dual.m.finite().expect("finite");
    let r4 = transformed_qe_defect(&datum(&dual, dm)?, grid, dual.lambda, dual.mu)?;
    let residuals = [r1 / norm, r2 / norm, r3 / norm, r4 / norm];
    let max = residuals.iter().cloned().fold(0.0, f64::max);
    let min = residuals.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok(EquivalenceReport {
        residuals,
        tol,
        all_small: max <= tol,
        within_band: min > 0.0 && max <= 10.0 * min,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hyperbolic(n: usize, m: f64, k: f64, r1: f64) -> RadialSmms {
        RadialSmms::with_v(n, (0.0, r1), Some(ProfileFn::sinh(k, 1.0 / k, 0.0)), ProfileFn::constant(1.0), m)
            .unwrap()
            .with_poles(Poles { left: true, right: false })
            .unwrap()
    }

    #[test]
    fn dual_gaussian_scale_system_vanishes() {
        for (n, m) in [(2usize, 3.0), (3, 5.0), (4, 2.0)] {
            let k = (m + n as f64 - 1.0_f64).sqrt();
            let base = hyperbolic(n, m, k, 3.0 * k);
            let mu = (m - 1.0) / (m + n as f64 - 1.0);
            let u = ProfileFn::cosh(1.0, 1.0 / k, 0.0);
            for r in base.sample_grid(17) {
                let res = scale_system_residuals(&base, mu, &u, 1.0, r).unwrap();
                assert!(res.max_abs() < 1e-9 * (1.0 + u.value(r).unwrap().powi(2)), "{res:?}");
            }
        }
    }

    #[test]
    fn unit_scale_reproduces_base_curvature() {
        let s = RadialSmms::with_v(3, (0.2, 1.4), Some(ProfileFn::sin(1.0, 1.0, 0.0)), ProfileFn::exp_quadratic(1.0, 0.3, 0.1), 2.5).unwrap();
        let c = ConformalDatum::new(s.clone(), ProfileFn::constant(1.0));
        for r in [0.3, 0.7, 1.1] {
            let t = transformed_curvature(&c, r).unwrap();
            let (a, b) = s.bakry_emery_ricci(r).unwrap();
            assert_eq!((t.ric_rr, t.ric_tan), (a, b));
            assert_eq!(t.scalar, s.weighted_scalar(r).unwrap());
        }
    }

    #[test]
    fn duality_is_an_involution() {
        let t = ScaleTuple {
            u: ProfileFn::cosh(1.0, 0.5, 0.0),
            v: ProfileFn::constant(1.0),
            lambda: 1.0,
            mu: 0.5,
            m: DimParam::Finite(3.0),
            n: 2,
            psi: Some(ProfileFn::sinh(2.0, 0.5, 0.0)),
            domain: Some([0.0, 4.0]),
        };
        let d = duality_map(&t).tuple;
        assert_eq!((d.lambda, d.mu, d.m), (0.5, 1.0, DimParam::Finite(-3.0)));
        let dd = duality_map(&d).tuple;
        assert_eq!((dd.lambda, dd.mu, dd.m, dd.n), (t.lambda, t.mu, t.m, t.n));
        for r in [0.5, 1.5, 3.0] {
            let a = t.residuals(r).unwrap();
            let b = d.residuals(r).unwrap();
            assert!((a.tracefree - b.tracefree).abs() < 1e-12);
            assert!((a.lambda - b.mu).abs() < 1e-12 && (a.mu - b.lambda).abs() < 1e-12);
        }
    }

    #[test]
    fn infinite_m_is_a_measure_shift() {
        let s = RadialSmms::new(
            2,
            (0.1, 2.0),
            Some(ProfileFn::identity()),
            Density::Phi(ProfileFn::polynomial(vec![0.0, 0.0, 0.5])),
            DimParam::PosInfinity,
            Poles::default(),
        )
        .unwrap();
        let f = ProfileFn::sin(0.3, 1.0, 0.0);
        let c = ConformalDatum::new(s, f);
        let img = conformal_transform(&c).unwrap();
        for r in [0.4, 1.0, 1.7] {
            let t = transformed_curvature(&c, r).unwrap();
            let (a, b) = img.bakry_emery_ricci(r).unwrap();
            assert!((t.ric_rr - a).abs() < 1e-12 && (t.ric_tan - b).abs() < 1e-12);
            assert!((t.scalar - img.weighted_scalar(r).unwrap()).abs() < 1e-12);
        }
    }
}
