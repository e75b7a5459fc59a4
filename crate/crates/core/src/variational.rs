//! Weighted volume, the `(m, μ)`-energy functional and its first variation.
//!
//! Variations are taken of `(g, φ)` jointly with the measure `e^{−φ} dvol_g`
//! recomputed, `δg = h` and `δφ = ψ`. All integrals include the area `ω_{n−1}`
//! of the unit sphere (`ω₀ = 1`).

use crate::dim::DimParam;
use crate::error::{Error, Result};
use crate::geometry::{DensityPoint, Geometry, PointData};
use crate::jet::Jet;
use crate::profile::ProfileFn;
use crate::quadrature::{composite_gauss, Quadrature};
use crate::smms::{Density, Poles, RadialSmms};
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnergyValue {
    pub value: f64,
    /// Whether the quadrature met its tolerance.
    pub integrable: bool,
    pub error: f64,
}

/// A radial diagonal variation `h = h_rr dr² + h_tan ψ² dθ²`, `δφ = psi_var`.
#[derive(Debug, Clone)]
pub struct VariationDatum {
    pub h_rr: ProfileFn,
    pub h_tan: ProfileFn,
    pub psi_var: ProfileFn,
    /// Interval outside of which the variation vanishes identically.
    pub support: Option<[f64; 2]>,
}

impl VariationDatum {
    pub fn zero() -> Self {
        let z = ProfileFn::constant(0.0);
        VariationDatum { h_rr: z.clone(), h_tan: z.clone(), psi_var: z, support: None }
    }

    pub fn new(h_rr: ProfileFn, h_tan: ProfileFn, psi_var: ProfileFn) -> Self {
        VariationDatum { h_rr, h_tan, psi_var, support: None }
    }

    pub fn with_support(mut self, a: f64, b: f64) -> Self {
        self.support = Some([a, b]);
        self
    }

    fn is_zero(&self) -> bool {
        [&self.h_rr, &self.h_tan, &self.psi_var].iter().all(|p| p.as_constant() == Some(0.0))
    }
}

/// A variation of a geometry with several curvature blocks: one `h`
/// eigenvalue per block.
#[derive(Debug, Clone)]
pub struct BlockVariation {
    pub h: Vec<ProfileFn>,
    pub psi: ProfileFn,
}

#[derive(Debug, Clone, Copy)]
pub struct EnergyOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
}

impl Default for EnergyOptions {
    fn default() -> Self {
        EnergyOptions { abs_tol: 1e-11, rel_tol: 1e-11 }
    }
}

/// Integrates `f` over `(a, b)`. Bounded intervals are mapped by
/// `r = a + (b−a)(3t² − 2t³)`, which tames algebraic endpoint singularities
/// such as degenerating measures.
fn integrate<F: FnMut(f64) -> Result<f64>>(mut f: F, a: f64, b: f64, opts: EnergyOptions) -> Result<EnergyValue> {
    let q = Quadrature::new(opts.abs_tol, opts.rel_tol);
    let res = if a.is_finite() && b.is_finite() {
        let len = b - a;
        q.integrate(
            |t| {
                let r = a + len * t * t * (3.0 - 2.0 * t);
                let jac = 6.0 * len * t * (1.0 - t);
                if jac == 0.0 {
                    return Ok(0.0);
                }
                Ok(f(r)? * jac)
            },
            0.0,
            1.0,
        )?
    } else {
        q.integrate(f, a, b)?
    };
    let target = opts.abs_tol.max(opts.rel_tol * res.value.abs());
    Ok(EnergyValue { value: res.value, integrable: res.error <= 1e3 * target, error: res.error })
}

fn measure(p: &PointData) -> f64 {
    p.area * p.weight
}

fn energy_density(p: &PointData, m: DimParam, mu: f64, n: usize) -> f64 {
    match (m, p.density) {
        _ if m.is_zero() => p.scalar * p.area,
        (_, DensityPoint::Trivial) => p.scalar * p.area,
        (DimParam::Finite(m), DensityPoint::Finite { v, .. }) => (p.scalar_w + m * mu / (v * v)) * measure(p),
        (_, DensityPoint::Infinite { phi, .. }) => (p.scalar_w + 2.0 * mu * (phi - n as f64)) * measure(p),
        _ => f64::NAN,
    }
}

/// `ω_{n−1} ∫ ψ^{n−1} v^m dr` (or with `e^{−φ}`).
pub fn weighted_volume<G: Geometry>(g: &G) -> Result<EnergyValue> {
    weighted_volume_with(g, EnergyOptions::default())
}

pub fn weighted_volume_with<G: Geometry>(g: &G, opts: EnergyOptions) -> Result<EnergyValue> {
    let (a, b) = g.interval();
    integrate(|r| Ok(measure(&g.point(r)?)), a, b, opts)
}

/// `W_μ^m`: `∫(R_φ^m + mμv^{−2}) v^m dvol` for finite `m`,
/// `∫(R_φ^∞ + 2μ(φ−n)) e^{−φ} dvol` for `m = ±∞`, and `∫R dvol` for `m = 0`.
pub fn energy<G: Geometry>(g: &G, mu: f64) -> Result<EnergyValue> {
    energy_with(g, mu, EnergyOptions::default())
}

pub fn energy_with<G: Geometry>(g: &G, mu: f64, opts: EnergyOptions) -> Result<EnergyValue> {
    let (a, b) = g.interval();
    let (m, n) = (g.dim_param(), g.dim());
    integrate(|r| Ok(energy_density(&g.point(r)?, m, mu, n)), a, b, opts)
}

/// Pointwise coefficients of `δW = −∫[Σ mult·A_b h_b + Bψ] dμ`:
/// `A_b = Ric_b − ½S`, and `B`.
fn variation_coefficients(p: &PointData, m: DimParam, mu: f64, n: usize) -> (Vec<f64>, f64) {
    let nf = n as f64;
    let (s, b) = match (m, p.density) {
        (DimParam::Finite(m), DensityPoint::Finite { v, .. }) if m != 0.0 => {
            let vi2 = 1.0 / (v * v);
            (p.scalar_w + m * mu * vi2, p.scalar_w - 2.0 * p.lap_phi_over_m + (m - 2.0) * mu * vi2)
        }
        (DimParam::PosInfinity | DimParam::NegInfinity, DensityPoint::Infinite { phi, .. }) => {
            (p.scalar_w + 2.0 * mu * (phi - nf), p.scalar_w + 2.0 * mu * (phi - nf - 1.0))
        }
        _ => (p.scalar, 0.0),
    };
    let plain = matches!(p.density, DensityPoint::Trivial) || m.is_zero();
    let a = p.blocks.iter().map(|bl| if plain { bl.ric } else { bl.ric_w } - 0.5 * s).collect();
    (a, b)
}

fn support_of<G: Geometry>(g: &G, support: Option<[f64; 2]>) -> Result<(f64, f64)> {
    let (lo, hi) = g.interval();
    match support {
        Some([a, b]) => {
            if !(a < b) {
                return Err(Error::invalid("empty variation support"));
            }
            Ok((a.max(lo), b.min(hi)))
        }
        None => Ok((lo, hi)),
    }
}

/// `δW_μ^m` from the closed formula, for any block geometry.
pub fn first_variation_blocks<G: Geometry>(g: &G, mu: f64, var: &BlockVariation, support: Option<[f64; 2]>) -> Result<EnergyValue> {
    let (a, b) = support_of(g, support)?;
    let (m, n) = (g.dim_param(), g.dim());
    let plain = m.is_zero();
    integrate(
        |r| {
            let p = g.point(r)?;
            if var.h.len() != p.blocks.len() {
                return Err(Error::invalid("one h profile per curvature block is required"));
            }
            let (coef, bb) = variation_coefficients(&p, m, mu, n);
            let mut s = 0.0;
            for ((blk, c), h) in p.blocks.iter().zip(&coef).zip(&var.h) {
                s += blk.mult as f64 * c * h.value(r)?;
            }
            if !plain {
                s += bb * var.psi.value(r)?;
            }
            let dmu = if plain { p.area } else { measure(&p) };
            Ok(-s * dmu)
        },
        a,
        b,
        EnergyOptions::default(),
    )
}

fn radial_blocks(s: &RadialSmms, var: &VariationDatum) -> BlockVariation {
    let mut h = vec![var.h_rr.clone()];
    if s.n() >= 2 {
        h.push(var.h_tan.clone());
    }
    BlockVariation { h, psi: var.psi_var.clone() }
}

/// Errors unless the variation vanishes to first order at every finite end
/// where the weighted area does not.
fn check_support(s: &RadialSmms, var: &VariationDatum) -> Result<()> {
    let (lo, hi) = s.domain();
    let ends = match var.support {
        Some([a, b]) => [a.max(lo), b.min(hi)],
        None => [lo, hi],
    };
    for r in ends {
        if !r.is_finite() {
            continue;
        }
        let degenerate = match s.local_unchecked(r) {
            Ok(loc) => {
                let w = s.area(&loc) * s.weight(&loc);
                !(w.abs() > 1e-12)
            }
            Err(_) => true,
        };
        if degenerate && var.support.is_none() {
            continue;
        }
        for p in [&var.h_rr, &var.h_tan, &var.psi_var] {
            let j = p.jet(r)?;
            if j.v.abs() > 1e-9 || j.d1.abs() > 1e-9 {
                return Err(Error::invalid(format!("variation does not vanish at the boundary r = {r}")));
            }
        }
    }
    Ok(())
}

/// `δW_μ^m` along `var` from the closed formula.
pub fn first_variation_analytic(s: &RadialSmms, mu: f64, var: &VariationDatum) -> Result<f64> {
    if var.is_zero() {
        return Ok(0.0);
    }
    check_support(s, var)?;
    Ok(first_variation_blocks(s, mu, &radial_blocks(s, var), var.support)?.value)
}

/// The SMMS at `(g + εh, φ + εψ)`.
pub fn perturbed(s: &RadialSmms, var: &VariationDatum, eps: f64) -> Result<RadialSmms> {
    if s.lapse().is_some() {
        return Err(Error::Unsupported("perturbing an already perturbed metric".into()));
    }
    let one = ProfileFn::constant(1.0);
    let lapse = var.h_rr.scaled(eps).plus(&one).powf(0.5);
    let psi = s.psi().map(|p| p.times(&var.h_tan.scaled(eps).plus(&one).powf(0.5)));
    let density = match (s.density(), s.m()) {
        (Density::V(v), DimParam::Finite(m)) if m != 0.0 => Density::V(v.times(&var.psi_var.scaled(-eps / m).exp())),
        (Density::Phi(phi), m) if m.is_infinite() => Density::Phi(phi.plus(&var.psi_var.scaled(eps))),
        (d, _) => d.clone(),
    };
    let out = RadialSmms::new(s.n(), s.domain(), psi, density, s.m(), Poles::default())?;
    Ok(out.with_lapse(lapse))
}

#[derive(Debug, Clone, Copy)]
pub struct FdOptions {
    pub panels: usize,
    pub order: usize,
}

impl Default for FdOptions {
    fn default() -> Self {
        FdOptions { panels: 400, order: 10 }
    }
}

/// Centered difference `(W(s + step·var) − W(s − step·var)) / (2 step)`,
/// integrating the pointwise difference quotient with a fixed rule.
pub fn first_variation_fd(s: &RadialSmms, mu: f64, var: &VariationDatum, step: f64) -> Result<f64> {
    first_variation_fd_with(s, mu, var, step, FdOptions::default())
}

pub fn first_variation_fd_with(s: &RadialSmms, mu: f64, var: &VariationDatum, step: f64, opts: FdOptions) -> Result<f64> {
    if var.is_zero() {
        return Ok(0.0);
    }
    let (a, b) = support_of(s, var.support)?;
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::invalid("finite-difference variation needs a bounded support"));
    }
    let plus = perturbed(s, var, step)?;
    let minus = perturbed(s, var, -step)?;
    let (m, n) = (s.m(), s.n());
    composite_gauss(
        |r| {
            let ep = energy_density(&plus.point(r)?, m, mu, n);
            let em = energy_density(&minus.point(r)?, m, mu, n);
            if !(ep.is_finite() && em.is_finite()) {
                return Err(Error::degenerate(format!("perturbed density not finite at r = {r}")));
            }
            Ok((ep - em) / (2.0 * step))
        },
        a,
        b,
        opts.panels,
        opts.order,
    )
}

/// Weighted `L²` norm `(∫ h_rr² + (n−1)h_tan² + ψ² dμ)^{1/2}` over the support.
pub fn variation_norm(s: &RadialSmms, var: &VariationDatum) -> Result<f64> {
    let (a, b) = support_of(s, var.support)?;
    let nf = s.n() as f64;
    let r = integrate(
        |r| {
            let p = s.point(r)?;
            let (x, y, z) = (var.h_rr.value(r)?, var.h_tan.value(r)?, var.psi_var.value(r)?);
            Ok((x * x + (nf - 1.0) * y * y + z * z) * measure(&p))
        },
        a,
        b,
        EnergyOptions::default(),
    )?;
    Ok(r.value.sqrt())
}

/// Subtracts a multiple of `bump` from `ψ` so that
/// `∫(ψ − ½ tr h) dμ = 0`, the linearized unit-volume constraint.
pub fn constrain_variation(s: &RadialSmms, var: &VariationDatum, bump: &ProfileFn) -> Result<VariationDatum> {
    let (a, b) = support_of(s, var.support)?;
    let nf = s.n() as f64;
    let c = integrate(
        |r| {
            let p = s.point(r)?;
            let tr = var.h_rr.value(r)? + (nf - 1.0) * var.h_tan.value(r)?;
            Ok((var.psi_var.value(r)? - 0.5 * tr) * measure(&p))
        },
        a,
        b,
        EnergyOptions::default(),
    )?;
    let w = integrate(|r| Ok(bump.value(r)? * measure(&s.point(r)?)), a, b, EnergyOptions::default())?;
    if w.value == 0.0 {
        return Err(Error::degenerate("the correcting bump has zero weighted integral"));
    }
    let mut out = var.clone();
    out.psi_var = var.psi_var.plus(&bump.scaled(-c.value / w.value));
    Ok(out)
}

/// The variation `(L_X g, Xφ)` generated by `X = ξ ∂_r`:
/// `h_rr = 2ξ′`, `h_tan = 2ξψ′/ψ`, `δφ = ξφ′`.
pub fn diffeomorphism_variation(s: &RadialSmms, xi: &ProfileFn) -> Result<VariationDatum> {
    let dxi = xi.derivative();
    let h_tan = match s.psi() {
        Some(psi) if s.n() >= 2 => xi.times(&psi.derivative()).over(psi).scaled(2.0),
        _ => ProfileFn::constant(0.0),
    };
    let dphi = match (s.density(), s.m()) {
        (Density::V(v), DimParam::Finite(m)) if m != 0.0 => v.derivative().over(v).scaled(-m),
        (Density::Phi(phi), m) if m.is_infinite() => phi.derivative(),
        _ => ProfileFn::constant(0.0),
    };
    Ok(VariationDatum { h_rr: dxi.scaled(2.0), h_tan, psi_var: xi.times(&dphi), support: None })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DeltaRCheck {
    /// The closed formula for `δR_φ^m`.
    pub analytic: f64,
    /// Centered difference of `R_φ^m` along the variation.
    pub fd: f64,
    pub residual: f64,
}

/// Compares `δR_φ^m = −⟨Ric_φ^m, h⟩ + δ_φ²h − Δ_φ tr h + 2(Δ_φψ − (1/m)⟨∇φ, ∇ψ⟩)`
/// at `r` with a centered difference of the weighted scalar curvature.
pub fn delta_r_check(s: &RadialSmms, var: &VariationDatum, r: f64, step: f64) -> Result<DeltaRCheck> {
    let analytic = delta_r_analytic(s, var, r)?;
    let fd = if var.is_zero() {
        0.0
    } else {
        let p = perturbed(s, var, step)?.weighted_scalar(r)?;
        let q = perturbed(s, var, -step)?.weighted_scalar(r)?;
        (p - q) / (2.0 * step)
    };
    Ok(DeltaRCheck { analytic, fd, residual: analytic - fd })
}

fn delta_r_analytic(s: &RadialSmms, var: &VariationDatum, r: f64) -> Result<f64> {
    if s.lapse().is_some() {
        return Err(Error::Unsupported("delta_r_check on a perturbed metric".into()));
    }
    let c = s.eval(r)?;
    let nf = s.n() as f64;
    let (h, dh) = match s.psi() {
        Some(p) if s.n() >= 2 => {
            let j = p.jet(r)?;
            let q = j.d1 / j.v;
            ((nf - 1.0) * q, (nf - 1.0) * (j.d2 / j.v - q * q))
        }
        _ => (0.0, 0.0),
    };
    let m = s.m();
    let (p1, p2, inv_m) = match (s.density(), m) {
        (Density::V(v), DimParam::Finite(mm)) if mm != 0.0 => {
            let j = v.jet(r)?;
            let a = j.d1 / j.v;
            (-mm * a, -mm * (j.d2 / j.v - a * a), 1.0 / mm)
        }
        (Density::Phi(phi), mm) if mm.is_infinite() => {
            let j = phi.jet(r)?;
            (j.d1, j.d2, 0.0)
        }
        _ => (0.0, 0.0, 0.0),
    };
    let hr = var.h_rr.jet(r)?;
    let ht = if s.n() >= 2 { var.h_tan.jet(r)? } else { Jet::constant(0.0) };
    let pv = var.psi_var.jet(r)?;
    let mut out = -(c.ric_rr * hr.v + (nf - 1.0) * c.ric_tan * ht.v);
    let w = hr.d1 + h * (hr.v - ht.v) - p1 * hr.v;
    let dw = hr.d2 + dh * (hr.v - ht.v) + h * (hr.d1 - ht.d1) - p2 * hr.v - p1 * hr.d1;
    out += dw + h * w - p1 * w;
    let tr = hr + ht.scale(nf - 1.0);
    out -= tr.d2 + (h - p1) * tr.d1;
    if !m.is_zero() {
        out += 2.0 * (pv.d2 + (h - p1) * pv.d1 - inv_m * p1 * pv.d1);
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnergyLimitRow {
    pub m: f64,
    /// `W_μ^m − (m+2n) Vol_φ`.
    pub renormalized: f64,
    pub limit: f64,
    pub error: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct EnergyLimitTable {
    pub mu: f64,
    pub rows: Vec<EnergyLimitRow>,
    /// Least-squares slope of `log error` against `log m`.
    pub decay_rate: f64,
    /// `error · m` per row.
    pub fitted_c: f64,
    pub decreasing: bool,
}

/// Compares `W_μ^m − (m+2n)Vol_φ` at `v = e^{−φ/m}` with `W_μ^∞` for a fixed
/// `(g, φ)` given as an `m = +∞` SMMS. The bracket is integrated as one
/// integrand to avoid cancellation.
pub fn energy_limit_check(s: &RadialSmms, mu: f64, ms: &[f64]) -> Result<EnergyLimitTable> {
    let Density::Phi(phi) = s.density() else {
        return Err(Error::invalid("energy_limit_check takes (g, φ) as an m = ±inf SMMS"));
    };
    if !s.is_compact() {
        return Err(Error::invalid("energy_limit_check needs a bounded domain"));
    }
    if ms.is_empty() {
        return Err(Error::invalid("empty m list"));
    }
    let n = s.n();
    let nf = n as f64;
    let opts = EnergyOptions { abs_tol: 1e-13, rel_tol: 1e-13 };
    let limit = energy_with(s, mu, opts)?.value;
    let mut rows = Vec::with_capacity(ms.len());
    for &m in ms {
        if !(m.is_finite() && m > 0.0) {
            return Err(Error::invalid("m values must be finite and positive"));
        }
        let v = phi.scaled(-1.0 / m).exp();
        let sm = RadialSmms::new(n, s.domain(), s.psi().cloned(), Density::V(v), DimParam::Finite(m), s.poles())?;
        let (a, b) = s.domain();
        let ren = integrate(
            |r| {
                let p = sm.point(r)?;
                let e = energy_density(&p, sm.m(), mu, n);
                Ok(e - (m + 2.0 * nf) * measure(&p))
            },
            a,
            b,
            opts,
        )?
        .value;
        rows.push(EnergyLimitRow { m, renormalized: ren, limit, error: (ren - limit).abs() });
    }
    let pts: Vec<(f64, f64)> = rows.iter().filter(|r| r.error > 0.0).map(|r| (r.m.ln(), r.error.ln())).collect();
    let decay_rate = if pts.len() >= 2 {
        let k = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
        -sxy / sxx
    } else {
        f64::NAN
    };
    let fitted_c = rows.iter().map(|r| r.error * r.m).fold(0.0, f64::max);
    let decreasing = rows.windows(2).all(|w| w[1].error < w[0].error || w[1].error == 0.0);
    Ok(EnergyLimitTable { mu, rows, decay_rate, fitted_c, decreasing })
}
