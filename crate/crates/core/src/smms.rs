//! Rotationally symmetric smooth metric measure spaces
//! `(I × S^{n−1}, dr² + ψ(r)² dθ², v^m dvol, m)`.

use crate::curvature::{radial, radial_divergence, sphere_area, DensityJet, Radial};
use crate::dim::DimParam;
use crate::error::{Error, Result};
use crate::jet::{Dual, Jet};
use crate::profile::ProfileFn;
use serde::{Deserialize, Serialize};

/// How the measure is carried.
#[derive(Debug, Clone)]
pub enum Density {
    /// `v` with measure `v^m dvol` (finite `m`).
    V(ProfileFn),
    /// `φ` with measure `e^{−φ} dvol` (`m = ±∞`).
    Phi(ProfileFn),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Poles {
    pub left: bool,
    pub right: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PoleSide {
    Left,
    Right,
}

/// JSON form of a [`RadialSmms`].
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Descriptor {
    pub n: usize,
    pub m: DimParam,
    pub domain: [DimParam; 2],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub psi: Option<ProfileFn>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v: Option<ProfileFn>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi: Option<ProfileFn>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub poles: Vec<PoleSide>,
}

/// Weighted curvature at one point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurvaturePoint {
    pub r: f64,
    pub ric_rr: f64,
    pub ric_tan: f64,
    pub scalar_w: f64,
    pub lap_phi: f64,
    pub bianchi_residual: f64,
}

/// Tolerance for the smooth-pole conditions at construction.
const POLE_TOL: f64 = 1e-6;

#[derive(Debug, Clone)]
pub struct RadialSmms {
    n: usize,
    domain: (f64, f64),
    psi: Option<ProfileFn>,
    density: Density,
    m: DimParam,
    poles: Poles,
    /// `a(r)` in `a² dr² + ψ² dθ²`; only perturbed metrics carry one.
    lapse: Option<ProfileFn>,
}

/// Jets at a point, already converted to arclength.
pub(crate) struct Local {
    pub psi: Option<Jet>,
    pub dens: LocalDensity,
    pub lapse: f64,
}

pub(crate) enum LocalDensity {
    V(f64, Jet),
    Phi(Jet),
    Trivial,
}

/// Derivatives with respect to arclength `ds = a dr`.
pub(crate) fn to_arclength(f: Jet, a: Jet) -> Jet {
    if a.v == 1.0 && a.d1 == 0.0 && a.d2 == 0.0 {
        return f;
    }
    let (a0, a1, a2) = (a.v, a.d1, a.d2);
    let d1 = f.d1 / a0;
    let d2 = (f.d2 - f.d1 * a1 / a0) / (a0 * a0);
    let d3 = ((f.d3 * a0 - f.d1 * a2) / a0.powi(3) - 3.0 * (f.d2 * a0 - f.d1 * a1) * a1 / a0.powi(4)) / a0;
    Jet::new(f.v, d1, d2, d3)
}

impl RadialSmms {
    pub fn new(n: usize, domain: (f64, f64), psi: Option<ProfileFn>, density: Density, m: DimParam, poles: Poles) -> Result<Self> {
        let s = RadialSmms { n, domain, psi, density, m, poles, lapse: None };
        s.validate()?;
        Ok(s)
    }

    /// Convenience constructor with `v` as density.
    pub fn with_v(n: usize, domain: (f64, f64), psi: Option<ProfileFn>, v: ProfileFn, m: impl Into<DimParam>) -> Result<Self> {
        let m = m.into();
        let density = if m.is_infinite() { Density::Phi(v.ln().scaled(-1.0)) } else { Density::V(v) };
        RadialSmms::new(n, domain, psi, density, m, Poles::default())
    }

    pub fn with_poles(mut self, poles: Poles) -> Result<Self> {
        self.poles = poles;
        self.validate()?;
        Ok(self)
    }

    pub(crate) fn with_lapse(mut self, lapse: ProfileFn) -> Self {
        self.lapse = Some(lapse);
        self
    }

    pub(crate) fn lapse(&self) -> Option<&ProfileFn> {
        self.lapse.as_ref()
    }

    pub fn from_descriptor(d: Descriptor) -> Result<Self> {
        let domain = (d.domain[0].as_f64(), d.domain[1].as_f64());
        let density = match (d.m, d.v, d.phi) {
            (_, Some(_), Some(_)) => return Err(Error::invalid("give either v or phi, not both")),
            (DimParam::Finite(m), Some(v), None) if m != 0.0 => Density::V(v),
            (DimParam::Finite(m), None, Some(phi)) if m != 0.0 => Density::V(phi.scaled(-1.0 / m).exp()),
            (DimParam::Finite(m), None, None) if m != 0.0 => return Err(Error::invalid("finite nonzero m needs a density")),
            (DimParam::Finite(_), v, phi) => match (v, phi) {
                (Some(v), _) => Density::V(v),
                (_, Some(phi)) => Density::Phi(phi),
                _ => Density::V(ProfileFn::constant(1.0)),
            },
            (_, None, Some(phi)) => Density::Phi(phi),
            (_, _, None) => return Err(Error::invalid("m = ±inf needs phi")),
        };
        let psi = if d.n == 1 { None } else { d.psi };
        let poles = Poles {
            left: d.poles.contains(&PoleSide::Left),
            right: d.poles.contains(&PoleSide::Right),
        };
        RadialSmms::new(d.n, domain, psi, density, d.m, poles)
    }

    pub fn to_descriptor(&self) -> Result<Descriptor> {
        if self.lapse.is_some() {
            return Err(Error::Unsupported("metrics with a non-unit lapse have no descriptor".into()));
        }
        let (v, phi) = match &self.density {
            Density::V(v) => (Some(v.clone()), None),
            Density::Phi(p) => (None, Some(p.clone())),
        };
        let mut poles = Vec::new();
        if self.poles.left {
            poles.push(PoleSide::Left);
        }
        if self.poles.right {
            poles.push(PoleSide::Right);
        }
        Ok(Descriptor {
            n: self.n,
            m: self.m,
            domain: [DimParam::from_f64(self.domain.0), DimParam::from_f64(self.domain.1)],
            psi: self.psi.clone(),
            v,
            phi,
            poles,
        })
    }

    fn validate(&self) -> Result<()> {
        let (lo, hi) = self.domain;
        if self.n == 0 {
            return Err(Error::invalid("n must be at least 1"));
        }
        if lo.is_nan() || hi.is_nan() || lo >= hi {
            return Err(Error::invalid(format!("bad domain [{lo}, {hi}]")));
        }
        if self.n >= 2 && self.psi.is_none() {
            return Err(Error::invalid("n ≥ 2 needs a warping profile psi"));
        }
        if self.n >= 2 && !lo.is_finite() {
            return Err(Error::invalid("the radial interval must have a finite left end when n ≥ 2"));
        }
        if let DimParam::Finite(m) = self.m {
            if m.is_nan() {
                return Err(Error::invalid("m is NaN"));
            }
        }
        match (&self.density, self.m) {
            (Density::Phi(_), DimParam::Finite(m)) if m != 0.0 => {
                return Err(Error::invalid("finite nonzero m carries the density as v"))
            }
            (Density::V(_), DimParam::PosInfinity | DimParam::NegInfinity) => {
                return Err(Error::invalid("m = ±inf carries the density as phi"))
            }
            _ => {}
        }
        if (self.poles.left && !lo.is_finite()) || (self.poles.right && !hi.is_finite()) {
            return Err(Error::invalid("a smooth pole needs a finite endpoint"));
        }
        for (flag, end, sign) in [(self.poles.left, lo, 1.0), (self.poles.right, hi, -1.0)] {
            if flag {
                self.check_pole(end, sign)?;
            }
        }
        let hi_s = if hi.is_finite() { hi } else { lo.max(-50.0) + 50.0 };
        let lo_s = if lo.is_finite() { lo } else { hi_s - 100.0 };
        for i in 0..64 {
            let r = lo_s + (i as f64 + 0.5) / 64.0 * (hi_s - lo_s);
            let loc = self.local_unchecked(r)?;
            if let Some(p) = loc.psi {
                if !(p.v > 0.0) {
                    return Err(Error::degenerate(format!("psi is not positive at r = {r}")));
                }
            }
            if let LocalDensity::V(_, v) = loc.dens {
                if !(v.v > 0.0) {
                    return Err(Error::degenerate(format!("v is not positive at r = {r}")));
                }
            }
        }
        Ok(())
    }

    fn check_pole(&self, end: f64, sign: f64) -> Result<()> {
        if self.n == 1 {
            return Err(Error::invalid("smooth poles need n ≥ 2"));
        }
        let loc = self.local_unchecked(end)?;
        let psi = loc.psi.expect("n ≥ 2 has psi");
        let dd = match loc.dens {
            LocalDensity::V(_, v) => v.d1,
            LocalDensity::Phi(p) => p.d1,
            LocalDensity::Trivial => 0.0,
        };
        if psi.v.abs() > POLE_TOL || (sign * psi.d1 - 1.0).abs() > POLE_TOL || dd.abs() > POLE_TOL {
            return Err(Error::invalid(format!(
                "smooth-pole conditions fail at r = {end}: psi = {}, psi' = {}, density' = {dd}",
                psi.v, psi.d1
            )));
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> DimParam {
        self.m
    }

    pub fn domain(&self) -> (f64, f64) {
        self.domain
    }

    pub fn poles(&self) -> Poles {
        self.poles
    }

    pub fn psi(&self) -> Option<&ProfileFn> {
        self.psi.as_ref()
    }

    pub fn density(&self) -> &Density {
        &self.density
    }

    /// The density profile `v`, when carried as such.
    pub fn v(&self) -> Option<&ProfileFn> {
        match &self.density {
            Density::V(v) => Some(v),
            Density::Phi(_) => None,
        }
    }

    /// Same geometry and density profile with another dimensional parameter
    /// (the density representation must stay valid).
    pub fn with_m(&self, m: DimParam) -> Result<Self> {
        let mut s = self.clone();
        s.m = m;
        s.validate()?;
        Ok(s)
    }

    /// Whether every derivative used by the identities is exact.
    pub fn exact_derivatives(&self) -> bool {
        let d = match &self.density {
            Density::V(p) | Density::Phi(p) => p.exact_third(),
        };
        d && self.psi.as_ref().is_none_or(|p| p.exact_third()) && self.lapse.as_ref().is_none_or(|p| p.exact_third())
    }

    /// Smallest sample spacing of any interpolated constituent.
    pub fn min_spacing(&self) -> Option<f64> {
        let d = match &self.density {
            Density::V(p) | Density::Phi(p) => p.min_spacing(),
        };
        [d, self.psi.as_ref().and_then(|p| p.min_spacing())].into_iter().flatten().reduce(f64::min)
    }

    pub fn is_compact(&self) -> bool {
        self.domain.0.is_finite() && self.domain.1.is_finite()
    }

    /// `k` cell midpoints across the domain (a window of length 10 for an
    /// unbounded end).
    pub fn sample_grid(&self, k: usize) -> Vec<f64> {
        let (lo, hi) = self.domain;
        let hi = if hi.is_finite() { hi } else { lo.max(-5.0) + 10.0 };
        let lo = if lo.is_finite() { lo } else { hi - 10.0 };
        (0..k).map(|i| lo + (i as f64 + 0.5) / k as f64 * (hi - lo)).collect()
    }

    pub(crate) fn local_unchecked(&self, r: f64) -> Result<Local> {
        let lapse = match &self.lapse {
            Some(a) => a.jet(r)?,
            None => Jet::constant(1.0),
        };
        if !(lapse.v > 0.0) {
            return Err(Error::degenerate(format!("lapse is not positive at r = {r}")));
        }
        let psi = match &self.psi {
            Some(p) if self.n >= 2 => Some(to_arclength(p.jet(r)?, lapse)),
            _ => None,
        };
        let dens = match (&self.density, self.m) {
            (Density::V(v), DimParam::Finite(m)) if m != 0.0 => LocalDensity::V(m, to_arclength(v.jet(r)?, lapse)),
            (Density::Phi(p), DimParam::PosInfinity | DimParam::NegInfinity) => LocalDensity::Phi(to_arclength(p.jet(r)?, lapse)),
            _ => LocalDensity::Trivial,
        };
        Ok(Local { psi, dens, lapse: lapse.v })
    }

    pub(crate) fn local(&self, r: f64) -> Result<Local> {
        let (lo, hi) = self.domain;
        if !(r >= lo && r <= hi) {
            return Err(Error::OutOfDomain { r, lo, hi });
        }
        if (self.poles.left && r == lo) || (self.poles.right && r == hi) {
            return Err(Error::degenerate(format!("r = {r} is a smooth pole; use pole_limit")));
        }
        let loc = self.local_unchecked(r)?;
        if let Some(p) = loc.psi {
            if !(p.v > 0.0) {
                return Err(Error::degenerate(format!("psi vanishes at r = {r}")));
            }
        }
        if let LocalDensity::V(_, v) = loc.dens {
            if !(v.v > 0.0) {
                return Err(Error::degenerate(format!("v vanishes at r = {r}")));
            }
        }
        Ok(loc)
    }

    pub(crate) fn kernel(&self, loc: &Local) -> Radial<f64> {
        let psi = loc.psi.map(|j| [j.v, j.d1, j.d2]);
        let dens = match loc.dens {
            LocalDensity::V(m, v) => DensityJet::Finite { m, v: v.v, v1: v.d1, v2: v.d2 },
            LocalDensity::Phi(p) => DensityJet::Infinite { p1: p.d1, p2: p.d2 },
            LocalDensity::Trivial => DensityJet::Trivial,
        };
        radial(self.n, psi, dens)
    }

    pub(crate) fn kernel_dual(&self, loc: &Local) -> Radial<Dual> {
        let psi = loc.psi.map(|j| [j.dual0(), j.dual1(), j.dual2()]);
        let dens = match loc.dens {
            LocalDensity::V(m, v) => DensityJet::Finite { m, v: v.dual0(), v1: v.dual1(), v2: v.dual2() },
            LocalDensity::Phi(p) => DensityJet::Infinite { p1: p.dual1(), p2: p.dual2() },
            LocalDensity::Trivial => DensityJet::Trivial,
        };
        radial(self.n, psi, dens)
    }

    pub(crate) fn eval(&self, r: f64) -> Result<Radial<f64>> {
        let loc = self.local(r)?;
        Ok(self.kernel(&loc))
    }

    /// `(Ric_φ^m(∂_s,∂_s), Ric_φ^m(e,e))` for unit radial and tangential `e`.
    pub fn bakry_emery_ricci(&self, r: f64) -> Result<(f64, f64)> {
        let c = self.eval(r)?;
        Ok((c.ric_rr, c.ric_tan))
    }

    /// `R_φ^m`.
    pub fn weighted_scalar(&self, r: f64) -> Result<f64> {
        Ok(self.eval(r)?.scalar_w)
    }

    /// Plain scalar curvature `R` of `g`.
    pub fn scalar(&self, r: f64) -> Result<f64> {
        Ok(self.eval(r)?.scalar)
    }

    /// `Δ_φ φ`.
    pub fn lap_phi(&self, r: f64) -> Result<f64> {
        Ok(self.eval(r)?.lap_phi)
    }

    /// `Δ_φ w = w″ + Hw′ − φ′w′`, with `Δ(r²) = 2n` on flat space.
    pub fn weighted_laplacian(&self, w: &ProfileFn, r: f64) -> Result<f64> {
        let loc = self.local(r)?;
        let c = self.kernel(&loc);
        let lapse = match &self.lapse {
            Some(a) => a.jet(r)?,
            None => Jet::constant(1.0),
        };
        let wj = to_arclength(w.jet(r)?, lapse);
        Ok(wj.d2 + (c.h - c.dphi) * wj.d1)
    }

    /// Radial component of `δ_φ Ric_φ^m − ½ dR_φ^m + (1/m) Δ_φφ dφ`.
    pub fn bianchi_residual(&self, r: f64) -> Result<f64> {
        let c = self.kernel_dual(&self.local(r)?);
        let div = radial_divergence(c.ric_rr.v, c.ric_rr.d, c.ric_tan.v, c.h.v, c.dphi.v);
        Ok(div - 0.5 * c.scalar_w.d + c.lap_phi_over_m.v * c.dphi.v)
    }

    /// Radial component of `B_φ Ric_φ^m − ½ e^{2φ/m} d(e^{−2φ/m} Δ_φφ)` with
    /// `B_φ T = δ_φ T − ½ d tr T`.
    pub fn bianchi_operator_residual(&self, r: f64) -> Result<f64> {
        let c = self.kernel_dual(&self.local(r)?);
        let nf = self.n as f64;
        let div = radial_divergence(c.ric_rr.v, c.ric_rr.d, c.ric_tan.v, c.h.v, c.dphi.v);
        let dtrace = c.ric_rr.d + (nf - 1.0) * c.ric_tan.d;
        Ok(div - 0.5 * dtrace - 0.5 * c.lap_phi.d + c.lap_phi_over_m.v * c.dphi.v)
    }

    pub fn curvature_point(&self, r: f64) -> Result<CurvaturePoint> {
        let c = self.eval(r)?;
        Ok(CurvaturePoint {
            r,
            ric_rr: c.ric_rr,
            ric_tan: c.ric_tan,
            scalar_w: c.scalar_w,
            lap_phi: c.lap_phi,
            bianchi_residual: self.bianchi_residual(r)?,
        })
    }

    /// Riemannian area element `ω_{n−1} ψ^{n−1} a` (so `dvol = area · dr`).
    pub(crate) fn area(&self, loc: &Local) -> f64 {
        let psi_pow = match loc.psi {
            Some(p) => p.v.powi(self.n as i32 - 1),
            None => 1.0,
        };
        sphere_area(self.n) * psi_pow * loc.lapse
    }

    /// The weight `v^m`, `e^{−φ}` or `1` relative to `dvol`.
    pub(crate) fn weight(&self, loc: &Local) -> f64 {
        match loc.dens {
            LocalDensity::V(m, v) => v.v.powf(m),
            LocalDensity::Phi(p) => (-p.v).exp(),
            LocalDensity::Trivial => 1.0,
        }
    }
}

/// One-sided limit at a smooth pole `r0` of a quantity even in `r − r0`,
/// by Richardson extrapolation of samples at `r0 ± h`, `r0 ± 2h`.
pub fn pole_limit<F: Fn(f64) -> Result<f64>>(f: F, r0: f64, dir: f64, h: f64) -> Result<f64> {
    let a = f(r0 + dir * h)?;
    let b = f(r0 + dir * 2.0 * h)?;
    Ok((4.0 * a - b) / 3.0)
}
