//! Pointwise weighted-curvature data shared by every ansatz, so verification,
//! energies and products are written once.

use crate::dim::DimParam;
use crate::error::Result;
use crate::smms::{LocalDensity, RadialSmms};

/// An eigenspace of the (diagonal) curvature with its multiplicity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Block {
    pub mult: usize,
    /// Plain Ricci eigenvalue.
    pub ric: f64,
    /// Bakry–Émery Ricci eigenvalue.
    pub ric_w: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DensityPoint {
    Finite { m: f64, v: f64, grad2_v: f64, lap_v: f64 },
    Infinite { phi: f64, grad2_phi: f64 },
    Trivial,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PointData {
    pub r: f64,
    pub blocks: Vec<Block>,
    /// Plain scalar curvature.
    pub scalar: f64,
    pub scalar_w: f64,
    /// `Δ_φ φ`.
    pub lap_phi: f64,
    /// `(1/m) Δ_φ φ` for finite nonzero `m`, else zero.
    pub lap_phi_over_m: f64,
    pub density: DensityPoint,
    /// `dvol = area · dr`.
    pub area: f64,
    /// Measure weight relative to `dvol`.
    pub weight: f64,
}

impl PointData {
    pub fn dim(&self) -> usize {
        self.blocks.iter().map(|b| b.mult).sum()
    }

    pub fn trace_w(&self) -> f64 {
        self.blocks.iter().map(|b| b.mult as f64 * b.ric_w).sum()
    }

    /// `v^{−2}`, `e^{2φ/m}` with `m = ±∞` (i.e. 1), or 1.
    pub fn v_inv2(&self) -> f64 {
        match self.density {
            DensityPoint::Finite { v, .. } => 1.0 / (v * v),
            _ => 1.0,
        }
    }
}

/// A cohomogeneity-one SMMS parameterized by a radial coordinate.
pub trait Geometry: Send + Sync {
    /// Total dimension `n` of the manifold.
    fn dim(&self) -> usize;
    fn dim_param(&self) -> DimParam;
    fn interval(&self) -> (f64, f64);
    fn point(&self, r: f64) -> Result<PointData>;

    fn bounded(&self) -> bool {
        let (a, b) = self.interval();
        a.is_finite() && b.is_finite()
    }

    /// `k` cell midpoints (a window of length 10 for an unbounded end).
    fn grid(&self, k: usize) -> Vec<f64> {
        let (lo, hi) = self.interval();
        let hi = if hi.is_finite() { hi } else { lo.max(-5.0) + 10.0 };
        let lo = if lo.is_finite() { lo } else { hi - 10.0 };
        (0..k).map(|i| lo + (i as f64 + 0.5) / k as f64 * (hi - lo)).collect()
    }
}

impl Geometry for RadialSmms {
    fn dim(&self) -> usize {
        self.n()
    }

    fn dim_param(&self) -> DimParam {
        self.m()
    }

    fn interval(&self) -> (f64, f64) {
        self.domain()
    }

    fn point(&self, r: f64) -> Result<PointData> {
        let loc = self.local(r)?;
        let c = self.kernel(&loc);
        let n = self.n();
        let mut blocks = vec![Block { mult: 1, ric: c.ric_rr0, ric_w: c.ric_rr }];
        if n >= 2 {
            blocks.push(Block { mult: n - 1, ric: c.ric_tan0, ric_w: c.ric_tan });
        }
        let density = match loc.dens {
            LocalDensity::V(m, v) => DensityPoint::Finite {
                m,
                v: v.v,
                grad2_v: v.d1 * v.d1,
                lap_v: v.d2 + c.h * v.d1,
            },
            LocalDensity::Phi(p) => DensityPoint::Infinite { phi: p.v, grad2_phi: p.d1 * p.d1 },
            LocalDensity::Trivial => DensityPoint::Trivial,
        };
        Ok(PointData {
            r,
            blocks,
            scalar: c.scalar,
            scalar_w: c.scalar_w,
            lap_phi: c.lap_phi,
            lap_phi_over_m: c.lap_phi_over_m,
            density,
            area: self.area(&loc),
            weight: self.weight(&loc),
        })
    }

    fn grid(&self, k: usize) -> Vec<f64> {
        self.sample_grid(k)
    }
}

impl<G: Geometry + ?Sized> Geometry for &G {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn dim_param(&self) -> DimParam {
        (**self).dim_param()
    }
    fn interval(&self) -> (f64, f64) {
        (**self).interval()
    }
    fn point(&self, r: f64) -> Result<PointData> {
        (**self).point(r)
    }
    fn bounded(&self) -> bool {
        (**self).bounded()
    }
    fn grid(&self, k: usize) -> Vec<f64> {
        (**self).grid(k)
    }
}
