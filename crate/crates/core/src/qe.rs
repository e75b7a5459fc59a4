//! Quasi-Einstein verification: fitted constants, residuals and the a priori
//! estimates for compact examples.

use crate::dim::DimParam;
use crate::error::{Error, Result};
use crate::geometry::{DensityPoint, Geometry, PointData};
use rayon::prelude::*;
use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InequalityCheck {
    pub name: String,
    pub holds: bool,
    /// Signed slack; nonnegative (up to tolerance) when the inequality holds.
    pub margin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QEReport {
    pub n: usize,
    pub m: DimParam,
    pub grid_points: usize,
    pub tol: f64,
    pub lambda_fit: f64,
    /// `sup |Ric_φ^m − λ g|` over the grid.
    pub max_residual: f64,
    /// Characteristic constant; equal to `λ` when `m = ±∞`, absent when `m = 0`.
    pub mu_fit: Option<f64>,
    /// `sup − inf` of the pointwise characteristic constant (of `μ′` when `m = +∞`).
    pub mu_variation: f64,
    /// `μ′` from `R_φ^∞ + 2λ(φ − n) = −μ′`, only for `m = +∞`.
    pub mu_prime_fit: Option<f64>,
    pub inequality_checks: Vec<InequalityCheck>,
}

impl QEReport {
    pub fn is_quasi_einstein(&self) -> bool {
        self.max_residual <= self.tol
    }

    /// Residual, constancy of the characteristic constant (relative to
    /// `1 + |μ|`) and every applicable estimate.
    pub fn passed(&self) -> bool {
        let scale = 1.0 + self.mu_fit.or(self.mu_prime_fit).map_or(0.0, f64::abs);
        self.is_quasi_einstein()
            && self.mu_variation <= self.tol * scale
            && self.inequality_checks.iter().all(|c| c.holds)
    }

    pub fn check(&self, name: &str) -> Option<&InequalityCheck> {
        self.inequality_checks.iter().find(|c| c.name == name)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct QeOptions {
    pub tol: f64,
    /// Ask for `μ′` explicitly; an error when `m = −∞`.
    pub want_mu_prime: bool,
    pub estimates: bool,
}

impl Default for QeOptions {
    fn default() -> Self {
        QeOptions { tol: 1e-9, want_mu_prime: false, estimates: true }
    }
}

impl QeOptions {
    pub fn tol(tol: f64) -> Self {
        QeOptions { tol, ..Default::default() }
    }
}

/// Evaluate a geometry on a grid (in parallel, order preserved).
pub fn evaluate<G: Geometry>(g: &G, grid: &[f64]) -> Result<Vec<PointData>> {
    grid.par_iter().map(|&r| g.point(r)).collect()
}

pub fn qe_verify<G: Geometry>(g: &G, grid: &[f64], opts: QeOptions) -> Result<QEReport> {
    if grid.is_empty() {
        return Err(Error::invalid("empty sample grid"));
    }
    if !(opts.tol > 0.0) {
        return Err(Error::invalid("tolerance must be positive"));
    }
    let m = g.dim_param();
    if opts.want_mu_prime && m == DimParam::NegInfinity {
        return Err(Error::Unsupported(
            "the mu' characteristic constant is only defined for m = +inf".into(),
        ));
    }
    let pts = evaluate(g, grid)?;
    qe_report(g.dim(), m, g.bounded(), &pts, opts)
}

/// Build a report from already evaluated points.
pub fn qe_report(n: usize, m: DimParam, bounded: bool, pts: &[PointData], opts: QeOptions) -> Result<QEReport> {
    let (mut num, mut den) = (0.0, 0.0);
    for p in pts {
        for b in &p.blocks {
            num += b.mult as f64 * b.ric_w;
            den += b.mult as f64;
        }
    }
    let lambda = num / den;
    let max_residual = pts
        .iter()
        .flat_map(|p| p.blocks.iter().map(|b| (b.ric_w - lambda).abs()))
        .fold(0.0, f64::max);
    let nf = n as f64;
    let pointwise: Vec<f64> = match m {
        DimParam::Finite(mm) if mm != 0.0 => pts
            .iter()
            .map(|p| match p.density {
                DensityPoint::Finite { v, .. } => ((mm + nf) * lambda - p.scalar_w) * v * v / mm,
                _ => f64::NAN,
            })
            .collect(),
        DimParam::PosInfinity => pts
            .iter()
            .map(|p| match p.density {
                DensityPoint::Infinite { phi, .. } => -p.scalar_w - 2.0 * lambda * (phi - nf),
                _ => f64::NAN,
            })
            .collect(),
        _ => Vec::new(),
    };
    let (mean, var) = if pointwise.is_empty() {
        (None, 0.0)
    } else {
        let mean = pointwise.iter().sum::<f64>() / pointwise.len() as f64;
        let hi = pointwise.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let lo = pointwise.iter().cloned().fold(f64::INFINITY, f64::min);
        (Some(mean), hi - lo)
    };
    let (mu_fit, mu_prime_fit) = match m {
        DimParam::Finite(mm) if mm != 0.0 => (mean, None),
        DimParam::Finite(_) => (None, None),
        DimParam::PosInfinity => (Some(lambda), mean),
        DimParam::NegInfinity => (Some(lambda), None),
    };
    let mut report = QEReport {
        n,
        m,
        grid_points: pts.len(),
        tol: opts.tol,
        lambda_fit: lambda,
        max_residual,
        mu_fit,
        mu_variation: var,
        mu_prime_fit,
        inequality_checks: Vec::new(),
    };
    if opts.estimates && report.is_quasi_einstein() {
        report.inequality_checks = estimates(n, m, bounded, lambda, mu_fit, pts, opts.tol);
    }
    Ok(report)
}

fn min_over<F: Fn(&PointData) -> f64>(pts: &[PointData], f: F) -> f64 {
    pts.iter().map(f).fold(f64::INFINITY, f64::min)
}

fn grad2(p: &PointData) -> f64 {
    match p.density {
        DensityPoint::Finite { grad2_v, .. } => grad2_v,
        DensityPoint::Infinite { grad2_phi, .. } => grad2_phi,
        DensityPoint::Trivial => 0.0,
    }
}

fn v_of(p: &PointData) -> f64 {
    match p.density {
        DensityPoint::Finite { v, .. } => v,
        _ => 1.0,
    }
}

fn check(name: &str, margin: f64, tol: f64) -> InequalityCheck {
    InequalityCheck { name: name.into(), holds: margin >= -tol, margin }
}

/// Applicable estimates for a quasi-Einstein SMMS; `bounded` stands in for
/// compactness of the underlying manifold. Nothing is checked at `m = 1`.
fn estimates(n: usize, m: DimParam, bounded: bool, lambda: f64, mu: Option<f64>, pts: &[PointData], tol: f64) -> Vec<InequalityCheck> {
    let nf = n as f64;
    let mut out = Vec::new();
    let nontrivial = pts.iter().any(|p| grad2(p) > tol);
    if bounded && nontrivial {
        let mu_ok = m.is_infinite() || mu.is_some_and(|u| u > 0.0);
        let margin = if m.is_infinite() { lambda } else { lambda.min(mu.unwrap_or(f64::NAN)) };
        out.push(InequalityCheck {
            name: "positive_constants".into(),
            holds: lambda > 0.0 && mu_ok,
            margin,
        });
    }
    let Some(mm) = m.finite() else { return out };
    if lambda > tol && mm > 0.0 {
        out.push(InequalityCheck { name: "compactness".into(), holds: bounded, margin: if bounded { 0.0 } else { -1.0 } });
    }
    if !bounded || mm == 1.0 {
        return out;
    }
    if mm > 1.0 && lambda > 0.0 {
        let bound = nf * (nf - 1.0) * lambda / (mm + nf - 1.0);
        out.push(check("scalar_lower_bound", min_over(pts, |p| p.scalar - bound), tol));
        if let Some(mu) = mu.filter(|&u| u > 0.0) {
            let margin = min_over(pts, |p| {
                let v = v_of(p);
                mu / (mm - 1.0) - grad2(p) - lambda * v * v / (mm + nf - 1.0)
            });
            out.push(check("gradient_estimate", margin, tol));
        }
    }
    if mm < 1.0 - nf {
        let md = 2.0 - mm - nf;
        if let Some(mu) = mu {
            if lambda > 0.0 {
                let margin = min_over(pts, |p| {
                    let u = v_of(p);
                    lambda * u * u / (md - 1.0) - grad2(p) - mu / (md + nf - 1.0)
                });
                out.push(check("dual_gradient_estimate", margin, tol));
            }
            if mu > 0.0 {
                let lower = -nf * (nf - 1.0) * lambda / (md - 1.0);
                let upper = (md + 2.0 * nf - 2.0) * lambda;
                let margin = min_over(pts, |p| (p.scalar - lower).min(upper - p.scalar));
                out.push(check("dual_scalar_bounds", margin, tol));
            }
        }
    }
    out
}

/// One row of a large-`m` limit table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MuLimitRow {
    pub m: f64,
    pub lambda: f64,
    pub mu: f64,
    /// `m(μ − λ)`, which tends to `μ′ − nλ`.
    pub scaled_gap: f64,
    pub lambda_error: f64,
    pub mu_error: f64,
    pub limit_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MuLimitTable {
    pub target_lambda: f64,
    pub target_mu_prime: f64,
    pub rows: Vec<MuLimitRow>,
    /// Observed decay exponents of `limit_error` between consecutive rows.
    pub rates: Vec<f64>,
}

/// Tabulate `λᵢ → λ`, `μᵢ → λ`, `mᵢ(μᵢ − λᵢ) → μ′ − nλ`.
pub fn mu_limit_table(n: usize, family: &[(f64, f64, f64)], target: (f64, f64)) -> Result<MuLimitTable> {
    if family.is_empty() {
        return Err(Error::invalid("empty family"));
    }
    let (lam, mu_prime) = target;
    let goal = mu_prime - n as f64 * lam;
    let rows: Vec<MuLimitRow> = family
        .iter()
        .map(|&(m, l, u)| MuLimitRow {
            m,
            lambda: l,
            mu: u,
            scaled_gap: m * (u - l),
            lambda_error: (l - lam).abs(),
            mu_error: (u - lam).abs(),
            limit_error: (m * (u - l) - goal).abs(),
        })
        .collect();
    let rates = rows
        .windows(2)
        .map(|w| -(w[1].limit_error / w[0].limit_error).ln() / (w[1].m / w[0].m).ln())
        .collect();
    Ok(MuLimitTable { target_lambda: lam, target_mu_prime: mu_prime, rows, rates })
}

/// Verify each member with [`qe_verify`] and tabulate the limit.
pub fn mu_limit_check<G, F>(n: usize, ms: &[f64], build: F, grid_k: usize, tol: f64, target: (f64, f64)) -> Result<MuLimitTable>
where
    G: Geometry,
    F: Fn(f64) -> Result<G> + Sync,
{
    let family: Result<Vec<(f64, f64, f64)>> = ms
        .par_iter()
        .map(|&m| {
            let g = build(m)?;
            let rep = qe_verify(&g, &g.grid(grid_k), QeOptions { tol, want_mu_prime: false, estimates: false })?;
            if !rep.is_quasi_einstein() {
                return Err(Error::invalid(format!("family member m = {m} is not quasi-Einstein (residual {})", rep.max_residual)));
            }
            let mu = rep.mu_fit.ok_or_else(|| Error::invalid("family member has no characteristic constant"))?;
            Ok((m, rep.lambda_fit, mu))
        })
        .collect();
    mu_limit_table(n, &family?, target)
}
