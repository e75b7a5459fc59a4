use super::{Component, CurveProfile, FamilyKind, OdeCurve, RhsFn, Status, Trajectory};
use crate::dim::DimParam;
use crate::error::{Error, Result};
use crate::geometry::DensityPoint;
use crate::jet::Jet;
use crate::ode::{Control, Dopri5};
use crate::profile::ProfileFn;
use crate::smms::{Density, Poles, RadialSmms};
use serde::Serialize;
use std::sync::Arc;

/// Rows written to a cigar trajectory.
const ROWS: usize = 501;

/// The rotationally symmetric BER-flat SMMS on `ℝ²` with `ψ = (m−1)v′/2`,
/// `((m−1)v′/2)² = 1 − v^{1−m}`, `v(0) = 1`, on `[0, t_max]`.
///
/// With `p = m log v` the system `p′ = 2mψ e^{−p/m}/(m−1)`, `ψ′ = e^{−p}` is
/// regular at the pole and has a limit as `m → ∞` (`p = −φ`), so no series
/// start is needed. `m = +∞` returns `ψ = tanh t`, `φ = log sech² t`.
/// `Trajectory::mu` holds `μ = 4/(m−1)`, or `μ′ = 4` when `m = +∞`.
pub fn cigar_solve(m: DimParam, t_max: f64, tol: f64) -> Result<Trajectory> {
    if !(t_max > 0.0 && t_max.is_finite()) {
        return Err(Error::invalid("t_max must be positive and finite"));
    }
    if !(tol > 0.0) {
        return Err(Error::invalid("tolerance must be positive"));
    }
    let ts: Vec<f64> = (0..ROWS).map(|i| t_max * i as f64 / (ROWS - 1) as f64).collect();
    let poles = Poles { left: true, right: false };
    let mm = match m {
        DimParam::PosInfinity => {
            let psi = ProfileFn::tanh(1.0, 1.0, 0.0);
            let phi = ProfileFn::sech2(1.0, 1.0, 0.0).ln();
            let smms = RadialSmms::new(2, (0.0, t_max), Some(psi), Density::Phi(phi.clone()), m, poles)?;
            let mut traj = empty(m, tol, vec!["phi".into()]);
            for &t in &ts {
                let (s, ph) = (t.tanh(), phi.value(t)?);
                traj.push(t, vec![ph], s, f64::NAN, (s * s - 1.0 + ph.exp()).abs());
            }
            traj.mu = 4.0;
            traj.smms = Some(smms);
            return Ok(traj);
        }
        DimParam::Finite(mm) if mm > 1.0 => mm,
        _ => return Err(Error::invalid(format!("the cigar family needs m > 1, got m = {m}"))),
    };
    let c = 2.0 * mm / (mm - 1.0);
    let rhs: RhsFn = Arc::new(move |_, y, d| {
        d[0] = c * y[1] * (-y[0] / mm).exp();
        d[1] = (-y[0]).exp();
        Ok(())
    });
    let solver = Dopri5 { h_init: 1e-4, ..Dopri5::with_tol(tol, tol * 1e-2) };
    let f = rhs.clone();
    let path = solver.solve(move |t, y: &[f64], d: &mut [f64]| f(t, y, d), 0.0, &[0.0, 0.0], t_max, |_, _| Control::Continue)?;
    let curve = Arc::new(OdeCurve::new(rhs, solver, path.t, path.y, None, (0.0, t_max)));
    let jets = move |e: &[Vec<f64>; 3]| cigar_jets(mm, e[0][0], e[0][1]);
    let psi = CurveProfile { curve: curve.clone(), component: Component::Map(Arc::new(move |e| jets(e).0)) };
    let v = CurveProfile { curve: curve.clone(), component: Component::Map(Arc::new(move |e| jets(e).1)) };
    let smms = RadialSmms::new(
        2,
        (0.0, t_max),
        Some(ProfileFn::custom(Arc::new(psi))),
        Density::V(ProfileFn::custom(Arc::new(v))),
        m,
        poles,
    )?;
    let mut traj = empty(m, tol, vec!["phi".into()]);
    for &t in &ts {
        let y = &curve.eval(t)?[0];
        let (p, s) = (y[0], y[1]);
        traj.push(t, vec![-p], s, (p / mm).exp(), (s * s - 1.0 + (-p * (mm - 1.0) / mm).exp()).abs());
    }
    traj.mu = 4.0 / (mm - 1.0);
    traj.smms = Some(smms);
    Ok(traj)
}

fn empty(m: DimParam, tol: f64, state_names: Vec<String>) -> Trajectory {
    Trajectory {
        kind: FamilyKind::Cigar,
        n: 2,
        m,
        tol,
        status: Status::Converged,
        state_names,
        t: Vec::new(),
        state: Vec::new(),
        r: Vec::new(),
        psi: Vec::new(),
        v: Vec::new(),
        kappa: Vec::new(),
        log_kappa: Vec::new(),
        sphere_defect: Vec::new(),
        integrability_residual: Vec::new(),
        smms: None,
        lambda: 0.0,
        mu: f64::NAN,
        summary: Vec::new(),
    }
}

impl Trajectory {
    fn push(&mut self, t: f64, state: Vec<f64>, psi: f64, v: f64, integrability: f64) {
        self.t.push(t);
        self.state.push(state);
        self.r.push(t);
        self.psi.push(psi);
        self.v.push(v);
        self.kappa.push(f64::NAN);
        self.log_kappa.push(f64::NAN);
        self.sphere_defect.push(f64::NAN);
        self.integrability_residual.push(integrability);
    }
}

/// Exact jets of `ψ` and `v = e^{p/m}` from the state `(p, ψ)`.
fn cigar_jets(m: f64, p: f64, psi: f64) -> (Jet, Jet) {
    let c = 2.0 * m / (m - 1.0);
    let e = (-p).exp();
    let em = (-p / m).exp();
    let p1 = c * psi * em;
    let s1 = e;
    let s2 = -p1 * e;
    let g = s1 - psi * p1 / m;
    let p2 = c * em * g;
    let s3 = (p1 * p1 - p2) * e;
    let g1 = s2 - (s1 * p1 + psi * p2) / m;
    let p3 = c * em * (g1 - p1 * g / m);
    let v = (p / m).exp();
    let v1 = p1 / m * v;
    let v2 = (p2 / m + p1 * p1 / (m * m)) * v;
    let v3 = (p3 / m + 3.0 * p1 * p2 / (m * m) + p1.powi(3) / m.powi(3)) * v;
    (Jet::new(psi, s1, s2, s3), Jet::new(v, v1, v2, v3))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BerFlatCheck {
    /// `μ` (finite `m`) or `μ′` (`m = +∞`) used in the check.
    pub mu: f64,
    /// Whether `μ` was estimated from the tail of the grid.
    pub mu_estimated: bool,
    /// `sup |Δφ − |∇φ|² + mμe^{2φ/m}|`, or `sup |Δφ − |∇φ|² + μ′|`.
    pub max_residual: f64,
    /// Whether `φ` is nonconstant on the grid.
    pub nontrivial: bool,
    /// Nontrivial complete examples must have positive `μ`.
    pub sign_consistent: bool,
}

/// Residual of the background equation of a BER-flat SMMS. When `mu` is not
/// given it is estimated from the last third of the grid and then checked on
/// the whole grid.
pub fn ber_flat_background_check(s: &RadialSmms, mu: Option<f64>, grid: &[f64], tol: f64) -> Result<BerFlatCheck> {
    if grid.is_empty() {
        return Err(Error::invalid("empty sample grid"));
    }
    let m = s.m();
    if m.is_zero() || m == DimParam::NegInfinity {
        return Err(Error::Unsupported("the background equation is checked for finite nonzero m and m = +inf".into()));
    }
    let pts = crate::qe::evaluate(s, grid)?;
    // (Δφ − |∇φ|², the coefficient multiplying μ, |∇φ|²)
    let terms: Vec<(f64, f64, f64)> = pts
        .iter()
        .map(|p| match (p.density, m) {
            (DensityPoint::Finite { v, grad2_v, .. }, DimParam::Finite(mm)) => {
                (mm * p.lap_phi_over_m, mm / (v * v), mm * mm * grad2_v / (v * v))
            }
            (DensityPoint::Infinite { grad2_phi, .. }, _) => (p.lap_phi, 1.0, grad2_phi),
            _ => (0.0, 1.0, 0.0),
        })
        .collect();
    let (mu, mu_estimated) = match mu {
        Some(u) => (u, false),
        None => {
            let tail = &terms[terms.len() * 2 / 3..];
            let est = tail.iter().map(|(a, b, _)| -a / b).sum::<f64>() / tail.len() as f64;
            (est, true)
        }
    };
    let max_residual = terms.iter().map(|(a, b, _)| (a + b * mu).abs()).fold(0.0, f64::max);
    let nontrivial = terms.iter().any(|t| t.2 > tol);
    Ok(BerFlatCheck { mu, mu_estimated, max_residual, nontrivial, sign_consistent: !nontrivial || mu > 0.0 })
}
