//! Example families: closed-form model spaces, ODE-constructed solutions and
//! product constructions.

mod bohm;
mod cigar;
mod elliptic;
mod lpp;
mod products;

pub use bohm::{
    bohm_bryant_solve, bohm_eigenvalues, bohm_fixed_points, bohm_psi_at, bryant_asymptotics_check, epsilon_independence,
    fit_power_law, lyapunov_kappa, lyapunov_log_rate, BohmOptions, BryantAsymptotics, PowerFit,
};
pub use cigar::{ber_flat_background_check, cigar_solve, BerFlatCheck};
pub use elliptic::{elliptic_gaussian, Sign};
pub use lpp::{lpp_solve, ClosureDefects, LppOptions, LppSolution, MultiProfileSmms};
pub use products::{product_flat, product_warped, Fiber, ProductDescriptor, ProductKind, ProductResult, ProductSmms};

use crate::dim::DimParam;
use crate::error::{Error, Result};
use crate::jet::Jet;
use crate::ode::Dopri5;
use crate::profile::JetSource;
use crate::smms::RadialSmms;
use serde::Serialize;
use std::fmt;
use std::sync::Arc;

/// Outcome of an ODE family solve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    /// Reached the target (fixed point, requested end, closure).
    Converged,
    /// Ran out of the independent-variable span first.
    SpanExhausted,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyKind {
    Cigar,
    Bohm,
    Lpp,
}

/// A solved ODE family: the integration grid with its states, the geometric
/// profiles read off along it and the solver diagnostics. Diagnostics that do
/// not apply to a family are NaN.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub kind: FamilyKind,
    pub n: usize,
    pub m: DimParam,
    pub tol: f64,
    pub status: Status,
    pub state_names: Vec<String>,
    pub t: Vec<f64>,
    pub state: Vec<Vec<f64>>,
    pub r: Vec<f64>,
    pub psi: Vec<f64>,
    pub v: Vec<f64>,
    pub kappa: Vec<f64>,
    /// `log κ`, evaluated factor by factor (monotonicity is checked on it).
    pub log_kappa: Vec<f64>,
    pub sphere_defect: Vec<f64>,
    pub integrability_residual: Vec<f64>,
    pub smms: Option<RadialSmms>,
    pub lambda: f64,
    /// `μ`, or `μ′` when `m = +∞`.
    pub mu: f64,
    /// Family-specific scalar diagnostics.
    pub summary: Vec<(String, f64)>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    pub fn header(&self) -> Vec<String> {
        let mut h = vec!["t".to_string()];
        h.extend(self.state_names.iter().cloned());
        h.extend(["r", "psi", "v", "kappa", "sphere_defect", "integrability_residual"].map(String::from));
        h
    }

    pub fn row(&self, i: usize) -> Vec<f64> {
        let mut row = vec![self.t[i]];
        row.extend(self.state[i].iter().copied());
        row.extend([self.r[i], self.psi[i], self.v[i], self.kappa[i], self.sphere_defect[i], self.integrability_residual[i]]);
        row
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.header().join(",");
        out.push('\n');
        for i in 0..self.len() {
            let cells: Vec<String> = self.row(i).into_iter().map(format_number).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    pub fn max_sphere_defect(&self) -> f64 {
        nan_max(&self.sphere_defect)
    }

    pub fn max_integrability_residual(&self) -> f64 {
        nan_max(&self.integrability_residual)
    }

    pub fn summary_value(&self, key: &str) -> Option<f64> {
        self.summary.iter().find(|(k, _)| k == key).map(|(_, v)| *v)
    }

    /// Indices `i` with `κ(t_{i+1}) ≥ κ(t_i)`.
    pub fn kappa_violations(&self) -> Vec<usize> {
        self.log_kappa
            .windows(2)
            .enumerate()
            .filter(|(_, w)| w[0].is_finite() && w[1].is_finite() && w[1] >= w[0])
            .map(|(i, _)| i)
            .collect()
    }
}

fn nan_max(xs: &[f64]) -> f64 {
    xs.iter().copied().filter(|x| !x.is_nan()).fold(0.0, f64::max)
}

/// 17 significant digits, `+inf`/`-inf` for infinities and `nan`.
pub fn format_number(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x == f64::INFINITY {
        "+inf".into()
    } else if x == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        format!("{x:.16e}")
    }
}

pub(crate) type RhsFn = Arc<dyn Fn(f64, &[f64], &mut [f64]) -> Result<()> + Send + Sync>;
/// `(y, y′, y″)` near a singular initial point.
pub(crate) type SeriesFn = Arc<dyn Fn(f64) -> [Vec<f64>; 3] + Send + Sync>;

/// An ODE solution kept as accepted steps; values in between are obtained by
/// a short re-integration from the nearest stored node.
pub(crate) struct OdeCurve {
    rhs: RhsFn,
    solver: Dopri5,
    nodes: Vec<f64>,
    states: Vec<Vec<f64>>,
    series: Option<(f64, SeriesFn)>,
    domain: (f64, f64),
}

impl fmt::Debug for OdeCurve {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "OdeCurve({} nodes on [{}, {}])", self.nodes.len(), self.domain.0, self.domain.1)
    }
}

impl OdeCurve {
    /// `nodes` increasing; the series, when given, covers `[domain.0, t_end]`.
    pub(crate) fn new(rhs: RhsFn, solver: Dopri5, nodes: Vec<f64>, states: Vec<Vec<f64>>, series: Option<(f64, SeriesFn)>, domain: (f64, f64)) -> Self {
        OdeCurve { rhs, solver, nodes, states, series, domain }
    }

    pub(crate) fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub(crate) fn domain(&self) -> (f64, f64) {
        self.domain
    }

    /// `(y, y′, y″)` at `t`.
    pub(crate) fn eval(&self, t: f64) -> Result<[Vec<f64>; 3]> {
        let (lo, hi) = self.domain;
        if !(t >= lo && t <= hi) {
            return Err(Error::OutOfDomain { r: t, lo, hi });
        }
        if let Some((end, s)) = &self.series {
            if t <= *end {
                return Ok(s(t));
            }
        }
        let i = match self.nodes.binary_search_by(|x| x.total_cmp(&t)) {
            Ok(i) => i,
            Err(0) => 0,
            Err(i) if i >= self.nodes.len() => self.nodes.len() - 1,
            Err(i) => {
                if t - self.nodes[i - 1] <= self.nodes[i] - t {
                    i - 1
                } else {
                    i
                }
            }
        };
        let y = if self.nodes[i] == t {
            self.states[i].clone()
        } else {
            let rhs = &self.rhs;
            self.solver.integrate_to(|t, y: &[f64], d: &mut [f64]| rhs(t, y, d), self.nodes[i], &self.states[i], t)?
        };
        let dim = y.len();
        let mut d1 = vec![0.0; dim];
        (self.rhs)(t, &y, &mut d1)?;
        let delta = 1e-5 * t.abs().max(1.0);
        let shift = |s: f64| -> Vec<f64> { y.iter().zip(&d1).map(|(a, b)| a + s * b).collect() };
        let (mut fp, mut fm) = (vec![0.0; dim], vec![0.0; dim]);
        (self.rhs)(t + delta, &shift(delta), &mut fp)?;
        (self.rhs)(t - delta, &shift(-delta), &mut fm)?;
        let d2 = fp.iter().zip(&fm).map(|(a, b)| (a - b) / (2.0 * delta)).collect();
        Ok([y, d1, d2])
    }
}

/// A scalar read off an [`OdeCurve`].
#[derive(Clone)]
pub(crate) enum Component {
    /// `(y[i], y[i+1])` hold a value and its derivative.
    Pair(usize),
    Map(Arc<dyn Fn(&[Vec<f64>; 3]) -> Jet + Send + Sync>),
}

#[derive(Clone)]
pub(crate) struct CurveProfile {
    pub curve: Arc<OdeCurve>,
    pub component: Component,
}

impl fmt::Debug for CurveProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CurveProfile({:?})", self.curve)
    }
}

impl JetSource for CurveProfile {
    fn domain(&self) -> (f64, f64) {
        self.curve.domain()
    }

    fn jet(&self, r: f64) -> Result<Jet> {
        let e = self.curve.eval(r)?;
        Ok(match &self.component {
            Component::Pair(i) => Jet::new(e[0][*i], e[0][i + 1], e[1][i + 1], e[2][i + 1]),
            Component::Map(f) => f(&e),
        })
    }

    fn exact_third(&self) -> bool {
        matches!(self.component, Component::Map(_))
    }

    fn nodes(&self) -> Vec<f64> {
        let (lo, _) = self.domain();
        let mut out = vec![lo];
        out.extend(self.curve.nodes().iter().copied().filter(|&t| t > lo));
        out
    }
}

/// Least squares by Levenberg–Marquardt with a forward-difference Jacobian.
/// Returns the minimizer and the final residual vector.
pub(crate) fn levenberg_marquardt<F>(f: F, x0: &[f64], max_iter: usize, xtol: f64) -> Option<(Vec<f64>, Vec<f64>)>
where
    F: Fn(&[f64]) -> Option<Vec<f64>>,
{
    let norm2 = |r: &[f64]| r.iter().map(|x| x * x).sum::<f64>();
    let mut x = x0.to_vec();
    let mut r = f(&x)?;
    let (nx, nr) = (x.len(), r.len());
    let mut damping = 1e-3;
    for _ in 0..max_iter {
        let mut jac = vec![vec![0.0; nx]; nr];
        for j in 0..nx {
            let h = 1e-7 * x[j].abs().max(1.0);
            let mut xp = x.clone();
            xp[j] += h;
            let rp = f(&xp)?;
            for i in 0..nr {
                jac[i][j] = (rp[i] - r[i]) / h;
            }
        }
        let mut jtj = vec![vec![0.0; nx]; nx];
        let mut jtr = vec![0.0; nx];
        for i in 0..nr {
            for a in 0..nx {
                jtr[a] += jac[i][a] * r[i];
                for b in 0..nx {
                    jtj[a][b] += jac[i][a] * jac[i][b];
                }
            }
        }
        let cost = norm2(&r);
        let mut improved = false;
        for _ in 0..30 {
            let mut a = jtj.clone();
            for (k, row) in a.iter_mut().enumerate() {
                row[k] += damping * jtj[k][k].max(1e-12);
            }
            let Some(step) = solve_dense(a, jtr.iter().map(|v| -v).collect()) else {
                damping *= 10.0;
                continue;
            };
            let xn: Vec<f64> = x.iter().zip(&step).map(|(a, b)| a + b).collect();
            match f(&xn) {
                Some(rn) if norm2(&rn) < cost => {
                    let small = step.iter().zip(&x).all(|(s, xi)| s.abs() <= xtol * xi.abs().max(1.0));
                    x = xn;
                    r = rn;
                    damping = (damping / 3.0).max(1e-12);
                    improved = true;
                    if small {
                        return Some((x, r));
                    }
                    break;
                }
                _ => damping *= 4.0,
            }
        }
        if !improved {
            break;
        }
    }
    Some((x, r))
}

/// Gaussian elimination with partial pivoting.
pub(crate) fn solve_dense(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for c in 0..n {
        let p = (c..n).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs()))?;
        if a[p][c].abs() < 1e-300 || !a[p][c].is_finite() {
            return None;
        }
        a.swap(c, p);
        b.swap(c, p);
        for i in c + 1..n {
            let f = a[i][c] / a[c][c];
            for k in c..n {
                a[i][k] -= f * a[c][k];
            }
            b[i] -= f * b[c];
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|k| a[i][k] * x[k]).sum();
        x[i] = (b[i] - s) / a[i][i];
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_keep_seventeen_digits() {
        assert_eq!(format_number(0.1), "1.0000000000000001e-1");
        assert_eq!(format_number(f64::INFINITY), "+inf");
        assert_eq!(format_number(f64::NEG_INFINITY), "-inf");
        let x = 2.0f64.sqrt();
        assert_eq!(format_number(x).parse::<f64>().unwrap(), x);
    }

    #[test]
    fn lm_fits_an_overdetermined_consistent_system() {
        let f = |x: &[f64]| Some(vec![x[0] - 1.0, x[1] + 2.0, x[0] + x[1] + 1.0]);
        let (x, r) = levenberg_marquardt(f, &[5.0, 5.0], 50, 1e-14).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-10 && (x[1] + 2.0).abs() < 1e-10);
        assert!(r.iter().all(|v| v.abs() < 1e-10));
    }

    #[test]
    fn curve_reproduces_an_exponential() {
        let rhs: RhsFn = Arc::new(|_, y, d| {
            d[0] = y[1];
            d[1] = y[0];
            Ok(())
        });
        let solver = Dopri5::with_tol(1e-12, 1e-14);
        let path = solver.solve(|t, y: &[f64], d: &mut [f64]| rhs(t, y, d), 0.0, &[1.0, 1.0], 2.0, |_, _| crate::ode::Control::Continue).unwrap();
        let curve = Arc::new(OdeCurve::new(rhs, solver, path.t, path.y, None, (0.0, 2.0)));
        let p = CurveProfile { curve, component: Component::Pair(0) };
        let j = p.jet(1.3).unwrap();
        let e = 1.3f64.exp();
        assert!((j.v - e).abs() < 1e-10 && (j.d1 - e).abs() < 1e-10 && (j.d2 - e).abs() < 1e-10);
        assert!((j.d3 - e).abs() < 1e-7);
    }
}
