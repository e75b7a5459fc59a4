use super::{Component, CurveProfile, FamilyKind, OdeCurve, RhsFn, SeriesFn, Status, Trajectory};
use crate::dim::DimParam;
use crate::error::{Error, Result};
use crate::ode::{Control, Dopri5};
use crate::profile::ProfileFn;
use crate::smms::{Density, Poles, RadialSmms};
use serde::Serialize;
use std::sync::Arc;

#[derive(Debug, Clone, Copy)]
pub struct BohmOptions {
    /// Integrator tolerance (relative; absolute is 100 times smaller).
    pub tol: f64,
    /// Offset from `I` along the unstable direction `(0, 0, 1)`.
    pub eps: f64,
    /// Span of the flow time `t`.
    pub t_span: f64,
    /// Distance to `K` at which a finite-`m` run counts as converged.
    pub k_tol: f64,
    /// Right end of the reconstructed SMMS (capped by the trajectory).
    pub r_max: f64,
}

impl Default for BohmOptions {
    fn default() -> Self {
        BohmOptions { tol: 1e-12, eps: 1e-8, t_span: 2000.0, k_tol: 1e-6, r_max: 20.0 }
    }
}

impl BohmOptions {
    /// Defaults, with a flow span long enough for the `m = +∞` tail.
    pub fn for_m(m: DimParam) -> Self {
        if m.is_infinite() {
            BohmOptions { t_span: 2e4, ..Default::default() }
        } else {
            Default::default()
        }
    }
}

/// Constants of the dynamical system in the coordinates `(X, Y, W)`.
#[derive(Debug, Clone, Copy)]
struct Consts {
    n: f64,
    /// `None` for `m = +∞`.
    m: Option<f64>,
    a: f64,
    b: f64,
    /// `d log ψ / dt = rate · X`.
    rate: f64,
    c_x: f64,
    c_y: f64,
    c_r: f64,
    c_w: f64,
    /// `μ = 1/(m−1)`, or `μ′ = 1` when `m = +∞`.
    mu: f64,
    i: [f64; 3],
    k: [f64; 3],
}

fn consts(n: usize, m: DimParam) -> Result<Consts> {
    if n < 3 {
        return Err(Error::invalid(format!("the Böhm system needs n ≥ 3, got {n}")));
    }
    let nf = n as f64;
    match m {
        DimParam::PosInfinity => {
            let alpha = 1.0 / (nf - 1.0).sqrt();
            Ok(Consts {
                n: nf,
                m: None,
                a: 0.0,
                b: alpha,
                rate: alpha,
                c_x: 1.0 / (nf - 2.0).sqrt(),
                c_y: ((nf - 1.0) * (nf - 2.0)).sqrt(),
                c_r: 1.0 / ((nf - 1.0) * (nf - 2.0)).sqrt(),
                c_w: 1.0 / ((nf - 1.0) * (nf - 2.0)).sqrt(),
                mu: 1.0,
                i: [alpha, ((nf - 2.0) / (nf - 1.0)).sqrt(), 0.0],
                k: [0.0, 0.0, 1.0],
            })
        }
        DimParam::Finite(mm) if mm > 1.0 => {
            let a = 1.0 / (mm - 1.0);
            let mu = a;
            Ok(Consts {
                n: nf,
                m: Some(mm),
                a,
                b: a * (mm * (mm + nf - 2.0) / (nf - 1.0)).sqrt(),
                rate: (mm / ((nf - 1.0) * (mm + nf - 2.0))).sqrt(),
                c_x: ((mm + nf - 2.0) / ((mm - 1.0) * (nf - 2.0))).sqrt(),
                c_y: ((mm - 1.0) * (nf - 1.0) * (nf - 2.0) / mm).sqrt(),
                c_r: (mm / ((mm - 1.0) * (nf - 1.0) * (nf - 2.0))).sqrt(),
                c_w: (mm * mu / ((nf - 1.0) * (nf - 2.0))).sqrt(),
                mu,
                i: [
                    ((mm + nf - 2.0) / (mm * (nf - 1.0))).sqrt(),
                    ((mm - 1.0) * (nf - 2.0) / (mm * (nf - 1.0))).sqrt(),
                    0.0,
                ],
                k: [
                    ((nf - 1.0) / (mm * (mm + nf - 2.0))).sqrt(),
                    ((mm - 1.0) * (nf - 1.0) / (mm * (mm + nf - 2.0))).sqrt(),
                    ((mm - 1.0) / (mm + nf - 2.0)).sqrt(),
                ],
            })
        }
        _ => Err(Error::invalid(format!("the Böhm system needs m > 1, got m = {m}"))),
    }
}

impl Consts {
    fn field(&self, s: &[f64], d: &mut [f64]) {
        let (x, y, w) = (s[0], s[1], s[2]);
        let q = x * x - self.a * y * y;
        d[0] = x * q + self.b * y * y - x;
        d[1] = y * q - self.b * x * y + self.a * y;
        d[2] = w * q;
    }

    fn jacobian(&self, s: [f64; 3]) -> [[f64; 3]; 3] {
        let (x, y, w) = (s[0], s[1], s[2]);
        let (a, b) = (self.a, self.b);
        let q = x * x - a * y * y;
        [
            [q + 2.0 * x * x - 1.0, -2.0 * a * x * y + 2.0 * b * y, 0.0],
            [2.0 * x * y - b * y, q - 2.0 * a * y * y - b * x + a, 0.0],
            [2.0 * x * w, -2.0 * a * y * w, q],
        ]
    }

    fn log_kappa(&self, s: [f64; 3]) -> f64 {
        match self.m {
            None => -2.0 * s[2].ln(),
            Some(m) => {
                let n = self.n;
                let e = m + n - 1.0;
                -(2.0 * m / e) * s[2].ln() - (2.0 * (n - 1.0) / e) * s[1].ln() + 2.0 * (1.0 - self.k[0] * s[0]).ln()
            }
        }
    }

    /// `d log κ / dt`.
    fn log_kappa_rate(&self, x: f64) -> f64 {
        match self.m {
            None => -2.0 * x * x,
            Some(m) => {
                let n = self.n;
                let xk = self.k[0];
                -(2.0 * (n - 1.0) / ((m - 1.0) * (m + n - 1.0))) * (1.0 - x / xk).powi(2) / (1.0 - xk * x)
            }
        }
    }

    fn dpsi(&self, s: &[f64]) -> f64 {
        s[0] / (self.c_x * s[1])
    }
}

/// The fixed points `I` (emergence) and `K` (limit) on the unit sphere.
pub fn bohm_fixed_points(n: usize, m: DimParam) -> Result<([f64; 3], [f64; 3])> {
    let c = consts(n, m)?;
    Ok((c.i, c.k))
}

/// Eigenvalues of the linearization at `I`, in increasing order.
pub fn bohm_eigenvalues(n: usize, m: DimParam) -> Result<[f64; 3]> {
    let c = consts(n, m)?;
    let j = c.jacobian(c.i);
    let tr = j[0][0] + j[1][1];
    let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
    let disc = tr * tr - 4.0 * det;
    if disc < 0.0 {
        return Err(Error::degenerate("complex eigenvalues at I"));
    }
    let s = disc.sqrt();
    let mut ev = [0.5 * (tr - s), 0.5 * (tr + s), j[2][2]];
    ev.sort_by(f64::total_cmp);
    Ok(ev)
}

/// Böhm's Lyapunov function (`W⁻²` when `m = +∞`).
pub fn lyapunov_kappa(n: usize, m: DimParam, state: [f64; 3]) -> Result<f64> {
    let c = consts(n, m)?;
    if !state.iter().all(|&x| x > 0.0) {
        return Err(Error::invalid(format!("state {state:?} is not in the open first octant")));
    }
    Ok(c.log_kappa(state).exp())
}

/// `κ′/κ` along the flow at a point with first coordinate `x`.
pub fn lyapunov_log_rate(n: usize, m: DimParam, x: f64) -> Result<f64> {
    Ok(consts(n, m)?.log_kappa_rate(x))
}

/// Integrate the Böhm system (the Bryant system when `m = +∞`) from `I` along
/// the unstable direction tangent to the sphere, projecting back onto the
/// sphere after every step, and reconstruct `(r, ψ, v)` with `φ(0) = 1` and
/// `μ = 1/(m−1)` (`μ′ = 1` when `m = +∞`).
///
/// Rows record the sphere defect before projection, `κ`, and as integrability
/// residual the relative defect of the `W` relation (which encodes `μ`).
/// The returned SMMS is obtained by integrating the curvature equations in `r`
/// from the pole with the same normalization.
pub fn bohm_bryant_solve(n: usize, m: DimParam, opts: BohmOptions) -> Result<Trajectory> {
    let c = consts(n, m)?;
    if !(opts.tol > 0.0 && opts.eps > 0.0 && opts.t_span > 0.0) {
        return Err(Error::invalid("tolerance, offset and span must be positive"));
    }
    let phi0 = 1.0;
    let mut s0 = [c.i[0], c.i[1], opts.eps];
    let nrm = s0.iter().map(|x| x * x).sum::<f64>().sqrt();
    s0.iter_mut().for_each(|x| *x /= nrm);
    // Sixth component: log v for finite m, φ for m = +∞.
    let (psi0, w0) = match c.m {
        Some(mm) => {
            let v0 = (-phi0 / mm).exp();
            (v0 * s0[2] / (c.c_w * s0[1]), v0.ln())
        }
        None => (s0[2] / (c.c_w * s0[1]), phi0),
    };
    let y0 = vec![s0[0], s0[1], s0[2], psi0.ln(), psi0, w0];
    let rhs = move |_: f64, y: &[f64], d: &mut [f64]| -> Result<()> {
        c.field(y, d);
        d[3] = c.rate * y[0];
        d[4] = c.c_r * y[3].exp() * y[1];
        d[5] = match c.m {
            Some(mm) => c.c_r * (c.c_y - (c.n - 1.0) * y[0] / c.c_x) / (mm - 1.0),
            None => (c.n - 1.0) * c.rate * y[0] - c.c_r * c.c_y,
        };
        Ok(())
    };
    let h_max = if c.m.is_some() { 0.05 } else { 10.0 };
    let solver = Dopri5 { h_max, h_init: 1e-3, ..Dopri5::with_tol(opts.tol, opts.tol * 1e-2) };
    let mut defects = vec![0.0];
    let mut octant_error = None;
    let mut reached = false;
    let path = solver.solve(rhs, 0.0, &y0, opts.t_span, |t, y| {
        let nrm = (y[0] * y[0] + y[1] * y[1] + y[2] * y[2]).sqrt();
        defects.push((nrm * nrm - 1.0).abs());
        for x in &mut y[..3] {
            *x /= nrm;
        }
        if !(y[0] > 0.0 && y[1] > 0.0 && y[2] > 0.0) {
            octant_error = Some(t);
            return Control::Stop;
        }
        if c.m.is_some() {
            let d = ((y[0] - c.k[0]).powi(2) + (y[1] - c.k[1]).powi(2) + (y[2] - c.k[2]).powi(2)).sqrt();
            if d <= opts.k_tol {
                reached = true;
                return Control::Stop;
            }
        }
        Control::Continue
    })?;
    if let Some(t) = octant_error {
        return Err(Error::NonConvergence(format!("trajectory left the first octant at t = {t}")));
    }
    let status = if reached { Status::Converged } else { Status::SpanExhausted };
    if c.m.is_some() && !reached {
        return Err(Error::NonConvergence(format!("no convergence to K within t = {}", opts.t_span)));
    }
    let mut traj = Trajectory {
        kind: FamilyKind::Bohm,
        n,
        m,
        tol: opts.tol,
        status,
        state_names: vec!["X".into(), "Y".into(), "W".into()],
        t: Vec::with_capacity(path.t.len()),
        state: Vec::with_capacity(path.t.len()),
        r: Vec::new(),
        psi: Vec::new(),
        v: Vec::new(),
        kappa: Vec::new(),
        log_kappa: Vec::new(),
        sphere_defect: Vec::new(),
        integrability_residual: Vec::new(),
        smms: None,
        lambda: 0.0,
        mu: c.mu,
        summary: Vec::new(),
    };
    for ((&t, y), &defect) in path.t.iter().zip(&path.y).zip(&defects) {
        let psi = y[3].exp();
        let (v, resid) = match c.m {
            Some(_) => {
                let v = y[5].exp();
                (v, (y[2] * v / (c.c_w * psi * y[1]) - 1.0).abs())
            }
            None => (f64::NAN, (y[2] / (c.c_w * psi * y[1]) - 1.0).abs()),
        };
        let lk = c.log_kappa([y[0], y[1], y[2]]);
        traj.t.push(t);
        traj.state.push(y[..3].to_vec());
        traj.r.push(y[4]);
        traj.psi.push(psi);
        traj.v.push(v);
        traj.kappa.push(lk.exp());
        traj.log_kappa.push(lk);
        traj.sphere_defect.push(defect);
        traj.integrability_residual.push(resid);
    }
    let last = traj.state.last().expect("nonempty path").clone();
    traj.summary.push(("asymptotic_dpsi2".into(), c.dpsi(&last).powi(2)));
    let dist_k = last.iter().zip(&c.k).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
    traj.summary.push(("distance_to_k".into(), dist_k));
    let r_end = opts.r_max.min(*traj.r.last().expect("nonempty path"));
    let smms = radial_solution(&c, phi0, r_end, opts.tol.max(1e-13))?;
    let psi_prof = smms.psi().expect("n ≥ 3").clone();
    let mut defect: f64 = 0.0;
    for (&r, &p) in traj.r.iter().zip(&traj.psi) {
        if r > 1e-2 && r <= r_end {
            defect = defect.max((psi_prof.value(r)? / p - 1.0).abs());
        }
    }
    traj.summary.push(("reconstruction_defect".into(), defect));
    traj.smms = Some(smms);
    Ok(traj)
}

/// The same solution as a function of `r`, integrated from the pole with the
/// series `ψ = r + a₃r³ + a₅r⁵`, `w = w₀ + w₂r² + w₄r⁴` (`w = v`, or `φ` when
/// `m = +∞`).
fn radial_solution(c: &Consts, phi0: f64, r_end: f64, tol: f64) -> Result<RadialSmms> {
    let n = c.n;
    let (w0, w2, w4, a, a5) = match c.m {
        Some(m) => {
            let v0 = (-phi0 / m).exp();
            let v2 = c.mu / (2.0 * n * v0);
            let a5 = m * v2 * v2 * (13.0 * m * n - 10.0 * m + 12.0 * (n - 1.0).powi(2))
                / (30.0 * v0 * v0 * (n - 1.0).powi(2) * (n + 2.0));
            let v4 = -v2 * v2 * (4.0 * m + 3.0 * n - 6.0) / (6.0 * v0 * (n + 2.0));
            (v0, v2, v4, -m * v2 / (3.0 * (n - 1.0) * v0), a5)
        }
        None => {
            let p2 = -c.mu / (2.0 * n);
            let a5 = p2 * p2 * (13.0 * n - 10.0) / (30.0 * (n - 1.0).powi(2) * (n + 2.0));
            (phi0, p2, 2.0 * p2 * p2 / (3.0 * (n + 2.0)), p2 / (3.0 * (n - 1.0)), a5)
        }
    };
    let series: SeriesFn = Arc::new(move |r| {
        let (r2, r3) = (r * r, r.powi(3));
        let psi = [r + a * r3 + a5 * r.powi(5), 1.0 + 3.0 * a * r2 + 5.0 * a5 * r2 * r2, 6.0 * a * r + 20.0 * a5 * r3, 6.0 * a + 60.0 * a5 * r2];
        let w = [w0 + w2 * r2 + w4 * r2 * r2, 2.0 * w2 * r + 4.0 * w4 * r3, 2.0 * w2 + 12.0 * w4 * r2, 24.0 * w4 * r];
        [vec![psi[0], psi[1], w[0], w[1]], vec![psi[1], psi[2], w[1], w[2]], vec![psi[2], psi[3], w[2], w[3]]]
    });
    let m = c.m;
    let rhs: RhsFn = Arc::new(move |_, y, d| {
        let (s, s1, w, w1) = (y[0], y[1], y[2], y[3]);
        if !(s > 0.0) {
            return Err(Error::degenerate("psi vanished"));
        }
        let base = (n - 2.0) * (1.0 - s1 * s1) / s;
        d[0] = s1;
        d[2] = w1;
        match m {
            Some(m) => {
                d[1] = base - m * s1 * w1 / w;
                d[3] = -(n - 1.0) * d[1] * w / (m * s);
            }
            None => {
                d[1] = base + s1 * w1;
                d[3] = (n - 1.0) * d[1] / s;
            }
        }
        Ok(())
    });
    let r0 = 1e-3f64.min(r_end / 4.0);
    let start = series(r0)[0].clone();
    let solver = Dopri5 { h_init: 1e-4, ..Dopri5::with_tol(tol, tol * 1e-2) };
    let f = rhs.clone();
    let path = solver.solve(move |t, y: &[f64], d: &mut [f64]| f(t, y, d), r0, &start, r_end, |_, _| Control::Continue)?;
    let curve = Arc::new(OdeCurve::new(rhs, solver, path.t, path.y, Some((r0, series)), (0.0, r_end)));
    let psi = ProfileFn::custom(Arc::new(CurveProfile { curve: curve.clone(), component: Component::Pair(0) }));
    let w = ProfileFn::custom(Arc::new(CurveProfile { curve, component: Component::Pair(2) }));
    let (density, dim) = match m {
        Some(m) => (Density::V(w), DimParam::Finite(m)),
        None => (Density::Phi(w), DimParam::PosInfinity),
    };
    RadialSmms::new(n as usize, (0.0, r_end), Some(psi), density, dim, Poles { left: true, right: false })
}

/// `ψ` at `r` by cubic Hermite interpolation of the trajectory rows, using
/// `ψ′ = X/(c_X Y)`.
pub fn bohm_psi_at(traj: &Trajectory, r: f64) -> Result<f64> {
    let c = consts(traj.n, traj.m)?;
    let i = traj.r.partition_point(|&x| x < r);
    if i == 0 || i >= traj.r.len() {
        return Err(Error::OutOfDomain { r, lo: traj.r[0], hi: *traj.r.last().unwrap_or(&0.0) });
    }
    let (r0, r1) = (traj.r[i - 1], traj.r[i]);
    let h = r1 - r0;
    let s = (r - r0) / h;
    let (p0, p1) = (traj.psi[i - 1], traj.psi[i]);
    let (d0, d1) = (c.dpsi(&traj.state[i - 1]) * h, c.dpsi(&traj.state[i]) * h);
    let h00 = 2.0 * s.powi(3) - 3.0 * s * s + 1.0;
    let h10 = s.powi(3) - 2.0 * s * s + s;
    let h01 = -2.0 * s.powi(3) + 3.0 * s * s;
    let h11 = s.powi(3) - s * s;
    Ok(h00 * p0 + h10 * d0 + h01 * p1 + h11 * d1)
}

/// `sup |ψ_ε − ψ_{ε/10}| / ψ` over `r ∈ [r_lo, r_hi]` (sampled at 50 points).
pub fn epsilon_independence(n: usize, m: DimParam, opts: BohmOptions, r_lo: f64, r_hi: f64) -> Result<f64> {
    let a = bohm_bryant_solve(n, m, opts)?;
    let b = bohm_bryant_solve(n, m, BohmOptions { eps: opts.eps / 10.0, ..opts })?;
    let mut worst: f64 = 0.0;
    for k in 0..50 {
        let r = r_lo + (r_hi - r_lo) * k as f64 / 49.0;
        let (pa, pb) = (bohm_psi_at(&a, r)?, bohm_psi_at(&b, r)?);
        worst = worst.max((pa - pb).abs() / pa);
    }
    Ok(worst)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PowerFit {
    pub exponent: f64,
    pub coefficient: f64,
    /// RMS of the log-log residuals.
    pub rms: f64,
}

/// Least-squares fit of `y = c x^p` in logarithmic coordinates.
pub fn fit_power_law(x: &[f64], y: &[f64]) -> Result<PowerFit> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(Error::invalid("need at least two matching points"));
    }
    if x.iter().chain(y).any(|&v| !(v > 0.0)) {
        return Err(Error::invalid("power-law fits need positive data"));
    }
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let k = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / k, ly.iter().sum::<f64>() / k);
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    if sxx == 0.0 {
        return Err(Error::degenerate("all abscissae coincide"));
    }
    let p = sxy / sxx;
    let c0 = my - p * mx;
    let rms = (lx.iter().zip(&ly).map(|(a, b)| (b - c0 - p * a).powi(2)).sum::<f64>() / k).sqrt();
    Ok(PowerFit { exponent: p, coefficient: c0.exp(), rms })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BryantAsymptotics {
    /// Fit of `ψ² ∼ c rᵖ` on the tail.
    pub fit: PowerFit,
    pub tail_points: usize,
    pub tail_r: [f64; 2],
    /// `X/Y²` at the end of the trajectory and its predicted limit.
    pub x_over_y2: f64,
    pub x_over_y2_limit: f64,
}

/// Fit the growth of `ψ²` on the last decade of `r` of a Böhm/Bryant
/// trajectory.
pub fn bryant_asymptotics_check(traj: &Trajectory) -> Result<BryantAsymptotics> {
    if traj.kind != FamilyKind::Bohm {
        return Err(Error::invalid("not a Böhm/Bryant trajectory"));
    }
    let c = consts(traj.n, traj.m)?;
    let r_end = *traj.r.last().ok_or_else(|| Error::invalid("empty trajectory"))?;
    let idx: Vec<usize> = (0..traj.len()).filter(|&i| traj.r[i] >= r_end / 10.0).collect();
    if idx.len() < 10 || traj.r[0] > r_end / 10.0 {
        return Err(Error::invalid("tail too short: need a full decade of r with at least 10 rows"));
    }
    let x: Vec<f64> = idx.iter().map(|&i| traj.r[i]).collect();
    let y: Vec<f64> = idx.iter().map(|&i| traj.psi[i].powi(2)).collect();
    let fit = fit_power_law(&x, &y)?;
    let last = traj.state.last().expect("nonempty");
    Ok(BryantAsymptotics {
        fit,
        tail_points: idx.len(),
        tail_r: [x[0], r_end],
        x_over_y2: last[0] / (last[1] * last[1]),
        x_over_y2_limit: c.b,
    })
}
