use super::{levenberg_marquardt, FamilyKind, OdeCurve, RhsFn, SeriesFn, Status, Trajectory};
use crate::dim::DimParam;
use crate::error::{Error, Result};
use crate::geometry::{Block, DensityPoint, Geometry, PointData};
use crate::jet::Jet;
use crate::ode::{Control, Dopri5};
use crate::profile::{JetSource, ProfileFn};
use crate::smms::Density;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use std::fmt;
use std::sync::Arc;

/// The metric `dt² ⊕ g(f(t), h(t))` on `[0, l] × P(s)`, where `P(s)` is the
/// circle bundle of class `sα` over a Kähler–Einstein base `(M^{n−2}, h)` with
/// `Ric = n·h` and `c₁ = qα`, with density `v` (or `φ` when `m = ±∞`).
///
/// Curvature blocks: the `t` direction, the circle fiber and the base
/// (multiplicity `n − 2`).
#[derive(Debug, Clone)]
pub struct MultiProfileSmms {
    n: usize,
    s: u32,
    q: u32,
    l: f64,
    f: ProfileFn,
    h: ProfileFn,
    density: Density,
    m: DimParam,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClosureDefects {
    pub f_start: f64,
    pub df_start: f64,
    pub f_end: f64,
    pub df_end: f64,
    pub dh_start: f64,
    pub dh_end: f64,
    pub dw_start: f64,
    pub dw_end: f64,
    /// Minimum of `h` over the sample grid.
    pub min_h: f64,
}

impl ClosureDefects {
    /// Largest endpoint defect, infinite when `h` fails to stay positive.
    pub fn max(&self) -> f64 {
        if !(self.min_h > 0.0) {
            return f64::INFINITY;
        }
        [self.f_start, self.df_start, self.f_end, self.df_end, self.dh_start, self.dh_end, self.dw_start, self.dw_end]
            .into_iter()
            .map(f64::abs)
            .fold(0.0, f64::max)
    }
}

impl MultiProfileSmms {
    #[allow(clippy::too_many_arguments)]
    pub fn new(n: usize, s: u32, q: u32, l: f64, f: ProfileFn, h: ProfileFn, density: Density, m: DimParam) -> Result<Self> {
        if n < 3 {
            return Err(Error::invalid("the circle-bundle ansatz needs n ≥ 3"));
        }
        if s == 0 || q == 0 {
            return Err(Error::invalid("s and q must be positive"));
        }
        if !(l > 0.0 && l.is_finite()) {
            return Err(Error::invalid("the interval length must be positive and finite"));
        }
        match (&density, m) {
            (Density::V(_), DimParam::Finite(_)) | (Density::Phi(_), DimParam::PosInfinity | DimParam::NegInfinity) => {}
            _ => return Err(Error::invalid(format!("density representation does not match m = {m}"))),
        }
        Ok(MultiProfileSmms { n, s, q, l, f, h, density, m })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn s(&self) -> u32 {
        self.s
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    pub fn l(&self) -> f64 {
        self.l
    }

    pub fn m(&self) -> DimParam {
        self.m
    }

    pub fn f(&self) -> &ProfileFn {
        &self.f
    }

    pub fn h(&self) -> &ProfileFn {
        &self.h
    }

    pub fn density(&self) -> &Density {
        &self.density
    }

    /// Einstein constant of the base normalization `Ric = n·h`.
    pub fn base_einstein(&self) -> f64 {
        self.n as f64
    }

    /// Coefficients `(A, B)` of `f²/h⁴` in the fiber and base blocks.
    pub fn twist_coefficients(&self) -> (f64, f64) {
        twist(self.n, self.s, self.q)
    }

    fn density_jet(&self, t: f64) -> Result<Jet> {
        match &self.density {
            Density::V(v) | Density::Phi(v) => v.jet(t),
        }
    }

    /// `μ` (finite `m`) or `μ′` read off the integrability condition at `t`.
    pub fn integrability_constant(&self, t: f64, lambda: f64) -> Result<f64> {
        let (f, h, w) = (self.f.jet(t)?, self.h.jet(t)?, self.density_jet(t)?);
        let k = self.n as f64 - 2.0;
        let wf = over_f(w.d1, w.d2, &f);
        Ok(match self.m {
            DimParam::Finite(m) => {
                lambda * w.v * w.v + w.v * w.d2 + w.v * f.d1 * wf + k * w.v * h.d1 * w.d1 / h.v + (m - 1.0) * w.d1 * w.d1
            }
            _ => self.n as f64 * lambda - (2.0 * lambda * w.v + w.d2 + f.d1 * wf + k * h.d1 * w.d1 / h.v - w.d1 * w.d1),
        })
    }

    /// Smoothness conditions at both ends.
    pub fn closure_defects(&self) -> Result<ClosureDefects> {
        let (a, b) = (self.f.jet(0.0)?, self.f.jet(self.l)?);
        let (ha, hb) = (self.h.jet(0.0)?, self.h.jet(self.l)?);
        let (wa, wb) = (self.density_jet(0.0)?, self.density_jet(self.l)?);
        let mut min_h = ha.v.min(hb.v);
        for t in self.grid(200) {
            min_h = min_h.min(self.h.value(t)?);
        }
        Ok(ClosureDefects {
            f_start: a.v,
            df_start: a.d1 - 1.0,
            f_end: b.v,
            df_end: b.d1 + 1.0,
            dh_start: ha.d1,
            dh_end: hb.d1,
            dw_start: wa.d1,
            dw_end: wb.d1,
            min_h,
        })
    }
}

fn twist(n: usize, s: u32, q: u32) -> (f64, f64) {
    let nf = n as f64;
    let r2 = (s as f64 / q as f64).powi(2);
    ((nf - 2.0) * nf * nf * r2 / 4.0, nf * nf * r2 / 2.0)
}

/// `x/f`, by l'Hôpital where `f` vanishes.
fn over_f(x: f64, dx: f64, f: &Jet) -> f64 {
    if f.v.abs() < 1e-9 {
        dx / f.d1
    } else {
        x / f.v
    }
}

impl Geometry for MultiProfileSmms {
    fn dim(&self) -> usize {
        self.n
    }

    fn dim_param(&self) -> DimParam {
        self.m
    }

    fn interval(&self) -> (f64, f64) {
        (0.0, self.l)
    }

    fn point(&self, t: f64) -> Result<PointData> {
        if !(0.0..=self.l).contains(&t) {
            return Err(Error::OutOfDomain { r: t, lo: 0.0, hi: self.l });
        }
        let (f, h, w) = (self.f.jet(t)?, self.h.jet(t)?, self.density_jet(t)?);
        let nf = self.n as f64;
        let k = nf - 2.0;
        let (a, b) = self.twist_coefficients();
        let f2h4 = f.v * f.v / h.v.powi(4);
        let ff = over_f(f.d2, f.d3, &f);
        let hf = over_f(h.d1, h.d2, &f);
        let wf = over_f(w.d1, w.d2, &f);
        let ric_t = -ff - k * h.d2 / h.v;
        let ric_s = -ff - k * f.d1 * hf / h.v + a * f2h4;
        let ric_b = -h.d2 / h.v - f.d1 * hf / h.v - (k - 1.0) * (h.d1 / h.v).powi(2) + nf / (h.v * h.v) - b * f2h4;
        let scalar = ric_t + ric_s + k * ric_b;
        // Δw = w″ + (f′/f + (n−2)h′/h) w′
        let lap_w = w.d2 + f.d1 * wf + k * h.d1 * w.d1 / h.v;
        let area = f.v * h.v.powf(k);
        let (dt, ds, db, scalar_w, lap_phi, lap_phi_over_m, density, weight) = match self.m {
            DimParam::Finite(m) if m == 0.0 => (0.0, 0.0, 0.0, scalar, 0.0, 0.0, DensityPoint::Trivial, 1.0),
            DimParam::Finite(m) => {
                let g2 = w.d1 * w.d1 / (w.v * w.v);
                let lap_phi = -m * lap_w / w.v - m * (m - 1.0) * g2;
                (
                    -m * w.d2 / w.v,
                    -m * f.d1 * wf / w.v,
                    -m * h.d1 * w.d1 / (h.v * w.v),
                    scalar - 2.0 * m * lap_w / w.v - m * (m - 1.0) * g2,
                    lap_phi,
                    lap_phi / m,
                    DensityPoint::Finite { m, v: w.v, grad2_v: w.d1 * w.d1, lap_v: lap_w },
                    w.v.powf(m),
                )
            }
            _ => (
                w.d2,
                f.d1 * wf,
                h.d1 * w.d1 / h.v,
                scalar + 2.0 * lap_w - w.d1 * w.d1,
                lap_w - w.d1 * w.d1,
                0.0,
                DensityPoint::Infinite { phi: w.v, grad2_phi: w.d1 * w.d1 },
                (-w.v).exp(),
            ),
        };
        Ok(PointData {
            r: t,
            blocks: vec![
                Block { mult: 1, ric: ric_t, ric_w: ric_t + dt },
                Block { mult: 1, ric: ric_s, ric_w: ric_s + ds },
                Block { mult: self.n - 2, ric: ric_b, ric_w: ric_b + db },
            ],
            scalar,
            scalar_w,
            lap_phi,
            lap_phi_over_m,
            density,
            area,
            weight,
        })
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct LppOptions {
    /// Integrator tolerance (relative; absolute is `tol/100`).
    pub tol: f64,
    /// Random starting points screened before polishing.
    pub seeds: usize,
    pub seed: u64,
    /// Best screened starts that are polished by Levenberg–Marquardt.
    pub polish: usize,
    pub max_iter: usize,
    /// Junction mismatch accepted as a solution.
    pub match_tol: f64,
    /// Give up a shot when `f′` has not vanished by this `t`.
    pub t_limit: f64,
}

impl Default for LppOptions {
    fn default() -> Self {
        LppOptions { tol: 1e-10, seeds: 256, seed: 7, polish: 12, max_iter: 200, match_tol: 1e-8, t_limit: 40.0 }
    }
}

impl LppOptions {
    pub fn tol(tol: f64) -> Self {
        LppOptions { tol, ..Default::default() }
    }
}

#[derive(Debug, Clone)]
pub struct LppSolution {
    pub smms: MultiProfileSmms,
    /// Rows along `[t₀, l − t₀]` with columns `f, h, v` (or `phi`), `lambda`.
    pub trajectory: Trajectory,
    pub lambda: f64,
    /// `μ = m − 1`, or `μ′ = 0` when `m = +∞`.
    pub mu: f64,
    /// `(w(0), λ, h(l), w(l))` with `h(0) = 1`, `w` the density.
    pub params: [f64; 4],
    /// Mismatch where the two shots meet.
    pub junction_residual: f64,
    /// Mismatch after continuing the left shot past the junction.
    pub continuation_mismatch: f64,
    /// Geometrically distinct nontrivial solutions found.
    pub distinct_solutions: usize,
}

impl LppSolution {
    pub fn l(&self) -> f64 {
        self.smms.l()
    }

    /// Largest of the endpoint, junction and continuation defects.
    pub fn closure_defect(&self) -> Result<f64> {
        Ok(self.smms.closure_defects()?.max().max(self.junction_residual).max(self.continuation_mismatch))
    }
}

const T0: f64 = 1e-3;

#[derive(Clone, Copy)]
struct System {
    n: f64,
    a: f64,
    b: f64,
    /// `None` for `m = +∞`.
    m: Option<f64>,
    lambda: f64,
    mu: f64,
}

impl System {
    fn rhs(&self, y: &[f64], d: &mut [f64]) -> Result<()> {
        let [f, fp, h, hp, w, wp] = [y[0], y[1], y[2], y[3], y[4], y[5]];
        if !(f > 0.0 && h > 0.0) || (self.m.is_some() && !(w > 0.0)) {
            return Err(Error::degenerate("profile left the positive region"));
        }
        let (n, k, l) = (self.n, self.n - 2.0, self.lambda);
        let twist = (self.a * f * f * f / h.powi(4), self.b * f * f / h.powi(3));
        let (wt_f, wt_h) = match self.m {
            Some(m) => (-m * fp * wp / w, -m * hp * wp / w),
            None => (fp * wp, hp * wp),
        };
        let fpp = -l * f - k * fp * hp / h + wt_f + twist.0;
        let hpp = -l * h - fp * hp / f + wt_h - (k - 1.0) * hp * hp / h + n / h - twist.1;
        let wpp = match self.m {
            Some(m) => w / m * (-l - fpp / f - k * hpp / h),
            None => l + fpp / f + k * hpp / h,
        };
        d.copy_from_slice(&[fp, fpp, hp, hpp, wp, wpp]);
        Ok(())
    }

    fn integrability(&self, y: &[f64]) -> f64 {
        let mut d = [0.0; 6];
        if self.rhs(y, &mut d).is_err() {
            return f64::NAN;
        }
        let [f, fp, h, hp, w, wp] = [y[0], y[1], y[2], y[3], y[4], y[5]];
        let (k, l, wpp) = (self.n - 2.0, self.lambda, d[5]);
        match self.m {
            Some(m) => (l * w * w + w * wpp + w * fp * wp / f + k * w * hp * wp / h + (m - 1.0) * wp * wp - self.mu).abs(),
            None => (2.0 * l * w + wpp + fp * wp / f + k * hp * wp / h - wp * wp - (self.n * l - self.mu)).abs(),
        }
    }

    /// `m v₂/v₀` (finite `m`) or `−φ₂`: the leading density coefficient at a
    /// pole with `h(0) = h0`, `w(0) = w0`.
    fn density_coefficient(&self, w0: f64) -> f64 {
        match self.m {
            Some(m) => m * (self.mu - self.lambda * w0 * w0) / (4.0 * w0 * w0),
            None => -(self.n * self.lambda - self.mu - 2.0 * self.lambda * w0) / 4.0,
        }
    }

    /// Taylor coefficients of `(f, h, w)` at a pole, through `t⁵`, `t⁴`, `t⁴`.
    fn pole_series(&self, h0: f64, w0: f64) -> [[f64; 6]; 3] {
        let (n, a, b, l) = (self.n, self.a, self.b, self.lambda);
        let q = self.density_coefficient(w0);
        let inv_m = self.m.map_or(0.0, |m| 1.0 / m);
        let (h02, h04) = (h0 * h0, h0.powi(4));
        let h2 = (n - h02 * l) / (4.0 * h0);
        let f3 = -q / 3.0 + (h02 * l * (n - 4.0) - n * n + 2.0 * n) / (12.0 * h02);
        let f5 = 3.0 * a / (40.0 * h04) + l * l * (n * n / 120.0 - 23.0 * n / 480.0 + 17.0 / 240.0)
            - l * q * (n / 15.0 - 13.0 / 60.0)
            + q * q * (2.0 / 15.0 + inv_m / 10.0)
            - l * (n.powi(3) / 60.0 - 3.0 * n * n / 40.0 + n / 12.0) / h02
            + q * (n * n - 2.0 * n) / (15.0 * h02)
            + (n.powi(4) / 120.0 - 13.0 * n.powi(3) / 480.0 + n * n / 48.0) / h04;
        let h4 = -b / (16.0 * h0.powi(3)) + h0 * l * l * (1.0 / 24.0 - n / 96.0) + h0 * l * q / 24.0
            + l * (n * n / 48.0 - n / 16.0) / h0
            - n * q / (24.0 * h0)
            + (n * n / 48.0 - n.powi(3) / 96.0) / h0.powi(3);
        let q4 = -a / (8.0 * h04) + b * (n - 2.0) / (16.0 * h04) + l * q * (n / 24.0 - 1.0 / 6.0) - q * q / 6.0
            + q * (2.0 * n - n * n) / (24.0 * h02);
        let (w2, w4) = match self.m {
            Some(m) => (w0 * q / m, w0 * q4 / m),
            None => (-q, -q4),
        };
        [[0.0, 1.0, 0.0, f3, 0.0, f5], [h0, 0.0, h2, 0.0, h4, 0.0], [w0, 0.0, w2, 0.0, w4, 0.0]]
    }

    fn series_fn(&self, h0: f64, w0: f64) -> SeriesFn {
        let c = self.pole_series(h0, w0);
        Arc::new(move |t| {
            let d: Vec<[f64; 4]> = c.iter().map(|p| poly(p, t)).collect();
            let pick = |j: usize| d.iter().flat_map(|e| [e[j], e[j + 1]]).collect::<Vec<f64>>();
            [pick(0), pick(1), pick(2)]
        })
    }

    fn rhs_fn(self) -> RhsFn {
        Arc::new(move |_, y, d| self.rhs(y, d))
    }
}

/// Value and first three derivatives of a polynomial.
fn poly(c: &[f64], t: f64) -> [f64; 4] {
    let mut out = [0.0; 4];
    for (k, &ck) in c.iter().enumerate() {
        let mut fall = 1.0;
        for (j, o) in out.iter_mut().enumerate() {
            if j > k {
                break;
            }
            *o += ck * fall * t.powi((k - j) as i32);
            fall *= (k - j) as f64;
        }
    }
    out
}

struct Shot {
    nodes: Vec<f64>,
    states: Vec<Vec<f64>>,
    t_end: f64,
    y_end: Vec<f64>,
}

fn solver(tol: f64) -> Dopri5 {
    Dopri5 { h_init: 1e-4, h_max: 0.05, ..Dopri5::with_tol(tol, tol * 1e-2) }
}

/// Integrate from a pole until the first zero of `f′`.
fn shoot(sys: &System, h0: f64, w0: f64, tol: f64, t_limit: f64) -> Result<Shot> {
    let y0 = (sys.series_fn(h0, w0))(T0)[0].clone();
    let sv = solver(tol);
    let f = |_: f64, y: &[f64], d: &mut [f64]| sys.rhs(y, d);
    let path = sv.solve(f, T0, &y0, t_limit, |_, y| if y[1] < 0.0 { Control::Stop } else { Control::Continue })?;
    if !path.stopped {
        return Err(Error::NonConvergence("f has no critical point".into()));
    }
    let i = path.t.len() - 1;
    let (t_end, y_end) = sv.locate(f, path.t[i - 1], &path.y[i - 1], path.t[i], |y| y[1], 1e-14)?;
    let mut nodes = path.t[..i].to_vec();
    let mut states = path.y[..i].to_vec();
    nodes.push(t_end);
    states.push(y_end.clone());
    Ok(Shot { nodes, states, t_end, y_end })
}

fn system(n: usize, m: DimParam, s: u32, q: u32, lambda: f64) -> System {
    let (a, b) = twist(n, s, q);
    let mf = m.finite();
    System { n: n as f64, a, b, m: mf, lambda, mu: mf.map_or(0.0, |m| m - 1.0) }
}

struct Candidate {
    x: Vec<f64>,
    residual: f64,
}

/// Junction mismatch for `x = (w(0), λ, h(l), w(l))` with `h(0) = 1`.
fn mismatch(n: usize, m: DimParam, s: u32, q: u32, x: &[f64], opts: &LppOptions) -> Option<Vec<f64>> {
    let finite = m.finite().is_some();
    if !(x[1] > 0.0 && x[2] > 0.0) || (finite && !(x[0] > 0.0 && x[3] > 0.0)) || x.iter().any(|v| !v.is_finite()) {
        return None;
    }
    let sys = system(n, m, s, q, x[1]);
    let a = shoot(&sys, 1.0, x[0], opts.tol, opts.t_limit).ok()?;
    let b = shoot(&sys, x[2], x[3], opts.tol, opts.t_limit).ok()?;
    let (u, v) = (&a.y_end, &b.y_end);
    Some(vec![u[0] - v[0], u[2] - v[2], u[3] + v[3], u[4] - v[4], u[5] + v[5]])
}

/// Relabel so that the pole at `t = 0` has the smaller `h`, using
/// `t ↦ l − t` followed by the scaling that restores `h(0) = 1`.
fn canonical(m: DimParam, x: &[f64]) -> Vec<f64> {
    if x[2] >= 1.0 {
        return x.to_vec();
    }
    let c = x[2];
    match m {
        DimParam::Finite(_) => vec![x[3] / c, x[1] * c * c, 1.0 / c, x[0] / c],
        _ => vec![x[3], x[1] * c * c, 1.0 / c, x[0]],
    }
}

fn seed_point(rng: &mut ChaCha8Rng, n: usize, m: DimParam) -> Vec<f64> {
    let lambda = rng.gen_range(0.5..5.0);
    let h_l = rng.gen_range(0.4..1.6);
    match m {
        DimParam::Finite(mm) => {
            let v0 = rng.gen_range(0.3..2.5) * ((mm - 1.0) / lambda).sqrt();
            let v_l = v0 * rng.gen_range(0.3..1.2);
            vec![v0, lambda, h_l, v_l]
        }
        _ => {
            let p0 = n as f64 / 2.0 + rng.gen_range(-1.5..1.5);
            let p_l = p0 + rng.gen_range(-1.5..1.5);
            vec![p0, lambda, h_l, p_l]
        }
    }
}

/// Compact quasi-Einstein metrics on the `S²`-bundle over a Kähler–Einstein
/// base (`n ≥ 4` even, `1 ≤ s < q`), normalized by `μ = m − 1` (finite `m`) or
/// `μ′ = 0` (`m = +∞`).
///
/// Both poles are shot towards the first critical point of `f` with three-term
/// Taylor starts. The unknowns `(w(0), λ, h(l), w(l))` (with `h(0) = 1`) are
/// fitted by Levenberg–Marquardt from seeded random starts. Solutions with
/// constant density (Einstein metrics) are discarded.
pub fn lpp_solve(n: usize, m: DimParam, s: u32, q: u32, opts: &LppOptions) -> Result<LppSolution> {
    if n < 4 || n % 2 != 0 {
        return Err(Error::invalid(format!("n must be even and at least 4, got {n}")));
    }
    if !(1 <= s && s < q) {
        return Err(Error::invalid(format!("need 1 ≤ s < q, got s = {s}, q = {q}")));
    }
    match m {
        DimParam::Finite(mm) if mm > 1.0 => {}
        DimParam::PosInfinity => {}
        _ => return Err(Error::invalid(format!("need m > 1 or m = +inf, got m = {m}"))),
    }
    if !(opts.tol > 0.0) || opts.seeds == 0 || opts.polish == 0 {
        return Err(Error::invalid("tolerance, seed count and polish count must be positive"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let starts: Vec<Vec<f64>> = (0..opts.seeds).map(|_| seed_point(&mut rng, n, m)).collect();
    let norm = |r: &[f64]| r.iter().map(|x| x * x).sum::<f64>().sqrt();
    let mut screened: Vec<Candidate> = starts
        .into_par_iter()
        .filter_map(|x| mismatch(n, m, s, q, &x, opts).map(|r| Candidate { residual: norm(&r), x }))
        .collect();
    screened.sort_by(|a, b| a.residual.total_cmp(&b.residual));
    screened.truncate(opts.polish);
    let polished: Vec<Candidate> = screened
        .into_par_iter()
        .filter_map(|c| {
            let (x, r) = levenberg_marquardt(|x| mismatch(n, m, s, q, x, opts), &c.x, opts.max_iter, 1e-15)?;
            let residual = r.iter().map(|v| v.abs()).fold(0.0, f64::max);
            (residual <= opts.match_tol).then(|| Candidate { x: canonical(m, &x), residual })
        })
        .collect();
    let trivial = |x: &[f64]| {
        let sys = system(n, m, s, q, x[1]);
        let scale = 1e-6 * (1.0 + sys.mu.abs());
        sys.density_coefficient(x[0]).abs() <= scale && sys.density_coefficient(x[3]).abs() <= scale
    };
    let mut found: Vec<Candidate> = Vec::new();
    for c in polished.into_iter().filter(|c| !trivial(&c.x)) {
        match found.iter_mut().find(|f| (f.x[1] - c.x[1]).abs() <= 1e-6 * c.x[1] && (f.x[2] - c.x[2]).abs() <= 1e-6 * c.x[2]) {
            Some(f) if f.residual > c.residual => *f = c,
            Some(_) => {}
            None => found.push(c),
        }
    }
    let distinct = found.len();
    let best = found
        .into_iter()
        .min_by(|a, b| a.residual.total_cmp(&b.residual))
        .ok_or_else(|| Error::NonConvergence("shooting found no nontrivial solution".into()))?;
    assemble(n, m, s, q, &best.x, distinct, opts)
}

fn assemble(n: usize, m: DimParam, s: u32, q: u32, x: &[f64], distinct: usize, opts: &LppOptions) -> Result<LppSolution> {
    let sys = system(n, m, s, q, x[1]);
    let left = shoot(&sys, 1.0, x[0], opts.tol, opts.t_limit)?;
    let right = shoot(&sys, x[2], x[3], opts.tol, opts.t_limit)?;
    let (u, v) = (&left.y_end, &right.y_end);
    let junction_residual = [u[0] - v[0], u[2] - v[2], u[3] + v[3], u[4] - v[4], u[5] + v[5]]
        .into_iter()
        .map(f64::abs)
        .fold(0.0, f64::max);
    let l = left.t_end + right.t_end;
    let sv = solver(opts.tol);
    let curve = |shot: &Shot, h0: f64, w0: f64| {
        Arc::new(OdeCurve::new(
            sys.rhs_fn(),
            sv,
            shot.nodes.clone(),
            shot.states.clone(),
            Some((T0, sys.series_fn(h0, w0))),
            (0.0, shot.t_end),
        ))
    };
    let (lc, rc) = (curve(&left, 1.0, x[0]), curve(&right, x[2], x[3]));

    // Continue the left shot to l − δ and compare with the right one there.
    let delta = 0.5 * right.t_end;
    let f = |_: f64, y: &[f64], d: &mut [f64]| sys.rhs(y, d);
    let cont = sv.integrate_to(f, left.t_end, &left.y_end, l - delta)?;
    let there = &rc.eval(delta)?[0];
    let continuation_mismatch = (0..6)
        .map(|i| (cont[i] - if i % 2 == 0 { there[i] } else { -there[i] }).abs())
        .fold(0.0, f64::max);

    let profile = |idx: usize| {
        ProfileFn::custom(Arc::new(Stitched { left: lc.clone(), right: rc.clone(), split: left.t_end, l, idx }))
    };
    let density = match m {
        DimParam::Finite(_) => Density::V(profile(4)),
        _ => Density::Phi(profile(4)),
    };
    let smms = MultiProfileSmms::new(n, s, q, l, profile(0), profile(2), density, m)?;

    let finite = m.finite().is_some();
    let mut traj = Trajectory {
        kind: FamilyKind::Lpp,
        n,
        m,
        tol: opts.tol,
        status: Status::Converged,
        state_names: vec!["f".into(), "h".into(), if finite { "v" } else { "phi" }.into(), "lambda".into()],
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
        lambda: x[1],
        mu: sys.mu,
        summary: Vec::new(),
    };
    let rows = left
        .nodes
        .iter()
        .zip(&left.states)
        .map(|(&t, y)| (t, y.clone()))
        .chain(right.nodes.iter().zip(&right.states).rev().skip(1).map(|(&t, y)| {
            let flipped: Vec<f64> = y.iter().enumerate().map(|(i, &c)| if i % 2 == 0 { c } else { -c }).collect();
            (l - t, flipped)
        }));
    for (t, y) in rows {
        traj.t.push(t);
        traj.r.push(t);
        traj.state.push(vec![y[0], y[2], y[4], x[1]]);
        traj.psi.push(f64::NAN);
        traj.v.push(if finite { y[4] } else { f64::NAN });
        traj.kappa.push(f64::NAN);
        traj.log_kappa.push(f64::NAN);
        traj.sphere_defect.push(f64::NAN);
        traj.integrability_residual.push(sys.integrability(&y));
    }
    traj.summary = vec![
        ("lambda".into(), x[1]),
        ("mu".into(), sys.mu),
        ("l".into(), l),
        ("w0".into(), x[0]),
        ("h_l".into(), x[2]),
        ("w_l".into(), x[3]),
        ("junction_residual".into(), junction_residual),
        ("continuation_mismatch".into(), continuation_mismatch),
        ("distinct_solutions".into(), distinct as f64),
        ("max_integrability_residual".into(), traj.max_integrability_residual()),
    ];
    Ok(LppSolution {
        smms,
        trajectory: traj,
        lambda: x[1],
        mu: sys.mu,
        params: [x[0], x[1], x[2], x[3]],
        junction_residual,
        continuation_mismatch,
        distinct_solutions: distinct,
    })
}

/// One component of the two shots glued at `split`, the right shot read in
/// the reflected variable `l − t`.
struct Stitched {
    left: Arc<OdeCurve>,
    right: Arc<OdeCurve>,
    split: f64,
    l: f64,
    idx: usize,
}

impl fmt::Debug for Stitched {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Stitched(component {} on [0, {}], split at {})", self.idx, self.l, self.split)
    }
}

impl JetSource for Stitched {
    fn domain(&self) -> (f64, f64) {
        (0.0, self.l)
    }

    fn jet(&self, t: f64) -> Result<Jet> {
        if !(0.0..=self.l).contains(&t) {
            return Err(Error::OutOfDomain { r: t, lo: 0.0, hi: self.l });
        }
        let i = self.idx;
        if t <= self.split {
            let e = self.left.eval(t)?;
            Ok(Jet::new(e[0][i], e[0][i + 1], e[1][i + 1], e[2][i + 1]))
        } else {
            let e = self.right.eval((self.l - t).max(0.0))?;
            Ok(Jet::new(e[0][i], -e[0][i + 1], e[1][i + 1], -e[2][i + 1]))
        }
    }

    fn exact_third(&self) -> bool {
        false
    }

    fn nodes(&self) -> Vec<f64> {
        let mut out = vec![0.0];
        out.extend(self.left.nodes().iter().copied());
        out.extend(self.right.nodes().iter().rev().map(|s| self.l - s).filter(|&t| t > self.split));
        out.push(self.l);
        out
    }
}
