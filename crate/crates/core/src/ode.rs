//! Adaptive Dormand–Prince 5(4) integration with a per-step observer that may
//! project the state or stop the run, and event location by re-integration.

use crate::error::{Error, Result};

const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Control {
    Continue,
    Stop,
}

#[derive(Debug, Clone, Copy)]
pub struct Dopri5 {
    pub rtol: f64,
    pub atol: f64,
    pub h_max: f64,
    pub h_min: f64,
    pub h_init: f64,
    pub max_steps: usize,
}

impl Default for Dopri5 {
    fn default() -> Self {
        Dopri5 { rtol: 1e-10, atol: 1e-12, h_max: f64::INFINITY, h_min: 1e-14, h_init: 1e-3, max_steps: 1_000_000 }
    }
}

/// Accepted steps of one run.
#[derive(Debug, Clone, Default)]
pub struct Path {
    pub t: Vec<f64>,
    pub y: Vec<Vec<f64>>,
    /// True when the observer ended the run before the final time.
    pub stopped: bool,
    pub rejected: usize,
}

impl Path {
    pub fn last(&self) -> (f64, &[f64]) {
        let i = self.t.len() - 1;
        (self.t[i], &self.y[i])
    }
}

pub trait Rhs: FnMut(f64, &[f64], &mut [f64]) -> Result<()> {}
impl<T: FnMut(f64, &[f64], &mut [f64]) -> Result<()>> Rhs for T {}

impl Dopri5 {
    pub fn with_tol(rtol: f64, atol: f64) -> Self {
        Dopri5 { rtol, atol, ..Default::default() }
    }

    /// Integrate from `t0` towards `t1` (either direction). The observer sees
    /// every accepted step and may modify the state in place.
    pub fn solve<F, O>(&self, mut f: F, t0: f64, y0: &[f64], t1: f64, mut observe: O) -> Result<Path>
    where
        F: Rhs,
        O: FnMut(f64, &mut [f64]) -> Control,
    {
        let dim = y0.len();
        let dir = if t1 >= t0 { 1.0 } else { -1.0 };
        let mut path = Path { t: vec![t0], y: vec![y0.to_vec()], ..Default::default() };
        if t0 == t1 {
            return Ok(path);
        }
        let mut t = t0;
        let mut y = y0.to_vec();
        let mut k = vec![vec![0.0; dim]; 7];
        let mut ytmp = vec![0.0; dim];
        let mut ynew = vec![0.0; dim];
        f(t, &y, &mut k[0])?;
        let mut h = self.h_init.min(self.h_max).min((t1 - t0).abs());
        let mut steps = 0;
        loop {
            if steps >= self.max_steps {
                return Err(Error::NonConvergence(format!("step budget exhausted at t = {t}")));
            }
            steps += 1;
            let last = (t1 - t).abs() <= h * (1.0 + 1e-12);
            let hs = if last { (t1 - t).abs() } else { h };
            let step = dir * hs;
            let mut ok = true;
            for s in 1..7 {
                for i in 0..dim {
                    let mut acc = y[i];
                    for (j, kj) in k.iter().enumerate().take(s) {
                        acc += step * A[s][j] * kj[i];
                    }
                    ytmp[i] = acc;
                }
                if f(t + C[s] * step, &ytmp, &mut k[s]).is_err() || k[s].iter().any(|x| !x.is_finite()) {
                    ok = false;
                    break;
                }
            }
            let mut err = f64::INFINITY;
            if ok {
                ynew.copy_from_slice(&ytmp);
                let mut acc = 0.0;
                for i in 0..dim {
                    let mut e = 0.0;
                    for (s, ks) in k.iter().enumerate() {
                        e += E[s] * ks[i];
                    }
                    let sc = self.atol + self.rtol * y[i].abs().max(ynew[i].abs());
                    acc += (step * e / sc).powi(2);
                }
                err = (acc / dim as f64).sqrt();
            }
            if ok && err <= 1.0 {
                t = if last { t1 } else { t + step };
                y.copy_from_slice(&ynew);
                path.t.push(t);
                let ctl = observe(t, &mut y);
                path.y.push(y.clone());
                if ctl == Control::Stop {
                    path.stopped = true;
                    return Ok(path);
                }
                if last {
                    return Ok(path);
                }
                f(t, &y, &mut k[0])?;
                let fac = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
                h = (hs * fac).min(self.h_max);
            } else {
                path.rejected += 1;
                let fac = if err.is_finite() { (0.9 * err.powf(-0.2)).clamp(0.1, 0.5) } else { 0.25 };
                h = hs * fac;
                if h < self.h_min {
                    return Err(Error::NonConvergence(format!("step size underflow at t = {t}")));
                }
            }
        }
    }

    /// State at `t1`.
    pub fn integrate_to<F: Rhs>(&self, f: F, t0: f64, y0: &[f64], t1: f64) -> Result<Vec<f64>> {
        let p = self.solve(f, t0, y0, t1, |_, _| Control::Continue)?;
        Ok(p.last().1.to_vec())
    }

    /// Locate a root of `g(y(t))` in `(ta, tb]` given a sign change between the
    /// bracketing states, by re-integrating from `(ta, ya)`.
    pub fn locate<F, G>(&self, mut f: F, ta: f64, ya: &[f64], tb: f64, g: G, tol: f64) -> Result<(f64, Vec<f64>)>
    where
        F: Rhs,
        G: Fn(&[f64]) -> f64,
    {
        let (mut a, mut b) = (ta, tb);
        let mut ga = g(ya);
        let mut yb = self.integrate_to(&mut f, ta, ya, tb)?;
        let mut gb = g(&yb);
        if ga * gb > 0.0 {
            return Err(Error::NonConvergence("event not bracketed".into()));
        }
        for _ in 0..200 {
            if (b - a).abs() <= tol {
                break;
            }
            let mut c = (a * gb - b * ga) / (gb - ga);
            if !(c > a.min(b) && c < a.max(b)) {
                c = 0.5 * (a + b);
            }
            let yc = self.integrate_to(&mut f, ta, ya, c)?;
            let gc = g(&yc);
            if gc == 0.0 {
                return Ok((c, yc));
            }
            if gc * gb < 0.0 {
                a = b;
                ga = gb;
            } else {
                ga *= 0.5;
            }
            b = c;
            gb = gc;
            yb = yc;
        }
        Ok((b, yb))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_oscillator_period() {
        let s = Dopri5::with_tol(1e-12, 1e-14);
        let y = s
            .integrate_to(|_, y: &[f64], d: &mut [f64]| {
                d[0] = y[1];
                d[1] = -y[0];
                Ok(())
            }, 0.0, &[1.0, 0.0], 2.0 * std::f64::consts::PI)
            .unwrap();
        assert!((y[0] - 1.0).abs() < 1e-10 && y[1].abs() < 1e-10);
    }

    #[test]
    fn observer_can_stop_and_backward_runs_work() {
        let s = Dopri5::default();
        let p = s
            .solve(|_, y: &[f64], d: &mut [f64]| {
                d[0] = y[0];
                Ok(())
            }, 0.0, &[1.0], 10.0, |_, y| if y[0] > 2.0 { Control::Stop } else { Control::Continue })
            .unwrap();
        assert!(p.stopped);
        let y = s
            .integrate_to(|_, y: &[f64], d: &mut [f64]| {
                d[0] = y[0];
                Ok(())
            }, 1.0, &[1.0], 0.0)
            .unwrap();
        assert!((y[0] - (-1.0f64).exp()).abs() < 1e-10);
    }

    #[test]
    fn event_location() {
        let s = Dopri5::with_tol(1e-12, 1e-14);
        let rhs = |_: f64, y: &[f64], d: &mut [f64]| {
            d[0] = y[1];
            d[1] = -y[0];
            Ok(())
        };
        let (t, _) = s.locate(rhs, 1.0, &[1f64.cos(), -1f64.sin()], 2.0, |y| y[0], 1e-13).unwrap();
        assert!((t - std::f64::consts::FRAC_PI_2).abs() < 1e-10);
    }
}
