//! Adaptive Gauss–Kronrod quadrature with a doubling tail test for
//! unbounded intervals, plus fixed composite Gauss–Legendre rules.

use crate::error::{Error, Result};
use std::cmp::Ordering;
use std::collections::BinaryHeap;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    /// Sum of the embedded Gauss/Kronrod differences over the final partition.
    pub error: f64,
    pub evals: usize,
}

#[derive(Debug, Clone, Copy)]
pub struct Quadrature {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_intervals: usize,
}

impl Default for Quadrature {
    fn default() -> Self {
        Quadrature { abs_tol: 1e-12, rel_tol: 1e-12, max_intervals: 4000 }
    }
}

struct Piece {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Piece {
    fn eq(&self, o: &Self) -> bool {
        self.error == o.error
    }
}
impl Eq for Piece {}
impl PartialOrd for Piece {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Piece {
    fn cmp(&self, o: &Self) -> Ordering {
        self.error.total_cmp(&o.error).then(o.a.total_cmp(&self.a))
    }
}

fn gk15<F: FnMut(f64) -> Result<f64>>(f: &mut F, a: f64, b: f64) -> Result<(f64, f64)> {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c)?;
    let mut k = WGK[7] * fc;
    let mut g = WG[3] * fc;
    for j in 0..7 {
        let x = h * XGK[j];
        let (f1, f2) = (f(c - x)?, f(c + x)?);
        k += WGK[j] * (f1 + f2);
        if j % 2 == 1 {
            g += WG[j / 2] * (f1 + f2);
        }
    }
    let (k, g) = (k * h, g * h);
    if !k.is_finite() {
        return Err(Error::Divergent(format!("integrand not finite on [{a}, {b}]")));
    }
    Ok((k, (k - g).abs()))
}

impl Quadrature {
    pub fn new(abs_tol: f64, rel_tol: f64) -> Self {
        Quadrature { abs_tol, rel_tol, ..Default::default() }
    }

    /// `∫_a^b f`, either endpoint possibly infinite.
    pub fn integrate<F: FnMut(f64) -> Result<f64>>(&self, mut f: F, a: f64, b: f64) -> Result<QuadResult> {
        if a.is_nan() || b.is_nan() {
            return Err(Error::invalid("integration bounds are NaN"));
        }
        if a == b {
            return Ok(QuadResult { value: 0.0, error: 0.0, evals: 0 });
        }
        if a > b {
            let r = self.integrate(f, b, a)?;
            return Ok(QuadResult { value: -r.value, ..r });
        }
        match (a.is_finite(), b.is_finite()) {
            (true, true) => self.finite(&mut f, a, b),
            (true, false) => self.tail(&mut f, a, 1.0),
            (false, true) => self.tail(&mut f, b, -1.0),
            (false, false) => {
                let left = self.tail(&mut f, 0.0, -1.0)?;
                let right = self.tail(&mut f, 0.0, 1.0)?;
                Ok(QuadResult {
                    value: left.value + right.value,
                    error: left.error + right.error,
                    evals: left.evals + right.evals,
                })
            }
        }
    }

    fn finite<F: FnMut(f64) -> Result<f64>>(&self, f: &mut F, a: f64, b: f64) -> Result<QuadResult> {
        let (v, e) = gk15(f, a, b)?;
        let mut evals = 15;
        let mut heap = BinaryHeap::new();
        heap.push(Piece { a, b, value: v, error: e });
        let (mut total, mut err) = (v, e);
        while err > self.abs_tol.max(self.rel_tol * total.abs()) {
            if heap.len() >= self.max_intervals {
                break;
            }
            let p = heap.pop().expect("heap is never empty");
            let m = 0.5 * (p.a + p.b);
            if !(m > p.a && m < p.b) {
                heap.push(p);
                break;
            }
            let (v1, e1) = gk15(f, p.a, m)?;
            let (v2, e2) = gk15(f, m, p.b)?;
            evals += 30;
            total += v1 + v2 - p.value;
            err += e1 + e2 - p.error;
            heap.push(Piece { a: p.a, b: m, value: v1, error: e1 });
            heap.push(Piece { a: m, b: p.b, value: v2, error: e2 });
        }
        // Re-sum in interval order so the result does not depend on heap history.
        let mut pieces = heap.into_vec();
        pieces.sort_by(|x, y| x.a.total_cmp(&y.a));
        let value = pieces.iter().map(|p| p.value).sum();
        let error = pieces.iter().map(|p| p.error).sum();
        Ok(QuadResult { value, error, evals })
    }

    /// `∫` from `start` to `±∞` over doubling pieces; fails if the pieces do not
    /// become negligible.
    fn tail<F: FnMut(f64) -> Result<f64>>(&self, f: &mut F, start: f64, dir: f64) -> Result<QuadResult> {
        let mut total = QuadResult { value: 0.0, error: 0.0, evals: 0 };
        let mut quiet = 0;
        let mut lo = 0.0f64;
        for k in 0..80 {
            let hi = 2f64.powi(k + 1) - 1.0;
            let (a, b) = if dir > 0.0 { (start + lo, start + hi) } else { (start - hi, start - lo) };
            let piece = self.finite(f, a, b)?;
            total.value += piece.value;
            total.error += piece.error;
            total.evals += piece.evals;
            let scale = self.abs_tol.max(self.rel_tol * total.value.abs());
            if piece.value.abs() <= 1e-3 * scale {
                quiet += 1;
                if quiet >= 2 {
                    return Ok(total);
                }
            } else {
                quiet = 0;
            }
            lo = hi;
        }
        Err(Error::Divergent("tail contributions do not decay".into()))
    }
}

/// Gauss–Legendre nodes and weights on `[−1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = nf * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

/// Composite Gauss–Legendre rule with `panels` equal panels of `order` points.
pub fn composite_gauss<F: FnMut(f64) -> Result<f64>>(
    mut f: F,
    a: f64,
    b: f64,
    panels: usize,
    order: usize,
) -> Result<f64> {
    let (x, w) = gauss_legendre(order);
    let h = (b - a) / panels as f64;
    let mut total = 0.0;
    for p in 0..panels {
        let c = a + (p as f64 + 0.5) * h;
        let mut s = 0.0;
        for (xi, wi) in x.iter().zip(&w) {
            s += wi * f(c + 0.5 * h * xi)?;
        }
        total += 0.5 * h * s;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn smooth_integral() {
        let r = Quadrature::default().integrate(|x| Ok(x.sin()), 0.0, PI).unwrap();
        assert!((r.value - 2.0).abs() < 1e-13);
    }

    #[test]
    fn gaussian_tail() {
        let r = Quadrature::default().integrate(|x| Ok((-x * x / 2.0).exp()), 0.0, f64::INFINITY).unwrap();
        assert!((r.value - (PI / 2.0).sqrt()).abs() < 1e-11, "{}", r.value);
        let r = Quadrature::default()
            .integrate(|x| Ok((-x * x / 2.0).exp()), f64::NEG_INFINITY, f64::INFINITY)
            .unwrap();
        assert!((r.value - (2.0 * PI).sqrt()).abs() < 1e-11);
    }

    #[test]
    fn divergent_tails_are_reported() {
        let q = Quadrature::default();
        assert!(matches!(q.integrate(|x| Ok(x.cosh()), 0.0, f64::INFINITY), Err(Error::Divergent(_))));
        assert!(matches!(q.integrate(|x| Ok(1.0 / (1.0 + x)), 0.0, f64::INFINITY), Err(Error::Divergent(_))));
    }

    #[test]
    fn algebraic_endpoint_singularity() {
        let r = Quadrature::default().integrate(|x| Ok(x.powf(-0.5)), 0.0, 1.0).unwrap();
        assert!((r.value - 2.0).abs() < 1e-9, "{}", r.value);
    }

    #[test]
    fn gauss_legendre_is_exact_for_polynomials() {
        for n in 1..12 {
            let (x, w) = gauss_legendre(n);
            let deg = 2 * n - 1;
            let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(deg as i32 - 1)).sum();
            let exact = if (deg - 1) % 2 == 0 { 2.0 / deg as f64 } else { 0.0 };
            assert!((s - exact).abs() < 1e-14, "n={n}");
        }
    }
}
