//! Scalar profiles of one variable with exact or interpolated derivatives.

use crate::error::{Error, Result};
use crate::jet::Jet;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::fmt;
use std::sync::Arc;

/// A source of jets for profiles that are neither catalog expressions nor
/// plain samples, such as ODE solutions.
pub trait JetSource: Send + Sync + fmt::Debug {
    fn domain(&self) -> (f64, f64);

    fn jet(&self, r: f64) -> Result<Jet>;

    /// Whether `jet(r).d3` is exact rather than a finite difference.
    fn exact_third(&self) -> bool {
        true
    }

    /// Points at which the profile is represented when it has to be written out.
    fn nodes(&self) -> Vec<f64>;
}

fn default_one() -> f64 {
    1.0
}

fn default_power() -> f64 {
    6.0
}

fn default_order() -> usize {
    5
}

/// `amp · f(freq · r + phase)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Wave {
    #[serde(default = "default_one")]
    pub amp: f64,
    #[serde(default = "default_one")]
    pub freq: f64,
    #[serde(default)]
    pub phase: f64,
}

impl Wave {
    pub fn new(amp: f64, freq: f64, phase: f64) -> Self {
        Wave { amp, freq, phase }
    }

    fn arg(&self, r: f64) -> Jet {
        Jet::new(self.freq * r + self.phase, self.freq, 0.0, 0.0)
    }
}

impl Default for Wave {
    fn default() -> Self {
        Wave::new(1.0, 1.0, 0.0)
    }
}

/// Named closed-form expressions. Composite entries nest arbitrary profiles.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "expr", content = "params", rename_all = "kebab-case")]
pub enum Catalog {
    Constant {
        value: f64,
    },
    /// `Σ coeffs[k] r^k`.
    Polynomial {
        coeffs: Vec<f64>,
    },
    Sin(Wave),
    Cos(Wave),
    Sinh(Wave),
    Cosh(Wave),
    Tanh(Wave),
    Sech2(Wave),
    /// `amp · exp(a r² + b r)`.
    ExpQuadratic {
        #[serde(default = "default_one")]
        amp: f64,
        a: f64,
        #[serde(default)]
        b: f64,
    },
    /// `amp · (1 − x²)^power` for `|x| < 1`, `x = (r − center)/radius`, zero outside.
    Bump {
        center: f64,
        radius: f64,
        #[serde(default = "default_power")]
        power: f64,
        #[serde(default = "default_one")]
        amp: f64,
    },
    Sum {
        terms: Vec<ProfileFn>,
    },
    Product {
        factors: Vec<ProfileFn>,
    },
    Quotient {
        num: ProfileFn,
        den: ProfileFn,
    },
    Power {
        base: ProfileFn,
        exponent: f64,
    },
    Exp {
        arg: ProfileFn,
    },
    Log {
        arg: ProfileFn,
    },
}

/// Serialized form of a profile.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ProfileSpec {
    ClosedForm(Catalog),
    Sampled(SampledSpec),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampledSpec {
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    #[serde(default = "default_order")]
    pub order: usize,
}

/// Interpolated profile: derivatives 0–2 from Fornberg weights on the
/// `order + 1` nearest nodes (errors `O(h^{order+1−k})` for the k-th
/// derivative), the third from one centered difference of the second
/// derivative with step equal to the local spacing.
#[derive(Debug, Clone)]
struct Sampled {
    spec: SampledSpec,
}

impl Sampled {
    fn new(spec: SampledSpec) -> Result<Self> {
        let SampledSpec { grid, values, order } = &spec;
        if grid.len() != values.len() {
            return Err(Error::invalid("sampled profile: grid and values differ in length"));
        }
        if !(4..=12).contains(order) {
            return Err(Error::invalid("sampled profile: order must lie in 4..=12"));
        }
        if grid.len() < order + 3 {
            return Err(Error::invalid("sampled profile: too few nodes for the interpolation order"));
        }
        if grid.windows(2).any(|w| !(w[1] > w[0])) || grid.iter().chain(values).any(|x| !x.is_finite()) {
            return Err(Error::invalid("sampled profile: grid must be finite and strictly increasing"));
        }
        Ok(Sampled { spec })
    }

    fn domain(&self) -> (f64, f64) {
        let g = &self.spec.grid;
        (g[0], g[g.len() - 1])
    }

    fn cell(&self, r: f64) -> usize {
        let g = &self.spec.grid;
        g.partition_point(|&x| x <= r).saturating_sub(1).min(g.len() - 2)
    }

    fn derivs2(&self, r: f64) -> [f64; 3] {
        let g = &self.spec.grid;
        let k = self.spec.order + 1;
        let i = self.cell(r);
        let start = (i + 1).saturating_sub(k / 2).min(g.len() - k);
        let w = fornberg(r, &g[start..start + k], 2);
        let mut out = [0.0; 3];
        for (d, row) in w.iter().enumerate() {
            out[d] = row.iter().zip(&self.spec.values[start..start + k]).map(|(a, b)| a * b).sum();
        }
        out
    }

    fn jet(&self, r: f64) -> Jet {
        let g = &self.spec.grid;
        let (lo, hi) = self.domain();
        let i = self.cell(r);
        let h = g[i + 1] - g[i];
        let [w0, w1, w2] = self.derivs2(r);
        let d3 = if r - h >= lo && r + h <= hi {
            (self.derivs2(r + h)[2] - self.derivs2(r - h)[2]) / (2.0 * h)
        } else if r + h <= hi {
            (self.derivs2(r + h)[2] - w2) / h
        } else {
            (w2 - self.derivs2(r - h)[2]) / h
        };
        Jet::new(w0, w1, w2, d3)
    }
}

/// Finite-difference weights for derivatives `0..=m` at `z` on nodes `x`.
pub fn fornberg(z: f64, x: &[f64], m: usize) -> Vec<Vec<f64>> {
    let n = x.len();
    let mut c = vec![vec![0.0; n]; m + 1];
    let mut c1 = 1.0;
    let mut c4 = x[0] - z;
    c[0][0] = 1.0;
    for i in 1..n {
        let mn = i.min(m);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = x[i] - z;
        for j in 0..i {
            let c3 = x[i] - x[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[k][i] = c1 * (k as f64 * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                }
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for k in (1..=mn).rev() {
                c[k][j] = (c4 * c[k][j] - k as f64 * c[k - 1][j]) / c3;
            }
            c[0][j] = c4 * c[0][j] / c3;
        }
        c1 = c2;
    }
    c
}

#[derive(Debug)]
enum Repr {
    Catalog(Catalog),
    Sampled(Sampled),
    Custom(Arc<dyn JetSource>),
}

/// A cheaply clonable scalar profile.
#[derive(Clone)]
pub struct ProfileFn(Arc<Repr>);

impl fmt::Debug for ProfileFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &*self.0 {
            Repr::Catalog(c) => write!(f, "ProfileFn({c:?})"),
            Repr::Sampled(s) => write!(f, "ProfileFn(sampled, {} nodes)", s.spec.grid.len()),
            Repr::Custom(c) => write!(f, "ProfileFn({c:?})"),
        }
    }
}

fn intersect(a: (f64, f64), b: (f64, f64)) -> (f64, f64) {
    (a.0.max(b.0), a.1.min(b.1))
}

impl ProfileFn {
    pub fn catalog(c: Catalog) -> Result<Self> {
        validate_catalog(&c)?;
        Ok(ProfileFn(Arc::new(Repr::Catalog(c))))
    }

    fn leaf(c: Catalog) -> Self {
        ProfileFn(Arc::new(Repr::Catalog(c)))
    }

    pub fn sampled(grid: Vec<f64>, values: Vec<f64>, order: usize) -> Result<Self> {
        Ok(ProfileFn(Arc::new(Repr::Sampled(Sampled::new(SampledSpec { grid, values, order })?))))
    }

    pub fn custom(src: Arc<dyn JetSource>) -> Self {
        ProfileFn(Arc::new(Repr::Custom(src)))
    }

    pub fn from_spec(spec: ProfileSpec) -> Result<Self> {
        match spec {
            ProfileSpec::ClosedForm(c) => ProfileFn::catalog(c),
            ProfileSpec::Sampled(s) => Ok(ProfileFn(Arc::new(Repr::Sampled(Sampled::new(s)?)))),
        }
    }

    /// Serializable description. Custom profiles are written out as samples
    /// on their own nodes.
    pub fn to_spec(&self) -> ProfileSpec {
        match &*self.0 {
            Repr::Catalog(c) => ProfileSpec::ClosedForm(c.clone()),
            Repr::Sampled(s) => ProfileSpec::Sampled(s.spec.clone()),
            Repr::Custom(src) => {
                let grid = src.nodes();
                let values = grid.iter().map(|&r| src.jet(r).map(|j| j.v).unwrap_or(f64::NAN)).collect();
                ProfileSpec::Sampled(SampledSpec { grid, values, order: default_order() })
            }
        }
    }

    pub fn constant(value: f64) -> Self {
        ProfileFn::leaf(Catalog::Constant { value })
    }

    pub fn identity() -> Self {
        ProfileFn::polynomial(vec![0.0, 1.0])
    }

    pub fn polynomial(coeffs: Vec<f64>) -> Self {
        ProfileFn::leaf(Catalog::Polynomial { coeffs })
    }

    pub fn sin(amp: f64, freq: f64, phase: f64) -> Self {
        ProfileFn::leaf(Catalog::Sin(Wave::new(amp, freq, phase)))
    }

    pub fn cos(amp: f64, freq: f64, phase: f64) -> Self {
        ProfileFn::leaf(Catalog::Cos(Wave::new(amp, freq, phase)))
    }

    pub fn sinh(amp: f64, freq: f64, phase: f64) -> Self {
        ProfileFn::leaf(Catalog::Sinh(Wave::new(amp, freq, phase)))
    }

    pub fn cosh(amp: f64, freq: f64, phase: f64) -> Self {
        ProfileFn::leaf(Catalog::Cosh(Wave::new(amp, freq, phase)))
    }

    pub fn tanh(amp: f64, freq: f64, phase: f64) -> Self {
        ProfileFn::leaf(Catalog::Tanh(Wave::new(amp, freq, phase)))
    }

    pub fn sech2(amp: f64, freq: f64, phase: f64) -> Self {
        ProfileFn::leaf(Catalog::Sech2(Wave::new(amp, freq, phase)))
    }

    pub fn exp_quadratic(amp: f64, a: f64, b: f64) -> Self {
        ProfileFn::leaf(Catalog::ExpQuadratic { amp, a, b })
    }

    pub fn bump(center: f64, radius: f64, power: f64, amp: f64) -> Result<Self> {
        ProfileFn::catalog(Catalog::Bump { center, radius, power, amp })
    }

    pub fn sum(terms: Vec<ProfileFn>) -> Self {
        ProfileFn::leaf(Catalog::Sum { terms })
    }

    pub fn product(factors: Vec<ProfileFn>) -> Self {
        ProfileFn::leaf(Catalog::Product { factors })
    }

    pub fn quotient(num: ProfileFn, den: ProfileFn) -> Self {
        ProfileFn::leaf(Catalog::Quotient { num, den })
    }

    pub fn powf(&self, exponent: f64) -> Self {
        ProfileFn::leaf(Catalog::Power { base: self.clone(), exponent })
    }

    pub fn exp(&self) -> Self {
        ProfileFn::leaf(Catalog::Exp { arg: self.clone() })
    }

    pub fn ln(&self) -> Self {
        ProfileFn::leaf(Catalog::Log { arg: self.clone() })
    }

    pub fn scaled(&self, c: f64) -> Self {
        ProfileFn::product(vec![ProfileFn::constant(c), self.clone()])
    }

    pub fn plus(&self, other: &ProfileFn) -> Self {
        ProfileFn::sum(vec![self.clone(), other.clone()])
    }

    pub fn times(&self, other: &ProfileFn) -> Self {
        ProfileFn::product(vec![self.clone(), other.clone()])
    }

    pub fn over(&self, other: &ProfileFn) -> Self {
        ProfileFn::quotient(self.clone(), other.clone())
    }

    /// `w′` as a profile. Its third derivative is a centered difference of
    /// `w‴`.
    pub fn derivative(&self) -> Self {
        ProfileFn::custom(Arc::new(Derivative(self.clone())))
    }

    pub fn is_sampled(&self) -> bool {
        matches!(&*self.0, Repr::Sampled(_))
    }

    /// Exact constant value, when the profile is a catalog constant.
    pub fn as_constant(&self) -> Option<f64> {
        match &*self.0 {
            Repr::Catalog(Catalog::Constant { value }) => Some(*value),
            _ => None,
        }
    }

    pub fn domain(&self) -> (f64, f64) {
        match &*self.0 {
            Repr::Catalog(c) => catalog_domain(c),
            Repr::Sampled(s) => s.domain(),
            Repr::Custom(src) => src.domain(),
        }
    }

    /// Whether third derivatives are exact (no finite difference anywhere in the tree).
    pub fn exact_third(&self) -> bool {
        match &*self.0 {
            Repr::Catalog(c) => children(c).iter().all(|p| p.exact_third()),
            Repr::Sampled(_) => false,
            Repr::Custom(src) => src.exact_third(),
        }
    }

    /// Smallest node spacing among sampled constituents, if any.
    pub fn min_spacing(&self) -> Option<f64> {
        match &*self.0 {
            Repr::Catalog(c) => children(c).iter().filter_map(|p| p.min_spacing()).reduce(f64::min),
            Repr::Sampled(s) => s.spec.grid.windows(2).map(|w| w[1] - w[0]).reduce(f64::min),
            Repr::Custom(src) => src.nodes().windows(2).map(|w| w[1] - w[0]).reduce(f64::min),
        }
    }

    pub fn jet(&self, r: f64) -> Result<Jet> {
        let (lo, hi) = self.domain();
        if !(r >= lo && r <= hi) {
            return Err(Error::OutOfDomain { r, lo, hi });
        }
        let j = match &*self.0 {
            Repr::Catalog(c) => catalog_jet(c, r)?,
            Repr::Sampled(s) => s.jet(r),
            Repr::Custom(src) => src.jet(r)?,
        };
        if !j.v.is_finite() || !j.d1.is_finite() || !j.d2.is_finite() {
            return Err(Error::degenerate(format!("profile is not finite at r = {r}")));
        }
        Ok(j)
    }

    pub fn value(&self, r: f64) -> Result<f64> {
        self.jet(r).map(|j| j.v)
    }

    /// `(w, w′, w″)` at `r`.
    pub fn eval2(&self, r: f64) -> Result<[f64; 3]> {
        self.jet(r).map(|j| [j.v, j.d1, j.d2])
    }
}

fn children(c: &Catalog) -> Vec<&ProfileFn> {
    match c {
        Catalog::Sum { terms } => terms.iter().collect(),
        Catalog::Product { factors } => factors.iter().collect(),
        Catalog::Quotient { num, den } => vec![num, den],
        Catalog::Power { base, .. } => vec![base],
        Catalog::Exp { arg } | Catalog::Log { arg } => vec![arg],
        _ => Vec::new(),
    }
}

fn validate_catalog(c: &Catalog) -> Result<()> {
    let finite = |xs: &[f64]| xs.iter().all(|x| x.is_finite());
    let ok = match c {
        Catalog::Constant { value } => value.is_finite(),
        Catalog::Polynomial { coeffs } => finite(coeffs),
        Catalog::Sin(w) | Catalog::Cos(w) | Catalog::Sinh(w) | Catalog::Cosh(w) | Catalog::Tanh(w) | Catalog::Sech2(w) => {
            finite(&[w.amp, w.freq, w.phase])
        }
        Catalog::ExpQuadratic { amp, a, b } => finite(&[*amp, *a, *b]),
        Catalog::Bump { center, radius, power, amp } => {
            finite(&[*center, *radius, *power, *amp]) && *radius > 0.0 && *power >= 4.0
        }
        Catalog::Sum { terms } => !terms.is_empty(),
        Catalog::Product { factors } => !factors.is_empty(),
        Catalog::Power { exponent, .. } => exponent.is_finite(),
        _ => true,
    };
    if ok {
        Ok(())
    } else {
        Err(Error::invalid(format!("bad catalog parameters: {c:?}")))
    }
}

fn catalog_domain(c: &Catalog) -> (f64, f64) {
    children(c)
        .iter()
        .map(|p| p.domain())
        .fold((f64::NEG_INFINITY, f64::INFINITY), intersect)
}

fn catalog_jet(c: &Catalog, r: f64) -> Result<Jet> {
    Ok(match c {
        Catalog::Constant { value } => Jet::constant(*value),
        Catalog::Polynomial { coeffs } => {
            let mut acc = Jet::constant(0.0);
            let x = Jet::var(r);
            for &a in coeffs.iter().rev() {
                acc = acc * x + a;
            }
            acc
        }
        Catalog::Sin(w) => w.arg(r).sin().scale(w.amp),
        Catalog::Cos(w) => w.arg(r).cos().scale(w.amp),
        Catalog::Sinh(w) => w.arg(r).sinh().scale(w.amp),
        Catalog::Cosh(w) => w.arg(r).cosh().scale(w.amp),
        Catalog::Tanh(w) => w.arg(r).tanh().scale(w.amp),
        Catalog::Sech2(w) => w.arg(r).sech2().scale(w.amp),
        Catalog::ExpQuadratic { amp, a, b } => {
            let x = Jet::var(r);
            (x * x * *a + x * *b).exp().scale(*amp)
        }
        Catalog::Bump { center, radius, power, amp } => {
            let x = (r - center) / radius;
            if x.abs() >= 1.0 {
                Jet::constant(0.0)
            } else {
                let xj = Jet::new(x, 1.0 / radius, 0.0, 0.0);
                (Jet::constant(1.0) - xj * xj).powf(*power).scale(*amp)
            }
        }
        Catalog::Sum { terms } => {
            let mut acc = Jet::constant(0.0);
            for t in terms {
                acc = acc + t.jet(r)?;
            }
            acc
        }
        Catalog::Product { factors } => {
            let mut acc = Jet::constant(1.0);
            for f in factors {
                acc = acc * f.jet(r)?;
            }
            acc
        }
        Catalog::Quotient { num, den } => {
            let d = den.jet(r)?;
            if d.v == 0.0 {
                return Err(Error::degenerate(format!("division by zero at r = {r}")));
            }
            num.jet(r)? / d
        }
        Catalog::Power { base, exponent } => {
            let b = base.jet(r)?;
            if exponent.fract() == 0.0 && exponent.abs() < 64.0 {
                if b.v == 0.0 && *exponent < 0.0 {
                    return Err(Error::degenerate(format!("negative power of zero at r = {r}")));
                }
                b.powi(*exponent as i32)
            } else {
                if b.v <= 0.0 {
                    return Err(Error::degenerate(format!("fractional power of a nonpositive base at r = {r}")));
                }
                b.powf(*exponent)
            }
        }
        Catalog::Exp { arg } => arg.jet(r)?.exp(),
        Catalog::Log { arg } => {
            let a = arg.jet(r)?;
            if a.v <= 0.0 {
                return Err(Error::degenerate(format!("logarithm of a nonpositive value at r = {r}")));
            }
            a.ln()
        }
    })
}

impl Serialize for ProfileFn {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_spec().serialize(s)
    }
}

impl<'de> Deserialize<'de> for ProfileFn {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let spec = ProfileSpec::deserialize(d)?;
        ProfileFn::from_spec(spec).map_err(serde::de::Error::custom)
    }
}

#[derive(Debug)]
struct Derivative(ProfileFn);

impl JetSource for Derivative {
    fn domain(&self) -> (f64, f64) {
        self.0.domain()
    }

    fn jet(&self, r: f64) -> Result<Jet> {
        let j = self.0.jet(r)?;
        let (lo, hi) = self.domain();
        let h = 1e-4 * r.abs().max(1.0);
        let d3 = match (self.0.jet(r + h), self.0.jet(r - h)) {
            (Ok(a), Ok(b)) => (a.d3 - b.d3) / (2.0 * h),
            (Ok(a), Err(_)) if r + h <= hi => (a.d3 - j.d3) / h,
            (Err(_), Ok(b)) if r - h >= lo => (j.d3 - b.d3) / h,
            _ => f64::NAN,
        };
        Ok(Jet::new(j.d1, j.d2, j.d3, d3))
    }

    fn exact_third(&self) -> bool {
        false
    }

    fn nodes(&self) -> Vec<f64> {
        let (lo, hi) = self.domain();
        if lo.is_finite() && hi.is_finite() {
            (0..=200).map(|i| lo + (hi - lo) * i as f64 / 200.0).collect()
        } else {
            Vec::new()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalog_round_trips_through_json() {
        let p = ProfileFn::sum(vec![
            ProfileFn::sin(2.0, 0.5, 0.0),
            ProfileFn::polynomial(vec![1.0, 0.0, 3.0]).powf(1.5),
        ]);
        let s = serde_json::to_string(&p).unwrap();
        let q: ProfileFn = serde_json::from_str(&s).unwrap();
        assert_eq!(serde_json::to_string(&q).unwrap(), s);
        assert_eq!(p.jet(0.4).unwrap(), q.jet(0.4).unwrap());
    }

    #[test]
    fn parses_documented_shape() {
        let p: ProfileFn = serde_json::from_str(
            r#"{"kind":"closed-form","expr":"sin","params":{"amp":2.0,"freq":0.5}}"#,
        )
        .unwrap();
        assert!((p.value(1.0).unwrap() - 2.0 * 0.5f64.sin()).abs() < 1e-15);
        let q: ProfileFn =
            serde_json::from_str(r#"{"kind":"sampled","grid":[0,1,2,3,4,5,6,7,8],"values":[0,1,4,9,16,25,36,49,64]}"#)
                .unwrap();
        let j = q.jet(2.5).unwrap();
        assert!((j.v - 6.25).abs() < 1e-12 && (j.d1 - 5.0).abs() < 1e-11 && (j.d2 - 2.0).abs() < 1e-10);
    }

    #[test]
    fn evaluation_outside_domain_is_an_error() {
        let g: Vec<f64> = (0..20).map(|i| i as f64 * 0.1).collect();
        let v: Vec<f64> = g.iter().map(|x| x.sin()).collect();
        let p = ProfileFn::sampled(g, v, 5).unwrap();
        assert!(matches!(p.jet(2.0), Err(Error::OutOfDomain { .. })));
        assert!(p.jet(1.9).is_ok());
    }

    #[test]
    fn sampled_derivatives_converge_at_stated_order() {
        let err = |n: usize| {
            let g: Vec<f64> = (0..=n).map(|i| i as f64 / n as f64).collect();
            let v: Vec<f64> = g.iter().map(|x| x.exp()).collect();
            let p = ProfileFn::sampled(g, v, 5).unwrap();
            let r = 0.5 + 0.3 / n as f64;
            let j = p.jet(r).unwrap();
            (j.d2 - r.exp()).abs()
        };
        let (e1, e2) = (err(40), err(80));
        assert!(e1 / e2 > 2f64.powf(3.5), "{e1} {e2}");
    }

    #[test]
    fn fornberg_reproduces_central_difference() {
        let w = fornberg(0.0, &[-1.0, 0.0, 1.0], 2);
        assert_eq!(w[1], vec![-0.5, 0.0, 0.5]);
        assert_eq!(w[2], vec![1.0, -2.0, 1.0]);
    }

    #[test]
    fn bump_is_compactly_supported() {
        let b = ProfileFn::bump(1.0, 0.5, 6.0, 1.0).unwrap();
        assert_eq!(b.jet(1.6).unwrap(), Jet::constant(0.0));
        assert!((b.value(1.0).unwrap() - 1.0).abs() < 1e-15);
        assert!(ProfileFn::bump(1.0, -0.5, 6.0, 1.0).is_err());
    }
}
