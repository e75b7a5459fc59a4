//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use qesmms_core::{DimParam, Density, Poles, ProfileFn, RadialSmms};
use rand::seq::SliceRandom;
use rand::Rng;

/// One factor of a diagonal metric component: value and first two
/// derivatives in a single coordinate.
#[derive(Clone, Copy)]
struct Factor {
    coord: usize,
    f: [f64; 3],
}

/// Ricci curvature of a diagonal metric whose components are products of
/// one-variable factors, computed from Christoffel symbols. Returns
/// `Ric_ii / g_ii` for every coordinate.
fn diagonal_ricci(dim: usize, comps: &[Vec<Factor>]) -> Vec<f64> {
    let mut g = vec![1.0; dim];
    let mut l1 = vec![vec![0.0; dim]; dim];
    let mut l2 = vec![vec![0.0; dim]; dim];
    for (i, fs) in comps.iter().enumerate() {
        for fc in fs {
            g[i] *= fc.f[0];
            l1[i][fc.coord] += fc.f[1] / fc.f[0];
            l2[i][fc.coord] += fc.f[2] / fc.f[0];
        }
    }
    // dg[i][c] = ∂_c g_ii, ddg[i][c][d] = ∂_c ∂_d g_ii
    let dg: Vec<Vec<f64>> = (0..dim).map(|i| (0..dim).map(|c| g[i] * l1[i][c]).collect()).collect();
    let ddg = |i: usize, c: usize, d: usize| -> f64 {
        if c == d {
            g[i] * l2[i][c]
        } else {
            g[i] * l1[i][c] * l1[i][d]
        }
    };
    let dmet = |c: usize, a: usize, b: usize| if a == b { dg[a][c] } else { 0.0 };
    let ddmet = |c: usize, d: usize, a: usize, b: usize| if a == b { ddg(a, c, d) } else { 0.0 };
    let idx3 = |k: usize, i: usize, j: usize| (k * dim + i) * dim + j;
    let mut gam = vec![0.0; dim * dim * dim];
    let mut dgam = vec![0.0; dim * dim * dim * dim];
    for k in 0..dim {
        let ginv = 1.0 / g[k];
        for i in 0..dim {
            for j in 0..dim {
                let s = dmet(i, j, k) + dmet(j, i, k) - dmet(k, i, j);
                gam[idx3(k, i, j)] = 0.5 * ginv * s;
                for l in 0..dim {
                    let ds = ddmet(l, i, j, k) + ddmet(l, j, i, k) - ddmet(l, k, i, j);
                    let dginv = -dg[k][l] * ginv * ginv;
                    dgam[l * dim * dim * dim + idx3(k, i, j)] = 0.5 * (dginv * s + ginv * ds);
                }
            }
        }
    }
    let dgm = |l: usize, k: usize, i: usize, j: usize| dgam[l * dim * dim * dim + idx3(k, i, j)];
    (0..dim)
        .map(|i| {
            let mut ric = 0.0;
            for k in 0..dim {
                ric += dgm(k, k, i, i) - dgm(i, k, i, k);
                for l in 0..dim {
                    ric += gam[idx3(k, k, l)] * gam[idx3(l, i, i)] - gam[idx3(k, i, l)] * gam[idx3(l, i, k)];
                }
            }
            ric / g[i]
        })
        .collect()
}

fn square(j: [f64; 3]) -> [f64; 3] {
    [j[0] * j[0], 2.0 * j[0] * j[1], 2.0 * j[1] * j[1] + 2.0 * j[0] * j[2]]
}

fn sin2(a: f64) -> [f64; 3] {
    square([a.sin(), a.cos(), -a.sin()])
}

/// Ricci of `dr² + ψ(r)² g_{S^{n−1}} + v(r)² ρ² g_{S^k}` at `r`, in round
/// hyperspherical coordinates at a fixed generic angle. Returns the unit
/// radial component, a unit sphere component and (for `k ≥ 1`) a unit fiber
/// component.
pub fn warped_product_ricci(n: usize, psi: &ProfileFn, v: &ProfileFn, k: usize, rho2: f64, r: f64) -> (f64, Option<f64>, Option<f64>) {
    let dim = n + k;
    let pj = psi.jet(r).unwrap();
    let vj = v.jet(r).unwrap();
    let p2 = square([pj.v, pj.d1, pj.d2]);
    let v2 = square([vj.v, vj.d1, vj.d2]).map(|x| x * rho2);
    let mut comps: Vec<Vec<Factor>> = vec![Vec::new()];
    for j in 0..n - 1 {
        let mut fs = vec![Factor { coord: 0, f: p2 }];
        for i in 0..j {
            fs.push(Factor { coord: 1 + i, f: sin2(0.7 + 0.13 * i as f64) });
        }
        comps.push(fs);
    }
    for j in 0..k {
        let mut fs = vec![Factor { coord: 0, f: v2 }];
        for i in 0..j {
            fs.push(Factor { coord: n + i, f: sin2(0.9 + 0.11 * i as f64) });
        }
        comps.push(fs);
    }
    let ric = diagonal_ricci(dim, &comps);
    (ric[0], (n >= 2).then(|| ric[n - 1]), (k >= 1).then(|| ric[dim - 1]))
}

/// A positive closed-form profile on `[0, 2]` with moderate derivatives.
pub fn positive_profile<R: Rng>(rng: &mut R) -> ProfileFn {
    match rng.gen_range(0..4) {
        0 => ProfileFn::cosh(rng.gen_range(0.6..1.5), rng.gen_range(-1.0..1.0), rng.gen_range(-0.5..0.5)),
        1 => ProfileFn::exp_quadratic(rng.gen_range(0.5..2.0), rng.gen_range(-0.3..0.3), rng.gen_range(-0.5..0.5)),
        2 => ProfileFn::constant(rng.gen_range(1.0..1.6)).plus(&ProfileFn::sin(rng.gen_range(0.1..0.4), rng.gen_range(0.5..2.0), rng.gen_range(0.0..3.0))),
        _ => ProfileFn::polynomial(vec![rng.gen_range(0.5..1.5), rng.gen_range(0.0..0.5), rng.gen_range(0.0..0.3)]),
    }
}

/// Any closed-form profile (used for `φ`).
pub fn any_profile<R: Rng>(rng: &mut R) -> ProfileFn {
    match rng.gen_range(0..3) {
        0 => ProfileFn::sin(rng.gen_range(0.2..1.0), rng.gen_range(0.5..2.0), rng.gen_range(0.0..3.0)),
        1 => ProfileFn::polynomial(vec![rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-0.5..0.5)]),
        _ => ProfileFn::tanh(rng.gen_range(0.2..1.0), rng.gen_range(0.5..1.5), rng.gen_range(-0.5..0.5)),
    }
}

pub const CATALOG_MS: [DimParam; 9] = [
    DimParam::Finite(-3.0),
    DimParam::Finite(-0.5),
    DimParam::Finite(0.0),
    DimParam::Finite(0.7),
    DimParam::Finite(1.0),
    DimParam::Finite(2.0),
    DimParam::Finite(7.0),
    DimParam::PosInfinity,
    DimParam::NegInfinity,
];

/// A random SMMS on `[a, b] ⊂ (0, 2)` built from catalog profiles, with `n`
/// in `1..=5` and `m` drawn from [`CATALOG_MS`].
pub fn random_catalog_smms<R: Rng>(rng: &mut R) -> RadialSmms {
    let n = rng.gen_range(1..=5);
    let m = *CATALOG_MS.choose(rng).unwrap();
    let a = rng.gen_range(0.1..0.5);
    let b = a + rng.gen_range(0.8..1.4);
    let psi = (n >= 2).then(|| positive_profile(rng));
    let density = if m.is_infinite() { Density::Phi(any_profile(rng)) } else { Density::V(positive_profile(rng)) };
    RadialSmms::new(n, (a, b), psi, density, m, Poles::default()).unwrap()
}

/// Interior sample points of `[a, b]`.
pub fn interior(a: f64, b: f64, k: usize) -> Vec<f64> {
    (1..=k).map(|i| a + (b - a) * i as f64 / (k + 1) as f64).collect()
}

const GL5: [(f64, f64); 5] = [
    (0.0, 0.568_888_888_888_888_9),
    (-0.538_469_310_105_683_1, 0.478_628_670_499_366_5),
    (0.538_469_310_105_683_1, 0.478_628_670_499_366_5),
    (-0.906_179_845_938_664, 0.236_926_885_056_189_08),
    (0.906_179_845_938_664, 0.236_926_885_056_189_08),
];

/// Composite five-point Gauss–Legendre rule.
pub fn gauss<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, panels: usize) -> f64 {
    let h = (b - a) / panels as f64;
    let mut s = 0.0;
    for p in 0..panels {
        let c = a + h * (p as f64 + 0.5);
        for (x, w) in GL5 {
            s += w * f(c + 0.5 * h * x);
        }
    }
    0.5 * h * s
}
