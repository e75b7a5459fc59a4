use crate::dim::DimParam;
use crate::error::{Error, Result};
use crate::geometry::{Block, DensityPoint, Geometry, PointData};
use crate::qe::{evaluate, qe_verify, QEReport, QeOptions};
use serde::{Deserialize, Serialize};

/// An Einstein manifold `(N^k, h)` with `Ric = einstein_const · h`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Fiber {
    pub k: usize,
    pub einstein_const: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProductKind {
    /// `(M × N, g ⊕ h, v^m dvol)`.
    Flat,
    /// `(M × N, g ⊕ v²h, v^{m−k} dvol)`.
    Warped,
}

/// A product of a cohomogeneity-one SMMS with an Einstein manifold. The
/// fiber contributes one more curvature block of multiplicity `k`.
#[derive(Debug, Clone)]
pub struct ProductSmms<G> {
    base: G,
    fiber: Fiber,
    kind: ProductKind,
}

impl<G: Geometry> ProductSmms<G> {
    pub fn new(base: G, fiber: Fiber, kind: ProductKind) -> Result<Self> {
        if kind == ProductKind::Warped {
            match base.dim_param() {
                DimParam::Finite(m) if m != 0.0 => {}
                m => return Err(Error::Unsupported(format!("warped products need finite nonzero m, got m = {m}"))),
            }
        }
        Ok(ProductSmms { base, fiber, kind })
    }

    pub fn base(&self) -> &G {
        &self.base
    }

    pub fn fiber(&self) -> Fiber {
        self.fiber
    }

    pub fn kind(&self) -> ProductKind {
        self.kind
    }

    /// Index of the fiber block in [`PointData::blocks`], if `k > 0`.
    pub fn fiber_block(&self, p: &PointData) -> Option<usize> {
        (self.fiber.k > 0).then(|| p.blocks.len() - 1)
    }

    fn warped_point(&self, p: PointData, m: f64) -> Result<PointData> {
        if self.fiber.k == 0 {
            return Ok(p);
        }
        let DensityPoint::Finite { v, grad2_v, lap_v, .. } = p.density else {
            return Err(Error::degenerate("warped product over a base without a density v"));
        };
        let (k, c) = (self.fiber.k as f64, self.fiber.einstein_const);
        let mp = m - k;
        // v⁻¹∇²v on each base block is (ric − ric_w)/m.
        let mut blocks: Vec<Block> =
            p.blocks.iter().map(|b| Block { mult: b.mult, ric: b.ric + k / m * (b.ric_w - b.ric), ric_w: b.ric_w }).collect();
        if self.fiber.k > 0 {
            blocks.push(Block {
                mult: self.fiber.k,
                ric: (c - v * lap_v - (k - 1.0) * grad2_v) / (v * v),
                ric_w: (c - v * lap_v - (m - 1.0) * grad2_v) / (v * v),
            });
        }
        let scalar: f64 = blocks.iter().map(|b| b.mult as f64 * b.ric).sum();
        let lap_bar = lap_v + k * grad2_v / v;
        let g2 = grad2_v / (v * v);
        let area = p.area * v.powf(k);
        Ok(if mp == 0.0 {
            PointData { blocks, scalar, scalar_w: scalar, lap_phi: 0.0, lap_phi_over_m: 0.0, density: DensityPoint::Trivial, area, weight: 1.0, ..p }
        } else {
            let lap_phi = -mp * lap_bar / v - mp * (mp - 1.0) * g2;
            PointData {
                blocks,
                scalar,
                scalar_w: scalar - 2.0 * mp * lap_bar / v - mp * (mp - 1.0) * g2,
                lap_phi,
                lap_phi_over_m: lap_phi / mp,
                density: DensityPoint::Finite { m: mp, v, grad2_v, lap_v: lap_bar },
                area,
                weight: v.powf(mp),
                ..p
            }
        })
    }
}

impl<G: Geometry> Geometry for ProductSmms<G> {
    fn dim(&self) -> usize {
        self.base.dim() + self.fiber.k
    }

    fn dim_param(&self) -> DimParam {
        match (self.kind, self.base.dim_param()) {
            (ProductKind::Warped, DimParam::Finite(m)) => DimParam::Finite(m - self.fiber.k as f64),
            (_, m) => m,
        }
    }

    fn interval(&self) -> (f64, f64) {
        self.base.interval()
    }

    fn point(&self, r: f64) -> Result<PointData> {
        let mut p = self.base.point(r)?;
        match (self.kind, self.base.dim_param()) {
            (ProductKind::Warped, DimParam::Finite(m)) => self.warped_point(p, m),
            _ => {
                if self.fiber.k > 0 {
                    let (k, c) = (self.fiber.k as f64, self.fiber.einstein_const);
                    p.blocks.push(Block { mult: self.fiber.k, ric: c, ric_w: c });
                    p.scalar += k * c;
                    p.scalar_w += k * c;
                }
                Ok(p)
            }
        }
    }

    fn bounded(&self) -> bool {
        self.base.bounded()
    }

    fn grid(&self, k: usize) -> Vec<f64> {
        self.base.grid(k)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProductDescriptor {
    pub kind: ProductKind,
    pub base_dim: usize,
    pub fiber: Fiber,
    pub dim: usize,
    pub base_m: DimParam,
    pub m: DimParam,
    /// `λ` fitted on the base.
    pub inherited_lambda: f64,
    pub inherited_mu: Option<f64>,
    /// Fiber constant the construction needs: `λ` (flat) or `μ` (warped).
    pub required_fiber_const: f64,
    pub fiber_consistent: bool,
    /// `sup |Ric_φ^m − λ ḡ|` over all blocks at the inherited `λ`.
    pub max_residual_at_inherited: f64,
    /// The same supremum over the fiber block only.
    pub fiber_residual: f64,
    pub warning: Option<String>,
}

#[derive(Debug, Clone)]
pub struct ProductResult<G> {
    pub product: ProductSmms<G>,
    pub descriptor: ProductDescriptor,
    pub report: QEReport,
}

fn build<G: Geometry>(base: G, fiber: Fiber, kind: ProductKind, grid: &[f64], opts: QeOptions) -> Result<ProductResult<G>> {
    if !fiber.einstein_const.is_finite() {
        return Err(Error::invalid("fiber Einstein constant must be finite"));
    }
    let base_rep = qe_verify(&base, grid, QeOptions { estimates: false, ..opts })?;
    let (lambda, mu) = (base_rep.lambda_fit, base_rep.mu_fit);
    let required = match kind {
        ProductKind::Flat => lambda,
        ProductKind::Warped => mu.ok_or_else(|| Error::invalid("the base has no characteristic constant"))?,
    };
    let (base_dim, base_m) = (base.dim(), base.dim_param());
    let product = ProductSmms::new(base, fiber, kind)?;
    let pts = evaluate(&product, grid)?;
    let (mut all, mut fib) = (0.0f64, 0.0f64);
    for p in &pts {
        for (i, b) in p.blocks.iter().enumerate() {
            let e = (b.ric_w - lambda).abs();
            all = all.max(e);
            if Some(i) == product.fiber_block(p) {
                fib = fib.max(e);
            }
        }
    }
    let fiber_consistent = fiber.k == 0 || (fiber.einstein_const - required).abs() <= opts.tol * (1.0 + required.abs());
    let warning = (!fiber_consistent).then(|| {
        format!("fiber Einstein constant {} differs from the required {}; the product is not quasi-Einstein", fiber.einstein_const, required)
    });
    let report = qe_verify(&product, grid, opts)?;
    let descriptor = ProductDescriptor {
        kind,
        base_dim,
        fiber,
        dim: product.dim(),
        base_m,
        m: product.dim_param(),
        inherited_lambda: lambda,
        inherited_mu: mu,
        required_fiber_const: required,
        fiber_consistent,
        max_residual_at_inherited: all,
        fiber_residual: fib,
        warning,
    };
    Ok(ProductResult { product, descriptor, report })
}

/// `(M × N^k, g ⊕ h, v^m dvol)`, quasi-Einstein with the same `(λ, μ, m)` when
/// `Ric(h) = λh`.
pub fn product_flat<G: Geometry>(base: G, fiber: Fiber, grid: &[f64], opts: QeOptions) -> Result<ProductResult<G>> {
    build(base, fiber, ProductKind::Flat, grid, opts)
}

/// `(M × N^k, g ⊕ v²h, v^{m−k} dvol)`, quasi-Einstein with the same `(λ, μ)`
/// and parameter `m − k` when `Ric(h) = μh`. Needs finite nonzero `m`.
pub fn product_warped<G: Geometry>(base: G, fiber: Fiber, grid: &[f64], opts: QeOptions) -> Result<ProductResult<G>> {
    build(base, fiber, ProductKind::Warped, grid, opts)
}
