//! Benchmark problem catalog: diffusion tensors, sources, boundary data,
//! reference solutions and the discrete error norm.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::grid::{Grid, GridSpec};
use crate::solver::{InitPolicy, PicardConfig, ResidualKind};

#[derive(Debug, Error)]
pub enum ProblemError {
    #[error("diffusion tensor is singular at ({x}, {y})")]
    TensorSingular { x: f64, y: f64 },
    #[error("diffusion tensor is not symmetric positive definite at ({x}, {y}): dxx={dxx}, dxy={dxy}, dyy={dyy}")]
    NotSpd { x: f64, y: f64, dxx: f64, dxy: f64, dyy: f64 },
    #[error("weight must be positive, got {value} at ({x}, {y})")]
    NonPositiveWeight { x: f64, y: f64, value: f64 },
    #[error("reference field has zero discrete norm; relative error undefined")]
    ZeroReferenceNorm,
    #[error("field length {got} does not match grid cell count {want}")]
    FieldLength { got: usize, want: usize },
    #[error("per-cell tensor table sized {got}, grid has {want} cells")]
    PerCellLength { got: usize, want: usize },
    #[error("unknown case name {0:?}")]
    UnknownCase(String),
    #[error("case configuration parse error: {0}")]
    Config(String),
}

/// Symmetric 2x2 tensor given by its three independent entries.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SymTensor {
    pub dxx: f64,
    pub dxy: f64,
    pub dyy: f64,
}

impl SymTensor {
    pub fn new(dxx: f64, dxy: f64, dyy: f64) -> SymTensor {
        SymTensor { dxx, dxy, dyy }
    }

    pub fn identity() -> SymTensor {
        SymTensor::new(1.0, 0.0, 1.0)
    }

    pub fn det(&self) -> f64 {
        self.dxx * self.dyy - self.dxy * self.dxy
    }

    pub fn is_spd(&self) -> bool {
        self.dxx > 0.0 && self.dyy > 0.0 && self.det() > 0.0
    }

    pub fn eigenvalues(&self) -> (f64, f64) {
        let tr = self.dxx + self.dyy;
        let disc = (0.25 * (self.dxx - self.dyy).powi(2) + self.dxy * self.dxy).sqrt();
        (0.5 * tr - disc, 0.5 * tr + disc)
    }

    /// Ratio of the largest to the smallest eigenvalue.
    pub fn anisotropy_ratio(&self) -> f64 {
        let (lo, hi) = self.eigenvalues();
        hi / lo
    }

    pub fn scale(&self, s: f64) -> SymTensor {
        SymTensor::new(s * self.dxx, s * self.dxy, s * self.dyy)
    }
}

/// Pointwise evaluator of the diffusion tensor field.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TensorField {
    Identity,
    /// Constant tensor.
    Uniform { dxx: f64, dxy: f64, dyy: f64 },
    /// Radially structured tensor with eigenvalues `alpha` (radial) and 1
    /// (tangential): `(1/r^2) [[a x^2 + y^2, (a-1) x y], [(a-1) x y, x^2 + a y^2]]`.
    Rotational { alpha: f64 },
    /// `Rotational` scaled by a constant factor.
    ScaledRotational { alpha: f64, scale: f64 },
    /// One tensor per cell, row-major; only evaluable at cell centers.
    #[serde(skip)]
    PerCell { nx: usize, ny: usize, entries: Vec<SymTensor> },
}

impl TensorField {
    pub fn uniform_high_anisotropy() -> TensorField {
        TensorField::Uniform { dxx: 1.0e7, dxy: 1.0e3, dyy: 1.0 }
    }

    /// Evaluate at a point. `PerCell` fields cannot be evaluated this way.
    pub fn eval(&self, x: f64, y: f64) -> Result<SymTensor, ProblemError> {
        match self {
            TensorField::Identity => Ok(SymTensor::identity()),
            TensorField::Uniform { dxx, dxy, dyy } => Ok(SymTensor::new(*dxx, *dxy, *dyy)),
            TensorField::Rotational { alpha } => rotational(*alpha, x, y),
            TensorField::ScaledRotational { alpha, scale } => {
                rotational(*alpha, x, y).map(|t| t.scale(*scale))
            }
            TensorField::PerCell { .. } => {
                panic!("per-cell tensor fields are only defined at cell centers")
            }
        }
    }

    /// Tensor of cell `(i, j)`, evaluated at the cell center.
    pub fn at_cell(&self, grid: &Grid, i: usize, j: usize) -> Result<SymTensor, ProblemError> {
        match self {
            TensorField::PerCell { nx, ny, entries } => {
                if entries.len() != nx * ny || *nx != grid.nx() || *ny != grid.ny() {
                    return Err(ProblemError::PerCellLength {
                        got: entries.len(),
                        want: grid.n_cells(),
                    });
                }
                Ok(entries[j * nx + i])
            }
            _ => {
                let (x, y) = grid.center(i, j);
                self.eval(x, y)
            }
        }
    }

    /// Check symmetric positive definiteness at every cell center.
    pub fn spd_sweep(&self, grid: &Grid) -> Result<(), ProblemError> {
        for j in 0..grid.ny() {
            for i in 0..grid.nx() {
                let t = self.at_cell(grid, i, j)?;
                if !t.is_spd() {
                    let (x, y) = grid.center(i, j);
                    return Err(ProblemError::NotSpd { x, y, dxx: t.dxx, dxy: t.dxy, dyy: t.dyy });
                }
            }
        }
        Ok(())
    }
}

fn rotational(alpha: f64, x: f64, y: f64) -> Result<SymTensor, ProblemError> {
    let r2 = x * x + y * y;
    if r2 == 0.0 {
        return Err(ProblemError::TensorSingular { x, y });
    }
    Ok(SymTensor::new(
        (alpha * x * x + y * y) / r2,
        (alpha - 1.0) * x * y / r2,
        (x * x + alpha * y * y) / r2,
    ))
}

/// Positive scalar weight (the Jacobian factor of the weighted transient equation).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WeightField {
    One,
    /// `a + b x + c y`; positive wherever the affine form stays positive.
    Affine { a: f64, b: f64, c: f64 },
}

impl WeightField {
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        match self {
            WeightField::One => 1.0,
            WeightField::Affine { a, b, c } => a + b * x + c * y,
        }
    }

    pub fn positivity_sweep(&self, grid: &Grid) -> Result<(), ProblemError> {
        for j in 0..grid.ny() {
            for i in 0..grid.nx() {
                let (x, y) = grid.center(i, j);
                let g = self.eval(x, y);
                if !(g > 0.0) || !g.is_finite() {
                    return Err(ProblemError::NonPositiveWeight { x, y, value: g });
                }
            }
        }
        Ok(())
    }
}

/// Boundary data evaluator.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BoundaryFn {
    Zero,
    One,
    Constant { value: f64 },
    /// `a + b x + c y`.
    Affine { a: f64, b: f64, c: f64 },
    /// `sin(pi x) sin(pi y)`.
    SinSin,
}

impl BoundaryFn {
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        match self {
            BoundaryFn::Zero => 0.0,
            BoundaryFn::One => 1.0,
            BoundaryFn::Constant { value } => *value,
            BoundaryFn::Affine { a, b, c } => a + b * x + c * y,
            BoundaryFn::SinSin => (PI * x).sin() * (PI * y).sin(),
        }
    }
}

/// Condition on one boundary side.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SideBc {
    Dirichlet { value: BoundaryFn },
    NoFlux,
}

/// Boundary conditions, one per side of the rectangle.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoundaryConditions {
    pub left: SideBc,
    pub right: SideBc,
    pub bottom: SideBc,
    pub top: SideBc,
}

impl BoundaryConditions {
    pub fn all_dirichlet(value: BoundaryFn) -> BoundaryConditions {
        let side = SideBc::Dirichlet { value };
        BoundaryConditions { left: side, right: side, bottom: side, top: side }
    }

    pub fn side(&self, side: crate::grid::Side) -> SideBc {
        match side {
            crate::grid::Side::Left => self.left,
            crate::grid::Side::Right => self.right,
            crate::grid::Side::Bottom => self.bottom,
            crate::grid::Side::Top => self.top,
        }
    }
}

/// Volume source description.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SourceField {
    Zero,
    /// Indicator of `[x_lo, x_hi] x [y_lo, y_hi]`; integrated exactly over
    /// each cell so nonaligned grids stay consistent.
    BoxIndicator { x_lo: f64, x_hi: f64, y_lo: f64, y_hi: f64 },
    /// Closed form of `-div(D grad f_ref)` for the `Rotational { alpha }`
    /// tensor and `f_ref = sin(pi x) sin(pi y)`.
    ManufacturedRotationalSinSin { alpha: f64 },
}

impl SourceField {
    /// Pointwise value. For the box indicator this is the raw indicator.
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        match self {
            SourceField::Zero => 0.0,
            SourceField::BoxIndicator { x_lo, x_hi, y_lo, y_hi } => {
                if x >= *x_lo && x <= *x_hi && y >= *y_lo && y <= *y_hi {
                    1.0
                } else {
                    0.0
                }
            }
            SourceField::ManufacturedRotationalSinSin { alpha } => {
                manufactured_rotational_sinsin(*alpha, x, y)
            }
        }
    }

    /// Integral of the source over cell `(i, j)`.
    pub fn cell_integral(&self, grid: &Grid, i: usize, j: usize) -> f64 {
        match self {
            SourceField::Zero => 0.0,
            SourceField::BoxIndicator { x_lo, x_hi, y_lo, y_hi } => {
                let (cx0, cx1, cy0, cy1) = grid.cell_bounds(i, j);
                let wx = (cx1.min(*x_hi) - cx0.max(*x_lo)).max(0.0);
                let wy = (cy1.min(*y_hi) - cy0.max(*y_lo)).max(0.0);
                wx * wy
            }
            _ => {
                let (x, y) = grid.center(i, j);
                self.eval(x, y) * grid.cell_area(i, j)
            }
        }
    }

    /// Per-cell source integrals for a whole grid.
    pub fn integrals(&self, grid: &Grid) -> Vec<f64> {
        let mut out = Vec::with_capacity(grid.n_cells());
        for j in 0..grid.ny() {
            for i in 0..grid.nx() {
                out.push(self.cell_integral(grid, i, j));
            }
        }
        out
    }
}

/// Source for the manufactured convergence problem.
///
/// For `D` the rotational tensor with radial eigenvalue `alpha` and
/// `f = sin(pi x) sin(pi y)`:
///
/// ```text
/// -div(D grad f) = pi^2 (1 + a) sin(px) sin(py)
///     + pi (1 - a) [ 2 pi x y cos(px) cos(py) + x cos(px) sin(py) + y sin(px) cos(py) ] / (x^2 + y^2)
/// ```
pub fn manufactured_rotational_sinsin(alpha: f64, x: f64, y: f64) -> f64 {
    let r2 = x * x + y * y;
    let (sx, cx) = (PI * x).sin_cos();
    let (sy, cy) = (PI * y).sin_cos();
    let iso = PI * PI * (1.0 + alpha) * sx * sy;
    let rot = PI * (1.0 - alpha) * (2.0 * PI * x * y * cx * cy + x * cx * sy + y * sx * cy) / r2;
    iso + rot
}

/// Reference solutions for manufactured cases.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RefSolution {
    SinSin,
}

impl RefSolution {
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        match self {
            RefSolution::SinSin => (PI * x).sin() * (PI * y).sin(),
        }
    }
}

/// Discrete L2 norm with cell-area weights: `(sum |K| f_K^2)^(1/2)`.
pub fn discrete_l2(grid: &Grid, f: &[f64]) -> f64 {
    let mut acc = 0.0;
    for j in 0..grid.ny() {
        for i in 0..grid.nx() {
            let v = f[grid.flat(i, j)];
            acc += grid.cell_area(i, j) * v * v;
        }
    }
    acc.sqrt()
}

/// Relative approximation error against a reference sampled at cell centers.
pub fn err2(grid: &Grid, f: &[f64], reference: &RefSolution) -> Result<f64, ProblemError> {
    err2_with(grid, f, |x, y| reference.eval(x, y))
}

/// [`err2`] against an arbitrary reference evaluator.
pub fn err2_with(
    grid: &Grid,
    f: &[f64],
    reference: impl Fn(f64, f64) -> f64,
) -> Result<f64, ProblemError> {
    if f.len() != grid.n_cells() {
        return Err(ProblemError::FieldLength { got: f.len(), want: grid.n_cells() });
    }
    let mut num = 0.0;
    let mut den = 0.0;
    for j in 0..grid.ny() {
        for i in 0..grid.nx() {
            let (x, y) = grid.center(i, j);
            let r = reference(x, y);
            let d = f[grid.flat(i, j)] - r;
            let a = grid.cell_area(i, j);
            num += a * d * d;
            den += a * r * r;
        }
    }
    if den == 0.0 {
        return Err(ProblemError::ZeroReferenceNorm);
    }
    Ok((num / den).sqrt())
}

/// Undershoot and overshoot ratios of a field against the Dirichlet data
/// extremes: fractions of cells strictly below `lo` / above `hi`, with a
/// relative guard of `1e-11 max(1, |bound|)` so solver rounding cannot
/// produce spurious counts. `None` bounds (all no-flux) give zero ratios.
pub fn extremum_ratios(f: &[f64], bounds: Option<(f64, f64)>) -> (f64, f64) {
    let Some((lo, hi)) = bounds else {
        return (0.0, 0.0);
    };
    if f.is_empty() {
        return (0.0, 0.0);
    }
    let tol_lo = 1.0e-11 * lo.abs().max(1.0);
    let tol_hi = 1.0e-11 * hi.abs().max(1.0);
    let n_under = f.iter().filter(|v| **v < lo - tol_lo).count();
    let n_over = f.iter().filter(|v| **v > hi + tol_hi).count();
    (n_under as f64 / f.len() as f64, n_over as f64 / f.len() as f64)
}

/// Spec of the implicit time integration attached to a transient case.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct TransientSpec {
    pub f_init: f64,
    pub dt: f64,
    pub t_end: f64,
}

/// A complete benchmark problem definition.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BenchmarkCase {
    pub name: String,
    pub grid: GridSpec,
    pub tensor: TensorField,
    #[serde(default)]
    pub weight: Option<WeightField>,
    pub source: SourceField,
    pub bc: BoundaryConditions,
    #[serde(default)]
    pub reference: Option<RefSolution>,
    #[serde(default)]
    pub picard: PicardConfig,
    /// Optional explicit relaxation couple `(c1, c2)`; computed when absent.
    #[serde(default)]
    pub c_override: Option<(f64, f64)>,
    #[serde(default)]
    pub transient: Option<TransientSpec>,
}

impl BenchmarkCase {
    /// Same case on an `n` by `n` grid (uniform grid specs only).
    pub fn with_grid_size(&self, n: usize) -> BenchmarkCase {
        let mut c = self.clone();
        c.grid = self.grid.with_size(n);
        c
    }

    pub fn from_toml_str(s: &str) -> Result<BenchmarkCase, ProblemError> {
        toml::from_str(s).map_err(|e| ProblemError::Config(e.to_string()))
    }

    pub fn to_toml_string(&self) -> Result<String, ProblemError> {
        toml::to_string_pretty(self).map_err(|e| ProblemError::Config(e.to_string()))
    }
}

/// Constant uniform tensor of the anisotropic smoke test.
pub fn uniform_tensor() -> TensorField {
    TensorField::uniform_high_anisotropy()
}

/// Radially structured tensor with eigenvalues `1` and `alpha`.
pub fn rotational_tensor(alpha: f64) -> TensorField {
    assert!(alpha > 0.0, "alpha must be positive");
    TensorField::Rotational { alpha }
}

/// The five stationary benchmark cases plus the synthetic transient one.
pub fn benchmark_catalog() -> Vec<BenchmarkCase> {
    let eps_default = PicardConfig::default();

    let uniform = BenchmarkCase {
        name: "uniform".into(),
        grid: GridSpec::Uniform { domain: [0.0, 0.5, 0.0, 0.5], nx: 20, ny: 20 },
        tensor: uniform_tensor(),
        weight: None,
        source: SourceField::Zero,
        bc: BoundaryConditions::all_dirichlet(BoundaryFn::SinSin),
        reference: None,
        picard: eps_default.clone(),
        c_override: None,
        transient: None,
    };

    let positivity = BenchmarkCase {
        name: "positivity".into(),
        grid: GridSpec::Uniform { domain: [0.0, 1.0, 0.0, 1.0], nx: 20, ny: 20 },
        tensor: rotational_tensor(1.0e-9),
        weight: None,
        source: SourceField::BoxIndicator { x_lo: 0.25, x_hi: 0.75, y_lo: 0.25, y_hi: 0.75 },
        bc: BoundaryConditions {
            left: SideBc::Dirichlet { value: BoundaryFn::Zero },
            right: SideBc::NoFlux,
            bottom: SideBc::Dirichlet { value: BoundaryFn::Zero },
            top: SideBc::Dirichlet { value: BoundaryFn::Zero },
        },
        reference: None,
        picard: eps_default.clone(),
        c_override: None,
        transient: None,
    };

    let minimum = BenchmarkCase {
        name: "minimum".into(),
        bc: BoundaryConditions::all_dirichlet(BoundaryFn::One),
        ..positivity.clone()
    };

    let minmax = BenchmarkCase {
        name: "minmax".into(),
        grid: GridSpec::Uniform { domain: [0.0, 0.5, 0.0, 0.5], nx: 20, ny: 20 },
        tensor: rotational_tensor(1.0e-9),
        weight: None,
        source: SourceField::Zero,
        bc: BoundaryConditions {
            left: SideBc::Dirichlet { value: BoundaryFn::SinSin },
            right: SideBc::NoFlux,
            bottom: SideBc::Dirichlet { value: BoundaryFn::SinSin },
            top: SideBc::Dirichlet { value: BoundaryFn::SinSin },
        },
        reference: None,
        picard: eps_default.clone(),
        c_override: None,
        transient: None,
    };

    let convergence = BenchmarkCase {
        name: "convergence".into(),
        grid: GridSpec::Uniform { domain: [0.0, 0.5, 0.0, 0.5], nx: 20, ny: 20 },
        tensor: rotational_tensor(1.0e-6),
        weight: None,
        source: SourceField::ManufacturedRotationalSinSin { alpha: 1.0e-6 },
        bc: BoundaryConditions::all_dirichlet(BoundaryFn::SinSin),
        reference: Some(RefSolution::SinSin),
        picard: eps_default,
        c_override: None,
        transient: None,
    };

    // Synthetic radiation-belt-style transient: pitch-angle-like x axis,
    // energy-like y axis, anisotropy ratio about 1e6 with a cross term,
    // and a smoothly varying Jacobian weight.
    let transient = BenchmarkCase {
        name: "transient".into(),
        grid: GridSpec::Uniform { domain: [0.0867, 1.0, 5.664e-4, 12.561], nx: 24, ny: 32 },
        tensor: TensorField::Uniform { dxx: 1.0e6, dxy: 5.0e2, dyy: 1.0 },
        weight: Some(WeightField::Affine { a: 1.0, b: 1.0, c: 1.0 / 12.561 }),
        source: SourceField::Zero,
        bc: BoundaryConditions {
            left: SideBc::Dirichlet { value: BoundaryFn::Zero },
            right: SideBc::NoFlux,
            bottom: SideBc::Dirichlet { value: BoundaryFn::Constant { value: 1.0e30 } },
            top: SideBc::Dirichlet { value: BoundaryFn::Zero },
        },
        reference: None,
        picard: PicardConfig {
            epsilon: 1.0e-6,
            residual: ResidualKind::AlgebraicResidual,
            max_iter: 300,
            init: InitPolicy::Ones,
            audit: false,
        },
        c_override: None,
        transient: Some(TransientSpec { f_init: 1.0e30, dt: 1000.0, t_end: 90_000.0 }),
    };

    vec![uniform, positivity, minimum, minmax, convergence, transient]
}

pub fn case_by_name(name: &str) -> Result<BenchmarkCase, ProblemError> {
    benchmark_catalog()
        .into_iter()
        .find(|c| c.name == name)
        .ok_or_else(|| ProblemError::UnknownCase(name.to_string()))
}
