//! Per-edge linear flux ingredients.
//!
//! For an interior edge shared by cells K (minus side) and L (plus side),
//! the one-sided upwind fluxes take the general form
//!
//! ```text
//! F1 =  lam1 (f_K - f_L) + nu1 (f_K - f_M)
//! F2 = -lam2 (f_L - f_K) - nu2 (f_L - f_N)
//! ```
//!
//! with `lam_r = D_nn(cell_r) |sigma| / |center gap|` (the normal tensor
//! entry), `nu_r = |D_xy(cell_r)| |sigma| / |transverse center gap|`, and the
//! transverse cells M, N picked by the sign of the cross-diffusion entry on
//! each side. The edge-unknown form of the same fluxes keeps the intersection
//! point and transverse-edge values with center-to-edge gaps; those
//! coefficients drive the two-point scheme's weights.
//!
//! Boundary data is baked in at build time: wherever a transverse stencil
//! exits the mesh through a Dirichlet side the boundary value is stored,
//! and a no-flux exit drops the branch (its `nu` is zeroed), keeping every
//! retained coefficient nonnegative.

use thiserror::Error;

use crate::grid::{Axis, EdgeSide, Grid, Side, TransverseTarget};
use crate::problems::{BoundaryConditions, ProblemError, SideBc, SymTensor, TensorField, WeightField};

#[derive(Debug, Error)]
pub enum KernelError {
    #[error(transparent)]
    Problem(#[from] ProblemError),
}

/// Target of a transverse branch with boundary data already resolved.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TransTarget {
    /// Flat index of the transverse cell.
    Cell(usize),
    /// Branch exits through a Dirichlet side; the boundary value is frozen.
    Dirichlet(f64),
    /// Branch exits through a no-flux side and is dropped.
    Dropped,
}

/// Transverse edge value used by the edge-unknown flux form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TransEdgeValue {
    /// Interpolate between the side cell and `cell`: `w_self * f_self + (1 - w_self) * f[cell]`.
    Interp { cell: usize, w_self: f64 },
    Dirichlet(f64),
    Dropped,
}

/// One side of an interior edge.
#[derive(Debug, Clone, Copy)]
pub struct SideKernel {
    /// Cell-centered primary transmissibility, `D_nn |sigma| / |center gap|`.
    pub lam: f64,
    /// Cell-centered transverse transmissibility (zero iff `D_xy = 0` or the branch is dropped).
    pub nu: f64,
    pub trans: TransTarget,
    /// Edge-form primary transmissibility, `D_nn |sigma| / |center-to-edge gap|`.
    pub lam_edge: f64,
    pub nu_edge: f64,
    pub trans_edge: TransEdgeValue,
    /// Sign flag of the cross term, zero folded into the nonnegative branch.
    pub dxy_nonneg: bool,
}

/// Linear flux data of one interior edge.
#[derive(Debug, Clone, Copy)]
pub struct EdgeKernel {
    pub axis: Axis,
    /// Flat index of the minus-side cell K.
    pub k: usize,
    /// Flat index of the plus-side cell L.
    pub l: usize,
    pub minus: SideKernel,
    pub plus: SideKernel,
    /// Interpolation weight of `f_K` in the edge value `f_sigma`.
    pub w_sigma_minus: f64,
}

impl EdgeKernel {
    /// Side kernels ordered as (own, other) when viewed from `side`.
    pub fn oriented(&self, side: EdgeSide) -> (&SideKernel, &SideKernel, usize, usize) {
        match side {
            EdgeSide::Minus => (&self.minus, &self.plus, self.k, self.l),
            EdgeSide::Plus => (&self.plus, &self.minus, self.l, self.k),
        }
    }

    pub fn w_sigma(&self, side: EdgeSide) -> f64 {
        match side {
            EdgeSide::Minus => self.w_sigma_minus,
            EdgeSide::Plus => 1.0 - self.w_sigma_minus,
        }
    }
}

/// Discrete closure of a boundary edge.
#[derive(Debug, Clone, Copy)]
pub enum BoundaryKernel {
    /// Zero flux contribution.
    NoFlux,
    /// One-sided two-point flux `lam (f_K - value)` plus an upwind transverse branch.
    Dirichlet { lam: f64, value: f64, nu: f64, trans: TransTarget },
}

/// All per-edge flux data for one (possibly weighted) tensor field on a grid.
#[derive(Debug, Clone)]
pub struct Kernels {
    pub edges: Vec<EdgeKernel>,
    pub boundaries: Vec<BoundaryKernel>,
    /// Per-cell weight G for the transient mass term (all ones when unweighted).
    pub cell_weight: Vec<f64>,
}

impl Kernels {
    /// Build kernels from the (optionally weighted) tensor. The effective
    /// tensor is `G(c) D(c)` evaluated at cell centers.
    pub fn build(
        grid: &Grid,
        tensor: &TensorField,
        weight: Option<&WeightField>,
        bc: &BoundaryConditions,
    ) -> Result<Kernels, KernelError> {
        let nx = grid.nx();
        let ny = grid.ny();
        let mut eff = Vec::with_capacity(grid.n_cells());
        let mut cell_weight = Vec::with_capacity(grid.n_cells());
        for j in 0..ny {
            for i in 0..nx {
                let d = tensor.at_cell(grid, i, j)?;
                if !d.is_spd() {
                    let (x, y) = grid.center(i, j);
                    return Err(ProblemError::NotSpd { x, y, dxx: d.dxx, dxy: d.dxy, dyy: d.dyy }.into());
                }
                let g = match weight {
                    Some(w) => {
                        let (x, y) = grid.center(i, j);
                        let v = w.eval(x, y);
                        if !(v > 0.0) || !v.is_finite() {
                            return Err(ProblemError::NonPositiveWeight { x, y, value: v }.into());
                        }
                        v
                    }
                    None => 1.0,
                };
                eff.push(d.scale(g));
                cell_weight.push(g);
            }
        }

        let edges = grid
            .interior_edges()
            .iter()
            .map(|e| {
                let k = grid.flat(e.minus.0, e.minus.1);
                let l = grid.flat(e.plus.0, e.plus.1);
                let (ck, cl) = (grid.center(e.minus.0, e.minus.1), grid.center(e.plus.0, e.plus.1));
                let gap = match e.axis {
                    Axis::X => cl.0 - ck.0,
                    Axis::Y => cl.1 - ck.1,
                };
                let minus = side_kernel(grid, bc, &eff, e, EdgeSide::Minus, gap);
                let plus = side_kernel(grid, bc, &eff, e, EdgeSide::Plus, gap);
                // Edge value by flux continuity of the one-sided two-point
                // parts: lam_edge-weighted mean of the two cell values.
                let w_sigma_minus = minus.lam_edge / (minus.lam_edge + plus.lam_edge);
                EdgeKernel { axis: e.axis, k, l, minus, plus, w_sigma_minus }
            })
            .collect();

        let boundaries = grid
            .boundary_edges()
            .iter()
            .map(|b| {
                let (i, j) = b.cell;
                let d = eff[grid.flat(i, j)];
                match bc.side(b.side) {
                    SideBc::NoFlux => BoundaryKernel::NoFlux,
                    SideBc::Dirichlet { value } => {
                        let (cx, cy) = grid.center(i, j);
                        let (axis, d_nn, gap) = match b.side {
                            Side::Left | Side::Right => (Axis::X, d.dxx, (b.point.0 - cx).abs()),
                            Side::Bottom | Side::Top => (Axis::Y, d.dyy, (b.point.1 - cy).abs()),
                        };
                        let lam = d_nn * b.length / gap;
                        let dxy_nonneg = d.dxy >= 0.0;
                        // outward orientation mirrors the interior edge rule
                        let orient = match b.side {
                            Side::Right | Side::Top => 1i64,
                            Side::Left | Side::Bottom => -1,
                        };
                        let dir = if dxy_nonneg { orient } else { -orient };
                        let (nu, trans) =
                            transverse_branch(grid, bc, (i, j), axis, dir, d.dxy.abs(), b.length);
                        BoundaryKernel::Dirichlet { lam, value: value.eval(b.point.0, b.point.1), nu, trans }
                    }
                }
            })
            .collect();

        Ok(Kernels { edges, boundaries, cell_weight })
    }

    /// Extremes of every Dirichlet value baked into the kernels, or `None`
    /// when the whole boundary is no-flux.
    pub fn dirichlet_bounds(&self) -> Option<(f64, f64)> {
        let mut bounds: Option<(f64, f64)> = None;
        let mut push = |v: f64| {
            bounds = Some(match bounds {
                None => (v, v),
                Some((lo, hi)) => (lo.min(v), hi.max(v)),
            });
        };
        for ek in &self.edges {
            for s in [&ek.minus, &ek.plus] {
                if let TransTarget::Dirichlet(v) = s.trans {
                    push(v);
                }
                if let TransEdgeValue::Dirichlet(v) = s.trans_edge {
                    push(v);
                }
            }
        }
        for b in &self.boundaries {
            if let BoundaryKernel::Dirichlet { value, trans, .. } = b {
                push(*value);
                if let TransTarget::Dirichlet(v) = trans {
                    push(*v);
                }
            }
        }
        bounds
    }
}

/// Cell-centered transverse branch of a one-sided flux from cell `(i, j)`
/// looking in direction `dir` along the axis transverse to `axis`.
fn transverse_branch(
    grid: &Grid,
    bc: &BoundaryConditions,
    cell: (usize, usize),
    axis: Axis,
    dir: i64,
    dxy_abs: f64,
    len: f64,
) -> (f64, TransTarget) {
    let (i, j) = cell;
    let (cx, cy) = grid.center(i, j);
    match axis {
        Axis::X => {
            // transverse along y
            let jt = j as i64 + dir;
            if jt >= 0 && (jt as usize) < grid.ny() {
                let gap = (grid.centers_y()[jt as usize] - cy).abs();
                (dxy_abs * len / gap, TransTarget::Cell(grid.flat(i, jt as usize)))
            } else {
                let side = if dir > 0 { Side::Top } else { Side::Bottom };
                match bc.side(side) {
                    SideBc::NoFlux => (0.0, TransTarget::Dropped),
                    SideBc::Dirichlet { value } => {
                        let yb = if dir > 0 { grid.y_lines()[grid.ny()] } else { grid.y_lines()[0] };
                        ((dxy_abs * len / (yb - cy).abs()), TransTarget::Dirichlet(value.eval(cx, yb)))
                    }
                }
            }
        }
        Axis::Y => {
            let it = i as i64 + dir;
            if it >= 0 && (it as usize) < grid.nx() {
                let gap = (grid.centers_x()[it as usize] - cx).abs();
                (dxy_abs * len / gap, TransTarget::Cell(grid.flat(it as usize, j)))
            } else {
                let side = if dir > 0 { Side::Right } else { Side::Left };
                match bc.side(side) {
                    SideBc::NoFlux => (0.0, TransTarget::Dropped),
                    SideBc::Dirichlet { value } => {
                        let xb = if dir > 0 { grid.x_lines()[grid.nx()] } else { grid.x_lines()[0] };
                        ((dxy_abs * len / (xb - cx).abs()), TransTarget::Dirichlet(value.eval(xb, cy)))
                    }
                }
            }
        }
    }
}

fn side_kernel(
    grid: &Grid,
    bc: &BoundaryConditions,
    eff: &[SymTensor],
    e: &crate::grid::InteriorEdge,
    side: EdgeSide,
    center_gap: f64,
) -> SideKernel {
    let (i, j) = match side {
        EdgeSide::Minus => e.minus,
        EdgeSide::Plus => e.plus,
    };
    let d = eff[grid.flat(i, j)];
    let (cx, cy) = grid.center(i, j);
    let d_nn = match e.axis {
        Axis::X => d.dxx,
        Axis::Y => d.dyy,
    };
    let lam = d_nn * e.length / center_gap;
    let edge_gap = match e.axis {
        Axis::X => (e.point.0 - cx).abs(),
        Axis::Y => (e.point.1 - cy).abs(),
    };
    let lam_edge = d_nn * e.length / edge_gap;

    let dxy_nonneg = d.dxy >= 0.0;
    let orient: i64 = match side {
        EdgeSide::Minus => 1,
        EdgeSide::Plus => -1,
    };
    let dir = if dxy_nonneg { orient } else { -orient };
    let (nu, trans) = transverse_branch(grid, bc, (i, j), e.axis, dir, d.dxy.abs(), e.length);
    debug_assert!(match (grid.transverse_neighbor(e, side, dxy_nonneg), trans) {
        (TransverseTarget::Cell(ti, tj), TransTarget::Cell(f)) => grid.flat(ti, tj) == f,
        (TransverseTarget::Exit(_), TransTarget::Dirichlet(_) | TransTarget::Dropped) => true,
        _ => false,
    });

    // Edge-form transverse branch: value on the transverse edge of this
    // cell, with a center-to-edge gap. Interior transverse edge values are
    // the flux-continuity means of the two adjacent cells.
    let (nu_edge, trans_edge) = match e.axis {
        Axis::X => {
            let y_edge = if dir > 0 { grid.y_lines()[j + 1] } else { grid.y_lines()[j] };
            let gap = (y_edge - cy).abs();
            let jt = j as i64 + dir;
            if jt >= 0 && (jt as usize) < grid.ny() {
                let cell = grid.flat(i, jt as usize);
                let t_self = d.dyy / gap;
                let t_cell = eff[cell].dyy / (grid.centers_y()[jt as usize] - y_edge).abs();
                (
                    d.dxy.abs() * e.length / gap,
                    TransEdgeValue::Interp { cell, w_self: t_self / (t_self + t_cell) },
                )
            } else {
                let side_b = if dir > 0 { Side::Top } else { Side::Bottom };
                match bc.side(side_b) {
                    SideBc::NoFlux => (0.0, TransEdgeValue::Dropped),
                    SideBc::Dirichlet { value } => {
                        (d.dxy.abs() * e.length / gap, TransEdgeValue::Dirichlet(value.eval(cx, y_edge)))
                    }
                }
            }
        }
        Axis::Y => {
            let x_edge = if dir > 0 { grid.x_lines()[i + 1] } else { grid.x_lines()[i] };
            let gap = (x_edge - cx).abs();
            let it = i as i64 + dir;
            if it >= 0 && (it as usize) < grid.nx() {
                let cell = grid.flat(it as usize, j);
                let t_self = d.dxx / gap;
                let t_cell = eff[cell].dxx / (grid.centers_x()[it as usize] - x_edge).abs();
                (
                    d.dxy.abs() * e.length / gap,
                    TransEdgeValue::Interp { cell, w_self: t_self / (t_self + t_cell) },
                )
            } else {
                let side_b = if dir > 0 { Side::Right } else { Side::Left };
                match bc.side(side_b) {
                    SideBc::NoFlux => (0.0, TransEdgeValue::Dropped),
                    SideBc::Dirichlet { value } => {
                        (d.dxy.abs() * e.length / gap, TransEdgeValue::Dirichlet(value.eval(x_edge, cy)))
                    }
                }
            }
        }
    };

    SideKernel { lam, nu, trans, lam_edge, nu_edge, trans_edge, dxy_nonneg }
}

/// Frozen-state lookup for transverse targets.
#[inline]
pub fn trans_value(t: TransTarget, f: &[f64]) -> f64 {
    match t {
        TransTarget::Cell(c) => f[c],
        TransTarget::Dirichlet(v) => v,
        TransTarget::Dropped => 0.0,
    }
}

/// Frozen-state lookup for transverse edge values. `f_self` is the value of
/// the side cell the branch is anchored in.
#[inline]
pub fn trans_edge_value(t: TransEdgeValue, f_self: f64, f: &[f64]) -> f64 {
    match t {
        TransEdgeValue::Interp { cell, w_self } => w_self * f_self + (1.0 - w_self) * f[cell],
        TransEdgeValue::Dirichlet(v) => v,
        TransEdgeValue::Dropped => 0.0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::BoundaryFn;

    fn dirichlet_zero() -> BoundaryConditions {
        BoundaryConditions::all_dirichlet(BoundaryFn::Zero)
    }

    #[test]
    fn isotropic_uniform_kernel() {
        let g = Grid::uniform(0.0, 1.0, 0.0, 1.0, 4, 4).unwrap();
        let ks = Kernels::build(&g, &TensorField::Identity, None, &dirichlet_zero()).unwrap();
        for ek in &ks.edges {
            assert!((ek.minus.lam - 1.0).abs() < 1e-14);
            assert!((ek.plus.lam - 1.0).abs() < 1e-14);
            assert_eq!(ek.minus.nu, 0.0);
            assert_eq!(ek.plus.nu, 0.0);
            assert!((ek.minus.lam_edge - 2.0).abs() < 1e-14);
            assert!((ek.w_sigma_minus - 0.5).abs() < 1e-14);
        }
    }

    #[test]
    fn anisotropic_uniform_kernel_coefficients() {
        // uniform tensor (1e7, 1e3; 1e3, 1) on a square 20x20 grid of (0,0.5)^2:
        // vertical edges carry lam = 1e7, nu = 1e3 on both sides.
        let g = Grid::uniform(0.0, 0.5, 0.0, 0.5, 20, 20).unwrap();
        let t = crate::problems::uniform_tensor();
        let ks = Kernels::build(&g, &t, None, &dirichlet_zero()).unwrap();
        let ek = ks
            .edges
            .iter()
            .find(|ek| ek.axis == Axis::X && g.cell_of(ek.k) == (5, 5))
            .unwrap();
        assert!((ek.minus.lam / 1.0e7 - 1.0).abs() < 1e-13);
        assert!((ek.plus.lam / 1.0e7 - 1.0).abs() < 1e-13);
        assert!((ek.minus.nu / 1.0e3 - 1.0).abs() < 1e-13);
        assert!((ek.plus.nu / 1.0e3 - 1.0).abs() < 1e-13);
        // D_xy > 0: minus-side branch points at the cell above K
        assert_eq!(ek.minus.trans, TransTarget::Cell(g.flat(5, 6)));
        assert_eq!(ek.plus.trans, TransTarget::Cell(g.flat(6, 4)));
        // horizontal edges: lam from D_yy
        let eh = ks
            .edges
            .iter()
            .find(|ek| ek.axis == Axis::Y && g.cell_of(ek.k) == (5, 5))
            .unwrap();
        assert!((eh.minus.lam - 1.0).abs() < 1e-12);
        assert!((eh.minus.nu / 1.0e3 - 1.0).abs() < 1e-13);
    }

    #[test]
    fn mirror_symmetry_of_sides() {
        // kernel viewed from L is the role swap of the kernel viewed from K
        let g = Grid::from_lines(vec![0.0, 0.1, 0.3, 0.6, 1.0], vec![0.0, 0.2, 0.5, 0.9, 1.3]).unwrap();
        let t = TensorField::Uniform { dxx: 3.0, dxy: -0.5, dyy: 2.0 };
        let ks = Kernels::build(&g, &t, None, &dirichlet_zero()).unwrap();
        for ek in &ks.edges {
            let (a, b, ka, kb) = ek.oriented(EdgeSide::Minus);
            let (c, d, kc, kd) = ek.oriented(EdgeSide::Plus);
            assert_eq!(ka, kd);
            assert_eq!(kb, kc);
            assert_eq!(a.lam, d.lam);
            assert_eq!(b.lam, c.lam);
            assert_eq!(a.nu, d.nu);
            assert_eq!(b.nu, c.nu);
            assert!((ek.w_sigma(EdgeSide::Minus) + ek.w_sigma(EdgeSide::Plus) - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn positivity_of_coefficients_on_catalog_cases() {
        for case in crate::problems::benchmark_catalog() {
            let g = case.grid.build().unwrap();
            let ks = Kernels::build(&g, &case.tensor, case.weight.as_ref(), &case.bc).unwrap();
            for ek in &ks.edges {
                for s in [&ek.minus, &ek.plus] {
                    assert!(s.lam > 0.0);
                    assert!(s.nu >= 0.0);
                    assert!(s.lam_edge > 0.0);
                    assert!(s.nu_edge >= 0.0);
                    if matches!(s.trans, TransTarget::Dropped) {
                        assert_eq!(s.nu, 0.0);
                    }
                }
            }
        }
    }

    #[test]
    fn noflux_exit_drops_transverse_branch() {
        let g = Grid::uniform(0.0, 1.0, 0.0, 1.0, 4, 4).unwrap();
        let bc = BoundaryConditions {
            left: SideBc::Dirichlet { value: BoundaryFn::Zero },
            right: SideBc::NoFlux,
            bottom: SideBc::Dirichlet { value: BoundaryFn::Zero },
            top: SideBc::NoFlux,
        };
        let t = TensorField::Uniform { dxx: 2.0, dxy: 1.0, dyy: 2.0 };
        let ks = Kernels::build(&g, &t, None, &bc).unwrap();
        // vertical edge with K in the top row: minus-side transverse exits Top (no-flux)
        let ek = ks
            .edges
            .iter()
            .find(|ek| ek.axis == Axis::X && g.cell_of(ek.k) == (1, 3))
            .unwrap();
        assert_eq!(ek.minus.trans, TransTarget::Dropped);
        assert_eq!(ek.minus.nu, 0.0);
        // same edge: plus-side transverse goes down into the mesh
        assert_eq!(ek.plus.trans, TransTarget::Cell(g.flat(2, 2)));

        // vertical edge with K in the bottom row exits Bottom (Dirichlet): value baked
        let eb = ks
            .edges
            .iter()
            .find(|ek| ek.axis == Axis::X && g.cell_of(ek.l) == (2, 0))
            .unwrap();
        assert_eq!(eb.plus.trans, TransTarget::Dirichlet(0.0));
        assert!(eb.plus.nu > 0.0);
    }

    #[test]
    fn spd_violation_is_reported() {
        let g = Grid::uniform(0.0, 1.0, 0.0, 1.0, 4, 4).unwrap();
        let t = TensorField::Uniform { dxx: 1.0, dxy: 2.0, dyy: 1.0 };
        assert!(Kernels::build(&g, &t, None, &dirichlet_zero()).is_err());
    }

    #[test]
    fn boundary_closure_halves_the_gap() {
        // identity tensor, uniform h: Dirichlet closure transmissibility is 2|sigma|/h
        let g = Grid::uniform(0.0, 1.0, 0.0, 1.0, 4, 4).unwrap();
        let ks = Kernels::build(&g, &TensorField::Identity, None, &dirichlet_zero()).unwrap();
        for b in &ks.boundaries {
            match b {
                BoundaryKernel::Dirichlet { lam, value, nu, .. } => {
                    assert!((lam - 2.0).abs() < 1e-13);
                    assert_eq!(*value, 0.0);
                    assert_eq!(*nu, 0.0);
                }
                BoundaryKernel::NoFlux => panic!("expected Dirichlet closures"),
            }
        }
    }

    #[test]
    fn dirichlet_bounds_cover_baked_values() {
        let case = crate::problems::case_by_name("minmax").unwrap();
        let g = case.grid.build().unwrap();
        let ks = Kernels::build(&g, &case.tensor, None, &case.bc).unwrap();
        let (lo, hi) = ks.dirichlet_bounds().unwrap();
        assert!(lo >= 0.0);
        assert!(hi < 1.0);
        assert!(hi > 0.9);
    }
}
