//! Nonlinear flux schemes and their linearized 9-point systems.
//!
//! All three schemes express the edge flux as a convex combination
//! `F = mu1 F1 + mu2 F2` of the one-sided upwind fluxes and differ in how the
//! weights reshape the combination:
//!
//! * two-point: weights cancel the edge-unknown groups, leaving
//!   `F = alpha f_K - beta f_L` with `alpha, beta >= 0`;
//! * multi-point: weights built from the transverse branches either cancel
//!   them or fold them into the own-side difference, keeping a local
//!   maximum-principle form;
//! * relaxed multi-point: each transverse branch is split by weights
//!   `c1, c2 in (0, 1)`; the split keeps all four stencil cells in the
//!   linearized flux, giving a 9-point linearized stencil whose matrix
//!   satisfies the relaxed monotonicity conditions (A0)-(A3) when the
//!   couple is chosen below the five feasibility bounds.
//!
//! Every row of the linearized system is assembled from that row's own
//! arrangement of the fluxes, which is what the (A0)-(A3) audit inspects.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::grid::{Axis, EdgeRef, EdgeSide, Grid};
use crate::kernel::{trans_edge_value, trans_value, BoundaryKernel, EdgeKernel, Kernels, TransTarget};

#[derive(Debug, Error)]
pub enum SchemeError {
    #[error("relaxed scheme needs feasible c-weights; call compute_c_weights first")]
    MissingCWeights,
    #[error("c-weight bound {index} is not positive ({value}); monotonicity cannot be certified")]
    InfeasibleBound { index: usize, value: f64 },
    #[error("no interior cells to bound the c-weights on")]
    NoInteriorCells,
    #[error("c couple ({c1}, {c2}) outside (0, 1)")]
    InvalidCouple { c1: f64, c2: f64 },
    #[error("field length {got} does not match grid cell count {want}")]
    FieldLength { got: usize, want: usize },
}

/// The three nonlinear flux approximations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SchemeKind {
    Nltpfa,
    Nlmpfa,
    Rnlmpfa,
}

impl SchemeKind {
    pub fn all() -> [SchemeKind; 3] {
        [SchemeKind::Nltpfa, SchemeKind::Nlmpfa, SchemeKind::Rnlmpfa]
    }

    pub fn name(&self) -> &'static str {
        match self {
            SchemeKind::Nltpfa => "nltpfa",
            SchemeKind::Nlmpfa => "nlmpfa",
            SchemeKind::Rnlmpfa => "rnlmpfa",
        }
    }

    pub fn parse(s: &str) -> Option<SchemeKind> {
        match s.to_ascii_lowercase().as_str() {
            "nltpfa" => Some(SchemeKind::Nltpfa),
            "nlmpfa" => Some(SchemeKind::Nlmpfa),
            "rnlmpfa" | "r-nlmpfa" => Some(SchemeKind::Rnlmpfa),
            _ => None,
        }
    }
}

/// Convex combination weights from two nonnegative groups:
/// `mu1 = a2 / (a1 + a2)`, `mu2 = a1 / (a1 + a2)`, with the 1/2 fallback
/// for a vanishing denominator.
#[inline]
pub fn convex_weights(a1: f64, a2: f64) -> (f64, f64) {
    let sum = a1 + a2;
    if sum == 0.0 {
        (0.5, 0.5)
    } else {
        (a2 / sum, a1 / sum)
    }
}

/// Two-point scheme weights from the frozen edge-unknown groups.
#[inline]
pub fn nltpfa_weights(a1: f64, a2: f64) -> (f64, f64) {
    convex_weights(a1, a2)
}

/// Relaxation couple per discretization direction.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct CWeights {
    /// Couple used by vertical edges (x direction), as seen from the minus side.
    pub x: (f64, f64),
    /// Couple used by horizontal edges (y direction).
    pub y: (f64, f64),
    /// The binding feasibility bound that produced the couple.
    pub bound: f64,
}

impl CWeights {
    pub fn explicit(c1: f64, c2: f64) -> Result<CWeights, SchemeError> {
        if !(c1 > 0.0 && c1 < 1.0 && c2 > 0.0 && c2 < 1.0 && c2 <= c1) {
            return Err(SchemeError::InvalidCouple { c1, c2 });
        }
        Ok(CWeights { x: (c1, c2), y: (c1, c2), bound: f64::NAN })
    }

    /// Couple for one side of an edge. Conservativity ties the two sides of
    /// an edge together by swapping the roles of `c1` and `c2`.
    #[inline]
    pub fn couple(&self, axis: Axis, side: EdgeSide) -> (f64, f64) {
        let (c1, c2) = match axis {
            Axis::X => self.x,
            Axis::Y => self.y,
        };
        match side {
            EdgeSide::Minus => (c1, c2),
            EdgeSide::Plus => (c2, c1),
        }
    }
}

/// The five right-hand-side bounds constraining the relaxation couples,
/// together with the diagonal aggregate they were computed from.
#[derive(Debug, Clone, Copy)]
pub struct CBounds {
    pub b: [f64; 5],
    pub a_prime: f64,
}

/// Smaller of the two primary transmissibilities of local edge `p` of a
/// cell, and the larger transverse one of the far side; `None` when that
/// edge is on the boundary.
fn edge_lam_nu(grid: &Grid, kernels: &Kernels, i: usize, j: usize, p: usize) -> Option<(f64, f64)> {
    match grid.cell_edge(i, j, p) {
        EdgeRef::Interior { index, side } => {
            let ek = &kernels.edges[index];
            let (own, other, _, _) = ek.oriented(side);
            Some((own.lam.min(other.lam), other.nu))
        }
        EdgeRef::Boundary { .. } => None,
    }
}

/// Evaluate the five feasibility bounds over the audited cells (full 9-point
/// neighbourhoods), pairing each cross-product condition with the actual
/// neighbouring row it involves — the most demanding local condition of each
/// kind. `extra_diag_max` is an upper bound on any extra diagonal
/// contribution (the implicit-step mass term); it enlarges the diagonal
/// aggregate the cross-product conditions divide by.
pub fn c_weight_bounds(
    grid: &Grid,
    kernels: &Kernels,
    extra_diag_max: f64,
) -> Result<CBounds, SchemeError> {
    // A2 terms and the diagonal aggregate, over audited cells
    let mut min_lam_vert_sum = f64::INFINITY;
    let mut max_nu2_horiz = 0.0f64;
    let mut diag_aggregate = 0.0f64;
    // cross-product numerators (lam-min pairs) and denominators (nu2 maxima
    // on the partner row), for (s1,s2-), (s3,s2-), (s3,s4+), (s1,s4+)
    let mut pair_num = [f64::INFINITY; 4];
    let mut pair_den = [0.0f64; 4];
    let mut seen = false;
    for j in 0..grid.ny() {
        for i in 0..grid.nx() {
            if !grid.is_interior_cell(i, j) {
                continue;
            }
            seen = true;
            let mut cell_diag = 0.0;
            for p in 0..4 {
                let EdgeRef::Interior { index, side } = grid.cell_edge(i, j, p) else {
                    unreachable!("interior cells have interior edges only")
                };
                let ek = &kernels.edges[index];
                let (own, other, _, _) = ek.oriented(side);
                cell_diag += own.lam.max(other.lam) + 2.0 * own.nu;
            }
            diag_aggregate = diag_aggregate.max(cell_diag);

            let (l1, n1) = edge_lam_nu(grid, kernels, i, j, 0).unwrap();
            let (l2, _) = edge_lam_nu(grid, kernels, i, j, 1).unwrap();
            let (l3, n3) = edge_lam_nu(grid, kernels, i, j, 2).unwrap();
            let (l4, _) = edge_lam_nu(grid, kernels, i, j, 3).unwrap();
            min_lam_vert_sum = min_lam_vert_sum.min(l2 + l4);
            max_nu2_horiz = max_nu2_horiz.max(n1.max(n3));

            // partner row below: its top-edge transmissibility and the
            // transverse coefficients feeding its corner entries
            let below = (i, j - 1);
            if let Some((l2b, n2b)) = edge_lam_nu(grid, kernels, below.0, below.1, 1) {
                let n1b = edge_lam_nu(grid, kernels, below.0, below.1, 0).map(|v| v.1).unwrap_or(0.0);
                let n3b = edge_lam_nu(grid, kernels, below.0, below.1, 2).map(|v| v.1).unwrap_or(0.0);
                pair_num[0] = pair_num[0].min(l1 * l2b);
                pair_den[0] = pair_den[0].max(n1b.max(n2b));
                pair_num[1] = pair_num[1].min(l3 * l2b);
                pair_den[1] = pair_den[1].max(n2b.max(n3b));
            }
            let above = (i, j + 1);
            if let Some((l4a, n4a)) = edge_lam_nu(grid, kernels, above.0, above.1, 3) {
                let n1a = edge_lam_nu(grid, kernels, above.0, above.1, 0).map(|v| v.1).unwrap_or(0.0);
                let n3a = edge_lam_nu(grid, kernels, above.0, above.1, 2).map(|v| v.1).unwrap_or(0.0);
                pair_num[2] = pair_num[2].min(l3 * l4a);
                pair_den[2] = pair_den[2].max(n3a.max(n4a));
                pair_num[3] = pair_num[3].min(l1 * l4a);
                pair_den[3] = pair_den[3].max(n1a.max(n4a));
            }
        }
    }
    if !seen {
        return Err(SchemeError::NoInteriorCells);
    }
    let a_prime = diag_aggregate + extra_diag_max;
    let ratio = |num: f64, den: f64| if den > 0.0 { num / den } else { f64::INFINITY };
    let b = [
        ratio(min_lam_vert_sum, max_nu2_horiz),
        ratio(pair_num[0], pair_den[0] * a_prime),
        ratio(pair_num[1], pair_den[1] * a_prime),
        ratio(pair_num[2], pair_den[2] * a_prime),
        ratio(pair_num[3], pair_den[3] * a_prime),
    ];
    for (index, value) in b.iter().enumerate() {
        if !(*value > 0.0) {
            return Err(SchemeError::InfeasibleBound { index: index + 1, value: *value });
        }
    }
    Ok(CBounds { b, a_prime })
}

/// Margins of the five inequalities for explicit per-direction couples;
/// all must be strictly positive for the couples to be admissible.
pub fn check_c_couples(bounds: &CBounds, x: (f64, f64), y: (f64, f64)) -> ([f64; 5], bool) {
    let sums = [x.0 + x.1, x.1 + y.1, y.1 + x.0, x.0 + y.0, x.1 + y.0];
    let mut margins = [0.0; 5];
    let mut pass = true;
    for k in 0..5 {
        margins[k] = bounds.b[k] - sums[k];
        pass &= margins[k] > 0.0;
    }
    (margins, pass)
}

const C_CAP: f64 = 0.5;
const C_SAFETY: f64 = 0.9;

/// Pick a single couple shared by both directions under the reduction
/// `c1 = 2 c2`, strictly inside the five bounds with a safety factor.
/// When every bound diverges (no cross terms anywhere) the couple is
/// irrelevant and the configured cap is returned for both entries.
pub fn compute_c_weights(
    grid: &Grid,
    kernels: &Kernels,
    extra_diag_max: f64,
) -> Result<CWeights, SchemeError> {
    let bounds = c_weight_bounds(grid, kernels, extra_diag_max)?;
    let [b1, b2, b3, b4, b5] = bounds.b;
    let raw = C_SAFETY * (b1 / 3.0).min(b2 / 2.0).min(b3 / 3.0).min(b4 / 4.0).min(b5 / 3.0);
    let (c1, c2, bound) = if raw.is_infinite() {
        (C_CAP, C_CAP, f64::INFINITY)
    } else {
        (2.0 * raw.min(C_CAP / 2.0), raw.min(C_CAP / 2.0), raw / C_SAFETY)
    };
    Ok(CWeights { x: (c1, c2), y: (c1, c2), bound })
}

/// Linearized flux through one edge, viewed from one side, with the
/// nonlinear weights frozen at a given state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FluxStencil {
    /// `alpha f_own - beta f_other`, both coefficients nonnegative.
    TwoPoint { alpha: f64, beta: f64 },
    /// `t_lam (f_own - f_other) + t_m (f_own - f_M)`.
    Lmp { t_lam: f64, t_m: f64, m: TransTarget },
    /// `t_lam (f_own - f_other) + t_m (f_own - f_M) + t_n (f_N - f_other)`.
    NinePoint { t_lam: f64, t_m: f64, m: TransTarget, t_n: f64, n: TransTarget },
}

/// Frozen linearized flux of `scheme` through `ek` seen from `side`.
pub fn edge_flux_stencil(
    scheme: SchemeKind,
    ek: &EdgeKernel,
    side: EdgeSide,
    frozen: &[f64],
    cweights: Option<&CWeights>,
) -> Result<FluxStencil, SchemeError> {
    let (own, other, c_own, c_other) = ek.oriented(side);
    let f_own = frozen[c_own];
    let f_other = frozen[c_other];
    match scheme {
        SchemeKind::Nltpfa => {
            // flux-continuity edge value, written symmetrically so both
            // sides of the edge compute the identical bit pattern
            let f_sigma = (own.lam_edge * f_own + other.lam_edge * f_other)
                / (own.lam_edge + other.lam_edge);
            let a1 = (own.lam_edge * f_sigma
                + own.nu_edge * trans_edge_value(own.trans_edge, f_own, frozen))
            .max(0.0);
            let a2 = (other.lam_edge * f_sigma
                + other.nu_edge * trans_edge_value(other.trans_edge, f_other, frozen))
            .max(0.0);
            let (mu1, mu2) = nltpfa_weights(a1, a2);
            Ok(FluxStencil::TwoPoint {
                alpha: mu1 * (own.lam_edge + own.nu_edge),
                beta: mu2 * (other.lam_edge + other.nu_edge),
            })
        }
        SchemeKind::Nlmpfa => {
            let g1 = own.nu * (f_own - trans_value(own.trans, frozen));
            let g2 = other.nu * (f_other - trans_value(other.trans, frozen));
            let (mu1, mu2) = convex_weights(g1.abs(), g2.abs());
            let t_lam = mu1 * own.lam + mu2 * other.lam;
            if g1 * g2 < 0.0 {
                Ok(FluxStencil::Lmp { t_lam, t_m: 2.0 * mu1 * own.nu, m: own.trans })
            } else {
                Ok(FluxStencil::Lmp { t_lam, t_m: 0.0, m: TransTarget::Dropped })
            }
        }
        SchemeKind::Rnlmpfa => {
            let cw = cweights.ok_or(SchemeError::MissingCWeights)?;
            let (c1, c2) = cw.couple(ek.axis, side);
            let g1 = (1.0 - c1) * own.nu * (f_own - trans_value(own.trans, frozen));
            let g2 = (1.0 - c2) * other.nu * (f_other - trans_value(other.trans, frozen));
            let (mu1, mu2) = convex_weights(g1.abs(), g2.abs());
            let theta = if g1 * g2 >= 0.0 { c1 } else { 2.0 - c1 };
            Ok(FluxStencil::NinePoint {
                t_lam: mu1 * own.lam + mu2 * other.lam,
                t_m: theta * mu1 * own.nu,
                m: own.trans,
                t_n: c2 * mu2 * other.nu,
                n: other.trans,
            })
        }
    }
}

/// Evaluate a frozen flux stencil at the frozen state itself.
pub fn flux_stencil_value(st: &FluxStencil, f_own: f64, f_other: f64, frozen: &[f64]) -> f64 {
    match *st {
        FluxStencil::TwoPoint { alpha, beta } => alpha * f_own - beta * f_other,
        FluxStencil::Lmp { t_lam, t_m, m } => {
            t_lam * (f_own - f_other) + t_m * (f_own - trans_value(m, frozen))
        }
        FluxStencil::NinePoint { t_lam, t_m, m, t_n, n } => {
            t_lam * (f_own - f_other)
                + t_m * (f_own - trans_value(m, frozen))
                + t_n * (trans_value(n, frozen) - f_other)
        }
    }
}

/// Numerical flux of `scheme` through an interior edge at the frozen state,
/// returned for both sides. The plus-side value is the exact negation of the
/// minus-side one, so conservativity holds by construction.
pub fn scheme_flux(
    scheme: SchemeKind,
    ek: &EdgeKernel,
    frozen: &[f64],
    cweights: Option<&CWeights>,
) -> Result<(f64, f64), SchemeError> {
    let st = edge_flux_stencil(scheme, ek, EdgeSide::Minus, frozen, cweights)?;
    let v = flux_stencil_value(&st, frozen[ek.k], frozen[ek.l], frozen);
    Ok((v, -v))
}

/// Sparse 9-point system for one frozen state: per-row stencil entries in
/// the local numbering (0 = diagonal, then E, NE, N, NW, W, SW, S, SE),
/// the right-hand side, and the summed coefficients of the eliminated
/// boundary values per row.
#[derive(Debug, Clone)]
pub struct LinearizedSystem {
    pub nx: usize,
    pub ny: usize,
    pub stencil: Vec<[f64; 9]>,
    pub rhs: Vec<f64>,
    pub bnd_colsum: Vec<f64>,
}

/// Stencil slot of the neighbour at offset `(di, dj)` from the row cell.
#[inline]
pub fn stencil_slot(di: i64, dj: i64) -> usize {
    match (di, dj) {
        (0, 0) => 0,
        (1, 0) => 1,
        (1, 1) => 2,
        (0, 1) => 3,
        (-1, 1) => 4,
        (-1, 0) => 5,
        (-1, -1) => 6,
        (0, -1) => 7,
        (1, -1) => 8,
        _ => panic!("offset ({di}, {dj}) outside the 9-point stencil"),
    }
}

/// Offset `(di, dj)` of stencil slot `k`.
#[inline]
pub fn stencil_offset(k: usize) -> (i64, i64) {
    [(0, 0), (1, 0), (1, 1), (0, 1), (-1, 1), (-1, 0), (-1, -1), (0, -1), (1, -1)][k]
}

impl LinearizedSystem {
    pub fn n(&self) -> usize {
        self.nx * self.ny
    }

    #[inline]
    fn slot_of(&self, row: usize, col: usize) -> usize {
        let (ri, rj) = ((row % self.nx) as i64, (row / self.nx) as i64);
        let (ci, cj) = ((col % self.nx) as i64, (col / self.nx) as i64);
        stencil_slot(ci - ri, cj - rj)
    }

    #[inline]
    pub fn add(&mut self, row: usize, col: usize, v: f64) {
        let slot = self.slot_of(row, col);
        self.stencil[row][slot] += v;
    }

    /// Record a coefficient against a known boundary value: the value moves
    /// to the right-hand side and the coefficient is kept for row-sum audits.
    #[inline]
    pub fn add_known(&mut self, row: usize, coeff: f64, value: f64) {
        self.bnd_colsum[row] += coeff;
        self.rhs[row] -= coeff * value;
    }

    pub fn row_nnz(&self, row: usize) -> usize {
        self.stencil[row].iter().filter(|v| **v != 0.0).count()
    }

    /// Matrix entry at `(row, col)` if the column lies in the row's stencil.
    pub fn entry(&self, row: usize, col: usize) -> f64 {
        let (ri, rj) = ((row % self.nx) as i64, (row / self.nx) as i64);
        let (ci, cj) = ((col % self.nx) as i64, (col / self.nx) as i64);
        let (di, dj) = (ci - ri, cj - rj);
        if di.abs() <= 1 && dj.abs() <= 1 {
            self.stencil[row][stencil_slot(di, dj)]
        } else {
            0.0
        }
    }

    /// `A x` using the stencil structure.
    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let n = self.n();
        let nx = self.nx as i64;
        let ny = self.ny as i64;
        let mut out = vec![0.0; n];
        for row in 0..n {
            let (ri, rj) = ((row % self.nx) as i64, (row / self.nx) as i64);
            let mut acc = 0.0;
            for k in 0..9 {
                let v = self.stencil[row][k];
                if v == 0.0 {
                    continue;
                }
                let (di, dj) = stencil_offset(k);
                let (ci, cj) = (ri + di, rj + dj);
                if ci >= 0 && ci < nx && cj >= 0 && cj < ny {
                    acc += v * x[(cj * nx + ci) as usize];
                }
            }
            out[row] = acc;
        }
        out
    }

    /// Row sums over cell columns plus the eliminated boundary columns.
    pub fn row_sums_with_boundary(&self) -> Vec<f64> {
        (0..self.n())
            .map(|r| self.stencil[r].iter().sum::<f64>() + self.bnd_colsum[r])
            .collect()
    }

    /// Coordinate triplets (row, col, value) of the nonzero entries.
    pub fn to_triplets(&self) -> Vec<(usize, usize, f64)> {
        let nx = self.nx as i64;
        let ny = self.ny as i64;
        let mut out = Vec::new();
        for row in 0..self.n() {
            let (ri, rj) = ((row % self.nx) as i64, (row / self.nx) as i64);
            for k in 0..9 {
                let v = self.stencil[row][k];
                if v == 0.0 {
                    continue;
                }
                let (di, dj) = stencil_offset(k);
                let (ci, cj) = (ri + di, rj + dj);
                if ci >= 0 && ci < nx && cj >= 0 && cj < ny {
                    out.push((row, (cj * nx + ci) as usize, v));
                }
            }
        }
        out
    }
}

/// Extra diagonal term of an implicit time step:
/// `coeff_K f_K` on the left and `coeff_K prev_K` on the right.
#[derive(Debug, Clone, Copy)]
pub struct MassTerm<'a> {
    pub coeff: &'a [f64],
    pub prev: &'a [f64],
}

/// Assemble the linearized system of `scheme` for one frozen state.
pub fn assemble(
    scheme: SchemeKind,
    grid: &Grid,
    kernels: &Kernels,
    source_int: &[f64],
    frozen: &[f64],
    cweights: Option<&CWeights>,
    mass: Option<MassTerm>,
) -> Result<LinearizedSystem, SchemeError> {
    let n = grid.n_cells();
    if frozen.len() != n {
        return Err(SchemeError::FieldLength { got: frozen.len(), want: n });
    }
    if scheme == SchemeKind::Rnlmpfa && cweights.is_none() {
        return Err(SchemeError::MissingCWeights);
    }
    let mut sys = LinearizedSystem {
        nx: grid.nx(),
        ny: grid.ny(),
        stencil: vec![[0.0; 9]; n],
        rhs: source_int.to_vec(),
        bnd_colsum: vec![0.0; n],
    };

    for j in 0..grid.ny() {
        for i in 0..grid.nx() {
            let row = grid.flat(i, j);
            for p in 0..4 {
                match grid.cell_edge(i, j, p) {
                    EdgeRef::Interior { index, side } => {
                        let ek = &kernels.edges[index];
                        let (_, _, c_own, c_other) = ek.oriented(side);
                        debug_assert_eq!(c_own, row);
                        let st = edge_flux_stencil(scheme, ek, side, frozen, cweights)?;
                        match st {
                            FluxStencil::TwoPoint { alpha, beta } => {
                                sys.add(row, row, alpha);
                                sys.add(row, c_other, -beta);
                            }
                            FluxStencil::Lmp { t_lam, t_m, m } => {
                                sys.add(row, row, t_lam + t_m);
                                sys.add(row, c_other, -t_lam);
                                add_target(&mut sys, row, m, -t_m);
                            }
                            FluxStencil::NinePoint { t_lam, t_m, m, t_n, n } => {
                                sys.add(row, row, t_lam + t_m);
                                sys.add(row, c_other, -t_lam - t_n);
                                add_target(&mut sys, row, m, -t_m);
                                add_target(&mut sys, row, n, t_n);
                            }
                        }
                    }
                    EdgeRef::Boundary { index } => match kernels.boundaries[index] {
                        BoundaryKernel::NoFlux => {}
                        BoundaryKernel::Dirichlet { lam, value, nu, trans } => {
                            sys.add(row, row, lam);
                            sys.add_known(row, -lam, value);
                            sys.add(row, row, nu);
                            add_target(&mut sys, row, trans, -nu);
                        }
                    },
                }
            }
            if let Some(m) = mass {
                sys.add(row, row, m.coeff[row]);
                sys.rhs[row] += m.coeff[row] * m.prev[row];
            }
        }
    }
    Ok(sys)
}

#[inline]
fn add_target(sys: &mut LinearizedSystem, row: usize, target: TransTarget, v: f64) {
    match target {
        TransTarget::Cell(c) => sys.add(row, c, v),
        TransTarget::Dirichlet(val) => sys.add_known(row, v, val),
        TransTarget::Dropped => debug_assert_eq!(v, 0.0),
    }
}

/// Names of the ten audited inequalities, in report order.
pub const CONDITION_NAMES: [&str; 10] =
    ["A0", "A1a", "A1b", "A1c", "A1d", "A2", "A3a", "A3b", "A3c", "A3d"];

/// Outcome of the (A0)-(A3) audit of one linearized matrix.
#[derive(Debug, Clone)]
pub struct MonotonicityReport {
    pub nx: usize,
    pub ny: usize,
    /// Per cell: `None` when skipped (incomplete 9-point neighbourhood),
    /// otherwise a bitmask of violated conditions (0 = all ten hold).
    pub flags: Vec<Option<u16>>,
    pub n_audited: usize,
    pub n_failed: usize,
    pub pass: bool,
    /// Smallest margin observed per condition; positive means satisfied.
    pub worst: [f64; 10],
}

impl MonotonicityReport {
    pub fn failures(&self) -> impl Iterator<Item = (usize, u16)> + '_ {
        self.flags
            .iter()
            .enumerate()
            .filter_map(|(c, f)| f.and_then(|m| if m != 0 { Some((c, m)) } else { None }))
    }
}

/// Audit the ten relaxed monotonicity inequalities on every cell whose full
/// 9-point neighbourhood is interior to the mesh.
pub fn check_monotonicity(sys: &LinearizedSystem) -> MonotonicityReport {
    let (nx, ny) = (sys.nx, sys.ny);
    let mut flags = vec![None; sys.n()];
    let mut worst = [f64::INFINITY; 10];
    let mut n_audited = 0;
    let mut n_failed = 0;
    for j in 1..ny.saturating_sub(1) {
        for i in 1..nx.saturating_sub(1) {
            let row = j * nx + i;
            let m = &sys.stencil[row];
            let below = &sys.stencil[row - nx];
            let above = &sys.stencil[row + nx];
            // stencil slots: 0:m1 1:m2 2:m3 3:m4 4:m5 5:m6 6:m7 7:m8 8:m9
            let margins = [
                m[0],
                -m[1],
                -m[3],
                -m[5],
                -m[7],
                m[0] + m[1] + m[5],
                m[1] * below[3] - below[2] * m[0],
                m[5] * below[3] - below[4] * m[0],
                m[5] * above[7] - above[6] * m[0],
                m[1] * above[7] - above[8] * m[0],
            ];
            let mut mask = 0u16;
            for (k, margin) in margins.iter().enumerate() {
                worst[k] = worst[k].min(*margin);
                if !(*margin > 0.0) {
                    mask |= 1 << k;
                }
            }
            flags[row] = Some(mask);
            n_audited += 1;
            if mask != 0 {
                n_failed += 1;
            }
        }
    }
    MonotonicityReport { nx, ny, flags, n_audited, n_failed, pass: n_failed == 0, worst }
}
