//! Nonuniform tensor-product Cartesian mesh.
//!
//! Cells are axis-aligned rectangles indexed by `(i, j)` with `i` running
//! along x and `j` along y, both 0-based. The global unknown ordering is
//! row-major starting from the lower-left cell: `flat = j * nx + i`.
//! Cell centers are the geometric centers of the rectangles, so the lines
//! joining neighbouring centers are parallel to the axes.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum GridError {
    #[error("{axis:?} coordinate lines must be strictly increasing (offending index {index})")]
    NonMonotone { axis: Axis, index: usize },
    #[error("grid coordinates must be finite")]
    NonFinite,
    #[error("the 9-point stencil needs at least 3 cells per axis, got {nx}x{ny}")]
    TooFewCells { nx: usize, ny: usize },
}

/// Axis of the unit normal of an edge: `X` for vertical edges, `Y` for horizontal ones.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Axis {
    X,
    Y,
}

impl Axis {
    pub fn transverse(self) -> Axis {
        match self {
            Axis::X => Axis::Y,
            Axis::Y => Axis::X,
        }
    }
}

/// One of the four straight boundary sides of the rectangular domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    Left,
    Right,
    Bottom,
    Top,
}

/// Which of the two adjacent cells an edge is viewed from.
///
/// `Minus` is the cell on the negative-normal side (left of a vertical edge,
/// below a horizontal one); its outward normal through the edge points along
/// the positive axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgeSide {
    Minus,
    Plus,
}

/// Interior edge shared by exactly two cells.
#[derive(Debug, Clone, Copy)]
pub struct InteriorEdge {
    pub axis: Axis,
    /// Cell on the negative-normal side (left / below).
    pub minus: (usize, usize),
    /// Cell on the positive-normal side (right / above).
    pub plus: (usize, usize),
    /// Measure |sigma| of the edge.
    pub length: f64,
    /// Intersection of the edge with the segment joining the two centers.
    pub point: (f64, f64),
}

/// Boundary edge owned by a single cell.
#[derive(Debug, Clone, Copy)]
pub struct BoundaryEdge {
    pub side: Side,
    pub cell: (usize, usize),
    pub length: f64,
    /// Foot of the perpendicular from the owning cell center onto the edge.
    pub point: (f64, f64),
}

/// Where an edge of a given cell lives: shared with a neighbour or on the boundary.
#[derive(Debug, Clone, Copy)]
pub enum EdgeRef {
    Interior { index: usize, side: EdgeSide },
    Boundary { index: usize },
}

/// Target of the transverse branch of an upwind flux.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TransverseTarget {
    Cell(usize, usize),
    /// The stencil exits the mesh through this boundary side.
    Exit(Side),
}

#[derive(Debug, Clone)]
pub struct Grid {
    x_lines: Vec<f64>,
    y_lines: Vec<f64>,
    xc: Vec<f64>,
    yc: Vec<f64>,
    interior: Vec<InteriorEdge>,
    boundary: Vec<BoundaryEdge>,
}

impl Grid {
    /// Build the mesh from strictly increasing coordinate lines.
    pub fn from_lines(x_lines: Vec<f64>, y_lines: Vec<f64>) -> Result<Grid, GridError> {
        for (axis, lines) in [(Axis::X, &x_lines), (Axis::Y, &y_lines)] {
            if lines.iter().any(|v| !v.is_finite()) {
                return Err(GridError::NonFinite);
            }
            for w in 1..lines.len() {
                if lines[w] <= lines[w - 1] {
                    return Err(GridError::NonMonotone { axis, index: w });
                }
            }
        }
        let nx = x_lines.len().saturating_sub(1);
        let ny = y_lines.len().saturating_sub(1);
        if nx < 3 || ny < 3 {
            return Err(GridError::TooFewCells { nx, ny });
        }

        let xc: Vec<f64> = (0..nx).map(|i| 0.5 * (x_lines[i] + x_lines[i + 1])).collect();
        let yc: Vec<f64> = (0..ny).map(|j| 0.5 * (y_lines[j] + y_lines[j + 1])).collect();

        // Vertical edges first, then horizontal, each row-major.
        let mut interior = Vec::with_capacity(ny * (nx - 1) + nx * (ny - 1));
        for j in 0..ny {
            for i in 0..nx - 1 {
                interior.push(InteriorEdge {
                    axis: Axis::X,
                    minus: (i, j),
                    plus: (i + 1, j),
                    length: y_lines[j + 1] - y_lines[j],
                    point: (x_lines[i + 1], yc[j]),
                });
            }
        }
        for j in 0..ny - 1 {
            for i in 0..nx {
                interior.push(InteriorEdge {
                    axis: Axis::Y,
                    minus: (i, j),
                    plus: (i, j + 1),
                    length: x_lines[i + 1] - x_lines[i],
                    point: (xc[i], y_lines[j + 1]),
                });
            }
        }

        let mut boundary = Vec::with_capacity(2 * (nx + ny));
        for j in 0..ny {
            boundary.push(BoundaryEdge {
                side: Side::Left,
                cell: (0, j),
                length: y_lines[j + 1] - y_lines[j],
                point: (x_lines[0], yc[j]),
            });
            boundary.push(BoundaryEdge {
                side: Side::Right,
                cell: (nx - 1, j),
                length: y_lines[j + 1] - y_lines[j],
                point: (x_lines[nx], yc[j]),
            });
        }
        for i in 0..nx {
            boundary.push(BoundaryEdge {
                side: Side::Bottom,
                cell: (i, 0),
                length: x_lines[i + 1] - x_lines[i],
                point: (xc[i], y_lines[0]),
            });
            boundary.push(BoundaryEdge {
                side: Side::Top,
                cell: (i, ny - 1),
                length: x_lines[i + 1] - x_lines[i],
                point: (xc[i], y_lines[ny]),
            });
        }

        Ok(Grid { x_lines, y_lines, xc, yc, interior, boundary })
    }

    /// Uniform partition of `[x0, x1] x [y0, y1]` into `nx` by `ny` cells.
    pub fn uniform(x0: f64, x1: f64, y0: f64, y1: f64, nx: usize, ny: usize) -> Result<Grid, GridError> {
        if nx == 0 || ny == 0 || !(x1 > x0) || !(y1 > y0) {
            return Err(GridError::TooFewCells { nx, ny });
        }
        let xs = (0..=nx).map(|i| x0 + (x1 - x0) * i as f64 / nx as f64).collect();
        let ys = (0..=ny).map(|j| y0 + (y1 - y0) * j as f64 / ny as f64).collect();
        Grid::from_lines(xs, ys)
    }

    pub fn nx(&self) -> usize {
        self.xc.len()
    }

    pub fn ny(&self) -> usize {
        self.yc.len()
    }

    pub fn n_cells(&self) -> usize {
        self.nx() * self.ny()
    }

    pub fn x_lines(&self) -> &[f64] {
        &self.x_lines
    }

    pub fn y_lines(&self) -> &[f64] {
        &self.y_lines
    }

    #[inline]
    pub fn flat(&self, i: usize, j: usize) -> usize {
        debug_assert!(i < self.nx() && j < self.ny());
        j * self.nx() + i
    }

    #[inline]
    pub fn cell_of(&self, flat: usize) -> (usize, usize) {
        (flat % self.nx(), flat / self.nx())
    }

    #[inline]
    pub fn center(&self, i: usize, j: usize) -> (f64, f64) {
        (self.xc[i], self.yc[j])
    }

    pub fn centers_x(&self) -> &[f64] {
        &self.xc
    }

    pub fn centers_y(&self) -> &[f64] {
        &self.yc
    }

    #[inline]
    pub fn cell_width(&self, i: usize) -> f64 {
        self.x_lines[i + 1] - self.x_lines[i]
    }

    #[inline]
    pub fn cell_height(&self, j: usize) -> f64 {
        self.y_lines[j + 1] - self.y_lines[j]
    }

    #[inline]
    pub fn cell_area(&self, i: usize, j: usize) -> f64 {
        self.cell_width(i) * self.cell_height(j)
    }

    /// Bounds of cell `(i, j)` as `(x_lo, x_hi, y_lo, y_hi)`.
    pub fn cell_bounds(&self, i: usize, j: usize) -> (f64, f64, f64, f64) {
        (self.x_lines[i], self.x_lines[i + 1], self.y_lines[j], self.y_lines[j + 1])
    }

    pub fn domain_area(&self) -> f64 {
        (self.x_lines[self.nx()] - self.x_lines[0]) * (self.y_lines[self.ny()] - self.y_lines[0])
    }

    pub fn interior_edges(&self) -> &[InteriorEdge] {
        &self.interior
    }

    pub fn boundary_edges(&self) -> &[BoundaryEdge] {
        &self.boundary
    }

    /// Number of vertical interior edges; horizontal ones follow in the edge list.
    pub fn n_vertical_edges(&self) -> usize {
        self.ny() * (self.nx() - 1)
    }

    /// The edge on side `p` of cell `(i, j)`, with `p` counted
    /// counter-clockwise from the right: 0 = right, 1 = top, 2 = left, 3 = bottom.
    pub fn cell_edge(&self, i: usize, j: usize, p: usize) -> EdgeRef {
        let nx = self.nx();
        let ny = self.ny();
        let nv = self.n_vertical_edges();
        match p {
            0 => {
                if i + 1 < nx {
                    EdgeRef::Interior { index: j * (nx - 1) + i, side: EdgeSide::Minus }
                } else {
                    EdgeRef::Boundary { index: 2 * j + 1 }
                }
            }
            1 => {
                if j + 1 < ny {
                    EdgeRef::Interior { index: nv + j * nx + i, side: EdgeSide::Minus }
                } else {
                    EdgeRef::Boundary { index: 2 * ny + 2 * i + 1 }
                }
            }
            2 => {
                if i > 0 {
                    EdgeRef::Interior { index: j * (nx - 1) + (i - 1), side: EdgeSide::Plus }
                } else {
                    EdgeRef::Boundary { index: 2 * j }
                }
            }
            3 => {
                if j > 0 {
                    EdgeRef::Interior { index: nv + (j - 1) * nx + i, side: EdgeSide::Plus }
                } else {
                    EdgeRef::Boundary { index: 2 * ny + 2 * i }
                }
            }
            _ => panic!("edge side index must be 0..4, got {p}"),
        }
    }

    /// Cell used by the transverse branch of the upwind flux through an
    /// interior edge, seen from one of its two sides.
    ///
    /// For the minus-side cell (outward normal along the positive axis) a
    /// nonnegative cross term selects the neighbour in the positive
    /// transverse direction; the plus side mirrors this. A negative cross
    /// term flips the choice. `Exit` is returned when the selected
    /// neighbour would fall outside the mesh.
    pub fn transverse_neighbor(
        &self,
        edge: &InteriorEdge,
        side: EdgeSide,
        dxy_nonneg: bool,
    ) -> TransverseTarget {
        let (i, j) = match side {
            EdgeSide::Minus => edge.minus,
            EdgeSide::Plus => edge.plus,
        };
        let orient: i64 = match side {
            EdgeSide::Minus => 1,
            EdgeSide::Plus => -1,
        };
        let dir = if dxy_nonneg { orient } else { -orient };
        match edge.axis {
            Axis::X => {
                let jt = j as i64 + dir;
                if jt < 0 {
                    TransverseTarget::Exit(Side::Bottom)
                } else if jt >= self.ny() as i64 {
                    TransverseTarget::Exit(Side::Top)
                } else {
                    TransverseTarget::Cell(i, jt as usize)
                }
            }
            Axis::Y => {
                let it = i as i64 + dir;
                if it < 0 {
                    TransverseTarget::Exit(Side::Left)
                } else if it >= self.nx() as i64 {
                    TransverseTarget::Exit(Side::Right)
                } else {
                    TransverseTarget::Cell(it as usize, j)
                }
            }
        }
    }

    /// Cells whose full 9-point neighbourhood lies inside the mesh,
    /// i.e. `1 <= i <= nx-2` and `1 <= j <= ny-2`.
    pub fn is_interior_cell(&self, i: usize, j: usize) -> bool {
        i >= 1 && i + 1 < self.nx() && j >= 1 && j + 1 < self.ny()
    }
}

/// Grid description as it appears in case configurations.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GridSpec {
    Uniform { domain: [f64; 4], nx: usize, ny: usize },
    Lines { x: Vec<f64>, y: Vec<f64> },
}

impl GridSpec {
    pub fn build(&self) -> Result<Grid, GridError> {
        match self {
            GridSpec::Uniform { domain, nx, ny } => {
                Grid::uniform(domain[0], domain[1], domain[2], domain[3], *nx, *ny)
            }
            GridSpec::Lines { x, y } => Grid::from_lines(x.clone(), y.clone()),
        }
    }

    /// Replace the resolution with `n` cells per axis (uniform specs only).
    pub fn with_size(&self, n: usize) -> GridSpec {
        match self {
            GridSpec::Uniform { domain, .. } => GridSpec::Uniform { domain: *domain, nx: n, ny: n },
            GridSpec::Lines { .. } => self.clone(),
        }
    }
}

/// Geometrically spaced lines from `a` to `b`, for stretched axes.
pub fn log_lines(a: f64, b: f64, n: usize) -> Vec<f64> {
    assert!(a > 0.0 && b > a && n > 0);
    let la = a.ln();
    let lb = b.ln();
    (0..=n).map(|k| (la + (lb - la) * k as f64 / n as f64).exp()).collect()
}
