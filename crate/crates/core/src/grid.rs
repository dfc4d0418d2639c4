//! Masked staircase lattice shared by the cell, strip and full-domain
//! functionals: active nodes with trapezoid area weights, directed edges with
//! transverse weights for the covariant kinetic term, and plaquettes for
//! curls. Quadrature weights come from counting adjacent interior cells, so a
//! rectangle aligned with the grid is represented exactly while a smooth
//! domain incurs the documented `O(h)` boundary error.

use crate::geometry::{BoundaryIndex, Domain};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgeDir {
    X,
    Y,
}

#[derive(Debug, Clone)]
pub struct Edge {
    pub tail: u32,
    pub head: u32,
    pub dir: EdgeDir,
    /// Transverse quadrature fraction in {1/2, 1} times full weight.
    pub weight_frac: f64,
    /// Midpoint coordinates (used to evaluate reference potentials).
    pub mid: [f64; 2],
}

/// Plaquette with corner nodes (bl, br, tr, tl) and edges (bottom, right,
/// top, left); counterclockwise circulation is `b + r - t - l`.
#[derive(Debug, Clone)]
pub struct Cell {
    pub corners: [u32; 4],
    pub edges: [u32; 4],
    pub center: [f64; 2],
}

#[derive(Debug, Clone)]
pub struct Lattice<T> {
    pub h: T,
    pub nx: usize,
    pub ny: usize,
    pub origin: [T; 2],
    /// (i, j) of each active node.
    pub nodes: Vec<(u32, u32)>,
    /// Raster `(i, j) -> active id` or -1.
    pub node_id: Vec<i32>,
    /// Quadrature area per node.
    pub weight: Vec<T>,
    /// Dirichlet-pinned nodes (held at zero by the functionals).
    pub fixed: Vec<bool>,
    pub edges: Vec<Edge>,
    pub cells: Vec<Cell>,
    /// Distance to the domain boundary per node (masked lattices only).
    pub bdist: Vec<T>,
    /// Arc length of the nearest boundary point per node (masked lattices only).
    pub barc: Vec<T>,
}

impl<T: Real> Lattice<T> {
    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn node_pos(&self, id: usize) -> [T; 2] {
        let (i, j) = self.nodes[id];
        [
            self.origin[0] + self.h * T::of_usize(i as usize),
            self.origin[1] + self.h * T::of_usize(j as usize),
        ]
    }

    pub fn id_at(&self, i: usize, j: usize) -> Option<usize> {
        if i >= self.nx || j >= self.ny {
            return None;
        }
        let v = self.node_id[j * self.nx + i];
        if v < 0 {
            None
        } else {
            Some(v as usize)
        }
    }

    /// Total quadrature area.
    pub fn area(&self) -> T {
        self.weight.iter().copied().sum()
    }

    fn build(
        h: T,
        nx: usize,
        ny: usize,
        origin: [T; 2],
        node_in: impl Fn(usize, usize) -> bool,
        cell_in: impl Fn(usize, usize) -> bool,
    ) -> Self {
        let mut node_id = vec![-1i32; nx * ny];
        let mut nodes = Vec::new();
        for j in 0..ny {
            for i in 0..nx {
                if node_in(i, j) {
                    node_id[j * nx + i] = nodes.len() as i32;
                    nodes.push((i as u32, j as u32));
                }
            }
        }
        // interior cells: all four corners active and the center inside
        let all_corners = |i: usize, j: usize| {
            node_id[j * nx + i] >= 0
                && node_id[j * nx + i + 1] >= 0
                && node_id[(j + 1) * nx + i] >= 0
                && node_id[(j + 1) * nx + i + 1] >= 0
        };
        let mut cell_mask = vec![false; (nx - 1) * (ny - 1)];
        for j in 0..ny - 1 {
            for i in 0..nx - 1 {
                cell_mask[j * (nx - 1) + i] = all_corners(i, j) && cell_in(i, j);
            }
        }
        let cells_at = |i: i64, j: i64| -> bool {
            if i < 0 || j < 0 || i >= (nx as i64 - 1) || j >= (ny as i64 - 1) {
                false
            } else {
                cell_mask[j as usize * (nx - 1) + i as usize]
            }
        };
        let hw = h * h;
        let quarter = T::of(0.25);
        let mut weight = vec![T::zero(); nodes.len()];
        for (id, &(i, j)) in nodes.iter().enumerate() {
            let (i, j) = (i as i64, j as i64);
            let mut c = 0usize;
            for (di, dj) in [(-1, -1), (0, -1), (-1, 0), (0, 0)] {
                if cells_at(i + di, j + dj) {
                    c += 1;
                }
            }
            weight[id] = hw * quarter * T::of_usize(c);
        }
        // edges with at least one adjacent interior cell
        let mut edges = Vec::new();
        let mut edge_id = std::collections::HashMap::new();
        let half = 0.5f64;
        let ox = origin[0].to_f64_lossy();
        let oy = origin[1].to_f64_lossy();
        let hf = h.to_f64_lossy();
        for j in 0..ny {
            for i in 0..nx {
                let a = node_id[j * nx + i];
                if a < 0 {
                    continue;
                }
                // x edge to (i+1, j): transverse cells (i, j-1), (i, j)
                if i + 1 < nx && node_id[j * nx + i + 1] >= 0 {
                    let c = cells_at(i as i64, j as i64 - 1) as usize
                        + cells_at(i as i64, j as i64) as usize;
                    if c > 0 {
                        edge_id.insert((i, j, 0u8), edges.len() as u32);
                        edges.push(Edge {
                            tail: a as u32,
                            head: node_id[j * nx + i + 1] as u32,
                            dir: EdgeDir::X,
                            weight_frac: half * c as f64,
                            mid: [ox + hf * (i as f64 + 0.5), oy + hf * j as f64],
                        });
                    }
                }
                // y edge to (i, j+1): transverse cells (i-1, j), (i, j)
                if j + 1 < ny && node_id[(j + 1) * nx + i] >= 0 {
                    let c = cells_at(i as i64 - 1, j as i64) as usize
                        + cells_at(i as i64, j as i64) as usize;
                    if c > 0 {
                        edge_id.insert((i, j, 1u8), edges.len() as u32);
                        edges.push(Edge {
                            tail: a as u32,
                            head: node_id[(j + 1) * nx + i] as u32,
                            dir: EdgeDir::Y,
                            weight_frac: half * c as f64,
                            mid: [ox + hf * i as f64, oy + hf * (j as f64 + 0.5)],
                        });
                    }
                }
            }
        }
        let mut cells = Vec::new();
        for j in 0..ny - 1 {
            for i in 0..nx - 1 {
                if !cell_mask[j * (nx - 1) + i] {
                    continue;
                }
                let corner = |ii: usize, jj: usize| node_id[jj * nx + ii] as u32;
                cells.push(Cell {
                    corners: [
                        corner(i, j),
                        corner(i + 1, j),
                        corner(i + 1, j + 1),
                        corner(i, j + 1),
                    ],
                    edges: [
                        edge_id[&(i, j, 0u8)],
                        edge_id[&(i + 1, j, 1u8)],
                        edge_id[&(i, j + 1, 0u8)],
                        edge_id[&(i, j, 1u8)],
                    ],
                    center: [ox + hf * (i as f64 + 0.5), oy + hf * (j as f64 + 0.5)],
                });
            }
        }
        Self {
            h,
            nx,
            ny,
            origin,
            nodes,
            node_id,
            weight,
            fixed: vec![false; 0],
            edges,
            cells,
            bdist: Vec::new(),
            barc: Vec::new(),
        }
        .with_default_fixed()
    }

    fn with_default_fixed(mut self) -> Self {
        self.fixed = vec![false; self.nodes.len()];
        self
    }

    /// Axis-aligned rectangle `[x0, x0 + (nx-1) h] x [y0, y0 + (ny-1) h]`,
    /// represented exactly.
    pub fn rect(nx: usize, ny: usize, h: T, origin: [T; 2]) -> Self {
        Self::build(h, nx, ny, origin, |_, _| true, |_, _| true)
    }

    /// Pin the outer rectangle boundary (Dirichlet).
    pub fn pin_rect_boundary(&mut self) {
        for (id, &(i, j)) in self.nodes.iter().enumerate() {
            if i == 0 || j == 0 || i as usize == self.nx - 1 || j as usize == self.ny - 1 {
                self.fixed[id] = true;
            }
        }
    }

    /// Pin selected sides (used by the half-plane strip: sigma = +-R and the
    /// truncation top are Dirichlet, tau = 0 stays natural).
    pub fn pin_sides(&mut self, left: bool, right: bool, bottom: bool, top: bool) {
        for (id, &(i, j)) in self.nodes.iter().enumerate() {
            if (left && i == 0)
                || (right && i as usize == self.nx - 1)
                || (bottom && j == 0)
                || (top && j as usize == self.ny - 1)
            {
                self.fixed[id] = true;
            }
        }
    }

    /// Staircase lattice with an explicit raster placement (used to align
    /// coarse/fine pairs for the two-grid warm start).
    pub fn masked_at(domain: &Domain<T>, h: T, origin: [T; 2], nx: usize, ny: usize) -> Self {
        let pos = |i: usize, j: usize| {
            [origin[0] + h * T::of_usize(i), origin[1] + h * T::of_usize(j)]
        };
        let mut lat = Self::build(
            h,
            nx,
            ny,
            origin,
            |i, j| domain.contains(pos(i, j)),
            |i, j| {
                let c = pos(i, j);
                domain.contains([c[0] + h / T::of(2.0), c[1] + h / T::of(2.0)])
            },
        );
        let index = BoundaryIndex::new(domain);
        lat.bdist = Vec::with_capacity(lat.nodes.len());
        lat.barc = Vec::with_capacity(lat.nodes.len());
        for id in 0..lat.nodes.len() {
            let (s, d) = index.nearest(lat.node_pos(id));
            lat.barc.push(s);
            lat.bdist.push(d);
        }
        lat
    }

    /// Staircase lattice over a smooth domain: nodes where the point lies in
    /// the closed domain, cells where the center does.
    pub fn masked(domain: &Domain<T>, h: T) -> Self {
        let (lo, hi) = domain.bounding_box();
        let pad = h * T::of(2.0);
        let x0 = lo[0] - pad;
        let y0 = lo[1] - pad;
        let nx = ((hi[0] - lo[0] + T::of(4.0) * pad) / h).ceil().to_f64_lossy() as usize + 1;
        let ny = ((hi[1] - lo[1] + T::of(4.0) * pad) / h).ceil().to_f64_lossy() as usize + 1;
        let pos = |i: usize, j: usize| {
            [
                x0 + h * T::of_usize(i),
                y0 + h * T::of_usize(j),
            ]
        };
        let mut lat = Self::build(
            h,
            nx,
            ny,
            [x0, y0],
            |i, j| domain.contains(pos(i, j)),
            |i, j| {
                let c = pos(i, j);
                domain.contains([c[0] + h / T::of(2.0), c[1] + h / T::of(2.0)])
            },
        );
        let index = BoundaryIndex::new(domain);
        lat.bdist = Vec::with_capacity(lat.nodes.len());
        lat.barc = Vec::with_capacity(lat.nodes.len());
        for id in 0..lat.nodes.len() {
            let (s, d) = index.nearest(lat.node_pos(id));
            lat.barc.push(s);
            lat.bdist.push(d);
        }
        lat
    }
}

/// Bilinear prolongation from a coarse lattice to a fine one with half the
/// spacing and the same origin. Fine nodes without active coarse parents
/// (a thin staircase fringe on masked domains) get the average of whatever
/// parents exist, or zero; pinned nodes stay zero.
pub fn prolong<T: Real>(
    coarse: &Lattice<T>,
    fine: &Lattice<T>,
    uc: &[crate::scalar::Cplx<T>],
) -> Vec<crate::scalar::Cplx<T>> {
    use crate::scalar::Cplx;
    let zero = Cplx::new(T::zero(), T::zero());
    let get = |ci: i64, cj: i64| -> Option<Cplx<T>> {
        if ci < 0 || cj < 0 {
            return None;
        }
        coarse
            .id_at(ci as usize, cj as usize)
            .map(|id| uc[id])
    };
    fine.nodes
        .iter()
        .enumerate()
        .map(|(fid, &(i, j))| {
            if fine.fixed[fid] {
                return zero;
            }
            let (i, j) = (i as i64, j as i64);
            let parents: Vec<Cplx<T>> = match (i % 2 == 0, j % 2 == 0) {
                (true, true) => get(i / 2, j / 2).into_iter().collect(),
                (false, true) => [get(i / 2, j / 2), get(i / 2 + 1, j / 2)]
                    .into_iter()
                    .flatten()
                    .collect(),
                (true, false) => [get(i / 2, j / 2), get(i / 2, j / 2 + 1)]
                    .into_iter()
                    .flatten()
                    .collect(),
                (false, false) => [
                    get(i / 2, j / 2),
                    get(i / 2 + 1, j / 2),
                    get(i / 2, j / 2 + 1),
                    get(i / 2 + 1, j / 2 + 1),
                ]
                .into_iter()
                .flatten()
                .collect(),
            };
            if parents.is_empty() {
                zero
            } else {
                let inv = T::of_usize(parents.len()).recip();
                parents.into_iter().fold(zero, |a, b| a + b) * inv
            }
        })
        .collect()
}
