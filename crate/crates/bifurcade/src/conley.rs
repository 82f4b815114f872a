//! Homology Conley indices of isolated invariant sets of planar and scalar
//! polynomial fields, via isolating blocks on grids and relative cubical
//! homology, plus the index algebra (wedge sums and suspension shifts).
//!
//! Blocks are axis-aligned boxes (optionally with one rectangular hole, the
//! shape needed for indices of bifurcating sets that surround the trivial
//! equilibrium). Every boundary face must be uniformly transverse to the
//! field: a face where the outward normal component changes sign triggers a
//! grid refinement, and persistent mixing is a hard error; the blocks this
//! toolkit accepts are exactly the transverse-boundary blocks of the theory.

pub mod homology;

use crate::error::{Error, Result};
use homology::RelativeComplex;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};

/// Maximum number of grid-doubling rounds before giving up on tangent faces.
pub const MAX_REFINEMENTS: u32 = 6;
/// Samples per boundary face edge (corners, quarter points, center).
pub const FACE_SAMPLES: usize = 5;

/// Axis-aligned box in 1 or 2 dimensions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxRegion {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl BoxRegion {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.len() != hi.len() || lo.is_empty() || lo.len() > 2 {
            return Err(Error::Validation(
                "box must have 1 or 2 matching coordinate bounds".into(),
            ));
        }
        if lo
            .iter()
            .zip(&hi)
            .any(|(a, b)| !(a < b) || !a.is_finite() || !b.is_finite())
        {
            return Err(Error::Validation("box must be nondegenerate".into()));
        }
        Ok(BoxRegion { lo, hi })
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn interval(a: f64, b: f64) -> Result<Self> {
        BoxRegion::new(vec![a], vec![b])
    }

    pub fn square(lo: (f64, f64), hi: (f64, f64)) -> Result<Self> {
        BoxRegion::new(vec![lo.0, lo.1], vec![hi.0, hi.1])
    }

    fn contains_cell(&self, outer: &BoxRegion, grid: &[usize], cell: &[usize]) -> bool {
        // true when the (closed) cell lies inside this sub-box of `outer`
        for a in 0..outer.dim() {
            let h = (outer.hi[a] - outer.lo[a]) / grid[a] as f64;
            let c_lo = outer.lo[a] + cell[a] as f64 * h;
            let c_hi = c_lo + h;
            let eps = 1e-9 * h;
            if c_lo < self.lo[a] - eps || c_hi > self.hi[a] + eps {
                return false;
            }
        }
        true
    }
}

/// One boundary face of the block: the owning cell, the axis of its outward
/// normal, and the normal direction.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Face {
    pub cell: Vec<usize>,
    pub axis: usize,
    /// -1 or +1: outward normal points toward decreasing or increasing
    /// coordinate along `axis`.
    pub side: i8,
}

/// Accepted isolating block with its classified boundary.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IsolatingBlock {
    pub dim: usize,
    pub region: BoxRegion,
    /// Rectangular hole carved out of the region, if any.
    pub hole: Option<BoxRegion>,
    /// Cells per axis after refinement.
    pub grid: Vec<usize>,
    /// Cells forming `B` (all cells of the region minus the hole).
    pub cells: BTreeSet<Vec<usize>>,
    pub faces_exit: Vec<Face>,
    pub faces_ingress: Vec<Face>,
    /// Faces whose normal component mixed signs; empty on an accepted block.
    pub tangency_report: Vec<Face>,
}

/// Betti vector of a homology Conley index over the rationals. The
/// trivial index ("0-bar") has every rank zero.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConleyIndex {
    pub betti: BTreeMap<u32, usize>,
    pub trivial: bool,
}

impl ConleyIndex {
    pub fn from_betti(betti: BTreeMap<u32, usize>) -> Self {
        let betti: BTreeMap<u32, usize> = betti.into_iter().filter(|&(_, r)| r > 0).collect();
        let trivial = betti.is_empty();
        ConleyIndex { betti, trivial }
    }

    pub fn trivial_index() -> Self {
        ConleyIndex {
            betti: BTreeMap::new(),
            trivial: true,
        }
    }

    /// The index of a hyperbolic equilibrium with `u` unstable directions:
    /// a single rank in degree `u`.
    pub fn sigma(u: u32) -> Self {
        let mut betti = BTreeMap::new();
        betti.insert(u, 1);
        ConleyIndex {
            betti,
            trivial: false,
        }
    }

    pub fn rank(&self, degree: u32) -> usize {
        self.betti.get(&degree).copied().unwrap_or(0)
    }
}

/// Degree shift by `m` (smash with a pointed m-sphere at homology level).
/// The trivial index stays trivial.
pub fn suspend(index: &ConleyIndex, m: u32) -> ConleyIndex {
    let betti = index.betti.iter().map(|(&d, &r)| (d + m, r)).collect();
    ConleyIndex::from_betti(betti)
}

/// Wedge sum: degreewise addition of Betti ranks.
pub fn wedge(i1: &ConleyIndex, i2: &ConleyIndex) -> ConleyIndex {
    let mut betti = i1.betti.clone();
    for (&d, &r) in &i2.betti {
        *betti.entry(d).or_insert(0) += r;
    }
    ConleyIndex::from_betti(betti)
}

struct Geometry<'a> {
    region: &'a BoxRegion,
    grid: Vec<usize>,
    hole: Option<&'a BoxRegion>,
}

impl Geometry<'_> {
    fn step(&self, axis: usize) -> f64 {
        (self.region.hi[axis] - self.region.lo[axis]) / self.grid[axis] as f64
    }

    fn cells(&self) -> BTreeSet<Vec<usize>> {
        let dim = self.region.dim();
        let mut out = BTreeSet::new();
        let mut idx = vec![0usize; dim];
        loop {
            let keep = match self.hole {
                Some(h) => !h.contains_cell(self.region, &self.grid, &idx),
                None => true,
            };
            if keep {
                out.insert(idx.clone());
            }
            // advance the multi-index
            let mut a = 0;
            loop {
                idx[a] += 1;
                if idx[a] < self.grid[a] {
                    break;
                }
                idx[a] = 0;
                a += 1;
                if a == dim {
                    return out;
                }
            }
        }
    }

    /// Physical coordinates of sample points on a face.
    fn face_samples(&self, face: &Face) -> Vec<Vec<f64>> {
        let dim = self.region.dim();
        let mut base = Vec::with_capacity(dim);
        for a in 0..dim {
            let h = self.step(a);
            base.push(self.region.lo[a] + face.cell[a] as f64 * h);
        }
        let face_coord = if face.side > 0 {
            base[face.axis] + self.step(face.axis)
        } else {
            base[face.axis]
        };
        if dim == 1 {
            return vec![vec![face_coord]];
        }
        let other = 1 - face.axis;
        let h = self.step(other);
        (0..FACE_SAMPLES)
            .map(|s| {
                let t = s as f64 / (FACE_SAMPLES - 1) as f64;
                let mut x = vec![0.0; 2];
                x[face.axis] = face_coord;
                x[other] = base[other] + t * h;
                x
            })
            .collect()
    }
}

/// Sign of the outward normal component on every sample of a face:
/// `Some(1)` exit, `Some(-1)` ingress, `None` mixed or vanishing.
fn classify_face<F>(geom: &Geometry<'_>, field: &F, face: &Face) -> Option<i8>
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    let mut sign = 0i8;
    for x in geom.face_samples(face) {
        let v = field(&x)[face.axis] * face.side as f64;
        let s = if v > 0.0 {
            1
        } else if v < 0.0 {
            -1
        } else {
            return None;
        };
        if sign == 0 {
            sign = s;
        } else if sign != s {
            return None;
        }
    }
    Some(sign)
}

fn boundary_faces(cells: &BTreeSet<Vec<usize>>, dim: usize) -> Vec<Face> {
    let mut out = Vec::new();
    for cell in cells {
        for axis in 0..dim {
            for side in [-1i8, 1i8] {
                let mut nb = cell.clone();
                let exists = if side < 0 {
                    if nb[axis] == 0 {
                        false
                    } else {
                        nb[axis] -= 1;
                        cells.contains(&nb)
                    }
                } else {
                    nb[axis] += 1;
                    cells.contains(&nb)
                };
                if !exists {
                    out.push(Face {
                        cell: cell.clone(),
                        axis,
                        side,
                    });
                }
            }
        }
    }
    out.sort();
    out
}

/// Builds an isolating block over the whole box, classifying each boundary
/// face by the sign of the outward normal component of `field` at the face
/// sample nodes. Mixed faces trigger grid doubling, up to
/// [`MAX_REFINEMENTS`] rounds.
pub fn build_isolating_block<F>(
    field: F,
    region: &BoxRegion,
    grid: &[usize],
) -> Result<IsolatingBlock>
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    build_block_with_hole(field, region, None, grid)
}

/// Same as [`build_isolating_block`] with a rectangular hole removed from
/// the region: the block shape used for invariant sets that surround an
/// excluded equilibrium. The hole is snapped to grid lines.
pub fn build_block_with_hole<F>(
    field: F,
    region: &BoxRegion,
    hole: Option<&BoxRegion>,
    grid: &[usize],
) -> Result<IsolatingBlock>
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    let dim = region.dim();
    if grid.len() != dim || grid.iter().any(|&g| g == 0) {
        return Err(Error::Validation(
            "grid must give a positive count per axis".into(),
        ));
    }
    let mut grid = grid.to_vec();
    let snapped_hole = match hole {
        Some(h) => Some(snap_hole(region, &grid, h)?),
        None => None,
    };

    for refinement in 0..=MAX_REFINEMENTS {
        let geom = Geometry {
            region,
            grid: grid.clone(),
            hole: snapped_hole.as_ref(),
        };
        let cells = geom.cells();
        if cells.is_empty() {
            return Err(Error::Validation("block region contains no cells".into()));
        }
        let faces = boundary_faces(&cells, dim);
        let mut exit = Vec::new();
        let mut ingress = Vec::new();
        let mut tangent = Vec::new();
        for face in faces {
            match classify_face(&geom, &field, &face) {
                Some(1) => exit.push(face),
                Some(_) => ingress.push(face),
                None => tangent.push(face),
            }
        }
        if tangent.is_empty() {
            return Ok(IsolatingBlock {
                dim,
                region: region.clone(),
                hole: snapped_hole,
                grid,
                cells,
                faces_exit: exit,
                faces_ingress: ingress,
                tangency_report: tangent,
            });
        }
        if refinement == MAX_REFINEMENTS {
            return Err(Error::PersistentTangency {
                refinements: MAX_REFINEMENTS,
                faces: tangent.len(),
            });
        }
        for g in &mut grid {
            *g *= 2;
        }
    }
    unreachable!()
}

fn snap_hole(region: &BoxRegion, grid: &[usize], hole: &BoxRegion) -> Result<BoxRegion> {
    if hole.dim() != region.dim() {
        return Err(Error::Validation("hole dimension mismatch".into()));
    }
    let dim = region.dim();
    let mut lo = vec![0.0; dim];
    let mut hi = vec![0.0; dim];
    for a in 0..dim {
        let h = (region.hi[a] - region.lo[a]) / grid[a] as f64;
        let i_lo = ((hole.lo[a] - region.lo[a]) / h).floor().max(1.0) as usize;
        let i_hi = ((hole.hi[a] - region.lo[a]) / h)
            .ceil()
            .min(grid[a] as f64 - 1.0) as usize;
        if i_lo >= i_hi {
            return Err(Error::Validation(
                "hole must leave at least one cell of margin inside the region".into(),
            ));
        }
        lo[a] = region.lo[a] + i_lo as f64 * h;
        hi[a] = region.lo[a] + i_hi as f64 * h;
    }
    BoxRegion::new(lo, hi)
}

/// Relative Betti numbers of `(B, B^-)` over the rationals.
pub fn relative_betti(block: &IsolatingBlock) -> ConleyIndex {
    let complex = build_complex(block);
    ConleyIndex::from_betti(complex.betti())
}

/// Vertex / edge identifiers on the grid lattice. Exit sets consist of
/// boundary faces, so only cubes of dimension below the block dimension
/// appear here.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
enum Cube {
    Vertex(Vec<usize>),
    /// Edge from lattice point `at` along `axis`.
    Edge(Vec<usize>, usize),
}

fn face_cubes(face: &Face, dim: usize) -> Vec<Cube> {
    // closed cubes of the face: in 1D a vertex, in 2D an edge + endpoints
    let mut at = face.cell.clone();
    if face.side > 0 {
        at[face.axis] += 1;
    }
    if dim == 1 {
        return vec![Cube::Vertex(at)];
    }
    let other = 1 - face.axis;
    let mut end = at.clone();
    end[other] += 1;
    vec![
        Cube::Edge(at.clone(), other),
        Cube::Vertex(at),
        Cube::Vertex(end),
    ]
}

fn build_complex(block: &IsolatingBlock) -> RelativeComplex {
    let dim = block.dim;
    let mut exit_cubes: BTreeSet<Cube> = BTreeSet::new();
    for face in &block.faces_exit {
        for c in face_cubes(face, dim) {
            exit_cubes.insert(c);
        }
    }

    let mut vertices: BTreeSet<Vec<usize>> = BTreeSet::new();
    let mut edges: BTreeSet<(Vec<usize>, usize)> = BTreeSet::new();
    let mut squares: BTreeSet<Vec<usize>> = BTreeSet::new();
    for cell in &block.cells {
        if dim == 1 {
            let i = cell[0];
            vertices.insert(vec![i]);
            vertices.insert(vec![i + 1]);
            edges.insert((vec![i], 0));
        } else {
            let (i, j) = (cell[0], cell[1]);
            for (di, dj) in [(0, 0), (1, 0), (0, 1), (1, 1)] {
                vertices.insert(vec![i + di, j + dj]);
            }
            edges.insert((vec![i, j], 0));
            edges.insert((vec![i, j + 1], 0));
            edges.insert((vec![i, j], 1));
            edges.insert((vec![i + 1, j], 1));
            squares.insert(vec![i, j]);
        }
    }

    // quotient: drop cubes lying in the closed exit set
    let free_vertices: Vec<Vec<usize>> = vertices
        .iter()
        .filter(|v| !exit_cubes.contains(&Cube::Vertex((*v).clone())))
        .cloned()
        .collect();
    let free_edges: Vec<(Vec<usize>, usize)> = edges
        .iter()
        .filter(|(at, ax)| !exit_cubes.contains(&Cube::Edge(at.clone(), *ax)))
        .cloned()
        .collect();
    let free_squares: Vec<Vec<usize>> = squares.iter().cloned().collect();

    let vindex: BTreeMap<&Vec<usize>, u32> = free_vertices
        .iter()
        .enumerate()
        .map(|(i, v)| (v, i as u32))
        .collect();
    let eindex: BTreeMap<(&Vec<usize>, usize), u32> = free_edges
        .iter()
        .enumerate()
        .map(|(i, (at, ax))| ((at, *ax), i as u32))
        .collect();

    // boundary of edges: head - tail, dropping exit vertices
    let mut d1: Vec<Vec<(u32, i64)>> = Vec::with_capacity(free_edges.len());
    for (at, ax) in &free_edges {
        let mut head = at.clone();
        head[*ax] += 1;
        let mut row = Vec::new();
        if let Some(&i) = vindex.get(&head) {
            row.push((i, 1));
        }
        if let Some(&i) = vindex.get(at) {
            row.push((i, -1));
        }
        d1.push(row);
    }

    let mut dims = vec![free_vertices.len(), free_edges.len()];
    let mut boundaries = vec![Vec::new(), d1];

    if dim == 2 {
        // boundary of squares: bottom + right - top - left
        let mut d2: Vec<Vec<(u32, i64)>> = Vec::with_capacity(free_squares.len());
        for at in &free_squares {
            let (i, j) = (at[0], at[1]);
            let mut row = Vec::new();
            let mut push = |at: Vec<usize>, ax: usize, sign: i64| {
                if let Some(&idx) = eindex.get(&(&at, ax)) {
                    row.push((idx, sign));
                }
            };
            push(vec![i, j], 0, 1); // bottom
            push(vec![i + 1, j], 1, 1); // right
            push(vec![i, j + 1], 0, -1); // top
            push(vec![i, j], 1, -1); // left
            d2.push(row);
        }
        dims.push(free_squares.len());
        boundaries.push(d2);
    }

    RelativeComplex { dims, boundaries }
}

/// One probe of an index-constancy sweep.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IndexSweep {
    pub samples: Vec<(f64, ConleyIndex)>,
    /// Midpoints of sample brackets where the index changed. By the
    /// continuation property of the index these mark parameter values where
    /// the box stopped isolating, which is expected exactly at bifurcation
    /// values of the family.
    pub change_points: Vec<f64>,
}

/// Computes the block index at `steps` evenly spaced parameter values and
/// flags every index change. A block that cannot be classified at some
/// sample (persistent boundary tangency, i.e. the invariant set touches the
/// box) aborts with [`Error::IsolationLost`] at that parameter.
pub fn index_constancy_sweep<F>(
    family: F,
    region: &BoxRegion,
    grid: &[usize],
    lambda_lo: f64,
    lambda_hi: f64,
    steps: usize,
) -> Result<IndexSweep>
where
    F: Fn(f64, &[f64]) -> Vec<f64>,
{
    if steps < 2 || !(lambda_lo < lambda_hi) {
        return Err(Error::Validation(
            "sweep needs an increasing window and >= 2 steps".into(),
        ));
    }
    let mut samples = Vec::with_capacity(steps);
    for s in 0..steps {
        let lambda = lambda_lo + (lambda_hi - lambda_lo) * s as f64 / (steps - 1) as f64;
        let block = build_isolating_block(|x: &[f64]| family(lambda, x), region, grid).map_err(
            |e| match e {
                Error::PersistentTangency { .. } => Error::IsolationLost { lambda },
                other => other,
            },
        )?;
        samples.push((lambda, relative_betti(&block)));
    }
    let mut change_points = Vec::new();
    for w in samples.windows(2) {
        if w[0].1 != w[1].1 {
            change_points.push(0.5 * (w[0].0 + w[1].0));
        }
    }
    Ok(IndexSweep {
        samples,
        change_points,
    })
}
