//! Quadtree meshes of axis-aligned rectangles.
//!
//! A mesh starts as an `nx x ny` Cartesian grid of level-0 cells. Each leaf
//! is addressed by a [`CellKey`] `(level, ix, iy)`, the integer position in
//! the uniform grid of level `level` (which has `nx << level` by
//! `ny << level` cells). Refinement keeps adjacent leaves within one level of
//! each other, so a face is either conforming or splits a coarse face into
//! two halves. Faces against a coarser neighbour are emitted once per fine
//! cell ("sub-faces"), which gives every face exactly one cell per side.

use std::collections::{HashMap, HashSet};
use std::hash::{DefaultHasher, Hash, Hasher};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Structural fingerprint: equal for meshes with the same box, base grid,
/// wrap and leaf keys.
fn fingerprint(domain: &Rect, base: [u32; 2], periodic: [bool; 2], cells: &[Cell]) -> u64 {
    let mut h = DefaultHasher::new();
    for v in [domain.x_min, domain.x_max, domain.y_min, domain.y_max] {
        v.to_bits().hash(&mut h);
    }
    base.hash(&mut h);
    periodic.hash(&mut h);
    for c in cells {
        c.key.hash(&mut h);
    }
    h.finish()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl Rect {
    pub fn new(x_min: f64, x_max: f64, y_min: f64, y_max: f64) -> Self {
        Self {
            x_min,
            x_max,
            y_min,
            y_max,
        }
    }

    pub fn square(lo: f64, hi: f64) -> Self {
        Self::new(lo, hi, lo, hi)
    }

    pub fn width(&self) -> f64 {
        self.x_max - self.x_min
    }

    pub fn height(&self) -> f64 {
        self.y_max - self.y_min
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    fn lower(&self) -> [f64; 2] {
        [self.x_min, self.y_min]
    }

    fn extent(&self) -> [f64; 2] {
        [self.width(), self.height()]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CellKey {
    pub level: u8,
    pub ix: u32,
    pub iy: u32,
}

impl CellKey {
    pub fn parent(&self) -> Option<CellKey> {
        (self.level > 0).then(|| CellKey {
            level: self.level - 1,
            ix: self.ix / 2,
            iy: self.iy / 2,
        })
    }

    /// Children in the order (0,0), (1,0), (0,1), (1,1).
    pub fn children(&self) -> [CellKey; 4] {
        let c = |dx, dy| CellKey {
            level: self.level + 1,
            ix: 2 * self.ix + dx,
            iy: 2 * self.iy + dy,
        };
        [c(0, 0), c(1, 0), c(0, 1), c(1, 1)]
    }

    /// Position among its siblings, matching [`CellKey::children`].
    pub fn child_slot(&self) -> usize {
        (self.ix % 2 + 2 * (self.iy % 2)) as usize
    }

    pub fn ancestor(&self, level: u8) -> CellKey {
        let shift = self.level - level;
        CellKey {
            level,
            ix: self.ix >> shift,
            iy: self.iy >> shift,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Cell {
    pub key: CellKey,
    pub center: [f64; 2],
    pub extent: [f64; 2],
}

impl Cell {
    pub fn level(&self) -> u8 {
        self.key.level
    }

    pub fn area(&self) -> f64 {
        self.extent[0] * self.extent[1]
    }

    /// Diagonal length, `h_K`.
    pub fn diameter(&self) -> f64 {
        self.extent[0].hypot(self.extent[1])
    }

    /// Physical coordinates of reference point `xi` in `[-1, 1]^2`.
    pub fn map(&self, xi: [f64; 2]) -> [f64; 2] {
        [
            self.center[0] + 0.5 * self.extent[0] * xi[0],
            self.center[1] + 0.5 * self.extent[1] * xi[1],
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FaceKind {
    Interior,
    Boundary,
}

/// One side of a face. `half` is set when the cell is the coarse side of a
/// hanging-node face: 0 for the lower half of its face, 1 for the upper.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FaceSide {
    pub cell: usize,
    pub half: Option<u8>,
}

/// A (sub-)face normal to `axis`. `left` is the cell on the low-coordinate
/// side (its outward normal is `+e_axis`), `right` the one on the high side.
/// Boundary faces have exactly one of them.
#[derive(Debug, Clone, Copy)]
pub struct Face {
    pub axis: usize,
    pub left: Option<FaceSide>,
    pub right: Option<FaceSide>,
    pub length: f64,
    /// Coordinate of the face along `axis`.
    pub position: f64,
    /// Tangential coordinate of the face's lower end.
    pub start: f64,
}

impl Face {
    pub fn kind(&self) -> FaceKind {
        if self.left.is_some() && self.right.is_some() {
            FaceKind::Interior
        } else {
            FaceKind::Boundary
        }
    }

    /// Unit normal pointing from `left` to `right`.
    pub fn normal(&self) -> [f64; 2] {
        let mut n = [0.0; 2];
        n[self.axis] = 1.0;
        n
    }

    /// Physical point at face reference coordinate `s` in `[-1, 1]`.
    pub fn point(&self, s: f64) -> [f64; 2] {
        let t = self.start + 0.5 * (s + 1.0) * self.length;
        if self.axis == 0 {
            [self.position, t]
        } else {
            [t, self.position]
        }
    }
}

#[derive(Debug, Clone)]
pub struct QuadMesh {
    id: u64,
    domain: Rect,
    base: [u32; 2],
    periodic: [bool; 2],
    max_level: u8,
    cells: Vec<Cell>,
    lookup: HashMap<CellKey, usize>,
    faces: Vec<Face>,
}

/// Direction index: 0 = -x, 1 = +x, 2 = -y, 3 = +y.
const DIRS: [usize; 4] = [0, 1, 2, 3];

impl QuadMesh {
    /// Non-periodic `nx x ny` Cartesian mesh.
    pub fn build_uniform(nx: usize, ny: usize, domain: Rect) -> Result<Self> {
        Self::uniform(nx, ny, domain, [false, false])
    }

    /// Cartesian mesh with optional periodic wrap per axis.
    pub fn uniform(nx: usize, ny: usize, domain: Rect, periodic: [bool; 2]) -> Result<Self> {
        if nx == 0 || ny == 0 {
            return Err(Error::InvalidDomain(format!("{nx} x {ny} cells")));
        }
        let ok = |a: f64, b: f64| a.is_finite() && b.is_finite() && b > a;
        if !ok(domain.x_min, domain.x_max) || !ok(domain.y_min, domain.y_max) {
            return Err(Error::InvalidDomain(format!("{domain:?}")));
        }
        let keys: Vec<CellKey> = (0..ny as u32)
            .flat_map(|iy| (0..nx as u32).map(move |ix| CellKey { level: 0, ix, iy }))
            .collect();
        Ok(Self::from_keys(
            domain,
            [nx as u32, ny as u32],
            periodic,
            0,
            keys,
        ))
    }

    pub fn with_max_level(mut self, max_level: u8) -> Self {
        self.max_level = max_level;
        self
    }

    fn from_keys(
        domain: Rect,
        base: [u32; 2],
        periodic: [bool; 2],
        max_level: u8,
        keys: Vec<CellKey>,
    ) -> Self {
        let lo = domain.lower();
        let ext = domain.extent();
        let cells: Vec<Cell> = keys
            .into_iter()
            .map(|key| {
                let scale = (1u64 << key.level) as f64;
                let h = [
                    ext[0] / (base[0] as f64 * scale),
                    ext[1] / (base[1] as f64 * scale),
                ];
                Cell {
                    key,
                    center: [
                        lo[0] + (key.ix as f64 + 0.5) * h[0],
                        lo[1] + (key.iy as f64 + 0.5) * h[1],
                    ],
                    extent: h,
                }
            })
            .collect();
        let lookup = cells.iter().enumerate().map(|(i, c)| (c.key, i)).collect();
        let mut mesh = Self {
            id: fingerprint(&domain, base, periodic, &cells),
            domain,
            base,
            periodic,
            max_level,
            cells,
            lookup,
            faces: Vec::new(),
        };
        mesh.faces = mesh.build_faces();
        mesh
    }

    /// Identity used to pair fields with meshes; structurally equal meshes
    /// share it.
    pub fn id(&self) -> u64 {
        self.id
    }

    pub fn domain(&self) -> Rect {
        self.domain
    }

    pub fn base_cells(&self) -> [usize; 2] {
        [self.base[0] as usize, self.base[1] as usize]
    }

    pub fn periodic(&self) -> [bool; 2] {
        self.periodic
    }

    pub fn is_periodic(&self) -> bool {
        self.periodic[0] || self.periodic[1]
    }

    pub fn max_level(&self) -> u8 {
        self.max_level
    }

    pub fn n_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn cell(&self, i: usize) -> &Cell {
        &self.cells[i]
    }

    pub fn faces(&self) -> &[Face] {
        &self.faces
    }

    pub fn find(&self, key: CellKey) -> Option<usize> {
        self.lookup.get(&key).copied()
    }

    /// 𝓗: smallest cell diagonal.
    pub fn min_diameter(&self) -> f64 {
        self.cells
            .iter()
            .map(Cell::diameter)
            .fold(f64::INFINITY, f64::min)
    }

    pub fn total_area(&self) -> f64 {
        self.cells.iter().map(Cell::area).sum()
    }

    fn grid_dims(&self, level: u8) -> [u32; 2] {
        [self.base[0] << level, self.base[1] << level]
    }

    /// Key of the same-level neighbour in direction `dir`, wrapping periodic
    /// axes; `None` across a physical boundary.
    fn neighbor_key(&self, key: CellKey, dir: usize) -> Option<CellKey> {
        let dims = self.grid_dims(key.level);
        let axis = dir / 2;
        let mut idx = [key.ix as i64, key.iy as i64];
        idx[axis] += if dir % 2 == 1 { 1 } else { -1 };
        let n = dims[axis] as i64;
        if idx[axis] < 0 || idx[axis] >= n {
            if !self.periodic[axis] {
                return None;
            }
            idx[axis] = idx[axis].rem_euclid(n);
        }
        Some(CellKey {
            level: key.level,
            ix: idx[0] as u32,
            iy: idx[1] as u32,
        })
    }

    /// Leaf containing the region of `key`, searching `key` and its
    /// ancestors. `None` when the region is subdivided further.
    fn covering_in(lookup: &HashMap<CellKey, usize>, key: CellKey) -> Option<CellKey> {
        (0..=key.level)
            .rev()
            .map(|l| key.ancestor(l))
            .find(|k| lookup.contains_key(k))
    }

    /// Index of the leaf covering `key`'s region, if any.
    pub fn covering(&self, key: CellKey) -> Option<usize> {
        Self::covering_in(&self.lookup, key).map(|k| self.lookup[&k])
    }

    fn build_faces(&self) -> Vec<Face> {
        let mut faces = Vec::with_capacity(2 * self.cells.len() + 64);
        for (ci, cell) in self.cells.iter().enumerate() {
            for dir in DIRS {
                let axis = dir / 2;
                let tan = 1 - axis;
                let plus = dir % 2 == 1;
                let position = cell.center[axis]
                    + if plus { 0.5 } else { -0.5 } * cell.extent[axis];
                let geom = |left, right| Face {
                    axis,
                    left,
                    right,
                    length: cell.extent[tan],
                    position,
                    start: cell.center[tan] - 0.5 * cell.extent[tan],
                };
                let me = FaceSide {
                    cell: ci,
                    half: None,
                };
                let Some(nk) = self.neighbor_key(cell.key, dir) else {
                    faces.push(if plus {
                        geom(Some(me), None)
                    } else {
                        geom(None, Some(me))
                    });
                    continue;
                };
                let Some(ni) = self.covering(nk) else {
                    // finer neighbours own these sub-faces
                    continue;
                };
                let other_level = self.cells[ni].key.level;
                if other_level == cell.key.level {
                    if plus {
                        let other = FaceSide {
                            cell: ni,
                            half: None,
                        };
                        faces.push(geom(Some(me), Some(other)));
                    }
                } else {
                    debug_assert_eq!(other_level + 1, cell.key.level);
                    let t_idx = if axis == 0 { cell.key.iy } else { cell.key.ix };
                    let other = FaceSide {
                        cell: ni,
                        half: Some((t_idx % 2) as u8),
                    };
                    faces.push(if plus {
                        geom(Some(me), Some(other))
                    } else {
                        geom(Some(other), Some(me))
                    });
                }
            }
        }
        faces
    }

    /// Split every marked leaf into four children, plus whatever coarser
    /// neighbours must follow to keep adjacent levels within one. Marks on
    /// leaves already at `max_level` are ignored.
    pub fn refine(&self, marks: &HashSet<usize>) -> QuadMesh {
        let mut to_refine: HashSet<CellKey> = HashSet::new();
        let mut stack = Vec::new();
        let mut sorted: Vec<usize> = marks.iter().copied().collect();
        sorted.sort_unstable();
        for i in sorted {
            let key = self.cells[i].key;
            if key.level < self.max_level && to_refine.insert(key) {
                stack.push(key);
            }
        }
        if to_refine.is_empty() {
            return self.clone();
        }
        while let Some(key) = stack.pop() {
            for dir in DIRS {
                let Some(nk) = self.neighbor_key(key, dir) else {
                    continue;
                };
                if let Some(ni) = self.covering(nk) {
                    let lk = self.cells[ni].key;
                    if lk.level < key.level && to_refine.insert(lk) {
                        stack.push(lk);
                    }
                }
            }
        }
        let keys = self
            .cells
            .iter()
            .flat_map(|c| {
                if to_refine.contains(&c.key) {
                    c.key.children().to_vec()
                } else {
                    vec![c.key]
                }
            })
            .collect();
        Self::from_keys(self.domain, self.base, self.periodic, self.max_level, keys)
    }

    /// Merge sibling quadruples whose four members are all marked, unless the
    /// merge would leave a neighbour two levels finer.
    pub fn coarsen(&self, marks: &HashSet<usize>) -> QuadMesh {
        let mut parents: Vec<CellKey> = Vec::new();
        let mut seen = HashSet::new();
        for c in &self.cells {
            let Some(p) = c.key.parent() else { continue };
            if seen.contains(&p) {
                continue;
            }
            let all = p
                .children()
                .iter()
                .all(|ch| self.find(*ch).is_some_and(|i| marks.contains(&i)));
            if all {
                seen.insert(p);
                parents.push(p);
            }
        }
        if parents.is_empty() {
            return self.clone();
        }
        // live leaf set, updated as merges are accepted
        let mut live: HashMap<CellKey, usize> = self.lookup.clone();
        let mut merged = HashSet::new();
        for p in parents {
            if self.merge_keeps_balance(&live, p) {
                for ch in p.children() {
                    live.remove(&ch);
                }
                live.insert(p, usize::MAX);
                merged.insert(p);
            }
        }
        let mut keys = Vec::with_capacity(self.cells.len());
        for c in &self.cells {
            match c.key.parent() {
                Some(p) if merged.contains(&p) => {
                    // the parent takes the storage slot of its first child
                    if c.key.child_slot() == 0 {
                        keys.push(p);
                    }
                }
                _ => keys.push(c.key),
            }
        }
        Self::from_keys(self.domain, self.base, self.periodic, self.max_level, keys)
    }

    fn merge_keeps_balance(&self, live: &HashMap<CellKey, usize>, parent: CellKey) -> bool {
        let fine = parent.level + 1;
        for dir in DIRS {
            let Some(nk) = self.neighbor_key(parent, dir) else {
                continue;
            };
            if Self::covering_in(live, nk).is_some() {
                continue;
            }
            // the neighbour region is subdivided; the children touching the
            // parent must be leaves
            let axis = dir / 2;
            let near = if dir % 2 == 1 { 0 } else { 1 };
            for t in 0..2 {
                let mut idx = [0u32; 2];
                idx[axis] = 2 * if axis == 0 { nk.ix } else { nk.iy } + near;
                idx[1 - axis] = 2 * if axis == 0 { nk.iy } else { nk.ix } + t;
                let child = CellKey {
                    level: fine,
                    ix: idx[0],
                    iy: idx[1],
                };
                if Self::covering_in(live, child).is_none() {
                    return false;
                }
            }
        }
        true
    }

    /// Exhaustive check that face-adjacent leaves differ by at most one level.
    pub fn is_balanced(&self) -> bool {
        self.faces.iter().all(|f| match (f.left, f.right) {
            (Some(l), Some(r)) => {
                let (a, b) = (self.cells[l.cell].level(), self.cells[r.cell].level());
                a.abs_diff(b) <= 1
            }
            _ => true,
        }) && self.cells.iter().all(|c| {
            DIRS.iter().all(|&dir| {
                let Some(nk) = self.neighbor_key(c.key, dir) else {
                    return true;
                };
                match self.covering(nk) {
                    Some(ni) => c.level().abs_diff(self.cells[ni].level()) <= 1,
                    // finer neighbour: its children next to us must be leaves
                    None => {
                        let child = nk.children()[0];
                        let axis = dir / 2;
                        let near = if dir % 2 == 1 { 0 } else { 1 };
                        (0..2).all(|t| {
                            let mut idx = [0u32; 2];
                            idx[axis] = if axis == 0 { child.ix } else { child.iy } + near;
                            idx[1 - axis] = if axis == 0 { child.iy } else { child.ix } + t;
                            self.find(CellKey {
                                level: child.level,
                                ix: idx[0],
                                iy: idx[1],
                            })
                            .is_some()
                        })
                    }
                }
            })
        })
    }

    /// Leaves tile the domain: areas add up and no leaf has a leaf ancestor.
    pub fn tiles_domain(&self) -> bool {
        let area_ok =
            (self.total_area() - self.domain.area()).abs() <= 1e-12 * self.domain.area();
        let nested = self.cells.iter().any(|c| {
            (0..c.key.level).any(|l| self.lookup.contains_key(&c.key.ancestor(l)))
        });
        area_ok && !nested
    }
}
