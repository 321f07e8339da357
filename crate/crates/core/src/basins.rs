//! Raster basins of attraction, immediate basins, and boundary checks.
//!
//! Row 0 of a grid is the top edge (`y_max`), matching image order.

use std::collections::VecDeque;
use std::io::{self, Read, Write};

use rand::{Rng, SeedableRng};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::cycles::FourCycle;
use crate::geometry::{Point, Rect};
use crate::secant_map::{OrbitOutcome, OrbitParams, RootTriple, SecantSystem};

pub const GRID_MAGIC: &[u8; 4] = b"SBG1";

#[derive(Debug, Error)]
pub enum BasinError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("root index {0} out of range")]
    RootIndex(usize),
    #[error("the cell of ({0}, {0}) lies outside the grid")]
    SeedOutOfBounds(f64),
    #[error("the cell of ({0}, {0}) is not in the basin of that root")]
    SeedNotInBasin(f64),
    #[error("malformed grid file: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(tag = "kind", content = "root", rename_all = "snake_case")]
pub enum CellTag {
    Root(u8),
    NonConverged,
    Singular,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Cell {
    pub tag: CellTag,
    pub iterations: u16,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BasinGrid {
    pub bounds: Rect,
    pub width: usize,
    pub height: usize,
    pub cells: Vec<Cell>,
}

impl BasinGrid {
    pub fn get(&self, col: usize, row: usize) -> Cell {
        self.cells[row * self.width + col]
    }

    pub fn cell_width(&self) -> f64 {
        self.bounds.width() / self.width as f64
    }

    pub fn cell_height(&self) -> f64 {
        self.bounds.height() / self.height as f64
    }

    pub fn cell_diagonal(&self) -> f64 {
        self.cell_width().hypot(self.cell_height())
    }

    pub fn cell_center(&self, col: usize, row: usize) -> Point {
        Point::new(
            self.bounds.x_min + (col as f64 + 0.5) * self.cell_width(),
            self.bounds.y_max - (row as f64 + 0.5) * self.cell_height(),
        )
    }

    /// `(col, row)` of the cell containing `p`, if inside the bounds.
    pub fn cell_of(&self, p: Point) -> Option<(usize, usize)> {
        if !self.bounds.contains(p) {
            return None;
        }
        let col = ((p.x - self.bounds.x_min) / self.cell_width()).floor() as usize;
        let row = ((self.bounds.y_max - p.y) / self.cell_height()).floor() as usize;
        Some((col.min(self.width - 1), row.min(self.height - 1)))
    }

    /// Fraction of cells per root, then non-converged, then singular.
    pub fn summary(&self, n_roots: usize) -> GridSummary {
        let mut roots = vec![0usize; n_roots];
        let (mut nc, mut sing) = (0usize, 0usize);
        for c in &self.cells {
            match c.tag {
                CellTag::Root(i) => {
                    if let Some(slot) = roots.get_mut(i as usize) {
                        *slot += 1;
                    }
                }
                CellTag::NonConverged => nc += 1,
                CellTag::Singular => sing += 1,
            }
        }
        let n = self.cells.len() as f64;
        GridSummary {
            width: self.width,
            height: self.height,
            bounds: [
                self.bounds.x_min,
                self.bounds.x_max,
                self.bounds.y_min,
                self.bounds.y_max,
            ],
            root_fractions: roots.iter().map(|&k| k as f64 / n).collect(),
            nonconverged_fraction: nc as f64 / n,
            singular_fraction: sing as f64 / n,
        }
    }

    /// Little-endian dump: magic, width and height as u32, bounds as four
    /// f64, then one tag byte (0xFF non-converged, 0xFE singular, else the
    /// root index) and a u16 iteration count per cell.
    pub fn write_binary<W: Write>(&self, mut w: W) -> io::Result<()> {
        w.write_all(GRID_MAGIC)?;
        w.write_all(&(self.width as u32).to_le_bytes())?;
        w.write_all(&(self.height as u32).to_le_bytes())?;
        for v in [
            self.bounds.x_min,
            self.bounds.x_max,
            self.bounds.y_min,
            self.bounds.y_max,
        ] {
            w.write_all(&v.to_le_bytes())?;
        }
        let mut buf = Vec::with_capacity(self.cells.len() * 3);
        for c in &self.cells {
            buf.push(match c.tag {
                CellTag::Root(i) => i,
                CellTag::NonConverged => 0xFF,
                CellTag::Singular => 0xFE,
            });
            buf.extend_from_slice(&c.iterations.to_le_bytes());
        }
        w.write_all(&buf)
    }

    pub fn read_binary<R: Read>(mut r: R) -> Result<Self, BasinError> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != GRID_MAGIC {
            return Err(BasinError::Format("bad magic".into()));
        }
        let mut u = [0u8; 4];
        r.read_exact(&mut u)?;
        let width = u32::from_le_bytes(u) as usize;
        r.read_exact(&mut u)?;
        let height = u32::from_le_bytes(u) as usize;
        let mut b = [0.0; 4];
        for v in &mut b {
            let mut d = [0u8; 8];
            r.read_exact(&mut d)?;
            *v = f64::from_le_bytes(d);
        }
        let mut body = vec![0u8; width * height * 3];
        r.read_exact(&mut body)?;
        let cells = body
            .chunks_exact(3)
            .map(|ch| Cell {
                tag: match ch[0] {
                    0xFF => CellTag::NonConverged,
                    0xFE => CellTag::Singular,
                    i => CellTag::Root(i),
                },
                iterations: u16::from_le_bytes([ch[1], ch[2]]),
            })
            .collect();
        Ok(BasinGrid {
            bounds: Rect::new(b[0], b[1], b[2], b[3]),
            width,
            height,
            cells,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridSummary {
    pub width: usize,
    pub height: usize,
    pub bounds: [f64; 4],
    pub root_fractions: Vec<f64>,
    pub nonconverged_fraction: f64,
    pub singular_fraction: f64,
}

/// Classifies every cell center by its orbit. Rows run in parallel on the
/// current rayon pool; the result does not depend on the pool size.
pub fn compute_grid(
    sys: &SecantSystem,
    bounds: Rect,
    width: usize,
    height: usize,
    params: &OrbitParams,
) -> Result<BasinGrid, BasinError> {
    if !bounds.is_valid() {
        return Err(BasinError::InvalidGrid(format!("degenerate bounds {bounds:?}")));
    }
    if width == 0 || height == 0 {
        return Err(BasinError::InvalidGrid("empty raster".into()));
    }
    if sys.roots().len() > 0xFE {
        return Err(BasinError::InvalidGrid("too many roots for the cell tag".into()));
    }
    let mut grid = BasinGrid {
        bounds,
        width,
        height,
        cells: Vec::new(),
    };
    let probe = grid.clone();
    grid.cells = (0..height)
        .into_par_iter()
        .flat_map_iter(|row| {
            let probe = &probe;
            (0..width).map(move |col| {
                let res = sys.orbit(probe.cell_center(col, row), params);
                let tag = match res.outcome {
                    OrbitOutcome::Converged(i) => CellTag::Root(i as u8),
                    OrbitOutcome::NonConverged => CellTag::NonConverged,
                    OrbitOutcome::Singular => CellTag::Singular,
                };
                Cell {
                    tag,
                    iterations: res.iterations.min(u16::MAX as u32) as u16,
                }
            })
        })
        .collect();
    Ok(grid)
}

/// Resolution below which single-cell holes are treated as noise.
pub const HOLE_NOISE_RESOLUTION: usize = 512;

/// Radius, in cell diagonals, around each focal point inside which
/// complement cells count as open to the outside.
pub const FOCAL_RADIUS: f64 = 1.5;

#[derive(Debug, Clone, PartialEq)]
pub struct ImmediateBasin {
    pub root_index: usize,
    pub width: usize,
    pub height: usize,
    pub mask: Vec<bool>,
    pub hole_count: usize,
    /// Cell counts of the counted holes.
    pub hole_sizes: Vec<usize>,
    /// `(col, row)` of mask cells with a side on the mask's edge.
    pub boundary_cells: Vec<(usize, usize)>,
    /// Adjacent `Root(root_index)` pairs split by a separator curve.
    pub cut_edges: usize,
}

impl ImmediateBasin {
    pub fn contains(&self, col: usize, row: usize) -> bool {
        self.mask[row * self.width + col]
    }

    pub fn area(&self) -> usize {
        self.mask.iter().filter(|&&m| m).count()
    }
}

fn neighbours4(
    col: usize,
    row: usize,
    w: usize,
    h: usize,
) -> impl Iterator<Item = (usize, usize)> {
    let c = col as isize;
    let r = row as isize;
    [(c - 1, r), (c + 1, r), (c, r - 1), (c, r + 1)]
        .into_iter()
        .filter(move |&(x, y)| x >= 0 && y >= 0 && (x as usize) < w && (y as usize) < h)
        .map(|(x, y)| (x as usize, y as usize))
}

/// 4-connected component of `seeds` among cells where `inside` holds.
fn flood(
    w: usize,
    h: usize,
    seeds: &[(usize, usize)],
    inside: impl Fn(usize, usize) -> bool,
) -> Vec<bool> {
    let mut seen = vec![false; w * h];
    let mut stack: Vec<(usize, usize)> = Vec::new();
    for &(c, r) in seeds {
        if inside(c, r) && !seen[r * w + c] {
            seen[r * w + c] = true;
            stack.push((c, r));
        }
    }
    while let Some((c, r)) = stack.pop() {
        for (nc, nr) in neighbours4(c, r, w, h) {
            let k = nr * w + nc;
            if !seen[k] && inside(nc, nr) {
                seen[k] = true;
                stack.push((nc, nr));
            }
        }
    }
    seen
}

/// Holes of a cell mask: 4-connected components of the complement inside
/// the mask's bounding box that do not reach the box's frame. Components
/// smaller than `min_size` are dropped.
///
/// Cells listed in `openings` connect to the outside like the frame does.
pub fn count_holes(
    mask: &[bool],
    w: usize,
    h: usize,
    min_size: usize,
    openings: &[(usize, usize)],
) -> Vec<usize> {
    let weight = vec![1usize; w * h];
    complement_components(mask, &weight, w, h, min_size, openings)
}

fn complement_components(
    member: &[bool],
    weight: &[usize],
    w: usize,
    h: usize,
    min_size: usize,
    openings: &[(usize, usize)],
) -> Vec<usize> {
    let (mut c0, mut c1, mut r0, mut r1) = (usize::MAX, 0, usize::MAX, 0);
    for r in 0..h {
        for c in 0..w {
            if member[r * w + c] {
                c0 = c0.min(c);
                c1 = c1.max(c);
                r0 = r0.min(r);
                r1 = r1.max(r);
            }
        }
    }
    if c0 == usize::MAX {
        return Vec::new();
    }
    let bw = c1 - c0 + 1;
    let bh = r1 - r0 + 1;
    let free = |c: usize, r: usize| !member[(r + r0) * w + c + c0];
    let frame: Vec<(usize, usize)> = (0..bw)
        .flat_map(|c| [(c, 0), (c, bh - 1)])
        .chain((0..bh).flat_map(|r| [(0, r), (bw - 1, r)]))
        .chain(
            openings
                .iter()
                .filter(|&&(c, r)| c >= c0 && c <= c1 && r >= r0 && r <= r1)
                .map(|&(c, r)| (c - c0, r - r0)),
        )
        .collect();
    let mut outside = flood(bw, bh, &frame, free);
    let mut sizes = Vec::new();
    for r in 0..bh {
        for c in 0..bw {
            if free(c, r) && !outside[r * bw + c] {
                let comp = flood(bw, bh, &[(c, r)], |x, y| free(x, y) && !outside[y * bw + x]);
                let mut size = 0;
                for (k, v) in comp.iter().enumerate() {
                    if *v {
                        outside[k] = true;
                        size += weight[(k / bw + r0) * w + k % bw + c0];
                    }
                }
                if size >= min_size.max(1) {
                    sizes.push(size);
                }
            }
        }
    }
    sizes
}

/// Cells whose centers lie within `radius` cell diagonals of a focal point.
pub fn focal_cells(grid: &BasinGrid, sys: &SecantSystem, radius: f64) -> Vec<(usize, usize)> {
    let reach = radius * grid.cell_diagonal();
    let span_c = (reach / grid.cell_width()).ceil() as isize + 1;
    let span_r = (reach / grid.cell_height()).ceil() as isize + 1;
    let mut out = Vec::new();
    for f in sys.focal_points() {
        let q = f.location;
        let cc = ((q.x - grid.bounds.x_min) / grid.cell_width()).floor() as isize;
        let cr = ((grid.bounds.y_max - q.y) / grid.cell_height()).floor() as isize;
        for r in cr - span_r..=cr + span_r {
            for c in cc - span_c..=cc + span_c {
                if c < 0 || r < 0 || c as usize >= grid.width || r as usize >= grid.height {
                    continue;
                }
                let (c, r) = (c as usize, r as usize);
                if grid.cell_center(c, r).dist(&q) <= reach {
                    out.push((c, r));
                }
            }
        }
    }
    out.sort_unstable();
    out.dedup();
    out
}

/// Number of separator levels: level 0 is `F_j`, level `k` is `F_j o S^k`.
pub const SEPARATOR_LEVELS: usize = 6;

/// Sign data of separator functions at one cell center.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
struct SeparatorSigns {
    /// Bit `j` set when the level's `F_j < 0`.
    neg: [u64; SEPARATOR_LEVELS],
    /// Bit `j` set when the level's `F_j = 0`.
    zero: [u64; SEPARATOR_LEVELS],
    /// Sign of `q` along the orbit, bit `k` for `S^k`.
    q_neg: u64,
    /// Levels that could be evaluated (the orbit stayed off the singular set).
    valid: usize,
}

/// Sign data of the separators `F_j(x, y) = (y - alpha_j) q(x, y) - p(y)`,
/// `j != root_index`, and of their pull-backs `F_j o S^k`.
///
/// Off the singular set, `F_j = 0` exactly when `S(x, y) = (y, alpha_j)`,
/// so the zero set lies in the basin of `alpha_j`; it contains the lines
/// `x = alpha_j` and `y = alpha_j`. A sign change of `F_j o S^k` between
/// two points only proves a zero in between when `S^k` is continuous on
/// the segment, which is approximated by `q` keeping its sign along both
/// orbits.
fn separator_signs(
    grid: &BasinGrid,
    sys: &SecantSystem,
    root_index: usize,
) -> Vec<SeparatorSigns> {
    let roots = sys.roots().roots();
    (0..grid.height)
        .into_par_iter()
        .flat_map_iter(|row| {
            (0..grid.width).map(move |col| {
                let mut out = SeparatorSigns::default();
                let mut p = grid.cell_center(col, row);
                for level in 0..SEPARATOR_LEVELS {
                    let py = sys.p(p.y);
                    let q = sys.q(p.x, p.y);
                    if !p.is_finite() || !q.is_finite() {
                        break;
                    }
                    for (j, &a) in roots.iter().enumerate() {
                        if j == root_index {
                            continue;
                        }
                        let f = (p.y - a) * q - py;
                        if f < 0.0 {
                            out.neg[level] |= 1 << j;
                        } else if f == 0.0 {
                            out.zero[level] |= 1 << j;
                        }
                    }
                    if q < 0.0 {
                        out.q_neg |= 1 << level;
                    }
                    out.valid = level + 1;
                    match sys.step(p) {
                        Ok(next) => p = next,
                        Err(_) => break,
                    }
                }
                out
            })
        })
        .collect()
}

fn is_cut(a: &SeparatorSigns, b: &SeparatorSigns, levels: usize) -> bool {
    let levels = a.valid.min(b.valid).min(levels);
    for level in 0..levels {
        let guard = (1u64 << level) - 1;
        if (a.q_neg ^ b.q_neg) & guard != 0 {
            return false;
        }
        if ((a.neg[level] ^ b.neg[level]) | a.zero[level] | b.zero[level]) != 0 {
            return true;
        }
    }
    false
}

/// Doubled lattice over the grid: cell `(c, r)` sits at `(2c+1, 2r+1)`,
/// with sides and corners in between and a closed outer ring. A side is
/// open when both cells are open and no separator of the first `levels`
/// levels cuts it; a corner when its four sides are open.
struct Lattice {
    w: usize,
    h: usize,
    open: Vec<bool>,
    cuts: usize,
}

impl Lattice {
    fn build(
        cells_w: usize,
        cells_h: usize,
        cell_open: impl Fn(usize, usize) -> bool,
        side_cut: impl Fn((usize, usize), (usize, usize)) -> bool,
    ) -> Lattice {
        let (w, h) = (cells_w, cells_h);
        let (lw, lh) = (2 * w + 1, 2 * h + 1);
        let mut open = vec![false; lw * lh];
        let mut cuts = 0;
        for r in 0..h {
            for c in 0..w {
                if !cell_open(c, r) {
                    continue;
                }
                open[(2 * r + 1) * lw + 2 * c + 1] = true;
                if c + 1 < w && cell_open(c + 1, r) {
                    if side_cut((c, r), (c + 1, r)) {
                        cuts += 1;
                    } else {
                        open[(2 * r + 1) * lw + 2 * c + 2] = true;
                    }
                }
                if r + 1 < h && cell_open(c, r + 1) {
                    if side_cut((c, r), (c, r + 1)) {
                        cuts += 1;
                    } else {
                        open[(2 * r + 2) * lw + 2 * c + 1] = true;
                    }
                }
            }
        }
        for r in 0..h.saturating_sub(1) {
            for c in 0..w.saturating_sub(1) {
                let (x, y) = (2 * c + 2, 2 * r + 2);
                let sides = [(x - 1, y), (x + 1, y), (x, y - 1), (x, y + 1)];
                if sides.iter().all(|&(a, b)| open[b * lw + a]) {
                    open[y * lw + x] = true;
                }
            }
        }
        Lattice {
            w: lw,
            h: lh,
            open,
            cuts,
        }
    }

    fn is_open(&self, x: usize, y: usize) -> bool {
        self.open[y * self.w + x]
    }
}

/// The immediate basin of root `root_index`: the 4-connected set of
/// `Root(root_index)` cells containing the cell of `(alpha, alpha)`.
///
/// Separator curves of other basins are thinner than a cell, so center
/// sampling alone bridges them. Two adjacent cells are therefore joined
/// only when no separator crosses the segment between their centers.
/// Holes are complement components of the same lattice that reach neither
/// the outer ring nor a small disc around a focal point, where slivers of
/// other basins pinch to a point.
pub fn immediate_basin(
    grid: &BasinGrid,
    sys: &SecantSystem,
    root_index: usize,
) -> Result<ImmediateBasin, BasinError> {
    let alpha = sys
        .roots()
        .get(root_index)
        .ok_or(BasinError::RootIndex(root_index))?;
    let (sc, sr) = grid
        .cell_of(Point::new(alpha, alpha))
        .ok_or(BasinError::SeedOutOfBounds(alpha))?;
    let tag = CellTag::Root(root_index as u8);
    if grid.get(sc, sr).tag != tag {
        return Err(BasinError::SeedNotInBasin(alpha));
    }
    let (w, h) = (grid.width, grid.height);
    let lattice = separated_lattice(grid, sys, root_index);
    let lw = lattice.w;
    let reached = flood(lattice.w, lattice.h, &[(2 * sc + 1, 2 * sr + 1)], |x, y| {
        lattice.is_open(x, y)
    });

    let mut mask = vec![false; w * h];
    let mut boundary_cells = Vec::new();
    for r in 0..h {
        for c in 0..w {
            let (x, y) = (2 * c + 1, 2 * r + 1);
            if !reached[y * lw + x] {
                continue;
            }
            mask[r * w + c] = true;
            let sides = [(x - 1, y), (x + 1, y), (x, y - 1), (x, y + 1)];
            if sides.iter().any(|&(a, b)| !reached[b * lw + a]) {
                boundary_cells.push((c, r));
            }
        }
    }

    let weight: Vec<usize> = (0..lattice.w * lattice.h)
        .map(|k| usize::from((k / lattice.w) % 2 == 1 && (k % lattice.w) % 2 == 1))
        .collect();
    let openings: Vec<(usize, usize)> = focal_cells(grid, sys, FOCAL_RADIUS)
        .into_iter()
        .flat_map(|(c, r)| {
            (0..3).flat_map(move |dy| (0..3).map(move |dx| (2 * c + dx, 2 * r + dy)))
        })
        .collect();
    let min_size = if w.max(h) < HOLE_NOISE_RESOLUTION { 2 } else { 1 };
    let hole_sizes =
        complement_components(&reached, &weight, lattice.w, lattice.h, min_size, &openings);

    Ok(ImmediateBasin {
        root_index,
        width: w,
        height: h,
        mask,
        hole_count: hole_sizes.len(),
        hole_sizes,
        boundary_cells,
        cut_edges: lattice.cuts,
    })
}

fn separated_lattice(grid: &BasinGrid, sys: &SecantSystem, root_index: usize) -> Lattice {
    let tag = CellTag::Root(root_index as u8);
    let signs = separator_signs(grid, sys, root_index);
    let w = grid.width;
    Lattice::build(
        w,
        grid.height,
        |c, r| grid.get(c, r).tag == tag,
        |(ac, ar), (bc, br)| is_cut(&signs[ar * w + ac], &signs[br * w + bc], SEPARATOR_LEVELS),
    )
}

/// Refinement factor and half-width (in cells) of the local window used by
/// [`refined_boundary_distance`].
pub const REFINE_FACTOR: usize = 8;
pub const REFINE_HALF_WINDOW: usize = 6;

/// Distance from `p` to the basin boundary, resolved on a local grid
/// `REFINE_FACTOR` times finer than `grid`.
///
/// The window spans `REFINE_HALF_WINDOW` coarse cells around `p`. Fine
/// cells of the root lying in coarse mask cells
/// seed a separated flood; the boundary is then the set of reached fine
/// cells with an unreached neighbour inside the window. Falls back to the
/// coarse distance when the window holds no seed.
pub fn refined_boundary_distance(
    ib: &ImmediateBasin,
    grid: &BasinGrid,
    sys: &SecantSystem,
    p: Point,
    params: &OrbitParams,
) -> f64 {
    let coarse = boundary_distance(ib, grid, p);
    let (cw, ch) = (grid.cell_width(), grid.cell_height());
    let half = REFINE_HALF_WINDOW as isize;
    let pc = ((p.x - grid.bounds.x_min) / cw).floor() as isize;
    let pr = ((grid.bounds.y_max - p.y) / ch).floor() as isize;
    let c0 = (pc - half).max(0) as usize;
    let r0 = (pr - half).max(0) as usize;
    let c1 = ((pc + half) as usize).min(grid.width - 1);
    let r1 = ((pr + half) as usize).min(grid.height - 1);
    if c0 > c1 || r0 > r1 {
        return coarse;
    }
    let bounds = Rect {
        x_min: grid.bounds.x_min + c0 as f64 * cw,
        x_max: grid.bounds.x_min + (c1 + 1) as f64 * cw,
        y_min: grid.bounds.y_max - (r1 + 1) as f64 * ch,
        y_max: grid.bounds.y_max - r0 as f64 * ch,
    };
    let (fw, fh) = ((c1 - c0 + 1) * REFINE_FACTOR, (r1 - r0 + 1) * REFINE_FACTOR);
    let Ok(fine) = compute_grid(sys, bounds, fw, fh, params) else {
        return coarse;
    };
    let tag = CellTag::Root(ib.root_index as u8);
    let lattice = separated_lattice(&fine, sys, ib.root_index);
    let seeds: Vec<(usize, usize)> = (0..fh)
        .flat_map(|r| (0..fw).map(move |c| (c, r)))
        .filter(|&(c, r)| {
            let (cc, cr) = (c0 + c / REFINE_FACTOR, r0 + r / REFINE_FACTOR);
            fine.get(c, r).tag == tag && ib.contains(cc, cr)
        })
        .map(|(c, r)| (2 * c + 1, 2 * r + 1))
        .collect();
    if seeds.is_empty() {
        return coarse;
    }
    let lw = lattice.w;
    let reached = flood(lattice.w, lattice.h, &seeds, |x, y| lattice.is_open(x, y));
    let mut best = f64::INFINITY;
    for r in 0..fh {
        for c in 0..fw {
            let (x, y) = (2 * c + 1, 2 * r + 1);
            if !reached[y * lw + x] {
                continue;
            }
            let ring = |a: usize, b: usize| a == 0 || b == 0 || a == lw - 1 || b == lattice.h - 1;
            let sides = [(x - 1, y), (x + 1, y), (x, y - 1), (x, y + 1)];
            if sides.iter().all(|&(a, b)| ring(a, b) || reached[b * lw + a]) {
                continue;
            }
            best = best.min(fine.cell_center(c, r).dist(&p));
        }
    }
    best.min(coarse)
}

/// Euclidean distance from `p` to the nearest boundary cell center.
pub fn boundary_distance(ib: &ImmediateBasin, grid: &BasinGrid, p: Point) -> f64 {
    ib.boundary_cells
        .iter()
        .map(|&(c, r)| grid.cell_center(c, r).dist(&p))
        .fold(f64::INFINITY, f64::min)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContainmentCheck {
    pub applicable: bool,
    pub holds: bool,
    /// Largest max-norm distance of a mask cell center outside the open square.
    pub max_violation: f64,
    pub note: Option<String>,
}

/// Whether the mask lies in the open square `(alpha0, alpha2)^2` around an
/// internal root, with one cell diagonal of slack.
pub fn check_containment_in_r(
    ib: &ImmediateBasin,
    grid: &BasinGrid,
    sys: &SecantSystem,
) -> ContainmentCheck {
    let triple = match sys.triple(ib.root_index) {
        Ok(t) => t,
        Err(e) => {
            return ContainmentCheck {
                applicable: false,
                holds: false,
                max_violation: f64::INFINITY,
                note: Some(format!("root is not internal ({e}); its immediate basin is unbounded")),
            }
        }
    };
    let r = triple.region();
    let mut worst = 0.0_f64;
    for row in 0..grid.height {
        for col in 0..grid.width {
            if !ib.contains(col, row) {
                continue;
            }
            let p = grid.cell_center(col, row);
            let dx = (r.x_min - p.x).max(p.x - r.x_max).max(0.0);
            let dy = (r.y_min - p.y).max(p.y - r.y_max).max(0.0);
            worst = worst.max(dx.max(dy));
        }
    }
    // Touching the raster edge means the basin may continue beyond it.
    let clipped = ib.boundary_cells.iter().any(|&(c, r)| {
        let p = grid.cell_center(c, r);
        (c == 0 || r == 0 || c + 1 == grid.width || r + 1 == grid.height) && !triple.region().contains_open(p)
    });
    let holds = worst <= grid.cell_diagonal() && !clipped;
    ContainmentCheck {
        applicable: true,
        holds,
        max_violation: worst,
        note: clipped.then(|| "mask reaches the raster edge outside R".to_string()),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FocalDistance {
    pub i: usize,
    pub j: usize,
    pub point: Point,
    /// Distance to the nearest boundary cell center of the mask.
    pub distance: f64,
    /// Same, resolved on the local refined grid.
    pub refined: f64,
    /// `refined` in units of the coarse cell diagonal.
    pub cells: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HexagonCheck {
    pub vertices: Vec<FocalDistance>,
    pub passes: bool,
}

/// Distances from the six focal points of the consecutive triple around
/// the root to the basin boundary; passes when all refined distances are
/// within two cell diagonals.
pub fn check_hexagon_vertices(
    ib: &ImmediateBasin,
    grid: &BasinGrid,
    sys: &SecantSystem,
    triple: &RootTriple,
    params: &OrbitParams,
) -> HexagonCheck {
    let roots = [triple.alpha0, triple.alpha1, triple.alpha2];
    let diag = grid.cell_diagonal();
    let mut vertices = Vec::new();
    for i in 0..3 {
        for j in 0..3 {
            if i == j {
                continue;
            }
            let point = Point::new(roots[i], roots[j]);
            let refined = refined_boundary_distance(ib, grid, sys, point, params);
            vertices.push(FocalDistance {
                i,
                j,
                point,
                distance: boundary_distance(ib, grid, point),
                refined,
                cells: refined / diag,
            });
        }
    }
    let passes = vertices.iter().all(|v| v.refined <= 2.0 * diag);
    HexagonCheck { vertices, passes }
}

/// Largest refined distance of the four orbit points of `cycle` to the
/// boundary.
pub fn boundary_cycle_distance(
    ib: &ImmediateBasin,
    grid: &BasinGrid,
    sys: &SecantSystem,
    cycle: &FourCycle,
    params: &OrbitParams,
) -> f64 {
    cycle
        .orbit_points()
        .iter()
        .map(|&p| refined_boundary_distance(ib, grid, sys, p, params))
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum InvarianceCheck {
    Checked { samples: usize, violations: usize },
    Skipped { reason: String },
}

/// Applies `S` to `samples` random mask cell centers and counts images
/// with no mask cell in their 3x3 cell neighbourhood.
pub fn forward_invariance_check(
    ib: &ImmediateBasin,
    grid: &BasinGrid,
    sys: &SecantSystem,
    samples: usize,
    seed: u64,
) -> InvarianceCheck {
    if ib.hole_count != 0 {
        return InvarianceCheck::Skipped {
            reason: format!("immediate basin has {} holes", ib.hole_count),
        };
    }
    let members: Vec<(usize, usize)> = (0..grid.height)
        .flat_map(|r| (0..grid.width).map(move |c| (c, r)))
        .filter(|&(c, r)| ib.contains(c, r))
        .collect();
    if members.is_empty() {
        return InvarianceCheck::Skipped {
            reason: "empty mask".into(),
        };
    }
    let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
    let mut violations = 0;
    let mut checked = 0;
    for _ in 0..samples {
        let (c, r) = members[rng.gen_range(0..members.len())];
        let Ok(img) = sys.step(grid.cell_center(c, r)) else {
            continue;
        };
        checked += 1;
        if !near_mask(ib, grid, img) {
            violations += 1;
        }
    }
    InvarianceCheck::Checked {
        samples: checked,
        violations,
    }
}

fn near_mask(ib: &ImmediateBasin, grid: &BasinGrid, p: Point) -> bool {
    let cw = grid.cell_width();
    let ch = grid.cell_height();
    for dy in [-1.0, 0.0, 1.0] {
        for dx in [-1.0, 0.0, 1.0] {
            let q = Point::new(p.x + dx * cw, p.y + dy * ch);
            if let Some((c, r)) = grid.cell_of(q) {
                if ib.contains(c, r) {
                    return true;
                }
            }
        }
    }
    false
}

/// Breadth-first re-derivation of the mask on the cell graph, independent
/// of the lattice fill used by [`immediate_basin`].
pub fn recheck_mask(ib: &ImmediateBasin, grid: &BasinGrid, sys: &SecantSystem) -> bool {
    let (w, h) = (grid.width, grid.height);
    let alpha = sys.roots().roots()[ib.root_index];
    let Some(seed) = grid.cell_of(Point::new(alpha, alpha)) else {
        return false;
    };
    let tag = CellTag::Root(ib.root_index as u8);
    let signs = separator_signs(grid, sys, ib.root_index);
    let mut seen = vec![false; w * h];
    let mut queue = VecDeque::from([seed]);
    seen[seed.1 * w + seed.0] = true;
    while let Some((c, r)) = queue.pop_front() {
        for (nc, nr) in neighbours4(c, r, w, h) {
            let k = nr * w + nc;
            if !seen[k] && grid.get(nc, nr).tag == tag && !is_cut(&signs[r * w + c], &signs[k], SEPARATOR_LEVELS) {
                seen[k] = true;
                queue.push_back((nc, nr));
            }
        }
    }
    seen == ib.mask
}

/// Summary of the immediate-basin analysis for reports.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ImmediateReport {
    pub root_index: usize,
    pub root: f64,
    pub width: usize,
    pub height: usize,
    pub bounds: [f64; 4],
    pub connectivity: &'static str,
    pub area_cells: usize,
    pub hole_count: usize,
    pub hole_sizes: Vec<usize>,
    pub boundary_cell_count: usize,
    pub containment: ContainmentCheck,
    pub hexagon: Option<HexagonCheck>,
    pub boundary_cycle: Option<BoundaryCycle>,
    pub forward_invariance: InvarianceCheck,
    pub caveat: &'static str,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundaryCycle {
    pub points: [f64; 4],
    pub distance: f64,
    pub cells: f64,
}

/// Runs every immediate-basin check. `cycle`, when given, is measured
/// against the boundary.
pub fn analyze_immediate(
    grid: &BasinGrid,
    sys: &SecantSystem,
    root_index: usize,
    cycle: Option<&FourCycle>,
    params: &OrbitParams,
    invariance_samples: usize,
) -> Result<(ImmediateBasin, ImmediateReport), BasinError> {
    let ib = immediate_basin(grid, sys, root_index)?;
    let containment = check_containment_in_r(&ib, grid, sys);
    let hexagon = sys
        .triple(root_index)
        .ok()
        .map(|t| check_hexagon_vertices(&ib, grid, sys, &t, params));
    let boundary_cycle = cycle.map(|c| {
        let d = boundary_cycle_distance(&ib, grid, sys, c, params);
        BoundaryCycle {
            points: c.points,
            distance: d,
            cells: d / grid.cell_diagonal(),
        }
    });
    let forward_invariance = forward_invariance_check(&ib, grid, sys, invariance_samples, 0x5eed);
    let report = ImmediateReport {
        root_index,
        root: sys.roots().roots()[root_index],
        width: grid.width,
        height: grid.height,
        bounds: [
            grid.bounds.x_min,
            grid.bounds.x_max,
            grid.bounds.y_min,
            grid.bounds.y_max,
        ],
        connectivity: "4-connected mask, 4-connected holes",
        area_cells: ib.area(),
        hole_count: ib.hole_count,
        hole_sizes: ib.hole_sizes.clone(),
        boundary_cell_count: ib.boundary_cells.len(),
        containment,
        hexagon,
        boundary_cycle,
        forward_invariance,
        caveat: "raster connectivity; piecewise smoothness of the outer boundary is not verified",
    };
    Ok((ib, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polynomial::Polynomial;

    fn t3() -> SecantSystem {
        SecantSystem::new(Polynomial::chebyshev(3)).unwrap()
    }

    #[test]
    fn holes_in_small_masks() {
        #[rustfmt::skip]
        let ring = [
            0, 0, 0, 0, 0,
            0, 1, 1, 1, 0,
            0, 1, 0, 1, 0,
            0, 1, 1, 1, 0,
            0, 0, 0, 0, 0,
        ].map(|v| v == 1);
        assert_eq!(count_holes(&ring, 5, 5, 1, &[]), vec![1]);
        assert!(count_holes(&ring, 5, 5, 2, &[]).is_empty());
        // A notch open to the frame is not a hole.
        #[rustfmt::skip]
        let cup = [
            1, 0, 1,
            1, 0, 1,
            1, 1, 1,
        ].map(|v| v == 1);
        assert!(count_holes(&cup, 3, 3, 1, &[]).is_empty());
        // Diagonal gaps do not connect the complement.
        #[rustfmt::skip]
        let pinched = [
            1, 1, 1, 0,
            1, 0, 1, 1,
            1, 1, 0, 1,
            0, 1, 1, 1,
        ].map(|v| v == 1);
        assert_eq!(count_holes(&pinched, 4, 4, 1, &[]).len(), 2);
    }

    #[test]
    fn grid_binary_round_trip() {
        let sys = t3();
        let g = compute_grid(&sys, Rect::square(-1.5, 1.5), 16, 8, &OrbitParams::default()).unwrap();
        let mut buf = Vec::new();
        g.write_binary(&mut buf).unwrap();
        assert_eq!(buf.len(), 4 + 8 + 32 + 16 * 8 * 3);
        assert_eq!(&buf[..4], b"SBG1");
        assert_eq!(BasinGrid::read_binary(&buf[..]).unwrap(), g);
    }

    #[test]
    fn cell_geometry() {
        let g = BasinGrid {
            bounds: Rect::new(0.0, 4.0, 0.0, 2.0),
            width: 4,
            height: 2,
            cells: vec![
                Cell {
                    tag: CellTag::NonConverged,
                    iterations: 0
                };
                8
            ],
        };
        assert_eq!(g.cell_center(0, 0), Point::new(0.5, 1.5));
        assert_eq!(g.cell_of(Point::new(3.9, 0.1)), Some((3, 1)));
        assert_eq!(g.cell_of(Point::new(4.0, 2.0)), Some((3, 0)));
        assert_eq!(g.cell_of(Point::new(5.0, 1.0)), None);
    }

    #[test]
    fn root_lines_land_in_two_steps() {
        let sys = t3();
        let g = compute_grid(&sys, Rect::square(-1.5, 1.5), 64, 64, &OrbitParams::default()).unwrap();
        for (i, &a) in sys.roots().roots().iter().enumerate() {
            let (_, row) = g.cell_of(Point::new(0.0, a)).unwrap();
            let yc = g.cell_center(0, row).y;
            // Only exact when the cell center sits on the root line.
            if (yc - a).abs() > 1e-12 {
                continue;
            }
            for col in 0..g.width {
                let c = g.get(col, row);
                if c.tag != CellTag::Singular {
                    assert_eq!(c.tag, CellTag::Root(i as u8));
                    assert!(c.iterations <= 2);
                }
            }
        }
    }
}
