//! PPM images of basin grids with overlays, the `delta_S` contour and
//! polyline CSV export.

use std::collections::HashMap;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use thiserror::Error;

use crate::basins::{BasinGrid, CellTag, ImmediateBasin};
use crate::geometry::{Point, Rect};
use crate::secant_map::{CriticalCurves, SecantSystem};

pub type Rgb = [u8; 3];

#[derive(Debug, Error)]
pub enum RenderError {
    #[error("i/o failure: {0}")]
    Io(#[from] io::Error),
    #[error("palette has {have} root colors, grid needs {need}")]
    PaletteTooSmall { have: usize, need: usize },
    #[error("root color {0:?} collides with a reserved color")]
    ReservedColor(Rgb),
}

const BASE_COLORS: [Rgb; 8] = [
    [70, 110, 190],
    [230, 160, 60],
    [90, 170, 100],
    [200, 80, 90],
    [150, 110, 190],
    [120, 190, 200],
    [210, 200, 90],
    [160, 120, 90],
];

#[derive(Debug, Clone, PartialEq)]
pub struct Palette {
    pub roots: Vec<Rgb>,
    pub non_converged: Rgb,
    pub singular: Rgb,
    pub highlight: Rgb,
    pub delta_s: Rgb,
    pub curve: Rgb,
    pub focal: Rgb,
    pub cycle: Rgb,
}

impl Palette {
    /// A palette with `n_roots` distinct root colors.
    pub fn for_roots(n_roots: usize) -> Palette {
        let mut roots: Vec<Rgb> = BASE_COLORS.iter().copied().take(n_roots).collect();
        // Beyond the fixed list, walk the hue circle by the golden angle.
        let mut k = 0usize;
        while roots.len() < n_roots {
            let hue = (k as f64 * 137.507_764) % 360.0;
            let c = hsv(hue, 0.55, 0.8);
            if !roots.contains(&c) {
                roots.push(c);
            }
            k += 1;
        }
        Palette {
            roots,
            non_converged: [0, 0, 0],
            singular: [255, 255, 255],
            highlight: [250, 235, 170],
            delta_s: [220, 30, 30],
            curve: [20, 120, 20],
            focal: [255, 0, 255],
            cycle: [0, 0, 160],
        }
    }

    pub fn validate(&self, n_roots: usize) -> Result<(), RenderError> {
        if self.roots.len() < n_roots {
            return Err(RenderError::PaletteTooSmall {
                have: self.roots.len(),
                need: n_roots,
            });
        }
        let reserved = [self.non_converged, self.singular, self.highlight];
        match self.roots.iter().find(|c| reserved.contains(c)) {
            Some(&c) => Err(RenderError::ReservedColor(c)),
            None => Ok(()),
        }
    }

    fn cell(&self, tag: CellTag) -> Rgb {
        match tag {
            CellTag::Root(i) => self.roots[i as usize],
            CellTag::NonConverged => self.non_converged,
            CellTag::Singular => self.singular,
        }
    }
}

fn hsv(h: f64, s: f64, v: f64) -> Rgb {
    let c = v * s;
    let hp = h / 60.0;
    let x = c * (1.0 - (hp % 2.0 - 1.0).abs());
    let (r, g, b) = match hp as u32 {
        0 => (c, x, 0.0),
        1 => (x, c, 0.0),
        2 => (0.0, c, x),
        3 => (0.0, x, c),
        4 => (x, 0.0, c),
        _ => (c, 0.0, x),
    };
    let m = v - c;
    let to = |t: f64| ((t + m) * 255.0).round() as u8;
    [to(r), to(g), to(b)]
}

/// Everything drawn over the basin colors, in drawing order.
#[derive(Debug, Clone, Default)]
pub struct Overlays<'a> {
    pub immediate: Option<&'a ImmediateBasin>,
    pub delta_s: Vec<Vec<Point>>,
    pub curves: Vec<Vec<Point>>,
    pub focal_points: Vec<Point>,
    pub cycle_points: Vec<Point>,
}

/// An RGB raster aligned with a grid.
pub struct Image {
    pub width: usize,
    pub height: usize,
    pub bounds: Rect,
    pub pixels: Vec<u8>,
}

impl Image {
    fn pixel_of(&self, p: Point) -> (isize, isize) {
        let c = (p.x - self.bounds.x_min) / self.bounds.width() * self.width as f64;
        let r = (self.bounds.y_max - p.y) / self.bounds.height() * self.height as f64;
        (c.floor() as isize, r.floor() as isize)
    }

    fn put(&mut self, c: isize, r: isize, color: Rgb) {
        if c < 0 || r < 0 || c as usize >= self.width || r as usize >= self.height {
            return;
        }
        let k = 3 * (r as usize * self.width + c as usize);
        self.pixels[k..k + 3].copy_from_slice(&color);
    }

    fn line(&mut self, a: (isize, isize), b: (isize, isize), color: Rgb) {
        // Bresenham.
        let (mut x, mut y) = a;
        let dx = (b.0 - a.0).abs();
        let dy = -(b.1 - a.1).abs();
        let sx = if a.0 < b.0 { 1 } else { -1 };
        let sy = if a.1 < b.1 { 1 } else { -1 };
        let mut err = dx + dy;
        loop {
            self.put(x, y, color);
            if (x, y) == b {
                break;
            }
            let e2 = 2 * err;
            if e2 >= dy {
                err += dy;
                x += sx;
            }
            if e2 <= dx {
                err += dx;
                y += sy;
            }
        }
    }

    fn polyline(&mut self, pts: &[Point], color: Rgb) {
        let limit = 4 * (self.width + self.height) as isize;
        for w in pts.windows(2) {
            let (a, b) = (self.pixel_of(w[0]), self.pixel_of(w[1]));
            // Skip jumps through a pole of the curve.
            if (a.0 - b.0).abs().max((a.1 - b.1).abs()) > limit {
                continue;
            }
            self.line(a, b, color);
        }
    }

    fn marker(&mut self, p: Point, half: isize, cross: bool, color: Rgb) {
        let (c, r) = self.pixel_of(p);
        for dy in -half..=half {
            for dx in -half..=half {
                if !cross || dx == 0 || dy == 0 {
                    self.put(c + dx, r + dy, color);
                }
            }
        }
    }

    pub fn write_ppm<W: Write>(&self, mut w: W) -> io::Result<()> {
        write!(w, "P6\n{} {}\n255\n", self.width, self.height)?;
        w.write_all(&self.pixels)?;
        w.flush()
    }
}

/// Paints `grid` and then the overlays: immediate-basin highlight, `delta_S`,
/// curves, focal points (5x5 crosses), cycle points (3x3 squares).
pub fn render(grid: &BasinGrid, palette: &Palette, overlays: &Overlays) -> Result<Image, RenderError> {
    let n_roots = grid
        .cells
        .iter()
        .filter_map(|c| match c.tag {
            CellTag::Root(i) => Some(i as usize + 1),
            _ => None,
        })
        .max()
        .unwrap_or(0);
    palette.validate(n_roots)?;
    let mut img = Image {
        width: grid.width,
        height: grid.height,
        bounds: grid.bounds,
        pixels: Vec::with_capacity(3 * grid.width * grid.height),
    };
    for r in 0..grid.height {
        for c in 0..grid.width {
            let highlighted = overlays
                .immediate
                .is_some_and(|ib| ib.width == grid.width && ib.contains(c, r));
            let color = if highlighted {
                palette.highlight
            } else {
                palette.cell(grid.get(c, r).tag)
            };
            img.pixels.extend_from_slice(&color);
        }
    }
    for line in &overlays.delta_s {
        img.polyline(line, palette.delta_s);
    }
    for line in &overlays.curves {
        img.polyline(line, palette.curve);
    }
    for &p in &overlays.focal_points {
        img.marker(p, 2, true, palette.focal);
    }
    for &p in &overlays.cycle_points {
        img.marker(p, 1, false, palette.cycle);
    }
    Ok(img)
}

pub fn render_ppm(
    grid: &BasinGrid,
    palette: &Palette,
    overlays: &Overlays,
    out: &Path,
) -> Result<(), RenderError> {
    let img = render(grid, palette, overlays)?;
    img.write_ppm(BufWriter::new(File::create(out)?))?;
    Ok(())
}

/// Zero contour of `q` in `bounds` by marching squares on a
/// `resolution x resolution` cell lattice, joined into polylines. Closed
/// curves repeat their first vertex at the end.
pub fn delta_s_contour(sys: &SecantSystem, bounds: Rect, resolution: usize) -> Vec<Vec<Point>> {
    let n = resolution.max(1);
    let m = n + 1;
    let xs: Vec<f64> = (0..m)
        .map(|i| bounds.x_min + bounds.width() * i as f64 / n as f64)
        .collect();
    let ys: Vec<f64> = (0..m)
        .map(|j| bounds.y_min + bounds.height() * j as f64 / n as f64)
        .collect();
    let v: Vec<f64> = (0..m * m).map(|k| sys.q(xs[k % m], ys[k / m])).collect();
    let val = |i: usize, j: usize| v[j * m + i];

    // Edge ids: horizontal (i,j)-(i+1,j) and vertical (i,j)-(i,j+1).
    let h_edge = |i: usize, j: usize| j * m + i;
    let v_edge = |i: usize, j: usize| m * m + j * m + i;
    let mut crossing: HashMap<usize, Point> = HashMap::new();
    let mut cross = |id: usize, a: (usize, usize), b: (usize, usize)| -> Option<usize> {
        let (va, vb) = (val(a.0, a.1), val(b.0, b.1));
        if (va > 0.0) == (vb > 0.0) {
            return None;
        }
        crossing.entry(id).or_insert_with(|| {
            let t = va / (va - vb);
            Point::new(
                xs[a.0] + t * (xs[b.0] - xs[a.0]),
                ys[a.1] + t * (ys[b.1] - ys[a.1]),
            )
        });
        Some(id)
    };

    let mut links: HashMap<usize, Vec<usize>> = HashMap::new();
    for j in 0..n {
        for i in 0..n {
            // Edges in counter-clockwise order: bottom, right, top, left.
            let e = [
                cross(h_edge(i, j), (i, j), (i + 1, j)),
                cross(v_edge(i + 1, j), (i + 1, j), (i + 1, j + 1)),
                cross(h_edge(i, j + 1), (i, j + 1), (i + 1, j + 1)),
                cross(v_edge(i, j), (i, j), (i, j + 1)),
            ];
            let hits: Vec<usize> = e.iter().flatten().copied().collect();
            let pairs: Vec<(usize, usize)> = match hits.len() {
                2 => vec![(hits[0], hits[1])],
                4 => {
                    // Saddle: resolve with the center value.
                    let center = sys.q(0.5 * (xs[i] + xs[i + 1]), 0.5 * (ys[j] + ys[j + 1]));
                    let bl_pos = val(i, j) > 0.0;
                    if (center > 0.0) == bl_pos {
                        vec![(hits[0], hits[1]), (hits[2], hits[3])]
                    } else {
                        vec![(hits[0], hits[3]), (hits[1], hits[2])]
                    }
                }
                _ => Vec::new(),
            };
            for (a, b) in pairs {
                links.entry(a).or_default().push(b);
                links.entry(b).or_default().push(a);
            }
        }
    }

    let mut ids: Vec<usize> = links.keys().copied().collect();
    ids.sort_unstable();
    let mut used: HashMap<usize, bool> = HashMap::new();
    let mut lines = Vec::new();
    // Open chains first, starting from their ends, then closed loops.
    let ends: Vec<usize> = ids.iter().copied().filter(|id| links[id].len() == 1).collect();
    for start in ends.into_iter().chain(ids.iter().copied()) {
        if used.contains_key(&start) {
            continue;
        }
        let mut chain = vec![start];
        used.insert(start, true);
        let mut cur = start;
        while let Some(&next) = links[&cur].iter().find(|k| !used.contains_key(k)) {
            used.insert(next, true);
            chain.push(next);
            cur = next;
        }
        if chain.len() > 2 && links[&cur].contains(&start) {
            chain.push(start);
        }
        lines.push(chain.iter().map(|id| crossing[id]).collect());
    }
    lines
}

/// Polylines as CSV with header `curve_id,x,y`.
pub fn write_polylines_csv<W: Write>(mut w: W, lines: &[Vec<Point>]) -> io::Result<()> {
    writeln!(w, "curve_id,x,y")?;
    for (id, line) in lines.iter().enumerate() {
        for p in line {
            writeln!(w, "{id},{},{}", p.x, p.y)?;
        }
    }
    w.flush()
}

/// `Theta` and `Gamma` samples as CSV with header `y,x_star,gamma`, where
/// `Theta = (x_star, y)` and `Gamma = (y, gamma)`.
pub fn write_critical_csv<W: Write>(mut w: W, curves: &CriticalCurves) -> io::Result<()> {
    writeln!(w, "y,x_star,gamma")?;
    for (t, g) in curves.theta.iter().zip(&curves.gamma) {
        writeln!(w, "{},{},{}", t.y, t.x, g.y)?;
    }
    w.flush()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basins::Cell;
    use crate::polynomial::Polynomial;

    fn t3() -> SecantSystem {
        SecantSystem::new(Polynomial::chebyshev(3)).unwrap()
    }

    #[test]
    fn two_cell_ppm() {
        let grid = BasinGrid {
            bounds: Rect::new(0.0, 2.0, 0.0, 1.0),
            width: 2,
            height: 1,
            cells: vec![
                Cell {
                    tag: CellTag::Root(0),
                    iterations: 3,
                },
                Cell {
                    tag: CellTag::NonConverged,
                    iterations: 500,
                },
            ],
        };
        let pal = Palette::for_roots(1);
        let mut out = Vec::new();
        render(&grid, &pal, &Overlays::default())
            .unwrap()
            .write_ppm(&mut out)
            .unwrap();
        let mut want = b"P6\n2 1\n255\n".to_vec();
        want.extend_from_slice(&pal.roots[0]);
        want.extend_from_slice(&[0, 0, 0]);
        assert_eq!(out, want);
    }

    #[test]
    fn palettes_are_distinct() {
        for n in [1, 3, 8, 20] {
            let p = Palette::for_roots(n);
            p.validate(n).unwrap();
            for (i, a) in p.roots.iter().enumerate() {
                assert!(p.roots[i + 1..].iter().all(|b| b != a));
            }
        }
        assert!(Palette::for_roots(2).validate(3).is_err());
    }

    #[test]
    fn t3_ellipse() {
        let sys = t3();
        let bounds = Rect::new(-1.2, 1.2, -1.2, 1.2);
        let res = 240;
        let lines = delta_s_contour(&sys, bounds, res);
        assert_eq!(lines.len(), 1);
        let line = &lines[0];
        assert_eq!(line.first(), line.last());
        let worst = line
            .iter()
            .map(|p| (4.0 * p.x * p.x + 4.0 * p.x * p.y + 4.0 * p.y * p.y - 3.0).abs())
            .fold(0.0, f64::max);
        // Linear interpolation error of a quadratic over one cell.
        let h = 2.4 / res as f64;
        assert!(worst <= 8.0 * h * h, "{worst}");

        let cell = h * 2f64.sqrt();
        let near = |t: Point| line.iter().any(|p| p.dist(&t) <= cell);
        assert!(near(Point::new(0.5, 0.5)));
        assert!(near(Point::new(-0.5, -0.5)));
        for f in sys.focal_points() {
            assert!(near(f.location), "{:?}", f.location);
        }
    }

    #[test]
    fn contour_vertices_respect_corner_bound() {
        let sys = SecantSystem::new("0.15,-0.05,0,-0.3333333333333333,0,0.2".parse().unwrap()).unwrap();
        let bounds = Rect::new(-1.6, 1.6, -1.6, 1.6);
        let n = 97;
        let h = 3.2 / n as f64;
        for line in delta_s_contour(&sys, bounds, n) {
            for p in line {
                let i = (((p.x - bounds.x_min) / h).floor() as usize).min(n - 1);
                let j = (((p.y - bounds.y_min) / h).floor() as usize).min(n - 1);
                let corners = [(0, 0), (1, 0), (0, 1), (1, 1)].map(|(a, b)| {
                    let x = bounds.x_min + (i + a) as f64 * h;
                    let y = bounds.y_min + (j + b) as f64 * h;
                    sys.q(x, y).abs()
                });
                let bound = corners.iter().copied().fold(0.0, f64::max);
                assert!(sys.q(p.x, p.y).abs() <= bound * (1.0 + 1e-9));
            }
        }
    }

    #[test]
    fn markers_clip_at_edges() {
        let bounds = Rect::new(0.0, 1.0, 0.0, 1.0);
        let mut img = Image {
            width: 4,
            height: 4,
            bounds,
            pixels: vec![0; 48],
        };
        img.marker(Point::new(0.0, 1.0), 2, true, [9, 9, 9]);
        let lit = img.pixels.chunks(3).filter(|p| p == &[9, 9, 9]).count();
        assert_eq!(lit, 5);
    }

    #[test]
    fn polyline_csv() {
        let mut out = Vec::new();
        write_polylines_csv(&mut out, &[vec![Point::new(0.5, 1.0)], vec![Point::new(-2.0, 0.25)]]).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), "curve_id,x,y\n0,0.5,1\n1,-2,0.25\n");
    }
}
