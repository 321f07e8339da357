use std::path::PathBuf;

use secant_core::basins::{compute_grid, immediate_basin};
use secant_core::render::{delta_s_contour, render, Overlays, Palette};
use secant_core::{OrbitParams, Polynomial, Rect, SecantSystem};

const N: usize = 96;

fn t3_image() -> Vec<u8> {
    let sys = SecantSystem::new(Polynomial::chebyshev(3)).unwrap();
    let bounds = Rect::square(-1.2, 1.2);
    let grid = compute_grid(&sys, bounds, N, N, &OrbitParams::default()).unwrap();
    let ib = immediate_basin(&grid, &sys, 1).unwrap();
    let overlays = Overlays {
        immediate: Some(&ib),
        delta_s: delta_s_contour(&sys, bounds, N),
        curves: Vec::new(),
        focal_points: sys.focal_points().iter().map(|f| f.location).collect(),
        cycle_points: vec![
            secant_core::Point::new(-0.68819, -0.16246),
            secant_core::Point::new(-0.16246, 0.68819),
            secant_core::Point::new(0.68819, 0.16246),
            secant_core::Point::new(0.16246, -0.68819),
        ],
    };
    let img = render(&grid, &Palette::for_roots(3), &overlays).unwrap();
    let mut out = Vec::new();
    img.write_ppm(&mut out).unwrap();
    out
}

#[test]
fn t3_render_matches_golden() {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden/t3_96.ppm");
    let img = t3_image();
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        std::fs::write(&path, &img).unwrap();
    }
    let golden = std::fs::read(&path).expect("golden file; regenerate with UPDATE_GOLDEN=1");
    assert!(img == golden, "render differs from {}", path.display());
    assert_eq!(img, t3_image());
}

#[test]
fn t3_render_uses_three_basin_colors_and_singular_pixels() {
    let sys = SecantSystem::new(Polynomial::chebyshev(3)).unwrap();
    // 514 cells on [-1, 1] put cell centers on the critical diagonal points
    // (+-1/2, +-1/2), where q = p' = 0.
    let n = 514;
    let grid = compute_grid(&sys, Rect::square(-1.0, 1.0), n, n, &OrbitParams::default()).unwrap();
    let pal = Palette::for_roots(3);
    let img = render(&grid, &pal, &Overlays::default()).unwrap();
    let px: Vec<[u8; 3]> = img.pixels.chunks(3).map(|c| [c[0], c[1], c[2]]).collect();
    for c in &pal.roots {
        assert!(px.contains(c));
    }
    let singular: Vec<(usize, usize)> = (0..n * n)
        .filter(|&k| px[k] == pal.singular)
        .map(|k| (k % n, k / n))
        .collect();
    assert!(!singular.is_empty());
    // Row 0 is the top edge, so the diagonal runs from bottom left to top right.
    assert!(singular.iter().any(|&(c, r)| c + r == n - 1));
}
