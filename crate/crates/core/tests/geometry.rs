use proptest::prelude::*;
use srl_core::geometry::{
    cube_polygon_cover, read_tmesh, ring_triangulation, triangulate_level, write_tmesh, ConvexPolygon, CoverOutcome,
    CubePatch, Point, TriMesh,
};

fn square_mesh(level: usize) -> TriMesh {
    triangulate_level(&ConvexPolygon::unit_square(), level)
}

fn boundary_length(m: &TriMesh) -> f64 {
    m.boundary_edges.iter().map(|e| m.nodes[e.a].dist(m.nodes[e.b])).sum()
}

#[test]
fn square_counts() {
    let m0 = square_mesh(0);
    assert_eq!((m0.n_triangles(), m0.n_nodes()), (2, 4));
    let m1 = square_mesh(1);
    assert_eq!((m1.n_triangles(), m1.n_nodes()), (8, 9));
    let m3 = square_mesh(3);
    assert_eq!(m3.n_triangles(), 2 * 4usize.pow(3));
    assert!((m3.area() - 1.0).abs() < 1e-14);
    assert!((boundary_length(&m3) - 4.0).abs() < 1e-13);
}

#[test]
fn gon64_area() {
    let poly = ConvexPolygon::regular_ngon(64, 1.0).unwrap();
    let exact = 32.0 * (2.0 * std::f64::consts::PI / 64.0).sin();
    assert!((poly.area() - exact).abs() < 1e-12);
    assert!((exact - 3.13655).abs() < 1e-5);
    for level in 0..2 {
        let m = triangulate_level(&poly, level);
        assert!((m.area() - exact).abs() < 1e-11, "level {level}");
    }
}

#[test]
fn ring_mesh_is_valid() {
    let poly = ConvexPolygon::regular_ngon(64, 1.0).unwrap();
    let m = ring_triangulation(&poly);
    for t in 0..m.n_triangles() {
        assert!(m.triangle_area(t) > 0.0);
        assert!(poly.contains(m.centroid(t), 1e-12));
    }
    // boundary nodes sit on the polygon boundary
    let perimeter: f64 = poly.faces().iter().map(|f| f.length).sum();
    assert!((boundary_length(&m) - perimeter).abs() < 1e-12);
    // spokes are no longer much longer than the faces
    let face = poly.faces()[0].length;
    let hmax = (0..m.n_triangles()).map(|t| m.triangle_diameter(t)).fold(0.0, f64::max);
    assert!(hmax < 3.0 * face, "h {hmax} face {face}");
}

#[test]
fn refinement_quarters_h() {
    let poly = ConvexPolygon::regular_ngon(5, 1.0).unwrap();
    let a = triangulate_level(&poly, 1);
    let b = a.refine_uniform();
    assert_eq!(b.n_triangles(), 4 * a.n_triangles());
    assert!((b.h() - 0.5 * a.h()).abs() < 1e-14);
    assert!((a.area() - b.area()).abs() < 1e-13);
}

#[test]
fn polygon_rejects_nonconvex() {
    let pts = vec![Point::new(0.0, 0.0), Point::new(1.0, 0.0), Point::new(0.2, 0.2), Point::new(0.0, 1.0)];
    assert!(ConvexPolygon::new(pts).is_err());
    assert!(ConvexPolygon::new(vec![Point::new(0.0, 0.0), Point::new(1.0, 0.0)]).is_err());
}

#[test]
fn tmesh_round_trip() {
    let m = triangulate_level(&ConvexPolygon::regular_ngon(7, 0.8).unwrap(), 2);
    let back = read_tmesh(&write_tmesh(&m)).unwrap();
    assert_eq!(back.triangles, m.triangles);
    assert_eq!(back.boundary_edges, m.boundary_edges);
    for (p, q) in m.nodes.iter().zip(&back.nodes) {
        assert_eq!((p.x, p.y), (q.x, q.y));
    }
}

#[test]
fn tmesh_rejects_garbage() {
    assert!(read_tmesh("not a mesh").is_err());
    let text = write_tmesh(&square_mesh(1));
    let truncated: String = text.lines().take(4).map(|l| format!("{l}\n")).collect();
    assert!(read_tmesh(&truncated).is_err());
}

#[test]
fn cube_cover_of_corner() {
    // centroids in [0, 1/2]^2 are selected
    let m = square_mesh(3);
    let cover = cube_polygon_cover(&m, &CubePatch::new(Point::new(0.0, 0.0), 1.0).unwrap()).covered().unwrap();
    assert!((cover.measure - 0.25).abs() < 1e-14);
    assert!(!cover.domain_boundary_edges.is_empty());
    let far = CubePatch::new(Point::new(5.0, 5.0), 1.0).unwrap();
    assert_eq!(cube_polygon_cover(&m, &far), CoverOutcome::Empty);
    assert!(CubePatch::new(Point::new(0.0, 0.0), 0.0).is_err());
}

#[test]
fn interior_patch_has_no_domain_boundary() {
    let m = square_mesh(4);
    let c = cube_polygon_cover(&m, &CubePatch::new(Point::new(0.5, 0.5), 0.25).unwrap()).covered().unwrap();
    assert!(c.domain_boundary_edges.is_empty());
    assert!(!c.interface_edges.is_empty());
}

proptest! {
    #[test]
    fn cube_cover_is_monotone(x in 0.0..1.0f64, y in 0.0..1.0f64, d in 0.05..0.8f64, k in 1.0..4.0f64) {
        let m = square_mesh(3);
        let q = CubePatch::new(Point::new(x, y), d).unwrap();
        let small = cube_polygon_cover(&m, &q).covered();
        let big = cube_polygon_cover(&m, &q.dilate(k)).covered();
        if let Some(s) = small {
            let b = big.expect("dilated patch covers at least as much");
            prop_assert!(s.elements.iter().all(|t| b.elements.contains(t)));
            prop_assert!(s.measure <= b.measure + 1e-14);
        }
    }

    #[test]
    fn ngon_meshes_tile_the_polygon(n in 3usize..12, r in 0.3..2.0f64, level in 0usize..3) {
        let poly = ConvexPolygon::regular_ngon(n, r).unwrap();
        let m = triangulate_level(&poly, level);
        prop_assert!((m.area() - poly.area()).abs() < 1e-12 * poly.area().max(1.0));
        for t in 0..m.n_triangles() {
            prop_assert!(m.triangle_area(t) > 0.0);
        }
    }
}
