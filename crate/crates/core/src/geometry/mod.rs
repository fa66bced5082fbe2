//! Convex polygons, triangulations, mesh files and cube patches.

mod cube;
mod io;
mod mesh;
mod point;
mod polygon;

pub use cube::{cube_polygon_cover, CoverOutcome, CubeCover, CubePatch};
pub use io::{load_tmesh, read_tmesh, save_tmesh, write_tmesh};
pub use mesh::{base_triangulation, ring_triangulation, triangulate, triangulate_level, BoundaryEdge, TriMesh};
pub use point::Point;
pub use polygon::{ConvexPolygon, Face};
