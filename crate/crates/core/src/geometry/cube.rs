use super::{Point, TriMesh};
use crate::error::{Error, Result};

/// Axis-aligned square patch `Q(center, diameter)`.
///
/// The diameter is measured in the max-norm, so it equals the side length.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CubePatch {
    pub center: Point,
    pub diameter: f64,
}

impl CubePatch {
    pub fn new(center: Point, diameter: f64) -> Result<Self> {
        if !(diameter > 0.0 && diameter.is_finite()) || !center.is_finite() {
            return Err(Error::validation(format!("invalid cube patch diameter {diameter}")));
        }
        Ok(CubePatch { center, diameter })
    }

    pub fn dilate(&self, factor: f64) -> CubePatch {
        CubePatch {
            center: self.center,
            diameter: self.diameter * factor,
        }
    }

    pub fn contains(&self, p: Point) -> bool {
        let r = 0.5 * self.diameter * (1.0 + 1e-12);
        (p.x - self.center.x).abs() <= r && (p.y - self.center.y).abs() <= r
    }
}

/// Discrete cover of `Q ∩ Ω` by the elements whose centroid lies in `Q`.
#[derive(Clone, Debug, PartialEq)]
pub struct CubeCover {
    pub patch: CubePatch,
    pub elements: Vec<usize>,
    /// Indices into `mesh.boundary_edges` of edges on `Q ∩ ∂Ω`.
    pub domain_boundary_edges: Vec<usize>,
    /// Interior mesh edges separating covered from uncovered elements.
    pub interface_edges: Vec<(usize, usize)>,
    pub measure: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub enum CoverOutcome {
    Covered(CubeCover),
    /// No element centroid falls inside the patch.
    Empty,
}

impl CoverOutcome {
    pub fn covered(self) -> Option<CubeCover> {
        match self {
            CoverOutcome::Covered(c) => Some(c),
            CoverOutcome::Empty => None,
        }
    }
}

pub fn cube_polygon_cover(mesh: &TriMesh, patch: &CubePatch) -> CoverOutcome {
    let inside: Vec<bool> = (0..mesh.n_triangles())
        .map(|t| patch.contains(mesh.centroid(t)))
        .collect();
    let elements: Vec<usize> = (0..mesh.n_triangles()).filter(|&t| inside[t]).collect();
    if elements.is_empty() {
        return CoverOutcome::Empty;
    }
    let measure = elements.iter().map(|&t| mesh.triangle_area(t)).sum();
    let domain_boundary_edges = mesh
        .boundary_edges
        .iter()
        .enumerate()
        .filter(|(_, e)| patch.contains(mesh.nodes[e.a].midpoint(mesh.nodes[e.b])))
        .map(|(i, _)| i)
        .collect();
    let mut owner: std::collections::HashMap<(usize, usize), Vec<usize>> = Default::default();
    for (k, t) in mesh.triangles.iter().enumerate() {
        for e in 0..3 {
            let (a, b) = (t[e], t[(e + 1) % 3]);
            owner.entry((a.min(b), a.max(b))).or_default().push(k);
        }
    }
    let mut interface_edges: Vec<(usize, usize)> = owner
        .into_iter()
        .filter(|(_, ts)| ts.len() == 2 && inside[ts[0]] != inside[ts[1]])
        .map(|(e, _)| e)
        .collect();
    interface_edges.sort_unstable();
    CoverOutcome::Covered(CubeCover {
        patch: *patch,
        elements,
        domain_boundary_edges,
        interface_edges,
        measure,
    })
}
