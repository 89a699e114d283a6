//! Structured triangulations of axis-aligned rectangles with tagged
//! boundary edges.
//!
//! Each subdomain carries its own lattice resolution, so two subdomains
//! sharing an interface generally have non-matching grids there. Vertices
//! are numbered in row-major lattice order and every cell is split into
//! two counter-clockwise triangles by the configured diagonal rule.

use crate::error::{Error, Result};
use std::collections::HashMap;
use std::fmt::Write as _;

pub const GEOM_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dist(&self, other: &Point) -> f64 {
        ((self.x - other.x).powi(2) + (self.y - other.y).powi(2)).sqrt()
    }
}

/// Axis-aligned rectangle, x0 < x1 and y0 < y1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub x0: f64,
    pub y0: f64,
    pub x1: f64,
    pub y1: f64,
}

impl Rect {
    pub fn new(x0: f64, y0: f64, x1: f64, y1: f64) -> Self {
        assert!(x0 < x1 && y0 < y1, "degenerate rectangle");
        Self { x0, y0, x1, y1 }
    }

    pub fn area(&self) -> f64 {
        (self.x1 - self.x0) * (self.y1 - self.y0)
    }

    fn sides(&self) -> [(Point, Point); 4] {
        [
            (Point::new(self.x0, self.y0), Point::new(self.x1, self.y0)), // bottom
            (Point::new(self.x1, self.y0), Point::new(self.x1, self.y1)), // right
            (Point::new(self.x0, self.y1), Point::new(self.x1, self.y1)), // top
            (Point::new(self.x0, self.y0), Point::new(self.x0, self.y1)), // left
        ]
    }
}

/// Identifier of an interface between two subdomains.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct InterfaceId(pub usize);

impl std::fmt::Display for InterfaceId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Declaration of a straight, axis-aligned interface segment shared by two
/// subdomains. The segment endpoints are normalized so `a` precedes `b`
/// lexicographically; arclength along the interface is measured from `a`
/// on both sides, which keeps the two trace parameterizations consistent.
/// By convention the interface normal points from the lower-indexed to the
/// higher-indexed subdomain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterfaceDecl {
    pub id: InterfaceId,
    pub a: Point,
    pub b: Point,
    pub left_subdomain: usize,
    pub right_subdomain: usize,
}

impl InterfaceDecl {
    pub fn new(id: InterfaceId, a: Point, b: Point, left: usize, right: usize) -> Result<Self> {
        let axis_aligned =
            (a.x - b.x).abs() <= GEOM_TOL || (a.y - b.y).abs() <= GEOM_TOL;
        if !axis_aligned || a.dist(&b) <= GEOM_TOL {
            return Err(Error::InterfaceMismatch(format!(
                "interface {id} segment must be axis-aligned and non-degenerate"
            )));
        }
        let (a, b) = if (a.x, a.y) <= (b.x, b.y) { (a, b) } else { (b, a) };
        Ok(Self {
            id,
            a,
            b,
            left_subdomain: left,
            right_subdomain: right,
        })
    }

    pub fn length(&self) -> f64 {
        self.a.dist(&self.b)
    }

    pub fn touches(&self, subdomain: usize) -> bool {
        self.left_subdomain == subdomain || self.right_subdomain == subdomain
    }

    /// Arclength of `p` from endpoint `a`, or None if `p` is off the segment.
    pub fn arclength_of(&self, p: Point) -> Option<f64> {
        let vertical = (self.a.x - self.b.x).abs() <= GEOM_TOL;
        if vertical {
            if (p.x - self.a.x).abs() > GEOM_TOL {
                return None;
            }
            let s = p.y - self.a.y;
            (-GEOM_TOL..=self.length() + GEOM_TOL)
                .contains(&s)
                .then_some(s.clamp(0.0, self.length()))
        } else {
            if (p.y - self.a.y).abs() > GEOM_TOL {
                return None;
            }
            let s = p.x - self.a.x;
            (-GEOM_TOL..=self.length() + GEOM_TOL)
                .contains(&s)
                .then_some(s.clamp(0.0, self.length()))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BoundaryTag {
    Exterior,
    Interface(InterfaceId),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryEdge {
    pub vertices: [usize; 2],
    pub tag: BoundaryTag,
}

/// Which diagonal splits each lattice cell into two triangles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DiagonalRule {
    /// Every cell uses the diagonal from its lower-left to upper-right corner.
    #[default]
    SameDirection,
    /// The diagonal direction alternates in a checkerboard pattern.
    Alternating,
}

impl std::fmt::Display for DiagonalRule {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            DiagonalRule::SameDirection => write!(f, "same"),
            DiagonalRule::Alternating => write!(f, "alternating"),
        }
    }
}

/// Conforming triangulation of one subdomain.
#[derive(Debug, Clone)]
pub struct Mesh2D {
    pub vertices: Vec<Point>,
    /// Counter-clockwise vertex index triples.
    pub triangles: Vec<[usize; 3]>,
    pub boundary_edges: Vec<BoundaryEdge>,
    /// Max triangle diameter.
    pub h_max: f64,
}

fn triangle_diameter(p0: Point, p1: Point, p2: Point) -> f64 {
    p0.dist(&p1).max(p1.dist(&p2)).max(p2.dist(&p0))
}

fn signed_area(p0: Point, p1: Point, p2: Point) -> f64 {
    0.5 * ((p1.x - p0.x) * (p2.y - p0.y) - (p2.x - p0.x) * (p1.y - p0.y))
}

impl Mesh2D {
    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn triangle_area(&self, t: usize) -> f64 {
        let [i, j, k] = self.triangles[t];
        signed_area(self.vertices[i], self.vertices[j], self.vertices[k])
    }

    pub fn area(&self) -> f64 {
        (0..self.triangles.len()).map(|t| self.triangle_area(t)).sum()
    }

    /// Structural sanity checks: positive orientation, interior edges
    /// shared by exactly two triangles, boundary edges by exactly one.
    pub fn validate(&self) -> Result<()> {
        for t in 0..self.triangles.len() {
            if self.triangle_area(t) <= 0.0 {
                return Err(Error::InvalidMesh(format!(
                    "triangle {t} has non-positive area"
                )));
            }
        }
        let mut edge_count: HashMap<(usize, usize), usize> = HashMap::new();
        for tri in &self.triangles {
            for e in 0..3 {
                let a = tri[e];
                let b = tri[(e + 1) % 3];
                let key = (a.min(b), a.max(b));
                *edge_count.entry(key).or_insert(0) += 1;
            }
        }
        let mut boundary_from_tris = 0usize;
        for (&_e, &c) in &edge_count {
            match c {
                1 => boundary_from_tris += 1,
                2 => {}
                c => {
                    return Err(Error::InvalidMesh(format!(
                        "edge shared by {c} triangles"
                    )))
                }
            }
        }
        if boundary_from_tris != self.boundary_edges.len() {
            return Err(Error::InvalidMesh(format!(
                "boundary edge list has {} entries, triangulation has {}",
                self.boundary_edges.len(),
                boundary_from_tris
            )));
        }
        for be in &self.boundary_edges {
            let key = (be.vertices[0].min(be.vertices[1]), be.vertices[0].max(be.vertices[1]));
            if edge_count.get(&key) != Some(&1) {
                return Err(Error::InvalidMesh(
                    "tagged boundary edge is not a boundary edge of the triangulation".into(),
                ));
            }
        }
        Ok(())
    }

    /// Plain-text dump: `mesh2d v1 <nv> <nt> <nb>`, vertex lines, triangle
    /// lines, then boundary lines `i j tag` with tag `exterior` or
    /// `interface:<id>`.
    pub fn dump(&self) -> String {
        let mut s = String::new();
        writeln!(
            s,
            "mesh2d v1 {} {} {}",
            self.vertices.len(),
            self.triangles.len(),
            self.boundary_edges.len()
        )
        .unwrap();
        for v in &self.vertices {
            writeln!(s, "{:.17e} {:.17e}", v.x, v.y).unwrap();
        }
        for t in &self.triangles {
            writeln!(s, "{} {} {}", t[0], t[1], t[2]).unwrap();
        }
        for b in &self.boundary_edges {
            let tag = match b.tag {
                BoundaryTag::Exterior => "exterior".to_string(),
                BoundaryTag::Interface(id) => format!("interface:{id}"),
            };
            writeln!(s, "{} {} {}", b.vertices[0], b.vertices[1], tag).unwrap();
        }
        s
    }
}

/// Generate the uniform lattice triangulation of `rect` with `nx` by `ny`
/// cells. Boundary edges lying on a declared interface of `subdomain` are
/// tagged with that interface id, everything else on the rectangle
/// boundary is tagged exterior.
pub fn generate_structured(
    rect: Rect,
    nx: usize,
    ny: usize,
    diag: DiagonalRule,
    interfaces: &[InterfaceDecl],
    subdomain: usize,
) -> Result<Mesh2D> {
    if nx == 0 || ny == 0 {
        return Err(Error::InvalidMesh("zero cell count".into()));
    }
    let own: Vec<&InterfaceDecl> = interfaces.iter().filter(|d| d.touches(subdomain)).collect();
    // every declared interface of this subdomain must lie on one rectangle side
    for d in &own {
        let on_side = rect.sides().iter().any(|(sa, sb)| {
            let along = |p: Point| -> bool {
                // p on segment [sa, sb] (axis-aligned)
                if (sa.x - sb.x).abs() <= GEOM_TOL {
                    (p.x - sa.x).abs() <= GEOM_TOL
                        && p.y >= sa.y.min(sb.y) - GEOM_TOL
                        && p.y <= sa.y.max(sb.y) + GEOM_TOL
                } else {
                    (p.y - sa.y).abs() <= GEOM_TOL
                        && p.x >= sa.x.min(sb.x) - GEOM_TOL
                        && p.x <= sa.x.max(sb.x) + GEOM_TOL
                }
            };
            along(d.a) && along(d.b)
        });
        if !on_side {
            return Err(Error::InterfaceMismatch(format!(
                "interface {} does not lie on a side of subdomain {} rect",
                d.id, subdomain
            )));
        }
    }

    let dx = (rect.x1 - rect.x0) / nx as f64;
    let dy = (rect.y1 - rect.y0) / ny as f64;
    let idx = |i: usize, j: usize| j * (nx + 1) + i;

    let mut vertices = Vec::with_capacity((nx + 1) * (ny + 1));
    for j in 0..=ny {
        for i in 0..=nx {
            vertices.push(Point::new(rect.x0 + i as f64 * dx, rect.y0 + j as f64 * dy));
        }
    }

    let mut triangles = Vec::with_capacity(2 * nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            let v00 = idx(i, j);
            let v10 = idx(i + 1, j);
            let v01 = idx(i, j + 1);
            let v11 = idx(i + 1, j + 1);
            let up_right = match diag {
                DiagonalRule::SameDirection => true,
                DiagonalRule::Alternating => (i + j) % 2 == 0,
            };
            if up_right {
                triangles.push([v00, v10, v11]);
                triangles.push([v00, v11, v01]);
            } else {
                triangles.push([v00, v10, v01]);
                triangles.push([v10, v11, v01]);
            }
        }
    }

    let tag_of = |a: Point, b: Point| -> BoundaryTag {
        for d in &own {
            if d.arclength_of(a).is_some() && d.arclength_of(b).is_some() {
                return BoundaryTag::Interface(d.id);
            }
        }
        BoundaryTag::Exterior
    };
    let mut boundary_edges = Vec::with_capacity(2 * (nx + ny));
    for i in 0..nx {
        let (a, b) = (idx(i, 0), idx(i + 1, 0));
        boundary_edges.push(BoundaryEdge {
            vertices: [a, b],
            tag: tag_of(vertices[a], vertices[b]),
        });
        let (a, b) = (idx(i, ny), idx(i + 1, ny));
        boundary_edges.push(BoundaryEdge {
            vertices: [a, b],
            tag: tag_of(vertices[a], vertices[b]),
        });
    }
    for j in 0..ny {
        let (a, b) = (idx(0, j), idx(0, j + 1));
        boundary_edges.push(BoundaryEdge {
            vertices: [a, b],
            tag: tag_of(vertices[a], vertices[b]),
        });
        let (a, b) = (idx(nx, j), idx(nx, j + 1));
        boundary_edges.push(BoundaryEdge {
            vertices: [a, b],
            tag: tag_of(vertices[a], vertices[b]),
        });
    }

    let h_max = (dx * dx + dy * dy).sqrt();
    Ok(Mesh2D {
        vertices,
        triangles,
        boundary_edges,
        h_max,
    })
}

/// Split every triangle into four by its edge midpoints. Child boundary
/// edges inherit the parent tag; h_max halves.
pub fn refine_uniform(mesh: &Mesh2D) -> Mesh2D {
    let mut vertices = mesh.vertices.clone();
    let mut midpoint: HashMap<(usize, usize), usize> = HashMap::new();
    let mut mid = |a: usize, b: usize, vertices: &mut Vec<Point>| -> usize {
        let key = (a.min(b), a.max(b));
        *midpoint.entry(key).or_insert_with(|| {
            let pa = vertices[a];
            let pb = vertices[b];
            vertices.push(Point::new(0.5 * (pa.x + pb.x), 0.5 * (pa.y + pb.y)));
            vertices.len() - 1
        })
    };

    let mut triangles = Vec::with_capacity(4 * mesh.triangles.len());
    for tri in &mesh.triangles {
        let [a, b, c] = *tri;
        let ab = mid(a, b, &mut vertices);
        let bc = mid(b, c, &mut vertices);
        let ca = mid(c, a, &mut vertices);
        triangles.push([a, ab, ca]);
        triangles.push([ab, b, bc]);
        triangles.push([ca, bc, c]);
        triangles.push([ab, bc, ca]);
    }

    let mut boundary_edges = Vec::with_capacity(2 * mesh.boundary_edges.len());
    for be in &mesh.boundary_edges {
        let [a, b] = be.vertices;
        let m = mid(a, b, &mut vertices);
        boundary_edges.push(BoundaryEdge {
            vertices: [a, m],
            tag: be.tag,
        });
        boundary_edges.push(BoundaryEdge {
            vertices: [m, b],
            tag: be.tag,
        });
    }

    let mut h_max: f64 = 0.0;
    for tri in &triangles {
        h_max = h_max.max(triangle_diameter(
            vertices[tri[0]],
            vertices[tri[1]],
            vertices[tri[2]],
        ));
    }

    Mesh2D {
        vertices,
        triangles,
        boundary_edges,
        h_max,
    }
}

/// Vertices lying on the given interface, as strictly increasing arclength
/// coordinates measured from the segment start, endpoints included.
pub fn interface_trace_nodes(mesh: &Mesh2D, id: InterfaceId) -> Result<Vec<f64>> {
    interface_trace(mesh, id).map(|(coords, _)| coords)
}

/// As [`interface_trace_nodes`], additionally returning the mesh vertex
/// index of each trace node.
pub fn interface_trace(mesh: &Mesh2D, id: InterfaceId) -> Result<(Vec<f64>, Vec<usize>)> {
    let mut on_interface: Vec<usize> = Vec::new();
    for be in &mesh.boundary_edges {
        if be.tag == BoundaryTag::Interface(id) {
            for &v in &be.vertices {
                if !on_interface.contains(&v) {
                    on_interface.push(v);
                }
            }
        }
    }
    if on_interface.is_empty() {
        return Err(Error::UnknownInterface(id.0));
    }
    // collinearity: one coordinate is constant across all tagged vertices
    let xs: Vec<f64> = on_interface.iter().map(|&v| mesh.vertices[v].x).collect();
    let ys: Vec<f64> = on_interface.iter().map(|&v| mesh.vertices[v].y).collect();
    let span = |vals: &[f64]| {
        vals.iter().cloned().fold(f64::INFINITY, f64::min)
            ..=vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    };
    let xr = span(&xs);
    let yr = span(&ys);
    let x_const = xr.end() - xr.start() <= GEOM_TOL;
    let y_const = yr.end() - yr.start() <= GEOM_TOL;
    if !x_const && !y_const {
        return Err(Error::InvalidMesh(format!(
            "edges tagged interface {id} are not collinear"
        )));
    }
    let along: Vec<f64> = if x_const { ys } else { xs };
    let origin = along.iter().cloned().fold(f64::INFINITY, f64::min);
    let mut pairs: Vec<(f64, usize)> = along
        .iter()
        .zip(&on_interface)
        .map(|(&s, &v)| (s - origin, v))
        .collect();
    pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    for w in pairs.windows(2) {
        if w[1].0 - w[0].0 <= GEOM_TOL {
            return Err(Error::InvalidMesh(format!(
                "duplicate trace nodes on interface {id}"
            )));
        }
    }
    Ok((
        pairs.iter().map(|p| p.0).collect(),
        pairs.iter().map(|p| p.1).collect(),
    ))
}
