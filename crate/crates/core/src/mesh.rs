//! Structured conforming triangulations of `[-1,1]²`, uniform red refinement,
//! nested hierarchies, and the piecewise-constant two-valued coefficient.
//!
//! Conventions used throughout the crate:
//! - triangles are stored counterclockwise; local edge `k` is opposite local vertex `k`;
//! - the `+` side of an edge is the adjacent triangle with the smaller index and the
//!   stored unit normal points from `T⁺` to `T⁻` (outward on the boundary);
//! - coarse vertices keep their indices under refinement, edge midpoints follow in
//!   coarse edge order, and the children of triangle `t` are `4t..4t+3`.

use std::collections::HashMap;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{DgError, Result};

pub type Point = [f64; 2];

/// Vertices per side of the level-0 grid is `LEVEL0_SQUARES + 1`.
pub const LEVEL0_SQUARES: usize = 4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    /// Endpoints in the counterclockwise order of `T⁺`.
    pub vertices: [usize; 2],
    pub midpoint: Point,
    /// `|e| = h_e`.
    pub length: f64,
    pub plus: usize,
    /// `None` on the boundary.
    pub minus: Option<usize>,
    /// Local edge index of this edge inside `T⁺`.
    pub local_plus: usize,
    pub local_minus: Option<usize>,
    /// Unit normal from `T⁺` to `T⁻`.
    pub normal: Point,
}

impl Edge {
    pub fn is_boundary(&self) -> bool {
        self.minus.is_none()
    }
}

/// Where a vertex of a refined mesh came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum VertexOrigin {
    Vertex(usize),
    EdgeMidpoint(usize),
}

#[derive(Debug, Clone)]
pub struct Mesh {
    pub level: usize,
    /// Reference mesh size: the side of the structured grid squares.
    pub h: f64,
    pub vertices: Vec<Point>,
    pub triangles: Vec<[usize; 3]>,
    pub edges: Vec<Edge>,
    /// `triangle_edges[t][k]` is the edge opposite local vertex `k`.
    pub triangle_edges: Vec<[usize; 3]>,
    /// Fine triangle to parent triangle; empty on level 0.
    pub triangle_parent: Vec<usize>,
    /// Fine vertex to coarse entity; empty on level 0.
    pub vertex_origin: Vec<VertexOrigin>,
    interior_edge_index: Vec<Option<usize>>,
    interior_edges: Vec<usize>,
    boundary_vertex: Vec<bool>,
    interior_vertex_index: Vec<Option<usize>>,
    interior_vertices: Vec<usize>,
}

impl Mesh {
    /// `n × n` squares on `[-1,1]²`, each cut by its lower-left to upper-right diagonal.
    pub fn structured(n: usize) -> Self {
        assert!(n >= 1, "need at least one square per side");
        let side = 2.0 / n as f64;
        let mut vertices = Vec::with_capacity((n + 1) * (n + 1));
        for j in 0..=n {
            for i in 0..=n {
                vertices.push([-1.0 + side * i as f64, -1.0 + side * j as f64]);
            }
        }
        let id = |i: usize, j: usize| j * (n + 1) + i;
        let mut triangles = Vec::with_capacity(2 * n * n);
        for j in 0..n {
            for i in 0..n {
                let (v00, v10, v11, v01) = (id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1));
                triangles.push([v00, v10, v11]);
                triangles.push([v00, v11, v01]);
            }
        }
        Self::from_parts(0, side, vertices, triangles, Vec::new(), Vec::new())
    }

    fn from_parts(
        level: usize,
        h: f64,
        vertices: Vec<Point>,
        triangles: Vec<[usize; 3]>,
        triangle_parent: Vec<usize>,
        vertex_origin: Vec<VertexOrigin>,
    ) -> Self {
        let mut edges: Vec<Edge> = Vec::with_capacity(triangles.len() * 3 / 2 + 1);
        let mut triangle_edges = vec![[usize::MAX; 3]; triangles.len()];
        let mut lookup: HashMap<(usize, usize), usize> = HashMap::with_capacity(triangles.len() * 2);
        for (t, tri) in triangles.iter().enumerate() {
            for k in 0..3 {
                let p = tri[(k + 1) % 3];
                let q = tri[(k + 2) % 3];
                let key = (p.min(q), p.max(q));
                match lookup.get(&key) {
                    Some(&e) => {
                        let edge = &mut edges[e];
                        assert!(edge.minus.is_none(), "edge shared by more than two triangles");
                        edge.minus = Some(t);
                        edge.local_minus = Some(k);
                        triangle_edges[t][k] = e;
                    }
                    None => {
                        let (a, b) = (vertices[p], vertices[q]);
                        let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
                        let length = dx.hypot(dy);
                        let e = edges.len();
                        edges.push(Edge {
                            vertices: [p, q],
                            midpoint: [0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])],
                            length,
                            plus: t,
                            minus: None,
                            local_plus: k,
                            local_minus: None,
                            normal: [dy / length, -dx / length],
                        });
                        lookup.insert(key, e);
                        triangle_edges[t][k] = e;
                    }
                }
            }
        }

        let mut boundary_vertex = vec![false; vertices.len()];
        let mut interior_edge_index = vec![None; edges.len()];
        let mut interior_edges = Vec::new();
        for (e, edge) in edges.iter().enumerate() {
            if edge.is_boundary() {
                boundary_vertex[edge.vertices[0]] = true;
                boundary_vertex[edge.vertices[1]] = true;
            } else {
                interior_edge_index[e] = Some(interior_edges.len());
                interior_edges.push(e);
            }
        }
        let mut interior_vertex_index = vec![None; vertices.len()];
        let mut interior_vertices = Vec::new();
        for (v, &b) in boundary_vertex.iter().enumerate() {
            if !b {
                interior_vertex_index[v] = Some(interior_vertices.len());
                interior_vertices.push(v);
            }
        }

        Self {
            level,
            h,
            vertices,
            triangles,
            edges,
            triangle_edges,
            triangle_parent,
            vertex_origin,
            interior_edge_index,
            interior_edges,
            boundary_vertex,
            interior_vertex_index,
            interior_vertices,
        }
    }

    /// Red refinement: every triangle is split into four congruent children
    /// through its edge midpoints.
    pub fn refine(&self) -> Mesh {
        let nv = self.vertices.len();
        let mut vertices = self.vertices.clone();
        let mut vertex_origin: Vec<VertexOrigin> = (0..nv).map(VertexOrigin::Vertex).collect();
        for (e, edge) in self.edges.iter().enumerate() {
            vertices.push(edge.midpoint);
            vertex_origin.push(VertexOrigin::EdgeMidpoint(e));
        }
        let mut triangles = Vec::with_capacity(4 * self.triangles.len());
        let mut triangle_parent = Vec::with_capacity(4 * self.triangles.len());
        for (t, &[a, b, c]) in self.triangles.iter().enumerate() {
            let [e0, e1, e2] = self.triangle_edges[t];
            let (m0, m1, m2) = (nv + e0, nv + e1, nv + e2);
            triangles.push([a, m2, m1]);
            triangles.push([m2, b, m0]);
            triangles.push([m1, m0, c]);
            triangles.push([m0, m1, m2]);
            triangle_parent.extend([t; 4]);
        }
        Self::from_parts(self.level + 1, 0.5 * self.h, vertices, triangles, triangle_parent, vertex_origin)
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn n_interior_edges(&self) -> usize {
        self.interior_edges.len()
    }

    pub fn n_boundary_edges(&self) -> usize {
        self.edges.len() - self.interior_edges.len()
    }

    /// Dimension of the piecewise-linear discontinuous space, `3·#triangles`.
    pub fn dg_dofs(&self) -> usize {
        3 * self.triangles.len()
    }

    pub fn interior_edges(&self) -> &[usize] {
        &self.interior_edges
    }

    /// Position of edge `e` among interior edges (the Crouzeix–Raviart dof index).
    pub fn interior_edge_index(&self, e: usize) -> Option<usize> {
        self.interior_edge_index[e]
    }

    pub fn is_boundary_vertex(&self, v: usize) -> bool {
        self.boundary_vertex[v]
    }

    pub fn interior_vertices(&self) -> &[usize] {
        &self.interior_vertices
    }

    /// Position of vertex `v` among interior vertices (the conforming dof index).
    pub fn interior_vertex_index(&self, v: usize) -> Option<usize> {
        self.interior_vertex_index[v]
    }

    pub fn triangle_points(&self, t: usize) -> [Point; 3] {
        let [a, b, c] = self.triangles[t];
        [self.vertices[a], self.vertices[b], self.vertices[c]]
    }

    pub fn area(&self, t: usize) -> f64 {
        let [p0, p1, p2] = self.triangle_points(t);
        0.5 * ((p1[0] - p0[0]) * (p2[1] - p0[1]) - (p2[0] - p0[0]) * (p1[1] - p0[1]))
    }

    pub fn barycenter(&self, t: usize) -> Point {
        let [p0, p1, p2] = self.triangle_points(t);
        [(p0[0] + p1[0] + p2[0]) / 3.0, (p0[1] + p1[1] + p2[1]) / 3.0]
    }

    /// Gradients of the three barycentric coordinates (constant on the triangle).
    pub fn barycentric_gradients(&self, t: usize) -> [Point; 3] {
        let [p0, p1, p2] = self.triangle_points(t);
        let two_area = 2.0 * self.area(t);
        [
            [(p1[1] - p2[1]) / two_area, (p2[0] - p1[0]) / two_area],
            [(p2[1] - p0[1]) / two_area, (p0[0] - p2[0]) / two_area],
            [(p0[1] - p1[1]) / two_area, (p1[0] - p0[0]) / two_area],
        ]
    }

    /// Barycentric coordinates of `x` with respect to triangle `t`.
    pub fn barycentric(&self, t: usize, x: Point) -> [f64; 3] {
        let [p0, ..] = self.triangle_points(t);
        let g = self.barycentric_gradients(t);
        let d = [x[0] - p0[0], x[1] - p0[1]];
        let l1 = g[1][0] * d[0] + g[1][1] * d[1];
        let l2 = g[2][0] * d[0] + g[2][1] * d[1];
        [1.0 - l1 - l2, l1, l2]
    }

    pub fn max_diameter(&self) -> f64 {
        self.edges.iter().fold(0.0_f64, |m, e| m.max(e.length))
    }

    /// Plain-text dump with `VERTICES`, `TRIANGLES` and `EDGES` sections.
    ///
    /// Edge lines read `index v0 v1 plus minus boundary nx ny length`, with
    /// `minus = -1` on the boundary.
    pub fn write_dump<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "LEVEL {}", self.level)?;
        writeln!(w, "VERTICES {}", self.vertices.len())?;
        for (i, p) in self.vertices.iter().enumerate() {
            writeln!(w, "{} {:.16e} {:.16e}", i, p[0], p[1])?;
        }
        writeln!(w, "TRIANGLES {}", self.triangles.len())?;
        for (t, tri) in self.triangles.iter().enumerate() {
            writeln!(w, "{} {} {} {}", t, tri[0], tri[1], tri[2])?;
        }
        writeln!(w, "EDGES {}", self.edges.len())?;
        for (e, edge) in self.edges.iter().enumerate() {
            let minus = edge.minus.map_or(-1, |m| m as i64);
            writeln!(
                w,
                "{} {} {} {} {} {} {:.16e} {:.16e} {:.16e}",
                e,
                edge.vertices[0],
                edge.vertices[1],
                edge.plus,
                minus,
                u8::from(edge.is_boundary()),
                edge.normal[0],
                edge.normal[1],
                edge.length
            )?;
        }
        Ok(())
    }
}

/// The 32-triangle level-0 mesh: a 4×4 grid of squares with side 1/2.
pub fn build_initial_mesh() -> Mesh {
    Mesh::structured(LEVEL0_SQUARES)
}

/// Nested meshes `T_0 ⊂ T_1 ⊂ … ⊂ T_J` obtained by repeated red refinement.
#[derive(Debug, Clone)]
pub struct MeshHierarchy {
    pub meshes: Vec<Mesh>,
}

impl MeshHierarchy {
    pub fn new(coarsest: Mesh, finest_level: usize) -> Self {
        let mut meshes = vec![coarsest];
        for _ in 0..finest_level {
            let next = meshes.last().unwrap().refine();
            meshes.push(next);
        }
        Self { meshes }
    }

    pub fn finest(&self) -> &Mesh {
        self.meshes.last().unwrap()
    }

    pub fn level(&self, j: usize) -> &Mesh {
        &self.meshes[j]
    }

    /// Number of refinements `J`.
    pub fn depth(&self) -> usize {
        self.meshes.len() - 1
    }

    /// Ancestor on level `coarse_level` of triangle `t` on level `fine_level`.
    pub fn ancestor(&self, fine_level: usize, t: usize, coarse_level: usize) -> usize {
        assert!(coarse_level <= fine_level);
        let mut t = t;
        for l in (coarse_level + 1..=fine_level).rev() {
            t = self.meshes[l].triangle_parent[t];
        }
        t
    }
}

pub fn build_hierarchy(finest_level: usize) -> MeshHierarchy {
    MeshHierarchy::new(build_initial_mesh(), finest_level)
}

/// `κ = 1` on `[-1/2,0]² ∪ [0,1/2]²` and `ε` elsewhere.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CoefficientField {
    pub kappa: Vec<f64>,
    pub epsilon: f64,
}

fn in_inclusion(p: Point, strict: bool) -> bool {
    let inside = |lo: f64, hi: f64, v: f64| {
        if strict {
            v > lo && v < hi
        } else {
            v >= lo && v <= hi
        }
    };
    (inside(-0.5, 0.0, p[0]) && inside(-0.5, 0.0, p[1])) || (inside(0.0, 0.5, p[0]) && inside(0.0, 0.5, p[1]))
}

impl CoefficientField {
    pub fn assign(mesh: &Mesh, eps: f64) -> Result<Self> {
        if !(eps > 0.0) || !eps.is_finite() {
            return Err(DgError::InvalidParameter(format!("epsilon must be positive, got {eps}")));
        }
        let mut kappa = Vec::with_capacity(mesh.n_triangles());
        for t in 0..mesh.n_triangles() {
            let bc = mesh.barycenter(t);
            let inside = in_inclusion(bc, true);
            let [p0, p1, p2] = mesh.triangle_points(t);
            let mid = |a: Point, b: Point| [0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])];
            let samples = [p0, p1, p2, mid(p0, p1), mid(p1, p2), mid(p2, p0)];
            let resolved = if inside {
                samples.iter().all(|&p| in_inclusion(p, false))
            } else {
                samples.iter().all(|&p| !in_inclusion(p, true))
            };
            if !resolved {
                return Err(DgError::UnresolvedCoefficient { triangle: t });
            }
            kappa.push(if inside { 1.0 } else { eps });
        }
        Ok(Self { kappa, epsilon: eps })
    }

    /// A field with prescribed per-triangle values.
    pub fn from_values(kappa: Vec<f64>) -> Result<Self> {
        if let Some((t, &v)) = kappa.iter().enumerate().find(|(_, v)| !(**v > 0.0)) {
            return Err(DgError::NonPositiveCoefficient { triangle: t, value: v });
        }
        let epsilon = kappa.iter().cloned().fold(f64::INFINITY, f64::min);
        Ok(Self { kappa, epsilon })
    }

    /// `J(κ) = max κ_T / min κ_T`.
    pub fn jump(&self) -> f64 {
        let max = self.kappa.iter().cloned().fold(0.0, f64::max);
        let min = self.kappa.iter().cloned().fold(f64::INFINITY, f64::min);
        max / min
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self { kappa: self.kappa.iter().map(|k| k * s).collect(), epsilon: self.epsilon * s }
    }
}

pub fn assign_coefficient(mesh: &Mesh, eps: f64) -> Result<CoefficientField> {
    CoefficientField::assign(mesh, eps)
}

/// Per-edge averaging weight `β_e = κ⁻/(κ⁺+κ⁻)` and harmonic mean `κ_e`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EdgeWeights {
    /// `None` on boundary edges.
    pub beta: Vec<Option<f64>>,
    pub kappa_e: Vec<f64>,
}

impl EdgeWeights {
    pub fn new(mesh: &Mesh, coeff: &CoefficientField) -> Result<Self> {
        if coeff.kappa.len() != mesh.n_triangles() {
            return Err(DgError::DimensionMismatch { expected: mesh.n_triangles(), got: coeff.kappa.len() });
        }
        if let Some((t, &v)) = coeff.kappa.iter().enumerate().find(|(_, v)| !(**v > 0.0)) {
            return Err(DgError::NonPositiveCoefficient { triangle: t, value: v });
        }
        let mut beta = Vec::with_capacity(mesh.n_edges());
        let mut kappa_e = Vec::with_capacity(mesh.n_edges());
        for edge in &mesh.edges {
            let kp = coeff.kappa[edge.plus];
            match edge.minus {
                Some(m) => {
                    let km = coeff.kappa[m];
                    beta.push(Some(km / (kp + km)));
                    kappa_e.push(2.0 * kp * km / (kp + km));
                }
                None => {
                    beta.push(None);
                    kappa_e.push(kp);
                }
            }
        }
        Ok(Self { beta, kappa_e })
    }

    /// `(β⁺, β⁻) = (β_e, 1-β_e)`; `(1, 0)` on boundary edges.
    pub fn sides(&self, e: usize) -> (f64, f64) {
        match self.beta[e] {
            Some(b) => (b, 1.0 - b),
            None => (1.0, 0.0),
        }
    }
}

pub fn edge_weights(mesh: &Mesh, coeff: &CoefficientField) -> Result<EdgeWeights> {
    EdgeWeights::new(mesh, coeff)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn initial_mesh_counts() {
        let m = build_initial_mesh();
        assert_eq!(m.n_vertices(), 25);
        assert_eq!(m.n_triangles(), 32);
        assert_eq!(m.dg_dofs(), 96);
        assert_eq!(m.n_edges(), 56);
        assert_eq!(m.n_interior_edges(), 40);
        assert_eq!(m.n_boundary_edges(), 16);
        assert_eq!(m.h, 0.5);
    }

    /// Independent edge count: distinct sorted vertex pairs, classified by
    /// how many triangles reference them.
    fn brute_force_edges(m: &Mesh) -> (usize, usize) {
        let mut count: HashMap<(usize, usize), usize> = HashMap::new();
        for tri in &m.triangles {
            for (a, b) in [(tri[0], tri[1]), (tri[1], tri[2]), (tri[2], tri[0])] {
                *count.entry((a.min(b), a.max(b))).or_default() += 1;
            }
        }
        let interior = count.values().filter(|&&c| c == 2).count();
        let boundary = count.values().filter(|&&c| c == 1).count();
        assert_eq!(interior + boundary, count.len(), "non-manifold edge");
        (interior, boundary)
    }

    #[test]
    fn edge_counts_match_brute_force() {
        let m0 = build_initial_mesh();
        assert_eq!(brute_force_edges(&m0), (40, 16));
        let m1 = m0.refine();
        let (interior, boundary) = brute_force_edges(&m1);
        assert_eq!((interior, boundary), (176, 32));
        assert_eq!(interior + boundary, 208);
        assert_eq!(m1.n_interior_edges(), interior);
        assert_eq!(m1.n_edges(), 208);
    }

    #[test]
    fn barycenters_lie_in_exactly_one_square() {
        let m = build_initial_mesh();
        for t in 0..m.n_triangles() {
            let [x, y] = m.barycenter(t);
            let hits = (0..4)
                .flat_map(|j| (0..4).map(move |i| (i, j)))
                .filter(|&(i, j)| {
                    let (x0, y0) = (-1.0 + 0.5 * i as f64, -1.0 + 0.5 * j as f64);
                    x > x0 && x < x0 + 0.5 && y > y0 && y < y0 + 0.5
                })
                .count();
            assert_eq!(hits, 1);
        }
    }

    #[test]
    fn refinement_counts_and_areas() {
        let m0 = build_initial_mesh();
        let m1 = m0.refine();
        assert_eq!(m1.n_triangles(), 128);
        assert_eq!(m1.dg_dofs(), 384);
        for t in 0..m1.n_triangles() {
            let parent = m1.triangle_parent[t];
            assert!((m1.area(t) - m0.area(parent) / 4.0).abs() < 1e-15);
            assert!(m1.area(t) > 0.0, "orientation flipped");
        }
        let total: f64 = (0..m1.n_triangles()).map(|t| m1.area(t)).sum();
        assert!((total - 4.0).abs() < 1e-14);
    }

    #[test]
    fn hierarchy_sizes() {
        assert_eq!(build_hierarchy(0).meshes.len(), 1);
        let h = build_hierarchy(4);
        assert_eq!(h.finest().h, 2f64.powi(-5));
        for j in 0..4 {
            assert_eq!(h.level(j + 1).h, 0.5 * h.level(j).h);
            assert_eq!(h.level(j).n_triangles(), 32 * 4usize.pow(j as u32));
        }
    }

    #[test]
    fn hierarchy_is_nested() {
        let h = build_hierarchy(3);
        for j in 0..3 {
            let (c, f) = (h.level(j), h.level(j + 1));
            for (v, p) in c.vertices.iter().enumerate() {
                assert_eq!(f.vertices[v], *p);
                assert_eq!(f.vertex_origin[v], VertexOrigin::Vertex(v));
            }
        }
        let fine = h.finest();
        for t in 0..fine.n_triangles() {
            let a = h.ancestor(3, t, 0);
            let l = h.level(0).barycentric(a, fine.barycenter(t));
            assert!(l.iter().all(|&x| x > -1e-12));
        }
    }

    #[test]
    fn normals_and_midpoints() {
        let m = build_initial_mesh().refine();
        for edge in &m.edges {
            let n = edge.normal;
            assert!(((n[0] * n[0] + n[1] * n[1]).sqrt() - 1.0).abs() < 1e-14);
            let (a, b) = (m.vertices[edge.vertices[0]], m.vertices[edge.vertices[1]]);
            assert_eq!(edge.midpoint, [0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])]);
            // recompute from T⁺: normal points away from the opposite vertex
            let opp = m.vertices[m.triangles[edge.plus][edge.local_plus]];
            let d = [edge.midpoint[0] - opp[0], edge.midpoint[1] - opp[1]];
            assert!(d[0] * n[0] + d[1] * n[1] > 0.0);
            let t = [b[0] - a[0], b[1] - a[1]];
            let recomputed = [t[1] / edge.length, -t[0] / edge.length];
            assert!((recomputed[0] - n[0]).abs() < 1e-14 && (recomputed[1] - n[1]).abs() < 1e-14);
            if let Some(minus) = edge.minus {
                assert!(edge.plus < minus);
                let opp = m.vertices[m.triangles[minus][edge.local_minus.unwrap()]];
                let d = [edge.midpoint[0] - opp[0], edge.midpoint[1] - opp[1]];
                assert!(d[0] * n[0] + d[1] * n[1] < 0.0);
            }
        }
    }

    #[test]
    fn every_interior_edge_has_two_triangles() {
        let m = build_initial_mesh().refine().refine();
        let mut seen = HashSet::new();
        for (t, te) in m.triangle_edges.iter().enumerate() {
            for &e in te {
                seen.insert((e, t));
            }
        }
        for (e, edge) in m.edges.iter().enumerate() {
            let n = seen.iter().filter(|(ee, _)| *ee == e).count();
            assert_eq!(n, if edge.is_boundary() { 1 } else { 2 });
        }
    }

    #[test]
    fn coefficient_assignment() {
        let m = build_initial_mesh();
        let c = assign_coefficient(&m, 1.0).unwrap();
        assert!(c.kappa.iter().all(|&k| k == 1.0));

        let c = assign_coefficient(&m, 1e-5).unwrap();
        // independent count: triangles whose three vertices lie in a closed inclusion square
        let in_square = |lo: f64, t: usize| {
            m.triangle_points(t).iter().all(|p| p[0] >= lo && p[0] <= lo + 0.5 && p[1] >= lo && p[1] <= lo + 0.5)
        };
        let first = (0..32).filter(|&t| in_square(-0.5, t)).count();
        let second = (0..32).filter(|&t| in_square(0.0, t)).count();
        assert_eq!((first, second), (2, 2));
        assert_eq!(c.kappa.iter().filter(|&&k| k == 1.0).count(), first + second);

        let c = assign_coefficient(&m, 1e5).unwrap();
        assert_eq!(c.jump(), 1e5);
    }

    #[test]
    fn unresolved_coefficient_is_rejected() {
        let m = Mesh::structured(3);
        assert!(matches!(assign_coefficient(&m, 1e-3), Err(DgError::UnresolvedCoefficient { .. })));
        assert!(assign_coefficient(&build_initial_mesh(), -1.0).is_err());
    }

    #[test]
    fn edge_weight_formulas() {
        let m = build_initial_mesh();
        let c = assign_coefficient(&m, 1e-3).unwrap();
        let w = edge_weights(&m, &c).unwrap();
        for (e, edge) in m.edges.iter().enumerate() {
            let kp = c.kappa[edge.plus];
            match edge.minus {
                Some(mi) => {
                    let km = c.kappa[mi];
                    let b = w.beta[e].unwrap();
                    assert!(b > 0.0 && b < 1.0);
                    assert_eq!(b + (1.0 - b), 1.0);
                    let lo = kp.min(km);
                    assert!(w.kappa_e[e] >= lo && w.kappa_e[e] <= 2.0 * lo);
                    if kp == 1.0 && km == 1e-3 {
                        assert!((w.kappa_e[e] - 2e-3 / (1.0 + 1e-3)).abs() < 1e-18);
                        assert!((b - 1e-3 / (1.0 + 1e-3)).abs() < 1e-18);
                    }
                    if kp == km {
                        assert_eq!(b, 0.5);
                        assert_eq!(w.kappa_e[e], kp);
                    }
                }
                None => {
                    assert!(w.beta[e].is_none());
                    assert_eq!(w.kappa_e[e], kp);
                }
            }
        }
        let bad = CoefficientField { kappa: vec![0.0; 32], epsilon: 0.0 };
        assert!(matches!(edge_weights(&m, &bad), Err(DgError::NonPositiveCoefficient { .. })));
    }

    #[test]
    fn edge_weight_example_values() {
        let m = build_initial_mesh();
        let e = m.interior_edges()[0];
        let edge = &m.edges[e];
        let mut kappa = vec![1.0; m.n_triangles()];
        kappa[edge.minus.unwrap()] = 1e-3;
        let c = CoefficientField::from_values(kappa).unwrap();
        let w = edge_weights(&m, &c).unwrap();
        assert_eq!(w.kappa_e[e], 2.0 * 1e-3 / (1.0 + 1e-3));
        assert_eq!(w.beta[e], Some(1e-3 / (1.0 + 1e-3)));
    }

    #[test]
    fn dump_has_sections() {
        let m = build_initial_mesh();
        let mut buf = Vec::new();
        m.write_dump(&mut buf).unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert!(s.contains("VERTICES 25\n"));
        assert!(s.contains("TRIANGLES 32\n"));
        assert!(s.contains("EDGES 56\n"));
        assert!(s.contains("0 -1.0000000000000000e0 -1.0000000000000000e0\n"));
    }
}
