//! Assembly of the weighted interior penalty forms in the element-local nodal
//! basis of the piecewise-linear DG space, together with the conforming P1 and
//! Crouzeix–Raviart stiffness matrices, load vectors and energy-norm Gram
//! matrices.
//!
//! All integrands are polynomials of degree ≤ 2 with piecewise-constant `κ`, so
//! every integral is exact: constant gradients on elements, the midpoint rule
//! for terms with a constant factor on an edge, and two-point Gauss otherwise.

use serde::{Deserialize, Serialize};

use crate::error::{DgError, Result};
use crate::mesh::{CoefficientField, EdgeWeights, Mesh, Point};
use crate::sparse::SparseOperator;

/// `IP0` penalizes only the edge mean of the jump; `IP1` the full jump.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Variant {
    Ip0,
    Ip1,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MethodParams {
    /// `-1` symmetric, `0` incomplete, `+1` nonsymmetric.
    pub theta: i8,
    pub alpha: f64,
    pub variant: Variant,
}

impl MethodParams {
    pub fn new(theta: i8, alpha: f64, variant: Variant) -> Result<Self> {
        if !matches!(theta, -1..=1) {
            return Err(DgError::InvalidParameter(format!("theta must be -1, 0 or 1, got {theta}")));
        }
        if !(alpha > 0.0) {
            return Err(DgError::InvalidParameter(format!("alpha must be positive, got {alpha}")));
        }
        Ok(Self { theta, alpha, variant })
    }

    pub fn sipg0(alpha: f64) -> Self {
        Self { theta: -1, alpha, variant: Variant::Ip0 }
    }

    pub fn is_symmetric(&self) -> bool {
        self.theta == -1
    }

    pub fn name(&self) -> &'static str {
        match (self.theta, self.variant) {
            (-1, Variant::Ip0) => "SIPG(beta)-0",
            (0, Variant::Ip0) => "IIPG(beta)-0",
            (1, Variant::Ip0) => "NIPG(beta)-0",
            (-1, Variant::Ip1) => "SIPG(beta)-1",
            (0, Variant::Ip1) => "IIPG(beta)-1",
            _ => "NIPG(beta)-1",
        }
    }
}

/// Global numbering of the nodal DG basis: dof `3t + j` is the barycentric
/// coordinate `λ_j` of triangle `t`, extended by zero.
#[derive(Debug, Clone, Copy)]
pub struct DgSpaceIndex {
    n_triangles: usize,
}

impl DgSpaceIndex {
    pub fn new(mesh: &Mesh) -> Self {
        Self { n_triangles: mesh.n_triangles() }
    }

    pub fn dim(&self) -> usize {
        3 * self.n_triangles
    }

    pub fn dof(&self, t: usize, local: usize) -> usize {
        3 * t + local
    }

    pub fn owner(&self, dof: usize) -> (usize, usize) {
        (dof / 3, dof % 3)
    }
}

/// Two-point Gauss abscissae on `[0,1]` (weights 1/2 each).
const GAUSS2: [f64; 2] = [0.211_324_865_405_187_1, 0.788_675_134_594_812_9];

/// Values of one nodal basis function on one side of an edge.
#[derive(Debug, Clone, Copy)]
struct TraceDof {
    dof: usize,
    /// Sign in `[v]·n⁺`: `+1` on `T⁺` (and on the boundary), `-1` on `T⁻`.
    sign: f64,
    at_mid: f64,
    at_gauss: [f64; 2],
    /// `∇λ·n⁺`.
    grad_n: f64,
    /// Side coefficient `κ_T` and averaging weight of the side.
    kappa: f64,
    weight: f64,
}

/// How the edge flux average `{κ∇v}_β` is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FluxForm {
    /// `β κ⁺∇v⁺ + (1-β) κ⁻∇v⁻`.
    Weighted,
    /// `κ_e (∇v⁺ + ∇v⁻)/2`.
    HarmonicAverage,
}

/// A mesh with its coefficient and derived edge weights.
#[derive(Debug, Clone)]
pub struct DgProblem<'m> {
    pub mesh: &'m Mesh,
    pub coeff: CoefficientField,
    pub weights: EdgeWeights,
}

impl<'m> DgProblem<'m> {
    pub fn new(mesh: &'m Mesh, coeff: CoefficientField) -> Result<Self> {
        let weights = EdgeWeights::new(mesh, &coeff)?;
        Ok(Self { mesh, coeff, weights })
    }

    /// The two-valued coefficient with background value `eps`.
    pub fn with_epsilon(mesh: &'m Mesh, eps: f64) -> Result<Self> {
        Self::new(mesh, CoefficientField::assign(mesh, eps)?)
    }

    pub fn space(&self) -> DgSpaceIndex {
        DgSpaceIndex::new(self.mesh)
    }

    pub fn dg_dim(&self) -> usize {
        self.mesh.dg_dofs()
    }

    fn side_traces(&self, e: usize) -> Vec<TraceDof> {
        let mesh = self.mesh;
        let edge = &mesh.edges[e];
        let [p, q] = edge.vertices;
        let n = edge.normal;
        let (beta_plus, beta_minus) = self.weights.sides(e);
        let mut out = Vec::with_capacity(6);
        let sides = [(Some(edge.plus), 1.0, beta_plus), (edge.minus, -1.0, beta_minus)];
        for (tri, sign, weight) in sides {
            let Some(t) = tri else { continue };
            let verts = mesh.triangles[t];
            let grads = mesh.barycentric_gradients(t);
            for j in 0..3 {
                // λ_j along x(s) = (1-s) p + s q
                let (a, b) = (f64::from(u8::from(verts[j] == p)), f64::from(u8::from(verts[j] == q)));
                let at = |s: f64| (1.0 - s) * a + s * b;
                out.push(TraceDof {
                    dof: 3 * t + j,
                    sign,
                    at_mid: at(0.5),
                    at_gauss: [at(GAUSS2[0]), at(GAUSS2[1])],
                    grad_n: grads[j][0] * n[0] + grads[j][1] * n[1],
                    kappa: self.coeff.kappa[t],
                    weight,
                });
            }
        }
        out
    }

    fn flux(&self, e: usize, d: &TraceDof, form: FluxForm) -> f64 {
        match (form, self.mesh.edges[e].is_boundary()) {
            (_, true) | (FluxForm::Weighted, false) => d.weight * d.kappa * d.grad_n,
            (FluxForm::HarmonicAverage, false) => 0.5 * self.weights.kappa_e[e] * d.grad_n,
        }
    }

    fn element_triplets(&self, trip: &mut Vec<(usize, usize, f64)>) {
        for t in 0..self.mesh.n_triangles() {
            let g = self.mesh.barycentric_gradients(t);
            let scale = self.coeff.kappa[t] * self.mesh.area(t);
            for i in 0..3 {
                for j in 0..3 {
                    let v = scale * (g[i][0] * g[j][0] + g[i][1] * g[j][1]);
                    trip.push((3 * t + i, 3 * t + j, v));
                }
            }
        }
    }

    /// Penalty-type edge term `Σ_e c_e ∫_e [v]·[w]` with the jump projected
    /// onto constants (`projected = true`) or in full.
    fn jump_triplets(&self, factor: f64, projected: bool, trip: &mut Vec<(usize, usize, f64)>) {
        for (e, edge) in self.mesh.edges.iter().enumerate() {
            let c = factor * self.weights.kappa_e[e] / edge.length;
            let traces = self.side_traces(e);
            for wi in &traces {
                for vj in &traces {
                    let integral = if projected {
                        edge.length * (vj.sign * vj.at_mid) * (wi.sign * wi.at_mid)
                    } else {
                        0.5 * edge.length
                            * (0..2).map(|g| (vj.sign * vj.at_gauss[g]) * (wi.sign * wi.at_gauss[g])).sum::<f64>()
                    };
                    if integral != 0.0 {
                        trip.push((wi.dof, vj.dof, c * integral));
                    }
                }
            }
        }
    }

    /// Matrix of `⟨{κ∇v}_β, [w]⟩` (row = test `w`, column = trial `v`).
    pub fn consistency_matrix(&self, form: FluxForm) -> SparseOperator {
        let n = self.dg_dim();
        let mut trip = Vec::new();
        for (e, edge) in self.mesh.edges.iter().enumerate() {
            let traces = self.side_traces(e);
            for wi in &traces {
                let jump_w = wi.sign * wi.at_mid;
                if jump_w == 0.0 {
                    continue;
                }
                for vj in &traces {
                    trip.push((wi.dof, vj.dof, self.flux(e, vj, form) * edge.length * jump_w));
                }
            }
        }
        SparseOperator::from_triplets(n, n, trip)
    }

    /// Broken stiffness `(κ∇v, ∇w)_{T_h}` on the nodal DG basis.
    pub fn broken_stiffness(&self) -> SparseOperator {
        let n = self.dg_dim();
        let mut trip = Vec::new();
        self.element_triplets(&mut trip);
        SparseOperator::from_triplets(n, n, trip).with_symmetric(true)
    }

    /// The IP(β)-0 or IP(β)-1 matrix, depending on `params.variant`.
    pub fn assemble(&self, params: &MethodParams) -> SparseOperator {
        let n = self.dg_dim();
        let theta = f64::from(params.theta);
        let mut trip = Vec::new();
        self.element_triplets(&mut trip);
        for (e, edge) in self.mesh.edges.iter().enumerate() {
            let traces = self.side_traces(e);
            for wi in &traces {
                let jump_w = wi.sign * wi.at_mid;
                let flux_w = self.flux(e, wi, FluxForm::Weighted);
                for vj in &traces {
                    let jump_v = vj.sign * vj.at_mid;
                    let flux_v = self.flux(e, vj, FluxForm::Weighted);
                    let v = edge.length * (-flux_v * jump_w + theta * jump_v * flux_w);
                    if v != 0.0 {
                        trip.push((wi.dof, vj.dof, v));
                    }
                }
            }
        }
        self.jump_triplets(params.alpha, params.variant == Variant::Ip0, &mut trip);
        SparseOperator::from_triplets(n, n, trip).with_symmetric(params.is_symmetric())
    }

    pub fn assemble_ip0(&self, theta: i8, alpha: f64) -> Result<SparseOperator> {
        Ok(self.assemble(&MethodParams::new(theta, alpha, Variant::Ip0)?))
    }

    pub fn assemble_ip1(&self, theta: i8, alpha: f64) -> Result<SparseOperator> {
        Ok(self.assemble(&MethodParams::new(theta, alpha, Variant::Ip1)?))
    }

    /// Gram matrix of `|||·|||²_{DG0}` (`projected = true`) or `|||·|||²_{DG}`.
    pub fn energy_gram(&self, projected: bool) -> SparseOperator {
        let n = self.dg_dim();
        let mut trip = Vec::new();
        self.element_triplets(&mut trip);
        self.jump_triplets(1.0, projected, &mut trip);
        SparseOperator::from_triplets(n, n, trip).with_symmetric(true)
    }

    pub fn energy_norm(&self, u: &[f64], norm: EnergyNorm) -> Result<f64> {
        check_dim(self.dg_dim(), u.len())?;
        let g = self.energy_gram(norm == EnergyNorm::Dg0);
        let gu = g.apply(u);
        Ok(dot(u, &gu).max(0.0).sqrt())
    }

    /// Conforming P1 stiffness on interior vertices (homogeneous Dirichlet).
    pub fn assemble_conforming(&self) -> SparseOperator {
        conforming_stiffness(self.mesh, &self.coeff)
    }

    /// Crouzeix–Raviart stiffness `(κ∇u,∇w)_{T_h}` on interior-edge dofs,
    /// assembled directly from the local basis `1 - 2λ_k`.
    pub fn assemble_crouzeix_raviart(&self) -> SparseOperator {
        let mesh = self.mesh;
        let n = mesh.n_interior_edges();
        let mut trip = Vec::new();
        for t in 0..mesh.n_triangles() {
            let g = mesh.barycentric_gradients(t);
            let scale = 4.0 * self.coeff.kappa[t] * mesh.area(t);
            let dofs = mesh.triangle_edges[t].map(|e| mesh.interior_edge_index(e));
            for i in 0..3 {
                let Some(di) = dofs[i] else { continue };
                for j in 0..3 {
                    let Some(dj) = dofs[j] else { continue };
                    trip.push((di, dj, scale * (g[i][0] * g[j][0] + g[i][1] * g[j][1])));
                }
            }
        }
        SparseOperator::from_triplets(n, n, trip).with_symmetric(true)
    }

    pub fn assemble_rhs<F: Fn(Point) -> f64>(&self, f: F) -> Vec<f64> {
        assemble_rhs(self.mesh, f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EnergyNorm {
    Dg0,
    Dg1,
}

pub fn conforming_stiffness(mesh: &Mesh, coeff: &CoefficientField) -> SparseOperator {
    let n = mesh.interior_vertices().len();
    let mut trip = Vec::new();
    for t in 0..mesh.n_triangles() {
        let g = mesh.barycentric_gradients(t);
        let scale = coeff.kappa[t] * mesh.area(t);
        let dofs = mesh.triangles[t].map(|v| mesh.interior_vertex_index(v));
        for i in 0..3 {
            let Some(di) = dofs[i] else { continue };
            for j in 0..3 {
                let Some(dj) = dofs[j] else { continue };
                trip.push((di, dj, scale * (g[i][0] * g[j][0] + g[i][1] * g[j][1])));
            }
        }
    }
    SparseOperator::from_triplets(n, n, trip).with_symmetric(true)
}

/// Load vector `(f, λ_j)_T` via the edge-midpoint rule (exact for quadratics).
pub fn assemble_rhs<F: Fn(Point) -> f64>(mesh: &Mesh, f: F) -> Vec<f64> {
    let mut b = vec![0.0; mesh.dg_dofs()];
    for t in 0..mesh.n_triangles() {
        let pts = mesh.triangle_points(t);
        let w = mesh.area(t) / 3.0;
        for k in 0..3 {
            // midpoint of the edge opposite vertex k: λ_k = 0, the other two 1/2
            let (a, c) = (pts[(k + 1) % 3], pts[(k + 2) % 3]);
            let fm = f([0.5 * (a[0] + c[0]), 0.5 * (a[1] + c[1])]);
            b[3 * t + (k + 1) % 3] += w * fm * 0.5;
            b[3 * t + (k + 2) % 3] += w * fm * 0.5;
        }
    }
    b
}

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(DgError::DimensionMismatch { expected, got })
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
