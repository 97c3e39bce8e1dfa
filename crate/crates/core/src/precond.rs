//! Preconditioners for the split blocks: diagonal scaling on the jump block,
//! pointwise smoothers, two-level and BPX additive preconditioners on the
//! Crouzeix–Raviart block, block-Jacobi for the full symmetric DG matrix, and
//! block forward substitution.

use serde::{Deserialize, Serialize};

use crate::assembly::check_dim;
use crate::error::{DgError, Result};
use crate::krylov::{check_positive_diagonal, Preconditioner};
use crate::mesh::{Mesh, MeshHierarchy, VertexOrigin};
use crate::sparse::{CholeskyFactor, SparseOperator};
use crate::split::BlockOperator;

/// `r ↦ r ./ d`.
#[derive(Debug, Clone)]
pub struct DiagonalPrecond {
    inv: Vec<f64>,
}

impl DiagonalPrecond {
    pub fn new(diag: &[f64]) -> Result<Self> {
        check_positive_diagonal(diag)?;
        Ok(Self { inv: diag.iter().map(|d| 1.0 / d).collect() })
    }
}

impl Preconditioner for DiagonalPrecond {
    fn dim(&self) -> usize {
        self.inv.len()
    }

    fn apply_into(&self, r: &[f64], out: &mut [f64]) {
        for ((o, r), d) in out.iter_mut().zip(r).zip(&self.inv) {
            *o = r * d;
        }
    }
}

pub fn diag_precond(a: &SparseOperator) -> Result<DiagonalPrecond> {
    DiagonalPrecond::new(&a.diagonal())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum SmootherKind {
    Jacobi,
    SymGs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SmootherSpec {
    pub kind: SmootherKind,
    pub sweeps: usize,
}

impl Default for SmootherSpec {
    fn default() -> Self {
        Self { kind: SmootherKind::SymGs, sweeps: 5 }
    }
}

/// `sweeps` steps of Jacobi or symmetric Gauss–Seidel on `A x = r` from
/// `x = 0`, in ascending dof order.
#[derive(Debug, Clone)]
pub struct Smoother {
    a: SparseOperator,
    diag: Vec<f64>,
    spec: SmootherSpec,
}

impl Smoother {
    pub fn new(a: &SparseOperator, spec: SmootherSpec) -> Result<Self> {
        if spec.sweeps == 0 {
            return Err(DgError::InvalidParameter("smoother needs at least one sweep".into()));
        }
        let diag = a.diagonal();
        check_positive_diagonal(&diag)?;
        Ok(Self { a: a.clone(), diag, spec })
    }

    fn gs_step(&self, i: usize, r: &[f64], x: &mut [f64]) {
        let mut s = r[i];
        for (j, v) in self.a.row(i) {
            if j != i {
                s -= v * x[j];
            }
        }
        x[i] = s / self.diag[i];
    }
}

impl Preconditioner for Smoother {
    fn dim(&self) -> usize {
        self.diag.len()
    }

    fn apply_into(&self, r: &[f64], x: &mut [f64]) {
        let n = self.dim();
        x.fill(0.0);
        match self.spec.kind {
            SmootherKind::SymGs => {
                for _ in 0..self.spec.sweeps {
                    for i in 0..n {
                        self.gs_step(i, r, x);
                    }
                    for i in (0..n).rev() {
                        self.gs_step(i, r, x);
                    }
                }
            }
            SmootherKind::Jacobi => {
                let omega = if self.spec.sweeps == 1 { 1.0 } else { 0.5 };
                let mut ax = vec![0.0; n];
                for _ in 0..self.spec.sweeps {
                    self.a.apply_into(x, &mut ax);
                    for i in 0..n {
                        x[i] += omega * (r[i] - ax[i]) / self.diag[i];
                    }
                }
            }
        }
    }
}

pub fn smoother(a: &SparseOperator, spec: SmootherSpec) -> Result<Smoother> {
    Smoother::new(a, spec)
}

/// Piecewise-linear interpolation from the conforming space on level `j` to
/// level `j + 1`, both on interior vertices.
pub fn conf_prolongation(coarse: &Mesh, fine: &Mesh) -> Result<SparseOperator> {
    if fine.level != coarse.level + 1 || fine.vertex_origin.len() != fine.n_vertices() {
        return Err(DgError::NotNested(format!("level {} is not a refinement of level {}", fine.level, coarse.level)));
    }
    let mut trip = Vec::new();
    for (row, &v) in fine.interior_vertices().iter().enumerate() {
        match fine.vertex_origin[v] {
            VertexOrigin::Vertex(c) => {
                if let Some(col) = coarse.interior_vertex_index(c) {
                    trip.push((row, col, 1.0));
                }
            }
            VertexOrigin::EdgeMidpoint(e) => {
                for c in coarse.edges[e].vertices {
                    if let Some(col) = coarse.interior_vertex_index(c) {
                        trip.push((row, col, 0.5));
                    }
                }
            }
        }
    }
    Ok(SparseOperator::from_triplets(fine.interior_vertices().len(), coarse.interior_vertices().len(), trip))
}

const BARY_TOL: f64 = 1e-12;

/// Inclusion of the conforming space on `coarse_level` into the
/// Crouzeix–Raviart space on `fine_level`: hat values at fine interior-edge
/// midpoints.
pub fn cr_prolongation(h: &MeshHierarchy, coarse_level: usize, fine_level: usize) -> Result<SparseOperator> {
    if coarse_level > fine_level || fine_level > h.depth() {
        return Err(DgError::NotNested(format!(
            "coarse level {coarse_level} / fine level {fine_level} with {} levels",
            h.depth() + 1
        )));
    }
    let (coarse, fine) = (h.level(coarse_level), h.level(fine_level));
    let mut trip = Vec::new();
    for (row, &e) in fine.interior_edges().iter().enumerate() {
        let edge = &fine.edges[e];
        let t = h.ancestor(fine_level, edge.plus, coarse_level);
        let lambda = coarse.barycentric(t, edge.midpoint);
        if lambda.iter().any(|&l| !(-BARY_TOL..=1.0 + BARY_TOL).contains(&l)) {
            return Err(DgError::NotNested(format!("midpoint of edge {e} lies outside its ancestor {t}")));
        }
        for (k, &l) in lambda.iter().enumerate() {
            if l.abs() <= BARY_TOL {
                continue;
            }
            if let Some(col) = coarse.interior_vertex_index(coarse.triangles[t][k]) {
                trip.push((row, col, l));
            }
        }
    }
    Ok(SparseOperator::from_triplets(fine.n_interior_edges(), coarse.interior_vertices().len(), trip))
}

/// `CONF_j → CONF_{j+1} → … → CONF_J → CR_J`.
pub fn composed_prolongation(h: &MeshHierarchy, coarse_level: usize, fine_level: usize) -> Result<SparseOperator> {
    let mut p = cr_prolongation(h, fine_level, fine_level)?;
    for j in (coarse_level..fine_level).rev() {
        p = p.matmul(&conf_prolongation(h.level(j), h.level(j + 1))?);
    }
    Ok(p)
}

/// `B = S + Π (ΠᵀAΠ)⁻¹ Πᵀ`.
pub struct TwoLevel {
    smoother: Smoother,
    prolongation: SparseOperator,
    coarse: CholeskyFactor,
}

impl TwoLevel {
    pub fn new(a: &SparseOperator, prolongation: SparseOperator, spec: SmootherSpec) -> Result<Self> {
        check_dim(a.nrows(), prolongation.nrows())?;
        let coarse = CholeskyFactor::new(&a.galerkin(&prolongation))
            .map_err(|_| DgError::NotSpd { context: "two-level coarse matrix".into() })?;
        Ok(Self { smoother: Smoother::new(a, spec)?, prolongation, coarse })
    }

    pub fn coarse_dim(&self) -> usize {
        self.coarse.dim()
    }
}

impl Preconditioner for TwoLevel {
    fn dim(&self) -> usize {
        self.smoother.dim()
    }

    fn apply_into(&self, r: &[f64], out: &mut [f64]) {
        self.smoother.apply_into(r, out);
        let c = self.coarse.solve(&self.prolongation.apply_transpose(r));
        for (o, v) in out.iter_mut().zip(self.prolongation.apply(&c)) {
            *o += v;
        }
    }
}

/// Two-level preconditioner on the CR space of `h.finest()` with the conforming
/// coarse space `log2(ratio)` levels below.
pub fn two_level(a_vv: &SparseOperator, h: &MeshHierarchy, ratio: usize, spec: SmootherSpec) -> Result<TwoLevel> {
    let drop = coarse_drop(ratio)?;
    let fine = h.depth();
    if drop > fine {
        return Err(DgError::InvalidParameter(format!("ratio {ratio} needs at least {drop} refinements")));
    }
    TwoLevel::new(a_vv, cr_prolongation(h, fine - drop, fine)?, spec)
}

/// Number of levels between coarse and fine mesh for `ϖ ∈ {1, 2, 4}`.
pub fn coarse_drop(ratio: usize) -> Result<usize> {
    match ratio {
        1 => Ok(0),
        2 => Ok(1),
        4 => Ok(2),
        _ => Err(DgError::InvalidParameter(format!("coarse ratio must be 1, 2 or 4, got {ratio}"))),
    }
}

struct BpxLevel {
    prolongation: SparseOperator,
    smoother: Smoother,
}

/// Additive multilevel preconditioner
/// `Π₀A₀⁻¹Π₀ᵀ + Σ_{j=1..J} Π_j S_j Π_jᵀ + S_CR`.
pub struct Bpx {
    coarse_prolongation: SparseOperator,
    coarse: CholeskyFactor,
    levels: Vec<BpxLevel>,
    fine: Smoother,
}

impl Bpx {
    pub fn n_levels(&self) -> usize {
        self.levels.len() + 1
    }
}

pub fn bpx(a_vv: &SparseOperator, h: &MeshHierarchy, spec: SmootherSpec) -> Result<Bpx> {
    let fine = h.depth();
    let coarse_prolongation = composed_prolongation(h, 0, fine)?;
    check_dim(a_vv.nrows(), coarse_prolongation.nrows())?;
    let coarse = CholeskyFactor::new(&a_vv.galerkin(&coarse_prolongation))
        .map_err(|_| DgError::NotSpd { context: "BPX coarsest matrix".into() })?;
    let mut levels = Vec::with_capacity(fine);
    for j in 1..=fine {
        let prolongation = composed_prolongation(h, j, fine)?;
        let smoother = Smoother::new(&a_vv.galerkin(&prolongation), spec)?;
        levels.push(BpxLevel { prolongation, smoother });
    }
    Ok(Bpx { coarse_prolongation, coarse, levels, fine: Smoother::new(a_vv, spec)? })
}

impl Preconditioner for Bpx {
    fn dim(&self) -> usize {
        self.fine.dim()
    }

    fn apply_into(&self, r: &[f64], out: &mut [f64]) {
        self.fine.apply_into(r, out);
        let c = self.coarse.solve(&self.coarse_prolongation.apply_transpose(r));
        let mut add = |p: &SparseOperator, x: &[f64]| {
            for (o, v) in out.iter_mut().zip(p.apply(x)) {
                *o += v;
            }
        };
        add(&self.coarse_prolongation, &c);
        for level in &self.levels {
            let rc = level.prolongation.apply_transpose(r);
            let s = level.smoother.apply(&rc);
            add(&level.prolongation, &s);
        }
    }
}

/// `diag(A_zz)⁻¹ ⊕ B_cr` on split vectors `[z; v]`.
pub struct BlockJacobiDg<P> {
    z: DiagonalPrecond,
    cr: P,
}

impl<P: Preconditioner> Preconditioner for BlockJacobiDg<P> {
    fn dim(&self) -> usize {
        self.z.dim() + self.cr.dim()
    }

    fn apply_into(&self, r: &[f64], out: &mut [f64]) {
        let nz = self.z.dim();
        let (rz, rv) = r.split_at(nz);
        let (oz, ov) = out.split_at_mut(nz);
        self.z.apply_into(rz, oz);
        self.cr.apply_into(rv, ov);
    }
}

pub fn block_jacobi_dg<P: Preconditioner>(blocks: &BlockOperator, b_cr: P) -> Result<BlockJacobiDg<P>> {
    check_dim(blocks.n_v(), b_cr.dim())?;
    Ok(BlockJacobiDg { z: diag_precond(&blocks.zz)?, cr: b_cr })
}

/// Solve the block lower-triangular system: `A_zz z = f_z`, then
/// `A_vv v = f_v - A_vz z`.
pub fn forward_substitution_solve<Z, V>(
    blocks: &BlockOperator,
    f_z: &[f64],
    f_v: &[f64],
    zz_solver: Z,
    vv_solver: V,
) -> Result<(Vec<f64>, Vec<f64>)>
where
    Z: FnOnce(&SparseOperator, &[f64]) -> Result<Vec<f64>>,
    V: FnOnce(&SparseOperator, &[f64]) -> Result<Vec<f64>>,
{
    if blocks.zv.is_some() {
        return Err(DgError::InvalidParameter("forward substitution needs a block lower-triangular matrix".into()));
    }
    check_dim(blocks.n_z(), f_z.len())?;
    check_dim(blocks.n_v(), f_v.len())?;
    let z = zz_solver(&blocks.zz, f_z)?;
    let coupling = blocks.vz.apply(&z);
    let rhs: Vec<f64> = f_v.iter().zip(coupling).map(|(f, c)| f - c).collect();
    let v = vv_solver(&blocks.vv, &rhs)?;
    Ok((z, v))
}

/// Sub-solver for [`forward_substitution_solve`]: PCG with `make(A)` as
/// preconditioner, failing when the tolerance is not reached.
pub fn pcg_subsolver<'a, P, F>(
    make: F,
    tol: f64,
    maxit: usize,
) -> impl FnOnce(&SparseOperator, &[f64]) -> Result<Vec<f64>> + 'a
where
    P: Preconditioner,
    F: FnOnce(&SparseOperator) -> Result<P> + 'a,
{
    move |a, b| {
        let p = make(a)?;
        let (x, rep) = crate::krylov::pcg(a, b, &p, tol, maxit)?;
        if !rep.converged {
            return Err(DgError::NotConverged {
                method: "pcg",
                iterations: rep.iterations,
                residual: rep.final_residual(),
            });
        }
        Ok(x)
    }
}
