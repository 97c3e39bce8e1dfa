//! Change of basis from the nodal DG basis to `{ψ_e^z} ∪ {φ_e^CR}` and the
//! resulting 2×2 block operator.
//!
//! Split vectors are ordered `[z; v]`: one `z` coefficient per edge (mesh edge
//! order), then one `v` coefficient per interior edge (interior edge order).

use serde::{Deserialize, Serialize};

use crate::assembly::{check_dim, MethodParams, Variant};
use crate::error::{DgError, Result};
use crate::mesh::{EdgeWeights, Mesh};
use crate::sparse::SparseOperator;

/// Relative size, against `‖Tᵀ A T‖_max`, above which the structurally zero
/// block is reported as a violation.
pub const ZERO_BLOCK_TOL: f64 = 1e-11;

#[derive(Debug, Clone)]
pub struct SplitBasis {
    /// Columns are split basis functions in nodal DG coefficients.
    pub transform: SparseOperator,
    n_z: usize,
    n_v: usize,
    /// `(β⁺, β⁻)` per edge, `(1, 0)` on the boundary.
    sides: Vec<(f64, f64)>,
    /// Nodal dofs of the two edge vertices on `T⁺` and (interior) `T⁻`.
    plus_dofs: Vec<[usize; 2]>,
    minus_dofs: Vec<Option<[usize; 2]>>,
    interior_edges: Vec<usize>,
}

/// Nodal values of `φ_{e,T}` (CR function of local edge `k`): `+1` on the
/// edge's two vertices, `-1` on vertex `k`.
fn cr_local(t: usize, k: usize) -> [(usize, f64); 3] {
    [(3 * t + k, -1.0), (3 * t + (k + 1) % 3, 1.0), (3 * t + (k + 2) % 3, 1.0)]
}

fn edge_dofs(t: usize, k: usize) -> [usize; 2] {
    [3 * t + (k + 1) % 3, 3 * t + (k + 2) % 3]
}

impl SplitBasis {
    pub fn new(mesh: &Mesh, weights: &EdgeWeights) -> Self {
        let n_z = mesh.n_edges();
        let n_v = mesh.n_interior_edges();
        let mut trip = Vec::with_capacity(6 * n_z + 6 * n_v);
        let mut sides = Vec::with_capacity(n_z);
        let mut plus_dofs = Vec::with_capacity(n_z);
        let mut minus_dofs = Vec::with_capacity(n_z);
        for (e, edge) in mesh.edges.iter().enumerate() {
            let (bp, bm) = weights.sides(e);
            sides.push((bp, bm));
            plus_dofs.push(edge_dofs(edge.plus, edge.local_plus));
            for (dof, val) in cr_local(edge.plus, edge.local_plus) {
                trip.push((dof, e, bp * val));
            }
            match (edge.minus, edge.local_minus) {
                (Some(tm), Some(km)) => {
                    minus_dofs.push(Some(edge_dofs(tm, km)));
                    for (dof, val) in cr_local(tm, km) {
                        trip.push((dof, e, -bm * val));
                    }
                    let col = n_z + mesh.interior_edge_index(e).expect("interior edge");
                    for (dof, val) in cr_local(edge.plus, edge.local_plus).into_iter().chain(cr_local(tm, km)) {
                        trip.push((dof, col, val));
                    }
                }
                _ => minus_dofs.push(None),
            }
        }
        let n = n_z + n_v;
        Self {
            transform: SparseOperator::from_triplets(n, n, trip),
            n_z,
            n_v,
            sides,
            plus_dofs,
            minus_dofs,
            interior_edges: mesh.interior_edges().to_vec(),
        }
    }

    pub fn n_z(&self) -> usize {
        self.n_z
    }

    pub fn n_v(&self) -> usize {
        self.n_v
    }

    pub fn dim(&self) -> usize {
        self.n_z + self.n_v
    }

    /// Nodal coefficients of `Σ z_e ψ_e^z + Σ v_e φ_e^CR`.
    pub fn from_split(&self, z: &[f64], v: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.n_z, z.len())?;
        check_dim(self.n_v, v.len())?;
        let mut x = z.to_vec();
        x.extend_from_slice(v);
        Ok(self.transform.apply(&x))
    }

    /// Closed-form inverse of [`from_split`](Self::from_split): with `u^±` the
    /// traces at the edge midpoint, `z_e = u⁺ - u⁻` and `v_e = β⁻u⁺ + β⁺u⁻`.
    pub fn to_split(&self, u: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        check_dim(self.dim(), u.len())?;
        let mid = |d: [usize; 2]| 0.5 * (u[d[0]] + u[d[1]]);
        let mut z = Vec::with_capacity(self.n_z);
        for e in 0..self.n_z {
            let up = mid(self.plus_dofs[e]);
            z.push(up - self.minus_dofs[e].map_or(0.0, mid));
        }
        let v = self
            .interior_edges
            .iter()
            .map(|&e| {
                let (bp, bm) = self.sides[e];
                let um = self.minus_dofs[e].map_or(0.0, mid);
                bm * mid(self.plus_dofs[e]) + bp * um
            })
            .collect();
        Ok((z, v))
    }

    /// `[z; v]` stacked.
    pub fn to_split_vec(&self, u: &[f64]) -> Result<Vec<f64>> {
        let (mut z, v) = self.to_split(u)?;
        z.extend(v);
        Ok(z)
    }

    /// `Tᵀ A T`.
    pub fn split_matrix(&self, a: &SparseOperator) -> Result<SparseOperator> {
        check_dim(self.dim(), a.nrows())?;
        let s = a.galerkin(&self.transform).pruned(1e-14);
        Ok(s.with_symmetric(a.is_flagged_symmetric()))
    }

    /// Partition `Tᵀ A T` for an IP(β)-0 matrix, checking that the
    /// `(z-test, v-trial)` block vanishes.
    pub fn extract_blocks(&self, a: &SparseOperator, params: &MethodParams) -> Result<BlockOperator> {
        let s = self.split_matrix(a)?;
        let nz = self.n_z;
        let n = self.dim();
        let zv = s.block(0..nz, nz..n);
        let threshold = ZERO_BLOCK_TOL * s.max_abs();
        let max_entry = zv.max_abs();
        if params.variant == Variant::Ip0 && max_entry > threshold {
            return Err(DgError::ZeroBlockViolation { max_entry, threshold });
        }
        let sym = params.is_symmetric();
        Ok(BlockOperator {
            zz: s.block(0..nz, 0..nz).with_symmetric(sym),
            vz: s.block(nz..n, 0..nz),
            vv: s.block(nz..n, nz..n).with_symmetric(sym),
            zv: (params.variant == Variant::Ip1).then_some(zv),
            zero_block_max: max_entry,
            full_max: s.max_abs(),
            theta: params.theta,
            variant: params.variant,
        })
    }
}

/// A DG matrix in the split basis. For IP(β)-0 the `(z-test, v-trial)` block
/// is structurally zero and not stored; for IP(β)-1 it is kept in `zv`.
#[derive(Debug, Clone)]
pub struct BlockOperator {
    pub zz: SparseOperator,
    pub vz: SparseOperator,
    pub vv: SparseOperator,
    pub zv: Option<SparseOperator>,
    /// Largest entry found in the `(z-test, v-trial)` block at extraction.
    pub zero_block_max: f64,
    pub full_max: f64,
    pub theta: i8,
    pub variant: Variant,
}

impl BlockOperator {
    pub fn n_z(&self) -> usize {
        self.zz.nrows()
    }

    pub fn n_v(&self) -> usize {
        self.vv.nrows()
    }

    pub fn dim(&self) -> usize {
        self.n_z() + self.n_v()
    }

    /// Full split matrix reassembled from the blocks.
    pub fn assemble_full(&self) -> SparseOperator {
        let nz = self.n_z();
        let n = self.dim();
        let shift = |op: &SparseOperator, r: usize, c: usize| {
            op.iter().map(move |(i, j, v)| (i + r, j + c, v)).collect::<Vec<_>>()
        };
        let mut trip = shift(&self.zz, 0, 0);
        trip.extend(shift(&self.vz, nz, 0));
        trip.extend(shift(&self.vv, nz, nz));
        if let Some(zv) = &self.zv {
            trip.extend(shift(zv, 0, nz));
        }
        SparseOperator::from_triplets(n, n, trip).with_symmetric(self.theta == -1)
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let nz = self.n_z();
        let (xz, xv) = x.split_at(nz);
        let mut yz = self.zz.apply(xz);
        if let Some(zv) = &self.zv {
            for (a, b) in yz.iter_mut().zip(zv.apply(xv)) {
                *a += b;
            }
        }
        let mut yv = self.vv.apply(xv);
        for (a, b) in yv.iter_mut().zip(self.vz.apply(xz)) {
            *a += b;
        }
        yz.extend(yv);
        yz
    }
}

/// Summary of the structural checks on one split matrix.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct BlockStructure {
    pub zero_block_rel: f64,
    pub vz_rel: f64,
    pub zz_offdiag_rel: f64,
    pub zz_asymmetry_rel: f64,
}

impl BlockOperator {
    pub fn structure(&self) -> BlockStructure {
        let diag_max = self.zz.diagonal().iter().fold(0.0_f64, |m, d| m.max(d.abs()));
        let offdiag = self.zz.iter().filter(|(i, j, _)| i != j).fold(0.0_f64, |m, (_, _, v)| m.max(v.abs()));
        BlockStructure {
            zero_block_rel: self.zero_block_max / self.full_max,
            vz_rel: self.vz.max_abs() / self.full_max,
            zz_offdiag_rel: offdiag / diag_max,
            zz_asymmetry_rel: self.zz.asymmetry() / self.zz.max_abs(),
        }
    }
}

/// `Σ_e (|e|/h_e) κ_e z1_e z2_e`.
pub fn star_product(z1: &[f64], z2: &[f64], mesh: &Mesh, weights: &EdgeWeights) -> Result<f64> {
    check_dim(mesh.n_edges(), z1.len())?;
    check_dim(mesh.n_edges(), z2.len())?;
    Ok(star_weights(mesh, weights).iter().zip(z1).zip(z2).map(|((w, a), b)| w * a * b).sum())
}

/// Diagonal of the ∗-product.
pub fn star_weights(mesh: &Mesh, weights: &EdgeWeights) -> Vec<f64> {
    // h_e is the edge length, so |e|/h_e = 1
    mesh.edges.iter().zip(&weights.kappa_e).map(|(e, k)| e.length / e.length * k).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assembly::DgProblem;
    use crate::mesh::build_initial_mesh;
    use nalgebra::{DMatrix, DVector};
    use proptest::prelude::*;

    fn setup(mesh: &Mesh, eps: f64) -> (DgProblem<'_>, SplitBasis) {
        let p = DgProblem::with_epsilon(mesh, eps).unwrap();
        let b = SplitBasis::new(mesh, &p.weights);
        (p, b)
    }

    #[test]
    fn dimensions() {
        let mut m = build_initial_mesh();
        for _ in 0..3 {
            let (_, b) = setup(&m, 1.0);
            assert_eq!(b.dim(), 2 * m.n_edges() - m.n_boundary_edges());
            assert_eq!(b.dim(), 3 * m.n_triangles());
            m = m.refine();
        }
    }

    #[test]
    fn constant_coefficient_gives_half_weights() {
        let m = build_initial_mesh();
        let (_, b) = setup(&m, 1.0);
        let e = m.interior_edges()[3];
        let edge = &m.edges[e];
        let mut z = vec![0.0; b.n_z()];
        z[e] = 1.0;
        let u = b.from_split(&z, &vec![0.0; b.n_v()]).unwrap();
        for (t, k, s) in [(edge.plus, edge.local_plus, 0.5), (edge.minus.unwrap(), edge.local_minus.unwrap(), -0.5)] {
            for (dof, val) in cr_local(t, k) {
                assert_eq!(u[dof], s * val);
            }
        }
    }

    #[test]
    fn z_jumps_are_kronecker_and_cr_jumps_vanish_at_midpoints() {
        let m = build_initial_mesh().refine();
        let (_, b) = setup(&m, 1e-3);
        let mid = |u: &[f64], d: [usize; 2]| 0.5 * (u[d[0]] + u[d[1]]);
        for e in [0, 7, 40, 100] {
            let mut z = vec![0.0; b.n_z()];
            z[e] = 1.0;
            let u = b.from_split(&z, &vec![0.0; b.n_v()]).unwrap();
            for e2 in 0..m.n_edges() {
                let jump = mid(&u, b.plus_dofs[e2]) - b.minus_dofs[e2].map_or(0.0, |d| mid(&u, d));
                assert!((jump - f64::from(u8::from(e == e2))).abs() < 1e-15);
            }
        }
        for i in [0, 33, 150] {
            let mut v = vec![0.0; b.n_v()];
            v[i] = 1.0;
            let u = b.from_split(&vec![0.0; b.n_z()], &v).unwrap();
            for e2 in m.interior_edges() {
                let jump = mid(&u, b.plus_dofs[*e2]) - mid(&u, b.minus_dofs[*e2].unwrap());
                assert!(jump.abs() < 1e-15);
            }
        }
    }

    #[test]
    fn constant_function_split() {
        let m = build_initial_mesh();
        let (_, b) = setup(&m, 1e-5);
        let (z, v) = b.to_split(&vec![1.0; m.dg_dofs()]).unwrap();
        assert!(v.iter().all(|&x| (x - 1.0).abs() < 1e-15));
        for (e, edge) in m.edges.iter().enumerate() {
            let want = if edge.is_boundary() { 1.0 } else { 0.0 };
            assert!((z[e] - want).abs() < 1e-15);
        }
        assert!(b.to_split(&[1.0]).is_err());
    }

    #[test]
    fn unit_z_roundtrip() {
        let m = build_initial_mesh();
        let (_, b) = setup(&m, 1e-3);
        let mut z = vec![0.0; b.n_z()];
        z[11] = 1.0;
        let u = b.from_split(&z, &vec![0.0; b.n_v()]).unwrap();
        let (z2, v2) = b.to_split(&u).unwrap();
        assert_eq!(z2, z);
        assert!(v2.iter().all(|&x| x.abs() < 1e-15));
    }

    #[test]
    fn closed_form_inverse_matches_dense_solve() {
        let m = build_initial_mesh();
        let (_, b) = setup(&m, 1e-3);
        let t = b.transform.to_dense();
        let u = DVector::from_fn(b.dim(), |i, _| ((i * 7919) % 97) as f64 / 97.0 - 0.5);
        let x = t.lu().solve(&u).unwrap();
        let y = b.to_split_vec(u.as_slice()).unwrap();
        let diff = (&x - DVector::from_vec(y)).amax();
        assert!(diff < 1e-12 * x.amax());
    }

    #[test]
    fn orthogonality_all_theta() {
        let mut m = build_initial_mesh();
        for _ in 0..3 {
            for eps in [1e-5, 1.0, 1e5] {
                let (p, b) = setup(&m, eps);
                for theta in [-1, 0, 1] {
                    let params = MethodParams::new(theta, 8.0, Variant::Ip0).unwrap();
                    let blocks = b.extract_blocks(&p.assemble(&params), &params).unwrap();
                    let s = blocks.structure();
                    assert!(s.zero_block_rel < 1e-12, "theta {theta} eps {eps}: {}", s.zero_block_rel);
                    if theta == -1 {
                        assert!(s.vz_rel < 1e-12);
                    }
                    assert!(s.zz_asymmetry_rel < 1e-12, "theta {theta}: {}", s.zz_asymmetry_rel);
                }
            }
            m = m.refine();
        }
    }

    #[test]
    fn iipg_zz_is_diagonal_with_penalty_constant() {
        let mut m = build_initial_mesh();
        for _ in 0..3 {
            for eps in [1e-5, 1e-1, 1e3] {
                let (p, b) = setup(&m, eps);
                let params = MethodParams::new(0, 8.0, Variant::Ip0).unwrap();
                let blocks = b.extract_blocks(&p.assemble(&params), &params).unwrap();
                assert!(blocks.structure().zz_offdiag_rel < 1e-12);
                // measured: α κ_e |e| / h_e
                for (e, d) in blocks.zz.diagonal().iter().enumerate() {
                    let want = 8.0 * p.weights.kappa_e[e] * m.edges[e].length / m.edges[e].length;
                    assert!((d - want).abs() < 1e-12 * want, "edge {e}: {d} vs {want}");
                }
            }
            m = m.refine();
        }
    }

    #[test]
    fn vv_block_is_crouzeix_raviart_stiffness() {
        let m = build_initial_mesh().refine();
        for eps in [1e-5, 1.0, 1e3] {
            let (p, b) = setup(&m, eps);
            let params = MethodParams::sipg0(8.0);
            let blocks = b.extract_blocks(&p.assemble(&params), &params).unwrap();
            let cr = p.assemble_crouzeix_raviart();
            let d = blocks.vv.linear_combination(1.0, &cr, -1.0).max_abs();
            assert!(d < 1e-12 * cr.max_abs());
        }
    }

    #[test]
    fn ip1_blocks_keep_upper_block() {
        let m = build_initial_mesh();
        let (p, b) = setup(&m, 1e-3);
        let params = MethodParams::new(-1, 8.0, Variant::Ip1).unwrap();
        let a = p.assemble(&params);
        let blocks = b.extract_blocks(&a, &params).unwrap();
        assert!(blocks.zv.is_some());
        let full = b.split_matrix(&a).unwrap();
        let diff = blocks.assemble_full().linear_combination(1.0, &full, -1.0).max_abs();
        assert!(diff == 0.0);
        let x: Vec<f64> = (0..b.dim()).map(|i| (i as f64).sin()).collect();
        let y1 = blocks.apply(&x);
        let y2 = full.apply(&x);
        assert!(y1.iter().zip(&y2).all(|(a, b)| (a - b).abs() < 1e-12));
    }

    #[test]
    fn basis_change_preserves_generalized_spectrum() {
        let m = build_initial_mesh();
        let (p, b) = setup(&m, 1e-1);
        let a = p.assemble(&MethodParams::sipg0(8.0)).to_dense();
        let g = p.energy_gram(false).to_dense();
        let t = b.transform.to_dense();
        let gen = |a: &DMatrix<f64>, g: &DMatrix<f64>| {
            let l = g.clone().cholesky().unwrap().l();
            let li = l.try_inverse().unwrap();
            let c = &li * a * li.transpose();
            let mut e: Vec<f64> = ((&c + c.transpose()) * 0.5).symmetric_eigenvalues().iter().copied().collect();
            e.sort_by(|x, y| x.partial_cmp(y).unwrap());
            e
        };
        let e1 = gen(&a, &g);
        let e2 = gen(&(t.transpose() * &a * &t), &(t.transpose() * &g * &t));
        for (x, y) in e1.iter().zip(&e2) {
            assert!((x - y).abs() < 1e-9 * e1.last().unwrap());
        }
    }

    #[test]
    fn star_product_examples() {
        let m = build_initial_mesh();
        let p = DgProblem::with_epsilon(&m, 1e-3).unwrap();
        let mut z = vec![0.0; m.n_edges()];
        z[5] = 1.0;
        let s = star_product(&z, &z, &m, &p.weights).unwrap();
        assert_eq!(s, p.weights.kappa_e[5]);
        let z1: Vec<f64> = (0..m.n_edges()).map(|i| i as f64).collect();
        let z2: Vec<f64> = (0..m.n_edges()).map(|i| 1.0 / (1.0 + i as f64)).collect();
        let a = star_product(&z1.iter().map(|x| 3.0 * x).collect::<Vec<_>>(), &z2, &m, &p.weights).unwrap();
        assert!((a - 3.0 * star_product(&z1, &z2, &m, &p.weights).unwrap()).abs() < 1e-12 * a.abs());
    }

    #[test]
    fn zz_block_equivalent_to_star_product_uniformly() {
        let m = build_initial_mesh();
        let mut ranges = Vec::new();
        for eps in [1e-5, 1.0, 1e5] {
            let (p, b) = setup(&m, eps);
            let params = MethodParams::sipg0(8.0);
            let blocks = b.extract_blocks(&p.assemble(&params), &params).unwrap();
            let w = star_weights(&m, &p.weights);
            let zz = blocks.zz.to_dense();
            let c = DMatrix::from_fn(zz.nrows(), zz.ncols(), |i, j| zz[(i, j)] / (w[i] * w[j]).sqrt());
            let e = c.symmetric_eigenvalues();
            ranges.push((e.min(), e.max()));
        }
        for (lo, hi) in &ranges {
            assert!(*lo > 0.0);
            assert!((lo - ranges[1].0).abs() < 0.05 * ranges[1].0);
            assert!((hi - ranges[1].1).abs() < 0.05 * ranges[1].1);
        }
    }

    proptest! {
        #[test]
        fn split_roundtrip(seed in 0u64..1000, eps_exp in -5i32..=5) {
            let m = build_initial_mesh();
            let (_, b) = setup(&m, 10f64.powi(eps_exp));
            let u: Vec<f64> = (0..b.dim()).map(|i| (((i as u64 + 1) * (seed + 17)) % 1013) as f64 / 1013.0 - 0.5).collect();
            let (z, v) = b.to_split(&u).unwrap();
            let back = b.from_split(&z, &v).unwrap();
            let scale = u.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
            for (a, c) in u.iter().zip(&back) {
                prop_assert!((a - c).abs() <= 1e-13 * scale.max(1.0));
            }
        }
    }
}
