//! Shared fixtures for the kernel benchmarks.

use ipdg_core::mesh::{build_hierarchy, MeshHierarchy};
use ipdg_core::split::{BlockOperator, SplitBasis};
use ipdg_core::{DgProblem, MethodParams};

/// Hierarchy up to `level` and the SIPG(β)-0 split blocks on its finest mesh.
pub fn sipg0_fixture(level: usize, eps: f64) -> (MeshHierarchy, BlockOperator) {
    let h = build_hierarchy(level);
    let blocks = {
        let p = DgProblem::with_epsilon(h.finest(), eps).expect("valid coefficient");
        let params = MethodParams::sipg0(8.0);
        let basis = SplitBasis::new(p.mesh, &p.weights);
        basis.extract_blocks(&p.assemble(&params), &params).expect("block structure")
    };
    (h, blocks)
}
