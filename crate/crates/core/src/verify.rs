//! Structural property suite: orthogonality of the split, block shapes,
//! the Galerkin identity on conforming functions and spectral equivalence
//! of the full and weakly penalized symmetric forms.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::assembly::{DgProblem, MethodParams, Variant};
use crate::error::Result;
use crate::krylov::dense_generalized_eigenvalues;
use crate::mesh::{build_hierarchy, MeshHierarchy};
use crate::precond::cr_prolongation;
use crate::split::SplitBasis;

/// Relative threshold for entries that must vanish.
pub const STRUCTURAL_TOL: f64 = 1e-12;
/// Largest DG dimension for which the dense pencil is solved.
pub const PENCIL_LIMIT: usize = 1536;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropertyCheck {
    pub name: String,
    pub value: f64,
    pub threshold: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub level: usize,
    pub eps: f64,
    pub alpha: f64,
    pub checks: Vec<PropertyCheck>,
    /// Extremes of the generalized spectrum of `(A, A₀)`, when computed.
    pub pencil_bounds: Option<(f64, f64)>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "verify level={} eps={:e} alpha={}", self.level, self.eps, self.alpha);
        for c in &self.checks {
            let _ = writeln!(
                s,
                "{} {}: {:.3e} (threshold {:.3e})",
                if c.pass { "PASS" } else { "FAIL" },
                c.name,
                c.value,
                c.threshold
            );
        }
        let _ = writeln!(s, "{}", if self.passed() { "PASS" } else { "FAIL" });
        s
    }
}

fn below(name: String, value: f64, threshold: f64) -> PropertyCheck {
    PropertyCheck { name, value, threshold, pass: value.is_finite() && value < threshold }
}

/// Smallest and largest generalized eigenvalue of `(A, A₀)` for SIPG,
/// computed as `1 + eig(A - A₀, A₀)`: the difference is a pure penalty term.
pub fn pencil_bounds(p: &DgProblem, alpha: f64) -> Result<(f64, f64)> {
    let a1 = p.assemble(&MethodParams::new(-1, alpha, Variant::Ip1)?);
    let a0 = p.assemble(&MethodParams::sipg0(alpha));
    let g = dense_generalized_eigenvalues(&a1.linear_combination(1.0, &a0, -1.0).to_dense(), &a0.to_dense())?;
    Ok((1.0 + g[0], 1.0 + g[g.len() - 1]))
}

pub fn run_verify(level: usize, eps: f64, alpha: f64) -> Result<VerifyReport> {
    let h = build_hierarchy(level);
    let p = DgProblem::with_epsilon(h.finest(), eps)?;
    let basis = SplitBasis::new(p.mesh, &p.weights);
    let mut checks = Vec::new();

    for theta in [-1i8, 0, 1] {
        let params = MethodParams::new(theta, alpha, Variant::Ip0)?;
        let s = basis.split_matrix(&p.assemble(&params))?;
        let nz = basis.n_z();
        let zv = s.block(0..nz, nz..basis.dim()).max_abs() / s.max_abs();
        checks.push(below(format!("orthogonality theta={theta}"), zv, STRUCTURAL_TOL));
        if theta == 0 {
            let blocks = basis.extract_blocks(&p.assemble(&params), &params)?;
            checks.push(below("iipg zz diagonal".into(), blocks.structure().zz_offdiag_rel, STRUCTURAL_TOL));
        }
    }

    let sipg = MethodParams::sipg0(alpha);
    let blocks = basis.extract_blocks(&p.assemble(&sipg), &sipg)?;
    let st = blocks.structure();
    checks.push(below("sipg zz symmetry".into(), st.zz_asymmetry_rel, STRUCTURAL_TOL));
    checks.push(below("sipg vv symmetry".into(), blocks.vv.asymmetry() / blocks.vv.max_abs(), STRUCTURAL_TOL));

    for l in 0..=level {
        let hh = MeshHierarchy { meshes: h.meshes[..=l].to_vec() };
        let pi = cr_prolongation(&h, l, level)?;
        let coarse = DgProblem::with_epsilon(hh.finest(), eps)?;
        let conf = coarse.assemble_conforming();
        let diff = blocks.vv.galerkin(&pi).linear_combination(1.0, &conf, -1.0).max_abs() / conf.max_abs();
        checks.push(below(format!("galerkin identity level {l}"), diff, STRUCTURAL_TOL));
    }

    let mut bounds = None;
    if p.dg_dim() <= PENCIL_LIMIT {
        let (lo, hi) = pencil_bounds(&p, alpha)?;
        checks.push(PropertyCheck {
            name: "spectral equivalence lower bound".into(),
            value: lo,
            threshold: 1.0 - 1e-10,
            pass: lo >= 1.0 - 1e-10,
        });
        checks.push(PropertyCheck {
            name: "spectral equivalence upper bound finite".into(),
            value: hi,
            threshold: f64::INFINITY,
            pass: hi.is_finite() && hi >= lo,
        });
        bounds = Some((lo, hi));
    }
    Ok(VerifyReport { level, eps, alpha, checks, pencil_bounds: bounds })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_passes_on_small_meshes() {
        for eps in [1e-5, 1.0, 1e5] {
            let r = run_verify(1, eps, 8.0).unwrap();
            assert!(r.passed(), "{}", r.to_text());
            assert!(r.pencil_bounds.is_some());
        }
    }

    #[test]
    fn pencil_upper_bound_grows_with_penalty() {
        let h = build_hierarchy(0);
        let p = DgProblem::with_epsilon(h.finest(), 1.0).unwrap();
        let (_, c8) = pencil_bounds(&p, 8.0).unwrap();
        let (_, c32) = pencil_bounds(&p, 32.0).unwrap();
        assert!(c32 > c8);
    }
}
