//! Preconditioned conjugate gradients with Lanczos Ritz values, spectrum
//! estimation for `B·A`, condition numbers, the preconditioned stationary
//! iteration and the norm of its error propagator.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::assembly::{check_dim, dot};
use crate::error::{DgError, Result};
use crate::sparse::{CholeskyFactor, SparseOperator};

/// A linear map `r ↦ B r` standing in for an approximate inverse.
pub trait Preconditioner: Send + Sync {
    fn dim(&self) -> usize;

    fn apply_into(&self, r: &[f64], out: &mut [f64]);

    fn apply(&self, r: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        self.apply_into(r, &mut out);
        out
    }

    /// Whether the operator is symmetric positive definite.
    fn is_spd(&self) -> bool {
        true
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Identity(pub usize);

impl Preconditioner for Identity {
    fn dim(&self) -> usize {
        self.0
    }

    fn apply_into(&self, r: &[f64], out: &mut [f64]) {
        out.copy_from_slice(r);
    }
}

impl Preconditioner for CholeskyFactor {
    fn dim(&self) -> usize {
        CholeskyFactor::dim(self)
    }

    fn apply_into(&self, r: &[f64], out: &mut [f64]) {
        out.copy_from_slice(&self.solve(r));
    }
}

impl<P: Preconditioner + ?Sized> Preconditioner for Box<P> {
    fn dim(&self) -> usize {
        (**self).dim()
    }

    fn apply_into(&self, r: &[f64], out: &mut [f64]) {
        (**self).apply_into(r, out)
    }

    fn is_spd(&self) -> bool {
        (**self).is_spd()
    }
}

impl<P: Preconditioner + ?Sized> Preconditioner for &P {
    fn dim(&self) -> usize {
        (**self).dim()
    }

    fn apply_into(&self, r: &[f64], out: &mut [f64]) {
        (**self).apply_into(r, out)
    }

    fn is_spd(&self) -> bool {
        (**self).is_spd()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub iterations: usize,
    pub rel_residual_history: Vec<f64>,
    pub converged: bool,
    pub eig_min: f64,
    pub eig_max: f64,
    /// A few of the smallest eigenvalue estimates, ascending.
    pub eig_sorted_low: Vec<f64>,
    #[serde(rename = "K")]
    pub k: f64,
    #[serde(rename = "K_m")]
    pub k_m: BTreeMap<usize, f64>,
    /// `‖x - x_k‖_A` per iterate, when a reference solution was supplied.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub a_norm_errors: Option<Vec<f64>>,
}

const LOW_EIGS_REPORTED: usize = 5;

impl SolveReport {
    /// Fill the eigenvalue fields from an ascending list.
    pub fn set_spectrum(&mut self, eigs: &[f64], ms: &[usize]) -> Result<()> {
        let c = condition_numbers(eigs, ms)?;
        self.eig_min = eigs[0];
        self.eig_max = eigs[eigs.len() - 1];
        self.eig_sorted_low = eigs.iter().take(LOW_EIGS_REPORTED).copied().collect();
        self.k = c.k;
        self.k_m = c.k_m;
        Ok(())
    }

    pub fn final_residual(&self) -> f64 {
        self.rel_residual_history.last().copied().unwrap_or(0.0)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionNumbers {
    #[serde(rename = "K")]
    pub k: f64,
    #[serde(rename = "K_m")]
    pub k_m: BTreeMap<usize, f64>,
}

/// `K = λ_N/λ_1` and `K_m = λ_N/λ_{m+1}` from ascending positive eigenvalues.
pub fn condition_numbers(eigs: &[f64], ms: &[usize]) -> Result<ConditionNumbers> {
    let n = eigs.len();
    if n == 0 {
        return Err(DgError::InvalidIndex { m: 0, n: 0 });
    }
    if eigs[0] <= 0.0 || eigs.windows(2).any(|w| w[0] > w[1]) {
        return Err(DgError::InvalidParameter("eigenvalues must be positive and ascending".into()));
    }
    let top = eigs[n - 1];
    let mut k_m = BTreeMap::new();
    for &m in ms {
        if m >= n {
            return Err(DgError::InvalidIndex { m, n });
        }
        k_m.insert(m, top / eigs[m]);
    }
    k_m.insert(0, top / eigs[0]);
    Ok(ConditionNumbers { k: top / eigs[0], k_m })
}

fn norm(x: &[f64]) -> f64 {
    dot(x, x).sqrt()
}

fn axpy(a: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

/// Eigenvalues of the CG-Lanczos tridiagonal, ascending.
fn cg_ritz_values(alphas: &[f64], betas: &[f64]) -> Vec<f64> {
    let k = alphas.len();
    if k == 0 {
        return Vec::new();
    }
    let mut t = DMatrix::zeros(k, k);
    for j in 0..k {
        t[(j, j)] = 1.0 / alphas[j] + if j > 0 { betas[j - 1] / alphas[j - 1] } else { 0.0 };
        if j + 1 < k {
            let off = betas[j].sqrt() / alphas[j];
            t[(j, j + 1)] = off;
            t[(j + 1, j)] = off;
        }
    }
    sorted(t.symmetric_eigenvalues().iter().copied().collect())
}

fn sorted(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(|a, b| a.total_cmp(b));
    v
}

/// Preconditioned CG from `x₀ = 0`, stopping when `‖r_k‖/‖r₀‖ < tol`.
///
/// Hitting `maxit` is not an error: the report has `converged = false`.
pub fn pcg<P: Preconditioner + ?Sized>(
    a: &SparseOperator,
    b: &[f64],
    prec: &P,
    tol: f64,
    maxit: usize,
) -> Result<(Vec<f64>, SolveReport)> {
    pcg_tracked(a, b, prec, tol, maxit, None)
}

/// [`pcg`] that also records the A-norm error against `reference`.
pub fn pcg_tracked<P: Preconditioner + ?Sized>(
    a: &SparseOperator,
    b: &[f64],
    prec: &P,
    tol: f64,
    maxit: usize,
    reference: Option<&[f64]>,
) -> Result<(Vec<f64>, SolveReport)> {
    let n = a.nrows();
    check_dim(n, b.len())?;
    check_dim(n, prec.dim())?;
    if let Some(r) = reference {
        check_dim(n, r.len())?;
    }
    let a_err = |x: &[f64]| {
        reference.map(|u| {
            let e: Vec<f64> = u.iter().zip(x).map(|(u, x)| u - x).collect();
            dot(&e, &a.apply(&e)).max(0.0).sqrt()
        })
    };

    let mut x = vec![0.0; n];
    let mut r = b.to_vec();
    let r0 = norm(&r);
    let mut report = SolveReport { converged: true, rel_residual_history: vec![1.0], ..Default::default() };
    let mut errors = a_err(&x).map(|e| vec![e]);
    if r0 == 0.0 {
        report.rel_residual_history = vec![0.0];
        report.a_norm_errors = errors;
        return Ok((x, report));
    }

    let mut z = prec.apply(&r);
    let mut rz = dot(&r, &z);
    if !(rz > 0.0) {
        return Err(DgError::Breakdown { method: "pcg", iteration: 0, reason: format!("r·Br = {rz:e}") });
    }
    let mut p = z.clone();
    let mut q = vec![0.0; n];
    let (mut alphas, mut betas) = (Vec::new(), Vec::new());
    report.converged = false;
    for k in 0..maxit {
        a.apply_into(&p, &mut q);
        let pap = dot(&p, &q);
        if !(pap > 0.0) {
            return Err(DgError::Breakdown { method: "pcg", iteration: k, reason: format!("p·Ap = {pap:e}") });
        }
        let alpha = rz / pap;
        axpy(alpha, &p, &mut x);
        axpy(-alpha, &q, &mut r);
        alphas.push(alpha);
        let rel = norm(&r) / r0;
        report.rel_residual_history.push(rel);
        if let (Some(errs), Some(e)) = (errors.as_mut(), a_err(&x)) {
            errs.push(e);
        }
        if rel < tol {
            report.converged = true;
            break;
        }
        prec.apply_into(&r, &mut z);
        let rz_new = dot(&r, &z);
        if !(rz_new > 0.0) {
            return Err(DgError::Breakdown { method: "pcg", iteration: k, reason: format!("r·Br = {rz_new:e}") });
        }
        let beta = rz_new / rz;
        betas.push(beta);
        rz = rz_new;
        for (pi, zi) in p.iter_mut().zip(&z) {
            *pi = zi + beta * *pi;
        }
    }
    report.iterations = alphas.len();
    report.a_norm_errors = errors;
    let ritz = cg_ritz_values(&alphas, &betas);
    if !ritz.is_empty() && ritz[0] > 0.0 {
        report.set_spectrum(&ritz, &[])?;
    }
    Ok((x, report))
}

/// Largest dimension handled by the dense eigensolver path.
pub const DENSE_LIMIT: usize = 2500;
/// Lanczos steps used by [`estimate_spectrum`] beyond [`DENSE_LIMIT`].
pub const LANCZOS_STEPS: usize = 400;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpectrumMethod {
    /// Dense below [`DENSE_LIMIT`], Lanczos above.
    Auto,
    Dense,
    Lanczos {
        steps: usize,
    },
}

#[derive(Debug, Clone)]
pub struct LanczosResult {
    /// Ritz values, ascending.
    pub ritz: Vec<f64>,
    pub steps: usize,
    /// Largest second-pass reorthogonalization coefficient, relative to the
    /// A-norm of the unprojected vector.
    pub max_reorth_correction: f64,
}

impl LanczosResult {
    pub fn lost_orthogonality(&self) -> bool {
        self.max_reorth_correction > 1e-8
    }
}

/// Eigenvalue estimates of `B·A` for SPD `A` and SPD `B`, ascending.
pub fn estimate_spectrum<P: Preconditioner + ?Sized>(
    a: &SparseOperator,
    prec: &P,
    method: SpectrumMethod,
    seed: u64,
) -> Result<Vec<f64>> {
    let n = a.nrows();
    match method {
        SpectrumMethod::Dense => dense_spectrum(a, prec),
        SpectrumMethod::Auto if n <= DENSE_LIMIT => dense_spectrum(a, prec),
        SpectrumMethod::Auto => Ok(lanczos(a, prec, LANCZOS_STEPS.min(n), seed)?.ritz),
        SpectrumMethod::Lanczos { steps } => Ok(lanczos(a, prec, steps.min(n), seed)?.ritz),
    }
}

/// Dense matrix of a preconditioner, column by column.
pub fn dense_preconditioner<P: Preconditioner + ?Sized>(prec: &P) -> DMatrix<f64> {
    let n = prec.dim();
    let mut m = DMatrix::zeros(n, n);
    let mut e = vec![0.0; n];
    let mut col = vec![0.0; n];
    for j in 0..n {
        e[j] = 1.0;
        prec.apply_into(&e, &mut col);
        m.column_mut(j).copy_from_slice(&col);
        e[j] = 0.0;
    }
    m
}

/// Eigenvalues of `B·A` as those of `Lᵀ B L`, `A = L Lᵀ`.
pub fn dense_spectrum<P: Preconditioner + ?Sized>(a: &SparseOperator, prec: &P) -> Result<Vec<f64>> {
    check_dim(a.nrows(), prec.dim())?;
    let l = a.to_dense().cholesky().ok_or_else(|| DgError::NotSpd { context: "dense spectrum".into() })?.l();
    let b = dense_preconditioner(prec);
    let b = (&b + b.transpose()) * 0.5;
    let c = l.transpose() * b * &l;
    let c = (&c + c.transpose()) * 0.5;
    Ok(sorted(c.symmetric_eigenvalues().iter().copied().collect()))
}

/// Generalized eigenvalues of the symmetric pencil `(A, M)`, `M` SPD, ascending.
pub fn dense_generalized_eigenvalues(a: &DMatrix<f64>, m: &DMatrix<f64>) -> Result<Vec<f64>> {
    let l = m.clone().cholesky().ok_or_else(|| DgError::NotSpd { context: "generalized eigenproblem".into() })?.l();
    let singular = || DgError::NotSpd { context: "generalized eigenproblem".into() };
    // L⁻¹ A L⁻ᵀ by two triangular solves
    let x = l.solve_lower_triangular(a).ok_or_else(singular)?;
    let c = l.solve_lower_triangular(&x.transpose()).ok_or_else(singular)?;
    let c = (&c + c.transpose()) * 0.5;
    Ok(sorted(c.symmetric_eigenvalues().iter().copied().collect()))
}

pub fn random_vector(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

/// Lanczos for `B·A` in the `A` inner product, with full reorthogonalization.
pub fn lanczos<P: Preconditioner + ?Sized>(
    a: &SparseOperator,
    prec: &P,
    steps: usize,
    seed: u64,
) -> Result<LanczosResult> {
    let n = a.nrows();
    check_dim(n, prec.dim())?;
    let steps = steps.min(n).max(1);
    let mut q = random_vector(n, seed);
    let mut aq = a.apply(&q);
    let nrm = dot(&q, &aq).sqrt();
    if !(nrm > 0.0) {
        return Err(DgError::NotSpd { context: "lanczos start vector".into() });
    }
    q.iter_mut().for_each(|v| *v /= nrm);
    aq.iter_mut().for_each(|v| *v /= nrm);

    let mut qs: Vec<Vec<f64>> = Vec::with_capacity(steps);
    let mut aqs: Vec<Vec<f64>> = Vec::with_capacity(steps);
    let (mut diag, mut off) = (Vec::new(), Vec::new());
    let mut max_corr = 0.0_f64;
    for j in 0..steps {
        let mut w = prec.apply(&aq);
        let alpha = dot(&w, &aq);
        qs.push(q);
        aqs.push(aq);
        diag.push(alpha);
        let wn = dot(&w, &a.apply(&w)).max(0.0).sqrt();
        for pass in 0..2 {
            for (qi, aqi) in qs.iter().zip(&aqs) {
                let c = dot(&w, aqi);
                if pass == 1 && wn > 0.0 {
                    max_corr = max_corr.max(c.abs() / wn);
                }
                axpy(-c, qi, &mut w);
            }
        }
        let aw = a.apply(&w);
        let beta = dot(&w, &aw).max(0.0).sqrt();
        if j + 1 == steps || beta <= 1e-12 * alpha.abs() {
            break;
        }
        off.push(beta);
        q = w.iter().map(|v| v / beta).collect();
        aq = aw.iter().map(|v| v / beta).collect();
    }
    let k = diag.len();
    let mut t = DMatrix::zeros(k, k);
    for i in 0..k {
        t[(i, i)] = diag[i];
        if i + 1 < k {
            t[(i, i + 1)] = off[i];
            t[(i + 1, i)] = off[i];
        }
    }
    Ok(LanczosResult {
        ritz: sorted(t.symmetric_eigenvalues().iter().copied().collect()),
        steps: k,
        max_reorth_correction: max_corr,
    })
}

/// `u_{k+1} = u_k + B(f - A u_k)` until `‖f - A u_k‖/‖f - A u_0‖ < tol`.
pub fn stationary_iteration<P: Preconditioner + ?Sized>(
    a: &SparseOperator,
    prec: &P,
    f: &[f64],
    u0: &[f64],
    maxit: usize,
    tol: f64,
) -> Result<(Vec<f64>, SolveReport)> {
    let n = a.nrows();
    check_dim(n, f.len())?;
    check_dim(n, u0.len())?;
    check_dim(n, prec.dim())?;
    let mut u = u0.to_vec();
    let residual = |u: &[f64]| -> Vec<f64> { f.iter().zip(a.apply(u)).map(|(f, au)| f - au).collect() };
    let mut r = residual(&u);
    let r0 = norm(&r);
    let mut report = SolveReport { rel_residual_history: vec![1.0], ..Default::default() };
    if r0 == 0.0 {
        report.converged = true;
        report.rel_residual_history = vec![0.0];
        return Ok((u, report));
    }
    for k in 0..maxit {
        let e = prec.apply(&r);
        axpy(1.0, &e, &mut u);
        r = residual(&u);
        let rel = norm(&r) / r0;
        report.rel_residual_history.push(rel);
        report.iterations = k + 1;
        if !rel.is_finite() || rel > 10.0 {
            return Err(DgError::Diverged { iteration: k + 1, residual: rel });
        }
        if rel < tol {
            report.converged = true;
            break;
        }
    }
    Ok((u, report))
}

/// Tolerance on the relative change of the eigenvalue estimate.
pub const PROPAGATOR_TOL: f64 = 1e-10;
/// Block width of the power iteration; clustered top eigenvalues of `E*E`
/// stall a single vector.
pub const PROPAGATOR_BLOCK: usize = 6;
const PROPAGATOR_MAXIT: usize = 20_000;

/// `‖I - A_S⁻¹A‖` in the `A_S` norm, `A_S = (A + Aᵀ)/2`: block power
/// iteration on `E*E` with `E* = I - A_S⁻¹Aᵀ` the `A_S`-adjoint, Rayleigh-Ritz
/// on the block in the `A_S` inner product.
pub fn error_propagator_norm(a: &SparseOperator, seed: u64) -> Result<f64> {
    let n = a.nrows();
    let a_s = a.symmetric_part();
    let solver = CholeskyFactor::new(&a_s).map_err(|_| DgError::NotSpd { context: "symmetric part A_S".into() })?;
    let e_apply = |x: &[f64], transpose: bool| -> Vec<f64> {
        let ax = if transpose { a.apply_transpose(x) } else { a.apply(x) };
        let s = solver.solve(&ax);
        x.iter().zip(s).map(|(x, s)| x - s).collect()
    };

    let p = PROPAGATOR_BLOCK.min(n);
    let mut block: Vec<Vec<f64>> = (0..p as u64).map(|i| random_vector(n, seed.wrapping_add(i))).collect();
    let mut mu_old = f64::NAN;
    for _ in 0..PROPAGATOR_MAXIT {
        let (x, sx) = s_orthonormalize(&a_s, block);
        if x.is_empty() {
            return Ok(0.0);
        }
        let y: Vec<Vec<f64>> = x.iter().map(|xi| e_apply(&e_apply(xi, false), true)).collect();
        let k = x.len();
        let g = DMatrix::from_fn(k, k, |i, j| 0.5 * (dot(&sx[i], &y[j]) + dot(&sx[j], &y[i])));
        let eig = g.symmetric_eigen();
        let mut order: Vec<usize> = (0..k).collect();
        order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
        let mu = eig.eigenvalues[order[0]];
        if mu <= 0.0 {
            return Ok(0.0);
        }
        if (mu - mu_old).abs() <= PROPAGATOR_TOL * mu {
            return Ok(mu.sqrt());
        }
        mu_old = mu;
        // next block: images rotated onto the Ritz vectors, largest first
        block = order
            .iter()
            .map(|&c| {
                let mut v = vec![0.0; n];
                for (r, yr) in y.iter().enumerate() {
                    axpy(eig.eigenvectors[(r, c)], yr, &mut v);
                }
                v
            })
            .collect();
    }
    Err(DgError::NotConverged { method: "power iteration", iterations: PROPAGATOR_MAXIT, residual: f64::NAN })
}

/// Two-pass Gram-Schmidt in the `S` inner product; drops dependent vectors.
/// Returns the basis and `S` applied to it.
fn s_orthonormalize(s: &SparseOperator, vs: Vec<Vec<f64>>) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let mut q: Vec<Vec<f64>> = Vec::new();
    let mut sq: Vec<Vec<f64>> = Vec::new();
    for mut v in vs {
        let before = dot(&v, &s.apply(&v)).sqrt();
        for _ in 0..2 {
            for (qi, sqi) in q.iter().zip(&sq) {
                let c = dot(sqi, &v);
                axpy(-c, qi, &mut v);
            }
        }
        let sv = s.apply(&v);
        let nv = dot(&v, &sv).sqrt();
        if !(nv > 1e-12 * before) {
            continue;
        }
        q.push(v.iter().map(|x| x / nv).collect());
        sq.push(sv.iter().map(|x| x / nv).collect());
    }
    (q, sq)
}

pub(crate) fn check_positive_diagonal(d: &[f64]) -> Result<()> {
    match d.iter().position(|&v| !(v > 0.0)) {
        Some(row) => Err(DgError::NonPositiveDiagonal { row, value: d[row] }),
        None => Ok(()),
    }
}

/// Solve `A x = b` with a dense LU (small oracle problems only).
pub fn dense_solve(a: &SparseOperator, b: &[f64]) -> Result<Vec<f64>> {
    check_dim(a.nrows(), b.len())?;
    a.to_dense()
        .lu()
        .solve(&DVector::from_column_slice(b))
        .map(|x| x.as_slice().to_vec())
        .ok_or_else(|| DgError::InvalidParameter("singular matrix in dense solve".into()))
}
