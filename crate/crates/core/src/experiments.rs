//! The condition-number experiments: one table per preconditioner, cells
//! indexed by `(ε, level)`, compared against reference values.

pub mod golden;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::assembly::{DgProblem, MethodParams, Variant};
use crate::error::{DgError, Result};
use crate::krylov::{
    error_propagator_norm, estimate_spectrum, lanczos, pcg, pcg_tracked, random_vector, stationary_iteration,
    Preconditioner, SolveReport, SpectrumMethod, DENSE_LIMIT, LANCZOS_STEPS,
};
use crate::mesh::{build_hierarchy, MeshHierarchy};
use crate::precond::{block_jacobi_dg, bpx, coarse_drop, diag_precond, two_level, SmootherSpec};
use crate::sparse::{CholeskyFactor, SparseOperator};
use crate::split::{BlockOperator, SplitBasis};

pub const EPS_SWEEP: [f64; 7] = [1e-5, 1e-3, 1e-1, 1.0, 1e1, 1e3, 1e5];
pub const EPS_SWEEP_FINE: [f64; 11] = [1e-5, 1e-4, 1e-3, 1e-2, 1e-1, 1.0, 1e1, 1e2, 1e3, 1e4, 1e5];

/// Eigenvalues below this fraction of `λ_max` count as isolated.
pub const ISOLATION_GAP: f64 = 1e-2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TableKind {
    Zz,
    TwoLevel,
    Bpx,
    Sipg1,
    IipgPropagator,
}

impl TableKind {
    pub const ALL: [TableKind; 5] =
        [TableKind::Zz, TableKind::TwoLevel, TableKind::Bpx, TableKind::Sipg1, TableKind::IipgPropagator];

    pub fn name(&self) -> &'static str {
        match self {
            TableKind::Zz => "zz",
            TableKind::TwoLevel => "two-level",
            TableKind::Bpx => "bpx",
            TableKind::Sipg1 => "sipg1",
            TableKind::IipgPropagator => "iipg-propagator",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PrecondKind {
    Diagonal,
    TwoLevel,
    Bpx,
    BlockJacobi,
    SymmetricPart,
}

impl PrecondKind {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "diagonal" => Some(Self::Diagonal),
            "two-level" => Some(Self::TwoLevel),
            "bpx" => Some(Self::Bpx),
            "block-jacobi" => Some(Self::BlockJacobi),
            "symmetric-part" => Some(Self::SymmetricPart),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub eps_list: Vec<f64>,
    pub levels: Vec<usize>,
    pub theta: i8,
    pub alpha: f64,
    pub variant: Variant,
    pub precond: PrecondKind,
    /// CR-block preconditioner inside block-Jacobi: `two-level` or `bpx`.
    pub inner: PrecondKind,
    /// Coarse-to-fine mesh size ratio of the two-level method.
    pub ratio: usize,
    pub smoother: SmootherSpec,
    pub tol: f64,
    pub maxit: usize,
    /// Number of small eigenvalues discarded in `K_m`.
    pub m: usize,
    pub seed: u64,
    pub lanczos_steps: usize,
    /// Lanczos steps for spectrum dumps beyond the dense limit.
    pub dump_steps: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            eps_list: EPS_SWEEP.to_vec(),
            levels: (0..=4).collect(),
            theta: -1,
            alpha: 8.0,
            variant: Variant::Ip0,
            precond: PrecondKind::TwoLevel,
            inner: PrecondKind::TwoLevel,
            ratio: 1,
            smoother: SmootherSpec::default(),
            tol: 1e-7,
            maxit: 1000,
            m: 1,
            seed: 2012,
            lanczos_steps: LANCZOS_STEPS,
            dump_steps: 600,
        }
    }
}

impl ExperimentConfig {
    /// Reference settings of the given table.
    pub fn for_table(kind: TableKind) -> Self {
        let base = Self::default();
        match kind {
            TableKind::Zz => Self { levels: (0..=3).collect(), precond: PrecondKind::Diagonal, ..base },
            TableKind::TwoLevel => base,
            TableKind::Bpx => Self { precond: PrecondKind::Bpx, ..base },
            TableKind::Sipg1 => {
                Self { levels: (0..=3).collect(), variant: Variant::Ip1, precond: PrecondKind::BlockJacobi, ..base }
            }
            TableKind::IipgPropagator => Self {
                eps_list: EPS_SWEEP_FINE.to_vec(),
                levels: (0..=3).collect(),
                theta: 0,
                alpha: 32.0,
                variant: Variant::Ip1,
                precond: PrecondKind::SymmetricPart,
                ..base
            },
        }
    }

    pub fn params(&self) -> Result<MethodParams> {
        MethodParams::new(self.theta, self.alpha, self.variant)
    }

    pub fn validate(&self) -> Result<()> {
        self.params()?;
        coarse_drop(self.ratio)?;
        if !matches!(self.inner, PrecondKind::TwoLevel | PrecondKind::Bpx) {
            return Err(DgError::InvalidParameter("inner preconditioner must be two-level or bpx".into()));
        }
        if self.eps_list.iter().any(|e| !(*e > 0.0)) {
            return Err(DgError::InvalidParameter("eps values must be positive".into()));
        }
        if !(self.tol > 0.0) || self.maxit == 0 || self.smoother.sweeps == 0 {
            return Err(DgError::InvalidParameter("tol, maxit and sweeps must be positive".into()));
        }
        Ok(())
    }

    /// SHA-256 of the JSON form.
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        Sha256::digest(json.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
    }

    fn cell_seed(&self, eps_index: usize, level: usize) -> u64 {
        self.seed.wrapping_mul(1_000_003).wrapping_add((eps_index as u64) << 8 | level as u64)
    }

    fn spectrum_method(&self, dim: usize) -> SpectrumMethod {
        if dim <= DENSE_LIMIT {
            SpectrumMethod::Dense
        } else {
            SpectrumMethod::Lanczos { steps: self.lanczos_steps }
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub eps: f64,
    pub level: usize,
    pub feasible: bool,
    pub dim: usize,
    #[serde(rename = "K")]
    pub k: Option<f64>,
    #[serde(rename = "K_m")]
    pub k_m: Option<f64>,
    pub iterations: Option<usize>,
    pub converged: Option<bool>,
    pub residual_history_len: Option<usize>,
    /// PCG A-norm error never increased (against a direct solve).
    pub a_norm_monotone: Option<bool>,
    pub eig_min: Option<f64>,
    pub eig_max: Option<f64>,
    pub eig_low: Vec<f64>,
    pub n_isolated: Option<usize>,
    pub spectrum_method: Option<String>,
    pub propagator_norm: Option<f64>,
}

impl Cell {
    fn new(eps: f64, level: usize) -> Self {
        Self { eps, level, ..Default::default() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "class", content = "value", rename_all = "snake_case")]
pub enum Tolerance {
    /// Within a multiplicative factor.
    Ratio(f64),
    /// Within a relative deviation.
    Relative(f64),
    Absolute(f64),
    Iterations(usize),
}

impl Tolerance {
    pub fn accepts(&self, reference: f64, measured: f64) -> bool {
        if !measured.is_finite() {
            return false;
        }
        match *self {
            Tolerance::Ratio(f) => measured <= reference * f && measured >= reference / f,
            Tolerance::Relative(r) => (measured - reference).abs() <= r * reference.abs(),
            Tolerance::Absolute(a) => (measured - reference).abs() <= a,
            Tolerance::Iterations(n) => (measured - reference).abs() <= n as f64,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GoldenCheck {
    pub eps: f64,
    pub level: usize,
    pub quantity: String,
    pub reference: f64,
    pub measured: Option<f64>,
    pub tolerance: Tolerance,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableResult {
    pub name: String,
    pub kind: TableKind,
    pub config: ExperimentConfig,
    pub config_hash: String,
    pub cells: Vec<Cell>,
    pub golden: Vec<GoldenCheck>,
    pub golden_passed: usize,
    pub golden_total: usize,
    /// Wall-clock seconds per cell, in cell order; kept out of the JSON so
    /// reruns are byte-identical.
    #[serde(skip)]
    pub timings: Vec<f64>,
}

impl TableResult {
    pub fn cell(&self, eps: f64, level: usize) -> Option<&Cell> {
        self.cells.iter().find(|c| c.eps == eps && c.level == level)
    }

    pub fn all_golden_pass(&self) -> bool {
        self.golden_passed == self.golden_total
    }
}

struct CellContext<'a> {
    cfg: &'a ExperimentConfig,
    hierarchy: &'a MeshHierarchy,
    eps: f64,
    level: usize,
    seed: u64,
}

impl<'a> CellContext<'a> {
    fn problem(&self) -> Result<DgProblem<'a>> {
        DgProblem::with_epsilon(self.hierarchy.finest(), self.eps)
    }

    fn blocks(&self, params: &MethodParams) -> Result<(DgProblem<'a>, BlockOperator)> {
        let p = self.problem()?;
        let basis = SplitBasis::new(p.mesh, &p.weights);
        let blocks = basis.extract_blocks(&p.assemble(params), params)?;
        Ok((p, blocks))
    }
}

/// PCG on a random right-hand side plus spectrum estimation of `B·A`.
fn measure_spd<P: Preconditioner + ?Sized>(
    ctx: &CellContext,
    a: &SparseOperator,
    b: &P,
    cell: &mut Cell,
) -> Result<()> {
    let cfg = ctx.cfg;
    let n = a.nrows();
    let rhs = random_vector(n, ctx.seed);
    let exact = CholeskyFactor::new(a)?.solve(&rhs);
    let (_, rep) = pcg_tracked(a, &rhs, b, cfg.tol, cfg.maxit, Some(&exact))?;
    if !rep.converged {
        return Err(DgError::NotConverged {
            method: "pcg",
            iterations: rep.iterations,
            residual: rep.final_residual(),
        });
    }
    let errs = rep.a_norm_errors.as_deref().unwrap_or(&[]);
    let floor = 1e-10 * errs.first().copied().unwrap_or(0.0);
    cell.a_norm_monotone = Some(errs.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-10) + floor));
    cell.iterations = Some(rep.iterations);
    cell.converged = Some(rep.converged);
    cell.residual_history_len = Some(rep.rel_residual_history.len());

    let method = cfg.spectrum_method(n);
    let eigs = estimate_spectrum(a, b, method, ctx.seed.wrapping_add(1))?;
    fill_spectrum(cell, &eigs, cfg.m, method)?;
    cell.dim = n;
    Ok(())
}

fn fill_spectrum(cell: &mut Cell, eigs: &[f64], m: usize, method: SpectrumMethod) -> Result<()> {
    let mut rep = SolveReport::default();
    rep.set_spectrum(eigs, &[m])?;
    cell.k = Some(rep.k);
    cell.k_m = rep.k_m.get(&m).copied();
    cell.eig_min = Some(rep.eig_min);
    cell.eig_max = Some(rep.eig_max);
    cell.eig_low = rep.eig_sorted_low;
    cell.n_isolated = Some(count_isolated(eigs));
    cell.spectrum_method = Some(match method {
        SpectrumMethod::Dense => "dense".into(),
        SpectrumMethod::Lanczos { steps } => format!("lanczos-{steps}"),
        SpectrumMethod::Auto => "auto".into(),
    });
    Ok(())
}

/// Number of eigenvalues below `ISOLATION_GAP · λ_max`.
pub fn count_isolated(eigs: &[f64]) -> usize {
    let top = eigs.last().copied().unwrap_or(0.0);
    eigs.iter().filter(|&&l| l < ISOLATION_GAP * top).count()
}

fn cr_preconditioner(
    cfg: &ExperimentConfig,
    kind: PrecondKind,
    vv: &SparseOperator,
    h: &MeshHierarchy,
) -> Result<Box<dyn Preconditioner>> {
    Ok(match kind {
        PrecondKind::Bpx => Box::new(bpx(vv, h, cfg.smoother)?),
        _ => Box::new(two_level(vv, h, cfg.ratio, cfg.smoother)?),
    })
}

fn run_cell(kind: TableKind, ctx: &CellContext) -> Result<Cell> {
    let cfg = ctx.cfg;
    let mut cell = Cell::new(ctx.eps, ctx.level);
    let params = cfg.params()?;
    match kind {
        TableKind::Zz => {
            let (_, blocks) = ctx.blocks(&params)?;
            let d = diag_precond(&blocks.zz)?;
            measure_spd(ctx, &blocks.zz, &d, &mut cell)?;
        }
        TableKind::TwoLevel => {
            if coarse_drop(cfg.ratio)? > ctx.level {
                return Ok(cell);
            }
            let (_, blocks) = ctx.blocks(&params)?;
            let b = two_level(&blocks.vv, ctx.hierarchy, cfg.ratio, cfg.smoother)?;
            measure_spd(ctx, &blocks.vv, &b, &mut cell)?;
        }
        TableKind::Bpx => {
            let (_, blocks) = ctx.blocks(&params)?;
            let b = bpx(&blocks.vv, ctx.hierarchy, cfg.smoother)?;
            measure_spd(ctx, &blocks.vv, &b, &mut cell)?;
        }
        TableKind::Sipg1 => {
            let (_, blocks) = ctx.blocks(&params)?;
            let b = block_jacobi_dg(&blocks, cr_preconditioner(cfg, cfg.inner, &blocks.vv, ctx.hierarchy)?)?;
            measure_spd(ctx, &blocks.assemble_full(), &b, &mut cell)?;
        }
        TableKind::IipgPropagator => {
            let p = ctx.problem()?;
            let a = p.assemble(&params);
            cell.dim = a.nrows();
            cell.propagator_norm = Some(error_propagator_norm(&a, ctx.seed)?);
        }
    }
    cell.feasible = true;
    Ok(cell)
}

/// Run every `(ε, level)` cell of a table; cells run in parallel and are
/// merged in `(ε, level)` order.
pub fn run_table(kind: TableKind, cfg: &ExperimentConfig) -> Result<TableResult> {
    cfg.validate()?;
    let max_level = cfg.levels.iter().copied().max().unwrap_or(0);
    let hierarchies: Vec<MeshHierarchy> = {
        let full = build_hierarchy(max_level);
        (0..=max_level).map(|l| MeshHierarchy { meshes: full.meshes[..=l].to_vec() }).collect()
    };
    let jobs: Vec<(usize, f64, usize)> =
        cfg.eps_list.iter().enumerate().flat_map(|(i, &eps)| cfg.levels.iter().map(move |&l| (i, eps, l))).collect();
    let results: Vec<Result<(Cell, f64)>> = jobs
        .par_iter()
        .map(|&(i, eps, level)| {
            let start = Instant::now();
            let ctx = CellContext { cfg, hierarchy: &hierarchies[level], eps, level, seed: cfg.cell_seed(i, level) };
            run_cell(kind, &ctx).map(|c| (c, start.elapsed().as_secs_f64()))
        })
        .collect();
    let mut cells = Vec::with_capacity(results.len());
    let mut timings = Vec::with_capacity(results.len());
    for r in results {
        let (c, t) = r?;
        cells.push(c);
        timings.push(t);
    }
    let name = table_name(kind, cfg);
    let golden = compare_golden(kind, cfg, &cells);
    let golden_passed = golden.iter().filter(|g| g.pass).count();
    Ok(TableResult {
        name,
        kind,
        config: cfg.clone(),
        config_hash: cfg.hash(),
        golden_total: golden.len(),
        golden_passed,
        golden,
        cells,
        timings,
    })
}

pub fn run_zz_table(cfg: &ExperimentConfig) -> Result<TableResult> {
    run_table(TableKind::Zz, cfg)
}

pub fn run_two_level_table(cfg: &ExperimentConfig) -> Result<TableResult> {
    run_table(TableKind::TwoLevel, cfg)
}

pub fn run_bpx_table(cfg: &ExperimentConfig) -> Result<TableResult> {
    run_table(TableKind::Bpx, cfg)
}

pub fn run_sipg1_blockjacobi_table(cfg: &ExperimentConfig) -> Result<TableResult> {
    run_table(TableKind::Sipg1, cfg)
}

pub fn run_iipg_propagator_table(cfg: &ExperimentConfig) -> Result<TableResult> {
    run_table(TableKind::IipgPropagator, cfg)
}

fn table_name(kind: TableKind, cfg: &ExperimentConfig) -> String {
    match kind {
        TableKind::TwoLevel => format!("two-level-r{}", cfg.ratio),
        TableKind::Zz => format!("zz-theta{}", cfg.theta),
        _ => kind.name().to_string(),
    }
}

/// Reference rows matching the configuration, with their tolerance classes.
/// Empty when the configuration differs from the reference setup.
fn golden_rows(kind: TableKind, cfg: &ExperimentConfig) -> (&'static [golden::GoldenRow], Tolerance, Tolerance, usize) {
    let reference = ExperimentConfig::for_table(kind);
    let same = cfg.alpha == reference.alpha
        && cfg.theta == reference.theta
        && cfg.variant == reference.variant
        && cfg.smoother == reference.smoother
        && (kind != TableKind::Sipg1 || cfg.inner == reference.inner)
        && cfg.tol == reference.tol
        && cfg.m == 1;
    if !same {
        return (&[], Tolerance::Ratio(1.0), Tolerance::Relative(0.0), 0);
    }
    match kind {
        TableKind::Zz => (golden::ZZ, Tolerance::Absolute(0.2), Tolerance::Absolute(0.2), 4),
        TableKind::TwoLevel => {
            let rows = match cfg.ratio {
                1 => golden::TWO_LEVEL_1,
                2 => golden::TWO_LEVEL_2,
                _ => golden::TWO_LEVEL_4,
            };
            (rows, Tolerance::Ratio(1.5), Tolerance::Relative(0.3), 5)
        }
        TableKind::Bpx => (golden::BPX, Tolerance::Ratio(1.5), Tolerance::Relative(0.3), 6),
        TableKind::Sipg1 => (golden::SIPG1, Tolerance::Ratio(1.5), Tolerance::Relative(0.3), 5),
        TableKind::IipgPropagator => (golden::IIPG_PROPAGATOR, Tolerance::Absolute(0.05), Tolerance::Absolute(0.05), 0),
    }
}

fn compare_golden(kind: TableKind, cfg: &ExperimentConfig, cells: &[Cell]) -> Vec<GoldenCheck> {
    let (rows, k_tol, k1_tol, it_tol) = golden_rows(kind, cfg);
    let mut out = Vec::new();
    for &(eps, level, k, iters, k1) in rows {
        let Some(cell) = cells.iter().find(|c| c.eps == eps && c.level == level) else { continue };
        let mut push = |quantity: &str, reference: f64, measured: Option<f64>, tolerance: Tolerance| {
            let pass = measured.is_some_and(|m| tolerance.accepts(reference, m));
            out.push(GoldenCheck { eps, level, quantity: quantity.into(), reference, measured, tolerance, pass });
        };
        if kind == TableKind::IipgPropagator {
            push("norm", k, cell.propagator_norm, k_tol);
            continue;
        }
        push("K", k, cell.k, k_tol);
        if let Some(it) = iters {
            push("iterations", it as f64, cell.iterations.map(|i| i as f64), Tolerance::Iterations(it_tol));
        }
        if let Some(k1) = k1 {
            push("K_1", k1, cell.k_m, k1_tol);
        }
    }
    out
}

/// Table number formatting: three significant digits, exponent form
/// from 1000 on.
pub fn format_value(x: f64) -> String {
    if !x.is_finite() {
        return format!("{x}");
    }
    let a = x.abs();
    if a >= 1000.0 {
        let s = format!("{x:.2e}");
        s.replace("e", "e+").replace("e+-", "e-")
    } else if a >= 100.0 {
        format!("{x:.0}")
    } else if a >= 10.0 {
        format!("{x:.1}")
    } else {
        format!("{x:.2}")
    }
}

pub fn format_eps(eps: f64) -> String {
    format!("{eps:e}")
}

impl TableResult {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from(
            "eps,level,feasible,dim,K,K_m,iterations,converged,propagator_norm,eig_min,eig_max,n_isolated,spectrum_method\n",
        );
        let opt = |x: Option<f64>| x.map(|v| format!("{v:.10e}")).unwrap_or_default();
        for c in &self.cells {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{},{},{},{},{},{},{}",
                format_eps(c.eps),
                c.level,
                c.feasible,
                c.dim,
                opt(c.k),
                opt(c.k_m),
                c.iterations.map(|i| i.to_string()).unwrap_or_default(),
                c.converged.map(|b| b.to_string()).unwrap_or_default(),
                opt(c.propagator_norm),
                opt(c.eig_min),
                opt(c.eig_max),
                c.n_isolated.map(|i| i.to_string()).unwrap_or_default(),
                c.spectrum_method.clone().unwrap_or_default(),
            );
        }
        s
    }

    pub fn to_markdown(&self) -> String {
        let cfg = &self.config;
        let mut s = String::new();
        let _ = writeln!(s, "## {}\n", self.name);
        let _ = writeln!(
            s,
            "{}, alpha = {}, tol = {:e}, smoother = {:?} x {}, m = {}, seed = {}\n",
            cfg.params().map(|p| p.name()).unwrap_or("?"),
            cfg.alpha,
            cfg.tol,
            cfg.smoother.kind,
            cfg.smoother.sweeps,
            cfg.m,
            cfg.seed
        );
        let levels = &cfg.levels;
        let _ = write!(s, "| eps | |");
        for l in levels {
            let _ = write!(s, " level {l} |");
        }
        s.push('\n');
        s.push_str("|---|---|");
        for _ in levels {
            s.push_str("---|");
        }
        s.push('\n');
        for &eps in &cfg.eps_list {
            let row = |label: &str, f: &dyn Fn(&Cell) -> String| {
                let mut line = format!("| {} | {} |", format_eps(eps), label);
                for &l in levels {
                    let cell = self.cell(eps, l);
                    let text = match cell {
                        Some(c) if c.feasible => f(c),
                        _ => "X".into(),
                    };
                    let _ = write!(line, " {text} |");
                }
                line.push('\n');
                line
            };
            if self.kind == TableKind::IipgPropagator {
                s.push_str(&row("norm(E)", &|c| c.propagator_norm.map(format_value).unwrap_or_default()));
            } else {
                s.push_str(&row("K (it)", &|c| {
                    format!("{} ({})", c.k.map(format_value).unwrap_or_default(), c.iterations.unwrap_or(0))
                }));
                if self.kind != TableKind::Zz {
                    s.push_str(&row(&format!("K_{}", cfg.m), &|c| c.k_m.map(format_value).unwrap_or_default()));
                }
            }
        }
        s.push('\n');
        if self.golden_total == 0 {
            s.push_str("reference comparison: not applicable to this configuration\n");
        } else {
            let _ = writeln!(
                s,
                "reference comparison: {}/{} cells within tolerance ({})",
                self.golden_passed,
                self.golden_total,
                if self.all_golden_pass() { "PASS" } else { "FAIL" }
            );
            for g in self.golden.iter().filter(|g| !g.pass) {
                let _ = writeln!(
                    s,
                    "- FAIL eps={} level={} {}: reference {} measured {} ({:?})",
                    format_eps(g.eps),
                    g.level,
                    g.quantity,
                    format_value(g.reference),
                    g.measured.map(format_value).unwrap_or_else(|| "-".into()),
                    g.tolerance
                );
            }
        }
        s
    }

    /// Writes `<name>.json`, `<name>.csv` and `<name>.md`; returns their paths.
    pub fn write_outputs(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir)?;
        let files = [
            (format!("{}.json", self.name), self.to_json()?),
            (format!("{}.csv", self.name), self.to_csv()),
            (format!("{}.md", self.name), self.to_markdown()),
        ];
        let mut out = Vec::new();
        for (name, body) in files {
            let p = dir.join(name);
            std::fs::write(&p, body)?;
            out.push(p);
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpectrumDump {
    pub eps: f64,
    pub level: usize,
    pub method: String,
    pub eigenvalues: Vec<f64>,
    pub n_isolated: usize,
}

impl SpectrumDump {
    pub fn file_name(&self) -> String {
        format!("spectrum_{}_{}.csv", format_eps(self.eps), self.level)
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("index,value\n");
        for (i, v) in self.eigenvalues.iter().enumerate() {
            let _ = writeln!(s, "{i},{v:.16e}");
        }
        s
    }

    pub fn write(&self, dir: &Path) -> Result<PathBuf> {
        std::fs::create_dir_all(dir)?;
        let p = dir.join(self.file_name());
        std::fs::write(&p, self.to_csv())?;
        Ok(p)
    }
}

/// Spectrum of `B·A_vv` with the two-level (`cfg.ratio`) or BPX
/// preconditioner: dense up to the dense limit, deep Lanczos beyond.
pub fn dump_spectrum(cfg: &ExperimentConfig, eps: f64, level: usize) -> Result<SpectrumDump> {
    cfg.validate()?;
    let h = build_hierarchy(level);
    let p = DgProblem::with_epsilon(h.finest(), eps)?;
    let params = MethodParams::sipg0(cfg.alpha);
    let basis = SplitBasis::new(p.mesh, &p.weights);
    let blocks = basis.extract_blocks(&p.assemble(&params), &params)?;
    let b = cr_preconditioner(cfg, cfg.precond, &blocks.vv, &h)?;
    let n = blocks.n_v();
    let (eigenvalues, method) = if n <= DENSE_LIMIT {
        (estimate_spectrum(&blocks.vv, &b, SpectrumMethod::Dense, cfg.seed)?, "dense".to_string())
    } else {
        let steps = cfg.dump_steps.min(n);
        (lanczos(&blocks.vv, &b, steps, cfg.seed)?.ritz, format!("lanczos-{steps}"))
    };
    Ok(SpectrumDump { eps, level, method, n_isolated: count_isolated(&eigenvalues), eigenvalues })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolveSummary {
    pub method: String,
    pub eps: f64,
    pub level: usize,
    pub dim: usize,
    /// One report per solve phase (`zz`, `vv`, `full`).
    pub phases: Vec<(String, SolveReport)>,
    /// `‖A u - f‖ / ‖f‖` of the recombined nodal solution.
    pub rel_residual: f64,
}

/// Solve the DG problem with `f ≡ 1`: block forward substitution for
/// IP(β)-0, block-Jacobi PCG for SIPG(β)-1, the symmetric-part iteration
/// otherwise.
pub fn solve_problem(cfg: &ExperimentConfig, eps: f64, level: usize) -> Result<SolveSummary> {
    cfg.validate()?;
    let params = cfg.params()?;
    let h = build_hierarchy(level);
    let p = DgProblem::with_epsilon(h.finest(), eps)?;
    let a = p.assemble(&params);
    let f = p.assemble_rhs(|_| 1.0);
    let basis = SplitBasis::new(p.mesh, &p.weights);
    let cr_precond = |vv: &SparseOperator| match cfg.precond {
        PrecondKind::BlockJacobi => cr_preconditioner(cfg, cfg.inner, vv, &h),
        k => cr_preconditioner(cfg, k, vv, &h),
    };
    let mut phases = Vec::new();
    let u = match (params.variant, params.theta) {
        (Variant::Ip0, _) => {
            let blocks = basis.extract_blocks(&a, &params)?;
            let fs = basis.transform.apply_transpose(&f);
            let (fz, fv) = fs.split_at(basis.n_z());
            let (z, rz) = pcg(&blocks.zz, fz, &diag_precond(&blocks.zz)?, cfg.tol, cfg.maxit)?;
            let rhs: Vec<f64> = fv.iter().zip(blocks.vz.apply(&z)).map(|(f, c)| f - c).collect();
            let (v, rv) = pcg(&blocks.vv, &rhs, &cr_precond(&blocks.vv)?, cfg.tol, cfg.maxit)?;
            phases.push(("zz".to_string(), rz));
            phases.push(("vv".to_string(), rv));
            basis.from_split(&z, &v)?
        }
        (Variant::Ip1, -1) => {
            let blocks = basis.extract_blocks(&a, &params)?;
            let full = blocks.assemble_full();
            let b = block_jacobi_dg(&blocks, cr_precond(&blocks.vv)?)?;
            let fs = basis.transform.apply_transpose(&f);
            let (x, rep) = pcg(&full, &fs, &b, cfg.tol, cfg.maxit)?;
            phases.push(("full".to_string(), rep));
            basis.from_split(&x[..basis.n_z()], &x[basis.n_z()..])?
        }
        (Variant::Ip1, _) => {
            let solver = CholeskyFactor::new(&a.symmetric_part())?;
            let (u, rep) = stationary_iteration(&a, &solver, &f, &vec![0.0; f.len()], cfg.maxit, cfg.tol)?;
            phases.push(("full".to_string(), rep));
            u
        }
    };
    let res: Vec<f64> = a.apply(&u).iter().zip(&f).map(|(x, y)| x - y).collect();
    let nf = f.iter().map(|v| v * v).sum::<f64>().sqrt();
    Ok(SolveSummary {
        method: params.name().into(),
        eps,
        level,
        dim: a.nrows(),
        phases,
        rel_residual: res.iter().map(|v| v * v).sum::<f64>().sqrt() / nf,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(kind: TableKind) -> ExperimentConfig {
        ExperimentConfig { eps_list: vec![1e-3, 1.0], levels: vec![0, 1], ..ExperimentConfig::for_table(kind) }
    }

    #[test]
    fn tolerance_classes() {
        assert!(Tolerance::Ratio(1.5).accepts(2.0, 2.9));
        assert!(!Tolerance::Ratio(1.5).accepts(2.0, 1.3));
        assert!(Tolerance::Relative(0.3).accepts(10.0, 12.9));
        assert!(!Tolerance::Relative(0.3).accepts(10.0, 13.1));
        assert!(Tolerance::Absolute(0.2).accepts(1.73, 1.55));
        assert!(Tolerance::Iterations(4).accepts(14.0, 10.0));
        assert!(!Tolerance::Iterations(4).accepts(14.0, 9.0));
        assert!(!Tolerance::Absolute(1.0).accepts(1.0, f64::NAN));
    }

    #[test]
    fn value_formatting() {
        assert_eq!(format_value(20800.0), "2.08e+4");
        assert_eq!(format_value(280.4), "280");
        assert_eq!(format_value(15.63), "15.6");
        assert_eq!(format_value(2.333), "2.33");
        assert_eq!(format_eps(1e-5), "1e-5");
        assert_eq!(format_eps(1.0), "1e0");
    }

    #[test]
    fn golden_tables_are_complete() {
        assert_eq!(golden::ZZ.len(), 28);
        assert_eq!(golden::TWO_LEVEL_1.len(), 35);
        assert_eq!(golden::TWO_LEVEL_2.len(), 28);
        assert_eq!(golden::TWO_LEVEL_4.len(), 21);
        assert_eq!(golden::BPX.len(), 35);
        assert_eq!(golden::SIPG1.len(), 28);
        assert_eq!(golden::IIPG_PROPAGATOR.len(), 44);
        assert!(golden::ZZ.iter().filter(|r| r.0 == 1e-1).all(|r| r.3.is_none()));
    }

    #[test]
    fn infeasible_cells_are_marked() {
        let cfg = ExperimentConfig { ratio: 4, ..small(TableKind::TwoLevel) };
        let t = run_table(TableKind::TwoLevel, &cfg).unwrap();
        assert!(t.cells.iter().all(|c| !c.feasible && c.k.is_none()));
        assert!(t.to_markdown().contains("| X |"));
    }

    #[test]
    fn iipg_zz_cells_are_trivial() {
        let cfg = ExperimentConfig { theta: 0, ..small(TableKind::Zz) };
        let t = run_table(TableKind::Zz, &cfg).unwrap();
        for c in &t.cells {
            assert_eq!(c.iterations, Some(1));
            assert!((c.k.unwrap() - 1.0).abs() < 1e-10);
        }
        assert_eq!(t.golden_total, 0);
    }

    #[test]
    fn reruns_are_identical_and_cells_consistent() {
        let cfg = small(TableKind::Bpx);
        let a = run_table(TableKind::Bpx, &cfg).unwrap();
        let b = run_table(TableKind::Bpx, &cfg).unwrap();
        assert_eq!(a.to_json().unwrap(), b.to_json().unwrap());
        for c in &a.cells {
            assert_eq!(c.iterations.unwrap() + 1, c.residual_history_len.unwrap());
            assert_eq!(c.a_norm_monotone, Some(true));
        }
        assert!(a.golden_total > 0);
        assert_eq!(a.config_hash.len(), 64);
    }

    #[test]
    fn outputs_are_written() {
        let dir = std::env::temp_dir().join(format!("ipdg-exp-{}", std::process::id()));
        let t = run_table(TableKind::IipgPropagator, &small(TableKind::IipgPropagator)).unwrap();
        let paths = t.write_outputs(&dir).unwrap();
        assert_eq!(paths.len(), 3);
        let md = std::fs::read_to_string(&paths[2]).unwrap();
        assert_eq!(md, t.to_markdown());
        let parsed: TableResult = serde_json::from_str(&std::fs::read_to_string(&paths[0]).unwrap()).unwrap();
        assert_eq!(parsed.cells, t.cells);
        std::fs::remove_dir_all(dir).unwrap();
    }

    #[test]
    fn spectrum_dump_is_sorted() {
        let cfg = ExperimentConfig::default();
        let d = dump_spectrum(&cfg, 1e-5, 1).unwrap();
        assert!(d.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
        assert_eq!(d.file_name(), "spectrum_1e-5_1.csv");
        assert!(d.to_csv().starts_with("index,value\n0,"));
    }

    #[test]
    fn solve_paths() {
        for (theta, variant) in
            [(-1, Variant::Ip0), (0, Variant::Ip0), (-1, Variant::Ip1), (0, Variant::Ip1), (1, Variant::Ip1)]
        {
            let alpha = if variant == Variant::Ip1 && theta != -1 { 32.0 } else { 8.0 };
            let cfg = ExperimentConfig { theta, variant, alpha, tol: 1e-10, ..Default::default() };
            let s = solve_problem(&cfg, 1e-3, 1).unwrap();
            assert!(s.rel_residual < 1e-8, "{}: {}", s.method, s.rel_residual);
        }
    }

    #[test]
    fn config_validation() {
        assert!(ExperimentConfig { ratio: 3, ..Default::default() }.validate().is_err());
        assert!(ExperimentConfig { eps_list: vec![0.0], ..Default::default() }.validate().is_err());
        assert!(ExperimentConfig { theta: 4, ..Default::default() }.validate().is_err());
        assert_ne!(ExperimentConfig::default().hash(), ExperimentConfig { seed: 1, ..Default::default() }.hash());
    }
}
