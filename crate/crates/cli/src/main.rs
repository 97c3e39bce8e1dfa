use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use ipdg_core::experiments::{dump_spectrum, run_table, solve_problem, ExperimentConfig, PrecondKind, TableKind};
use ipdg_core::mesh::build_hierarchy;
use ipdg_core::precond::SmootherKind;
use ipdg_core::split::SplitBasis;
use ipdg_core::verify::run_verify;
use ipdg_core::{DgProblem, MethodParams, Variant};

const OUT_ENV: &str = "DG_PRECOND_OUT";

#[derive(Parser, Debug)]
#[command(name = "ipdg", version, about = "Weighted interior penalty DG solvers and preconditioner experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Mesh statistics per refinement level.
    MeshInfo {
        /// Finest refinement level.
        #[arg(long, default_value_t = 0)]
        levels: usize,
    },
    /// Export the DG matrix and its split blocks in coordinate format.
    Assemble(Single),
    /// Solve with f = 1 and report convergence.
    Solve(Single),
    /// Run one of the condition-number tables.
    Table {
        #[arg(value_enum)]
        kind: TableArg,
        #[command(flatten)]
        opts: Overrides,
    },
    /// Dump the preconditioned spectrum of the CR block.
    Spectrum(Single),
    /// Run the structural property suite.
    Verify(Single),
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum TableArg {
    Zz,
    TwoLevel,
    Bpx,
    Sipg1,
    IipgPropagator,
}

impl From<TableArg> for TableKind {
    fn from(t: TableArg) -> Self {
        match t {
            TableArg::Zz => TableKind::Zz,
            TableArg::TwoLevel => TableKind::TwoLevel,
            TableArg::Bpx => TableKind::Bpx,
            TableArg::Sipg1 => TableKind::Sipg1,
            TableArg::IipgPropagator => TableKind::IipgPropagator,
        }
    }
}

#[derive(Args, Debug)]
struct Single {
    #[arg(long, default_value_t = 1)]
    level: usize,
    #[command(flatten)]
    opts: Overrides,
}

#[derive(Args, Debug, Default, Clone)]
struct Overrides {
    /// JSON file with flat keys named like the flags (out_dir for --out-dir).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Comma separated coefficient contrasts.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    eps: Option<Vec<f64>>,
    /// Comma separated mesh levels.
    #[arg(long, value_delimiter = ',')]
    levels: Option<Vec<usize>>,
    #[arg(long, allow_hyphen_values = true)]
    theta: Option<i8>,
    #[arg(long)]
    alpha: Option<f64>,
    /// ip0 or ip1.
    #[arg(long)]
    variant: Option<String>,
    /// diagonal, two-level, bpx, block-jacobi or symmetric-part.
    #[arg(long)]
    precond: Option<String>,
    /// CR preconditioner inside block-Jacobi: two-level or bpx.
    #[arg(long)]
    inner: Option<String>,
    #[arg(long)]
    ratio: Option<usize>,
    #[arg(long)]
    sweeps: Option<usize>,
    /// sym-gs or jacobi.
    #[arg(long)]
    smoother: Option<String>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    maxit: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

#[derive(Deserialize, Debug, Default)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    eps: Option<Vec<f64>>,
    levels: Option<Vec<usize>>,
    theta: Option<i8>,
    alpha: Option<f64>,
    variant: Option<String>,
    precond: Option<String>,
    inner: Option<String>,
    ratio: Option<usize>,
    sweeps: Option<usize>,
    smoother: Option<String>,
    tol: Option<f64>,
    maxit: Option<usize>,
    seed: Option<u64>,
    out_dir: Option<PathBuf>,
}

enum Failure {
    Usage(String),
    Failed(String),
}

impl<E: std::fmt::Display> From<E> for Failure
where
    E: Into<ipdg_core::DgError>,
{
    fn from(e: E) -> Self {
        Failure::Failed(e.to_string())
    }
}

type CliResult = std::result::Result<bool, Failure>;

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

impl Overrides {
    /// File values first, then flags on top.
    fn merged(&self) -> std::result::Result<Overrides, Failure> {
        let file = match &self.config {
            Some(path) => {
                let text =
                    std::fs::read_to_string(path).map_err(|e| usage(format!("cannot read {}: {e}", path.display())))?;
                serde_json::from_str::<FileConfig>(&text)
                    .map_err(|e| usage(format!("bad config {}: {e}", path.display())))?
            }
            None => FileConfig::default(),
        };
        Ok(Overrides {
            config: self.config.clone(),
            eps: self.eps.clone().or(file.eps),
            levels: self.levels.clone().or(file.levels),
            theta: self.theta.or(file.theta),
            alpha: self.alpha.or(file.alpha),
            variant: self.variant.clone().or(file.variant),
            precond: self.precond.clone().or(file.precond),
            inner: self.inner.clone().or(file.inner),
            ratio: self.ratio.or(file.ratio),
            sweeps: self.sweeps.or(file.sweeps),
            smoother: self.smoother.clone().or(file.smoother),
            tol: self.tol.or(file.tol),
            maxit: self.maxit.or(file.maxit),
            seed: self.seed.or(file.seed),
            out_dir: self.out_dir.clone().or(file.out_dir),
        })
    }

    fn apply(&self, mut cfg: ExperimentConfig) -> std::result::Result<ExperimentConfig, Failure> {
        if let Some(v) = &self.eps {
            cfg.eps_list = v.clone();
        }
        if let Some(v) = &self.levels {
            cfg.levels = v.clone();
        }
        if let Some(v) = self.theta {
            cfg.theta = v;
        }
        if let Some(v) = self.alpha {
            cfg.alpha = v;
        }
        if let Some(v) = &self.variant {
            cfg.variant = match v.as_str() {
                "ip0" => Variant::Ip0,
                "ip1" => Variant::Ip1,
                _ => return Err(usage(format!("unknown variant {v}"))),
            };
        }
        if let Some(v) = &self.precond {
            cfg.precond = PrecondKind::parse(v).ok_or_else(|| usage(format!("unknown preconditioner {v}")))?;
        }
        if let Some(v) = &self.inner {
            cfg.inner = PrecondKind::parse(v).ok_or_else(|| usage(format!("unknown preconditioner {v}")))?;
        }
        if let Some(v) = self.ratio {
            cfg.ratio = v;
        }
        if let Some(v) = self.sweeps {
            cfg.smoother.sweeps = v;
        }
        if let Some(v) = &self.smoother {
            cfg.smoother.kind = match v.as_str() {
                "sym-gs" => SmootherKind::SymGs,
                "jacobi" => SmootherKind::Jacobi,
                _ => return Err(usage(format!("unknown smoother {v}"))),
            };
        }
        if let Some(v) = self.tol {
            cfg.tol = v;
        }
        if let Some(v) = self.maxit {
            cfg.maxit = v;
        }
        if let Some(v) = self.seed {
            cfg.seed = v;
        }
        cfg.validate().map_err(|e| usage(e.to_string()))?;
        Ok(cfg)
    }

    fn out_dir(&self) -> PathBuf {
        std::env::var_os(OUT_ENV)
            .map(PathBuf::from)
            .or_else(|| self.out_dir.clone())
            .unwrap_or_else(|| PathBuf::from("out"))
    }
}

fn first_eps(cfg: &ExperimentConfig, given: bool) -> f64 {
    if given {
        cfg.eps_list[0]
    } else {
        1e-3
    }
}

fn mesh_info(levels: usize) -> CliResult {
    let h = build_hierarchy(levels);
    let mut out = std::io::stdout().lock();
    for (l, m) in h.meshes.iter().enumerate() {
        let _ = writeln!(
            out,
            "level={l} vertices={} triangles={} edges={} interior_edges={} dofs={}",
            m.n_vertices(),
            m.n_triangles(),
            m.n_edges(),
            m.n_interior_edges(),
            m.dg_dofs()
        );
    }
    Ok(true)
}

fn write_file(
    dir: &Path,
    name: &str,
    body: impl FnOnce(&mut std::fs::File) -> std::io::Result<()>,
) -> std::result::Result<PathBuf, Failure> {
    std::fs::create_dir_all(dir).map_err(|e| Failure::Failed(e.to_string()))?;
    let path = dir.join(name);
    let mut f = std::fs::File::create(&path).map_err(|e| Failure::Failed(e.to_string()))?;
    body(&mut f).map_err(|e| Failure::Failed(e.to_string()))?;
    Ok(path)
}

fn assemble(s: &Single) -> CliResult {
    let o = s.opts.merged()?;
    let cfg = o.apply(ExperimentConfig::default())?;
    let eps = first_eps(&cfg, o.eps.is_some());
    let params = MethodParams::new(cfg.theta, cfg.alpha, cfg.variant)?;
    let h = build_hierarchy(s.level);
    let p = DgProblem::with_epsilon(h.finest(), eps)?;
    let a = p.assemble(&params);
    let basis = SplitBasis::new(p.mesh, &p.weights);
    let blocks = basis.extract_blocks(&a, &params)?;
    let dir = o.out_dir();
    let stem = format!("{}_{:e}_{}", params.name(), eps, s.level);
    let mut written = vec![write_file(&dir, &format!("{stem}_A.coo"), |f| a.write_coordinate(f))?];
    for (name, m) in [("zz", &blocks.zz), ("vz", &blocks.vz), ("vv", &blocks.vv)] {
        written.push(write_file(&dir, &format!("{stem}_{name}.coo"), |f| m.write_coordinate(f))?);
    }
    written.push(write_file(&dir, &format!("mesh_{}.txt", s.level), |f| p.mesh.write_dump(f))?);
    println!(
        "{} dofs={} nnz={} zero_block_rel={:.3e}",
        params.name(),
        a.nrows(),
        a.nnz(),
        blocks.structure().zero_block_rel
    );
    for w in written {
        println!("wrote {}", w.display());
    }
    Ok(true)
}

fn solve(s: &Single) -> CliResult {
    let o = s.opts.merged()?;
    let cfg = o.apply(ExperimentConfig::default())?;
    let eps = first_eps(&cfg, o.eps.is_some());
    let summary = solve_problem(&cfg, eps, s.level)?;
    let json = serde_json::to_string_pretty(&summary).map_err(|e| Failure::Failed(e.to_string()))?;
    let path =
        write_file(&o.out_dir(), &format!("solve_{:e}_{}.json", eps, s.level), |f| f.write_all(json.as_bytes()))?;
    for (phase, rep) in &summary.phases {
        println!("{} {phase}: iterations={} converged={}", summary.method, rep.iterations, rep.converged);
    }
    println!("relative residual {:.3e}", summary.rel_residual);
    println!("wrote {}", path.display());
    Ok(summary.phases.iter().all(|(_, r)| r.converged))
}

fn table(kind: TableKind, opts: &Overrides) -> CliResult {
    let o = opts.merged()?;
    let cfg = o.apply(ExperimentConfig::for_table(kind))?;
    let result = run_table(kind, &cfg)?;
    let dir = o.out_dir();
    result.write_outputs(&dir)?;
    let timings: String =
        result.cells.iter().zip(&result.timings).map(|(c, t)| format!("{:e},{},{t:.4}\n", c.eps, c.level)).collect();
    write_file(&dir, &format!("{}_timings.csv", result.name), |f| {
        f.write_all(b"eps,level,seconds\n")?;
        f.write_all(timings.as_bytes())
    })?;
    print!("{}", result.to_markdown());
    Ok(result.all_golden_pass())
}

fn spectrum(s: &Single) -> CliResult {
    let o = s.opts.merged()?;
    let cfg = o.apply(ExperimentConfig::default())?;
    let eps = first_eps(&cfg, o.eps.is_some());
    let dump = dump_spectrum(&cfg, eps, s.level)?;
    let path = dump.write(&o.out_dir())?;
    let n = dump.eigenvalues.len();
    println!(
        "{} eigenvalues ({}): min={:.6e} max={:.6e} isolated={}",
        n,
        dump.method,
        dump.eigenvalues[0],
        dump.eigenvalues[n - 1],
        dump.n_isolated
    );
    println!("wrote {}", path.display());
    Ok(true)
}

fn verify(s: &Single) -> CliResult {
    let o = s.opts.merged()?;
    let cfg = o.apply(ExperimentConfig::default())?;
    let eps = first_eps(&cfg, o.eps.is_some());
    let report = run_verify(s.level, eps, cfg.alpha)?;
    let text = report.to_text();
    write_file(&o.out_dir(), &format!("verify_{:e}_{}.txt", eps, s.level), |f| f.write_all(text.as_bytes()))?;
    print!("{text}");
    Ok(report.passed())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::MeshInfo { levels } => mesh_info(*levels),
        Command::Assemble(s) => assemble(s),
        Command::Solve(s) => solve(s),
        Command::Table { kind, opts } => table((*kind).into(), opts),
        Command::Spectrum(s) => spectrum(s),
        Command::Verify(s) => verify(s),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Failed(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
