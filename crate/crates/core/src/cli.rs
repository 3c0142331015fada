//! Command-line front end.

use std::fmt;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::analysis::{run_study, sample_grid, sparsity_report, write_samples, StudyRow};
use crate::assembly::{apply_constraints, Assembler, BoundaryMode, DofOrdering};
use crate::error::Error;
use crate::format::{sci, sci_digits};
use crate::problems::{Model, ModelKind, ProblemSpec};
use crate::quadrature::{DEFAULT_DEGREE, MAX_DEGREE};
use crate::solver::NewtonOptions;

/// Environment variable capping the number of worker threads.
pub const THREADS_ENV: &str = "ARGYRIS_QG_THREADS";

#[derive(Debug, Parser)]
#[command(
    name = "argyris-qg",
    version,
    about = "Argyris C1 finite element solver for streamfunction models"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Convergence study over a list of mesh sizes; writes an error table CSV.
    Study(CommonArgs),
    /// Single solve; writes the coefficient vector and, for qge, a Newton log.
    Solve(CommonArgs),
    /// Writes the free-DOF system matrix in MatrixMarket format.
    ExportMatrix(CommonArgs),
    /// Samples psi and the velocity on a uniform grid.
    Sample(CommonArgs),
}

#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// key=value file with the same keys as the long flags; flags win.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// biharmonic, stommel, stommel-munk or qge.
    #[arg(long)]
    pub model: Option<String>,
    /// Manufactured solution id.
    #[arg(long)]
    pub solution: Option<String>,
    #[arg(long = "eps-s")]
    pub eps_s: Option<f64>,
    #[arg(long = "eps-m")]
    pub eps_m: Option<f64>,
    #[arg(long)]
    pub re: Option<f64>,
    #[arg(long)]
    pub ro: Option<f64>,
    /// Mesh size(s), e.g. `1/2,1/4,1/8`.
    #[arg(long)]
    pub h: Option<String>,
    /// clamped, dirichlet-value, lifted-dirichlet or free.
    #[arg(long)]
    pub boundary: Option<String>,
    /// strip or blocked.
    #[arg(long)]
    pub ordering: Option<String>,
    #[arg(long = "quad-degree")]
    pub quad_degree: Option<usize>,
    #[arg(long = "tol-res")]
    pub tol_res: Option<f64>,
    #[arg(long = "tol-inc")]
    pub tol_inc: Option<f64>,
    #[arg(long = "max-it")]
    pub max_it: Option<usize>,
    /// Main output file.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Newton history CSV (qge only).
    #[arg(long = "newton-log")]
    pub newton_log: Option<PathBuf>,
    /// Also export the free-DOF system matrix (finest mesh) here.
    #[arg(long = "dump-matrix")]
    pub dump_matrix: Option<PathBuf>,
    /// Directory for vertices.csv, triangles.csv and edges.csv (finest mesh).
    #[arg(long = "dump-mesh")]
    pub dump_mesh: Option<PathBuf>,
    /// Points per side of the sampling grid.
    #[arg(long = "sample-grid")]
    pub sample_grid: Option<usize>,
}

/// Flat run configuration mirroring the long flags.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunConfig {
    pub model: Option<String>,
    pub solution: Option<String>,
    pub eps_s: Option<f64>,
    pub eps_m: Option<f64>,
    pub re: Option<f64>,
    pub ro: Option<f64>,
    pub h: Option<String>,
    pub boundary: Option<String>,
    pub ordering: Option<String>,
    pub quad_degree: Option<usize>,
    pub tol_res: Option<f64>,
    pub tol_inc: Option<f64>,
    pub max_it: Option<usize>,
    pub out: Option<PathBuf>,
    pub newton_log: Option<PathBuf>,
    pub dump_matrix: Option<PathBuf>,
    pub dump_mesh: Option<PathBuf>,
    pub sample_grid: Option<usize>,
}

/// Errors of the command layer, split by exit code.
#[derive(Debug)]
pub enum CliError {
    /// Invalid configuration; exit code 2.
    Config(String),
    /// Solver or I/O failure; exit code 1.
    Run(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Run(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "invalid configuration: {m}"),
            CliError::Run(m) => write!(f, "{m}"),
        }
    }
}

fn config_err(e: impl fmt::Display) -> CliError {
    CliError::Config(e.to_string())
}

fn run_err(e: impl fmt::Display) -> CliError {
    CliError::Run(e.to_string())
}

fn parse_value<T: std::str::FromStr>(key: &str, v: &str) -> Result<T, CliError>
where
    T::Err: fmt::Display,
{
    v.parse()
        .map_err(|e: T::Err| CliError::Config(format!("bad value '{v}' for '{key}': {e}")))
}

impl RunConfig {
    /// Parses `key = value` lines; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut c = RunConfig::default();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| CliError::Config(format!("line {}: expected key=value", n + 1)))?;
            let (k, v) = (k.trim(), v.trim());
            match k {
                "model" => c.model = Some(v.to_string()),
                "solution" => c.solution = Some(v.to_string()),
                "eps-s" => c.eps_s = Some(parse_value(k, v)?),
                "eps-m" => c.eps_m = Some(parse_value(k, v)?),
                "re" => c.re = Some(parse_value(k, v)?),
                "ro" => c.ro = Some(parse_value(k, v)?),
                "h" => c.h = Some(v.to_string()),
                "boundary" => c.boundary = Some(v.to_string()),
                "ordering" => c.ordering = Some(v.to_string()),
                "quad-degree" => c.quad_degree = Some(parse_value(k, v)?),
                "tol-res" => c.tol_res = Some(parse_value(k, v)?),
                "tol-inc" => c.tol_inc = Some(parse_value(k, v)?),
                "max-it" => c.max_it = Some(parse_value(k, v)?),
                "out" => c.out = Some(PathBuf::from(v)),
                "newton-log" => c.newton_log = Some(PathBuf::from(v)),
                "dump-matrix" => c.dump_matrix = Some(PathBuf::from(v)),
                "dump-mesh" => c.dump_mesh = Some(PathBuf::from(v)),
                "sample-grid" => c.sample_grid = Some(parse_value(k, v)?),
                other => {
                    return Err(CliError::Config(format!(
                        "line {}: unknown key '{other}'",
                        n + 1
                    )))
                }
            }
        }
        Ok(c)
    }

    /// `key=value` text that [`RunConfig::parse`] reads back unchanged.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let mut put = |k: &str, v: Option<String>| {
            if let Some(v) = v {
                out.push_str(&format!("{k}={v}\n"));
            }
        };
        let path = |p: &Option<PathBuf>| p.as_ref().map(|p| p.display().to_string());
        put("model", self.model.clone());
        put("solution", self.solution.clone());
        put("eps-s", self.eps_s.map(|v| v.to_string()));
        put("eps-m", self.eps_m.map(|v| v.to_string()));
        put("re", self.re.map(|v| v.to_string()));
        put("ro", self.ro.map(|v| v.to_string()));
        put("h", self.h.clone());
        put("boundary", self.boundary.clone());
        put("ordering", self.ordering.clone());
        put("quad-degree", self.quad_degree.map(|v| v.to_string()));
        put("tol-res", self.tol_res.map(|v| v.to_string()));
        put("tol-inc", self.tol_inc.map(|v| v.to_string()));
        put("max-it", self.max_it.map(|v| v.to_string()));
        put("out", path(&self.out));
        put("newton-log", path(&self.newton_log));
        put("dump-matrix", path(&self.dump_matrix));
        put("dump-mesh", path(&self.dump_mesh));
        put("sample-grid", self.sample_grid.map(|v| v.to_string()));
        out
    }

    /// Fields set in `over` replace those of `self`.
    pub fn overlay(self, over: RunConfig) -> RunConfig {
        RunConfig {
            model: over.model.or(self.model),
            solution: over.solution.or(self.solution),
            eps_s: over.eps_s.or(self.eps_s),
            eps_m: over.eps_m.or(self.eps_m),
            re: over.re.or(self.re),
            ro: over.ro.or(self.ro),
            h: over.h.or(self.h),
            boundary: over.boundary.or(self.boundary),
            ordering: over.ordering.or(self.ordering),
            quad_degree: over.quad_degree.or(self.quad_degree),
            tol_res: over.tol_res.or(self.tol_res),
            tol_inc: over.tol_inc.or(self.tol_inc),
            max_it: over.max_it.or(self.max_it),
            out: over.out.or(self.out),
            newton_log: over.newton_log.or(self.newton_log),
            dump_matrix: over.dump_matrix.or(self.dump_matrix),
            dump_mesh: over.dump_mesh.or(self.dump_mesh),
            sample_grid: over.sample_grid.or(self.sample_grid),
        }
    }

    /// Builds the problem and mesh list, applying the defaults of the
    /// reference tests for unset parameters.
    pub fn resolve(&self) -> Result<Resolved, CliError> {
        let kind: ModelKind = self
            .model
            .as_deref()
            .ok_or_else(|| CliError::Config("missing --model".into()))?
            .parse()
            .map_err(config_err)?;
        let mut model = Model::with_defaults(kind);
        match &mut model {
            Model::Biharmonic => {}
            Model::Stommel { eps_s } => *eps_s = self.eps_s.unwrap_or(*eps_s),
            Model::StommelMunk { eps_s, eps_m } => {
                *eps_s = self.eps_s.unwrap_or(*eps_s);
                *eps_m = self.eps_m.unwrap_or(*eps_m);
            }
            Model::Qge { re, ro } => {
                *re = self.re.unwrap_or(*re);
                *ro = self.ro.unwrap_or(*ro);
            }
        }
        let solution = self
            .solution
            .as_deref()
            .ok_or_else(|| CliError::Config("missing --solution".into()))?;
        let mut problem = ProblemSpec::new(model, solution).map_err(config_err)?;
        if let Some(b) = &self.boundary {
            problem.boundary = b.parse::<BoundaryMode>().map_err(config_err)?;
        }
        if let Some(o) = &self.ordering {
            problem.ordering = match o.as_str() {
                "strip" => DofOrdering::Strip,
                "blocked" => DofOrdering::Blocked,
                other => return Err(CliError::Config(format!("unknown ordering '{other}'"))),
            };
        }
        let degree = self.quad_degree.unwrap_or(DEFAULT_DEGREE);
        if !(1..=MAX_DEGREE).contains(&degree) {
            return Err(config_err(Error::UnsupportedQuadrature(degree)));
        }
        problem.quad_degree = degree;
        let defaults = NewtonOptions::default();
        problem.newton = NewtonOptions {
            tol_res: self.tol_res.unwrap_or(defaults.tol_res),
            tol_inc: self.tol_inc.unwrap_or(defaults.tol_inc),
            max_it: self.max_it.unwrap_or(defaults.max_it),
        };
        if !(problem.newton.tol_res >= 0.0 && problem.newton.tol_inc >= 0.0)
            || problem.newton.max_it == 0
        {
            return Err(CliError::Config(
                "Newton tolerances must be non-negative and max-it positive".into(),
            ));
        }
        let hs = parse_h_list(
            self.h
                .as_deref()
                .ok_or_else(|| CliError::Config("missing --h".into()))?,
        )?;
        let (lx, ly) = problem.solution.domain();
        for &h in &hs {
            crate::mesh::build_structured_mesh(lx, ly, h).map_err(config_err)?;
        }
        if hs.windows(2).any(|w| w[1] >= w[0]) {
            return Err(CliError::Config(
                "mesh sizes must be strictly decreasing".into(),
            ));
        }
        Ok(Resolved { problem, hs })
    }
}

impl From<&CommonArgs> for RunConfig {
    fn from(a: &CommonArgs) -> Self {
        RunConfig {
            model: a.model.clone(),
            solution: a.solution.clone(),
            eps_s: a.eps_s,
            eps_m: a.eps_m,
            re: a.re,
            ro: a.ro,
            h: a.h.clone(),
            boundary: a.boundary.clone(),
            ordering: a.ordering.clone(),
            quad_degree: a.quad_degree,
            tol_res: a.tol_res,
            tol_inc: a.tol_inc,
            max_it: a.max_it,
            out: a.out.clone(),
            newton_log: a.newton_log.clone(),
            dump_matrix: a.dump_matrix.clone(),
            dump_mesh: a.dump_mesh.clone(),
            sample_grid: a.sample_grid,
        }
    }
}

/// A validated configuration.
#[derive(Debug)]
pub struct Resolved {
    pub problem: ProblemSpec,
    pub hs: Vec<f64>,
}

/// Parses `1/2,1/4,0.125` into mesh sizes.
pub fn parse_h_list(text: &str) -> Result<Vec<f64>, CliError> {
    let parse_one = |s: &str| -> Result<f64, CliError> {
        let s = s.trim();
        let v = match s.split_once('/') {
            Some((n, d)) => {
                let n: f64 = parse_value("h", n.trim())?;
                let d: f64 = parse_value("h", d.trim())?;
                n / d
            }
            None => parse_value("h", s)?,
        };
        if v > 0.0 && v.is_finite() {
            Ok(v)
        } else {
            Err(CliError::Config(format!(
                "mesh size '{s}' must be positive"
            )))
        }
    };
    let hs: Vec<f64> = text.split(',').map(parse_one).collect::<Result<_, _>>()?;
    if hs.is_empty() {
        return Err(CliError::Config("empty mesh size list".into()));
    }
    Ok(hs)
}

fn load_config(args: &CommonArgs) -> Result<RunConfig, CliError> {
    let flags = RunConfig::from(args);
    match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
            Ok(RunConfig::parse(&text)?.overlay(flags))
        }
        None => Ok(flags),
    }
}

fn require_out(c: &RunConfig) -> Result<&Path, CliError> {
    c.out
        .as_deref()
        .ok_or_else(|| CliError::Config("missing --out".into()))
}

fn finest(hs: &[f64]) -> f64 {
    *hs.last().expect("non-empty h list")
}

/// Writes the free-DOF matrix of the problem's linear operator at mesh
/// size `h`, returning `(dimension, nnz, half-bandwidth)`.
fn export_matrix(
    problem: &ProblemSpec,
    h: f64,
    path: &Path,
) -> Result<(usize, usize, usize), CliError> {
    let (lx, ly) = problem.solution.domain();
    let mesh = crate::mesh::build_structured_mesh(lx, ly, h).map_err(run_err)?;
    let space =
        crate::argyris::Space::new(mesh, problem.boundary, problem.ordering).map_err(run_err)?;
    let asm = Assembler::with_degree(&space, problem.quad_degree).map_err(run_err)?;
    let a = problem.linear_operator(&asm).map_err(run_err)?;
    let zero = vec![0.0; space.n_dofs()];
    let reduced = apply_constraints(&a, &zero, space.dofmap()).map_err(run_err)?;
    reduced.matrix.write_matrix_market(path).map_err(run_err)?;
    let r = sparsity_report(&reduced.matrix);
    Ok((r.dimension, r.nnz, r.half_bandwidth))
}

fn dump_mesh(problem: &ProblemSpec, h: f64, dir: &Path) -> Result<(), CliError> {
    let (lx, ly) = problem.solution.domain();
    let mesh = crate::mesh::build_structured_mesh(lx, ly, h).map_err(run_err)?;
    std::fs::create_dir_all(dir).map_err(run_err)?;
    mesh.write_csv(dir).map_err(run_err)
}

fn write_extras(config: &RunConfig, problem: &ProblemSpec, h: f64) -> Result<(), CliError> {
    if let Some(p) = &config.dump_matrix {
        export_matrix(problem, h, p)?;
    }
    if let Some(d) = &config.dump_mesh {
        dump_mesh(problem, h, d)?;
    }
    Ok(())
}

fn cmd_study(config: &RunConfig) -> Result<(), CliError> {
    let Resolved { problem, hs } = config.resolve()?;
    let out = require_out(config)?;
    let table = run_study(&problem, &hs).map_err(run_err)?;
    table.write_csv(out).map_err(run_err)?;
    print!("{}", table.to_csv());
    write_extras(config, &problem, finest(&hs))?;
    let failures: Vec<String> = table
        .rows
        .iter()
        .filter_map(|r| match r {
            StudyRow::Failed { h, message, .. } => Some(format!("h = {h}: {message}")),
            StudyRow::Solved(_) => None,
        })
        .collect();
    if failures.is_empty() {
        Ok(())
    } else {
        Err(CliError::Run(format!(
            "solver failed on {} row(s): {}",
            failures.len(),
            failures.join("; ")
        )))
    }
}

fn cmd_solve(config: &RunConfig) -> Result<(), CliError> {
    let Resolved { problem, hs } = config.resolve()?;
    let out = require_out(config)?;
    let h = finest(&hs);
    let sol = problem.solve(h).map_err(run_err)?;
    let mut text = String::from("dof,value\n");
    for (i, v) in sol.coefficients.iter().enumerate() {
        text.push_str(&format!("{i},{}\n", sci_digits(*v, 16)));
    }
    std::fs::write(out, text).map_err(run_err)?;
    if let (Some(report), Some(path)) = (&sol.newton, &config.newton_log) {
        report.write_csv(path).map_err(run_err)?;
    }
    let rule = crate::quadrature::triangle_rule(problem.quad_degree).map_err(run_err)?;
    let e = crate::analysis::error_norms(&sol.space, &sol.coefficients, &problem.solution, &rule)
        .map_err(run_err)?;
    println!("h,dofs,free,e0,e1,e2");
    println!(
        "{},{},{},{},{},{}",
        sci(h),
        sol.space.n_dofs(),
        sol.n_free,
        sci(e.e0),
        sci(e.e1),
        sci(e.e2)
    );
    write_extras(config, &problem, h)?;
    if let Some(report) = &sol.newton {
        println!(
            "newton: {} iteration(s), stopped on {}, final residual {}",
            report.iterations(),
            report.reason,
            report.final_residual().map(sci).unwrap_or_default()
        );
        if !report.converged {
            return Err(CliError::Run(format!(
                "Newton iteration did not converge ({})",
                report.reason
            )));
        }
    }
    Ok(())
}

fn cmd_export_matrix(config: &RunConfig) -> Result<(), CliError> {
    let Resolved { problem, hs } = config.resolve()?;
    let out = require_out(config)?;
    let h = finest(&hs);
    let (dim, nnz, bw) = export_matrix(&problem, h, out)?;
    println!("dimension,nnz,half_bandwidth");
    println!("{dim},{nnz},{bw}");
    if let Some(d) = &config.dump_mesh {
        dump_mesh(&problem, h, d)?;
    }
    Ok(())
}

fn cmd_sample(config: &RunConfig) -> Result<(), CliError> {
    let Resolved { problem, hs } = config.resolve()?;
    let out = require_out(config)?;
    let n = config
        .sample_grid
        .ok_or_else(|| CliError::Config("missing --sample-grid".into()))?;
    if n == 0 {
        return Err(CliError::Config("--sample-grid must be positive".into()));
    }
    let h = finest(&hs);
    let sol = problem.solve(h).map_err(run_err)?;
    let samples = sample_grid(&sol.field(), n).map_err(run_err)?;
    write_samples(&samples, out).map_err(run_err)?;
    write_extras(config, &problem, h)
}

/// Caps the global worker pool from [`THREADS_ENV`], if set.
pub fn configure_threads() -> Result<(), CliError> {
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let n: usize = parse_value(THREADS_ENV, v.trim())?;
        if n == 0 {
            return Err(CliError::Config(format!("{THREADS_ENV} must be positive")));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(run_err)?;
    }
    Ok(())
}

/// Runs a parsed command line.
pub fn run(cli: Cli) -> Result<(), CliError> {
    configure_threads()?;
    match &cli.command {
        Command::Study(a) => cmd_study(&load_config(a)?),
        Command::Solve(a) => cmd_solve(&load_config(a)?),
        Command::ExportMatrix(a) => cmd_export_matrix(&load_config(a)?),
        Command::Sample(a) => cmd_sample(&load_config(a)?),
    }
}
