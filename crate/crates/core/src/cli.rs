//! Command-line driver behind the `c1qk` binary.
//!
//! [`run`] parses the arguments, validates them before any computation and
//! maps failures to exit codes: 0 on success, 1 on numerical failure and 2 on
//! usage errors.

use std::fmt::Write as _;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::analysis::{compare_dofs, run_study, Seminorm, StudyConfig, MAX_LEVELS};
use crate::mesh::EntityKind;
use crate::refelem::ReferenceElement;
use crate::solver::{Method, SolverConfig};
use crate::{Error, Variant};

pub const EXIT_OK: i32 = 0;
pub const EXIT_NUMERICAL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "c1qk",
    version,
    about = "C1-Qk Bell and BFS finite elements for the clamped biharmonic problem"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Convergence study for u = prod sin^2(pi x_a) on the grids n = 1, 2, 4, ...
    Study(StudyArgs),
    /// Construction diagnostics of a reference element.
    ElementInfo(ElementArgs),
    /// Global space dimensions of Bell and BFS for n = 1..n-max.
    CompareDofs(CompareArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ElementArg {
    Bell,
    Bfs,
}

impl From<ElementArg> for Variant {
    fn from(e: ElementArg) -> Variant {
        match e {
            ElementArg::Bell => Variant::Bell,
            ElementArg::Bfs => Variant::Bfs,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SolverArg {
    Pcg,
    Cholesky,
    Auto,
}

impl From<SolverArg> for Method {
    fn from(s: SolverArg) -> Method {
        match s {
            SolverArg::Pcg => Method::Pcg,
            SolverArg::Cholesky => Method::Cholesky,
            SolverArg::Auto => Method::Auto,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Table,
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SeminormArg {
    /// ||Δ e||
    Laplacian,
    /// Full Hessian seminorm
    Hessian,
}

#[derive(Debug, Args)]
pub struct StudyArgs {
    #[arg(long)]
    pub dim: usize,
    #[arg(long)]
    pub k: usize,
    #[arg(long, value_enum)]
    pub element: ElementArg,
    /// Number of grids G_1..G_L (n = 2^(i-1)).
    #[arg(long)]
    pub levels: usize,
    #[arg(long, value_enum, default_value = "auto")]
    pub solver: SolverArg,
    /// Relative residual tolerance of PCG.
    #[arg(long, default_value_t = 1e-11)]
    pub tol: f64,
    #[arg(long, default_value_t = 500_000)]
    pub max_iter: usize,
    /// Gauss points per axis for load and error integrals [default: k+3].
    #[arg(long)]
    pub quad: Option<usize>,
    /// Gauss points per axis for stiffness integrals [default: k+1].
    #[arg(long)]
    pub stiffness_quad: Option<usize>,
    #[arg(long, value_enum, default_value = "laplacian")]
    pub seminorm: SeminormArg,
    #[arg(long, value_enum, default_value = "table")]
    pub format: Format,
    /// Write the report here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Write the finest-level reduced matrix in Matrix Market format.
    #[arg(long)]
    pub export_matrix: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ElementArgs {
    #[arg(long)]
    pub dim: usize,
    #[arg(long)]
    pub k: usize,
    #[arg(long, value_enum)]
    pub element: ElementArg,
    /// Also list every degree of freedom.
    #[arg(long)]
    pub list_dofs: bool,
    #[arg(long, value_enum, default_value = "table")]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[arg(long)]
    pub dim: usize,
    #[arg(long)]
    pub k: usize,
    #[arg(long)]
    pub n_max: usize,
    #[arg(long, value_enum, default_value = "table")]
    pub format: Format,
}

/// A failure carrying its exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::InvalidArgument(_)
            | Error::UnsupportedDegree { .. }
            | Error::TooLarge { .. } => EXIT_USAGE,
            _ => EXIT_NUMERICAL,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

fn check_dim(dim: usize) -> CliResult<()> {
    if dim == 2 || dim == 3 {
        Ok(())
    } else {
        Err(Failure::usage(format!("--dim must be 2 or 3, got {dim}")))
    }
}

fn check_degree(k: usize, variant: Variant) -> CliResult<()> {
    let min = variant.min_degree();
    if k < min {
        return Err(Failure::usage(format!(
            "--k {k} is unsupported for the {} element (requires k >= {min})",
            variant.name()
        )));
    }
    if k > 12 {
        return Err(Failure::usage(format!("--k must be at most 12, got {k}")));
    }
    Ok(())
}

fn study_config(args: &StudyArgs) -> CliResult<StudyConfig> {
    check_dim(args.dim)?;
    check_degree(args.k, args.element.into())?;
    if args.levels < 2 {
        return Err(Failure::usage(format!(
            "--levels must be >= 2, got {}",
            args.levels
        )));
    }
    if args.levels > MAX_LEVELS {
        return Err(Failure::usage(format!(
            "--levels must be at most {MAX_LEVELS}, got {}",
            args.levels
        )));
    }
    if !(args.tol > 0.0 && args.tol < 1.0) {
        return Err(Failure::usage(format!(
            "--tol must lie in (0, 1), got {}",
            args.tol
        )));
    }
    if args.max_iter == 0 {
        return Err(Failure::usage("--max-iter must be positive"));
    }
    if let Some(m) = args.quad {
        if m < args.k + 3 || m > 64 {
            return Err(Failure::usage(format!(
                "--quad must lie in {}..=64 for k = {}, got {m}",
                args.k + 3,
                args.k
            )));
        }
    }
    if let Some(m) = args.stiffness_quad {
        if m < args.k + 1 || m > 64 {
            return Err(Failure::usage(format!(
                "--stiffness-quad must lie in {}..=64 for k = {}, got {m}",
                args.k + 1,
                args.k
            )));
        }
    }
    Ok(StudyConfig {
        solver: SolverConfig {
            method: args.solver.into(),
            rel_tol: args.tol,
            max_iter: args.max_iter,
        },
        stiffness_quad: args.stiffness_quad,
        quad: args.quad,
        seminorm: match args.seminorm {
            SeminormArg::Laplacian => Seminorm::Laplacian,
            SeminormArg::Hessian => Seminorm::Hessian,
        },
        export_matrix: args.export_matrix.clone(),
    })
}

fn cmd_study(args: &StudyArgs) -> CliResult<String> {
    let config = study_config(args)?;
    let report = run_study(args.dim, args.k, args.element.into(), args.levels, &config).map_err(
        |e| match e {
            Error::TooLarge { size, limit } => Failure::usage(format!(
                "--solver cholesky cannot handle {size} unknowns (limit {limit}); use pcg or auto"
            )),
            e => e.into(),
        },
    )?;
    Ok(match args.format {
        Format::Table => report.to_table(),
        Format::Csv => report.to_csv(),
        Format::Json => report.to_json() + "\n",
    })
}

fn entity_name(e: EntityKind) -> &'static str {
    match e {
        EntityKind::Vertex => "vertex",
        EntityKind::Edge => "edge",
        EntityKind::Face => "face",
        EntityKind::Cell => "cell",
    }
}

fn deriv_name(d: [u8; 3], dim: usize) -> String {
    let axes = ["x", "y", "z"];
    let s: String = (0..dim).filter(|&a| d[a] > 0).map(|a| axes[a]).collect();
    if s.is_empty() {
        "v".into()
    } else {
        format!("d{s}")
    }
}

fn cmd_element_info(args: &ElementArgs) -> CliResult<String> {
    check_dim(args.dim)?;
    let variant: Variant = args.element.into();
    check_degree(args.k, variant)?;
    let elem = ReferenceElement::<f64>::new(args.k, args.dim, variant)?;
    let r = elem.report();
    if args.format == Format::Json {
        let mut value = serde_json::to_value(r).expect("report serialises");
        if args.list_dofs {
            let dofs: Vec<_> = elem
                .dofs()
                .iter()
                .map(|d| {
                    serde_json::json!({
                        "deriv": &d.deriv[..args.dim],
                        "location": &d.location[..args.dim],
                        "entity": entity_name(d.entity),
                    })
                })
                .collect();
            value["dofs"] = dofs.into();
        }
        return Ok(serde_json::to_string_pretty(&value).expect("json") + "\n");
    }
    let mut s = String::new();
    let label = match variant {
        Variant::Bell => "Bell",
        Variant::Bfs => "BFS",
    };
    let _ = writeln!(s, "element            C1-Q{} {label} {}D", r.k, r.dim);
    let _ = writeln!(s, "N_d                {}", r.n_dofs);
    let _ = writeln!(s, "dim Q_k            {}", r.dim_qk);
    let _ = writeln!(s, "constraint rows    {}", r.constraint_rows);
    let _ = writeln!(s, "constraint rank    {}", r.constraint_rank);
    let _ = writeln!(s, "null-space dim     {}", r.null_space_dim);
    let _ = writeln!(s, "condition number   {:.3e}", r.condition_number);
    let _ = writeln!(s, "duality residual   {:.3e}", r.duality_residual);
    if args.list_dofs && args.format == Format::Table {
        let _ = writeln!(s);
        let _ = writeln!(s, "{:>4}  {:<7} {:<4} location", "#", "entity", "op");
        for (i, d) in elem.dofs().iter().enumerate() {
            let loc: Vec<String> = d.location[..args.dim]
                .iter()
                .map(|x| format!("{x:.4}"))
                .collect();
            let _ = writeln!(
                s,
                "{i:>4}  {:<7} {:<4} ({})",
                entity_name(d.entity),
                deriv_name(d.deriv, args.dim),
                loc.join(", ")
            );
        }
    } else if args.list_dofs {
        let _ = writeln!(s, "index,entity,op,location");
        for (i, d) in elem.dofs().iter().enumerate() {
            let loc: Vec<String> = d.location[..args.dim]
                .iter()
                .map(|x| x.to_string())
                .collect();
            let _ = writeln!(
                s,
                "{i},{},{},{}",
                entity_name(d.entity),
                deriv_name(d.deriv, args.dim),
                loc.join(" ")
            );
        }
    }
    Ok(s)
}

fn cmd_compare_dofs(args: &CompareArgs) -> CliResult<String> {
    check_dim(args.dim)?;
    check_degree(args.k, Variant::Bell)?;
    if args.n_max == 0 {
        return Err(Failure::usage("--n-max must be at least 1"));
    }
    if args.n_max > 4096 {
        return Err(Failure::usage(format!(
            "--n-max must be at most 4096, got {}",
            args.n_max
        )));
    }
    let rows = compare_dofs(args.dim, args.k, args.n_max)?;
    let mut s = String::new();
    match args.format {
        Format::Table => {
            let _ = writeln!(s, "C1-Q{} {}D space dimensions", args.k, args.dim);
            let _ = writeln!(
                s,
                "{:>6} {:>12} {:>12} {:>10}",
                "n", "Bell", "BFS", "BFS/Bell"
            );
            for r in &rows {
                let _ = writeln!(
                    s,
                    "{:>6} {:>12} {:>12} {:>10.6}",
                    r.n, r.bell, r.bfs, r.ratio
                );
            }
        }
        Format::Csv => {
            let _ = writeln!(s, "n,bell,bfs,ratio");
            for r in &rows {
                let _ = writeln!(s, "{},{},{},{}", r.n, r.bell, r.bfs, r.ratio);
            }
        }
        Format::Json => {
            s = serde_json::to_string_pretty(&rows).expect("json") + "\n";
        }
    }
    Ok(s)
}

fn execute(cli: &Cli, out: &mut dyn Write) -> CliResult<()> {
    let (text, path) = match &cli.command {
        Command::Study(a) => (cmd_study(a)?, a.out.as_ref()),
        Command::ElementInfo(a) => (cmd_element_info(a)?, None),
        Command::CompareDofs(a) => (cmd_compare_dofs(a)?, None),
    };
    let io = |e: std::io::Error| Failure {
        code: EXIT_NUMERICAL,
        message: e.to_string(),
    };
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| Failure {
            code: EXIT_NUMERICAL,
            message: format!("cannot write --out {}: {e}", p.display()),
        }),
        None => out.write_all(text.as_bytes()).map_err(io),
    }
}

/// Runs the CLI on `args` (including the program name) and returns the exit code.
pub fn run<I, S>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let rendered = e.render().to_string();
            let _ = if code == EXIT_OK {
                out.write_all(rendered.as_bytes())
            } else {
                err.write_all(rendered.as_bytes())
            };
            return code;
        }
    };
    match execute(&cli, out) {
        Ok(()) => EXIT_OK,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}
