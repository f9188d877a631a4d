use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use npw_core::cahill_glauber::{
    npw_from_w_s, thermal_p_table, w_s_from_density, BridgePath, PolarGrid, PolarGridSpec,
    SParameter,
};
use npw_core::fock::{hermiticity_defect, min_eigenvalue, random_density};
use npw_core::io::{self as npw_io, format_float};
use npw_core::npw::{npw_from_density, PhaseGrid};
use npw_core::reconstruct::{assemble_density, ladder_closed_form, ladder_recursive};
use npw_core::states::{
    coherent_phase_state_with, coherent_state_with, number_state, thermal_density_with,
    CoherentPhaseParam,
};
use npw_core::verify::{self, VerifyConfig};
use npw_core::{DensityMatrix, Error, Tolerances, Truncation};

mod descriptor;

use descriptor::StateDescriptor;

#[derive(Parser, Debug)]
#[command(name = "npw", version, about = "Number-phase Wigner functions in truncated Fock space")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    opts: Opts,
}

#[derive(clap::Args, Debug, Clone)]
struct Opts {
    /// Truncation dimension D (number of Fock states kept).
    #[arg(long, global = true)]
    dim: Option<usize>,
    /// Number of phase-grid points M (default: next power of two >= 4D).
    #[arg(long, global = true)]
    grid: Option<usize>,
    /// State descriptor: number:n, coherent:re,im, cps:abs,phi, thermal:nbar or random.
    #[arg(long, global = true)]
    state: Option<String>,
    /// Input file, or - for stdin.
    #[arg(long = "in", global = true)]
    input: Option<PathBuf>,
    /// Output file, or - for stdout.
    #[arg(long, global = true, default_value = "-")]
    out: PathBuf,
    /// Cahill-Glauber ordering parameter s.
    #[arg(long, global = true, allow_hyphen_values = true)]
    s: Option<f64>,
    /// Comma-separated Fock rows to emit.
    #[arg(long, global = true, value_delimiter = ',')]
    rows: Option<Vec<usize>>,
    /// Outer radius of the polar grid.
    #[arg(long, global = true)]
    rmax: Option<f64>,
    /// Number of radial Gauss-Legendre nodes.
    #[arg(long, global = true)]
    nr: Option<usize>,
    /// Number of angular nodes of the polar grid.
    #[arg(long, global = true)]
    mgamma: Option<usize>,
    /// Validation tolerance for hermiticity, trace, positivity and truncation tail.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Seed for the random state and for verify.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write the density matrix of a state as JSON.
    State,
    /// Tabulate the number-phase Wigner function as CSV.
    Npw,
    /// Rebuild a density matrix from a number-phase Wigner CSV.
    Reconstruct {
        /// Reference density JSON to compare against.
        #[arg(long)]
        reference: Option<PathBuf>,
        /// Where to write the text report (default: stderr).
        #[arg(long)]
        report: Option<PathBuf>,
        /// Where to dump the Fourier ladder as JSON.
        #[arg(long)]
        ladder: Option<PathBuf>,
    },
    /// Tabulate W^(s) on a polar grid as CSV.
    Cg,
    /// Number-phase Wigner function from a W^(s) table.
    Bridge {
        #[arg(long, value_enum, default_value_t = PathArg::Composed)]
        path: PathArg,
    },
    /// Number-phase Wigner function from a smooth P function.
    Pbridge,
    /// Run the invariant suite and write a JSON report.
    Verify {
        /// Flip the sign of one off-diagonal density entry first.
        #[arg(long)]
        corrupt: bool,
    },
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum PathArg {
    Composed,
    Direct,
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Core(Error),
    VerifyFailed,
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Core(Error::Io(e))
    }
}

type CliResult<T> = Result<T, CliError>;

/// Parsed and checked command-line settings shared by every subcommand.
struct RunConfig {
    opts: Opts,
}

impl RunConfig {
    fn new(opts: Opts) -> CliResult<Self> {
        if let Some(d) = opts.dim {
            if d < 2 {
                return Err(CliError::Usage(format!("--dim must be at least 2, got {d}")));
            }
            if let Some(m) = opts.grid {
                if m < 2 * d - 1 {
                    return Err(CliError::Usage(format!(
                        "--grid {m} is too coarse for --dim {d} (need at least {})",
                        2 * d - 1
                    )));
                }
            }
        }
        if let Some(tol) = opts.tol {
            if !(tol.is_finite() && tol > 0.0) {
                return Err(CliError::Usage(format!("--tol must be positive, got {tol}")));
            }
        }
        Ok(Self { opts })
    }

    fn truncation(&self) -> CliResult<Truncation> {
        let d = self.opts.dim.ok_or_else(|| CliError::Usage("--dim is required".into()))?;
        Ok(Truncation::new(d)?)
    }

    fn tolerances(&self, base: Tolerances) -> Tolerances {
        match self.opts.tol {
            Some(x) => Tolerances { herm: x, trace: x, psd: x, tail: x, ..base },
            None => base,
        }
    }

    fn phase_grid(&self, t: Truncation) -> CliResult<PhaseGrid> {
        let grid = match self.opts.grid {
            Some(m) => PhaseGrid::new(m)?,
            None => PhaseGrid::for_dim(t),
        };
        grid.check_for(t).map_err(|e| CliError::Usage(e.to_string()))?;
        Ok(grid)
    }

    fn polar_grid(&self, t: Truncation) -> CliResult<PolarGrid> {
        let def = PolarGridSpec::for_dim(t);
        let spec = PolarGridSpec {
            r_max: self.opts.rmax.unwrap_or(def.r_max),
            n_r: self.opts.nr.unwrap_or(def.n_r),
            m_gamma: self.opts.mgamma.unwrap_or(def.m_gamma),
        };
        PolarGrid::new(spec).map_err(|e| CliError::Usage(e.to_string()))
    }

    fn s(&self) -> CliResult<SParameter> {
        let s = self.opts.s.ok_or_else(|| CliError::Usage("--s is required".into()))?;
        SParameter::new(s).map_err(|e| CliError::Usage(e.to_string()))
    }

    fn input(&self) -> CliResult<&Path> {
        self.opts.input.as_deref().ok_or_else(|| CliError::Usage("--in is required".into()))
    }

    fn output(&self) -> CliResult<Box<dyn Write>> {
        Ok(npw_io::open_output(&self.opts.out)?)
    }

    fn descriptor(&self) -> CliResult<Option<StateDescriptor>> {
        self.opts
            .state
            .as_deref()
            .map(|s| s.parse::<StateDescriptor>().map_err(CliError::Usage))
            .transpose()
    }

    fn build_state(&self, desc: StateDescriptor) -> CliResult<DensityMatrix> {
        let t = self.truncation()?;
        let tol = self.tolerances(Tolerances::default());
        let rho = match desc {
            StateDescriptor::Number(n) => number_state(t, n)?.to_density(),
            StateDescriptor::Coherent(alpha) => coherent_state_with(t, alpha, &tol)?.to_density(),
            StateDescriptor::CoherentPhase { modulus, phase } => {
                let p = CoherentPhaseParam::from_polar(modulus, phase)?;
                coherent_phase_state_with(t, p, &tol)?.to_density()
            }
            StateDescriptor::Thermal(nbar) => thermal_density_with(t, nbar, &tol)?,
            StateDescriptor::Random => random_density(t, self.opts.seed),
        };
        Ok(rho)
    }

    /// The density from `--state`, or else from the JSON at `--in`.
    fn density(&self) -> CliResult<DensityMatrix> {
        if let Some(desc) = self.descriptor()? {
            return self.build_state(desc);
        }
        let tol = self.tolerances(Tolerances::default());
        let rho = npw_io::read_density_json(npw_io::open_input(self.input()?)?, &tol)?;
        if rho.dim() < 2 {
            return Err(CliError::Usage(format!("input dimension must be at least 2, got {}", rho.dim())));
        }
        if let Some(d) = self.opts.dim {
            if d != rho.dim() {
                return Err(CliError::Usage(format!(
                    "--dim {d} does not match the input dimension {}",
                    rho.dim()
                )));
            }
        }
        Ok(rho)
    }
}

fn cmd_state(cfg: &RunConfig) -> CliResult<()> {
    let desc = cfg.descriptor()?.ok_or_else(|| CliError::Usage("--state is required".into()))?;
    let rho = cfg.build_state(desc)?;
    npw_io::write_density_json(&rho, cfg.output()?)?;
    Ok(())
}

fn cmd_npw(cfg: &RunConfig) -> CliResult<()> {
    let rho = cfg.density()?;
    let grid = cfg.phase_grid(rho.truncation())?;
    let table = npw_from_density(&rho, grid)?;
    npw_io::write_npw_csv(&table, cfg.opts.rows.as_deref(), cfg.output()?)?;
    Ok(())
}

fn cmd_reconstruct(
    cfg: &RunConfig,
    reference: Option<&Path>,
    report: Option<&Path>,
    ladder_out: Option<&Path>,
) -> CliResult<()> {
    let table = npw_io::read_npw_csv(npw_io::open_input(cfg.input()?)?)?;
    let tol = cfg.tolerances(Tolerances::default());
    let ladder = ladder_closed_form(&table)?;
    let route_gap = ladder.max_abs_diff(&ladder_recursive(&table)?)?;
    let rho = assemble_density(&ladder, &tol)?;
    npw_io::write_density_json(&rho, cfg.output()?)?;
    if let Some(path) = ladder_out {
        npw_io::write_ladder_json(&ladder, npw_io::open_output(path)?)?;
    }

    let mut lines = vec![
        format!("dim {}", rho.dim()),
        format!("grid_points {}", table.grid().len()),
        format!("ladder_route_gap {}", format_float(route_gap)),
        format!("trace {}", format_float(rho.trace())),
        format!("hermiticity_defect {}", format_float(hermiticity_defect(rho.entries()))),
        format!("min_eigenvalue {}", format_float(min_eigenvalue(rho.entries()))),
    ];
    if let Some(path) = reference {
        let reference = npw_io::read_density_json(npw_io::open_input(path)?, &tol)?;
        lines.push(format!("distance_to_reference {}", format_float(rho.distance(&reference))));
    }
    let mut sink: Box<dyn Write> = match report {
        Some(path) => npw_io::open_output(path)?,
        None => Box::new(std::io::stderr().lock()),
    };
    for line in lines {
        writeln!(sink, "{line}")?;
    }
    sink.flush()?;
    Ok(())
}

fn cmd_cg(cfg: &RunConfig) -> CliResult<()> {
    let s = cfg.s()?;
    let rho = cfg.density()?;
    let grid = cfg.polar_grid(rho.truncation())?;
    let table = w_s_from_density(&rho, &grid, s)?;
    npw_io::write_cg_csv(&table, cfg.output()?)?;
    Ok(())
}

fn cmd_bridge(cfg: &RunConfig, path: PathArg) -> CliResult<()> {
    let table = npw_io::read_cg_csv(npw_io::open_input(cfg.input()?)?)?;
    let t = cfg.truncation()?;
    let grid = cfg.phase_grid(t)?;
    let path = match path {
        PathArg::Composed => BridgePath::Composed,
        PathArg::Direct => BridgePath::Direct,
    };
    let tol = cfg.tolerances(Tolerances::quadrature());
    let out = npw_from_w_s(&table, grid, t, path, &tol)?;
    npw_io::write_npw_csv(&out, cfg.opts.rows.as_deref(), cfg.output()?)?;
    Ok(())
}

fn cmd_pbridge(cfg: &RunConfig) -> CliResult<()> {
    let t = cfg.truncation()?;
    let p_table = match cfg.descriptor()? {
        Some(StateDescriptor::Thermal(nbar)) => thermal_p_table(cfg.polar_grid(t)?, nbar)?,
        Some(_) => {
            return Err(CliError::Usage(
                "pbridge builds a P function only for thermal states; pass a sampled P table with --in".into(),
            ))
        }
        None => npw_io::read_cg_csv(npw_io::open_input(cfg.input()?)?)?,
    };
    let grid = cfg.phase_grid(t)?;
    let out = npw_core::cahill_glauber::npw_from_p(&p_table, grid, t)?;
    npw_io::write_npw_csv(&out, cfg.opts.rows.as_deref(), cfg.output()?)?;
    Ok(())
}

fn cmd_verify(cfg: &RunConfig, corrupt: bool) -> CliResult<()> {
    let dim = Truncation::new(cfg.opts.dim.unwrap_or(16))?;
    let report = verify::run(&VerifyConfig { dim, seed: cfg.opts.seed, corrupt });
    report.write_json(cfg.output()?)?;
    if report.all_passed() {
        Ok(())
    } else {
        Err(CliError::VerifyFailed)
    }
}

fn run(cli: Cli) -> CliResult<()> {
    let cfg = RunConfig::new(cli.opts)?;
    match cli.command {
        Command::State => cmd_state(&cfg),
        Command::Npw => cmd_npw(&cfg),
        Command::Reconstruct { reference, report, ladder } => {
            cmd_reconstruct(&cfg, reference.as_deref(), report.as_deref(), ladder.as_deref())
        }
        Command::Cg => cmd_cg(&cfg),
        Command::Bridge { path } => cmd_bridge(&cfg, path),
        Command::Pbridge => cmd_pbridge(&cfg),
        Command::Verify { corrupt } => cmd_verify(&cfg, corrupt),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::VerifyFailed) => {
            eprintln!("npw: verification failed");
            ExitCode::from(1)
        }
        Err(CliError::Usage(msg)) => {
            eprintln!("npw: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Core(e)) => {
            eprintln!("npw: {e}");
            ExitCode::from(if e.is_numeric() { 3 } else { 2 })
        }
    }
}
