use std::fs::File;
use std::io::{self, Write};
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use gopw::dg::Impedance;
use gopw::BasisCase;
use gopw_bench::config::{nx_from_h, FileConfig};
use gopw_bench::study::{run_h_study, run_oracle_study, run_pollution_study, CsvSink, StudyRow};
use gopw_bench::{pipeline, ExampleKind, RunConfig};

#[derive(Parser)]
#[command(name = "gopw", version, about = "Trefftz-DG Helmholtz solver with geometric-optics plane waves")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Error against h at fixed omega.
    HStudy(Flags),
    /// Error against omega at fixed omega*h.
    PollutionStudy(Flags),
    /// Best-fit error of a single wave by one local space at fixed omega*h.
    OracleStudy(Flags),
    /// One solve.
    SingleRun(Flags),
}

#[derive(Args, Clone, Default)]
struct Flags {
    /// 1, 2 or constant.
    #[arg(long)]
    example: Option<String>,
    #[arg(long)]
    case: Option<u8>,
    /// One value, or a comma-separated list for the omega sweeps.
    #[arg(long, value_delimiter = ',')]
    omega: Vec<f64>,
    /// Mesh size(s); must divide the unit square.
    #[arg(long, value_delimiter = ',', conflicts_with = "nx")]
    h: Vec<f64>,
    /// Elements per side.
    #[arg(long, value_delimiter = ',')]
    nx: Vec<usize>,
    /// Fixed omega*h for the omega sweeps.
    #[arg(long)]
    omega_h: Option<f64>,
    #[arg(long)]
    p: Option<usize>,
    #[arg(long)]
    q: Option<usize>,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    quad_points: Option<usize>,
    #[arg(long)]
    threads: Option<usize>,
    /// wavenumber or omega.
    #[arg(long)]
    impedance: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    config: Option<PathBuf>,
    /// Leave wall_time_s empty so output is reproducible byte for byte.
    #[arg(long)]
    no_timing: bool,
}

struct Resolved {
    base: RunConfig,
    omegas: Vec<f64>,
    nxs: Vec<usize>,
    omega_h: f64,
    threads: Option<usize>,
    out: Option<PathBuf>,
    timing: bool,
}

fn parse_case(c: u8) -> Result<BasisCase> {
    Ok(BasisCase::from_index(c)?)
}

fn parse_impedance(s: &str) -> Result<Impedance> {
    match s.trim().to_ascii_lowercase().as_str() {
        "wavenumber" | "kappa" => Ok(Impedance::Wavenumber),
        "omega" => Ok(Impedance::Omega),
        other => bail!("unknown impedance `{other}` (expected wavenumber or omega)"),
    }
}

fn resolve(flags: Flags, cmd: &Command) -> Result<Resolved> {
    let file = match &flags.config {
        Some(p) => FileConfig::load(p)?,
        None => FileConfig::default(),
    };
    let oracle = matches!(cmd, Command::OracleStudy(_));
    let default_example = if oracle { "2" } else { "1" };
    let example: ExampleKind = flags
        .example
        .or(file.example)
        .unwrap_or_else(|| default_example.into())
        .parse()
        .map_err(anyhow::Error::msg)?;
    let case = parse_case(flags.case.or(file.case).unwrap_or(2))?;
    let impedance = match flags.impedance.or(file.impedance) {
        Some(s) => parse_impedance(&s)?,
        None => Impedance::Wavenumber,
    };

    let omegas = if !flags.omega.is_empty() {
        flags.omega
    } else if let Some(v) = file.omegas {
        v
    } else if let Some(w) = file.omega {
        vec![w]
    } else {
        match cmd {
            Command::PollutionStudy(_) => vec![16.0, 32.0, 64.0],
            Command::OracleStudy(_) => vec![8.0, 16.0, 32.0, 64.0],
            _ => vec![32.0],
        }
    };
    let nxs = if !flags.nx.is_empty() {
        flags.nx
    } else if !flags.h.is_empty() {
        flags.h.iter().map(|&h| nx_from_h(h)).collect::<Result<_>>()?
    } else if let Some(v) = file.nxs {
        v
    } else if let Some(n) = file.nx {
        vec![n]
    } else if let Some(h) = file.h {
        vec![nx_from_h(h)?]
    } else {
        match cmd {
            Command::HStudy(_) => vec![8, 16, 32],
            _ => vec![8],
        }
    };
    let default_p = if case == BasisCase::One { 9 } else { 5 };
    let base = RunConfig {
        example,
        case,
        omega: omegas[0],
        nx: nxs[0],
        p: flags.p.or(file.p).unwrap_or(default_p),
        q: flags.q.or(file.q),
        m: flags.m.or(file.m).unwrap_or(5),
        quad_points: flags.quad_points.or(file.quad_points),
        impedance,
        ..RunConfig::default()
    };
    Ok(Resolved {
        base,
        omegas,
        nxs,
        omega_h: flags.omega_h.or(file.omega_h).unwrap_or(1.0),
        threads: flags.threads.or(file.threads),
        out: flags.out.or(file.out),
        timing: !(flags.no_timing || file.no_timing.unwrap_or(false)),
    })
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    let flags = match &cli.command {
        Command::HStudy(f) | Command::PollutionStudy(f) | Command::OracleStudy(f) | Command::SingleRun(f) => f.clone(),
    };
    let r = resolve(flags, &cli.command)?;
    if let Some(t) = r.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .context("configuring the thread pool")?;
    }
    let out: Box<dyn Write> = match &r.out {
        Some(p) => Box::new(File::create(p).with_context(|| format!("creating {}", p.display()))?),
        None => Box::new(io::stdout()),
    };
    let mut sink = CsvSink::new(out, r.timing)?;
    let mut failures = 0usize;
    let mut emit = |row: &StudyRow| {
        if let Some(msg) = &row.failure {
            failures += 1;
            eprintln!("row omega={} h={} failed: {msg}", row.omega, row.h);
        }
        if let Err(e) = sink.write(row) {
            eprintln!("csv write failed: {e}");
        }
    };
    match cli.command {
        Command::HStudy(_) => {
            run_h_study(&r.base, &r.nxs, &mut emit);
        }
        Command::PollutionStudy(_) => {
            run_pollution_study(&r.base, &r.omegas, r.omega_h, &mut emit);
        }
        Command::OracleStudy(_) => {
            let q = r.base.q.unwrap_or(if r.base.case == BasisCase::One { 2 } else { 1 });
            run_oracle_study(&r.base, &r.omegas, r.omega_h, q, &mut emit);
        }
        Command::SingleRun(_) => {
            let res = pipeline::run(&r.base)?;
            let row = StudyRow {
                omega: res.omega,
                h: res.h,
                p: res.p,
                q: res.q,
                m: res.m,
                case: res.case,
                dofs: res.dofs,
                err: Some(res.err),
                order: None,
                delta: None,
                wall_time_s: Some(res.wall_time_s),
                failure: None,
            };
            emit(&row);
            eprintln!("solver residual {:.3e}, nnz {}", res.solver_residual, res.nnz);
        }
    }
    sink.flush()?;
    if failures > 0 {
        bail!("{failures} row(s) failed");
    }
    Ok(())
}
