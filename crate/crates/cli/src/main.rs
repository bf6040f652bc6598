use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use hodgeheat::MassScheme;
use hodgeheat_cli::{
    dump, run_h2, run_suite, run_torus, ConfigError, DumpTarget, H2SuiteConfig, MeshSource, SuiteConfig, SuiteOutcome,
    TorusConfig, OUT_ENV,
};

#[derive(Parser)]
#[command(name = "hodgeheat", version, about = "Verify heat-kernel identities on differential forms")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct OutArg {
    /// Output directory
    #[arg(long, env = OUT_ENV, default_value = hodgeheat_cli::DEFAULT_OUT)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum SchemeArg {
    Identity,
    BarycentricLumped,
    All,
}

impl SchemeArg {
    fn schemes(self) -> Vec<MassScheme> {
        match self {
            SchemeArg::Identity => vec![MassScheme::Identity],
            SchemeArg::BarycentricLumped => vec![MassScheme::BarycentricLumped],
            SchemeArg::All => MassScheme::ALL.to_vec(),
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum DumpKind {
    Kernel,
    Torus,
    H2,
    H2OneForm,
}

#[derive(Subcommand)]
enum Cmd {
    /// Discrete suite on a simplicial complex
    Verify {
        /// Builtin mesh name or OFF file
        #[arg(long, default_value = "torus8")]
        mesh: String,
        #[arg(long, value_enum, default_value = "all")]
        scheme: SchemeArg,
        /// Degrees to check (default: all)
        #[arg(long, value_delimiter = ',')]
        degrees: Option<Vec<usize>>,
        #[arg(long, value_delimiter = ',', default_value = "0.01,0.1,1")]
        times: Vec<f64>,
        #[arg(long, default_value_t = hodgeheat::lab::DISCRETE_TOL)]
        tol: f64,
        /// Time rescaling factor for the diffusion-scaling check
        #[arg(long, default_value_t = hodgeheat_cli::DEFAULT_CFACTOR)]
        cfactor: f64,
        /// Worker threads (0 = all cores)
        #[arg(long, default_value_t = 0)]
        jobs: usize,
        #[command(flatten)]
        out: OutArg,
    },
    /// Fourier-series checks on the flat torus
    Torus {
        #[arg(long, value_delimiter = ',', default_value = "0.05,0.2,1")]
        times: Vec<f64>,
        /// Number of random point pairs
        #[arg(long, default_value_t = 20)]
        pairs: usize,
        #[arg(long, default_value_t = hodgeheat::torus::DEFAULT_TRUNC)]
        trunc: usize,
        #[command(flatten)]
        out: OutArg,
    },
    /// Quadrature and finite-difference checks on the hyperbolic plane
    H2 {
        #[arg(long, default_value_t = hodgeheat::h2::FD_STEP)]
        fd_step: f64,
        /// Relative quadrature tolerance
        #[arg(long, default_value_t = hodgeheat::h2::QUAD_TOL)]
        tol: f64,
        #[command(flatten)]
        out: OutArg,
    },
    /// Export kernel samples as CSV
    Dump {
        #[arg(long, value_enum, default_value = "kernel")]
        kind: DumpKind,
        #[arg(long, default_value = "torus8")]
        mesh: String,
        #[arg(long, value_enum, default_value = "identity")]
        scheme: SchemeArg,
        #[arg(long, default_value_t = 0)]
        degree: usize,
        /// Time sample(s)
        #[arg(long, value_delimiter = ',', default_value = "0.1", allow_hyphen_values = true)]
        times: Vec<f64>,
        /// Geodesic distances for the radial hyperbolic dump
        #[arg(long, value_delimiter = ',', default_value = "0.25,0.5,1,2,4")]
        radii: Vec<f64>,
        #[arg(long, default_value_t = hodgeheat::torus::DEFAULT_TRUNC)]
        trunc: usize,
        #[arg(long, default_value_t = hodgeheat::h2::FD_STEP)]
        fd_step: f64,
        #[arg(long, default_value_t = hodgeheat::h2::QUAD_TOL)]
        tol: f64,
        #[command(flatten)]
        out: OutArg,
    },
}

fn report(outcome: &SuiteOutcome) -> ExitCode {
    for r in &outcome.reports {
        println!("{}", r.summary());
    }
    let failed = outcome.reports.iter().filter(|r| !r.ok()).count();
    println!("{} checks, {failed} failed", outcome.reports.len());
    ExitCode::from(outcome.exit_code() as u8)
}

fn run(cli: Cli) -> anyhow::Result<ExitCode> {
    match cli.cmd {
        Cmd::Verify {
            mesh,
            scheme,
            degrees,
            times,
            tol,
            cfactor,
            jobs,
            out,
        } => {
            let cfg = SuiteConfig {
                schemes: scheme.schemes(),
                degrees,
                times,
                tol,
                cfactor,
                jobs,
                out: out.out,
                ..SuiteConfig::new(MeshSource::parse(&mesh))
            };
            Ok(report(&run_suite(&cfg)?))
        }
        Cmd::Torus { times, pairs, trunc, out } => {
            let cfg = TorusConfig {
                times,
                pairs,
                trunc,
                out: out.out,
                ..TorusConfig::default()
            };
            Ok(report(&run_torus(&cfg)?))
        }
        Cmd::H2 { fd_step, tol, out } => Ok(report(&run_h2(&H2SuiteConfig { fd_step, tol, out: out.out })?)),
        Cmd::Dump {
            kind,
            mesh,
            scheme,
            degree,
            times,
            radii,
            trunc,
            fd_step,
            tol,
            out,
        } => {
            let target = match kind {
                DumpKind::Kernel => {
                    let scheme = match scheme.schemes().as_slice() {
                        [s] => *s,
                        _ => return Err(ConfigError { field: "scheme", msg: "dump needs a single scheme".into() }.into()),
                    };
                    let t = match times.as_slice() {
                        [t] => *t,
                        _ => return Err(ConfigError { field: "times", msg: "kernel dump takes one time".into() }.into()),
                    };
                    DumpTarget::Kernel { mesh: MeshSource::parse(&mesh), scheme, degree, t }
                }
                DumpKind::Torus => DumpTarget::Torus { pairs: 20, times, trunc },
                DumpKind::H2 => DumpTarget::H2Radial { radii, times, tol },
                DumpKind::H2OneForm => DumpTarget::H2OneForm { times, fd_step },
            };
            let path = dump(&target, &out.out)?;
            println!("wrote {}", path.display());
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
