//! Suite runners behind the `hodgeheat` binary.

use std::fmt;
use std::path::{Path, PathBuf};

use hodgeheat::h2::{self, H2Config, H2Point};
use hodgeheat::lab::{Lab, DISCRETE_TOL};
use hodgeheat::torus::{self, TorusPoint, TorusTolerances};
use hodgeheat::{export, mesh, spectral, Cochain, MassScheme, SimplicialComplex, VerificationReport};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// Environment variable naming the default report directory.
pub const OUT_ENV: &str = "HODGEHEAT_OUT";
pub const DEFAULT_OUT: &str = "reports";
pub const DEFAULT_TIMES: [f64; 3] = [0.01, 0.1, 1.0];
pub const DEFAULT_CFACTOR: f64 = 2.0;
const SEED: u64 = 0x5eed;

/// A configuration problem, tagged with the offending field.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub field: &'static str,
    pub msg: String,
}

impl ConfigError {
    fn new(field: &'static str, msg: impl Into<String>) -> Self {
        Self { field, msg: msg.into() }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid {}: {}", self.field, self.msg)
    }
}

impl std::error::Error for ConfigError {}

#[derive(Clone, Debug, PartialEq)]
pub enum MeshSource {
    Builtin(String),
    File(PathBuf),
}

impl MeshSource {
    /// Names ending in `.off` or containing a path separator are files.
    pub fn parse(s: &str) -> Self {
        if s.ends_with(".off") || s.contains('/') || s.contains('\\') {
            MeshSource::File(PathBuf::from(s))
        } else {
            MeshSource::Builtin(s.to_string())
        }
    }

    pub fn load(&self) -> anyhow::Result<SimplicialComplex> {
        match self {
            MeshSource::Builtin(name) => Ok(mesh::builtin(name).map_err(|e| match e {
                hodgeheat::Error::InvalidParameter { msg, .. } => ConfigError::new("mesh", msg),
                other => ConfigError::new("mesh", other.to_string()),
            })?),
            MeshSource::File(path) => {
                if !path.exists() {
                    return Err(ConfigError::new("mesh", format!("no such file {}", path.display())).into());
                }
                Ok(mesh::load_off(path)?)
            }
        }
    }
}

/// Configuration of the discrete suite.
#[derive(Clone, Debug)]
pub struct SuiteConfig {
    pub mesh: MeshSource,
    pub schemes: Vec<MassScheme>,
    /// `None` runs every valid degree.
    pub degrees: Option<Vec<usize>>,
    pub times: Vec<f64>,
    pub tol: f64,
    pub cfactor: f64,
    pub out: PathBuf,
    pub jobs: usize,
}

impl SuiteConfig {
    pub fn new(mesh: MeshSource) -> Self {
        Self {
            mesh,
            schemes: MassScheme::ALL.to_vec(),
            degrees: None,
            times: DEFAULT_TIMES.to_vec(),
            tol: DISCRETE_TOL,
            cfactor: DEFAULT_CFACTOR,
            out: default_out(),
            jobs: 0,
        }
    }

    /// Checks field ranges; degrees are checked against the loaded complex.
    pub fn validate(&self, dim: usize) -> Result<(), ConfigError> {
        check_times(&self.times)?;
        check_tol("tol", self.tol)?;
        if self.schemes.is_empty() {
            return Err(ConfigError::new("scheme", "no mass scheme selected"));
        }
        if !(self.cfactor > 0.0) || !self.cfactor.is_finite() {
            return Err(ConfigError::new("cfactor", format!("must be positive, got {}", self.cfactor)));
        }
        if let Some(ds) = &self.degrees {
            if ds.is_empty() {
                return Err(ConfigError::new("degrees", "empty list"));
            }
            if let Some(&k) = ds.iter().find(|&&k| k > dim) {
                return Err(ConfigError::new(
                    "degrees",
                    format!("degree {k} exceeds the complex dimension {dim}"),
                ));
            }
        }
        Ok(())
    }

    fn degrees_for(&self, dim: usize) -> Vec<usize> {
        self.degrees.clone().unwrap_or_else(|| (0..=dim).collect())
    }
}

pub fn default_out() -> PathBuf {
    std::env::var_os(OUT_ENV).map_or_else(|| PathBuf::from(DEFAULT_OUT), PathBuf::from)
}

fn check_times(times: &[f64]) -> Result<(), ConfigError> {
    if times.is_empty() {
        return Err(ConfigError::new("times", "empty list"));
    }
    if let Some(t) = times.iter().find(|t| !(**t > 0.0) || !t.is_finite()) {
        return Err(ConfigError::new("times", format!("samples must be positive, got {t}")));
    }
    Ok(())
}

fn check_tol(field: &'static str, tol: f64) -> Result<(), ConfigError> {
    if !(tol > 0.0) || !tol.is_finite() {
        return Err(ConfigError::new(field, format!("must be positive, got {tol}")));
    }
    Ok(())
}

/// Reports of one run and the files they were written to.
#[derive(Debug)]
pub struct SuiteOutcome {
    pub reports: Vec<VerificationReport>,
    pub files: Vec<PathBuf>,
}

impl SuiteOutcome {
    /// Diagnostics never fail a run.
    pub fn all_passed(&self) -> bool {
        self.reports.iter().all(VerificationReport::ok)
    }

    pub fn exit_code(&self) -> i32 {
        if self.all_passed() {
            0
        } else {
            1
        }
    }
}

fn pool(jobs: usize) -> anyhow::Result<rayon::ThreadPool> {
    Ok(rayon::ThreadPoolBuilder::new().num_threads(jobs).build()?)
}

fn write_all(out: &Path, reports: Vec<VerificationReport>) -> anyhow::Result<SuiteOutcome> {
    let mut files = Vec::with_capacity(reports.len());
    for r in &reports {
        files.push(export::write_report(out, r)?);
    }
    Ok(SuiteOutcome { reports, files })
}

enum Task {
    Lemma1(usize),
    Compact(usize),
    Scaling(usize),
    Supersymmetry,
    Evolution(usize),
    Duality,
    Betti,
}

/// Runs the discrete identity checks for every selected scheme and writes
/// one JSON report per check. Checks run concurrently on `jobs` threads
/// (0 = all cores); results keep a fixed order.
pub fn run_suite(cfg: &SuiteConfig) -> anyhow::Result<SuiteOutcome> {
    let complex = cfg.mesh.load()?;
    let dim = complex.dim();
    cfg.validate(dim)?;
    let degrees = cfg.degrees_for(dim);

    let mut tasks = Vec::new();
    for &k in &degrees {
        if k < dim {
            tasks.push(Task::Lemma1(k));
        }
    }
    for &k in &degrees {
        tasks.push(Task::Compact(k));
    }
    let mid = dim.min(1);
    tasks.push(Task::Scaling(mid));
    tasks.push(Task::Supersymmetry);
    tasks.push(Task::Evolution(mid));
    if dim == 2 {
        tasks.push(Task::Duality);
    }
    tasks.push(Task::Betti);

    let pool = pool(cfg.jobs)?;
    let reports = pool.install(|| -> anyhow::Result<Vec<VerificationReport>> {
        let labs = cfg
            .schemes
            .par_iter()
            .map(|&s| Lab::new(&complex, s))
            .collect::<Result<Vec<_>, _>>()?;
        let jobs: Vec<(&Lab, &Task)> = labs.iter().flat_map(|l| tasks.iter().map(move |t| (l, t))).collect();
        let out = jobs
            .par_iter()
            .map(|(lab, task)| run_task(lab, task, &complex, cfg))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(out)
    })?;
    write_all(&cfg.out, reports)
}

fn run_task(lab: &Lab, task: &Task, c: &SimplicialComplex, cfg: &SuiteConfig) -> hodgeheat::Result<VerificationReport> {
    let t = &cfg.times;
    match *task {
        Task::Lemma1(k) => lab.check_lemma1(k, t, cfg.tol),
        Task::Compact(k) => lab.check_theorem_compact(k, t, cfg.tol),
        Task::Scaling(k) => lab.check_diffusion_scaling(k, cfg.cfactor, t, cfg.tol),
        Task::Supersymmetry => lab.check_supersymmetry(cfg.tol),
        Task::Evolution(k) => {
            let n = lab.spectrum(k).len();
            let mut rng = ChaCha8Rng::seed_from_u64(SEED);
            let f = Cochain::from_slice(k, &(0..n).map(|_| rng.gen_range(-1.0..1.0)).collect::<Vec<_>>());
            lab.check_evolution_equivalence(k, &f, t, cfg.tol)
        }
        Task::Duality => lab.duality_diagnostic(),
        Task::Betti => lab.check_betti(c),
    }
}

/// Configuration of the flat-torus suite.
#[derive(Clone, Debug)]
pub struct TorusConfig {
    pub times: Vec<f64>,
    pub pairs: usize,
    pub seed: u64,
    pub trunc: usize,
    pub out: PathBuf,
}

impl Default for TorusConfig {
    fn default() -> Self {
        Self {
            times: vec![0.05, 0.2, 1.0],
            pairs: 20,
            seed: SEED,
            trunc: torus::DEFAULT_TRUNC,
            out: default_out(),
        }
    }
}

/// Uniform random point pairs from a seeded generator.
pub fn torus_pairs(n: usize, seed: u64) -> Vec<(TorusPoint, TorusPoint)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut p = || TorusPoint::new(rng.gen(), rng.gen());
    (0..n).map(|_| (p(), p())).collect()
}

pub fn run_torus(cfg: &TorusConfig) -> anyhow::Result<SuiteOutcome> {
    check_times(&cfg.times)?;
    if cfg.pairs == 0 {
        return Err(ConfigError::new("pairs", "need at least one point pair").into());
    }
    for &t in &cfg.times {
        let needed = torus::required_trunc(t, torus::SERIES_TOL);
        if cfg.trunc < needed {
            return Err(ConfigError::new("trunc", format!("{} too small at t = {t}; need {needed}", cfg.trunc)).into());
        }
    }
    let pairs = torus_pairs(cfg.pairs, cfg.seed);
    let reports = torus::torus_suite(&pairs, &cfg.times, cfg.trunc, TorusTolerances::default())?;
    write_all(&cfg.out, reports)
}

/// Configuration of the hyperbolic suite.
#[derive(Clone, Debug)]
pub struct H2SuiteConfig {
    pub fd_step: f64,
    pub tol: f64,
    pub out: PathBuf,
}

impl Default for H2SuiteConfig {
    fn default() -> Self {
        Self {
            fd_step: h2::FD_STEP,
            tol: h2::QUAD_TOL,
            out: default_out(),
        }
    }
}

pub fn run_h2(cfg: &H2SuiteConfig) -> anyhow::Result<SuiteOutcome> {
    check_tol("fd-step", cfg.fd_step)?;
    check_tol("tol", cfg.tol)?;
    if cfg.fd_step > 0.05 {
        return Err(ConfigError::new("fd-step", format!("{} is too coarse (max 0.05)", cfg.fd_step)).into());
    }
    let h2cfg = H2Config {
        fd_step: cfg.fd_step,
        quad_tol: cfg.tol,
        ..H2Config::default()
    };
    write_all(&cfg.out, h2::h2_suite(&h2cfg)?)
}

/// What `dump` exports.
#[derive(Clone, Debug)]
pub enum DumpTarget {
    /// Discrete kernel matrix `K_k(t)`: an `n_k × n_k` CSV.
    Kernel { mesh: MeshSource, scheme: MassScheme, degree: usize, t: f64 },
    /// Torus samples at seeded random pairs.
    Torus { pairs: usize, times: Vec<f64>, trunc: usize },
    /// Radial hyperbolic samples `r,t,k0,tail,err_est`.
    H2Radial { radii: Vec<f64>, times: Vec<f64>, tol: f64 },
    /// Hyperbolic 1-form kernel samples.
    H2OneForm { times: Vec<f64>, fd_step: f64 },
}

/// Writes the requested CSV into `out`, returning its path.
pub fn dump(target: &DumpTarget, out: &Path) -> anyhow::Result<PathBuf> {
    let (name, text) = match target {
        DumpTarget::Kernel { mesh, scheme, degree, t } => {
            if !(*t >= 0.0) || !t.is_finite() {
                return Err(ConfigError::new("t", format!("time must be nonnegative, got {t}")).into());
            }
            let c = mesh.load()?;
            if *degree > c.dim() {
                return Err(ConfigError::new(
                    "degrees",
                    format!("degree {degree} exceeds the complex dimension {}", c.dim()),
                )
                .into());
            }
            let dec = hodgeheat::Dec::new(&c, *scheme)?;
            let s = hodgeheat::SpectralData::from_dec(&dec, *degree)?;
            let k = spectral::heat_kernel_matrix(&s, *t)?;
            (format!("kernel_{}_{}_k{degree}_t{t}.csv", c.name(), scheme.name()), export::kernel_csv(&k))
        }
        DumpTarget::Torus { pairs, times, trunc } => {
            check_times(times)?;
            ("torus_kernels.csv".to_string(), torus::torus_csv(&torus_pairs(*pairs, SEED), times, *trunc)?)
        }
        DumpTarget::H2Radial { radii, times, tol } => {
            check_times(times)?;
            check_tol("tol", *tol)?;
            if radii.iter().any(|r| !(*r >= 0.0)) {
                return Err(ConfigError::new("radii", "distances must be nonnegative").into());
            }
            ("h2_radial.csv".to_string(), h2::h2_radial_csv(radii, times, *tol)?)
        }
        DumpTarget::H2OneForm { times, fd_step } => {
            check_times(times)?;
            check_tol("fd-step", *fd_step)?;
            let pairs: Vec<(H2Point, H2Point)> = h2::h2_sample_pairs();
            ("h2_k1.csv".to_string(), h2::h2_k1_csv(&pairs, times, *fd_step)?)
        }
    };
    std::fs::create_dir_all(out)?;
    let path = out.join(name);
    std::fs::write(&path, text)?;
    Ok(path)
}
