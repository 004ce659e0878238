use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use cone_harmonic::radial::log_grid;
use cone_harmonic::{divergence_verdict, extend, solve_profile, GrowthBound, Regime};
use cone_harmonic_cli::{run, BoundarySpec, ExperimentConfig, ExperimentName, LinkSpec, Result, WarpingSpec};

#[derive(Debug, Parser)]
#[command(name = "cone-harmonic", version, about = "Harmonic functions on Riemannian cones")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// JSON configuration; flags below override its fields.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output CSV (stdout when absent).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// euclidean, hyperbolic, bounded, or a table `r,phi,phi_p,phi_pp`.
    #[arg(long, global = true)]
    warping: Option<String>,
    /// circle, sphere2, sphere, or an eigenvalue table `m,lambda_sq[,multiplicity]`.
    #[arg(long, global = true)]
    link: Option<String>,
    /// Cone dimension n.
    #[arg(long, global = true)]
    dim: Option<usize>,
    #[arg(long, global = true)]
    m_max: Option<usize>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Pass tolerance of the experiment's main assertion.
    #[arg(long, global = true)]
    tol: Option<f64>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Eigenvalue bands of the link: `m,lambda_sq,multiplicity`.
    Spectrum,
    /// Radial profiles of every band up to m_max: `m,lambda_sq,r,log_phi_m,v`.
    Radial,
    /// Harmonic extension to the largest scheduled radius, evaluated on the
    /// schedule and at r0.
    Extend {
        /// Boundary samples `node_index[,theta[,phi_angle]],h`.
        #[arg(long)]
        boundary: Option<PathBuf>,
        /// Angular samples per dimension.
        #[arg(long, default_value_t = 0)]
        density: usize,
    },
    /// Tabulates ln A(r) in both curvature regimes and prints divergence verdicts.
    GrowthBound {
        /// First link eigenvalue; taken from the link when absent.
        #[arg(long)]
        lambda1: Option<f64>,
    },
    /// Runs mode_decay, liouville_collapse, bound_comparison or growth_fit.
    Experiment { name: String },
}

fn resolve(common: &Common, experiment: Option<ExperimentName>) -> Result<ExperimentConfig> {
    let mut cfg = match &common.config {
        Some(path) => ExperimentConfig::read(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(name) = experiment {
        cfg.experiment = name;
    }
    if let Some(w) = &common.warping {
        cfg.warping = WarpingSpec::parse(w);
    }
    if let Some(l) = &common.link {
        cfg.link = LinkSpec::parse(l);
    }
    if let Some(n) = common.dim {
        cfg.n = n;
    }
    if let Some(m) = common.m_max {
        cfg.m_max = m;
    }
    if let Some(seed) = common.seed {
        cfg.seed = Some(seed);
    }
    if let Some(out) = &common.out {
        cfg.output = Some(out.clone());
    }
    if let Some(tol) = common.tol {
        let t = &mut cfg.tolerances;
        match cfg.experiment {
            ExperimentName::ModeDecay => t.ratio_rel = tol,
            ExperimentName::LiouvilleCollapse => t.collapse = tol,
            ExperimentName::BoundComparison => t.bound_gap = tol,
            ExperimentName::GrowthFit => t.fit_rel = tol,
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

fn output(cfg: &ExperimentConfig) -> Result<Box<dyn Write>> {
    Ok(match &cfg.output {
        Some(path) => Box::new(std::io::BufWriter::new(std::fs::File::create(path)?)),
        None => Box::new(std::io::stdout().lock()),
    })
}

fn spectrum(cfg: &ExperimentConfig) -> Result<()> {
    let s = cfg.spectrum()?;
    let mut out = output(cfg)?;
    writeln!(out, "m,lambda_sq,multiplicity")?;
    for (m, b) in s.bands().iter().enumerate() {
        writeln!(out, "{m},{},{}", b.lambda_sq, b.multiplicity)?;
    }
    Ok(())
}

fn radial(cfg: &ExperimentConfig) -> Result<()> {
    let w = cfg.warping_function()?;
    let s = cfg.spectrum()?;
    let grid = log_grid(1e-3, cfg.largest_radius(), 16);
    let mut out = output(cfg)?;
    writeln!(out, "m,lambda_sq,r,log_phi_m,v")?;
    for (m, b) in s.bands().iter().enumerate() {
        let p = solve_profile(&w, cfg.n, b.lambda_sq, &grid)?;
        for sample in p.samples() {
            writeln!(out, "{m},{},{},{},{}", b.lambda_sq, sample.r, sample.log_phi, sample.v)?;
        }
    }
    Ok(())
}

fn extension(mut cfg: ExperimentConfig, boundary: Option<PathBuf>, density: usize) -> Result<()> {
    if let Some(path) = boundary {
        cfg.boundary = BoundarySpec::File { path };
    } else if cfg.seed.is_some() && !matches!(cfg.boundary, BoundarySpec::Random { .. }) {
        cfg.boundary = BoundarySpec::Random { min_band: 0 };
    }
    let w = cfg.warping_function()?;
    let s = cfg.spectrum()?;
    let h = cfg.boundary_data(&s)?;
    let big_r = cfg.largest_radius();
    let u = extend(&h, big_r, &s, &w, cfg.n)?;
    let mut radii = vec![0.0, cfg.r0];
    radii.extend(cfg.r_schedule.iter().copied());
    let out = output(&cfg)?;
    u.write_evaluation_csv(&radii, density, out)?;
    log::info!("tip value {}, truncation tail {:e}", u.tip_value(), u.tail_bound());
    Ok(())
}

fn growth_bound(cfg: &ExperimentConfig, lambda1: Option<f64>) -> Result<()> {
    let w = cfg.warping_function()?;
    let lambda1 = match lambda1.or(cfg.lambda1) {
        Some(l) => l,
        None => cfg.spectrum()?.first_eigenvalue()?,
    };
    let mut regimes = Vec::new();
    if cfg.n >= 3 {
        regimes.push((Regime::General, GrowthBound::new(Regime::General, cfg.n, lambda1, &w)?));
    }
    regimes.push((
        Regime::NonnegCurvature,
        GrowthBound::new(Regime::NonnegCurvature, cfg.n, lambda1, &w)?,
    ));

    let mut out = output(cfg)?;
    let names: Vec<&str> = regimes
        .iter()
        .map(|(r, _)| match r {
            Regime::General => "log_A_general",
            Regime::NonnegCurvature => "log_A_nonneg",
        })
        .collect();
    writeln!(out, "r,{}", names.join(","))?;
    for r in log_grid(1.0, w.r_max(), 8) {
        let values = regimes
            .iter()
            .map(|(_, b)| b.log_value(r).map(|v| v.to_string()))
            .collect::<cone_harmonic::Result<Vec<_>>>()?;
        writeln!(out, "{r},{}", values.join(","))?;
    }
    for (regime, b) in &regimes {
        let verdict = if w.r_max() >= 100.0 {
            format!("{:?}", divergence_verdict(b, w.r_max())?)
        } else {
            "Inconclusive".to_string()
        };
        eprintln!(
            "{regime:?}: verdict {verdict}, curvature class {:?}, hypotheses hold: {}",
            b.curvature_class(),
            b.hypotheses_hold()
        );
    }
    Ok(())
}

fn experiment(cfg: &ExperimentConfig) -> Result<bool> {
    let report = run(cfg)?;
    report.write_csv(cfg, output(cfg)?)?;
    for failure in &report.failures {
        eprintln!("FAIL {}: {failure}", report.experiment);
    }
    Ok(report.passed)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let outcome = (|| -> Result<bool> {
        match cli.command {
            Command::Spectrum => spectrum(&resolve(&cli.common, None)?).map(|_| true),
            Command::Radial => radial(&resolve(&cli.common, None)?).map(|_| true),
            Command::Extend { boundary, density } => {
                extension(resolve(&cli.common, None)?, boundary, density).map(|_| true)
            }
            Command::GrowthBound { lambda1 } => growth_bound(&resolve(&cli.common, None)?, lambda1).map(|_| true),
            Command::Experiment { name } => {
                let name: ExperimentName = name.parse()?;
                experiment(&resolve(&cli.common, Some(name))?)
            }
        }
    })();
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
