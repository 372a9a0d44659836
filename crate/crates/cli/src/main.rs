//! `anslab`: command-line front end for the anisotropic Navier–Stokes laboratory.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anslab_core::bounds::{evaluate, norm_keys, BoundQuery, Evaluation, Exponent, Formula};
use anslab_core::dynamics::{
    measure_lifespan_proxy, BlowupProxyConfig, SimConfig, SimState, ViscosityTriple,
};
use anslab_core::experiments::{fit_scaling_exponent, log_spaced, run_sweep, Axis, SweepSpec};
use anslab_core::field::{write_checkpoint, Grid3};
use anslab_core::inequality::{run_suites, SuiteConfig};
use anslab_core::initial::InitialData;
use anslab_core::lp::{lp_check, PROFILE_VERSION};
use clap::{ArgAction, Args, Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

#[derive(Debug, Parser)]
#[command(name = "anslab", version, about = "Anisotropic Navier-Stokes laboratory")]
struct Cli {
    /// Raise log verbosity (repeatable).
    #[arg(short, long, action = ArgAction::Count, global = true)]
    verbose: u8,
    /// Worker threads; defaults to the number of physical cores.
    #[arg(long, env = "ANSLAB_JOBS", global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one simulation, writing diagnostics and the final field.
    Simulate(SimulateArgs),
    /// Measure lifespan proxies over a viscosity grid.
    Sweep(SweepArgs),
    /// Evaluate a lifespan bound or global-existence threshold.
    Bounds(BoundsArgs),
    /// Run the inequality ratio suites in two frequency bands.
    VerifyInequalities(VerifyArgs),
    /// Check the dyadic partitions of unity and reconstructions.
    LpCheck(LpCheckArgs),
}

#[derive(Debug, Args)]
struct Common {
    /// JSON configuration file; unknown keys are rejected.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory, created if missing.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seed for random generators.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Debug, Args)]
struct Viscosity {
    /// Viscosity along x₁.
    #[arg(long)]
    nu1: Option<f64>,
    /// Viscosity along x₂.
    #[arg(long)]
    nu2: Option<f64>,
    /// Viscosity along x₃.
    #[arg(long)]
    nu3: Option<f64>,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    nu: Viscosity,
    /// Points per axis of the cubic grid.
    #[arg(long)]
    grid: Option<usize>,
    /// Final time.
    #[arg(long)]
    horizon: Option<f64>,
    /// JSON file with a lifespan-proxy configuration; stops at the proxy.
    #[arg(long)]
    proxy: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[command(flatten)]
    common: Common,
    /// Single values replacing the corresponding viscosity list.
    #[command(flatten)]
    nu: Viscosity,
    /// Points per axis of the cubic grid.
    #[arg(long)]
    grid: Option<usize>,
    /// Proxy horizon; runs reaching it are censored.
    #[arg(long)]
    horizon: Option<f64>,
    /// JSON file with the lifespan-proxy configuration.
    #[arg(long)]
    proxy: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct BoundsArgs {
    /// JSON bound query (formula, nu, norms, c, margin_factor).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Directory for bound.json and the manifest.
    #[arg(long)]
    out: Option<PathBuf>,
    /// leray, thm1_finite, thm1_infty, thm3, thm4, euler_interp, cor11, cor12.
    #[arg(long)]
    formula: Option<String>,
    /// Lebesgue exponent for leray, thm1_finite and cor11 (number or "inf").
    #[arg(long)]
    p: Option<String>,
    /// Interpolation parameter for thm3 and euler_interp.
    #[arg(long)]
    alpha: Option<f64>,
    /// Constant multiplying the bound.
    #[arg(long)]
    c: Option<f64>,
    /// Factor the threshold margin must exceed.
    #[arg(long)]
    margin_factor: Option<f64>,
    #[command(flatten)]
    nu: Viscosity,
    /// ‖u₀‖ in L^p.
    #[arg(long)]
    norm_lp: Option<f64>,
    /// ‖u₀‖ in L².
    #[arg(long)]
    norm_l2: Option<f64>,
    /// ‖u₀‖ in L^∞.
    #[arg(long)]
    norm_linf: Option<f64>,
    /// ‖u₀‖ in B^{0,1/2}.
    #[arg(long)]
    norm_b0half: Option<f64>,
    /// ‖∇u₀‖ in B^{0,1/2}.
    #[arg(long)]
    norm_grad_b0half: Option<f64>,
    /// ‖u₀‖ in H^{s₁,0}.
    #[arg(long)]
    norm_hs10: Option<f64>,
    /// ‖u₀‖ in H^{s₂} (external input).
    #[arg(long)]
    norm_hs2: Option<f64>,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    #[command(flatten)]
    common: Common,
    /// Samples per suite and band.
    #[arg(long)]
    samples: Option<usize>,
}

#[derive(Debug, Args)]
struct LpCheckArgs {
    #[command(flatten)]
    common: Common,
    /// Points per axis of the cubic grid.
    #[arg(long, default_value_t = 32)]
    grid: usize,
    /// Random field pairs for the reconstruction checks.
    #[arg(long, default_value_t = 100)]
    samples: usize,
}

enum Failure {
    Config(String),
    Verification(String),
    Runtime(String),
}

impl From<anslab_core::Error> for Failure {
    fn from(e: anslab_core::Error) -> Self {
        use anslab_core::Error as E;
        match e {
            E::Config(_) | E::Format { .. } | E::GridMismatch(..) | E::Io { .. } => Failure::Config(e.to_string()),
            other => Failure::Runtime(other.to_string()),
        }
    }
}

type Outcome = Result<(), Failure>;

fn read_config<T: DeserializeOwned>(path: &Path) -> Result<T, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::Config(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))
}

/// Output directory plus the manifest written into it.
struct Output {
    dir: Option<PathBuf>,
    files: Vec<String>,
}

impl Output {
    fn new(dir: Option<PathBuf>) -> Result<Self, Failure> {
        if let Some(d) = &dir {
            fs::create_dir_all(d)
                .map_err(|e| Failure::Config(format!("cannot create output directory {}: {e}", d.display())))?;
        }
        Ok(Self { dir, files: Vec::new() })
    }

    fn path(&mut self, name: &str) -> Option<PathBuf> {
        let d = self.dir.as_ref()?;
        self.files.push(name.to_string());
        Some(d.join(name))
    }

    fn write(&mut self, name: &str, bytes: &[u8]) -> Outcome {
        if let Some(p) = self.path(name) {
            fs::write(&p, bytes).map_err(|e| Failure::Config(format!("cannot write {}: {e}", p.display())))?;
        }
        Ok(())
    }

    fn manifest(mut self, command: &str, seed: Option<u64>, jobs: usize, config: Value) -> Outcome {
        if self.dir.is_none() {
            return Ok(());
        }
        let files = std::mem::take(&mut self.files);
        let m = json!({
            "tool": "anslab",
            "version": env!("CARGO_PKG_VERSION"),
            "lp_profile": PROFILE_VERSION,
            "command": command,
            "argv": std::env::args().collect::<Vec<_>>(),
            "seed": seed,
            "jobs": jobs,
            "config": config,
            "outputs": files,
        });
        self.write("manifest.json", serde_json::to_string_pretty(&m).unwrap_or_default().as_bytes())
    }
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).unwrap_or(Value::Null)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SimulateConfig {
    initial: InitialData,
    grid: usize,
    nu: ViscosityTriple,
    horizon: f64,
    dt: f64,
    #[serde(default)]
    sim: SimConfig,
    #[serde(default)]
    proxy: Option<BlowupProxyConfig>,
    #[serde(default)]
    seed: u64,
}

impl Default for SimulateConfig {
    fn default() -> Self {
        Self {
            initial: InitialData::taylor_green(1.0),
            grid: 32,
            nu: ViscosityTriple {
                nu1: 0.1,
                nu2: 0.1,
                nu3: 0.1,
            },
            horizon: 1.0,
            dt: 0.01,
            sim: SimConfig::default(),
            proxy: None,
            seed: 0,
        }
    }
}

fn override_nu(nu: &mut ViscosityTriple, v: &Viscosity) {
    if let Some(x) = v.nu1 {
        nu.nu1 = x;
    }
    if let Some(x) = v.nu2 {
        nu.nu2 = x;
    }
    if let Some(x) = v.nu3 {
        nu.nu3 = x;
    }
}

fn simulate(args: SimulateArgs, jobs: usize) -> Outcome {
    let mut cfg: SimulateConfig = match &args.common.config {
        Some(p) => read_config(p)?,
        None => SimulateConfig::default(),
    };
    override_nu(&mut cfg.nu, &args.nu);
    if let Some(n) = args.grid {
        cfg.grid = n;
    }
    if let Some(h) = args.horizon {
        cfg.horizon = h;
    }
    if let Some(s) = args.common.seed {
        cfg.seed = s;
    }
    if let Some(p) = &args.proxy {
        cfg.proxy = Some(read_config(p)?);
    }
    if !(cfg.horizon > 0.0 && cfg.dt > 0.0) {
        return Err(Failure::Config("horizon and dt must be positive".into()));
    }
    let grid = Grid3::cubic(cfg.grid)?;
    let u0 = cfg.initial.with_seed(cfg.seed).build(grid)?;
    let mut out = Output::new(args.common.out)?;
    let (u, t) = if let Some(proxy) = cfg.proxy {
        let proxy = BlowupProxyConfig {
            horizon: cfg.horizon,
            ..proxy
        };
        let r = measure_lifespan_proxy(&u0, cfg.nu, cfg.sim, &proxy, cfg.dt)?;
        println!(
            "t_proxy {} trigger {} tail_flag {}",
            r.t_or_infinity(),
            r.trigger,
            r.tail_flag()
        );
        let mut csv = Vec::new();
        anslab_core::dynamics::write_diagnostics_csv(&r.series, &mut csv)
            .map_err(|e| Failure::Runtime(e.to_string()))?;
        out.write("diagnostics.csv", &csv)?;
        let summary = json!({
            "t_proxy": r.t_proxy,
            "trigger": r.trigger,
            "censored": r.censored(),
            "tail_flag_time": r.tail_flag_time,
        });
        out.write("proxy.json", summary.to_string().as_bytes())?;
        (None, r.t_proxy)
    } else {
        let mut state = SimState::new(&u0, cfg.nu, cfg.sim)?;
        while state.t < cfg.horizon * (1.0 - 1e-14) {
            let mut h = cfg.dt.min(cfg.horizon - state.t);
            if cfg.sim.nonlinear {
                h = h.min(state.cfl_limit());
            }
            state.step(h)?;
        }
        let b = &state.budget;
        println!(
            "t {} energy {:e} relative_budget_residual {:e} linf {:e}",
            state.t,
            b.energy,
            b.relative_residual(),
            state.u.linf()
        );
        let mut csv = Vec::new();
        state
            .write_diagnostics(&mut csv)
            .map_err(|e| Failure::Runtime(e.to_string()))?;
        out.write("diagnostics.csv", &csv)?;
        (Some(state.u), state.t)
    };
    if let Some(u) = u {
        if let Some(p) = out.path("final.ans") {
            write_checkpoint(&u, t, cfg.nu, p)?;
        }
    }
    out.manifest("simulate", Some(cfg.seed), jobs, to_value(&cfg))
}

fn default_sweep() -> SweepSpec {
    SweepSpec {
        initial: InitialData::taylor_green(1.0),
        grid: 32,
        nu1: vec![0.2],
        nu2: vec![0.2],
        nu3: log_spaced(0.02, 0.2, 5).unwrap_or_default(),
        proxy: BlowupProxyConfig::default(),
        horizon: 10.0,
        dt: 0.05,
        seed: 0,
        formula: Formula::Thm1Infty,
        c: 1.0,
        s1: 2.5,
        sim: SimConfig::default(),
    }
}

fn sweep(args: SweepArgs, jobs: usize) -> Outcome {
    let mut spec = match &args.common.config {
        Some(p) => read_config(p)?,
        None => default_sweep(),
    };
    if let Some(x) = args.nu.nu1 {
        spec.nu1 = vec![x];
    }
    if let Some(x) = args.nu.nu2 {
        spec.nu2 = vec![x];
    }
    if let Some(x) = args.nu.nu3 {
        spec.nu3 = vec![x];
    }
    if let Some(n) = args.grid {
        spec.grid = n;
    }
    if let Some(h) = args.horizon {
        spec.horizon = h;
    }
    if let Some(s) = args.common.seed {
        spec.seed = s;
    }
    if let Some(p) = &args.proxy {
        spec.proxy = read_config(p)?;
    }
    let result = run_sweep(&spec, jobs)?;
    let mut csv = Vec::new();
    result
        .write_csv(&mut csv)
        .map_err(|e| Failure::Runtime(e.to_string()))?;
    print!("{}", String::from_utf8_lossy(&csv));
    let mut out = Output::new(args.common.out)?;
    out.write("sweep.csv", &csv)?;
    let fits: Vec<Value> = [Axis::Nu1, Axis::Nu2, Axis::Nu3]
        .into_iter()
        .map(|axis| match fit_scaling_exponent(&result, axis, Some(&spec.formula)) {
            Ok(f) => json!({ "axis": axis, "fit": f }),
            Err(e) => json!({ "axis": axis, "error": e.to_string() }),
        })
        .collect();
    let failures: Vec<&str> = result.rows.iter().filter_map(|r| r.failure.as_deref()).collect();
    let summary = json!({
        "envelope": result.envelope_fit(),
        "fits": fits,
        "failures": failures,
    });
    out.write("summary.json", serde_json::to_string_pretty(&summary).unwrap_or_default().as_bytes())?;
    out.manifest("sweep", Some(spec.seed), jobs, to_value(&spec))
}

fn parse_formula(name: &str, p: Option<&str>, alpha: Option<f64>) -> Result<Formula, Failure> {
    let p = || -> Result<Exponent, Failure> {
        p.ok_or_else(|| Failure::Config(format!("formula {name} needs --p")))?
            .parse()
            .map_err(|e| Failure::Config(format!("invalid --p: {e}")))
    };
    let alpha = || alpha.ok_or_else(|| Failure::Config(format!("formula {name} needs --alpha")));
    Ok(match name {
        "leray" => Formula::Leray { p: p()? },
        "thm1_finite" => Formula::Thm1Finite { p: p()? },
        "thm1_infty" => Formula::Thm1Infty,
        "thm3" => Formula::Thm3 { alpha: alpha()? },
        "thm4" => Formula::Thm4,
        "euler_interp" => Formula::EulerInterp { alpha: alpha()? },
        "cor11" => Formula::Cor11 { p: p()? },
        "cor12" => Formula::Cor12,
        other => return Err(Failure::Config(format!("unknown formula {other:?}"))),
    })
}

fn bounds(args: BoundsArgs, jobs: usize) -> Outcome {
    let mut query: BoundQuery = match (&args.config, &args.formula) {
        (Some(p), _) => read_config(p)?,
        (None, Some(name)) => BoundQuery::new(
            parse_formula(name, args.p.as_deref(), args.alpha)?,
            ViscosityTriple {
                nu1: 1.0,
                nu2: 1.0,
                nu3: 1.0,
            },
        ),
        (None, None) => return Err(Failure::Config("bounds needs --formula or --config".into())),
    };
    if args.config.is_some() && args.formula.is_some() {
        query.formula = parse_formula(args.formula.as_deref().unwrap_or_default(), args.p.as_deref(), args.alpha)?;
    }
    override_nu(&mut query.nu, &args.nu);
    if let Some(c) = args.c {
        query.c = c;
    }
    if let Some(m) = args.margin_factor {
        query.margin_factor = m;
    }
    for (key, value) in [
        (norm_keys::LP, args.norm_lp),
        (norm_keys::L2, args.norm_l2),
        (norm_keys::LINF, args.norm_linf),
        (norm_keys::B0HALF, args.norm_b0half),
        (norm_keys::GRAD_B0HALF, args.norm_grad_b0half),
        (norm_keys::HS10, args.norm_hs10),
        (norm_keys::HS2, args.norm_hs2),
    ] {
        if let Some(v) = value {
            query.norms.insert(key.to_string(), v);
        }
    }
    let eval = evaluate(&query)?;
    println!("{}", eval.value());
    match &eval {
        Evaluation::Lifespan(b) => {
            if let Some(branch) = b.thm4_branch {
                log::info!("branch {branch:?}, crossover nu3 = {:?}", b.crossover_nu3);
            }
            if b.external_norm {
                log::info!("depends on an externally supplied norm");
            }
        }
        Evaluation::Threshold(t) => {
            println!(
                "margin {} ({} factor {})",
                t.margin,
                if t.satisfied { "exceeds" } else { "does not exceed" },
                t.margin_factor
            );
        }
    }
    let mut out = Output::new(args.out)?;
    out.write("bound.json", serde_json::to_string_pretty(&eval).unwrap_or_default().as_bytes())?;
    out.manifest("bounds", None, jobs, to_value(&query))
}

fn verify(args: VerifyArgs, jobs: usize) -> Outcome {
    let mut cfg: SuiteConfig = match &args.common.config {
        Some(p) => read_config(p)?,
        None => SuiteConfig::default(),
    };
    if let Some(s) = args.common.seed {
        cfg.seed = s;
    }
    if let Some(n) = args.samples {
        cfg.samples = n;
    }
    let outcomes = run_suites(&cfg)?;
    for o in &outcomes {
        println!(
            "{} {}: max ratio {:.6} / {:.6} over bands {:?} / {:?}, variation {:.3}, rejected {} / {}",
            if o.passed() { "PASS" } else { "FAIL" },
            o.id,
            o.low.max_ratio,
            o.high.max_ratio,
            cfg.low_band,
            cfg.high_band,
            o.variation,
            o.low.rejected,
            o.high.rejected,
        );
    }
    let mut out = Output::new(args.common.out)?;
    out.write("inequalities.json", serde_json::to_string_pretty(&outcomes).unwrap_or_default().as_bytes())?;
    out.manifest("verify-inequalities", Some(cfg.seed), jobs, to_value(&cfg))?;
    let failed: Vec<&str> = outcomes.iter().filter(|o| !o.passed()).map(|o| o.id.as_str()).collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Verification(format!("suites failed: {}", failed.join(", "))))
    }
}

fn lp_check_cmd(args: LpCheckArgs, jobs: usize) -> Outcome {
    if let Some(p) = &args.common.config {
        return Err(Failure::Config(format!(
            "lp-check takes no configuration file (got {})",
            p.display()
        )));
    }
    let seed = args.common.seed.unwrap_or(0);
    let report = lp_check(Grid3::cubic(args.grid)?, args.samples, seed)?;
    println!(
        "partition {:e} inhomogeneous {:e} reconstruction {:e} bony {:e} ({} pairs at {}^3)",
        report.partition_defect,
        report.inhomogeneous_defect,
        report.reconstruction_defect,
        report.bony_defect,
        report.pairs,
        args.grid
    );
    let mut out = Output::new(args.common.out)?;
    out.write("lp_check.json", serde_json::to_string_pretty(&report).unwrap_or_default().as_bytes())?;
    out.manifest(
        "lp-check",
        Some(seed),
        jobs,
        json!({ "grid": args.grid, "samples": args.samples }),
    )?;
    if report.passed() {
        Ok(())
    } else {
        Err(Failure::Verification("dyadic identities exceed their tolerances".into()))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    env_logger::Builder::new().filter_level(level).init();
    let jobs = cli.jobs.unwrap_or_else(num_cpus::get_physical).max(1);
    if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global() {
        eprintln!("error: cannot start worker pool: {e}");
        return ExitCode::from(2);
    }
    let result = match cli.command {
        Command::Simulate(a) => simulate(a, jobs),
        Command::Sweep(a) => sweep(a, jobs),
        Command::Bounds(a) => bounds(a, jobs),
        Command::VerifyInequalities(a) => verify(a, jobs),
        Command::LpCheck(a) => lp_check_cmd(a, jobs),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(m)) => {
            eprintln!("configuration error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Verification(m)) => {
            eprintln!("verification failed: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Runtime(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
    }
}
