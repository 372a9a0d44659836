//! Viscosity sweeps, scaling covariance and the eventual-smallness probe.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::{apply_scaling, evaluate, norm_keys, BoundQuery, Formula};
use crate::dynamics::{
    measure_lifespan_proxy, BlowupProxyConfig, SimConfig, SimState, Trigger, ViscosityTriple,
};
use crate::error::{config_err, Error, Result};
use crate::field::{Grid3, VectorField3};
use crate::initial::InitialData;
use crate::lp::DyadicSystem;
use crate::norms::{besov_b0half, gradient_besov_b0half, hs10_norm, lp_norm_vector};

/// A grid of viscosity triples run from one initial datum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub initial: InitialData,
    /// Points per axis of the cubic grid.
    pub grid: usize,
    pub nu1: Vec<f64>,
    pub nu2: Vec<f64>,
    pub nu3: Vec<f64>,
    #[serde(default)]
    pub proxy: BlowupProxyConfig,
    /// Replaces the proxy horizon.
    pub horizon: f64,
    /// Largest time step; the CFL limit may shorten it.
    pub dt: f64,
    /// Replaces the seed of random generators.
    #[serde(default)]
    pub seed: u64,
    /// Lifespan bound compared with each measured proxy.
    #[serde(default = "default_formula")]
    pub formula: Formula,
    #[serde(default = "default_c")]
    pub c: f64,
    /// Horizontal order of the `H^{s₁,0}` norm for formulas that need it.
    #[serde(default = "default_s1")]
    pub s1: f64,
    #[serde(default)]
    pub sim: SimConfig,
}

fn default_formula() -> Formula {
    Formula::Thm1Infty
}

fn default_c() -> f64 {
    1.0
}

fn default_s1() -> f64 {
    2.5
}

/// `count` values from `lo` to `hi` equally spaced in `log`.
pub fn log_spaced(lo: f64, hi: f64, count: usize) -> Result<Vec<f64>> {
    if !(lo > 0.0 && hi >= lo && count >= 1) {
        return config_err(format!("need 0 < lo <= hi and count >= 1, got ({lo}, {hi}, {count})"));
    }
    if count == 1 {
        return Ok(vec![lo]);
    }
    let (a, b) = (lo.ln(), hi.ln());
    Ok((0..count)
        .map(|i| {
            if i == count - 1 {
                hi
            } else {
                (a + (b - a) * i as f64 / (count - 1) as f64).exp()
            }
        })
        .collect())
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if self.nu1.is_empty() || self.nu2.is_empty() || self.nu3.is_empty() {
            return config_err("every viscosity list must be nonempty");
        }
        for v in self.nu1.iter().chain(&self.nu2).chain(&self.nu3) {
            if !(v.is_finite() && *v >= 0.0) {
                return config_err(format!("viscosities must be finite and >= 0, got {v}"));
            }
        }
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return config_err(format!("horizon must be positive, got {}", self.horizon));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return config_err(format!("dt must be positive, got {}", self.dt));
        }
        if self.formula.is_threshold() {
            return config_err(format!("{} is a threshold, not a lifespan bound", self.formula));
        }
        if matches!(self.formula, Formula::EulerInterp { .. }) {
            return config_err("euler_interp needs an external H^s2 norm and cannot be swept");
        }
        Grid3::cubic(self.grid)?;
        self.proxy_config().validate()
    }

    fn proxy_config(&self) -> BlowupProxyConfig {
        BlowupProxyConfig {
            horizon: self.horizon,
            ..self.proxy
        }
    }

    /// The initial datum with the sweep seed substituted.
    pub fn initial_data(&self) -> InitialData {
        self.initial.with_seed(self.seed)
    }

    /// Viscosity triples in spec order (`nu1` slowest, `nu3` fastest).
    pub fn points(&self) -> Vec<[f64; 3]> {
        let mut out = Vec::new();
        for &a in &self.nu1 {
            for &b in &self.nu2 {
                for &c in &self.nu3 {
                    out.push([a, b, c]);
                }
            }
        }
        out
    }
}

/// Norms of the initial datum feeding the bounds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InitialNorms {
    pub linf: f64,
    pub l2: f64,
    pub b0half: f64,
    pub grad_b0half: f64,
    /// `‖u₀‖_{L^p}` for the formula's finite `p`.
    pub lp: Option<f64>,
    pub hs10: Option<f64>,
}

impl InitialNorms {
    pub fn measure(u0: &VectorField3, formula: &Formula, s1: f64) -> Result<Self> {
        let sys = DyadicSystem::for_grid(&u0.grid());
        let p = match formula {
            Formula::Leray { p } | Formula::Thm1Finite { p } | Formula::Cor11 { p } if p.0.is_finite() => {
                Some(p.0)
            }
            _ => None,
        };
        Ok(Self {
            linf: u0.linf(),
            l2: u0.l2_norm(),
            b0half: besov_b0half(&u0.components, &sys).value,
            grad_b0half: gradient_besov_b0half(u0, &sys).value,
            lp: p.map(|p| lp_norm_vector(u0, p).map(|v| v.value)).transpose()?,
            hs10: if matches!(formula, Formula::Thm4) {
                Some(hs10_norm(&u0.components, s1)?.value)
            } else {
                None
            },
        })
    }

    /// A query for `formula` carrying every available norm.
    pub fn query(&self, formula: Formula, nu: ViscosityTriple, c: f64) -> BoundQuery {
        let mut q = BoundQuery::new(formula, nu)
            .with_c(c)
            .with_norm(norm_keys::LINF, self.linf)
            .with_norm(norm_keys::L2, self.l2)
            .with_norm(norm_keys::B0HALF, self.b0half)
            .with_norm(norm_keys::GRAD_B0HALF, self.grad_b0half);
        if let Some(v) = self.lp {
            q = q.with_norm(norm_keys::LP, v);
        }
        if let Some(v) = self.hs10 {
            q = q.with_norm(norm_keys::HS10, v);
        }
        q
    }
}

/// One sweep point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub nu: [f64; 3],
    pub norms: InitialNorms,
    /// `+∞` when censored, NaN when the run failed.
    pub t_proxy: f64,
    pub trigger: Option<Trigger>,
    pub bound_id: String,
    /// NaN when the formula does not apply to this point.
    pub bound_value: f64,
    pub ratio: f64,
    pub tail_flag: bool,
    pub seed: u64,
    /// The query the bound value came from.
    pub query: BoundQuery,
    pub failure: Option<String>,
}

impl SweepRow {
    pub fn censored(&self) -> bool {
        self.trigger == Some(Trigger::Horizon)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
    pub horizon: f64,
}

pub const SWEEP_HEADER: &str =
    "nu1,nu2,nu3,norm_Linf0,norm_L20,norm_B0half0,T_proxy,trigger,bound_id,bound_value,ratio,tail_flag,seed";

impl SweepResult {
    pub fn write_csv(&self, mut w: impl Write) -> std::io::Result<()> {
        writeln!(w, "{SWEEP_HEADER}")?;
        for r in &self.rows {
            let trigger = r.trigger.map_or("failed".to_string(), |t| t.to_string());
            writeln!(
                w,
                "{},{},{},{},{},{},{},{},{},{},{},{},{}",
                r.nu[0],
                r.nu[1],
                r.nu[2],
                r.norms.linf,
                r.norms.l2,
                r.norms.b0half,
                r.t_proxy,
                trigger,
                r.bound_id,
                r.bound_value,
                r.ratio,
                r.tail_flag,
                r.seed
            )?;
        }
        Ok(())
    }

    /// Minimum over firing rows of `T_proxy ‖u₀‖²_{L^∞} / ν₃` and the spread
    /// max/min of that quantity.
    pub fn envelope_fit(&self) -> Option<EnvelopeFit> {
        let vals: Vec<f64> = self
            .rows
            .iter()
            .filter(|r| r.t_proxy.is_finite() && r.nu[2] > 0.0)
            .map(|r| r.t_proxy * r.norms.linf * r.norms.linf / r.nu[2])
            .collect();
        if vals.is_empty() {
            return None;
        }
        let lo = vals.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Some(EnvelopeFit {
            c: lo,
            spread: hi / lo,
            rows: vals.len(),
        })
    }
}

/// Constant of the envelope `c ν₃ ‖u₀‖_{L^∞}^{−2}` fitted as the minimum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeFit {
    pub c: f64,
    pub spread: f64,
    pub rows: usize,
}

fn sweep_point(spec: &SweepSpec, u0: &VectorField3, norms: &InitialNorms, nu: [f64; 3]) -> SweepRow {
    let proxy = spec.proxy_config();
    let triple = ViscosityTriple {
        nu1: nu[0],
        nu2: nu[1],
        nu3: nu[2],
    };
    let query = norms.query(spec.formula, triple, spec.c);
    let (bound_value, bound_err) = match evaluate(&query) {
        Ok(e) => (e.value(), None),
        Err(e) => (f64::NAN, Some(e.to_string())),
    };
    let run = measure_lifespan_proxy(u0, triple, spec.sim, &proxy, spec.dt);
    let (t_proxy, trigger, tail_flag, run_err) = match run {
        Ok(r) => (r.t_or_infinity(), Some(r.trigger), r.tail_flag(), None),
        Err(e @ Error::NonFinite { .. }) => (f64::NAN, None, true, Some(e.to_string())),
        Err(e) => (f64::NAN, None, false, Some(e.to_string())),
    };
    let failure = match (run_err, bound_err) {
        (None, None) => None,
        (a, b) => Some([a, b].into_iter().flatten().collect::<Vec<_>>().join("; ")),
    };
    SweepRow {
        nu,
        norms: norms.clone(),
        t_proxy,
        trigger,
        bound_id: spec.formula.id().to_string(),
        bound_value,
        ratio: t_proxy / bound_value,
        tail_flag,
        seed: spec.seed,
        query,
        failure,
    }
}

/// Runs every sweep point on a pool of `jobs` workers; rows come back in
/// spec order. A failing run is recorded in its row and does not stop the
/// sweep.
pub fn run_sweep(spec: &SweepSpec, jobs: usize) -> Result<SweepResult> {
    spec.validate()?;
    let grid = Grid3::cubic(spec.grid)?;
    let u0 = spec.initial_data().build(grid)?;
    let norms = InitialNorms::measure(&u0, &spec.formula, spec.s1)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
    let points = spec.points();
    let rows = pool.install(|| {
        points
            .par_iter()
            .map(|&nu| sweep_point(spec, &u0, &norms, nu))
            .collect()
    });
    Ok(SweepResult {
        rows,
        horizon: spec.horizon,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    Nu1,
    Nu2,
    Nu3,
}

impl Axis {
    fn index(self) -> usize {
        match self {
            Axis::Nu1 => 0,
            Axis::Nu2 => 1,
            Axis::Nu3 => 2,
        }
    }
}

/// Least-squares fit of `log T_proxy` against `log ν`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
    pub censored_count: usize,
    /// Exponent of `ν` along the axis in the bound formula, if it has one.
    pub theoretical: Option<f64>,
}

/// Exponent of `ν_axis` in a lifespan formula.
pub fn theoretical_exponent(formula: &Formula, axis: Axis) -> Option<f64> {
    match (formula, axis) {
        (Formula::Thm1Infty, Axis::Nu3) => Some(1.0),
        (Formula::Thm1Infty, _) => Some(0.0),
        (Formula::Thm1Finite { p }, a) if p.0.is_finite() => {
            let q = 1.0 / (p.0 - 3.0);
            Some(if a == Axis::Nu2 { p.0 * q + q } else { q })
        }
        (Formula::Leray { p }, Axis::Nu1) if p.0.is_finite() => Some((p.0 + 3.0) / (p.0 - 3.0)),
        (Formula::Leray { .. }, _) => Some(0.0),
        _ => None,
    }
}

pub fn fit_scaling_exponent(result: &SweepResult, axis: Axis, formula: Option<&Formula>) -> Result<ScalingFit> {
    let a = axis.index();
    let censored_count = result.rows.iter().filter(|r| r.censored()).count();
    let pts: Vec<(f64, f64)> = result
        .rows
        .iter()
        .filter(|r| r.t_proxy.is_finite() && r.t_proxy > 0.0 && r.nu[a] > 0.0)
        .map(|r| (r.nu[a].ln(), r.t_proxy.ln()))
        .collect();
    if pts.len() < 4 {
        return Err(Error::InsufficientData(format!(
            "need at least 4 uncensored rows to fit a slope, have {} ({censored_count} censored)",
            pts.len()
        )));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InsufficientData("all uncensored rows share the same viscosity".into()));
    }
    let slope = sxy / sxx;
    Ok(ScalingFit {
        slope,
        intercept: my - slope * mx,
        r2: if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) },
        censored_count,
        theoretical: formula.and_then(|f| theoretical_exponent(f, axis)),
    })
}

/// Comparison of `λ u(t, λx)` with the solution from `λ u₀(λx)` at `t / λ²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingReport {
    pub lambda: usize,
    pub t: f64,
    pub max_relative_error: f64,
    pub steps: usize,
}

/// Runs `u₀` on `grid` to time `t` and its rescaled copy on a grid `λ` times
/// finer to `t / λ²`, both in `steps` equal steps.
pub fn scaling_covariance_test(
    u0: &VectorField3,
    nu: ViscosityTriple,
    t: f64,
    lambda: usize,
    steps: usize,
    sim: SimConfig,
) -> Result<ScalingReport> {
    if steps == 0 || !(t > 0.0) {
        return config_err("need t > 0 and at least one step");
    }
    let coarse = u0.grid();
    let fine = Grid3::new(coarse.n().map(|n| n * lambda), coarse.len())?;
    let embedded = embed(u0, fine)?;
    let scaled = apply_scaling(&embedded, lambda)?;
    let mut a = SimState::new(u0, nu, sim)?;
    let mut b = SimState::new(&scaled, nu, sim)?;
    let dt = t / steps as f64;
    let l2 = (lambda * lambda) as f64;
    for _ in 0..steps {
        a.step(dt)?;
        b.step(dt / l2)?;
    }
    let expected = apply_scaling(&embed(&a.u, fine)?, lambda)?;
    let err = b.u.sub(&expected).linf();
    let scale = expected.linf();
    Ok(ScalingReport {
        lambda,
        t,
        max_relative_error: if scale > 0.0 { err / scale } else { err },
        steps,
    })
}

/// The same trigonometric polynomial on a finer grid of the same box.
pub fn embed(u: &VectorField3, fine: Grid3) -> Result<VectorField3> {
    let coarse = u.grid();
    if fine.len() != coarse.len() || (0..3).any(|a| fine.n()[a] < coarse.n()[a]) {
        return config_err("target grid must cover the same box with at least as many points");
    }
    let mut out = VectorField3::zeros(fine);
    for (src, dst) in u.components.iter().zip(out.components.iter_mut()) {
        for (idx, c) in src.coeffs.iter().enumerate() {
            if c.norm() == 0.0 {
                continue;
            }
            let i = coarse.unflatten(idx);
            let m = [0, 1, 2].map(|a| coarse.freq(a, i[a]));
            if (0..3).any(|a| 2 * m[a].unsigned_abs() as usize == coarse.n()[a]) {
                continue;
            }
            dst.set_coeff(m, *c);
        }
    }
    Ok(out)
}

/// Eventual-smallness run: the time the product `‖u‖_{L²}‖∇u‖_{L²}` first
/// drops below a threshold, and the energy inequality along the way.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmallnessReport {
    pub threshold: f64,
    /// First sampled time with product below the threshold.
    pub t0: Option<f64>,
    /// `(t, ‖u‖ ‖∇u‖)` at every accepted step.
    pub products: Vec<(f64, f64)>,
    /// `‖u(T)‖² + 2 Σ ν_a ∫ ‖∂_a u‖²`.
    pub budget_lhs: f64,
    pub initial_energy: f64,
    pub slack: f64,
    pub energy_inequality_holds: bool,
}

/// Relative slack granted to the time integrator in the energy inequality.
pub const ENERGY_SLACK: f64 = 1e-6;

pub fn eventual_smallness_probe(
    u0: &VectorField3,
    nu: ViscosityTriple,
    horizon: f64,
    threshold: f64,
    dt: f64,
    sim: SimConfig,
) -> Result<SmallnessReport> {
    if !(nu.nu3 > 0.0) {
        return config_err("the eventual-smallness probe needs nu3 > 0");
    }
    if !(horizon > 0.0 && dt > 0.0 && threshold > 0.0) {
        return config_err("horizon, dt and threshold must be positive");
    }
    let mut state = SimState::new(u0, nu, sim)?;
    let product = |s: &SimState| {
        let grad = s.u.gradient_l2();
        s.u.l2_norm() * grad
    };
    let mut products = vec![(0.0, product(&state))];
    let mut t0 = (products[0].1 < threshold).then_some(0.0);
    while state.t < horizon * (1.0 - 1e-14) {
        let mut h = dt.min(horizon - state.t);
        if sim.nonlinear {
            h = h.min(state.cfl_limit());
        }
        state.step(h)?;
        let p = product(&state);
        products.push((state.t, p));
        if t0.is_none() && p < threshold {
            t0 = Some(state.t);
        }
    }
    let b = &state.budget;
    let lhs = b.energy + b.dissipated.iter().sum::<f64>();
    let slack = ENERGY_SLACK * b.initial_energy;
    Ok(SmallnessReport {
        threshold,
        t0,
        products,
        budget_lhs: lhs,
        initial_energy: b.initial_energy,
        slack,
        energy_inequality_holds: lhs <= b.initial_energy + slack,
    })
}
