//! Leray projection, anisotropic heat semigroup, the projected nonlinearity,
//! the integrating-factor RK4 time stepper, pressure recovery and the
//! lifespan proxies.

use std::io::Write;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{config_err, Error, Result};
use crate::field::{dealias_in_place, Grid3, RealField3, SpectralField3, VectorField3};
use crate::lp::DyadicSystem;
use crate::norms::{besov_b0half, XtTracker};

/// Per-axis viscosities `(ν₁, ν₂, ν₃)`; zero entries are allowed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ViscosityTriple {
    pub nu1: f64,
    pub nu2: f64,
    pub nu3: f64,
}

impl ViscosityTriple {
    pub fn new(nu1: f64, nu2: f64, nu3: f64) -> Result<Self> {
        let nu = Self { nu1, nu2, nu3 };
        nu.validate()?;
        Ok(nu)
    }

    pub fn isotropic(nu: f64) -> Result<Self> {
        Self::new(nu, nu, nu)
    }

    pub fn inviscid() -> Self {
        Self {
            nu1: 0.0,
            nu2: 0.0,
            nu3: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (i, v) in self.as_array().into_iter().enumerate() {
            if !(v.is_finite() && v >= 0.0) {
                return config_err(format!("viscosity nu{} must be finite and >= 0, got {v}", i + 1));
            }
        }
        Ok(())
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.nu1, self.nu2, self.nu3]
    }

    /// `ν₃ ≤ ν₂ ≤ ν₁`.
    pub fn ordered(&self) -> bool {
        self.nu3 <= self.nu2 && self.nu2 <= self.nu1
    }

    /// `ν₁ξ₁² + ν₂ξ₂² + ν₃ξ₃²`.
    #[inline]
    pub fn symbol(&self, k: [f64; 3]) -> f64 {
        self.nu1 * k[0] * k[0] + self.nu2 * k[1] * k[1] + self.nu3 * k[2] * k[2]
    }
}

/// Wavenumbers used for first derivatives, zero at Nyquist indices.
pub(crate) fn derivative_wavenumbers(grid: &Grid3) -> Vec<[f64; 3]> {
    let [n1, n2, n3] = grid.n();
    let mut out = Vec::with_capacity(grid.num_points());
    for i1 in 0..n1 {
        let k1 = grid.derivative_wavenumber(0, i1);
        for i2 in 0..n2 {
            let k2 = grid.derivative_wavenumber(1, i2);
            for i3 in 0..n3 {
                out.push([k1, k2, grid.derivative_wavenumber(2, i3)]);
            }
        }
    }
    out
}

fn project_with(v: &mut [Vec<Complex64>; 3], kd: &[[f64; 3]]) {
    for (idx, k) in kd.iter().enumerate() {
        let k2 = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
        if k2 == 0.0 {
            continue;
        }
        let dot = v[0][idx] * k[0] + v[1][idx] * k[1] + v[2][idx] * k[2];
        let s = dot / k2;
        for a in 0..3 {
            v[a][idx] -= s * k[a];
        }
    }
}

fn into_parts(v: VectorField3) -> (Grid3, [Vec<Complex64>; 3]) {
    let grid = v.grid();
    let [a, b, c] = v.components;
    (grid, [a.coeffs, b.coeffs, c.coeffs])
}

fn from_parts(grid: Grid3, parts: [Vec<Complex64>; 3]) -> VectorField3 {
    let [a, b, c] = parts;
    VectorField3 {
        components: [
            SpectralField3 { grid, coeffs: a },
            SpectralField3 { grid, coeffs: b },
            SpectralField3 { grid, coeffs: c },
        ],
    }
}

/// `v̂ − ξ(ξ·v̂)/|ξ|²` on every nonzero mode; the zero mode is kept.
pub fn leray_project(v: &VectorField3) -> VectorField3 {
    let (grid, mut parts) = into_parts(v.clone());
    project_with(&mut parts, &derivative_wavenumbers(&grid));
    from_parts(grid, parts)
}

/// Multiplies every mode by `exp(−dt (ν₁ξ₁² + ν₂ξ₂² + ν₃ξ₃²))`.
pub fn semigroup_apply(f: &VectorField3, nu: ViscosityTriple, dt: f64) -> Result<VectorField3> {
    if !(dt >= 0.0) {
        return config_err(format!("semigroup time must be >= 0, got {dt}"));
    }
    let factors = semigroup_factors(&f.grid(), nu, dt);
    Ok(apply_factors(f, &factors))
}

pub(crate) fn semigroup_factors(grid: &Grid3, nu: ViscosityTriple, dt: f64) -> Vec<f64> {
    grid.wavenumbers()
        .iter()
        .map(|k| (-dt * nu.symbol(*k)).exp())
        .collect()
}

pub(crate) fn apply_factors(f: &VectorField3, factors: &[f64]) -> VectorField3 {
    f.map(|c| SpectralField3 {
        grid: c.grid,
        coeffs: c.coeffs.iter().zip(factors).map(|(x, s)| x * s).collect(),
    })
}

/// Dealiased spectral form of `div(u ⊗ v)` before projection; the product is
/// symmetrized so that `u = v` gives `div(u ⊗ u)`.
fn divergence_of_product(u: &VectorField3, v: &VectorField3, kd: &[[f64; 3]]) -> [Vec<Complex64>; 3] {
    let grid = u.grid();
    let ur = u.dealias().to_real();
    let same = std::ptr::eq(u, v);
    let vr = if same { None } else { Some(v.dealias().to_real()) };
    let vr = vr.as_ref().unwrap_or(&ur);
    let mut out: [Vec<Complex64>; 3] =
        std::array::from_fn(|_| vec![Complex64::new(0.0, 0.0); grid.num_points()]);
    for i in 0..3 {
        for j in i..3 {
            let data: Vec<f64> = if same {
                ur[i].data.iter().zip(&ur[j].data).map(|(a, b)| a * b).collect()
            } else {
                ur[i]
                    .data
                    .iter()
                    .zip(&vr[j].data)
                    .zip(ur[j].data.iter().zip(&vr[i].data))
                    .map(|((a, b), (c, d))| 0.5 * (a * b + c * d))
                    .collect()
            };
            let mut p = RealField3 { grid, data }.to_spectral();
            dealias_in_place(&mut p);
            // (div T)_i = Σ_j ∂_j T_ij, T symmetric
            for (idx, k) in kd.iter().enumerate() {
                let c = p.coeffs[idx];
                out[i][idx] += Complex64::new(0.0, k[j]) * c;
                if i != j {
                    out[j][idx] += Complex64::new(0.0, k[i]) * c;
                }
            }
        }
    }
    out
}

/// `−ℙ div(u ⊗ v)` with symmetrized product, dealiased.
pub fn bilinear_term(u: &VectorField3, v: &VectorField3) -> VectorField3 {
    let grid = u.grid();
    let kd = derivative_wavenumbers(&grid);
    let mut parts = divergence_of_product(u, v, &kd);
    project_with(&mut parts, &kd);
    for p in parts.iter_mut() {
        p.iter_mut().for_each(|c| *c = -*c);
    }
    from_parts(grid, parts)
}

/// `−ℙ div(u ⊗ u)`, pseudo-spectral with 2/3-rule dealiasing.
pub fn nonlinear_term(u: &VectorField3) -> VectorField3 {
    bilinear_term(u, u)
}

/// Pressure with its split into `P₁` (all `(i, j) ≠ (3, 3)` terms) and
/// `P₂` (the `∂₃²(u³u³)` term).
#[derive(Debug, Clone)]
pub struct Pressure {
    pub total: SpectralField3,
    pub p1: SpectralField3,
    pub p2: SpectralField3,
}

/// Solves `−ΔP = div(u·∇u) = ∂_i∂_j(u^i u^j)`, i.e.
/// `P̂ = −Σ ξ_iξ_j (u^i u^j)^ / |ξ|²`, with zero mean.
pub fn recover_pressure(u: &VectorField3) -> Pressure {
    let grid = u.grid();
    let kd = derivative_wavenumbers(&grid);
    let ur = u.dealias().to_real();
    let n = grid.num_points();
    let mut p1 = vec![Complex64::new(0.0, 0.0); n];
    let mut p2 = vec![Complex64::new(0.0, 0.0); n];
    for i in 0..3 {
        for j in i..3 {
            let data = ur[i].data.iter().zip(&ur[j].data).map(|(a, b)| a * b).collect();
            let mut prod = RealField3 { grid, data }.to_spectral();
            dealias_in_place(&mut prod);
            let mult = if i == j { 1.0 } else { 2.0 };
            let target = if i == 2 && j == 2 { &mut p2 } else { &mut p1 };
            for (idx, k) in kd.iter().enumerate() {
                let k2 = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
                if k2 != 0.0 {
                    target[idx] -= prod.coeffs[idx] * (mult * k[i] * k[j] / k2);
                }
            }
        }
    }
    let p1 = SpectralField3 { grid, coeffs: p1 };
    let p2 = SpectralField3 { grid, coeffs: p2 };
    Pressure {
        total: &p1 + &p2,
        p1,
        p2,
    }
}

/// Dealiased `div(u ⊗ u)`, equal to `u·∇u` for divergence-free `u`.
pub fn advection(u: &VectorField3) -> VectorField3 {
    let grid = u.grid();
    let kd = derivative_wavenumbers(&grid);
    from_parts(grid, divergence_of_product(u, u, &kd))
}

/// One row of the per-step diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticRow {
    pub t: f64,
    /// `‖u‖²_{L²}`.
    pub energy: f64,
    /// Dissipation rates `2ν_i ‖∂_i u‖²_{L²}`.
    pub diss: [f64; 3],
    pub linf: f64,
    pub b0half: f64,
    /// Share of the energy in the outer third of the retained modes.
    pub tail_fraction: f64,
}

pub const DIAGNOSTICS_HEADER: &str = "t,E,diss1,diss2,diss3,Linf,B0half,tail_fraction";

/// Writes diagnostics as CSV with [`DIAGNOSTICS_HEADER`].
pub fn write_diagnostics_csv(rows: &[DiagnosticRow], mut w: impl Write) -> std::io::Result<()> {
    writeln!(w, "{DIAGNOSTICS_HEADER}")?;
    for r in rows {
        writeln!(
            w,
            "{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e}",
            r.t, r.energy, r.diss[0], r.diss[1], r.diss[2], r.linf, r.b0half, r.tail_fraction
        )?;
    }
    Ok(())
}

/// Running energy balance `‖u(t)‖² + 2Σν_i∫‖∂_i u‖² − ‖u₀‖²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyBudget {
    pub initial_energy: f64,
    /// `2ν_i ∫₀ᵗ ‖∂_i u‖² dt'` per axis.
    pub dissipated: [f64; 3],
    pub energy: f64,
}

impl EnergyBudget {
    pub fn residual(&self) -> f64 {
        self.energy + self.dissipated.iter().sum::<f64>() - self.initial_energy
    }

    pub fn relative_residual(&self) -> f64 {
        if self.initial_energy == 0.0 {
            self.residual().abs()
        } else {
            self.residual().abs() / self.initial_energy
        }
    }
}

/// Tuning of a [`SimState`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimConfig {
    /// Include `−ℙ div(u ⊗ u)`; `false` gives the pure anisotropic heat flow.
    pub nonlinear: bool,
    /// Advective Courant number allowed: `dt max|u| / min Δx ≤ cfl`.
    pub cfl: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            nonlinear: true,
            cfl: 1.0,
        }
    }
}

/// A simulation stream: the current field, time, viscosities and the
/// diagnostics gathered along accepted steps.
#[derive(Debug, Clone)]
pub struct SimState {
    pub u: VectorField3,
    pub t: f64,
    pub nu: ViscosityTriple,
    pub config: SimConfig,
    pub diagnostics: Vec<DiagnosticRow>,
    pub budget: EnergyBudget,
    /// Chemin–Lerner accumulators for `u`, `∂₁u`, `∂₂u`.
    pub xt: XtTracker,
    sys: DyadicSystem,
    kd: Vec<[f64; 3]>,
    ks: Vec<[f64; 3]>,
    tail_mask: Vec<bool>,
    rhs: Option<VectorField3>,
    last_rate: Rates,
}

#[derive(Debug, Clone, Copy, Default)]
struct Rates {
    rate: [f64; 3],
    slope: [f64; 3],
}

impl SimState {
    /// Starts a stream at `t = 0`. The initial field is dealiased, projected
    /// and its mean removed.
    pub fn new(u0: &VectorField3, nu: ViscosityTriple, config: SimConfig) -> Result<Self> {
        nu.validate()?;
        if !(config.cfl > 0.0) {
            return config_err(format!("cfl must be positive, got {}", config.cfl));
        }
        let grid = u0.grid();
        let kd = derivative_wavenumbers(&grid);
        let mut u = leray_project(&u0.dealias());
        for c in u.components.iter_mut() {
            c.coeffs[0] = Complex64::new(0.0, 0.0);
        }
        let cut = [0, 1, 2].map(|a| grid.dealias_cutoff(a) as f64);
        let tail_mask = (0..grid.num_points())
            .map(|idx| {
                let i = grid.unflatten(idx);
                (0..3).any(|a| (grid.freq(a, i[a]).abs() as f64) > 2.0 * cut[a] / 3.0)
            })
            .collect();
        let mut state = Self {
            u,
            t: 0.0,
            nu,
            config,
            diagnostics: Vec::new(),
            budget: EnergyBudget {
                initial_energy: 0.0,
                dissipated: [0.0; 3],
                energy: 0.0,
            },
            xt: XtTracker::default(),
            sys: DyadicSystem::for_grid(&grid),
            ks: grid.wavenumbers(),
            kd,
            tail_mask,
            rhs: None,
            last_rate: Rates::default(),
        };
        let row = state.diagnose();
        state.budget.initial_energy = row.energy;
        state.budget.energy = row.energy;
        state.diagnostics.push(row);
        state.xt.record(0.0, &state.u, &state.sys)?;
        let rhs = state.rhs_of(&state.u);
        state.last_rate = state.dissipation_rate_and_slope(&state.u, &rhs);
        state.rhs = Some(rhs);
        Ok(state)
    }

    pub fn grid(&self) -> Grid3 {
        self.u.grid()
    }

    pub fn dyadic_system(&self) -> &DyadicSystem {
        &self.sys
    }

    /// Largest `dt` the CFL condition admits for the current field.
    pub fn cfl_limit(&self) -> f64 {
        let grid = self.grid();
        let dx = (0..3).map(|a| grid.spacing(a)).fold(f64::INFINITY, f64::min);
        let umax = self.diagnostics.last().map_or(0.0, |r| r.linf);
        if umax == 0.0 {
            f64::INFINITY
        } else {
            self.config.cfl * dx / umax
        }
    }

    fn rhs_of(&self, u: &VectorField3) -> VectorField3 {
        if self.config.nonlinear {
            nonlinear_term(u)
        } else {
            VectorField3::zeros(u.grid())
        }
    }

    /// Per-axis dissipation rates `2ν_a‖∂_a u‖²` and their time derivatives
    /// along `∂_t u = Lu + N`.
    fn dissipation_rate_and_slope(&self, u: &VectorField3, rhs: &VectorField3) -> Rates {
        let vol = self.grid().volume();
        let nu = self.nu.as_array();
        let mut d = [0.0; 3];
        let mut dd = [0.0; 3];
        for (idx, k) in self.kd.iter().enumerate() {
            let lk = self.nu.symbol(self.ks[idx]);
            let mut e = 0.0;
            let mut de = 0.0;
            for c in 0..3 {
                let x = u.components[c].coeffs[idx];
                let ut = -x * lk + rhs.components[c].coeffs[idx];
                e += x.norm_sqr();
                de += (x.conj() * ut).re;
            }
            for a in 0..3 {
                let w = nu[a] * k[a] * k[a];
                d[a] += w * e;
                dd[a] += w * de;
            }
        }
        Rates {
            rate: d.map(|x| 2.0 * vol * x),
            slope: dd.map(|x| 4.0 * vol * x),
        }
    }

    fn diagnose(&self) -> DiagnosticRow {
        let vol = self.grid().volume();
        let nu = self.nu.as_array();
        let mut energy = 0.0;
        let mut tail = 0.0;
        let mut grad = [0.0; 3];
        for (idx, k) in self.kd.iter().enumerate() {
            let e: f64 = self.u.components.iter().map(|c| c.coeffs[idx].norm_sqr()).sum();
            energy += e;
            if self.tail_mask[idx] {
                tail += e;
            }
            for a in 0..3 {
                grad[a] += k[a] * k[a] * e;
            }
        }
        DiagnosticRow {
            t: self.t,
            energy: energy * vol,
            diss: [0, 1, 2].map(|a| 2.0 * nu[a] * grad[a] * vol),
            linf: self.u.linf(),
            b0half: besov_b0half(&self.u.components, &self.sys).value,
            tail_fraction: if energy > 0.0 { tail / energy } else { 0.0 },
        }
    }

    /// Advances by `dt` with the Lawson integrating-factor RK4 scheme.
    pub fn step(&mut self, dt: f64) -> Result<()> {
        if !(dt > 0.0 && dt.is_finite()) {
            return config_err(format!("time step must be positive, got {dt}"));
        }
        let limit = self.cfl_limit();
        if self.config.nonlinear && dt > limit * (1.0 + 1e-12) {
            return Err(Error::CflViolation {
                dt,
                suggested: limit,
            });
        }
        let grid = self.grid();
        let half = semigroup_factors(&grid, self.nu, 0.5 * dt);
        let full = semigroup_factors(&grid, self.nu, dt);
        let u = &self.u;
        let k1 = self.rhs.take().unwrap_or_else(|| self.rhs_of(u));
        let u_new = if self.config.nonlinear {
            let eu_half = apply_factors(u, &half);
            let k2 = self.rhs_of(&apply_factors(&u.axpy(0.5 * dt, &k1), &half));
            let k3 = self.rhs_of(&eu_half.axpy(0.5 * dt, &k2));
            let k4 = self.rhs_of(&apply_factors(u, &full).axpy(dt, &apply_factors(&k3, &half)));
            let mid = apply_factors(&k2.add(&k3), &half);
            let incr = apply_factors(&k1, &full).axpy(2.0, &mid).add(&k4);
            leray_project(&apply_factors(u, &full).axpy(dt / 6.0, &incr))
        } else {
            apply_factors(u, &full)
        };
        let old = self.last_rate;
        self.u = u_new;
        self.t += dt;
        let row = self.diagnose();
        if !row.energy.is_finite() || !row.linf.is_finite() {
            return Err(Error::NonFinite { t: self.t });
        }
        let rhs = self.rhs_of(&self.u);
        let new = self.dissipation_rate_and_slope(&self.u, &rhs);
        // corrected trapezoid: fourth order in dt
        for a in 0..3 {
            self.budget.dissipated[a] += 0.5 * dt * (old.rate[a] + new.rate[a])
                + dt * dt / 12.0 * (old.slope[a] - new.slope[a]);
        }
        self.budget.energy = row.energy;
        self.last_rate = new;
        self.rhs = Some(rhs);
        self.xt.record(self.t, &self.u, &self.sys)?;
        self.diagnostics.push(row);
        Ok(())
    }

    /// Steps with `dt` until `t_end`, shortening the final step to land on it.
    pub fn advance_to(&mut self, t_end: f64, dt: f64) -> Result<()> {
        while self.t < t_end * (1.0 - 1e-14) {
            let h = dt.min(t_end - self.t);
            self.step(h)?;
        }
        Ok(())
    }

    pub fn write_diagnostics(&self, w: impl Write) -> std::io::Result<()> {
        write_diagnostics_csv(&self.diagnostics, w)
    }
}

/// What ended a lifespan-proxy measurement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Trigger {
    /// `‖u(t)‖_{L^∞}` reached `factor · ‖u₀‖_{L^∞}`.
    LinfDoubling,
    /// The tail energy fraction exceeded its threshold.
    SpectralTail,
    /// The horizon was reached first (censored).
    Horizon,
}

impl std::fmt::Display for Trigger {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Trigger::LinfDoubling => "linf_doubling",
            Trigger::SpectralTail => "spectral_tail",
            Trigger::Horizon => "horizon",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BlowupProxyConfig {
    /// `L^∞` growth factor, `> 1`.
    pub linf_factor: f64,
    /// Tail energy fraction in `(0, 1)` flagging under-resolution.
    pub tail_fraction: f64,
    /// Stop at the tail flag instead of only marking the run.
    pub stop_on_tail: bool,
    pub horizon: f64,
    /// Reference `L^∞` norm; the first diagnostic row when absent.
    pub reference_linf: Option<f64>,
}

impl Default for BlowupProxyConfig {
    fn default() -> Self {
        Self {
            linf_factor: 2.0,
            tail_fraction: 0.01,
            stop_on_tail: false,
            horizon: 10.0,
            reference_linf: None,
        }
    }
}

impl BlowupProxyConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.linf_factor > 1.0) {
            return config_err(format!("L^inf factor must exceed 1, got {}", self.linf_factor));
        }
        if !(self.tail_fraction > 0.0 && self.tail_fraction < 1.0) {
            return config_err(format!("tail fraction must lie in (0, 1), got {}", self.tail_fraction));
        }
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return config_err(format!("horizon must be positive, got {}", self.horizon));
        }
        Ok(())
    }
}

/// Outcome of a lifespan-proxy measurement.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LifespanProxyResult {
    pub t_proxy: f64,
    pub trigger: Trigger,
    /// First time the tail fraction crossed its threshold, if it did by `t_proxy`.
    pub tail_flag_time: Option<f64>,
    pub series: Vec<DiagnosticRow>,
}

impl LifespanProxyResult {
    pub fn censored(&self) -> bool {
        self.trigger == Trigger::Horizon
    }

    /// `t_proxy`, with censored runs mapped to `+∞`.
    pub fn t_or_infinity(&self) -> f64 {
        if self.censored() {
            f64::INFINITY
        } else {
            self.t_proxy
        }
    }

    pub fn tail_flag(&self) -> bool {
        self.tail_flag_time.is_some()
    }
}

/// Checks the recorded diagnostics against the proxy triggers. The doubling
/// time is interpolated linearly between the bracketing rows.
pub fn monitor_blowup_proxy(
    state: &SimState,
    config: &BlowupProxyConfig,
) -> Option<LifespanProxyResult> {
    let rows = &state.diagnostics;
    let first = rows.first()?;
    let threshold = config.linf_factor * config.reference_linf.unwrap_or(first.linf);
    let mut tail_time = None;
    let finish = |t, trigger, tail_time| LifespanProxyResult {
        t_proxy: t,
        trigger,
        tail_flag_time: tail_time,
        series: rows.clone(),
    };
    for (i, r) in rows.iter().enumerate() {
        if tail_time.is_none() && r.tail_fraction > config.tail_fraction {
            tail_time = Some(r.t);
            if config.stop_on_tail {
                return Some(finish(r.t, Trigger::SpectralTail, tail_time));
            }
        }
        if threshold > 0.0 && r.linf >= threshold {
            let t = if i == 0 {
                r.t
            } else {
                let p = &rows[i - 1];
                let s = (threshold - p.linf) / (r.linf - p.linf);
                p.t + s.clamp(0.0, 1.0) * (r.t - p.t)
            };
            return Some(finish(t, Trigger::LinfDoubling, tail_time));
        }
    }
    if state.t >= config.horizon * (1.0 - 1e-12) {
        return Some(finish(config.horizon, Trigger::Horizon, tail_time));
    }
    None
}

/// Runs `u0` until a proxy trigger fires, using `dt` (reduced to the CFL
/// limit when necessary).
pub fn measure_lifespan_proxy(
    u0: &VectorField3,
    nu: ViscosityTriple,
    sim: SimConfig,
    proxy: &BlowupProxyConfig,
    dt: f64,
) -> Result<LifespanProxyResult> {
    proxy.validate()?;
    let mut state = SimState::new(u0, nu, sim)?;
    loop {
        if let Some(r) = monitor_blowup_proxy(&state, proxy) {
            return Ok(r);
        }
        let mut h = dt.min(proxy.horizon - state.t);
        if sim.nonlinear {
            h = h.min(state.cfl_limit());
        }
        state.step(h)?;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tg(grid: Grid3, a: f64) -> VectorField3 {
        VectorField3::from_fns(
            grid,
            |x, y, z| a * x.sin() * y.cos() * z.cos(),
            |x, y, z| -a * x.cos() * y.sin() * z.cos(),
            |_, _, _| 0.0,
        )
    }

    #[test]
    fn viscosity_validation() {
        assert!(ViscosityTriple::new(1.0, -1.0, 0.0).is_err());
        assert!(ViscosityTriple::new(f64::NAN, 1.0, 0.0).is_err());
        assert!(ViscosityTriple::new(3.0, 2.0, 1.0).unwrap().ordered());
        assert!(!ViscosityTriple::new(1.0, 2.0, 1.0).unwrap().ordered());
    }

    #[test]
    fn leray_worked_mode() {
        let g = Grid3::cubic(8).unwrap();
        let mut v = VectorField3::zeros(g);
        v.components[0].set_coeff([1, 1, 0], Complex64::new(1.0, 0.0));
        let p = leray_project(&v);
        let c = [0, 1, 2].map(|a| p.components[a].coeff([1, 1, 0]));
        assert!((c[0] - Complex64::new(0.5, 0.0)).norm() < 1e-15);
        assert!((c[1] - Complex64::new(-0.5, 0.0)).norm() < 1e-15);
        assert!(c[2].norm() < 1e-15);
    }

    #[test]
    fn semigroup_mode_factor() {
        let g = Grid3::cubic(8).unwrap();
        let mut v = VectorField3::zeros(g);
        v.components[0].set_coeff([1, 2, 3], Complex64::new(1.0, 0.0));
        let nu = ViscosityTriple::isotropic(1.0).unwrap();
        let w = semigroup_apply(&v, nu, 1.0).unwrap();
        assert!((w.components[0].coeff([1, 2, 3]).re - (-14f64).exp()).abs() < 1e-20);
        assert!(semigroup_apply(&v, nu, -1.0).is_err());
    }

    #[test]
    fn shear_has_no_nonlinearity_or_pressure() {
        let g = Grid3::cubic(16).unwrap();
        let u = VectorField3::from_fns(g, |_, y, _| y.sin(), |_, _, _| 0.0, |_, _, _| 0.0);
        assert!(nonlinear_term(&u).l2_norm() < 1e-14);
        assert!(recover_pressure(&u).total.l2_norm() < 1e-14);
    }

    #[test]
    fn taylor_green_energy_injection_vanishes() {
        let g = Grid3::cubic(16).unwrap();
        let u = tg(g, 1.0);
        let n = nonlinear_term(&u);
        assert!(n.inner(&u).abs() < 1e-10 * n.l2_norm() * u.l2_norm());
        assert!(n.divergence_defect() < 1e-12);
    }

    #[test]
    fn heat_step_is_exact() {
        let g = Grid3::cubic(8).unwrap();
        let u = tg(g, 1.0);
        let nu = ViscosityTriple::new(0.3, 0.2, 0.1).unwrap();
        let cfg = SimConfig {
            nonlinear: false,
            ..SimConfig::default()
        };
        let mut s = SimState::new(&u, nu, cfg).unwrap();
        s.step(0.25).unwrap();
        let f = (-0.25f64 * (0.3 + 0.2 + 0.1)).exp();
        let c0 = u.components[0].coeff([1, 1, 1]);
        assert!((s.u.components[0].coeff([1, 1, 1]) - c0 * f).norm() < 1e-16);
        assert_eq!(s.diagnostics.len(), 2);
    }
}
