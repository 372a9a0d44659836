//! The integral form `u = e^{tL}u₀ + ∫₀ᵗ e^{(t−s)L} (−ℙ div(u ⊗ u))(s) ds`
//! and its Picard iteration.
//!
//! Trajectories live on uniform time nodes. The time integral uses composite
//! Simpson weights, closed by the 3/8 rule for an odd number of intervals; the
//! first node alone uses the trapezoidal rule. The space `E` of the fixed
//! point argument is discretized as the maximum over nodes of the grid
//! `L^∞` norm.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{
    apply_factors, bilinear_term, leray_project, nonlinear_term, semigroup_factors, ViscosityTriple,
};
use crate::error::{config_err, Error, Result};
use crate::field::{Grid3, VectorField3};
use crate::initial::random_div_free;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PicardConfig {
    pub horizon: f64,
    /// Number of time nodes including `t = 0`; at least 4.
    pub nodes: usize,
    pub max_iterations: usize,
    /// Stop once consecutive iterates differ by less than this in `E`.
    pub tolerance: f64,
}

impl PicardConfig {
    pub fn new(horizon: f64, nodes: usize) -> Self {
        Self {
            horizon,
            nodes,
            max_iterations: 60,
            tolerance: 1e-12,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return config_err(format!("horizon must be positive, got {}", self.horizon));
        }
        if self.nodes < 4 {
            return config_err(format!("need at least 4 time nodes, got {}", self.nodes));
        }
        if !(self.tolerance > 0.0) {
            return config_err(format!("tolerance must be positive, got {}", self.tolerance));
        }
        if self.max_iterations == 0 {
            return config_err("max_iterations must be at least 1");
        }
        Ok(())
    }

    pub fn times(&self) -> Vec<f64> {
        let h = self.horizon / (self.nodes - 1) as f64;
        (0..self.nodes).map(|k| k as f64 * h).collect()
    }
}

/// Fields sampled at uniform time nodes starting from `t = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub fields: Vec<VectorField3>,
}

impl Trajectory {
    /// `max_k ‖u(t_k)‖_{L^∞}`.
    pub fn sup_norm(&self) -> f64 {
        self.fields.par_iter().map(|u| u.linf()).reduce(|| 0.0, f64::max)
    }

    /// `max_k ‖u(t_k) − v(t_k)‖_{L^∞}`.
    pub fn sup_distance(&self, other: &Trajectory) -> f64 {
        self.fields
            .par_iter()
            .zip(&other.fields)
            .map(|(a, b)| a.sub(b).linf())
            .reduce(|| 0.0, f64::max)
    }

    fn zeros_like(times: Vec<f64>, grid: Grid3) -> Self {
        let fields = times.iter().map(|_| VectorField3::zeros(grid)).collect();
        Self { times, fields }
    }
}

/// Quadrature weights (in units of the node spacing) for `∫₀^{t_k}` on nodes `0..=k`.
fn weights(k: usize) -> Vec<f64> {
    let mut w = vec![0.0; k + 1];
    match k {
        0 => {}
        1 => {
            w[0] = 0.5;
            w[1] = 0.5;
        }
        _ => {
            let simpson_end = if k.is_multiple_of(2) { k } else { k - 3 };
            for i in (0..simpson_end).step_by(2) {
                w[i] += 1.0 / 3.0;
                w[i + 1] += 4.0 / 3.0;
                w[i + 2] += 1.0 / 3.0;
            }
            if k % 2 == 1 {
                let s = k - 3;
                w[s] += 3.0 / 8.0;
                w[s + 1] += 9.0 / 8.0;
                w[s + 2] += 9.0 / 8.0;
                w[s + 3] += 3.0 / 8.0;
            }
        }
    }
    w
}

fn semigroup_trajectory(u0: &VectorField3, nu: ViscosityTriple, times: &[f64]) -> Vec<VectorField3> {
    let grid = u0.grid();
    times
        .par_iter()
        .map(|&t| apply_factors(u0, &semigroup_factors(&grid, nu, t)))
        .collect()
}

fn duhamel_with(
    forcing: &[VectorField3],
    u0: &VectorField3,
    nu: ViscosityTriple,
    times: &[f64],
) -> Vec<VectorField3> {
    let grid = u0.grid();
    let h = times[1] - times[0];
    let lag: Vec<Vec<f64>> = times
        .par_iter()
        .map(|&t| semigroup_factors(&grid, nu, t))
        .collect();
    (0..times.len())
        .into_par_iter()
        .map(|k| {
            let mut acc = apply_factors(u0, &lag[k]);
            for (j, w) in weights(k).into_iter().enumerate() {
                if w == 0.0 {
                    continue;
                }
                let term = apply_factors(&forcing[j], &lag[k - j]);
                acc = acc.axpy(w * h, &term);
            }
            acc
        })
        .collect()
}

/// One application of the integral map to a sampled trajectory.
pub fn duhamel_map(
    traj: &Trajectory,
    u0: &VectorField3,
    nu: ViscosityTriple,
    horizon: f64,
) -> Result<Trajectory> {
    let cfg = PicardConfig::new(horizon, traj.times.len());
    cfg.validate()?;
    let expected = cfg.times();
    let matches = traj.fields.len() == expected.len()
        && traj
            .times
            .iter()
            .zip(&expected)
            .all(|(a, b)| (a - b).abs() <= 1e-12 * horizon);
    if !matches {
        return config_err("trajectory is not sampled on the uniform nodes of [0, horizon]");
    }
    u0.grid().ensure_same(&traj.fields[0].grid())?;
    let forcing: Vec<VectorField3> = traj.fields.par_iter().map(nonlinear_term).collect();
    Ok(Trajectory {
        fields: duhamel_with(&forcing, u0, nu, &expected),
        times: expected,
    })
}

/// One row of the iterate report.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PicardIterate {
    pub iteration: usize,
    /// `‖x_{k} − x_{k−1}‖_E`.
    pub sup_diff: f64,
    /// `sup_diff_k / sup_diff_{k−1}`.
    pub ratio: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PicardOutcome {
    Converged,
    NonContraction,
    NotConverged,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PicardReport {
    pub outcome: PicardOutcome,
    pub iterates: Vec<PicardIterate>,
    /// `‖x − Φ(x)‖_E` of the returned trajectory.
    pub residual: f64,
    /// `‖x‖_E` of the returned trajectory.
    pub sup_norm: f64,
    pub initial_linf: f64,
}

impl PicardReport {
    /// Largest ratio over the iterations after the first.
    pub fn max_ratio(&self) -> Option<f64> {
        self.iterates
            .iter()
            .filter_map(|r| r.ratio)
            .filter(|r| r.is_finite())
            .reduce(f64::max)
    }

    /// Whether the solution stays in the ball of radius `2‖u₀‖_{L^∞}`.
    pub fn within_ball(&self) -> bool {
        self.sup_norm <= 2.0 * self.initial_linf * (1.0 + 1e-12)
    }

    pub fn write_csv(&self, mut w: impl Write) -> std::io::Result<()> {
        writeln!(w, "iteration,sup_diff,ratio")?;
        for r in &self.iterates {
            match r.ratio {
                Some(q) => writeln!(w, "{},{:e},{:e}", r.iteration, r.sup_diff, q)?,
                None => writeln!(w, "{},{:e},", r.iteration, r.sup_diff)?,
            }
        }
        Ok(())
    }
}

/// Picard iterates and their report, whatever the outcome.
#[derive(Debug, Clone)]
pub struct PicardRun {
    pub trajectory: Trajectory,
    pub report: PicardReport,
}

/// Number of consecutive growing differences reported as non-contraction.
const GROWTH_STREAK: usize = 3;

/// Iterates `x_{k+1} = a + B(x_k, x_k)` from `x₀ = a = e^{tL}u₀`.
pub fn picard_iterate(u0: &VectorField3, nu: ViscosityTriple, cfg: &PicardConfig) -> Result<PicardRun> {
    cfg.validate()?;
    nu.validate()?;
    let u0 = leray_project(&u0.dealias());
    let times = cfg.times();
    let mut x = Trajectory {
        fields: semigroup_trajectory(&u0, nu, &times),
        times: times.clone(),
    };
    let mut iterates = Vec::new();
    let mut streak = 0;
    let mut prev: Option<f64> = None;
    let mut outcome = PicardOutcome::NotConverged;
    for iteration in 1..=cfg.max_iterations {
        let next = duhamel_map(&x, &u0, nu, cfg.horizon)?;
        let diff = next.sup_distance(&x);
        let ratio = prev.map(|p| if p == 0.0 { f64::INFINITY } else { diff / p });
        iterates.push(PicardIterate {
            iteration,
            sup_diff: diff,
            ratio,
        });
        x = next;
        if !diff.is_finite() {
            outcome = PicardOutcome::NonContraction;
            break;
        }
        if diff <= cfg.tolerance {
            outcome = PicardOutcome::Converged;
            break;
        }
        streak = if ratio.is_some_and(|r| r > 1.0) { streak + 1 } else { 0 };
        if streak >= GROWTH_STREAK {
            outcome = PicardOutcome::NonContraction;
            break;
        }
        prev = Some(diff);
    }
    let residual = if outcome == PicardOutcome::Converged {
        duhamel_map(&x, &u0, nu, cfg.horizon)?.sup_distance(&x)
    } else {
        f64::NAN
    };
    let report = PicardReport {
        outcome,
        iterates,
        residual,
        sup_norm: x.sup_norm(),
        initial_linf: u0.linf(),
    };
    Ok(PicardRun {
        trajectory: x,
        report,
    })
}

/// Like [`picard_iterate`] but turns a failed iteration into an error.
pub fn picard_solve(u0: &VectorField3, nu: ViscosityTriple, cfg: &PicardConfig) -> Result<PicardRun> {
    let run = picard_iterate(u0, nu, cfg)?;
    let last = run.report.iterates.last().copied();
    match run.report.outcome {
        PicardOutcome::Converged => Ok(run),
        PicardOutcome::NonContraction => Err(Error::NonContraction {
            ratio: last.and_then(|r| r.ratio).unwrap_or(f64::INFINITY),
            streak: GROWTH_STREAK,
        }),
        PicardOutcome::NotConverged => Err(Error::NotConverged {
            iterations: cfg.max_iterations,
            last_diff: last.map_or(f64::NAN, |r| r.sup_diff),
        }),
    }
}

/// Empirical lower estimate of the bilinear operator norm on `E`, with the
/// envelope `ν₃^{−1/2} t^{1/2}` it is compared against.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BilinearEstimate {
    pub estimate: f64,
    pub envelope: f64,
    /// `estimate / envelope`.
    pub fitted_c: f64,
    pub samples_used: usize,
    pub samples_excluded: usize,
}

/// Maximizes `‖B(u, v)‖_E / (‖u‖_E ‖v‖_E)` over pairs of random stationary
/// trajectories, where `B(u, v)(t) = ∫₀ᵗ e^{(t−s)L}(−ℙ div(u ⊗ v)) ds`.
/// For stationary inputs the time integral is exact per mode.
pub fn estimate_bilinear_norm(
    nu: ViscosityTriple,
    grid: Grid3,
    horizon: f64,
    samples: usize,
    seed: u64,
) -> Result<BilinearEstimate> {
    if samples < 10 {
        return config_err(format!("need at least 10 samples, got {samples}"));
    }
    if !(nu.nu3 > 0.0) {
        return config_err("the envelope needs nu3 > 0");
    }
    if !(horizon > 0.0) {
        return config_err(format!("horizon must be positive, got {horizon}"));
    }
    let k_hi = (grid.n().into_iter().min().unwrap_or(8) / 6).max(1) as f64;
    let times = PicardConfig::new(horizon, 5).times();
    let ks = grid.wavenumbers();
    let results: Vec<Option<f64>> = (0..samples)
        .into_par_iter()
        .map(|i| -> Result<Option<f64>> {
            let s = seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(2 * i as u64);
            let u = random_div_free(grid, s, 1.0, k_hi)?;
            let v = random_div_free(grid, s + 1, 1.0, k_hi)?;
            let (nu_, nv) = (u.linf(), v.linf());
            if nu_ == 0.0 || nv == 0.0 {
                return Ok(None);
            }
            let b = bilinear_term(&u, &v);
            let best = times[1..]
                .iter()
                .map(|&t| {
                    let factors: Vec<f64> = ks
                        .iter()
                        .map(|k| {
                            let l = nu.symbol(*k);
                            if l == 0.0 {
                                t
                            } else {
                                -(-l * t).exp_m1() / l
                            }
                        })
                        .collect();
                    apply_factors(&b, &factors).linf()
                })
                .fold(0.0, f64::max);
            Ok(Some(best / (nu_ * nv)))
        })
        .collect::<Result<_>>()?;
    let used: Vec<f64> = results.iter().flatten().copied().collect();
    let estimate = used.iter().copied().fold(0.0, f64::max);
    let envelope = (horizon / nu.nu3).sqrt();
    Ok(BilinearEstimate {
        estimate,
        envelope,
        fitted_c: estimate / envelope,
        samples_used: used.len(),
        samples_excluded: samples - used.len(),
    })
}

/// A zero trajectory on the nodes of `cfg`.
pub fn zero_trajectory(grid: Grid3, cfg: &PicardConfig) -> Trajectory {
    Trajectory::zeros_like(cfg.times(), grid)
}
