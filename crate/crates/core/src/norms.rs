//! Norms and functionals: `L^p`, mixed `L^q_v L^p_h`, Sobolev, the
//! anisotropic Besov norm `B^{0,1/2}`, Chemin–Lerner time norms, the mixed
//! Sobolev norm `H^{s1,0}` and the `X(t)` functional.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{config_err, Error, Result};
use crate::field::{RealField3, SpectralField3, VectorField3};
use crate::lp::{vertical_block_norms, DyadicSystem};

/// Which inner norm is taken first in a mixed norm.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MixedOrder {
    /// `L^q_v(L^p_h)`: horizontal norm first, then vertical.
    VerticalOuter,
    /// `L^p_h(L^q_v)`: vertical norm first, then horizontal.
    HorizontalOuter,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum NormKind {
    Lp(f64),
    /// `L^q_v L^p_h` with `(q, p)`.
    LqvLph(f64, f64),
    /// `L^p_h L^q_v` with `(p, q)`.
    LphLqv(f64, f64),
    HsDot(f64),
    Hs(f64),
    B0half,
    HsOneZero(f64),
    Xt,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormValue {
    pub kind: NormKind,
    pub value: f64,
}

impl NormValue {
    fn new(kind: NormKind, value: f64) -> Self {
        Self { kind, value }
    }
}

fn check_exponent(p: f64) -> Result<()> {
    if p.is_nan() || p < 1.0 {
        config_err(format!("norm exponent must satisfy p >= 1, got {p}"))
    } else {
        Ok(())
    }
}

/// `(Σ |x|^p)^{1/p}` or `max |x|` for `p = ∞`, without the quadrature weight.
fn power_sum(values: impl Iterator<Item = f64>, p: f64) -> f64 {
    if p.is_infinite() {
        values.fold(0.0, |m, x| m.max(x.abs()))
    } else if p == 2.0 {
        values.map(|x| x * x).sum()
    } else {
        values.map(|x| x.abs().powf(p)).sum()
    }
}

fn finish(sum: f64, weight: f64, p: f64) -> f64 {
    if p.is_infinite() {
        sum
    } else {
        (sum * weight).powf(1.0 / p)
    }
}

/// Pointwise Euclidean magnitude of a vector field.
pub fn magnitude(u: &[RealField3; 3]) -> RealField3 {
    let data = u[0]
        .data
        .iter()
        .zip(&u[1].data)
        .zip(&u[2].data)
        .map(|((a, b), c)| (a * a + b * b + c * c).sqrt())
        .collect();
    RealField3 {
        grid: u[0].grid,
        data,
    }
}

/// `‖f‖_{L^p}` over the box by the midpoint sum on the uniform grid.
pub fn lp_norm(f: &RealField3, p: f64) -> Result<NormValue> {
    check_exponent(p)?;
    let s = power_sum(f.data.iter().copied(), p);
    Ok(NormValue::new(
        NormKind::Lp(p),
        finish(s, f.grid.cell_volume(), p),
    ))
}

/// `L^p` norm of the pointwise magnitude of a vector field.
pub fn lp_norm_vector(u: &VectorField3, p: f64) -> Result<NormValue> {
    lp_norm(&magnitude(&u.to_real()), p)
}

/// `L^p` norm over the period cell `[0, L1/λ) × [0, L2/λ) × [0, L3/λ)` of a
/// field that is `L/λ`-periodic. This is the torus stand-in for the `R^3`
/// norm of `λ u₀(λ x)`.
pub fn lp_norm_period_cell(f: &RealField3, p: f64, lambda: usize) -> Result<NormValue> {
    check_exponent(p)?;
    let grid = f.grid;
    let n = grid.n();
    if lambda == 0 || n.iter().any(|&m| m % lambda != 0) {
        return config_err(format!("period-cell factor {lambda} must divide every grid size {n:?}"));
    }
    let m = n.map(|k| k / lambda);
    let mut vals = Vec::with_capacity(m[0] * m[1] * m[2]);
    for i1 in 0..m[0] {
        for i2 in 0..m[1] {
            for i3 in 0..m[2] {
                vals.push(f.data[grid.index(i1, i2, i3)]);
            }
        }
    }
    let s = power_sum(vals.into_iter(), p);
    Ok(NormValue::new(
        NormKind::Lp(p),
        finish(s, grid.cell_volume(), p),
    ))
}

/// Mixed norm with vertical exponent `q_vertical` and horizontal exponent
/// `p_horizontal`; `order` names which one is outer.
pub fn mixed_norm(
    f: &RealField3,
    q_vertical: f64,
    p_horizontal: f64,
    order: MixedOrder,
) -> Result<NormValue> {
    check_exponent(q_vertical)?;
    check_exponent(p_horizontal)?;
    let grid = f.grid;
    let [n1, n2, n3] = grid.n();
    let dh = grid.spacing(0) * grid.spacing(1);
    let dv = grid.spacing(2);
    match order {
        MixedOrder::VerticalOuter => {
            let inner: Vec<f64> = (0..n3)
                .map(|i3| {
                    let slab = (0..n1)
                        .flat_map(|i1| (0..n2).map(move |i2| (i1, i2)))
                        .map(|(i1, i2)| f.data[grid.index(i1, i2, i3)]);
                    finish(power_sum(slab, p_horizontal), dh, p_horizontal)
                })
                .collect();
            let v = finish(power_sum(inner.into_iter(), q_vertical), dv, q_vertical);
            Ok(NormValue::new(NormKind::LqvLph(q_vertical, p_horizontal), v))
        }
        MixedOrder::HorizontalOuter => {
            let mut inner = Vec::with_capacity(n1 * n2);
            for i1 in 0..n1 {
                for i2 in 0..n2 {
                    let start = grid.index(i1, i2, 0);
                    let column = f.data[start..start + n3].iter().copied();
                    inner.push(finish(power_sum(column, q_vertical), dv, q_vertical));
                }
            }
            let v = finish(power_sum(inner.into_iter(), p_horizontal), dh, p_horizontal);
            Ok(NormValue::new(NormKind::LphLqv(p_horizontal, q_vertical), v))
        }
    }
}

fn weighted_l2(components: &[SpectralField3], weight: impl Fn([f64; 3]) -> f64) -> f64 {
    let grid = components[0].grid;
    let ks = grid.wavenumbers();
    let mut s = 0.0;
    for (idx, k) in ks.iter().enumerate() {
        let e: f64 = components.iter().map(|c| c.coeffs[idx].norm_sqr()).sum();
        if e != 0.0 {
            s += weight(*k) * e;
        }
    }
    (s * grid.volume()).sqrt()
}

/// Homogeneous Sobolev norm `(V Σ |ξ|^{2s} |f̂|²)^{1/2}`; the zero mode is
/// dropped.
pub fn hs_dot_norm(components: &[SpectralField3], s: f64) -> NormValue {
    let v = weighted_l2(components, |k| {
        let m2 = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
        if m2 == 0.0 {
            0.0
        } else {
            m2.powf(s)
        }
    });
    NormValue::new(NormKind::HsDot(s), v)
}

/// Inhomogeneous Sobolev norm with weight `(1 + |ξ|²)^s`.
pub fn hs_norm(components: &[SpectralField3], s: f64) -> NormValue {
    let v = weighted_l2(components, |k| {
        (1.0 + k[0] * k[0] + k[1] * k[1] + k[2] * k[2]).powf(s)
    });
    NormValue::new(NormKind::Hs(s), v)
}

/// Mixed Sobolev norm `H^{s1,0}` with weight `(1 + |ξ_h|)^{2 s1}`.
pub fn hs10_norm(components: &[SpectralField3], s1: f64) -> Result<NormValue> {
    if !(s1 > 0.0) {
        return config_err(format!("H^(s1,0) needs s1 > 0, got {s1}"));
    }
    let v = weighted_l2(components, |k| {
        (1.0 + (k[0] * k[0] + k[1] * k[1]).sqrt()).powf(2.0 * s1)
    });
    Ok(NormValue::new(NormKind::HsOneZero(s1), v))
}

/// Horizontal fractional derivative `Λ_h^s`, multiplier `|ξ_h|^s`.
pub fn horizontal_fractional_derivative(f: &SpectralField3, s: f64) -> SpectralField3 {
    f.apply_real_symbol(|k| {
        let kh = (k[0] * k[0] + k[1] * k[1]).sqrt();
        if kh == 0.0 {
            0.0
        } else {
            kh.powf(s)
        }
    })
}

/// `B^{0,1/2}` norm with the excluded vertical mean reported alongside.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BesovReport {
    pub norm: NormValue,
    /// `L²` norm of the `ξ₃ = 0` part, which no vertical block sees.
    pub vertical_mean_l2: f64,
}

/// `Σ_j 2^{j/2} ‖Δ^v_j f‖_{L²}` over the active blocks.
pub fn besov_b0half_report(components: &[SpectralField3], sys: &DyadicSystem) -> BesovReport {
    besov_weighted(components, sys, |_| 1.0)
}

pub(crate) fn besov_weighted(
    components: &[SpectralField3],
    sys: &DyadicSystem,
    multiplier: impl Fn([f64; 3]) -> f64 + Copy,
) -> BesovReport {
    let blocks = vertical_block_norms(components, sys, multiplier);
    let value = dyadic_sum(&blocks);
    let mean = weighted_l2(components, |k| if k[2] == 0.0 { multiplier(k).powi(2) } else { 0.0 });
    if mean > 0.0 {
        log::debug!("field has a nonzero vertical mean (L2 {mean:.3e}); excluded from the B^(0,1/2) sum");
    }
    BesovReport {
        norm: NormValue::new(NormKind::B0half, value),
        vertical_mean_l2: mean,
    }
}

/// `‖f‖_{B^{0,1/2}}`; a nonzero vertical mean is excluded (see
/// [`besov_b0half_report`]).
pub fn besov_b0half(components: &[SpectralField3], sys: &DyadicSystem) -> NormValue {
    besov_b0half_report(components, sys).norm
}

/// `‖∇u‖_{B^{0,1/2}}`, summing the three partial derivatives in `L²`.
pub fn gradient_besov_b0half(u: &VectorField3, sys: &DyadicSystem) -> NormValue {
    let blocks = vertical_block_norms(&u.components, sys, |k| {
        (k[0] * k[0] + k[1] * k[1] + k[2] * k[2]).sqrt()
    });
    NormValue::new(NormKind::B0half, dyadic_sum(&blocks))
}

pub(crate) fn dyadic_sum(blocks: &BTreeMap<i32, f64>) -> f64 {
    blocks
        .iter()
        .map(|(&j, &b)| 2f64.powf(0.5 * j as f64) * b)
        .sum()
}

/// Running Chemin–Lerner time norm `Σ_j 2^{j/2} ‖Δ^v_j u‖_{L^p([0,t]; L²)}`.
///
/// Time integrals use the trapezoidal rule on the recorded samples; `p = ∞`
/// keeps a running maximum per block.
#[derive(Debug, Clone, PartialEq)]
pub struct CheminLernerAccumulator {
    p: f64,
    acc: BTreeMap<i32, f64>,
    last: Option<(f64, BTreeMap<i32, f64>)>,
    t_start: Option<f64>,
}

impl CheminLernerAccumulator {
    pub fn new(p: f64) -> Result<Self> {
        check_exponent(p)?;
        Ok(Self {
            p,
            acc: BTreeMap::new(),
            last: None,
            t_start: None,
        })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    /// `(t_start, t_last)` of the recorded samples.
    pub fn window(&self) -> Option<(f64, f64)> {
        Some((self.t_start?, self.last.as_ref()?.0))
    }

    /// Records the block norms `‖Δ^v_j u(t)‖_{L²}` at time `t`.
    pub fn record(&mut self, t: f64, block_norms: BTreeMap<i32, f64>) -> Result<()> {
        if let Some((t_prev, prev)) = &self.last {
            if !(t > *t_prev) {
                return config_err(format!("accumulator times must increase: {t} after {t_prev}"));
            }
            let dt = t - t_prev;
            for (&j, &b) in &block_norms {
                let entry = self.acc.entry(j).or_insert(0.0);
                if self.p.is_infinite() {
                    *entry = entry.max(b);
                } else {
                    let a = prev.get(&j).copied().unwrap_or(0.0);
                    *entry += 0.5 * dt * (a.powf(self.p) + b.powf(self.p));
                }
            }
            for (&j, &a) in prev {
                if !block_norms.contains_key(&j) && self.p.is_finite() {
                    *self.acc.entry(j).or_insert(0.0) += 0.5 * dt * a.powf(self.p);
                }
            }
        } else {
            self.t_start = Some(t);
            if self.p.is_infinite() {
                self.acc = block_norms.clone();
            }
        }
        self.last = Some((t, block_norms));
        Ok(())
    }

    /// Records the vertical blocks of `m(D) u` for a spectral multiplier `m`.
    pub fn record_field(
        &mut self,
        t: f64,
        components: &[SpectralField3],
        sys: &DyadicSystem,
        multiplier: impl Fn([f64; 3]) -> f64,
    ) -> Result<()> {
        self.record(t, vertical_block_norms(components, sys, multiplier))
    }

    /// Per-block time norms `‖Δ^v_j u‖_{L^p_t(L²)}`.
    pub fn block_time_norms(&self) -> BTreeMap<i32, f64> {
        self.acc
            .iter()
            .map(|(&j, &a)| {
                let v = if self.p.is_infinite() {
                    a
                } else {
                    a.powf(1.0 / self.p)
                };
                (j, v)
            })
            .collect()
    }

    pub fn finalize(&self) -> f64 {
        dyadic_sum(&self.block_time_norms())
    }
}

/// `‖f‖_{X(t)} = ‖f‖^{1/2}_{L̃^∞_t(B)} ‖∂₁f‖^{1/4}_{L̃²_t(B)} ‖∂₂f‖^{1/4}_{L̃²_t(B)}`.
pub fn xt_functional(
    u_sup: &CheminLernerAccumulator,
    d1_l2: &CheminLernerAccumulator,
    d2_l2: &CheminLernerAccumulator,
) -> Result<NormValue> {
    if u_sup.p().is_finite() || d1_l2.p() != 2.0 || d2_l2.p() != 2.0 {
        return config_err("X(t) needs an L^inf accumulator for f and L^2 accumulators for the derivatives");
    }
    let w = u_sup.window();
    if w != d1_l2.window() || w != d2_l2.window() {
        return Err(Error::Config(format!(
            "accumulator windows differ: {:?}, {:?}, {:?}",
            w,
            d1_l2.window(),
            d2_l2.window()
        )));
    }
    let v = u_sup.finalize().sqrt() * d1_l2.finalize().powf(0.25) * d2_l2.finalize().powf(0.25);
    Ok(NormValue::new(NormKind::Xt, v))
}

/// Records `u`, `∂₁u`, `∂₂u` into the three accumulators `X(t)` needs.
#[derive(Debug, Clone)]
pub struct XtTracker {
    pub u_sup: CheminLernerAccumulator,
    pub d1_l2: CheminLernerAccumulator,
    pub d2_l2: CheminLernerAccumulator,
}

impl Default for XtTracker {
    fn default() -> Self {
        Self {
            u_sup: CheminLernerAccumulator::new(f64::INFINITY).unwrap(),
            d1_l2: CheminLernerAccumulator::new(2.0).unwrap(),
            d2_l2: CheminLernerAccumulator::new(2.0).unwrap(),
        }
    }
}

impl XtTracker {
    pub fn record(&mut self, t: f64, u: &VectorField3, sys: &DyadicSystem) -> Result<()> {
        self.u_sup.record_field(t, &u.components, sys, |_| 1.0)?;
        self.d1_l2.record_field(t, &u.components, sys, |k| k[0])?;
        self.d2_l2.record_field(t, &u.components, sys, |k| k[1])
    }

    pub fn value(&self) -> Result<NormValue> {
        xt_functional(&self.u_sup, &self.d1_l2, &self.d2_l2)
    }
}

/// Grid helper used by several tests: the `L²` norm in physical space.
pub fn l2_physical(f: &RealField3) -> f64 {
    lp_norm(f, 2.0).map(|n| n.value).unwrap_or(f64::NAN)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Grid3;
    use crate::lp::phi;
    use num_complex::Complex64;
    use std::f64::consts::PI;

    fn grid(n: usize) -> Grid3 {
        Grid3::cubic(n).unwrap()
    }

    #[test]
    fn lp_of_constant_and_sine() {
        let g = grid(16);
        let c = RealField3::from_fn(g, |_, _, _| -3.0);
        let v = g.volume();
        assert!((lp_norm(&c, 2.0).unwrap().value - 3.0 * v.sqrt()).abs() < 1e-12);
        let s = RealField3::from_fn(g, |x, _, _| x.sin());
        let l2 = lp_norm(&s, 2.0).unwrap().value;
        assert!((l2 - (4.0 * PI.powi(3)).sqrt()).abs() < 1e-12);
        let g64 = grid(64);
        let s64 = RealField3::from_fn(g64, |x, _, _| x.sin());
        assert!((lp_norm(&s64, f64::INFINITY).unwrap().value - 1.0).abs() < 1e-3);
        assert!(lp_norm(&s, 0.5).is_err());
    }

    #[test]
    fn mixed_norm_cases() {
        let g = grid(16);
        let f = RealField3::from_fn(g, |x, y, z| (x.sin() + 0.3 * y.cos() + 2.0) * (z.cos() + 0.5));
        let l2 = lp_norm(&f, 2.0).unwrap().value;
        for order in [MixedOrder::VerticalOuter, MixedOrder::HorizontalOuter] {
            let m = mixed_norm(&f, 2.0, 2.0, order).unwrap().value;
            assert!((m - l2).abs() < 1e-12 * l2);
        }
        // separable: product of a 2-D and a 1-D norm
        let h = RealField3::from_fn(g, |x, y, _| x.sin() + 0.3 * y.cos() + 2.0);
        let v = RealField3::from_fn(g, |_, _, z| z.cos() + 0.5);
        let h2 = lp_norm(&h, 4.0).unwrap().value / (2.0 * PI).powf(0.25);
        let vinf = lp_norm(&v, f64::INFINITY).unwrap().value;
        let m = mixed_norm(&f, f64::INFINITY, 4.0, MixedOrder::VerticalOuter).unwrap().value;
        assert!((m - h2 * vinf).abs() < 1e-12 * m);
        let hold = mixed_norm(&f, f64::INFINITY, 2.0, MixedOrder::VerticalOuter).unwrap().value;
        assert!(hold >= l2 / (2.0 * PI).sqrt() * (1.0 - 1e-12));
    }

    #[test]
    fn besov_single_vertical_mode() {
        let g = grid(32);
        let sys = DyadicSystem::for_grid(&g);
        let f = RealField3::from_fn(g, |x, _, z| x.cos() * z.sin()).to_spectral();
        let f = f.scale(1.0 / f.l2_norm());
        let b = besov_b0half(std::slice::from_ref(&f), &sys).value;
        let expected = phi(1.0) + 2f64.powf(-0.5) * phi(2.0);
        assert!((b - expected).abs() < 1e-12);
        assert!((2f64.powf(-0.5)..=1.0).contains(&b));

        let f8 = RealField3::from_fn(g, |x, _, z| x.cos() * (8.0 * z).sin()).to_spectral();
        let f8 = f8.scale(1.0 / f8.l2_norm());
        let ratio = besov_b0half(std::slice::from_ref(&f8), &sys).value / b;
        assert!((2f64.powf(0.5)..=2f64.powf(2.5)).contains(&ratio));
        assert!((ratio - 2f64.powf(1.5)).abs() < 1e-12);
        assert_eq!(besov_b0half(&[SpectralField3::zeros(g)], &sys).value, 0.0);
    }

    #[test]
    fn besov_reports_vertical_mean() {
        let g = grid(16);
        let sys = DyadicSystem::for_grid(&g);
        let f = RealField3::from_fn(g, |x, _, z| x.cos() + z.sin()).to_spectral();
        let r = besov_b0half_report(std::slice::from_ref(&f), &sys);
        let mean_part = RealField3::from_fn(g, |x, _, _| x.cos()).to_spectral().l2_norm();
        assert!((r.vertical_mean_l2 - mean_part).abs() < 1e-12);
    }

    #[test]
    fn hs10_examples() {
        let g = grid(16);
        let mut f = SpectralField3::zeros(g);
        f.set_real_mode([1, 0, 3], Complex64::new(0.0, 1.0));
        let f = f.scale(1.0 / f.l2_norm());
        let v = hs10_norm(std::slice::from_ref(&f), 2.5).unwrap().value;
        assert!((v - 2f64.powf(2.5)).abs() < 1e-12);
        let vert = RealField3::from_fn(g, |_, _, z| (2.0 * z).cos()).to_spectral();
        let a = hs10_norm(std::slice::from_ref(&vert), 3.0).unwrap().value;
        assert!((a - vert.l2_norm()).abs() < 1e-12);
        assert!(hs10_norm(std::slice::from_ref(&vert), 0.0).is_err());
        let mut last = 0.0;
        for s in [0.5, 1.0, 2.0, 3.0] {
            let v = hs10_norm(std::slice::from_ref(&f), s).unwrap().value;
            assert!(v > last);
            last = v;
        }
    }

    #[test]
    fn sobolev_norms_of_single_mode() {
        let g = grid(16);
        let f = RealField3::from_fn(g, |x, y, _| (3.0 * x + 4.0 * y).sin()).to_spectral();
        let l2 = f.l2_norm();
        assert!((hs_dot_norm(std::slice::from_ref(&f), 1.0).value - 5.0 * l2).abs() < 1e-12);
        assert!((hs_norm(std::slice::from_ref(&f), 1.0).value - 26f64.sqrt() * l2).abs() < 1e-12);
        let lam = horizontal_fractional_derivative(&f, 0.5);
        assert!((lam.l2_norm() - 5f64.sqrt() * l2).abs() < 1e-12);
    }

    #[test]
    fn period_cell_norm_requires_divisibility() {
        let g = Grid3::new([12, 12, 12], [1.0; 3]).unwrap();
        let f = RealField3::from_fn(g, |_, _, _| 1.0);
        assert!(lp_norm_period_cell(&f, 2.0, 5).is_err());
        let v = lp_norm_period_cell(&f, 2.0, 2).unwrap().value;
        assert!((v - (1.0f64 / 8.0).sqrt()).abs() < 1e-14);
    }

    #[test]
    fn chemin_lerner_stationary_input() {
        let g = grid(16);
        let sys = DyadicSystem::for_grid(&g);
        let u = VectorField3::from_fns(
            g,
            |x, y, z| x.sin() * y.cos() * z.cos(),
            |x, y, z| -x.cos() * y.sin() * z.cos(),
            |_, _, _| 0.0,
        );
        let b0 = besov_b0half(&u.components, &sys).value;
        let run = |t_end: f64| {
            let mut tr = XtTracker::default();
            for i in 0..=10 {
                tr.record(t_end * i as f64 / 10.0, &u, &sys).unwrap();
            }
            tr
        };
        let tr1 = run(1.0);
        let tr2 = run(2.0);
        assert!((tr1.u_sup.finalize() - b0).abs() < 1e-12);
        let x1 = tr1.value().unwrap().value;
        let x2 = tr2.value().unwrap().value;
        assert!((x2 / x1 - 2f64.powf(0.25)).abs() < 1e-12);
        // L̃² factors each scale as t^{1/2} before the 1/4 power
        let d1 = besov_weighted(&u.components, &sys, |k| k[0]).norm.value;
        assert!((tr2.d1_l2.finalize() - 2f64.sqrt() * d1).abs() < 1e-12);
        let empty = XtTracker::default();
        assert!(empty.value().is_ok());
        assert_eq!(empty.value().unwrap().value, 0.0);
    }

    #[test]
    fn xt_rejects_mismatched_windows() {
        let g = grid(8);
        let sys = DyadicSystem::for_grid(&g);
        let u = VectorField3::zeros(g);
        let mut a = XtTracker::default();
        a.record(0.0, &u, &sys).unwrap();
        a.record(1.0, &u, &sys).unwrap();
        let mut d = a.d2_l2.clone();
        d.record_field(2.0, &u.components, &sys, |k| k[1]).unwrap();
        assert!(xt_functional(&a.u_sup, &a.d1_l2, &d).is_err());
        assert!(a.u_sup.clone().record(0.5, BTreeMap::new()).is_err());
    }
}
