//! Ratio checks of functional inequalities on band-limited periodic fields.
//!
//! Each check samples fields, evaluates `LHS / RHS` with the constant set to
//! one and summarizes the ratios in a [`RatioReport`]. Inequalities stated on
//! `R^d` are probed on the `2π`-periodic box with mean-zero fields; how far
//! the fitted constant moves between frequency bands measures the error of
//! that substitution.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{config_err, Result};
use crate::fft::{self, Direction};

/// Real field on the `d`-dimensional `2π`-periodic box, stored by its
/// Fourier-series coefficients in C order.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicField {
    shape: Vec<usize>,
    coeffs: Vec<Complex64>,
}

fn freq_of(idx: usize, n: usize) -> i64 {
    fft::signed_freq(idx, n)
}

impl PeriodicField {
    pub fn zeros(shape: &[usize]) -> Result<Self> {
        if shape.is_empty() || shape.len() > 3 {
            return config_err(format!("dimension must be 1, 2 or 3, got {}", shape.len()));
        }
        if shape.iter().any(|&n| n < 4 || n % 2 != 0) {
            return config_err(format!("grid sizes must be even and >= 4, got {shape:?}"));
        }
        Ok(Self {
            shape: shape.to_vec(),
            coeffs: vec![Complex64::new(0.0, 0.0); shape.iter().product()],
        })
    }

    /// Samples `f` at the grid points `x_i = 2π k_i / n_i`.
    pub fn from_fn(shape: &[usize], f: impl Fn(&[f64]) -> f64) -> Result<Self> {
        let mut out = Self::zeros(shape)?;
        let mut x = vec![0.0; shape.len()];
        let data: Vec<f64> = (0..out.len())
            .map(|flat| {
                let idx = out.unflatten(flat);
                for a in 0..shape.len() {
                    x[a] = 2.0 * PI * idx[a] as f64 / shape[a] as f64;
                }
                f(&x)
            })
            .collect();
        out.coeffs = data.into_iter().map(|v| Complex64::new(v, 0.0)).collect();
        fft::transform(&mut out.coeffs, shape, Direction::Forward);
        Ok(out)
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn dim(&self) -> usize {
        self.shape.len()
    }

    fn len(&self) -> usize {
        self.coeffs.len()
    }

    fn unflatten(&self, mut flat: usize) -> [usize; 3] {
        let mut idx = [0; 3];
        for a in (0..self.dim()).rev() {
            idx[a] = flat % self.shape[a];
            flat /= self.shape[a];
        }
        idx
    }

    /// Integer frequency of the mode stored at `flat` (unused axes are 0).
    pub fn freq(&self, flat: usize) -> [i64; 3] {
        let idx = self.unflatten(flat);
        let mut m = [0; 3];
        for a in 0..self.dim() {
            m[a] = freq_of(idx[a], self.shape[a]);
        }
        m
    }

    fn flat_of(&self, m: [i64; 3]) -> Option<usize> {
        let mut flat = 0;
        for (&ma, &n) in m.iter().zip(&self.shape) {
            flat = flat * n + fft::index_of_freq(ma, n)?;
        }
        Some(flat)
    }

    pub fn coeff(&self, m: [i64; 3]) -> Complex64 {
        self.flat_of(m).map_or(Complex64::new(0.0, 0.0), |i| self.coeffs[i])
    }

    pub fn volume(&self) -> f64 {
        (2.0 * PI).powi(self.dim() as i32)
    }

    /// Multiplies each coefficient by `symbol(ξ)`.
    pub fn apply(&self, symbol: impl Fn([f64; 3]) -> Complex64) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let m = self.freq(i);
                c * symbol(m.map(|x| x as f64))
            })
            .collect();
        Self {
            shape: self.shape.clone(),
            coeffs,
        }
    }

    pub fn derivative(&self, axis: usize) -> Self {
        self.apply(|k| Complex64::new(0.0, k[axis]))
    }

    /// `∂^order` along `axis`.
    pub fn derivative_n(&self, axis: usize, order: u32) -> Self {
        let i_pow = Complex64::new(0.0, 1.0).powu(order);
        self.apply(|k| i_pow * k[axis].powi(order as i32))
    }

    /// `Λ^s`, multiplier `|ξ|^s` (zero at `ξ = 0` unless `s = 0`).
    pub fn fractional(&self, s: f64) -> Self {
        self.apply(|k| Complex64::new(homogeneous_weight(k, s), 0.0))
    }

    pub fn scale(&self, c: f64) -> Self {
        Self {
            shape: self.shape.clone(),
            coeffs: self.coeffs.iter().map(|x| x * c).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self {
            shape: self.shape.clone(),
            coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        Self {
            shape: self.shape.clone(),
            coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect(),
        }
    }

    /// Same field on a grid `factor` times finer along every axis.
    pub fn padded(&self, factor: usize) -> Self {
        self.padded_by(&vec![factor; self.dim()])
    }

    /// Same field on a grid refined by `factors[a]` along axis `a`.
    pub fn padded_by(&self, factors: &[usize]) -> Self {
        if factors.iter().all(|&f| f == 1) {
            return self.clone();
        }
        let shape: Vec<usize> = self.shape.iter().zip(factors).map(|(n, f)| n * f).collect();
        let mut out = Self {
            coeffs: vec![Complex64::new(0.0, 0.0); shape.iter().product()],
            shape,
        };
        for (i, c) in self.coeffs.iter().enumerate() {
            let m = self.freq(i);
            let nyquist = (0..self.dim()).any(|a| 2 * m[a].unsigned_abs() as usize == self.shape[a]);
            if *c != Complex64::new(0.0, 0.0) && !nyquist {
                let j = out.flat_of(m).expect("padded grid holds every mode");
                out.coeffs[j] = *c;
            }
        }
        out
    }

    pub fn to_real(&self) -> Vec<f64> {
        let mut buf = self.coeffs.clone();
        fft::transform(&mut buf, &self.shape, Direction::Inverse);
        buf.into_iter().map(|c| c.re).collect()
    }

    fn from_real(shape: Vec<usize>, data: &[f64]) -> Self {
        let mut coeffs: Vec<Complex64> = data.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        fft::transform(&mut coeffs, &shape, Direction::Forward);
        Self { shape, coeffs }
    }

    /// Exact product of two fields, returned on the twice finer grid.
    pub fn product(&self, other: &Self) -> Self {
        let a = self.padded(2);
        let b = other.padded(2);
        let data: Vec<f64> = a.to_real().iter().zip(b.to_real()).map(|(x, y)| x * y).collect();
        Self::from_real(a.shape, &data)
    }

    /// Sum of several exact products, on the twice finer grid.
    pub fn sum_of_products(pairs: &[(&Self, &Self)]) -> Self {
        let mut acc: Option<Vec<f64>> = None;
        let mut shape = Vec::new();
        for (f, g) in pairs {
            let a = f.padded(2);
            let b = g.padded(2);
            shape = a.shape.clone();
            let prod: Vec<f64> = a.to_real().iter().zip(b.to_real()).map(|(x, y)| x * y).collect();
            acc = Some(match acc {
                None => prod,
                Some(mut s) => {
                    s.iter_mut().zip(&prod).for_each(|(x, y)| *x += y);
                    s
                }
            });
        }
        Self::from_real(shape, &acc.unwrap_or_default())
    }

    pub fn l2_norm(&self) -> f64 {
        (self.volume() * self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>()).sqrt()
    }

    /// `(V Σ w(ξ)² |f̂|²)^{1/2}`.
    fn weighted_l2(&self, w: impl Fn([f64; 3]) -> f64) -> f64 {
        let s: f64 = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let m = self.freq(i).map(|x| x as f64);
                let wt = w(m);
                wt * wt * c.norm_sqr()
            })
            .sum();
        (self.volume() * s).sqrt()
    }

    /// `‖f‖_{Ḣ^s}` with weight `|ξ|^s`; the zero mode only counts when `s = 0`.
    pub fn hs_dot_norm(&self, s: f64) -> f64 {
        self.weighted_l2(|k| homogeneous_weight(k, s))
    }

    /// `‖f‖_{H^s}` with weight `(1 + |ξ|²)^{s/2}`.
    pub fn hs_norm(&self, s: f64) -> f64 {
        self.weighted_l2(|k| (1.0 + k[0] * k[0] + k[1] * k[1] + k[2] * k[2]).powf(0.5 * s))
    }

    /// `‖f‖_{L^p}` by the grid sum on a `pad`-times finer grid.
    pub fn lp_norm(&self, p: f64, pad: usize) -> f64 {
        let fine = self.padded(pad);
        let data = fine.to_real();
        let cell = self.volume() / data.len() as f64;
        lp_of(&data, p, cell)
    }

    /// `‖f‖_{L^p_h(L^q_v)}` for `d = 3`, the vertical axis being the last one.
    /// Only the vertical axis is refined, by `pad`.
    pub fn mixed_norm_hv(&self, p_h: f64, q_v: f64, pad: usize) -> f64 {
        let fine = self.padded_by(&[1, 1, pad]);
        let data = fine.to_real();
        let n3 = fine.shape[2];
        let dv = 2.0 * PI / n3 as f64;
        let dh = 4.0 * PI * PI / (fine.shape[0] * fine.shape[1]) as f64;
        let inner: Vec<f64> = data.chunks(n3).map(|col| lp_of(col, q_v, dv)).collect();
        lp_of(&inner, p_h, dh)
    }

    /// Largest `|ξ_axis|` carrying a coefficient above `tol · max|f̂|`.
    pub fn max_freq(&self, axis: usize, tol: f64) -> i64 {
        let cmax = self.coeffs.iter().fold(0.0f64, |m, c| m.max(c.norm()));
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| c.norm() > tol * cmax)
            .map(|(i, _)| self.freq(i)[axis].abs())
            .max()
            .unwrap_or(0)
    }

    /// Smallest `|ξ_axis|` carrying a coefficient above `tol · max|f̂|`.
    pub fn min_freq(&self, axis: usize, tol: f64) -> i64 {
        let cmax = self.coeffs.iter().fold(0.0f64, |m, c| m.max(c.norm()));
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| c.norm() > tol * cmax)
            .map(|(i, _)| self.freq(i)[axis].abs())
            .min()
            .unwrap_or(0)
    }
}

fn homogeneous_weight(k: [f64; 3], s: f64) -> f64 {
    let r = (k[0] * k[0] + k[1] * k[1] + k[2] * k[2]).sqrt();
    if r == 0.0 {
        if s == 0.0 {
            1.0
        } else {
            0.0
        }
    } else {
        r.powf(s)
    }
}

fn lp_of(values: &[f64], p: f64, cell: f64) -> f64 {
    if p.is_infinite() {
        values.iter().fold(0.0, |m, x| m.max(x.abs()))
    } else {
        let s: f64 = values.iter().map(|x| x.abs().powf(p)).sum();
        (s * cell).powf(1.0 / p)
    }
}

/// Frequency region the sampler draws from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Band {
    /// `lo ≤ |ξ| ≤ hi`.
    Radial { lo: f64, hi: f64 },
    /// `|ξ₃| ≤ 2^ℓ radius`, `|ξ_h| ≤ horizontal_max` (d = 3).
    VerticalBall { ell: i32, radius: f64, horizontal_max: f64 },
    /// `2^ℓ·3/4 ≤ |ξ₃| ≤ 2^ℓ·8/3`, `|ξ_h| ≤ horizontal_max` (d = 3).
    VerticalRing { ell: i32, horizontal_max: f64 },
}

impl Band {
    /// Per-axis dilation taking the reference region to this band.
    fn dilation(&self, dim: usize) -> [f64; 3] {
        match *self {
            Band::Radial { lo, hi } => {
                let k = (lo * hi).sqrt();
                [k, if dim > 1 { k } else { 1.0 }, if dim > 2 { k } else { 1.0 }]
            }
            Band::VerticalBall { ell, .. } | Band::VerticalRing { ell, .. } => [1.0, 1.0, 2f64.powi(ell)],
        }
    }

    /// Membership of the integer frequency `m`.
    pub fn contains(&self, m: [f64; 3]) -> bool {
        match *self {
            Band::Radial { lo, hi } => {
                let r = (m[0] * m[0] + m[1] * m[1] + m[2] * m[2]).sqrt();
                r >= lo && r <= hi
            }
            Band::VerticalBall {
                ell,
                radius,
                horizontal_max,
            } => m[2].abs() <= 2f64.powi(ell) * radius && m[0].hypot(m[1]) <= horizontal_max,
            Band::VerticalRing { ell, horizontal_max } => {
                let s = 2f64.powi(ell);
                let v = m[2].abs();
                v >= 0.75 * s && v <= 8.0 / 3.0 * s && m[0].hypot(m[1]) <= horizontal_max
            }
        }
    }
}

/// How coefficients inside the band are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Envelope {
    /// Independent unit-variance complex Gaussian per mode.
    Spread,
    /// Coherent sum of `count` Gaussian wave packets centred at a random
    /// point, with spectral width `width` in reference units. The
    /// construction commutes with dilation of the band, so fields in
    /// different bands are rescaled copies of the same random shapes.
    Packets { count: usize, width: f64 },
}

/// Seeded generator of real band-limited fields.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FieldSampler {
    pub seed: u64,
    pub band: Band,
    pub envelope: Envelope,
    pub mean_zero: bool,
}

impl FieldSampler {
    pub fn new(seed: u64, band: Band) -> Self {
        Self {
            seed,
            band,
            envelope: Envelope::Packets {
                count: 3,
                width: 0.6,
            },
            mean_zero: true,
        }
    }

    pub fn spread(seed: u64, band: Band) -> Self {
        Self {
            envelope: Envelope::Spread,
            ..Self::new(seed, band)
        }
    }

    fn rng(&self, index: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(index);
        rng
    }

    /// Sample number `index` on a grid of the given shape; the same
    /// `(seed, index)` always gives the same field.
    pub fn sample(&self, shape: &[usize], index: u64) -> Result<PeriodicField> {
        self.sample_placed(shape, index, None).map(|(f, _)| f)
    }

    /// Samples `first, first + 1, ..` whose packets all sit at the position
    /// drawn for the first one. Spread fields are unaffected.
    pub fn sample_colocated(&self, shape: &[usize], first: u64, count: usize) -> Result<Vec<PeriodicField>> {
        let mut out = Vec::with_capacity(count);
        let mut anchor: Option<Vec<f64>> = None;
        for k in 0..count as u64 {
            let (f, x0) = self.sample_placed(shape, first + k, anchor.as_deref())?;
            anchor.get_or_insert(x0);
            out.push(f);
        }
        Ok(out)
    }

    fn sample_placed(
        &self,
        shape: &[usize],
        index: u64,
        position: Option<&[f64]>,
    ) -> Result<(PeriodicField, Vec<f64>)> {
        let mut f = PeriodicField::zeros(shape)?;
        let dim = f.dim();
        let mut rng = self.rng(index);
        let d = self.band.dilation(dim);
        let mut placed = Vec::new();
        match self.envelope {
            Envelope::Spread => {
                for i in 0..f.len() {
                    let m = f.freq(i);
                    let j = f.flat_of(m.map(|x| -x)).unwrap_or(i);
                    if j < i {
                        continue;
                    }
                    let re: f64 = StandardNormal.sample(&mut rng);
                    let im: f64 = StandardNormal.sample(&mut rng);
                    if !self.band.contains(m.map(|x| x as f64)) || j == i {
                        continue;
                    }
                    let c = Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2;
                    f.coeffs[i] = c;
                    f.coeffs[j] = c.conj();
                }
            }
            Envelope::Packets { count, width } => {
                let centres = self.packet_centres(&mut rng, count.max(1), dim);
                let amps: Vec<Complex64> = centres
                    .iter()
                    .map(|_| {
                        let re: f64 = StandardNormal.sample(&mut rng);
                        let im: f64 = StandardNormal.sample(&mut rng);
                        Complex64::new(re, im)
                    })
                    .collect();
                let drawn: Vec<f64> = (0..dim).map(|_| rng.random::<f64>() * 2.0 * PI).collect();
                let x0 = position.map_or(drawn, <[f64]>::to_vec);
                placed.clone_from(&x0);
                let g = |m: [f64; 3]| -> Complex64 {
                    let w = [0, 1, 2].map(|a| m[a] / d[a]);
                    let mut s = Complex64::new(0.0, 0.0);
                    for (c, a) in centres.iter().zip(&amps) {
                        let r2: f64 = (0..3).map(|k| (w[k] - c[k]).powi(2)).sum();
                        s += a * (-0.5 * r2 / (width * width)).exp();
                    }
                    let phase: f64 = (0..dim).map(|k| m[k] * x0[k]).sum();
                    s * Complex64::from_polar(1.0, -phase)
                };
                for i in 0..f.len() {
                    let m = f.freq(i).map(|x| x as f64);
                    if !self.band.contains(m) {
                        continue;
                    }
                    let neg = m.map(|x| -x);
                    f.coeffs[i] = 0.5 * (g(m) + g(neg).conj());
                }
                // Nyquist modes are never in an admissible band, so the
                // field is Hermitian by construction.
            }
        }
        if self.mean_zero {
            f.coeffs[0] = Complex64::new(0.0, 0.0);
        }
        Ok((f, placed))
    }

    fn packet_centres(&self, rng: &mut ChaCha8Rng, count: usize, dim: usize) -> Vec<[f64; 3]> {
        let d = self.band.dilation(dim);
        let mut out = Vec::with_capacity(count);
        let mut guard = 0;
        while out.len() < count && guard < 100_000 {
            guard += 1;
            let mut w = [0.0; 3];
            let bound = match self.band {
                Band::Radial { hi, .. } => [hi / d[0], hi / d[1], hi / d[2]],
                Band::VerticalBall {
                    radius,
                    horizontal_max,
                    ..
                } => [horizontal_max, horizontal_max, radius],
                Band::VerticalRing { horizontal_max, .. } => [horizontal_max, horizontal_max, 8.0 / 3.0],
            };
            for a in 0..dim {
                w[a] = (2.0 * rng.random::<f64>() - 1.0) * bound[a];
            }
            let m = [0, 1, 2].map(|a| w[a] * d[a]);
            if self.band.contains(m) {
                out.push(w);
            }
        }
        out
    }
}

/// Summary of one inequality over a batch of samples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioReport {
    pub inequality_id: String,
    pub samples: usize,
    pub accepted: usize,
    pub rejected: usize,
    pub max_ratio: f64,
    pub min_ratio: f64,
    pub mean_ratio: f64,
    /// Describes the sample attaining `max_ratio`.
    pub worst: Option<String>,
    pub seed: u64,
}

impl RatioReport {
    fn from_ratios(id: &str, seed: u64, ratios: &[Option<f64>]) -> Self {
        let accepted: Vec<(usize, f64)> = ratios
            .iter()
            .enumerate()
            .filter_map(|(i, r)| r.map(|r| (i, r)))
            .collect();
        let (worst_i, max_ratio) = accepted
            .iter()
            .copied()
            .fold((None, f64::NEG_INFINITY), |(wi, m), (i, r)| {
                if r > m {
                    (Some(i), r)
                } else {
                    (wi, m)
                }
            });
        let min_ratio = accepted.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
        let mean_ratio = if accepted.is_empty() {
            f64::NAN
        } else {
            accepted.iter().map(|p| p.1).sum::<f64>() / accepted.len() as f64
        };
        Self {
            inequality_id: id.to_string(),
            samples: ratios.len(),
            accepted: accepted.len(),
            rejected: ratios.len() - accepted.len(),
            max_ratio,
            min_ratio,
            mean_ratio,
            worst: worst_i.map(|i| format!("sample {i} of seed {seed}")),
            seed,
        }
    }

    /// `max_ratio` is finite and at least one sample was admissible.
    pub fn bounded(&self) -> bool {
        self.accepted > 0 && self.max_ratio.is_finite()
    }
}

/// `max/min − 1` of the fitted constants (max ratios) of several reports.
pub fn band_variation(reports: &[&RatioReport]) -> f64 {
    let hi = reports.iter().map(|r| r.max_ratio).fold(f64::NEG_INFINITY, f64::max);
    let lo = reports.iter().map(|r| r.max_ratio).fold(f64::INFINITY, f64::min);
    hi / lo - 1.0
}

fn run<F>(id: &str, seed: u64, samples: usize, f: F) -> Result<RatioReport>
where
    F: Fn(u64) -> Result<Option<f64>> + Sync,
{
    if samples == 0 {
        return config_err("need at least one sample");
    }
    let ratios: Vec<Option<f64>> = (0..samples as u64)
        .into_par_iter()
        .map(&f)
        .collect::<Result<_>>()?;
    Ok(RatioReport::from_ratios(id, seed, &ratios))
}

/// Relative size below which a derivative norm counts as vanishing.
const DEGENERATE: f64 = 1e-10;

/// Variants of the anisotropic Gagliardo–Nirenberg inequalities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GnVariant {
    /// `‖f‖_{L⁴} ≤ C ‖f‖^{1/2} ‖∂₁f‖^{1/4} ‖∂₂f‖^{1/4}` on the plane.
    L42,
    /// `‖f‖_{L^p} ≤ C ‖f‖^{2/p} (‖∂₁f‖ ‖∂₂f‖)^{1/2−1/p}` on the plane.
    Lp2 { p: f64 },
    /// `‖g‖_{L⁴} ≤ C (‖g‖ ‖∂₁g‖ ‖∂₂g‖ ‖∂₃g‖)^{1/4}` in space.
    L43,
}

impl GnVariant {
    pub fn id(&self) -> String {
        match self {
            GnVariant::L42 => "gn_l42".into(),
            GnVariant::Lp2 { p } => format!("gn_lp2_p{p}"),
            GnVariant::L43 => "gn_l43".into(),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            GnVariant::L42 | GnVariant::Lp2 { .. } => 2,
            GnVariant::L43 => 3,
        }
    }
}

/// `LHS / RHS` of a Gagliardo–Nirenberg variant, or `None` when a
/// derivative vanishes (the right side is then zero).
pub fn gn_ratio(f: &PeriodicField, variant: GnVariant, pad: usize) -> Result<Option<f64>> {
    if f.dim() != variant.dim() {
        return config_err(format!("{} needs a {}-dimensional field", variant.id(), variant.dim()));
    }
    let l2 = f.l2_norm();
    if l2 == 0.0 {
        return Ok(None);
    }
    let d: Vec<f64> = (0..f.dim()).map(|a| f.derivative(a).l2_norm()).collect();
    if d.iter().any(|&x| x <= DEGENERATE * l2) {
        return Ok(None);
    }
    Ok(Some(match variant {
        GnVariant::L42 => f.lp_norm(4.0, pad) / (l2.sqrt() * (d[0] * d[1]).powf(0.25)),
        GnVariant::Lp2 { p } => {
            if !(2.0..=16.0).contains(&p) {
                return config_err(format!("Lp2 needs p in [2, 16], got {p}"));
            }
            f.lp_norm(p, pad) / (l2.powf(2.0 / p) * (d[0] * d[1]).powf(0.5 - 1.0 / p))
        }
        GnVariant::L43 => f.lp_norm(4.0, pad) / (l2 * d[0] * d[1] * d[2]).powf(0.25),
    }))
}

/// Ratio report of a Gagliardo–Nirenberg variant over `samples` fields.
pub fn check_aniso_gn(
    sampler: &FieldSampler,
    variant: GnVariant,
    shape: &[usize],
    samples: usize,
) -> Result<RatioReport> {
    if shape.len() != variant.dim() {
        return config_err(format!("{} needs a {}-dimensional grid", variant.id(), variant.dim()));
    }
    if !sampler.mean_zero {
        return config_err("Gagliardo-Nirenberg checks need mean-zero samples");
    }
    let p = match variant {
        GnVariant::Lp2 { p } => p,
        _ => 4.0,
    };
    run(&variant.id(), sampler.seed, samples, |i| {
        let f = sampler.sample(shape, i)?;
        gn_ratio(&f, variant, quadrature_pad(&f, p))
    })
}

/// Smallest padding for which the grid sum of `|f|^p` resolves every
/// frequency of `f^p`; exact for even integer `p`.
pub fn quadrature_pad(f: &PeriodicField, p: f64) -> usize {
    (0..f.dim())
        .map(|a| {
            let k = f.max_freq(a, 0.0) as f64;
            let n = f.shape[a] as f64;
            ((2.0 * p * k + 1.0) / n).ceil().max(1.0) as usize
        })
        .max()
        .unwrap_or(1)
        .min(16)
}

/// Product-law parameters, with the optional end-point variant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProductLaw {
    pub d: usize,
    pub s1: f64,
    pub s2: f64,
    /// Use the end-point form with `s1 = d/2` and this `ε`.
    pub endpoint_eps: Option<f64>,
}

impl ProductLaw {
    pub fn new(d: usize, s1: f64, s2: f64) -> Self {
        Self {
            d,
            s1,
            s2,
            endpoint_eps: None,
        }
    }

    fn validate(&self) -> Result<()> {
        let h = self.d as f64 / 2.0;
        if !(self.d == 2 || self.d == 3) {
            return config_err(format!("product law supports d = 2 or 3, got {}", self.d));
        }
        if let Some(eps) = self.endpoint_eps {
            if !(eps > 0.0) || (self.s2.abs() >= h) {
                return config_err("end-point product law needs eps > 0 and |s2| < d/2");
            }
            return Ok(());
        }
        if !(self.s1 > -h && self.s1 < h && self.s2 > -h && self.s2 < h) {
            return config_err(format!("need s1, s2 in (-d/2, d/2), got ({}, {})", self.s1, self.s2));
        }
        if !(self.s1 + self.s2 > 0.0) {
            return config_err(format!("need s1 + s2 > 0, got {}", self.s1 + self.s2));
        }
        Ok(())
    }

    pub fn id(&self) -> String {
        match self.endpoint_eps {
            Some(e) => format!("product_law_d{}_endpoint_s2{}_eps{}", self.d, self.s2, e),
            None => format!("product_law_d{}_s{}_{}", self.d, self.s1, self.s2),
        }
    }
}

/// `‖fg‖_{Ḣ^{s₁+s₂−d/2}} / (‖f‖_{Ḣ^{s₁}} ‖g‖_{Ḣ^{s₂}})`, or the end-point form.
pub fn product_law_ratio(f: &PeriodicField, g: &PeriodicField, law: &ProductLaw) -> Result<Option<f64>> {
    law.validate()?;
    if f.dim() != law.d || g.shape() != f.shape() {
        return config_err("fields must share a grid of the law's dimension");
    }
    let fg = f.product(g);
    let h = law.d as f64 / 2.0;
    let (lhs, rhs) = match law.endpoint_eps {
        None => (
            fg.hs_dot_norm(law.s1 + law.s2 - h),
            f.hs_dot_norm(law.s1) * g.hs_dot_norm(law.s2),
        ),
        Some(eps) => (
            fg.hs_dot_norm(law.s2),
            (f.hs_dot_norm(h - eps) * f.hs_dot_norm(h + eps)).sqrt() * g.hs_dot_norm(law.s2),
        ),
    };
    Ok(if rhs > 0.0 { Some(lhs / rhs) } else { None })
}

pub fn check_product_law(
    sampler: &FieldSampler,
    law: &ProductLaw,
    shape: &[usize],
    samples: usize,
) -> Result<RatioReport> {
    law.validate()?;
    if shape.len() != law.d {
        return config_err("grid dimension does not match the law");
    }
    run(&law.id(), sampler.seed, samples, |i| {
        let pair = sampler.sample_colocated(shape, 2 * i, 2)?;
        product_law_ratio(&pair[0], &pair[1], law)
    })
}

/// `‖Λ^s[(u·∇)B] − (u·∇)Λ^s B‖_{L²} / (‖∇u‖_{H^s} ‖B‖_{H^s})`.
pub fn commutator_ratio(u: &[PeriodicField], b: &PeriodicField, s: f64) -> Result<Option<f64>> {
    let d = b.dim();
    if u.len() != d || u.iter().any(|c| c.shape() != b.shape()) {
        return config_err("u needs one component per dimension on the grid of B");
    }
    if !(s > d as f64 / 2.0) {
        return config_err(format!("commutator estimate needs s > d/2, got s = {s}, d = {d}"));
    }
    let grad_b: Vec<PeriodicField> = (0..d).map(|a| b.derivative(a)).collect();
    let lam_b = b.fractional(s);
    let grad_lam_b: Vec<PeriodicField> = (0..d).map(|a| lam_b.derivative(a)).collect();
    let transport = PeriodicField::sum_of_products(
        &u.iter().zip(&grad_b).collect::<Vec<_>>(),
    );
    let transport_lam = PeriodicField::sum_of_products(
        &u.iter().zip(&grad_lam_b).collect::<Vec<_>>(),
    );
    let comm = transport.fractional(s).sub(&transport_lam);
    let grad_u: f64 = u
        .iter()
        .flat_map(|c| (0..d).map(move |a| c.derivative(a).hs_norm(s).powi(2)))
        .sum::<f64>()
        .sqrt();
    let rhs = grad_u * b.hs_norm(s);
    Ok(if rhs > 0.0 { Some(comm.l2_norm() / rhs) } else { None })
}

pub fn check_commutator(
    sampler: &FieldSampler,
    s: f64,
    shape: &[usize],
    samples: usize,
) -> Result<RatioReport> {
    let d = shape.len();
    if !(s > d as f64 / 2.0) {
        return config_err(format!("commutator estimate needs s > d/2, got s = {s}, d = {d}"));
    }
    let stride = d as u64 + 1;
    run(&format!("commutator_d{d}_s{s}"), sampler.seed, samples, |i| {
        let mut u = sampler.sample_colocated(shape, stride * i, d + 1)?;
        let b = u.pop().expect("d + 1 fields");
        commutator_ratio(&u, &b, s)
    })
}

/// Which half of the vertical Bernstein lemma to test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BernsteinCase {
    /// Support in `|ξ₃| ≤ 2^ℓ radius`:
    /// `‖∂₃^α a‖_{L^p_h L^{q₁}_v} ≲ 2^{ℓ(α + 1/q₂ − 1/q₁)} ‖a‖_{L^p_h L^{q₂}_v}`.
    Ball { alpha: u32, q1: f64, q2: f64, radius: f64 },
    /// Support in `2^ℓ[3/4, 8/3]`:
    /// `‖a‖_{L^p_h L^{q}_v} ≲ 2^{−ℓN} ‖∂₃^N a‖_{L^p_h L^{q}_v}`.
    Ring { n: u32, q: f64 },
}

fn inv(q: f64) -> f64 {
    if q.is_infinite() {
        0.0
    } else {
        1.0 / q
    }
}

const SUPPORT_TOL: f64 = 1e-12;

/// Bernstein ratio for one field, `None` when the field violates the
/// support hypothesis.
pub fn bernstein_ratio(a: &PeriodicField, ell: i32, p_h: f64, case: BernsteinCase, pad: usize) -> Result<Option<f64>> {
    if a.dim() != 3 {
        return config_err("the vertical Bernstein inequality needs d = 3");
    }
    let scale = 2f64.powi(ell);
    match case {
        BernsteinCase::Ball { alpha, q1, q2, radius } => {
            if !(q1 >= q2 && q2 >= 1.0) {
                return config_err(format!("need 1 <= q2 <= q1, got q1 = {q1}, q2 = {q2}"));
            }
            if a.max_freq(2, SUPPORT_TOL) as f64 > scale * radius {
                return Ok(None);
            }
            let lhs = a.derivative_n(2, alpha).mixed_norm_hv(p_h, q1, pad);
            let rhs = scale.powf(alpha as f64 + inv(q2) - inv(q1)) * a.mixed_norm_hv(p_h, q2, pad);
            Ok(if rhs > 0.0 { Some(lhs / rhs) } else { None })
        }
        BernsteinCase::Ring { n, q } => {
            let lo = a.min_freq(2, SUPPORT_TOL) as f64;
            let hi = a.max_freq(2, SUPPORT_TOL) as f64;
            if lo < 0.75 * scale || hi > 8.0 / 3.0 * scale {
                return Ok(None);
            }
            let lhs = a.mixed_norm_hv(p_h, q, pad);
            let rhs = scale.powi(-(n as i32)) * a.derivative_n(2, n).mixed_norm_hv(p_h, q, pad);
            Ok(if rhs > 0.0 { Some(lhs / rhs) } else { None })
        }
    }
}

/// Bernstein ratios at block scale `2^ℓ`; the sampler band is replaced by the
/// matching vertical ball or ring.
pub fn check_bernstein(
    sampler: &FieldSampler,
    ell: i32,
    p_h: f64,
    case: BernsteinCase,
    shape: &[usize],
    samples: usize,
) -> Result<RatioReport> {
    if shape.len() != 3 {
        return config_err("the vertical Bernstein inequality needs a 3-dimensional grid");
    }
    let horizontal_max = match sampler.band {
        Band::VerticalBall { horizontal_max, .. } | Band::VerticalRing { horizontal_max, .. } => horizontal_max,
        Band::Radial { hi, .. } => hi,
    };
    let band = match case {
        BernsteinCase::Ball { radius, .. } => Band::VerticalBall {
            ell,
            radius,
            horizontal_max,
        },
        BernsteinCase::Ring { .. } => Band::VerticalRing { ell, horizontal_max },
    };
    let s = FieldSampler { band, ..*sampler };
    let q_max = match case {
        BernsteinCase::Ball { q1, .. } => q1,
        BernsteinCase::Ring { q, .. } => q,
    };
    let pad = if q_max.is_finite() { (q_max.ceil() as usize).clamp(2, 8) } else { 4 };
    let id = match case {
        BernsteinCase::Ball { alpha, q1, q2, .. } => format!("bernstein_ball_l{ell}_a{alpha}_q{q1}_{q2}"),
        BernsteinCase::Ring { n, q } => format!("bernstein_ring_l{ell}_n{n}_q{q}"),
    };
    run(&id, sampler.seed, samples, |i| {
        bernstein_ratio(&s.sample(shape, i)?, ell, p_h, case, pad)
    })
}

/// One inequality family of a band-comparison run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "suite", rename_all = "snake_case", deny_unknown_fields)]
pub enum Suite {
    Gn { variant: GnVariant },
    ProductLaw { law: ProductLaw },
    Commutator { d: usize, s: f64 },
}

impl Suite {
    pub fn id(&self) -> String {
        match self {
            Suite::Gn { variant } => variant.id(),
            Suite::ProductLaw { law } => law.id(),
            Suite::Commutator { d, s } => format!("commutator_d{d}_s{s}"),
        }
    }

    fn dim(&self) -> usize {
        match self {
            Suite::Gn { variant } => variant.dim(),
            Suite::ProductLaw { law } => law.d,
            Suite::Commutator { d, .. } => *d,
        }
    }
}

/// Settings of a band-comparison run over several suites.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SuiteConfig {
    pub seed: u64,
    pub samples: usize,
    /// Points per axis of planar grids.
    pub grid2: usize,
    /// Points per axis of spatial grids.
    pub grid3: usize,
    pub low_band: [f64; 2],
    pub high_band: [f64; 2],
    /// Largest accepted `max/min − 1` of the two fitted constants.
    pub max_variation: f64,
    pub envelope: Envelope,
    pub suites: Vec<Suite>,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            seed: 2024,
            samples: 100,
            grid2: 64,
            grid3: 48,
            low_band: [1.0, 4.0],
            high_band: [4.0, 16.0],
            max_variation: 0.2,
            envelope: Envelope::Packets { count: 3, width: 0.6 },
            suites: vec![
                Suite::Gn { variant: GnVariant::L42 },
                Suite::Gn { variant: GnVariant::Lp2 { p: 8.0 } },
                Suite::Gn { variant: GnVariant::L43 },
                Suite::ProductLaw { law: ProductLaw::new(2, 0.5, 0.5) },
                Suite::Commutator { d: 3, s: 2.0 },
            ],
        }
    }
}

/// Reports of one suite in both bands.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteOutcome {
    pub id: String,
    pub low: RatioReport,
    pub high: RatioReport,
    pub variation: f64,
    pub bounded: bool,
    pub stable: bool,
}

impl SuiteOutcome {
    pub fn passed(&self) -> bool {
        self.bounded && self.stable
    }
}

fn run_one(suite: &Suite, sampler: &FieldSampler, shape: &[usize], samples: usize) -> Result<RatioReport> {
    match suite {
        Suite::Gn { variant } => check_aniso_gn(sampler, *variant, shape, samples),
        Suite::ProductLaw { law } => check_product_law(sampler, law, shape, samples),
        Suite::Commutator { s, .. } => check_commutator(sampler, *s, shape, samples),
    }
}

/// Runs every suite in the low and the high band.
pub fn run_suites(cfg: &SuiteConfig) -> Result<Vec<SuiteOutcome>> {
    if cfg.samples == 0 {
        return config_err("need at least one sample");
    }
    let band = |b: [f64; 2]| -> Result<Band> {
        if !(b[0] > 0.0 && b[1] > b[0]) {
            return config_err(format!("invalid band {b:?}"));
        }
        Ok(Band::Radial { lo: b[0], hi: b[1] })
    };
    let (lo, hi) = (band(cfg.low_band)?, band(cfg.high_band)?);
    cfg.suites
        .iter()
        .map(|suite| {
            let shape = match suite.dim() {
                2 => vec![cfg.grid2; 2],
                3 => vec![cfg.grid3; 3],
                d => return config_err(format!("unsupported dimension {d}")),
            };
            let sampler = |b| FieldSampler {
                seed: cfg.seed,
                band: b,
                envelope: cfg.envelope,
                mean_zero: true,
            };
            let low = run_one(suite, &sampler(lo), &shape, cfg.samples)?;
            let high = run_one(suite, &sampler(hi), &shape, cfg.samples)?;
            let variation = band_variation(&[&low, &high]);
            let bounded = low.bounded() && high.bounded();
            Ok(SuiteOutcome {
                id: suite.id(),
                stable: bounded && variation <= cfg.max_variation,
                bounded,
                variation,
                low,
                high,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn worked_l42_example() {
        let f = PeriodicField::from_fn(&[16, 16], |x| x[0].sin() * x[1].sin()).unwrap();
        let r = gn_ratio(&f, GnVariant::L42, 2).unwrap().unwrap();
        let expected = (3.0 * PI / 4.0).sqrt() / PI;
        assert!((r - expected).abs() < 1e-12);
    }

    #[test]
    fn degenerate_field_rejected() {
        let f = PeriodicField::from_fn(&[16, 16], |x| x[1].sin()).unwrap();
        assert_eq!(gn_ratio(&f, GnVariant::L42, 2).unwrap(), None);
    }

    #[test]
    fn colocated_samples_only_shift_phase() {
        let s = FieldSampler::new(4, Band::Radial { lo: 4.0, hi: 16.0 });
        let pair = s.sample_colocated(&[32, 32], 6, 2).unwrap();
        assert_eq!(pair[0], s.sample(&[32, 32], 6).unwrap());
        let free = s.sample(&[32, 32], 7).unwrap();
        assert_ne!(pair[1], free);
        for (a, b) in pair[1].coeffs.iter().zip(&free.coeffs) {
            assert!((a.norm() - b.norm()).abs() < 1e-12);
        }
    }

    #[test]
    fn sampler_is_reproducible_real_and_band_limited() {
        let band = Band::Radial { lo: 4.0, hi: 16.0 };
        for s in [FieldSampler::new(9, band), FieldSampler::spread(9, band)] {
            let a = s.sample(&[64, 64], 3).unwrap();
            let b = s.sample(&[64, 64], 3).unwrap();
            assert_eq!(a, b);
            assert!(a.l2_norm() > 0.0);
            for i in 0..a.len() {
                let m = a.freq(i);
                let c = a.coeffs[i];
                assert!((a.coeff(m.map(|x| -x)) - c.conj()).norm() < 1e-15);
                if c.norm() > 0.0 {
                    assert!(band.contains(m.map(|x| x as f64)));
                }
            }
        }
    }

    #[test]
    fn padded_product_is_exact() {
        let f = PeriodicField::from_fn(&[8, 8], |x| (3.0 * x[0]).cos()).unwrap();
        let g = PeriodicField::from_fn(&[8, 8], |x| (3.0 * x[0]).cos() + x[1].sin()).unwrap();
        let fg = f.product(&g);
        assert!((fg.coeff([6, 0, 0]).re - 0.25).abs() < 1e-15);
        assert!((fg.coeff([0, 0, 0]).re - 0.5).abs() < 1e-15);
    }
}
