//! Littlewood–Paley dyadic operators, full and vertical, and the vertical
//! Bony decomposition of products.
//!
//! The profiles are fixed: `χ` equals 1 on `[0, 3/4]`, vanishes on
//! `[4/3, ∞)` and interpolates with the exponential smooth step in between;
//! `φ(τ) = χ(τ/2) − χ(τ)`. With this choice `φ` is supported in
//! `[3/4, 8/3]`, `χ(τ) + Σ_{j≥0} φ(2^{-j}τ) = 1` and `Σ_{j∈Z} φ(2^{-j}τ) = 1`
//! hold by telescoping.
//!
//! On a finite grid only finitely many blocks are nonzero; the block range
//! runs from two indices below the fundamental wavenumber to two above the
//! Nyquist wavenumber.

use std::collections::BTreeMap;
use std::ops::RangeInclusive;

use num_complex::Complex64;

use crate::error::Result;
use crate::field::{Grid3, RealField3, SpectralField3};

/// Identifier of the profile pair, bumped whenever `χ` changes.
pub const PROFILE_VERSION: &str = "exp-smoothstep-v1";

const CHI_FLAT: f64 = 0.75;
const CHI_EDGE: f64 = 4.0 / 3.0;

fn smooth_edge(s: f64) -> f64 {
    if s <= 0.0 {
        0.0
    } else {
        (-1.0 / s).exp()
    }
}

/// Low-frequency cutoff profile `χ`, evaluated at `|τ|`.
pub fn chi(tau: f64) -> f64 {
    let tau = tau.abs();
    if tau <= CHI_FLAT {
        1.0
    } else if tau >= CHI_EDGE {
        0.0
    } else {
        let s = (CHI_EDGE - tau) / (CHI_EDGE - CHI_FLAT);
        let a = smooth_edge(s);
        a / (a + smooth_edge(1.0 - s))
    }
}

/// Annulus profile `φ(τ) = χ(τ/2) − χ(τ)`, supported in `[3/4, 8/3]`.
pub fn phi(tau: f64) -> f64 {
    let tau = tau.abs();
    chi(0.5 * tau) - chi(tau)
}

/// Which frequency magnitude the dyadic operators act on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    /// `|ξ|`, the operators `Δ_j`, `S_j`.
    Full,
    /// `|ξ₃|`, the operators `Δ^v_j`, `S^v_j`.
    Vertical,
}

/// Dyadic block ranges for one grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DyadicSystem {
    vertical: (i32, i32),
    full: (i32, i32),
}

impl DyadicSystem {
    pub fn for_grid(grid: &Grid3) -> Self {
        let range = |lo: f64, hi: f64| (lo.log2().floor() as i32 - 2, hi.log2().ceil() as i32 + 2);
        let kmin = (0..3).map(|a| grid.fundamental(a)).fold(f64::INFINITY, f64::min);
        let kmax = (0..3)
            .map(|a| grid.nyquist(a).powi(2))
            .sum::<f64>()
            .sqrt();
        Self {
            vertical: range(grid.fundamental(2), grid.nyquist(2)),
            full: range(kmin, kmax),
        }
    }

    /// Indices `j` for which some grid mode can sit in block `j`.
    pub fn blocks(&self, direction: Direction) -> RangeInclusive<i32> {
        let (lo, hi) = match direction {
            Direction::Full => self.full,
            Direction::Vertical => self.vertical,
        };
        lo..=hi
    }

    pub fn vertical_blocks(&self) -> RangeInclusive<i32> {
        self.blocks(Direction::Vertical)
    }

    pub fn j_min(&self) -> i32 {
        self.vertical.0
    }

    pub fn j_max(&self) -> i32 {
        self.vertical.1
    }
}

fn magnitude(direction: Direction, k: [f64; 3]) -> f64 {
    match direction {
        Direction::Vertical => k[2].abs(),
        Direction::Full => (k[0] * k[0] + k[1] * k[1] + k[2] * k[2]).sqrt(),
    }
}

#[inline]
fn dyadic(j: i32) -> f64 {
    2f64.powi(-j)
}

/// `Δ_j f` (full) or `Δ^v_j f` (vertical).
pub fn block(f: &SpectralField3, j: i32, direction: Direction) -> SpectralField3 {
    let s = dyadic(j);
    f.apply_real_symbol(|k| phi(s * magnitude(direction, k)))
}

/// `S_j f` (full) or `S^v_j f` (vertical).
pub fn lowpass(f: &SpectralField3, j: i32, direction: Direction) -> SpectralField3 {
    let s = dyadic(j);
    f.apply_real_symbol(|k| chi(s * magnitude(direction, k)))
}

/// `Δ^v_j f`: multiplies coefficients by `φ(2^{-j}|ξ₃|)`.
pub fn vertical_block(f: &SpectralField3, j: i32, _sys: &DyadicSystem) -> SpectralField3 {
    block(f, j, Direction::Vertical)
}

/// `S^v_j f`: multiplies coefficients by `χ(2^{-j}|ξ₃|)`.
pub fn vertical_lowpass(f: &SpectralField3, j: i32, _sys: &DyadicSystem) -> SpectralField3 {
    lowpass(f, j, Direction::Vertical)
}

pub fn full_block(f: &SpectralField3, j: i32, _sys: &DyadicSystem) -> SpectralField3 {
    block(f, j, Direction::Full)
}

pub fn full_lowpass(f: &SpectralField3, j: i32, _sys: &DyadicSystem) -> SpectralField3 {
    lowpass(f, j, Direction::Full)
}

/// Homogeneous dyadic decomposition of one field.
#[derive(Debug, Clone)]
pub struct BlockDecomposition {
    pub direction: Direction,
    pub blocks: BTreeMap<i32, SpectralField3>,
    /// The part no block sees: modes with zero magnitude (`ξ₃ = 0` when
    /// vertical, `ξ = 0` when full).
    pub remainder: SpectralField3,
}

impl BlockDecomposition {
    pub fn new(f: &SpectralField3, direction: Direction, sys: &DyadicSystem) -> Self {
        let blocks = sys
            .blocks(direction)
            .map(|j| (j, block(f, j, direction)))
            .collect();
        let remainder = f.apply_real_symbol(|k| {
            if magnitude(direction, k) == 0.0 {
                1.0
            } else {
                0.0
            }
        });
        Self {
            direction,
            blocks,
            remainder,
        }
    }

    /// Sum of all blocks plus the remainder.
    pub fn reconstruct(&self) -> SpectralField3 {
        let mut out = self.remainder.clone();
        for b in self.blocks.values() {
            out += b;
        }
        out
    }
}

/// Inhomogeneous decomposition `f = S_0 f + Σ_{j≥0} Δ_j f`.
pub fn inhomogeneous_decomposition(
    f: &SpectralField3,
    direction: Direction,
    sys: &DyadicSystem,
) -> (SpectralField3, BTreeMap<i32, SpectralField3>) {
    let low = lowpass(f, 0, direction);
    let hi = *sys.blocks(direction).end();
    let blocks = (0..=hi.max(0)).map(|j| (j, block(f, j, direction))).collect();
    (low, blocks)
}

/// `‖Δ^v_j (m f)‖_{L²}` for every block `j`, where `m` is a spectral multiplier
/// (use `|_| 1.0` for the plain blocks, `|k| k[0]` for `∂₁`). Computed from the
/// coefficients directly through Parseval.
pub fn vertical_block_norms(
    components: &[SpectralField3],
    sys: &DyadicSystem,
    multiplier: impl Fn([f64; 3]) -> f64,
) -> BTreeMap<i32, f64> {
    let grid = components[0].grid;
    let ks = grid.wavenumbers();
    let mut sums: BTreeMap<i32, f64> = sys.vertical_blocks().map(|j| (j, 0.0)).collect();
    for (idx, k) in ks.iter().enumerate() {
        let k3 = k[2].abs();
        if k3 == 0.0 {
            continue;
        }
        let energy: f64 = components.iter().map(|c| c.coeffs[idx].norm_sqr()).sum();
        if energy == 0.0 {
            continue;
        }
        let m = multiplier(*k);
        let weighted = energy * m * m;
        // φ(2^{-j} k3) ≠ 0 needs 3/4 < 2^{-j} k3 < 8/3: at most two blocks.
        let j_hi = (k3 / 0.75).log2().ceil() as i32;
        for j in (j_hi - 2)..=j_hi {
            let w = phi(dyadic(j) * k3);
            if w != 0.0 {
                *sums.entry(j).or_insert(0.0) += w * w * weighted;
            }
        }
    }
    let vol = grid.volume();
    sums.into_iter().map(|(j, s)| (j, (s * vol).sqrt())).collect()
}

/// The three pieces of the vertical Bony decomposition of `f g`.
#[derive(Debug, Clone)]
pub struct BonySplit {
    /// `Σ_k Δ^v_k f · S^v_{k-1} g`.
    pub low_high: SpectralField3,
    /// `Σ_k S^v_{k+2} f · Δ^v_k g`.
    pub high_low: SpectralField3,
    /// Product of the vertical means (`ξ₃ = 0` parts); zero when either
    /// factor is vertically mean-free.
    pub mean_mean: SpectralField3,
}

impl BonySplit {
    pub fn total(&self) -> SpectralField3 {
        &(&self.low_high + &self.high_low) + &self.mean_mean
    }
}

fn pointwise_product_acc(acc: &mut [f64], a: &RealField3, b: &RealField3) {
    for ((s, x), y) in acc.iter_mut().zip(&a.data).zip(&b.data) {
        *s += x * y;
    }
}

/// Vertical Bony decomposition of `f g`. Products are formed pointwise on the
/// grid, so the pieces add up to the grid product of `f` and `g`.
pub fn bony_vertical_split(
    f: &SpectralField3,
    g: &SpectralField3,
    sys: &DyadicSystem,
) -> Result<BonySplit> {
    f.grid.ensure_same(&g.grid)?;
    let grid = f.grid;
    let n = grid.num_points();
    let mut low_high = vec![0.0; n];
    let mut high_low = vec![0.0; n];
    for k in sys.vertical_blocks() {
        let df = vertical_block(f, k, sys);
        if df.max_coeff() > 0.0 {
            let sg = vertical_lowpass(g, k - 1, sys);
            pointwise_product_acc(&mut low_high, &df.to_real(), &sg.to_real());
        }
        let dg = vertical_block(g, k, sys);
        if dg.max_coeff() > 0.0 {
            let sf = vertical_lowpass(f, k + 2, sys);
            pointwise_product_acc(&mut high_low, &sf.to_real(), &dg.to_real());
        }
    }
    let vertical_mean = |h: &SpectralField3| {
        h.apply_real_symbol(|k| if k[2] == 0.0 { 1.0 } else { 0.0 })
            .to_real()
    };
    let mut mean_mean = vec![0.0; n];
    pointwise_product_acc(&mut mean_mean, &vertical_mean(f), &vertical_mean(g));
    let wrap = |data: Vec<f64>| RealField3 { grid, data }.to_spectral();
    Ok(BonySplit {
        low_high: wrap(low_high),
        high_low: wrap(high_low),
        mean_mean: wrap(mean_mean),
    })
}

/// Grid product of two fields (pointwise in physical space).
pub fn grid_product(f: &SpectralField3, g: &SpectralField3) -> SpectralField3 {
    let a = f.to_real();
    let b = g.to_real();
    RealField3 {
        grid: f.grid,
        data: a.data.iter().zip(&b.data).map(|(x, y)| x * y).collect(),
    }
    .to_spectral()
}

/// Relative size of the largest coefficient, used by tests and the CLI check.
pub fn relative_defect(a: &SpectralField3, b: &SpectralField3) -> f64 {
    let diff: Vec<Complex64> = a.coeffs.iter().zip(&b.coeffs).map(|(x, y)| x - y).collect();
    let num = diff.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    let den = b.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    if den == 0.0 {
        num
    } else {
        num / den
    }
}

/// Outcome of the dyadic self-check on one grid.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct LpCheckReport {
    /// Largest `|Σ_j φ(2^{-j}τ) − 1|` over full and vertical grid magnitudes.
    pub partition_defect: f64,
    /// Largest `|χ(τ) + Σ_{j≥0} φ(2^{-j}τ) − 1|` over grid magnitudes.
    pub inhomogeneous_defect: f64,
    /// Largest relative defect of `Σ_j Δ^v_j f + remainder` against `f`.
    pub reconstruction_defect: f64,
    /// Largest relative defect of the Bony pieces against the grid product.
    pub bony_defect: f64,
    pub pairs: usize,
    pub seed: u64,
}

pub const PARTITION_TOLERANCE: f64 = 1e-12;
pub const RECONSTRUCTION_TOLERANCE: f64 = 1e-9;

impl LpCheckReport {
    pub fn passed(&self) -> bool {
        self.partition_defect <= PARTITION_TOLERANCE
            && self.inhomogeneous_defect <= PARTITION_TOLERANCE
            && self.reconstruction_defect <= RECONSTRUCTION_TOLERANCE
            && self.bony_defect <= RECONSTRUCTION_TOLERANCE
    }
}

/// Checks the partitions of unity at every grid magnitude and the vertical
/// reconstruction and Bony identities on `pairs` random field pairs.
pub fn lp_check(grid: Grid3, pairs: usize, seed: u64) -> Result<LpCheckReport> {
    use rayon::prelude::*;
    let sys = DyadicSystem::for_grid(&grid);
    let mut partition_defect = 0.0f64;
    let mut inhomogeneous_defect = 0.0f64;
    for k in grid.wavenumbers() {
        for direction in [Direction::Full, Direction::Vertical] {
            let tau = magnitude(direction, k);
            if tau > 0.0 {
                let s: f64 = sys.blocks(direction).map(|j| phi(dyadic(j) * tau)).sum();
                partition_defect = partition_defect.max((s - 1.0).abs());
            }
            let hi = *sys.blocks(direction).end();
            let s: f64 = chi(tau) + (0..=hi.max(0)).map(|j| phi(dyadic(j) * tau)).sum::<f64>();
            inhomogeneous_defect = inhomogeneous_defect.max((s - 1.0).abs());
        }
    }
    let k_hi = (grid.n().into_iter().min().unwrap_or(8) / 2 - 1) as f64;
    let defects: Vec<(f64, f64)> = (0..pairs as u64)
        .into_par_iter()
        .map(|i| -> Result<(f64, f64)> {
            let base = seed.wrapping_add(2 * i);
            let f = crate::initial::random_scalar(grid, base, 0.0, k_hi)?;
            let g = crate::initial::random_scalar(grid, base + 1, 0.0, k_hi)?;
            let recon = BlockDecomposition::new(&f, Direction::Vertical, &sys).reconstruct();
            let bony = bony_vertical_split(&f, &g, &sys)?.total();
            Ok((relative_defect(&recon, &f), relative_defect(&bony, &grid_product(&f, &g))))
        })
        .collect::<Result<_>>()?;
    Ok(LpCheckReport {
        partition_defect,
        inhomogeneous_defect,
        reconstruction_defect: defects.iter().map(|d| d.0).fold(0.0, f64::max),
        bony_defect: defects.iter().map(|d| d.1).fold(0.0, f64::max),
        pairs,
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{dealias, VectorField3};

    fn grid() -> Grid3 {
        Grid3::cubic(16).unwrap()
    }

    #[test]
    fn profile_supports() {
        for i in 0..=4000 {
            let tau = i as f64 * 1e-3;
            let p = phi(tau);
            assert!((0.0..=1.0).contains(&p));
            if !(0.75..=8.0 / 3.0).contains(&tau) {
                assert_eq!(p, 0.0, "phi({tau}) = {p}");
            }
            if tau >= 4.0 / 3.0 {
                assert_eq!(chi(tau), 0.0);
            }
        }
        assert!(chi(1.0) > 0.0 && chi(1.0) < 1.0);
    }

    #[test]
    fn partition_identities_on_grid_frequencies() {
        let g = Grid3::new([32, 32, 64], [2.0 * std::f64::consts::PI; 3]).unwrap();
        let sys = DyadicSystem::for_grid(&g);
        for m in 0..=32 {
            let tau = m as f64;
            let inhom: f64 = chi(tau) + (0..=sys.j_max()).map(|j| phi(tau / 2f64.powi(j))).sum::<f64>();
            assert!((inhom - 1.0).abs() < 1e-12, "tau={tau}");
            if m >= 1 {
                let hom: f64 = sys.vertical_blocks().map(|j| phi(tau / 2f64.powi(j))).sum();
                assert!((hom - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn horizontal_only_field_has_no_vertical_blocks() {
        let g = grid();
        let sys = DyadicSystem::for_grid(&g);
        let f = RealField3::from_fn(g, |x, y, _| x.sin() * (2.0 * y).cos()).to_spectral();
        for j in sys.vertical_blocks() {
            assert_eq!(vertical_block(&f, j, &sys).max_coeff(), 0.0);
        }
    }

    #[test]
    fn sin4_lives_in_blocks_one_and_two() {
        let g = grid();
        let sys = DyadicSystem::for_grid(&g);
        let f = RealField3::from_fn(g, |x, _, z| x.cos() * (4.0 * z).sin()).to_spectral();
        for j in sys.vertical_blocks() {
            let nz = vertical_block(&f, j, &sys).max_coeff() > 1e-12;
            assert_eq!(nz, j == 1 || j == 2, "block {j}");
        }
    }

    #[test]
    fn lowpass_limits() {
        let g = grid();
        let sys = DyadicSystem::for_grid(&g);
        let f = RealField3::from_fn(g, |x, _, z| x.cos() * z.sin() + (5.0 * z).cos()).to_spectral();
        let top = (g.nyquist(2).log2().floor() as i32) + 1;
        assert_eq!(vertical_lowpass(&f, top, &sys), f);
        let mean_free_low = vertical_lowpass(&f, -10, &sys);
        assert!(mean_free_low.max_coeff() < 1e-15);
        let single = RealField3::from_fn(g, |_, _, z| z.cos()).to_spectral();
        let s0 = vertical_lowpass(&single, 0, &sys);
        let expected = single.scale(chi(1.0));
        assert!(relative_defect(&s0, &expected) < 1e-15);
    }

    #[test]
    fn annuli_two_apart_are_orthogonal() {
        let g = grid();
        let sys = DyadicSystem::for_grid(&g);
        let f = RealField3::from_fn(g, |x, y, z| (x + 2.0 * z).sin() + (y - 5.0 * z).cos() + (3.0 * z).sin())
            .to_spectral();
        for j in sys.vertical_blocks() {
            for k in sys.vertical_blocks() {
                if (j - k).abs() >= 2 {
                    let both = vertical_block(&vertical_block(&f, j, &sys), k, &sys);
                    assert_eq!(both.max_coeff(), 0.0);
                }
            }
        }
    }

    #[test]
    fn full_decomposition_reconstructs() {
        let g = grid();
        let sys = DyadicSystem::for_grid(&g);
        let f = RealField3::from_fn(g, |x, y, z| 1.0 + (x + 2.0 * z).sin() * (3.0 * y).cos())
            .to_spectral();
        let dec = BlockDecomposition::new(&f, Direction::Full, &sys);
        assert!(relative_defect(&dec.reconstruct(), &f) < 1e-12);
        let (low, blocks) = inhomogeneous_decomposition(&f, Direction::Full, &sys);
        let mut sum = low;
        for b in blocks.values() {
            sum += b;
        }
        assert!(relative_defect(&sum, &f) < 1e-12);
    }

    #[test]
    fn block_norms_match_fields() {
        let g = grid();
        let sys = DyadicSystem::for_grid(&g);
        let f = RealField3::from_fn(g, |x, y, z| (x + 2.0 * z).sin() + (y - 5.0 * z).cos()).to_spectral();
        let v = VectorField3::new(f.clone(), f.scale(0.5), SpectralField3::zeros(g)).unwrap();
        let norms = vertical_block_norms(&v.components, &sys, |k| k[0]);
        for j in sys.vertical_blocks() {
            let b1 = vertical_block(&f.derivative(0), j, &sys).l2_norm_sq();
            let expected = (b1 * 1.25).sqrt();
            assert!((norms[&j] - expected).abs() < 1e-12 * expected.max(1.0));
        }
    }

    #[test]
    fn bony_with_constant_factor() {
        let g = grid();
        let sys = DyadicSystem::for_grid(&g);
        let f = RealField3::from_fn(g, |x, _, z| x.cos() * (3.0 * z).sin()).to_spectral();
        let c = RealField3::from_fn(g, |_, _, _| 2.5).to_spectral();
        let split = bony_vertical_split(&f, &c, &sys).unwrap();
        assert!(split.high_low.max_coeff() < 1e-15);
        assert!(relative_defect(&split.low_high, &f.scale(2.5)) < 1e-12);
        assert!(relative_defect(&split.total(), &grid_product(&f, &c)) < 1e-12);
    }

    #[test]
    fn bony_square_reconstructs() {
        let g = grid();
        let sys = DyadicSystem::for_grid(&g);
        let f = RealField3::from_fn(g, |x, y, z| (x + z).sin() + 0.5 * (y - 2.0 * z).cos() + 0.2 * x.cos())
            .to_spectral();
        let split = bony_vertical_split(&f, &f, &sys).unwrap();
        let exact = RealField3::from_fn(g, |x, y, z| {
            let v = (x + z).sin() + 0.5 * (y - 2.0 * z).cos() + 0.2 * x.cos();
            v * v
        })
        .to_spectral();
        assert!(relative_defect(&dealias(&split.total()), &dealias(&exact)) < 1e-9);
    }

    #[test]
    fn bony_rejects_grid_mismatch() {
        let a = SpectralField3::zeros(Grid3::cubic(8).unwrap());
        let b = SpectralField3::zeros(Grid3::cubic(16).unwrap());
        assert!(bony_vertical_split(&a, &b, &DyadicSystem::for_grid(&a.grid)).is_err());
    }
}
