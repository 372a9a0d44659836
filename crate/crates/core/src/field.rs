//! Periodic-box grids and Fourier-side scalar and vector fields.
//!
//! Everything in this crate lives on the periodic box
//! `[0, L1) x [0, L2) x [0, L3)` (default `2π` per side) instead of all of
//! `R^3`. Fourier integrals become sums over integer frequencies `m`, the
//! physical wavenumber along axis `i` being `2π m / L_i`.
//!
//! Coefficients use the Fourier-series convention
//! `f(x) = Σ_ξ c_ξ exp(i k(ξ)·x)`, so the squared `L²` norm over the box is
//! `V Σ |c_ξ|²` with `V` the box volume.

use std::f64::consts::PI;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::ops::{Add, AddAssign, Mul, Sub};
use std::path::Path;

use num_complex::Complex64;

use crate::dynamics::ViscosityTriple;
use crate::error::{config_err, Error, Result};
use crate::fft::{self, Direction};

/// Uniform periodic grid with `n[i]` points along a box side of length `len[i]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid3 {
    n: [usize; 3],
    len: [f64; 3],
}

impl Grid3 {
    pub fn new(n: [usize; 3], len: [f64; 3]) -> Result<Self> {
        for axis in 0..3 {
            if n[axis] < 8 || !n[axis].is_multiple_of(2) {
                return config_err(format!(
                    "axis {} has {} points; need an even count >= 8",
                    axis + 1,
                    n[axis]
                ));
            }
            if !(len[axis].is_finite() && len[axis] > 0.0) {
                return config_err(format!("axis {} has invalid length {}", axis + 1, len[axis]));
            }
        }
        Ok(Self { n, len })
    }

    /// `n³` grid on the `2π`-periodic box.
    pub fn cubic(n: usize) -> Result<Self> {
        Self::new([n; 3], [2.0 * PI; 3])
    }

    pub fn n(&self) -> [usize; 3] {
        self.n
    }

    pub fn len(&self) -> [f64; 3] {
        self.len
    }

    pub fn num_points(&self) -> usize {
        self.n[0] * self.n[1] * self.n[2]
    }

    pub fn volume(&self) -> f64 {
        self.len[0] * self.len[1] * self.len[2]
    }

    pub fn cell_volume(&self) -> f64 {
        self.volume() / self.num_points() as f64
    }

    pub fn spacing(&self, axis: usize) -> f64 {
        self.len[axis] / self.n[axis] as f64
    }

    /// Physical coordinate of grid index `idx` along `axis`.
    pub fn coord(&self, axis: usize, idx: usize) -> f64 {
        idx as f64 * self.spacing(axis)
    }

    /// Signed integer frequency of FFT index `idx` along `axis`.
    pub fn freq(&self, axis: usize, idx: usize) -> i64 {
        fft::signed_freq(idx, self.n[axis])
    }

    /// Physical wavenumber `2π m / L` of FFT index `idx` along `axis`.
    pub fn wavenumber(&self, axis: usize, idx: usize) -> f64 {
        self.freq(axis, idx) as f64 * 2.0 * PI / self.len[axis]
    }

    /// Wavenumber used for odd derivatives: zero at the Nyquist index so that
    /// derivatives of real fields stay real.
    pub fn derivative_wavenumber(&self, axis: usize, idx: usize) -> f64 {
        if idx == self.n[axis] / 2 {
            0.0
        } else {
            self.wavenumber(axis, idx)
        }
    }

    /// Smallest nonzero wavenumber magnitude along `axis`.
    pub fn fundamental(&self, axis: usize) -> f64 {
        2.0 * PI / self.len[axis]
    }

    /// Largest wavenumber magnitude along `axis` (the Nyquist wavenumber).
    pub fn nyquist(&self, axis: usize) -> f64 {
        (self.n[axis] / 2) as f64 * self.fundamental(axis)
    }

    /// Flat C-order index of `(i1, i2, i3)`.
    #[inline]
    pub fn index(&self, i1: usize, i2: usize, i3: usize) -> usize {
        (i1 * self.n[1] + i2) * self.n[2] + i3
    }

    /// Inverse of [`Grid3::index`].
    #[inline]
    pub fn unflatten(&self, flat: usize) -> [usize; 3] {
        let i3 = flat % self.n[2];
        let rest = flat / self.n[2];
        [rest / self.n[1], rest % self.n[1], i3]
    }

    /// Flat index of the integer frequency triple, if representable.
    pub fn index_of_freq(&self, m: [i64; 3]) -> Option<usize> {
        let i1 = fft::index_of_freq(m[0], self.n[0])?;
        let i2 = fft::index_of_freq(m[1], self.n[1])?;
        let i3 = fft::index_of_freq(m[2], self.n[2])?;
        Some(self.index(i1, i2, i3))
    }

    /// Flat index of the frequency `-ξ` for the mode stored at `flat`.
    pub fn conjugate_index(&self, flat: usize) -> usize {
        let [i1, i2, i3] = self.unflatten(flat);
        self.index(
            (self.n[0] - i1) % self.n[0],
            (self.n[1] - i2) % self.n[1],
            (self.n[2] - i3) % self.n[2],
        )
    }

    /// Per-axis 2/3-rule cutoff `floor(n/3)`.
    pub fn dealias_cutoff(&self, axis: usize) -> i64 {
        (self.n[axis] / 3) as i64
    }

    /// Wavenumber vectors of every mode in flat order.
    pub fn wavenumbers(&self) -> Vec<[f64; 3]> {
        let k: [Vec<f64>; 3] =
            std::array::from_fn(|a| (0..self.n[a]).map(|i| self.wavenumber(a, i)).collect());
        let mut out = Vec::with_capacity(self.num_points());
        for &k1 in &k[0] {
            for &k2 in &k[1] {
                for &k3 in &k[2] {
                    out.push([k1, k2, k3]);
                }
            }
        }
        out
    }

    pub(crate) fn ensure_same(&self, other: &Grid3) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::GridMismatch(format!("{self:?} vs {other:?}")))
        }
    }
}

/// Real-space samples of a scalar field on a [`Grid3`].
#[derive(Debug, Clone, PartialEq)]
pub struct RealField3 {
    pub grid: Grid3,
    pub data: Vec<f64>,
}

impl RealField3 {
    pub fn new(grid: Grid3, data: Vec<f64>) -> Result<Self> {
        if data.len() != grid.num_points() {
            return config_err(format!(
                "sample array has {} entries, grid expects {}",
                data.len(),
                grid.num_points()
            ));
        }
        Ok(Self { grid, data })
    }

    /// Samples `f(x1, x2, x3)` at every grid point.
    pub fn from_fn(grid: Grid3, f: impl Fn(f64, f64, f64) -> f64) -> Self {
        let [n1, n2, n3] = grid.n;
        let mut data = Vec::with_capacity(grid.num_points());
        for i1 in 0..n1 {
            let x1 = grid.coord(0, i1);
            for i2 in 0..n2 {
                let x2 = grid.coord(1, i2);
                for i3 in 0..n3 {
                    data.push(f(x1, x2, grid.coord(2, i3)));
                }
            }
        }
        Self { grid, data }
    }

    pub fn to_spectral(&self) -> SpectralField3 {
        let mut coeffs: Vec<Complex64> =
            self.data.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        fft::transform(&mut coeffs, &self.grid.n, Direction::Forward);
        SpectralField3 {
            grid: self.grid,
            coeffs,
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.abs()))
    }
}

/// Forward transform of real samples laid out in C order on `grid`.
pub fn forward_transform(real_samples: &[f64], grid: Grid3) -> Result<SpectralField3> {
    Ok(RealField3::new(grid, real_samples.to_vec())?.to_spectral())
}

/// Inverse transform; the imaginary residue of a Hermitian field is dropped.
pub fn inverse_transform(field: &SpectralField3) -> RealField3 {
    field.to_real()
}

/// Fourier coefficients of a scalar field, indexed by integer frequency triple.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField3 {
    pub grid: Grid3,
    pub coeffs: Vec<Complex64>,
}

impl SpectralField3 {
    pub fn zeros(grid: Grid3) -> Self {
        Self {
            grid,
            coeffs: vec![Complex64::new(0.0, 0.0); grid.num_points()],
        }
    }

    pub fn from_coeffs(grid: Grid3, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != grid.num_points() {
            return config_err("coefficient array does not match grid");
        }
        Ok(Self { grid, coeffs })
    }

    /// Coefficient at integer frequency `m`, zero when not representable.
    pub fn coeff(&self, m: [i64; 3]) -> Complex64 {
        self.grid
            .index_of_freq(m)
            .map_or(Complex64::new(0.0, 0.0), |i| self.coeffs[i])
    }

    /// Sets the coefficient at `m`; panics if `m` is not on the grid.
    pub fn set_coeff(&mut self, m: [i64; 3], value: Complex64) {
        let idx = self
            .grid
            .index_of_freq(m)
            .unwrap_or_else(|| panic!("frequency {m:?} not representable"));
        self.coeffs[idx] = value;
    }

    /// Sets the coefficient at `m` and its Hermitian partner at `-m`.
    pub fn set_real_mode(&mut self, m: [i64; 3], value: Complex64) {
        self.set_coeff(m, value);
        self.set_coeff([-m[0], -m[1], -m[2]], value.conj());
    }

    pub fn to_real(&self) -> RealField3 {
        let mut buf = self.coeffs.clone();
        fft::transform(&mut buf, &self.grid.n, Direction::Inverse);
        RealField3 {
            grid: self.grid,
            data: buf.into_iter().map(|c| c.re).collect(),
        }
    }

    /// Multiplies every coefficient by `symbol(flat_index, wavenumber)`.
    pub fn apply_symbol(&self, symbol: impl Fn(usize, [f64; 3]) -> Complex64) -> Self {
        let ks = self.grid.wavenumbers();
        let coeffs = self
            .coeffs
            .iter()
            .zip(ks.iter())
            .enumerate()
            .map(|(i, (c, k))| c * symbol(i, *k))
            .collect();
        Self {
            grid: self.grid,
            coeffs,
        }
    }

    /// Same as [`SpectralField3::apply_symbol`] for a real multiplier.
    pub fn apply_real_symbol(&self, symbol: impl Fn([f64; 3]) -> f64) -> Self {
        self.apply_symbol(|_, k| Complex64::new(symbol(k), 0.0))
    }

    /// Spectral derivative along `axis`.
    pub fn derivative(&self, axis: usize) -> Self {
        let grid = self.grid;
        let [n1, n2, n3] = grid.n;
        let mut out = self.clone();
        for i1 in 0..n1 {
            for i2 in 0..n2 {
                for i3 in 0..n3 {
                    let idx = grid.index(i1, i2, i3);
                    let i = [i1, i2, i3][axis];
                    let k = grid.derivative_wavenumber(axis, i);
                    out.coeffs[idx] *= Complex64::new(0.0, k);
                }
            }
        }
        out
    }

    /// Spectral inner product `(f, g)_{L²} = V Σ conj(f̂) ĝ`.
    pub fn inner(&self, other: &Self) -> Complex64 {
        let s: Complex64 = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a.conj() * b)
            .sum();
        s * self.grid.volume()
    }

    pub fn l2_norm_sq(&self) -> f64 {
        self.grid.volume() * self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>()
    }

    pub fn l2_norm(&self) -> f64 {
        self.l2_norm_sq().sqrt()
    }

    pub fn max_coeff(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.norm()))
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            grid: self.grid,
            coeffs: self.coeffs.iter().map(|c| c * s).collect(),
        }
    }

    /// Largest deviation from Hermitian symmetry `c(-ξ) = conj(c(ξ))`.
    pub fn hermitian_defect(&self) -> f64 {
        (0..self.coeffs.len())
            .map(|i| (self.coeffs[self.grid.conjugate_index(i)] - self.coeffs[i].conj()).norm())
            .fold(0.0, f64::max)
    }

    /// Zero-mode coefficient (the box mean).
    pub fn mean(&self) -> Complex64 {
        self.coeffs[0]
    }
}

impl Add<&SpectralField3> for &SpectralField3 {
    type Output = SpectralField3;
    fn add(self, rhs: &SpectralField3) -> SpectralField3 {
        debug_assert_eq!(self.grid, rhs.grid);
        SpectralField3 {
            grid: self.grid,
            coeffs: self.coeffs.iter().zip(&rhs.coeffs).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub<&SpectralField3> for &SpectralField3 {
    type Output = SpectralField3;
    fn sub(self, rhs: &SpectralField3) -> SpectralField3 {
        debug_assert_eq!(self.grid, rhs.grid);
        SpectralField3 {
            grid: self.grid,
            coeffs: self.coeffs.iter().zip(&rhs.coeffs).map(|(a, b)| a - b).collect(),
        }
    }
}

impl AddAssign<&SpectralField3> for SpectralField3 {
    fn add_assign(&mut self, rhs: &SpectralField3) {
        debug_assert_eq!(self.grid, rhs.grid);
        self.coeffs.iter_mut().zip(&rhs.coeffs).for_each(|(a, b)| *a += b);
    }
}

impl Mul<f64> for &SpectralField3 {
    type Output = SpectralField3;
    fn mul(self, rhs: f64) -> SpectralField3 {
        self.scale(rhs)
    }
}

/// Zeroes every coefficient with `|ξ_i| > floor(n_i/3)` on some axis.
pub fn dealias(f: &SpectralField3) -> SpectralField3 {
    let mut out = f.clone();
    dealias_in_place(&mut out);
    out
}

pub(crate) fn dealias_in_place(f: &mut SpectralField3) {
    let grid = f.grid;
    let [n1, n2, n3] = grid.n;
    let cut = [0, 1, 2].map(|a| grid.dealias_cutoff(a));
    let keep: [Vec<bool>; 3] = std::array::from_fn(|a| {
        (0..grid.n[a]).map(|i| grid.freq(a, i).abs() <= cut[a]).collect()
    });
    for i1 in 0..n1 {
        for i2 in 0..n2 {
            for i3 in 0..n3 {
                if !(keep[0][i1] && keep[1][i2] && keep[2][i3]) {
                    f.coeffs[grid.index(i1, i2, i3)] = Complex64::new(0.0, 0.0);
                }
            }
        }
    }
}

/// Three-component vector field on a shared grid.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField3 {
    pub components: [SpectralField3; 3],
}

impl VectorField3 {
    pub fn new(u1: SpectralField3, u2: SpectralField3, u3: SpectralField3) -> Result<Self> {
        u1.grid.ensure_same(&u2.grid)?;
        u1.grid.ensure_same(&u3.grid)?;
        Ok(Self {
            components: [u1, u2, u3],
        })
    }

    pub fn zeros(grid: Grid3) -> Self {
        Self {
            components: std::array::from_fn(|_| SpectralField3::zeros(grid)),
        }
    }

    /// Transforms three real-space component functions.
    pub fn from_fns(
        grid: Grid3,
        f1: impl Fn(f64, f64, f64) -> f64,
        f2: impl Fn(f64, f64, f64) -> f64,
        f3: impl Fn(f64, f64, f64) -> f64,
    ) -> Self {
        Self {
            components: [
                RealField3::from_fn(grid, f1).to_spectral(),
                RealField3::from_fn(grid, f2).to_spectral(),
                RealField3::from_fn(grid, f3).to_spectral(),
            ],
        }
    }

    pub fn grid(&self) -> Grid3 {
        self.components[0].grid
    }

    pub fn map(&self, f: impl Fn(&SpectralField3) -> SpectralField3) -> Self {
        Self {
            components: std::array::from_fn(|i| f(&self.components[i])),
        }
    }

    pub fn zip_with(
        &self,
        other: &Self,
        f: impl Fn(&SpectralField3, &SpectralField3) -> SpectralField3,
    ) -> Self {
        Self {
            components: std::array::from_fn(|i| f(&self.components[i], &other.components[i])),
        }
    }

    pub fn scale(&self, s: f64) -> Self {
        self.map(|c| c.scale(s))
    }

    /// `self + s * other`.
    pub fn axpy(&self, s: f64, other: &Self) -> Self {
        self.zip_with(other, |a, b| {
            let coeffs = a.coeffs.iter().zip(&b.coeffs).map(|(x, y)| x + y * s).collect();
            SpectralField3 {
                grid: a.grid,
                coeffs,
            }
        })
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn add(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn divergence(&self) -> SpectralField3 {
        let d1 = self.components[0].derivative(0);
        let d2 = self.components[1].derivative(1);
        let d3 = self.components[2].derivative(2);
        &(&d1 + &d2) + &d3
    }

    /// `max_ξ |Σ i k_i û^i(ξ)| / max_ξ |û(ξ)|`, zero for the zero field.
    pub fn divergence_defect(&self) -> f64 {
        let div = self.divergence();
        let scale = self
            .components
            .iter()
            .map(|c| c.max_coeff())
            .fold(0.0, f64::max);
        if scale == 0.0 {
            0.0
        } else {
            div.max_coeff() / scale
        }
    }

    pub fn inner(&self, other: &Self) -> f64 {
        (0..3)
            .map(|i| self.components[i].inner(&other.components[i]).re)
            .sum()
    }

    pub fn l2_norm_sq(&self) -> f64 {
        self.components.iter().map(|c| c.l2_norm_sq()).sum()
    }

    pub fn l2_norm(&self) -> f64 {
        self.l2_norm_sq().sqrt()
    }

    /// `‖∇u‖_{L²}` over all components and axes.
    pub fn gradient_l2(&self) -> f64 {
        self.components
            .iter()
            .flat_map(|c| (0..3).map(move |a| c.derivative(a).l2_norm_sq()))
            .sum::<f64>()
            .sqrt()
    }

    pub fn to_real(&self) -> [RealField3; 3] {
        std::array::from_fn(|i| self.components[i].to_real())
    }

    /// Largest pointwise Euclidean magnitude over the grid.
    pub fn linf(&self) -> f64 {
        let [a, b, c] = self.to_real();
        a.data
            .iter()
            .zip(&b.data)
            .zip(&c.data)
            .map(|((x, y), z)| (x * x + y * y + z * z).sqrt())
            .fold(0.0, f64::max)
    }

    pub fn dealias(&self) -> Self {
        self.map(dealias)
    }

    pub fn hermitian_defect(&self) -> f64 {
        self.components
            .iter()
            .map(|c| c.hermitian_defect())
            .fold(0.0, f64::max)
    }
}

const MAGIC: &[u8; 4] = b"ANS1";
const VERSION: u32 = 1;
const HEADER_LEN: usize = 4 + 4 + 3 * 4 + 3 * 8 + 3 * 8 + 8;

/// Writes `u`, the time and the viscosities in the little-endian `ANS1` format.
pub fn write_checkpoint(
    u: &VectorField3,
    t: f64,
    nu: ViscosityTriple,
    path: impl AsRef<Path>,
) -> Result<()> {
    let path = path.as_ref();
    let io_err = |source| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    let grid = u.grid();
    let mut w = BufWriter::new(File::create(path).map_err(io_err)?);
    let mut header = Vec::with_capacity(HEADER_LEN);
    header.extend_from_slice(MAGIC);
    header.extend_from_slice(&VERSION.to_le_bytes());
    for n in grid.n() {
        let n = u32::try_from(n).map_err(|_| Error::Config("grid too large".into()))?;
        header.extend_from_slice(&n.to_le_bytes());
    }
    for x in grid.len().into_iter().chain([nu.nu1, nu.nu2, nu.nu3, t]) {
        header.extend_from_slice(&x.to_le_bytes());
    }
    w.write_all(&header).map_err(io_err)?;
    for comp in &u.components {
        for c in &comp.coeffs {
            w.write_all(&c.re.to_le_bytes()).map_err(io_err)?;
            w.write_all(&c.im.to_le_bytes()).map_err(io_err)?;
        }
    }
    w.flush().map_err(io_err)
}

/// Reads a checkpoint written by [`write_checkpoint`].
pub fn read_checkpoint(path: impl AsRef<Path>) -> Result<(VectorField3, f64, ViscosityTriple)> {
    let path = path.as_ref();
    let io_err = |source| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    let fmt_err = |reason: String| Error::Format {
        path: path.to_path_buf(),
        reason,
    };
    let mut bytes = Vec::new();
    BufReader::new(File::open(path).map_err(io_err)?)
        .read_to_end(&mut bytes)
        .map_err(io_err)?;
    if bytes.len() < HEADER_LEN {
        return Err(fmt_err(format!(
            "truncated header: {} bytes, expected at least {HEADER_LEN}",
            bytes.len()
        )));
    }
    if &bytes[0..4] != MAGIC {
        return Err(fmt_err(format!("bad magic {:?}", &bytes[0..4])));
    }
    let u32_at = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().unwrap());
    let f64_at = |o: usize| f64::from_le_bytes(bytes[o..o + 8].try_into().unwrap());
    let version = u32_at(4);
    if version != VERSION {
        return Err(fmt_err(format!("unsupported version {version}")));
    }
    let n = [u32_at(8) as usize, u32_at(12) as usize, u32_at(16) as usize];
    let len = [f64_at(20), f64_at(28), f64_at(36)];
    let nu = [f64_at(44), f64_at(52), f64_at(60)];
    let t = f64_at(68);
    let grid = Grid3::new(n, len).map_err(|e| fmt_err(format!("invalid grid in header: {e}")))?;
    let count = grid.num_points();
    let expected = HEADER_LEN + 3 * count * 16;
    if bytes.len() != expected {
        return Err(fmt_err(format!(
            "truncated or oversized payload: {} bytes, expected {expected}",
            bytes.len()
        )));
    }
    let mut offset = HEADER_LEN;
    let mut read_component = || {
        let mut coeffs = Vec::with_capacity(count);
        for _ in 0..count {
            coeffs.push(Complex64::new(f64_at(offset), f64_at(offset + 8)));
            offset += 16;
        }
        SpectralField3 { grid, coeffs }
    };
    let u1 = read_component();
    let u2 = read_component();
    let u3 = read_component();
    let nu = ViscosityTriple::new(nu[0], nu[1], nu[2])
        .map_err(|e| fmt_err(format!("invalid viscosities in header: {e}")))?;
    Ok((
        VectorField3 {
            components: [u1, u2, u3],
        },
        t,
        nu,
    ))
}
