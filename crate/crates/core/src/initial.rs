//! Named initial-data generators.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use num_complex::Complex64;

use crate::dynamics::leray_project;
use crate::error::{config_err, Result};
use crate::field::{Grid3, SpectralField3, VectorField3};
use crate::lp::DyadicSystem;
use crate::norms::besov_b0half;

/// Shape of the initial velocity before its amplitude is set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Generator {
    /// `(sin x₁ cos x₂ cos x₃, −cos x₁ sin x₂ cos x₃, 0)` in box-scaled coordinates.
    TaylorGreen,
    /// Gaussian modes with integer frequency magnitude in `[k_lo, k_hi]`,
    /// projected onto divergence-free fields.
    RandomDivFree { seed: u64, k_lo: f64, k_hi: f64 },
    /// `(sin x₂, 0, 0)` plus `epsilon` times a random field in the shell `[1, 3]`.
    ShearPerturbation { seed: u64, epsilon: f64 },
}

/// How the amplitude of the generated field is fixed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Amplitude {
    Linf(f64),
    B0half(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialData {
    pub generator: Generator,
    pub amplitude: Amplitude,
}

impl InitialData {
    pub fn taylor_green(linf: f64) -> Self {
        Self {
            generator: Generator::TaylorGreen,
            amplitude: Amplitude::Linf(linf),
        }
    }

    /// The same datum with the seed of a random generator replaced.
    pub fn with_seed(self, seed: u64) -> Self {
        let generator = match self.generator {
            Generator::RandomDivFree { k_lo, k_hi, .. } => Generator::RandomDivFree { seed, k_lo, k_hi },
            Generator::ShearPerturbation { epsilon, .. } => Generator::ShearPerturbation { seed, epsilon },
            g => g,
        };
        Self { generator, ..self }
    }

    pub fn build(&self, grid: Grid3) -> Result<VectorField3> {
        let shape = match self.generator {
            Generator::TaylorGreen => taylor_green(grid, 1.0),
            Generator::RandomDivFree { seed, k_lo, k_hi } => random_div_free(grid, seed, k_lo, k_hi)?,
            Generator::ShearPerturbation { seed, epsilon } => {
                let base = VectorField3::from_fns(
                    grid,
                    |_, y, _| y.sin(),
                    |_, _, _| 0.0,
                    |_, _, _| 0.0,
                );
                let mut pert = random_div_free(grid, seed, 1.0, 3.0)?;
                let l = pert.linf();
                pert = pert.scale(epsilon / l);
                base.add(&pert)
            }
        };
        let current = match self.amplitude {
            Amplitude::Linf(_) => shape.linf(),
            Amplitude::B0half(_) => besov_b0half(&shape.components, &DyadicSystem::for_grid(&grid)).value,
        };
        let target = match self.amplitude {
            Amplitude::Linf(a) | Amplitude::B0half(a) => a,
        };
        if !(target >= 0.0 && target.is_finite()) {
            return config_err(format!("amplitude must be finite and >= 0, got {target}"));
        }
        if current == 0.0 {
            return config_err("generated field has zero norm; cannot set its amplitude");
        }
        Ok(shape.scale(target / current))
    }
}

/// Taylor–Green vortex of amplitude `a`, scaled to the box.
pub fn taylor_green(grid: Grid3, a: f64) -> VectorField3 {
    let len = grid.len();
    let s = [0, 1, 2].map(|i| 2.0 * std::f64::consts::PI / len[i]);
    VectorField3::from_fns(
        grid,
        move |x, y, z| a * (s[0] * x).sin() * (s[1] * y).cos() * (s[2] * z).cos(),
        move |x, y, z| -a * (s[0] * x).cos() * (s[1] * y).sin() * (s[2] * z).cos(),
        |_, _, _| 0.0,
    )
}

/// Real, mean-zero, divergence-free field with independent standard complex
/// Gaussian coefficients on the integer shell `k_lo ≤ |m| ≤ k_hi`.
pub fn random_div_free(grid: Grid3, seed: u64, k_lo: f64, k_hi: f64) -> Result<VectorField3> {
    if !(k_lo >= 0.0 && k_hi >= k_lo) {
        return config_err(format!("invalid shell [{k_lo}, {k_hi}]"));
    }
    let n = grid.n();
    if (0..3).any(|a| 2.0 * k_hi >= n[a] as f64) {
        return config_err(format!("shell radius {k_hi} reaches the Nyquist frequency of {n:?}"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = VectorField3::zeros(grid);
    let np = grid.num_points();
    for idx in 0..np {
        let cidx = grid.conjugate_index(idx);
        if cidx < idx {
            continue;
        }
        let i = grid.unflatten(idx);
        let m = [0, 1, 2].map(|a| grid.freq(a, i[a]) as f64);
        let r = (m[0] * m[0] + m[1] * m[1] + m[2] * m[2]).sqrt();
        if r == 0.0 || r < k_lo || r > k_hi || cidx == idx {
            continue;
        }
        for comp in out.components.iter_mut() {
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            let c = Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2;
            comp.coeffs[idx] = c;
            comp.coeffs[cidx] = c.conj();
        }
    }
    let u = leray_project(&out);
    if u.l2_norm() == 0.0 {
        return config_err(format!("shell [{k_lo}, {k_hi}] contains no admissible modes"));
    }
    Ok(u)
}

/// Scalar analogue of [`random_div_free`] without the projection.
pub fn random_scalar(grid: Grid3, seed: u64, k_lo: f64, k_hi: f64) -> Result<SpectralField3> {
    let v = random_div_free(grid, seed, k_lo, k_hi)?;
    Ok(v.components[0].clone())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn taylor_green_amplitude() {
        let g = Grid3::cubic(16).unwrap();
        let u = InitialData::taylor_green(0.7).build(g).unwrap();
        assert!((u.linf() - 0.7).abs() < 1e-12);
        assert!(u.divergence_defect() < 1e-14);
    }

    #[test]
    fn random_field_is_real_div_free_and_reproducible() {
        let g = Grid3::cubic(16).unwrap();
        let a = random_div_free(g, 7, 1.0, 4.0).unwrap();
        let b = random_div_free(g, 7, 1.0, 4.0).unwrap();
        assert_eq!(a, b);
        assert!(a.hermitian_defect() < 1e-15);
        assert!(a.divergence_defect() < 1e-12);
        assert!(a.components.iter().all(|c| c.mean().norm() == 0.0));
        assert!(random_div_free(g, 7, 1.0, 8.0).is_err());
    }

    #[test]
    fn besov_amplitude() {
        let g = Grid3::cubic(16).unwrap();
        let spec = InitialData {
            generator: Generator::ShearPerturbation { seed: 1, epsilon: 0.1 },
            amplitude: Amplitude::B0half(2.0),
        };
        let u = spec.build(g).unwrap();
        let b = besov_b0half(&u.components, &DyadicSystem::for_grid(&g)).value;
        assert!((b - 2.0).abs() < 1e-12);
    }
}
