//! Multi-dimensional complex FFT on C-ordered arrays.
//!
//! Plans are cached process-wide. The forward transform divides by the total
//! number of points, so spectral coefficients are Fourier-series coefficients:
//! a constant field `c` has zero-mode coefficient `c`.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rustfft::{Fft, FftDirection, FftPlanner};

type Plan = Arc<dyn Fft<f64>>;
type PlanCache = Mutex<(FftPlanner<f64>, HashMap<(usize, bool), Plan>)>;

fn plan(len: usize, direction: FftDirection) -> Plan {
    static CACHE: OnceLock<PlanCache> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new((FftPlanner::new(), HashMap::new())));
    let mut guard = cache.lock().expect("fft plan cache poisoned");
    let (planner, plans) = &mut *guard;
    let key = (len, direction == FftDirection::Forward);
    plans
        .entry(key)
        .or_insert_with(|| planner.plan_fft(len, direction))
        .clone()
}

/// Direction of a transform.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// Physical samples to Fourier-series coefficients (normalized by 1/N).
    Forward,
    /// Fourier-series coefficients to physical samples (unnormalized).
    Inverse,
}

/// In-place transform of a C-ordered array with the given shape.
pub fn transform(data: &mut [Complex64], shape: &[usize], direction: Direction) {
    let total: usize = shape.iter().product();
    assert_eq!(data.len(), total, "buffer length does not match shape");
    let fft_dir = match direction {
        Direction::Forward => FftDirection::Forward,
        Direction::Inverse => FftDirection::Inverse,
    };
    let mut buf = vec![Complex64::new(0.0, 0.0); total];
    for axis in 0..shape.len() {
        let n = shape[axis];
        if n == 1 {
            continue;
        }
        let outer: usize = shape[..axis].iter().product();
        let inner: usize = shape[axis + 1..].iter().product();
        let fft = plan(n, fft_dir);
        if inner == 1 {
            fft.process(data);
            continue;
        }
        // gather lines along `axis` into contiguous rows
        for o in 0..outer {
            for k in 0..n {
                let src = (o * n + k) * inner;
                for i in 0..inner {
                    buf[(o * inner + i) * n + k] = data[src + i];
                }
            }
        }
        fft.process(&mut buf);
        for o in 0..outer {
            for k in 0..n {
                let dst = (o * n + k) * inner;
                for i in 0..inner {
                    data[dst + i] = buf[(o * inner + i) * n + k];
                }
            }
        }
    }
    if direction == Direction::Forward {
        let scale = 1.0 / total as f64;
        data.iter_mut().for_each(|c| *c *= scale);
    }
}

/// Signed integer frequency of FFT index `idx` on an axis of length `n`.
/// The Nyquist index `n/2` maps to `-n/2`.
#[inline]
pub fn signed_freq(idx: usize, n: usize) -> i64 {
    if idx < n / 2 {
        idx as i64
    } else {
        idx as i64 - n as i64
    }
}

/// FFT index holding signed frequency `m`, if it is representable.
#[inline]
pub fn index_of_freq(m: i64, n: usize) -> Option<usize> {
    let half = (n / 2) as i64;
    if m >= -half && m < half {
        Some(m.rem_euclid(n as i64) as usize)
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_2d() {
        let shape = [6, 10];
        let orig: Vec<Complex64> = (0..60)
            .map(|i| Complex64::new((i as f64 * 0.37).sin(), (i as f64 * 0.11).cos()))
            .collect();
        let mut data = orig.clone();
        transform(&mut data, &shape, Direction::Forward);
        transform(&mut data, &shape, Direction::Inverse);
        for (a, b) in orig.iter().zip(&data) {
            assert!((a - b).norm() < 1e-13);
        }
    }

    #[test]
    fn frequency_indexing() {
        assert_eq!(signed_freq(0, 8), 0);
        assert_eq!(signed_freq(3, 8), 3);
        assert_eq!(signed_freq(4, 8), -4);
        assert_eq!(signed_freq(7, 8), -1);
        assert_eq!(index_of_freq(-1, 8), Some(7));
        assert_eq!(index_of_freq(4, 8), None);
        assert_eq!(index_of_freq(-4, 8), Some(4));
    }
}
