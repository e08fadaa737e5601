//! Minimal power-of-two radix-2 FFT. Grid sizes in this crate are always
//! rounded up to powers of two, so nothing fancier is required; exactness is
//! checked by round-trip residuals in the periodic-function tests.

use alloc::vec::Vec;

use num_complex::Complex64;

use crate::math;

/// In-place forward DFT (negative-exponent convention), `data.len()` a power
/// of two.
pub fn forward(data: &mut [Complex64]) {
    transform(data, -1.0);
}

/// In-place inverse DFT including the 1/n normalization.
pub fn inverse(data: &mut [Complex64]) {
    transform(data, 1.0);
    let scale = 1.0 / data.len() as f64;
    for v in data.iter_mut() {
        *v *= scale;
    }
}

fn transform(data: &mut [Complex64], sign: f64) {
    let n = data.len();
    assert!(n.is_power_of_two(), "fft size must be a power of two");
    if n <= 1 {
        return;
    }

    // bit-reversal permutation
    let mut j = 0usize;
    for i in 0..n - 1 {
        if i < j {
            data.swap(i, j);
        }
        let mut mask = n >> 1;
        while j & mask != 0 {
            j &= !mask;
            mask >>= 1;
        }
        j |= mask;
    }

    // twiddle table from direct trig, so no drift across long stages
    let half_n = n / 2;
    let mut table = Vec::with_capacity(half_n);
    for k in 0..half_n {
        let ang = sign * math::TAU * k as f64 / n as f64;
        table.push(Complex64::new(math::cos(ang), math::sin(ang)));
    }

    let mut len = 2;
    while len <= n {
        let half = len / 2;
        let stride = n / len;
        let mut start = 0;
        while start < n {
            for k in 0..half {
                let w = table[k * stride];
                let u = data[start + k];
                let v = data[start + k + half] * w;
                data[start + k] = u + v;
                data[start + k + half] = u - v;
            }
            start += len;
        }
        len <<= 1;
    }
}

/// Smallest power of two >= `n`.
pub fn next_pow2(n: usize) -> usize {
    n.next_power_of_two()
}

/// Forward transform of real samples, returning the complex spectrum.
pub fn forward_real(samples: &[f64]) -> Vec<Complex64> {
    let mut buf: Vec<Complex64> = samples.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    forward(&mut buf);
    buf
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_identity() {
        let n = 1024;
        let mut data: Vec<Complex64> = (0..n)
            .map(|j| {
                let x = j as f64 / n as f64;
                Complex64::new(math::sin(math::TAU * 3.0 * x) + 0.25, math::cos(math::TAU * x))
            })
            .collect();
        let orig = data.clone();
        forward(&mut data);
        inverse(&mut data);
        let err = data
            .iter()
            .zip(&orig)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0f64, f64::max);
        assert!(err < 1e-12, "round-trip residual {err}");
    }

    #[test]
    fn single_mode_lands_in_its_bin() {
        let n = 64;
        let k = 5;
        let mut data: Vec<Complex64> = (0..n)
            .map(|j| {
                let x = j as f64 / n as f64;
                Complex64::new(math::cos(math::TAU * k as f64 * x), math::sin(math::TAU * k as f64 * x))
            })
            .collect();
        forward(&mut data);
        for (bin, v) in data.iter().enumerate() {
            let expect = if bin == k { n as f64 } else { 0.0 };
            assert!((v.re - expect).abs() < 1e-9 && v.im.abs() < 1e-9, "bin {bin} = {v}");
        }
    }
}
