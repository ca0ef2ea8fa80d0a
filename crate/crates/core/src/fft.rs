//! Discrete Fourier transforms of arbitrary length.
//!
//! Power-of-two lengths use an iterative radix-2 kernel; every other length
//! goes through Bluestein's chirp-z reformulation on a padded power-of-two
//! buffer. Both directions are unnormalized:
//!
//! ```text
//! forward:  X[k] = sum_n x[n] exp(-j 2 pi k n / N)
//! inverse:  x[n] = sum_k X[k] exp(+j 2 pi k n / N)
//! ```

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

use crate::math::cis;

#[derive(Debug, Clone)]
struct Radix2 {
    len: usize,
    // exp(-j 2 pi k / len) for k in 0..len/2
    twiddles: Vec<Complex64>,
}

impl Radix2 {
    fn new(len: usize) -> Self {
        debug_assert!(len.is_power_of_two());
        let twiddles = (0..len / 2)
            .map(|k| cis(-2.0 * PI * k as f64 / len as f64))
            .collect();
        Self { len, twiddles }
    }

    fn process(&self, buf: &mut [Complex64], inverse: bool) {
        let n = self.len;
        if n <= 1 {
            return;
        }
        let bits = n.trailing_zeros();
        for i in 0..n {
            let j = i.reverse_bits() >> (usize::BITS - bits);
            if j > i {
                buf.swap(i, j);
            }
        }
        let mut size = 2;
        while size <= n {
            let half = size / 2;
            let stride = n / size;
            for start in (0..n).step_by(size) {
                for k in 0..half {
                    let mut w = self.twiddles[k * stride];
                    if inverse {
                        w = w.conj();
                    }
                    let a = buf[start + k];
                    let b = buf[start + k + half] * w;
                    buf[start + k] = a + b;
                    buf[start + k + half] = a - b;
                }
            }
            size *= 2;
        }
    }
}

#[derive(Debug, Clone)]
struct Bluestein {
    len: usize,
    inner: Radix2,
    // exp(-j pi k^2 / len)
    chirp: Vec<Complex64>,
    // forward transform of the conjugate chirp, wrapped to the padded length
    kernel_fft: Vec<Complex64>,
}

impl Bluestein {
    fn new(len: usize) -> Self {
        let padded = (2 * len - 1).next_power_of_two();
        let inner = Radix2::new(padded);
        // k^2 mod 2len keeps the phase argument small for long transforms.
        let chirp: Vec<Complex64> = (0..len)
            .map(|k| {
                let k2 = (k as u128 * k as u128) % (2 * len as u128);
                cis(-PI * k2 as f64 / len as f64)
            })
            .collect();
        let mut kernel = vec![Complex64::new(0.0, 0.0); padded];
        kernel[0] = chirp[0].conj();
        for k in 1..len {
            kernel[k] = chirp[k].conj();
            kernel[padded - k] = chirp[k].conj();
        }
        inner.process(&mut kernel, false);
        Self {
            len,
            inner,
            chirp,
            kernel_fft: kernel,
        }
    }

    fn process(&self, buf: &mut [Complex64], inverse: bool) {
        let n = self.len;
        let padded = self.inner.len;
        // The inverse transform is the conjugate of the forward transform of
        // the conjugated input.
        let mut work = vec![Complex64::new(0.0, 0.0); padded];
        for k in 0..n {
            let x = if inverse { buf[k].conj() } else { buf[k] };
            work[k] = x * self.chirp[k];
        }
        self.inner.process(&mut work, false);
        for (w, k) in work.iter_mut().zip(&self.kernel_fft) {
            *w *= k;
        }
        self.inner.process(&mut work, true);
        let scale = 1.0 / padded as f64;
        for k in 0..n {
            let y = work[k] * self.chirp[k] * scale;
            buf[k] = if inverse { y.conj() } else { y };
        }
    }
}

#[derive(Debug, Clone)]
enum Kernel {
    Trivial,
    Radix2(Radix2),
    Bluestein(Bluestein),
}

/// A reusable transform plan for one length.
#[derive(Debug, Clone)]
pub struct Fft {
    len: usize,
    kernel: Kernel,
}

impl Fft {
    pub fn new(len: usize) -> Self {
        let kernel = if len <= 1 {
            Kernel::Trivial
        } else if len.is_power_of_two() {
            Kernel::Radix2(Radix2::new(len))
        } else {
            Kernel::Bluestein(Bluestein::new(len))
        };
        Self { len, kernel }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// In-place unnormalized forward transform. Panics if `buf.len() != self.len()`.
    pub fn forward(&self, buf: &mut [Complex64]) {
        self.run(buf, false);
    }

    /// In-place unnormalized inverse transform. Panics if `buf.len() != self.len()`.
    pub fn inverse(&self, buf: &mut [Complex64]) {
        self.run(buf, true);
    }

    fn run(&self, buf: &mut [Complex64], inverse: bool) {
        assert_eq!(buf.len(), self.len, "transform length mismatch");
        match &self.kernel {
            Kernel::Trivial => {}
            Kernel::Radix2(r) => r.process(buf, inverse),
            Kernel::Bluestein(b) => b.process(buf, inverse),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive(x: &[Complex64], sign: f64) -> Vec<Complex64> {
        let n = x.len();
        (0..n)
            .map(|k| {
                x.iter()
                    .enumerate()
                    .map(|(m, v)| v * cis(sign * 2.0 * PI * ((k * m) % n) as f64 / n as f64))
                    .sum()
            })
            .collect()
    }

    fn signal(n: usize) -> Vec<Complex64> {
        (0..n)
            .map(|i| {
                let t = i as f64;
                Complex64::new((0.37 * t).sin() + 0.1 * t, (1.3 * t).cos() - 0.05 * t * t / n as f64)
            })
            .collect()
    }

    #[test]
    fn matches_naive_dft() {
        for &n in &[1usize, 2, 3, 5, 8, 12, 17, 64, 89, 100, 801] {
            let x = signal(n);
            let fft = Fft::new(n);
            let mut fwd = x.clone();
            fft.forward(&mut fwd);
            let mut inv = x.clone();
            fft.inverse(&mut inv);
            let ref_fwd = naive(&x, -1.0);
            let ref_inv = naive(&x, 1.0);
            let scale = ref_fwd.iter().map(|v| v.norm()).fold(1.0, f64::max);
            for k in 0..n {
                assert!((fwd[k] - ref_fwd[k]).norm() < 1e-10 * scale, "n={n} k={k}");
                assert!((inv[k] - ref_inv[k]).norm() < 1e-10 * scale, "n={n} k={k}");
            }
        }
    }

    #[test]
    fn round_trip_scales_by_length() {
        let n = 801;
        let x = signal(n);
        let fft = Fft::new(n);
        let mut y = x.clone();
        fft.forward(&mut y);
        fft.inverse(&mut y);
        for (a, b) in x.iter().zip(&y) {
            assert!((a * n as f64 - b).norm() < 1e-8);
        }
    }
}
