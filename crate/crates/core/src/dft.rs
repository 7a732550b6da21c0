//! Forward discrete Fourier transform, `X_k = Σ_n x_n e^{−j2πkn/N}`.
//!
//! Power-of-two lengths use an in-place iterative radix-2 transform; other
//! lengths fall back to the direct O(N²) sum. No normalization is applied.

use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

use crate::math;

#[derive(Debug, Clone)]
pub struct Fft {
    len: usize,
    /// `e^{−j2πm/N}` for `m = 0..N`.
    twiddles: Vec<Complex64>,
    radix2: bool,
}

impl Fft {
    pub fn new(len: usize) -> Fft {
        assert!(len > 0, "transform length must be positive");
        let twiddles = (0..len)
            .map(|m| {
                let (s, c) = math::sin_cos(-2.0 * PI * m as f64 / len as f64);
                Complex64::new(c, s)
            })
            .collect();
        Fft {
            len,
            twiddles,
            radix2: len.is_power_of_two(),
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Transforms `buf` in place. `scratch` is only touched for
    /// non-power-of-two lengths.
    pub fn forward(&self, buf: &mut [Complex64], scratch: &mut Vec<Complex64>) {
        assert_eq!(buf.len(), self.len, "buffer length mismatch");
        if self.radix2 {
            self.radix2_in_place(buf);
        } else {
            self.direct(buf, scratch);
        }
    }

    fn direct(&self, buf: &mut [Complex64], scratch: &mut Vec<Complex64>) {
        let n = self.len;
        scratch.clear();
        scratch.extend_from_slice(buf);
        for (k, out) in buf.iter_mut().enumerate() {
            let mut acc = Complex64::new(0.0, 0.0);
            for (i, x) in scratch.iter().enumerate() {
                acc += x * self.twiddles[(k * i) % n];
            }
            *out = acc;
        }
    }

    fn radix2_in_place(&self, buf: &mut [Complex64]) {
        let n = self.len;
        let bits = n.trailing_zeros();
        if bits == 0 {
            return;
        }
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
                for j in 0..half {
                    let w = self.twiddles[j * stride];
                    let a = buf[start + j];
                    let b = buf[start + j + half] * w;
                    buf[start + j] = a + b;
                    buf[start + j + half] = a - b;
                }
            }
            size *= 2;
        }
    }
}
