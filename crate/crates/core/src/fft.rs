//! In-place radix-2 complex FFT for power-of-two lengths.

use alloc::vec::Vec;
use core::f64::consts::PI;

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub(crate) struct Complex {
    pub re: f64,
    pub im: f64,
}

impl Complex {
    pub fn new(re: f64, im: f64) -> Self {
        Self { re, im }
    }

    pub fn norm_sqr(self) -> f64 {
        self.re * self.re + self.im * self.im
    }

    pub fn norm(self) -> f64 {
        libm::sqrt(self.norm_sqr())
    }

    fn mul(self, o: Self) -> Self {
        Self::new(self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re)
    }
}

/// Forward (`inverse = false`) or unnormalized inverse transform.
pub(crate) fn fft(buf: &mut [Complex], inverse: bool) {
    let n = buf.len();
    assert!(n.is_power_of_two(), "fft length must be a power of two");
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
    let sign = if inverse { 1.0 } else { -1.0 };
    let mut len = 2;
    while len <= n {
        let ang = sign * 2.0 * PI / len as f64;
        let half = len / 2;
        // Twiddles computed directly per index to avoid drift from repeated multiplication.
        let twiddles: Vec<Complex> = (0..half)
            .map(|k| Complex::new(libm::cos(ang * k as f64), libm::sin(ang * k as f64)))
            .collect();
        for start in (0..n).step_by(len) {
            for k in 0..half {
                let a = buf[start + k];
                let b = buf[start + k + half].mul(twiddles[k]);
                buf[start + k] = Complex::new(a.re + b.re, a.im + b.im);
                buf[start + k + half] = Complex::new(a.re - b.re, a.im - b.im);
            }
        }
        len <<= 1;
    }
}

/// Real input zero-padded to `size`, forward transform.
pub(crate) fn real_fft(x: &[f64], size: usize) -> Vec<Complex> {
    let mut buf = alloc::vec![Complex::default(); size];
    for (b, &v) in buf.iter_mut().zip(x) {
        b.re = v;
    }
    fft(&mut buf, false);
    buf
}

/// `c[tau] = sum_{j < head.len()} head[j] * x[j + tau]` for `tau` in `0..=x.len() - head.len()`.
pub(crate) fn cross_correlate_head(x: &[f64], head_len: usize) -> Vec<f64> {
    let n = x.len();
    let size = (n + head_len).next_power_of_two();
    let fx = real_fft(x, size);
    let fh = real_fft(&x[..head_len], size);
    let mut prod: Vec<Complex> = fx
        .iter()
        .zip(&fh)
        .map(|(a, h)| Complex::new(a.re * h.re + a.im * h.im, a.im * h.re - a.re * h.im))
        .collect();
    fft(&mut prod, true);
    let scale = 1.0 / size as f64;
    prod[..=n - head_len].iter().map(|c| c.re * scale).collect()
}

/// Full linear autocorrelation `r[tau] = sum_{i < n - tau} x[i] x[i + tau]`, `tau < n`.
pub(crate) fn autocorrelation(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    let size = (2 * n).next_power_of_two();
    let mut spec = real_fft(x, size);
    for c in spec.iter_mut() {
        *c = Complex::new(c.norm_sqr(), 0.0);
    }
    fft(&mut spec, true);
    let scale = 1.0 / size as f64;
    spec[..n].iter().map(|c| c.re * scale).collect()
}
