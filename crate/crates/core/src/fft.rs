//! Minimal radix-2 FFT used by the circulant-embedding generator and the
//! truncated-MA convolution. Sizes are always powers of two chosen by the
//! callers.

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Complex {
    pub re: f64,
    pub im: f64,
}

impl Complex {
    pub const ZERO: Complex = Complex { re: 0.0, im: 0.0 };

    pub fn new(re: f64, im: f64) -> Self {
        Self { re, im }
    }

    pub fn conj(self) -> Self {
        Self::new(self.re, -self.im)
    }

    fn mul(self, other: Self) -> Self {
        Self::new(
            self.re * other.re - self.im * other.im,
            self.re * other.im + self.im * other.re,
        )
    }

    fn add(self, other: Self) -> Self {
        Self::new(self.re + other.re, self.im + other.im)
    }

    fn sub(self, other: Self) -> Self {
        Self::new(self.re - other.re, self.im - other.im)
    }
}

/// Smallest power of two >= n.
pub fn next_pow2(n: usize) -> usize {
    n.next_power_of_two()
}

/// In-place forward DFT, `X_k = sum_j x_j e^{-2*pi*i*j*k/N}`. Panics unless
/// the length is a power of two.
pub fn fft(data: &mut [Complex]) {
    transform(data, -1.0);
}

/// In-place unnormalized inverse DFT (`e^{+2*pi*i*j*k/N}` kernel, no 1/N).
pub fn ifft_unnormalized(data: &mut [Complex]) {
    transform(data, 1.0);
}

fn transform(data: &mut [Complex], sign: f64) {
    let n = data.len();
    assert!(n.is_power_of_two(), "fft length must be a power of two");
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

    let mut len = 2usize;
    while len <= n {
        let ang = sign * 2.0 * std::f64::consts::PI / len as f64;
        let (sin_w, cos_w) = ang.sin_cos();
        let wlen = Complex::new(cos_w, sin_w);
        let mut start = 0;
        while start < n {
            let mut w = Complex::new(1.0, 0.0);
            for k in 0..len / 2 {
                let u = data[start + k];
                let v = data[start + k + len / 2].mul(w);
                data[start + k] = u.add(v);
                data[start + k + len / 2] = u.sub(v);
                w = w.mul(wlen);
            }
            start += len;
        }
        len <<= 1;
    }
}

/// Linear convolution of `a` and `b` via zero-padded FFTs; the result has
/// length `a.len() + b.len() - 1`.
pub fn convolve(a: &[f64], b: &[f64]) -> Vec<f64> {
    let out_len = a.len() + b.len() - 1;
    let n = next_pow2(out_len);
    let mut fa = vec![Complex::ZERO; n];
    let mut fb = vec![Complex::ZERO; n];
    for (dst, &src) in fa.iter_mut().zip(a) {
        dst.re = src;
    }
    for (dst, &src) in fb.iter_mut().zip(b) {
        dst.re = src;
    }
    fft(&mut fa);
    fft(&mut fb);
    for (x, y) in fa.iter_mut().zip(&fb) {
        *x = x.mul(*y);
    }
    ifft_unnormalized(&mut fa);
    let scale = 1.0 / n as f64;
    fa[..out_len].iter().map(|c| c.re * scale).collect()
}
