//! Discrete Fourier transforms for the periodic Poisson solves.
//!
//! Radix-2 when the length is a power of two, otherwise a direct O(N^2)
//! transform; torus grids stay small enough that either is instant.

use alloc::vec;
use alloc::vec::Vec;

use crate::C64;

/// In-place forward DFT (negative exponent), unnormalized.
pub fn dft(data: &mut [C64]) {
    transform(data, -1.0);
}

/// In-place inverse DFT including the 1/N factor.
pub fn idft(data: &mut [C64]) {
    transform(data, 1.0);
    let n = data.len() as f64;
    for x in data.iter_mut() {
        *x /= n;
    }
}

fn transform(data: &mut [C64], sign: f64) {
    let n = data.len();
    if n <= 1 {
        return;
    }
    if n.is_power_of_two() {
        fft_pow2(data, sign);
    } else {
        let src: Vec<C64> = data.to_vec();
        for (k, out) in data.iter_mut().enumerate() {
            let mut s = C64::new(0.0, 0.0);
            for (j, x) in src.iter().enumerate() {
                let ang = sign * core::f64::consts::TAU * (k * j % n) as f64 / n as f64;
                s += x * C64::new(libm::cos(ang), libm::sin(ang));
            }
            *out = s;
        }
    }
}

fn fft_pow2(data: &mut [C64], sign: f64) {
    let n = data.len();
    // bit reversal
    let mut j = 0usize;
    for i in 0..n {
        if i < j {
            data.swap(i, j);
        }
        let mut m = n >> 1;
        while m >= 1 && j & m != 0 {
            j ^= m;
            m >>= 1;
        }
        j |= m;
    }
    let mut len = 2;
    while len <= n {
        let ang = sign * core::f64::consts::TAU / len as f64;
        let wlen = C64::new(libm::cos(ang), libm::sin(ang));
        let half = len / 2;
        let mut i = 0;
        while i < n {
            let mut w = C64::new(1.0, 0.0);
            for k in 0..half {
                let u = data[i + k];
                let v = data[i + k + half] * w;
                data[i + k] = u + v;
                data[i + k + half] = u - v;
                w *= wlen;
            }
            i += len;
        }
        len <<= 1;
    }
}

/// 2D forward DFT over a row-major len x len grid.
pub fn dft2(data: &mut [C64], len: usize) {
    debug_assert_eq!(data.len(), len * len);
    let mut scratch = vec![C64::new(0.0, 0.0); len];
    for row in 0..len {
        dft(&mut data[row * len..(row + 1) * len]);
    }
    for col in 0..len {
        for row in 0..len {
            scratch[row] = data[row * len + col];
        }
        dft(&mut scratch);
        for row in 0..len {
            data[row * len + col] = scratch[row];
        }
    }
}

/// 2D inverse DFT over a row-major len x len grid.
pub fn idft2(data: &mut [C64], len: usize) {
    debug_assert_eq!(data.len(), len * len);
    let mut scratch = vec![C64::new(0.0, 0.0); len];
    for row in 0..len {
        idft(&mut data[row * len..(row + 1) * len]);
    }
    for col in 0..len {
        for row in 0..len {
            scratch[row] = data[row * len + col];
        }
        idft(&mut scratch);
        for row in 0..len {
            data[row * len + col] = scratch[row];
        }
    }
}
