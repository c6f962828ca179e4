//! Small dense complex Hermitian matrices and their spectra.
//!
//! Sizes stay tiny (1x1 grid coefficients up to 8x8 block matrices in the
//! blow-up lemmas), so a cyclic Jacobi sweep is both adequate and exactly
//! reproducible across platforms.

use alloc::vec;
use alloc::vec::Vec;

use crate::C64;

/// Relative off-diagonal norm at which the Jacobi sweep is declared converged.
pub const JACOBI_TOL: f64 = 1e-12;

/// Dense n x n complex matrix stored row-major, kept Hermitian by its
/// constructors (`set` writes the conjugate mirror entry).
#[derive(Clone, Debug, PartialEq)]
pub struct Hermitian {
    n: usize,
    a: Vec<C64>,
}

impl Hermitian {
    pub fn zeros(n: usize) -> Self {
        Hermitian { n, a: vec![C64::new(0.0, 0.0); n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.a[i * n + i] = C64::new(1.0, 0.0);
        }
        m
    }

    pub fn diag(d: &[f64]) -> Self {
        let mut m = Self::zeros(d.len());
        for (i, &x) in d.iter().enumerate() {
            m.a[i * d.len() + i] = C64::new(x, 0.0);
        }
        m
    }

    /// Builds from a full row-major complex slice, symmetrizing (A + A*)/2.
    pub fn from_rows(n: usize, rows: &[C64]) -> Self {
        debug_assert_eq!(rows.len(), n * n);
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m.a[i * n + j] = 0.5 * (rows[i * n + j] + rows[j * n + i].conj());
            }
        }
        m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.a[i * self.n + j]
    }

    /// Sets entry (i, j) and its conjugate mirror. Diagonal imaginary parts
    /// are dropped.
    pub fn set(&mut self, i: usize, j: usize, v: C64) {
        if i == j {
            self.a[i * self.n + i] = C64::new(v.re, 0.0);
        } else {
            self.a[i * self.n + j] = v;
            self.a[j * self.n + i] = v.conj();
        }
    }

    pub fn add(&self, other: &Hermitian) -> Hermitian {
        debug_assert_eq!(self.n, other.n);
        let a = self.a.iter().zip(&other.a).map(|(x, y)| x + y).collect();
        Hermitian { n: self.n, a }
    }

    pub fn scale(&self, s: f64) -> Hermitian {
        Hermitian { n: self.n, a: self.a.iter().map(|x| x * s).collect() }
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self.a[i * self.n + i].re).sum()
    }

    /// Directional quadratic form sum_kl a_kl v_k conj(v_l): the complex
    /// Laplacian of the associated potential along the direction v (moving
    /// z -> z + t v). Real for Hermitian matrices.
    pub fn quad_form(&self, v: &[C64]) -> f64 {
        let mut s = C64::new(0.0, 0.0);
        for i in 0..self.n {
            for j in 0..self.n {
                s += self.a[i * self.n + j] * v[i] * v[j].conj();
            }
        }
        s.re
    }

    /// Deviation from exact Hermitian symmetry, max |a_ij - conj(a_ji)|.
    pub fn asymmetry(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.n {
            for j in 0..self.n {
                let d = self.a[i * self.n + j] - self.a[j * self.n + i].conj();
                worst = worst.max(d.norm());
            }
        }
        worst
    }

    pub fn det(&self) -> f64 {
        match self.n {
            0 => 1.0,
            1 => self.a[0].re,
            2 => self.a[0].re * self.a[3].re - self.a[1].norm_sqr(),
            _ => {
                // Eigenvalue product; sizes here are small.
                self.eigenvalues().iter().product()
            }
        }
    }

    /// Eigenvalues by cyclic Jacobi, ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let n = self.n;
        if n == 1 {
            return vec![self.a[0].re];
        }
        let mut a = self.a.clone();
        let norm = libm::sqrt(a.iter().map(|x| x.norm_sqr()).sum::<f64>());
        let tol = JACOBI_TOL * norm.max(f64::MIN_POSITIVE);
        for _sweep in 0..100 {
            let mut off = 0.0f64;
            for p in 0..n {
                for q in (p + 1)..n {
                    off += 2.0 * a[p * n + q].norm_sqr();
                }
            }
            if libm::sqrt(off) <= tol {
                break;
            }
            for p in 0..n {
                for q in (p + 1)..n {
                    jacobi_rotate(&mut a, n, p, q);
                }
            }
        }
        let mut ev: Vec<f64> = (0..n).map(|i| a[i * n + i].re).collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues()[0]
    }

    /// True iff the smallest eigenvalue exceeds `margin`.
    pub fn is_positive(&self, margin: f64) -> bool {
        self.min_eigenvalue() > margin
    }

    /// Cofactor (adjugate) matrix, Hermitian for Hermitian input. Only needed
    /// for n <= 2.
    pub fn cofactor(&self) -> Hermitian {
        match self.n {
            1 => Hermitian { n: 1, a: vec![C64::new(1.0, 0.0)] },
            2 => {
                let mut m = Self::zeros(2);
                m.a[0] = C64::new(self.a[3].re, 0.0);
                m.a[3] = C64::new(self.a[0].re, 0.0);
                m.a[1] = -self.a[1];
                m.a[2] = -self.a[2];
                m
            }
            _ => panic!("cofactor only implemented for n <= 2"),
        }
    }
}

/// One complex Jacobi rotation annihilating the (p, q) entry.
fn jacobi_rotate(a: &mut [C64], n: usize, p: usize, q: usize) {
    let apq = a[p * n + q];
    if apq.norm() == 0.0 {
        return;
    }
    let app = a[p * n + p].re;
    let aqq = a[q * n + q].re;
    // Phase so the pivot becomes real, then a real 2x2 rotation.
    let phase = apq / apq.norm();
    let g = apq.norm();
    let theta = 0.5 * libm::atan2(2.0 * g, app - aqq);
    let c = libm::cos(theta);
    let s = libm::sin(theta);
    // Columns: v_p' = c*v_p + s*phase*v_q ; v_q' = -s*conj(phase)*v_p + c*v_q
    let sp = s * phase;
    for k in 0..n {
        let akp = a[k * n + p];
        let akq = a[k * n + q];
        a[k * n + p] = akp * c + akq * sp.conj();
        a[k * n + q] = -akp * sp + akq * c;
    }
    for k in 0..n {
        let apk = a[p * n + k];
        let aqk = a[q * n + k];
        a[p * n + k] = apk * c + aqk * sp;
        a[q * n + k] = -apk * sp.conj() + aqk * c;
    }
    a[p * n + q] = C64::new(0.0, 0.0);
    a[q * n + p] = C64::new(0.0, 0.0);
    a[p * n + p] = C64::new(a[p * n + p].re, 0.0);
    a[q * n + q] = C64::new(a[q * n + q].re, 0.0);
}
