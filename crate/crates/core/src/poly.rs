//! Multivariate polynomials with complex coefficients in up to two
//! variables. These carry the holomorphic singularity data; keeping them
//! polynomial makes the common-zero certificate decidable by sampling and
//! the derivative bookkeeping exact.

use alloc::vec::Vec;

use crate::C64;

/// Sum of monomials c * z1^a * z2^b (b unused when nvars == 1).
#[derive(Clone, Debug, PartialEq)]
pub struct Poly {
    pub nvars: usize,
    pub terms: Vec<(C64, [u32; 2])>,
}

impl Poly {
    pub fn new(nvars: usize, terms: Vec<(C64, [u32; 2])>) -> Self {
        debug_assert!(nvars == 1 || nvars == 2);
        Poly { nvars, terms }
    }

    /// The coordinate monomial z_{var}.
    pub fn coordinate(nvars: usize, var: usize) -> Self {
        let mut e = [0u32; 2];
        e[var] = 1;
        Poly::new(nvars, alloc::vec![(C64::new(1.0, 0.0), e)])
    }

    pub fn monomial(nvars: usize, coeff: C64, exps: [u32; 2]) -> Self {
        Poly::new(nvars, alloc::vec![(coeff, exps)])
    }

    pub fn eval(&self, z: &[C64]) -> C64 {
        let mut s = C64::new(0.0, 0.0);
        for (c, e) in &self.terms {
            let mut t = *c;
            for v in 0..self.nvars {
                t *= z[v].powu(e[v]);
            }
            s += t;
        }
        s
    }

    /// Formal holomorphic partial derivative with respect to z_{var}.
    pub fn derivative(&self, var: usize) -> Poly {
        let mut terms = Vec::new();
        for (c, e) in &self.terms {
            if e[var] > 0 {
                let mut e2 = *e;
                e2[var] -= 1;
                terms.push((c * e[var] as f64, e2));
            }
        }
        Poly::new(self.nvars, terms)
    }

    pub fn degree(&self) -> u32 {
        self.terms.iter().map(|(_, e)| e[0] + e[1]).max().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.iter().all(|(c, _)| c.norm() == 0.0)
    }
}
