//! Pointwise second-order Wirtinger jets of real-valued functions.
//!
//! An `RJet` carries (F, dF/dz_k, d2F/dz_k dzbar_l) at one point for a real
//! function F of up to two complex variables. Sums, products, logs, powers
//! and composition with C^2 radial profiles or holomorphic maps stay inside
//! the algebra, so i del-delbar coefficient matrices of all the glued and
//! blow-up potentials come out exact (no finite differencing).

use crate::hermitian::Hermitian;
use crate::poly::Poly;
use crate::C64;

/// Real value, holomorphic gradient, Hermitian complex Hessian (row-major
/// k,l entry = d2F / dz_k dzbar_l). Unused slots stay zero.
#[derive(Clone, Copy, Debug)]
pub struct RJet {
    pub n: usize,
    pub v: f64,
    pub d: [C64; 2],
    pub h: [[C64; 2]; 2],
}

impl RJet {
    pub fn constant(n: usize, v: f64) -> Self {
        RJet { n, v, d: [C64::new(0.0, 0.0); 2], h: [[C64::new(0.0, 0.0); 2]; 2] }
    }

    pub fn hessian(&self) -> Hermitian {
        let mut m = Hermitian::zeros(self.n);
        for k in 0..self.n {
            for l in k..self.n {
                m.set(k, l, self.h[k][l]);
            }
        }
        m
    }

    pub fn add(&self, o: &RJet) -> RJet {
        let mut r = *self;
        r.v += o.v;
        for k in 0..self.n {
            r.d[k] += o.d[k];
            for l in 0..self.n {
                r.h[k][l] += o.h[k][l];
            }
        }
        r
    }

    pub fn scale(&self, s: f64) -> RJet {
        let mut r = *self;
        r.v *= s;
        for k in 0..self.n {
            r.d[k] *= s;
            for l in 0..self.n {
                r.h[k][l] *= s;
            }
        }
        r
    }

    /// Product of two real-valued jets. Uses dbar F = conj(dF) for real F.
    pub fn mul(&self, o: &RJet) -> RJet {
        let mut r = RJet::constant(self.n, self.v * o.v);
        for k in 0..self.n {
            r.d[k] = self.d[k] * o.v + o.d[k] * self.v;
            for l in 0..self.n {
                r.h[k][l] = self.h[k][l] * o.v
                    + o.h[k][l] * self.v
                    + self.d[k] * o.d[l].conj()
                    + o.d[k] * self.d[l].conj();
            }
        }
        r
    }

    /// log of a positive real jet.
    pub fn ln(&self) -> RJet {
        let s = self.v;
        debug_assert!(s > 0.0);
        let mut r = RJet::constant(self.n, libm::log(s));
        for k in 0..self.n {
            r.d[k] = self.d[k] / s;
            for l in 0..self.n {
                r.h[k][l] = self.h[k][l] / s - self.d[k] * self.d[l].conj() / (s * s);
            }
        }
        r
    }

    /// sqrt of a positive real jet.
    pub fn sqrt(&self) -> RJet {
        let s = self.v;
        debug_assert!(s > 0.0);
        let rt = libm::sqrt(s);
        let mut r = RJet::constant(self.n, rt);
        for k in 0..self.n {
            r.d[k] = self.d[k] / (2.0 * rt);
            for l in 0..self.n {
                r.h[k][l] =
                    self.h[k][l] / (2.0 * rt) - self.d[k] * self.d[l].conj() / (4.0 * rt * s);
            }
        }
        r
    }

    /// Composition g(F) with a scalar C^2 profile given by (g, g', g'').
    pub fn compose_scalar(&self, g: f64, dg: f64, ddg: f64) -> RJet {
        let mut r = RJet::constant(self.n, g);
        for k in 0..self.n {
            r.d[k] = self.d[k] * dg;
            for l in 0..self.n {
                r.h[k][l] = self.h[k][l] * dg + self.d[k] * self.d[l].conj() * ddg;
            }
        }
        r
    }

    /// Pullback along a holomorphic map with Jacobian `jac` (jac[k][a] =
    /// d w_k / d u_a evaluated at the point): the jet of F(w(u)).
    /// Second-order terms of the map drop out because the map is holomorphic
    /// and the Hessian is the mixed (1,1) block.
    pub fn pullback(&self, n_src: usize, jac: &[[C64; 2]; 2]) -> RJet {
        let mut r = RJet::constant(n_src, self.v);
        for a in 0..n_src {
            let mut da = C64::new(0.0, 0.0);
            for k in 0..self.n {
                da += self.d[k] * jac[k][a];
            }
            r.d[a] = da;
        }
        for a in 0..n_src {
            for b in 0..n_src {
                let mut hab = C64::new(0.0, 0.0);
                for k in 0..self.n {
                    for l in 0..self.n {
                        hab += jac[k][a] * self.h[k][l] * jac[l][b].conj();
                    }
                }
                r.h[a][b] = hab;
            }
        }
        r
    }
}

/// Jet of |z - p|^2 at z (euclidean displacement `d`, so tori can pass the
/// wrapped representative).
pub fn dist_sq_jet(n: usize, d: &[C64]) -> RJet {
    let mut r = RJet::constant(n, 0.0);
    for k in 0..n {
        r.v += d[k].norm_sqr();
        r.d[k] = d[k].conj();
        r.h[k][k] = C64::new(1.0, 0.0);
    }
    r
}

/// Jet of |z_var - p|^2 as a function of all n variables (displacement `w`
/// in the single active variable).
pub fn modsq_var_jet(n: usize, var: usize, w: C64) -> RJet {
    let mut r = RJet::constant(n, w.norm_sqr());
    r.d[var] = w.conj();
    r.h[var][var] = C64::new(1.0, 0.0);
    r
}

/// Jet of S = sum_j |f_j(z)|^2 for holomorphic polynomials f_j evaluated at
/// `z` (optionally recentered by the caller). S_k = sum f_j' conj(f_j),
/// S_{k lbar} = sum (d_k f_j) conj(d_l f_j).
pub fn sum_sq_jet(n: usize, polys: &[Poly], z: &[C64]) -> RJet {
    let mut r = RJet::constant(n, 0.0);
    for f in polys {
        let v = f.eval(z);
        r.v += v.norm_sqr();
        let mut dv = [C64::new(0.0, 0.0); 2];
        for k in 0..n {
            dv[k] = f.derivative(k).eval(z);
            r.d[k] += dv[k] * v.conj();
        }
        for k in 0..n {
            for l in 0..n {
                r.h[k][l] += dv[k] * dv[l].conj();
            }
        }
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    /// Finite-difference check of a jet: value, Wirtinger gradient and the
    /// mixed Hessian against central differences of the scalar evaluation.
    fn check_against_fd(n: usize, f: impl Fn(&[C64]) -> f64, jet_at: impl Fn(&[C64]) -> RJet, z0: &[C64]) {
        let h = 1e-5;
        let j = jet_at(z0);
        assert!((j.v - f(z0)).abs() < 1e-12);
        let dirs = [c(h, 0.0), c(0.0, h)];
        for k in 0..n {
            // dF/dz_k = (F_x - i F_y)/2 along axis k
            let mut zp = [z0[0], *z0.get(1).unwrap_or(&c(0.0, 0.0))];
            let mut zm = zp;
            zp[k] += dirs[0];
            zm[k] -= dirs[0];
            let fx = (f(&zp) - f(&zm)) / (2.0 * h);
            zp = [z0[0], *z0.get(1).unwrap_or(&c(0.0, 0.0))];
            zm = zp;
            zp[k] += dirs[1];
            zm[k] -= dirs[1];
            let fy = (f(&zp) - f(&zm)) / (2.0 * h);
            let fd = c(fx / 2.0, -fy / 2.0);
            assert!((j.d[k] - fd).norm() < 1e-6, "grad k={k}: {:?} vs {:?}", j.d[k], fd);
        }
        // d2F/dz_k dzbar_k via Laplacian in axis k: (F(+x)+F(-x)+F(+y)+F(-y)-4F)/(4h^2)
        for k in 0..n {
            let base = [z0[0], *z0.get(1).unwrap_or(&c(0.0, 0.0))];
            let mut s = -4.0 * f(&base);
            for d in dirs {
                let mut zp = base;
                let mut zm = base;
                zp[k] += d;
                zm[k] -= d;
                s += f(&zp) + f(&zm);
            }
            let fd = s / (4.0 * h * h);
            assert!((j.h[k][k].re - fd).abs() < 1e-4, "hess k={k}: {} vs {}", j.h[k][k].re, fd);
        }
    }

    #[test]
    fn dist_sq_jet_matches_fd() {
        let p = [c(0.1, -0.2), c(0.3, 0.0)];
        let z0 = [c(0.5, 0.4), c(-0.3, 0.2)];
        let f = |z: &[C64]| (z[0] - p[0]).norm_sqr() + (z[1] - p[1]).norm_sqr();
        let jet = |z: &[C64]| dist_sq_jet(2, &[z[0] - p[0], z[1] - p[1]]);
        check_against_fd(2, f, jet, &z0);
    }

    #[test]
    fn log_sum_sq_matches_fd() {
        // F = log(|z1^2|^2 + |z2|^2)
        let polys = vec![
            Poly::monomial(2, c(1.0, 0.0), [2, 0]),
            Poly::monomial(2, c(1.0, 0.0), [0, 1]),
        ];
        let z0 = [c(0.6, 0.1), c(0.2, -0.4)];
        let f = |z: &[C64]| {
            let s: f64 = polys.iter().map(|p| p.eval(z).norm_sqr()).sum();
            libm::log(s)
        };
        let jet = |z: &[C64]| sum_sq_jet(2, &polys, z).ln();
        check_against_fd(2, f, jet, &z0);
    }

    #[test]
    fn log_one_plus_modsq_has_unit_hessian_at_origin() {
        // d ddbar log(1 + |z|^2) = (1 + |z|^2)^{-2} at the origin in C^1.
        let one = RJet::constant(1, 1.0);
        let z0 = [c(0.0, 0.0)];
        let j = one.add(&dist_sq_jet(1, &z0)).ln();
        assert!((j.h[0][0].re - 1.0).abs() < 1e-14);
    }

    #[test]
    fn product_rule_matches_fd() {
        let f = |z: &[C64]| {
            let a = z[0].norm_sqr();
            let b = 1.0 + (z[1] - c(0.2, 0.0)).norm_sqr();
            a * libm::log(b)
        };
        let jet = |z: &[C64]| {
            let a = modsq_var_jet(2, 0, z[0]);
            let mut b = modsq_var_jet(2, 1, z[1] - c(0.2, 0.0));
            b.v += 1.0;
            a.mul(&b.ln())
        };
        check_against_fd(2, f, jet, &[c(0.3, -0.1), c(0.5, 0.25)]);
    }

    #[test]
    fn pullback_along_blowup_chart() {
        // F = |w1|^2 + |w2|^2 pulled back along pi(zeta, theta) = (zeta, zeta*theta)
        // equals |zeta|^2 (1 + |theta|^2); check Hessian entries at a point.
        let (zeta, theta) = (c(0.5, 0.2), c(-0.3, 0.7));
        let w = [zeta, zeta * theta];
        let fjet = dist_sq_jet(2, &w);
        let jac = [[c(1.0, 0.0), c(0.0, 0.0)], [theta, zeta]];
        let pulled = fjet.pullback(2, &jac);
        // direct jet of |zeta|^2 * (1 + |theta|^2)
        let a = modsq_var_jet(2, 0, zeta);
        let mut b = modsq_var_jet(2, 1, theta);
        b.v += 1.0;
        let direct = a.mul(&b);
        assert!((pulled.v - direct.v).abs() < 1e-13);
        for k in 0..2 {
            assert!((pulled.d[k] - direct.d[k]).norm() < 1e-13);
            for l in 0..2 {
                assert!((pulled.h[k][l] - direct.h[k][l]).norm() < 1e-13);
            }
        }
    }
}
