//! Discrete complex Hessians and direction-circle Laplacians.
//!
//! Complex directions are taken from the Gaussian-integer lattice whenever
//! possible: for a lattice vector v the four points p +- v h, p +- iv h sit
//! on grid nodes exactly, their mean is a 4-point circle quadrature (exact
//! for harmonics up to degree 3), and no interpolation error enters the
//! scheme. Arbitrary unit directions fall back to an 8-sample circle with
//! multilinear interpolation.

use alloc::vec::Vec;

use crate::grid::ComplexGrid;
use crate::hermitian::Hermitian;
use crate::C64;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StencilError {
    /// A required sample node is excised or outside the lattice.
    StencilOutOfDomain,
}

impl core::fmt::Display for StencilError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            StencilError::StencilOutOfDomain => write!(f, "stencil leaves the computational domain"),
        }
    }
}

/// A complex direction on the Gaussian-integer lattice. `v` is the
/// unnormalized vector; the four stencil offsets are +-v and +-iv written in
/// real lattice coordinates.
#[derive(Clone, Debug)]
pub struct LatticeDirection {
    pub v: [C64; 2],
    pub norm_sq: f64,
    pub offsets: [[i64; 4]; 4],
}

impl LatticeDirection {
    pub fn new(n: usize, v: [C64; 2]) -> Self {
        let norm_sq = v[0].norm_sqr() + v[1].norm_sqr();
        let iv = [v[0] * C64::new(0.0, 1.0), v[1] * C64::new(0.0, 1.0)];
        let to_off = |w: &[C64; 2]| -> [i64; 4] {
            let mut o = [0i64; 4];
            for k in 0..n {
                o[2 * k] = libm::round(w[k].re) as i64;
                o[2 * k + 1] = libm::round(w[k].im) as i64;
            }
            o
        };
        let neg = |o: &[i64; 4]| [-o[0], -o[1], -o[2], -o[3]];
        let o1 = to_off(&v);
        let o2 = to_off(&iv);
        LatticeDirection { v, norm_sq, offsets: [o1, neg(&o1), o2, neg(&o2)] }
    }

    /// Unit vector along v.
    pub fn unit(&self) -> [C64; 2] {
        let s = 1.0 / libm::sqrt(self.norm_sq);
        [self.v[0] * s, self.v[1] * s]
    }
}

/// Gaussian integer as an (re, im) pair.
type Gint = (i64, i64);

fn gmul(a: Gint, b: Gint) -> Gint {
    (a.0 * b.0 - a.1 * b.1, a.0 * b.1 + a.1 * b.0)
}

fn gnorm(a: Gint) -> i64 {
    a.0 * a.0 + a.1 * a.1
}

/// Gaussian-integer gcd by norm-descending Euclid.
fn ggcd(mut a: Gint, mut b: Gint) -> Gint {
    while gnorm(b) != 0 {
        // nearest-integer quotient of a / b
        let nb = gnorm(b) as f64;
        let num = gmul(a, (b.0, -b.1));
        let q = (libm::round(num.0 as f64 / nb) as i64, libm::round(num.1 as f64 / nb) as i64);
        let r = (a.0 - gmul(q, b).0, a.1 - gmul(q, b).1);
        a = b;
        b = r;
    }
    a
}

/// Default direction family: primitive Gaussian-integer vectors of squared
/// norm <= `max_norm_sq`, one representative per unit-scalar class
/// {1, i, -1, -i}. In C^1 this is the single axis direction.
pub fn lattice_directions(n: usize, max_norm_sq: u32) -> Vec<LatticeDirection> {
    let c = |re: f64, im: f64| C64::new(re, im);
    if n == 1 {
        return alloc::vec![LatticeDirection::new(1, [c(1.0, 0.0), c(0.0, 0.0)])];
    }
    let bound = libm::sqrt(max_norm_sq as f64) as i64;
    let mut keys: Vec<[i64; 4]> = Vec::new();
    for are in -bound..=bound {
        for aim in -bound..=bound {
            for bre in -bound..=bound {
                for bim in -bound..=bound {
                    let a = (are, aim);
                    let b = (bre, bim);
                    let ns = gnorm(a) + gnorm(b);
                    if ns == 0 || ns > max_norm_sq as i64 {
                        continue;
                    }
                    // primitive: gcd is a unit
                    let g = if gnorm(a) == 0 { b } else if gnorm(b) == 0 { a } else { ggcd(a, b) };
                    if gnorm(g) != 1 {
                        continue;
                    }
                    // canonical representative over the unit-scalar class:
                    // lexicographically largest of the four multiples
                    let mut best = [i64::MIN; 4];
                    let mut u = (1i64, 0i64);
                    for _ in 0..4 {
                        let ua = gmul(u, a);
                        let ub = gmul(u, b);
                        let k = [ua.0, ua.1, ub.0, ub.1];
                        if k > best {
                            best = k;
                        }
                        u = gmul(u, (0, 1));
                    }
                    if [are, aim, bre, bim] == best {
                        keys.push(best);
                    }
                }
            }
        }
    }
    keys.sort_by_key(|k| (k[0] * k[0] + k[1] * k[1] + k[2] * k[2] + k[3] * k[3], *k));
    keys.dedup();
    keys.iter()
        .map(|k| LatticeDirection::new(2, [c(k[0] as f64, k[1] as f64), c(k[2] as f64, k[3] as f64)]))
        .collect()
}

/// Default squared-norm cutoff for the C^2 direction family.
pub const DEFAULT_DIRECTION_NORM_SQ: u32 = 5;

/// Snaps a unit complex vector to a lattice direction when it is a positive
/// multiple of a Gaussian-integer vector of squared norm <= 25.
pub fn snap_to_lattice(n: usize, v: &[C64; 2]) -> Option<LatticeDirection> {
    for ns in 1..=25u32 {
        let s = libm::sqrt(ns as f64);
        let w = [v[0] * s, v[1] * s];
        let mut ok = true;
        for k in 0..n {
            for comp in [w[k].re, w[k].im] {
                if (comp - libm::round(comp)).abs() > 1e-9 {
                    ok = false;
                }
            }
        }
        if n == 1 && (w[1].norm() > 1e-9) {
            ok = false;
        }
        if ok {
            let rounded = [
                C64::new(libm::round(w[0].re), libm::round(w[0].im)),
                C64::new(libm::round(w[1].re), libm::round(w[1].im)),
            ];
            return Some(LatticeDirection::new(n, rounded));
        }
    }
    None
}

/// Second-order centered approximation of the complex Hessian
/// d2 u / dz_j dzbar_k at an interior node. Exact on complex quadratics.
pub fn complex_hessian(u: &ComplexGrid, p: usize) -> Result<Hermitian, StencilError> {
    let d = &u.domain;
    let n = d.complex_dim();
    let h = d.spacing();
    let h2 = h * h;
    let val = |off: &[i64; 4]| -> Result<f64, StencilError> {
        let q = d.neighbor(p, off).ok_or(StencilError::StencilOutOfDomain)?;
        if !u.is_valued(q) {
            return Err(StencilError::StencilOutOfDomain);
        }
        Ok(u.values[q])
    };
    if !u.is_valued(p) {
        return Err(StencilError::StencilOutOfDomain);
    }
    let center = u.values[p];
    let mut m = Hermitian::zeros(n);
    for k in 0..n {
        // (u_xx + u_yy)/4 on the axis pair of z_k
        let mut lap = -4.0 * center;
        for a in [2 * k, 2 * k + 1] {
            let mut off = [0i64; 4];
            off[a] = 1;
            lap += val(&off)?;
            off[a] = -1;
            lap += val(&off)?;
        }
        m.set(k, k, C64::new(lap / (4.0 * h2), 0.0));
    }
    if n == 2 {
        // d2/dz1 dzbar2 = ((Dx1x2 + Dy1y2) + i (Dx1y2 - Dy1x2)) / 4
        let cross = |a: usize, b: usize| -> Result<f64, StencilError> {
            let mut s = 0.0;
            for (sa, sb, sign) in [(1i64, 1i64, 1.0), (1, -1, -1.0), (-1, 1, -1.0), (-1, -1, 1.0)] {
                let mut off = [0i64; 4];
                off[a] = sa;
                off[b] = sb;
                s += sign * val(&off)?;
            }
            Ok(s / (4.0 * h2))
        };
        let re = cross(0, 2)? + cross(1, 3)?;
        let im = cross(0, 3)? - cross(1, 2)?;
        m.set(0, 1, C64::new(re / 4.0, im / 4.0));
    }
    Ok(m)
}

/// Mean of u over the direction circle minus the center, scaled by
/// 4 / radius^2; approximates 4 v* (ddbar u) v. Lattice directions are
/// sampled exactly; general directions use an 8-point circle with
/// multilinear interpolation.
pub fn min_direction_laplacian(
    u: &ComplexGrid,
    p: usize,
    directions: &[[C64; 2]],
) -> Result<f64, StencilError> {
    assert!(!directions.is_empty(), "direction list must be nonempty");
    let d = &u.domain;
    let n = d.complex_dim();
    let h = d.spacing();
    if !u.is_valued(p) {
        return Err(StencilError::StencilOutOfDomain);
    }
    let center = u.values[p];
    let mut best = f64::INFINITY;
    for v in directions {
        let m = if let Some(lat) = snap_to_lattice(n, v) {
            let mut s = 0.0;
            for off in &lat.offsets {
                let q = d.neighbor(p, off).ok_or(StencilError::StencilOutOfDomain)?;
                if !u.is_valued(q) {
                    return Err(StencilError::StencilOutOfDomain);
                }
                s += u.values[q];
            }
            let r2 = lat.norm_sq * h * h;
            (s / 4.0 - center) * 4.0 / r2
        } else {
            let x0 = u.node_coords(p);
            let mut s = 0.0;
            for k in 0..8 {
                let th = core::f64::consts::TAU * k as f64 / 8.0;
                let e = C64::new(libm::cos(th), libm::sin(th));
                let mut x = x0;
                for j in 0..n {
                    let w = v[j] * e * h;
                    x[2 * j] += w.re;
                    x[2 * j + 1] += w.im;
                }
                s += u.sample(&x[..2 * n]).ok_or(StencilError::StencilOutOfDomain)?;
            }
            (s / 8.0 - center) * 4.0 / (h * h)
        };
        if m < best {
            best = m;
        }
    }
    Ok(best)
}

/// Fibonacci-sphere sample of CP^1 mapped to unit vectors in C^2; used for
/// dense direction scans in tests and reports.
pub fn fibonacci_directions(count: usize) -> Vec<[C64; 2]> {
    let golden = (1.0 + libm::sqrt(5.0)) / 2.0;
    (0..count)
        .map(|i| {
            let z = 1.0 - 2.0 * (i as f64 + 0.5) / count as f64;
            let theta = libm::acos(z);
            let phi = core::f64::consts::TAU * (i as f64 / golden % 1.0);
            let half = theta / 2.0;
            [
                C64::new(libm::cos(half), 0.0),
                C64::new(libm::sin(half) * libm::cos(phi), libm::sin(half) * libm::sin(phi)),
            ]
        })
        .collect()
}
