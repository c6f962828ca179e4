//! Rotation-invariant geodesic rays from prescribed central-fiber
//! singularities.
//!
//! On X x D^x with X the projective line, a potential invariant under both
//! circle actions depends only on (s, t) = (log|z|^2, log|w|^2), and the
//! homogeneous Monge-Ampere equation reduces to the real one,
//! det D^2 U = 0, for the convex total potential
//! U(s, t) = log(1 + e^s) + G(s, t). The reduced problem is solved by the
//! monotone pair-mean envelope U(p) <- min over lattice directions of
//! (U(p + o) + U(p - o)) / 2 on a truncated rectangle, with the glued
//! singular trace as deep-end data. Rotation invariance of every slice is
//! exact by construction.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::singularity::CutoffProfile;

#[derive(Clone, Debug)]
pub enum RayError {
    /// Pole data must be monomial so |f|^2 is bi-rotation invariant.
    SymmetryViolation(String),
    /// Common zero of the tuple away from the central-fiber pole.
    DegenerateTuple(String),
    InvalidConfig(String),
    NonConvergence { sweeps: usize },
}

impl core::fmt::Display for RayError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            RayError::SymmetryViolation(m) => write!(f, "symmetry violation: {m}"),
            RayError::DegenerateTuple(m) => write!(f, "degenerate tuple: {m}"),
            RayError::InvalidConfig(m) => write!(f, "invalid ray config: {m}"),
            RayError::NonConvergence { sweeps } => {
                write!(f, "ray envelope did not converge in {sweeps} sweeps")
            }
        }
    }
}

/// One monomial |c| z^a w^b of the holomorphic tuple; only the modulus of
/// the coefficient survives rotation averaging.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RayMonomial {
    pub modulus: f64,
    pub deg_z: u32,
    pub deg_w: u32,
}

#[derive(Clone, Debug)]
pub struct RayProblem {
    /// Truncation depth T in t = log|w| units; the reduced rectangle covers
    /// log|w|^2 in [-2T, 0].
    pub depth: f64,
    /// Half-width S of the s = log|z|^2 window.
    pub s_half: f64,
    /// Grid cells per axis of the reduced rectangle.
    pub resolution: usize,
    /// Holomorphic tuple (2 monomials) vanishing only at the central-fiber
    /// pole.
    pub f: Vec<RayMonomial>,
    pub epsilon: f64,
    pub cutoff: CutoffProfile,
    /// Number of reported time slices over [-T/2, 0].
    pub slices: usize,
}

#[derive(Clone, Debug)]
pub struct RaySolution {
    /// Reduced total potential U on the (s, t) rectangle, row-major with s
    /// varying fastest.
    pub u: Vec<f64>,
    pub s_len: usize,
    pub t_len: usize,
    pub s_step: f64,
    pub t_step: f64,
    pub s_min: f64,
    pub t_min: f64,
    /// Potential slices phi_tau(s) = G(s, 2 tau) at the reported times.
    pub slice_times: Vec<f64>,
    pub slices: Vec<Vec<f64>>,
    pub sweeps: usize,
}

/// Sum of |f_j|^2 in reduced coordinates: S(s, t) = sum m^2 e^(a s + b t).
fn tuple_sum_sq(f: &[RayMonomial], s: f64, t: f64) -> f64 {
    f.iter()
        .map(|m| m.modulus * m.modulus * libm::exp(m.deg_z as f64 * s + m.deg_w as f64 * t))
        .sum()
}

impl RayProblem {
    fn validate(&self) -> Result<(), RayError> {
        if self.f.len() != 2 {
            return Err(RayError::InvalidConfig("the tuple needs exactly 2 components".into()));
        }
        if self.f.iter().any(|m| m.modulus <= 0.0) {
            return Err(RayError::SymmetryViolation(
                "zero monomial breaks the common-zero requirement".into(),
            ));
        }
        // common zero only at (z, w) = (0, 0): the tuple must pin z and w
        // separately
        let pins_z = self.f.iter().any(|m| m.deg_w == 0 && m.deg_z > 0);
        let pins_w = self.f.iter().any(|m| m.deg_z == 0 && m.deg_w > 0);
        if !(pins_z && pins_w) {
            return Err(RayError::DegenerateTuple(
                "tuple must contain a pure z^a and a pure w^b monomial so the only common zero is the central-fiber pole"
                    .into(),
            ));
        }
        if self.depth <= 0.0 || self.s_half <= 0.0 || self.resolution < 16 || self.slices < 3 {
            return Err(RayError::InvalidConfig(
                "depth, window and resolution must be positive (slices >= 3)".into(),
            ));
        }
        // rotation invariance holds for monomials by construction; spot
        // check the reduced representation anyway
        let (s0, t0) = (-0.3, -1.2);
        let direct: f64 = self
            .f
            .iter()
            .map(|m| {
                let z = libm::exp(0.5 * s0);
                let w = libm::exp(0.5 * t0);
                let v = m.modulus * libm::pow(z, m.deg_z as f64) * libm::pow(w, m.deg_w as f64);
                v * v
            })
            .sum();
        if ((direct - tuple_sum_sq(&self.f, s0, t0)) / direct).abs() > 1e-12 {
            return Err(RayError::SymmetryViolation("reduced tuple mismatch".into()));
        }
        Ok(())
    }

    /// Fubini-Study chart potential in reduced coordinates.
    fn base(&self, s: f64) -> f64 {
        libm::log(1.0 + libm::exp(s))
    }

    /// Glued singular potential in reduced coordinates (weight epsilon).
    fn glued(&self, s: f64, t: f64) -> f64 {
        let rho = libm::sqrt(libm::exp(s) + libm::exp(t));
        let (q, _, _) = self.cutoff.eval(rho);
        if q == 0.0 {
            return self.epsilon;
        }
        let sum = tuple_sum_sq(&self.f, s, t);
        self.epsilon * (q * libm::log(sum) + (1.0 - q))
    }

    /// Reduced G value pinned at the deep end (truncated-ray data).
    fn deep_data(&self, s: f64) -> f64 {
        self.glued(s, -2.0 * self.depth) - self.epsilon
    }
}

/// Primitive integer directions of squared norm <= 13 in the plane.
fn plane_directions() -> Vec<[i64; 2]> {
    let mut dirs = Vec::new();
    for a in 0..=3i64 {
        for b in -3..=3i64 {
            if a == 0 && b <= 0 {
                continue;
            }
            let ns = a * a + b * b;
            if ns == 0 || ns > 13 {
                continue;
            }
            if gcd(a.unsigned_abs(), b.unsigned_abs()) != 1 {
                continue;
            }
            dirs.push([a, b]);
        }
    }
    dirs.sort_by_key(|d| (d[0] * d[0] + d[1] * d[1], d[0], d[1]));
    dirs
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

pub fn solve_ray(p: &RayProblem) -> Result<RaySolution, RayError> {
    p.validate()?;
    let s_len = p.resolution + 1;
    let t_len = p.resolution + 1;
    let s_step = 2.0 * p.s_half / p.resolution as f64;
    let t_step = 2.0 * p.depth / p.resolution as f64;
    let s_min = -p.s_half;
    let t_min = -2.0 * p.depth;
    let idx = |is: usize, it: usize| it * s_len + is;
    let s_of = |is: usize| s_min + is as f64 * s_step;
    let t_of = |it: usize| t_min + it as f64 * t_step;

    // Dirichlet data: the outer fiber |w| = 1 and the s-edges carry G = 0,
    // the deep end the glued singular trace
    let mut u = vec![0.0f64; s_len * t_len];
    let mut fixed = vec![false; s_len * t_len];
    for is in 0..s_len {
        for it in 0..t_len {
            let (s, t) = (s_of(is), t_of(it));
            let _ = t;
            let edge = is == 0 || is == s_len - 1 || it == 0 || it == t_len - 1;
            if edge {
                fixed[idx(is, it)] = true;
                let g = if it == 0 { p.deep_data(s) } else { 0.0 };
                u[idx(is, it)] = p.base(s) + g;
            }
        }
    }
    // upper-bound start: a convex function lies below the segment
    // interpolants of its edge values
    for is in 1..s_len - 1 {
        for it in 1..t_len - 1 {
            let a = it as f64 / (t_len - 1) as f64;
            let b = is as f64 / (s_len - 1) as f64;
            let tv = (1.0 - a) * u[idx(is, 0)] + a * u[idx(is, t_len - 1)];
            let sv = (1.0 - b) * u[idx(0, it)] + b * u[idx(s_len - 1, it)];
            u[idx(is, it)] = tv.min(sv);
        }
    }

    let dirs = plane_directions();
    let tol = 1e-8 * (1.0 + 2.0 * p.depth.max(p.s_half));
    let max_sweeps = 200_000usize;
    let mut sweeps = 0usize;
    loop {
        let mut update = 0.0f64;
        for it in 1..t_len - 1 {
            for is in 1..s_len - 1 {
                let i = idx(is, it);
                let mut best = f64::INFINITY;
                for d in &dirs {
                    let (js, jt) = (is as i64 + d[0], it as i64 + d[1]);
                    let (ks, kt) = (is as i64 - d[0], it as i64 - d[1]);
                    if js < 0
                        || jt < 0
                        || ks < 0
                        || kt < 0
                        || js >= s_len as i64
                        || jt >= t_len as i64
                        || ks >= s_len as i64
                        || kt >= t_len as i64
                    {
                        continue;
                    }
                    let m = 0.5
                        * (u[idx(js as usize, jt as usize)] + u[idx(ks as usize, kt as usize)]);
                    if m < best {
                        best = m;
                    }
                }
                if best.is_finite() && best < u[i] {
                    update = update.max(u[i] - best);
                    u[i] = best;
                }
            }
        }
        sweeps += 1;
        if update < tol {
            break;
        }
        if sweeps >= max_sweeps {
            return Err(RayError::NonConvergence { sweeps });
        }
    }

    // report slices phi_tau(s) = U(s, 2 tau) - P(s) for tau in [-T/2, 0]
    let mut slice_times = Vec::new();
    let mut slices = Vec::new();
    for k in 0..p.slices {
        let tau = -0.5 * p.depth * k as f64 / (p.slices - 1) as f64;
        let t = 2.0 * tau;
        let x = (t - t_min) / t_step;
        let row = libm::floor(x).min((t_len - 2) as f64).max(0.0);
        let frac = x - row;
        let r0 = row as usize;
        let mut slice = Vec::with_capacity(s_len);
        for is in 0..s_len {
            let v = (1.0 - frac) * u[idx(is, r0)] + frac * u[idx(is, r0 + 1)];
            slice.push(v - p.base(s_of(is)));
        }
        slice_times.push(tau);
        slices.push(slice);
    }
    Ok(RaySolution { u, s_len, t_len, s_step, t_step, s_min, t_min, slice_times, slices, sweeps })
}

/// Minimum over consecutive slice pairs of the sup-norm difference;
/// positive for pole-carrying rays, zero for the trivial ray.
pub fn ray_nontriviality(slices: &[Vec<f64>]) -> f64 {
    assert!(slices.len() >= 3, "need at least 3 slices");
    let mut min_gap = f64::INFINITY;
    for w in slices.windows(2) {
        let gap =
            w[0].iter().zip(&w[1]).map(|(a, b)| (a - b).abs()).fold(0.0f64, f64::max);
        min_gap = min_gap.min(gap);
    }
    min_gap
}

/// Interior probe diagnostics of the reduced solution.
#[derive(Clone, Debug)]
pub struct RayDiagnostics {
    /// median over interior probes of the geodesic defect
    /// 4 |U_tt - U_st^2 / U_ss|. Envelope solutions are C^{1,1} with
    /// genuine creases where the defect does not decay pointwise; the
    /// median reads the smooth samples the creases cannot dominate.
    pub geodesic_residual: f64,
    /// max over the same probes, creases included.
    pub geodesic_residual_max: f64,
    /// curvature scale 4 max(|U_tt|, U_ss) over the probes.
    pub scale: f64,
    /// most negative fiber curvature U_ss (>= -tol for fiberwise psh).
    pub fiber_floor: f64,
    /// worst midpoint-convexity violation along axis segments.
    pub convexity_defect: f64,
}

pub fn ray_diagnostics(sol: &RaySolution) -> RayDiagnostics {
    let idx = |is: usize, it: usize| it * sol.s_len + is;
    let mut defects: Vec<f64> = Vec::new();
    let mut scale = 0.0f64;
    let mut fiber_floor = f64::INFINITY;
    let mut convexity = 0.0f64;
    let (hs, ht) = (sol.s_step, sol.t_step);
    // central probe window: middle half in s, reporting band in t
    let s_lo = sol.s_len / 4;
    let s_hi = 3 * sol.s_len / 4;
    let t_lo = sol.t_len / 2;
    let t_hi = sol.t_len - 2;
    for it in t_lo..t_hi {
        for is in s_lo..s_hi {
            let c = sol.u[idx(is, it)];
            let uss = (sol.u[idx(is + 1, it)] - 2.0 * c + sol.u[idx(is - 1, it)]) / (hs * hs);
            let utt = (sol.u[idx(is, it + 1)] - 2.0 * c + sol.u[idx(is, it - 1)]) / (ht * ht);
            let ust = (sol.u[idx(is + 1, it + 1)] - sol.u[idx(is + 1, it - 1)]
                - sol.u[idx(is - 1, it + 1)]
                + sol.u[idx(is - 1, it - 1)])
                / (4.0 * hs * ht);
            fiber_floor = fiber_floor.min(uss);
            if uss > 1e-9 {
                defects.push(4.0 * (utt - ust * ust / uss).abs());
                scale = scale.max(4.0 * utt.abs().max(uss));
            }
            convexity = convexity.max(2.0 * c - sol.u[idx(is + 1, it)] - sol.u[idx(is - 1, it)]);
            convexity = convexity.max(2.0 * c - sol.u[idx(is, it + 1)] - sol.u[idx(is, it - 1)]);
        }
    }
    defects.sort_by(f64::total_cmp);
    let median = defects.get(defects.len() / 2).copied().unwrap_or(0.0);
    let max = defects.last().copied().unwrap_or(0.0);
    RayDiagnostics {
        geodesic_residual: median,
        geodesic_residual_max: max,
        scale,
        fiber_floor: if fiber_floor.is_finite() { fiber_floor } else { 0.0 },
        convexity_defect: convexity,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pole_ray(res: usize) -> RayProblem {
        RayProblem {
            depth: 4.0,
            s_half: 4.0,
            resolution: res,
            f: vec![
                RayMonomial { modulus: 1.0, deg_z: 1, deg_w: 0 },
                RayMonomial { modulus: 1.0, deg_z: 0, deg_w: 1 },
            ],
            epsilon: 0.2,
            cutoff: CutoffProfile::new(0.15, 0.45),
            slices: 9,
        }
    }

    #[test]
    fn zero_data_ray_is_static() {
        let mut p = pole_ray(64);
        p.epsilon = 0.0;
        let sol = solve_ray(&p).unwrap();
        for slice in &sol.slices {
            for v in slice {
                assert!(v.abs() < 1e-8, "{v}");
            }
        }
        assert!(ray_nontriviality(&sol.slices) < 1e-8);
    }

    #[test]
    fn pole_ray_is_nontrivial_and_grows() {
        let sol = solve_ray(&pole_ray(96)).unwrap();
        assert!(ray_nontriviality(&sol.slices) > 1e-2);
        let first = &sol.slices[0];
        let mut last = 0.0;
        for slice in sol.slices.iter().skip(1) {
            let d = slice
                .iter()
                .zip(first)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0f64, f64::max);
            assert!(d > last - 1e-12, "growth broke: {d} after {last}");
            last = d;
        }
        assert!(last > 0.1, "total growth {last}");
    }

    #[test]
    fn geodesic_residual_decays_under_refinement() {
        let coarse = ray_diagnostics(&solve_ray(&pole_ray(64)).unwrap());
        let fine = ray_diagnostics(&solve_ray(&pole_ray(128)).unwrap());
        assert!(
            fine.geodesic_residual <= 0.7 * coarse.geodesic_residual + 1e-9,
            "coarse {} fine {}",
            coarse.geodesic_residual,
            fine.geodesic_residual
        );
        assert!(
            coarse.geodesic_residual <= 0.1 * coarse.scale.max(1.0),
            "residual {} scale {}",
            coarse.geodesic_residual,
            coarse.scale
        );
    }

    #[test]
    fn solution_is_convex_and_fiberwise_psh() {
        let sol = solve_ray(&pole_ray(96)).unwrap();
        let d = ray_diagnostics(&sol);
        assert!(d.convexity_defect < 1e-7, "midpoint convexity broke: {}", d.convexity_defect);
        assert!(d.fiber_floor > -1e-9, "fiber floor {}", d.fiber_floor);
    }

    #[test]
    fn linear_in_t_ray_has_constant_gap() {
        // constructed input: phi_t = phi_0 + c t gives gap |c| dt
        let slices: Vec<Vec<f64>> = (0..5)
            .map(|k| {
                let t = -0.5 * k as f64;
                (0..10).map(|i| i as f64 * 0.1 + 2.0 * t).collect()
            })
            .collect();
        let gap = ray_nontriviality(&slices);
        assert!((gap - 1.0).abs() < 1e-12, "{gap}");
    }

    #[test]
    fn degenerate_tuple_rejected() {
        let mut p = pole_ray(64);
        p.f = vec![
            RayMonomial { modulus: 1.0, deg_z: 1, deg_w: 0 },
            RayMonomial { modulus: 1.0, deg_z: 2, deg_w: 0 },
        ];
        assert!(matches!(solve_ray(&p), Err(RayError::DegenerateTuple(_))));
    }
}
