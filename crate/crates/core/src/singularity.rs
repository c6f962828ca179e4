//! Pole data, cutoff profiles, the glued singular potential and the
//! degenerate background forms it induces.
//!
//! Each pole carries a holomorphic tuple f = (f_1, ..., f_n) in coordinates
//! centered at the pole, a weight, and cutoff radii. The glued potential is
//!   sum_m  eps_m [ psi_m log( sum_j |f_jm|^2 ) + (1 - psi_m) ],
//! smooth off the poles, equal to the singular log model inside r_in and the
//! constant eps_m outside r_out. All i del-delbar coefficient matrices come
//! from exact jets, never finite differences.

use alloc::string::String;
use alloc::vec::Vec;

use crate::grid::DomainSpec;
use crate::hermitian::Hermitian;
use crate::jet::{dist_sq_jet, sum_sq_jet, RJet};
use crate::poly::Poly;
use crate::rng::SplitMix64;
use crate::C64;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SingularityError {
    /// The glued potential is -infinity at a pole.
    EvaluationAtPole,
    /// The background form itself fails positivity.
    InfeasibleBackground,
}

impl core::fmt::Display for SingularityError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            SingularityError::EvaluationAtPole => write!(f, "evaluation at a pole"),
            SingularityError::InfeasibleBackground => write!(f, "background form is not positive"),
        }
    }
}

/// C^2 piecewise-quintic bump: 1 on [0, r_in], 0 on [r_out, inf), monotone,
/// with vanishing first and second derivatives at both matching points.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CutoffProfile {
    pub r_in: f64,
    pub r_out: f64,
}

impl CutoffProfile {
    pub fn new(r_in: f64, r_out: f64) -> Self {
        debug_assert!(0.0 < r_in && r_in < r_out);
        CutoffProfile { r_in, r_out }
    }

    /// (q, q', q'') at radius t.
    pub fn eval(&self, t: f64) -> (f64, f64, f64) {
        if t <= self.r_in {
            (1.0, 0.0, 0.0)
        } else if t >= self.r_out {
            (0.0, 0.0, 0.0)
        } else {
            let w = self.r_out - self.r_in;
            let x = (t - self.r_in) / w;
            // smootherstep 6x^5 - 15x^4 + 10x^3, subtracted from 1
            let s = x * x * x * (10.0 + x * (-15.0 + 6.0 * x));
            let ds = 30.0 * x * x * (1.0 - x) * (1.0 - x);
            let dds = 60.0 * x * (1.0 - x) * (1.0 - 2.0 * x);
            (1.0 - s, -ds / w, -dds / (w * w))
        }
    }

    pub fn value(&self, t: f64) -> f64 {
        self.eval(t).0
    }
}

/// One pole: position, weight, holomorphic tuple in pole-centered
/// coordinates, cutoff radii.
#[derive(Clone, Debug, PartialEq)]
pub struct Pole {
    pub position: [f64; 4],
    pub epsilon: f64,
    pub f: Vec<Poly>,
    pub cutoff: CutoffProfile,
}

impl Pole {
    pub fn r_in(&self) -> f64 {
        self.cutoff.r_in
    }

    pub fn r_out(&self) -> f64 {
        self.cutoff.r_out
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SingularityData {
    pub poles: Vec<Pole>,
}

impl SingularityData {
    pub fn new(poles: Vec<Pole>) -> Self {
        SingularityData { poles }
    }

    /// Validates the pole data against a domain, collecting every violation.
    pub fn validate(&self, domain: &DomainSpec) -> Result<(), Vec<String>> {
        use alloc::format;
        let n = domain.complex_dim();
        let mut errs = Vec::new();
        for (m, p) in self.poles.iter().enumerate() {
            if p.epsilon <= 0.0 {
                errs.push(format!("pole {m}: epsilon must be > 0"));
            }
            if !(p.cutoff.r_in > 0.0 && p.cutoff.r_out > p.cutoff.r_in) {
                errs.push(format!("pole {m}: need 0 < r_in < r_out"));
            }
            if p.f.len() != n {
                errs.push(format!("pole {m}: expected {n} holomorphic components, got {}", p.f.len()));
            }
            let z = &p.position[..domain.real_dim()];
            let bd = domain.kind.boundary_distance(z);
            if bd <= p.cutoff.r_out {
                errs.push(format!("pole {m}: ball of radius r_out leaves the domain interior"));
            }
            if !self.common_zero_isolated(domain, m) {
                errs.push(format!(
                    "pole {m}: holomorphic tuple vanishes away from the pole inside its ball"
                ));
            }
        }
        for a in 0..self.poles.len() {
            for b in (a + 1)..self.poles.len() {
                let d = domain.distance(
                    &self.poles[a].position[..domain.real_dim()],
                    &self.poles[b].position[..domain.real_dim()],
                );
                if d <= self.poles[a].r_out() + self.poles[b].r_out() {
                    errs.push(format!("poles {a} and {b}: balls of radius r_out overlap"));
                }
            }
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(errs)
        }
    }

    /// Certificate that sum |f_j|^2 > 0 on a dense sample of the annulus
    /// [1e-3 r_in, r_out] around pole m.
    fn common_zero_isolated(&self, domain: &DomainSpec, m: usize) -> bool {
        let n = domain.complex_dim();
        let p = &self.poles[m];
        if p.f.is_empty() || p.f.iter().all(|f| f.is_zero()) {
            return false;
        }
        let mut dirs: Vec<[C64; 2]> = Vec::new();
        if n == 1 {
            for k in 0..64 {
                let t = core::f64::consts::TAU * k as f64 / 64.0;
                dirs.push([C64::new(libm::cos(t), libm::sin(t)), C64::new(0.0, 0.0)]);
            }
        } else {
            // axis and diagonal directions catch tuples vanishing on
            // coordinate lines, then a deterministic pseudo-random spread
            dirs.push([C64::new(1.0, 0.0), C64::new(0.0, 0.0)]);
            dirs.push([C64::new(0.0, 0.0), C64::new(1.0, 0.0)]);
            let s = core::f64::consts::FRAC_1_SQRT_2;
            for u in [C64::new(1.0, 0.0), C64::new(-1.0, 0.0), C64::new(0.0, 1.0), C64::new(0.0, -1.0)] {
                dirs.push([C64::new(s, 0.0), u * s]);
            }
            let mut rng = SplitMix64::new(0x5EED_0001);
            for _ in 0..200 {
                let re1 = rng.range(-1.0, 1.0);
                let im1 = rng.range(-1.0, 1.0);
                let re2 = rng.range(-1.0, 1.0);
                let im2 = rng.range(-1.0, 1.0);
                let norm = libm::sqrt(re1 * re1 + im1 * im1 + re2 * re2 + im2 * im2);
                if norm < 1e-6 {
                    continue;
                }
                dirs.push([C64::new(re1 / norm, im1 / norm), C64::new(re2 / norm, im2 / norm)]);
            }
        }
        let r_lo = 1e-3 * p.r_in();
        let r_hi = p.r_out();
        let steps = 40;
        let ratio = libm::pow(r_hi / r_lo, 1.0 / (steps - 1) as f64);
        let mut smax = 0.0f64;
        let mut smin = f64::INFINITY;
        let mut r = r_lo;
        for _ in 0..steps {
            for d in &dirs {
                let zeta = [d[0] * r, d[1] * r];
                let s: f64 = p.f.iter().map(|f| f.eval(&zeta[..n]).norm_sqr()).sum();
                smin = smin.min(s);
                smax = smax.max(s);
            }
            r *= ratio;
        }
        smin > 1e-14 * smax.max(f64::MIN_POSITIVE)
    }

    /// Sum of all pole weights.
    pub fn total_weight(&self) -> f64 {
        self.poles.iter().map(|p| p.epsilon).sum()
    }
}

/// Pole-centered complex displacement, shortest representative on tori.
fn centered(domain: &DomainSpec, pole: &Pole, z: &[f64]) -> [C64; 2] {
    let d = domain.displacement(z, &pole.position[..domain.real_dim()]);
    [C64::new(d[0], d[1]), C64::new(d[2], d[3])]
}

/// Jet of the unit-weight glued term of one pole:
/// psi(r) (log S - 1) + 1 with S = sum |f_j|^2, r = |z - p|.
pub fn glued_term_jet(domain: &DomainSpec, pole: &Pole, z: &[f64]) -> Result<RJet, SingularityError> {
    let n = domain.complex_dim();
    let zeta = centered(domain, pole, z);
    let r2 = zeta[..n].iter().map(|w| w.norm_sqr()).sum::<f64>();
    let r = libm::sqrt(r2);
    if r >= pole.r_out() {
        return Ok(RJet::constant(n, 1.0));
    }
    let s_jet = sum_sq_jet(n, &pole.f, &zeta[..n]);
    if s_jet.v <= 0.0 {
        return Err(SingularityError::EvaluationAtPole);
    }
    let log_s = s_jet.ln();
    if r <= pole.r_in() {
        // psi == 1: log S - 1 + 1 = log S
        return Ok(log_s);
    }
    let (q, dq, ddq) = pole.cutoff.eval(r);
    let psi = dist_sq_jet(n, &zeta[..n]).sqrt().compose_scalar(q, dq, ddq);
    let mut inner = log_s;
    inner.v -= 1.0;
    let mut out = psi.mul(&inner);
    out.v += 1.0;
    Ok(out)
}

/// Glued singular potential sum_m eps_m [psi_m log S_m + (1 - psi_m)].
pub fn glued_potential(domain: &DomainSpec, data: &SingularityData, z: &[f64]) -> Result<f64, SingularityError> {
    let mut total = 0.0;
    for pole in &data.poles {
        total += pole.epsilon * glued_term_jet(domain, pole, z)?.v;
    }
    Ok(total)
}

/// Hessian (coefficient matrix of the (1,1)-form) of the glued potential
/// with per-pole weights.
pub fn glued_hessian(domain: &DomainSpec, data: &SingularityData, z: &[f64]) -> Result<Hermitian, SingularityError> {
    let n = domain.complex_dim();
    let mut h = Hermitian::zeros(n);
    for pole in &data.poles {
        h = h.add(&glued_term_jet(domain, pole, z)?.hessian().scale(pole.epsilon));
    }
    Ok(h)
}

/// Ambient background choices. The augmentation adds A * i ddbar rho with
/// rho = |z|^2 - R^2, the strongly pseudoconvex defining function; it is
/// zero on the boundary so it never disturbs Dirichlet data.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum BackgroundBase {
    /// omega with identity coefficient matrix (potential |z|^2).
    Flat,
    /// omega = 0; only meaningful together with augmentation.
    Zero,
    /// Fubini-Study chart potential log(1 + |z|^2).
    FubiniStudy,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BackgroundSpec {
    pub base: BackgroundBase,
    /// Coefficient A >= 0 on i ddbar rho.
    pub augmentation: f64,
    /// Radius R in rho = |z|^2 - R^2 (the domain radius).
    pub rho_radius: f64,
}

impl BackgroundSpec {
    pub fn flat() -> Self {
        BackgroundSpec { base: BackgroundBase::Flat, augmentation: 0.0, rho_radius: 0.0 }
    }

    pub fn zero_augmented(a: f64, rho_radius: f64) -> Self {
        BackgroundSpec { base: BackgroundBase::Zero, augmentation: a, rho_radius }
    }

    /// Coefficient matrix of the base (1,1)-form omega at z, without the
    /// pseudoconvexity augmentation. This is the form the Green's function
    /// equation is written against.
    pub fn base_matrix(&self, n: usize, z: &[f64]) -> Hermitian {
        match self.base {
            BackgroundBase::Flat => Hermitian::identity(n),
            BackgroundBase::Zero => Hermitian::zeros(n),
            BackgroundBase::FubiniStudy => {
                let zc = [C64::new(z[0], z[1]), C64::new(*z.get(2).unwrap_or(&0.0), *z.get(3).unwrap_or(&0.0))];
                let mut one = dist_sq_jet(n, &zc[..n]);
                one.v += 1.0;
                one.ln().hessian()
            }
        }
    }

    /// Augmented coefficient matrix omega + A i ddbar rho. The augmentation
    /// makes the glued form positive in the strongly pseudoconvex regime;
    /// since rho vanishes on the boundary, its potential is absorbed into
    /// the bounded remainder and never changes the assembled solution.
    pub fn matrix(&self, n: usize, z: &[f64]) -> Hermitian {
        let mut m = self.base_matrix(n, z);
        if self.augmentation > 0.0 {
            m = m.add(&Hermitian::identity(n).scale(self.augmentation));
        }
        m
    }

    /// Local potential of the base form omega at z (no augmentation).
    pub fn base_potential(&self, n: usize, z: &[f64]) -> f64 {
        let modsq: f64 = z[..2 * n].iter().map(|x| x * x).sum();
        match self.base {
            BackgroundBase::Flat => modsq,
            BackgroundBase::Zero => 0.0,
            BackgroundBase::FubiniStudy => libm::log(1.0 + modsq),
        }
    }

    /// Local potential including the augmentation term A rho.
    pub fn potential(&self, n: usize, z: &[f64]) -> f64 {
        let modsq: f64 = z[..2 * n].iter().map(|x| x * x).sum();
        self.base_potential(n, z) + self.augmentation * (modsq - self.rho_radius * self.rho_radius)
    }
}

/// omega_delta coefficient matrix: background plus delta times the exact
/// i ddbar of the unit-weight glued term (every pole scaled by the same
/// delta).
pub fn omega_delta(
    domain: &DomainSpec,
    data: &SingularityData,
    background: &BackgroundSpec,
    delta: f64,
    z: &[f64],
) -> Result<Hermitian, SingularityError> {
    let n = domain.complex_dim();
    let mut m = background.matrix(n, z);
    for pole in &data.poles {
        m = m.add(&glued_term_jet(domain, pole, z)?.hessian().scale(delta));
    }
    Ok(m)
}

/// Sample points of the transition annuli (r_in <= |z - p| <= r_out) where
/// omega_delta positivity must be checked.
fn annulus_samples(domain: &DomainSpec, data: &SingularityData) -> Vec<[f64; 4]> {
    let n = domain.complex_dim();
    let mut pts = Vec::new();
    let mut rng = SplitMix64::new(0x5EED_0002);
    for pole in &data.poles {
        let radii = 24;
        for i in 0..radii {
            let r = pole.r_in() + (pole.r_out() - pole.r_in()) * (i as f64 + 0.5) / radii as f64;
            let dirs = if n == 1 { 32 } else { 80 };
            for k in 0..dirs {
                let mut z = pole.position;
                if n == 1 {
                    let t = core::f64::consts::TAU * k as f64 / dirs as f64;
                    z[0] += r * libm::cos(t);
                    z[1] += r * libm::sin(t);
                } else {
                    let mut v = [0.0f64; 4];
                    let mut norm = 0.0;
                    for x in v.iter_mut() {
                        *x = rng.range(-1.0, 1.0);
                        norm += *x * *x;
                    }
                    let norm = libm::sqrt(norm).max(1e-9);
                    for (a, x) in v.iter().enumerate() {
                        z[a] += r * x / norm;
                    }
                }
                pts.push(z);
            }
        }
    }
    pts
}

/// Largest delta (20 bisection steps on [0, delta_hi]) such that omega_delta
/// stays positive with the given margin on all transition-annulus samples.
/// Returns +infinity when augmentation is present and the whole range
/// passes. Errors when the background itself fails positivity.
pub fn max_feasible_epsilon(
    domain: &DomainSpec,
    data: &SingularityData,
    background: &BackgroundSpec,
    margin: f64,
    delta_hi: f64,
) -> Result<f64, SingularityError> {
    let n = domain.complex_dim();
    // Background positivity on a coarse domain sample plus the annuli.
    let mut bg_points = annulus_samples(domain, data);
    let steps = 9;
    for i in 0..steps {
        let t = (i as f64 + 0.5) / steps as f64 - 0.5;
        let mut z = [0.0f64; 4];
        for a in 0..domain.real_dim() {
            z[a] = t * domain.kind.extent() * 0.9;
        }
        bg_points.push(z);
    }
    for z in &bg_points {
        if !background.matrix(n, &z[..domain.real_dim()]).is_positive(margin) {
            return Err(SingularityError::InfeasibleBackground);
        }
    }
    let samples = annulus_samples(domain, data);
    let feasible = |delta: f64| -> bool {
        samples.iter().all(|z| {
            omega_delta(domain, data, background, delta, &z[..domain.real_dim()])
                .map(|m| m.is_positive(margin))
                .unwrap_or(false)
        })
    };
    if feasible(delta_hi) {
        return Ok(if background.augmentation > 0.0 { f64::INFINITY } else { delta_hi });
    }
    let mut lo = 0.0;
    let mut hi = delta_hi;
    for _ in 0..20 {
        let mid = 0.5 * (lo + hi);
        if feasible(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

/// Least augmentation A in {0, 1, 2, 4, ...} making `need` feasible for the
/// given data; used when a config requests automatic Theorem-2 style
/// augmentation.
pub fn auto_augmentation(
    domain: &DomainSpec,
    data: &SingularityData,
    base: BackgroundBase,
    rho_radius: f64,
    margin: f64,
    need: f64,
) -> Option<BackgroundSpec> {
    let mut a = 0.0f64;
    for _ in 0..24 {
        let bg = BackgroundSpec { base, augmentation: a, rho_radius };
        if let Ok(eps0) = max_feasible_epsilon(domain, data, &bg, margin, need) {
            if eps0 >= need {
                return Some(bg);
            }
        }
        a = if a == 0.0 { 1.0 } else { a * 2.0 };
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::DomainKind;
    use alloc::vec;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn disk() -> DomainSpec {
        DomainSpec::new(DomainKind::Disk { radius: 1.0 }, 64).unwrap()
    }

    fn ball() -> DomainSpec {
        DomainSpec::new(DomainKind::Ball { radius: 1.0 }, 16).unwrap()
    }

    fn single_pole_c1(eps: f64) -> SingularityData {
        SingularityData::new(vec![Pole {
            position: [0.0; 4],
            epsilon: eps,
            f: vec![Poly::coordinate(1, 0)],
            cutoff: CutoffProfile::new(0.1, 0.2),
        }])
    }

    fn single_pole_c2(eps: f64, f: Vec<Poly>, r_in: f64, r_out: f64) -> SingularityData {
        SingularityData::new(vec![Pole {
            position: [0.0; 4],
            epsilon: eps,
            f,
            cutoff: CutoffProfile::new(r_in, r_out),
        }])
    }

    #[test]
    fn cutoff_is_c2_and_monotone() {
        let q = CutoffProfile::new(0.1, 0.2);
        assert_eq!(q.eval(0.05), (1.0, 0.0, 0.0));
        assert_eq!(q.eval(0.25), (0.0, 0.0, 0.0));
        // continuity at the joints
        for t in [0.1, 0.2] {
            let (v, dv, ddv) = q.eval(t + 1e-12);
            let (w, dw, ddw) = q.eval(t - 1e-12);
            assert!((v - w).abs() < 1e-9);
            assert!((dv - dw).abs() < 1e-6);
            assert!((ddv - ddw).abs() < 1e-3);
        }
        let mut prev = 1.0;
        for i in 0..100 {
            let v = q.value(0.1 + 0.1 * i as f64 / 99.0);
            assert!(v <= prev + 1e-15);
            assert!((0.0..=1.0).contains(&v));
            prev = v;
        }
        // derivative consistency by finite differences
        let t = 0.137;
        let (_, dq, ddq) = q.eval(t);
        let h = 1e-6;
        let fd1 = (q.value(t + h) - q.value(t - h)) / (2.0 * h);
        let fd2 = (q.value(t + h) - 2.0 * q.value(t) + q.value(t - h)) / (h * h);
        assert!((dq - fd1).abs() < 1e-6);
        assert!((ddq - fd2).abs() < 1e-3);
    }

    #[test]
    fn glued_outside_ball_is_weight() {
        let d = disk();
        let s = single_pole_c1(0.5);
        let v = glued_potential(&d, &s, &[0.5, 0.0]).unwrap();
        assert!((v - 0.5).abs() < 1e-14);
    }

    #[test]
    fn glued_inside_core_is_log_model() {
        let d = disk();
        let s = single_pole_c1(0.5);
        let v = glued_potential(&d, &s, &[0.01, 0.0]).unwrap();
        let expect = 0.5 * libm::log(1e-4);
        assert!((v - expect).abs() < 1e-12);
    }

    /// Direct formula oracle: an independent re-evaluation of
    /// eps [psi log S + (1 - psi)] with the published quintic, mid-transition.
    #[test]
    fn glued_mid_transition_matches_reimplementation() {
        let d = disk();
        let s = single_pole_c1(0.3);
        let mut data = s.clone();
        data.poles[0].epsilon = 0.3;
        let r = 0.15;
        let z = [r * libm::cos(0.4), r * libm::sin(0.4)];
        let v = glued_potential(&d, &data, &z).unwrap();
        // independent re-evaluation
        let x = (r - 0.1) / 0.1;
        let psi = 1.0 - x * x * x * (10.0 - 15.0 * x + 6.0 * x * x);
        let expect = 0.3 * (psi * libm::log(r * r) + (1.0 - psi));
        assert!((v - expect).abs() < 1e-13, "{v} vs {expect}");
    }

    #[test]
    fn evaluation_at_pole_errors() {
        let d = disk();
        let s = single_pole_c1(0.5);
        assert_eq!(
            glued_potential(&d, &s, &[0.0, 0.0]),
            Err(SingularityError::EvaluationAtPole)
        );
    }

    #[test]
    fn omega_delta_unchanged_outside_ball() {
        let d = disk();
        let s = single_pole_c1(0.5);
        let bg = BackgroundSpec::flat();
        let m = omega_delta(&d, &s, &bg, 0.7, &[0.4, 0.2]).unwrap();
        assert!((m.get(0, 0) - c(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn omega_delta_c1_log_is_harmonic_off_pole() {
        // psi = 1 region, f = (z): log |z|^2 harmonic, matrix unchanged.
        let d = disk();
        let s = single_pole_c1(0.5);
        let bg = BackgroundSpec::flat();
        let m = omega_delta(&d, &s, &bg, 3.0, &[0.05, 0.0]).unwrap();
        assert!((m.get(0, 0) - c(1.0, 0.0)).norm() < 1e-12);
    }

    /// Symbolic oracle: in the psi = 1 region with f = (z1, z2) the added
    /// matrix is delta * (|z|^2 I - zbar z^T) / |z|^4, psd with kernel along z.
    #[test]
    fn omega_delta_c2_rank_structure() {
        let d = ball();
        let s = single_pole_c2(
            0.5,
            vec![Poly::coordinate(2, 0), Poly::coordinate(2, 1)],
            0.3,
            0.6,
        );
        let bg = BackgroundSpec { base: BackgroundBase::Zero, augmentation: 0.0, rho_radius: 1.0 };
        let delta = 0.8;
        let z = [0.1, 0.05, -0.08, 0.12];
        let m = omega_delta(&d, &s, &bg, delta, &z).unwrap();
        let z1 = c(z[0], z[1]);
        let z2 = c(z[2], z[3]);
        let r2 = z1.norm_sqr() + z2.norm_sqr();
        // expected (k,l) entry: delta * (r2 delta_kl - conj(z_k) z_l) / r2^2
        let zv = [z1, z2];
        for k in 0..2 {
            for l in 0..2 {
                let kron = if k == l { 1.0 } else { 0.0 };
                let expect = (C64::new(kron * r2, 0.0) - zv[k].conj() * zv[l]) * delta / (r2 * r2);
                assert!((m.get(k, l) - expect).norm() < 1e-10, "k={k} l={l}");
            }
        }
        // psd with kernel along z
        let ev = m.eigenvalues();
        assert!(ev[0].abs() < 1e-10);
        assert!(ev[1] > 0.0);
        assert!((m.quad_form(&[z1, z2])).abs() < 1e-10);
    }

    /// The symbolic Hessian of the glued term agrees with the
    /// finite-difference complex Hessian to O(h^2) on the transition annulus.
    #[test]
    fn symbolic_matches_finite_difference_hessian() {
        use crate::grid::ComplexGrid;
        use crate::stencil::complex_hessian;
        let run = |res: usize| -> f64 {
            let d = DomainSpec::new(DomainKind::Disk { radius: 1.0 }, res).unwrap();
            let s = SingularityData::new(vec![Pole {
                position: [0.0; 4],
                epsilon: 0.4,
                f: vec![Poly::monomial(1, c(1.0, 0.0), [2, 0])],
                cutoff: CutoffProfile::new(0.2, 0.5),
            }]);
            let mut g = ComplexGrid::zeros(&d);
            g.excise_ball(&[0.0, 0.0], 2.5 * d.spacing());
            g.fill(|z| glued_potential(&d, &s, z).unwrap());
            let mut worst = 0.0f64;
            for p in g.interior_nodes() {
                let z = g.node_coords(p);
                let r = libm::hypot(z[0], z[1]);
                if !(0.25..=0.45).contains(&r) {
                    continue;
                }
                let fd = complex_hessian(&g, p).unwrap();
                let sym = glued_hessian(&d, &s, &z[..2]).unwrap();
                worst = worst.max((fd.get(0, 0) - sym.get(0, 0)).norm());
            }
            worst
        };
        let e1 = run(64);
        let e2 = run(128);
        assert!(e2 < 0.35 * e1, "e1={e1} e2={e2}");
    }

    /// Dense delta-grid oracle for the feasibility threshold.
    #[test]
    fn feasibility_matches_dense_scan() {
        let d = ball();
        let s = single_pole_c2(
            0.5,
            vec![Poly::monomial(2, c(1.0, 0.0), [2, 0]), Poly::monomial(2, c(1.0, 0.0), [0, 2])],
            0.1,
            0.2,
        );
        let bg = BackgroundSpec::flat();
        let margin = 1e-6;
        let eps0 = max_feasible_epsilon(&d, &s, &bg, margin, 1.0).unwrap();
        assert!(eps0.is_finite() && eps0 > 0.0);
        // dense scan with the same sample machinery
        let samples = annulus_samples(&d, &s);
        let feasible = |delta: f64| {
            samples.iter().all(|z| {
                omega_delta(&d, &s, &bg, delta, &z[..4]).unwrap().is_positive(margin)
            })
        };
        let step = 1.0 / 512.0;
        let mut scan = 0.0;
        let mut t = 0.0;
        while t + step <= 1.0 {
            if feasible(t + step) {
                scan = t + step;
                t += step;
            } else {
                break;
            }
        }
        // within one bisection step of the dyadic search
        assert!((eps0 - scan).abs() <= 1.0 / (1 << 9) as f64 + step, "eps0={eps0} scan={scan}");
        // down-closedness
        assert!(feasible(eps0 / 2.0));
    }

    #[test]
    fn trivial_feasibility_when_glued_is_pluriharmonic() {
        // C^1, f = (z): the glued Hessian vanishes inside r_in, and the
        // transition is mild enough at these radii for every delta up to
        // delta_hi once augmented; unaugmented flat passes a small delta_hi.
        let d = disk();
        let s = single_pole_c1(0.5);
        let bg = BackgroundSpec::flat();
        let small = max_feasible_epsilon(&d, &s, &bg, 1e-9, 0.001).unwrap();
        assert!((small - 0.001).abs() < 1e-12, "pluriharmonic-off-core case passes delta_hi");
    }

    #[test]
    fn infeasible_background_detected() {
        let d = disk();
        let s = single_pole_c1(0.5);
        let bg = BackgroundSpec { base: BackgroundBase::Zero, augmentation: 0.0, rho_radius: 1.0 };
        assert_eq!(
            max_feasible_epsilon(&d, &s, &bg, 1e-9, 1.0),
            Err(SingularityError::InfeasibleBackground)
        );
    }

    #[test]
    fn augmentation_gives_infinite_sentinel() {
        let d = disk();
        let s = single_pole_c1(0.5);
        let bg = auto_augmentation(&d, &s, BackgroundBase::Zero, 1.0, 1e-6, 0.5).unwrap();
        let eps0 = max_feasible_epsilon(&d, &s, &bg, 1e-6, 0.5).unwrap();
        assert!(eps0.is_infinite());
    }

    #[test]
    fn feasibility_monotone_in_degree_and_augmentation() {
        let d = ball();
        let margin = 1e-6;
        let lin = single_pole_c2(
            0.5,
            vec![Poly::coordinate(2, 0), Poly::coordinate(2, 1)],
            0.1,
            0.2,
        );
        let quad = single_pole_c2(
            0.5,
            vec![Poly::monomial(2, c(1.0, 0.0), [2, 0]), Poly::monomial(2, c(1.0, 0.0), [0, 2])],
            0.1,
            0.2,
        );
        let bg = BackgroundSpec::flat();
        let e_lin = max_feasible_epsilon(&d, &lin, &bg, margin, 1.0).unwrap();
        let e_quad = max_feasible_epsilon(&d, &quad, &bg, margin, 1.0).unwrap();
        assert!(e_quad <= e_lin + 1e-12, "degree monotonicity: {e_lin} vs {e_quad}");
        let bg_aug = BackgroundSpec { base: BackgroundBase::Flat, augmentation: 4.0, rho_radius: 1.0 };
        let e_aug = max_feasible_epsilon(&d, &quad, &bg_aug, margin, 1.0).unwrap();
        assert!(e_aug >= e_quad, "augmentation monotonicity");
    }

    #[test]
    fn validation_catches_overlap_and_degenerate_tuple() {
        let d = disk();
        let bad = SingularityData::new(vec![
            Pole {
                position: [0.0; 4],
                epsilon: 0.3,
                f: vec![Poly::coordinate(1, 0)],
                cutoff: CutoffProfile::new(0.1, 0.2),
            },
            Pole {
                position: [0.1, 0.0, 0.0, 0.0],
                epsilon: 0.3,
                f: vec![Poly::coordinate(1, 0)],
                cutoff: CutoffProfile::new(0.1, 0.2),
            },
        ]);
        let errs = bad.validate(&d).unwrap_err();
        assert!(errs.iter().any(|e| e.contains("overlap")));

        let ball_d = ball();
        let degenerate = single_pole_c2(
            0.3,
            vec![Poly::coordinate(2, 0), Poly::coordinate(2, 0)],
            0.1,
            0.2,
        );
        let errs = degenerate.validate(&ball_d).unwrap_err();
        assert!(errs.iter().any(|e| e.contains("vanishes away")), "{errs:?}");
    }
}
