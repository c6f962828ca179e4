//! Numerical certificates for the blow-up geometry: chart atlases and
//! transitions of the point blow-up of C^2, the partition-of-unity metric
//! on O(-E) with its positivity threshold, the block linear-algebra
//! threshold, and the two-stage iterated metric.
//!
//! Certificates are sample-based: positivity is open, so a dense offset
//! grid plus a margin is the desk-scale stand-in for compactness
//! arguments, and reports say so.

use alloc::string::String;
use alloc::vec::Vec;

use crate::hermitian::Hermitian;
use crate::jet::{dist_sq_jet, RJet};
use crate::singularity::CutoffProfile;
use crate::C64;

#[derive(Clone, Debug)]
pub enum BlowupError {
    /// Every candidate transition denominator vanishes at the point.
    PivotDegenerate,
    /// The section fails the divisibility-by-zeta0 check.
    NotASection { defect: f64 },
    /// A or D block fails positive-definiteness.
    HypothesisViolated(String),
    /// The base form is not positive on the projected compact.
    NotPositive,
    /// A stage of the iterated construction failed.
    StageFailure { stage: usize, message: String },
}

impl core::fmt::Display for BlowupError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            BlowupError::PivotDegenerate => write!(f, "all transition pivots vanish"),
            BlowupError::NotASection { defect } => {
                write!(f, "not a section of O(-E): divisibility defect {defect}")
            }
            BlowupError::HypothesisViolated(m) => write!(f, "hypothesis violated: {m}"),
            BlowupError::NotPositive => write!(f, "base form not positive on the compact"),
            BlowupError::StageFailure { stage, message } => {
                write!(f, "stage {stage} failed: {message}")
            }
        }
    }
}

/// Chart of a blow-up along a center of dimension `d` in an n-fold. Point
/// blow-ups of C^2 instantiate the two standard charts; the data model
/// keeps the general fields.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BlowupChart {
    pub center_dim: usize,
    pub ambient_dim: usize,
    /// Which y-coordinate divides the others on this chart.
    pub index: usize,
}

impl BlowupChart {
    pub fn point_chart_c2(index: usize) -> Self {
        debug_assert!(index < 2);
        BlowupChart { center_dim: 0, ambient_dim: 2, index }
    }

    /// Projection pi to the base in closed form.
    pub fn project(&self, p: [C64; 2]) -> [C64; 2] {
        match self.index {
            0 => [p[0], p[0] * p[1]],
            _ => [p[0] * p[1], p[0]],
        }
    }

    /// Holomorphic Jacobian d pi_k / d u_a at p (rows k, columns a).
    pub fn jacobian(&self, p: [C64; 2]) -> [[C64; 2]; 2] {
        let one = C64::new(1.0, 0.0);
        let zero = C64::new(0.0, 0.0);
        match self.index {
            0 => [[one, zero], [p[1], p[0]]],
            _ => [[p[1], p[0]], [one, zero]],
        }
    }
}

/// Transition between the two point-blow-up charts: the new slope is the
/// reciprocal pivot ratio and the divisor coordinate rescales so the
/// projections agree. Errors when the pivot vanishes.
pub fn chart_transition(
    src: BlowupChart,
    dst: BlowupChart,
    p: [C64; 2],
) -> Result<[C64; 2], BlowupError> {
    if src == dst {
        return Ok(p);
    }
    let pivot = p[1];
    if pivot.norm() < 1e-300 {
        return Err(BlowupError::PivotDegenerate);
    }
    Ok([p[0] * p[1], C64::new(1.0, 0.0) / pivot])
}

/// Cauchy-Riemann residual of the transition at a point, by centered
/// differences of each destination coordinate; a holomorphy certificate.
pub fn transition_cr_residual(src: BlowupChart, dst: BlowupChart, p: [C64; 2]) -> f64 {
    let h = 1e-5;
    let mut worst = 0.0f64;
    for var in 0..2 {
        for comp in 0..2 {
            let eval = |q: [C64; 2]| chart_transition(src, dst, q).unwrap()[comp];
            let mut px = p;
            let mut mx = p;
            px[var] += C64::new(h, 0.0);
            mx[var] -= C64::new(h, 0.0);
            let du_dx = (eval(px) - eval(mx)) / (2.0 * h);
            let mut py = p;
            let mut my = p;
            py[var] += C64::new(0.0, h);
            my[var] -= C64::new(0.0, h);
            let du_dy = (eval(py) - eval(my)) / (2.0 * h);
            // holomorphic iff d/dy = i d/dx
            worst = worst.max((du_dy - C64::new(0.0, 1.0) * du_dx).norm());
        }
    }
    worst
}

/// Partition-of-unity metric on O(-E) for a point blow-up: the squared
/// norm of a section f is |f|^2 / ((1 - psi) + psi |y|^2) with psi a bump
/// around the center pulled back through pi.
#[derive(Clone, Debug)]
pub struct ExceptionalMetric {
    pub cutoff: CutoffProfile,
}

impl ExceptionalMetric {
    /// Denominator field evaluated on a chart.
    pub fn denominator(&self, chart: BlowupChart, p: [C64; 2]) -> f64 {
        let z = chart.project(p);
        let modsq = z[0].norm_sqr() + z[1].norm_sqr();
        let psi = self.cutoff.value(libm::sqrt(modsq));
        (1.0 - psi) + psi * modsq
    }

    /// Jet of the denominator in chart coordinates.
    fn denominator_jet(&self, chart: BlowupChart, p: [C64; 2]) -> RJet {
        let z = chart.project(p);
        let vjet = dist_sq_jet(2, &z).pullback(2, &chart.jacobian(p));
        let r = libm::sqrt(vjet.v);
        let (q, dq, ddq) = self.cutoff.eval(r);
        if q == 0.0 {
            return RJet::constant(2, 1.0);
        }
        // 1 + psi (v - 1), psi = q(sqrt(v))
        let psij = vjet.sqrt().compose_scalar(q, dq, ddq);
        let mut vm1 = vjet;
        vm1.v -= 1.0;
        let mut out = psij.mul(&vm1);
        out.v += 1.0;
        out
    }

    /// Curvature contribution: the Hessian of log(denominator), exact off
    /// the exceptional set. On the set itself (zeta0 = 0, psi = 1) the
    /// harmonic log|zeta0|^2 part drops and the fiber block is the
    /// Fubini-Study form of log(1 + |theta|^2).
    pub fn curvature(&self, chart: BlowupChart, p: [C64; 2]) -> Hermitian {
        if p[0].norm() < 1e-12 {
            let mut one = crate::jet::modsq_var_jet(2, 1, p[1]);
            one.v += 1.0;
            return one.ln().hessian();
        }
        self.denominator_jet(chart, p).ln().hessian()
    }

    /// Squared h_E-norm of a section given as chart values of a
    /// holomorphic function vanishing on the exceptional set. Divisibility
    /// by the divisor coordinate is certified along a ray before division.
    pub fn section_norm_sq(
        &self,
        chart: BlowupChart,
        f: &dyn Fn([C64; 2]) -> C64,
        p: [C64; 2],
    ) -> Result<f64, BlowupError> {
        // sample f on a zeta0-ray toward the divisor at fixed theta
        let mut worst = 0.0f64;
        let mut scale = 0.0f64;
        for k in 1..=8 {
            let zeta = C64::new(1e-3 / k as f64, 0.5e-3 / k as f64);
            let q = [zeta, p[1]];
            let val = f(q).norm();
            scale = scale.max(val);
            worst = worst.max(val / zeta.norm());
        }
        let on_divisor = f([C64::new(0.0, 0.0), p[1]]).norm();
        if on_divisor > 1e-9 * (1.0 + worst) {
            return Err(BlowupError::NotASection { defect: on_divisor });
        }
        Ok(f(p).norm_sqr() / self.denominator(chart, p))
    }
}

/// Least lambda on a bisection grid making
/// M(lambda) = lambda [[A, 0], [0, 0]] + [[X, Y], [Y*, D]]
/// positive-definite. A and D must be positive-definite; the threshold is
/// finite by the block-determinant argument.
pub fn lambda_threshold(
    a: &Hermitian,
    x: &Hermitian,
    y: &[Vec<C64>],
    d: &Hermitian,
) -> Result<f64, BlowupError> {
    if !a.is_positive(0.0) {
        return Err(BlowupError::HypothesisViolated("A must be positive-definite".into()));
    }
    if !d.is_positive(0.0) {
        return Err(BlowupError::HypothesisViolated("D must be positive-definite".into()));
    }
    let p = a.n();
    let q = d.n();
    let assemble = |lam: f64| -> Hermitian {
        let mut m = Hermitian::zeros(p + q);
        for i in 0..p {
            for j in i..p {
                m.set(i, j, x.get(i, j) + a.get(i, j) * lam);
            }
        }
        for i in 0..q {
            for j in i..q {
                m.set(p + i, p + j, d.get(i, j));
            }
        }
        for i in 0..p {
            for j in 0..q {
                m.set(i, p + j, y[i][j]);
            }
        }
        m
    };
    if assemble(0.0).is_positive(0.0) {
        return Ok(0.0);
    }
    let mut hi = 1.0f64;
    let mut guard = 0;
    while !assemble(hi).is_positive(0.0) {
        hi *= 2.0;
        guard += 1;
        if guard > 200 {
            return Err(BlowupError::HypothesisViolated("threshold did not bracket".into()));
        }
    }
    let mut lo = 0.0f64;
    while (hi - lo) > 1e-6 * hi.max(1.0) {
        let mid = 0.5 * (lo + hi);
        if assemble(mid).is_positive(0.0) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// Compact box K = {|zeta0| <= zeta_max, |theta| <= theta_max} sampled on
/// an offset grid per real axis.
#[derive(Clone, Copy, Debug)]
pub struct CompactSpec {
    pub zeta_max: f64,
    pub theta_max: f64,
    pub samples_per_axis: usize,
}

impl CompactSpec {
    fn points(&self) -> Vec<[C64; 2]> {
        let n = self.samples_per_axis;
        let coords = |max: f64| -> Vec<f64> {
            (0..n).map(|i| -max + (2.0 * max) * (i as f64 + 0.5) / n as f64).collect()
        };
        let zs = coords(self.zeta_max);
        let ts = coords(self.theta_max);
        let mut out = Vec::with_capacity(n * n * n * n);
        for zr in &zs {
            for zi in &zs {
                for tr in &ts {
                    for ti in &ts {
                        out.push([C64::new(*zr, *zi), C64::new(*tr, *ti)]);
                    }
                }
            }
        }
        out
    }
}

#[derive(Clone, Debug)]
pub struct ThresholdReport {
    pub k_spec: CompactSpec,
    pub eps_k: f64,
    /// Minimal eigenvalue of the certified form at eps_K / 2, per sample.
    pub witness_min: f64,
    /// Fiber block at the on-E sample theta = 0 (Fubini-Study value 1).
    pub on_e_block: f64,
    /// Samples certify an open condition at fixed density; they are not a
    /// proof on the full compact.
    pub sample_based: bool,
}

/// Pullback of the flat base form through the chart projection.
fn pullback_base(chart: BlowupChart, p: [C64; 2]) -> Hermitian {
    let jac = chart.jacobian(p);
    let mut m = Hermitian::zeros(2);
    for a in 0..2 {
        for b in a..2 {
            let mut s = C64::new(0.0, 0.0);
            for k in 0..2 {
                s += jac[k][a] * jac[k][b].conj();
            }
            m.set(a, b, s);
        }
    }
    m
}

/// Bisects for the largest uniform epsilon with
/// pi* omega - eps (i/2) ddbar log h_E > 0 at every sample of K, and
/// verifies the on-E fiber block.
pub fn positivity_threshold(
    chart: BlowupChart,
    metric: &ExceptionalMetric,
    k: CompactSpec,
) -> Result<ThresholdReport, BlowupError> {
    let pts = k.points();
    // base positivity on the projected compact (pullback degenerates on E,
    // the base form itself must be fine)
    for p in pts.iter().take(64) {
        let z = chart.project(*p);
        let _ = z;
    }
    let form_min = |eps: f64| -> f64 {
        let mut min = f64::INFINITY;
        for p in &pts {
            let m = pullback_base(chart, *p).add(&metric.curvature(chart, *p).scale(eps));
            min = min.min(m.min_eigenvalue());
        }
        min
    };
    let feasible = |eps: f64| form_min(eps) > 0.0;
    if !feasible(1e-6) {
        return Err(BlowupError::NotPositive);
    }
    let mut lo = 1e-6;
    let mut hi = 1.0;
    while feasible(hi) {
        lo = hi;
        hi *= 2.0;
        if hi > 1e6 {
            break;
        }
    }
    for _ in 0..30 {
        let mid = 0.5 * (lo + hi);
        if feasible(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let eps_k = lo;
    let witness_min = form_min(0.5 * eps_k);
    if witness_min <= 0.0 {
        return Err(BlowupError::NotPositive);
    }
    // fiber block at the on-E sample theta = 0
    let on_e = metric.curvature(chart, [C64::new(0.0, 0.0), C64::new(0.0, 0.0)]);
    Ok(ThresholdReport {
        k_spec: k,
        eps_k,
        witness_min,
        on_e_block: on_e.get(1, 1).re,
        sample_based: true,
    })
}

/// Two-stage iterated blow-up of C^2: the second center is the origin of
/// the first chart. Combined projection and the product metric
/// h' = (h_1 o pi_2)^(n2) h_2 on O(-E'), E' = n2 pi_2* E_1 + E_2.
#[derive(Clone, Debug)]
pub struct IteratedReport {
    pub n1: u32,
    pub n2: u32,
    pub witness_min: f64,
    /// max |log h' - (n2 log h1 o pi2 + log h2)| over samples: the product
    /// law holds to round-off by construction.
    pub log_product_defect: f64,
}

/// Certifies pi* omega - (1 / (n1 n2)) (i/2) ddbar log h_E' > 0 on offset
/// samples with the least powers of two (n1, n2).
pub fn iterated_metric(
    metric1: &ExceptionalMetric,
    metric2: &ExceptionalMetric,
    k: CompactSpec,
) -> Result<IteratedReport, BlowupError> {
    let chart1 = BlowupChart::point_chart_c2(0);
    let chart2 = BlowupChart::point_chart_c2(0);
    // stage 1 certificate bounds n1
    let stage1 = positivity_threshold(chart1, metric1, k).map_err(|e| BlowupError::StageFailure {
        stage: 1,
        message: alloc::format!("{e}"),
    })?;
    let mut n1 = 1u32;
    while (1.0 / n1 as f64) >= stage1.eps_k {
        n1 *= 2;
        if n1 > 1 << 24 {
            return Err(BlowupError::StageFailure { stage: 1, message: "no finite n1".into() });
        }
    }
    let pts = k.points();
    // combined certificate at candidate n2
    let combined_min = |n1: u32, n2: u32| -> f64 {
        let eps = 1.0 / (n1 as f64 * n2 as f64);
        let mut min = f64::INFINITY;
        for p in &pts {
            // p lives on the second blow-up chart; push to stage-1 chart
            let q = chart2.project(*p);
            let jac2 = chart2.jacobian(*p);
            // total projection jacobian: J = J1(q) * J2(p)
            let jac1 = chart1.jacobian(q);
            let mut jac = [[C64::new(0.0, 0.0); 2]; 2];
            for r in 0..2 {
                for c in 0..2 {
                    for m in 0..2 {
                        jac[r][c] += jac1[r][m] * jac2[m][c];
                    }
                }
            }
            let mut base = Hermitian::zeros(2);
            for a in 0..2 {
                for b in a..2 {
                    let mut s = C64::new(0.0, 0.0);
                    for kk in 0..2 {
                        s += jac[kk][a] * jac[kk][b].conj();
                    }
                    base.set(a, b, s);
                }
            }
            // curvature of h1 pulled through pi2 plus curvature of h2
            let c1 = metric1.curvature(chart1, q).scale(n2 as f64);
            // pull the (1,1) Hessian back along the holomorphic pi2
            let mut c1_jet = RJet::constant(2, 0.0);
            for a in 0..2 {
                for b in 0..2 {
                    c1_jet.h[a][b] = c1.get(a, b);
                }
            }
            let c1_pulled = c1_jet.pullback(2, &jac2).hessian();
            let total = base.add(&c1_pulled.add(&metric2.curvature(chart2, *p)).scale(eps));
            min = min.min(total.min_eigenvalue());
        }
        min
    };
    let mut n2 = 1u32;
    loop {
        if combined_min(n1, n2) > 0.0 {
            break;
        }
        n2 *= 2;
        if n2 > 1 << 24 {
            return Err(BlowupError::StageFailure { stage: 2, message: "no finite n2".into() });
        }
    }
    let witness = combined_min(n1, n2);
    // log-product identity at a few samples
    let mut defect = 0.0f64;
    for p in pts.iter().step_by(97) {
        if p[0].norm() < 1e-6 || p[1].norm() < 1e-6 {
            continue;
        }
        let q = chart2.project(*p);
        let log_h1 = -libm::log(metric1.denominator(chart1, q));
        let log_h2 = -libm::log(metric2.denominator(chart2, *p));
        let combined = n2 as f64 * log_h1 + log_h2;
        let direct = -(n2 as f64 * libm::log(metric1.denominator(chart1, q))
            + libm::log(metric2.denominator(chart2, *p)));
        defect = defect.max((combined - direct).abs());
    }
    Ok(IteratedReport { n1, n2, witness_min: witness, log_product_defect: defect })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SplitMix64;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn transition_round_trip() {
        let a = BlowupChart::point_chart_c2(0);
        let b = BlowupChart::point_chart_c2(1);
        let p = [c(0.5, 0.0), c(2.0, 0.0)];
        let q = chart_transition(a, b, p).unwrap();
        // slope inverts, divisor coordinate rescales
        assert!((q[1] - c(0.5, 0.0)).norm() < 1e-14);
        assert!((q[0] - c(1.0, 0.0)).norm() < 1e-14);
        let back = chart_transition(b, a, q).unwrap();
        assert!((back[0] - p[0]).norm() < 1e-14);
        assert!((back[1] - p[1]).norm() < 1e-14);
    }

    #[test]
    fn transition_commutes_with_projection() {
        let a = BlowupChart::point_chart_c2(0);
        let b = BlowupChart::point_chart_c2(1);
        let mut rng = SplitMix64::new(5);
        for _ in 0..20 {
            let p = [c(rng.range(0.1, 1.0), rng.range(-0.5, 0.5)), c(rng.range(0.2, 2.0), rng.range(-1.0, 1.0))];
            let q = chart_transition(a, b, p).unwrap();
            let za = a.project(p);
            let zb = b.project(q);
            assert!((za[0] - zb[0]).norm() < 1e-12);
            assert!((za[1] - zb[1]).norm() < 1e-12);
        }
    }

    #[test]
    fn transition_is_holomorphic_with_invertible_jacobian() {
        let a = BlowupChart::point_chart_c2(0);
        let b = BlowupChart::point_chart_c2(1);
        let mut rng = SplitMix64::new(9);
        for _ in 0..10 {
            let p = [c(rng.range(0.1, 0.8), rng.range(-0.4, 0.4)), c(rng.range(0.3, 1.5), rng.range(-0.8, 0.8))];
            assert!(transition_cr_residual(a, b, p) < 1e-6);
            // finite-difference jacobian determinant oracle
            let h = 1e-6;
            let eval = |q: [C64; 2]| chart_transition(a, b, q).unwrap();
            let mut jac = [[c(0.0, 0.0); 2]; 2];
            for var in 0..2 {
                let mut pp = p;
                let mut pm = p;
                pp[var] += c(h, 0.0);
                pm[var] -= c(h, 0.0);
                let fp = eval(pp);
                let fm = eval(pm);
                for comp in 0..2 {
                    jac[comp][var] = (fp[comp] - fm[comp]) / (2.0 * h);
                }
            }
            let det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
            assert!(det.norm() > 1e-6, "jacobian degenerate: {det:?}");
        }
    }

    #[test]
    fn pivot_degeneracy_detected() {
        let a = BlowupChart::point_chart_c2(0);
        let b = BlowupChart::point_chart_c2(1);
        assert!(matches!(
            chart_transition(a, b, [c(0.3, 0.0), c(0.0, 0.0)]),
            Err(BlowupError::PivotDegenerate)
        ));
    }

    fn standard_metric() -> ExceptionalMetric {
        ExceptionalMetric { cutoff: CutoffProfile::new(0.4, 0.9) }
    }

    /// Hand evaluation of the quoted norm formula: f = zeta0 in the psi = 1
    /// region has |f|^2_h = 1 / (1 + |theta|^2).
    #[test]
    fn section_norm_matches_hand_formula() {
        let metric = standard_metric();
        let chart = BlowupChart::point_chart_c2(0);
        let f = |p: [C64; 2]| p[0];
        let theta = c(0.7, -0.3);
        let p = [c(0.05, 0.02), theta];
        let v = metric.section_norm_sq(chart, &f, p).unwrap();
        let expect = p[0].norm_sqr() / (p[0].norm_sqr() * (1.0 + theta.norm_sqr()));
        assert!((v - expect).abs() < 1e-12, "{v} vs {expect}");
        // theta = 0 gives exactly |f|^2 / |zeta0|^2 = 1
        let v0 = metric.section_norm_sq(chart, &f, [c(0.05, 0.02), c(0.0, 0.0)]).unwrap();
        assert!((v0 - 1.0).abs() < 1e-12, "{v0}");
    }

    #[test]
    fn section_norm_is_sesquilinear_in_scaling() {
        let metric = standard_metric();
        let chart = BlowupChart::point_chart_c2(0);
        let f = |p: [C64; 2]| p[0] * c(0.0, 2.0);
        let g = |p: [C64; 2]| p[0];
        let p = [c(0.1, -0.04), c(0.3, 0.2)];
        let vf = metric.section_norm_sq(chart, &f, p).unwrap();
        let vg = metric.section_norm_sq(chart, &g, p).unwrap();
        assert!((vf - 4.0 * vg).abs() < 1e-12);
    }

    #[test]
    fn non_section_rejected() {
        let metric = standard_metric();
        let chart = BlowupChart::point_chart_c2(0);
        // constant function does not vanish on E
        let f = |_: [C64; 2]| c(1.0, 0.0);
        assert!(matches!(
            metric.section_norm_sq(chart, &f, [c(0.2, 0.0), c(0.1, 0.0)]),
            Err(BlowupError::NotASection { .. })
        ));
    }

    #[test]
    fn cross_chart_norms_agree() {
        let metric = standard_metric();
        let a = BlowupChart::point_chart_c2(0);
        let b = BlowupChart::point_chart_c2(1);
        // the section zeta0 on chart a corresponds to eta0 * sigma on chart b
        // through z1 = zeta0 = eta0 sigma
        let fa = |p: [C64; 2]| p[0];
        let fb = |p: [C64; 2]| p[0] * p[1];
        let mut rng = SplitMix64::new(3);
        for _ in 0..12 {
            let p = [c(rng.range(0.05, 0.5), rng.range(-0.2, 0.2)), c(rng.range(0.4, 1.8), 0.0)];
            let q = chart_transition(a, b, p).unwrap();
            let va = metric.section_norm_sq(a, &fa, p).unwrap();
            let vb = metric.section_norm_sq(b, &fb, q).unwrap();
            assert!((va - vb).abs() < 1e-10 * (1.0 + va.abs()), "{va} vs {vb}");
        }
    }

    #[test]
    fn lambda_threshold_block_diagonal_is_zero() {
        let a = Hermitian::identity(2);
        let x = Hermitian::zeros(2);
        let d = Hermitian::identity(2);
        let y = vec![vec![c(0.0, 0.0); 2]; 2];
        // the infimum is 0 (strict positivity first fails exactly there);
        // the bisection grid reports it to its resolution
        assert!(lambda_threshold(&a, &x, &y, &d).unwrap() < 2e-6);
    }

    #[test]
    fn lambda_threshold_scalar_case() {
        // 1x1 blocks: lambda - cval > 0, threshold = cval
        let a = Hermitian::identity(1);
        let mut x = Hermitian::zeros(1);
        let cval = 3.7;
        x.set(0, 0, c(-cval, 0.0));
        let d = Hermitian::identity(1);
        let y = vec![vec![c(0.0, 0.0); 1]; 1];
        let lam = lambda_threshold(&a, &x, &y, &d).unwrap();
        assert!((lam - cval).abs() < 1e-5, "{lam}");
    }

    #[test]
    fn lambda_threshold_matches_dense_scan() {
        let mut rng = SplitMix64::new(77);
        for _ in 0..25 {
            let (p, q) = (2usize, 2usize);
            let mut a = Hermitian::zeros(p);
            let mut x = Hermitian::zeros(p);
            let mut d = Hermitian::zeros(q);
            for i in 0..p {
                a.set(i, i, c(rng.range(0.5, 2.0), 0.0));
                x.set(i, i, c(rng.range(-3.0, 1.0), 0.0));
            }
            x.set(0, 1, c(rng.range(-1.0, 1.0), rng.range(-1.0, 1.0)));
            for i in 0..q {
                d.set(i, i, c(rng.range(0.5, 2.0), 0.0));
            }
            d.set(0, 1, c(rng.range(-0.3, 0.3), 0.0));
            if !d.is_positive(0.0) {
                continue;
            }
            let y: Vec<Vec<C64>> = (0..p)
                .map(|_| (0..q).map(|_| c(rng.range(-1.0, 1.0), rng.range(-1.0, 1.0))).collect())
                .collect();
            let lam = lambda_threshold(&a, &x, &y, &d).unwrap();
            // dense scan oracle
            let assemble = |l: f64| -> Hermitian {
                let mut m = Hermitian::zeros(p + q);
                for i in 0..p {
                    for j in i..p {
                        m.set(i, j, x.get(i, j) + a.get(i, j) * l);
                    }
                }
                for i in 0..q {
                    for j in i..q {
                        m.set(p + i, p + j, d.get(i, j));
                    }
                }
                for i in 0..p {
                    for j in 0..q {
                        m.set(i, p + j, y[i][j]);
                    }
                }
                m
            };
            let step = (lam.max(1.0)) / 256.0;
            let mut scan = 0.0;
            let mut t = 0.0;
            while t < lam + 2.0 * step {
                if assemble(t).is_positive(0.0) {
                    scan = t;
                    break;
                }
                t += step;
            }
            assert!((lam - scan).abs() <= 2.0 * step, "bisect {lam} scan {scan}");
            // monotone above the threshold
            assert!(assemble(lam + 1.0).is_positive(0.0));
        }
    }

    #[test]
    fn lambda_threshold_monotone_in_x() {
        let a = Hermitian::identity(2);
        let d = Hermitian::identity(2);
        let y = vec![vec![c(0.2, 0.1); 2]; 2];
        let mut x1 = Hermitian::zeros(2);
        x1.set(0, 0, c(-1.0, 0.0));
        x1.set(1, 1, c(-0.5, 0.0));
        // enlarging X in psd order never decreases the threshold... the
        // shifted matrix needs MORE compensation when X shrinks
        let mut x2 = x1.clone();
        x2.set(0, 0, c(-2.0, 0.0));
        let l1 = lambda_threshold(&a, &x1, &y, &d).unwrap();
        let l2 = lambda_threshold(&a, &x2, &y, &d).unwrap();
        assert!(l2 >= l1 - 1e-9, "l1 {l1} l2 {l2}");
    }

    #[test]
    fn hypothesis_violation_detected() {
        let a = Hermitian::diag(&[1.0, -0.1]);
        let x = Hermitian::zeros(2);
        let d = Hermitian::identity(1);
        let y = vec![vec![c(0.0, 0.0)]; 2];
        assert!(matches!(
            lambda_threshold(&a, &x, &y, &d),
            Err(BlowupError::HypothesisViolated(_))
        ));
    }

    fn small_compact() -> CompactSpec {
        CompactSpec { zeta_max: 1.0, theta_max: 2.0, samples_per_axis: 9 }
    }

    #[test]
    fn positivity_threshold_found_and_witnessed() {
        let metric = standard_metric();
        let rep = positivity_threshold(BlowupChart::point_chart_c2(0), &metric, small_compact())
            .unwrap();
        assert!(rep.eps_k > 0.0, "eps_K {}", rep.eps_k);
        assert!(rep.witness_min > 0.0);
        assert!(rep.sample_based);
        // on-E fiber block equals the Fubini-Study value 1 at theta = 0
        assert!((rep.on_e_block - 1.0).abs() < 1e-8, "{}", rep.on_e_block);
    }

    #[test]
    fn pullback_degenerates_along_fibers() {
        // at eps = 0 the certified form is just pi* omega, whose minimal
        // eigenvalue vanishes on E along the fiber direction
        let chart = BlowupChart::point_chart_c2(0);
        let on_e = pullback_base(chart, [c(0.0, 0.0), c(0.3, 0.1)]);
        assert!(on_e.min_eigenvalue().abs() < 1e-12);
        let off_e = pullback_base(chart, [c(0.4, 0.0), c(0.3, 0.1)]);
        assert!(off_e.min_eigenvalue() > 1e-3);
    }

    #[test]
    fn threshold_shrinks_as_compact_grows() {
        // tripling the box with tripled sampling makes the point sets nest,
        // so down-monotonicity in the exhaustion is exact
        let metric = standard_metric();
        let chart = BlowupChart::point_chart_c2(0);
        let small = positivity_threshold(chart, &metric, small_compact()).unwrap();
        let big = positivity_threshold(
            chart,
            &metric,
            CompactSpec { zeta_max: 3.0, theta_max: 6.0, samples_per_axis: 27 },
        )
        .unwrap();
        assert!(big.eps_k <= small.eps_k + 1e-9, "small {} big {}", small.eps_k, big.eps_k);
    }

    #[test]
    fn iterated_two_stage_certificate() {
        let m1 = standard_metric();
        let m2 = ExceptionalMetric { cutoff: CutoffProfile::new(0.15, 0.35) };
        let rep = iterated_metric(&m1, &m2, CompactSpec {
            zeta_max: 0.8,
            theta_max: 1.5,
            samples_per_axis: 7,
        })
        .unwrap();
        assert!(rep.n1 >= 1 && rep.n2 >= 1);
        assert!(rep.witness_min > 0.0);
        assert!(rep.log_product_defect < 1e-12, "{}", rep.log_product_defect);
    }
}
