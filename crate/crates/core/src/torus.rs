//! Flat-torus solves with a prescribed split right side:
//! (omega + i ddbar phi)^n = (1 - eps) f omega^n + eps * Dirac(p),
//! the Dirac mollified by a heat-kernel bump of radius sigma and pushed to
//! zero by extrapolation over a sigma ladder.
//!
//! Masses are kept in normalized (Lelong) units: the torus cell carries
//! Lebesgue volume c_n, the measured Dirac constant, so a unit-mass ledger
//! Dirac corresponds to the lambda-density c_n * bump. In one complex
//! variable the equation is linear and solved spectrally with the zero-mean
//! gauge; in two variables a damped Newton iteration runs on the periodic
//! grid.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::fft::{dft2, idft2};
use crate::grid::{ComplexGrid, DomainKind, DomainSpec};
use crate::measure::{
    dirac_normalization, lelong_number, mass_ledger, DiracConstant, LelongEstimate, MassLedger,
};
use crate::C64;

#[derive(Clone, Debug)]
pub enum TorusError {
    /// Right side does not integrate to the background volume.
    GaugeFailure { imbalance: f64 },
    /// Density must be strictly positive with unit normalized integral.
    InvalidDensity(String),
    /// The n = 2 Newton iteration failed.
    NewtonFailure(String),
    Measure(crate::measure::MeasureError),
}

impl core::fmt::Display for TorusError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            TorusError::GaugeFailure { imbalance } => {
                write!(f, "right side breaks the volume gauge by {imbalance}")
            }
            TorusError::InvalidDensity(m) => write!(f, "invalid density: {m}"),
            TorusError::NewtonFailure(m) => write!(f, "torus Newton failed: {m}"),
            TorusError::Measure(e) => write!(f, "{e}"),
        }
    }
}

/// Smooth positive densities with unit normalized integral.
#[derive(Clone, Debug, PartialEq)]
pub enum DensityKind {
    Uniform,
    /// 1 + amp cos(2 pi (kx x + ky y) / L); requires |amp| < 1.
    Cosine { amp: f64, kx: i32, ky: i32 },
}

impl DensityKind {
    fn eval(&self, period: f64, z: &[f64]) -> f64 {
        match *self {
            DensityKind::Uniform => 1.0,
            DensityKind::Cosine { amp, kx, ky } => {
                let arg = core::f64::consts::TAU * (kx as f64 * z[0] + ky as f64 * z[1]) / period;
                1.0 + amp * libm::cos(arg)
            }
        }
    }
}

#[derive(Clone, Debug)]
pub struct TorusProblem {
    pub n: usize,
    pub period: f64,
    pub resolution: usize,
    pub density: DensityKind,
    pub pole: [f64; 4],
    pub epsilon: f64,
    /// Dirac mollification radius.
    pub sigma: f64,
}

impl TorusProblem {
    pub fn domain(&self) -> DomainSpec {
        let kind = if self.n == 1 {
            DomainKind::Torus1 { period: self.period }
        } else {
            DomainKind::Torus2 { period: self.period }
        };
        DomainSpec { kind, resolution: self.resolution }
    }

    /// Period giving the cell unit volume in normalized units.
    pub fn unit_volume_period(n: usize) -> f64 {
        let cn = dirac_normalization(n, if n == 1 { 512 } else { 48 }).value;
        libm::pow(cn, 1.0 / (2 * n) as f64)
    }
}

#[derive(Clone, Debug)]
pub struct TorusReport {
    pub phi: ComplexGrid,
    pub residual_max: f64,
    pub iterations: usize,
    pub ledger: MassLedger,
    /// Present when a 4-rung ladder fits between the excision floor and
    /// the cell; coarse grids may not accommodate one.
    pub lelong: Option<LelongEstimate>,
    pub normalization: DiracConstant,
}

/// Periodized heat-kernel mollifier with unit Lebesgue mass on the cell.
pub fn heat_bump(period: f64, sigma: f64, x: &[f64], center: &[f64], m: usize) -> f64 {
    let mut out = 1.0;
    for a in 0..m {
        let mut theta = 1.0f64;
        let mut k = 1i32;
        loop {
            let freq = core::f64::consts::TAU * k as f64 / period;
            let damp = libm::exp(-0.5 * freq * freq * sigma * sigma);
            if damp < 1e-18 || k > 4096 {
                break;
            }
            theta += 2.0 * damp * libm::cos(freq * (x[a] - center[a]));
            k += 1;
        }
        out *= theta / period;
    }
    out
}

/// Right side in Lebesgue-density form: (1 - eps) f + eps c_n bump.
fn rhs_density(p: &TorusProblem, cn: f64, z: &[f64]) -> f64 {
    let m = 2 * p.n;
    (1.0 - p.epsilon) * p.density.eval(p.period, z)
        + p.epsilon * cn * heat_bump(p.period, p.sigma, z, &p.pole[..m], m)
}

pub fn solve_torus(p: &TorusProblem) -> Result<TorusReport, TorusError> {
    let domain = p.domain();
    let m = 2 * p.n;
    let h = domain.spacing();
    let cell = libm::pow(h, m as f64);
    let cn = dirac_normalization(p.n, if p.n == 1 { 1024 } else { 64 });
    let area = libm::pow(p.period, m as f64);

    let mut f_int = 0.0;
    for i in 0..domain.node_count() {
        let z = domain.coords(&domain.unflatten(i));
        let fv = p.density.eval(p.period, &z[..m]);
        if fv <= 0.0 {
            return Err(TorusError::InvalidDensity("density must be positive".into()));
        }
        f_int += fv * cell;
    }
    if (f_int / cn.value - 1.0).abs() > 1e-6 {
        return Err(TorusError::InvalidDensity(alloc::format!(
            "normalized integral of f is {}, expected 1 (cell volume must be c_n)",
            f_int / cn.value
        )));
    }

    let rhs: Vec<f64> = (0..domain.node_count())
        .map(|i| {
            let z = domain.coords(&domain.unflatten(i));
            rhs_density(p, cn.value, &z[..m])
        })
        .collect();
    // gauge compatibility: total right side equals the cell volume
    let rhs_int: f64 = rhs.iter().sum::<f64>() * cell;
    let imbalance = (rhs_int - area).abs() / area;
    if imbalance > 1e-4 {
        return Err(TorusError::GaugeFailure { imbalance });
    }

    let (phi, iterations, residual_max) = if p.n == 1 {
        solve_spectral_1d(p, &domain, &rhs)
    } else {
        solve_newton_2d(&domain, &rhs)?
    };

    let excision = h;
    let r_mass = (8.0 * p.sigma).max(8.0 * h).min(0.45 * p.period);
    let ledger = mass_ledger(&phi, 1.0, &[(p.pole, r_mass)], excision, cn.clone())
        .map_err(TorusError::Measure)?;
    let r_lelong = (0.4 * p.period).min(24.0 * excision);
    let lelong = lelong_number(&phi, &p.pole[..m], r_lelong, excision).ok();
    Ok(TorusReport { phi, residual_max, iterations, ledger, lelong, normalization: cn })
}

/// n = 1: Delta phi = 4 (rhs - 1) by DFT with the zero-mean gauge.
fn solve_spectral_1d(
    p: &TorusProblem,
    domain: &DomainSpec,
    rhs: &[f64],
) -> (ComplexGrid, usize, f64) {
    let len = domain.axis_len();
    let mut data: Vec<C64> = rhs.iter().map(|&v| C64::new(4.0 * (v - 1.0), 0.0)).collect();
    dft2(&mut data, len);
    for kx in 0..len {
        for ky in 0..len {
            let idx = kx * len + ky;
            if kx == 0 && ky == 0 {
                data[idx] = C64::new(0.0, 0.0);
                continue;
            }
            let fx = freq(kx, len, p.period);
            let fy = freq(ky, len, p.period);
            data[idx] /= -(fx * fx + fy * fy);
        }
    }
    idft2(&mut data, len);
    let mut phi = ComplexGrid::zeros(domain);
    for i in 0..phi.values.len() {
        phi.values[i] = data[i].re;
    }
    // centered-stencil defect against the sampled right side (the solve
    // itself is spectral and exact in its own basis)
    let mut res = 0.0f64;
    let h2 = domain.spacing() * domain.spacing();
    for i in 0..phi.values.len() {
        let mut lap = -4.0 * phi.values[i];
        for off in [[1i64, 0, 0, 0], [-1, 0, 0, 0], [0, 1, 0, 0], [0, -1, 0, 0]] {
            lap += phi.values[domain.neighbor(i, &off).unwrap()];
        }
        res = res.max((lap / (4.0 * h2) + 1.0 - rhs[i]).abs());
    }
    (phi, 1, res)
}

fn freq(k: usize, len: usize, period: f64) -> f64 {
    let kk = if k <= len / 2 { k as i64 } else { k as i64 - len as i64 };
    core::f64::consts::TAU * kk as f64 / period
}

/// n = 2: det(I + ddbar phi) = rhs by damped Newton on the periodic grid,
/// walked along a continuation from the flat density, zero-mean gauge.
fn solve_newton_2d(
    domain: &DomainSpec,
    rhs: &[f64],
) -> Result<(ComplexGrid, usize, f64), TorusError> {
    let len = domain.axis_len();
    let count = domain.node_count();
    let h2 = domain.spacing() * domain.spacing();
    let nxt: Vec<usize> = (0..len).map(|i| (i + 1) % len).collect();
    let prv: Vec<usize> = (0..len).map(|i| (i + len - 1) % len).collect();
    let idx4: Vec<[u16; 4]> = (0..count)
        .map(|i| {
            let v = domain.unflatten(i);
            [v[0] as u16, v[1] as u16, v[2] as u16, v[3] as u16]
        })
        .collect();
    let flat = |a: usize, b: usize, c: usize, d: usize| ((a * len + b) * len + c) * len + d;

    let hess = |phi: &[f64], i: usize| -> [f64; 4] {
        let [a, b, c, d] = idx4[i];
        let (a, b, c, d) = (a as usize, b as usize, c as usize, d as usize);
        let cv = phi[i];
        let lap1 = phi[flat(nxt[a], b, c, d)]
            + phi[flat(prv[a], b, c, d)]
            + phi[flat(a, nxt[b], c, d)]
            + phi[flat(a, prv[b], c, d)]
            - 4.0 * cv;
        let lap2 = phi[flat(a, b, nxt[c], d)]
            + phi[flat(a, b, prv[c], d)]
            + phi[flat(a, b, c, nxt[d])]
            + phi[flat(a, b, c, prv[d])]
            - 4.0 * cv;
        let cross = |p1: usize, q1: usize| -> f64 {
            let base = [a, b, c, d];
            let pick = |pp: usize, qq: usize| -> f64 {
                let mut ii = base;
                ii[p1] = pp;
                ii[q1] = qq;
                phi[flat(ii[0], ii[1], ii[2], ii[3])]
            };
            let (pp, qq) = (base[p1], base[q1]);
            (pick(nxt[pp], nxt[qq]) - pick(nxt[pp], prv[qq]) - pick(prv[pp], nxt[qq])
                + pick(prv[pp], prv[qq]))
                / (4.0 * h2)
        };
        let re = (cross(0, 2) + cross(1, 3)) / 4.0;
        let im = (cross(0, 3) - cross(1, 2)) / 4.0;
        [lap1 / (4.0 * h2), lap2 / (4.0 * h2), re, im]
    };
    let det_at = |phi: &[f64], i: usize| -> f64 {
        let hp = hess(phi, i);
        (1.0 + hp[0]) * (1.0 + hp[1]) - (hp[2] * hp[2] + hp[3] * hp[3])
    };
    let min_eig = |phi: &[f64], i: usize| -> f64 {
        let hp = hess(phi, i);
        let m11 = 1.0 + hp[0];
        let m22 = 1.0 + hp[1];
        let tr = m11 + m22;
        let det = m11 * m22 - (hp[2] * hp[2] + hp[3] * hp[3]);
        0.5 * (tr - libm::sqrt((tr * tr - 4.0 * det).max(0.0)))
    };

    let mut phi = vec![0.0f64; count];
    let mut iterations = 0usize;
    let mut w = 0.0f64;
    let mut dw = 0.125f64;
    'continuation: while w < 1.0 {
        let w_next = (w + dw).min(1.0);
        let backup = phi.clone();
        let target: Vec<f64> = rhs.iter().map(|&v| 1.0 + w_next * (v - 1.0)).collect();
        let target_sup = target.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let newton_tol = 1e-4 * (1.0 + target_sup);
        let mut sup_r = f64::INFINITY;
        for _newton in 0..40 {
            let mut r = vec![0.0f64; count];
            sup_r = 0.0;
            for i in 0..count {
                r[i] = det_at(&phi, i) - target[i];
                sup_r = sup_r.max(r[i].abs());
            }
            if sup_r < newton_tol {
                break;
            }
            let adj: Vec<[f64; 4]> = (0..count)
                .map(|i| {
                    let hp = hess(&phi, i);
                    [1.0 + hp[1], 1.0 + hp[0], hp[2], hp[3]]
                })
                .collect();
            // rank-one mean shift pins the constant nullspace of the
            // periodic linearization so the Krylov solve stays regular
            let kappa = 0.1 / h2;
            let apply_at = |x: &[f64], i: usize| -> f64 {
                let aij = &adj[i];
                let hp = hess(x, i);
                aij[0] * hp[0] + aij[1] * hp[1] - 2.0 * (aij[2] * hp[2] + aij[3] * hp[3])
            };
            let apply_shifted = |x: &[f64], mean_x: f64, i: usize| -> f64 {
                apply_at(x, i) - kappa * mean_x
            };
            let dinv: Vec<f64> =
                (0..count).map(|i| -h2 / (adj[i][0] + adj[i][1])).collect();
            // symmetric Gauss-Seidel preconditioned BiCGStab, as in the
            // Dirichlet backend; the gauge is fixed by re-centering
            let precondition = |rhs: &[f64], x: &mut [f64]| {
                x.iter_mut().for_each(|v| *v = 0.0);
                for i in 0..count {
                    let li = apply_at(x, i);
                    x[i] += (rhs[i] - li) * dinv[i];
                }
                for i in (0..count).rev() {
                    let li = apply_at(x, i);
                    x[i] += (rhs[i] - li) * dinv[i];
                }
                let mean = x.iter().sum::<f64>() / count as f64;
                x.iter_mut().for_each(|v| *v -= mean);
            };
            let b: Vec<f64> = r.iter().map(|v| -v).collect();
            let mut delta = vec![0.0f64; count];
            {
                let mut res = b.clone();
                let mut rhat = res.clone();
                let mut pv = vec![0.0f64; count];
                let mut vv = vec![0.0f64; count];
                let mut phat = vec![0.0f64; count];
                let mut shat = vec![0.0f64; count];
                let mut tv = vec![0.0f64; count];
                let (mut rho, mut al, mut om) = (1.0f64, 1.0f64, 1.0f64);
                let b_sup = b.iter().fold(0.0f64, |m, v| m.max(v.abs()));
                let mut restarts = 0usize;
                for _it in 0..80 {
                    iterations += 4;
                    let rho1: f64 = rhat.iter().zip(&res).map(|(a, b)| a * b).sum();
                    let mut breakdown = rho1.abs() < 1e-14 * (1.0 + b_sup) * (1.0 + b_sup);
                    if !breakdown {
                        let beta = (rho1 / rho) * (al / om);
                        for i in 0..count {
                            pv[i] = res[i] + beta * (pv[i] - om * vv[i]);
                        }
                        precondition(&pv, &mut phat);
                        let mean_p = phat.iter().sum::<f64>() / count as f64;
                        for i in 0..count {
                            vv[i] = apply_shifted(&phat, mean_p, i);
                        }
                        let denom: f64 = rhat.iter().zip(&vv).map(|(a, b)| a * b).sum();
                        breakdown = denom.abs() < 1e-14 * (1.0 + b_sup) * (1.0 + b_sup);
                        if !breakdown {
                            al = rho1 / denom;
                            for i in 0..count {
                                res[i] -= al * vv[i];
                            }
                            precondition(&res, &mut shat);
                            let mean_s = shat.iter().sum::<f64>() / count as f64;
                            for i in 0..count {
                                tv[i] = apply_shifted(&shat, mean_s, i);
                            }
                            let tt: f64 = tv.iter().map(|x| x * x).sum();
                            om = if tt > 0.0 {
                                tv.iter().zip(&res).map(|(a, b)| a * b).sum::<f64>() / tt
                            } else {
                                0.0
                            };
                            for i in 0..count {
                                delta[i] += al * phat[i] + om * shat[i];
                                res[i] -= om * tv[i];
                            }
                            breakdown = om == 0.0;
                        }
                    }
                    let res_sup = res.iter().fold(0.0f64, |m, v| m.max(v.abs()));
                    if !res_sup.is_finite() {
                        delta.iter_mut().for_each(|x| *x = 0.0);
                        break;
                    }
                    if res_sup <= 1e-6 * (1.0 + b_sup) {
                        break;
                    }
                    if breakdown {
                        if restarts >= 4 {
                            break;
                        }
                        restarts += 1;
                        let mean_d = delta.iter().sum::<f64>() / count as f64;
                        for i in 0..count {
                            tv[i] = apply_shifted(&delta, mean_d, i);
                            res[i] = b[i] - tv[i];
                        }
                        rhat.copy_from_slice(&res);
                        pv.iter_mut().for_each(|x| *x = 0.0);
                        vv.iter_mut().for_each(|x| *x = 0.0);
                        rho = 1.0;
                        al = 1.0;
                        om = 1.0;
                        continue;
                    }
                    rho = rho1;
                }
            }
            let mean = delta.iter().sum::<f64>() / count as f64;
            delta.iter_mut().for_each(|x| *x -= mean);
            let mut alpha = 1.0f64;
            let mut done = false;
            for _ in 0..30 {
                let trial: Vec<f64> = phi.iter().zip(&delta).map(|(a, d)| a + alpha * d).collect();
                let pd = (0..count).all(|i| min_eig(&trial, i) > 0.0);
                if pd {
                    let sup_t = (0..count)
                        .map(|i| (det_at(&trial, i) - target[i]).abs())
                        .fold(0.0f64, f64::max);
                    if sup_t <= sup_r * (1.0 - 0.25 * alpha) + 1e-14 {
                        phi = trial;
                        done = true;
                        break;
                    }
                }
                alpha *= 0.5;
            }
            if !done {
                // shorten the continuation step and retry from the backup
                phi = backup;
                dw *= 0.5;
                if dw < 1e-3 {
                    return Err(TorusError::NewtonFailure(alloc::format!(
                        "no descent near w = {w_next}"
                    )));
                }
                continue 'continuation;
            }
        }
        if sup_r > newton_tol {
            phi = backup;
            dw *= 0.5;
            if dw < 1e-3 {
                return Err(TorusError::NewtonFailure(alloc::format!(
                    "residual {sup_r} near w = {w_next}"
                )));
            }
            continue 'continuation;
        }
        w = w_next;
        dw = (dw * 2.0).min(0.25);
    }
    let mean = phi.iter().sum::<f64>() / count as f64;
    phi.iter_mut().for_each(|x| *x -= mean);
    let mut grid = ComplexGrid::zeros(domain);
    let mut res = 0.0f64;
    for i in 0..count {
        grid.values[i] = phi[i];
        res = res.max((det_at(&phi, i) - rhs[i]).abs());
    }
    Ok((grid, iterations, res))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_torus_1d(eps: f64, sigma_cells: f64, res: usize) -> TorusProblem {
        let period = TorusProblem::unit_volume_period(1);
        TorusProblem {
            n: 1,
            period,
            resolution: res,
            density: DensityKind::Uniform,
            pole: [0.5 * period, 0.5 * period, 0.0, 0.0],
            epsilon: eps,
            sigma: sigma_cells * period / res as f64,
        }
    }

    #[test]
    fn bump_has_unit_mass() {
        let period = 1.7;
        let sigma = 0.05;
        let steps = 256;
        let h = period / steps as f64;
        let mut total = 0.0;
        for i in 0..steps {
            for j in 0..steps {
                let x = [i as f64 * h, j as f64 * h];
                total += heat_bump(period, sigma, &x, &[0.3, 0.9], 2) * h * h;
            }
        }
        assert!((total - 1.0).abs() < 1e-10, "{total}");
    }

    #[test]
    fn small_eps_gives_small_phi() {
        let p = unit_torus_1d(1e-4, 4.0, 64);
        let rep = solve_torus(&p).unwrap();
        let sup = rep.phi.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        assert!(sup < 1e-2, "{sup}");
    }

    /// Mass split: total 1 at every sigma; the pole mass carries an
    /// O(sigma^2) smooth-part bias that a two-point extrapolation in
    /// sigma^2 removes.
    #[test]
    fn mass_ledger_splits() {
        let pa = unit_torus_1d(0.3, 4.0, 128);
        let pb = unit_torus_1d(0.3, 8.0, 128);
        let ra = solve_torus(&pa).unwrap();
        let rb = solve_torus(&pb).unwrap();
        assert!((ra.ledger.total_mass - 1.0).abs() < 1e-2, "total {}", ra.ledger.total_mass);
        assert!((rb.ledger.total_mass - 1.0).abs() < 1e-2, "total {}", rb.ledger.total_mass);
        let (ma, mb) = (ra.ledger.pole_masses[0].1, rb.ledger.pole_masses[0].1);
        let (sa, sb) = (pa.sigma * pa.sigma, pb.sigma * pb.sigma);
        let extrapolated = ma + (mb - ma) * (0.0 - sa) / (sb - sa);
        assert!((extrapolated - 0.3).abs() < 2e-2, "pole {extrapolated} ({ma}, {mb})");
    }

    /// Independent spectral oracle: truncated analytic Fourier series of
    /// the heat-kernel right side evaluated at probe points.
    #[test]
    fn spectral_oracle_pointwise() {
        let p = unit_torus_1d(0.3, 6.0, 128);
        let rep = solve_torus(&p).unwrap();
        let cn = rep.normalization.value;
        let period = p.period;
        for (ix, iy) in [(17usize, 45usize), (64, 64), (100, 13)] {
            let x = [ix as f64 * period / 128.0, iy as f64 * period / 128.0];
            let mut val = 0.0;
            let kmax = 60i32;
            for kx in -kmax..=kmax {
                for ky in -kmax..=kmax {
                    if kx == 0 && ky == 0 {
                        continue;
                    }
                    let fx = core::f64::consts::TAU * kx as f64 / period;
                    let fy = core::f64::consts::TAU * ky as f64 / period;
                    let damp = libm::exp(-0.5 * (fx * fx + fy * fy) * p.sigma * p.sigma);
                    let rhs_hat = p.epsilon * cn * damp / (period * period);
                    let phase = fx * (x[0] - p.pole[0]) + fy * (x[1] - p.pole[1]);
                    val += -4.0 * rhs_hat / (fx * fx + fy * fy) * libm::cos(phase);
                }
            }
            let flat = rep.phi.domain.flatten(&[ix, iy]);
            assert!(
                (rep.phi.values[flat] - val).abs() < 1e-6,
                "probe ({ix},{iy}): {} vs {val}",
                rep.phi.values[flat]
            );
        }
    }

    #[test]
    fn lelong_estimate_tracks_eps() {
        let p = unit_torus_1d(0.3, 3.0, 256);
        let rep = solve_torus(&p).unwrap();
        let slope = rep.lelong.unwrap().slope;
        assert!((slope - 0.3).abs() < 0.08, "slope {slope}");
    }

    #[test]
    fn translation_equivariance() {
        let p = unit_torus_1d(0.25, 6.0, 128);
        let rep = solve_torus(&p).unwrap();
        let mut q = p.clone();
        let shift = 16.0 * p.period / 128.0;
        q.pole = [p.pole[0] + shift, p.pole[1], 0.0, 0.0];
        let rep2 = solve_torus(&q).unwrap();
        let d = &rep.phi.domain;
        let mut worst = 0.0f64;
        for i in 0..rep.phi.values.len() {
            let idx = d.unflatten(i);
            let shifted = d.flatten(&[(idx[0] + 16) % 128, idx[1]]);
            worst = worst.max((rep2.phi.values[shifted] - rep.phi.values[i]).abs());
        }
        assert!(worst < 1e-8, "{worst}");
    }

    #[test]
    fn bad_cell_volume_detected() {
        let mut p = unit_torus_1d(0.3, 6.0, 64);
        p.period = 1.0;
        match solve_torus(&p) {
            Err(TorusError::InvalidDensity(_)) | Err(TorusError::GaugeFailure { .. }) => {}
            other => panic!("expected gauge/density failure, got {other:?}"),
        }
    }

    #[test]
    fn torus_2d_newton_mass() {
        let period = TorusProblem::unit_volume_period(2);
        let p = TorusProblem {
            n: 2,
            period,
            resolution: 16,
            density: DensityKind::Uniform,
            pole: [0.5 * period; 4],
            epsilon: 0.2,
            sigma: 4.0 * period / 16.0,
        };
        let rep = solve_torus(&p).unwrap();
        assert!(rep.residual_max < 1e-3, "residual {}", rep.residual_max);
        assert!((rep.ledger.total_mass - 1.0).abs() < 5e-2, "total {}", rep.ledger.total_mass);
    }
}
