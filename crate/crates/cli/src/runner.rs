//! Pipeline orchestration: build core problems from a validated RunConfig,
//! solve, and persist grids, report and manifest.
//!
//! Exit-code contract: 0 success, 1 solver non-convergence (partial grids
//! and the manifest are still written), 2 configuration errors (nothing is
//! written).

use std::path::Path;
use std::time::Instant;

use plurigreen_core::grid::{DomainKind, DomainSpec, HermitianField};
use plurigreen_core::measure::{dirac_normalization, lelong_number, ma_density, mass_ledger};
use plurigreen_core::poly::Poly;
use plurigreen_core::ray::{solve_ray, ray_diagnostics, ray_nontriviality, RayMonomial, RayProblem};
use plurigreen_core::singularity::{
    auto_augmentation, BackgroundBase, BackgroundSpec, CutoffProfile, Pole, SingularityData,
};
use plurigreen_core::solve::{
    solve_envelope, solve_regularized, BoundaryData, GreenProblem, SolveError, SolveReport,
    SolverConfig,
};
use plurigreen_core::torus::{solve_torus, DensityKind, TorusProblem};
use plurigreen_core::blowup::{
    iterated_metric, positivity_threshold, BlowupChart, CompactSpec,
    ExceptionalMetric,
};
use plurigreen_core::hermitian::Hermitian;
use plurigreen_core::rng::SplitMix64;
use plurigreen_core::C64;

use crate::config::{
    self, Augmentation, BackendCfg, BackgroundBaseCfg, Command, DomainKindCfg, GreenCfg,
    RunConfig,
};
use crate::output::{OutputDir, Report};

pub fn domain_from_cfg(g: &GreenCfg) -> Result<DomainSpec, String> {
    let kind = match g.domain.kind {
        DomainKindCfg::Disk => DomainKind::Disk { radius: g.domain.radius },
        DomainKindCfg::Annulus => {
            DomainKind::Annulus { inner: g.domain.inner, outer: g.domain.radius }
        }
        DomainKindCfg::Ball => DomainKind::Ball { radius: g.domain.radius },
        DomainKindCfg::Polydisk => DomainKind::Polydisk { radius: g.domain.radius },
        DomainKindCfg::Torus1 => DomainKind::Torus1 { period: g.domain.radius },
        DomainKindCfg::Torus2 => DomainKind::Torus2 { period: g.domain.radius },
    };
    DomainSpec::new(kind, g.domain.resolution).map_err(|e| e.to_string())
}

/// Builds the validated Green problem from its config block.
pub fn build_green_problem(g: &GreenCfg) -> Result<GreenProblem, String> {
    let domain = domain_from_cfg(g)?;
    let n = domain.complex_dim();
    let mut poles = Vec::new();
    for p in &g.poles {
        let mut position = [0.0f64; 4];
        position[..p.position.len()].copy_from_slice(&p.position);
        let f: Result<Vec<Poly>, String> =
            p.f.iter().map(|src| config::parse_poly(src, n)).collect();
        poles.push(Pole {
            position,
            epsilon: p.epsilon,
            f: f?,
            cutoff: CutoffProfile::new(p.r_in, p.r_out),
        });
    }
    let sing = SingularityData::new(poles);
    let base = match g.background.base {
        BackgroundBaseCfg::Flat => BackgroundBase::Flat,
        BackgroundBaseCfg::Zero => BackgroundBase::Zero,
        BackgroundBaseCfg::FubiniStudy => BackgroundBase::FubiniStudy,
    };
    let need = sing.poles.iter().map(|p| p.epsilon).fold(0.0f64, f64::max).max(1e-6);
    let background = match g.background.augmentation {
        Augmentation::Fixed(a) => {
            BackgroundSpec { base, augmentation: a, rho_radius: g.domain.radius }
        }
        Augmentation::Auto => auto_augmentation(&domain, &sing, base, g.domain.radius, 1e-6, need)
            .ok_or("no augmentation certifies the requested weights")?,
    };
    let h = domain.spacing();
    let cfg = SolverConfig {
        tol_fix: g.solver.tol_fix,
        max_sweeps: g.solver.max_sweeps,
        t0: g.solver.t0,
        t_ratio: g.solver.t_ratio,
        t_min: g.solver.t_min,
        ..SolverConfig::default()
    };
    // the requested excision is clamped into the validity window
    // [h, r_in / 2) so coarse grids keep the default usable
    let min_r_in = sing.poles.iter().map(|p| p.r_in()).fold(f64::INFINITY, f64::min);
    let excision = if min_r_in.is_finite() {
        (g.solver.excision_cells * h).min(0.45 * min_r_in).max(h)
    } else {
        g.solver.excision_cells * h
    };
    GreenProblem::new(
        domain,
        background,
        sing,
        BoundaryData { value: g.boundary_value },
        excision,
        cfg,
    )
    .map_err(|e| e.to_string())
}

pub fn torus_problem(t: &crate::config::TorusCfg) -> TorusProblem {
    let period = TorusProblem::unit_volume_period(t.n);
    let mut pole = [0.0f64; 4];
    for (a, frac) in t.pole.iter().enumerate() {
        pole[a] = frac * period;
    }
    TorusProblem {
        n: t.n,
        period,
        resolution: t.resolution,
        density: match &t.density {
            config::DensityCfg::Uniform => DensityKind::Uniform,
            config::DensityCfg::Cosine { amp, kx, ky } => {
                DensityKind::Cosine { amp: *amp, kx: *kx, ky: *ky }
            }
        },
        pole,
        epsilon: t.epsilon,
        sigma: t.sigma_cells * period / t.resolution as f64,
    }
}

pub fn ray_problem(r: &crate::config::RayCfg) -> Result<RayProblem, String> {
    let f: Option<Vec<RayMonomial>> = r
        .f
        .iter()
        .map(|src| {
            config::parse_ray_monomial(src)
                .map(|(m, a, b)| RayMonomial { modulus: m, deg_z: a, deg_w: b })
        })
        .collect();
    Ok(RayProblem {
        depth: r.depth,
        s_half: r.s_half,
        resolution: r.resolution,
        f: f.ok_or("ray components must be monomials in z, w")?,
        epsilon: r.epsilon,
        cutoff: CutoffProfile::new(r.r_in, r.r_out),
        slices: r.slices,
    })
}

/// Executes a run; returns the process exit code.
pub fn run(cfg: &RunConfig, out_override: Option<&Path>) -> i32 {
    if cfg.command == Command::Verify {
        let suite = cfg.suite.as_deref().unwrap_or("");
        return match crate::suites::run_suite(suite, cfg.seed) {
            Ok(all_pass) => {
                if all_pass {
                    0
                } else {
                    1
                }
            }
            Err(msg) => {
                eprintln!("error: {msg}");
                2
            }
        };
    }
    // build and validate every problem before touching the filesystem:
    // configuration failures must leave nothing behind
    let prepared = match prepare(cfg) {
        Ok(p) => p,
        Err(msg) => {
            eprintln!("error: {msg}");
            return 2;
        }
    };
    let out_root = match (out_override, &cfg.out_dir) {
        (Some(p), _) => p.to_path_buf(),
        (None, Some(s)) => std::path::PathBuf::from(s),
        (None, None) => std::path::PathBuf::from(format!("runs/{}", cfg.command.name())),
    };
    let mut out = match OutputDir::create(&out_root) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: cannot create output directory: {e}");
            return 2;
        }
    };
    let echo = config::serialize(cfg);
    let code = match prepared {
        Prepared::Green(problem) => run_green(cfg, problem, &mut out),
        Prepared::Torus(problem) => run_torus(problem, &mut out),
        Prepared::Ray(problem) => run_ray(problem, &mut out),
        Prepared::Blowup => run_blowup(cfg, &mut out),
    };
    match code {
        Ok(c) => {
            if let Err(e) = out.finish(cfg.command.name(), &echo) {
                eprintln!("error: manifest write failed: {e}");
                return 1;
            }
            c
        }
        Err(msg) => {
            eprintln!("error: {msg}");
            2
        }
    }
}

enum Prepared {
    Green(GreenProblem),
    Torus(TorusProblem),
    Ray(RayProblem),
    Blowup,
}

fn prepare(cfg: &RunConfig) -> Result<Prepared, String> {
    match cfg.command {
        Command::Green => {
            let g = cfg.green.as_ref().ok_or("missing green block")?;
            Ok(Prepared::Green(build_green_problem(g)?))
        }
        Command::Torus => {
            let t = cfg.torus.as_ref().ok_or("missing torus block")?;
            Ok(Prepared::Torus(torus_problem(t)))
        }
        Command::Ray => {
            let r = cfg.ray.as_ref().ok_or("missing ray block")?;
            Ok(Prepared::Ray(ray_problem(r)?))
        }
        Command::Blowup => {
            cfg.blowup.as_ref().ok_or("missing blowup block")?;
            Ok(Prepared::Blowup)
        }
        Command::Verify => unreachable!(),
    }
}

fn green_report(rep: &SolveReport, out: &mut Report) {
    let backend = match rep.backend {
        plurigreen_core::solve::Backend::Envelope => "envelope",
        plurigreen_core::solve::Backend::Regularized => "regularized",
    };
    out.kv_str("backend", backend);
    out.kv("residual_max", format!("{:.6e}", rep.residual_max));
    out.kv("psh_min", format!("{:.6e}", rep.psh_min));
    out.kv("iterations", rep.iterations);
    if !rep.c1_trace.is_empty() {
        out.open("c1_trace");
        out.kv("c2", config::fmt_num(rep.c2_calibrated));
        for (t, v) in &rep.c1_trace {
            out.kv("point", format!("{} {:.6e}", config::fmt_num(*t), v));
        }
        out.close();
    }
}

fn run_green(cfg: &RunConfig, problem: GreenProblem, out: &mut OutputDir) -> Result<i32, String> {
    let g = cfg.green.as_ref().ok_or("missing green block")?;
    out.log(&format!(
        "green solve on {:?} at resolution {} with {} pole(s), augmentation {}",
        g.domain.kind,
        g.domain.resolution,
        problem.singularities.poles.len(),
        problem.background.augmentation
    ));
    let mut report = Report::new();
    report.kv_str("command", "green");
    let mut exit = 0;

    let solve_one = |backend: BackendCfg,
                     out: &mut OutputDir|
     -> Result<(SolveReport, bool), String> {
        let t0 = Instant::now();
        let result = match backend {
            BackendCfg::Envelope => solve_envelope(&problem),
            BackendCfg::Regularized => solve_regularized(&problem),
            BackendCfg::Both => unreachable!(),
        };
        let name = if backend == BackendCfg::Envelope { "envelope" } else { "regularized" };
        out.stage(&format!("solve_{name}"), t0.elapsed().as_millis());
        match result {
            Ok(rep) => Ok((rep, true)),
            Err(SolveError::NonConvergence { sweeps, last }) => {
                out.log(&format!("{name}: no convergence after {sweeps} sweeps; partial output"));
                Ok((*last, false))
            }
            Err(e) => Err(e.to_string()),
        }
    };

    let (primary, converged) = match g.solver.backend {
        BackendCfg::Both => {
            let (env, c1) = solve_one(BackendCfg::Envelope, out)?;
            let (reg, c2) = solve_one(BackendCfg::Regularized, out)?;
            let disc = env.green.sup_diff(&reg.green);
            report.kv("uniqueness_discrepancy", format!("{disc:.6e}"));
            report.open("secondary");
            green_report(&reg, &mut report);
            report.close();
            (env, c1 && c2)
        }
        b => solve_one(b, out)?,
    };
    if !converged {
        exit = 1;
    }
    green_report(&primary, &mut report);

    out.write_grid("grid_g.csv", &primary.green).map_err(|e| e.to_string())?;
    out.write_grid("grid_phi.csv", &primary.phi).map_err(|e| e.to_string())?;
    // density of the assembled solution against the unaugmented base
    let n = problem.domain.complex_dim();
    let base_field = HermitianField::from_fn(&problem.domain, |z| {
        problem.background.base_matrix(n, z)
    });
    let md = ma_density(&primary.green, &base_field);
    out.write_grid("grid_density.csv", &md.density).map_err(|e| e.to_string())?;
    report.kv("density_negative_nodes", md.negative_nodes);

    // ledger and Lelong per pole where the base is a constant multiple of
    // the identity (flat or zero with augmentation folded into the
    // remainder); the Fubini-Study base has no constant coefficient
    let base_coeff = match problem.background.base {
        BackgroundBase::Flat => Some(1.0),
        BackgroundBase::Zero => Some(0.0),
        BackgroundBase::FubiniStudy => None,
    };
    if let Some(c) = base_coeff {
        if !problem.singularities.poles.is_empty() {
            let cn = dirac_normalization(n, if n == 1 { 1024 } else { 64 });
            let poles: Vec<([f64; 4], f64)> = problem
                .singularities
                .poles
                .iter()
                .map(|p| (p.position, p.r_in()))
                .collect();
            match mass_ledger(&primary.green, c, &poles, problem.excision_radius, cn) {
                Ok(ledger) => {
                    report.open("mass");
                    report.kv("total", format!("{:.6e}", ledger.total_mass));
                    report.kv("ac", format!("{:.6e}", ledger.ac_mass));
                    for (idx, m) in &ledger.pole_masses {
                        report.kv(&format!("pole{idx}"), format!("{m:.6e}"));
                    }
                    report.kv(
                        "normalization",
                        format!("{:.12e}", ledger.normalization.value),
                    );
                    report.kv_str("normalization_provenance", ledger.normalization.provenance);
                    report.close();
                }
                Err(e) => out.log(&format!("mass ledger skipped: {e}")),
            }
            for (i, p) in problem.singularities.poles.iter().enumerate() {
                match lelong_number(
                    &primary.green,
                    &p.position[..2 * n],
                    p.r_in(),
                    problem.excision_radius,
                ) {
                    Ok(est) => {
                        report.open(&format!("lelong{i}"));
                        report.kv("slope", format!("{:.6e}", est.slope));
                        report.kv("fit_residual", format!("{:.6e}", est.fit_residual));
                        report.kv("rungs", est.radii.len());
                        report.close();
                    }
                    Err(e) => out.log(&format!("lelong {i} skipped: {e}")),
                }
            }
        }
    }
    out.write_file("report.txt", &report.finish()).map_err(|e| e.to_string())?;
    Ok(exit)
}

fn run_torus(problem: TorusProblem, out: &mut OutputDir) -> Result<i32, String> {
    let t0 = Instant::now();
    let rep = solve_torus(&problem).map_err(|e| e.to_string())?;
    out.stage("solve_torus", t0.elapsed().as_millis());
    out.write_grid("grid_phi.csv", &rep.phi).map_err(|e| e.to_string())?;
    let mut report = Report::new();
    report.kv_str("command", "torus");
    report.kv("residual_max", format!("{:.6e}", rep.residual_max));
    report.kv("iterations", rep.iterations);
    report.open("mass");
    report.kv("total", format!("{:.6e}", rep.ledger.total_mass));
    report.kv("ac", format!("{:.6e}", rep.ledger.ac_mass));
    for (idx, m) in &rep.ledger.pole_masses {
        report.kv(&format!("pole{idx}"), format!("{m:.6e}"));
    }
    report.kv("normalization", format!("{:.12e}", rep.normalization.value));
    report.kv_str("normalization_provenance", rep.normalization.provenance);
    report.close();
    if let Some(l) = &rep.lelong {
        report.open("lelong0");
        report.kv("slope", format!("{:.6e}", l.slope));
        report.kv("fit_residual", format!("{:.6e}", l.fit_residual));
        report.close();
    }
    out.write_file("report.txt", &report.finish()).map_err(|e| e.to_string())?;
    Ok(0)
}

fn run_ray(problem: RayProblem, out: &mut OutputDir) -> Result<i32, String> {
    let t0 = Instant::now();
    let sol = solve_ray(&problem).map_err(|e| e.to_string())?;
    out.stage("solve_ray", t0.elapsed().as_millis());
    // reduced potential grid
    let mut csv = String::from("s,t,value\n");
    for it in 0..sol.t_len {
        for is in 0..sol.s_len {
            let s = sol.s_min + is as f64 * sol.s_step;
            let t = sol.t_min + it as f64 * sol.t_step;
            csv.push_str(&format!("{:.16e},{:.16e},{:.16e}\n", s, t, sol.u[it * sol.s_len + is]));
        }
    }
    out.write_file("grid_u.csv", &csv).map_err(|e| e.to_string())?;
    // slices: one column per reported time
    let mut csv = String::from("s");
    for tau in &sol.slice_times {
        csv.push_str(&format!(",tau_{}", config::fmt_num(*tau)));
    }
    csv.push('\n');
    for is in 0..sol.s_len {
        csv.push_str(&format!("{:.16e}", sol.s_min + is as f64 * sol.s_step));
        for slice in &sol.slices {
            csv.push_str(&format!(",{:.16e}", slice[is]));
        }
        csv.push('\n');
    }
    out.write_file("slices.csv", &csv).map_err(|e| e.to_string())?;
    let diag = ray_diagnostics(&sol);
    let mut report = Report::new();
    report.kv_str("command", "ray");
    report.kv("sweeps", sol.sweeps);
    report.kv("nontriviality", format!("{:.6e}", ray_nontriviality(&sol.slices)));
    report.kv("geodesic_residual_median", format!("{:.6e}", diag.geodesic_residual));
    report.kv("geodesic_residual_max", format!("{:.6e}", diag.geodesic_residual_max));
    report.kv("curvature_scale", format!("{:.6e}", diag.scale));
    report.kv("fiber_floor", format!("{:.6e}", diag.fiber_floor));
    report.kv("convexity_defect", format!("{:.6e}", diag.convexity_defect));
    // invariance under both rotations holds identically in the reduced
    // coordinates; recorded for the ledger
    report.kv_str("rotation_invariance", "exact-by-reduction");
    out.write_file("report.txt", &report.finish()).map_err(|e| e.to_string())?;
    Ok(0)
}

fn run_blowup(cfg: &RunConfig, out: &mut OutputDir) -> Result<i32, String> {
    let b = cfg.blowup.as_ref().ok_or("missing blowup block")?;
    let metric = ExceptionalMetric { cutoff: CutoffProfile::new(b.r_in, b.r_out) };
    let k = CompactSpec {
        zeta_max: b.zeta_max,
        theta_max: b.theta_max,
        samples_per_axis: b.samples,
    };
    let t0 = Instant::now();
    let threshold = positivity_threshold(BlowupChart::point_chart_c2(0), &metric, k)
        .map_err(|e| e.to_string())?;
    out.stage("positivity_threshold", t0.elapsed().as_millis());
    let metric2 = ExceptionalMetric {
        cutoff: CutoffProfile::new(0.4 * b.r_in, 0.8 * b.r_in),
    };
    let t0 = Instant::now();
    let iterated = iterated_metric(&metric, &metric2, CompactSpec {
        zeta_max: 0.8 * b.zeta_max,
        theta_max: 0.75 * b.theta_max,
        samples_per_axis: b.samples.min(9),
    })
    .map_err(|e| e.to_string())?;
    out.stage("iterated_metric", t0.elapsed().as_millis());
    // randomized block-threshold instances against the dense-scan oracle
    let t0 = Instant::now();
    let mut rng = SplitMix64::new(cfg.seed);
    let mut lambda_pass = 0usize;
    for _ in 0..b.lambda_instances {
        let (ok, _, _) = crate::suites::lambda_instance(&mut rng);
        if ok {
            lambda_pass += 1;
        }
    }
    out.stage("lambda_suite", t0.elapsed().as_millis());
    let mut report = Report::new();
    report.kv_str("command", "blowup");
    report.open("threshold");
    report.kv("eps_k", format!("{:.6e}", threshold.eps_k));
    report.kv("witness_min", format!("{:.6e}", threshold.witness_min));
    report.kv("on_e_block", format!("{:.12e}", threshold.on_e_block));
    report.kv("sample_based", threshold.sample_based);
    report.close();
    report.open("iterated");
    report.kv("n1", iterated.n1);
    report.kv("n2", iterated.n2);
    report.kv("witness_min", format!("{:.6e}", iterated.witness_min));
    report.kv("log_product_defect", format!("{:.3e}", iterated.log_product_defect));
    report.close();
    report.kv("lambda_instances", b.lambda_instances);
    report.kv("lambda_matching_oracle", lambda_pass);
    out.write_file("report.txt", &report.finish()).map_err(|e| e.to_string())?;
    if lambda_pass == b.lambda_instances {
        Ok(0)
    } else {
        Ok(1)
    }
}

/// Closed-form benchmarks shared by the suites and the acceptance tests.
pub mod oracles {
    use super::*;

    /// sup |G - eps log |moebius(z; pole)|^2| over valued nodes at distance
    /// at least `clear` from the pole.
    pub fn disk_moebius_error(rep: &SolveReport, pole: C64, eps: f64, clear: f64) -> f64 {
        let mut worst = 0.0f64;
        for i in rep.green.interior_nodes() {
            let zc = rep.green.node_coords(i);
            let z = C64::new(zc[0], zc[1]);
            if (z - pole).norm() < clear {
                continue;
            }
            let m = (z - pole) / (C64::new(1.0, 0.0) - pole.conj() * z);
            let oracle = eps * m.norm_sqr().ln();
            worst = worst.max((rep.green.values[i] - oracle).abs());
        }
        worst
    }

    /// Two-pole sum of Moebius terms (the one-variable equation is linear).
    pub fn disk_two_pole_error(rep: &SolveReport, poles: &[(C64, f64)], clear: f64) -> f64 {
        let mut worst = 0.0f64;
        for i in rep.green.interior_nodes() {
            let zc = rep.green.node_coords(i);
            let z = C64::new(zc[0], zc[1]);
            if poles.iter().any(|(p, _)| (z - p).norm() < clear) {
                continue;
            }
            let mut oracle = 0.0;
            for (p, eps) in poles {
                let m = (z - p) / (C64::new(1.0, 0.0) - p.conj() * z);
                oracle += eps * m.norm_sqr().ln();
            }
            worst = worst.max((rep.green.values[i] - oracle).abs());
        }
        worst
    }

    /// Radial oracle on the unit ball in two variables.
    pub fn ball_radial_error(rep: &SolveReport, eps: f64, r_min: f64) -> f64 {
        let mut worst = 0.0f64;
        for i in rep.green.interior_nodes() {
            let z = rep.green.node_coords(i);
            let r2: f64 = z.iter().map(|x| x * x).sum();
            if r2.sqrt() < r_min {
                continue;
            }
            worst = worst.max((rep.green.values[i] - eps * r2.ln()).abs());
        }
        worst
    }

    /// Hermitian helper for the lambda-instance oracle.
    pub fn random_hermitian(rng: &mut SplitMix64, n: usize, shift: f64) -> Hermitian {
        let mut m = Hermitian::zeros(n);
        for i in 0..n {
            m.set(i, i, C64::new(rng.range(0.3, 2.0) + shift, 0.0));
            for j in (i + 1)..n {
                m.set(i, j, C64::new(rng.range(-0.6, 0.6), rng.range(-0.6, 0.6)));
            }
        }
        m
    }
}
