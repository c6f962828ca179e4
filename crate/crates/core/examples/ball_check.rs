use plurigreen_core::grid::{DomainKind, DomainSpec};
use plurigreen_core::poly::Poly;
use plurigreen_core::singularity::{auto_augmentation, BackgroundBase, CutoffProfile, Pole, SingularityData};
use plurigreen_core::solve::{solve_envelope, solve_regularized, BoundaryData, GreenProblem, SolverConfig};
use std::time::Instant;

fn main() {
    let res: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(32);
    let domain = DomainSpec::new(DomainKind::Ball { radius: 1.0 }, res).unwrap();
    let h = domain.spacing();
    let sing = SingularityData::new(vec![Pole {
        position: [0.0; 4],
        epsilon: 0.25,
        f: vec![Poly::coordinate(2, 0), Poly::coordinate(2, 1)],
        cutoff: CutoffProfile::new(0.2, 0.4),
    }]);
    let t0 = Instant::now();
    let bg = auto_augmentation(&domain, &sing, BackgroundBase::Zero, 1.0, 1e-6, 0.25).unwrap();
    println!("augmentation A = {} ({:?})", bg.augmentation, t0.elapsed());
    let mut cfg = SolverConfig::default();
    cfg.tol_fix = 1e-6;
    let excision = (2.0 * h).min(0.09).max(h);
    let p = GreenProblem::new(domain, bg, sing, BoundaryData { value: 0.0 }, excision, cfg).unwrap();
    let t0 = Instant::now();
    let rep = solve_envelope(&p).unwrap();
    println!("envelope: {:?} sweeps={} residual={:.3e} psh_min={:.3e}", t0.elapsed(), rep.iterations, rep.residual_max, rep.psh_min);
    let mut worst = 0.0f64;
    for i in rep.green.interior_nodes() {
        let z = rep.green.node_coords(i);
        let r2: f64 = z.iter().map(|x| x * x).sum();
        if r2.sqrt() < 0.2 { continue; }
        let oracle = 0.25 * (r2).ln();
        worst = worst.max((rep.green.values[i] - oracle).abs());
    }
    println!("envelope sup error vs radial oracle: {:.4}", worst);
    let t0 = Instant::now();
    match solve_regularized(&p) {
        Ok(rep2) => {
            println!("newton: {:?} sweeps={} residual={:.3e}", t0.elapsed(), rep2.iterations, rep2.residual_max);
            let mut worst2 = 0.0f64;
            for i in rep2.green.interior_nodes() {
                let z = rep2.green.node_coords(i);
                let r2: f64 = z.iter().map(|x| x * x).sum();
                if r2.sqrt() < 0.2 { continue; }
                worst2 = worst2.max((rep2.green.values[i] - 0.25 * r2.ln()).abs());
            }
            println!("newton sup error: {:.4}  cross-backend sup: {:.4}", worst2, rep.green.sup_diff(&rep2.green));
        }
        Err(e) => println!("newton failed: {e}"),
    }
}
