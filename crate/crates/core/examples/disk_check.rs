use plurigreen_core::grid::{DomainKind, DomainSpec};
use plurigreen_core::poly::Poly;
use plurigreen_core::singularity::{auto_augmentation, BackgroundBase, CutoffProfile, Pole, SingularityData};
use plurigreen_core::solve::{solve_envelope, solve_regularized, BoundaryData, GreenProblem, SolverConfig};
use plurigreen_core::C64;
use std::time::Instant;

fn run(res: usize) -> (f64, f64, std::time::Duration) {
    let domain = DomainSpec::new(DomainKind::Disk { radius: 1.0 }, res).unwrap();
    let h = domain.spacing();
    let sing = SingularityData::new(vec![Pole {
        position: [0.3, 0.0, 0.0, 0.0], epsilon: 0.5,
        f: vec![Poly::coordinate(1, 0)],
        cutoff: CutoffProfile::new(0.15, 0.45),
    }]);
    let bg = auto_augmentation(&domain, &sing, BackgroundBase::Zero, 1.0, 1e-6, 0.5).unwrap();
    let p = GreenProblem::new(domain.clone(), bg, sing, BoundaryData { value: 0.0 }, (4.0*h).min(0.07).max(h), SolverConfig::default()).unwrap();
    let t0 = Instant::now();
    let rep = solve_envelope(&p).unwrap();
    let el = t0.elapsed();
    let pole = C64::new(0.3, 0.0);
    let mut worst = 0.0f64;
    for i in rep.green.interior_nodes() {
        let zc = rep.green.node_coords(i);
        let z = C64::new(zc[0], zc[1]);
        if (z - pole).norm() < 0.05 { continue; }
        let m = (z - pole) / (C64::new(1.0, 0.0) - pole.conj() * z);
        worst = worst.max((rep.green.values[i] - 0.5 * m.norm_sqr().ln()).abs());
    }
    (worst, rep.residual_max, el)
}

fn main() {
    let (e256, r256, t256) = run(256);
    println!("res 256: err={:.5} res={:.2e} time={:?}", e256, r256, t256);
    let (e512, _r, t512) = run(512);
    println!("res 512: err={:.5} time={:?} ratio={:.3}", e512, t512, e512 / e256);
    // newton on 256 (criterion 4 + 10)
    let domain = DomainSpec::new(DomainKind::Disk { radius: 1.0 }, 256).unwrap();
    let h = domain.spacing();
    let sing = SingularityData::new(vec![Pole {
        position: [0.3, 0.0, 0.0, 0.0], epsilon: 0.5,
        f: vec![Poly::coordinate(1, 0)],
        cutoff: CutoffProfile::new(0.15, 0.45),
    }]);
    let bg = auto_augmentation(&domain, &sing, BackgroundBase::Zero, 1.0, 1e-6, 0.5).unwrap();
    let p = GreenProblem::new(domain.clone(), bg, sing, BoundaryData { value: 0.0 }, (4.0*h).min(0.07).max(h), SolverConfig::default()).unwrap();
    let t0 = Instant::now();
    match solve_regularized(&p) {
        Ok(rep) => {
            let pole = C64::new(0.3, 0.0);
            let mut worst = 0.0f64;
            for i in rep.green.interior_nodes() {
                let zc = rep.green.node_coords(i);
                let z = C64::new(zc[0], zc[1]);
                if (z - pole).norm() < 0.05 { continue; }
                let m = (z - pole) / (C64::new(1.0, 0.0) - pole.conj() * z);
                worst = worst.max((rep.green.values[i] - 0.5 * m.norm_sqr().ln()).abs());
            }
            println!("newton 256: err={:.5} time={:?} trace_len={}", worst, t0.elapsed(), rep.c1_trace.len());
            let first = rep.c1_trace[0].1.max(1e-12);
            let mx = rep.c1_trace.iter().map(|x| x.1).fold(0.0f64, f64::max);
            println!("c1 trace: first={:.3e} max={:.3e} ratio={:.2}", first, mx, mx/first);
        }
        Err(e) => println!("newton failed: {e}"),
    }
}
