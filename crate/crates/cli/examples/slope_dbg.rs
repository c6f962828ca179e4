use plurigreen_cli::runner::build_green_problem;
use plurigreen_cli::suites;
use plurigreen_core::measure::lelong_number;
use plurigreen_core::solve::solve_envelope;

fn main() {
    let p = build_green_problem(&suites::slope_cfg(32, 1)).unwrap();
    println!("excision {} r_in {} h {}", p.excision_radius, p.singularities.poles[0].r_in(), p.domain.spacing());
    println!("augmentation {}", p.background.augmentation);
    let rep = solve_envelope(&p).unwrap();
    println!("iterations {} residual {:.3e}", rep.iterations, rep.residual_max);
    let res = 32usize;
    for i in (res/2)..=res {
        let idx = [i, res/2, res/2, res/2];
        let flat = p.domain.flatten(&idx);
        let z = p.domain.coords(&idx);
        if !rep.green.is_valued(flat) { println!("{:6.3}  excised", z[0]); continue; }
        let oracle = 0.25 * (z[0]*z[0]).ln();
        println!("{:6.3} {:9.4} oracle-ish {:9.4}", z[0], rep.green.values[flat], oracle);
    }
    let est = lelong_number(&rep.green, &[0.0;4], 0.45, p.excision_radius).unwrap();
    println!("slope {} residual {} radii {:?}", est.slope, est.fit_residual, est.radii);
}
