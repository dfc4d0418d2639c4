use glfield_core::strip::*;
use std::time::Instant;

fn main() {
    // pin d(1,12)/24 with a fine-grid oracle and check default-grid agreement
    for (h, label) in [(0.05, "default"), (0.025, "fine")] {
        let t0 = Instant::now();
        let mut p = StripProblem::new(1.0f64, 12.0);
        p.spacing = h;
        let s = d_energy(&p).unwrap();
        println!(
            "{label} h={h}: d(1,12)={:.6} d/2R={:.6} T={} iters={} restarts={:?} [{:.1}s]",
            s.d, s.d / 24.0, s.depth_used, s.iterations, s.restart_energies, t0.elapsed().as_secs_f64()
        );
    }
    let t0 = Instant::now();
    let est = esurf_estimate(1.0f64, &[8.0, 12.0, 16.0], 0.05, 0).unwrap();
    println!("E_surf(1) = {:.5} upper {:.5} m {:.3} resid {:.2e} [{:.1}s]",
        est.esurf, est.upper, est.m_fit, est.fit_residual, t0.elapsed().as_secs_f64());
}
