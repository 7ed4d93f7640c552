use nls_core::*;
fn main() {
    let pp = ProblemParams::new(3).unwrap();
    let nl = make_g2_example(pp, 0.0).unwrap();
    let xi = PerturbationXi::sobolev_bump(pp).unwrap();
    println!("xi norm = {:.4}", xi.norm_x());
    let heights = log_heights(1e-3, 1e3, 40);
    let t0 = std::time::Instant::now();
    let rep = stability_experiment(&nl, &xi, &[0.3, 0.1, 0.03], 10.0, &heights).unwrap();
    for r in &rep.rows {
        println!("eps={} no_solution={} unreliable={}", r.eps, r.no_solution, r.unreliable);
    }
    println!("threshold={:?} monotone={} [{:?}]", rep.threshold, rep.monotone, t0.elapsed());
}
