use spinone::berry::*;
use spinone::noise::NoiseParams;

fn main() {
    let n: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(2);
    let tol: f64 = std::env::args().nth(2).and_then(|s| s.parse().ok()).unwrap_or(1e-6);
    let block = exact_v_block();
    let p0 = ladder_prep_circuit(n, 0.0, Encoding::Qutrit, &block).unwrap();
    let p1 = ladder_prep_circuit(n, std::f64::consts::TAU / 4.0, Encoding::Qutrit, &block).unwrap();
    let np = NoiseParams::device().with_rate(0.01);
    let t0 = std::time::Instant::now();
    let est = hadamard_overlap_noisy(&p1, &p0, &np, 2048, tol, None).unwrap();
    println!("n={n} tol={tol:.0e}: raw={:.6} p={:?} [{:?}]", est.raw, est.p, t0.elapsed());
}
