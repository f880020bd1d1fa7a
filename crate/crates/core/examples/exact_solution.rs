//! Exact gap density for segments of fixed length and its slow approach to
//! jamming.
//!
//! `cargo run --release --example exact_solution`

use shrinking_rsa::exact1d::{ExactSolver, EULER_GAMMA};

fn main() {
    let exact = ExactSolver::default();
    println!("jamming coverage = {:.10}", exact.coverage(f64::INFINITY));
    println!("{:>8} {:>12} {:>12} {:>12}", "t", "coverage", "G(0,t)", "G(0,t)/ln t");
    for t in [1.0, 10.0, 100.0, 1e3, 1e4, 1e5] {
        let g0 = exact.contact_value(t);
        println!("{t:>8} {:>12.8} {:>12.6} {:>12.6}", exact.coverage(t), g0, g0 / f64::ln(t));
    }
    println!("2 exp(-2 gamma) = {:.6}", 2.0 * (-2.0 * EULER_GAMMA).exp());
    println!("\nG(x, 4):");
    for (x, g) in exact.curve(4.0, 0.25, 3.0) {
        println!("{x:>6.2} {g:>10.6}");
    }
}
