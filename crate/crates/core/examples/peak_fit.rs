//! Logarithmic growth of the contact peak: fit of exact peak heights against
//! `ln t`.
//!
//! `cargo run --release --example peak_fit -- [t_min]`

use shrinking_rsa::analysis::{find_peak_xy, log_fit, PeakSeries, SeriesSource};
use shrinking_rsa::exact1d::ExactSolver;

fn main() -> shrinking_rsa::Result<()> {
    let t_min: f64 = std::env::args().nth(1).map_or(100.0, |a| a.parse().expect("t_min"));
    let exact = ExactSolver::default();
    let mut series = PeakSeries::new(SeriesSource::Exact);
    for t in [4.0, 8.0, 24.0, 100.0, 300.0, 1e3, 3e3, 1e4] {
        let peak = find_peak_xy(&exact.curve(t, 0.01, 2.0))?;
        series.push(t, peak.y, peak.error)?;
        println!("t = {t:>6}: peak {:.5} at x = {:.3}", peak.y, peak.x);
    }
    let fit = log_fit(&series, t_min)?;
    println!(
        "slope = {:.4} ± {:.4} over {} points (t >= {}), max residual {:.2e}",
        fit.slope, fit.slope_error, fit.n_points, fit.t_min, fit.max_residual
    );
    Ok(())
}
