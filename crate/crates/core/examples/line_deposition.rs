//! Segments shrinking on a periodic line: replica-averaged gap density and
//! its peak.
//!
//! `cargo run --release --example line_deposition -- [replicas] [seed]`

use shrinking_rsa::analysis::{find_peak, ReplicaAccumulator};
use shrinking_rsa::replicas::run_replicas;
use shrinking_rsa::sim1d;
use shrinking_rsa::{ScheduleKind, SizeSchedule};

fn main() -> shrinking_rsa::Result<()> {
    let mut args = std::env::args().skip(1);
    let replicas: usize = args.next().map_or(40, |a| a.parse().expect("replica count"));
    let seed: u64 = args.next().map_or(1, |a| a.parse().expect("seed"));
    let schedule = SizeSchedule::reduced(ScheduleKind::Exponential, 1);
    let length = 2000.0;
    let times = [2.0, 4.0, 8.0];

    let runs = run_replicas(seed, replicas, |_, rng| {
        let mut out = Vec::new();
        sim1d::run_with(schedule, length, rng, &times, |d| {
            out.push((d.density(), d.gap_histogram(0.02).expect("valid bin width")));
        })
        .map(|_| out)
    });
    let mut accs = vec![ReplicaAccumulator::new(); times.len()];
    let mut density = vec![0.0; times.len()];
    for run in runs {
        for (k, (n, h)) in run?.into_iter().enumerate() {
            density[k] += n / replicas as f64;
            accs[k].push(&h)?;
        }
    }
    for (k, acc) in accs.iter().enumerate() {
        let h = acc.finish()?;
        let peak = find_peak(&h.points())?;
        println!(
            "t = {:>4}: n = {:.5}, first bin G = {:.4}, peak G = {:.4} ± {:.4} at x = {:.3}",
            times[k], density[k], h.values[0], peak.y, peak.error, peak.x
        );
    }
    Ok(())
}
