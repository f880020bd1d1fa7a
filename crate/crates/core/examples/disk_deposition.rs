//! Disks shrinking on a periodic square: coverage and the pair correlation
//! near contact.
//!
//! `cargo run --release --example disk_deposition -- [side] [seed]`

use shrinking_rsa::analysis::find_peak;
use shrinking_rsa::sim2d;
use shrinking_rsa::{ScheduleKind, SizeSchedule};

fn main() -> shrinking_rsa::Result<()> {
    let mut args = std::env::args().skip(1);
    let side: f64 = args.next().map_or(100.0, |a| a.parse().expect("box side"));
    let seed: u64 = args.next().map_or(1, |a| a.parse().expect("seed"));
    let schedule = SizeSchedule::reduced(ScheduleKind::Exponential, 2);
    for plane in sim2d::run(schedule, side, seed, &[1.0, 4.0, 8.0])? {
        let p2 = plane.pair_correlation(4.0, 0.05)?;
        let contact = (plane.diameter() / p2.bin_width) as usize;
        let peak = find_peak(&p2.points())?;
        println!(
            "t = {:>3}: {} disks, D = {:.4}, coverage = {:.4}, P2 at contact = {:.3}, peak {:.3} at r = {:.3}",
            plane.current_time(),
            plane.len(),
            plane.diameter(),
            plane.coverage(),
            p2.values[contact],
            peak.y,
            peak.x
        );
    }
    Ok(())
}
