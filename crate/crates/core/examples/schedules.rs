//! Size schedules in reduced units.
//!
//! `cargo run --example schedules`

use shrinking_rsa::{ScheduleKind, SizeSchedule};

fn main() {
    let times = [0.0, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0];
    print!("{:>12}", "t");
    for t in times {
        print!("{t:>10}");
    }
    println!();
    for kind in ScheduleKind::SHRINKING.into_iter().chain([ScheduleKind::Constant]) {
        let s = SizeSchedule::reduced(kind, 1);
        print!("{:>12}", kind.name());
        for t in times {
            print!("{:>10.5}", s.reduced_size(t));
        }
        println!();
    }
    let physical = SizeSchedule::new(ScheduleKind::Exponential, 2.0, 0.5, 2).unwrap();
    println!("\n{}: tau = {}", physical.describe(), physical.time_scale());
    let tau = physical.time_scale();
    println!("D(tau) = {:.6}, dD/dt(tau) = {:.6}", physical.size(tau).unwrap(), physical.rate(tau).unwrap());
}
