//! The gap-density solver for shrinking segments, with conservation
//! diagnostics at each snapshot.
//!
//! `cargo run --release --example gap_kinetics -- [exponential|logarithmic|reciprocal|constant]`

use shrinking_rsa::kinetics1d::KineticState;
use shrinking_rsa::{ScheduleKind, SizeSchedule};

fn main() -> shrinking_rsa::Result<()> {
    let kind: ScheduleKind = std::env::args().nth(1).map_or(Ok(ScheduleKind::Exponential), |a| a.parse())?;
    let mut state = KineticState::bootstrap(SizeSchedule::reduced(kind, 1), 0.01, 0.01)?;
    println!("{:>6} {:>10} {:>10} {:>10} {:>10}", "t", "n", "G(0)", "G(0.5)", "residual");
    for t in [0.5, 1.0, 2.0, 4.0, 8.0, 16.0] {
        state.advance_to(t)?;
        let d = state.diagnostics();
        println!(
            "{t:>6} {:>10.6} {:>10.6} {:>10.6} {:>10.2e}",
            d.density,
            state.contact_value(),
            state.value_at(0.5),
            d.conservation_residual
        );
    }
    Ok(())
}
