//! Prints the parameter set behind each figure preset.
//!
//! `cargo run --example figure_preset -- [fig2..fig7] [--desk-scale]`

use shrinking_rsa::config::{figure_plan, Figure};

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let desk = args.iter().any(|a| a == "--desk-scale");
    let figures: Vec<Figure> = match args.iter().find(|a| !a.starts_with("--")) {
        Some(name) => vec![name.parse().expect("figure name")],
        None => Figure::ALL.to_vec(),
    };
    for fig in figures {
        let plan = figure_plan(fig, 1, desk);
        println!("{}:", fig.name());
        for (dir, c) in &plan.parts {
            println!(
                "  {dir:<12} {:<8} {:<12} box {:<8} replicas {:<6} t = {:?}",
                c.mode.name(),
                c.schedule.kind.name(),
                c.box_size.map_or("-".into(), |b| b.to_string()),
                c.replicas.map_or("-".into(), |r| r.to_string()),
                c.snapshots
            );
        }
        for f in &plan.fits {
            println!("  fit {} on {}/peaks.csv, t >= {}", f.name, f.part, f.t_min);
        }
    }
}
