//! A full episode in both modes on a mid-sized scenario.

use uavd2d::scenario::SynthesisOptions;
use uavd2d::sim::{run_episode, Mode, RunConfig};

fn main() -> uavd2d::Result<()> {
    let s = SynthesisOptions {
        num_slots: 5,
        ..SynthesisOptions::default()
    }
    .build(8, 8, 5, 3)?;
    let cfg = RunConfig::default();
    for mode in [Mode::Proposed, Mode::Uniform] {
        let ep = run_episode(&s, mode, &cfg)?;
        println!("{}:", mode.as_str());
        for r in &ep.slots {
            println!(
                "  slot {}: {:.3e} bit/s over {:.1} J = {:.4e} bit/J",
                r.slot, r.efficiency.rate, r.efficiency.energy, r.efficiency.value
            );
        }
        println!("  mean {:.4e} bit/J", ep.aggregates.mean_efficiency);
    }
    Ok(())
}
