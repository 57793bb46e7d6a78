//! Efficiency and min-throughput against the UAV power budget.

use uavd2d::scenario::SynthesisOptions;
use uavd2d::sim::{sweep, Mode, RunConfig, SweepParam, SweepSpec};

fn main() -> uavd2d::Result<()> {
    let spec = SweepSpec {
        param: SweepParam::PlDbm,
        values: vec![20.0, 25.0, 30.0, 35.0],
        users: vec![8],
        seeds: vec![1, 2],
        uavs: 3,
        base: SynthesisOptions {
            num_slots: 2,
            ..SynthesisOptions::default()
        },
        modes: vec![Mode::Proposed, Mode::Uniform],
    };
    for r in sweep(&spec, &RunConfig::default())? {
        println!(
            "{:>4} dBm {:<8} min rate {:.3e} bit/s, efficiency {:.4e} +- {:.1e} bit/J",
            r.value, r.mode, r.min_rate_mean, r.efficiency_mean, r.efficiency_std
        );
    }
    Ok(())
}
