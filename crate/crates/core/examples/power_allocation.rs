//! Transmit powers at fixed bandwidths: the efficiency search on one slot,
//! with the parametric value at a few ratios.

use uavd2d::power::{bisect_efficiency, sca_power_loop, PowerProgram};
use uavd2d::problem::SlotProblem;
use uavd2d::rus::associate_best_channel;
use uavd2d::scenario::SynthesisOptions;

fn main() -> uavd2d::Result<()> {
    let s = SynthesisOptions::default().build(6, 6, 3, 11)?;
    let pos = s.initial_positions();
    let problem = SlotProblem::new(&s, &pos, &vec![0.0; pos.len()], 0)?;
    let idle: Vec<bool> = problem.uavs.iter().map(|u| u.idle).collect();
    let start = problem.initial_allocation(associate_best_channel(&problem.snapshot, &idle));

    let mut program = PowerProgram::new(&problem, &start)?;
    let root = bisect_efficiency(&mut program, 1e-6);
    println!("one linearization: {:.4e} bit/J after {} evaluations", root.kappa, root.trace.len());
    for f in [0.0, 0.5, 1.0, 1.5] {
        let k = f * root.kappa;
        println!("  F({k:.3e}) = {:.4e}", program.parametric_value(k));
    }

    let out = sca_power_loop(&problem, &start, 10, 1e-3)?;
    println!("successive linearizations:");
    for (i, v) in out.objective_trace.iter().enumerate() {
        println!("  {i}: {v:.4e} bit/J");
    }
    let a = &out.allocation;
    println!("D2D powers (mW): {:?}", a.d2d_powers.iter().map(|p| (p * 1e3 * 100.0).round() / 100.0).collect::<Vec<_>>());
    println!("min rate {:.3e} bit/s", problem.objective(a)?.rate);
    Ok(())
}
