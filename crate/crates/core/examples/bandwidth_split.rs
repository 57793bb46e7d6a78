//! Splitting the band between the shared D2D channel and the relay
//! subbands with powers held fixed.

use uavd2d::bandwidth::solve_bandwidth;
use uavd2d::problem::SlotProblem;
use uavd2d::rus::associate_best_channel;
use uavd2d::scenario::SynthesisOptions;

fn main() -> uavd2d::Result<()> {
    let s = SynthesisOptions::default().build(4, 6, 3, 5)?;
    let pos = s.initial_positions();
    let problem = SlotProblem::new(&s, &pos, &vec![0.0; pos.len()], 0)?;
    let idle: Vec<bool> = problem.uavs.iter().map(|u| u.idle).collect();
    let start = problem.initial_allocation(associate_best_channel(&problem.snapshot, &idle));
    let before = problem.rates(&start)?;

    let out = solve_bandwidth(&problem, &start, 10, 1e-3)?;
    let a = &out.allocation;
    let after = problem.rates(a)?;
    println!("D2D band {:.2} MHz", a.bd / 1e6);
    for (k, b) in a.br.iter().enumerate() {
        println!("relay pair {k}: {:.2} MHz, {:.2} Mbit/s", b / 1e6, after.relay[k] / 1e6);
    }
    println!(
        "min rate {:.3} -> {:.3} Mbit/s in {} iterations",
        before.r_min / 1e6,
        after.r_min / 1e6,
        out.iterations
    );
    Ok(())
}
