//! One slot of the waypoint search for a small fleet, printing the search log.

use uavd2d::rus::{rus_step, RusConfig, SlotContext, SolverConfig};
use uavd2d::scenario::SynthesisOptions;

fn main() -> uavd2d::Result<()> {
    let s = SynthesisOptions::default().build(0, 6, 3, 21)?;
    let battery: Vec<f64> = s.uavs.iter().map(|u| u.initial_battery).collect();
    let ctx = SlotContext::new(&s, 0, s.initial_positions(), battery)?;
    let out = rus_step(&ctx, &RusConfig::default(), &SolverConfig::default(), 1.0)?;
    for row in &out.log {
        println!(
            "iter {:>2} radius {:>6.2} m best {:.5e} bit/J",
            row.iteration, row.radius, row.best_objective
        );
    }
    for (l, (p, q)) in out.best.positions.iter().zip(&ctx.start).enumerate() {
        println!("UAV {l}: ({:.1}, {:.1}, {:.1}), moved {:.2} m", p.x, p.y, p.z, p.distance(*q));
    }
    println!("{} candidates scored", out.evaluations);
    Ok(())
}
