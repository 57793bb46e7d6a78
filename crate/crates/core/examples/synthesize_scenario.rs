//! Builds a random scenario and writes it as JSON.
//!
//! cargo run --example synthesize_scenario -- 10 10 5 42 scenario.json

use uavd2d::scenario::{write_scenario, SynthesisOptions};

fn main() -> uavd2d::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let num = |i: usize, d: u64| args.get(i).and_then(|a| a.parse().ok()).unwrap_or(d);
    let (n, m, l, seed) = (num(0, 10) as usize, num(1, 10) as usize, num(2, 5) as usize, num(3, 42));
    let out = args.get(4).cloned().unwrap_or_else(|| "scenario.json".into());

    let opts = SynthesisOptions {
        num_slots: 20,
        ..SynthesisOptions::default()
    };
    let scenario = opts.build(n, m, l, seed)?;
    write_scenario(&scenario, &out)?;
    println!(
        "{n} direct + {m} relay pairs, {l} UAVs, {} slots of {} s -> {out}",
        scenario.num_slots(),
        scenario.slot_duration()
    );
    println!("digest {}", scenario.digest());
    Ok(())
}
