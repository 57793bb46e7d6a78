//! Air-to-ground loss against elevation, and the gains of one slot.

use uavd2d::channel::{self, air_ground_gain, los_probability};
use uavd2d::scenario::{RadioConstants, SynthesisOptions};
use uavd2d::Vec3;

fn main() -> uavd2d::Result<()> {
    let radio = RadioConstants::with_defaults();
    let user = Vec3::new(0.0, 0.0, 0.0);
    println!("{:>8} {:>8} {:>10} {:>12}", "ground_m", "elev_deg", "p_los", "gain_dB");
    for ground in [20.0, 50.0, 100.0, 200.0, 400.0, 800.0] {
        let uav = Vec3::new(ground, 0.0, 60.0);
        let g = air_ground_gain(uav, user, &radio)?;
        let theta = g.elevation_deg.unwrap_or(0.0);
        println!(
            "{ground:>8.0} {theta:>8.2} {:>10.4} {:>12.2}",
            los_probability(theta, radio.nu1, radio.nu2),
            10.0 * g.gain.log10()
        );
    }

    let s = SynthesisOptions::default().build(3, 2, 3, 7)?;
    let snap = channel::snapshot(&s, &s.initial_positions(), 0)?;
    println!("\nD2D gains (tx row, rx column), dB");
    for k in 0..snap.num_direct() {
        let row: Vec<String> = (0..snap.num_direct())
            .map(|n| format!("{:8.1}", 10.0 * snap.h_d2d(k, n).log10()))
            .collect();
        println!("{}", row.join(" "));
    }
    println!("relay pair uplink gains per UAV, dB");
    for m in 0..snap.num_relay() {
        let row: Vec<String> = (0..snap.num_uavs())
            .map(|l| format!("{:8.1}", 10.0 * snap.h_up(m, l).log10()))
            .collect();
        println!("{}", row.join(" "));
    }
    Ok(())
}
