//! Flight power against speed, the return reserve, and a battery ledger for
//! a UAV that flies out, hovers and comes back.

use uavd2d::energy::{hover_power, return_energy_reserve, slot_energy, BatteryLedger};
use uavd2d::scenario::SynthesisOptions;
use uavd2d::Vec3;

fn main() -> uavd2d::Result<()> {
    let s = SynthesisOptions::default().build(0, 0, 1, 1)?;
    let env = &s.energy;
    let spec = &s.uavs[0];
    for v in [0.0, 5.0, 10.0, 15.0] {
        println!("speed {v:>4} m/s: {:.2} W", hover_power(spec, v, env)?);
    }

    let station = env.station;
    let mut ledger = BatteryLedger::new(&[env.battery_capacity * 0.5], env.battery_capacity)?;
    let mut pos = station;
    let tau = s.slot_duration();
    let away = Vec3::new(station.x + 150.0, station.y, station.z);
    // Out for 10 slots, hover for 10, back for 10, then charge for 5.
    let plan: Vec<Vec3> = (0..35)
        .map(|t| match t {
            0..=9 => station.step_toward(away, 15.0 * (t + 1) as f64),
            10..=19 => away,
            20..=29 => away.step_toward(station, 15.0 * (t - 19) as f64),
            _ => station,
        })
        .collect();
    for (t, next) in plan.into_iter().enumerate() {
        let speed = next.distance(pos) / tau;
        let mut e = slot_energy(spec, next, speed, spec.beta, tau, env)?;
        e.charged = e.charged.min(ledger.charge_headroom(0, e.consumed));
        ledger.step(&[e])?;
        pos = next;
        if t % 5 == 4 {
            println!(
                "slot {t:>2}: {:>5.0} m from dock, battery {:.1} J, reserve {:.1} J",
                pos.distance(station),
                ledger.level(0),
                return_energy_reserve(spec, pos, station, env)
            );
        }
    }
    Ok(())
}
