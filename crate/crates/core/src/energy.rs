//! UAV power draw, per-slot consumed/charged energy and the battery ledger.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::Vec3;
use crate::scenario::{EnergyConstants, UavSpec};

const SPEED_SLACK: f64 = 1e-9;

/// Propulsion plus hardware draw at flight speed `speed`, W.
pub fn hover_power(spec: &UavSpec, speed: f64, env: &EnergyConstants) -> Result<f64> {
    if !(speed >= 0.0) || speed > spec.max_speed * (1.0 + SPEED_SLACK) {
        return Err(Error::Domain(format!(
            "UAV {} speed {speed} outside [0, {}]",
            spec.id, spec.max_speed
        )));
    }
    let speed = speed.min(spec.max_speed);
    let weight = spec.mass * env.gravity;
    let disc = 2.0 * PI * spec.propeller_radius.powi(2) * spec.propeller_count as f64 * env.air_density;
    let rotor = (weight.powi(3) / disc).sqrt();
    let hardware = (spec.power_full_speed - spec.power_static) / spec.max_speed * speed + spec.power_static;
    Ok(rotor + hardware)
}

/// Linear transmit-chain model: `alpha * sum(assoc * p) + beta`.
pub fn uav_tx_power(assoc: &[bool], downlink_powers: &[f64], alpha: f64, beta: f64) -> f64 {
    let radiated: f64 = assoc
        .iter()
        .zip(downlink_powers)
        .filter(|(a, _)| **a)
        .map(|(_, p)| *p)
        .sum();
    alpha * radiated + beta
}

/// Smooth indicator of being away from the station: 0 on the dock, close to 1 elsewhere.
pub fn station_gate(position: Vec3, station: Vec3, epsilon: f64) -> f64 {
    let d2 = position.distance_squared(station);
    d2 / (d2 + epsilon)
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct SlotEnergy {
    /// J drawn from the battery.
    pub consumed: f64,
    /// J delivered by the station.
    pub charged: f64,
}

/// Energy consumed and charged during one slot of length `tau`.
pub fn slot_energy(
    spec: &UavSpec,
    position: Vec3,
    speed: f64,
    tx_power: f64,
    tau: f64,
    env: &EnergyConstants,
) -> Result<SlotEnergy> {
    let gate = station_gate(position, env.station, env.station_epsilon);
    let flight = hover_power(spec, speed, env)?;
    Ok(SlotEnergy {
        consumed: tau * gate * (flight + tx_power),
        charged: tau * (1.0 - gate) * env.charge_power,
    })
}

/// Energy needed to fly straight back to the station at full speed.
pub fn return_energy_reserve(spec: &UavSpec, position: Vec3, station: Vec3, env: &EnergyConstants) -> f64 {
    let distance = position.distance(station);
    if distance == 0.0 {
        return 0.0;
    }
    let full = hover_power(spec, spec.max_speed, env).expect("full speed is in range");
    distance / spec.max_speed * full
}

/// Per-UAV stored energy over time plus the slot energies that produced it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BatteryLedger {
    capacity: f64,
    /// `levels[l][t]` is the stored energy after `t` committed slots.
    levels: Vec<Vec<f64>>,
    energies: Vec<Vec<SlotEnergy>>,
}

impl BatteryLedger {
    pub fn new(initial: &[f64], capacity: f64) -> Result<Self> {
        for (l, &s) in initial.iter().enumerate() {
            if !(0.0..=capacity).contains(&s) {
                return Err(Error::validation(format!("uav {l}"), "initial battery outside [0, capacity]"));
            }
        }
        Ok(Self {
            capacity,
            levels: initial.iter().map(|&s| vec![s]).collect(),
            energies: vec![Vec::new(); initial.len()],
        })
    }

    pub fn capacity(&self) -> f64 {
        self.capacity
    }

    pub fn num_uavs(&self) -> usize {
        self.levels.len()
    }

    /// Number of committed slots.
    pub fn slots(&self) -> usize {
        self.levels.first().map_or(0, |v| v.len() - 1)
    }

    /// Current stored energy of UAV `l`.
    pub fn level(&self, l: usize) -> f64 {
        *self.levels[l].last().expect("ledger has an initial level")
    }

    pub fn levels(&self) -> Vec<f64> {
        (0..self.num_uavs()).map(|l| self.level(l)).collect()
    }

    pub fn history(&self, l: usize) -> &[f64] {
        &self.levels[l]
    }

    pub fn energies(&self, l: usize) -> &[SlotEnergy] {
        &self.energies[l]
    }

    /// Largest charge UAV `l` can accept this slot given what it consumes.
    pub fn charge_headroom(&self, l: usize, consumed: f64) -> f64 {
        (self.capacity - (self.level(l) - consumed)).max(0.0)
    }

    /// Applies one slot for every UAV. Nothing is committed if any UAV
    /// would underflow or exceed capacity.
    pub fn step(&mut self, slot: &[SlotEnergy]) -> Result<()> {
        if slot.len() != self.num_uavs() {
            return Err(Error::Domain(format!(
                "ledger holds {} UAVs, got {} slot energies",
                self.num_uavs(),
                slot.len()
            )));
        }
        let tol = 1e-9 * self.capacity;
        let mut next = Vec::with_capacity(slot.len());
        for (l, e) in slot.iter().enumerate() {
            let prev = self.level(l);
            if e.consumed > prev + tol {
                return Err(Error::BatteryUnderflow {
                    uav: l,
                    required: e.consumed,
                    available: prev,
                });
            }
            let level = prev + e.charged - e.consumed;
            if level > self.capacity + tol {
                return Err(Error::Overcharge {
                    uav: l,
                    level,
                    capacity: self.capacity,
                });
            }
            next.push(level.clamp(0.0, self.capacity));
        }
        for (l, (level, e)) in next.into_iter().zip(slot).enumerate() {
            self.levels[l].push(level);
            self.energies[l].push(*e);
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use approx::assert_relative_eq;

    use super::*;

    fn uav() -> UavSpec {
        UavSpec::with_defaults(0, Vec3::new(400.0, 400.0, 60.0), 15e3, 0.316)
    }

    #[test]
    fn hover_power_examples() {
        let env = EnergyConstants::with_defaults();
        let spec = uav();
        assert_relative_eq!(hover_power(&spec, 0.0, &env).unwrap(), 28.187_614_605_214_615, max_relative = 1e-12);
        assert_relative_eq!(hover_power(&spec, 15.0, &env).unwrap(), 32.687_614_605_214_615, max_relative = 1e-12);
        assert!(hover_power(&spec, 15.1, &env).is_err());
        let mut eight = spec.clone();
        eight.propeller_count = 8;
        let rotor4 = hover_power(&spec, 0.0, &env).unwrap() - 0.5;
        let rotor8 = hover_power(&eight, 0.0, &env).unwrap() - 0.5;
        assert_relative_eq!(rotor4 / rotor8, 2f64.sqrt(), max_relative = 1e-12);
    }

    #[test]
    fn tx_power_examples() {
        assert_eq!(uav_tx_power(&[false, false], &[1.0, 2.0], 4.0, 6.8), 6.8);
        assert_relative_eq!(uav_tx_power(&[true], &[1.0], 4.0, 6.8), 10.8);
        assert_relative_eq!(
            uav_tx_power(&[true, true], &[0.5, 0.5], 4.0, 6.8),
            uav_tx_power(&[true], &[1.0], 4.0, 6.8)
        );
    }

    #[test]
    fn gate_examples() {
        let s = Vec3::new(400.0, 400.0, 60.0);
        assert_eq!(station_gate(s, s, 1.0), 0.0);
        assert_relative_eq!(station_gate(Vec3::new(401.0, 400.0, 60.0), s, 1.0), 0.5);
        assert_relative_eq!(station_gate(Vec3::new(500.0, 400.0, 60.0), s, 1.0), 0.999_900_009_999, max_relative = 1e-12);
    }

    #[test]
    fn slot_energy_examples() {
        let env = EnergyConstants::with_defaults();
        let spec = uav();
        let docked = slot_energy(&spec, env.station, 0.0, 6.8, 1.0, &env).unwrap();
        assert_eq!(docked, SlotEnergy { consumed: 0.0, charged: 10.0 });
        let far = Vec3::new(500.0, 400.0, 60.0);
        let p_f = hover_power(&spec, 0.0, &env).unwrap();
        let e = slot_energy(&spec, far, 0.0, 30.0 - p_f, 1.0, &env).unwrap();
        assert_relative_eq!(e.consumed, 30.0 * 0.999_900_009_999, max_relative = 1e-12);
        assert!(e.charged < 1e-3);
        let none = slot_energy(&spec, far, 0.0, 5.0, 0.0, &env).unwrap();
        assert_eq!(none, SlotEnergy::default());
    }

    #[test]
    fn reserve_examples() {
        let env = EnergyConstants::with_defaults();
        let spec = uav();
        assert_eq!(return_energy_reserve(&spec, env.station, env.station, &env), 0.0);
        let p = Vec3::new(550.0, 400.0, 60.0);
        assert_relative_eq!(return_energy_reserve(&spec, p, env.station, &env), 326.876_146_052_146_15, max_relative = 1e-12);
        let q = Vec3::new(700.0, 400.0, 60.0);
        assert_relative_eq!(
            return_energy_reserve(&spec, q, env.station, &env),
            2.0 * return_energy_reserve(&spec, p, env.station, &env),
            max_relative = 1e-12
        );
    }

    #[test]
    fn ledger_examples() {
        let mut ledger = BatteryLedger::new(&[7500.0], 15e3).unwrap();
        ledger.step(&[SlotEnergy { consumed: 0.0, charged: 10.0 }]).unwrap();
        assert_eq!(ledger.level(0), 7510.0);
        let err = ledger.step(&[SlotEnergy { consumed: 8000.0, charged: 0.0 }]).unwrap_err();
        assert!(matches!(err, Error::BatteryUnderflow { uav: 0, .. }));
        assert_eq!(ledger.slots(), 1);

        let mut full = BatteryLedger::new(&[15e3], 15e3).unwrap();
        let err = full.step(&[SlotEnergy { consumed: 0.0, charged: 10.0 }]).unwrap_err();
        assert!(matches!(err, Error::Overcharge { .. }));
        assert_eq!(full.charge_headroom(0, 0.0), 0.0);
    }
}
