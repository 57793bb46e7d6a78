//! One slot's resource-allocation problem at fixed UAV positions: gains,
//! limits, and the energy-efficiency objective.

use serde::Serialize;

use crate::channel::{self, ChannelSnapshot};
use crate::energy;
use crate::error::{Error, Result};
use crate::geometry::Vec3;
use crate::rates::{self, Allocation, Association, RateReport};
use crate::scenario::Scenario;

/// Smallest bandwidth handed to an active link, Hz.
pub const BANDWIDTH_FLOOR: f64 = 1e3;

/// Per-UAV quantities that stay fixed while powers and bandwidths move.
#[derive(Debug, Clone, PartialEq)]
pub struct UavTerms {
    pub max_tx_power: f64,
    pub alpha: f64,
    pub beta: f64,
    /// Station gate at the slot position.
    pub gate: f64,
    /// Propulsion and hardware draw at the slot speed, W.
    pub flight_power: f64,
    /// Docked or flying home: not available as a relay, transmit chain off.
    pub idle: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SlotProblem {
    pub tau: f64,
    pub noise_psd: f64,
    pub total_bandwidth: f64,
    pub snapshot: ChannelSnapshot,
    /// Peak powers of direct-pair transmitters.
    pub direct_caps: Vec<f64>,
    /// Peak powers of relay-pair transmitters.
    pub relay_caps: Vec<f64>,
    pub uavs: Vec<UavTerms>,
}

/// Minimum rate, slot energy and their ratio.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct Efficiency {
    /// bit/s
    pub rate: f64,
    /// J
    pub energy: f64,
    /// bit/J
    pub value: f64,
}

impl Efficiency {
    pub fn new(rate: f64, energy: f64) -> Self {
        let value = if rate <= 0.0 {
            0.0
        } else if energy > 0.0 {
            rate / energy
        } else {
            f64::INFINITY
        };
        Self { rate, energy, value }
    }
}

impl SlotProblem {
    /// Problem for slot `t` with the UAVs at `positions` flying at `speeds`.
    pub fn new(scenario: &Scenario, positions: &[Vec3], speeds: &[f64], t: usize) -> Result<Self> {
        if speeds.len() != positions.len() {
            return Err(Error::Domain("one speed per UAV required".into()));
        }
        let snapshot = channel::snapshot(scenario, positions, t)?;
        let env = &scenario.energy;
        let uavs = scenario
            .uavs
            .iter()
            .zip(positions.iter().zip(speeds))
            .map(|(spec, (&pos, &speed))| {
                Ok(UavTerms {
                    max_tx_power: spec.max_tx_power,
                    alpha: spec.alpha,
                    beta: spec.beta,
                    gate: energy::station_gate(pos, env.station, env.station_epsilon),
                    flight_power: energy::hover_power(spec, speed, env)?,
                    idle: pos.distance(env.station) <= env.dock_radius,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            tau: scenario.slot_duration(),
            noise_psd: scenario.radio.noise_psd,
            total_bandwidth: scenario.radio.total_bandwidth,
            snapshot,
            direct_caps: scenario.direct_pairs().map(|p| p.max_power).collect(),
            relay_caps: scenario.relay_pairs().map(|p| p.max_power).collect(),
            uavs,
        })
    }

    pub fn num_direct(&self) -> usize {
        self.direct_caps.len()
    }

    pub fn num_relay(&self) -> usize {
        self.relay_caps.len()
    }

    pub fn num_uavs(&self) -> usize {
        self.uavs.len()
    }

    /// Takes UAV `l` out of service for the slot.
    pub fn set_idle(&mut self, l: usize) {
        self.uavs[l].idle = true;
    }

    /// Energy spent regardless of transmit powers: flight and the
    /// transmit-chain offset of every UAV in service.
    pub fn fixed_energy(&self) -> f64 {
        self.uavs
            .iter()
            .map(|u| self.tau * u.gate * (u.flight_power + if u.idle { 0.0 } else { u.beta }))
            .sum()
    }

    /// Transmit power of UAV `l` under `alloc`, W.
    pub fn uav_tx_power(&self, alloc: &Allocation, l: usize) -> f64 {
        let u = &self.uavs[l];
        if u.idle {
            return 0.0;
        }
        energy::uav_tx_power(&alloc.assoc.row(l), &alloc.downlink_powers, u.alpha, u.beta)
    }

    /// Energy drawn from UAV `l`'s battery this slot.
    pub fn uav_energy(&self, alloc: &Allocation, l: usize) -> f64 {
        let u = &self.uavs[l];
        self.tau * u.gate * (u.flight_power + self.uav_tx_power(alloc, l))
    }

    /// Denominator of the efficiency: user transmit energy plus UAV consumption.
    pub fn energy(&self, alloc: &Allocation) -> f64 {
        let users: f64 = alloc.d2d_powers.iter().chain(&alloc.uplink_powers).sum();
        let uavs: f64 = (0..self.num_uavs()).map(|l| self.uav_energy(alloc, l)).sum();
        self.tau * users + uavs
    }

    pub fn rates(&self, alloc: &Allocation) -> Result<RateReport> {
        rates::evaluate_rates(alloc, &self.snapshot, self.noise_psd)
    }

    pub fn objective(&self, alloc: &Allocation) -> Result<Efficiency> {
        let report = self.rates(alloc)?;
        Ok(Efficiency::new(report.r_min, self.energy(alloc)))
    }

    /// Starting point of the alternating solver: half the peak powers and
    /// half the band to the D2D links.
    pub fn initial_allocation(&self, assoc: Association) -> Allocation {
        self.split_allocation(assoc, 0.5)
    }

    /// Equal-share baseline: full user powers, the UAV budget shared equally.
    pub fn uniform_allocation(&self, assoc: Association) -> Allocation {
        self.split_allocation(assoc, 1.0)
    }

    fn split_allocation(&self, assoc: Association, share: f64) -> Allocation {
        let m = self.num_relay();
        let b = self.total_bandwidth;
        let mut downlink = vec![0.0; m];
        let mut uplink = vec![0.0; m];
        let mut br = vec![0.0; m];
        for k in 0..m {
            if let Some(l) = assoc.uav_of(k) {
                downlink[k] = share * self.uavs[l].max_tx_power / assoc.load(l) as f64;
                uplink[k] = share * self.relay_caps[k];
                br[k] = b / (2.0 * m as f64);
            }
        }
        Allocation {
            bd: if self.num_direct() > 0 { b / 2.0 } else { 0.0 },
            br,
            d2d_powers: self.direct_caps.iter().map(|p| share * p).collect(),
            uplink_powers: uplink,
            downlink_powers: downlink,
            assoc,
        }
    }

    /// Checks the box, budget and bandwidth constraints with a small tolerance.
    pub fn check(&self, alloc: &Allocation) -> Result<()> {
        let tol = 1e-9;
        let bad = |r: String| Err(Error::validation("allocation", r));
        if alloc.total_bandwidth() > self.total_bandwidth * (1.0 + tol) {
            return bad("bandwidth budget exceeded".into());
        }
        for (p, c) in alloc.d2d_powers.iter().zip(&self.direct_caps) {
            if *p < 0.0 || *p > c * (1.0 + tol) {
                return bad(format!("D2D power {p} outside [0, {c}]"));
            }
        }
        for (p, c) in alloc.uplink_powers.iter().zip(&self.relay_caps) {
            if *p < 0.0 || *p > c * (1.0 + tol) {
                return bad(format!("uplink power {p} outside [0, {c}]"));
            }
        }
        for (l, u) in self.uavs.iter().enumerate() {
            if alloc.uav_radiated(l) > u.max_tx_power * (1.0 + tol) {
                return bad(format!("UAV {l} downlink budget exceeded"));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::synthesize_random_scenario;

    #[test]
    fn docked_uav_costs_nothing() {
        let s = synthesize_random_scenario(2, 2, 5, 1).unwrap();
        let pos = s.initial_positions();
        let p = SlotProblem::new(&s, &pos, &[0.0; 5], 0).unwrap();
        assert!(p.uavs[0].idle);
        assert_eq!(p.uavs[0].gate, 0.0);
        assert!(!p.uavs[1].idle);
        let per_uav = s.slot_duration() * (p.uavs[1].flight_power + p.uavs[1].beta) * p.uavs[1].gate;
        assert!((p.fixed_energy() - 4.0 * per_uav).abs() < 1e-9);
    }

    #[test]
    fn energy_matches_parts() {
        let s = synthesize_random_scenario(2, 2, 5, 1).unwrap();
        let pos = s.initial_positions();
        let p = SlotProblem::new(&s, &pos, &[0.0; 5], 0).unwrap();
        let alloc = p.initial_allocation(Association(vec![Some(1), Some(2)]));
        p.check(&alloc).unwrap();
        let users: f64 = alloc.d2d_powers.iter().chain(&alloc.uplink_powers).sum();
        let extra: f64 = [1, 2]
            .iter()
            .map(|&l| p.tau * p.uavs[l].gate * p.uavs[l].alpha * alloc.uav_radiated(l))
            .sum();
        let expected = p.fixed_energy() + p.tau * users + extra;
        assert!((p.energy(&alloc) - expected).abs() < 1e-9 * expected);
    }

    #[test]
    fn efficiency_of_silence_is_zero() {
        assert_eq!(Efficiency::new(0.0, 0.0).value, 0.0);
        assert_eq!(Efficiency::new(0.0, 10.0).value, 0.0);
        assert_eq!(Efficiency::new(5.0, 10.0).value, 0.5);
    }
}
