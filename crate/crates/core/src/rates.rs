//! Achievable rates of D2D links and decode-and-forward relay hops.

use serde::{Deserialize, Serialize};

use crate::channel::ChannelSnapshot;
use crate::error::{Error, Result};
use crate::scenario::Scenario;

const FEAS_TOL: f64 = 1e-9;

/// Which UAV, if any, serves each relay pair.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Association(pub Vec<Option<usize>>);

impl Association {
    pub fn unassociated(m: usize) -> Self {
        Self(vec![None; m])
    }

    pub fn uav_of(&self, m: usize) -> Option<usize> {
        self.0[m]
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Relay pairs served by UAV `l`.
    pub fn pairs_of(&self, l: usize) -> impl Iterator<Item = usize> + '_ {
        self.0
            .iter()
            .enumerate()
            .filter(move |(_, u)| **u == Some(l))
            .map(|(m, _)| m)
    }

    pub fn load(&self, l: usize) -> usize {
        self.pairs_of(l).count()
    }

    /// Binary indicator row of UAV `l` over relay pairs.
    pub fn row(&self, l: usize) -> Vec<bool> {
        self.0.iter().map(|u| *u == Some(l)).collect()
    }
}

/// Decision variables of one slot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Allocation {
    /// Shared D2D band, Hz.
    pub bd: f64,
    /// Per relay pair subband, Hz, used by both hops.
    pub br: Vec<f64>,
    pub d2d_powers: Vec<f64>,
    pub uplink_powers: Vec<f64>,
    pub downlink_powers: Vec<f64>,
    pub assoc: Association,
}

impl Allocation {
    /// Watts radiated by UAV `l` over its associated downlinks.
    pub fn uav_radiated(&self, l: usize) -> f64 {
        self.assoc.pairs_of(l).map(|m| self.downlink_powers[m]).sum()
    }

    pub fn total_bandwidth(&self) -> f64 {
        self.bd + self.br.iter().sum::<f64>()
    }

    /// Checks sizes, box, budget and association constraints.
    pub fn check(&self, scenario: &Scenario) -> Result<()> {
        let n = scenario.num_direct();
        let m = scenario.num_relay();
        let l = scenario.uavs.len();
        let bad = |reason: String| Err(Error::validation("allocation", reason));
        if self.d2d_powers.len() != n
            || self.uplink_powers.len() != m
            || self.downlink_powers.len() != m
            || self.br.len() != m
            || self.assoc.len() != m
        {
            return bad("vector lengths do not match the scenario".into());
        }
        let all = std::iter::once(self.bd)
            .chain(self.br.iter().copied())
            .chain(self.d2d_powers.iter().copied())
            .chain(self.uplink_powers.iter().copied())
            .chain(self.downlink_powers.iter().copied());
        for v in all {
            if !(v >= 0.0 && v.is_finite()) {
                return bad(format!("negative or non-finite entry {v}"));
            }
        }
        let b_total = scenario.radio.total_bandwidth;
        if self.total_bandwidth() > b_total * (1.0 + FEAS_TOL) {
            return bad(format!("bandwidth {} exceeds {}", self.total_bandwidth(), b_total));
        }
        for (p, pair) in self.d2d_powers.iter().zip(scenario.direct_pairs()) {
            if *p > pair.max_power * (1.0 + FEAS_TOL) {
                return bad(format!("pair {} power above its peak", pair.id));
            }
        }
        for (p, pair) in self.uplink_powers.iter().zip(scenario.relay_pairs()) {
            if *p > pair.max_power * (1.0 + FEAS_TOL) {
                return bad(format!("pair {} power above its peak", pair.id));
            }
        }
        for (k, u) in self.assoc.0.iter().enumerate() {
            if let Some(u) = u {
                if *u >= l {
                    return bad(format!("relay pair {k} associated to unknown UAV {u}"));
                }
            }
        }
        for (i, uav) in scenario.uavs.iter().enumerate() {
            if self.uav_radiated(i) > uav.max_tx_power * (1.0 + FEAS_TOL) {
                return bad(format!("UAV {} downlink budget exceeded", uav.id));
            }
        }
        Ok(())
    }
}

/// `b * log2(1 + signal / (interference + b * n0))`, zero on an empty band
/// with no signal.
fn shannon(b: f64, signal: f64, interference: f64, n0: f64) -> Result<f64> {
    if signal <= 0.0 {
        return Ok(0.0);
    }
    if b <= 0.0 {
        return Err(Error::Domain("positive power on an empty band".into()));
    }
    Ok(b * (signal / (interference + b * n0)).ln_1p() / std::f64::consts::LN_2)
}

pub fn relay_uplink_rate(br: f64, power: f64, gain: f64, n0: f64) -> Result<f64> {
    shannon(br, power * gain, 0.0, n0)
}

pub fn relay_downlink_rate(br: f64, power: f64, gain: f64, n0: f64) -> Result<f64> {
    shannon(br, power * gain, 0.0, n0)
}

/// Decode-and-forward end-to-end rate: half the bottleneck hop.
pub fn df_end_to_end(up: f64, down: f64) -> f64 {
    0.5 * up.min(down)
}

/// Interference seen by receiver `n` from the other D2D transmitters.
pub fn d2d_interference(n: usize, powers: &[f64], snap: &ChannelSnapshot) -> f64 {
    powers
        .iter()
        .enumerate()
        .filter(|(k, _)| *k != n)
        .map(|(k, p)| p * snap.h_d2d(k, n))
        .sum()
}

pub fn d2d_rate(n: usize, alloc: &Allocation, snap: &ChannelSnapshot, n0: f64) -> Result<f64> {
    let p = &alloc.d2d_powers;
    shannon(alloc.bd, p[n] * snap.h_d2d(n, n), d2d_interference(n, p, snap), n0)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateReport {
    pub d2d: Vec<f64>,
    pub uplink: Vec<f64>,
    pub downlink: Vec<f64>,
    /// End-to-end relay rates.
    pub relay: Vec<f64>,
    /// Worst of the D2D rates and the halved hop rates; 0 with no pairs.
    pub r_min: f64,
}

/// Rates of every pair without feasibility checks.
pub fn evaluate_rates(alloc: &Allocation, snap: &ChannelSnapshot, n0: f64) -> Result<RateReport> {
    let n = snap.num_direct();
    let m = snap.num_relay();
    let d2d = (0..n).map(|i| d2d_rate(i, alloc, snap, n0)).collect::<Result<Vec<_>>>()?;
    let mut uplink = vec![0.0; m];
    let mut downlink = vec![0.0; m];
    for k in 0..m {
        if let Some(l) = alloc.assoc.uav_of(k) {
            uplink[k] = relay_uplink_rate(alloc.br[k], alloc.uplink_powers[k], snap.h_up(k, l), n0)?;
            downlink[k] = relay_downlink_rate(alloc.br[k], alloc.downlink_powers[k], snap.h_down(l, k), n0)?;
        }
    }
    let relay: Vec<f64> = uplink.iter().zip(&downlink).map(|(u, d)| df_end_to_end(*u, *d)).collect();
    let r_min = if n + m == 0 {
        0.0
    } else {
        d2d.iter().chain(&relay).copied().fold(f64::INFINITY, f64::min)
    };
    Ok(RateReport {
        d2d,
        uplink,
        downlink,
        relay,
        r_min,
    })
}

/// Checks `alloc` against the scenario, then reports all rates.
pub fn evaluate(alloc: &Allocation, snap: &ChannelSnapshot, scenario: &Scenario) -> Result<RateReport> {
    alloc.check(scenario)?;
    evaluate_rates(alloc, snap, scenario.radio.noise_psd)
}

#[cfg(test)]
mod tests {
    use approx::assert_relative_eq;

    use super::*;

    const N0: f64 = 2.5e-25;

    #[test]
    fn uplink_examples() {
        assert_eq!(relay_uplink_rate(1e6, 0.0, 1e-8, N0).unwrap(), 0.0);
        assert_eq!(relay_uplink_rate(0.0, 0.0, 1e-8, N0).unwrap(), 0.0);
        assert!(relay_uplink_rate(0.0, 1.0, 1e-8, N0).is_err());
        let p = 1e6 * N0 / 1e-8;
        assert_relative_eq!(relay_uplink_rate(1e6, p, 1e-8, N0).unwrap(), 1e6, max_relative = 1e-12);
        assert_relative_eq!(relay_uplink_rate(2e6, 0.1, 1e-8, N0).unwrap(), 61_794_705.709_415_22, max_relative = 1e-12);
        assert_eq!(
            relay_downlink_rate(2e6, 0.1, 1e-8, N0).unwrap(),
            relay_uplink_rate(2e6, 0.1, 1e-8, N0).unwrap()
        );
    }

    #[test]
    fn df_examples() {
        assert_eq!(df_end_to_end(10.0, 10.0), 5.0);
        assert_eq!(df_end_to_end(4.0, 12.0), 2.0);
        assert_eq!(df_end_to_end(0.0, 7.0), 0.0);
    }

    fn two_pair_snapshot(direct: f64, cross: f64) -> ChannelSnapshot {
        ChannelSnapshot::from_gains(2, 0, 0, &[direct, cross, cross, direct], &[], &[]).unwrap()
    }

    fn d2d_alloc(powers: Vec<f64>) -> Allocation {
        Allocation {
            bd: 1e6,
            br: vec![],
            d2d_powers: powers,
            uplink_powers: vec![],
            downlink_powers: vec![],
            assoc: Association::default(),
        }
    }

    #[test]
    fn d2d_examples() {
        let single = ChannelSnapshot::from_gains(1, 0, 0, &[1e-9], &[], &[]).unwrap();
        let a = d2d_alloc(vec![0.1]);
        let expected = 1e6 * (1.0 + 0.1 * 1e-9 / (1e6 * N0)).log2();
        assert_relative_eq!(d2d_rate(0, &a, &single, N0).unwrap(), expected, max_relative = 1e-12);

        let snap = two_pair_snapshot(1e-9, 1e-11);
        let a = d2d_alloc(vec![0.05, 0.05]);
        assert_eq!(d2d_rate(0, &a, &snap, N0).unwrap(), d2d_rate(1, &a, &snap, N0).unwrap());

        let loud = d2d_alloc(vec![0.05, 1e12]);
        assert!(d2d_rate(0, &loud, &snap, N0).unwrap() < 1e-3);
    }

    #[test]
    fn report_composition() {
        let snap = ChannelSnapshot::from_gains(0, 1, 1, &[], &[1e-8], &[1e-8]).unwrap();
        let alloc = Allocation {
            bd: 0.0,
            br: vec![2e6],
            d2d_powers: vec![],
            uplink_powers: vec![0.1],
            downlink_powers: vec![0.1],
            assoc: Association(vec![Some(0)]),
        };
        let r = evaluate_rates(&alloc, &snap, N0).unwrap();
        assert_eq!(r.r_min, r.uplink[0] / 2.0);
        assert_eq!(r, evaluate_rates(&alloc, &snap, N0).unwrap());

        let zero = Allocation {
            uplink_powers: vec![0.0],
            downlink_powers: vec![0.0],
            ..alloc.clone()
        };
        assert_eq!(evaluate_rates(&zero, &snap, N0).unwrap().r_min, 0.0);

        let orphan = Allocation {
            assoc: Association(vec![None]),
            ..alloc
        };
        assert_eq!(evaluate_rates(&orphan, &snap, N0).unwrap().relay, vec![0.0]);
    }
}
