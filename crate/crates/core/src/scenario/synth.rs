use serde::Serialize;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::{
    dbm_to_watts, Arena, EnergyConstants, PairKind, RadioConstants, Scenario, TimeGrid, UavSpec,
    UserPair,
};
use crate::error::{Error, Result};
use crate::geometry::Vec3;
use crate::rng;

/// Five-UAV starting layout at 60 m; the first one sits on the station.
pub const DEFAULT_UAV_LAYOUT: [Vec3; 5] = [
    Vec3::new(400.0, 400.0, 60.0),
    Vec3::new(200.0, 200.0, 60.0),
    Vec3::new(200.0, 600.0, 60.0),
    Vec3::new(600.0, 200.0, 60.0),
    Vec3::new(600.0, 600.0, 60.0),
];

const UAV_ALTITUDE: f64 = 60.0;

/// Knobs for [`SynthesisOptions::build`]. `Default` gives the reference setup.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SynthesisOptions {
    pub slot_duration: f64,
    pub num_slots: usize,
    pub user_power_dbm: f64,
    pub uav_power_dbm: f64,
    pub arena: Arena,
    pub user_speed_cap: f64,
    /// Range of the initial distance between a D2D transmitter and its receiver.
    pub d2d_distance: (f64, f64),
    /// When set, every user walks toward this ground point instead of
    /// following random waypoints.
    pub gather_point: Option<Vec3>,
    pub radio: RadioConstants,
    pub energy: EnergyConstants,
}

impl Default for SynthesisOptions {
    fn default() -> Self {
        Self {
            slot_duration: 1.0,
            num_slots: 10,
            user_power_dbm: 20.0,
            uav_power_dbm: 25.0,
            arena: Arena::default(),
            user_speed_cap: 1.5,
            d2d_distance: (10.0, 100.0),
            gather_point: None,
            radio: RadioConstants::with_defaults(),
            energy: EnergyConstants::with_defaults(),
        }
    }
}

/// Random scenario with the default options.
pub fn synthesize_random_scenario(n: usize, m: usize, l: usize, seed: u64) -> Result<Scenario> {
    SynthesisOptions::default().build(n, m, l, seed)
}

impl SynthesisOptions {
    /// Places `n` direct pairs, `m` relay pairs and `l` UAVs. Identical
    /// inputs give identical scenarios.
    pub fn build(&self, n: usize, m: usize, l: usize, seed: u64) -> Result<Scenario> {
        if self.num_slots == 0 || !(self.slot_duration > 0.0) {
            return Err(Error::Domain("synthesis needs a non-empty time grid".into()));
        }
        if !(self.d2d_distance.0 > 0.0 && self.d2d_distance.0 <= self.d2d_distance.1) {
            return Err(Error::Domain("d2d distance range must be positive and ordered".into()));
        }
        let capacity = self.energy.battery_capacity;
        let max_tx = dbm_to_watts(self.uav_power_dbm);
        let uavs = if l == DEFAULT_UAV_LAYOUT.len() {
            DEFAULT_UAV_LAYOUT
                .iter()
                .enumerate()
                .map(|(id, &p)| {
                    let battery = if id == 0 { capacity } else { capacity / 2.0 };
                    UavSpec::with_defaults(id, p, battery, max_tx)
                })
                .collect()
        } else {
            let mut r = rng::stream(seed, "uav-placement", &[]);
            (0..l)
                .map(|id| {
                    let p = self.uniform_point(&mut r, UAV_ALTITUDE);
                    UavSpec::with_defaults(id, p, capacity / 2.0, max_tx)
                })
                .collect()
        };

        let user_power = dbm_to_watts(self.user_power_dbm);
        let mut place = rng::stream(seed, "user-placement", &[]);
        let mut pairs = Vec::with_capacity(n + m);
        for id in 0..n + m {
            let kind = if id < n { PairKind::Direct } else { PairKind::Relay };
            let src = self.uniform_point(&mut place, 0.0);
            let dst = match kind {
                PairKind::Direct => self.nearby_point(&mut place, src),
                PairKind::Relay => self.uniform_point(&mut place, 0.0),
            };
            let mut walk = rng::stream(seed, "mobility", &[id as u64]);
            let src_trace = self.walk(&mut walk, src);
            let dst_trace = self.walk(&mut walk, dst);
            pairs.push(UserPair {
                id,
                kind,
                max_power: user_power,
                src_trace,
                dst_trace,
            });
        }

        let scenario = Scenario {
            seed,
            time: TimeGrid {
                slot_duration: self.slot_duration,
                num_slots: self.num_slots,
            },
            radio: self.radio.clone(),
            energy: self.energy.clone(),
            arena: self.arena,
            user_speed_cap: self.user_speed_cap,
            uavs,
            pairs,
        };
        scenario.validate()?;
        Ok(scenario)
    }

    fn uniform_point(&self, r: &mut ChaCha8Rng, z: f64) -> Vec3 {
        let a = &self.arena;
        Vec3::new(
            r.random_range(a.x_min..=a.x_max),
            r.random_range(a.y_min..=a.y_max),
            z,
        )
    }

    fn nearby_point(&self, r: &mut ChaCha8Rng, center: Vec3) -> Vec3 {
        let (lo, hi) = self.d2d_distance;
        loop {
            let d = r.random_range(lo..=hi);
            let phi = r.random_range(0.0..std::f64::consts::TAU);
            let p = Vec3::new(center.x + d * phi.cos(), center.y + d * phi.sin(), 0.0);
            if self.arena.contains(p) {
                return p;
            }
        }
    }

    /// Random-waypoint walk, or a straight walk to the gather point.
    fn walk(&self, r: &mut ChaCha8Rng, start: Vec3) -> Vec<Vec3> {
        let cap = self.user_speed_cap * self.slot_duration;
        let mut trace = Vec::with_capacity(self.num_slots);
        let mut pos = start;
        let mut target = match self.gather_point {
            // Spread the crowd so endpoints of a pair never meet.
            Some(g) => {
                let d = r.random_range(5.0..=self.d2d_distance.1.max(5.0));
                let phi = r.random_range(0.0..std::f64::consts::TAU);
                self.arena.clamp(Vec3::new(g.x + d * phi.cos(), g.y + d * phi.sin(), 0.0))
            }
            None => self.uniform_point(r, 0.0),
        };
        let mut speed = r.random_range(0.3..=1.0) * cap;
        trace.push(pos);
        for _ in 1..self.num_slots {
            if pos == target && self.gather_point.is_none() {
                target = self.uniform_point(r, 0.0);
                speed = r.random_range(0.3..=1.0) * cap;
            }
            pos = pos.step_toward(target, speed);
            trace.push(pos);
        }
        trace
    }
}
