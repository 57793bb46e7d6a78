//! World model: time grid, user pairs with per-slot traces, the UAV fleet,
//! radio and energy constants.
//!
//! A [`Scenario`] is immutable once validated and can be shared freely
//! between threads. Scenarios come from JSON files ([`load_scenario`]) or
//! from the random generator ([`synthesize_random_scenario`]).

mod io;
mod synth;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::geometry::Vec3;

pub use io::{dbm_to_watts, load_scenario, watts_to_dbm, write_scenario};
pub use synth::{synthesize_random_scenario, SynthesisOptions, DEFAULT_UAV_LAYOUT};

const TRACE_TOLERANCE: f64 = 1e-9;

/// Slot length `tau` (seconds) and number of slots; the horizon is their product.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeGrid {
    pub slot_duration: f64,
    pub num_slots: usize,
}

impl TimeGrid {
    pub fn horizon(&self) -> f64 {
        self.slot_duration * self.num_slots as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PairKind {
    /// Transmitter reaches its receiver over a direct D2D link.
    Direct,
    /// Traffic is decoded and forwarded by one UAV.
    Relay,
}

/// A transmitter/receiver pair with explicit per-slot positions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UserPair {
    pub id: usize,
    pub kind: PairKind,
    /// Peak transmit power of the pair's transmitter, W.
    #[serde(with = "io::power")]
    pub max_power: f64,
    pub src_trace: Vec<Vec3>,
    pub dst_trace: Vec<Vec3>,
}

impl UserPair {
    pub fn src(&self, slot: usize) -> Vec3 {
        self.src_trace[slot]
    }

    pub fn dst(&self, slot: usize) -> Vec3 {
        self.dst_trace[slot]
    }
}

/// Physical and radio description of one UAV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UavSpec {
    pub id: usize,
    pub initial_position: Vec3,
    /// Stored energy at the start of the episode, J.
    pub initial_battery: f64,
    /// m/s
    pub max_speed: f64,
    /// Downlink power budget shared by all associated relay users, W.
    #[serde(with = "io::power")]
    pub max_tx_power: f64,
    /// Amplifier/feeder slope of the linear transmit power model.
    pub alpha: f64,
    /// Transmit-chain offset, W.
    pub beta: f64,
    /// kg
    pub mass: f64,
    /// m
    pub propeller_radius: f64,
    pub propeller_count: u32,
    /// Hardware draw at full speed, W.
    #[serde(default = "defaults::power_full_speed")]
    pub power_full_speed: f64,
    /// Hardware draw when static, W.
    pub power_static: f64,
}

impl UavSpec {
    /// Table-I airframe at `position` with `battery` joules on board.
    pub fn with_defaults(id: usize, position: Vec3, battery: f64, max_tx_power: f64) -> Self {
        Self {
            id,
            initial_position: position,
            initial_battery: battery,
            max_speed: 15.0,
            max_tx_power,
            alpha: 4.0,
            beta: 6.8,
            mass: 1.0,
            propeller_radius: 0.2,
            propeller_count: 4,
            power_full_speed: defaults::power_full_speed(),
            power_static: 0.5,
        }
    }
}

/// Radio constants. The excess losses are in dB; everything else is SI.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RadioConstants {
    /// Hz
    pub total_bandwidth: f64,
    /// W/Hz
    pub noise_psd: f64,
    /// m
    pub wavelength: f64,
    pub xi_los_db: f64,
    pub xi_nlos_db: f64,
    pub nu1: f64,
    pub nu2: f64,
    /// Distance exponent of the free-space factor. 2 is physical free space;
    /// 1 reproduces the linear form some texts print.
    #[serde(default = "defaults::path_loss_exponent")]
    pub path_loss_exponent: f64,
}

impl RadioConstants {
    pub fn with_defaults() -> Self {
        Self {
            total_bandwidth: 20e6,
            noise_psd: 2.5e-25,
            wavelength: 0.125,
            xi_los_db: 1.0,
            xi_nlos_db: 12.0,
            nu1: 9.6,
            nu2: 0.29,
            path_loss_exponent: defaults::path_loss_exponent(),
        }
    }

    pub fn xi_los(&self) -> f64 {
        db_to_linear(self.xi_los_db)
    }

    pub fn xi_nlos(&self) -> f64 {
        db_to_linear(self.xi_nlos_db)
    }
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Battery, charging station and airframe environment constants.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnergyConstants {
    /// J
    pub battery_capacity: f64,
    /// W delivered to a docked UAV.
    pub charge_power: f64,
    pub station: Vec3,
    /// Smoothing constant of the station gate, m^2.
    #[serde(default = "defaults::station_epsilon")]
    pub station_epsilon: f64,
    #[serde(default = "defaults::gravity")]
    pub gravity: f64,
    #[serde(default = "defaults::air_density")]
    pub air_density: f64,
    /// A UAV within this distance of the station counts as docked.
    #[serde(default)]
    pub dock_radius: f64,
}

impl EnergyConstants {
    pub fn with_defaults() -> Self {
        Self {
            battery_capacity: 15e3,
            charge_power: 10.0,
            station: Vec3::new(400.0, 400.0, 60.0),
            station_epsilon: defaults::station_epsilon(),
            gravity: defaults::gravity(),
            air_density: defaults::air_density(),
            dock_radius: 0.0,
        }
    }
}

/// Axis-aligned ground rectangle that contains every user and UAV.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Arena {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl Default for Arena {
    fn default() -> Self {
        Self {
            x_min: 0.0,
            x_max: 800.0,
            y_min: 0.0,
            y_max: 800.0,
        }
    }
}

impl Arena {
    pub fn contains(&self, p: Vec3) -> bool {
        p.x >= self.x_min - TRACE_TOLERANCE
            && p.x <= self.x_max + TRACE_TOLERANCE
            && p.y >= self.y_min - TRACE_TOLERANCE
            && p.y <= self.y_max + TRACE_TOLERANCE
    }

    pub fn clamp(&self, p: Vec3) -> Vec3 {
        Vec3::new(
            p.x.clamp(self.x_min, self.x_max),
            p.y.clamp(self.y_min, self.y_max),
            p.z,
        )
    }
}

/// Complete, validated world description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(default)]
    pub seed: u64,
    pub time: TimeGrid,
    pub radio: RadioConstants,
    pub energy: EnergyConstants,
    #[serde(default)]
    pub arena: Arena,
    /// Pedestrian speed bound used to check traces, m/s.
    #[serde(default = "defaults::user_speed_cap")]
    pub user_speed_cap: f64,
    pub uavs: Vec<UavSpec>,
    pub pairs: Vec<UserPair>,
}

impl Scenario {
    pub fn slot_duration(&self) -> f64 {
        self.time.slot_duration
    }

    pub fn num_slots(&self) -> usize {
        self.time.num_slots
    }

    /// Direct pairs in file order.
    pub fn direct_pairs(&self) -> impl Iterator<Item = &UserPair> {
        self.pairs.iter().filter(|p| p.kind == PairKind::Direct)
    }

    /// Relay pairs in file order.
    pub fn relay_pairs(&self) -> impl Iterator<Item = &UserPair> {
        self.pairs.iter().filter(|p| p.kind == PairKind::Relay)
    }

    pub fn num_direct(&self) -> usize {
        self.direct_pairs().count()
    }

    pub fn num_relay(&self) -> usize {
        self.relay_pairs().count()
    }

    pub fn initial_positions(&self) -> Vec<Vec3> {
        self.uavs.iter().map(|u| u.initial_position).collect()
    }

    /// SHA-256 of the canonical JSON encoding, hex.
    pub fn digest(&self) -> String {
        let json = serde_json::to_vec(self).expect("scenario serializes");
        let hash = Sha256::digest(&json);
        hash.iter().map(|b| format!("{b:02x}")).collect()
    }

    /// Checks every structural invariant, naming the offending entity.
    pub fn validate(&self) -> Result<()> {
        let t = &self.time;
        if !(t.slot_duration > 0.0 && t.slot_duration.is_finite()) {
            return Err(Error::validation("time", "slot_duration must be positive"));
        }
        if t.num_slots == 0 {
            return Err(Error::validation("time", "num_slots must be at least 1"));
        }
        self.validate_radio()?;
        self.validate_energy()?;
        let a = &self.arena;
        if !(a.x_min < a.x_max && a.y_min < a.y_max) {
            return Err(Error::validation("arena", "empty bounding region"));
        }
        if !(self.user_speed_cap >= 0.0 && self.user_speed_cap.is_finite()) {
            return Err(Error::validation("user_speed_cap", "must be finite and non-negative"));
        }
        let mut ids = std::collections::BTreeSet::new();
        for u in &self.uavs {
            if !ids.insert(u.id) {
                return Err(Error::validation(format!("uav {}", u.id), "duplicate id"));
            }
            self.validate_uav(u)?;
        }
        let mut ids = std::collections::BTreeSet::new();
        for p in &self.pairs {
            if !ids.insert(p.id) {
                return Err(Error::validation(format!("pair {}", p.id), "duplicate id"));
            }
            self.validate_pair(p)?;
        }
        if self.uavs.is_empty() && self.num_relay() > 0 {
            return Err(Error::validation("uavs", "relay pairs require at least one UAV"));
        }
        Ok(())
    }

    fn validate_radio(&self) -> Result<()> {
        let r = &self.radio;
        let positive = [
            ("total_bandwidth", r.total_bandwidth),
            ("noise_psd", r.noise_psd),
            ("wavelength", r.wavelength),
            ("nu1", r.nu1),
            ("nu2", r.nu2),
            ("path_loss_exponent", r.path_loss_exponent),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::validation("radio", format!("{name} must be positive")));
            }
        }
        if !(r.xi_los_db.is_finite() && r.xi_nlos_db.is_finite()) {
            return Err(Error::validation("radio", "excess losses must be finite"));
        }
        if r.xi_nlos_db < r.xi_los_db {
            return Err(Error::validation("radio", "xi_nlos_db must be >= xi_los_db"));
        }
        Ok(())
    }

    fn validate_energy(&self) -> Result<()> {
        let e = &self.energy;
        let positive = [
            ("battery_capacity", e.battery_capacity),
            ("station_epsilon", e.station_epsilon),
            ("gravity", e.gravity),
            ("air_density", e.air_density),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::validation("energy", format!("{name} must be positive")));
            }
        }
        if !(e.charge_power >= 0.0 && e.charge_power.is_finite()) {
            return Err(Error::validation("energy", "charge_power must be non-negative"));
        }
        if !(e.dock_radius >= 0.0 && e.dock_radius.is_finite()) {
            return Err(Error::validation("energy", "dock_radius must be non-negative"));
        }
        if !e.station.is_finite() || e.station.z < 0.0 {
            return Err(Error::validation("energy", "station must be finite with z >= 0"));
        }
        Ok(())
    }

    fn validate_uav(&self, u: &UavSpec) -> Result<()> {
        let entity = || format!("uav {}", u.id);
        if !u.initial_position.is_finite() || u.initial_position.z < 0.0 {
            return Err(Error::validation(entity(), "initial position must be finite with z >= 0"));
        }
        if !self.arena.contains(u.initial_position) {
            return Err(Error::validation(entity(), "initial position outside the arena"));
        }
        if !(u.initial_battery >= 0.0 && u.initial_battery <= self.energy.battery_capacity) {
            return Err(Error::validation(entity(), "initial battery must lie in [0, capacity]"));
        }
        let positive = [
            ("max_speed", u.max_speed),
            ("max_tx_power", u.max_tx_power),
            ("alpha", u.alpha),
            ("beta", u.beta),
            ("mass", u.mass),
            ("propeller_radius", u.propeller_radius),
            ("power_full_speed", u.power_full_speed),
            ("power_static", u.power_static),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::validation(entity(), format!("{name} must be positive")));
            }
        }
        if u.propeller_count == 0 {
            return Err(Error::validation(entity(), "propeller_count must be positive"));
        }
        if u.power_full_speed < u.power_static {
            return Err(Error::validation(entity(), "power_full_speed must be >= power_static"));
        }
        Ok(())
    }

    fn validate_pair(&self, p: &UserPair) -> Result<()> {
        let entity = || format!("pair {}", p.id);
        if !(p.max_power > 0.0 && p.max_power.is_finite()) {
            return Err(Error::validation(entity(), "max_power must be positive"));
        }
        let slots = self.time.num_slots;
        let max_step = self.user_speed_cap * self.time.slot_duration;
        for (role, trace) in [("src", &p.src_trace), ("dst", &p.dst_trace)] {
            if trace.len() != slots {
                return Err(Error::validation(
                    entity(),
                    format!("{role} trace has {} entries, expected {slots}", trace.len()),
                ));
            }
            for (t, w) in trace.iter().enumerate() {
                if !w.is_finite() || w.z != 0.0 {
                    return Err(Error::validation(
                        entity(),
                        format!("{role} at slot {t} must be finite on the ground (z = 0)"),
                    ));
                }
                if !self.arena.contains(*w) {
                    return Err(Error::validation(entity(), format!("{role} at slot {t} outside the arena")));
                }
            }
            for (t, w) in trace.windows(2).enumerate() {
                let step = w[0].distance(w[1]);
                if step > max_step * (1.0 + TRACE_TOLERANCE) + TRACE_TOLERANCE {
                    return Err(Error::validation(
                        entity(),
                        format!(
                            "{role} moves {step:.3} m between slots {t} and {}, above the speed cap ({max_step:.3} m)",
                            t + 1
                        ),
                    ));
                }
            }
        }
        for t in 0..slots {
            if p.src_trace[t] == p.dst_trace[t] {
                return Err(Error::validation(entity(), format!("src and dst coincide at slot {t}")));
            }
        }
        Ok(())
    }
}

mod defaults {
    pub fn power_full_speed() -> f64 {
        5.0
    }
    pub fn path_loss_exponent() -> f64 {
        2.0
    }
    pub fn station_epsilon() -> f64 {
        1.0
    }
    pub fn gravity() -> f64 {
        9.81
    }
    pub fn air_density() -> f64 {
        1.225
    }
    pub fn user_speed_cap() -> f64 {
        1.5
    }
}
