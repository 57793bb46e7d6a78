//! Link gains: probabilistic-LoS air-to-ground loss for relay hops and a
//! free-space NLoS model for ground D2D links. No small-scale fading.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::geometry::Vec3;
use crate::scenario::{RadioConstants, Scenario};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkGain {
    /// Linear power gain, in (0, 1].
    pub gain: f64,
    pub distance: f64,
    /// Degrees; present only for air-ground links.
    pub elevation_deg: Option<f64>,
}

/// Elevation of `uav` seen from `user`, in degrees.
pub fn elevation_angle(uav: Vec3, user: Vec3) -> Result<f64> {
    let delta = uav.distance(user);
    if !(delta > 0.0) {
        return Err(Error::Geometry("UAV and user coincide; elevation undefined".into()));
    }
    let s = ((uav.z - user.z) / delta).clamp(-1.0, 1.0);
    Ok(s.asin().to_degrees())
}

pub fn los_probability(theta_deg: f64, nu1: f64, nu2: f64) -> f64 {
    1.0 / (1.0 + nu1 * (-nu2 * (theta_deg - nu1)).exp())
}

fn free_space_factor(delta: f64, radio: &RadioConstants) -> f64 {
    (4.0 * PI * delta / radio.wavelength).powf(radio.path_loss_exponent)
}

/// LoS/NLoS-averaged linear path loss, floored at 1 so the gain never exceeds 1.
pub fn air_ground_path_loss(delta: f64, radio: &RadioConstants, theta_deg: f64) -> Result<f64> {
    if !(delta > 0.0) {
        return Err(Error::Domain(format!("path loss needs a positive distance, got {delta}")));
    }
    let p = los_probability(theta_deg, radio.nu1, radio.nu2);
    let excess = p * radio.xi_los() + (1.0 - p) * radio.xi_nlos();
    Ok((excess * free_space_factor(delta, radio)).max(1.0))
}

pub fn air_ground_gain(uav: Vec3, user: Vec3, radio: &RadioConstants) -> Result<LinkGain> {
    let theta = elevation_angle(uav, user)?;
    let distance = uav.distance(user);
    let pl = air_ground_path_loss(distance, radio, theta)?;
    Ok(LinkGain {
        gain: 1.0 / pl,
        distance,
        elevation_deg: Some(theta),
    })
}

/// Ground-to-ground gain: free space with the NLoS excess loss.
pub fn d2d_gain(src: Vec3, dst: Vec3, radio: &RadioConstants) -> Result<LinkGain> {
    let distance = src.distance(dst);
    if !(distance > 0.0) {
        return Err(Error::Geometry("D2D endpoints coincide".into()));
    }
    let pl = (radio.xi_nlos() * free_space_factor(distance, radio)).max(1.0);
    Ok(LinkGain {
        gain: 1.0 / pl,
        distance,
        elevation_deg: None,
    })
}

/// Every gain of one slot. Direct pairs and relay pairs are indexed by their
/// position among pairs of the same kind.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSnapshot {
    n: usize,
    m: usize,
    l: usize,
    /// Row k, column n: transmitter of pair k to receiver of pair n.
    d2d: Vec<LinkGain>,
    /// Row m, column l.
    uplink: Vec<LinkGain>,
    /// Row l, column m.
    downlink: Vec<LinkGain>,
}

impl ChannelSnapshot {
    /// Builds a snapshot from explicit gain matrices (row-major). Useful for
    /// synthetic instances that do not come from geometry.
    pub fn from_gains(
        n: usize,
        m: usize,
        l: usize,
        d2d: &[f64],
        uplink: &[f64],
        downlink: &[f64],
    ) -> Result<Self> {
        if d2d.len() != n * n || uplink.len() != m * l || downlink.len() != l * m {
            return Err(Error::Domain("gain matrix dimensions do not match".into()));
        }
        if d2d.iter().chain(uplink).chain(downlink).any(|&g| !(g >= 0.0 && g.is_finite())) {
            return Err(Error::Domain("gains must be finite and non-negative".into()));
        }
        let wrap = |g: &f64| LinkGain {
            gain: *g,
            distance: f64::NAN,
            elevation_deg: None,
        };
        Ok(Self {
            n,
            m,
            l,
            d2d: d2d.iter().map(wrap).collect(),
            uplink: uplink.iter().map(wrap).collect(),
            downlink: downlink.iter().map(wrap).collect(),
        })
    }

    pub fn num_direct(&self) -> usize {
        self.n
    }

    pub fn num_relay(&self) -> usize {
        self.m
    }

    pub fn num_uavs(&self) -> usize {
        self.l
    }

    pub fn d2d(&self, k: usize, n: usize) -> &LinkGain {
        &self.d2d[k * self.n + n]
    }

    pub fn uplink(&self, m: usize, l: usize) -> &LinkGain {
        &self.uplink[m * self.l + l]
    }

    pub fn downlink(&self, l: usize, m: usize) -> &LinkGain {
        &self.downlink[l * self.m + m]
    }

    pub fn h_d2d(&self, k: usize, n: usize) -> f64 {
        self.d2d(k, n).gain
    }

    pub fn h_up(&self, m: usize, l: usize) -> f64 {
        self.uplink(m, l).gain
    }

    pub fn h_down(&self, l: usize, m: usize) -> f64 {
        self.downlink(l, m).gain
    }

    /// Largest gain of any link.
    pub fn max_gain(&self) -> f64 {
        self.d2d
            .iter()
            .chain(&self.uplink)
            .chain(&self.downlink)
            .map(|g| g.gain)
            .fold(0.0, f64::max)
    }
}

/// Gains for slot `t` with the UAVs at `uav_positions`.
pub fn snapshot(scenario: &Scenario, uav_positions: &[Vec3], t: usize) -> Result<ChannelSnapshot> {
    if uav_positions.len() != scenario.uavs.len() {
        return Err(Error::Domain(format!(
            "expected {} UAV positions, got {}",
            scenario.uavs.len(),
            uav_positions.len()
        )));
    }
    if t >= scenario.num_slots() {
        return Err(Error::Domain(format!("slot {t} outside the time grid")));
    }
    let radio = &scenario.radio;
    let direct: Vec<_> = scenario.direct_pairs().collect();
    let relay: Vec<_> = scenario.relay_pairs().collect();
    let (n, m, l) = (direct.len(), relay.len(), uav_positions.len());

    let mut d2d = Vec::with_capacity(n * n);
    for tx in &direct {
        for rx in &direct {
            d2d.push(d2d_gain(tx.src(t), rx.dst(t), radio)?);
        }
    }
    let mut uplink = Vec::with_capacity(m * l);
    for p in &relay {
        for &u in uav_positions {
            uplink.push(air_ground_gain(u, p.src(t), radio)?);
        }
    }
    let mut downlink = Vec::with_capacity(l * m);
    for &u in uav_positions {
        for p in &relay {
            downlink.push(air_ground_gain(u, p.dst(t), radio)?);
        }
    }
    Ok(ChannelSnapshot {
        n,
        m,
        l,
        d2d,
        uplink,
        downlink,
    })
}

#[cfg(test)]
mod tests {
    use approx::assert_relative_eq;

    use super::*;
    use crate::scenario::synthesize_random_scenario;

    fn radio() -> RadioConstants {
        RadioConstants::with_defaults()
    }

    #[test]
    fn elevation_examples() {
        let ground = Vec3::new(0.0, 0.0, 0.0);
        assert_relative_eq!(elevation_angle(Vec3::new(0.0, 0.0, 60.0), ground).unwrap(), 90.0);
        assert_relative_eq!(
            elevation_angle(Vec3::new(60.0, 0.0, 60.0), ground).unwrap(),
            45.0,
            epsilon = 1e-12
        );
        let theta = elevation_angle(Vec3::new(400.0, 400.0, 60.0), Vec3::new(460.0, 480.0, 0.0)).unwrap();
        assert_relative_eq!(theta, 30.963_756_532_073_52, epsilon = 1e-12);
        assert!(elevation_angle(ground, ground).is_err());
    }

    #[test]
    fn los_probability_examples() {
        assert_relative_eq!(los_probability(9.6, 9.6, 0.29), 1.0 / 10.6, epsilon = 1e-15);
        assert!((1.0 - los_probability(90.0, 9.6, 0.29)).abs() < 1e-8);
        assert_relative_eq!(los_probability(0.0, 9.6, 0.29), 0.006_395_382_591_132_52, max_relative = 1e-12);
    }

    #[test]
    fn path_loss_overhead() {
        let pl = air_ground_path_loss(60.0, &radio(), 90.0).unwrap();
        assert_relative_eq!(pl, 45_803_873.482_665_08, max_relative = 1e-12);
        assert_relative_eq!(10.0 * pl.log10(), 76.609_022_064_103, epsilon = 1e-9);
        assert!(air_ground_path_loss(0.0, &radio(), 90.0).is_err());
    }

    #[test]
    fn equal_excess_losses_ignore_los_probability() {
        let mut r = radio();
        r.xi_nlos_db = r.xi_los_db;
        let a = air_ground_path_loss(120.0, &r, 5.0).unwrap();
        let b = air_ground_path_loss(120.0, &r, 80.0).unwrap();
        assert_relative_eq!(a, b, max_relative = 1e-14);
    }

    #[test]
    fn square_law_and_literal_form() {
        let r = radio();
        let a = air_ground_path_loss(100.0, &r, 30.0).unwrap();
        let b = air_ground_path_loss(200.0, &r, 30.0).unwrap();
        assert_relative_eq!(b / a, 4.0, max_relative = 1e-12);
        let mut lin = radio();
        lin.path_loss_exponent = 1.0;
        let c = air_ground_path_loss(100.0, &lin, 30.0).unwrap();
        let d = air_ground_path_loss(200.0, &lin, 30.0).unwrap();
        assert_relative_eq!(d / c, 2.0, max_relative = 1e-12);
    }

    #[test]
    fn d2d_gain_example() {
        let g = d2d_gain(Vec3::new(0.0, 0.0, 0.0), Vec3::new(50.0, 0.0, 0.0), &radio()).unwrap();
        assert_relative_eq!(g.gain, 2.497_240_037_912_478e-9, max_relative = 1e-12);
        let back = d2d_gain(Vec3::new(50.0, 0.0, 0.0), Vec3::new(0.0, 0.0, 0.0), &radio()).unwrap();
        assert_eq!(g.gain, back.gain);
    }

    #[test]
    fn snapshot_shapes() {
        let mut s = synthesize_random_scenario(1, 0, 1, 3).unwrap();
        s.uavs.clear();
        let snap = snapshot(&s, &[], 0).unwrap();
        assert_eq!((snap.num_direct(), snap.num_relay(), snap.num_uavs()), (1, 0, 0));
        let s = synthesize_random_scenario(2, 3, 5, 3).unwrap();
        let pos = s.initial_positions();
        let a = snapshot(&s, &pos, 1).unwrap();
        let b = snapshot(&s, &pos, 1).unwrap();
        assert_eq!(a, b);
        assert!(snapshot(&s, &pos[..2], 0).is_err());
    }

    #[test]
    fn equidistant_user_sees_equal_gains() {
        let r = radio();
        let user = Vec3::new(400.0, 400.0, 0.0);
        let a = air_ground_gain(Vec3::new(300.0, 400.0, 60.0), user, &r).unwrap();
        let b = air_ground_gain(Vec3::new(400.0, 500.0, 60.0), user, &r).unwrap();
        assert_relative_eq!(a.gain, b.gain, max_relative = 1e-14);
    }
}
