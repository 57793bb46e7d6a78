//! Closed-form cheapest relay powers for a common rate target.

use std::f64::consts::LN_2;

use crate::numeric::illinois;

/// One associated relay pair at fixed bandwidth.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct RelayLink {
    pub pair: usize,
    pub uav: usize,
    pub br: f64,
    /// `br * n0 / h` for each hop: watts needed per unit of `2^(2R/br) - 1`.
    pub up_unit: f64,
    pub down_unit: f64,
    pub cap: f64,
    /// Joules per watt of downlink power (`tau * gate * alpha`).
    pub down_price: f64,
}

impl RelayLink {
    fn growth(&self, rate: f64) -> f64 {
        (2.0 * rate * LN_2 / self.br).exp_m1()
    }

    pub fn uplink_power(&self, rate: f64) -> f64 {
        self.up_unit * self.growth(rate)
    }

    pub fn downlink_power(&self, rate: f64) -> f64 {
        self.down_unit * self.growth(rate)
    }

    /// Energy of both hops at `rate` and its derivative, for slot length `tau`.
    pub fn cost(&self, rate: f64, tau: f64) -> (f64, f64) {
        let g = self.growth(rate);
        let per = tau * self.up_unit + self.down_price * self.down_unit;
        let slope = per * (g + 1.0) * 2.0 * LN_2 / self.br;
        (per * g, slope)
    }

    /// Highest rate the uplink can carry at full user power.
    pub fn uplink_limit(&self) -> f64 {
        if !(self.up_unit.is_finite() && self.up_unit > 0.0) {
            return 0.0;
        }
        0.5 * self.br * (self.cap / self.up_unit).ln_1p() / LN_2
    }

    /// Highest rate with the whole UAV budget on this downlink.
    pub fn downlink_limit(&self, budget: f64) -> f64 {
        if !(self.down_unit.is_finite() && self.down_unit > 0.0) {
            return 0.0;
        }
        0.5 * self.br * (budget / self.down_unit).ln_1p() / LN_2
    }
}

/// Highest common rate the links served by one UAV can share within `budget`.
pub(crate) fn budget_limit(links: &[&RelayLink], budget: f64) -> f64 {
    match links {
        [] => f64::INFINITY,
        [one] => one.downlink_limit(budget),
        _ => {
            let hi = links.iter().map(|l| l.downlink_limit(budget)).fold(f64::INFINITY, f64::min);
            if !(hi > 0.0) || !hi.is_finite() {
                return 0.0;
            }
            let f = |r: f64| links.iter().map(|l| l.downlink_power(r)).sum::<f64>() - budget;
            illinois(f, 0.0, -budget, hi, f(hi), 1e-12 * hi, 200)
        }
    }
}
