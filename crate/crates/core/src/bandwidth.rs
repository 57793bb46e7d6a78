//! Bandwidth split at fixed powers and association.
//!
//! Powers are fixed, so the energy is fixed and maximizing efficiency is the
//! same as maximizing the minimum rate. Each link rate `B log2(1 + S / (X + B n0))`
//! splits into a convex part `B log2(X + S + B n0)` that is replaced by its
//! tangent and a concave part `-B log2(X + B n0)` that is kept. The minimum
//! rate of the resulting concave program is found by searching for the rate
//! target whose bandwidth requirements exactly fill the band.

use std::f64::consts::LN_2;

use crate::error::Result;
use crate::numeric::illinois;
use crate::problem::{SlotProblem, BANDWIDTH_FLOOR};
use crate::rates::Allocation;

/// Concave lower bound on one link rate as a function of its bandwidth:
/// `constant + slope * (b - expansion) - b * log2(interference + b * n0)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BandwidthMinorant {
    pub constant: f64,
    pub slope: f64,
    pub expansion: f64,
    pub interference: f64,
    pub n0: f64,
}

impl BandwidthMinorant {
    /// Minorant of `b log2(1 + signal / (interference + b n0))` tangent at `expansion`.
    pub fn new(expansion: f64, signal: f64, interference: f64, n0: f64) -> Self {
        let phi1 = expansion * n0 + interference + signal;
        Self {
            constant: expansion * phi1.log2(),
            slope: phi1.log2() + expansion * n0 / (phi1 * LN_2),
            expansion,
            interference,
            n0,
        }
    }

    fn floor_term(&self, b: f64) -> f64 {
        let x = self.interference + b * self.n0;
        if b == 0.0 {
            0.0
        } else {
            b * x.log2()
        }
    }

    pub fn eval(&self, b: f64) -> f64 {
        self.constant + self.slope * (b - self.expansion) - self.floor_term(b)
    }

    pub fn derivative(&self, b: f64) -> f64 {
        let x = self.interference + b * self.n0;
        self.slope - x.log2() - b * self.n0 / (x * LN_2)
    }

    /// Bandwidth where the minorant peaks, capped at `limit`.
    fn peak(&self, limit: f64) -> f64 {
        if self.derivative(limit) >= 0.0 {
            return limit;
        }
        let lo = BANDWIDTH_FLOOR.min(limit);
        let d_lo = self.derivative(lo);
        if d_lo <= 0.0 {
            return lo;
        }
        illinois(|b| self.derivative(b), lo, d_lo, limit, self.derivative(limit), 1e-9, 200)
    }

    /// Smallest bandwidth in `[floor, limit]` reaching `rate`, or infinity.
    fn requirement(&self, rate: f64, limit: f64) -> f64 {
        let mut b = BANDWIDTH_FLOOR.min(limit);
        // Newton from the left never overshoots the first crossing of a
        // concave function.
        for _ in 0..100 {
            let gap = rate - self.eval(b);
            if gap <= 1e-12 * rate.abs().max(1.0) {
                return b;
            }
            let d = self.derivative(b);
            if !(d > 0.0) {
                return f64::INFINITY;
            }
            let next = b + gap / d;
            if next > limit {
                return if self.eval(limit) >= rate { limit } else { f64::INFINITY };
            }
            if next - b <= 1e-12 * b {
                return next;
            }
            b = next;
        }
        b
    }
}

/// Minorant of D2D pair `n`'s rate in the shared D2D band, tangent at `bd`.
pub fn taylor_lower_bound_bd(problem: &SlotProblem, alloc: &Allocation, n: usize, bd: f64) -> BandwidthMinorant {
    let snap = &problem.snapshot;
    let p = &alloc.d2d_powers;
    let interference: f64 = (0..p.len())
        .filter(|&k| k != n)
        .map(|k| p[k] * snap.h_d2d(k, n))
        .sum();
    BandwidthMinorant::new(bd, p[n] * snap.h_d2d(n, n), interference, problem.noise_psd)
}

/// Minorants of relay pair `k`'s uplink and downlink hop rates, tangent at `br`.
/// Each hop must carry twice the end-to-end rate.
pub fn relay_constraint_minorants(problem: &SlotProblem, alloc: &Allocation, k: usize, br: f64) -> Option<[BandwidthMinorant; 2]> {
    let l = alloc.assoc.uav_of(k)?;
    let snap = &problem.snapshot;
    let n0 = problem.noise_psd;
    Some([
        BandwidthMinorant::new(br, alloc.uplink_powers[k] * snap.h_up(k, l), 0.0, n0),
        BandwidthMinorant::new(br, alloc.downlink_powers[k] * snap.h_down(l, k), 0.0, n0),
    ])
}

/// Bandwidth needs of every link for a common rate target.
struct Demand {
    d2d: Vec<BandwidthMinorant>,
    relays: Vec<(usize, [BandwidthMinorant; 2])>,
    total: f64,
}

impl Demand {
    fn d2d_need(&self, rate: f64) -> f64 {
        if self.d2d.is_empty() {
            return 0.0;
        }
        self.d2d
            .iter()
            .map(|m| m.requirement(rate, self.total))
            .fold(BANDWIDTH_FLOOR, f64::max)
    }

    fn relay_need(&self, hops: &[BandwidthMinorant; 2], rate: f64) -> f64 {
        hops.iter()
            .map(|m| m.requirement(2.0 * rate, self.total))
            .fold(BANDWIDTH_FLOOR, f64::max)
    }

    fn need(&self, rate: f64) -> f64 {
        self.d2d_need(rate) + self.relays.iter().map(|(_, h)| self.relay_need(h, rate)).sum::<f64>()
    }

    /// Highest common rate any split of the band could give under the minorants.
    fn ceiling(&self) -> f64 {
        let d2d = self
            .d2d
            .iter()
            .map(|m| m.eval(m.peak(self.total)))
            .fold(f64::INFINITY, f64::min);
        let relay = self
            .relays
            .iter()
            .flat_map(|(_, h)| h.iter().map(|m| 0.5 * m.eval(m.peak(self.total))))
            .fold(f64::INFINITY, f64::min);
        d2d.min(relay).max(0.0)
    }
}

/// Bandwidth split maximizing the minimum rate under the minorants tangent at `alloc`.
fn solve_minorized(problem: &SlotProblem, alloc: &Allocation) -> Allocation {
    let n = problem.num_direct();
    let m = problem.num_relay();
    let total = problem.total_bandwidth;
    let mut next = alloc.clone();
    if m == 0 || alloc.assoc.0.iter().all(Option::is_none) {
        next.bd = if n > 0 { total } else { 0.0 };
        next.br = vec![0.0; m];
        return next;
    }
    let demand = Demand {
        d2d: (0..n).map(|j| taylor_lower_bound_bd(problem, alloc, j, alloc.bd)).collect(),
        relays: (0..m)
            .filter_map(|k| relay_constraint_minorants(problem, alloc, k, alloc.br[k]).map(|h| (k, h)))
            .collect(),
        total,
    };
    let ceiling = demand.ceiling();
    let rate = if ceiling <= 0.0 || demand.need(0.0) >= total {
        0.0
    } else if demand.need(ceiling) <= total {
        ceiling
    } else {
        let f = |r: f64| {
            let need = demand.need(r);
            if need.is_finite() {
                need - total
            } else {
                total
            }
        };
        let lo = illinois(f, 0.0, f(0.0), ceiling, f(ceiling), 1e-12 * ceiling, 200);
        // Settle on the feasible side of the root.
        if demand.need(lo) <= total {
            lo
        } else {
            lo * (1.0 - 1e-12)
        }
    };
    let bd = if n > 0 { demand.d2d_need(rate) } else { 0.0 };
    let mut br = vec![0.0; m];
    for (k, hops) in &demand.relays {
        br[*k] = demand.relay_need(hops, rate);
    }
    // Hand leftover band out in proportion to the current split.
    let used = bd + br.iter().sum::<f64>();
    let scale = if used > 0.0 && used.is_finite() { total / used } else { 1.0 };
    if scale.is_finite() && scale >= 1.0 {
        next.bd = bd * scale;
        for (k, _) in &demand.relays {
            next.br[*k] = br[*k] * scale;
        }
    }
    next
}

/// Output of the bandwidth loop.
#[derive(Debug, Clone)]
pub struct BandwidthResult {
    pub allocation: Allocation,
    /// True efficiency at the start and after every accepted iteration.
    pub objective_trace: Vec<f64>,
    pub iterations: usize,
}

/// Re-linearizes at the current split and re-solves until the efficiency
/// stops improving by more than `tol` (relative).
pub fn solve_bandwidth(problem: &SlotProblem, alloc: &Allocation, max_iters: usize, tol: f64) -> Result<BandwidthResult> {
    let mut current = alloc.clone();
    let mut value = problem.objective(&current)?.value;
    let mut objective_trace = vec![value];
    let mut iterations = 0;
    for _ in 0..max_iters {
        iterations += 1;
        let next = solve_minorized(problem, &current);
        if next.bd.to_bits() == current.bd.to_bits() && next.br == current.br {
            break;
        }
        let next_value = problem.objective(&next)?.value;
        if !(next_value >= value) {
            break;
        }
        let change = (next_value - value) / value.abs().max(f64::MIN_POSITIVE);
        current = next;
        value = next_value;
        objective_trace.push(value);
        if change < tol {
            break;
        }
    }
    Ok(BandwidthResult {
        allocation: current,
        objective_trace,
        iterations,
    })
}
