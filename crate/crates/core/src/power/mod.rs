//! Transmit-power optimization at fixed bandwidths, association and UAV
//! positions: successive linearization of the D2D interference term and a
//! bracketed search on the efficiency ratio.
//!
//! For a fixed common rate target `R`, the cheapest powers decouple into a
//! D2D part (a monotone fixed point, see [`d2d`]) and closed-form relay
//! hops, so the parametric program `F(kappa) = max R - kappa * E` reduces to
//! a concave one-dimensional search over `R`.

mod d2d;
mod relay;

use std::f64::consts::LN_2;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::numeric::illinois;
use crate::problem::{Efficiency, SlotProblem};
use crate::rates::Allocation;

use d2d::D2dSurrogate;
use relay::{budget_limit, RelayLink};

/// Affine function `constant + sum_k slopes[k] * (p[k] - expansion[k])`.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineMinorant {
    pub constant: f64,
    pub expansion: Vec<f64>,
    pub slopes: Vec<f64>,
}

impl AffineMinorant {
    pub fn eval(&self, p: &[f64]) -> f64 {
        self.constant
            + self
                .slopes
                .iter()
                .zip(p.iter().zip(&self.expansion))
                .map(|(s, (x, e))| s * (x - e))
                .sum::<f64>()
    }
}

/// The convex interference term of D2D pair `n`,
/// `-bd * log2(sum_{k != n} p_k h_kn + bd * n0)`.
pub fn interference_term(n: usize, powers: &[f64], bd: f64, gain: impl Fn(usize, usize) -> f64, n0: f64) -> f64 {
    let psi: f64 = bd * n0
        + (0..powers.len())
            .filter(|&k| k != n)
            .map(|k| powers[k] * gain(k, n))
            .sum::<f64>();
    -bd * psi.log2()
}

/// Tangent of [`interference_term`] at `expansion`; lies below it everywhere.
pub fn taylor_lower_bound_interference(
    n: usize,
    expansion: &[f64],
    bd: f64,
    gain: impl Fn(usize, usize) -> f64,
    n0: f64,
) -> AffineMinorant {
    let psi: f64 = bd * n0
        + (0..expansion.len())
            .filter(|&k| k != n)
            .map(|k| expansion[k] * gain(k, n))
            .sum::<f64>();
    let slopes = (0..expansion.len())
        .map(|k| if k == n { 0.0 } else { -bd * gain(k, n) / (LN_2 * psi) })
        .collect();
    AffineMinorant {
        constant: -bd * psi.log2(),
        expansion: expansion.to_vec(),
        slopes,
    }
}

/// Optimum of the parametric program at one `kappa`.
#[derive(Debug, Clone, PartialEq)]
pub struct InnerSolution {
    pub kappa: f64,
    /// `rate - kappa * energy`.
    pub value: f64,
    /// Common rate target reached by every pair under the linearization.
    pub rate: f64,
    pub energy: f64,
    pub d2d_powers: Vec<f64>,
    pub uplink_powers: Vec<f64>,
    pub downlink_powers: Vec<f64>,
}

impl InnerSolution {
    pub fn ratio(&self) -> f64 {
        Efficiency::new(self.rate, self.energy).value
    }
}

/// One row of the solver trace.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TraceRow {
    pub iteration: usize,
    pub kappa: f64,
    #[serde(rename = "F")]
    pub f: f64,
    pub r_min: f64,
    pub denominator: f64,
}

/// Convexified power program built around one expansion point.
#[derive(Debug, Clone)]
pub struct PowerProgram {
    tau: f64,
    fixed_energy: f64,
    m: usize,
    d2d: Option<D2dSurrogate>,
    relays: Vec<RelayLink>,
    r_max: f64,
    /// Upper bound on any achievable efficiency.
    kappa_ceiling: f64,
}

impl PowerProgram {
    /// Linearizes the D2D interference at the powers in `alloc`; bandwidths
    /// and association are taken from `alloc` and held fixed.
    pub fn new(problem: &SlotProblem, alloc: &Allocation) -> Result<Self> {
        let n = problem.num_direct();
        let m = problem.num_relay();
        let snap = &problem.snapshot;
        let n0 = problem.noise_psd;
        if n > 0 && !(alloc.bd > 0.0) {
            return Err(Error::Solver("direct pairs need a positive D2D band".into()));
        }
        let mut d2d = (n > 0).then(|| {
            D2dSurrogate::new(
                alloc.bd,
                n0,
                problem.tau,
                |k, j| snap.h_d2d(k, j),
                &alloc.d2d_powers,
                &problem.direct_caps,
            )
        });
        let mut relays = Vec::new();
        let mut orphan = false;
        for k in 0..m {
            match alloc.assoc.uav_of(k) {
                Some(l) if alloc.br[k] > 0.0 => {
                    let u = &problem.uavs[l];
                    relays.push(RelayLink {
                        pair: k,
                        uav: l,
                        br: alloc.br[k],
                        up_unit: alloc.br[k] * n0 / snap.h_up(k, l),
                        down_unit: alloc.br[k] * n0 / snap.h_down(l, k),
                        cap: problem.relay_caps[k],
                        down_price: problem.tau * u.gate * u.alpha,
                    });
                }
                _ => orphan = true,
            }
        }
        let mut r_max = if n + m == 0 || orphan { 0.0 } else { f64::INFINITY };
        for link in &relays {
            r_max = r_max.min(link.uplink_limit());
        }
        for (l, u) in problem.uavs.iter().enumerate() {
            let served: Vec<&RelayLink> = relays.iter().filter(|r| r.uav == l).collect();
            if !served.is_empty() {
                r_max = r_max.min(budget_limit(&served, u.max_tx_power));
            }
        }
        if let Some(s) = d2d.as_mut() {
            if r_max > 0.0 {
                r_max = r_max.min(s.max_rate());
            }
        }
        if !r_max.is_finite() || r_max < 0.0 {
            r_max = 0.0;
        }
        // Every pair's rate is at most h p / (n0 ln2) and costs at least tau p.
        let kappa_ceiling = snap_max_gain(problem) / (problem.tau * n0 * LN_2);
        Ok(Self {
            tau: problem.tau,
            fixed_energy: problem.fixed_energy(),
            m,
            d2d,
            relays,
            r_max,
            kappa_ceiling,
        })
    }

    /// Largest common rate the linearized constraints admit.
    pub fn max_rate(&self) -> f64 {
        self.r_max
    }

    pub fn fixed_energy(&self) -> f64 {
        self.fixed_energy
    }

    fn relay_cost(&self, rate: f64) -> (f64, f64) {
        self.relays.iter().fold((0.0, 0.0), |(c, s), l| {
            let (ci, si) = l.cost(rate, self.tau);
            (c + ci, s + si)
        })
    }

    fn assemble(&self, kappa: f64, rate: f64, d2d_powers: Vec<f64>, d2d_cost: f64) -> InnerSolution {
        let mut uplink = vec![0.0; self.m];
        let mut downlink = vec![0.0; self.m];
        for l in &self.relays {
            uplink[l.pair] = l.uplink_power(rate).min(l.cap);
            downlink[l.pair] = l.downlink_power(rate);
        }
        let energy = self.fixed_energy + d2d_cost + self.relay_cost(rate).0;
        InnerSolution {
            kappa,
            value: rate - kappa * energy,
            rate,
            energy,
            d2d_powers,
            uplink_powers: uplink,
            downlink_powers: downlink,
        }
    }

    /// Solves `max R - kappa * E(p)` over the convexified feasible set.
    pub fn solve_inner_convex(&mut self, kappa: f64) -> InnerSolution {
        if self.d2d.is_some() {
            return self.solve_along_curve(kappa);
        }
        let r_max = self.r_max;
        let gain = |s: &Self, r: f64| 1.0 - kappa * s.relay_cost(r).1;
        let rate = if r_max <= 0.0 {
            0.0
        } else if gain(self, r_max) >= 0.0 {
            r_max
        } else if gain(self, 0.0) <= 0.0 {
            0.0
        } else {
            let (g0, g1) = (gain(self, 0.0), gain(self, r_max));
            illinois(|r| gain(self, r), 0.0, g0, r_max, g1, 1e-12 * r_max, 200)
        };
        self.assemble(kappa, rate, vec![], 0.0)
    }

    /// With direct pairs the search runs along the D2D solution curve, which
    /// stays smooth where the rate target folds back.
    fn solve_along_curve(&mut self, kappa: f64) -> InnerSolution {
        let r_max = self.r_max;
        let s = self.d2d.as_mut().expect("direct pairs present");
        if r_max <= 0.0 {
            let d = s.at(0.0);
            return self.assemble(kappa, 0.0, d.powers, d.cost);
        }
        let t_hi = if r_max < s.max_rate() {
            s.solve(r_max).map_or(0.0, |d| d.t)
        } else {
            s.top().t
        };
        let slope = |this: &mut Self, t: f64| {
            let d = this.d2d.as_mut().expect("direct pairs present").at(t);
            let relay = this.relay_cost(d.rate).1;
            d.drate_dt * (1.0 - kappa * relay) - kappa * d.dcost_dt
        };
        let g_hi = slope(self, t_hi);
        let t = if g_hi >= 0.0 {
            t_hi
        } else {
            let g0 = slope(self, 0.0);
            if g0 <= 0.0 {
                0.0
            } else {
                illinois(|t| slope(self, t), 0.0, g0, t_hi, g_hi, 1e-13 * t_hi.max(1.0), 200)
            }
        };
        let d = self.d2d.as_mut().expect("direct pairs present").at(t);
        // The curve only approximates a relay-limited corner; never exceed it.
        let rate = d.rate.min(r_max);
        self.assemble(kappa, rate, d.powers, d.cost)
    }

    /// `F(kappa)`: optimal value of the parametric program.
    pub fn parametric_value(&mut self, kappa: f64) -> f64 {
        self.solve_inner_convex(kappa).value
    }
}

fn snap_max_gain(problem: &SlotProblem) -> f64 {
    problem.snapshot.max_gain().max(f64::MIN_POSITIVE)
}

/// Result of the ratio search.
#[derive(Debug, Clone)]
pub struct BisectionResult {
    pub kappa: f64,
    pub solution: InnerSolution,
    pub trace: Vec<TraceRow>,
}

/// Root of `F(kappa)` within relative tolerance `tol`.
///
/// The bracket `[lo, hi]` always has `F(lo) >= 0 > F(hi)`. Each evaluation's
/// maximizer also tightens `lo` to its own ratio, and when the fixed energy
/// is positive `F(lo) / E_fixed` bounds how far the root can sit above `lo`.
pub fn bisect_efficiency(program: &mut PowerProgram, tol: f64) -> BisectionResult {
    let mut trace = Vec::new();
    let record = |trace: &mut Vec<TraceRow>, s: &InnerSolution| {
        trace.push(TraceRow {
            iteration: trace.len(),
            kappa: s.kappa,
            f: s.value,
            r_min: s.rate,
            denominator: s.energy,
        })
    };
    let first = program.solve_inner_convex(0.0);
    record(&mut trace, &first);
    let mut best = first.clone();
    let mut lo = best.ratio();
    let e_min = program.fixed_energy();
    let mut hi = program.kappa_ceiling;
    if e_min > 0.0 {
        hi = hi.min(program.max_rate() / e_min);
    }
    if !(lo > 0.0) {
        return BisectionResult {
            kappa: 0.0,
            solution: best,
            trace,
        };
    }
    hi = hi.max(lo);
    let mut dinkelbach = true;
    for _ in 0..200 {
        let width = hi - lo;
        if width <= tol * hi {
            break;
        }
        let kappa = if dinkelbach { lo } else { lo + 0.5 * width };
        let s = program.solve_inner_convex(kappa);
        record(&mut trace, &s);
        let ratio = s.ratio();
        if s.value < 0.0 {
            hi = hi.min(kappa);
        } else {
            if e_min > 0.0 {
                hi = hi.min(kappa + s.value / e_min);
            }
            if s.value <= 1e-12 * s.rate {
                // F vanishes here, so this is the root.
                hi = hi.min(kappa.max(ratio));
            }
        }
        if ratio > lo {
            lo = ratio;
            best = s;
        }
        hi = hi.max(lo);
        // Stay with Dinkelbach steps while they at least halve the bracket.
        dinkelbach = !dinkelbach || (hi - lo) < 0.5 * width;
    }
    BisectionResult {
        kappa: lo,
        solution: best,
        trace,
    }
}

/// Output of the power loop.
#[derive(Debug, Clone)]
pub struct PowerLoopResult {
    pub allocation: Allocation,
    /// True efficiency at the start and after every accepted iteration.
    pub objective_trace: Vec<f64>,
    pub iterations: usize,
    pub solver_trace: Vec<TraceRow>,
}

/// Rebuilds the linearization at the current powers and re-solves until the
/// efficiency stops improving by more than `tol` (relative).
pub fn sca_power_loop(
    problem: &SlotProblem,
    alloc: &Allocation,
    max_iters: usize,
    tol: f64,
) -> Result<PowerLoopResult> {
    let mut current = alloc.clone();
    let mut value = problem.objective(&current)?.value;
    let mut objective_trace = vec![value];
    let mut solver_trace = Vec::new();
    let mut iterations = 0;
    for _ in 0..max_iters {
        iterations += 1;
        let mut program = PowerProgram::new(problem, &current)?;
        let result = bisect_efficiency(&mut program, 1e-6);
        let offset = solver_trace.len();
        solver_trace.extend(result.trace.iter().map(|r| TraceRow {
            iteration: offset + r.iteration,
            ..*r
        }));
        let mut next = current.clone();
        next.d2d_powers = result.solution.d2d_powers.clone();
        next.uplink_powers = result.solution.uplink_powers.clone();
        next.downlink_powers = result.solution.downlink_powers.clone();
        clip_powers(problem, &mut next);
        let next_value = problem.objective(&next)?.value;
        if !(next_value > value) {
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
    Ok(PowerLoopResult {
        allocation: current,
        objective_trace,
        iterations,
        solver_trace,
    })
}

/// Removes rounding excursions above the peak powers and budgets.
fn clip_powers(problem: &SlotProblem, alloc: &mut Allocation) {
    for (p, c) in alloc.d2d_powers.iter_mut().zip(&problem.direct_caps) {
        *p = p.clamp(0.0, *c);
    }
    for (p, c) in alloc.uplink_powers.iter_mut().zip(&problem.relay_caps) {
        *p = p.clamp(0.0, *c);
    }
    for (l, u) in problem.uavs.iter().enumerate() {
        let total = alloc.uav_radiated(l);
        if total > u.max_tx_power {
            let scale = u.max_tx_power / total;
            for k in 0..alloc.downlink_powers.len() {
                if alloc.assoc.uav_of(k) == Some(l) {
                    alloc.downlink_powers[k] *= scale;
                }
            }
        }
    }
}
