//! Per-slot UAV waypoint and association search: sample candidate waypoints
//! on spheres around the incumbent, score each one by running the power and
//! bandwidth solvers, move to improvements and halve the radius otherwise.

use rand::Rng;
use rand_distr::{Distribution, UnitSphere};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bandwidth::solve_bandwidth;
use crate::channel::ChannelSnapshot;
use crate::energy::{self, SlotEnergy};
use crate::error::Result;
use crate::geometry::Vec3;
use crate::power::{sca_power_loop, TraceRow};
use crate::problem::{Efficiency, SlotProblem};
use crate::rates::{Allocation, Association, RateReport};
use crate::rng;
use crate::scenario::Scenario;

/// Tolerances and iteration caps of the alternating resource solver.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    /// Power/bandwidth alternation rounds.
    pub max_rounds: usize,
    /// Relative objective change that ends the alternation and each inner loop.
    pub tol: f64,
    pub power_iters: usize,
    pub bandwidth_iters: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            max_rounds: 10,
            tol: 1e-3,
            power_iters: 10,
            bandwidth_iters: 10,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RusConfig {
    /// Sphere samples per UAV, not counting the center.
    pub samples: usize,
    pub max_iters: usize,
    /// Search stops once every sphere is smaller than this, m.
    pub min_radius: f64,
    pub z_min: f64,
    pub z_max: f64,
    /// Joint candidate sets larger than this are searched one UAV at a time.
    pub enumeration_limit: usize,
}

impl Default for RusConfig {
    fn default() -> Self {
        Self {
            samples: 10,
            max_iters: 10,
            min_radius: 0.5,
            z_min: 10.0,
            z_max: 120.0,
            enumeration_limit: 2_000,
        }
    }
}

/// `samples` points uniform on the sphere surface, after the center itself.
/// Sampled points below `z_min` are lifted to it; the center is kept as is.
pub fn sample_sphere<R: Rng + ?Sized>(center: Vec3, radius: f64, samples: usize, z_min: f64, rng: &mut R) -> Vec<Vec3> {
    let mut out = Vec::with_capacity(samples + 1);
    out.push(center);
    for _ in 0..samples {
        let [x, y, z]: [f64; 3] = UnitSphere.sample(rng);
        let mut p = Vec3::new(center.x + radius * x, center.y + radius * y, center.z + radius * z);
        p.z = p.z.max(z_min);
        out.push(p);
    }
    out
}

/// Each relay pair goes to the in-service UAV with the best weaker hop.
/// Ties go to the lowest UAV id.
pub fn associate_best_channel(snap: &ChannelSnapshot, idle: &[bool]) -> Association {
    let pairs = (0..snap.num_relay())
        .map(|m| {
            let mut best: Option<(usize, f64)> = None;
            for l in (0..snap.num_uavs()).filter(|&l| !idle[l]) {
                let g = snap.h_up(m, l).min(snap.h_down(l, m));
                if best.is_none_or(|(_, b)| g > b) {
                    best = Some((l, g));
                }
            }
            best.map(|(l, _)| l)
        })
        .collect();
    Association(pairs)
}

/// What a slot's search starts from.
#[derive(Debug, Clone)]
pub struct SlotContext<'a> {
    pub scenario: &'a Scenario,
    pub slot: usize,
    /// Positions at the start of the slot.
    pub start: Vec<Vec3>,
    /// Stored energy at the start of the slot.
    pub battery: Vec<f64>,
    /// UAVs flying home this slot; their waypoint is fixed and they do not relay.
    pub homing: Vec<bool>,
}

impl<'a> SlotContext<'a> {
    pub fn new(scenario: &'a Scenario, slot: usize, start: Vec<Vec3>, battery: Vec<f64>) -> Result<Self> {
        let env = &scenario.energy;
        let tau = scenario.slot_duration();
        let mut homing = Vec::with_capacity(start.len());
        for (l, spec) in scenario.uavs.iter().enumerate() {
            let pos = start[l];
            let docked = pos.distance(env.station) <= env.dock_radius;
            // Hovering in place at the full transmit budget must leave the
            // return reserve intact, otherwise head home.
            let gate = energy::station_gate(pos, env.station, env.station_epsilon);
            let flight = energy::hover_power(spec, 0.0, env)?;
            let stay = tau * gate * (flight + spec.alpha * spec.max_tx_power + spec.beta);
            let reserve = energy::return_energy_reserve(spec, pos, env.station, env);
            homing.push(!docked && reserve + stay > battery[l]);
        }
        Ok(Self {
            scenario,
            slot,
            start,
            battery,
            homing,
        })
    }

    /// Distance UAV `l` can cover this slot.
    pub fn reach(&self, l: usize) -> f64 {
        self.scenario.uavs[l].max_speed * self.scenario.slot_duration()
    }

    /// Where a homing UAV ends the slot.
    pub fn homing_waypoint(&self, l: usize) -> Vec3 {
        self.start[l].step_toward(self.scenario.energy.station, self.reach(l))
    }

    /// Pulls a raw sample into the altitude band, the arena and the reachable ball.
    fn project(&self, l: usize, p: Vec3, cfg: &RusConfig) -> Vec3 {
        let mut p = self.scenario.arena.clamp(p);
        p.z = p.z.clamp(cfg.z_min, cfg.z_max);
        let start = self.start[l];
        let d = p.distance(start);
        let reach = self.reach(l);
        if d > reach {
            start + (p - start) * (reach / d)
        } else {
            p
        }
    }
}

/// A scored joint waypoint with its resource allocation.
#[derive(Debug, Clone)]
pub struct CandidateResult {
    pub positions: Vec<Vec3>,
    pub speeds: Vec<f64>,
    pub allocation: Allocation,
    pub rates: RateReport,
    pub efficiency: Efficiency,
    pub energies: Vec<SlotEnergy>,
    /// Efficiency after each alternation round, starting point first.
    pub objective_trace: Vec<f64>,
    pub rounds: usize,
    pub solver_trace: Vec<TraceRow>,
}

/// Alternates the power and bandwidth solvers from the standard starting point.
pub fn alternate(problem: &SlotProblem, assoc: Association, cfg: &SolverConfig) -> Result<(Allocation, Vec<f64>, Vec<TraceRow>)> {
    let mut alloc = problem.initial_allocation(assoc);
    let mut value = problem.objective(&alloc)?.value;
    let mut trace = vec![value];
    let mut solver_trace = Vec::new();
    for _ in 0..cfg.max_rounds {
        let powers = sca_power_loop(problem, &alloc, cfg.power_iters, cfg.tol)?;
        solver_trace.extend(powers.solver_trace);
        let bands = solve_bandwidth(problem, &powers.allocation, cfg.bandwidth_iters, cfg.tol)?;
        let next = problem.objective(&bands.allocation)?.value;
        if !(next >= value) {
            break;
        }
        let change = (next - value) / value.abs().max(f64::MIN_POSITIVE);
        alloc = bands.allocation;
        value = next;
        trace.push(value);
        if change < cfg.tol {
            break;
        }
    }
    Ok((alloc, trace, solver_trace))
}

/// Scores one joint waypoint. `Ok(None)` means the waypoint breaks a speed
/// or battery-reserve limit.
pub fn evaluate_candidate(ctx: &SlotContext, positions: &[Vec3], cfg: &SolverConfig) -> Result<Option<CandidateResult>> {
    let scenario = ctx.scenario;
    let env = &scenario.energy;
    let tau = scenario.slot_duration();
    let mut speeds = Vec::with_capacity(positions.len());
    for (l, spec) in scenario.uavs.iter().enumerate() {
        let v = positions[l].distance(ctx.start[l]) / tau;
        if v > spec.max_speed * (1.0 + 1e-12) {
            return Ok(None);
        }
        speeds.push(v.min(spec.max_speed));
    }
    let mut problem = SlotProblem::new(scenario, positions, &speeds, ctx.slot)?;
    for l in 0..positions.len() {
        if ctx.homing[l] {
            problem.set_idle(l);
        }
    }
    // Cheap rejection before any solving: flight alone must fit the reserve.
    let reserve: Vec<f64> = scenario
        .uavs
        .iter()
        .zip(positions)
        .map(|(spec, &p)| energy::return_energy_reserve(spec, p, env.station, env))
        .collect();
    for (l, u) in problem.uavs.iter().enumerate() {
        if !ctx.homing[l] && reserve[l] + tau * u.gate * u.flight_power > ctx.battery[l] * (1.0 + 1e-12) {
            return Ok(None);
        }
    }
    let idle: Vec<bool> = problem.uavs.iter().map(|u| u.idle).collect();
    let assoc = associate_best_channel(&problem.snapshot, &idle);
    let (mut allocation, mut objective_trace, solver_trace) = alternate(&problem, assoc.clone(), cfg)?;
    let rounds = objective_trace.len() - 1;
    let mut efficiency = problem.objective(&allocation)?;
    // The equal-share point is always available; never do worse than it.
    let uniform = problem.uniform_allocation(assoc);
    let uniform_eff = problem.objective(&uniform)?;
    if uniform_eff.value > efficiency.value {
        allocation = uniform;
        efficiency = uniform_eff;
        objective_trace.push(efficiency.value);
    }
    let mut energies = Vec::with_capacity(positions.len());
    for (l, u) in problem.uavs.iter().enumerate() {
        let consumed = problem.uav_energy(&allocation, l);
        if !ctx.homing[l] && reserve[l] + consumed > ctx.battery[l] * (1.0 + 1e-12) {
            return Ok(None);
        }
        let headroom = (env.battery_capacity - (ctx.battery[l] - consumed)).max(0.0);
        let charged = (tau * (1.0 - u.gate) * env.charge_power).min(headroom);
        energies.push(SlotEnergy { consumed, charged });
    }
    let rates = problem.rates(&allocation)?;
    Ok(Some(CandidateResult {
        positions: positions.to_vec(),
        speeds,
        allocation,
        rates,
        efficiency,
        energies,
        objective_trace,
        rounds,
        solver_trace,
    }))
}

/// One row of the search log.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SearchRow {
    pub slot: usize,
    pub iteration: usize,
    /// Sphere radius of the first UAV, m.
    pub radius: f64,
    pub best_objective: f64,
    pub positions: Vec<Vec3>,
}

#[derive(Debug, Clone)]
pub struct RusOutcome {
    pub best: CandidateResult,
    pub log: Vec<SearchRow>,
    pub evaluations: usize,
}

fn score(c: &Option<CandidateResult>) -> f64 {
    c.as_ref().map_or(f64::NEG_INFINITY, |c| c.efficiency.value)
}

/// Index of the best scored candidate; ties keep the earliest.
fn pick(results: &[Option<CandidateResult>]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, r) in results.iter().enumerate() {
        if r.is_some() && best.is_none_or(|b| score(r) > score(&results[b])) {
            best = Some(i);
        }
    }
    best
}

fn evaluate_all(ctx: &SlotContext, joints: &[Vec<Vec3>], cfg: &SolverConfig) -> Result<Vec<Option<CandidateResult>>> {
    joints.par_iter().map(|j| evaluate_candidate(ctx, j, cfg)).collect()
}

/// Searches the joint waypoint for one slot. `radius_scale` multiplies the
/// starting sphere radius (one slot of flight at full speed).
pub fn rus_step(ctx: &SlotContext, rus: &RusConfig, solver: &SolverConfig, radius_scale: f64) -> Result<RusOutcome> {
    let l_count = ctx.start.len();
    let mut incumbent: Vec<Vec3> = (0..l_count)
        .map(|l| if ctx.homing[l] { ctx.homing_waypoint(l) } else { ctx.start[l] })
        .collect();
    let mut evaluations = 1;
    let mut best = evaluate_candidate(ctx, &incumbent, solver)?;
    if best.is_none() {
        // Staying put fails the reserve check: send everyone airborne home.
        let env = &ctx.scenario.energy;
        incumbent = (0..l_count)
            .map(|l| {
                if ctx.start[l].distance(env.station) <= env.dock_radius {
                    ctx.start[l]
                } else {
                    ctx.homing_waypoint(l)
                }
            })
            .collect();
        let mut forced = ctx.clone();
        forced.homing = incumbent.iter().zip(&ctx.start).map(|(a, b)| a != b).collect();
        let c = evaluate_candidate(&forced, &incumbent, solver)?.ok_or_else(|| {
            crate::Error::Infeasible(format!("slot {}: no waypoint fits the battery reserve", ctx.slot))
        })?;
        return Ok(RusOutcome {
            best: c,
            log: Vec::new(),
            evaluations: 2,
        });
    }
    let mut best = best.take().expect("checked above");
    let movable: Vec<usize> = (0..l_count).filter(|&l| !ctx.homing[l]).collect();
    let mut scale = radius_scale;
    let mut log = Vec::new();
    for i in 0..rus.max_iters {
        let radii: Vec<f64> = (0..l_count).map(|l| scale * ctx.reach(l)).collect();
        if movable.iter().all(|&l| radii[l] < rus.min_radius) {
            break;
        }
        let mut rng = rng::stream(ctx.scenario.seed, "rus", &[ctx.slot as u64, i as u64]);
        let options: Vec<Vec<Vec3>> = (0..l_count)
            .map(|l| {
                let pts = sample_sphere(best.positions[l], radii[l], rus.samples, rus.z_min, &mut rng);
                if ctx.homing[l] {
                    vec![best.positions[l]]
                } else {
                    let mut out: Vec<Vec3> = pts.into_iter().map(|p| ctx.project(l, p, rus)).collect();
                    out[0] = best.positions[l];
                    out
                }
            })
            .collect();
        let joint_count = options.iter().try_fold(1usize, |acc, o| acc.checked_mul(o.len()));
        let local = match joint_count {
            Some(count) if count <= rus.enumeration_limit => {
                // Every combination except the all-centers one, which is the incumbent.
                let joints: Vec<Vec<Vec3>> = (1..count)
                    .map(|mut idx| {
                        options
                            .iter()
                            .map(|o| {
                                let p = o[idx % o.len()];
                                idx /= o.len();
                                p
                            })
                            .collect()
                    })
                    .collect();
                evaluations += joints.len();
                let results = evaluate_all(ctx, &joints, solver)?;
                pick(&results).and_then(|k| results.into_iter().nth(k).flatten())
            }
            _ => {
                // One UAV at a time, the others held at the running best.
                let mut current: Option<CandidateResult> = None;
                for &l in &movable {
                    let base = current.as_ref().map_or(&best.positions, |c| &c.positions).clone();
                    let joints: Vec<Vec<Vec3>> = options[l][1..]
                        .iter()
                        .map(|&p| {
                            let mut j = base.clone();
                            j[l] = p;
                            j
                        })
                        .collect();
                    evaluations += joints.len();
                    let results = evaluate_all(ctx, &joints, solver)?;
                    if let Some(k) = pick(&results) {
                        let floor = current.as_ref().map_or(best.efficiency.value, |c| c.efficiency.value);
                        if score(&results[k]) > floor {
                            current = results.into_iter().nth(k).flatten();
                        }
                    }
                }
                current
            }
        };
        match local {
            Some(c) if c.efficiency.value > best.efficiency.value => best = c,
            _ => scale *= 0.5,
        }
        log.push(SearchRow {
            slot: ctx.slot,
            iteration: i,
            radius: radii.first().copied().unwrap_or(0.0),
            best_objective: best.efficiency.value,
            positions: best.positions.clone(),
        });
    }
    Ok(RusOutcome { best, log, evaluations })
}
