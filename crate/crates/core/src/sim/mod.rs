//! Episodes: advance the slots, pick waypoints and resources, commit the
//! battery ledger and record everything needed for the result tables.

mod output;
mod sweep;

pub use output::{write_episodes, write_sweep};
pub use sweep::{sweep, SweepParam, SweepRow, SweepSpec};

use serde::{Deserialize, Serialize};

use crate::energy::{self, BatteryLedger, SlotEnergy};
use crate::error::{Error, Result};
use crate::geometry::Vec3;
use crate::power::TraceRow;
use crate::problem::{Efficiency, SlotProblem};
use crate::rates::{Allocation, RateReport};
use crate::rus::{associate_best_channel, rus_step, CandidateResult, RusConfig, SearchRow, SlotContext, SolverConfig};
use crate::scenario::Scenario;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Waypoint search plus optimized powers and bandwidths.
    Proposed,
    /// UAVs hold position; full user power, equal shares of band and UAV power.
    Uniform,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Proposed => "proposed",
            Mode::Uniform => "uniform",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub rus: RusConfig,
    pub solver: SolverConfig,
}

/// One UAV's slot: where it ended up and what it spent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct UavSlot {
    pub position: Vec3,
    pub speed: f64,
    pub homing: bool,
    pub consumed: f64,
    pub charged: f64,
    /// Stored energy after the slot.
    pub level: f64,
}

#[derive(Debug, Clone)]
pub struct SlotRecord {
    pub slot: usize,
    pub efficiency: Efficiency,
    pub allocation: Allocation,
    pub rates: RateReport,
    pub uavs: Vec<UavSlot>,
    /// Power/bandwidth alternation rounds of the chosen candidate.
    pub rounds: usize,
    /// Candidates scored during the waypoint search.
    pub evaluations: usize,
    pub solver_trace: Vec<TraceRow>,
}

/// Episode means of the per-slot metrics.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct Aggregates {
    /// bit/s
    pub mean_min_rate: f64,
    /// J/s
    pub mean_energy_rate: f64,
    /// bit/J
    pub mean_efficiency: f64,
}

impl Aggregates {
    pub fn from_slots(slots: &[SlotRecord], tau: f64) -> Self {
        let n = slots.len().max(1) as f64;
        let sum = |f: &dyn Fn(&SlotRecord) -> f64| slots.iter().map(f).sum::<f64>() / n;
        Self {
            mean_min_rate: sum(&|s| s.efficiency.rate),
            mean_energy_rate: sum(&|s| s.efficiency.energy / tau),
            mean_efficiency: sum(&|s| s.efficiency.value),
        }
    }
}

#[derive(Debug, Clone)]
pub struct EpisodeResult {
    pub digest: String,
    pub mode: Mode,
    pub slots: Vec<SlotRecord>,
    pub aggregates: Aggregates,
    pub ledger: BatteryLedger,
    pub search_log: Vec<SearchRow>,
}

/// Runs every slot of `scenario` in `mode`.
pub fn run_episode(scenario: &Scenario, mode: Mode, cfg: &RunConfig) -> Result<EpisodeResult> {
    scenario.validate()?;
    let initial: Vec<f64> = scenario.uavs.iter().map(|u| u.initial_battery).collect();
    let mut ledger = BatteryLedger::new(&initial, scenario.energy.battery_capacity)?;
    let mut positions = scenario.initial_positions();
    let mut slots = Vec::with_capacity(scenario.num_slots());
    let mut search_log = Vec::new();
    for t in 0..scenario.num_slots() {
        let ctx = SlotContext::new(scenario, t, positions.clone(), ledger.levels())?;
        let (chosen, evaluations) = match mode {
            Mode::Proposed => {
                let out = rus_step(&ctx, &cfg.rus, &cfg.solver, 1.0)?;
                search_log.extend(out.log);
                (out.best, out.evaluations)
            }
            Mode::Uniform => (uniform_slot(ctx.clone())?, 1),
        };
        let energies = chosen.energies.clone();
        ledger.step(&energies)?;
        let uavs = (0..positions.len())
            .map(|l| UavSlot {
                position: chosen.positions[l],
                speed: chosen.speeds[l],
                homing: ctx.homing[l],
                consumed: energies[l].consumed,
                charged: energies[l].charged,
                level: ledger.level(l),
            })
            .collect();
        positions = chosen.positions.clone();
        slots.push(SlotRecord {
            slot: t,
            efficiency: chosen.efficiency,
            allocation: chosen.allocation,
            rates: chosen.rates,
            uavs,
            rounds: chosen.rounds,
            evaluations,
            solver_trace: chosen.solver_trace,
        });
    }
    let aggregates = Aggregates::from_slots(&slots, scenario.slot_duration());
    Ok(EpisodeResult {
        digest: scenario.digest(),
        mode,
        slots,
        aggregates,
        ledger,
        search_log,
    })
}

/// Equal-share slot at held positions. A UAV whose reserve would break
/// heads home instead.
fn uniform_slot(mut ctx: SlotContext) -> Result<CandidateResult> {
    let scenario = ctx.scenario;
    let env = &scenario.energy;
    let tau = scenario.slot_duration();
    loop {
        let positions: Vec<Vec3> = (0..ctx.start.len())
            .map(|l| if ctx.homing[l] { ctx.homing_waypoint(l) } else { ctx.start[l] })
            .collect();
        let speeds: Vec<f64> = positions
            .iter()
            .zip(&ctx.start)
            .map(|(a, b)| a.distance(*b) / tau)
            .collect();
        let mut problem = SlotProblem::new(scenario, &positions, &speeds, ctx.slot)?;
        for l in 0..positions.len() {
            if ctx.homing[l] {
                problem.set_idle(l);
            }
        }
        let idle: Vec<bool> = problem.uavs.iter().map(|u| u.idle).collect();
        let allocation = problem.uniform_allocation(associate_best_channel(&problem.snapshot, &idle));
        let mut energies = Vec::with_capacity(positions.len());
        let mut short = None;
        for (l, u) in problem.uavs.iter().enumerate() {
            let consumed = problem.uav_energy(&allocation, l);
            let reserve = energy::return_energy_reserve(&scenario.uavs[l], positions[l], env.station, env);
            if !ctx.homing[l] && reserve + consumed > ctx.battery[l] {
                short = Some(l);
                break;
            }
            let headroom = (env.battery_capacity - (ctx.battery[l] - consumed)).max(0.0);
            let charged = (tau * (1.0 - u.gate) * env.charge_power).min(headroom);
            energies.push(SlotEnergy { consumed, charged });
        }
        if let Some(l) = short {
            if ctx.start[l].distance(env.station) <= env.dock_radius {
                return Err(Error::Infeasible(format!("slot {}: docked UAV {l} cannot cover its draw", ctx.slot)));
            }
            ctx.homing[l] = true;
            continue;
        }
        let efficiency = problem.objective(&allocation)?;
        let rates = problem.rates(&allocation)?;
        return Ok(CandidateResult {
            positions,
            speeds,
            allocation,
            rates,
            efficiency,
            energies,
            objective_trace: vec![efficiency.value],
            rounds: 0,
            solver_trace: Vec::new(),
        });
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::{Scenario, SynthesisOptions};

    fn short(n: usize, m: usize, l: usize, seed: u64) -> Scenario {
        let opts = SynthesisOptions {
            num_slots: 3,
            ..SynthesisOptions::default()
        };
        opts.build(n, m, l, seed).unwrap()
    }

    fn quick() -> RunConfig {
        RunConfig {
            rus: RusConfig {
                samples: 3,
                max_iters: 2,
                ..RusConfig::default()
            },
            solver: SolverConfig::default(),
        }
    }

    #[test]
    fn empty_scenario_has_zero_efficiency_and_charges_the_dock() {
        let mut s = short(0, 0, 5, 3);
        s.uavs[0].initial_battery = s.energy.battery_capacity - 15.0;
        for mode in [Mode::Proposed, Mode::Uniform] {
            let out = run_episode(&s, mode, &quick()).unwrap();
            assert!(out.slots.iter().all(|r| r.efficiency.value == 0.0));
            let full = out.ledger.history(0);
            assert_eq!(*full.last().unwrap(), s.energy.battery_capacity);
        }
    }

    #[test]
    fn ledger_telescopes() {
        let s = short(3, 3, 3, 4);
        let out = run_episode(&s, Mode::Proposed, &quick()).unwrap();
        for l in 0..3 {
            let h = out.ledger.history(l);
            let net: f64 = out.ledger.energies(l).iter().map(|e| e.charged - e.consumed).sum();
            assert!((h[h.len() - 1] - (h[0] + net)).abs() <= 1e-9 * h[0].max(1.0));
        }
    }
}
