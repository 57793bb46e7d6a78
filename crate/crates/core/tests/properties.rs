//! Property tests of the model invariants.

mod common;

use proptest::prelude::*;

use uavd2d::bandwidth::solve_bandwidth;
use uavd2d::channel::{self, air_ground_path_loss, los_probability};
use uavd2d::energy::{self, hover_power, slot_energy, BatteryLedger, SlotEnergy};
use uavd2d::power::{sca_power_loop, PowerProgram};
use uavd2d::problem::SlotProblem;
use uavd2d::rates::{self, d2d_rate, evaluate_rates};
use uavd2d::rus::{associate_best_channel, evaluate_candidate, rus_step, RusConfig, SlotContext, SolverConfig};
use uavd2d::scenario::{load_scenario, write_scenario, RadioConstants, Scenario, SynthesisOptions};
use uavd2d::sim::{run_episode, Aggregates, Mode, RunConfig};
use uavd2d::Vec3;

use common::*;

fn one_slot(n: usize, m: usize, l: usize, seed: u64) -> Scenario {
    SynthesisOptions {
        num_slots: 1,
        ..SynthesisOptions::default()
    }
    .build(n, m, l, seed)
    .unwrap()
}

fn problem_at_start(s: &Scenario) -> SlotProblem {
    let pos = s.initial_positions();
    SlotProblem::new(s, &pos, &vec![0.0; pos.len()], 0).unwrap()
}

fn cheap() -> ProptestConfig {
    ProptestConfig::with_cases(48)
}

proptest! {
    #![proptest_config(cheap())]

    #[test]
    fn synthesized_scenarios_validate_and_round_trip(n in 0usize..6, m in 0usize..6, l in 1usize..6, seed in 0u64..1000) {
        let s = SynthesisOptions { num_slots: 4, ..SynthesisOptions::default() }.build(n, m, l, seed).unwrap();
        prop_assert!(s.validate().is_ok());
        prop_assert!(s.validate().is_ok());
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.json");
        write_scenario(&s, &path).unwrap();
        let back = load_scenario(&path).unwrap();
        prop_assert_eq!(&back, &s);
        prop_assert_eq!(back.digest(), s.digest());
        for p in &s.pairs {
            for w in p.src_trace.windows(2).chain(p.dst_trace.windows(2)) {
                prop_assert!(w[0].distance(w[1]) <= s.user_speed_cap * s.slot_duration() * (1.0 + 1e-12));
            }
        }
    }

    #[test]
    fn los_probability_increases_with_elevation(a in 0.0f64..90.0, b in 0.0f64..90.0) {
        prop_assume!(a < b);
        let r = RadioConstants::with_defaults();
        prop_assert!(los_probability(a, r.nu1, r.nu2) < los_probability(b, r.nu1, r.nu2));
    }

    #[test]
    fn averaged_loss_sits_between_los_and_nlos(d in 1.0f64..2000.0, theta in 0.0f64..90.0) {
        let r = RadioConstants::with_defaults();
        let pl = air_ground_path_loss(d, &r, theta).unwrap();
        let fs = (4.0 * std::f64::consts::PI * d / r.wavelength).powi(2);
        prop_assert!(pl >= (r.xi_los() * fs).max(1.0) * (1.0 - 1e-12));
        prop_assert!(pl <= (r.xi_nlos() * fs).max(1.0) * (1.0 + 1e-12));
    }

    #[test]
    fn gains_are_inverse_losses_and_shift_invariant(seed in 0u64..500, dx in -1e3f64..1e3, dy in -1e3f64..1e3) {
        let s = one_slot(3, 3, 3, seed);
        let mut uavs = s.initial_positions();
        uavs[0] = Vec3::new(310.0, 290.0, 45.0);
        let snap = channel::snapshot(&s, &uavs, 0).unwrap();
        let shift = Vec3::new(dx, dy, 0.0);
        let mut moved = s.clone();
        for p in &mut moved.pairs {
            for q in p.src_trace.iter_mut().chain(p.dst_trace.iter_mut()) {
                *q = *q + shift;
            }
        }
        let moved_uavs: Vec<Vec3> = uavs.iter().map(|&u| u + shift).collect();
        let other = channel::snapshot(&moved, &moved_uavs, 0).unwrap();
        let r = &s.radio;
        for m in 0..3 {
            for l in 0..3 {
                let g = snap.uplink(m, l);
                let pl = air_ground_path_loss(g.distance, r, g.elevation_deg.unwrap()).unwrap();
                prop_assert!((g.gain * pl - 1.0).abs() < 1e-12);
                prop_assert!(g.gain > 0.0 && g.gain <= 1.0);
                prop_assert!((other.h_up(m, l) - g.gain).abs() <= 1e-9 * g.gain);
                prop_assert!((other.h_down(l, m) - snap.h_down(l, m)).abs() <= 1e-9 * snap.h_down(l, m));
            }
        }
        for k in 0..3 {
            for j in 0..3 {
                prop_assert!((other.h_d2d(k, j) - snap.h_d2d(k, j)).abs() <= 1e-9 * snap.h_d2d(k, j));
            }
        }
    }

    #[test]
    fn ledger_telescopes(steps in prop::collection::vec((0.0f64..400.0, 0.0f64..50.0), 1..40), start in 2e3f64..1e4) {
        let mut ledger = BatteryLedger::new(&[start], 15e3).unwrap();
        for (c, ch) in steps {
            let headroom = ledger.charge_headroom(0, c);
            if c > ledger.level(0) {
                let overdraw = [SlotEnergy { consumed: c, charged: 0.0 }];
                prop_assert!(ledger.step(&overdraw).is_err());
                break;
            }
            ledger.step(&[SlotEnergy { consumed: c, charged: ch.min(headroom) }]).unwrap();
        }
        let h = ledger.history(0);
        let net: f64 = ledger.energies(0).iter().map(|e| e.charged - e.consumed).sum();
        prop_assert!((h[h.len() - 1] - (start + net)).abs() <= 1e-9 * start);
        prop_assert!(h.iter().all(|&x| (0.0..=15e3).contains(&x)));
    }

    #[test]
    fn hover_power_is_affine_in_speed(v in 0.0f64..15.0) {
        let s = one_slot(0, 0, 1, 0);
        let spec = &s.uavs[0];
        let env = &s.energy;
        let p = |v: f64| hover_power(spec, v, env).unwrap();
        let h = 1e-3;
        let lo = (v - h).max(0.0);
        let hi = (v + h).min(spec.max_speed);
        let slope = (p(hi) - p(lo)) / (hi - lo);
        let expect = (spec.power_full_speed - spec.power_static) / spec.max_speed;
        prop_assert!((slope - expect).abs() <= 1e-6 * expect.abs().max(1.0));
    }

    #[test]
    fn own_power_and_band_help_interference_hurts(
        seed in 0u64..1000,
        scale in 1.0f64..10.0,
    ) {
        let mut r = rng(seed);
        let p = tiny_problem(&mut r, 3, 0);
        let mut a = tiny_allocation(&p, 1.0);
        for x in &mut a.d2d_powers {
            *x = USER_CAP * log_uniform(&mut r, 1e-3, 1.0) / scale;
        }
        let base: Vec<f64> = (0..3).map(|n| d2d_rate(n, &a, &p.snapshot, N0).unwrap()).collect();
        let mut louder = a.clone();
        louder.d2d_powers[0] *= scale;
        prop_assert!(d2d_rate(0, &louder, &p.snapshot, N0).unwrap() >= base[0]);
        for n in 1..3 {
            prop_assert!(d2d_rate(n, &louder, &p.snapshot, N0).unwrap() <= base[n]);
        }
        let mut wider = a.clone();
        wider.bd *= 0.5;
        for n in 0..3 {
            prop_assert!(d2d_rate(n, &wider, &p.snapshot, N0).unwrap() <= base[n]);
        }
    }

    #[test]
    fn common_power_scaling_keeps_noiseless_rates(seed in 0u64..1000, c in 1.0f64..100.0) {
        let mut r = rng(seed);
        let p = tiny_problem(&mut r, 3, 0);
        let a = tiny_allocation(&p, 1.0);
        let mut scaled = a.clone();
        for x in &mut scaled.d2d_powers {
            *x *= c;
        }
        for n in 0..3 {
            let x = d2d_rate(n, &a, &p.snapshot, 0.0).unwrap();
            let y = d2d_rate(n, &scaled, &p.snapshot, 0.0).unwrap();
            prop_assert!((x - y).abs() <= 1e-9 * x);
        }
    }

    #[test]
    fn min_rate_is_the_worst_effective_rate(seed in 0u64..1000, n in 0usize..4, m in 0usize..3) {
        prop_assume!(n + m > 0);
        let mut r = rng(seed);
        let p = tiny_problem(&mut r, n, m);
        let a = tiny_allocation(&p, 0.5);
        let rep = evaluate_rates(&a, &p.snapshot, N0).unwrap();
        let mut all: Vec<f64> = rep.d2d.clone();
        for k in 0..m {
            all.push(rates::df_end_to_end(rep.uplink[k], rep.downlink[k]));
        }
        let worst = all.iter().copied().fold(f64::INFINITY, f64::min);
        prop_assert_eq!(rep.r_min, worst);
        prop_assert!(all.iter().all(|&x| x >= 0.0));
    }

    #[test]
    fn interference_term_is_midpoint_concave_in_band(x in 1e-16f64..1e-8, a in 1e3f64..2e7, b in 1e3f64..2e7) {
        let f = |bd: f64| -bd * (x + bd * N0).log2();
        let scale = f(a).abs().max(f(b).abs());
        prop_assert!(f(0.5 * (a + b)) >= 0.5 * (f(a) + f(b)) - 1e-9 * scale);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn parametric_value_decreases(seed in 0u64..200, n in 1usize..6, m in 0usize..6) {
        let s = one_slot(n, m, 3, seed);
        let p = problem_at_start(&s);
        let idle: Vec<bool> = p.uavs.iter().map(|u| u.idle).collect();
        let a = p.initial_allocation(associate_best_channel(&p.snapshot, &idle));
        let mut prog = PowerProgram::new(&p, &a).unwrap();
        let kappas = [0.0, 1e3, 1e4, 5e4, 1e5, 3e5, 1e6];
        let f: Vec<f64> = kappas.iter().map(|&k| prog.parametric_value(k)).collect();
        prop_assert!(f.windows(2).all(|w| w[1] < w[0]), "{:?}", f);
    }

    #[test]
    fn power_loop_ascends_and_respects_limits(seed in 0u64..200, n in 0usize..6, m in 0usize..6) {
        prop_assume!(n + m > 0);
        let s = one_slot(n, m, 3, seed);
        let p = problem_at_start(&s);
        let idle: Vec<bool> = p.uavs.iter().map(|u| u.idle).collect();
        let a = p.initial_allocation(associate_best_channel(&p.snapshot, &idle));
        let out = sca_power_loop(&p, &a, 10, 1e-3).unwrap();
        for w in out.objective_trace.windows(2) {
            prop_assert!(w[1] >= w[0] * (1.0 - 1e-3));
        }
        let al = &out.allocation;
        prop_assert!(al.d2d_powers.iter().zip(&p.direct_caps).all(|(x, c)| *x >= 0.0 && *x <= c * (1.0 + 1e-12)));
        prop_assert!(al.uplink_powers.iter().zip(&p.relay_caps).all(|(x, c)| *x >= 0.0 && *x <= c * (1.0 + 1e-12)));
        for (l, u) in p.uavs.iter().enumerate() {
            prop_assert!(al.uav_radiated(l) <= u.max_tx_power * (1.0 + 1e-12));
        }
    }

    #[test]
    fn bandwidth_split_fills_the_band(seed in 0u64..200, n in 1usize..6, m in 1usize..6) {
        let s = one_slot(n, m, 3, seed);
        let p = problem_at_start(&s);
        let idle: Vec<bool> = p.uavs.iter().map(|u| u.idle).collect();
        let a = p.initial_allocation(associate_best_channel(&p.snapshot, &idle));
        let out = solve_bandwidth(&p, &a, 10, 1e-3).unwrap();
        let total = out.allocation.total_bandwidth();
        prop_assert!(total <= p.total_bandwidth * (1.0 + 1e-9));
        prop_assert!(p.total_bandwidth - total < 1e-6 * p.total_bandwidth);
        for w in out.objective_trace.windows(2) {
            prop_assert!(w[1] >= w[0] * (1.0 - 1e-3));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn waypoint_search_invariants(seed in 0u64..100) {
        let s = one_slot(3, 3, 2, seed);
        let mut start = s.initial_positions();
        start[0] = Vec3::new(330.0, 450.0, 40.0);
        let battery = vec![8000.0, 8000.0];
        let ctx = SlotContext::new(&s, 0, start.clone(), battery.clone()).unwrap();
        let rus = RusConfig { samples: 4, max_iters: 5, ..RusConfig::default() };
        let solver = SolverConfig::default();
        let stay = evaluate_candidate(&ctx, &start, &solver).unwrap().unwrap();
        let out = rus_step(&ctx, &rus, &solver, 1.0).unwrap();
        prop_assert!(out.best.efficiency.value >= stay.efficiency.value);
        let reach = ctx.reach(0);
        // The radius stays after an improvement and halves after a stall.
        let mut expected = reach;
        let mut prev = stay.efficiency.value;
        for row in &out.log {
            prop_assert!((row.radius - expected).abs() <= 1e-12 * reach);
            expected = if row.best_objective > prev { row.radius } else { 0.5 * row.radius };
            prop_assert!(row.best_objective >= prev);
            prev = row.best_objective;
        }
        for (l, p) in out.best.positions.iter().enumerate() {
            prop_assert!(p.distance(start[l]) <= reach + 1e-9);
            let env = &s.energy;
            if p.distance(env.station) > 0.0 {
                prop_assert!(p.z >= rus.z_min);
            }
            let reserve = energy::return_energy_reserve(&s.uavs[l], *p, env.station, env);
            prop_assert!(reserve + out.best.energies[l].consumed <= battery[l] * (1.0 + 1e-12));
        }
    }
}

#[test]
fn parked_uav_charges_up_to_capacity() {
    let s = one_slot(0, 0, 5, 1);
    let env = &s.energy;
    let spec = &s.uavs[0];
    assert_eq!(spec.initial_position, env.station);
    let mut ledger = BatteryLedger::new(&[env.battery_capacity - 25.0], env.battery_capacity).unwrap();
    for _ in 0..5 {
        let e = slot_energy(spec, env.station, 0.0, 0.0, 1.0, env).unwrap();
        assert_eq!(e.consumed, 0.0);
        let charged = e.charged.min(ledger.charge_headroom(0, 0.0));
        ledger.step(&[SlotEnergy { consumed: 0.0, charged }]).unwrap();
    }
    let h = ledger.history(0);
    assert!(h.windows(2).all(|w| w[1] >= w[0]));
    assert_eq!(*h.last().unwrap(), env.battery_capacity);
}

#[test]
fn far_from_the_dock_nothing_is_charged() {
    let s = one_slot(0, 0, 1, 1);
    let env = &s.energy;
    let far = Vec3::new(0.0, 0.0, 60.0);
    let e = slot_energy(&s.uavs[0], far, 3.0, 1.0, 1.0, env).unwrap();
    assert!(e.consumed > 0.0);
    assert!(e.charged < 1e-4 * env.charge_power);
}

#[test]
fn five_uav_layout_starts_one_on_the_dock() {
    let s = one_slot(2, 2, 5, 3);
    assert_eq!(s.uavs[0].initial_position, Vec3::new(400.0, 400.0, 60.0));
    assert_eq!(s.uavs[0].initial_battery, s.energy.battery_capacity);
}

#[test]
fn aggregates_recompute_from_slots() {
    let s = SynthesisOptions {
        num_slots: 2,
        ..SynthesisOptions::default()
    }
    .build(3, 3, 2, 5)
    .unwrap();
    let cfg = RunConfig {
        rus: RusConfig {
            samples: 3,
            max_iters: 2,
            ..RusConfig::default()
        },
        solver: SolverConfig::default(),
    };
    for mode in [Mode::Proposed, Mode::Uniform] {
        let ep = run_episode(&s, mode, &cfg).unwrap();
        assert_eq!(Aggregates::from_slots(&ep.slots, s.slot_duration()), ep.aggregates);
        let mean_rate = ep.slots.iter().map(|r| r.efficiency.rate).sum::<f64>() / 2.0;
        assert!((ep.aggregates.mean_min_rate - mean_rate).abs() <= 1e-12 * mean_rate);
    }
}
