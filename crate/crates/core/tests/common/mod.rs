//! Shared instance builders and brute-force oracles for the integration tests.
//!
//! The oracles recompute rates and energies from the gains directly instead
//! of going through the library's rate code.

#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use uavd2d::channel::ChannelSnapshot;
use uavd2d::problem::{SlotProblem, UavTerms};
use uavd2d::rates::{Allocation, Association};

pub const N0: f64 = 2.5e-25;
pub const B_TOTAL: f64 = 20e6;
pub const USER_CAP: f64 = 0.1;
pub const UAV_CAP: f64 = 0.316_227_766;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn log_uniform(r: &mut impl Rng, lo: f64, hi: f64) -> f64 {
    (r.random_range(lo.ln()..=hi.ln())).exp()
}

/// Random one-UAV slot with `n` direct and `m` relay pairs. Gains are drawn
/// from ranges typical of the reference geometry; the UAV is airborne.
pub fn tiny_problem(r: &mut impl Rng, n: usize, m: usize) -> SlotProblem {
    let mut d2d = vec![0.0; n * n];
    for k in 0..n {
        for j in 0..n {
            d2d[k * n + j] = if k == j {
                log_uniform(r, 1e-9, 1e-6)
            } else {
                log_uniform(r, 1e-12, 1e-8)
            };
        }
    }
    let up: Vec<f64> = (0..m).map(|_| log_uniform(r, 1e-11, 1e-7)).collect();
    let down: Vec<f64> = (0..m).map(|_| log_uniform(r, 1e-11, 1e-7)).collect();
    let snapshot = ChannelSnapshot::from_gains(n, m, 1, &d2d, &up, &down).unwrap();
    SlotProblem {
        tau: 1.0,
        noise_psd: N0,
        total_bandwidth: B_TOTAL,
        snapshot,
        direct_caps: vec![USER_CAP; n],
        relay_caps: vec![USER_CAP; m],
        uavs: vec![UavTerms {
            max_tx_power: UAV_CAP,
            alpha: 4.0,
            beta: 6.8,
            gate: 1.0,
            flight_power: log_uniform(r, 0.05, 30.0),
            idle: false,
        }],
    }
}

/// Every relay pair on UAV 0, half the peak powers, band split at `share`.
pub fn tiny_allocation(problem: &SlotProblem, share: f64) -> Allocation {
    let n = problem.num_direct();
    let m = problem.num_relay();
    let b = problem.total_bandwidth;
    let (bd, br) = match (n > 0, m > 0) {
        (true, true) => (share * b, (1.0 - share) * b / m as f64),
        (true, false) => (b, 0.0),
        _ => (0.0, b / m.max(1) as f64),
    };
    Allocation {
        bd,
        br: vec![br; m],
        d2d_powers: vec![0.5 * USER_CAP; n],
        uplink_powers: vec![0.5 * USER_CAP; m],
        downlink_powers: vec![0.5 * UAV_CAP / m.max(1) as f64; m],
        assoc: Association(vec![Some(0); m]),
    }
}

fn shannon(b: f64, s: f64, x: f64) -> f64 {
    if s <= 0.0 {
        return 0.0;
    }
    b * (1.0 + s / (x + b * N0)).log2()
}

/// Minimum rate over all pairs, recomputed from scratch. Single UAV, every
/// relay pair associated with it.
pub fn oracle_min_rate(p: &SlotProblem, bd: f64, br: &[f64], pd: &[f64], pu: &[f64], pl: &[f64]) -> f64 {
    let snap = &p.snapshot;
    let n = pd.len();
    let mut worst = f64::INFINITY;
    for j in 0..n {
        let x: f64 = (0..n).filter(|&k| k != j).map(|k| pd[k] * snap.h_d2d(k, j)).sum();
        worst = worst.min(shannon(bd, pd[j] * snap.h_d2d(j, j), x));
    }
    for k in 0..pu.len() {
        let up = shannon(br[k], pu[k] * snap.h_up(k, 0), 0.0);
        let down = shannon(br[k], pl[k] * snap.h_down(0, k), 0.0);
        worst = worst.min(0.5 * up.min(down));
    }
    worst
}

pub fn oracle_energy(p: &SlotProblem, pd: &[f64], pu: &[f64], pl: &[f64]) -> f64 {
    let u = &p.uavs[0];
    let users: f64 = pd.iter().chain(pu).sum();
    p.tau * users + p.tau * u.gate * (u.flight_power + u.alpha * pl.iter().sum::<f64>() + u.beta)
}

pub fn oracle_efficiency(p: &SlotProblem, a: &Allocation) -> f64 {
    let r = oracle_min_rate(p, a.bd, &a.br, &a.d2d_powers, &a.uplink_powers, &a.downlink_powers);
    r / oracle_energy(p, &a.d2d_powers, &a.uplink_powers, &a.downlink_powers)
}

/// Grid search over every transmit power at the bandwidths of `alloc`.
/// A log-spaced global pass is followed by zoomed passes around the best cell.
pub fn power_grid_oracle(p: &SlotProblem, alloc: &Allocation) -> f64 {
    let n = p.num_direct();
    let m = p.num_relay();
    let mut caps = vec![USER_CAP; n];
    caps.extend(vec![USER_CAP; m]);
    caps.extend(vec![UAV_CAP; m]);
    let dims = caps.len();
    let score = |x: &[f64]| {
        let pd = &x[..n];
        let pu = &x[n..n + m];
        let pl = &x[n + m..];
        if pl.iter().sum::<f64>() > UAV_CAP * (1.0 + 1e-12) {
            return f64::NEG_INFINITY;
        }
        oracle_min_rate(p, alloc.bd, &alloc.br, pd, pu, pl) / oracle_energy(p, pd, pu, pl)
    };
    // Log10 of power / cap in [-6, 0].
    let mut lo = vec![-6.0; dims];
    let mut hi = vec![0.0; dims];
    let mut best = f64::NEG_INFINITY;
    let mut best_at = vec![0.0; dims];
    for g in [40usize, 15, 15, 15, 15] {
        let total = g.pow(dims as u32);
        let mut x = vec![0.0; dims];
        for idx in 0..total {
            let mut rest = idx;
            for d in 0..dims {
                let i = rest % g;
                rest /= g;
                let e = lo[d] + (hi[d] - lo[d]) * i as f64 / (g - 1) as f64;
                x[d] = caps[d] * 10f64.powf(e);
            }
            let v = score(&x);
            if v > best {
                best = v;
                best_at = x.iter().zip(&caps).map(|(v, c)| (v / c).log10()).collect();
            }
        }
        for d in 0..dims {
            let step = (hi[d] - lo[d]) / (g - 1) as f64;
            lo[d] = (best_at[d] - 2.0 * step).max(-6.0);
            hi[d] = (best_at[d] + 2.0 * step).min(0.0);
        }
    }
    best
}

/// Grid search over the D2D band and a single relay subband at the powers of
/// `alloc`, with zoomed refinement.
pub fn bandwidth_grid_oracle(p: &SlotProblem, alloc: &Allocation) -> f64 {
    let b = p.total_bandwidth;
    let e = oracle_energy(p, &alloc.d2d_powers, &alloc.uplink_powers, &alloc.downlink_powers);
    let score = |bd: f64, br: f64| {
        oracle_min_rate(p, bd, &[br], &alloc.d2d_powers, &alloc.uplink_powers, &alloc.downlink_powers) / e
    };
    let (mut lo, mut hi) = ((0.0, 0.0), (b, b));
    let mut best = (f64::NEG_INFINITY, 0.0, 0.0);
    for _ in 0..4 {
        let g = 400;
        for i in 0..=g {
            let bd = lo.0 + (hi.0 - lo.0) * i as f64 / g as f64;
            for j in 0..=g {
                let br = lo.1 + (hi.1 - lo.1) * j as f64 / g as f64;
                if bd + br > b {
                    continue;
                }
                let v = score(bd, br);
                if v > best.0 {
                    best = (v, bd, br);
                }
            }
        }
        let (sd, sr) = ((hi.0 - lo.0) / g as f64, (hi.1 - lo.1) / g as f64);
        lo = ((best.1 - 2.0 * sd).max(0.0), (best.2 - 2.0 * sr).max(0.0));
        hi = ((best.1 + 2.0 * sd).min(b), (best.2 + 2.0 * sr).min(b));
    }
    best.0
}
