//! Tidy CSV tables of episode and sweep results.

use std::fs;
use std::path::Path;

use serde::Serialize;

use super::{EpisodeResult, SweepRow};
use crate::error::{Error, Result};

#[derive(Serialize)]
struct SlotLine<'a> {
    mode: &'a str,
    slot: usize,
    min_rate: f64,
    energy: f64,
    efficiency: f64,
    d2d_bandwidth: f64,
    rounds: usize,
    evaluations: usize,
}

#[derive(Serialize)]
struct LedgerLine<'a> {
    mode: &'a str,
    slot: usize,
    uav_id: usize,
    x: f64,
    y: f64,
    z: f64,
    speed: f64,
    homing: bool,
    #[serde(rename = "S_joules")]
    s_joules: f64,
    #[serde(rename = "E_c")]
    e_c: f64,
    #[serde(rename = "E_ch")]
    e_ch: f64,
}

#[derive(Serialize)]
struct RateLine<'a> {
    mode: &'a str,
    slot: usize,
    kind: &'a str,
    pair: usize,
    uav: Option<usize>,
    rate: f64,
    bandwidth: f64,
    tx_power: f64,
    relay_power: Option<f64>,
}

#[derive(Serialize)]
struct AggregateLine<'a> {
    mode: &'a str,
    digest: &'a str,
    slots: usize,
    mean_min_rate: f64,
    mean_energy_rate: f64,
    mean_efficiency: f64,
}

#[derive(Serialize)]
struct TraceLine<'a> {
    mode: &'a str,
    slot: usize,
    iteration: usize,
    kappa: f64,
    #[serde(rename = "F")]
    f: f64,
    #[serde(rename = "R_min")]
    r_min: f64,
    denominator: f64,
}

#[derive(Serialize)]
struct SearchLine {
    slot: usize,
    iteration: usize,
    radius: f64,
    best_objective: f64,
    uav_id: usize,
    x: f64,
    y: f64,
    z: f64,
}

fn write_rows<T: Serialize>(path: &Path, rows: impl IntoIterator<Item = T>) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Writes `slots.csv`, `ledger.csv`, `rates.csv` and `aggregates.csv` into
/// `dir`, plus `solver_trace.csv` and `search_log.csv` when `traces` is set.
pub fn write_episodes(dir: &Path, episodes: &[EpisodeResult], traces: bool) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let slots = episodes.iter().flat_map(|ep| {
        ep.slots.iter().map(|s| SlotLine {
            mode: ep.mode.as_str(),
            slot: s.slot,
            min_rate: s.efficiency.rate,
            energy: s.efficiency.energy,
            efficiency: s.efficiency.value,
            d2d_bandwidth: s.allocation.bd,
            rounds: s.rounds,
            evaluations: s.evaluations,
        })
    });
    write_rows(&dir.join("slots.csv"), slots)?;

    let ledger = episodes.iter().flat_map(|ep| {
        ep.slots.iter().flat_map(move |s| {
            s.uavs.iter().enumerate().map(move |(l, u)| LedgerLine {
                mode: ep.mode.as_str(),
                slot: s.slot,
                uav_id: l,
                x: u.position.x,
                y: u.position.y,
                z: u.position.z,
                speed: u.speed,
                homing: u.homing,
                s_joules: u.level,
                e_c: u.consumed,
                e_ch: u.charged,
            })
        })
    });
    write_rows(&dir.join("ledger.csv"), ledger)?;

    let mut rates = Vec::new();
    for ep in episodes {
        for s in &ep.slots {
            let a = &s.allocation;
            for (n, r) in s.rates.d2d.iter().enumerate() {
                rates.push(RateLine {
                    mode: ep.mode.as_str(),
                    slot: s.slot,
                    kind: "direct",
                    pair: n,
                    uav: None,
                    rate: *r,
                    bandwidth: a.bd,
                    tx_power: a.d2d_powers[n],
                    relay_power: None,
                });
            }
            for (k, r) in s.rates.relay.iter().enumerate() {
                rates.push(RateLine {
                    mode: ep.mode.as_str(),
                    slot: s.slot,
                    kind: "relay",
                    pair: k,
                    uav: a.assoc.uav_of(k),
                    rate: *r,
                    bandwidth: a.br[k],
                    tx_power: a.uplink_powers[k],
                    relay_power: Some(a.downlink_powers[k]),
                });
            }
        }
    }
    write_rows(&dir.join("rates.csv"), rates)?;

    let aggregates = episodes.iter().map(|ep| AggregateLine {
        mode: ep.mode.as_str(),
        digest: &ep.digest,
        slots: ep.slots.len(),
        mean_min_rate: ep.aggregates.mean_min_rate,
        mean_energy_rate: ep.aggregates.mean_energy_rate,
        mean_efficiency: ep.aggregates.mean_efficiency,
    });
    write_rows(&dir.join("aggregates.csv"), aggregates)?;

    if traces {
        let trace = episodes.iter().flat_map(|ep| {
            ep.slots.iter().flat_map(move |s| {
                s.solver_trace.iter().map(move |r| TraceLine {
                    mode: ep.mode.as_str(),
                    slot: s.slot,
                    iteration: r.iteration,
                    kappa: r.kappa,
                    f: r.f,
                    r_min: r.r_min,
                    denominator: r.denominator,
                })
            })
        });
        write_rows(&dir.join("solver_trace.csv"), trace)?;
        let search = episodes.iter().flat_map(|ep| {
            ep.search_log.iter().flat_map(|row| {
                row.positions.iter().enumerate().map(move |(l, p)| SearchLine {
                    slot: row.slot,
                    iteration: row.iteration,
                    radius: row.radius,
                    best_objective: row.best_objective,
                    uav_id: l,
                    x: p.x,
                    y: p.y,
                    z: p.z,
                })
            })
        });
        write_rows(&dir.join("search_log.csv"), search)?;
    }
    Ok(())
}

pub fn write_sweep(path: &Path, rows: &[SweepRow]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    write_rows(path, rows)
}
