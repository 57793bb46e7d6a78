use rayon::prelude::*;
use serde::Serialize;

use super::{run_episode, Aggregates, Mode, RunConfig};
use crate::error::Result;
use crate::scenario::SynthesisOptions;

/// The swept knob.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepParam {
    /// UAV peak transmit power, dBm.
    PlDbm,
    /// Total number of users; half of them in direct pairs, half relayed.
    Users,
}

impl SweepParam {
    pub fn as_str(self) -> &'static str {
        match self {
            SweepParam::PlDbm => "pl-dbm",
            SweepParam::Users => "users",
        }
    }
}

/// Seed mean and sample standard deviation of the episode metrics at one sweep point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub param: &'static str,
    pub value: f64,
    pub users: usize,
    pub mode: &'static str,
    pub seeds: usize,
    pub min_rate_mean: f64,
    pub min_rate_std: f64,
    pub energy_rate_mean: f64,
    pub energy_rate_std: f64,
    pub efficiency_mean: f64,
    pub efficiency_std: f64,
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Grid of a sweep. For `Users` the user count comes from `values` and
/// `users` is ignored.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub param: SweepParam,
    pub values: Vec<f64>,
    pub users: Vec<usize>,
    pub seeds: Vec<u64>,
    pub uavs: usize,
    pub base: SynthesisOptions,
    pub modes: Vec<Mode>,
}

/// Runs every (value, user count, seed, mode) cell on synthesized scenarios.
pub fn sweep(spec: &SweepSpec, cfg: &RunConfig) -> Result<Vec<SweepRow>> {
    let SweepSpec {
        param,
        values,
        users,
        seeds,
        uavs,
        base,
        modes,
    } = spec;
    let (param, uavs) = (*param, *uavs);
    let mut points = Vec::new();
    for &v in values {
        match param {
            SweepParam::PlDbm => points.extend(users.iter().map(|&u| (v, u))),
            SweepParam::Users => points.push((v, v.round() as usize)),
        }
    }
    let cells: Vec<(usize, u64, Mode)> = (0..points.len())
        .flat_map(|p| seeds.iter().flat_map(move |&s| modes.iter().map(move |&m| (p, s, m))))
        .collect();
    let results: Vec<Aggregates> = cells
        .par_iter()
        .map(|&(p, seed, mode)| {
            let (v, u) = points[p];
            let mut opts = base.clone();
            if param == SweepParam::PlDbm {
                opts.uav_power_dbm = v;
            }
            let scenario = opts.build(u / 2, u - u / 2, uavs, seed)?;
            Ok(run_episode(&scenario, mode, cfg)?.aggregates)
        })
        .collect::<Result<_>>()?;
    let mut rows = Vec::new();
    for (p, &(v, u)) in points.iter().enumerate() {
        for &mode in modes.iter() {
            let picked: Vec<&Aggregates> = cells
                .iter()
                .zip(&results)
                .filter(|((cp, _, cm), _)| *cp == p && *cm == mode)
                .map(|(_, a)| a)
                .collect();
            let col = |f: fn(&Aggregates) -> f64| mean_std(&picked.iter().map(|a| f(a)).collect::<Vec<_>>());
            let (min_rate_mean, min_rate_std) = col(|a| a.mean_min_rate);
            let (energy_rate_mean, energy_rate_std) = col(|a| a.mean_energy_rate);
            let (efficiency_mean, efficiency_std) = col(|a| a.mean_efficiency);
            rows.push(SweepRow {
                param: param.as_str(),
                value: v,
                users: u,
                mode: mode.as_str(),
                seeds: picked.len(),
                min_rate_mean,
                min_rate_std,
                energy_rate_mean,
                energy_rate_std,
                efficiency_mean,
                efficiency_std,
            });
        }
    }
    Ok(rows)
}
