#!/usr/bin/env python3
"""Plots from uavd2d output tables.

    plot.py trajectory results/<run>            # UAV paths from ledger.csv
    plot.py sweep results/sweep-pl-dbm          # sweep.csv, one line per mode
    plot.py convergence results/<run>           # needs --dump-solver-trace
    plot.py battery results/<run>               # stored energy per UAV

Figures are written next to the input as PNG.
"""

import argparse
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import pandas as pd


def trajectory(run: Path):
    led = pd.read_csv(run / "ledger.csv")
    led = led[led["mode"] == "proposed"]
    fig, ax = plt.subplots(figsize=(6, 6))
    for uav, g in led.groupby("uav_id"):
        g = g.sort_values("slot")
        ax.plot(g.x, g.y, marker=".", label=f"UAV {uav}")
        ax.annotate("start", (g.x.iloc[0], g.y.iloc[0]), fontsize=7)
    ax.set_xlabel("x [m]")
    ax.set_ylabel("y [m]")
    ax.set_aspect("equal")
    ax.legend(fontsize=8)
    return fig, run / "trajectory.png"


def sweep(dir_: Path):
    sw = pd.read_csv(dir_ / "sweep.csv")
    param = sw.param.iloc[0]
    fig, axes = plt.subplots(1, 2, figsize=(10, 4))
    for mode, g in sw.groupby("mode"):
        # Users sweeps keep one row per value; power sweeps can span several user counts.
        for users, h in g.groupby("users") if param != "users" else [(None, g)]:
            label = mode if users is None else f"{mode}, {users} users"
            axes[0].errorbar(h.value, h.efficiency_mean, yerr=h.efficiency_std, marker="o", capsize=3, label=label)
            axes[1].errorbar(h.value, h.min_rate_mean, yerr=h.min_rate_std, marker="o", capsize=3, label=label)
    xlabel = {"pl-dbm": "UAV transmit power [dBm]", "users": "user pairs"}.get(param, param)
    for ax, y in zip(axes, ["efficiency [bit/J]", "min throughput [bit/s]"]):
        ax.set_xlabel(xlabel)
        ax.set_ylabel(y)
        ax.legend(fontsize=8)
    fig.tight_layout()
    return fig, dir_ / f"sweep-{param}.png"


def convergence(run: Path):
    tr = pd.read_csv(run / "solver_trace.csv")
    tr = tr[tr["mode"] == "proposed"]
    fig, axes = plt.subplots(1, 2, figsize=(10, 4))
    for slot, g in tr.groupby("slot"):
        g = g.sort_values("iteration")
        axes[0].plot(g.iteration, g.kappa, marker=".", label=f"slot {slot}")
        axes[1].semilogy(g.iteration, g.F.abs().clip(lower=1e-300), marker=".")
    axes[0].set_ylabel("efficiency estimate [bit/J]")
    axes[1].set_ylabel("|parametric objective|")
    for ax in axes:
        ax.set_xlabel("iteration")
    if tr.slot.nunique() <= 10:
        axes[0].legend(fontsize=7)
    fig.tight_layout()
    return fig, run / "convergence.png"


def battery(run: Path):
    led = pd.read_csv(run / "ledger.csv")
    led = led[led["mode"] == "proposed"]
    fig, ax = plt.subplots(figsize=(7, 4))
    for uav, g in led.groupby("uav_id"):
        ax.step(g.slot, g.S_joules / 1e3, where="post", label=f"UAV {uav}")
    ax.set_xlabel("slot")
    ax.set_ylabel("stored energy [kJ]")
    ax.legend(fontsize=8)
    return fig, run / "battery.png"


def main():
    kinds = {"trajectory": trajectory, "sweep": sweep, "convergence": convergence, "battery": battery}
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("kind", choices=kinds)
    ap.add_argument("dir", type=Path)
    args = ap.parse_args()
    fig, out = kinds[args.kind](args.dir)
    fig.savefig(out, dpi=150)
    print(out)


if __name__ == "__main__":
    main()
