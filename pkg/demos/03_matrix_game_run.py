#!/usr/bin/env python3
"""Two networks of agents learning a stochastic matrix game.

This is the package's flagship setup: network 1 (12 agents, random
gossip graph) plays rows, network 2 (12 agents, complete graph) plays
columns.  Every round each agent averages neighbors' mixed strategies,
estimates the opposing network's strategy through fixed bipartite
weights, samples a noisy cost matrix, and takes a mirror-descent step
with alpha(t) = t^(-1/2) in the entropic geometry.

The demo runs 12 sample paths, then plots the three quantities the
theory controls, each against its computed envelope:

  * per-agent consensus error  vs  H_l(t)      (geometric + step terms)
  * mean pseudo regret         vs  the O(sqrt T log T) bound
  * ergodic saddle-point gap   vs  the O(1/sqrt T) ratio bound

The envelopes carry worst-case constants (they sit orders of magnitude
above the measurements); the point is that measured curves share the
envelope's shape and never cross it.
"""

import os

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from dsmd import harness as hz
from dsmd import metrics as mx

HERE = os.path.dirname(os.path.abspath(__file__))
FIG_DIR = os.path.join(HERE, "figures")


def main():
    os.makedirs(FIG_DIR, exist_ok=True)
    cfg = hz.parse_config("run.paths = 12\n")
    setup = hz._build_setup(cfg)
    params = hz._bound_params(cfg, setup)
    rep = hz.run_experiment(cfg, workers=8, write=False)
    T = cfg["run.horizon"]
    ts = np.arange(1, T + 1)
    print(f"ran {cfg['run.paths']} paths of T={T} rounds "
          f"in {rep.wallclock_s:.1f}s (hash {rep.config_hash})")

    fig, axes = plt.subplots(1, 3, figsize=(12.5, 3.8))

    ax = axes[0]
    for l, style in ((1, "-"), (2, ":")):
        env = mx.consensus_envelope_series(params, l, T)
        mean_err = rep.agent_consensus_mean[l].mean(axis=1)
        ax.loglog(ts, mean_err, style, color="tab:blue",
                  label=f"network {l}: measured")
        ax.loglog(ts, env, style, color="tab:gray", alpha=0.7,
                  label=f"network {l}: envelope")
    ax.set_title("consensus error")
    ax.set_xlabel("t")
    ax.legend(fontsize=7)
    ax.grid(alpha=0.3, which="both")

    ax = axes[1]
    bound = mx.regret_bound_cc_series(params, T)
    for a in rep.tracked_agents:
        ax.loglog(ts, np.maximum(rep.raw[f"regret_agent{a}"].mean(axis=0),
                                 1e-6), label=f"agent {a}: measured")
    ax.loglog(ts, bound, color="tab:gray", label="bound")
    ax.set_title("pseudo regret")
    ax.set_xlabel("T")
    ax.legend(fontsize=7)
    ax.grid(alpha=0.3, which="both")

    ax = axes[2]
    gap = rep.by_id("gap")
    ax.loglog(ts, gap.mean, label="mean ergodic gap")
    ax.fill_between(ts, gap.mean - 2 * gap.stderr, gap.mean + 2 * gap.stderr,
                    alpha=0.25)
    ax.loglog(ts, rep.by_id("bound_gap").mean, color="tab:gray",
              label="bound")
    ax.set_title("saddle-point gap of time averages")
    ax.set_xlabel("t")
    ax.legend(fontsize=7)
    ax.grid(alpha=0.3, which="both")

    fig.tight_layout()
    out = os.path.join(FIG_DIR, "matrix_game_run.png")
    fig.savefig(out, dpi=130)
    print("wrote", out)

    print(f"final mean gap: {gap.mean[-1]:.4f} "
          f"(bound {rep.by_id('bound_gap').mean[-1]:.1f})")
    for l in (1, 2):
        worst = float((rep.agent_consensus_mean[l]
                       - mx.consensus_envelope_series(params, l, T)[:, None]).max())
        print(f"network {l} consensus margin (measured - envelope, worst "
              f"agent/time): {worst:+.2f}")


if __name__ == "__main__":
    main()
