"""Experiment harness: typed flat configs, seeded multi-path runs,
CSV/JSON reports, axis sweeps, and envelope verification.

Report layout (long CSV): columns t, metric, mean, stderr, series_id,
config_hash.  The CSV is the byte-stable artifact: identical configs
produce identical bytes at any worker count, because every path is a
pure function of its seed and path statistics are merged in path-index
order.  The JSON mirror additionally records wall-clock time and is
therefore not byte-stable.

Exit-code convention used by the CLI: 0 success, 2 configuration
error, 3 envelope violation, 4 reference-solver non-convergence.
"""

from __future__ import annotations

import json
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from . import metrics as mx
from .engine import StepSchedule, TopologyBundle, run_dsmd
from .games import make_matrix_game, subgradient_oracle
from .geometry import dual_norm, primal_norm, Regularizer
from .games import expected_cost
from .metrics import MetricSeries, NonConvergenceError
from .topology import (GraphSpec, bfs_distances, build_graph,
                       metropolis_weights, MixingSchedule, uniform_bipartite)

__all__ = [
    "ConfigError",
    "ExperimentConfig",
    "RunReport",
    "VerificationReport",
    "default_config",
    "parse_config",
    "load_config",
    "canonical_config_text",
    "config_hash",
    "run_experiment",
    "sweep",
    "verify_bounds",
    "dump_topology",
    "write_report",
    "EXIT_OK",
    "EXIT_CONFIG",
    "EXIT_VIOLATION",
    "EXIT_NONCONVERGENCE",
]

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_VIOLATION = 3
EXIT_NONCONVERGENCE = 4


class ConfigError(ValueError):
    """Invalid configuration (unknown key, bad type, bad value)."""


# ---------------------------------------------------------------------------
# Configuration
# ---------------------------------------------------------------------------

def _parse_bool(s: str) -> bool:
    v = s.strip().lower()
    if v in ("true", "1", "yes", "on"):
        return True
    if v in ("false", "0", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {s!r}")


def _parse_float_list(s: str):
    items = [p.strip() for p in s.split(",") if p.strip()]
    return tuple(float(p) for p in items)


def _parse_str_list(s: str):
    return tuple(p.strip() for p in s.split(",") if p.strip())


_GRAPH_KINDS = ("cycle", "random", "complete")

# key -> (parser, default, validator or None)
_SCHEMA = {
    "game.actions": (int, 20, lambda v: v >= 1),
    "game.n1": (int, 12, lambda v: v >= 1),
    "game.n2": (int, 12, lambda v: v >= 1),
    "game.noise": (float, 0.5, lambda v: v >= 0),
    "game.regularized": (_parse_bool, False, None),
    "game.seed": (int, 0, None),
    "topology.net1": (str, "random", lambda v: v in _GRAPH_KINDS),
    "topology.net1_p": (float, 0.7, lambda v: 0 < v <= 1),
    "topology.net2": (str, "complete", lambda v: v in _GRAPH_KINDS),
    "topology.net2_p": (float, 0.7, lambda v: 0 < v <= 1),
    "topology.seed": (int, 0, None),
    "run.horizon": (int, 500, lambda v: v >= 1),
    "run.paths": (int, 50, lambda v: v >= 1),
    "run.seed": (int, 0, None),
    "run.geometry": (str, "entropic", lambda v: v in ("euclidean", "entropic")),
    "run.init": (str, "uniform", lambda v: v in ("uniform", "random")),
    "schedule.kind": (str, "power",
                      lambda v: v in ("power", "strongly_convex")),
    "schedule.exponent": (float, 0.5, lambda v: 0 < v <= 1),
    "schedule.modulus": (float, 1.0, lambda v: v > 0),
    "metrics.track_agents": (str, "auto", None),
    "metrics.ne_tolerance": (float, 1e-9, lambda v: v > 0),
    "bounds.l_scale": (float, 1.0, lambda v: v > 0),
    "sweep.schedule_exponents": (_parse_float_list,
                                 (0.5, 2.0 / 3.0, 0.75), None),
    "sweep.topologies": (_parse_str_list, _GRAPH_KINDS,
                         lambda v: all(k in _GRAPH_KINDS for k in v)),
    "output.dir": (str, "out", None),
    "output.formats": (_parse_str_list, ("csv", "json"),
                       lambda v: all(f in ("csv", "json") for f in v)),
    "output.thin": (int, 1, lambda v: v >= 1),
}


def default_config() -> dict:
    """Fully resolved default configuration (the 12-agent, 20-action,
    500-round, 50-path setup)."""
    return {k: d for k, (_, d, _) in _SCHEMA.items()}


def parse_config(text: str) -> dict:
    """Parse `key = value` lines into a resolved config dict.

    Blank lines and `#` comments are skipped.  Unknown or duplicate
    keys, unparsable values, and out-of-range values are collected and
    reported together (fail-closed).
    """
    cfg = default_config()
    errors = []
    seen = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            errors.append(f"line {lineno}: expected key = value")
            continue
        key, _, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if key not in _SCHEMA:
            errors.append(f"line {lineno}: unknown key {key!r}")
            continue
        if key in seen:
            errors.append(f"line {lineno}: duplicate key {key!r}")
            continue
        seen.add(key)
        parser, _, check = _SCHEMA[key]
        try:
            parsed = parser(value)
        except ValueError:
            errors.append(f"line {lineno}: bad value for {key}: {value!r}")
            continue
        if check is not None and not check(parsed):
            errors.append(f"line {lineno}: value out of range for {key}: "
                          f"{value!r}")
            continue
        cfg[key] = parsed
    errors.extend(_semantic_errors(cfg))
    if errors:
        raise ConfigError("\n".join(errors))
    return cfg


def _semantic_errors(cfg: dict):
    errors = []
    if cfg["game.regularized"] and cfg["run.geometry"] != "entropic":
        errors.append("game.regularized requires run.geometry = entropic "
                      "(entropy terms need interior iterates)")
    for net, nkey in (("topology.net1", "game.n1"), ("topology.net2", "game.n2")):
        if cfg[net] == "cycle" and cfg[nkey] < 2:
            errors.append(f"{net} = cycle requires {nkey} >= 2")
    track = cfg["metrics.track_agents"]
    if track != "auto":
        try:
            idx = [int(p) for p in track.split(",") if p.strip()]
        except ValueError:
            errors.append("metrics.track_agents must be 'auto' or a "
                          "comma-separated list of agent indices")
        else:
            if not idx or any(i < 0 or i >= cfg["game.n1"] for i in idx):
                errors.append("metrics.track_agents indices must lie in "
                              "[0, game.n1)")
    return errors


def load_config(path) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config(fh.read())


def _format_value(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, tuple):
        return ",".join(_format_value(x) for x in v)
    return str(v)


def canonical_config_text(cfg: dict) -> str:
    """Sorted `key = value` rendering; the hashing preimage."""
    return "".join(f"{k} = {_format_value(cfg[k])}\n" for k in sorted(cfg))


def config_hash(cfg: dict) -> str:
    import hashlib
    digest = hashlib.sha256(canonical_config_text(cfg).encode()).hexdigest()
    return digest[:16]


# ExperimentConfig is the resolved dict plus its canonical identity.
@dataclass(frozen=True)
class ExperimentConfig:
    """Resolved configuration with its canonical text and hash."""

    values: dict

    @classmethod
    def from_text(cls, text: str) -> "ExperimentConfig":
        return cls(parse_config(text))

    @property
    def hash(self) -> str:
        return config_hash(self.values)

    def __getitem__(self, key):
        return self.values[key]


# ---------------------------------------------------------------------------
# Setup construction
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class _Setup:
    game: object
    topo: TopologyBundle
    schedule: StepSchedule
    graph1: object
    graph2: object
    geometry: str
    init: str
    tracked: tuple


def _build_setup(cfg: dict) -> _Setup:
    k = cfg["game.actions"]
    n1, n2 = cfg["game.n1"], cfg["game.n2"]
    game = make_matrix_game(
        n1, n2, k, k,
        noise_half_width=cfg["game.noise"],
        regularization="entropic" if cfg["game.regularized"] else "none",
        seed=cfg["game.seed"])
    try:
        g1 = build_graph(GraphSpec(cfg["topology.net1"], n1,
                                   cfg["topology.net1_p"],
                                   cfg["topology.seed"]))
        g2 = build_graph(GraphSpec(cfg["topology.net2"], n2,
                                   cfg["topology.net2_p"],
                                   cfg["topology.seed"] + 1))
    except (ValueError, RuntimeError) as exc:
        raise ConfigError(f"topology construction failed: {exc}") from exc
    topo = TopologyBundle(
        w1=MixingSchedule((metropolis_weights(g1),)),
        w2=MixingSchedule((metropolis_weights(g2),)),
        w12=uniform_bipartite(n2, n1),
        w21=uniform_bipartite(n1, n2))
    schedule = StepSchedule(cfg["schedule.kind"],
                            exponent=cfg["schedule.exponent"],
                            modulus=cfg["schedule.modulus"])
    track = cfg["metrics.track_agents"]
    if track == "auto":
        dist = bfs_distances(g1, 0)
        far = int(np.argmax(dist))
        tracked = (0,) if far == 0 else (0, far)
    else:
        tracked = tuple(dict.fromkeys(int(p) for p in track.split(",")))
    return _Setup(game=game, topo=topo, schedule=schedule, graph1=g1,
                  graph2=g2, geometry=cfg["run.geometry"],
                  init=cfg["run.init"], tracked=tracked)


def _bound_params(cfg: dict, setup: _Setup) -> mx.BoundParams:
    """Envelope constants for the configured run.

    Lambda uses the actual initial points for the deterministic uniform
    init; for random inits it uses vertex points, whose norm (1 in both
    l1 and l2) dominates every simplex point.
    """
    k1, k2 = setup.game.action_counts
    if setup.init == "uniform":
        x1 = np.full((setup.game.n1, k1), 1.0 / k1)
        x2 = np.full((setup.game.n2, k2), 1.0 / k2)
    else:
        x1 = np.zeros((setup.game.n1, k1))
        x1[:, 0] = 1.0
        x2 = np.zeros((setup.game.n2, k2))
        x2[:, 0] = 1.0
    return mx.bound_params(setup.game, setup.geometry, setup.topo,
                           setup.schedule, x1, x2,
                           l_scale=cfg["bounds.l_scale"])


# ---------------------------------------------------------------------------
# Reports
# ---------------------------------------------------------------------------

@dataclass
class RunReport:
    """Aggregated result of one experiment.

    ``series`` carries the plot-ready mean/stderr lines; ``raw`` keeps
    the per-path arrays (path-major) for in-process consumers such as
    verify_bounds and tests.  Only ``series`` is serialized.
    """

    config: dict
    config_hash: str
    series: list
    tracked_agents: tuple
    path_seeds: tuple
    wallclock_s: float
    warnings: list
    version: str
    raw: dict = field(repr=False, default_factory=dict)
    agent_consensus_mean: dict = field(repr=False, default_factory=dict)

    def by_id(self, series_id: str) -> MetricSeries:
        for s in self.series:
            if s.series_id == series_id:
                return s
        raise KeyError(series_id)

    def csv_text(self, thin: int = None) -> str:
        thin = self.config["output.thin"] if thin is None else thin
        lines = ["t,metric,mean,stderr,series_id,config_hash"]
        for s in self.series:
            keep = _thin_mask(np.asarray(s.ts, dtype=int), thin)
            for t, m, e in zip(np.asarray(s.ts)[keep],
                               np.asarray(s.mean)[keep],
                               np.asarray(s.stderr)[keep]):
                lines.append(f"{int(t)},{s.metric},{repr(float(m))},"
                             f"{repr(float(e))},{s.series_id},"
                             f"{self.config_hash}")
        return "\n".join(lines) + "\n"

    def json_obj(self) -> dict:
        return {
            "version": self.version,
            "config": {k: (list(v) if isinstance(v, tuple) else v)
                       for k, v in self.config.items()},
            "config_hash": self.config_hash,
            "wallclock_s": self.wallclock_s,
            "path_seeds": list(self.path_seeds),
            "tracked_agents": list(self.tracked_agents),
            "warnings": list(self.warnings),
            "series": [{
                "metric": s.metric,
                "series_id": s.series_id,
                "t": [int(t) for t in s.ts],
                "mean": [float(v) for v in s.mean],
                "stderr": [float(v) for v in s.stderr],
            } for s in self.series],
        }


def _thin_mask(ts: np.ndarray, thin: int) -> np.ndarray:
    if thin <= 1:
        return np.ones(len(ts), dtype=bool)
    keep = (ts % thin == 0) | (ts == ts[0]) | (ts == ts[-1])
    return keep


def write_report(report: RunReport, out_dir, stem: str = "run",
                 formats=None) -> list:
    """Atomically write the CSV/JSON artifacts; returns written paths."""
    formats = report.config["output.formats"] if formats is None else formats
    os.makedirs(out_dir, exist_ok=True)
    written = []
    if "csv" in formats:
        written.append(_atomic_write(
            os.path.join(out_dir, f"{stem}.csv"), report.csv_text()))
    if "json" in formats:
        text = json.dumps(report.json_obj(), indent=2, sort_keys=True) + "\n"
        written.append(_atomic_write(
            os.path.join(out_dir, f"{stem}.json"), text))
    return written


def _atomic_write(path: str, text: str) -> str:
    tmp = path + ".tmp"
    with open(tmp, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
    os.replace(tmp, path)
    return path


# ---------------------------------------------------------------------------
# Experiment execution
# ---------------------------------------------------------------------------

def _path_metrics(setup: _Setup, cfg: dict, seed: int, ne_pair) -> dict:
    """All per-path series for one seed.  Pure function of its inputs."""
    traj = run_dsmd(setup.game, setup.topo, setup.schedule,
                    cfg["run.horizon"], geometry=setup.geometry,
                    init=setup.init, seed=seed)
    norm = "l2" if setup.geometry == "euclidean" else "l1"
    T = traj.horizon
    out = {"gap": mx.gap_series(traj, setup.game)}
    for a in setup.tracked:
        reg = mx.pseudo_regret_series(traj.x1[:, a, :], traj.u2[:, a, :],
                                      setup.game, T)
        out[f"regret_agent{a}"] = reg
    out["consensus_net1"] = mx.consensus_error_series(traj, 1, norm)[1:]
    out["consensus_net2"] = mx.consensus_error_series(traj, 2, norm)[1:]
    if ne_pair is not None:
        out["abs_error"] = mx.absolute_error_series(traj, ne_pair)[1:]
        out["xhat_mse"] = mx.xhat_mse_series(traj, ne_pair, norm)
    return out


def _regret_bound_series(setup: _Setup, params, T: int) -> np.ndarray:
    """The tightest applicable pseudo-regret envelope per horizon.

    The logarithmic bound needs both the 1/(mu (t+1)) schedule and a
    strongly convex game; otherwise the generic convex-concave bound
    (valid for any nonincreasing steps) applies.
    """
    if (setup.schedule.kind == "strongly_convex"
            and setup.game.strong_convexity_modulus > 0):
        return np.array([mx.regret_bound_sc(params, t)
                         for t in range(1, T + 1)])
    return mx.regret_bound_cc_series(params, T)


def _mean_stderr(stack: np.ndarray):
    mean = stack.mean(axis=0)
    if stack.shape[0] > 1:
        err = stack.std(axis=0, ddof=1) / np.sqrt(stack.shape[0])
    else:
        err = np.zeros_like(mean)
    return mean, err


def _resolve_workers(workers) -> int:
    if workers is None:
        workers = os.environ.get("DSMD_WORKERS", "")
        workers = int(workers) if workers else (os.cpu_count() or 1)
    return max(1, min(int(workers), 32))


def run_experiment(cfg: dict, *, workers=None, seed_offset: int = 0,
                   out_dir=None, write: bool = True) -> RunReport:
    """Execute run.paths independent sample paths and aggregate.

    Path p uses seed run.seed + seed_offset + p.  Results are merged in
    path-index order, so the report is identical for any worker count.
    """
    from . import __version__
    t0 = time.perf_counter()
    setup = _build_setup(cfg)
    T = cfg["run.horizon"]
    ts = np.arange(1, T + 1)
    warnings = []
    ne_pair = None
    if setup.game.regularized:
        try:
            ne_pair = mx.ne_reference(setup.game, cfg["metrics.ne_tolerance"])
        except NonConvergenceError as exc:
            warnings.append(f"ne_reference_failed: {exc}")

    seeds = tuple(cfg["run.seed"] + seed_offset + p
                  for p in range(cfg["run.paths"]))
    n_workers = _resolve_workers(workers)
    if n_workers == 1:
        per_path = [_path_metrics(setup, cfg, s, ne_pair) for s in seeds]
    else:
        with ThreadPoolExecutor(max_workers=n_workers) as pool:
            per_path = list(pool.map(
                lambda s: _path_metrics(setup, cfg, s, ne_pair), seeds))

    params = _bound_params(cfg, setup)
    series = []
    raw = {}

    def add(metric, series_id, stack_or_mean, stderr=None, grid=ts):
        if stderr is None:
            mean, err = _mean_stderr(stack_or_mean)
        else:
            mean, err = stack_or_mean, stderr
        series.append(MetricSeries(metric=metric, series_id=series_id,
                                   ts=grid, mean=np.asarray(mean, float),
                                   stderr=np.asarray(err, float)))

    gap_stack = np.stack([p["gap"] for p in per_path])
    raw["gap"] = gap_stack
    add("gap", "gap", gap_stack)

    for a in setup.tracked:
        reg_stack = np.stack([p[f"regret_agent{a}"] for p in per_path])
        raw[f"regret_agent{a}"] = reg_stack
        add("avg_regret", f"avg_regret_agent{a}", reg_stack / ts)

    agent_consensus_mean = {}
    for l in (1, 2):
        key = f"consensus_net{l}"
        cons = np.stack([p[key] for p in per_path])  # (P, T, n_l)
        raw[key] = cons
        agent_consensus_mean[l] = cons.mean(axis=0)
        add("consensus", key, cons.max(axis=2))

    if ne_pair is not None:
        err_stack = np.stack([p["abs_error"] for p in per_path])
        raw["abs_error"] = err_stack
        add("abs_error", "abs_error", err_stack)
        mse_stack = np.stack([p["xhat_mse"] for p in per_path])
        raw["xhat_mse"] = mse_stack
        add("xhat_mse", "xhat_mse", mse_stack)

    # Theoretical envelopes on the same grid (stderr identically zero).
    zero = np.zeros(T)
    for l in (1, 2):
        env = mx.consensus_envelope_series(params, l, T)
        add("bound_consensus", f"bound_consensus_net{l}", env, zero)
    add("bound_avg_regret", "bound_avg_regret",
        _regret_bound_series(setup, params, T) / ts, zero)
    gap_bound = mx.ergodic_gap_bound_series(params, T)
    add("bound_gap", "bound_gap", gap_bound, zero)
    if setup.game.regularized:
        mu = setup.game.strong_convexity_modulus
        add("bound_mse", "bound_mse", 2.0 / mu * gap_bound, zero)

    report = RunReport(
        config=dict(cfg), config_hash=config_hash(cfg), series=series,
        tracked_agents=setup.tracked, path_seeds=seeds,
        wallclock_s=time.perf_counter() - t0, warnings=warnings,
        version=__version__, raw=raw,
        agent_consensus_mean=agent_consensus_mean)
    if write:
        write_report(report, out_dir if out_dir is not None
                     else cfg["output.dir"])
    return report


# ---------------------------------------------------------------------------
# Sweeps
# ---------------------------------------------------------------------------

def sweep(cfg: dict, axis: str, *, workers=None, seed_offset: int = 0,
          out_dir=None, write: bool = True):
    """Run one experiment per axis value with shared path seeds.

    Returns (reports, failures, combined_csv_text); ``failures`` is a
    list of (tag, exit_code, message) for cells that raised — remaining
    cells still run.
    """
    if axis == "schedule":
        values = cfg["sweep.schedule_exponents"]
        cells = [(f"exponent={v:g}",
                  {**cfg, "schedule.kind": "power", "schedule.exponent": v})
                 for v in values]
    elif axis == "topology":
        values = cfg["sweep.topologies"]
        cells = [(f"net1={v}", {**cfg, "topology.net1": v}) for v in values]
    else:
        raise ConfigError(f"unknown sweep axis {axis!r} "
                          "(expected schedule or topology)")
    if not values:
        raise ConfigError(f"sweep axis {axis!r} has no values")

    reports, failures = [], []
    rows = ["t,metric,mean,stderr,series_id,config_hash"]
    for tag, cell_cfg in cells:
        try:
            rep = run_experiment(cell_cfg, workers=workers,
                                 seed_offset=seed_offset, write=False)
        except ConfigError as exc:
            failures.append((tag, EXIT_CONFIG, str(exc)))
            continue
        except NonConvergenceError as exc:
            failures.append((tag, EXIT_NONCONVERGENCE, str(exc)))
            continue
        reports.append((tag, rep))
        body = rep.csv_text().splitlines()[1:]
        for line in body:
            t, metric, mean, err, sid, h = line.split(",")
            rows.append(f"{t},{metric},{mean},{err},{sid}|{tag},{h}")
    combined = "\n".join(rows) + "\n"
    if write:
        directory = out_dir if out_dir is not None else cfg["output.dir"]
        os.makedirs(directory, exist_ok=True)
        for tag, rep in reports:
            stem = "run_" + tag.replace("=", "_").replace(".", "p")
            write_report(rep, directory, stem=stem)
        _atomic_write(os.path.join(directory, f"sweep_{axis}.csv"), combined)
    return reports, failures, combined


# ---------------------------------------------------------------------------
# Bound verification
# ---------------------------------------------------------------------------

@dataclass
class VerificationReport:
    """Outcome of verify_bounds: one (name, passed, worst margin) row per
    check, where margin > 0 means the check's inequality was violated by
    that amount."""

    checks: list
    lines: list
    report: RunReport

    @property
    def passed(self) -> bool:
        return all(ok for _, ok, _ in self.checks)


def _interior_sample(rng, k: int) -> np.ndarray:
    # Dirichlet draw pulled slightly toward the barycenter: keeps the
    # sampled pair on the clamped interior where the constants are quoted.
    x = rng.dirichlet(np.ones(k))
    return (1.0 - 1e-4) * x + 1e-4 / k


def _assumption_margins(cfg: dict, setup: _Setup, params) -> dict:
    """Worst margins for the Lipschitz and noise assumptions.

    Lipschitz: sampled |U(x,y) - U(x',y')| - L (||dx|| + ||dy||) and
    noiseless sampled ||g||_* - L, including the vertex pair attaining
    the entrywise maximum (margin <= 0 when L is honest).
    Noise: Monte-Carlo E||ghat - g||_*^2 - 1.1 nu^2 per network.
    """
    game = setup.game
    noiseless = replace(game, noise_half_width=0.0)
    k1, k2 = game.action_counts
    reg1 = Regularizer(setup.geometry, k1)
    reg2 = Regularizer(setup.geometry, k2)
    L = params.L
    rng = np.random.default_rng(2024)

    lip = -np.inf
    for s in range(64):
        x, xp = _interior_sample(rng, k1), _interior_sample(rng, k1)
        y, yp = _interior_sample(rng, k2), _interior_sample(rng, k2)
        du = abs(expected_cost(game, x, y) - expected_cost(game, xp, yp))
        allowed = L * (primal_norm(reg1, x - xp) + primal_norm(reg2, y - yp))
        lip = max(lip, du - allowed)
        i, j = s % game.n1, s % game.n2
        g1 = subgradient_oracle(noiseless, 1, i, x, y, rng)
        g2 = subgradient_oracle(noiseless, 2, j, x, yp, rng)
        lip = max(lip, dual_norm(reg1, g1) - L, dual_norm(reg2, g2) - L)
    # Vertex pair: a bilinear subgradient of maximal dual norm.
    for i in range(game.n1):
        q = int(np.argmax(np.max(np.abs(game.base_matrices[i]), axis=0)))
        e_q = np.zeros(k2)
        e_q[q] = 1.0
        v = np.full(k1, 1.0 / k1)
        g = subgradient_oracle(noiseless, 1, i, v, e_q, rng)
        if not game.regularized:
            lip = max(lip, dual_norm(reg1, g) - L)

    nu_margin = -np.inf
    if game.noise_half_width > 0:
        draws = 2000
        v1 = np.full(k1, 1.0 / k1)
        v2 = np.full(k2, 1.0 / k2)
        for side, reg, nu in ((1, reg1, params.nu1), (2, reg2, params.nu2)):
            own, opp = (v1, v2) if side == 1 else (v2, v1)
            clean = subgradient_oracle(noiseless, side, 0, own, opp, rng)
            sq = 0.0
            for _ in range(draws):
                g = subgradient_oracle(game, side, 0, own, opp, rng)
                sq += dual_norm(reg, g - clean) ** 2
            nu_margin = max(nu_margin, sq / draws - 1.1 * nu ** 2)
    return {"lipschitz": lip, "noise": nu_margin}


def verify_bounds(cfg: dict, *, workers=None,
                  seed_offset: int = 0) -> VerificationReport:
    """Run the experiment and check every theoretical envelope.

    Checks, each reported as a [PASS]/[FAIL] line with its worst margin
    (positive margin = violation):

    * assumption validity (sampled Lipschitz / noise constants) — a
      bound quoted with understated constants is vacuous, so constant
      validity is part of envelope verification;
    * consensus: per-agent path-mean error <= H_l(t) for all t;
    * pseudo regret: path-mean R(t) <= the schedule's bound for all t;
    * gap: path-mean gap(t) <= gap bound(t) + 3 stderr (Monte-Carlo
      allowance on an expectation bound);
    * squared error (regularized only): path-mean <= (2/mu) gap bound
      + 3 stderr.
    """
    setup = _build_setup(cfg)
    params = _bound_params(cfg, setup)
    rep = run_experiment(cfg, workers=workers, seed_offset=seed_offset,
                         write=False)
    T = cfg["run.horizon"]
    ts = np.arange(1, T + 1)
    checks = []

    margins = _assumption_margins(cfg, setup, params)
    checks.append(("lipschitz constant covers sampled costs/subgradients",
                   margins["lipschitz"] <= 1e-9, margins["lipschitz"]))
    if np.isfinite(margins["noise"]):
        checks.append(("noise second moment within stated bound",
                       margins["noise"] <= 1e-9, margins["noise"]))

    for l in (1, 2):
        env = mx.consensus_envelope_series(params, l, T)
        worst = float((rep.agent_consensus_mean[l] - env[:, None]).max())
        checks.append((f"consensus envelope network {l}", worst <= 1e-9,
                       worst))

    bound = _regret_bound_series(setup, params, T)
    for a in setup.tracked:
        mean_reg = rep.raw[f"regret_agent{a}"].mean(axis=0)
        worst = float((mean_reg - bound).max())
        checks.append((f"pseudo-regret envelope agent {a}", worst <= 1e-9,
                       worst))

    gap_bound = mx.ergodic_gap_bound_series(params, T)
    gs = rep.by_id("gap")
    worst = float((gs.mean - 3.0 * gs.stderr - gap_bound).max())
    checks.append(("ergodic gap envelope", worst <= 1e-9, worst))

    if setup.game.regularized and "xhat_mse" in rep.raw:
        mu = setup.game.strong_convexity_modulus
        ms = rep.by_id("xhat_mse")
        worst = float((ms.mean - 3.0 * ms.stderr
                       - 2.0 / mu * gap_bound).max())
        checks.append(("squared-error envelope", worst <= 1e-9, worst))

    lines = [f"[{'PASS' if ok else 'FAIL'}] {name}: worst margin "
             f"{margin:+.6e}" for name, ok, margin in checks]
    return VerificationReport(checks=checks, lines=lines, report=rep)


# ---------------------------------------------------------------------------
# Topology dump
# ---------------------------------------------------------------------------

def dump_topology(cfg: dict) -> str:
    """Human-readable mixing structure of the configured experiment."""
    setup = _build_setup(cfg)
    out = []
    for l, (graph, sched) in enumerate(((setup.graph1, setup.topo.w1),
                                        (setup.graph2, setup.topo.w2)),
                                       start=1):
        mm = sched.matrices[0]
        d = sched.decay()
        out.append(f"network {l}: {cfg[f'topology.net{l}']} on "
                   f"{graph.node_count} agents")
        out.append(f"  edges: {sorted(graph.edges)}")
        out.append(f"  eta floor: {mm.eta_floor!r}")
        out.append(f"  decay: gamma={d.gamma!r} theta={d.theta!r}")
        out.append("  metropolis weights:")
        out.append(np.array2string(mm.entries, precision=6,
                                   suppress_small=False, prefix="  "))
    w12 = setup.topo.w12.entries
    out.append(f"cross-network weights: {w12.shape[0]}x{w12.shape[1]}, "
               f"uniform {w12[0, 0]!r}")
    out.append(f"tracked agents: {list(setup.tracked)}")
    return "\n".join(out) + "\n"
