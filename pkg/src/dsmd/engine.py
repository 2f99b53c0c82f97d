"""The D-SMD iteration: consensus averaging, sampled subgradients, prox
updates, and trajectory recording.

One round at time t, for every agent i of network l:

    v_{l,i}(t) = sum_j w_{l,ij}(t)  x_{l,j}(t)     (own-network consensus)
    u_{3-l,i}(t) = sum_j w12_{ij}(t) x_{3-l,j}(t)  (opponent estimate)
    ghat_{l,i}(t) ~ sampled subgradient at (v_{l,i}(t), u_{3-l,i}(t))
    x_{l,i}(t+1) = P_{v_{l,i}(t)}( -alpha(t) * ghat_{l,i}(t) )

Rounds run t = 0..T-1 from x(0); the trajectory additionally records the
round-T consensus/estimate points so that series indexed 1..T are
complete.  A run is a pure function of (game seed, topology seed, run
seed): one Generator per path, consumed in fixed agent order.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .games import MatrixGameSpec, subgradient_oracle
from .geometry import Regularizer, prox_map_rows
from .topology import BipartiteWeights, MixingSchedule

__all__ = [
    "StepSchedule",
    "TopologyBundle",
    "AgentState",
    "Trajectory",
    "dsmd_round",
    "run_dsmd",
    "time_averaged_iterate",
    "network_average",
]


@dataclass(frozen=True)
class StepSchedule:
    """Non-increasing step-size sequence alpha(t), t >= 0.

    kind "power":           alpha(t) = t^(-exponent) for t >= 1, with
                            alpha(0) := alpha(1) (the power form is
                            undefined at t = 0).
    kind "strongly_convex": alpha(t) = 1 / (modulus * (t + 1)).
    """

    kind: str
    exponent: float = 0.5
    modulus: float = 1.0

    def __post_init__(self):
        if self.kind not in ("power", "strongly_convex"):
            raise ValueError(f"unknown schedule kind {self.kind!r}")
        if self.kind == "power" and not 0.5 <= self.exponent <= 1.0:
            raise ValueError("power exponent must lie in [0.5, 1]")
        if self.kind == "strongly_convex" and self.modulus <= 0:
            raise ValueError("strong-convexity modulus must be positive")

    def alpha(self, t: int) -> float:
        if t < 0:
            raise ValueError("step index must be nonnegative")
        if self.kind == "power":
            return float(max(t, 1)) ** (-self.exponent)
        return 1.0 / (self.modulus * (t + 1))

    def alphas(self, T: int) -> np.ndarray:
        """Vector (alpha(0), ..., alpha(T))."""
        return np.array([self.alpha(t) for t in range(T + 1)])


@dataclass(frozen=True)
class TopologyBundle:
    """All mixing weights of one experiment.

    w12 is applied by network-1 receivers to network-2 iterates (shape
    (n1, n2)); w21 the converse.
    """

    w1: MixingSchedule
    w2: MixingSchedule
    w12: BipartiteWeights
    w21: BipartiteWeights


@dataclass(frozen=True)
class AgentState:
    """Snapshot of one agent at one round (a read-out view, not the
    engine's working representation)."""

    iterate: np.ndarray
    consensus: np.ndarray
    opponent_estimate: np.ndarray
    weighted_sum: np.ndarray
    weight_total: float


@dataclass(frozen=True)
class Trajectory:
    """Full record of one sample path.

    Arrays are indexed [t, agent, coordinate] with t = 0..T inclusive;
    v/u at index t are the consensus/estimate points computed from x(t).
    """

    x1: np.ndarray  # (T+1, n1, K1)
    x2: np.ndarray  # (T+1, n2, K2)
    v1: np.ndarray  # (T+1, n1, K1)
    v2: np.ndarray  # (T+1, n2, K2)
    u1: np.ndarray  # (T+1, n2, K1)  net-2 agents' estimates of net-1
    u2: np.ndarray  # (T+1, n1, K2)  net-1 agents' estimates of net-2
    alphas: np.ndarray  # (T+1,)

    @property
    def horizon(self) -> int:
        return self.x1.shape[0] - 1

    def agent_state(self, l: int, i: int, t: int) -> AgentState:
        x, v = (self.x1, self.v1) if l == 1 else (self.x2, self.v2)
        u = self.u2 if l == 1 else self.u1
        w = self.alphas[:t]
        return AgentState(
            iterate=x[t, i],
            consensus=v[t, i],
            opponent_estimate=u[t, i],
            weighted_sum=(w[:, None] * x[:t, i]).sum(axis=0),
            weight_total=float(w.sum()),
        )


def dsmd_round(x1, x2, w1, w2, w12, w21, game: MatrixGameSpec,
               reg1: Regularizer, reg2: Regularizer, alpha: float,
               rng: np.random.Generator):
    """Advance both networks one round.

    Parameters are the stacked iterates x1 (n1, K1) and x2 (n2, K2), the
    four weight matrices at this round, and the realized step size.

    Returns (x1_next, x2_next, v1, v2, u1, u2).
    """
    if not np.isfinite(alpha) or alpha < 0:
        raise ValueError("step size must be finite and nonnegative")
    v1 = w1 @ x1
    u2 = w12 @ x2
    v2 = w2 @ x2
    u1 = w21 @ x1
    g1 = np.empty_like(x1)
    for i in range(x1.shape[0]):
        g1[i] = subgradient_oracle(game, 1, i, v1[i], u2[i], rng)
    g2 = np.empty_like(x2)
    for j in range(x2.shape[0]):
        g2[j] = subgradient_oracle(game, 2, j, v2[j], u1[j], rng)
    x1_next = prox_map_rows(reg1, v1, -alpha * g1)
    x2_next = prox_map_rows(reg2, v2, -alpha * g2)
    return x1_next, x2_next, v1, v2, u1, u2


def _initial_points(n: int, k: int, init: str, rng: np.random.Generator):
    if init == "uniform":
        return np.full((n, k), 1.0 / k)
    if init == "random":
        return rng.dirichlet(np.ones(k), size=n)
    raise ValueError(f"unknown init rule {init!r}")


def run_dsmd(game: MatrixGameSpec, topo: TopologyBundle,
             schedule: StepSchedule, T: int, *, geometry: str = "entropic",
             init: str = "uniform", seed: int = 0) -> Trajectory:
    """Run Algorithm rounds t = 0..T-1 and record the trajectory.

    Deterministic given ``seed``; the per-path Generator is consumed in
    a fixed order (initialization, then per round: network-1 agents in
    index order, then network-2 agents).
    """
    if T < 1:
        raise ValueError("horizon T must be at least 1")
    k1, k2 = game.action_counts
    n1, n2 = game.n1, game.n2
    reg1 = Regularizer(geometry, k1)
    reg2 = Regularizer(geometry, k2)
    rng = np.random.default_rng(seed)

    x1 = _initial_points(n1, k1, init, rng)
    x2 = _initial_points(n2, k2, init, rng)

    X1 = np.empty((T + 1, n1, k1))
    X2 = np.empty((T + 1, n2, k2))
    V1 = np.empty((T + 1, n1, k1))
    V2 = np.empty((T + 1, n2, k2))
    U1 = np.empty((T + 1, n2, k1))
    U2 = np.empty((T + 1, n1, k2))
    X1[0], X2[0] = x1, x2

    w12, w21 = topo.w12.entries, topo.w21.entries
    alphas = schedule.alphas(T)
    for t in range(T):
        x1_next, x2_next, v1, v2, u1, u2 = dsmd_round(
            x1, x2, topo.w1.at(t), topo.w2.at(t), w12, w21,
            game, reg1, reg2, alphas[t], rng)
        V1[t], V2[t], U1[t], U2[t] = v1, v2, u1, u2
        x1, x2 = x1_next, x2_next
        X1[t + 1], X2[t + 1] = x1, x2
    # Round-T consensus/estimates (no update) so series 1..T are complete.
    V1[T] = topo.w1.at(T) @ x1
    V2[T] = topo.w2.at(T) @ x2
    U1[T] = w21 @ x1
    U2[T] = w12 @ x2
    return Trajectory(x1=X1, x2=X2, v1=V1, v2=V2, u1=U1, u2=U2, alphas=alphas)


def time_averaged_iterate(traj: Trajectory, l: int, i: int, t: int) -> np.ndarray:
    """xhat_{l,i}(t) = sum_{s<t} alpha(s) x_{l,i}(s) / sum_{s<t} alpha(s)."""
    if not 1 <= t <= traj.horizon:
        raise ValueError("need 1 <= t <= horizon")
    x = traj.x1 if l == 1 else traj.x2
    w = traj.alphas[:t]
    return (w[:, None] * x[:t, i]).sum(axis=0) / w.sum()


def network_average(traj: Trajectory, l: int, t: int) -> np.ndarray:
    """xbar_l(t): arithmetic mean of the network's iterates at round t."""
    x = traj.x1 if l == 1 else traj.x2
    return x[t].mean(axis=0)
