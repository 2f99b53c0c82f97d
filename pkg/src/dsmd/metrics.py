"""Measured and theoretical quantities: pseudo regret, gap functions,
Nash-equilibrium references, consensus envelopes, and bound right-hand
sides.

All bound evaluators take a :class:`BoundParams` bundle whose constants
must be *valid* for the run they are compared against (a Lipschitz
constant that really covers the costs, a noise bound that really covers
the oracle, decay constants from the actual mixing schedule).  With
valid constants the bounds are envelopes: the measured series never
cross them.

Closed forms used throughout (Mbar is the expected game matrix):

* linear max/min over a simplex sits at a vertex, so the bilinear gap
  needs only coordinate max/min of Mbar' xhat1 and Mbar xhat2;
* max_{x in simplex} (a'x - sum x log x) = log sum_j exp(a_j);
* min_{x in simplex} (b'x + sum x log x) = -log sum_j exp(-b_j).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.special import logsumexp, softmax

from .engine import Trajectory
from .games import (EPS_INTERIOR, MatrixGameSpec, lipschitz_profile,
                    mean_matrix)
from .geometry import Regularizer, primal_norm
from .topology import DecayConstants

__all__ = [
    "BoundParams",
    "MetricSeries",
    "NonConvergenceError",
    "bound_params",
    "simplex_diameter_sq",
    "consensus_envelope",
    "consensus_envelope_series",
    "regret_bound_cc",
    "regret_bound_cc_series",
    "regret_bound_sc",
    "sc_regret_coefficient",
    "ergodic_gap_bound",
    "ergodic_gap_bound_series",
    "mse_bound_sc",
    "best_response_value",
    "gap",
    "mean_gap",
    "pseudo_regret",
    "pseudo_regret_series",
    "gap_series",
    "consensus_error_series",
    "absolute_error",
    "absolute_error_series",
    "xhat_mse_series",
    "ne_reference",
]


class NonConvergenceError(RuntimeError):
    """The reference NE solver hit its iteration cap."""


# ---------------------------------------------------------------------------
# Bound parameters
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BoundParams:
    """Everything the bound right-hand sides consume.

    ``alpha`` is the realized step-size function t -> alpha(t);
    ``schedule_kind`` gates the strongly-convex-only bound.
    """

    L: float
    nu1: float
    nu2: float
    r1_sq: float
    r2_sq: float
    decay1: DecayConstants
    decay2: DecayConstants
    lambda1: float
    lambda2: float
    n1: int
    n2: int
    alpha: Callable[[int], float]
    schedule_kind: str = "power"

    def per_network(self, l: int):
        if l == 1:
            return self.nu1, self.r1_sq, self.decay1, self.lambda1, self.n1
        return self.nu2, self.r2_sq, self.decay2, self.lambda2, self.n2


def simplex_diameter_sq(reg: Regularizer) -> float:
    """Bregman diameter R^2 of the simplex for the regularizer.

    euclidean: max (1/2)||x - x'||_2^2 = 1 (opposite vertices).
    entropic : unbounded on the closed simplex; quoted on the clamped
    interior {x : x_p >= EPS_INTERIOR} as log K + log(1/EPS_INTERIOR),
    a conservative surrogate (multiplicative-weights iterates from an
    interior start stay strictly positive).
    """
    if reg.kind == "euclidean":
        return 1.0
    return float(np.log(reg.dimension) + np.log(1.0 / EPS_INTERIOR))


def bound_params(game: MatrixGameSpec, geometry: str, topo, schedule,
                 x1_init: np.ndarray, x2_init: np.ndarray,
                 l_scale: float = 1.0) -> BoundParams:
    """Assemble BoundParams for a concrete run setup.

    ``l_scale`` rescales the Lipschitz constant (1.0 for honest bounds;
    deliberately small values are used by negative-control fixtures).
    """
    k1, k2 = game.action_counts
    prof = lipschitz_profile(game, geometry)
    reg1 = Regularizer(geometry, k1)
    reg2 = Regularizer(geometry, k2)
    lam1 = max(primal_norm(reg1, x1_init[i]) for i in range(game.n1))
    lam2 = max(primal_norm(reg2, x2_init[j]) for j in range(game.n2))
    return BoundParams(
        L=prof.L * l_scale, nu1=prof.nu1, nu2=prof.nu2,
        r1_sq=simplex_diameter_sq(reg1), r2_sq=simplex_diameter_sq(reg2),
        decay1=topo.w1.decay(), decay2=topo.w2.decay(),
        lambda1=lam1, lambda2=lam2, n1=game.n1, n2=game.n2,
        alpha=schedule.alpha, schedule_kind=schedule.kind)


# ---------------------------------------------------------------------------
# Envelopes (bound right-hand sides)
# ---------------------------------------------------------------------------

def _geom_step_sums(params: BoundParams, l: int, T: int) -> np.ndarray:
    """S_l(t) = sum_{s=1}^{t-1} theta_l^(t-1-s) alpha(s-1) for t = 1..T,
    via the recursion S(1) = 0, S(t+1) = theta*S(t) + alpha(t-1).
    Returned array is indexed so that entry [t-1] is S_l(t)."""
    _, _, decay, _, _ = params.per_network(l)
    out = np.empty(T)
    s = 0.0
    for t in range(1, T + 1):
        out[t - 1] = s
        s = decay.theta * s + params.alpha(t - 1)
    return out


def consensus_envelope(params: BoundParams, l: int, t: int) -> float:
    """H_l(t) = n Gamma theta^(t-1) Lambda + 2 (L+nu) alpha(t-1)
    + n Gamma (L+nu) sum_{s=1}^{t-1} theta^(t-1-s) alpha(s-1)."""
    if t < 1:
        raise ValueError("consensus envelope is defined for t >= 1")
    return float(consensus_envelope_series(params, l, t)[-1])


def consensus_envelope_series(params: BoundParams, l: int, T: int) -> np.ndarray:
    """H_l(t) for t = 1..T (entry [t-1] is H_l(t))."""
    nu, _, decay, lam, n = params.per_network(l)
    lnu = params.L + nu
    s = _geom_step_sums(params, l, T)
    t = np.arange(1, T + 1)
    a_prev = np.array([params.alpha(tt - 1) for tt in t])
    return (n * decay.gamma * decay.theta ** (t - 1) * lam
            + 2.0 * lnu * a_prev + n * decay.gamma * lnu * s)


def regret_bound_cc(params: BoundParams, T: int) -> float:
    """Convex-concave pseudo-regret bound at horizon T."""
    if T < 1:
        raise ValueError("T must be at least 1")
    return float(regret_bound_cc_series(params, T)[-1])


def regret_bound_cc_series(params: BoundParams, T: int) -> np.ndarray:
    """The convex-concave bound for every horizon 1..T (entry [T'-1]).

    Four terms: step-size sum with coefficient (L+nu)(9L+nu); the
    network-mixing double sum with coefficient 4 L n Gamma (L+nu); the
    initial-condition geometric sum 4 L n Gamma Lambda theta^(t-1); and
    the diameter term R_1^2 / alpha(T).
    """
    L = params.L
    t = np.arange(1, T + 1)
    a_prev = np.array([params.alpha(tt - 1) for tt in t])
    total = np.zeros(T)
    for l in (1, 2):
        nu, _, decay, lam, n = params.per_network(l)
        lnu = L + nu
        total += np.cumsum(lnu * (9.0 * L + nu) * a_prev)
        total += 4.0 * L * n * decay.gamma * lnu * np.cumsum(
            _geom_step_sums(params, l, T))
        total += 4.0 * L * n * decay.gamma * lam * np.cumsum(
            decay.theta ** (t - 1))
    a_T = np.array([params.alpha(tt) for tt in t])
    return total + params.r1_sq / a_T


def sc_regret_coefficient(params: BoundParams) -> float:
    """Coefficient of (1 + log T) in the strongly-convex regret bound."""
    L = params.L
    coef = 0.0
    for l in (1, 2):
        nu, _, decay, _, n = params.per_network(l)
        coef += (L + nu) * (9.0 * L + nu
                            + 4.0 * L * n * decay.gamma / (1.0 - decay.theta))
    return coef


def regret_bound_sc(params: BoundParams, T: int) -> float:
    """Strongly-convex-strongly-concave pseudo-regret bound at horizon T:
    coefficient * (1 + log T) plus the initial-condition constant."""
    if T < 1:
        raise ValueError("T must be at least 1")
    if params.schedule_kind != "strongly_convex":
        raise ValueError("this bound requires the strongly_convex schedule")
    const = 0.0
    for l in (1, 2):
        nu, _, decay, lam, n = params.per_network(l)
        const += (4.0 * params.L * n * decay.gamma * lam
                  * params.alpha(0) / (1.0 - decay.theta))
    return sc_regret_coefficient(params) * (1.0 + np.log(T)) + const


def _m1_m2(params: BoundParams):
    L = params.L
    m1 = m2 = 0.0
    for l in (1, 2):
        nu, r_sq, decay, lam, n = params.per_network(l)
        m1 += (4.0 * L * n * decay.gamma * lam * params.alpha(0)
               / (1.0 - decay.theta) + 2.0 * r_sq)
        m2 += (4.0 * L * (L + nu) * (n * decay.gamma / (1.0 - decay.theta) + 2.0)
               + (L + nu) ** 2 + nu ** 2 / 2.0)
    return m1, m2


def ergodic_gap_bound(params: BoundParams, t: int) -> float:
    """Expected-gap bound for the time-averaged pair at time t:
    (M1 + M2 sum_{s<t} alpha^2(s)) / sum_{s<t} alpha(s)."""
    if t < 1:
        raise ValueError("t must be at least 1")
    return float(ergodic_gap_bound_series(params, t)[-1])


def ergodic_gap_bound_series(params: BoundParams, T: int) -> np.ndarray:
    """Gap bound for t = 1..T (entry [t-1])."""
    m1, m2 = _m1_m2(params)
    a = np.array([params.alpha(s) for s in range(T)])
    return (m1 + m2 * np.cumsum(a * a)) / np.cumsum(a)


def mse_bound_sc(params: BoundParams, mu: float, t: int) -> float:
    """Mean-squared-error bound for the time-averaged pair when U is
    mu-strongly convex-strongly concave: (2/mu) times the gap bound."""
    if mu <= 0:
        raise ValueError("mu must be positive")
    return 2.0 / mu * ergodic_gap_bound(params, t)


# ---------------------------------------------------------------------------
# Gap / best responses
# ---------------------------------------------------------------------------

def _entropy(z: np.ndarray) -> float:
    mask = z > 0
    return float(np.sum(z[mask] * np.log(z[mask])))


def best_response_value(game: MatrixGameSpec, side: str, fixed_point) -> float:
    """Inner optimum of the gap function.

    side "max": max_{x2} U(xhat1, x2) for fixed_point = xhat1.
    side "min": min_{x1} U(x1, xhat2) for fixed_point = xhat2.

    Bilinear case: coordinate max/min of the payoff vector (a linear
    function on a simplex is extremal at a vertex).  Regularized case:
    log-sum-exp closed forms plus the fixed side's entropy term.
    """
    p = np.asarray(fixed_point, dtype=float)
    m = mean_matrix(game)
    if side == "max":
        payoff = p @ m  # length K2
        if not game.regularized:
            return float(payoff.max())
        return _entropy(p) + float(logsumexp(payoff))
    if side == "min":
        payoff = m @ p  # length K1
        if not game.regularized:
            return float(payoff.min())
        return -float(logsumexp(-payoff)) - _entropy(p)
    raise ValueError("side must be 'max' or 'min'")


def gap(game: MatrixGameSpec, xhat1, xhat2) -> float:
    """delta(xhat1, xhat2) = max_{x2} U(xhat1, x2) - min_{x1} U(x1, xhat2).

    Nonnegative, and zero exactly at a Nash equilibrium.
    """
    return (best_response_value(game, "max", xhat1)
            - best_response_value(game, "min", xhat2))


def mean_gap(trajs, game: MatrixGameSpec, t: int) -> float:
    """Average of gap(xhat_{1,i}(t), xhat_{2,j}(t)) over all agent pairs
    (i, j), then over sample paths.

    The pair average separates: mean_{i,j} [a_i - b_j] equals
    mean_i a_i - mean_j b_j with a and b the per-agent best-response
    values.
    """
    from .engine import time_averaged_iterate
    vals = []
    for traj in trajs:
        a = np.mean([best_response_value(game, "max",
                                         time_averaged_iterate(traj, 1, i, t))
                     for i in range(traj.x1.shape[1])])
        b = np.mean([best_response_value(game, "min",
                                         time_averaged_iterate(traj, 2, j, t))
                     for j in range(traj.x2.shape[1])])
        vals.append(a - b)
    return float(np.mean(vals))


# ---------------------------------------------------------------------------
# Pseudo regret
# ---------------------------------------------------------------------------

def pseudo_regret(x1_seq: np.ndarray, u2_seq: np.ndarray,
                  game: MatrixGameSpec, T: int) -> float:
    """Cumulative cost of played strategies against the local opponent
    estimates, minus the best fixed strategy in hindsight:

        sum_{t=1}^T U(x(t), u(t)) - min_{x1} sum_{t=1}^T U(x1, u(t)),

    evaluated with the expected cost.  The u-side entropy terms of the
    regularized cost appear in both sums and cancel; the offline
    minimizer has closed form (vertex minimum, or -T log sum exp(-c/T)
    for the entropic comparator with c the accumulated payoff vector).
    """
    if T < 1:
        raise ValueError("pseudo regret needs T >= 1")
    return float(pseudo_regret_series(x1_seq, u2_seq, game, T)[T - 1])


def pseudo_regret_series(x1_seq: np.ndarray, u2_seq: np.ndarray,
                         game: MatrixGameSpec, T: int) -> np.ndarray:
    """Pseudo regret at every horizon 1..T (entry [T'-1]) for one agent.

    ``x1_seq`` and ``u2_seq`` are (>=T+1, K) slices of the trajectory for
    one network-1 agent: its iterates and its opponent estimates.
    """
    m = mean_matrix(game)
    x = x1_seq[1:T + 1]
    u = u2_seq[1:T + 1]
    played = np.einsum("tk,tk->t", x @ m, u)
    if game.regularized:
        with np.errstate(divide="ignore", invalid="ignore"):
            xe = np.where(x > 0, x * np.log(x), 0.0)
        played = played + xe.sum(axis=1)
    cum_played = np.cumsum(played)
    c = np.cumsum(u, axis=0) @ m.T  # row T'-1 holds Mbar @ sum_{t<=T'} u(t)
    if not game.regularized:
        comparator = c.min(axis=1)
    else:
        horizons = np.arange(1, T + 1, dtype=float)
        comparator = -horizons * logsumexp(-c / horizons[:, None], axis=1)
    return cum_played - comparator


# ---------------------------------------------------------------------------
# Per-path metric series (vectorized over t)
# ---------------------------------------------------------------------------

def _xhat_all(traj: Trajectory, l: int) -> np.ndarray:
    """Time-averaged iterates xhat(t) for t = 1..T, all agents:
    shape (T, n, K) with entry [t-1] = xhat(t)."""
    x = traj.x1 if l == 1 else traj.x2
    T = traj.horizon
    w = traj.alphas[:T]
    cum = np.cumsum(w[:, None, None] * x[:T], axis=0)
    return cum / np.cumsum(w)[:, None, None]


def gap_series(traj: Trajectory, game: MatrixGameSpec) -> np.ndarray:
    """Pair-averaged gap of the time-averaged iterates, for t = 1..T."""
    m = mean_matrix(game)
    h1 = _xhat_all(traj, 1)  # (T, n1, K1)
    h2 = _xhat_all(traj, 2)
    pay1 = h1 @ m      # (T, n1, K2)
    pay2 = h2 @ m.T    # (T, n2, K1)
    if not game.regularized:
        a = pay1.max(axis=2).mean(axis=1)
        b = pay2.min(axis=2).mean(axis=1)
        return a - b
    ent1 = np.sum(np.where(h1 > 0, h1 * np.log(h1), 0.0), axis=2)
    ent2 = np.sum(np.where(h2 > 0, h2 * np.log(h2), 0.0), axis=2)
    a = (ent1 + logsumexp(pay1, axis=2)).mean(axis=1)
    b = (-logsumexp(-pay2, axis=2) - ent2).mean(axis=1)
    return a - b


def consensus_error_series(traj: Trajectory, l: int, norm_kind: str) -> np.ndarray:
    """||x_{l,i}(t) - xbar_l(t)|| for t = 0..T, all agents: (T+1, n_l)."""
    x = traj.x1 if l == 1 else traj.x2
    dev = x - x.mean(axis=1, keepdims=True)
    if norm_kind == "l2":
        return np.linalg.norm(dev, axis=2)
    return np.abs(dev).sum(axis=2)


def absolute_error(x1_agents: np.ndarray, x2_agents: np.ndarray,
                   ne_pair) -> float:
    """Agent-averaged l2 distance of actual iterates to the NE:
    mean_i ||x_{1,i} - x1*|| + mean_j ||x_{2,j} - x2*||."""
    x1_star, x2_star = ne_pair
    return (float(np.linalg.norm(x1_agents - x1_star, axis=1).mean())
            + float(np.linalg.norm(x2_agents - x2_star, axis=1).mean()))


def absolute_error_series(traj: Trajectory, ne_pair) -> np.ndarray:
    """absolute_error at every t = 0..T."""
    x1_star, x2_star = ne_pair
    e1 = np.linalg.norm(traj.x1 - x1_star, axis=2).mean(axis=1)
    e2 = np.linalg.norm(traj.x2 - x2_star, axis=2).mean(axis=1)
    return e1 + e2


def xhat_mse_series(traj: Trajectory, ne_pair, norm_kind: str) -> np.ndarray:
    """Pair-averaged squared NE error of the time-averaged iterates for
    t = 1..T: mean_i ||xhat1_i - x1*||^2 + mean_j ||xhat2_j - x2*||^2."""
    x1_star, x2_star = ne_pair
    h1 = _xhat_all(traj, 1) - x1_star
    h2 = _xhat_all(traj, 2) - x2_star
    if norm_kind == "l2":
        n1 = np.linalg.norm(h1, axis=2)
        n2 = np.linalg.norm(h2, axis=2)
    else:
        n1 = np.abs(h1).sum(axis=2)
        n2 = np.abs(h2).sum(axis=2)
    return (n1 ** 2).mean(axis=1) + (n2 ** 2).mean(axis=1)


# ---------------------------------------------------------------------------
# Nash equilibrium reference
# ---------------------------------------------------------------------------

_NE_ITER_CAP = 10 ** 6


def ne_reference(game: MatrixGameSpec, tolerance: float = 1e-9):
    """Reference Nash equilibrium of the expected game.

    Regularized game: damped best-response fixed point
        x1 <- (1-d) x1 + d softmax(-Mbar x2),
        x2 <- (1-d) x2 + d softmax(Mbar' x1),     d = 1/2,
    run until the successive-iterate l1 change drops below ``tolerance``
    and gap(x1, x2) <= 10 * tolerance.

    Bilinear game: centralized extragradient on the saddle, run until
    either the last iterate or the uniform average has gap <= tolerance
    (the last iterate converges fast on games with a unique equilibrium;
    the average covers degenerate games at an O(1/t) rate).

    Raises :class:`NonConvergenceError` past 10^6 iterations.
    """
    m = mean_matrix(game)
    k1, k2 = game.action_counts
    if game.regularized:
        x1 = np.full(k1, 1.0 / k1)
        x2 = np.full(k2, 1.0 / k2)
        for _ in range(_NE_ITER_CAP):
            x1_new = 0.5 * x1 + 0.5 * softmax(-(m @ x2))
            x2_new = 0.5 * x2 + 0.5 * softmax(m.T @ x1_new)
            change = np.abs(x1_new - x1).sum() + np.abs(x2_new - x2).sum()
            x1, x2 = x1_new, x2_new
            if change < tolerance and gap(game, x1, x2) <= 10.0 * tolerance:
                return x1, x2
        raise NonConvergenceError(
            f"regularized fixed point did not reach tolerance {tolerance}")
    # Bilinear: projected extragradient with averaging.
    from .geometry import project_simplex
    x1 = np.full(k1, 1.0 / k1)
    x2 = np.full(k2, 1.0 / k2)
    step = 1.0 / (2.0 * max(float(np.linalg.norm(m, 2)), 1e-12))
    avg1 = np.zeros(k1)
    avg2 = np.zeros(k2)
    for it in range(1, _NE_ITER_CAP + 1):
        y1 = project_simplex(x1 - step * (m @ x2))
        y2 = project_simplex(x2 + step * (m.T @ x1))
        x1 = project_simplex(x1 - step * (m @ y2))
        x2 = project_simplex(x2 + step * (m.T @ y1))
        avg1 += x1
        avg2 += x2
        if it % 200 == 0:
            if gap(game, x1, x2) <= tolerance:
                return x1, x2
            cand1, cand2 = avg1 / it, avg2 / it
            if gap(game, cand1, cand2) <= tolerance:
                return cand1, cand2
    raise NonConvergenceError(
        f"extragradient did not reach gap tolerance {tolerance}")


# ---------------------------------------------------------------------------
# Series container
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MetricSeries:
    """One named series on a time grid, with across-path mean and
    standard error."""

    metric: str
    series_id: str
    ts: np.ndarray
    mean: np.ndarray
    stderr: np.ndarray

    def __post_init__(self):
        if not (len(self.ts) == len(self.mean) == len(self.stderr)):
            raise ValueError("series lengths must match the time grid")
        if not (np.all(np.isfinite(self.mean)) and np.all(np.isfinite(self.stderr))):
            raise ValueError("series values must be finite")
