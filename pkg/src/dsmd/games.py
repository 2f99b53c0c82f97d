"""Two-network stochastic zero-sum matrix games.

Network 1 (n1 minimizing agents) and network 2 (n2 maximizing agents)
play mixed strategies x1, x2 on simplices of sizes K1, K2.  The global
cost is

    U(x1, x2) = (1/n1) * sum_i x1' Abar^i x2      (bilinear case)

optionally plus sum x1 log x1 - sum x2 log x2 (entropic regularization,
which makes U 1-strongly convex-strongly concave with respect to the
entropic regularizer).  Agent i of network 1 carries the private cost
f_{1,i}(x1, x2) = x1' Abar^i x2 (+ regularizers); network 2's costs
f_{2,j} = -x1' B^j x2 (- regularizers) are assigned so that
(1/n1) sum_i f_{1,i} + (1/n2) sum_j f_{2,j} = 0 identically.

Sampled cost matrices are Abar^i plus i.i.d. uniform [-sigma, +sigma]
entry noise, giving unbiased subgradients with bounded second moment.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "MatrixGameSpec",
    "LipschitzProfile",
    "make_matrix_game",
    "mean_matrix",
    "expected_cost",
    "sample_cost_matrix",
    "subgradient_oracle",
    "assign_network2_costs",
    "lipschitz_profile",
]

# Interior clamp used when quoting Lipschitz/diameter constants for the
# entropic geometry: multiplicative-weights iterates from an interior
# start stay strictly positive, and constants are quoted on
# {x : x_p >= EPS_INTERIOR}.
EPS_INTERIOR = 1e-9


def _entropy(z: np.ndarray) -> float:
    """sum_p z_p log z_p with 0 log 0 = 0."""
    mask = z > 0
    return float(np.sum(z[mask] * np.log(z[mask])))


@dataclass(frozen=True)
class MatrixGameSpec:
    """Immutable description of one game instance."""

    n1: int
    n2: int
    action_counts: tuple  # (K1, K2)
    base_matrices: np.ndarray  # (n1, K1, K2) expected cost matrices Abar^i
    noise_half_width: float
    regularization: str  # "none" | "entropic"
    seed: int

    def __post_init__(self):
        k1, k2 = self.action_counts
        if self.base_matrices.shape != (self.n1, k1, k2):
            raise ValueError("base_matrices must have shape (n1, K1, K2)")
        if not np.all(np.isfinite(self.base_matrices)):
            raise ValueError("base matrices must be finite")
        if self.noise_half_width < 0:
            raise ValueError("noise_half_width must be nonnegative")
        if self.regularization not in ("none", "entropic"):
            raise ValueError(f"unknown regularization {self.regularization!r}")

    @property
    def regularized(self) -> bool:
        return self.regularization == "entropic"

    @property
    def strong_convexity_modulus(self) -> float:
        """mu of U w.r.t. the entropic regularizer: 1 when regularized."""
        return 1.0 if self.regularized else 0.0


def make_matrix_game(n1: int, n2: int, k1: int, k2: int,
                     noise_half_width: float = 0.5,
                     regularization: str = "none",
                     seed: int = 0) -> MatrixGameSpec:
    """Draw base matrices with i.i.d. uniform [0, 1] entries from ``seed``."""
    rng = np.random.default_rng(seed)
    base = rng.random((n1, k1, k2))
    return MatrixGameSpec(n1=n1, n2=n2, action_counts=(k1, k2),
                          base_matrices=base,
                          noise_half_width=noise_half_width,
                          regularization=regularization, seed=seed)


def mean_matrix(game: MatrixGameSpec) -> np.ndarray:
    """Mbar = (1/n1) sum_i Abar^i, the matrix of the global cost U."""
    return game.base_matrices.mean(axis=0)


def expected_cost(game: MatrixGameSpec, x1, x2) -> float:
    """U(x1, x2), using the known expected matrices."""
    x1 = np.asarray(x1, dtype=float)
    x2 = np.asarray(x2, dtype=float)
    k1, k2 = game.action_counts
    if x1.shape != (k1,) or x2.shape != (k2,):
        raise ValueError("strategy dimensions do not match the game")
    val = float(x1 @ mean_matrix(game) @ x2)
    if game.regularized:
        val += _entropy(x1) - _entropy(x2)
    return val


def sample_cost_matrix(game: MatrixGameSpec, agent: int,
                       rng: np.random.Generator) -> np.ndarray:
    """One realization A_xi^agent = Abar^agent + uniform entry noise.

    With zero noise width the base matrix is returned as-is and the rng
    is not advanced, so noiseless runs draw nothing.
    """
    if not 0 <= agent < game.n1:
        raise ValueError("agent index out of range")
    base = game.base_matrices[agent]
    if game.noise_half_width == 0.0:
        return base
    s = game.noise_half_width
    return base + rng.uniform(-s, s, size=base.shape)


def assign_network2_costs(game: MatrixGameSpec) -> np.ndarray:
    """Expected matrices B^j of f_{2,j}(x1, x2) = -x1' B^j x2.

    With n1 == n2 each agent j mirrors Abar^j; otherwise every agent
    carries the mean matrix.  Either split satisfies
    (1/n2) sum_j B^j = (1/n1) sum_i Abar^i, so the two networks' average
    costs cancel exactly.
    """
    if game.n1 == game.n2:
        return game.base_matrices
    return np.broadcast_to(mean_matrix(game),
                           (game.n2,) + mean_matrix(game).shape).copy()


def _sampled_matrix(base: np.ndarray, half_width: float,
                    rng: np.random.Generator) -> np.ndarray:
    if half_width == 0.0:
        return base
    return base + rng.uniform(-half_width, half_width, size=base.shape)


def subgradient_oracle(game: MatrixGameSpec, side: int, agent: int,
                       own_consensus, opponent_estimate,
                       rng: np.random.Generator) -> np.ndarray:
    """Sampled subgradient of agent ``agent``'s own cost in its own variable.

    side 1 (minimizers): g = A_xi^i @ u            (+ 1 + log v if regularized)
    side 2 (maximizers): g = -(B_xi^j)' @ u        (+ 1 + log v if regularized)

    where v is the agent's own-network consensus point and u its estimate
    of the opposing network's state.  Both sides then descend with prox
    payload -alpha * g; network 2's cost already encodes maximization.
    """
    v = np.asarray(own_consensus, dtype=float)
    u = np.asarray(opponent_estimate, dtype=float)
    if side == 1:
        a = _sampled_matrix(game.base_matrices[agent], game.noise_half_width, rng)
        g = a @ u
    elif side == 2:
        b = _sampled_matrix(assign_network2_costs(game)[agent],
                            game.noise_half_width, rng)
        g = -(b.T @ u)
    else:
        raise ValueError("side must be 1 or 2")
    if game.regularized:
        if np.any(v <= 0):
            raise ValueError("entropic subgradient needs interior consensus point")
        g = g + (1.0 + np.log(v))
    return g


@dataclass(frozen=True)
class LipschitzProfile:
    """Constants of the smoothness/noise assumptions in a fixed norm pair.

    L bounds |f_{l,i}(x) - f_{l,i}(x')| / (||dx1|| + ||dx2||) and the
    dual norm of every noiseless subgradient; nu_l bounds the conditional
    noise second moment E||ghat - g||_*^2 <= nu_l^2 for network l.
    """

    L: float
    nu1: float
    nu2: float


def lipschitz_profile(game: MatrixGameSpec, geometry_kind: str) -> LipschitzProfile:
    """Conservative (valid) constants for the declared geometry.

    euclidean (l2/l2): L = max_i spectral norm of Abar^i / B^j;
        nu_l^2 = K_l * sigma^2 / 3 (sum of K_l uniform-noise row terms).
    entropic (l1/linf): L = max_i max|entry|; noise rows satisfy
        |(E u)_p| <= sigma for any simplex u, so nu_l = sigma.
    Entropic regularization adds the entropy gradient bound
    1 + log(1/EPS_INTERIOR) on the clamped interior.
    """
    k1, k2 = game.action_counts
    mats = [game.base_matrices[i] for i in range(game.n1)]
    mats += [m for m in assign_network2_costs(game)]
    s = game.noise_half_width
    if geometry_kind == "euclidean":
        l_bil = max(float(np.linalg.norm(m, 2)) for m in mats)
        nu1 = float(np.sqrt(k1 * s * s / 3.0))
        nu2 = float(np.sqrt(k2 * s * s / 3.0))
    elif geometry_kind == "entropic":
        l_bil = max(float(np.abs(m).max()) for m in mats)
        nu1 = nu2 = s
    else:
        raise ValueError(f"unknown geometry kind {geometry_kind!r}")
    if game.regularized:
        l_bil += 1.0 + float(np.log(1.0 / EPS_INTERIOR))
    # Assumption floor: the noise bound must be positive for the decay
    # formulas; keep a tiny epsilon when sigma == 0.
    nu1 = max(nu1, 1e-12)
    nu2 = max(nu2, 1e-12)
    return LipschitzProfile(L=l_bil, nu1=nu1, nu2=nu2)
