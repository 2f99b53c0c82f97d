"""Distance-generating functions, Bregman divergences, and prox-mappings.

Strategy sets are probability simplices.  Two regularizers are supported:

* ``euclidean`` -- psi(x) = (1/2)||x||_2^2, paired with the l2/l2 norm
  pair.  Its prox-mapping is the Euclidean projection of ``x + y`` onto
  the simplex.
* ``entropic``  -- psi(x) = sum_j x_j log x_j, paired with the l1 primal
  / l-infinity dual norm pair.  Its prox-mapping is the multiplicative
  weights rule, evaluated in the log domain for overflow safety.

Both are 1-strongly convex with respect to their primal norm, so every
Bregman divergence here satisfies D(x, p) >= (1/2)||x - p||^2.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "Regularizer",
    "SimplexPoint",
    "DualVector",
    "bregman_divergence",
    "prox_map",
    "project_simplex",
    "primal_norm",
    "dual_norm",
]

_KINDS = ("euclidean", "entropic")


@dataclass(frozen=True)
class Regularizer:
    """A distance-generating function over the K-simplex.

    Attributes
    ----------
    kind : {"euclidean", "entropic"}
    dimension : int
        Number of simplex coordinates K.
    """

    kind: str
    dimension: int

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"unknown regularizer kind {self.kind!r}")
        if self.dimension < 1:
            raise ValueError("dimension must be a positive integer")

    @property
    def primal_norm_name(self) -> str:
        return "l2" if self.kind == "euclidean" else "l1"

    @property
    def dual_norm_name(self) -> str:
        return "l2" if self.kind == "euclidean" else "linf"

    @property
    def strong_convexity_modulus(self) -> float:
        # Both built-ins are exactly 1-strongly convex w.r.t. their norm.
        return 1.0


@dataclass(frozen=True)
class SimplexPoint:
    """Validated strategy vector: nonnegative, sums to 1 within 1e-12.

    Interchangeable with a plain array wherever a point is expected
    (the array protocol hands ``coordinates`` to numpy).
    """

    coordinates: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coordinates, dtype=float)
        if c.ndim != 1 or not np.all(np.isfinite(c)):
            raise ValueError("coordinates must be a finite vector")
        if np.any(c < 0) or abs(c.sum() - 1.0) > 1e-12:
            raise ValueError("coordinates must be a probability vector")
        object.__setattr__(self, "coordinates", c)

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.coordinates, dtype=dtype)


@dataclass(frozen=True)
class DualVector:
    """Dual-space payload y: any finite vector."""

    coordinates: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coordinates, dtype=float)
        if c.ndim != 1 or not np.all(np.isfinite(c)):
            raise ValueError("coordinates must be a finite vector")
        object.__setattr__(self, "coordinates", c)

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.coordinates, dtype=dtype)


def primal_norm(reg: Regularizer, z: np.ndarray) -> float:
    """Norm paired with the regularizer on the primal side."""
    z = np.asarray(z, dtype=float)
    if reg.kind == "euclidean":
        return float(np.linalg.norm(z))
    return float(np.abs(z).sum())


def dual_norm(reg: Regularizer, z: np.ndarray) -> float:
    """Norm paired with the regularizer on the dual (subgradient) side."""
    z = np.asarray(z, dtype=float)
    if reg.kind == "euclidean":
        return float(np.linalg.norm(z))
    return float(np.abs(z).max())


def _check_simplex_input(x: np.ndarray, name: str) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(x)):
        raise ValueError(f"{name} has non-finite entries")
    if np.any(x < 0):
        raise ValueError(f"{name} has negative coordinates")
    return x


def bregman_divergence(reg: Regularizer, x, p) -> float:
    """D_psi(x, p) = psi(x) - psi(p) - <grad psi(p), x - p>.

    For the euclidean kind this is (1/2)||x - p||_2^2; for the entropic
    kind on the simplex it reduces to the KL divergence sum_j x_j
    log(x_j / p_j), with the convention 0 log 0 = 0.

    Raises
    ------
    ValueError
        Negative coordinates, or (entropic only) a zero coordinate in
        ``p`` -- grad psi is undefined there.
    """
    x = _check_simplex_input(x, "x")
    p = _check_simplex_input(p, "p")
    if x.shape != p.shape:
        raise ValueError("x and p must have the same shape")
    if reg.kind == "euclidean":
        d = x - p
        return float(0.5 * np.dot(d, d))
    if np.any(p == 0):
        raise ValueError("entropic divergence needs strictly positive p")
    # KL with 0 log 0 = 0 on the x side.
    mask = x > 0
    return float(np.sum(x[mask] * np.log(x[mask] / p[mask])))


def prox_map(reg: Regularizer, x, y) -> np.ndarray:
    """Prox-mapping P_x(y) = argmin_{x'} { <y, x - x'> + D_psi(x', x) }.

    The payload ``y`` lives in the dual space; a mirror-descent step
    with step size a and subgradient g passes y = -a * g.  Equivalently
    the map maximizes <y, x'> - D_psi(x', x) over the simplex.

    euclidean: projection of (x + y) onto the simplex.
    entropic : multiplicative weights, x'_j proportional to x_j exp(y_j),
               computed as exp(log x_j + y_j - max) / sum.
    """
    x = _check_simplex_input(x, "x")
    y = np.asarray(y, dtype=float)
    if not np.all(np.isfinite(y)):
        raise ValueError("payload y has non-finite entries")
    if x.shape != y.shape:
        raise ValueError("x and y must have the same shape")
    if reg.kind == "euclidean":
        return project_simplex(x + y)
    with np.errstate(divide="ignore"):  # log(0) -> -inf keeps zero mass at zero
        z = np.log(x) + y
    z = z - z.max()
    w = np.exp(z)
    return w / w.sum()


def project_simplex(v) -> np.ndarray:
    """Euclidean projection onto the probability simplex.

    Sort-and-threshold method: with u = sort(v, descending) and
    cum_k = sum_{j<=k} u_j, the threshold is tau = (cum_rho - 1)/rho for
    the largest rho with u_rho > (cum_rho - 1)/rho, and the projection
    is max(v - tau, 0).
    """
    v = np.asarray(v, dtype=float)
    if not np.all(np.isfinite(v)):
        raise ValueError("cannot project a non-finite vector")
    u = np.sort(v)[::-1]
    cum = np.cumsum(u)
    idx = np.arange(1, v.size + 1)
    rho = np.nonzero(u * idx > cum - 1.0)[0][-1]
    tau = (cum[rho] - 1.0) / (rho + 1.0)
    return np.maximum(v - tau, 0.0)


def project_simplex_rows(v: np.ndarray) -> np.ndarray:
    """Row-wise simplex projection of an (n, K) array (same threshold rule)."""
    v = np.asarray(v, dtype=float)
    u = np.sort(v, axis=1)[:, ::-1]
    cum = np.cumsum(u, axis=1)
    idx = np.arange(1, v.shape[1] + 1)
    mask = u * idx > cum - 1.0
    rho = v.shape[1] - 1 - np.argmax(mask[:, ::-1], axis=1)
    tau = (cum[np.arange(v.shape[0]), rho] - 1.0) / (rho + 1.0)
    return np.maximum(v - tau[:, None], 0.0)


def prox_map_rows(reg: Regularizer, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Row-wise prox over agents: x, y are (n, K); row i gets P_{x_i}(y_i).

    Arithmetic per row is identical to :func:`prox_map` on that row.
    """
    if reg.kind == "euclidean":
        return project_simplex_rows(x + y)
    with np.errstate(divide="ignore"):
        z = np.log(x) + y
    z = z - z.max(axis=1, keepdims=True)
    w = np.exp(z)
    return w / w.sum(axis=1, keepdims=True)
