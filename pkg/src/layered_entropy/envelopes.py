"""Envelope and linear-programming characterizations of layered entropy.

No LP solver is used. The maximizing coupling is built in closed form from
the layer channel, and the maximum is checked from above with randomly
generated feasible points.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channels import (
    JointPmf,
    compression_pmf,
    cond_min_entropy,
    cond_shannon,
    layer_channel,
    random_channel,
)
from .pmf import PmfLike, as_pmf, layered_entropy, sort_pmf
from .rng import SplitMix64

FEAS_TOL = 1e-12


@dataclass(frozen=True)
class Coupling:
    """p(x, k) on X x {1..|X|}; column k-1 holds K = k."""

    matrix: np.ndarray

    @property
    def k_marginal(self) -> np.ndarray:
        return self.matrix.sum(axis=0)

    @property
    def x_marginal(self) -> np.ndarray:
        return self.matrix.sum(axis=1)

    def objective(self) -> float:
        """E[log K]."""
        k = np.arange(1, self.matrix.shape[1] + 1, dtype=float)
        return math.fsum(self.k_marginal * np.log2(k))

    def feasibility_residual(self) -> float:
        """max over (x, k) of p(x, k) - p_K(k)/k; feasible when <= 0."""
        k = np.arange(1, self.matrix.shape[1] + 1, dtype=float)
        return float((self.matrix - self.k_marginal / k).max())

    def is_feasible(self, p: PmfLike, tol: float = FEAS_TOL) -> bool:
        px = as_pmf(p).probs
        return (
            self.feasibility_residual() <= tol
            and bool(np.all(self.matrix >= -tol))
            and bool(np.allclose(self.x_marginal, px, rtol=0, atol=tol))
        )

    def to_csv(self) -> str:
        return "\n".join(",".join(f"{v:.12g}" for v in row) for row in self.matrix) + "\n"

    def metadata(self) -> dict:
        return {"objective": self.objective(), "feasibility_residual": self.feasibility_residual()}


def lp_coupling_construct(p: PmfLike) -> Coupling:
    """The optimal coupling: K is the number of atoms in the layer of Y.

    Rows keep the order of ``p``.
    """
    layers = layer_channel(p).matrix
    n = layers.shape[0]
    counts = np.count_nonzero(layers > 0, axis=0)
    c = np.zeros((n, n))
    for j, k in enumerate(counts):
        c[:, k - 1] += layers[:, j]
    return Coupling(c)


def _coupling_from_channel(j: JointPmf) -> Coupling:
    """K = floor(1 / max_x p(x|y)) pooled over y; always feasible."""
    n = j.shape[0]
    c = np.zeros((n, n))
    for y, w, row in j.conditionals():
        k = min(n, max(1, int(math.floor(1.0 / float(row.max())))))
        c[:, k - 1] += j.matrix[:, y]
    return Coupling(c)


def random_uniform_partition(rng: SplitMix64, p: PmfLike, max_parts: int = 64) -> JointPmf:
    """A channel whose every posterior p(.|y) is uniform on its support.

    Mass is peeled off ``p`` one uniform block at a time: pick a random
    subset of the atoms still holding mass and remove a random fraction of
    the largest uniform block it can hold. The last blocks take the full
    amount so the procedure ends with no mass left.
    """
    r = np.array(as_pmf(p).probs, dtype=float)
    n = r.size
    cols = []
    while True:
        alive = np.flatnonzero(r > 0)
        if alive.size == 0:
            break
        pick = [x for x in alive if rng.random() < 0.5]
        if not pick:
            pick = [int(alive[rng.integer(0, alive.size - 1)])]
        pick = np.array(pick)
        h = float(r[pick].min())
        frac = 1.0 if len(cols) >= max_parts else rng.uniform(0.2, 1.0)
        if frac > 0.8:
            frac = 1.0
        col = np.zeros(n)
        col[pick] = h * frac
        cols.append(col)
        r[pick] -= h * frac
        r[np.abs(r) <= 1e-15] = 0.0
    return JointPmf(np.array(cols).T)


def random_feasible_coupling(rng: SplitMix64, p: PmfLike, eps: float) -> Coupling:
    """Mix the optimal coupling with a random feasible one.

    The feasible set is convex, so ``(1 - eps) * optimal + eps * other``
    stays feasible and keeps the X-marginal.
    """
    px = as_pmf(p)
    n = len(px)
    if rng.random() < 0.5:
        other = _coupling_from_channel(JointPmf.from_channel(px, random_channel(rng, n, rng.integer(1, 2 * n))))
    else:
        other = lp_coupling_from_uniform(random_uniform_partition(rng, px))
    best = lp_coupling_construct(px)
    return Coupling((1.0 - eps) * best.matrix + eps * other.matrix)


def lp_coupling_from_uniform(j: JointPmf) -> Coupling:
    """K = support size of the uniform posterior p(.|y)."""
    n = j.shape[0]
    c = np.zeros((n, n))
    for y, _, row in j.conditionals():
        k = int(np.count_nonzero(row > 0))
        c[:, k - 1] += j.matrix[:, y]
    return Coupling(c)


def lp_objective_upper_check(p: PmfLike, trials: int, seed: int = 0, tol: float = 1e-9) -> bool:
    """Conditional min-entropy never exceeds Lambda over random channels."""
    if trials < 1:
        raise ValueError("trials must be at least 1")
    px = as_pmf(p)
    n = len(px)
    lam = layered_entropy(px)
    master = SplitMix64(seed)
    for t in range(trials):
        rng = SplitMix64(master.derive(t))
        j = JointPmf.from_channel(px, random_channel(rng, n, rng.integer(1, 2 * n)))
        if cond_min_entropy(j) > lam + tol:
            return False
    return True


def uniform_conditional_envelope_check(p: PmfLike, trials: int, seed: int = 0, tol: float = 1e-9) -> bool:
    """H(X|Y) <= Lambda for uniform-posterior channels, with equality at the layer channel."""
    if trials < 1:
        raise ValueError("trials must be at least 1")
    px = as_pmf(p)
    lam = layered_entropy(px)
    if abs(cond_shannon(layer_channel(px)) - lam) > tol:
        return False
    master = SplitMix64(seed)
    for t in range(trials):
        j = random_uniform_partition(SplitMix64(master.derive(t)), px)
        if cond_shannon(j) > lam + tol:
            return False
    return True


def layer_fixed_point_check(p: PmfLike, tol: float = 1e-12) -> bool:
    """Compressing X given its layer index returns p sorted."""
    q = sort_pmf(p)
    u = compression_pmf(layer_channel(q)).probs
    return bool(np.max(np.abs(u - q.probs)) <= tol)


__all__ = [
    "Coupling",
    "layer_fixed_point_check",
    "lp_coupling_construct",
    "lp_coupling_from_uniform",
    "lp_objective_upper_check",
    "random_feasible_coupling",
    "random_uniform_partition",
    "uniform_conditional_envelope_check",
]
