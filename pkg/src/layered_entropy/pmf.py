"""Probability mass functions and the layered entropy family.

All entropies are in bits. A pmf may be given as a :class:`Pmf`, a
:class:`SortedPmf` or any 1-d sequence of numbers; sequences are validated
exactly like ``Pmf(values)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np

LOG2E = math.log2(math.e)

SUM_TOL = 1e-9
ALPHA_SNAP = 1e-9


class InvalidPmfError(ValueError):
    """Raised for vectors that are not probability mass functions."""


@dataclass(frozen=True)
class Pmf:
    """A finite pmf, optionally carrying symbol labels.

    Sums off by more than 1e-9 are rejected unless ``normalize`` is set;
    accepted vectors are rescaled so they sum to 1.
    """

    probs: np.ndarray
    labels: tuple | None = None
    normalize: bool = field(default=False, repr=False, compare=False)

    def __post_init__(self):
        probs = np.asarray(self.probs, dtype=float)
        if probs.ndim != 1:
            raise InvalidPmfError("pmf must be one-dimensional")
        if probs.size == 0:
            raise InvalidPmfError("pmf is empty")
        if not np.all(np.isfinite(probs)):
            raise InvalidPmfError("pmf has non-finite entries")
        if np.any(probs < 0):
            raise InvalidPmfError(f"pmf has a negative entry: {probs.min()!r}")
        total = float(probs.sum())
        if total <= 0.0:
            raise InvalidPmfError("pmf has zero total mass")
        if abs(total - 1.0) > SUM_TOL and not self.normalize:
            raise InvalidPmfError(f"pmf sums to {total!r}, not 1")
        probs = probs / total
        probs.setflags(write=False)
        object.__setattr__(self, "probs", probs)
        if self.labels is not None:
            labels = tuple(self.labels)
            if len(labels) != probs.size:
                raise InvalidPmfError("labels and probabilities differ in length")
            object.__setattr__(self, "labels", labels)

    def __len__(self) -> int:
        return self.probs.size


@dataclass(frozen=True)
class SortedPmf:
    """``p`` sorted in descending order.

    ``perm[i]`` is the (0-based) index in the source pmf of the i-th
    largest entry, so ``source.probs[perm] == probs``.
    """

    probs: np.ndarray
    perm: np.ndarray

    def __len__(self) -> int:
        return self.probs.size


PmfLike = Union[Pmf, SortedPmf, Sequence[float], np.ndarray]


def as_pmf(p: PmfLike) -> Pmf:
    if isinstance(p, Pmf):
        return p
    if isinstance(p, SortedPmf):
        return Pmf(p.probs)
    return Pmf(p)


def sort_pmf(p: PmfLike) -> SortedPmf:
    """Sort descending; ties keep ascending original index."""
    if isinstance(p, SortedPmf):
        return p
    p = as_pmf(p)
    perm = np.argsort(-p.probs, kind="stable")
    probs = p.probs[perm]
    probs.setflags(write=False)
    perm.setflags(write=False)
    return SortedPmf(probs, perm)


def _sorted_probs(p: PmfLike) -> np.ndarray:
    return sort_pmf(p).probs


def ell_increment(i: int) -> float:
    """``i log i - (i-1) log(i-1)`` in bits, with ``0 log 0 = 0``."""
    if i < 1 or int(i) != i:
        raise ValueError(f"ell_increment needs a positive integer, got {i!r}")
    return float(ell_increments(int(i))[-1])


def ell_increments(n: int) -> np.ndarray:
    """The increments for i = 1..n as an array.

    Written as ``log i + (i-1) log(i/(i-1))`` to avoid the cancellation in
    the difference of two large products.
    """
    i = np.arange(1, n + 1, dtype=float)
    out = np.zeros(n)
    j = i[1:]
    out[1:] = np.log2(j) + (j - 1.0) * np.log1p(1.0 / (j - 1.0)) * LOG2E
    return out


def _flat_support(q: np.ndarray) -> int | None:
    """Support size when every positive entry is bitwise equal, else None.

    Uniform inputs then get the closed form log2(n) exactly, with no
    rounding from summing n equal terms.
    """
    nz = q[q > 0]
    return int(nz.size) if nz.size and bool(np.all(nz == nz[0])) else None


def layered_entropy(p: PmfLike) -> float:
    """Discrete layered entropy: sum of ``p_sorted[i] * ell(i)``."""
    q = _sorted_probs(p)
    if (n := _flat_support(q)) is not None:
        return math.log2(n)
    return float(np.dot(q, ell_increments(q.size)))


def layered_entropy_by_layers(p: PmfLike) -> float:
    """Exact evaluation of the layer integral.

    The count ``|{x: p(x) > t}|`` is constant between consecutive sorted
    values, so the integral over t in [0, 1] is a finite sum of
    ``(p_j - p_{j+1}) * j log j``.
    """
    q = _sorted_probs(p)
    gaps = q - np.append(q[1:], 0.0)
    j = np.arange(1, q.size + 1, dtype=float)
    return math.fsum(gaps * j * np.log2(j))


@dataclass(frozen=True)
class LayerDecomposition:
    """Mixture weights of ``p_sorted`` over Unif([1]), Unif([2]), ...

    ``weights[k-1]`` is the weight of Unif([k]).
    """

    weights: np.ndarray

    def reconstruct(self) -> np.ndarray:
        n = self.weights.size
        k = np.arange(1, n + 1, dtype=float)
        # entry i receives w_k / k from every k >= i
        return np.cumsum((self.weights / k)[::-1])[::-1]

    def layered_entropy(self) -> float:
        k = np.arange(1, self.weights.size + 1, dtype=float)
        return float(np.dot(self.weights, np.log2(k)))


def layer_decomposition(p: PmfLike) -> LayerDecomposition:
    q = _sorted_probs(p)
    k = np.arange(1, q.size + 1, dtype=float)
    w = k * (q - np.append(q[1:], 0.0))
    return LayerDecomposition(w)


def shannon_entropy(p: PmfLike) -> float:
    q = as_pmf(p).probs
    if (n := _flat_support(q)) is not None:
        return math.log2(n)
    nz = q[q > 0]
    return float(-np.dot(nz, np.log2(nz))) + 0.0


def min_entropy(p: PmfLike) -> float:
    q = as_pmf(p).probs
    if (n := _flat_support(q)) is not None:
        return math.log2(n)
    return -math.log2(float(q.max())) + 0.0


def support_entropy(p: PmfLike) -> float:
    """Order-0 Renyi entropy: log of the number of strictly positive atoms."""
    return math.log2(int(np.count_nonzero(as_pmf(p).probs > 0)))


def _logsumexp2(v: np.ndarray) -> float:
    m = float(v.max())
    return m + math.log2(float(np.exp2(v - m).sum()))


def _check_alpha(alpha: float) -> float:
    alpha = float(alpha)
    if math.isnan(alpha) or alpha < 0:
        raise ValueError(f"order must be nonnegative, got {alpha!r}")
    return alpha


def renyi_entropy(p: PmfLike, alpha: float) -> float:
    """Renyi entropy of order ``alpha`` (``math.inf`` allowed)."""
    alpha = _check_alpha(alpha)
    if math.isinf(alpha):
        return min_entropy(p)
    if alpha < ALPHA_SNAP:
        return support_entropy(p)
    if abs(alpha - 1.0) < ALPHA_SNAP:
        return shannon_entropy(p)
    q = as_pmf(p).probs
    if (n := _flat_support(q)) is not None:
        return math.log2(n)
    q = q[q > 0]
    return _logsumexp2(alpha * np.log2(q)) / (1.0 - alpha)


def renyi_layered_entropy(p: PmfLike, alpha: float) -> float:
    """Renyi layered entropy of order ``alpha``.

    Computed through the layer form ``sum_i i**(1/alpha) (p_i - p_{i+1})``
    in the log domain, so small orders do not overflow.
    """
    alpha = _check_alpha(alpha)
    if math.isinf(alpha):
        return min_entropy(p)
    if alpha < ALPHA_SNAP:
        return support_entropy(p)
    if abs(alpha - 1.0) < ALPHA_SNAP:
        return layered_entropy(p)
    beta = 1.0 / alpha
    q = _sorted_probs(p)
    if (n := _flat_support(q)) is not None:
        return math.log2(n)
    gaps = q - np.append(q[1:], 0.0)
    i = np.arange(1, q.size + 1, dtype=float)
    keep = gaps > 0
    v = beta * np.log2(i[keep]) + np.log2(gaps[keep])
    return _logsumexp2(v) / (beta - 1.0)


def one_to_one_optimal_length(p: PmfLike) -> float:
    """Optimal expected length of a one-to-one (non-prefix-free) code."""
    q = _sorted_probs(p)
    return math.fsum(float(pi) * (i.bit_length() - 1) for i, pi in enumerate(q, start=1))


def resolve_eta(lam: float, eta: float | str) -> float:
    if not isinstance(eta, str):
        return float(eta)
    if eta == "loge":
        return LOG2E
    if eta == "sqrt":
        return math.sqrt(lam * LOG2E / math.e)
    if eta == "opt":
        return optimal_eta(lam)
    raise ValueError(f"unknown eta preset {eta!r}")


def optimal_eta(lam: float) -> float:
    """The eta minimizing ``log(1 + lam/(e eta)) + eta``."""
    return (math.sqrt(lam * lam + 4 * math.e * lam * LOG2E) - lam) / (2 * math.e)


def bound_h_from_lambda(lam: float, eta: float | str = "loge") -> float:
    """Upper bound on Shannon entropy given the layered entropy ``lam``.

    ``eta`` is a positive number or one of the presets ``"loge"``,
    ``"sqrt"``, ``"opt"``. The last two vanish at ``lam == 0``; the bound's
    limit there is 0 and that is what is returned.
    """
    if lam < 0:
        raise ValueError("layered entropy must be nonnegative")
    value = resolve_eta(lam, eta)
    if isinstance(eta, str) and value == 0.0:
        return float(lam)
    if not value > 0:
        raise ValueError(f"eta must be positive, got {value!r}")
    return lam + math.log2(1.0 + lam / (math.e * value)) + value


def majorizes(p: PmfLike, q: PmfLike, tol: float = 1e-12) -> bool:
    """True if every partial sum of sorted ``p`` dominates that of ``q``."""
    a, b = _sorted_probs(p), _sorted_probs(q)
    n = max(a.size, b.size)
    a = np.pad(a, (0, n - a.size))
    b = np.pad(b, (0, n - b.size))
    return bool(np.all(np.cumsum(a) >= np.cumsum(b) - tol))


def is_uniform(p: PmfLike, tol: float = 0.0) -> bool:
    """Uniform on its support (zero atoms ignored)."""
    q = as_pmf(p).probs
    q = q[q > 0]
    return bool(q.max() - q.min() <= tol)


DEFAULT_ALPHAS = (0.0, 0.25, 0.5, 1.0, 2.0, 4.0, math.inf)


@dataclass(frozen=True)
class EntropyReport:
    shannon: float
    layered: float
    min_entropy: float
    renyi: dict
    one_to_one_length: float
    h_upper_bound: float

    def as_dict(self) -> dict:
        return {
            "shannon": self.shannon,
            "layered": self.layered,
            "min_entropy": self.min_entropy,
            "one_to_one_length": self.one_to_one_length,
            "h_upper_bound": self.h_upper_bound,
            "renyi": [
                {"alpha": a, "renyi": h, "renyi_layered": lam}
                for a, (h, lam) in self.renyi.items()
            ],
        }


def entropy_report(
    p: PmfLike, alphas: Sequence[float] = DEFAULT_ALPHAS, eta: float | str = "loge"
) -> EntropyReport:
    lam = layered_entropy(p)
    return EntropyReport(
        shannon=shannon_entropy(p),
        layered=lam,
        min_entropy=min_entropy(p),
        renyi={float(a): (renyi_entropy(p, a), renyi_layered_entropy(p, a)) for a in alphas},
        one_to_one_length=one_to_one_optimal_length(p),
        h_upper_bound=bound_h_from_lambda(lam, eta),
    )
