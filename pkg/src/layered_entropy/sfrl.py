"""Layered-entropy bound chain for the strong functional representation lemma.

The seed variable S of the lemma is never built. What is computed is the
endpoint of the chain: the layered entropy of the geometric index K given
(X, Y), which upper-bounds Lambda(Y|S), followed by the closed-form bounds
in terms of I(X;Y).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import bisect

from .channels import JointPmf, mutual_information
from .pmf import bound_h_from_lambda, ell_increments, optimal_eta

LOG3 = math.log2(3.0)
DEFAULT_TAIL_TOL = 1e-9
CROSSING_XTOL = 1e-6
RATIO_SNAP = 1e-12


@dataclass(frozen=True)
class InfoDensityTable:
    """iota(x;y) = log p(y|x)/p(y) in bits; NaN off the support."""

    iota: np.ndarray
    support: np.ndarray

    def mean(self, j: JointPmf) -> float:
        return math.fsum(j.matrix[self.support] * self.iota[self.support])


def info_density(j: JointPmf) -> InfoDensityTable:
    m = j.matrix
    support = m > 0
    px, py = j.p_x, j.p_y
    iota = np.full(m.shape, np.nan)
    rows, cols = np.nonzero(support)
    iota[rows, cols] = np.log2(m[rows, cols]) - np.log2(px[rows]) - np.log2(py[cols])
    return InfoDensityTable(iota, support)


@dataclass(frozen=True)
class GeomCoupling:
    """Success parameters rho(x, y) of K given (X, Y) = (x, y); NaN off the support."""

    rho: np.ndarray


def rho(j: JointPmf) -> GeomCoupling:
    """rho(x, y) = 1 / E_{Y'}[max(2^iota(x;y), 2^iota(x;Y'))], exact over Y'.

    Since E[2^iota(x;Y')] = 1 the denominator is 1 + E[(2^iota(x;y) -
    2^iota(x;Y'))^+]. Factoring out 2^iota(x;y) = p(y|x)/p(y) gives

        rho = p(y) / (p(y) + p(y|x) * E[(1 - t(Y'))^+]),

    with t(y') = 2^(iota(x;y') - iota(x;y)) taken in the log domain, so
    tiny masses neither overflow nor underflow. Gaps 1 - t below
    RATIO_SNAP count as zero, which makes independent rows give rho = 1
    exactly. Rows with p(x) = 0 and columns with p(y) = 0 are skipped.
    """
    m = j.matrix
    px, py = j.p_x, j.p_y
    out = np.full(m.shape, np.nan)
    ys = np.flatnonzero(py > 0)
    log_py = np.log2(py[ys])
    # log2(0) = -inf and exp2 overflow to inf are both intended here
    with np.errstate(divide="ignore", over="ignore"):
        for x in np.flatnonzero(px > 0):
            cond = m[x, ys] / px[x]
            log_ratio = np.log2(cond) - log_py  # iota(x; y'), -inf off the row support
            for k in np.flatnonzero(cond > 0):
                gap = 1.0 - np.exp2(log_ratio - log_ratio[k])
                gap[gap <= RATIO_SNAP] = 0.0
                spread = math.fsum(py[ys] * gap)
                out[x, ys[k]] = py[ys[k]] / (py[ys[k]] + cond[k] * spread)
    return GeomCoupling(out)


def _geom_tail_bound(r: float, n: int) -> float:
    """Upper bound on sum_{k>n} r (1-r)^(k-1) ell(k).

    Uses ell(k) <= log(e k) and the tangent bound log k <= log n + (k - n)/(n ln 2),
    which sum in closed form to (1-r)^n (log(e n) + 1/(r n ln 2)).
    """
    q = 1.0 - r
    if q == 0.0:
        return 0.0
    return q**n * (math.log2(math.e * n) + 1.0 / (r * n * math.log(2.0)))


def geom_layered_entropy(r: float, tail_tol: float = DEFAULT_TAIL_TOL) -> tuple[float, float]:
    """Layered entropy of Geometric(r) on {1, 2, ...}, with a rigorous tail bound.

    Returns ``(partial_sum, tail_bound)``; the true value lies in
    ``[partial_sum, partial_sum + tail_bound]`` and ``tail_bound <= tail_tol``.
    """
    if not tail_tol > 0:
        raise ValueError("tail_tol must be positive")
    if not 0.0 < r <= 1.0:
        raise ValueError(f"geometric parameter must lie in (0, 1], got {r!r}")
    if r == 1.0:
        return 0.0, 0.0
    n = 64
    while _geom_tail_bound(r, n) > tail_tol:
        n *= 2
    k = np.arange(n, dtype=float)
    pk = r * np.exp(k * math.log1p(-r))
    if np.any(np.diff(pk) > 0):  # the layered sum below needs pk already sorted
        raise ArithmeticError("geometric pmf is not nonincreasing")
    return math.fsum(pk * ell_increments(n)), _geom_tail_bound(r, n)


@dataclass(frozen=True)
class BoundChain:
    lambda_k: float
    tail_bound: float
    e_term: float
    mutual_info: float
    tail_tol: float

    @property
    def i_log3(self) -> float:
        return self.mutual_info + LOG3

    @property
    def lambda_k_upper(self) -> float:
        return self.lambda_k + self.tail_bound

    @property
    def passed(self) -> bool:
        return self.lambda_k_upper <= self.e_term + 1e-9 and self.e_term <= self.i_log3 + 1e-9

    def h_bound(self, eta: float | str = "loge") -> float:
        """Shannon-entropy bound obtained from the computed chain endpoint."""
        return bound_h_from_lambda(self.lambda_k_upper, eta)

    def as_dict(self) -> dict:
        return {
            "lambda_K": self.lambda_k,
            "tail_bound": self.tail_bound,
            "e_term": self.e_term,
            "I": self.mutual_info,
            "i_log3": self.i_log3,
            "pass": self.passed,
        }


def bound_chain(j: JointPmf, tail_tol: float = DEFAULT_TAIL_TOL) -> BoundChain:
    """Evaluate Lambda(K|X,Y) <= E[log(2^iota + 1/2)] + 1 <= I(X;Y) + log 3.

    Lambda(K|X,Y) equals Lambda(K) here because every p(k|x,y) is
    nonincreasing in k.
    """
    r = rho(j).rho
    dens = info_density(j)
    m = j.matrix
    lam, tail = [], []
    cache: dict[float, tuple[float, float]] = {}
    for x, y in zip(*np.nonzero(dens.support)):
        key = float(r[x, y])
        if key not in cache:
            cache[key] = geom_layered_entropy(key, tail_tol)
        v, t = cache[key]
        lam.append(m[x, y] * v)
        tail.append(m[x, y] * t)
    cells = m[dens.support]
    e_term = math.fsum(cells * np.log2(np.exp2(dens.iota[dens.support]) + 0.5)) + 1.0
    return BoundChain(math.fsum(lam), math.fsum(tail), e_term, mutual_information(j), tail_tol)


# -- closed-form bounds ---------------------------------------------------------

VARIANTS = ("eta", "loge", "li2021", "li2024", "eta_opt")


def sfrl_bound(i: float, variant: str = "loge", eta: float | None = None) -> float:
    """Upper bound on H(Y|S) in terms of I = I(X;Y).

    ``eta`` is the general layered-entropy bound at a given eta (required
    for that variant), ``loge`` its rounded eta = log e form, ``eta_opt`` the
    general bound at the best eta, ``li2021`` and ``li2024`` the two earlier
    bounds I + log(I+1) + 3.732 and I + log(I+2) + 2.
    """
    if i < -1e-12:
        raise ValueError("mutual information must be nonnegative")
    i = max(i, 0.0)  # rounding can leave I a hair below zero
    if variant == "eta":
        if eta is None or not eta > 0:
            raise ValueError("the eta variant needs eta > 0")
        return i + math.log2(i + LOG3 + math.e * eta) + math.log2(3.0 / (math.e * eta)) + eta
    if variant == "loge":
        return i + math.log2(i + 5.51) + 1.06
    if variant == "eta_opt":
        lam = i + LOG3
        return bound_h_from_lambda(lam, optimal_eta(lam))
    if variant == "li2021":
        return i + math.log2(i + 1.0) + 3.732
    if variant == "li2024":
        return i + math.log2(i + 2.0) + 2.0
    raise ValueError(f"unknown variant {variant!r}")


def crossing_point(variant_a: str, variant_b: str, bracket: tuple[float, float] = (0.0, 4.0)) -> float:
    """The I at which two bound curves cross, by bisection to 1e-6."""
    lo, hi = bracket

    def diff(i: float) -> float:
        return sfrl_bound(i, variant_a) - sfrl_bound(i, variant_b)

    if diff(lo) * diff(hi) > 0:
        raise ValueError(f"{variant_a} and {variant_b} do not cross on [{lo}, {hi}]")
    return float(bisect(diff, lo, hi, xtol=CROSSING_XTOL))


CURVE_COLUMNS = ("I", "li2021", "li2024", "loge", "eta_opt")


def curve_emit(i_grid) -> list[tuple[float, ...]]:
    """Rows (I, li2021, li2024, loge, eta_opt) for each I in the grid."""
    rows = []
    for i in i_grid:
        i = float(i)
        if i < 0:
            raise ValueError("grid values must be nonnegative")
        rows.append((i,) + tuple(sfrl_bound(i, v) for v in CURVE_COLUMNS[1:]))
    return rows


def curve_csv(i_grid) -> str:
    lines = [",".join(CURVE_COLUMNS)]
    lines += [",".join(f"{v:.12g}" for v in row) for row in curve_emit(i_grid)]
    return "\n".join(lines) + "\n"


__all__ = [
    "BoundChain",
    "GeomCoupling",
    "InfoDensityTable",
    "bound_chain",
    "crossing_point",
    "curve_csv",
    "curve_emit",
    "geom_layered_entropy",
    "info_density",
    "rho",
    "sfrl_bound",
]
