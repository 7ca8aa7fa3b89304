"""Joint distributions, the three conditional entropies and conditional compression."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterator, NamedTuple, Sequence

import numpy as np

from .pmf import (
    SUM_TOL,
    InvalidPmfError,
    Pmf,
    PmfLike,
    SortedPmf,
    as_pmf,
    bound_h_from_lambda,
    layered_entropy,
    shannon_entropy,
    sort_pmf,
)
from .rng import SplitMix64

LAYER_MERGE_TOL = 1e-12
TIE_TOL = 1e-12
MAX_BRUTE_X = 5
MAX_BRUTE_Y = 4


@dataclass(frozen=True)
class JointPmf:
    """p(x, y) as a matrix; rows are x, columns are y."""

    matrix: np.ndarray

    def __post_init__(self):
        m = np.array(self.matrix, dtype=float)
        if m.ndim != 2 or m.size == 0:
            raise InvalidPmfError("joint pmf must be a nonempty matrix")
        if not np.all(np.isfinite(m)) or np.any(m < 0):
            raise InvalidPmfError("joint pmf entries must be finite and nonnegative")
        total = float(m.sum())
        if abs(total - 1.0) > SUM_TOL:
            raise InvalidPmfError(f"joint pmf sums to {total!r}, not 1")
        m /= total
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @classmethod
    def from_channel(cls, p_x: PmfLike, channel: np.ndarray) -> "JointPmf":
        """Joint of X ~ p_x passed through the row-stochastic ``channel``."""
        px = as_pmf(p_x).probs
        w = np.asarray(channel, dtype=float)
        return cls(px[:, None] * w)

    @classmethod
    def product(cls, p_x: PmfLike, p_y: PmfLike) -> "JointPmf":
        return cls(np.outer(as_pmf(p_x).probs, as_pmf(p_y).probs))

    @property
    def shape(self) -> tuple[int, int]:
        return self.matrix.shape

    @property
    def p_x(self) -> np.ndarray:
        return self.matrix.sum(axis=1)

    @property
    def p_y(self) -> np.ndarray:
        return self.matrix.sum(axis=0)

    def conditionals(self) -> Iterator[tuple[int, float, np.ndarray]]:
        """Yield ``(y, p(y), p(.|y))`` for every y of positive probability."""
        py = self.p_y
        for y in range(self.matrix.shape[1]):
            if py[y] > 0:
                yield y, float(py[y]), self.matrix[:, y] / py[y]

    def transpose(self) -> "JointPmf":
        return JointPmf(self.matrix.T)


def cond_shannon(j: JointPmf) -> float:
    """H(X|Y)."""
    return math.fsum(w * shannon_entropy(row) for _, w, row in j.conditionals())


def mutual_information(j: JointPmf) -> float:
    return shannon_entropy(j.p_x) - cond_shannon(j)


def cond_layered(j: JointPmf) -> float:
    """Lambda(X|Y), the p(y)-average of the layered entropy of p(.|y)."""
    return math.fsum(w * layered_entropy(row) for _, w, row in j.conditionals())


def cond_min_entropy(j: JointPmf) -> float:
    return math.fsum(-w * math.log2(float(row.max())) for _, w, row in j.conditionals())


@dataclass(frozen=True)
class CompressionResult:
    """A conditional compression U of X given Y.

    ``rank_map[x, y]`` is the 0-based rank of x within p(.|y).
    """

    rank_map: np.ndarray
    u_pmf: Pmf
    tie_policy: str

    @property
    def entropy(self) -> float:
        return shannon_entropy(self.u_pmf)


def _descending_order(col: np.ndarray) -> np.ndarray:
    return np.argsort(-col, kind="stable")


def _tie_orderings(col: np.ndarray) -> list[list[int]]:
    """Every descending ordering of ``col`` that differs only inside ties."""
    order = list(_descending_order(col))
    groups: list[list[int]] = []
    for x in order:
        if groups and abs(col[groups[-1][0]] - col[x]) <= TIE_TOL:
            groups[-1].append(x)
        else:
            groups.append([x])
    return [
        [x for g in combo for x in g]
        for combo in itertools.product(*(itertools.permutations(g) for g in groups))
    ]


def _ranks_from_orders(orders: Sequence[Sequence[int]], nx: int) -> np.ndarray:
    ranks = np.empty((nx, len(orders)), dtype=int)
    for y, order in enumerate(orders):
        ranks[list(order), y] = np.arange(nx)
    return ranks


def _u_joint(matrix: np.ndarray, ranks: np.ndarray) -> np.ndarray:
    """p(x, u) induced by a rank map."""
    nx, ny = matrix.shape
    pxu = np.zeros((nx, nx))
    for y in range(ny):
        np.add.at(pxu, (np.arange(nx), ranks[:, y]), matrix[:, y])
    return pxu


def _h_x_given_u(pxu: np.ndarray) -> float:
    return cond_shannon(JointPmf(pxu))


def conditional_compression(j: JointPmf, tie_policy: str = "ascending_index") -> CompressionResult:
    """Rank x by p(x|y) within each y.

    ``ascending_index`` breaks ties by the smaller x. ``exhaustive_search``
    tries every tie permutation (alphabets up to 5 x 4) and keeps the
    ranking with the smallest H(X|U), first found on ties.
    """
    m = j.matrix
    nx, ny = m.shape
    if tie_policy == "ascending_index":
        ranks = _ranks_from_orders([_descending_order(m[:, y]) for y in range(ny)], nx)
    elif tie_policy == "exhaustive_search":
        if nx > MAX_BRUTE_X or ny > MAX_BRUTE_Y:
            raise ValueError(f"exhaustive tie search supports at most {MAX_BRUTE_X}x{MAX_BRUTE_Y}")
        per_y = [_tie_orderings(m[:, y]) for y in range(ny)]
        best, best_h = None, math.inf
        for orders in itertools.product(*per_y):
            ranks = _ranks_from_orders(orders, nx)
            h = _h_x_given_u(_u_joint(m, ranks))
            if h < best_h - 1e-12:
                best, best_h = ranks, h
        ranks = best
    else:
        raise ValueError(f"unknown tie policy {tie_policy!r}")
    u = _u_joint(m, ranks).sum(axis=0)
    return CompressionResult(ranks, Pmf(u), tie_policy)


def compression_pmf(j: JointPmf) -> SortedPmf:
    """p_U sorted: the sum over y of the descending-sorted columns p(., y)."""
    cols = -np.sort(-j.matrix, axis=0)
    return sort_pmf(Pmf(cols.sum(axis=1)))


def cond_diff_entropy(j: JointPmf) -> float:
    """H(X minus Y), the entropy of a conditional compression."""
    return shannon_entropy(compression_pmf(j))


def _entropy_rows(t: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(t > 0, t * np.log2(np.where(t > 0, t, 1.0)), 0.0)
    return -terms.sum(axis=-1)


def brute_force_min_h_u(j: JointPmf) -> float:
    """min H(U) over every deterministic U with H(X|Y,U) = 0, by enumeration.

    For each y the support of p(.|y) is mapped injectively into |X| labels;
    all tuples of such injections are tried. The labeling of the first y is
    fixed because relabeling U leaves H(U) unchanged.
    """
    m = j.matrix
    nx, ny = m.shape
    if nx > MAX_BRUTE_X or ny > MAX_BRUTE_Y:
        raise ValueError(f"brute force supports at most {MAX_BRUTE_X}x{MAX_BRUTE_Y}")
    blocks = []
    for y in range(ny):
        support = [x for x in range(nx) if m[x, y] > 0]
        if not support:
            continue
        vals = m[support, y]
        rows = []
        for labels in itertools.permutations(range(nx), len(support)):
            c = np.zeros(nx)
            c[list(labels)] = vals
            rows.append(c)
        blocks.append(np.unique(np.array(rows), axis=0))
    total = blocks[0][:1]
    for block in blocks[1:-1]:
        total = (total[:, None, :] + block[None, :, :]).reshape(-1, nx)
    if len(blocks) == 1:
        return float(_entropy_rows(total).min())
    best = math.inf
    for c in blocks[-1]:
        best = min(best, float(_entropy_rows(total + c).min()))
    return best


def layer_channel(p: PmfLike) -> JointPmf:
    """Joint of X and its layer index.

    Y = j selects the layer between the j-th and (j+1)-th distinct
    probability values ``a_1 > a_2 > ... > a_m > 0``; ``p(x, j) =
    (a_j - a_{j+1})`` whenever ``p(x) >= a_j``. Rows follow the order of
    ``p`` as given (sorted order for a :class:`SortedPmf`).
    """
    probs = p.probs if isinstance(p, (Pmf, SortedPmf)) else as_pmf(p).probs
    values = sorted(set(probs[probs > 0].tolist()), reverse=True)
    levels: list[float] = []
    for v in values:
        # values within a relative LAYER_MERGE_TOL of the current level join it
        if not levels or levels[-1] - v > LAYER_MERGE_TOL * levels[-1]:
            levels.append(v)
    top = np.array(levels)
    widths = top - np.array(levels[1:] + [0.0])
    floors = top - LAYER_MERGE_TOL * top
    member = (probs[:, None] > 0) & (probs[:, None] >= floors[None, :])
    return JointPmf(member * widths[None, :])


class ThreeEntropies(NamedTuple):
    layered: float
    shannon: float
    compression: float


def three_cond_entropies(j: JointPmf) -> ThreeEntropies:
    """(Lambda(X|Y), H(X|Y), H(X minus Y))."""
    return ThreeEntropies(cond_layered(j), cond_shannon(j), cond_diff_entropy(j))


def three_approx_holds(t: ThreeEntropies, eta: float | str = "loge", tol: float = 1e-9) -> bool:
    """Ordering of the three quantities and the log-gap ceiling above them."""
    ceiling = bound_h_from_lambda(t.layered, eta) + 1.0
    return t.layered <= t.shannon + tol and t.shannon <= t.compression + tol and t.compression <= ceiling + tol


def theorem2_holds(h_cond: float, h_diff: float, eta: float | str = "loge", tol: float = 1e-9) -> bool:
    """H(X|Y) <= H(X minus Y) <= H(X|Y) + log(1 + H(X|Y)/(e eta)) + eta."""
    return h_cond <= h_diff + tol and h_diff <= bound_h_from_lambda(h_cond, eta) + tol


# -- random instances ---------------------------------------------------------


def random_pmf(rng: SplitMix64, n: int) -> Pmf:
    return Pmf(rng.dirichlet_ones(n))


def random_channel(rng: SplitMix64, nx: int, ny: int) -> np.ndarray:
    return np.array([rng.dirichlet_ones(ny) for _ in range(nx)])


def random_joint(rng: SplitMix64, max_x: int = 8, max_y: int = 8, sparse: bool = True) -> JointPmf:
    """Flat-Dirichlet joint of random shape; some cells zeroed when ``sparse``."""
    nx = rng.integer(2, max_x)
    ny = rng.integer(1, max_y)
    m = rng.dirichlet_ones(nx * ny).reshape(nx, ny)
    if sparse and rng.random() < 0.3:
        mask = np.array([rng.random() < 0.3 for _ in range(nx * ny)]).reshape(nx, ny)
        if mask.all():
            mask.flat[0] = False
        m = np.where(mask, 0.0, m)
        m = m / m.sum()
    return JointPmf(m)


def monotone_channel(rng: SplitMix64, p: PmfLike, ny: int) -> JointPmf:
    """A joint in which every p(.|y) is nonincreasing in sorted-x order.

    The layers of ``p`` are dealt at random into ``ny`` groups; rows of
    the result are in sorted order of ``p``.
    """
    q = sort_pmf(p).probs
    n = q.size
    gaps = q - np.append(q[1:], 0.0)
    m = np.zeros((n, ny))
    for k in range(n):
        if gaps[k] > 0:
            m[: k + 1, rng.integer(0, ny - 1)] += gaps[k]
    return JointPmf(m)


# -- region of (H(X|Y), H(X minus Y)) -------------------------------------------


@dataclass(frozen=True)
class RegionSample:
    """Points (H(X|Y), H(X minus Y)); seed is None for the two named extremes."""

    points: list
    channel_seeds: list

    def to_csv(self) -> str:
        lines = ["h_cond,h_diff,seed"]
        for (hc, hd), s in zip(self.points, self.channel_seeds):
            lines.append(f"{hc:.12g},{hd:.12g},{'' if s is None else s}")
        return "\n".join(lines) + "\n"


def _region_point(j: JointPmf) -> tuple[float, float]:
    return cond_shannon(j), cond_diff_entropy(j)


def region_sample(p: PmfLike, n_channels: int, seed: int = 0) -> RegionSample:
    """Sample the achievable region of (H(X|Y), H(X minus Y)) for X ~ p.

    The constant channel and the layer channel come first; each of the
    ``n_channels`` random channels then uses its own derived seed, with
    |Y| drawn from 1..2|X| and Dirichlet(1, ..., 1) rows.
    """
    if n_channels < 1:
        raise ValueError("n_channels must be at least 1")
    px = as_pmf(p)
    n = len(px)
    points = [_region_point(JointPmf(px.probs[:, None])), _region_point(layer_channel(px))]
    seeds: list = [None, None]
    master = SplitMix64(seed)
    for i in range(n_channels):
        s = master.derive(i)
        rng = SplitMix64(s)
        ny = rng.integer(1, 2 * n)
        points.append(_region_point(JointPmf.from_channel(px, random_channel(rng, n, ny))))
        seeds.append(s)
    return RegionSample(points, seeds)


__all__ = [
    "JointPmf",
    "CompressionResult",
    "RegionSample",
    "ThreeEntropies",
    "brute_force_min_h_u",
    "compression_pmf",
    "cond_diff_entropy",
    "cond_layered",
    "cond_min_entropy",
    "cond_shannon",
    "conditional_compression",
    "layer_channel",
    "monotone_channel",
    "mutual_information",
    "random_channel",
    "random_joint",
    "random_pmf",
    "region_sample",
    "theorem2_holds",
    "three_approx_holds",
    "three_cond_entropies",
]
