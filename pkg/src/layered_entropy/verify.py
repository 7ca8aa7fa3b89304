"""Seeded property suites behind ``layered-entropy verify``."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .channels import (
    JointPmf,
    brute_force_min_h_u,
    compression_pmf,
    cond_layered,
    cond_min_entropy,
    cond_shannon,
    layer_channel,
    monotone_channel,
    random_channel,
    random_joint,
    random_pmf,
    three_approx_holds,
    three_cond_entropies,
    theorem2_holds,
)
from .codes import (
    Codebook,
    conditional_encoding_report,
    enumerative_code,
    huffman,
    is_prefix_free,
    union_codebook,
)
from .envelopes import (
    layer_fixed_point_check,
    lp_coupling_construct,
    lp_objective_upper_check,
    random_feasible_coupling,
    uniform_conditional_envelope_check,
)
from .pmf import (
    DEFAULT_ALPHAS,
    Pmf,
    as_pmf,
    bound_h_from_lambda,
    resolve_eta,
    layer_decomposition,
    layered_entropy,
    layered_entropy_by_layers,
    min_entropy,
    one_to_one_optimal_length,
    renyi_entropy,
    renyi_layered_entropy,
    shannon_entropy,
    sort_pmf,
)
from .rng import SplitMix64
from .sfrl import bound_chain, info_density, rho, sfrl_bound

SUITES = ("core", "channels", "envelopes", "codes", "sfrl")
ETA_PRESETS = ("loge", "sqrt", "opt")


@dataclass
class Report:
    suite: str
    cases: int = 0
    failures: list = field(default_factory=list)

    def check(self, name: str, ok: bool, trial: int | None = None, detail: str = "") -> None:
        self.cases += 1
        if not ok:
            self.failures.append({"case": name, "trial": trial, "detail": detail})

    @property
    def ok(self) -> bool:
        return not self.failures

    def as_dict(self) -> dict:
        return {"suite": self.suite, "cases": self.cases, "failures": self.failures}


def _trial_rngs(seed: int, trials: int, salt: int):
    # each suite draws from its own stream so suites can run alone or together
    master = SplitMix64(SplitMix64(seed).derive(salt))
    for t in range(trials):
        yield t, SplitMix64(master.derive(t))


def robin_hood_transfer(rng: SplitMix64, p: Pmf) -> Pmf:
    """Move mass from a richer atom to a poorer one without reversing their order.

    The result is majorized by ``p``.
    """
    q = np.array(p.probs)
    i, j = rng.integer(0, q.size - 1), rng.integer(0, q.size - 1)
    if q[i] < q[j]:
        i, j = j, i
    delta = rng.uniform(0.0, 0.5) * (q[i] - q[j])
    q[i] -= delta
    q[j] += delta
    return Pmf(q)


def _core(rep: Report, trials: int, seed: int, tol: float) -> None:
    for k in (1, 2, 3, 7, 64):
        lam = layered_entropy(np.full(k, 1.0 / k))
        rep.check("uniform_layered", abs(lam - math.log2(k)) <= tol, None, f"k={k} got {lam!r}")
    for t, rng in _trial_rngs(seed, trials, 0):
        p = random_pmf(rng, rng.integer(2, 12))
        lam = layered_entropy(p)
        by_layers = layered_entropy_by_layers(p)
        by_decomp = layer_decomposition(p).layered_entropy()
        gap = max(abs(lam - by_layers), abs(lam - by_decomp))
        rep.check("layered_forms_agree", gap <= tol, t, f"gap {gap!r}")
        h, hmin = shannon_entropy(p), min_entropy(p)
        rep.check("min_le_layered_le_shannon", hmin <= lam + tol and lam <= h + tol, t, f"{hmin!r} {lam!r} {h!r}")
        for eta in ETA_PRESETS:
            ub = bound_h_from_lambda(lam, eta)
            rep.check(f"h_bound_{eta}", h <= ub + tol, t, f"H={h!r} bound={ub!r}")
        length = one_to_one_optimal_length(p)
        rep.check("one_to_one_length_sandwich", lam - 2 < length <= lam + tol, t, f"L={length!r} lambda={lam!r}")
        prev = math.inf
        for a in DEFAULT_ALPHAS:
            la, ha = renyi_layered_entropy(p, a), renyi_entropy(p, a)
            rep.check("renyi_layered_le_renyi", la <= ha + tol, t, f"alpha={a} {la!r} > {ha!r}")
            rep.check("renyi_layered_nonincreasing", la <= prev + tol, t, f"alpha={a} {la!r} > {prev!r}")
            prev = la
        if np.unique(p.probs[p.probs > 0]).size >= 2:
            rep.check("sandwich_strict", hmin < lam < h, t, f"{hmin!r} {lam!r} {h!r}")
        # the half-order bound holds in the given indexing and is tight in sorted order
        idx = np.arange(1, len(p) + 1)
        half = renyi_layered_entropy(p, 0.5)
        given = math.log2(2 * float(np.dot(idx, p.probs)) - 1)
        tight = math.log2(2 * float(np.dot(idx, sort_pmf(p).probs)) - 1)
        rep.check("renyi_half_bound", half <= given + tol and abs(half - tight) <= tol, t, f"{half!r} {given!r} {tight!r}")
        q = robin_hood_transfer(rng, p)
        rep.check("schur_concave", lam <= layered_entropy(q) + tol, t)
        r = random_pmf(rng, rng.integer(1, 6))
        joint = layered_entropy(np.outer(p.probs, r.probs).ravel())
        rep.check("superadditive", joint >= lam + layered_entropy(r) - tol, t)
        flat = np.full(r.probs.size, 1.0 / r.probs.size)
        joint_u = layered_entropy(np.outer(p.probs, flat).ravel())
        rep.check("additive_with_uniform", abs(joint_u - lam - math.log2(flat.size)) <= tol, t)
        jr = random_joint(rng)
        rep.check(
            "bounded_increase",
            layered_entropy(jr.matrix.ravel()) <= layered_entropy(jr.p_x) + math.log2(jr.shape[1]) + tol,
            t,
        )


def _channels(rep: Report, trials: int, seed: int, tol: float) -> None:
    for t, rng in _trial_rngs(seed, trials, 1):
        j = random_joint(rng)
        gap = abs(cond_layered(j) - layered_entropy(compression_pmf(j)))
        rep.check("conditioning_preserves_layered", gap <= tol, t, f"gap {gap!r}")
        three = three_cond_entropies(j)
        rep.check("three_entropies_ordered", three_approx_holds(three, "loge", tol), t, repr(tuple(three)))
        for eta in ETA_PRESETS:
            rep.check(f"compression_gap_{eta}", theorem2_holds(three.shannon, three.compression, eta, tol), t, repr(tuple(three)))
        rep.check("conditioning_reduces_layered", three.layered <= layered_entropy(j.p_x) + tol, t)
    for t, rng in _trial_rngs(seed, min(trials, 50), 2):
        j = random_joint(rng, max_x=5, max_y=4)
        brute = brute_force_min_h_u(j)
        h = shannon_entropy(compression_pmf(j))
        rep.check("compression_is_optimal", abs(h - brute) <= tol, t, f"ranked {h!r} brute {brute!r}")
    for t, rng in _trial_rngs(seed, trials, 3):
        p = random_pmf(rng, rng.integer(2, 12))
        lam = layered_entropy(p)
        gap = abs(cond_shannon(layer_channel(p)) - lam)
        rep.check("layer_channel_attains_layered", gap <= tol, t, f"gap {gap!r}")
        # channels with every posterior sorted like p keep H(X minus Y) = H(X)
        mono = monotone_channel(rng, p, rng.integer(1, 2 * len(p)))
        rep.check("monotone_linearity", abs(cond_layered(mono) - lam) <= tol, t)
        h = shannon_entropy(p)
        sampled = [mono, JointPmf.from_channel(p, random_channel(rng, len(p), rng.integer(1, 2 * len(p))))]
        for cand in sampled:
            if abs(shannon_entropy(compression_pmf(cand)) - h) < 1e-9:
                rep.check("no_compression_needs_layered", cond_shannon(cand) >= lam - tol, t)


def _envelopes(rep: Report, trials: int, seed: int, tol: float) -> None:
    inner = max(1, min(20, trials))
    for t, rng in _trial_rngs(seed, trials, 4):
        p = random_pmf(rng, rng.integer(2, 10))
        lam = layered_entropy(p)
        c = lp_coupling_construct(p)
        rep.check("lp_optimum_feasible", c.is_feasible(p, max(tol, 1e-12)), t, f"residual {c.feasibility_residual()!r}")
        rep.check("lp_optimum_value", abs(c.objective() - lam) <= tol, t, f"{c.objective()!r} vs {lam!r}")
        other = random_feasible_coupling(rng, p, rng.uniform(0.05, 1.0))
        rep.check("lp_random_point_below", other.objective() <= lam + tol, t, f"{other.objective()!r} > {lam!r}")
        sub = rng.next_u64()
        rep.check("min_entropy_envelope", lp_objective_upper_check(p, inner, sub, tol), t)
        rep.check("uniform_posterior_envelope", uniform_conditional_envelope_check(p, inner, sub, tol), t)
        rep.check("layer_fixed_point", layer_fixed_point_check(p, max(tol, 1e-12)), t)
        gap = abs(cond_min_entropy(layer_channel(p)) - lam)
        rep.check("min_entropy_envelope_attained", gap <= tol, t, f"gap {gap!r}")


def _roundtrip(book: Codebook) -> bool:
    if not all(book.decode_word(book.encode(s)) == s for s in book.words):
        return False
    # a stream of empty words carries no count, so only real codewords are streamed
    if book.prefix_free and "" not in book.words.values():
        symbols = list(book.words)
        return book.decode_stream("".join(book.encode(s) for s in symbols)) == symbols
    return True


def _codes(rep: Report, trials: int, seed: int, tol: float) -> None:
    # x=1,2 coded given y=1 and x=1,2,3 given y=2; each part is prefix-free, the union is not
    given_y1 = Codebook({1: "0", 2: "1"}, prefix_free=True)
    given_y2 = Codebook({1: "0", 2: "10", 3: "11"}, prefix_free=True)
    union = union_codebook([given_y1, given_y2])
    rep.check("union_code_not_prefix_free", not is_prefix_free(union), None, "union of per-context codes passed the audit")
    for t, rng in _trial_rngs(seed, trials, 5):
        p = random_pmf(rng, rng.integer(1, 12))
        enum = enumerative_code(p)
        rep.check("enumerative_length_exact", enum.expected_length == one_to_one_optimal_length(p), t)
        hc = huffman(p)
        h = shannon_entropy(p)
        rep.check("huffman_prefix_free", is_prefix_free(hc.words.values()), t)
        rep.check("huffman_length", h - tol <= hc.expected_length < h + 1 + tol, t, f"{hc.expected_length!r} vs H={h!r}")
        rep.check("roundtrip", _roundtrip(enum) and _roundtrip(hc), t)
        j = random_joint(rng)
        for name, ok in conditional_encoding_report(j).sandwiches(tol).items():
            rep.check(f"sandwich_{name}", ok, t)


def _sfrl(rep: Report, trials: int, seed: int, tol: float, tail_tol: float) -> None:
    for t, rng in _trial_rngs(seed, trials, 6):
        j = random_joint(rng)
        chain = bound_chain(j, tail_tol)
        ok = chain.lambda_k_upper <= chain.e_term + tol and chain.e_term <= chain.i_log3 + tol
        rep.check("chain_ordered", ok, t, repr(chain.as_dict()))
        dens, r = info_density(j), rho(j).rho
        prod = r[dens.support] * (np.exp2(dens.iota[dens.support]) + 1.0)
        rep.check("rho_lower_bound", bool(np.all(prod >= 1 - 1e-9)) and bool(np.all(r[dens.support] <= 1.0)), t)
        rep.check("density_mean_is_information", abs(dens.mean(j) - chain.mutual_info) <= tol, t)
        for eta in ETA_PRESETS:
            lam = chain.lambda_k_upper
            eta_value = resolve_eta(lam, eta)
            if eta_value == 0.0:
                continue
            ok = bound_h_from_lambda(lam, eta_value) <= sfrl_bound(chain.mutual_info, "eta", eta_value) + tol
            rep.check(f"numeric_chain_below_closed_form_{eta}", ok, t)
        px, py = random_pmf(rng, rng.integer(1, 6)), random_pmf(rng, rng.integer(1, 6))
        lam_k = bound_chain(JointPmf.product(px, py), tail_tol).lambda_k
        rep.check("product_joint_zero", lam_k == 0.0, t, f"lambda_K={lam_k!r}")
    for i in np.linspace(0.0, 20.0, 200):
        rep.check("loge_below_li2021", sfrl_bound(i, "loge") < sfrl_bound(i, "li2021"), None, f"I={i}")


def run_suite(suite: str, trials: int = 200, seed: int = 0, tol: float = 1e-9, tail_tol: float = 1e-9) -> Report:
    """Run one suite, or all of them when ``suite == "all"``."""
    if suite != "all" and suite not in SUITES:
        raise ValueError(f"unknown suite {suite!r}; choose from {', '.join(SUITES + ('all',))}")
    if trials < 1:
        raise ValueError("trials must be at least 1")
    if not tol > 0:
        raise ValueError("tolerance must be positive")
    rep = Report(suite)
    for name in SUITES if suite == "all" else (suite,):
        if name == "sfrl":
            _sfrl(rep, trials, seed, tol, tail_tol)
        else:
            {"core": _core, "channels": _channels, "envelopes": _envelopes, "codes": _codes}[name](rep, trials, seed, tol)
    return rep
