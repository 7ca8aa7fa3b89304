"""One-to-one and Huffman codebooks, and the three conditional encoding settings."""

from __future__ import annotations

import heapq
import json
import math
import struct
from dataclasses import asdict, dataclass, field
from functools import cached_property
from typing import Hashable, Iterable, Mapping, Sequence

import numpy as np

from .channels import JointPmf, compression_pmf, cond_diff_entropy, cond_layered, cond_shannon
from .pmf import PmfLike, as_pmf, one_to_one_optimal_length, sort_pmf


class DecodeError(ValueError):
    pass


def is_prefix_free(words: Iterable[str]) -> bool:
    """No word is a prefix of another.

    Duplicates count as a violation. The empty word is allowed only as the
    single word of a one-symbol codebook.
    """
    ws = sorted(words)
    if len(ws) == 1:
        return True
    # in lexicographic order a prefix sorts immediately before some extension
    return all(not b.startswith(a) for a, b in zip(ws, ws[1:]))


@dataclass(frozen=True)
class Codebook:
    words: dict
    prefix_free: bool
    probs: dict = field(default_factory=dict)

    def __post_init__(self):
        if len(set(self.words.values())) != len(self.words):
            raise ValueError("codebook is not one-to-one")
        if self.prefix_free and not is_prefix_free(self.words.values()):
            raise ValueError("codebook flagged prefix-free but is not")

    @property
    def expected_length(self) -> float:
        return math.fsum(float(self.probs.get(s, 0.0)) * len(w) for s, w in self.words.items())

    def encode(self, symbol: Hashable) -> str:
        return self.words[symbol]

    def decode_word(self, word: str) -> Hashable:
        try:
            return self._inverse[word]
        except KeyError:
            raise DecodeError(f"{word!r} is not a codeword") from None

    def decode_prefix(self, bits: str, pos: int = 0) -> tuple[Hashable, int]:
        """Read one codeword of a prefix-free code starting at ``pos``."""
        if not self.prefix_free:
            raise DecodeError("stream decoding needs a prefix-free code")
        inv = self._inverse
        if "" in inv:
            return inv[""], pos
        for end in range(pos + 1, min(len(bits), pos + self._max_len) + 1):
            word = bits[pos:end]
            if word in inv:
                return inv[word], end
        raise DecodeError(f"no codeword at bit {pos}")

    def decode_stream(self, bits: str) -> list:
        out, pos = [], 0
        while pos < len(bits):
            sym, pos = self.decode_prefix(bits, pos)
            out.append(sym)
        return out

    @cached_property
    def _inverse(self) -> dict:
        return {w: s for s, w in self.words.items()}

    @cached_property
    def _max_len(self) -> int:
        return max(len(w) for w in self.words.values())

    def to_json(self) -> str:
        return json.dumps({str(s): w for s, w in self.words.items()}, sort_keys=True)


def enumeration_word(rank: int) -> str:
    """The rank-th binary string in length-then-lexicographic order (rank 1 is empty)."""
    if rank < 1:
        raise ValueError("rank starts at 1")
    return bin(rank)[3:]


def enumerative_code(p: PmfLike, symbols: Sequence[Hashable] | None = None) -> Codebook:
    """Optimal one-to-one code: the i-th most likely symbol gets the i-th string.

    Symbols default to the 0-based indices of ``p``.
    """
    pmf = as_pmf(p)
    sp = sort_pmf(pmf)
    symbols = list(range(len(pmf))) if symbols is None else list(symbols)
    words = {}
    probs = {}
    for rank, idx in enumerate(sp.perm, start=1):
        s = symbols[idx]
        words[s] = enumeration_word(rank)
        probs[s] = float(pmf.probs[idx])
    return Codebook(words, prefix_free=len(words) == 1, probs=probs)


def enumerative_expected_length(code: Codebook) -> float:
    """Expected length summed exactly as the optimal length formula sums it."""
    return math.fsum(code.probs[s] * len(w) for s, w in code.words.items())


def huffman(p: PmfLike | Mapping[Hashable, float], symbols: Sequence[Hashable] | None = None) -> Codebook:
    """Huffman code over the atoms of positive probability.

    The two lightest nodes merge first; ties go to the node holding the
    smallest original index, then to the earlier-created node. The first
    node popped takes bit 0. A single atom gets the empty word.
    """
    if isinstance(p, Mapping):
        symbols = list(p.keys())
        probs = np.array([float(v) for v in p.values()])
        probs = as_pmf(probs).probs
    else:
        probs = as_pmf(p).probs
        symbols = list(range(probs.size)) if symbols is None else list(symbols)
    atoms = [i for i in range(probs.size) if probs[i] > 0]
    if len(atoms) == 1:
        s = symbols[atoms[0]]
        return Codebook({s: ""}, prefix_free=True, probs={s: 1.0})
    heap = []
    for created, i in enumerate(atoms):
        heapq.heappush(heap, (float(probs[i]), i, created, [i]))
    created = len(atoms)
    codes = {i: "" for i in atoms}
    while len(heap) > 1:
        w0, m0, _, g0 = heapq.heappop(heap)
        w1, m1, _, g1 = heapq.heappop(heap)
        for i in g0:
            codes[i] = "0" + codes[i]
        for i in g1:
            codes[i] = "1" + codes[i]
        heapq.heappush(heap, (w0 + w1, min(m0, m1), created, g0 + g1))
        created += 1
    return Codebook(
        {symbols[i]: codes[i] for i in atoms},
        prefix_free=True,
        probs={symbols[i]: float(probs[i]) for i in atoms},
    )


@dataclass(frozen=True)
class EncodingReport:
    ell_n: float
    ell_c: float
    ell_u: float
    lambda_cond: float
    h_cond: float
    h_diff: float

    def sandwiches(self, tol: float = 1e-9) -> dict:
        """Each length against its reference; every bound is loosened by ``tol``.

        The strict upper bounds need the slack too: for p = (1 - e, e) with
        tiny e, Huffman spends 1 bit while H + 1 rounds to exactly 1.
        """
        return {
            "non_prefix": self.lambda_cond - 2 - tol < self.ell_n <= self.lambda_cond + tol,
            "cond_prefix": self.h_cond - tol <= self.ell_c < self.h_cond + 1 + tol,
            "uncond_prefix": self.h_diff - tol <= self.ell_u < self.h_diff + 1 + tol,
        }


def conditional_encoding_report(j: JointPmf) -> EncodingReport:
    """Expected lengths of the three ways of coding X with side information Y."""
    ell_n = math.fsum(w * one_to_one_optimal_length(row) for _, w, row in j.conditionals())
    ell_c = math.fsum(w * huffman(row).expected_length for _, w, row in j.conditionals())
    ell_u = huffman(compression_pmf(j)).expected_length
    return EncodingReport(ell_n, ell_c, ell_u, cond_layered(j), cond_shannon(j), cond_diff_entropy(j))


def union_codebook(books: Iterable[Codebook]) -> list[str]:
    """All words of several codebooks, as seen by a decoder that lacks Y."""
    return [w for b in books for w in b.words.values()]


# -- bitstreams ---------------------------------------------------------------


def pack_bits(bits: str) -> bytes:
    """32-bit big-endian bit count, then the bits MSB-first, zero padded."""
    if any(c not in "01" for c in bits):
        raise ValueError("bitstring may only contain 0 and 1")
    n = len(bits)
    padded = bits + "0" * (-n % 8)
    body = bytes(int(padded[i : i + 8], 2) for i in range(0, len(padded), 8))
    return struct.pack(">I", n) + body


def unpack_bits(data: bytes) -> str:
    if len(data) < 4:
        raise ValueError("missing bit-length header")
    (n,) = struct.unpack(">I", data[:4])
    body = data[4:]
    if len(body) * 8 < n:
        raise ValueError("bitstream shorter than its header says")
    return "".join(f"{b:08b}" for b in body)[:n]


# -- keyframe stream ------------------------------------------------------------


@dataclass(frozen=True)
class FrameOutcome:
    index: int
    keyframe: bool
    status: str  # "lost", "skipped" (context unknown) or "decoded"
    decoded: Hashable | None
    correct: bool


@dataclass(frozen=True)
class StreamReport:
    mode: str
    bit_length: int
    frames: list
    keyframes_after_loss: list  # (index, aligned, correct)

    @property
    def keyframe_recovered(self) -> bool:
        return all(a and c for _, a, c in self.keyframes_after_loss)

    def as_dict(self) -> dict:
        return {
            "mode": self.mode,
            "bit_length": self.bit_length,
            "frames": [asdict(f) for f in self.frames],
            "keyframes_after_loss": [
                {"index": i, "aligned": a, "correct": c} for i, a, c in self.keyframes_after_loss
            ],
            "keyframe_recovered": self.keyframe_recovered,
        }


def _stream_codebooks(transition: JointPmf, mode: str):
    m = transition.matrix
    nx, ny = m.shape
    if nx != ny:
        raise ValueError("frame transition must be square (current x previous)")
    key = huffman(transition.p_x)
    if mode == "cond_prefix":
        cond = {y: huffman(m[:, y] / m[:, y].sum()) for y in range(ny) if m[:, y].sum() > 0}
        return key, cond, None
    if mode == "uncond_prefix":
        ranks = np.empty((nx, ny), dtype=int)
        for y in range(ny):
            ranks[np.argsort(-m[:, y], kind="stable"), y] = np.arange(nx)
        return key, ranks, huffman(compression_pmf(transition))
    raise ValueError(f"unknown mode {mode!r}")


def keyframe_stream_demo(
    frames: Sequence[int],
    loss_pattern: Sequence[int],
    transition: JointPmf,
    key_period: int,
    mode: str = "uncond_prefix",
) -> StreamReport:
    """Encode a frame sequence, drop the frames marked in ``loss_pattern`` and decode.

    ``transition.matrix[x, y]`` is the probability of frame x following
    frame y. Frames at multiples of ``key_period`` are keyframes, coded
    with a Huffman code of the frame marginal. Other frames are coded given
    the previous frame: per-context Huffman codes in ``cond_prefix`` mode,
    or the rank of the frame within p(.|previous) under one Huffman code
    of the compressed variable in ``uncond_prefix`` mode.

    The decoder knows frame indices and where a lost run ends. With the
    previous frame unknown, ``uncond_prefix`` still parses the rank word and
    stays aligned; ``cond_prefix`` can only guess the context (the most
    likely frame) and reads a word with that guessed code, which may leave it
    misaligned when the next keyframe arrives.
    """
    if key_period < 1:
        raise ValueError("key_period must be at least 1")
    if len(loss_pattern) != len(frames) or any(b not in (0, 1) for b in loss_pattern):
        raise ValueError("loss pattern must be a 0/1 mask with one entry per frame")
    key, cond, ucode = _stream_codebooks(transition, mode)
    guess = int(np.argmax(transition.p_x))

    def codebook_for(t: int, prev):
        if t % key_period == 0:
            return key
        if mode == "cond_prefix":
            return cond.get(prev)
        return ucode

    words = []
    for t, x in enumerate(frames):
        try:
            if t % key_period == 0:
                words.append(key.encode(x))
            elif mode == "cond_prefix":
                words.append(cond[frames[t - 1]].encode(x))
            else:
                if transition.matrix[x, frames[t - 1]] <= 0:
                    raise KeyError(x)
                words.append(ucode.encode(int(cond[x, frames[t - 1]])))
        except KeyError:
            raise ValueError(f"frame {t} has zero probability under the model") from None
    offsets = np.cumsum([0] + [len(w) for w in words])
    stream = unpack_bits(pack_bits("".join(words)))
    received = "".join(
        stream[offsets[t] : offsets[t + 1]] for t in range(len(frames)) if not loss_pattern[t]
    )

    outcomes: list[FrameOutcome] = []
    after_loss: list = []
    pos = 0
    true_pos = 0  # offset in ``received`` of the current frame's true start
    prev = None  # decoder's belief about the previous frame; None = unknown
    pending_loss = False
    for t, x in enumerate(frames):
        is_key = t % key_period == 0
        if loss_pattern[t]:
            outcomes.append(FrameOutcome(t, is_key, "lost", None, False))
            prev, pending_loss = None, True
            continue
        if is_key or prev is not None:
            book = codebook_for(t, prev)
            start = pos
            try:
                if book is None:
                    raise DecodeError("no codebook for context")
                sym, pos = book.decode_prefix(received, pos)
                if not is_key and mode == "uncond_prefix":
                    order = np.argsort(-transition.matrix[:, prev], kind="stable")
                    sym = order[sym]
                sym = int(sym)
                outcomes.append(FrameOutcome(t, is_key, "decoded", sym, sym == x))
                if is_key and pending_loss:
                    after_loss.append((t, start == true_pos, sym == x))
                    pending_loss = False
                prev = sym
            except DecodeError:
                outcomes.append(FrameOutcome(t, is_key, "skipped", None, False))
                if is_key and pending_loss:
                    after_loss.append((t, False, False))
                    pending_loss = False
                prev = None
                pos = len(received)
        else:
            # context unknown: parse a word only to keep moving through the bits
            book = ucode if mode == "uncond_prefix" else cond.get(guess)
            try:
                _, pos = book.decode_prefix(received, pos)
            except (DecodeError, AttributeError):
                pos = len(received)
            outcomes.append(FrameOutcome(t, is_key, "skipped", None, False))
        true_pos += len(words[t])
    return StreamReport(mode, len(stream), outcomes, after_loss)
