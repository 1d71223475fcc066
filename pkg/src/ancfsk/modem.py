"""Bit framing: bit-to-tone labelling, one-hot symbols, interleaving, hard decisions."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

LABELINGS = ("natural", "gray")


@dataclass(frozen=True)
class FrameConfig:
    """Frame dimensions. ``L == K`` in uncoded mode."""

    M: int
    K: int
    L: int

    def __post_init__(self):
        if self.M < 2 or self.M & (self.M - 1):
            raise ValueError(f"M must be a power of two >= 2, got {self.M}")
        if self.K <= 0 or self.L < self.K:
            raise ValueError(f"need 0 < K <= L, got K={self.K}, L={self.L}")
        if self.L % self.mu:
            raise ValueError(f"L={self.L} not divisible by mu={self.mu}")

    @property
    def mu(self) -> int:
        return self.M.bit_length() - 1

    @property
    def n_symbols(self) -> int:
        return self.L // self.mu

    @property
    def rate(self) -> float:
        return self.K / self.L

    @classmethod
    def uncoded(cls, M: int, K: int) -> "FrameConfig":
        return cls(M=M, K=K, L=K)


def tone_labels(M: int, labeling: str = "natural") -> np.ndarray:
    """``(M, mu)`` 0/1 table: row ``q`` holds the bits carried by tone ``q``, MSB first."""
    if labeling not in LABELINGS:
        raise ValueError(f"unknown labeling {labeling!r}")
    mu = M.bit_length() - 1
    q = np.arange(M)
    words = q ^ (q >> 1) if labeling == "gray" else q
    # for gray, row q is the Gray word assigned to tone q
    shifts = np.arange(mu - 1, -1, -1)
    return ((words[:, None] >> shifts) & 1).astype(np.uint8)


@dataclass(frozen=True)
class SymbolFrame:
    tones: np.ndarray
    M: int

    def __post_init__(self):
        t = np.asarray(self.tones, dtype=np.int64)
        if t.ndim != 1:
            raise ValueError("tones must be one-dimensional")
        if t.size and (t.min() < 0 or t.max() >= self.M):
            raise ValueError("tone index out of range")
        object.__setattr__(self, "tones", t)

    def __len__(self):
        return self.tones.size

    @cached_property
    def one_hot(self) -> np.ndarray:
        """``M x N_q`` matrix with a single 1 per column, at the tone row."""
        X = np.zeros((self.M, self.tones.size), dtype=np.uint8)
        X[self.tones, np.arange(self.tones.size)] = 1
        return X


def map_bits_to_tones(bits, cfg: FrameConfig, labeling: str = "natural") -> SymbolFrame:
    bits = np.asarray(bits, dtype=np.uint8).ravel()
    if bits.size != cfg.L:
        raise ValueError(f"expected {cfg.L} bits, got {bits.size}")
    groups = bits.reshape(-1, cfg.mu)
    weights = 1 << np.arange(cfg.mu - 1, -1, -1)
    words = groups.astype(np.int64) @ weights
    if labeling == "gray":
        words = _gray_to_index(words, cfg.mu)
    elif labeling != "natural":
        raise ValueError(f"unknown labeling {labeling!r}")
    return SymbolFrame(words, cfg.M)


def tones_to_bits(frame: SymbolFrame, labeling: str = "natural") -> np.ndarray:
    return tone_labels(frame.M, labeling)[frame.tones].ravel()


def _gray_to_index(g: np.ndarray, mu: int) -> np.ndarray:
    q = g.copy()
    shift = g >> 1
    while np.any(shift):
        q ^= shift
        shift >>= 1
    return q


@dataclass(frozen=True)
class Interleaver:
    """Fixed permutation; ``interleave(s)[i] = s[permutation[i]]``."""

    permutation: np.ndarray
    seed: int | None = None
    _inverse: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        p = np.asarray(self.permutation, dtype=np.int64)
        if p.ndim != 1 or not np.array_equal(np.sort(p), np.arange(p.size)):
            raise ValueError("permutation must be a bijection on 0..L-1")
        p.setflags(write=False)
        inv = np.empty_like(p)
        inv[p] = np.arange(p.size)
        inv.setflags(write=False)
        object.__setattr__(self, "permutation", p)
        object.__setattr__(self, "_inverse", inv)

    @classmethod
    def random(cls, length: int, seed: int) -> "Interleaver":
        rng = np.random.default_rng(seed)
        return cls(rng.permutation(length), seed=seed)

    @classmethod
    def identity(cls, length: int) -> "Interleaver":
        return cls(np.arange(length))

    def __len__(self):
        return self.permutation.size


def interleave(seq, il: Interleaver) -> np.ndarray:
    seq = np.asarray(seq)
    if seq.shape[-1] != len(il):
        raise ValueError(f"length {seq.shape[-1]} does not match interleaver {len(il)}")
    return seq[..., il.permutation]


def deinterleave(seq, il: Interleaver) -> np.ndarray:
    seq = np.asarray(seq)
    if seq.shape[-1] != len(il):
        raise ValueError(f"length {seq.shape[-1]} does not match interleaver {len(il)}")
    return seq[..., il._inverse]


def hard_decision(llrs) -> np.ndarray:
    """Bit 1 where LLR > 0; a zero LLR decides 0."""
    return (np.asarray(llrs) > 0).astype(np.uint8)
