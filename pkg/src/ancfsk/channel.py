"""Rayleigh-faded multiple-access and broadcast phases with amplify-and-forward relaying."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .modem import SymbolFrame

# Named RNG streams; the index is part of every derived seed.
STREAMS = (
    "fading_1r",
    "fading_2r",
    "fading_r1",
    "noise_r",
    "noise_1",
    "data",
    "interleaver",
)


def stream_rng(master_seed: int, *key: int, stream: str) -> np.random.Generator:
    """Counter-based generator for ``(master_seed, *key, stream)``.

    Independent of call order, so frames can be produced in any schedule.
    """
    sid = STREAMS.index(stream)
    ss = np.random.SeedSequence(master_seed, spawn_key=(*key, sid))
    return np.random.Generator(np.random.PCG64(ss))


@dataclass(frozen=True)
class ChannelParams:
    """Fading variances, one-sided noise density and modulation order."""

    E1: float = 1.0
    E2: float = 1.0
    ER: float = 1.0
    N0: float = 1.0
    M: int = 2

    def __post_init__(self):
        for name in ("E1", "E2", "ER", "N0"):
            v = getattr(self, name)
            if not (v > 0 and math.isfinite(v)):
                raise ValueError(f"{name} must be positive and finite, got {v}")
        if self.M < 2 or self.M & (self.M - 1):
            raise ValueError(f"M must be a power of two, got {self.M}")

    @classmethod
    def from_ebn0_db(cls, ebn0_db: float, M: int, rate: float = 1.0, **energies) -> "ChannelParams":
        """Unit fading variances and ``N0 = 1 / (mu * rate * Eb/N0)``."""
        mu = M.bit_length() - 1
        n0 = 1.0 / (mu * rate * 10.0 ** (ebn0_db / 10.0))
        return cls(N0=n0, M=M, **energies)


@dataclass(frozen=True)
class FadingRealization:
    gains: np.ndarray

    @property
    def amplitude(self) -> np.ndarray:
        return np.abs(self.gains)

    @property
    def phase(self) -> np.ndarray:
        return np.mod(np.angle(self.gains), 2 * np.pi)


def complex_gaussian(variance: float, size, rng: np.random.Generator) -> np.ndarray:
    """Circularly symmetric samples with ``E|z|^2 = variance``."""
    s = math.sqrt(variance / 2.0)
    return s * (rng.standard_normal(size) + 1j * rng.standard_normal(size))


def sample_fading(variance: float, n: int, rng: np.random.Generator) -> FadingRealization:
    if not variance > 0:
        raise ValueError("fading variance must be positive")
    return FadingRealization(complex_gaussian(variance, n, rng))


def relay_scale_factor(p: ChannelParams) -> float:
    return 1.0 / math.sqrt(p.N0 * p.M + p.E1 + p.E2)


def ma_phase(
    x1: SymbolFrame,
    x2: SymbolFrame,
    p: ChannelParams,
    rng_h1: np.random.Generator,
    rng_h2: np.random.Generator,
    rng_noise: np.random.Generator,
    noise: bool = True,
) -> np.ndarray:
    """Relay observation ``Y_R = X1 H1 + X2 H2 + N_R`` as an ``M x N_q`` array."""
    if len(x1) != len(x2) or x1.M != x2.M or x1.M != p.M:
        raise ValueError("symbol frames and channel must agree on length and M")
    n = len(x1)
    h1 = sample_fading(p.E1, n, rng_h1).gains
    h2 = sample_fading(p.E2, n, rng_h2).gains
    if noise:
        y = complex_gaussian(p.N0, (p.M, n), rng_noise)
    else:
        y = np.zeros((p.M, n), dtype=complex)
    cols = np.arange(n)
    y[x1.tones, cols] += h1
    y[x2.tones, cols] += h2
    return y


def bc_phase(
    xr: np.ndarray,
    p: ChannelParams,
    rng_h: np.random.Generator,
    rng_noise: np.random.Generator,
    noise: bool = True,
) -> np.ndarray:
    """End-node observation ``Y_i = X_R H_{R,i} + N_i``; one gain per column."""
    xr = np.asarray(xr)
    if xr.ndim != 2 or xr.shape[0] != p.M:
        raise ValueError(f"relay frame must be M x N_q with M={p.M}")
    h = sample_fading(p.ER, xr.shape[1], rng_h).gains
    y = xr * h[None, :]
    if noise:
        y = y + complex_gaussian(p.N0, xr.shape, rng_noise)
    return y


def two_way_relay(
    x1: SymbolFrame,
    x2: SymbolFrame,
    p: ChannelParams,
    master_seed: int,
    *key: int,
    noiseless: bool = False,
) -> np.ndarray:
    """Both phases end to end, observed at node 1, with named streams under ``key``."""
    g = lambda s: stream_rng(master_seed, *key, stream=s)
    yr = ma_phase(x1, x2, p, g("fading_1r"), g("fading_2r"), g("noise_r"), noise=not noiseless)
    xr = relay_scale_factor(p) * yr
    return bc_phase(xr, p, g("fading_r1"), g("noise_1"), noise=not noiseless)
