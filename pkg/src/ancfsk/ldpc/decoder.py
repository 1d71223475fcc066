"""Sum-product (belief propagation) decoding with a resumable state."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

from .code import ParityCheckMatrix

DEFAULT_CLIP = 50.0
# largest |tanh product| that atanh maps to a finite value
_TANH_LIMIT = 1.0 - 2.0**-52


@njit(cache=True)
def _iterate(ch, c2v, total, edge_var, chk_ptr, n_iter, clip, minsum):
    """Flooding iterations in the log P(0)/P(1) domain; updates c2v and total in place."""
    n_checks = chk_ptr.size - 1
    max_deg = 0
    for c in range(n_checks):
        d = chk_ptr[c + 1] - chk_ptr[c]
        if d > max_deg:
            max_deg = d
    t = np.empty(max_deg)
    fwd = np.empty(max_deg + 1)
    bwd = np.empty(max_deg + 1)
    for _ in range(n_iter):
        for c in range(n_checks):
            s, e = chk_ptr[c], chk_ptr[c + 1]
            d = e - s
            for i in range(d):
                v = total[edge_var[s + i]] - c2v[s + i]
                if v > clip:
                    v = clip
                elif v < -clip:
                    v = -clip
                t[i] = v
            if minsum:
                sign = 1.0
                m1 = np.inf
                m2 = np.inf
                arg = -1
                for i in range(d):
                    a = abs(t[i])
                    if t[i] < 0:
                        sign = -sign
                    if a < m1:
                        m2 = m1
                        m1 = a
                        arg = i
                    elif a < m2:
                        m2 = a
                for i in range(d):
                    mag = m2 if i == arg else m1
                    sg = sign * (-1.0 if t[i] < 0 else 1.0)
                    c2v[s + i] = sg * min(mag, clip)
            else:
                for i in range(d):
                    t[i] = np.tanh(0.5 * t[i])
                fwd[0] = 1.0
                for i in range(d):
                    fwd[i + 1] = fwd[i] * t[i]
                bwd[d] = 1.0
                for i in range(d - 1, -1, -1):
                    bwd[i] = bwd[i + 1] * t[i]
                for i in range(d):
                    p = fwd[i] * bwd[i + 1]
                    if p > _TANH_LIMIT:
                        p = _TANH_LIMIT
                    elif p < -_TANH_LIMIT:
                        p = -_TANH_LIMIT
                    v = 2.0 * np.arctanh(p)
                    if v > clip:
                        v = clip
                    elif v < -clip:
                        v = -clip
                    c2v[s + i] = v
        for j in range(total.size):
            total[j] = ch[j]
        for k in range(edge_var.size):
            total[edge_var[k]] += c2v[k]


@njit(cache=True)
def _syndrome_ok(total, edge_var, chk_ptr):
    for c in range(chk_ptr.size - 1):
        parity = 0
        for k in range(chk_ptr[c], chk_ptr[c + 1]):
            if total[edge_var[k]] < 0:
                parity ^= 1
        if parity:
            return False
    return True


@dataclass
class DecodeResult:
    llrs: np.ndarray
    bits: np.ndarray
    converged: bool
    iterations: int


class SumProductDecoder:
    """Decoder state for one frame.

    LLRs in and out use the ``log P(1)/P(0)`` convention. ``decode`` runs a
    whole schedule; ``reset``/``set_channel``/``iterate`` expose single
    iterations so an outer demapper loop can swap in fresh channel values
    while the check-to-variable messages carry over.
    """

    def __init__(self, code: ParityCheckMatrix, clip: float = DEFAULT_CLIP, minsum: bool = False):
        self.code = code
        self.clip = float(clip)
        self.minsum = bool(minsum)
        self._edge_var = np.ascontiguousarray(code.edge_var, dtype=np.int64)
        self._chk_ptr = np.ascontiguousarray(code.chk_ptr, dtype=np.int64)
        self.iterations = 0
        self._ch = None

    def reset(self, channel_llrs) -> None:
        self._c2v = np.zeros(self.code.n_edges)
        self.set_channel(channel_llrs)
        self._total = self._ch.copy()
        self.iterations = 0

    def set_channel(self, channel_llrs) -> None:
        ch = np.asarray(channel_llrs, dtype=float)
        if ch.shape != (self.code.L,):
            raise ValueError(f"expected {self.code.L} channel LLRs, got shape {ch.shape}")
        # internal domain is log P(0)/P(1)
        self._ch = -np.clip(ch, -self.clip, self.clip)
        if self.iterations:
            self._total = self._ch.copy()
            np.add.at(self._total, self._edge_var, self._c2v)

    def iterate(self, n: int = 1) -> None:
        _iterate(self._ch, self._c2v, self._total, self._edge_var, self._chk_ptr, n, self.clip, self.minsum)
        self.iterations += n

    @property
    def app_llrs(self) -> np.ndarray:
        return -self._total

    @property
    def hard_bits(self) -> np.ndarray:
        return (self._total < 0).astype(np.uint8)

    def syndrome_ok(self) -> bool:
        return bool(_syndrome_ok(self._total, self._edge_var, self._chk_ptr))

    def decode(self, channel_llrs, max_iters: int, early_stop: bool = True) -> DecodeResult:
        self.reset(channel_llrs)
        if early_stop and self.syndrome_ok():
            return DecodeResult(self.app_llrs, self.hard_bits, True, 0)
        for _ in range(max_iters):
            self.iterate(1)
            if early_stop and self.syndrome_ok():
                break
        return DecodeResult(self.app_llrs, self.hard_bits, self.syndrome_ok(), self.iterations)


def decode(channel_llrs, code: ParityCheckMatrix, max_iters: int = 100, early_stop: bool = True, **opts) -> DecodeResult:
    return SumProductDecoder(code, **opts).decode(channel_llrs, max_iters, early_stop)
