"""Log-domain and special-function primitives.

Everything here works on natural logarithms; ``-inf`` stands for a zero
probability. The Whittaker routines are specialised to the family
``W_{-(n+1/2), 0}(x)`` needed by the noncoherent symbol density.
"""

from __future__ import annotations

import math
from typing import Iterable

import numpy as np
from scipy import special

NEG_INF = -math.inf

# n*x threshold below which the forward three-term recurrence loses
# at most a few ulps; above it the backward (Miller) recurrence is used.
_FORWARD_NX_LIMIT = 4.0
_MILLER_TOL = 1e-15


def max_star2(x: float, y: float) -> float:
    """Binary max-star, ``max(x, y) + log(1 + exp(-|x - y|))``."""
    if x == NEG_INF:
        return y
    if y == NEG_INF:
        return x
    if x >= y:
        return x + math.log1p(math.exp(y - x))
    return y + math.log1p(math.exp(x - y))


def max_star(values: Iterable[float]) -> float:
    """Exact log-sum-exp via a left fold of :func:`max_star2`.

    The fold runs in input order: ``max*(max*(max*(v0, v1), v2), ...)``.
    """
    it = iter(values)
    try:
        acc = float(next(it))
    except StopIteration:
        raise ValueError("max_star needs at least one value") from None
    if math.isnan(acc):
        raise ValueError("max_star got NaN")
    for v in it:
        v = float(v)
        if math.isnan(v):
            raise ValueError("max_star got NaN")
        acc = max_star2(acc, v)
    return acc


def max_star_array(a: np.ndarray, axis: int = -1) -> np.ndarray:
    """Vectorised log-sum-exp along ``axis``; all ``-inf`` slices give ``-inf``."""
    a = np.asarray(a, dtype=float)
    m = np.max(a, axis=axis, keepdims=True)
    safe = np.where(np.isfinite(m), m, 0.0)
    with np.errstate(divide="ignore"):
        out = np.log(np.sum(np.exp(a - safe), axis=axis, keepdims=True)) + safe
    out = np.where(m == NEG_INF, NEG_INF, out)
    return np.squeeze(out, axis=axis)


def log_bessel_i0(x: float) -> float:
    """``log I0(x)`` for ``x >= 0``, overflow-free through the scaled Bessel."""
    if x < 0:
        raise ValueError(f"log_bessel_i0 needs x >= 0, got {x}")
    return float(np.log(special.i0e(x)) + x)


def bessel_k0(x: float) -> float:
    """Modified Bessel function of the second kind, order zero."""
    if not x > 0:
        raise ValueError(f"bessel_k0 needs x > 0, got {x}")
    return float(special.k0(x))


def log_bessel_k0(x: float) -> float:
    if not x > 0:
        raise ValueError(f"log_bessel_k0 needs x > 0, got {x}")
    return float(np.log(special.k0e(x)) - x)


def _log_hyperu_forward(nmax: int, x: float) -> np.ndarray:
    # U(a+1) = ((2a + x - 1) U(a) - U(a-1)) / a^2, seeded with U(0)=1 and
    # U(1) = e^x E1(x); carried as a running log scale plus an O(1) ratio.
    out = np.empty(nmax + 1)
    out[0] = 0.0
    if nmax == 0:
        return out
    u1 = float(special.exp1(x)) * math.exp(x)
    out[1] = math.log(u1)
    base = 0.0
    u0 = 1.0
    for a in range(1, nmax):
        u2 = ((2 * a + x - 1.0) * u1 - u0) / (a * a)
        out[a + 1] = base + math.log(u2)
        base += math.log(u1)
        u0, u1 = 1.0, u2 / u1
    return out


def _log_hyperu_backward(nmax: int, x: float) -> np.ndarray:
    # Ratios r_a = U(a+1)/U(a) satisfy r_{a-1} = 1 / (2a + x - 1 - a^2 r_a);
    # U is the minimal solution in a, so the downward sweep converges.
    start = max(nmax + 32, int(100.0 / x))
    prev = None
    while True:
        ratios = np.empty(nmax)
        r = 0.0
        for a in range(start, 0, -1):
            r = 1.0 / ((2 * a + x - 1.0) - a * a * r)
            if a <= nmax:
                ratios[a - 1] = r
        if prev is not None and np.max(np.abs(ratios / prev - 1.0)) < _MILLER_TOL:
            break
        prev = ratios
        start *= 2
    out = np.empty(nmax + 1)
    out[0] = 0.0
    out[1:] = np.cumsum(np.log(ratios))
    return out


def log_hyperu_table(nmax: int, x: float) -> np.ndarray:
    """``log U(a, 1, x)`` for ``a = 0..nmax`` (Tricomi confluent hypergeometric)."""
    if not x > 0:
        raise ValueError(f"argument must be positive, got {x}")
    if nmax < 0:
        raise ValueError("nmax must be nonnegative")
    if nmax == 0:
        return np.zeros(1)
    if nmax * x <= _FORWARD_NX_LIMIT:
        return _log_hyperu_forward(nmax, x)
    return _log_hyperu_backward(nmax, x)


def log_whittaker_table(n_max: int, x: float) -> np.ndarray:
    """``log W_{-(n+1/2),0}(x)`` for ``n = 0..n_max`` as one array.

    Uses ``W_{-(n+1/2),0}(x) = exp(-x/2) sqrt(x) U(n+1, 1, x)``.
    """
    if not x > 0:
        raise ValueError(f"Whittaker argument must be positive, got {x}")
    if n_max < 0:
        raise ValueError("n_max must be nonnegative")
    logu = log_hyperu_table(n_max + 1, x)
    return -0.5 * x + 0.5 * math.log(x) + logu[1:]


def log_whittaker_w_neg_half(n: int, x: float) -> float:
    """``log W_{-(n+1/2),0}(x)`` for a single order ``n >= 0``."""
    if n < 0:
        raise ValueError(f"order must be nonnegative, got {n}")
    return float(log_whittaker_table(n, x)[n])


def exp1(x: float) -> float:
    """Exponential integral ``E1(x)`` for ``x > 0``."""
    if not x > 0:
        raise ValueError(f"exp1 needs x > 0, got {x}")
    return float(special.exp1(x))
