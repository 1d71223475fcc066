"""Noncoherent soft-output demodulation at the end nodes.

The received component ``y_m`` is modelled as ``beta * h * x_m + n_m`` with
``h ~ CN(0, E_R)``, ``x_m ~ CN(0, sigma_m^2)`` and ``n_m ~ CN(0, N0)``. Its density,
marginalised over the double-Gaussian gain, is a series in ``|y_m|^2 / N0``
whose coefficients are Whittaker ``W_{-(n+1/2),0}`` values at the fixed point
``N0 / (E_R sigma_m^2 beta^2)``. Four variance cases exist, so every likelihood
reuses one small precomputed table.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from numba import njit
from scipy import integrate, optimize, special

from .channel import ChannelParams, relay_scale_factor
from .modem import Interleaver, SymbolFrame, deinterleave, hard_decision, interleave, tone_labels
from .numerics import NEG_INF, log_whittaker_table, max_star, max_star_array

LLR_CLIP = 50.0


class QuadratureError(RuntimeError):
    """Adaptive quadrature missed its tolerance."""


@dataclass(frozen=True)
class DemodConfig:
    M: int
    n_terms: int = 50
    use_feedback: bool = False
    labeling: str = "natural"

    def __post_init__(self):
        if self.n_terms < 0:
            raise ValueError("n_terms must be nonnegative")

    @property
    def mu(self) -> int:
        return self.M.bit_length() - 1


def _case(m: int, own_tone: int, hyp_tone: int) -> int:
    return int(m == own_tone) + 2 * int(m == hyp_tone)


def case_variances(p: ChannelParams) -> np.ndarray:
    """``sigma^2`` indexed by case ``own + 2*hyp`` (flags: dimension carries that tone)."""
    return np.array([p.N0, p.N0 + p.E1, p.N0 + p.E2, p.N0 + p.E1 + p.E2])


def sigma_sq(own_tone: int, hyp_tone: int, m: int, p: ChannelParams) -> float:
    """Relay-signal variance on dimension ``m`` given both transmitted tones."""
    for t in (own_tone, hyp_tone, m):
        if not 0 <= t < p.M:
            raise ValueError(f"tone/dimension index {t} outside 0..{p.M - 1}")
    return float(case_variances(p)[_case(m, own_tone, hyp_tone)])


@dataclass(frozen=True)
class LikelihoodTable:
    """Per-operating-point constants shared by every symbol of a frame.

    ``logw[c, n]`` is ``log W_{-(n+1/2),0}(x_c)`` and ``offset[c]`` the
    hypothesis-dependent prefactor ``x_c / 2 - log sigma_c``.
    """

    params: ChannelParams
    n_terms: int
    beta: float
    variances: np.ndarray
    args: np.ndarray
    logw: np.ndarray
    offset: np.ndarray

    @classmethod
    def build(cls, p: ChannelParams, n_terms: int, beta: float | None = None) -> "LikelihoodTable":
        if n_terms < 0:
            raise ValueError("n_terms must be nonnegative")
        beta = relay_scale_factor(p) if beta is None else beta
        var = case_variances(p)
        args = p.N0 / (p.ER * var * beta**2)
        logw = np.stack([log_whittaker_table(n_terms, x) for x in args])
        offset = 0.5 * args - 0.5 * np.log(var)
        for a in (var, args, logw, offset):
            a.setflags(write=False)
        return cls(p, n_terms, beta, var, args, logw, offset)

    def log_norm(self, y: np.ndarray) -> np.ndarray:
        """Hypothesis-independent terms dropped from the likelihood, per column of ``y``."""
        p = self.params
        y = np.asarray(y)
        const = -p.M * math.log(math.pi * math.sqrt(p.N0 * p.ER) * self.beta)
        return const - np.sum(np.abs(y) ** 2, axis=0) / p.N0


def log_symbol_likelihood(
    y,
    own_tone: int,
    hyp_tone: int,
    p: ChannelParams,
    beta: float,
    n_terms: int,
    table: LikelihoodTable | None = None,
) -> float:
    """Log likelihood of one received vector, up to hypothesis-independent terms.

    Scalar reference path: every series is folded with :func:`max_star`.
    """
    y = np.asarray(y, dtype=complex).ravel()
    if y.size != p.M:
        raise ValueError(f"y must have {p.M} entries")
    if table is None or table.n_terms < n_terms or table.params != p or table.beta != beta:
        table = LikelihoodTable.build(p, n_terms, beta)
    n = np.arange(n_terms + 1)
    total = 0.0
    for m in range(p.M):
        c = _case(m, own_tone, hyp_tone)
        r2 = abs(y[m]) ** 2
        if r2 == 0.0:
            series = table.logw[c, 0]
        else:
            terms = n * math.log(r2 / p.N0) + table.logw[c, : n_terms + 1]
            series = max_star(terms)
        total += table.offset[c] + series
    return total


@njit(cache=True)
def _series(logz, w):
    if logz == -np.inf:
        return w[0]
    mx = -np.inf
    for n in range(w.size):
        t = n * logz + w[n]
        if t > mx:
            mx = t
    s = 0.0
    for n in range(w.size):
        s += np.exp(n * logz + w[n] - mx)
    return mx + np.log(s)


@njit(cache=True)
def _frame_loglik(logz, own, logw, offset):
    M, N = logz.shape
    out = np.empty((M, N))
    diff = np.empty(M)
    for k in range(N):
        a = own[k]
        base = 0.0
        for m in range(M):
            c0 = 1 if m == a else 0
            g0 = _series(logz[m, k], logw[c0]) + offset[c0]
            g1 = _series(logz[m, k], logw[c0 + 2]) + offset[c0 + 2]
            base += g0
            diff[m] = g1 - g0
        for q in range(M):
            out[q, k] = base + diff[q]
    return out


def symbol_log_likelihoods(Y: np.ndarray, own_tones, table: LikelihoodTable) -> np.ndarray:
    """``(M, N_q)`` array: row ``q`` is the log likelihood that the far node sent tone ``q``."""
    Y = np.asarray(Y)
    own = np.ascontiguousarray(own_tones, dtype=np.int64)
    if Y.ndim != 2 or Y.shape[0] != table.params.M or Y.shape[1] != own.size:
        raise ValueError("received frame and own symbols disagree in shape")
    with np.errstate(divide="ignore"):
        logz = np.log(np.abs(Y) ** 2 / table.params.N0)
    return _frame_loglik(np.ascontiguousarray(logz), own, np.ascontiguousarray(table.logw), np.ascontiguousarray(table.offset))


# -- validation oracle ----------------------------------------------------------


def _log_amplitude_integral(r: float, var: float, p: ChannelParams, beta: float, tol: float) -> float:
    # log of  int_0^inf a exp(-beta^2 a^2/N0) I0(2 beta a r/N0) K0(2a/sqrt(E_R var)) da
    c1 = 2.0 * beta * r / p.N0
    c2 = beta**2 / p.N0
    b = 2.0 / math.sqrt(p.ER * var)

    def log_f(a):
        return (
            math.log(a) - c2 * a * a
            + math.log(special.i0e(c1 * a)) + c1 * a
            + math.log(special.k0e(b * a)) - b * a
        )

    hi = 1.0 + (c1 + 1.0) / c2 + 1.0 / math.sqrt(c2)
    res = optimize.minimize_scalar(lambda a: -log_f(a), bounds=(1e-300, hi), method="bounded", options={"xatol": 1e-10 * hi})
    peak_at = float(res.x)
    peak = log_f(peak_at)
    f = lambda a: math.exp(log_f(a) - peak) if a > 0 else 0.0
    opts = dict(epsabs=0.0, epsrel=tol, limit=400)
    # judged by the returned error estimate below instead of scipy's warnings
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        v1, e1 = integrate.quad(f, 0.0, peak_at, **opts)
        v2, e2 = integrate.quad(f, peak_at, math.inf, **opts)
    val, err = v1 + v2, e1 + e2
    if not val > 0 or err > 100 * tol * val:
        raise QuadratureError(f"amplitude integral reached relative error {err / val if val else math.inf:.3g}")
    return math.log(val) + peak


def log_oracle_component_density(r: float, var: float, p: ChannelParams, beta: float, tol: float = 1e-10) -> float:
    """Log density of one complex component with magnitude ``r`` and relay variance ``var``."""
    return (
        -math.log(math.pi * p.N0) - r * r / p.N0
        + math.log(4.0 / (p.ER * var))
        + _log_amplitude_integral(r, var, p, beta, tol)
    )


def log_oracle_symbol_density(y, own_tone: int, hyp_tone: int, p: ChannelParams, beta: float, tol: float = 1e-10) -> float:
    """Log density by direct quadrature of the amplitude integral, no series involved."""
    y = np.asarray(y, dtype=complex).ravel()
    var = case_variances(p)
    return sum(
        log_oracle_component_density(abs(y[m]), float(var[_case(m, own_tone, hyp_tone)]), p, beta, tol)
        for m in range(p.M)
    )


def oracle_symbol_density(y, own_tone: int, hyp_tone: int, p: ChannelParams, beta: float, tol: float = 1e-10) -> float:
    return math.exp(log_oracle_symbol_density(y, own_tone, hyp_tone, p, beta, tol))


def log_closed_form_density(y, own_tone: int, hyp_tone: int, p: ChannelParams, beta: float, n_terms: int, table=None) -> float:
    """Truncated-series likelihood with the dropped constants restored: a true log density."""
    y = np.asarray(y, dtype=complex).ravel()
    if table is None:
        table = LikelihoodTable.build(p, n_terms, beta)
    ll = log_symbol_likelihood(y, own_tone, hyp_tone, p, beta, n_terms, table)
    return ll + float(table.log_norm(y[:, None])[0])


def log_component_density(r2, case: int, table: LikelihoodTable) -> np.ndarray:
    """Closed-form log density of one complex component with ``|y|^2 = r2``."""
    p = table.params
    r2 = np.asarray(r2, dtype=float)
    with np.errstate(divide="ignore"):
        logz = np.log(r2 / p.N0)
    n = np.arange(table.n_terms + 1)
    terms = np.where(np.isneginf(logz)[..., None] & (n > 0), NEG_INF, n * logz[..., None]) + table.logw[case]
    series = max_star_array(np.nan_to_num(terms, nan=NEG_INF), axis=-1)
    return -math.log(math.pi * math.sqrt(p.N0 * p.ER) * table.beta) - r2 / p.N0 + table.offset[case] + series


# -- soft mapping -----------------------------------------------------------------


def _log_bit_priors(v: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    # log P(u=1), log P(u=0); finite for v = +-inf
    v = np.asarray(v, dtype=float)
    return -np.logaddexp(0.0, -v), -np.logaddexp(0.0, v)


def somap(log_likelihoods, v_a, labeling: str = "natural") -> np.ndarray:
    """Per-bit a-posteriori LLRs for one symbol (reference path, max-star folds).

    Bit ``k``'s own prior is excluded, so the output is extrinsic to ``v_a``.
    """
    ll = np.asarray(log_likelihoods, dtype=float)
    M = ll.size
    labels = tone_labels(M, labeling)
    mu = labels.shape[1]
    v_a = np.asarray(v_a, dtype=float)
    if v_a.size != mu:
        raise ValueError(f"need {mu} a-priori LLRs, got {v_a.size}")
    lp1, lp0 = _log_bit_priors(v_a)
    z = np.empty(mu)
    for k in range(mu):
        sides = {0: [], 1: []}
        for q in range(M):
            metric = ll[q] + sum(lp1[j] if labels[q, j] else lp0[j] for j in range(mu) if j != k)
            sides[int(labels[q, k])].append(metric)
        z[k] = max_star(sides[1]) - max_star(sides[0])
    return z


def somap_frame(LL: np.ndarray, v_a, labeling: str = "natural") -> np.ndarray:
    """Vectorised :func:`somap` over a frame; ``LL`` is ``(M, N_q)``, output length ``N_q * mu``."""
    M, N = LL.shape
    labels = tone_labels(M, labeling).astype(bool)
    mu = labels.shape[1]
    v = np.zeros((N, mu)) if v_a is None else np.asarray(v_a, dtype=float).reshape(N, mu)
    lp1, lp0 = _log_bit_priors(v)
    bit_lp = np.where(labels[None, :, :], lp1[:, None, :], lp0[:, None, :])  # (N, M, mu)
    z = np.empty((N, mu))
    for k in range(mu):
        others = [j for j in range(mu) if j != k]
        metric = LL.T + (bit_lp[:, :, others].sum(axis=-1) if others else 0.0)
        one = labels[:, k]
        z[:, k] = max_star_array(metric[:, one], axis=1) - max_star_array(metric[:, ~one], axis=1)
    return z.ravel()


def demodulate_frame(
    Y: np.ndarray,
    own: SymbolFrame,
    v_a,
    cfg: DemodConfig,
    p: ChannelParams,
    table: LikelihoodTable | None = None,
) -> np.ndarray:
    """Bit LLRs (log P(1)/P(0), interleaved order) for the far node's frame."""
    if own.M != cfg.M or p.M != cfg.M:
        raise ValueError("modulation order mismatch")
    if table is None:
        table = LikelihoodTable.build(p, cfg.n_terms)
    LL = symbol_log_likelihoods(Y, own.tones, table)
    return somap_frame(LL, v_a, cfg.labeling)


# -- receiver loops -------------------------------------------------------------------


@dataclass
class ReceiveResult:
    info_bits: np.ndarray
    app_llrs: np.ndarray
    converged: bool
    iterations: int


def bicm_id_receive(
    Y: np.ndarray,
    own: SymbolFrame,
    code,
    il: Interleaver,
    cfg: DemodConfig,
    p: ChannelParams,
    iterations: int = 100,
    table: LikelihoodTable | None = None,
    early_stop: bool = True,
    decoder_opts: dict | None = None,
) -> ReceiveResult:
    """Demodulate and decode one frame, with or without decoder feedback.

    ``iterations`` is the total decoder-iteration budget in both modes: BICM
    spends it in one decoder call, BICM-ID spends one per demapper pass.
    """
    from .ldpc import SumProductDecoder

    if table is None:
        table = LikelihoodTable.build(p, cfg.n_terms)
    LL = symbol_log_likelihoods(Y, own.tones, table)
    dec = SumProductDecoder(code, **(decoder_opts or {}))

    if not cfg.use_feedback:
        z = np.clip(somap_frame(LL, None, cfg.labeling), -LLR_CLIP, LLR_CLIP)
        res = dec.decode(deinterleave(z, il), iterations, early_stop=early_stop)
        return ReceiveResult(res.bits[code.info_positions], res.llrs, res.converged, res.iterations)

    v_a = None
    used = 0
    for _ in range(iterations):
        z = np.clip(somap_frame(LL, v_a, cfg.labeling), -LLR_CLIP, LLR_CLIP)
        z_d = deinterleave(z, il)
        if used == 0:
            dec.reset(z_d)
        else:
            dec.set_channel(z_d)
        dec.iterate(1)
        used += 1
        v_o = dec.app_llrs
        v_a = interleave(v_o - z_d, il)
        if early_stop and dec.syndrome_ok():
            break
    bits = hard_decision(dec.app_llrs)
    return ReceiveResult(bits[code.info_positions], dec.app_llrs.copy(), dec.syndrome_ok(), used)
