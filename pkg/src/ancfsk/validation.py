"""Self-checks behind ``anc-sim validate``: special functions and the quadrature oracle."""

from __future__ import annotations

import math
from dataclasses import dataclass

import mpmath as mp
import numpy as np
from scipy import integrate

from .channel import ChannelParams, relay_scale_factor, two_way_relay
from .demod import LikelihoodTable, log_closed_form_density, log_component_density, log_oracle_symbol_density
from .modem import SymbolFrame
from .numerics import bessel_k0, exp1, log_bessel_i0, log_whittaker_table, log_whittaker_w_neg_half


@dataclass
class CheckResult:
    name: str
    passed: bool
    worst: float
    tolerance: float

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        return f"[{tag}] {self.name}: worst {self.worst:.3g} (tolerance {self.tolerance:g})"


def _rel(a, b) -> float:
    return abs(a - b) / abs(b)


def check_bessel() -> CheckResult:
    worst = 0.0
    with mp.workdps(30):
        for x in (1e-3, 0.5, 3.0, 20.0, 300.0):
            ref = float(mp.log(mp.besseli(0, x)))
            # log I0 is tiny near zero, so compare on max(1, |ref|)
            worst = max(worst, abs(log_bessel_i0(x) - ref) / max(1.0, abs(ref)))
            worst = max(worst, _rel(bessel_k0(x), float(mp.besselk(0, x))))
    return CheckResult("Bessel I0/K0 vs mpmath", worst < 1e-12, worst, 1e-12)


def check_exp1() -> CheckResult:
    # E1(x) = e^-x int_0^inf e^-s / (x + s) ds, an integrand on a fixed scale
    with mp.workdps(30):
        ref = lambda x: mp.exp(-x) * mp.quad(lambda s: mp.exp(-s) / (x + s), [0, 1, 10, 50, mp.inf])
        worst = max(_rel(exp1(x), float(ref(x))) for x in (0.01, 0.3, 1.0, 7.5, 60.0))
    return CheckResult("E1 vs quadrature", worst < 1e-12, worst, 1e-12)


def check_whittaker_order_zero() -> CheckResult:
    xs = np.logspace(-2, 2, 41)
    worst = max(_rel(log_whittaker_w_neg_half(0, x), 0.5 * math.log(x) + 0.5 * x + math.log(exp1(x))) for x in xs)
    return CheckResult("W_{-1/2,0}(x) = sqrt(x) e^{x/2} E1(x) on [0.01, 100]", worst < 1e-8, worst, 1e-8)


def check_whittaker_table() -> CheckResult:
    worst = 0.0
    with mp.workdps(30):
        for x in (1e-6, 0.02, 0.7, 4.0, 40.0):
            t = log_whittaker_table(80, x)
            for n in (0, 5, 30, 80):
                worst = max(worst, _rel(t[n], float(mp.log(mp.whitw(-(n + mp.mpf(1) / 2), 0, x)))))
    return CheckResult("Whittaker table vs mpmath", worst < 1e-10, worst, 1e-10)


def check_oracle(M: int, N0: float, n_terms: int, draws: int, seed: int = 0) -> CheckResult:
    p = ChannelParams(N0=N0, M=M)
    beta = relay_scale_factor(p)
    table = LikelihoodTable.build(p, n_terms)
    rng = np.random.default_rng(seed)
    worst = 0.0
    for i in range(draws):
        own, hyp, tx = (int(v) for v in rng.integers(0, M, 3))
        y = two_way_relay(SymbolFrame(np.array([own]), M), SymbolFrame(np.array([tx]), M), p, seed, i)[:, 0]
        cf = log_closed_form_density(y, own, hyp, p, beta, n_terms, table)
        worst = max(worst, abs(math.expm1(cf - log_oracle_symbol_density(y, own, hyp, p, beta))))
    return CheckResult(f"closed form vs quadrature, M={M}, N0={N0:g}, N_t={n_terms}, {draws} draws", worst < 1e-4, worst, 1e-4)


def check_normalization() -> CheckResult:
    t = LikelihoodTable.build(ChannelParams(N0=1.0, M=2), 50)
    worst = 0.0
    for case in range(4):
        f = lambda r: 2 * math.pi * r * math.exp(log_component_density(r * r, case, t))
        worst = max(worst, abs(integrate.quad(f, 0, 60, limit=400)[0] - 1.0))
    return CheckResult("per-component density mass, four variance cases", worst < 1e-3, worst, 1e-3)


def run_all(draws: int = 100) -> list[CheckResult]:
    checks = [check_bessel(), check_exp1(), check_whittaker_order_zero(), check_whittaker_table(), check_normalization()]
    for M in (2, 4):
        for N0 in (1.0, 10.0):
            checks.append(check_oracle(M, N0, 50, draws))
        # at N0 = 0.1 fifty terms are too few for the largest |y|^2 / N0; a longer series is exact
        checks.append(check_oracle(M, 0.1, 400, draws))
    return checks
