"""Breeding two GPS states: conditional wave, homodyne density and feed-forward.

Every sum below is closed form in the Gaussian-moment calculus of
:mod:`gkpbreed.numerics`.  The p-independent coefficient tables are cached
per (n, precision); only the Θ_k(p, n/2π) factors change with the outcome.
Alternating sums are certified by recomputation at doubled precision.
"""
from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import mpmath as mp

from .errors import CancellationError, DegenerateOutcomeError
from .numerics import certified, f_coeff, half_gamma, hp, precise, theta
from .states import _check_n
from .waves import GaussPolyWave, translation_expectation

__all__ = [
    "BreedOutcome",
    "DisplacementDecision",
    "breed_wave",
    "homodyne_density",
    "momentum_wave",
    "g_fn",
    "corrective_delta",
    "displaced_wave",
    "mean_phase_after_correction",
]


@dataclass(frozen=True)
class BreedOutcome:
    n: int
    p: object
    wave: GaussPolyWave
    norm_N: object
    density: object


@dataclass(frozen=True)
class DisplacementDecision:
    g_value: object
    theta: object
    delta: object


# ---------------------------------------------------------------------------
# p-independent tables (cached per n and working precision)


@functools.lru_cache(maxsize=256)
def _tables(n: int, prec: int):
    with mp.workprec(prec):
        gamma = mp.mpf(n) / (2 * mp.pi)
        inv_gamma = 1 / gamma
        # f^k_l(n/2π) for k <= n, l <= k
        f_pos = [[f_coeff(k, l, gamma) for l in range(k + 1)] for k in range(n + 1)]
        # f^k_m(2π/n) for the inverse transform in the displaced form
        f_inv = [[f_coeff(k, l, inv_gamma) for l in range(k + 1)] for k in range(n + 1)]
        # ∫ q^(2m) exp(-(n/2π) q²) dq for m = 0..2n
        moments = [(2 * mp.pi / n) ** (m + mp.mpf(1) / 2) * half_gamma(m) for m in range(2 * n + 1)]
        # Θ_K(2√π, 4π/n) for K = 0..2n
        shift_theta = [theta(K, 2 * mp.sqrt(mp.pi), 4 * mp.pi / n) for K in range(2 * n + 1)]
        signed_binom = [(-1) ** k * mp.mpf(math.comb(n, k)) for k in range(n + 1)]
        lg = mp.loggamma(n + mp.mpf(1) / 2)
        # [Γ(n+1/2)^-1 (n/4π)^n √n / 2π]^2
        density_prefactor = mp.exp(
            2 * (-lg + n * mp.log(mp.mpf(n) / (4 * mp.pi)) + mp.log(mp.sqrt(n) / (2 * mp.pi)))
        )
    return {
        "gamma": gamma,
        "f_pos": f_pos,
        "f_inv": f_inv,
        "moments": moments,
        "shift_theta": shift_theta,
        "signed_binom": signed_binom,
        "density_prefactor": density_prefactor,
    }


def _table(n):
    return _tables(n, mp.mp.prec)


def _theta_from_table(row, y2, gamma):
    acc = mp.mpf(0)
    for f in row:
        acc = acc * y2 + f
    return mp.exp(-y2 / (2 * gamma)) * acc


def _unnormalized_coeffs(n, p):
    """(-1)^k C(n,k) Θ_k(p, n/2π) for k = 0..n (coefficient of q^(2(n-k)))."""
    t = _table(n)
    y2 = p * p
    return [
        t["signed_binom"][k] * _theta_from_table(t["f_pos"][k], y2, t["gamma"]) for k in range(n + 1)
    ]


def _norm_sq(n, p):
    t = _table(n)
    c = _unnormalized_coeffs(n, p)
    mom = t["moments"]
    return mp.fsum(c[k] * c[kk] * mom[2 * n - k - kk] for k in range(n + 1) for kk in range(n + 1))


def _momentum_coeffs(n, p):
    """B_s = sum_{k+j=s} (-1)^k C(n,k) Θ_k f^(n-k)_j(n/2π); coefficient of p1^(2(n-s))."""
    t = _table(n)
    c = _unnormalized_coeffs(n, p)
    B = [mp.mpf(0)] * (n + 1)
    for k in range(n + 1):
        row = t["f_pos"][n - k]
        for j in range(len(row)):
            B[k + j] += c[k] * row[j]
    return B


def _g_sum(n, p):
    """Quadruple sum for <exp(2i√π p1)>, grouped by k+j and k'+j'."""
    t = _table(n)
    B = _momentum_coeffs(n, p)
    th = t["shift_theta"]
    total = mp.fsum(B[s] * B[s2] * th[2 * n - s - s2] for s in range(n + 1) for s2 in range(n + 1))
    return total / (2 * mp.pi * _norm_sq(n, p))


def _displaced_coeffs(n, p):
    """Triple-sum coefficients of q^(2(n-t)) before the 1/(2πN) factor."""
    t = _table(n)
    B = _momentum_coeffs(n, p)
    D = [mp.mpf(0)] * (n + 1)
    for s in range(n + 1):
        row = t["f_inv"][n - s]
        for m in range(len(row)):
            D[s + m] += B[s] * row[m]
    return D


def _expand_even(coeffs_by_k, n):
    """Place coefficient of q^(2(n-k)) into a dense ascending tuple."""
    dense = [mp.mpf(0)] * (2 * n + 1)
    for k, c in enumerate(coeffs_by_k):
        dense[2 * (n - k)] = c
    return tuple(dense)


def _checked(fn, n, p, check, what):
    if check:
        return certified(fn, n, p, what=what)
    return fn(n, p)


def _validate(n, p):
    n = _check_n(n, 7)
    p = hp(p)
    if not mp.isfinite(p):
        raise DegenerateOutcomeError("homodyne outcome must be finite")
    return n, p


@precise
def breed_wave(n: int, p, check: bool = True) -> BreedOutcome:
    """Normalized conditional state phi_n(q|p) after breeding two GPS states."""
    n, p = _validate(n, p)
    c = _checked(_unnormalized_coeffs, n, p, check, "breeding coefficients")
    N2 = _checked(_norm_sq, n, p, check, "breeding norm")
    if not N2 > 0:
        raise CancellationError(f"breeding norm squared is {N2}; increase mantissa_bits")
    N = mp.sqrt(N2)
    wave = GaussPolyWave(_expand_even([ck / N for ck in c], n), _table(n)["gamma"])
    density = _table(n)["density_prefactor"] * N2
    return BreedOutcome(n, p, wave, N, density)


@precise
def homodyne_density(n: int, p, check: bool = True):
    """P^Hom_n(p): probability density of the momentum homodyne outcome."""
    n, p = _validate(n, p)
    N2 = _checked(_norm_sq, n, p, check, "breeding norm")
    if not N2 > 0:
        raise CancellationError(f"breeding norm squared is {N2}; increase mantissa_bits")
    return _table(n)["density_prefactor"] * N2


@precise
def momentum_wave(n: int, p, check: bool = True) -> GaussPolyWave:
    """phi_n(p1|p): the Fourier transform of :func:`breed_wave`, in closed form."""
    n, p = _validate(n, p)
    B = _checked(_momentum_coeffs, n, p, check, "momentum coefficients")
    N = mp.sqrt(_checked(_norm_sq, n, p, check, "breeding norm"))
    scale = 1 / (mp.sqrt(2 * mp.pi) * N)
    return GaussPolyWave(_expand_even([b * scale for b in B], n), 1 / _table(n)["gamma"])


@precise
def g_fn(n: int, p, check: bool = True):
    """Mean of exp(2i√π p1) over |phi_n(p1|p)|^2; real, its sign fixes delta."""
    n, p = _validate(n, p)
    return _checked(_g_sum, n, p, check, "g_n")


@precise
def corrective_delta(n: int, p, check: bool = True) -> DisplacementDecision:
    g = g_fn(n, p, check=check)
    if g >= 0:
        return DisplacementDecision(g, mp.mpf(0), mp.mpf(0))
    return DisplacementDecision(g, +mp.pi, mp.sqrt(mp.pi) / 2)


@precise
def displaced_wave(n: int, p, beta, check: bool = True) -> GaussPolyWave:
    """phi_{n,beta}(q|p) from the triple sum; equals exp(-i beta q) phi_n(q|p)."""
    n, p = _validate(n, p)
    beta = hp(beta)
    D = _checked(_displaced_coeffs, n, p, check, "displaced coefficients")
    N = mp.sqrt(_checked(_norm_sq, n, p, check, "breeding norm"))
    scale = 1 / (2 * mp.pi * N)
    return GaussPolyWave(_expand_even([d * scale for d in D], n), _table(n)["gamma"], -beta)


@precise
def mean_phase_after_correction(n: int, p, check: bool = True):
    """arg <phi_{n,delta}| D(sqrt(2 pi)) |phi_{n,delta}> after the feed-forward."""
    decision = corrective_delta(n, p, check=check)
    wave = displaced_wave(n, p, decision.delta, check=check)
    val = translation_expectation(wave, 2 * mp.sqrt(mp.pi))
    if abs(val) < mp.mpf("1e-30"):
        raise DegenerateOutcomeError(f"displacement overlap vanishes at n={n}, p={p}")
    return mp.arg(val)
