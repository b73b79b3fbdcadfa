"""Wave functions used by the protocol and the squeezing-parameter maps.

Conventions: hbar = 1, [q, p] = i.  Homodyne projection onto <p| uses the
kernel exp(+ipq)/sqrt(2 pi); momentum wave functions use
``phi(p) = (2 pi)^-1/2 ∫ phi(q) exp(-i q p) dq``.  Every state here has
definite parity, so the two signs never disagree.  Real displacements
``D(alpha)`` move position by ``sqrt(2) alpha``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import mpmath as mp

from .errors import DomainError
from .numerics import hp, precise
from .waves import CombWave, GaussPolyWave, norm2, normalized

__all__ = [
    "SqueezingParams",
    "r_opt",
    "r_max",
    "r_c",
    "squeezing_params",
    "xi_to_db",
    "db_to_xi",
    "gps_wave",
    "gkp_wave",
    "gkp_truncation",
    "scss_wave",
    "p_gps",
]


def _check_n(n, lo):
    if int(n) != n:
        raise DomainError(f"photon number must be an integer, got {n}")
    if n < lo:
        raise DomainError(f"photon number must be >= {lo}, got {n}")
    return int(n)


@precise
def r_opt(n: int):
    """Squeezing that puts the GPS peaks at ±sqrt(2 pi): sech(2r) = 2 pi / n."""
    n = _check_n(n, 1)
    if 2 * mp.pi / n > 1:
        raise DomainError(f"peak spacing unreachable for n={n}; need n >= 7")
    return mp.acosh(mp.mpf(n) / (2 * mp.pi)) / 2


@precise
def r_max(n: int):
    """Input squeezing maximizing the n-photon detection probability."""
    n = _check_n(n, 1)
    return mp.acosh(1 + 2 * mp.mpf(n)) / 2


@precise
def r_c(n: int):
    """Inline squeezing that maps the r_max output back to r_opt."""
    n = _check_n(n, 1)
    return -mp.log(2 * mp.pi * (1 + 2 * mp.mpf(n)) / n) / 2


@dataclass(frozen=True)
class SqueezingParams:
    n: int
    r_opt: object
    r_max: object
    r_c: object


@precise
def squeezing_params(n: int) -> SqueezingParams:
    n = _check_n(n, 7)
    return SqueezingParams(n, r_opt(n), r_max(n), r_c(n))


def xi_to_db(xi):
    """dB value of a squeezing parameter: 10 log10(exp(2 xi))."""
    return 20 / mp.log(10) * xi


def db_to_xi(db):
    return mp.mpf(db) * mp.log(10) / 20


@precise
def gps_wave(n: int) -> GaussPolyWave:
    """Normalized GPS output at r_opt(n): ∝ (-q)^n exp(-(n/4pi) q^2)."""
    n = _check_n(n, 7)
    gamma = mp.mpf(n) / (2 * mp.pi)
    amp = gamma ** (mp.mpf(2 * n + 1) / 4) / mp.sqrt(mp.gamma(n + mp.mpf(1) / 2))
    coeffs = [mp.mpf(0)] * n + [(-1) ** n * amp]
    return GaussPolyWave(tuple(coeffs), gamma, norm_certificate=mp.mpf(1))


def _gkp_components(xi, m: int):
    rate = mp.exp(2 * xi)
    env = mp.exp(-2 * xi)
    root_pi = mp.sqrt(mp.pi)
    return [
        GaussPolyWave((mp.exp(-2 * mp.pi * t * t * env),), rate, 0, 2 * t * root_pi)
        for t in range(-m, m + 1)
    ]


@precise
def gkp_truncation(xi, tol: float = 1e-10, m_max: int = 200) -> int:
    """Smallest m whose comb norm moves by < tol (relative) when t = ±(m+1) is added."""
    xi = hp(xi)
    if xi < 0:
        raise DomainError("xi must be nonnegative")
    m = 1
    prev = norm2(CombWave(tuple(_gkp_components(xi, m))))
    while m < m_max:
        nxt = norm2(CombWave(tuple(_gkp_components(xi, m + 1))))
        if abs(nxt - prev) < tol * abs(nxt):
            return m
        m, prev = m + 1, nxt
    raise DomainError(f"GKP comb did not converge within m <= {m_max} (xi={xi})")


@precise
def gkp_wave(xi, m: int | None = None) -> CombWave:
    """Normalized finite-squeezed logical-zero comb with teeth t = -m..m.

    Tooth rate exp(2 xi), envelope weight exp(-2 pi t^2 exp(-2 xi)), teeth
    at 2 t sqrt(pi).  ``m=None`` picks the truncation adaptively.
    """
    xi = hp(xi)
    if xi < 0:
        raise DomainError("xi must be nonnegative")
    if m is None:
        m = gkp_truncation(xi)
    if m < 1:
        raise DomainError("m must be >= 1")
    return normalized(CombWave(tuple(_gkp_components(xi, int(m)))))


@precise
def scss_wave(kappa: int, alpha, r) -> CombWave:
    """Normalized S(r)[D(alpha) + (-1)^kappa D(-alpha)]|0>.

    S(r) narrows position by exp(-r), so the two Gaussians have rate
    exp(2r) and sit at ±sqrt(2) alpha exp(-r).
    """
    alpha, r = hp(alpha), hp(r)
    sign = -1 if int(kappa) % 2 else 1
    if sign < 0 and alpha == 0:
        raise DomainError("odd SCSS with alpha = 0 is the zero vector")
    rate = mp.exp(2 * r)
    center = mp.sqrt(2) * alpha * mp.exp(-r)
    comps = (
        GaussPolyWave((mp.mpf(1),), rate, 0, center),
        GaussPolyWave((mp.mpf(sign),), rate, 0, -center),
    )
    return normalized(CombWave(comps))


@precise
def p_gps(n: int):
    """GPS success probability for n detected photons at input squeezing r_max(n)."""
    n = _check_n(n, 1)
    nn = mp.mpf(n)
    return (
        mp.mpf(2) ** (-n)
        * nn**n
        * (1 + 2 * nn) ** (-mp.mpf(1) / 2 - n)
        * mp.mpf(math.factorial(2 * n))
        / mp.mpf(math.factorial(n)) ** 2
    )
