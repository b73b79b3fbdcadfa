"""Exact breeding of squeezed cat states and its comparison with GPS breeding."""
from __future__ import annotations

from dataclasses import dataclass

import mpmath as mp

from .breeding_approx import corrective_delta, displaced_wave, homodyne_density
from .errors import DegenerateOutcomeError, DomainError
from .metrics import KLResult, kl_divergence
from .numerics import hp, precise
from .states import _check_n, r_opt
from .waves import CombWave, GaussPolyWave, norm2, overlap

__all__ = [
    "ExactBreedOutcome",
    "exact_breed_wave",
    "ideal_breed_wave",
    "exact_homodyne_density",
    "exact_g",
    "exact_displaced_wave",
    "approx_vs_exact_fidelity",
    "kl_divergence_vs_exact",
    "default_kl_grid",
]


@dataclass(frozen=True)
class ExactBreedOutcome:
    kappa: int
    r: object
    p: object
    wave: CombWave
    density: object
    g_tilde: object
    delta_tilde: object


def _three_peaks(rate, center_weight):
    s = 2 * mp.sqrt(mp.pi)
    one = mp.mpf(1)
    return CombWave(
        (
            GaussPolyWave((one,), rate, 0, -s),
            GaussPolyWave((mp.mpf(center_weight),), rate, 0, 0),
            GaussPolyWave((one,), rate, 0, s),
        )
    )


def _check_r(r):
    r = hp(r)
    if not r > 0:
        raise DomainError(f"squeezing r must be positive, got {r}")
    return r


@precise
def exact_homodyne_density(kappa: int, r, p):
    """Density of the momentum outcome when breeding two SCSSs with alpha = √π e^r."""
    r, p = _check_r(r), hp(p)
    k = int(kappa) % 2
    A = mp.exp(2 * r)
    c = 2 * mp.sqrt(mp.pi) * p
    num = (
        1
        + mp.exp(4 * A * mp.pi) * (2 * mp.cos(c) ** 2 + 1)
        + 4 * mp.exp(3 * A * mp.pi) * mp.cos(c + k * mp.pi)
    )
    den = 2 * mp.exp(r) * mp.sqrt(mp.pi) * ((-1) ** k + mp.exp(2 * A * mp.pi)) ** 2
    return mp.exp(-mp.exp(-2 * r) * p * p) * num / den


@precise
def exact_g(kappa: int, r, p):
    """Closed-form sign function for the exact corrective displacement."""
    r, p = _check_r(r), hp(p)
    k = int(kappa) % 2
    A = mp.exp(2 * r)
    pi = mp.pi
    c2 = mp.cos(2 * mp.sqrt(pi) * p + k * pi)
    c4 = mp.cos(4 * mp.sqrt(pi) * p)
    num = mp.exp(-5 * A * pi) + mp.exp(3 * A * pi) * (5 + 2 * c4) + 4 * (1 + mp.exp(4 * A * pi)) * c2
    den = 1 + mp.exp(5 * A * pi) * (2 + c4) + 4 * mp.exp(3 * A * pi) * c2
    return num / den


@precise
def exact_breed_wave(kappa: int, r, p) -> ExactBreedOutcome:
    """Normalized three-peak conditional state from exact SCSS breeding."""
    r, p = _check_r(r), hp(p)
    k = int(kappa) % 2
    raw = _three_peaks(mp.exp(2 * r), 2 * mp.cos(2 * mp.sqrt(mp.pi) * p + k * mp.pi))
    n2 = norm2(raw)
    if not n2 > mp.mpf("1e-30"):
        raise DegenerateOutcomeError(f"exact breeding output vanishes at p={p}")
    wave = raw.scaled(1 / mp.sqrt(n2))
    g = exact_g(k, r, p)
    delta = mp.mpf(0) if g >= 0 else mp.sqrt(mp.pi) / 2
    return ExactBreedOutcome(k, r, p, wave, exact_homodyne_density(k, r, p), g, delta)


@precise
def ideal_breed_wave(r) -> CombWave:
    """The ideal (1, 2, 1) three-peak output with its explicit normalization."""
    r = _check_r(r)
    A = mp.exp(2 * r)
    norm = mp.pi ** (mp.mpf(1) / 4) * mp.sqrt(
        2 * mp.exp(-r) * (3 + mp.exp(-4 * A * mp.pi) + 4 * mp.exp(-A * mp.pi))
    )
    return _three_peaks(A, 2).scaled(1 / norm)


@precise
def exact_displaced_wave(kappa: int, r, p, beta) -> CombWave:
    """exp(-i beta q) times the exact conditional state."""
    return exact_breed_wave(kappa, r, p).wave.with_phase_ramp(hp(beta))


@precise
def approx_vs_exact_fidelity(n: int, p, check: bool = True):
    """Fidelity of GPS breeding to SCSS breeding at r_opt(n), both feed-forward corrected."""
    n = _check_n(n, 7)
    p = hp(p)
    approx = displaced_wave(n, p, corrective_delta(n, p, check=check).delta, check=check)
    exact = exact_breed_wave(n % 2, r_opt(n), p)
    exact_wave = exact.wave.with_phase_ramp(exact.delta_tilde)
    return abs(overlap(exact_wave, approx)) ** 2


def default_kl_grid(n: int, panels_per_unit: int = 1, order: int = 24):
    """Composite Gauss-Legendre nodes covering every p with density above ~1e-30."""
    import numpy as np

    A = float(mp.exp(2 * r_opt(n)))
    # both densities decay like exp(-p^2 / A)
    p_max = float(np.ceil(np.sqrt(A * 75.0)))
    x, w = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(-p_max, p_max, int(2 * p_max * panels_per_unit) + 1)
    nodes, weights = [], []
    for lo, hi in zip(edges[:-1], edges[1:]):
        half = 0.5 * (hi - lo)
        nodes.append(lo + half * (x + 1))
        weights.append(half * w)
    return np.concatenate(nodes), np.concatenate(weights)


@precise
def kl_divergence_vs_exact(n: int, grid=None, check: bool = False) -> KLResult:
    """D_KL(P^Hom_n || exact density at r_opt(n)) by quadrature on ``grid``.

    ``grid`` is ``(nodes, weights)``; the default covers both supports with
    composite Gauss-Legendre panels.
    """
    n = _check_n(n, 7)
    nodes, weights = grid if grid is not None else default_kl_grid(n)
    r = r_opt(n)
    k = n % 2
    P = [homodyne_density(n, x, check=check) for x in nodes]
    Q = [exact_homodyne_density(k, r, x) for x in nodes]
    return kl_divergence(P, Q, weights)
