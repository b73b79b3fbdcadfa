"""Finite-resolution homodyne post-selection.

A window [p~ - eps, p~ + eps] heralds the mixture
rho = ∫ P(p) |phi_p><phi_p| dp / ∫ P(p) dp, which is represented on
Gauss-Legendre nodes so every node state stays in the closed wave algebra.
"""
from __future__ import annotations

from dataclasses import dataclass

import mpmath as mp
import numpy as np

from .breeding_approx import breed_wave, homodyne_density
from .breeding_exact import exact_breed_wave, exact_homodyne_density
from .errors import DomainError, ResolutionError
from .numerics import hp, precise
from .states import _check_n

__all__ = [
    "ApproxSource",
    "ExactSource",
    "DensityKernel",
    "finite_res_state",
    "window_probability",
]


@dataclass(frozen=True)
class ApproxSource:
    """GPS breeding with n-photon heralds."""

    n: int
    check: bool = False

    def density(self, p):
        return homodyne_density(self.n, p, check=self.check)

    def state(self, p):
        return breed_wave(self.n, p, check=self.check).wave


@dataclass(frozen=True)
class ExactSource:
    """Exact SCSS breeding with parity kappa and squeezing r."""

    kappa: int
    r: object

    def density(self, p):
        return exact_homodyne_density(self.kappa, self.r, p)

    def state(self, p):
        return exact_breed_wave(self.kappa, self.r, p).wave


@dataclass(frozen=True)
class DensityKernel:
    terms: tuple
    window: tuple
    probability: object

    @property
    def rank(self) -> int:
        return len(self.terms)

    @property
    def trace(self):
        return mp.fsum(w for w, _ in self.terms)


def _gl(lo, hi, order):
    x, w = np.polynomial.legendre.leggauss(order)
    half = (hi - lo) / 2
    return [lo + half * (mp.mpf(float(xi)) + 1) for xi in x], [half * mp.mpf(float(wi)) for wi in w]


def _window_mass(source, lo, hi, order):
    nodes, weights = _gl(lo, hi, order)
    dens = [source.density(x) for x in nodes]
    return nodes, weights, dens, mp.fsum(w * d for w, d in zip(weights, dens))


@precise
def finite_res_state(source, p_tilde, epsilon, nodes: int = 21, tol: float = 1e-8, max_nodes: int = 336):
    """Conditional mixed state for a width-2 eps window, and its probability.

    Nodes double until the window probability moves by < ``tol``
    (relative); the finer level is returned.
    """
    p_tilde, epsilon = hp(p_tilde), hp(epsilon)
    if not epsilon > 0:
        raise DomainError("epsilon must be positive")
    if nodes < 5:
        raise DomainError("need at least 5 nodes")
    lo, hi = p_tilde - epsilon, p_tilde + epsilon
    level = _window_mass(source, lo, hi, nodes)
    order = nodes
    while True:
        order *= 2
        if order > max_nodes:
            raise ResolutionError(f"window probability not converged with {order // 2} nodes")
        finer = _window_mass(source, lo, hi, order)
        if abs(finer[3] - level[3]) <= tol * abs(finer[3]):
            level = finer
            break
        level = finer
    xs, ws, dens, total = level
    if not total > 0:
        raise ResolutionError("window carries zero probability")
    terms = tuple((w * d / total, source.state(x)) for x, w, d in zip(xs, ws, dens))
    return DensityKernel(terms, (p_tilde, epsilon), total), total


@precise
def window_probability(n: int, p_tilde, epsilon, order: int = 20, tol: float = 1e-14, check: bool = False):
    """∫ P^Hom_n over [p~ - eps, p~ + eps] by composite Gauss-Legendre with doubling."""
    n = _check_n(n, 7)
    p_tilde, epsilon = hp(p_tilde), hp(epsilon)
    if not epsilon > 0:
        raise DomainError("epsilon must be positive")
    source = ApproxSource(n, check)
    lo, hi = p_tilde - epsilon, p_tilde + epsilon
    # densities decay like exp(-p^2 / e^{2 r_opt}); nothing beyond |p| ~ 60 matters
    lo, hi = max(lo, mp.mpf(-60)), min(hi, mp.mpf(60))
    if lo >= hi:
        return mp.mpf(0)
    panels = max(1, int(mp.ceil(hi - lo)))

    def integrate(k):
        edges = [lo + (hi - lo) * i / panels for i in range(panels + 1)]
        return mp.fsum(_window_mass(source, a, b, k)[3] for a, b in zip(edges[:-1], edges[1:]))

    prev = integrate(order)
    while True:
        order *= 2
        cur = integrate(order)
        if abs(cur - prev) <= tol * max(abs(cur), mp.mpf("1e-300")):
            return cur
        if order > 320:
            raise ResolutionError("window_probability did not converge")
        prev = cur
