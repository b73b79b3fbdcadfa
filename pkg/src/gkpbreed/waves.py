"""Closed algebra of single-mode wave functions.

A :class:`GaussPolyWave` is ``P(q) * exp(-a (q - mu)^2 / 2 + i b q)`` with a
complex polynomial ``P`` in absolute position ``q``.  A :class:`CombWave`
is a finite sum of those.  Every overlap reduces to raw moments of a
(complex-mean) Gaussian, so inner products are exact up to working
precision.
"""
from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field
from typing import Iterable, Union

import mpmath as mp
import numpy as np

from . import kernels
from .errors import DomainError
from .numerics import gaussian_moments, precise

__all__ = ["GaussPolyWave", "CombWave", "Wave", "overlap", "norm2", "normalized", "components",
           "translation_expectation"]


def _as_scalar(c):
    c = mp.mpmathify(c)
    if isinstance(c, mp.mpc) and c.imag == 0:
        return c.real
    return c


@dataclass(frozen=True, eq=False)
class GaussPolyWave:
    coeffs: tuple
    a: object
    b: object = 0
    mu: object = 0
    norm_certificate: object = field(default=None)

    def __post_init__(self):
        coeffs = tuple(_as_scalar(c) for c in self.coeffs)
        while len(coeffs) > 1 and coeffs[-1] == 0:
            coeffs = coeffs[:-1]
        if not coeffs:
            coeffs = (mp.mpf(0),)
        object.__setattr__(self, "coeffs", coeffs)
        a = mp.mpf(self.a)
        if not a > 0:
            raise DomainError(f"Gaussian rate a must be positive, got {a}")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", mp.mpf(self.b))
        object.__setattr__(self, "mu", mp.mpf(self.mu))

    @property
    def terms(self) -> list:
        """Nonzero ``(coeff, power)`` pairs."""
        return [(c, j) for j, c in enumerate(self.coeffs) if c != 0]

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def is_real(self) -> bool:
        return self.b == 0 and all(not isinstance(c, mp.mpc) for c in self.coeffs)

    def __call__(self, q):
        q = mp.mpf(q)
        poly = mp.polyval(list(reversed(self.coeffs)), q)
        return poly * mp.exp(-self.a * (q - self.mu) ** 2 / 2 + mp.mpc(0, self.b * q))

    @functools.cached_property
    def _float_parts(self):
        c = np.array([complex(x) for x in self.coeffs], dtype=np.complex128)
        return c, float(self.a), float(self.b), float(self.mu)

    def evaluate(self, q, out=None) -> np.ndarray:
        """Vectorized float64 evaluation on a grid (accumulates into ``out``)."""
        q = np.ascontiguousarray(q, dtype=np.float64)
        if out is None:
            out = np.zeros(q.shape, dtype=np.complex128)
        c, a, b, mu = self._float_parts
        kernels.gausspoly_eval(c, a, b, mu, q.ravel(), out.reshape(-1))
        return out

    def scaled(self, factor) -> "GaussPolyWave":
        factor = _as_scalar(factor)
        return GaussPolyWave(tuple(factor * c for c in self.coeffs), self.a, self.b, self.mu)

    def with_phase_ramp(self, beta) -> "GaussPolyWave":
        """Multiply by ``exp(-i beta q)`` (a momentum displacement by ``-beta``)."""
        return GaussPolyWave(self.coeffs, self.a, self.b - mp.mpf(beta), self.mu)

    def with_extra_rate(self, extra, factor=1) -> "GaussPolyWave":
        """Multiply by ``factor * exp(-extra * q^2 / 2)``."""
        extra = mp.mpf(extra)
        factor = _as_scalar(factor)
        rate = self.a + extra
        if self.mu == 0:
            return GaussPolyWave(tuple(factor * c for c in self.coeffs), rate, self.b, self.mu)
        # a (q - mu)^2 + extra q^2 = rate (q - mu')^2 + a extra mu^2 / rate
        center = self.a * self.mu / rate
        factor = factor * mp.exp(-self.a * extra * self.mu**2 / (2 * rate))
        return GaussPolyWave(tuple(factor * c for c in self.coeffs), rate, self.b, center)

    def translated(self, d) -> "GaussPolyWave":
        """Return q -> psi(q - d) (the wave moved right by ``d``)."""
        d = mp.mpf(d)
        deg = self.degree
        shifted = [mp.mpf(0)] * (deg + 1)
        # P(q - d) = sum_j c_j sum_i C(j, i) q^i (-d)^(j - i)
        for j, c in enumerate(self.coeffs):
            if c == 0:
                continue
            for i in range(j + 1):
                shifted[i] += c * math.comb(j, i) * (-d) ** (j - i)
        phase = mp.expj(-self.b * d)
        return GaussPolyWave(tuple(phase * c for c in shifted), self.a, self.b, self.mu + d)

    def __add__(self, other):
        return CombWave((self,)) + other

    def __repr__(self):
        return (
            f"GaussPolyWave(degree={self.degree}, a={mp.nstr(self.a, 8)}, "
            f"b={mp.nstr(self.b, 8)}, mu={mp.nstr(self.mu, 8)})"
        )


@dataclass(frozen=True, eq=False)
class CombWave:
    components: tuple

    def __post_init__(self):
        comps = tuple(self.components)
        if not comps:
            raise DomainError("CombWave needs at least one component")
        for c in comps:
            if not isinstance(c, GaussPolyWave):
                raise DomainError("CombWave components must be GaussPolyWave")
        object.__setattr__(self, "components", comps)

    def __call__(self, q):
        return mp.fsum(c(q) for c in self.components)

    def evaluate(self, q, out=None) -> np.ndarray:
        q = np.ascontiguousarray(q, dtype=np.float64)
        if out is None:
            out = np.zeros(q.shape, dtype=np.complex128)
        for c in self.components:
            c.evaluate(q, out)
        return out

    def scaled(self, factor) -> "CombWave":
        return CombWave(tuple(c.scaled(factor) for c in self.components))

    def with_phase_ramp(self, beta) -> "CombWave":
        return CombWave(tuple(c.with_phase_ramp(beta) for c in self.components))

    def with_extra_rate(self, extra, factor=1) -> "CombWave":
        return CombWave(tuple(c.with_extra_rate(extra, factor) for c in self.components))

    def translated(self, d) -> "CombWave":
        return CombWave(tuple(c.translated(d) for c in self.components))

    def __add__(self, other):
        return CombWave(self.components + tuple(components(other)))

    def __repr__(self):
        return f"CombWave({len(self.components)} components)"


Wave = Union[GaussPolyWave, CombWave]


def components(w: Wave) -> Iterable[GaussPolyWave]:
    if isinstance(w, GaussPolyWave):
        return (w,)
    return w.components


def _pair_overlap(w1: GaussPolyWave, w2: GaussPolyWave):
    A = w1.a + w2.a
    C = -(w1.a * w1.mu**2 + w2.a * w2.mu**2) / 2
    if w1.b == w2.b:
        lin = w1.a * w1.mu + w2.a * w2.mu
    else:
        lin = mp.mpc(w1.a * w1.mu + w2.a * w2.mu, w2.b - w1.b)
    t1 = [(j, mp.conj(c)) for j, c in enumerate(w1.coeffs) if c != 0]
    t2 = [(k, c) for k, c in enumerate(w2.coeffs) if c != 0]
    if not t1 or not t2:
        return mp.mpf(0)
    top = t1[-1][0] + t2[-1][0]
    mom = gaussian_moments(top, A, lin)
    if len(t2) == 1:
        k, c2 = t2[0]
        s = c2 * mp.fsum(c1 * mom[j + k] for j, c1 in t1)
    elif len(t1) == 1:
        j, c1 = t1[0]
        s = c1 * mp.fsum(c2 * mom[j + k] for k, c2 in t2)
    else:
        s = mp.fsum(c1 * mp.fsum(c2 * mom[j + k] for k, c2 in t2) for j, c1 in t1)
    return s * mp.exp(C)


@precise
def overlap(psi: Wave, phi: Wave):
    """⟨psi|phi⟩ = ∫ conj(psi(q)) phi(q) dq in closed form."""
    return mp.fsum(_pair_overlap(c1, c2) for c1 in components(psi) for c2 in components(phi))


@precise
def translation_expectation(psi: Wave, c):
    """<psi| exp(i c p) |psi> = ∫ conj(psi(q)) psi(q + c) dq."""
    return overlap(psi, psi.translated(-c))


@precise
def norm2(w: Wave):
    """Closed-form ∫|w|² dq (real part of the self-overlap)."""
    comps = list(components(w))
    total = mp.mpf(0)
    for i, c1 in enumerate(comps):
        total += mp.re(_pair_overlap(c1, c1))
        for c2 in comps[i + 1:]:
            total += 2 * mp.re(_pair_overlap(c1, c2))
    return total


@precise
def normalized(w: Wave) -> Wave:
    n2 = norm2(w)
    if not n2 > 0:
        raise DomainError("cannot normalize a zero wave")
    out = w.scaled(1 / mp.sqrt(n2))
    if isinstance(out, GaussPolyWave):
        out = GaussPolyWave(out.coeffs, out.a, out.b, out.mu, norm_certificate=norm2(out))
    return out
