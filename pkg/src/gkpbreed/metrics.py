"""Fidelities, the damping filter, Glancy-Knill no-error probability and KL divergence."""
from __future__ import annotations

from dataclasses import dataclass, field

import mpmath as mp
import numpy as np

from . import kernels
from .errors import ContractError, ConvergenceError, ConventionError, DomainError
from .numerics import hp, precise
from .waves import Wave, norm2, normalized, overlap

__all__ = [
    "GKNoErrorResult",
    "KLResult",
    "fidelity_pure",
    "fidelity_pure_mixed",
    "damping_map",
    "gk_no_error",
    "kl_divergence",
]

_NORM_TOL = 1e-8


def _require_normalized(w: Wave, name: str, tol: float = _NORM_TOL):
    n2 = norm2(w)
    if abs(n2 - 1) > tol:
        raise ContractError(f"{name} is not normalized (norm^2 = {mp.nstr(n2, 12)})")


@precise
def fidelity_pure(psi: Wave, phi: Wave, check_norm: bool = True):
    """|<psi|phi>|^2 for normalized pure states, in closed form."""
    if check_norm:
        _require_normalized(psi, "psi")
        _require_normalized(phi, "phi")
    return abs(overlap(psi, phi)) ** 2


@precise
def fidelity_pure_mixed(psi: Wave, rho, check_norm: bool = True):
    """<psi|rho|psi> for a finite mixture ``rho.terms = [(weight, wave), ...]``."""
    if check_norm:
        _require_normalized(psi, "psi")
    trace = mp.fsum(w for w, _ in rho.terms)
    if abs(trace - 1) > _NORM_TOL:
        raise ContractError(f"density kernel trace is {mp.nstr(trace, 12)}, expected 1")
    return mp.fsum(w * abs(overlap(psi, wave)) ** 2 for w, wave in rho.terms)


@precise
def damping_map(psi: Wave, r_d):
    """Apply exp(-(1 - tanh r_d) q^2 / 4) sqrt(sech r_d).

    Returns ``(normalized image, success probability)``.  Side peaks at
    ±2√π shrink against the center by exp((1 - tanh r_d) pi).
    """
    r_d = hp(r_d)
    if r_d < 0:
        raise DomainError(f"damping squeezing must be nonnegative, got {r_d}")
    image = psi.with_extra_rate((1 - mp.tanh(r_d)) / 2, mp.sqrt(mp.sech(r_d)))
    prob = norm2(image)
    return normalized(image), prob


# ---------------------------------------------------------------------------
# Glancy-Knill no-error probability

_ROOT_PI = float(np.sqrt(np.pi))
_LATTICE = 2 * _ROOT_PI
_WINDOW = _ROOT_PI / 6


@dataclass(frozen=True)
class GKNoErrorResult:
    value: float
    cell_mass: float
    nodes: int
    shifts: tuple = field(default=(0, 0))


def _window_kernel(S: int, half_width: float) -> np.ndarray:
    """K(d) = ∫_{-h}^{h} exp(-2i d √π v) dv for d = -(S-1)..S-1."""
    d = np.arange(-(S - 1), S, dtype=np.float64)
    out = np.empty_like(d)
    zero = d == 0
    out[zero] = 2 * half_width
    dz = d[~zero]
    out[~zero] = np.sin(2 * dz * _ROOT_PI * half_width) / (dz * _ROOT_PI)
    return out


def _gl(lo: float, hi: float, order: int):
    x, w = np.polynomial.legendre.leggauss(order)
    half = 0.5 * (hi - lo)
    return lo + half * (x + 1), half * w


def _shift_block(psi: Wave, u: np.ndarray, w: np.ndarray, tail_tol: float, s_max: int = 400):
    """Rows psi(u + 2 s √π) for s = -S..S, grown until outer shells are negligible."""
    rows = {0: psi.evaluate(u)}
    total = float(np.sum(w * np.abs(rows[0]) ** 2))
    s, quiet = 0, 0
    while quiet < 2:
        s += 1
        if s > s_max:
            raise ConvergenceError("shift sum did not terminate", best=total)
        shell = 0.0
        for sgn in (s, -s):
            rows[sgn] = psi.evaluate(u + sgn * _LATTICE)
            shell += float(np.sum(w * np.abs(rows[sgn]) ** 2))
        total += shell
        quiet = quiet + 1 if shell < tail_tol * max(total, 1e-300) else 0
    keys = sorted(rows)
    return np.ascontiguousarray(np.stack([rows[k] for k in keys])), (keys[0], keys[-1])


def _cell_integral(psi, lo, hi, half_v, order, tail_tol):
    u, w = _gl(lo, hi, order)
    block, span = _shift_block(psi, u, w, tail_tol)
    K = _window_kernel(block.shape[0], half_v)
    # Zak amplitude prefactor c^2 = 1/√π makes the full cell integrate to ||psi||^2
    return kernels.zak_window_mass(block, w, K) / _ROOT_PI, span


def gk_no_error(
    psi: Wave,
    order: int = 48,
    rel_tol: float = 1e-10,
    tail_tol: float = 1e-14,
    mass_tol: float = 1e-6,
    max_order: int = 1536,
) -> GKNoErrorResult:
    """Mass of the shift-error amplitude inside |u|, |v| <= √π/6.

    Z(u, v) = π^(-1/4) Σ_s exp(-i v (u + 2s√π)) psi(u + 2s√π) over the cell
    u ∈ [-√π, √π), v ∈ [-√π/2, √π/2).  The v integral is done exactly;
    u uses Gauss-Legendre with node doubling until ``rel_tol``.
    """
    value, used = None, order
    while True:
        val, span = _cell_integral(psi, -_WINDOW, _WINDOW, _WINDOW, used, tail_tol)
        if value is not None and abs(val - value) <= rel_tol * max(abs(val), 1e-300):
            value = val
            break
        value = val
        used *= 2
        if used > max_order:
            raise ConvergenceError("gk_no_error window quadrature did not converge", best=value)
    mass, prev, m_used = None, None, max(order, 64)
    while True:
        mass, _ = _cell_integral(psi, -_ROOT_PI, _ROOT_PI, _ROOT_PI / 2, m_used, tail_tol)
        if prev is not None and abs(mass - prev) <= 1e-12:
            break
        prev = mass
        m_used *= 2
        if m_used > 4 * max_order:
            break
    if abs(mass - 1) > mass_tol:
        raise ConventionError(f"Zak cell mass {mass!r} deviates from 1 by more than {mass_tol}")
    return GKNoErrorResult(float(value), float(mass), used, span)


# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class KLResult:
    value: object
    clamped: int = 0
    warnings: tuple = ()


def kl_divergence(P, Q, grid) -> KLResult:
    """D_KL(P || Q) = ∫ P log(P/Q) by quadrature.

    ``P`` and ``Q`` are callables or sequences of values at the nodes.
    ``grid`` is ``(nodes, weights)`` or, for sampled inputs, just weights.
    Points where P > 0 but Q underflows are clamped and counted.
    """
    if isinstance(grid, tuple) and len(grid) == 2:
        nodes, weights = grid
    else:
        nodes, weights = None, grid
    if callable(P) or callable(Q):
        if nodes is None:
            raise DomainError("callable densities need grid=(nodes, weights)")
        P = [P(x) if callable(P) else P[i] for i, x in enumerate(nodes)]
        Q = [Q(x) if callable(Q) else Q[i] for i, x in enumerate(nodes)]
    if len(P) != len(weights) or len(Q) != len(weights):
        raise DomainError("densities and quadrature weights differ in length")
    floor = mp.mpf("1e-300")
    terms, clamped = [], 0
    for p, q, w in zip(P, Q, weights):
        p, q = mp.mpf(p), mp.mpf(q)
        if p <= 0:
            continue
        if q <= floor:
            q = floor
            clamped += 1
        terms.append(mp.mpf(w) * p * mp.log(p / q))
    warnings = (f"clamped Q on {clamped} nodes",) if clamped else ()
    return KLResult(mp.fsum(terms), clamped, warnings)
