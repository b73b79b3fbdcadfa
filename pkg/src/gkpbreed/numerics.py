"""Extended-precision scalars, Gaussian-moment closed forms and a quadrature oracle.

All closed forms here run on :mod:`mpmath` at the mantissa width of the
active :class:`PrecisionContext`.  Functions accept an optional ``ctx``
keyword; without it they inherit the innermost context entered with
:func:`using` (default 256 bits).  mpmath keeps its working precision in a
process-global, so parallel work is done with processes, not threads.
"""
from __future__ import annotations

import contextvars
import functools
import math
from contextlib import contextmanager
from dataclasses import dataclass, replace
from typing import Callable, Sequence

import mpmath as mp

from .errors import CancellationError, ConvergenceError, DomainError

__all__ = [
    "PrecisionContext",
    "DEFAULT_CONTEXT",
    "using",
    "active",
    "precise",
    "hp",
    "check_finite",
    "certified",
    "gamma_fn",
    "half_gamma",
    "f_coeff",
    "theta",
    "gauss_moment",
    "gaussian_moments",
    "quad_oracle",
]


@dataclass(frozen=True)
class PrecisionContext:
    mantissa_bits: int = 256
    rel_tol: float = 1e-20

    def __post_init__(self):
        if int(self.mantissa_bits) != self.mantissa_bits or self.mantissa_bits < 64:
            raise DomainError(f"mantissa_bits must be an integer >= 64, got {self.mantissa_bits}")
        if not self.rel_tol > 0:
            raise DomainError("rel_tol must be positive")

    def doubled(self) -> "PrecisionContext":
        return replace(self, mantissa_bits=2 * self.mantissa_bits)


DEFAULT_CONTEXT = PrecisionContext()
_ACTIVE: contextvars.ContextVar[PrecisionContext] = contextvars.ContextVar(
    "gkpbreed_precision", default=DEFAULT_CONTEXT
)


def active() -> PrecisionContext:
    return _ACTIVE.get()


@contextmanager
def using(ctx: PrecisionContext | None = None):
    """Enter ``ctx`` (or re-enter the active one) for the enclosed block."""
    ctx = ctx or _ACTIVE.get()
    token = _ACTIVE.set(ctx)
    try:
        with mp.workprec(ctx.mantissa_bits):
            yield ctx
    finally:
        _ACTIVE.reset(token)


def precise(fn: Callable) -> Callable:
    """Run ``fn`` inside the precision context given by its ``ctx`` keyword."""

    @functools.wraps(fn)
    def wrapper(*args, ctx: PrecisionContext | None = None, **kwargs):
        with using(ctx):
            return fn(*args, **kwargs)

    return wrapper


def hp(x) -> mp.mpf:
    """Coerce ``x`` (int, float, str, mpf) to an mpf at the working precision."""
    if isinstance(x, mp.mpc):
        raise DomainError("expected a real scalar")
    return mp.mpf(x)


def check_finite(x, what: str = "value"):
    if isinstance(x, mp.mpc):
        ok = mp.isfinite(x.real) and mp.isfinite(x.imag)
    else:
        ok = mp.isfinite(x)
    if not ok:
        raise ArithmeticError(f"{what} is not finite: {x}")
    return x


def _rel_gap(x, y) -> float:
    scale = max(abs(x), abs(y))
    if scale == 0:
        return 0.0
    return float(abs(x - y) / scale)


def certified(fn: Callable, *args, rel: float = 1e-10, what: str | None = None, **kwargs):
    """Evaluate ``fn`` at the active precision and again at twice that.

    Scalars are compared relatively; sequences relative to their largest
    entry.  Returns the base-precision result.
    """
    ctx = active()
    with using(ctx):
        base = fn(*args, **kwargs)
    with using(ctx.doubled()):
        high = fn(*args, **kwargs)
    if isinstance(base, (list, tuple)):
        scale = max((abs(h) for h in high), default=0)
        gap = 0.0 if scale == 0 else float(max(abs(b - h) for b, h in zip(base, high)) / scale)
    else:
        gap = _rel_gap(base, high)
    if gap > rel:
        name = what or getattr(fn, "__name__", "sum")
        raise CancellationError(
            f"{name}: precision doubling moved the result by rel {gap:.3e} "
            f"at {ctx.mantissa_bits} bits; increase mantissa_bits"
        )
    return base


@precise
def gamma_fn(x) -> mp.mpf:
    x = hp(x)
    if x <= 0:
        raise DomainError(f"gamma_fn requires x > 0, got {x}")
    return check_finite(mp.gamma(x), "gamma")


@functools.lru_cache(maxsize=4096)
def _half_gamma_cached(l: int, prec: int) -> mp.mpf:
    # Γ(l + 1/2) = (2l)! √π / (4^l l!)
    return mp.factorial(2 * l) * mp.sqrt(mp.pi) / (mp.mpf(4) ** l * mp.factorial(l))


def half_gamma(l: int) -> mp.mpf:
    """Γ(l + 1/2) for integer l >= 0 at the working precision."""
    if l < 0:
        raise DomainError("half_gamma requires l >= 0")
    return +_half_gamma_cached(int(l), mp.mp.prec)


def _binom(n: int, k: int) -> mp.mpf:
    return mp.mpf(math.comb(n, k))


@precise
def f_coeff(k: int, l: int, gamma) -> mp.mpf:
    """Coefficient of ``y^(2(k-l))`` in the Gaussian-weighted Fourier moment."""
    gamma = hp(gamma)
    if k < 0 or l < 0:
        raise DomainError("k and l must be nonnegative")
    if l > 2 * k:
        raise DomainError(f"f_coeff requires l <= 2k, got k={k}, l={l}")
    if gamma <= 0:
        raise DomainError("gamma must be positive")
    if l > k:
        return mp.mpf(0)
    return (
        (-1 / gamma**2) ** (k - l)
        * _binom(2 * k, 2 * l)
        * (2 / gamma) ** (l + mp.mpf(1) / 2)
        * half_gamma(l)
    )


@precise
def theta(k: int, y, gamma) -> mp.mpf:
    """∫ x^(2k) exp(-γx²/2) exp(iyx) dx in closed form (real valued)."""
    y, gamma = hp(y), hp(gamma)
    if gamma <= 0:
        raise DomainError(f"theta requires gamma > 0, got {gamma}")
    if k < 0:
        raise DomainError("k must be nonnegative")
    y2 = y * y
    # Horner in y² over l = k..0
    acc = mp.mpf(0)
    for l in range(k + 1):
        acc = acc * y2 + f_coeff(k, l, gamma)
    return mp.exp(-y2 / (2 * gamma)) * acc


def gaussian_moments(jmax: int, a, lin) -> list:
    """[∫ x^j exp(-a x²/2 + lin·x) dx for j = 0..jmax], ``lin`` real or complex.

    Uses the raw-moment recurrence of a Gaussian with (possibly complex)
    mean ``lin/a`` and variance ``1/a``.  Runs at the caller's precision.
    """
    if a <= 0:
        raise DomainError(f"Gaussian rate must be positive, got {a}")
    mean = lin / a
    var = 1 / a
    z = mp.sqrt(2 * mp.pi / a) * mp.exp(lin * lin / (2 * a))
    out = [z]
    if jmax >= 1:
        out.append(z * mean)
    for j in range(1, jmax):
        out.append(mean * out[j] + j * var * out[j - 1])
    return out[: jmax + 1]


@precise
def gauss_moment(j: int, a, b) -> mp.mpc:
    """∫ x^j exp(-a x²/2) exp(ibx) dx."""
    a, b = hp(a), hp(b)
    if a <= 0:
        raise DomainError(f"gauss_moment requires a > 0, got {a}")
    if j < 0:
        raise DomainError("j must be nonnegative")
    return mp.mpc(gaussian_moments(j, a, mp.mpc(0, b))[j])


@precise
def quad_oracle(
    f: Callable,
    interval: Sequence = (-mp.inf, mp.inf),
    tol: float = 1e-12,
    points: Sequence | None = None,
    max_degree: int = 10,
):
    """Adaptive numeric integral, kept independent of every closed form.

    Unbounded ends are split at ``points`` (default: unit steps on
    [-16, 16]) and the semi-infinite tails are handled by mpmath's
    tanh-sinh rule with its built-in tail substitution.  ``tol`` bounds
    the error estimate relative to ``max(|value|, 1)``.
    """
    if not tol > 0:
        raise DomainError("tol must be positive")
    lo, hi = interval
    lo = mp.mpf(lo)
    hi = mp.mpf(hi)
    if points is None:
        inner = [mp.mpf(x) for x in range(-16, 17)]
        inner = [x for x in inner if lo < x < hi]
        pts = [lo] + inner + [hi]
    else:
        pts = [lo] + [mp.mpf(x) for x in points if lo < x < hi] + [hi]
    value, err = mp.quad(f, pts, error=True, maxdegree=max_degree)
    if err > tol * max(abs(value), 1):
        raise ConvergenceError(
            f"quad_oracle error estimate {mp.nstr(err, 3)} exceeds tol {tol}", best=value
        )
    return value
