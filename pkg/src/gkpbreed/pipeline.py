"""End-to-end protocols, the sweep runner and the on-disk result cache.

With post-selection: p_opt search, acceptance windows, damping/target
optimization and P_Total.  Without post-selection: delta feed-forward at
every outcome, no-error regions and P_WT.
"""
from __future__ import annotations

import concurrent.futures as cf
import dataclasses
import hashlib
import json
import logging
import os
import tempfile
import time
from dataclasses import dataclass, field
from pathlib import Path

import mpmath as mp
import numpy as np
from scipy import optimize

from . import __version__
from .breeding_approx import breed_wave, corrective_delta, displaced_wave
from .breeding_exact import (
    approx_vs_exact_fidelity,
    exact_homodyne_density,
    ideal_breed_wave,
    kl_divergence_vs_exact,
)
from .errors import DomainError, GKPBreedError, ProtocolError, ResolutionError
from .metrics import damping_map, fidelity_pure, fidelity_pure_mixed, gk_no_error
from .numerics import DEFAULT_CONTEXT, PrecisionContext, hp, precise, using
from .povm import ApproxSource, ExactSource, finite_res_state, window_probability
from .states import _check_n, db_to_xi, gkp_wave, p_gps, r_opt

log = logging.getLogger(__name__)

__all__ = [
    "Candidate",
    "PoptSearch",
    "WindowEntry",
    "AcceptanceWindows",
    "PostselectRecord",
    "WTRecord",
    "ExactComparisonRecord",
    "POVMRecord",
    "SweepSpec",
    "SweepCell",
    "SweepCache",
    "find_p_opt",
    "build_windows",
    "optimize_damping_and_target",
    "postselect",
    "wt_threshold",
    "wt_regions",
    "default_p_max",
    "run_sweep",
]

ROOT_PI = mp.sqrt(mp.pi)
FIDELITY_BAR = 0.999
P_TOL = 1e-4


# ---------------------------------------------------------------------------
# records


@dataclass(frozen=True)
class Candidate:
    l: int
    center: object
    p: object
    fidelity: object


@dataclass(frozen=True)
class PoptSearch:
    n: int
    p_opt: object
    fidelity: object
    candidates: tuple


@dataclass(frozen=True)
class WindowEntry:
    p: object
    epsilon: object
    fidelity_to_popt: object


@dataclass(frozen=True)
class AcceptanceWindows:
    n: int
    p_opt: object
    entries: tuple
    P_Sum: object
    warnings: tuple = ()


@dataclass(frozen=True)
class PostselectRecord:
    n: int
    p_opt: object
    r_d_opt: object
    xi_opt: object
    fidelity: object
    P_Sum: object
    P_Damp: object
    P_Total: object
    gk_no_error: object
    converged: bool = True
    branch: str = "damped"
    windows: AcceptanceWindows | None = None


@dataclass(frozen=True)
class WTRecord:
    n: int
    upsilon: object
    regions: tuple
    P_upsilon: object
    P_WT: object
    grid_step: object = None
    p_max: object = None


@dataclass(frozen=True)
class ExactComparisonRecord:
    n: int
    fidelity: object
    kl: object
    kl_clamped: int = 0


@dataclass(frozen=True)
class POVMRecord:
    source: str
    n: int
    p_tilde: object
    epsilon: object
    fidelity: object
    probability: object
    rank: int = 0


# ---------------------------------------------------------------------------
# p_opt search and acceptance windows


def _maximize(fn, lo, hi, xatol=P_TOL):
    """Bounded scalar maximization; returns (argmax, max) as mpf."""
    res = optimize.minimize_scalar(
        lambda x: -float(fn(mp.mpf(x))), bounds=(float(lo), float(hi)), method="bounded",
        options={"xatol": xatol},
    )
    x = mp.mpf(res.x)
    return x, fn(x)


def _grid_center(l: int, kappa: int):
    return l * ROOT_PI if kappa == 0 else (2 * l + 1) * ROOT_PI / 2


@precise
def find_p_opt(n: int, cutoff: float = 0.01, check: bool = False) -> PoptSearch:
    """Outcome maximizing the fidelity to the ideal three-peak state.

    One bounded maximization per interval [p~_l - √π/2, p~_l + √π/2] for the
    l whose exact-breeding density at p~_l is at least ``cutoff`` times its
    peak.  The fidelity depends on p only through p^2, so intervals with
    p~_l < 0 mirror those with p~_l > 0.
    """
    n = _check_n(n, 7)
    kappa = n % 2
    r = r_opt(n)
    ideal = ideal_breed_wave(r)
    peak = max(exact_homodyne_density(kappa, r, _grid_center(l, kappa)) for l in (-1, 0, 1))
    nonneg = []
    l = 0
    while exact_homodyne_density(kappa, r, _grid_center(l, kappa)) >= cutoff * peak:
        nonneg.append(l)
        l += 1
    if not nonneg:
        raise ProtocolError(f"no outcome interval passes the {cutoff:g} density cutoff for n={n}")

    def fid(p):
        return fidelity_pure(ideal, breed_wave(n, p, check=check).wave, check_norm=False)

    found = {}
    for l in nonneg:
        c = _grid_center(l, kappa)
        # the centered interval is symmetric; its nonnegative half suffices
        lo = mp.mpf(0) if c == 0 else c - ROOT_PI / 2
        found[l] = (c, *_maximize(fid, lo, c + ROOT_PI / 2))
    cands = []
    for l in nonneg:
        c, p, f = found[l]
        cands.append(Candidate(l, c, p, f))
        mirror = -l if kappa == 0 else -l - 1
        if mirror != l:
            cands.append(Candidate(mirror, -c, -p, f))
    cands.sort(key=lambda c: c.center)
    # ties between ±p resolve to the nonnegative outcome
    best = max(cands, key=lambda c: (c.fidelity, c.p >= 0))
    return PoptSearch(n, best.p, best.fidelity, tuple(cands))


def _edge_epsilon(same, p, sign, start=0.05, cap=2.0):
    """Largest eps (to P_TOL) with fidelity(phi(p), phi(p + sign eps)) >= bar."""
    lo, hi = mp.mpf(0), mp.mpf(start)
    while same(p, p + sign * hi) >= FIDELITY_BAR:
        lo, hi = hi, 2 * hi
        if hi > cap:
            raise ResolutionError(f"acceptance window at p={mp.nstr(p, 8)} exceeds {cap}")
    while hi - lo > P_TOL:
        mid = (lo + hi) / 2
        if same(p, p + sign * mid) >= FIDELITY_BAR:
            lo = mid
        else:
            hi = mid
    return lo


@precise
def build_windows(n: int, p_opt, candidates, check: bool = False) -> AcceptanceWindows:
    """Outcomes heralding states within 0.999 of phi(.|p_opt), with calibrated widths.

    The maximization against phi(.|p_opt) is redone on each candidate's
    interval; survivors get the largest half-width eps_i for which both
    phi(.|p_i ± eps_i) keep fidelity 0.999 to phi(.|p_i).
    """
    n = _check_n(n, 7)
    p_opt = hp(p_opt)
    if not candidates:
        raise ProtocolError("candidate list is empty")
    target = breed_wave(n, p_opt, check=check).wave
    waves = {}

    def wave(p):
        key = mp.nstr(p, 40)
        if key not in waves:
            waves[key] = breed_wave(n, p, check=check).wave
        return waves[key]

    def to_opt(p):
        return fidelity_pure(target, wave(p), check_norm=False)

    def same(p, q):
        return fidelity_pure(wave(p), wave(q), check_norm=False)

    cand_primes = []
    # F(p) depends on p only through p^2: intervals with negative centers
    # reuse their mirrors, and the interval holding ±p_opt maximizes there
    by_center = {}
    for cand in sorted(candidates, key=lambda c: abs(hp(c.center))):
        c = hp(cand.center)
        key = mp.nstr(abs(c), 30)
        if key in by_center:
            p, f = by_center[key]
            primes_for = (-p, f)
        elif abs(c - p_opt) <= ROOT_PI / 2 or abs(c + p_opt) <= ROOT_PI / 2:
            p = p_opt if abs(c - p_opt) <= ROOT_PI / 2 else -p_opt
            primes_for = (p, mp.mpf(1))
        elif c == 0:
            primes_for = _maximize(to_opt, mp.mpf(0), ROOT_PI / 2)
        else:
            primes_for = _maximize(to_opt, c - ROOT_PI / 2, c + ROOT_PI / 2)
        by_center.setdefault(key, primes_for)
        cand_primes.append(primes_for)
    entries, warnings = [], []
    eps_cache = {}
    for p, f in sorted(set(cand_primes), key=lambda t: t[0]):
        if not f > FIDELITY_BAR:
            continue
        akey = mp.nstr(abs(p), 30)
        if akey not in eps_cache:
            eps_cache[akey] = min(_edge_epsilon(same, p, +1), _edge_epsilon(same, p, -1))
        eps = eps_cache[akey]
        if eps > mp.mpf("0.12"):
            msg = f"n={n}: window half-width {mp.nstr(eps, 6)} at p={mp.nstr(p, 8)} exceeds 0.12"
            log.warning(msg)
            warnings.append(msg)
        entries.append(WindowEntry(p, eps, f))
    if not entries:
        raise ProtocolError(f"no candidate survives the fidelity filter for n={n}")
    P_sum = mp.fsum(window_probability(n, e.p, e.epsilon) for e in entries)
    return AcceptanceWindows(n, p_opt, tuple(entries), P_sum, tuple(warnings))


# ---------------------------------------------------------------------------
# damping and target squeezing


@dataclass
class _Objective:
    wave: object
    cache: dict = field(default_factory=dict)

    def gkp(self, xi):
        key = float(xi)
        if key not in self.cache:
            self.cache[key] = gkp_wave(mp.mpf(key))
        return self.cache[key]

    def damped(self, r_d, xi):
        image, _ = damping_map(self.wave, mp.mpf(float(r_d)))
        return fidelity_pure(image, self.gkp(xi), check_norm=False)

    def undamped(self, xi):
        return fidelity_pure(self.wave, self.gkp(xi), check_norm=False)


def _best_xi(obj, xi_box, xatol):
    lo, hi = xi_box
    while True:
        grid = np.linspace(lo, hi, 41)
        vals = [float(obj.undamped(x)) for x in grid]
        i = int(np.argmax(vals))
        a, b = grid[max(i - 1, 0)], grid[min(i + 1, len(grid) - 1)]
        res = optimize.minimize_scalar(
            lambda x: -float(obj.undamped(x)), bounds=(a, b), method="bounded", options={"xatol": xatol}
        )
        if res.x >= hi - 2 * xatol:
            lo, hi = hi - (hi - lo) / 4, hi + (hi - lo) / 2
            continue
        return float(res.x), -float(res.fun)


@precise
def optimize_damping_and_target(
    n: int,
    p_opt,
    windows: AcceptanceWindows | None = None,
    rd_box=(0.0, 3.0),
    xi_box=(0.3, 1.5),
    grid: int = 40,
    xatol: float = 1e-6,
    no_damping_from: int | None = 27,
    check: bool = False,
) -> PostselectRecord:
    """Maximize the fidelity of the damped breeding output to a finite GKP state.

    Coarse grid over (r_d, xi), then a bounded Nelder-Mead polish.  The
    no-damping branch (r_d -> infinity) is taken when the best undamped
    fidelity is at least the best damped one, or unconditionally for
    n >= ``no_damping_from`` (pass None to rely on the optimum alone); it
    re-optimizes over xi only.  The xi box widens when the optimum lands on
    its upper edge.
    """
    n = _check_n(n, 7)
    p_opt = hp(p_opt)
    wave = breed_wave(n, p_opt, check=check).wave
    obj = _Objective(wave)
    rd_lo, rd_hi = map(float, rd_box)
    xi_lo, xi_hi = map(float, xi_box)
    converged = True
    if no_damping_from is not None and n >= no_damping_from:
        xi_u, _ = _best_xi(obj, (xi_lo, xi_hi), xatol)
        return _assemble(n, p_opt, wave, None, mp.mpf(xi_u), windows, converged, "no-damping (n rule)")
    while True:
        rds = np.linspace(rd_lo, rd_hi, grid)
        xis = np.linspace(xi_lo, xi_hi, grid)
        table = np.array([[float(obj.damped(r, x)) for x in xis] for r in rds])
        i, j = np.unravel_index(int(np.argmax(table)), table.shape)
        if j == grid - 1:
            xi_lo, xi_hi = xi_hi - (xi_hi - xi_lo) / 4, xi_hi + (xi_hi - xi_lo) / 2
            continue
        break
    res = optimize.minimize(
        lambda v: -float(obj.damped(v[0], v[1])),
        x0=[rds[i], xis[j]],
        method="Nelder-Mead",
        bounds=[(0.0, rd_hi), (0.0, None)],
        options={"xatol": xatol, "fatol": 1e-14, "maxiter": 4000},
    )
    if not res.success:
        converged = False
        log.warning("n=%d: simplex polish stopped early: %s", n, res.message)
    rd_d, xi_d = float(res.x[0]), float(res.x[1])
    f_damped = -float(res.fun)
    xi_u, f_undamped = _best_xi(obj, (xi_lo, xi_hi), xatol)
    if f_undamped >= f_damped:
        return _assemble(n, p_opt, wave, None, mp.mpf(xi_u), windows, converged, "no-damping (optimum)")
    return _assemble(n, p_opt, wave, mp.mpf(rd_d), mp.mpf(xi_d), windows, converged, "damped")


def _assemble(n, p_opt, wave, r_d_opt, xi_opt, windows, converged, branch):
    if r_d_opt is None:
        final, P_damp = wave, mp.mpf(1)
    else:
        final, P_damp = damping_map(wave, r_d_opt)
    fidelity = fidelity_pure(final, gkp_wave(xi_opt), check_norm=False)
    P_sum = windows.P_Sum if windows is not None else mp.nan
    P_total = p_gps(n) ** 2 * P_sum * P_damp
    gk = mp.mpf(gk_no_error(final).value)
    return PostselectRecord(
        n, p_opt, r_d_opt, xi_opt, fidelity, P_sum, P_damp, P_total, gk, converged, branch, windows
    )


@precise
def postselect(n: int, check: bool = False) -> PostselectRecord:
    """Full with-post-selection protocol for one photon number."""
    search = find_p_opt(n, check=check)
    windows = build_windows(n, search.p_opt, search.candidates, check=check)
    return optimize_damping_and_target(n, search.p_opt, windows, check=check)


# ---------------------------------------------------------------------------
# without post-selection


@precise
def wt_threshold(db=10):
    """No-error probability of the finite GKP state at ``db`` decibels."""
    return mp.mpf(gk_no_error(gkp_wave(db_to_xi(db))).value)


@precise
def default_p_max(n: int, tail: float = 1e-6):
    """Smallest multiple of √π with P^Hom mass outside [-p_max, p_max] below ``tail``."""
    n = _check_n(n, 7)
    k = 4
    while True:
        pm = k * ROOT_PI
        if 1 - window_probability(n, 0, pm) < tail:
            return pm
        k += 1


def _h(n, p, check):
    delta = corrective_delta(n, p, check=check).delta
    return gk_no_error(displaced_wave(n, float_to_hp(p), delta, check=check)).value


def float_to_hp(x):
    return mp.mpf(float(x))


def _super_level_set(h, ps, values, level, width=1e-3):
    """Intervals of [ps[0], ps[-1]] where h >= level.

    Sampled local maxima below ``level`` and local minima above it are
    refined by bounded scalar optimization, so regions (or gaps) that fall
    between grid points are not missed.  Crossings are bisected to ``width``.
    Returns (intervals, extra) where ``extra`` lists refined extrema that
    changed the picture.
    """
    ps = list(map(float, ps))
    vals = list(values)
    events = []  # (position, +1 entering / -1 leaving)

    def bisect(a, b, inside_a):
        while b - a > width:
            m = 0.5 * (a + b)
            if (h(m) >= level) == inside_a:
                a = m
            else:
                b = m
        return 0.5 * (a + b)

    for k in range(1, len(ps)):
        a, b = ps[k - 1], ps[k]
        ina, inb = vals[k - 1] >= level, vals[k] >= level
        if ina != inb:
            events.append((bisect(a, b, ina), +1 if inb else -1))
    extra = []
    for k in range(1, len(ps) - 1):
        left, mid, right = vals[k - 1], vals[k], vals[k + 1]
        lo, hi = ps[k - 1], ps[k + 1]
        if mid >= left and mid >= right and mid < level:
            res = optimize.minimize_scalar(lambda x: -h(x), bounds=(lo, hi), method="bounded", options={"xatol": width / 4})
            if -res.fun >= level and left < level and right < level:
                x = float(res.x)
                events += [(bisect(lo, x, False), +1), (bisect(x, hi, True), -1)]
                extra.append(("peak", x))
        elif mid <= left and mid <= right and mid >= level:
            res = optimize.minimize_scalar(h, bounds=(lo, hi), method="bounded", options={"xatol": width / 4})
            if res.fun < level and left >= level and right >= level:
                x = float(res.x)
                events += [(bisect(lo, x, True), -1), (bisect(x, hi, False), +1)]
                extra.append(("dip", x))
    events.sort()
    regions, start = [], (ps[0] if vals[0] >= level else None)
    for x, kind in events:
        if kind > 0:
            start = x
        else:
            regions.append((start, x))
            start = None
    if start is not None:
        regions.append((start, ps[-1]))
    return regions, extra


@precise
def wt_regions(n: int, upsilon, p_max=None, grid_step=0.05, check: bool = False) -> WTRecord:
    """Outcomes whose feed-forward-corrected state beats the no-error threshold.

    h(p) = gk_no_error(phi_{n,delta(p)}(.|p)) is scanned on [0, p_max] (h is
    even in p).  Sampled extrema near the threshold are refined, each
    crossing of ``upsilon`` is bisected to width 1e-3 and P^Hom is integrated
    over the mirrored super-threshold set.  A grid cell that holds more than
    one refined feature means the grid cannot resolve h, and raises
    ResolutionError asking for a finer grid.
    """
    n = _check_n(n, 7)
    upsilon = float(upsilon)
    if not 0 < upsilon < 1:
        raise DomainError("upsilon must lie in (0, 1)")
    step = float(grid_step)
    if not step > 0:
        raise DomainError("grid_step must be positive")
    if p_max is None:
        p_max = default_p_max(n)
    else:
        p_max = hp(p_max)
        if 1 - window_probability(n, 0, p_max) >= 1e-6:
            raise DomainError(f"P^Hom mass outside ±{mp.nstr(p_max, 6)} exceeds 1e-6")
    count = int(np.ceil(float(p_max) / step))
    ps = np.linspace(0.0, count * step, count + 1)
    cache = {}

    def h(p):
        key = float(p)
        if key not in cache:
            cache[key] = _h(n, key, check)
        return cache[key]

    half, extra = _super_level_set(h, ps, [h(p) for p in ps], upsilon)
    cells = sorted(int(x // step) for _, x in extra)
    if any(b - a <= 1 for a, b in zip(cells, cells[1:])):
        raise ResolutionError(f"sub-grid structure in h(p) for n={n}; rerun with grid_step < {step}")
    regions = []
    for a, b in half:
        if a == 0.0:
            regions.append((-b, b))
        else:
            regions += [(a, b), (-b, -a)]
    regions.sort()
    P_ups = mp.fsum(window_probability(n, (mp.mpf(a) + b) / 2, (mp.mpf(b) - a) / 2) for a, b in regions)
    return WTRecord(n, mp.mpf(upsilon), tuple(regions), P_ups, p_gps(n) ** 2 * P_ups, step, p_max)


# ---------------------------------------------------------------------------
# serialization and cache

FORMAT_VERSION = 1


def encode(value):
    """JSON-ready form; mpf values round-trip bit for bit."""
    if isinstance(value, mp.mpf):
        if not mp.isfinite(value):
            return {"mpf": str(value)}
        sign, man, exp, _ = value._mpf_
        return {"mpf": [hex(-int(man) if sign else int(man)), int(exp)]}
    if dataclasses.is_dataclass(value):
        return {"type": type(value).__name__, **{f.name: encode(getattr(value, f.name)) for f in dataclasses.fields(value)}}
    if isinstance(value, (list, tuple)):
        return [encode(v) for v in value]
    if isinstance(value, (np.floating, np.integer)):
        return value.item()
    return value


_TYPES = {
    c.__name__: c
    for c in (
        Candidate,
        PoptSearch,
        WindowEntry,
        AcceptanceWindows,
        PostselectRecord,
        WTRecord,
        ExactComparisonRecord,
        POVMRecord,
    )
}


def decode(value):
    if isinstance(value, dict):
        if "mpf" in value:
            m = value["mpf"]
            if isinstance(m, str):
                return mp.mpf(m)
            return mp.mpf((int(m[0], 16), int(m[1])))
        if "type" in value:
            cls = _TYPES[value["type"]]
            kwargs = {k: decode(v) for k, v in value.items() if k != "type"}
            for f in dataclasses.fields(cls):
                if isinstance(kwargs.get(f.name), list):
                    kwargs[f.name] = _tuplify(kwargs[f.name])
            return cls(**kwargs)
        return {k: decode(v) for k, v in value.items()}
    if isinstance(value, list):
        return [decode(v) for v in value]
    return value


def _tuplify(v):
    return tuple(_tuplify(x) for x in v) if isinstance(v, list) else v


def canonical(obj) -> str:
    return json.dumps(encode(obj), sort_keys=True, separators=(",", ":"))


def atomic_write(path: Path, text: str):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=".tmp-", suffix=path.suffix)
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


class SweepCache:
    """Content-addressed record store: one JSON file per (op, params, precision)."""

    def __init__(self, root):
        self.root = Path(root)
        self.hits = 0
        self.misses = 0

    @staticmethod
    def key(op: str, params: dict, bits: int) -> str:
        blob = json.dumps({"op": op, "params": encode(params), "bits": int(bits)}, sort_keys=True)
        return hashlib.sha256(blob.encode()).hexdigest()

    def path(self, key: str) -> Path:
        return self.root / f"{key}.json"

    def get(self, key: str):
        p = self.path(key)
        if not p.exists():
            self.misses += 1
            return None
        data = json.loads(p.read_text())
        if data.get("format_version") != FORMAT_VERSION:
            self.misses += 1
            return None
        self.hits += 1
        return decode(data["record"])

    def put(self, key: str, op: str, params: dict, bits: int, record):
        body = {
            "format_version": FORMAT_VERSION,
            "key": {"op": op, "params": encode(params), "bits": int(bits)},
            "record": encode(record),
            "provenance": {"code_version": __version__, "created": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime())},
        }
        atomic_write(self.path(key), json.dumps(body, sort_keys=True, indent=1))


# ---------------------------------------------------------------------------
# sweeps


@dataclass(frozen=True)
class SweepSpec:
    """``op`` in OPERATIONS; ``cells`` is a sequence of keyword dicts."""

    op: str
    cells: tuple
    mantissa_bits: int = DEFAULT_CONTEXT.mantissa_bits


@dataclass(frozen=True)
class SweepCell:
    params: dict
    record: object = None
    error: str | None = None
    cached: bool = False


def _op_postselect(n):
    return postselect(n)


def _op_wt(n, upsilon, grid_step=0.05):
    return wt_regions(n, upsilon, grid_step=grid_step)


def _op_exact_compare(n):
    kl = kl_divergence_vs_exact(n)
    return ExactComparisonRecord(n, approx_vs_exact_fidelity(n, 0), kl.value, kl.clamped)


def _op_povm(n, source, p_units, epsilon):
    """Fidelity of the window-heralded mixture to the pure state at p~ = p_units √π."""
    p = mp.mpf(p_units) * ROOT_PI
    if source == "exact":
        src = ExactSource(n % 2, r_opt(n))
    elif source == "approx":
        src = ApproxSource(n)
    else:
        raise DomainError(f"unknown POVM source {source!r}")
    rho, prob = finite_res_state(src, p, mp.mpf(epsilon))
    return POVMRecord(source, n, p, mp.mpf(epsilon), fidelity_pure_mixed(src.state(p), rho), prob, rho.rank)


OPERATIONS = {
    "postselect": _op_postselect,
    "wt": _op_wt,
    "exact_compare": _op_exact_compare,
    "povm": _op_povm,
}


def _run_cell(op, params, bits):
    with using(PrecisionContext(bits)):
        try:
            return OPERATIONS[op](**params), None
        except (GKPBreedError, ArithmeticError, ValueError) as exc:
            return None, f"{type(exc).__name__}: {exc}"


def _validate_spec(spec: SweepSpec):
    if spec.op not in OPERATIONS:
        raise DomainError(f"unknown sweep operation {spec.op!r}")
    PrecisionContext(spec.mantissa_bits)
    for cell in spec.cells:
        n = cell.get("n")
        if n is None:
            raise DomainError("every sweep cell needs an 'n'")
        _check_n(n, 7)


def run_sweep(spec: SweepSpec, cache: SweepCache | None = None, workers: int = 1) -> list:
    """Evaluate every cell; errors are kept per cell and never abort the sweep.

    Output order follows ``spec.cells`` regardless of completion order.
    """
    _validate_spec(spec)
    out: list = [None] * len(spec.cells)
    todo = []
    for i, params in enumerate(spec.cells):
        params = dict(params)
        key = SweepCache.key(spec.op, params, spec.mantissa_bits) if cache else None
        hit = cache.get(key) if cache else None
        if hit is not None:
            out[i] = SweepCell(params, hit, None, True)
        else:
            todo.append((i, params, key))

    def finish(i, params, key, result):
        record, error = result
        if record is not None and cache is not None:
            cache.put(key, spec.op, params, spec.mantissa_bits, record)
            # hand back the decoded form so warm and cold runs agree exactly
            record = cache.get(key)
            cache.hits -= 1
        out[i] = SweepCell(params, record, error, False)

    if workers <= 1 or len(todo) <= 1:
        for i, params, key in todo:
            finish(i, params, key, _run_cell(spec.op, params, spec.mantissa_bits))
    else:
        with cf.ProcessPoolExecutor(max_workers=workers) as pool:
            futs = {pool.submit(_run_cell, spec.op, params, spec.mantissa_bits): (i, params, key) for i, params, key in todo}
            for fut in cf.as_completed(futs):
                i, params, key = futs[fut]
                try:
                    result = fut.result()
                except Exception as exc:  # worker crash
                    result = (None, f"{type(exc).__name__}: {exc}")
                finish(i, params, key, result)
    return out
