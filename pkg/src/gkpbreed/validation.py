"""Invariant checks behind ``gkpbreed validate``.

Each check reports the measured discrepancy next to its tolerance.  The
suites are small enough to run in a few minutes at 256 bits.
"""
from __future__ import annotations

from dataclasses import dataclass

import mpmath as mp
from scipy import optimize

from . import breeding_approx as ba
from . import breeding_exact as be
from . import metrics, numerics, povm, states, waves

ROOT_PI = mp.sqrt(mp.pi)


@dataclass(frozen=True)
class Check:
    suite: str
    name: str
    measured: float
    tol: float
    passed: bool

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        return f"{tag} [{self.suite}] {self.name}: measured={self.measured:.3e} tol={self.tol:.1e}"


def _rel(a, b):
    return float(abs(a - b) / max(abs(b), mp.mpf("1e-300")))


def _check(suite, name, measured, tol, upper=True):
    measured = float(measured)
    ok = measured <= tol if upper else measured >= tol
    return Check(suite, name, measured, tol, ok)


def numerics_suite():
    worst = 0.0
    for k, y, g in [(0, 0, 1), (3, "0.7", "1.3"), (6, "2.1", "3.2"), (10, "1.5", "6.4")]:
        y, g = mp.mpf(y), mp.mpf(g)
        ref = numerics.quad_oracle(lambda x: x ** (2 * k) * mp.exp(-g * x * x / 2) * mp.cos(y * x), tol=1e-25)
        worst = max(worst, _rel(numerics.theta(k, y, g), ref))
    yield _check("numerics", "theta vs quadrature", worst, 1e-12)
    worst = 0.0
    for j, a, b in [(0, "1", "0"), (3, "2.5", "0.4"), (8, "0.9", "1.7")]:
        a, b = mp.mpf(a), mp.mpf(b)
        re = numerics.quad_oracle(lambda x: x**j * mp.exp(-a * x * x / 2) * mp.cos(b * x), tol=1e-25)
        im = numerics.quad_oracle(lambda x: x**j * mp.exp(-a * x * x / 2) * mp.sin(b * x), tol=1e-25)
        worst = max(worst, float(abs(numerics.gauss_moment(j, a, b) - mp.mpc(re, im)) / max(abs(mp.mpc(re, im)), 1)))
    yield _check("numerics", "gauss_moment vs quadrature", worst, 1e-12)
    # f_coeff: the y^0 coefficient of theta is the plain Gaussian moment
    worst = max(
        _rel(numerics.f_coeff(k, k, mp.mpf(g)), numerics.theta(k, 0, mp.mpf(g))) for k in range(8) for g in (1, 3)
    )
    yield _check("numerics", "f_coeff(k, k) = theta(k, 0)", worst, 1e-12)
    worst = max(_rel(numerics.half_gamma(l), mp.gamma(l + mp.mpf(1) / 2)) for l in range(40))
    yield _check("numerics", "half-integer gamma", worst, 1e-15)


def breeding_suite():
    worst = 0.0
    for n in (7, 20, 40):
        for p in (0, ROOT_PI / 2, ROOT_PI):
            worst = max(worst, abs(waves.norm2(ba.breed_wave(n, p).wave) - 1))
    yield _check("breeding", "phi_n normalization", worst, 1e-10)
    worst = 0.0
    for n, p, beta in [(8, mp.mpf("0.3"), ROOT_PI / 2), (15, mp.mpf("1.1"), ROOT_PI / 2), (24, mp.mpf("2.0"), mp.mpf("0.4"))]:
        disp = ba.displaced_wave(n, p, beta)
        base = ba.breed_wave(n, p).wave
        for q in (mp.mpf("-2.3"), mp.mpf("0.1"), mp.mpf("1.7"), 2 * ROOT_PI):
            worst = max(worst, _rel(disp(q), mp.expj(-beta * q) * base(q)))
    yield _check("breeding", "displaced form = exp(-i beta q) phi_n", worst, 1e-9)
    total = numerics.quad_oracle(lambda p: ba.homodyne_density(7, p, check=False), tol=1e-12)
    yield _check("breeding", "integral of P^Hom_7", abs(total - 1), 1e-8)
    worst = 0.0
    for n, p in [(8, 0), (8, mp.mpf("0.9")), (13, mp.mpf("1.2")), (30, mp.mpf("2.2"))]:
        worst = max(worst, abs(ba.mean_phase_after_correction(n, p)))
    yield _check("breeding", "mean phase after correction (rad)", worst, 1e-8)
    lo = ba.g_fn(25, mp.mpf("0.77"), check=False)
    with numerics.using(numerics.active().doubled()):
        hi = ba.g_fn(25, mp.mpf("0.77"), check=False)
    yield _check("breeding", "g_n precision doubling", _rel(lo, hi), 1e-10)


def exact_suite():
    r = states.r_opt(10)
    yield _check("exact", "ideal three-peak normalization", abs(waves.norm2(be.ideal_breed_wave(r)) - 1), 1e-10)
    built = [states.gps_wave(n) for n in (7, 8, 40)]
    built += [states.gkp_wave(states.db_to_xi(db)) for db in (6, 10, 12)]
    built += [states.scss_wave(k, mp.mpf("1.2"), mp.mpf("0.3")) for k in (0, 1)]
    built += [be.exact_breed_wave(k, r, p).wave for k in (0, 1) for p in (0, mp.mpf("0.4"), ROOT_PI)]
    worst = max(abs(waves.norm2(w) - 1) for w in built)
    yield _check("exact", "normalization of constructed states", worst, 1e-10)
    # away from p = 0 the Gaussian envelope pulls each peak inward by
    # e^{-2r} p~ / (e^{-2r} + 8π/3), from a quadratic expansion of the log-density
    worst = 0.0
    for n in (10, 20, 40):
        rn = states.r_opt(n)
        env = mp.exp(-2 * rn)
        top = be.exact_homodyne_density(0, rn, 0)
        for kappa in (0, 1):
            for l in range(0, 6):
                c = l * ROOT_PI if kappa == 0 else (2 * l + 1) * ROOT_PI / 2
                if be.exact_homodyne_density(kappa, rn, c) < top / 100:
                    break
                res = optimize.minimize_scalar(
                    lambda p: -float(be.exact_homodyne_density(kappa, rn, p)),
                    bounds=(float(c - ROOT_PI / 4), float(c + ROOT_PI / 4)),
                    method="bounded",
                    options={"xatol": 1e-10},
                )
                pull = -env * c / (env + 8 * mp.pi / 3)
                worst = max(worst, abs(res.x - float(c + pull)))
    yield _check("exact", "exact density peaks at p~_l (after envelope pull)", worst, 5e-3)
    bad = 0
    for kappa in (0, 1):
        for k in range(-12, 13):
            p = mp.mpf(k) / 7 + mp.mpf("0.013")
            out = be.exact_breed_wave(kappa, r, p)
            ov = waves.translation_expectation(out.wave, 2 * ROOT_PI)
            bad += (out.g_tilde >= 0) != (mp.re(ov) >= 0)
    yield _check("exact", "g~ sign matches the displacement overlap", bad, 0)
    worst = 0.0
    wave = be.ideal_breed_wave(r)
    for r_d in (mp.mpf("0.2"), mp.mpf("0.9"), mp.mpf("2.0")):
        damped, _ = metrics.damping_map(wave, r_d)
        before = wave(2 * ROOT_PI) / wave(0)
        after = damped(2 * ROOT_PI) / damped(0)
        worst = max(worst, _rel(before / after, mp.exp((1 - mp.tanh(r_d)) * mp.pi)))
    yield _check("exact", "damping side-peak suppression factor", worst, 1e-10)


def povm_suite():
    src = povm.ExactSource(0, states.r_opt(10))
    rho, _ = povm.finite_res_state(src, ROOT_PI, mp.mpf("0.1"))
    yield _check("povm", "kernel trace", abs(rho.trace - 1), 1e-12)
    yield _check("povm", "weights nonnegative (min weight)", min(w for w, _ in rho.terms), 0.0, upper=False)
    psi = src.state(ROOT_PI)
    f1 = metrics.fidelity_pure_mixed(psi, rho)
    rho2, _ = povm.finite_res_state(src, ROOT_PI, mp.mpf("0.1"), nodes=42)
    yield _check("povm", "node doubling fidelity change", abs(metrics.fidelity_pure_mixed(psi, rho2) - f1), 1e-9)
    approx = povm.ApproxSource(8)
    psi = approx.state(0)
    fids = [metrics.fidelity_pure_mixed(psi, povm.finite_res_state(approx, 0, e)[0]) for e in ("0.03", "0.08", "0.15")]
    rises = sum(1 for a, b in zip(fids, fids[1:]) if b > a)
    yield _check("povm", "fidelity nonincreasing in epsilon (violations)", rises, 0)
    got = povm.window_probability(10, 0, mp.mpf("0.12"))
    ref = numerics.quad_oracle(lambda p: ba.homodyne_density(10, p, check=False), (-mp.mpf("0.12"), mp.mpf("0.12")))
    yield _check("povm", "window probability vs quadrature", _rel(got, ref), 1e-10)


def gk_suite():
    worst = 0.0
    for db in (6, 10, 12):
        worst = max(worst, abs(metrics.gk_no_error(states.gkp_wave(states.db_to_xi(db))).cell_mass - 1))
    for n, p in [(12, mp.mpf("0.4")), (30, mp.mpf("1.9"))]:
        d = ba.corrective_delta(n, p).delta
        worst = max(worst, abs(metrics.gk_no_error(ba.displaced_wave(n, p, d)).cell_mass - 1))
    yield _check("gk", "Zak cell mass", worst, 1e-6)
    vals = [metrics.gk_no_error(states.gkp_wave(states.db_to_xi(db))).value for db in (6, 8, 10, 12)]
    yield _check("gk", "no-error probability rises with squeezing (violations)", sum(b <= a for a, b in zip(vals, vals[1:])), 0)


SUITES = {
    "numerics": numerics_suite,
    "breeding": breeding_suite,
    "exact": exact_suite,
    "povm": povm_suite,
    "gk": gk_suite,
}


def run_suite(name: str):
    return list(SUITES[name]())
