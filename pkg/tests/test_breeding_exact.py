import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import optimize

from gkpbreed import breeding_exact as be
from gkpbreed.errors import DomainError
from gkpbreed.metrics import kl_divergence
from gkpbreed.numerics import quad_oracle
from gkpbreed.states import r_opt
from gkpbreed.waves import norm2

from conftest import ROOT_PI, rel


def scss_breeding_oracle(kappa, r, p):
    """Output amplitude and density for two SCSS inputs, a 50:50 splitter and a momentum projection.

    Input lobes G(x -/+ c) with c = √(2π) (alpha = √π e^r) combine into
    q-centres m = (s1 + s2) c/√2 and y-offsets d = (s1 - s2) c/√2; projecting
    y onto momentum p contributes e^{-ipd} e^{-p^2/2A}/√A.
    """
    A = mp.exp(2 * r)
    c = mp.sqrt(2 * mp.pi)
    sign = -1 if kappa % 2 else 1
    N2 = 1 / (2 * (1 + sign * mp.exp(-A * c * c)))
    lobes = []
    for s1 in (1, -1):
        for s2 in (1, -1):
            w = (1 if s1 > 0 else sign) * (1 if s2 > 0 else sign)
            m, d = (s1 + s2) * c / mp.sqrt(2), (s1 - s2) * c / mp.sqrt(2)
            lobes.append((w * mp.expj(-p * d), m))
    pref = N2 * mp.sqrt(A / mp.pi) / mp.sqrt(A) * mp.exp(-p * p / (2 * A))

    def amp(q):
        return pref * mp.fsum(w * mp.exp(-A * (q - m) ** 2 / 2) for w, m in lobes)

    dens = mp.fsum(
        quad_oracle(lambda q: abs(amp(q)) ** 2, (lo, hi), tol=1e-25)
        for lo, hi in [(-mp.inf, -ROOT_PI), (-ROOT_PI, ROOT_PI), (ROOT_PI, mp.inf)]
    )
    return amp, dens


class TestExactBreedWave:
    def test_even_p0_is_ideal(self):
        r = r_opt(12)
        a, b = be.exact_breed_wave(0, r, 0).wave, be.ideal_breed_wave(r)
        for q in (mp.mpf(0), mp.mpf("0.4"), 2 * ROOT_PI):
            assert rel(a(q), b(q)) < 1e-50

    def test_odd_half_spacing_is_ideal(self):
        r = r_opt(13)
        a, b = be.exact_breed_wave(1, r, ROOT_PI / 2).wave, be.ideal_breed_wave(r)
        for q in (mp.mpf(0), mp.mpf("0.4"), 2 * ROOT_PI):
            assert rel(a(q), b(q)) < 1e-50

    @pytest.mark.parametrize("kappa", [0, 1])
    @pytest.mark.parametrize("n", [10, 40])
    @pytest.mark.parametrize("p", [0, mp.mpf("0.4"), ROOT_PI])
    def test_normalized(self, kappa, n, p):
        assert abs(norm2(be.exact_breed_wave(kappa, r_opt(n), p).wave) - 1) < 1e-12

    @pytest.mark.parametrize("kappa", [0, 1])
    def test_against_beam_splitter_oracle(self, kappa):
        r = r_opt(10)
        for p in (mp.mpf("0.1"), mp.mpf("1.3")):
            amp, dens = scss_breeding_oracle(kappa, r, p)
            assert rel(be.exact_homodyne_density(kappa, r, p), dens) < 1e-10
            w = be.exact_breed_wave(kappa, r, p).wave
            phase = amp(0) / w(0)
            for q in (mp.mpf("-3.1"), mp.mpf("0.2"), mp.mpf("3.4")):
                assert abs(amp(q) / mp.sqrt(dens) - phase / abs(phase) * w(q)) < 1e-20

    def test_rejects_nonpositive_r(self):
        with pytest.raises(DomainError):
            be.exact_breed_wave(0, 0, 0)


class TestExactDensity:
    @pytest.mark.parametrize("kappa", [0, 1])
    def test_integrates_to_one(self, kappa):
        total = quad_oracle(lambda p: be.exact_homodyne_density(kappa, r_opt(10), p), tol=1e-14)
        assert abs(total - 1) < 1e-10

    @given(st.floats(0, 8))
    @settings(max_examples=25)
    def test_even(self, p):
        r = r_opt(20)
        assert rel(be.exact_homodyne_density(0, r, p), be.exact_homodyne_density(0, r, -p)) < 1e-60

    @pytest.mark.parametrize("l", range(-3, 4))
    def test_peaks_near_lattice(self, l):
        # The comb factor peaks exactly at l√π; the Gaussian envelope
        # e^{-e^{-2r} p^2} drags each maximum toward the origin by about
        # e^{-2r} c / (e^{-2r} + 8π/3).
        r = r_opt(20)
        c = l * ROOT_PI
        res = optimize.minimize_scalar(
            lambda p: -float(be.exact_homodyne_density(0, r, p)),
            bounds=(float(c - ROOT_PI / 3), float(c + ROOT_PI / 3)),
            method="bounded",
            options={"xatol": 1e-10},
        )
        env = mp.exp(-2 * r)
        assert abs(res.x - float(c - env * c / (env + 8 * mp.pi / 3))) < 1e-3
        assert abs(res.x - float(c)) < 0.12
        lo, hi = (be.exact_homodyne_density(0, r, res.x + s) for s in (-0.05, 0.05))
        assert be.exact_homodyne_density(0, r, res.x) > max(lo, hi)


class TestExactFeedForward:
    def test_beta_zero_identity_and_modulus(self):
        r = r_opt(10)
        w = be.exact_breed_wave(0, r, "0.3").wave
        for beta in (0, mp.mpf("0.7")):
            d = be.exact_displaced_wave(0, r, "0.3", beta)
            for q in (mp.mpf("-1"), mp.mpf("2.2")):
                assert abs(abs(d(q)) - abs(w(q))) < 1e-50
        assert rel(be.exact_displaced_wave(0, r, "0.3", 0)(1), w(1)) < 1e-60

    def test_half_spacing_flips_overlap(self):
        r = r_opt(10)
        for kappa, p in [(0, ROOT_PI / 2), (1, 0), (0, mp.mpf("0.8"))]:
            out = be.exact_breed_wave(kappa, r, p)
            assert out.g_tilde < 0 and out.delta_tilde == ROOT_PI / 2

            def shift(w):
                return quad_oracle(lambda q: mp.re(mp.conj(w(q)) * w(q + 2 * ROOT_PI)), tol=1e-20)

            assert shift(out.wave) < 0
            assert shift(out.wave.with_phase_ramp(out.delta_tilde)) > 0


NS = [7, 10, 15, 20, 30, 40]


class TestApproxVsExact:
    def test_fidelity_trend(self):
        fids = [be.approx_vs_exact_fidelity(n, 0) for n in NS]
        assert all(0 <= f <= 1 for f in fids)
        assert all(b >= a for a, b in zip(fids, fids[1:]))
        assert fids[-1] > 0.98

    def test_kl_self_is_zero(self):
        nodes, weights = be.default_kl_grid(10)
        P = [be.exact_homodyne_density(0, r_opt(10), x) for x in nodes[::7]]
        assert kl_divergence(P, P, weights[::7]).value == 0

    def test_kl_trend(self):
        vals = [be.kl_divergence_vs_exact(n).value for n in NS]
        assert all(v >= 0 for v in vals)
        assert all(b < a for a, b in zip(vals, vals[1:]))
