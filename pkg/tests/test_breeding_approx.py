import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gkpbreed import breeding_approx as ba
from gkpbreed.errors import DegenerateOutcomeError, DomainError
from gkpbreed.numerics import PrecisionContext, gauss_moment, quad_oracle, using
from gkpbreed.waves import norm2

from conftest import ROOT_PI, rel


def beam_splitter_oracle(n):
    """phi_n(q|0) built from two GPS inputs, a 50:50 splitter and a p = 0 projection.

    With x1 = (q + y)/√2 and x2 = (q - y)/√2 the product of inputs is
    (x1 x2)^n e^{-g (q^2 + y^2)/2}, and projecting y onto p = 0 integrates y
    out.  Only even moments of e^{-g y^2/2} survive; the result is normalized
    by quadrature.
    """
    g = mp.mpf(n) / (2 * mp.pi)
    moments = [gauss_moment(2 * j, g, 0) for j in range(n + 1)]

    def raw(q):
        s = mp.fsum(math.comb(n, j) * (-1) ** j * q ** (2 * (n - j)) * moments[j] for j in range(n + 1))
        return s * mp.exp(-g * q * q / 2)

    norm = mp.sqrt(quad_oracle(lambda q: raw(q) ** 2, tol=1e-25))
    return lambda q: raw(q) / norm


def shift_overlap(wave, c):
    """∫ conj(phi(q)) phi(q + c) dq by quadrature."""
    re = quad_oracle(lambda q: mp.re(mp.conj(wave(q)) * wave(q + c)), tol=1e-20)
    im = quad_oracle(lambda q: mp.im(mp.conj(wave(q)) * wave(q + c)), tol=1e-20)
    return mp.mpc(re, im)


class TestBreedWave:
    @pytest.mark.parametrize("n", [7, 20, 40])
    @pytest.mark.parametrize("p", [0, ROOT_PI / 2, ROOT_PI])
    def test_normalized(self, n, p):
        w = ba.breed_wave(n, p).wave
        assert abs(norm2(w) - 1) < 1e-12
        if n == 7:
            assert abs(quad_oracle(lambda q: abs(w(q)) ** 2, tol=1e-20) - 1) < 1e-12

    @given(st.integers(7, 30), st.floats(-4, 4), st.floats(0, 5))
    @settings(max_examples=20, deadline=None)
    def test_even_in_q(self, n, p, q):
        w = ba.breed_wave(n, p, check=False).wave
        assert abs(w(q) - w(-q)) <= 1e-50 * max(1, abs(w(q)))

    def test_matches_beam_splitter_oracle(self):
        oracle = beam_splitter_oracle(7)
        w = ba.breed_wave(7, 0).wave
        qs = [mp.mpf(k) / 4 for k in range(-24, 25) if k]
        sign = mp.sign(mp.re(w(qs[5])) / oracle(qs[5]))
        assert max(rel(w(q), sign * oracle(q)) for q in qs) < 1e-10

    def test_rejects_bad_inputs(self):
        with pytest.raises(DomainError):
            ba.breed_wave(6, 0)
        with pytest.raises(DegenerateOutcomeError):
            ba.breed_wave(8, mp.inf)


class TestHomodyneDensity:
    @pytest.mark.parametrize("n", [7, 20, 40])
    def test_integrates_to_one(self, n):
        # 96 bits keeps the oracle integration affordable at n = 40
        with using(PrecisionContext(96)):
            total = quad_oracle(lambda p: ba.homodyne_density(n, p, check=False), tol=1e-10)
        assert abs(total - 1) < 1e-8

    @given(st.integers(7, 40), st.floats(0, 6))
    @settings(max_examples=20, deadline=None)
    def test_even(self, n, p):
        assert ba.homodyne_density(n, p, check=False) == ba.homodyne_density(n, -p, check=False)

    def test_matches_outcome_density(self):
        assert ba.breed_wave(11, "0.7").density == ba.homodyne_density(11, "0.7")


class TestMomentumWave:
    def test_fourier_transform(self):
        n, p = 9, mp.mpf("0.6")
        w = ba.breed_wave(n, p).wave
        mw = ba.momentum_wave(n, p)
        worst = 0
        for p1 in np.linspace(-6, 6, 13):
            p1 = mp.mpf(float(p1))
            # w is real and even, so the transform is a cosine transform
            ft = quad_oracle(lambda q: w(q) * mp.cos(p1 * q), tol=1e-20) / mp.sqrt(2 * mp.pi)
            worst = max(worst, abs(mw(p1) - ft) / max(abs(ft), mp.mpf("1e-6")))
        assert worst < 1e-8

    def test_even_and_parseval(self):
        mw = ba.momentum_wave(14, "1.1")
        assert abs(mw(mp.mpf("1.3")) - mw(mp.mpf("-1.3"))) < 1e-50
        assert abs(norm2(mw) - 1) < 1e-12
        assert abs(quad_oracle(lambda x: abs(mw(x)) ** 2, tol=1e-20) - 1) < 1e-12


class TestFeedForward:
    def test_n8_p0_positive(self):
        d = ba.corrective_delta(8, 0)
        assert d.g_value > 0 and d.delta == 0
        ov = shift_overlap(ba.breed_wave(8, 0).wave, 2 * ROOT_PI)
        assert mp.re(ov) > 0
        assert rel(d.g_value, mp.re(ov)) < 1e-12

    @pytest.mark.parametrize("n", range(7, 13))
    def test_negative_window_exists(self, n):
        ps = [ROOT_PI * k / 60 for k in range(1, 60)]
        neg = [p for p in ps if ba.g_fn(n, p, check=False) < 0]
        assert neg
        assert ba.corrective_delta(n, neg[0]).delta == ROOT_PI / 2

    @given(st.integers(7, 30), st.floats(0, 5))
    @settings(max_examples=20, deadline=None)
    def test_g_even(self, n, p):
        assert ba.g_fn(n, p, check=False) == ba.g_fn(n, -p, check=False)

    def test_g_is_displacement_overlap(self):
        for n, p in [(7, mp.mpf("0.9")), (12, mp.mpf("0.2"))]:
            ov = shift_overlap(ba.breed_wave(n, p).wave, 2 * ROOT_PI)
            assert rel(ba.g_fn(n, p), mp.re(ov)) < 1e-10


class TestDisplacedWave:
    def test_beta_zero_is_identity(self):
        a = ba.displaced_wave(10, "0.4", 0)
        b = ba.breed_wave(10, "0.4").wave
        for q in (mp.mpf("0.3"), mp.mpf("2.5")):
            assert rel(a(q), b(q)) < 1e-50

    def test_phase_identity_on_grid(self):
        n, p, beta = 9, mp.mpf("0.3"), ROOT_PI / 2
        d = ba.displaced_wave(n, p, beta)
        b = ba.breed_wave(n, p).wave
        qs = np.linspace(-6, 6, 200)
        worst = max(rel(d(q), mp.expj(-beta * q) * b(q)) for q in map(mp.mpf, qs))
        assert worst < 1e-9

    @given(st.floats(-3, 3), st.floats(-5, 5))
    @settings(max_examples=20, deadline=None)
    def test_modulus_unchanged(self, beta, q):
        d = ba.displaced_wave(12, "0.8", beta, check=False)
        b = ba.breed_wave(12, "0.8", check=False).wave
        assert abs(abs(d(q)) - abs(b(q))) <= 1e-40 * max(1, abs(b(q)))


class TestMeanPhase:
    def test_positive_g_branch(self):
        assert abs(ba.mean_phase_after_correction(8, 0)) < 1e-30

    def test_negative_g_branch(self):
        n = 7
        p = next(ROOT_PI * k / 60 for k in range(1, 60) if ba.g_fn(n, ROOT_PI * k / 60, check=False) < 0)
        # before the correction the overlap phase is pi; afterwards it is 0
        raw = shift_overlap(ba.breed_wave(n, p).wave, 2 * ROOT_PI)
        assert mp.re(raw) < 0
        assert abs(ba.mean_phase_after_correction(n, p)) < 1e-30

    def test_sweep_n10(self):
        ps = np.linspace(-4, 4, 100)
        worst = max(abs(ba.mean_phase_after_correction(10, mp.mpf(float(p)), check=False)) for p in ps)
        assert worst < 1e-8
