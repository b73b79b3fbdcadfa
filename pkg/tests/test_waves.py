import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gkpbreed.errors import DomainError
from gkpbreed.numerics import quad_oracle
from gkpbreed.waves import CombWave, GaussPolyWave, norm2, normalized, overlap, translation_expectation

from conftest import rel


def quad_overlap(w1, w2):
    re = quad_oracle(lambda q: mp.re(mp.conj(w1(q)) * w2(q)), tol=1e-25)
    im = quad_oracle(lambda q: mp.im(mp.conj(w1(q)) * w2(q)), tol=1e-25)
    return mp.mpc(re, im)


W1 = GaussPolyWave((mp.mpf(1), mp.mpf("0.3"), mp.mpf("-0.2")), mp.mpf("1.4"), mp.mpf("0.5"), mp.mpf("0.25"))
W2 = GaussPolyWave((mp.mpf("0.7"), mp.mpc(0, "0.4")), mp.mpf("0.8"), mp.mpf("-0.3"), mp.mpf("-0.6"))


def test_overlap_against_quadrature():
    assert abs(overlap(W1, W2) - quad_overlap(W1, W2)) < 1e-20


def test_norm2_against_quadrature():
    comb = CombWave((W1, W2))
    assert rel(norm2(comb), mp.re(quad_overlap(comb, comb))) < 1e-20


def test_translation_expectation_against_quadrature():
    c = mp.mpf("0.9")
    ref = quad_overlap(W1, W1.translated(-c))
    direct = mp.mpc(
        quad_oracle(lambda q: mp.re(mp.conj(W1(q)) * W1(q + c)), tol=1e-25),
        quad_oracle(lambda q: mp.im(mp.conj(W1(q)) * W1(q + c)), tol=1e-25),
    )
    assert abs(translation_expectation(W1, c) - direct) < 1e-20
    assert abs(ref - direct) < 1e-20


@given(st.floats(-3, 3), st.floats(-3, 3))
@settings(max_examples=25)
def test_translated_moves_the_wave(d, q):
    d, q = mp.mpf(d), mp.mpf(q)
    assert abs(W2.translated(d)(q) - W2(q - d)) < 1e-40


@given(st.floats(0, 3), st.floats(-3, 3))
@settings(max_examples=25)
def test_with_extra_rate(extra, q):
    extra, q = mp.mpf(extra), mp.mpf(q)
    got = W1.with_extra_rate(extra, 2)(q)
    assert abs(got - 2 * W1(q) * mp.exp(-extra * q * q / 2)) < 1e-40


def test_phase_ramp_is_pure_phase():
    beta = mp.mpf("0.8")
    for q in (mp.mpf("-1.2"), mp.mpf("0.4")):
        assert abs(W1.with_phase_ramp(beta)(q) - mp.expj(-beta * q) * W1(q)) < 1e-40


def test_float_evaluation_matches_mpmath():
    q = np.linspace(-4, 4, 41)
    comb = CombWave((W1, W2))
    got = comb.evaluate(q)
    ref = np.array([complex(comb(mp.mpf(float(x)))) for x in q])
    np.testing.assert_allclose(got, ref, rtol=1e-12, atol=1e-15)


def test_normalized():
    assert abs(norm2(normalized(CombWave((W1, W2)))) - 1) < 1e-60


def test_rejects_nonpositive_rate():
    with pytest.raises(DomainError):
        GaussPolyWave((1,), 0)
