import mpmath as mp
import pytest

from gkpbreed import breeding_approx as ba
from gkpbreed import povm
from gkpbreed.errors import DomainError
from gkpbreed.metrics import fidelity_pure_mixed
from gkpbreed.numerics import quad_oracle
from gkpbreed.states import r_opt

from conftest import ROOT_PI, rel


class TestFiniteResState:
    def test_narrow_window_limit(self):
        src = povm.ApproxSource(8)
        psi = src.state(0)
        fids = [fidelity_pure_mixed(psi, povm.finite_res_state(src, 0, e)[0]) for e in ("1e-2", "1e-3", "1e-4")]
        assert all(b > a for a, b in zip(fids, fids[1:]))
        assert 1 - fids[-1] < 1e-8

    def test_kernel_is_a_density(self):
        rho, total = povm.finite_res_state(povm.ExactSource(0, r_opt(10)), ROOT_PI, "0.1")
        assert abs(rho.trace - 1) < 1e-12
        assert all(w > 0 for w, _ in rho.terms)
        assert rho.rank == len(rho.terms)
        assert rho.probability == total

    def test_probability_matches_quadrature(self):
        src = povm.ExactSource(1, r_opt(11))
        _, total = povm.finite_res_state(src, "0.3", "0.2")
        ref = quad_oracle(src.density, (mp.mpf("0.1"), mp.mpf("0.5")), tol=1e-20)
        assert rel(total, ref) < 1e-8

    def test_fidelity_decreases_with_width(self):
        src = povm.ApproxSource(8)
        psi = src.state(0)
        fids = [fidelity_pure_mixed(psi, povm.finite_res_state(src, 0, e)[0]) for e in ("0.02", "0.06", "0.1", "0.15")]
        assert all(b < a for a, b in zip(fids, fids[1:]))

    def test_rejects_bad_width(self):
        with pytest.raises(DomainError):
            povm.finite_res_state(povm.ApproxSource(8), 0, 0)


class TestWindowProbability:
    def test_n10_against_quadrature(self):
        eps = mp.mpf("0.12")
        ref = quad_oracle(lambda p: ba.homodyne_density(10, p, check=False), (-eps, eps), tol=1e-20)
        assert rel(povm.window_probability(10, 0, eps), ref) < 1e-10

    def test_wide_window_holds_everything(self):
        assert abs(povm.window_probability(9, 0, 80) - 1) < 1e-10

    def test_additive(self):
        a = povm.window_probability(12, "0.2", "0.3")
        b = povm.window_probability(12, "0.8", "0.3")
        both = povm.window_probability(12, "0.5", "0.6")
        assert rel(a + b, both) < 1e-12

    def test_even(self):
        assert rel(povm.window_probability(13, "1.1", "0.2"), povm.window_probability(13, "-1.1", "0.2")) < 1e-12
