import numpy as np
import pytest

from hdist.functional import (HLimitEstimate, extrapolate_limit, h_pairing,
                              holder_bound_slack, mu_tensor, pairing_records,
                              zero_mu_strong_convergence_check)
from hdist.grid import Grid, lp_norm, pairing
from hdist.multiplier import derivative, from_symbol
from hdist.registry import constant_symbol, make_field, riesz_symbol
from hdist.sobolev import SobolevElement, oscillation_family
from hdist.specbasis import HermiteBasis
from hdist.symbol import SphericalHarmonicBasis

from .test_grid import random_smooth


@pytest.fixture(scope="module")
def grid():
    return Grid(2, 128, 16.0)


@pytest.fixture(scope="module")
def gaussian(grid):
    return make_field(grid, "gaussian")


@pytest.fixture(scope="module")
def family(grid, gaussian):
    return oscillation_family(grid, gaussian, (1, 0), (8, 16, 32))


class TestHPairing:
    def test_constant_symbol_reduces_to_plain_pairing(self, grid, family, gaussian):
        u = family.u(8)
        rec = h_pairing(8, u, u, gaussian, gaussian, constant_symbol(2))
        plain = pairing(gaussian * u, gaussian * u)
        assert rec.value_form_a == pytest.approx(plain, rel=1e-12)

    def test_form_agreement(self, grid, family, gaussian):
        for psi in (riesz_symbol(2, 0), riesz_symbol(2, 1), constant_symbol(2)):
            for n in family.indices:
                u = family.u(n)
                rec = h_pairing(n, u, u, gaussian, gaussian, psi)
                assert rec.forms_agree(rtol=1e-9)

    def test_disjoint_supports_vanish(self, grid, family):
        left = make_field(grid, {"name": "bump",
                                 "params": {"radius": 2.0, "center": [-4.0, 0.0]}})
        right = make_field(grid, {"name": "bump",
                                  "params": {"radius": 2.0, "center": [4.0, 0.0]}})
        u = family.u(8)
        rec = h_pairing(8, u, u, left, right, constant_symbol(2))
        assert abs(rec.value_form_a) < 1e-13

    def test_sesquilinearity(self, grid, family, gaussian):
        u = family.u(8)
        psi1, psi2 = riesz_symbol(2, 0), riesz_symbol(2, 1)
        sum_eval = lambda xi: psi1.eval(xi) + psi2.eval(xi)
        psi_sum = type(psi1)(2, sum_eval, "sum", sphere_mean=0.0)
        a = h_pairing(8, u, u, gaussian, gaussian, psi_sum).value_form_a
        b = (h_pairing(8, u, u, gaussian, gaussian, psi1).value_form_a
             + h_pairing(8, u, u, gaussian, gaussian, psi2).value_form_a)
        assert abs(a - b) < 1e-10 * (1 + abs(a))

        # linear in phi1, anti-linear in phi2
        c = 0.7 - 1.3j
        base = h_pairing(8, u, u, gaussian, gaussian, psi1).value_form_a
        scaled1 = h_pairing(8, u, u, gaussian * c, gaussian, psi1).value_form_a
        scaled2 = h_pairing(8, u, u, gaussian, gaussian * c, psi1).value_form_a
        assert scaled1 == pytest.approx(c * base, rel=1e-10)
        assert scaled2 == pytest.approx(np.conj(c) * base, rel=1e-10)

    def test_swap_conjugates_with_real_symbol(self, grid, family, gaussian):
        u = family.u(8)
        phi2 = make_field(grid, {"name": "gaussian", "params": {"width": 1.5}})
        psi = constant_symbol(2)
        ab = h_pairing(8, u, u, gaussian, phi2, psi).value_form_a
        ba = h_pairing(8, u, u, phi2, gaussian, psi).value_form_a
        assert ba == pytest.approx(np.conj(ab), rel=1e-10)

    def test_holder_bound(self, grid, family, gaussian):
        u = family.u(16)
        for psi in (riesz_symbol(2, 0), constant_symbol(2)):
            rec = h_pairing(16, u, u, gaussian, gaussian, psi)
            slack = holder_bound_slack(rec, u, u, gaussian, gaussian, psi, p=2.0)
            assert slack <= 1e-8

    def test_leibniz_expansion_agreement(self, grid, gaussian):
        # negative-order input with two parts, k = 1
        f0 = make_field(grid, {"name": "gaussian", "params": {"width": 1.2}})
        f1 = make_field(grid, {"name": "gaussian",
                               "params": {"width": 0.9, "center": [0.5, 0.0]}})
        u = SobolevElement.negative({(0, 0): f0, (1, 0): f1}, k=1, p=2.0)
        v = random_smooth(grid, seed=3)
        phi2 = make_field(grid, {"name": "gaussian", "params": {"width": 1.4}})
        for psi in (riesz_symbol(2, 0), constant_symbol(2)):
            rec = h_pairing(4, u, v, gaussian, phi2, psi, check_leibniz=True)
            assert rec.leibniz_value is not None
            assert abs(rec.leibniz_value - rec.value_form_a) <= 1e-8 * (
                1 + abs(rec.value_form_a)
            )

    def test_leibniz_requires_parts(self, grid, family, gaussian):
        u = family.u(8)
        with pytest.raises(ValueError):
            h_pairing(8, u, u, gaussian, gaussian, constant_symbol(2),
                      check_leibniz=True)


class TestExtrapolation:
    def test_oscillation_matches_frequency_shift_oracle(self):
        # spectrum concentrates at n xi0 / L where the multiplier takes the
        # value psi(xi0/|xi0|); the limiting pairing is that value times the
        # mass integral of |phi|^2 |a|^2, known in closed form for Gaussians
        g = Grid(2, 256, 16.0)
        a = make_field(g, "gaussian")
        phi = make_field(g, "gaussian")
        fam = oscillation_family(g, a, (1, 0), (16, 32, 64))
        recs = pairing_records(fam, fam, phi, phi, riesz_symbol(2, 0))
        est = extrapolate_limit(recs)
        oracle = -0.25j  # (1/i) * integral exp(-4 pi |x|^2) = -i/4
        assert abs(est.value - oracle) <= 0.01 * abs(oracle)

    def test_factorization_sanity(self):
        # pairing with (phi1, phi2) agrees in the limit with (theta, 1)
        # for theta = phi1 conj(phi2)
        g = Grid(2, 256, 16.0)
        a = make_field(g, "gaussian")
        phi1 = make_field(g, "gaussian")
        phi2 = make_field(g, {"name": "gaussian", "params": {"width": 1.5}})
        one = make_field(g, "constant_one")
        fam = oscillation_family(g, a, (1, 0), (16, 32, 64))
        psi = riesz_symbol(2, 0)
        split = extrapolate_limit(pairing_records(fam, fam, phi1, phi2, psi))
        theta = phi1 * phi2.conj()
        merged = extrapolate_limit(pairing_records(fam, fam, theta, one, psi))
        assert abs(split.value - merged.value) <= 0.02 * abs(split.value)

    def test_estimate_serialization(self, family, gaussian):
        recs = pairing_records(family, family, gaussian, gaussian,
                               constant_symbol(2))
        est = extrapolate_limit(recs)
        d = est.to_dict()
        assert set(d) == {"value", "residual", "model", "beta", "flagged", "ns"}
        assert d["ns"] == [8, 16, 32]


class TestMuTensor:
    def test_zero_amplitude(self, grid):
        z = grid.sample(lambda x, y: np.zeros_like(x))
        fam = oscillation_family(grid, z, (1, 0), (8, 16, 32))
        hb = HermiteBasis.build(grid, 1)
        sb = SphericalHarmonicBasis.build(2, 1)
        tensor = mu_tensor(fam, fam, hb, sb)
        assert tensor.max_abs() == 0.0

    def test_oscillation_separates(self):
        # entries approximate Y(xi0/|xi0|) times the Hermite coefficient of
        # |a|^2, computed here by direct quadrature as the oracle
        g = Grid(2, 256, 16.0)
        a = make_field(g, "gaussian")
        fam = oscillation_family(g, a, (1, 0), (16, 32, 64))
        hb = HermiteBasis.build(g, 2)
        sb = SphericalHarmonicBasis.build(2, 2)
        tensor = mu_tensor(fam, fam, hb, sb)
        mass = a * a.conj()
        herm_coeffs = hb.analyze(mass).ravel()
        direction = np.array([[1.0], [0.0]])
        for b, (deg, j) in enumerate(sb.indices):
            y_val = complex(sb.evaluate(deg, j, direction)[0])
            for mi in range(len(herm_coeffs)):
                expected = y_val * herm_coeffs[mi]
                got = tensor.values[mi, b]
                assert abs(got - expected) <= 0.02 * abs(expected) + 2e-4

    def test_serialization(self, grid, family):
        hb = HermiteBasis.build(grid, 1)
        sb = SphericalHarmonicBasis.build(2, 1)
        tensor = mu_tensor(family, family, hb, sb)
        d = tensor.to_dict()
        assert len(d["entries"]) == 4  # (m_max+1)^2 hermite rows
        assert len(d["entries"][0]) == sb.size
        assert "order_in_xi" in d


@pytest.fixture(scope="module")
def setup():
    g = Grid(2, 256, 16.0)
    a = make_field(g, "gaussian")
    return {
        "grid": g,
        "a": a,
        "theta": make_field(g, "gaussian"),
        "phi": make_field(g, "gaussian"),
        "hb": HermiteBasis.build(g, 2),
        "sb": SphericalHarmonicBasis.build(2, 2),
        "ns": (16, 32, 64),
    }


class TestZeroCheck:
    def test_scaled_family_is_zero_and_decays(self, setup):
        g, a = setup["grid"], setup["a"]
        u = oscillation_family(g, a, (1, 0), setup["ns"], prefactor_power=-0.5)
        v = oscillation_family(g, a, (1, 0), setup["ns"])
        res = zero_mu_strong_convergence_check(
            u, v, setup["theta"], 0, 2.0, setup["hb"], setup["sb"], setup["phi"])
        assert res["tensor_is_zero"]
        assert res["strongly_null"]
        assert res["consistent"]
        assert res["strong_fit_exponent"] == pytest.approx(-0.5, abs=0.1)

    def test_unscaled_family_contrapositive(self, setup):
        g, a = setup["grid"], setup["a"]
        u = oscillation_family(g, a, (1, 0), setup["ns"])
        res = zero_mu_strong_convergence_check(
            u, u, setup["theta"], 0, 2.0, setup["hb"], setup["sb"], setup["phi"])
        assert not res["tensor_is_zero"]
        assert res["tensor_max"] >= 10 * res["threshold"]
        assert not res["strongly_null"]
        assert res["consistent"]

    def test_zero_family(self, setup):
        g = setup["grid"]
        z = g.sample(lambda x, y: np.zeros_like(x))
        fam = oscillation_family(g, z, (1, 0), setup["ns"])
        res = zero_mu_strong_convergence_check(
            fam, fam, setup["theta"], 0, 2.0, setup["hb"], setup["sb"],
            setup["phi"])
        assert res["tensor_max"] == 0.0
        assert res["tensor_is_zero"]
        assert res["consistent"]
