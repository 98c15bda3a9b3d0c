import math

import numpy as np
import pytest

from bergkit.composition import (
    Symbol,
    SymbolError,
    composition_matrix,
    condition_integrals,
    counting_function,
    power_coeffs,
    pullback_measure,
    schatten_composition,
)
from bergkit.toeplitz import basis_scale, toeplitz_matrix
from bergkit.weights import log_weight, standard


def taylor_by_cauchy(fn, M, rho=0.5, n=4096):
    """Independent differentiation oracle: Cauchy-integral coefficients."""
    theta = 2 * np.pi * np.arange(n) / n
    z = rho * np.exp(1j * theta)
    vals = fn(z)
    coeffs = np.fft.fft(vals)[: M + 1] / n
    return coeffs / rho ** np.arange(M + 1)


class TestSymbol:
    def test_poly_eval_and_derivative(self):
        phi = Symbol.poly([0.1, 0.2, 0.3])
        z = 0.4 + 0.1j
        assert phi(z) == pytest.approx(0.1 + 0.2 * z + 0.3 * z * z)
        assert phi.derivative(z) == pytest.approx(0.2 + 0.6 * z)

    def test_blaschke_modulus_one_on_boundary(self):
        phi = Symbol.blaschke([0.3, -0.4j], rotation=1.0)
        z = np.exp(1j * np.linspace(0, 2 * np.pi, 64))
        assert np.allclose(np.abs(phi(z)), 1.0, atol=1e-12)
        assert phi.sup_certificate == pytest.approx(1.0, abs=1e-9)

    def test_blaschke_derivative_matches_finite_difference(self):
        phi = Symbol.blaschke([0.3, -0.4j], rotation=0.7)
        z = 0.2 + 0.3j
        h = 1e-7
        fd = (phi(z + h) - phi(z - h)) / (2 * h)
        assert phi.derivative(z) == pytest.approx(fd, rel=1e-6)

    def test_non_self_map_rejected(self):
        with pytest.raises(SymbolError):
            Symbol.poly([0.5, 0.75])  # boundary sup 1.25
        with pytest.raises(SymbolError):
            Symbol.blaschke([1.2])

    def test_identity_and_monomials_allowed(self):
        assert Symbol.poly([0.0, 1.0]).degree == 1
        assert Symbol.poly([0.0, 0.0, 1.0]).valence_bound == 2

    def test_json_roundtrip(self):
        phi = Symbol.blaschke([0.2 + 0.1j], rotation=0.3)
        phi2 = Symbol.from_json(phi.to_json())
        z = 0.5
        assert phi(z) == pytest.approx(phi2(z))


class TestPowerCoeffs:
    def test_dilation(self):
        phi = Symbol.poly([0.0, 0.5])
        c = power_coeffs(phi, 3, 6)
        ref = np.zeros(7, dtype=complex)
        ref[3] = 0.125
        assert np.allclose(c, ref)

    def test_square_map(self):
        phi = Symbol.poly([0.0, 0.0, 1.0])
        c = power_coeffs(phi, 2, 6)
        assert c[4] == pytest.approx(1.0)
        assert np.count_nonzero(np.abs(c) > 1e-14) == 1

    def test_mobius_example(self):
        # (z + 1/2)/(1 + z/2) = e^{i pi} (-1/2 - z)/(1 - (-1/2) z)
        phi = Symbol.blaschke([-0.5], rotation=math.pi)
        c = phi.taylor(2)
        assert np.allclose(c, [0.5, 0.75, -0.375], atol=1e-13)

    def test_against_cauchy_oracle(self):
        phi = Symbol.blaschke([0.3, -0.2 + 0.4j], rotation=0.9)
        for n in (1, 2, 5):
            got = power_coeffs(phi, n, 12)
            ref = taylor_by_cauchy(lambda z: phi(z) ** n, 12)
            assert np.allclose(got, ref, atol=1e-10)


class TestCompositionMatrix:
    def test_identity_symbol(self):
        w = standard(0.0)
        C = composition_matrix(Symbol.poly([0.0, 1.0]), w, 24)
        assert np.allclose(C.data[:25, :], np.eye(25))

    def test_dilation_diagonal(self):
        w = log_weight(2.0)
        c = 0.6
        C = composition_matrix(Symbol.poly([0.0, c]), w, 32)
        sq = C.data[:33, :]
        assert np.allclose(sq, np.diag(c ** np.arange(33)))

    def test_square_map_entries_and_singular_values(self):
        # nonzero entries at (2n, n): sqrt(omega_{4n+1}/omega_{2n+1})
        # = sqrt((n+1)/(2n+1)) for the constant weight; sv -> 1/sqrt(2)
        w = standard(0.0)
        N = 64
        C = composition_matrix(Symbol.poly([0.0, 0.0, 1.0]), w, N)
        for n in (0, 3, 10):
            assert C.data[2 * n, n] == pytest.approx(
                math.sqrt((n + 1) / (2 * n + 1))
            )
        sv = np.sort(C.singular_values())
        assert sv[0] == pytest.approx(1 / math.sqrt(2), rel=1e-2)
        assert sv[0] > 1 / math.sqrt(2)  # decreasing toward the limit

    def test_action_identity(self):
        # (C f)(z) = f(phi(z)) for polynomials
        rng = np.random.default_rng(12)
        w = standard(1.0)
        phi = Symbol.blaschke([0.4], rotation=0.5)
        N = 48
        C = composition_matrix(phi, w, N)
        M = C.data.shape[0] - 1
        sM = basis_scale(w, M)
        sN = sM[: N + 1]
        for _ in range(5):
            coeffs = rng.normal(size=N // 2) + 1j * rng.normal(size=N // 2)
            z = rng.uniform(0, 0.8) * np.exp(1j * rng.uniform(0, 2 * np.pi))
            fvec = np.zeros(N + 1, dtype=complex)
            fvec[: coeffs.size] = coeffs * sN[: coeffs.size]  # basis coords
            out = C.data @ fvec
            # evaluate sum_m out_m e_m(z) = sum_m out_m z^m / s_m
            got = np.sum(out * z ** np.arange(M + 1) / sM)
            ref = np.polynomial.polynomial.polyval(complex(phi(z)), coeffs)
            assert abs(got - ref) < 1e-8


class TestPullback:
    def test_identity_symbol_gives_identity_toeplitz(self):
        w = standard(0.0)
        mu = pullback_measure(Symbol.poly([0.0, 1.0]), w)
        T = toeplitz_matrix(mu, w, 16)
        assert np.allclose(T.data, np.eye(17), atol=1e-12)

    def test_dilation_closed_form(self):
        # phi = cz: T_mu diagonal |c|^{2n} (constant weight)
        w = standard(0.0)
        c = 0.5
        mu = pullback_measure(Symbol.poly([0.0, c]), w)
        T = toeplitz_matrix(mu, w, 12)
        assert np.allclose(T.data, np.diag(c ** (2.0 * np.arange(13))), atol=1e-12)

    def test_parseval_random_cubic(self):
        rng = np.random.default_rng(7)
        w = standard(0.0)
        coeffs = rng.normal(size=4) + 1j * rng.normal(size=4)
        theta = np.exp(1j * 2 * np.pi * np.arange(256) / 256)
        coeffs *= 0.8 / np.abs(np.polynomial.polynomial.polyval(theta, coeffs)).max()
        phi = Symbol.poly(coeffs)
        N = 32
        C = composition_matrix(phi, w, N)
        gram = C.data.conj().T @ C.data
        T = toeplitz_matrix(pullback_measure(phi, w), w, N)
        assert np.abs(gram - T.data).max() < 1e-8


class TestCountingFunction:
    def test_identity(self):
        w = standard(0.0)
        phi = Symbol.poly([0.0, 1.0])
        for z in (0.3, 0.5 + 0.2j):
            assert counting_function(phi, w, z) == pytest.approx(
                w.omega_star(abs(z)), rel=1e-9
            )

    def test_square_map(self):
        w = standard(0.0)
        phi = Symbol.poly([0.0, 0.0, 1.0])
        z = 0.49
        assert counting_function(phi, w, z) == pytest.approx(
            2.0 * w.omega_star(math.sqrt(z)), rel=1e-9
        )

    def test_dilation_support(self):
        w = standard(0.0)
        phi = Symbol.poly([0.0, 0.6])
        assert counting_function(phi, w, 0.3) == pytest.approx(
            w.omega_star(0.5), rel=1e-9
        )
        assert counting_function(phi, w, 0.9) == 0.0  # no preimage in the disc

    def test_excluded_at_phi_zero(self):
        phi = Symbol.blaschke([0.4])
        with pytest.raises(SymbolError):
            counting_function(phi, standard(0.0), phi(0.0))

    def test_multiplicity(self):
        # phi(z) = z^2 has a double preimage structure: two roots +-sqrt(w)
        phi = Symbol.poly([0.0, 0.0, 1.0])
        pre = phi.preimages(0.25)
        assert pre.size == 2
        assert np.allclose(np.sort(np.abs(pre)), [0.5, 0.5])


class TestConditionIntegrals:
    def test_dilation_all_finite(self):
        w = standard(0.0)
        out = condition_integrals(Symbol.poly([0.0, 0.5]), w, 4.0, depth=8)
        assert out["star_ratio"].verdict == "finite"
        assert out["derivative_ratio"].verdict == "finite"
        assert out["counting"].verdict == "finite"

    def test_identity_symbol_diverges(self):
        # C_id is not compact: the star-ratio integral must diverge
        w = standard(0.0)
        out = condition_integrals(Symbol.poly([0.0, 1.0]), w, 2.0, depth=10)
        assert out["star_ratio"].verdict == "diverging"
        assert out["counting"].verdict == "diverging"

    def test_schwarz_pick_pointwise_ordering(self):
        # the derivative-ratio integrand is dominated by the star-ratio one
        # pointwise for regular weights on |z| >= 1/2
        w = standard(0.0)
        phi = Symbol.blaschke([0.35], rotation=0.4)
        rng = np.random.default_rng(3)
        z = rng.uniform(0.5, 0.97, 60) * np.exp(1j * rng.uniform(0, 2 * np.pi, 60))
        p = 3.0
        ow = w.omega_star(np.abs(z))
        fz = phi(z)
        ofz = w.omega_star(np.clip(np.abs(fz), 1e-12, None))
        ratio_term = (ow / ofz) ** (p / 2.0)
        i39 = ratio_term * w.density(np.abs(z)) / ow
        i103 = ratio_term * np.abs(phi.derivative(z)) ** p \
            * (1 - np.abs(z) ** 2) ** (p - 2.0) / (1 - np.abs(fz) ** 2) ** p
        assert np.all(i103 <= i39 * (1 + 1e-9))


class TestSchattenComposition:
    def test_dilation_closed_forms(self):
        w = standard(0.0)
        for c in (0.3, 0.5, 0.7):
            phi = Symbol.poly([0.0, c])
            for p in (1.0, 2.0, 4.0):
                res = schatten_composition(phi, w, p, (128, 192, 256))
                ref = (1.0 - c ** p) ** (-1.0 / p)
                assert res["schatten"].value == pytest.approx(ref, rel=1e-2)
                assert res["schatten"].converged
                assert res["identity_gap"] < 1e-6

    def test_square_map_flagged_not_compact(self):
        # singular values -> 1/sqrt(2): the estimate must not report converged
        w = standard(0.0)
        res = schatten_composition(Symbol.poly([0.0, 0.0, 1.0]), w, 2.0,
                                   (64, 128, 256))
        assert not res["schatten"].converged


class TestChangeOfVariables:
    def test_square_map_multiplicity_identity(self):
        # int g(phi(zeta)) |phi'(zeta)|^2 dA = int g(w) n_phi(w) dA with
        # n_phi the counting multiplicity (= 2 a.e. for phi = z^2)
        from bergkit.quadrature import integrate_region
        from bergkit.geometry import Annulus
        phi = Symbol.poly([0.0, 0.0, 1.0])

        def g(w):
            return np.exp(-np.abs(w) ** 2)

        lhs = integrate_region(
            lambda z: np.asarray(g(phi(z)), dtype=float)
            * np.abs(phi.derivative(z)) ** 2,
            Annulus(0.0, 1.0), None,
        ).require()
        rhs = integrate_region(
            lambda w: 2.0 * np.asarray(g(w), dtype=float),
            Annulus(0.0, 1.0), None,
        ).require()
        assert lhs == pytest.approx(rhs, rel=1e-6)

    def test_blaschke_counting_identity(self):
        # same identity against the root-solved multiplicity for a
        # non-univalent degree-2 Blaschke product (small-instance oracle)
        from bergkit.quadrature import integrate_region
        from bergkit.geometry import Annulus
        phi = Symbol.blaschke([0.3, -0.4], rotation=0.2)

        def g(w):
            return 1.0 / (1.0 + np.abs(w) ** 2)

        lhs = integrate_region(
            lambda z: np.asarray(g(phi(z)), dtype=float)
            * np.abs(phi.derivative(z)) ** 2,
            Annulus(0.0, 1.0), None,
        ).require()

        def counted(w):
            w = np.atleast_1d(w)
            out = np.empty(w.shape)
            for i, ww in enumerate(w):
                out[i] = g(ww) * phi.preimages(complex(ww)).size
            return out

        from bergkit.quadrature import QuadSpec
        rhs = integrate_region(
            counted, Annulus(0.0, 1.0), None, QuadSpec(rtol=1e-5),
        ).value
        assert lhs == pytest.approx(rhs, rel=1e-4)
