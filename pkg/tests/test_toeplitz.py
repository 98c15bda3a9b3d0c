import math

import numpy as np
import pytest

from bergkit.kernels import PrecisionError
from bergkit.measures import Measure
from bergkit.quadrature import QuadSpec
from bergkit.toeplitz import (
    ExponentPair,
    ToeplitzError,
    berezin,
    berezin_of_matrix,
    berezin_radial_profile,
    criteria_report_pq,
    maximal_projection,
    operational_verdict,
    schatten_norm,
    schatten_report,
    toeplitz_matrix,
    trace_check,
    weight_measure,
)
from bergkit.weights import dyadic_grid, log_weight, standard


class TestExponentPair:
    def test_conjugates(self):
        pq = ExponentPair(3.0, 2.0)
        assert pq.p_prime == pytest.approx(1.5)
        assert pq.q_prime == pytest.approx(2.0)
        assert 1.0 / pq.p + 1.0 / pq.p_prime == pytest.approx(1.0)

    def test_derived_exponents(self):
        pq = ExponentPair(2.0, 2.0)
        assert pq.berezin_exponent == pytest.approx(0.0)
        assert pq.carleson_exponent == pytest.approx(1.0)
        assert ExponentPair(3.0, 2.0).schatten_dual_exponent == pytest.approx(6.0)

    def test_validation(self):
        with pytest.raises(ToeplitzError):
            ExponentPair(1.0, 2.0)
        with pytest.raises(ToeplitzError):
            ExponentPair(2.0, 3.0).schatten_dual_exponent


class TestMatrices:
    @pytest.mark.parametrize("alpha", [0.0, 1.0])
    def test_identity(self, alpha):
        w = standard(alpha)
        T = toeplitz_matrix(weight_measure(w), w, 64)
        assert np.array_equal(T.data, np.eye(65, dtype=complex))

    def test_atom_at_origin(self):
        w = standard(0.0)
        T = toeplitz_matrix(Measure.point_masses([(0.0, 1.0)]), w, 16)
        ref = np.zeros((17, 17))
        ref[0, 0] = 1.0
        assert np.allclose(T.data, ref)

    def test_psd(self):
        w = standard(0.0)
        for mu in (
            Measure.point_masses([(0.5, 1.0), (-0.3 + 0.4j, 0.7)]),
            Measure.radial_density("(1-r)^0.5"),
        ):
            T = toeplitz_matrix(mu, w, 96)
            assert T.smallest_eigenvalue() >= -1e-10

    def test_hermitian(self):
        mu = Measure.point_masses([(0.4 + 0.2j, 1.0), (0.1 - 0.6j, 2.0)])
        T = toeplitz_matrix(mu, standard(1.0), 32)
        assert np.allclose(T.data, T.data.conj().T)

    def test_chi_restriction_trace(self):
        # trace of T for chi_{|z|<1/2} w dA equals 1/3 exactly (geometric sum)
        w = standard(0.0)
        mu = Measure.radial_density(w.density, support=0.5, name="chi w")
        T = toeplitz_matrix(mu, w, 256)
        assert np.trace(T.data).real == pytest.approx(1.0 / 3.0, rel=1e-9)


class TestBerezin:
    def test_identity_measure(self):
        w = standard(0.0)
        prof = berezin_radial_profile(weight_measure(w), w, dyadic_grid(10))
        assert np.abs(prof - 1.0).max() < 1e-12

    def test_atom_at_origin_closed_form(self):
        w = standard(0.0)
        mu = Measure.point_masses([(0.0, 1.0)])
        for z in (0.0, 0.5, 0.8j):
            assert berezin(mu, w, z) == pytest.approx(
                (1 - abs(z) ** 2) ** 2, rel=1e-10
            )

    def test_matrix_cross_check(self):
        w = standard(0.0)
        mu = Measure.point_masses([(0.3, 1.0), (0.2j, 0.5)])
        T = toeplitz_matrix(mu, w, 128)
        for z in (0.2, 0.5, 0.4 + 0.3j):
            a = berezin(mu, w, z)
            b = berezin_of_matrix(T, w, z)
            assert a == pytest.approx(b, rel=1e-6)

    def test_matrix_berezin_linearity(self):
        w = standard(0.0)
        mu1 = Measure.point_masses([(0.3, 1.0)])
        mu2 = Measure.point_masses([(0.1 - 0.2j, 2.0)])
        T1 = toeplitz_matrix(mu1, w, 64)
        T2 = toeplitz_matrix(mu2, w, 64)
        z = 0.4
        assert berezin_of_matrix(T1 + T2, w, z) == pytest.approx(
            berezin_of_matrix(T1, w, z) + berezin_of_matrix(T2, w, z), rel=1e-12
        )

    def test_matrix_tail_guard(self):
        w = standard(0.0)
        T = toeplitz_matrix(Measure.point_masses([(0.1, 1.0)]), w, 16)
        with pytest.raises(PrecisionError):
            berezin_of_matrix(T, w, 0.95)

    def test_log_weight_berezin_shape_bracket(self):
        # T~ for the berezin-gap configuration stays within a factor-50
        # bracket of (1-|z|)^(1/p) (log e/(1-|z|))^-beta over [0.9, 1-2^-14]
        w = log_weight(2.0)
        p, beta = 2.0, 0.25

        def v(r):
            r = np.asarray(r, dtype=float)
            L = 1.0 - np.log1p(-r)
            return (1.0 - r) ** (-1.0 + 1.0 / p) * L ** (1.0 - 2.0 - beta)

        mu = Measure.radial_density(v, name="berezin-gap")
        rs = 1.0 - 2.0 ** -np.arange(4, 15)
        prof = berezin_radial_profile(mu, w, rs)
        L = 1.0 - np.log1p(-rs)
        shape = (1.0 - rs) ** (1.0 / p) * L ** (-beta)
        ratio = prof / shape
        assert ratio.max() / ratio.min() <= 50.0


class TestSchatten:
    def test_diagonal_geometric(self):
        w = standard(0.0)
        data = np.diag(2.0 ** -np.arange(64)).astype(complex)
        from bergkit.toeplitz import OperatorMatrix
        T = OperatorMatrix(data, w)
        est = schatten_norm(T, 1.0, (16, 32, 64))
        assert est.value == pytest.approx(2.0, rel=1e-9)
        assert est.converged

    def test_rank_one(self):
        w = standard(0.0)
        T = toeplitz_matrix(Measure.point_masses([(0.5, 1.0)]), w, 128)
        for p in (0.5, 1.0, 2.0, 4.0):
            est = schatten_norm(T, p, (64, 128))
            assert est.value == pytest.approx(16.0 / 9.0, rel=1e-2)

    def test_monotone_in_p_for_contractions(self):
        w = standard(0.0)
        T = toeplitz_matrix(Measure.point_masses([(0.5, 0.5)]), w, 64)
        sv = T.singular_values()
        T.data /= sv[0]  # scale to ||T|| = 1
        vals = [schatten_norm(T, p, (64,)).value for p in (1.0, 2.0, 4.0)]
        assert vals[0] >= vals[1] >= vals[2]

    def test_validation(self):
        w = standard(0.0)
        T = toeplitz_matrix(weight_measure(w), w, 16)
        with pytest.raises(ToeplitzError):
            schatten_norm(T, 0.0)


class TestTrace:
    def test_atom_at_origin(self):
        out = trace_check(Measure.point_masses([(0.0, 1.0)]), standard(0.0), 64)
        assert out["trace_matrix"] == pytest.approx(1.0, rel=1e-12)
        assert out["trace_integral"] == pytest.approx(1.0, rel=1e-8)

    def test_rank_one_scaling(self):
        mu = Measure.point_masses([(0.5, 1.0)])
        out = trace_check(mu, standard(0.0), 128)
        assert out["relative_gap"] < 1e-4
        out2 = trace_check(mu.scaled(3.0), standard(0.0), 128)
        assert out2["trace_matrix"] == pytest.approx(3 * out["trace_matrix"])

    def test_requires_compact_support(self):
        with pytest.raises(ToeplitzError):
            trace_check(weight_measure(standard(0.0)), standard(0.0), 32)


class TestMaximalProjection:
    def test_constant_at_origin(self):
        # P+(1)(0) = int |B_0| dA = 1 for the constant weight
        w = standard(0.0)
        assert maximal_projection(lambda z: np.ones(np.shape(z)), w, 0.0) == \
            pytest.approx(1.0, rel=1e-8)

    def test_zero(self):
        w = standard(0.0)
        assert maximal_projection(lambda z: np.zeros(np.shape(z)), w, 0.3) == \
            pytest.approx(0.0, abs=1e-12)

    def test_dominates_berezin(self):
        # T~_mu(z) <= C * P+(mu_hat_r)(z) with one C over the probe grid
        from scipy.interpolate import CubicSpline
        from bergkit.measures import mu_hat_r
        w = standard(0.0)
        mu = Measure.radial_density(
            lambda r: (1 - np.asarray(r)) ** 0.5 * w.density(r), name="v"
        )
        spec = QuadSpec(rtol=1e-6)
        xs = np.linspace(1e-3, 0.9995, 60)
        hat = CubicSpline(xs, [mu_hat_r(mu, w, x, 0.3, spec) for x in xs])

        def f(u):
            return np.clip(hat(np.clip(np.abs(u), 0.0, 0.9995)), 0.0, None)

        ratios = []
        for z in (0.2, 0.5, 0.8):
            t = berezin(mu, w, z, spec)
            pj = maximal_projection(f, w, z, spec)
            ratios.append(t / pj)
        assert max(ratios) < 3.0  # single moderate constant dominates


class TestOperationalRules:
    def test_diverging_detection(self):
        partials = [1.0, 1.2, 1.5, 2.0, 2.6, 3.4]
        assert operational_verdict(partials) == "diverging"

    def test_settling_is_finite(self):
        partials = [1.0, 1.5, 1.8, 1.85, 1.86, 1.862]
        assert operational_verdict(partials) == "finite"

    def test_short_trails_finite(self):
        assert operational_verdict([1.0, 2.0]) == "finite"


class TestReports:
    def test_identity_bounded_report(self):
        w = standard(0.0)
        rep = criteria_report_pq(weight_measure(w), w, ExponentPair(2, 2),
                                 depth=8, spec=QuadSpec(rtol=1e-7))
        assert rep.verdict == "bounded"
        assert rep.quantities["berezin_sup"].value == pytest.approx(1.0, rel=1e-6)
        assert rep.quantities["carleson_sup"].value == pytest.approx(1.0, rel=1e-9)
        obj = rep.to_json()
        assert obj["verdict"] == "bounded"

    def test_schatten_report_rank_one_dyadic_term(self):
        # delta_{0.5} lives in the level-0 cell centered at 1/2:
        # the dyadic sum is (1/omega_star(1/2))^p
        w = standard(0.0)
        mu = Measure.point_masses([(0.5, 1.0)])
        rep = schatten_report(mu, w, 1.0, n_max_dyadic=6, depth_integral=6,
                              depth_berezin=6)
        ref = 1.0 / (0.5 * math.log(2.0) - 3.0 / 16.0)
        assert rep.dyadic_sum.value == pytest.approx(ref, rel=1e-6)
        assert rep.dyadic_sum.verdict == "finite"
        assert rep.cutoff_regular is True
        assert rep.berezin_applicable is True

    def test_trace_norm_bounded_by_weighted_integral(self):
        # |T_Phi|_1 <= C int Phi w/omega_star dA for Phi = (1-|z|)^s.
        # For s <= 1 both sides are infinite, so the finite-scale rendering
        # compares the N-truncated trace against the integral truncated at
        # the matching radius 1 - 1/(2N): one moderate C covers all (s, N).
        from bergkit.quadrature import integrate_interval
        w = standard(0.0)
        cs = []
        for s in (0.5, 1.0, 2.0):
            mu = Measure.radial_density(
                lambda r, s=s: (1 - np.asarray(r)) ** s * w.density(r), name="phi w"
            )
            T = toeplitz_matrix(mu, w, 256)

            def f(x, s=s):
                x = np.asarray(x, dtype=float)
                return (1 - x) ** s * w.density(x) / w.omega_star(x) * 2.0 * x

            for N in (64, 128, 256):
                tr = float(np.trace(T.data[: N + 1, : N + 1]).real)
                ref = integrate_interval(
                    f, 1e-9, 1.0 - 0.5 / N, QuadSpec(rtol=1e-7)
                ).require()
                cs.append(tr / ref)
        assert max(cs) < 5.0  # single moderate constant covers all cases


def test_berezin_consistency_spec_parameters():
    # berezin(mu) vs berezin_of_matrix(toeplitz_matrix(mu)) to 1e-6 for a
    # compactly supported measure, |z| <= 0.9, N = 128
    w = standard(0.0)
    mu = Measure.point_masses([(0.55, 1.0), (-0.3 + 0.25j, 0.6)])
    T = toeplitz_matrix(mu, w, 128)
    rng = np.random.default_rng(17)
    for _ in range(12):
        z = rng.uniform(0, 0.9) * np.exp(1j * rng.uniform(0, 2 * np.pi))
        a = berezin(mu, w, z)
        b = berezin_of_matrix(T, w, z)
        assert a == pytest.approx(b, rel=1e-6)
