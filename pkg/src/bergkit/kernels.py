"""Bergman reproducing kernels of A^2_w as moment series.

B_z(zeta) = sum_n (conj(z) zeta)^n / (2 omega_{2n+1}): the coefficient
1/(2 omega_{2n+1}) is forced by ||z^n||^2 = 2 omega_{2n+1} under normalized
area measure and is validated against the closed-form standard-weight kernel
(alpha+1)(1 - conj(z) zeta)^(-(2+alpha)) in the test suite.

Truncation control: for doubling weights the coefficients grow at most
polynomially, so the tail beyond N is below c_N q^N * q'/(1-q') with
q' = q * (local coefficient growth); N doubles until that bound clears the
tolerance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _core
from .quadrature import DEFAULT_SPEC, QuadratureError, integrate_radial
from .weights import DomainError, RadialWeight

N_CAP = 1 << 21


class PrecisionError(QuadratureError):
    pass


@dataclass
class KernelNormEstimate:
    z: complex
    p: float
    value: float          # ||B_z||_{A^p_nu}
    theory_value: float   # tail-integral comparator, same normalization
    converged: bool = True

    @property
    def ratio(self) -> float:
        return self.value / self.theory_value


class KernelSeries:
    """Moment-series kernel of one weight; shares the weight's moment cache."""

    def __init__(self, weight: RadialWeight, tol: float = 1e-12):
        self.weight = weight
        self.tol = tol

    def coeffs(self, n_max: int) -> np.ndarray:
        """c_0..c_n_max with c_n = 1 / (2 omega_{2n+1})."""
        moments = self.weight.moments(2 * n_max + 1)
        with np.errstate(divide="ignore", over="ignore"):
            return 1.0 / (2.0 * moments[1::2][: n_max + 1])

    def n_needed(self, q: float, tol: float | None = None) -> int:
        """Truncation length for |conj(z) zeta| = q."""
        tol = self.tol if tol is None else tol
        q = float(q)
        if q >= 1.0 - 1e-12:
            raise PrecisionError("|conj(z) zeta| too close to 1")
        if q < 1e-300:
            return 1
        n = 64
        while True:
            c = self.coeffs(n)
            if not math.isfinite(c[-1]):
                raise PrecisionError(
                    f"kernel coefficients overflow float64 before the tail "
                    f"clears tolerance at q={q:.17g}"
                )
            growth = (c[-1] / c[-9]) ** (1.0 / 8.0) if c[-9] > 0 else 1.0
            q_eff = min(q * max(growth, 1.0) * 1.001, 1.0 - 1e-13)
            tail = c[-1] * q ** n * q_eff / (1.0 - q_eff)
            if tail <= tol * max(c[0], 1e-300):
                return n
            if n >= N_CAP:
                raise PrecisionError(
                    f"kernel truncation beyond N={N_CAP} required for q={q:.17g}"
                )
            n *= 2

    def eval(self, z, zeta, order: int = 0):
        """B_z(zeta) (order 0) or its zeta-derivative (order 1); vectorized
        over zeta."""
        z = complex(z)
        zeta = np.asarray(zeta, dtype=complex)
        if abs(z) >= 1.0 or np.any(np.abs(zeta) >= 1.0):
            raise DomainError("kernel arguments must lie inside the disc")
        q_max = abs(z) * float(np.max(np.abs(zeta))) if zeta.size else 0.0
        n = self.n_needed(q_max)
        c = self.coeffs(n)
        w = np.conj(z) * zeta
        if order == 0:
            return _core.poly_eval(c, w)
        if order == 1:
            d = c[1:] * np.arange(1, c.size)
            return np.conj(z) * _core.poly_eval(d, w)
        raise ValueError("order must be 0 or 1")

    def diag(self, r):
        """B_z(z) = ||B_z||^2 for |z| = r; vectorized over r."""
        r = np.asarray(r, dtype=float)
        if np.any(r < 0) or np.any(r >= 1.0):
            raise DomainError("radius outside [0, 1)")
        q = float(np.max(r)) ** 2
        n = self.n_needed(q)
        out = _core.poly_eval(self.coeffs(n), np.asarray(r, dtype=float) ** 2)
        return out

    def sup_norm(self, z) -> float:
        """||B_z||_{H^infty} = sum c_n |z|^n  (positive coefficients)."""
        z = complex(z)
        n = self.n_needed(abs(z))
        return float(_core.poly_eval(self.coeffs(n), abs(z)))

    def angular_values(self, z, s: float, n_points: int | None = None):
        """B_z(s e^{i theta_k}) on a uniform theta grid via FFT.

        Returns (theta, values); the grid size is at least twice the
        truncation length, so |values|^p angular means converge superfast.
        """
        z = complex(z)
        n = self.n_needed(abs(z) * s)
        a = self.coeffs(n).astype(complex)
        a *= np.conj(z) ** np.arange(a.size) * s ** np.arange(a.size)
        m = max(64, 1 << int(math.ceil(math.log2(2 * a.size))))
        if n_points is not None:
            m = max(m, n_points)
        vals = np.fft.fft(a, m)  # index k holds B at theta = -2 pi k / m
        theta = -2.0 * math.pi * np.arange(m) / m
        return theta, vals


def _series(w: RadialWeight, tol=1e-12) -> KernelSeries:
    key = ("kernel", tol)
    if key not in w._kernel_cache:
        w._kernel_cache[key] = KernelSeries(w, tol)
    return w._kernel_cache[key]


def kernel_eval(w: RadialWeight, z, zeta, order: int = 0, tol=1e-12):
    out = _series(w, tol).eval(z, zeta, order)
    return complex(out) if np.ndim(out) == 0 else out


def kernel_diag(w: RadialWeight, z):
    out = _series(w).diag(np.abs(np.asarray(z, dtype=complex)))
    return float(out) if np.ndim(out) == 0 else out


def normalized_kernel_eval(w: RadialWeight, z, zeta, p: float = 2.0):
    """b_{p,z}(zeta) = B_z(zeta) / ||B_z||_{A^p_w}."""
    if p == 2.0:
        nrm = math.sqrt(kernel_diag(w, z))
    else:
        nrm = kernel_norm(w, w, z, p).value
    out = kernel_eval(w, z, zeta)
    return out / nrm


def kernel_norm(w: RadialWeight, nu: RadialWeight, z, p: float,
                spec=DEFAULT_SPEC, order: int = 0) -> KernelNormEstimate:
    """|| (B_z)^(order) ||_{A^p_nu} by quadrature, with the tail-integral
    comparator int_0^|z| nuhat(t) / (what(t)^p (1-t)^{p(order+1)}) dt."""
    z = complex(z)
    if p <= 0:
        raise ValueError("p must be positive")
    ser = _series(w)

    def radial_fn(s):
        s = np.atleast_1d(s)
        out = np.empty(s.shape)
        for i, si in enumerate(s):
            _, vals = ser.angular_values(z, float(si))
            if order == 1:
                # derivative series shares the grid: evaluate separately
                n = ser.n_needed(abs(z) * float(si))
                c = ser.coeffs(n)
                d = (c[1:] * np.arange(1, c.size)).astype(complex)
                d *= np.conj(z) ** np.arange(1, c.size) * float(si) ** np.arange(0, c.size - 1)
                m = max(64, 1 << int(math.ceil(math.log2(2 * max(d.size, 2)))))
                vals = np.fft.fft(d, m)
            out[i] = float(np.mean(np.abs(vals) ** p))
        return out * nu.density(s) * 2.0 * s

    res = integrate_radial(radial_fn, 0.0, spec)
    value = res.value ** (1.0 / p)

    r = abs(z)

    def comparator(t):
        t = np.asarray(t, dtype=float)
        return np.exp(
            nu.log_omega_hat(t)
            - p * w.log_omega_hat(t)
            - p * (order + 1) * np.log1p(-t)
        )

    comp = integrate_radial(comparator, 0.0, spec, r1=r)
    theory = max(comp.value, 1e-300) ** (1.0 / p)
    return KernelNormEstimate(
        z=z, p=p, value=value, theory_value=theory,
        converged=res.converged and comp.converged,
    )


def kernel_locality_probe(w: RadialWeight, grid=None,
                          deltas=(1.0, 0.75, 0.5, 0.25, 0.125),
                          radii=(0.4, 0.3, 0.2, 0.1, 0.05),
                          n_samples=24) -> dict:
    """Empirical constants for the two local kernel bounds.

    c_of_delta[i]: min over the grid of min_{z in S(a_delta)} |B_a(z)| * w(S(a));
    bracket_of_r[i]: extreme of |B_a(z)| / B_a(a) over pseudodiscs Delta(a, r).
    delta_hat / r_hat are the largest parameters at which the respective
    bound still holds with a nondegenerate constant.
    """
    from .geometry import boundary_point, carleson_square, pseudo_disc

    if grid is None:
        grid = [0.5, 0.75, 0.9, 0.97, 0.99]
    ser = _series(w)
    c_of_delta = []
    for d in deltas:
        worst = math.inf
        for a in grid:
            a = complex(a)
            ad = boundary_point(a, d)
            sq = carleson_square(ad)
            rr = np.linspace(sq.inner_radius, 1.0 - 0.25 * (1.0 - sq.inner_radius),
                             n_samples // 4)
            th = sq.arc.center_angle + sq.arc.width / 2.0 * np.linspace(-1, 1, 4)
            zs = (rr[:, None] * np.exp(1j * th[None, :])).ravel()
            vals = np.abs(ser.eval(a, zs))
            worst = min(worst, float(vals.min()) * w.box_mass(a))
        c_of_delta.append(worst)
    c_floor = 1e-6
    delta_hat = 0.0
    c_hat = 0.0
    for d, cv in zip(deltas, c_of_delta):
        if cv >= c_floor and d > delta_hat:
            delta_hat, c_hat = d, cv

    bracket_of_r = []
    r_hat = 0.0
    for rr in radii:
        lo, hi = math.inf, 0.0
        for a in grid:
            a = complex(a)
            disc = pseudo_disc(a, rr)
            zs = disc.boundary_points(n_samples)
            ratios = np.abs(ser.eval(a, zs)) / ser.diag(abs(a))
            lo = min(lo, float(ratios.min()))
            hi = max(hi, float(ratios.max()))
        bracket_of_r.append((lo, hi))
        if lo >= 0.5 and hi <= 2.0 and rr > r_hat:
            r_hat = rr
    return {
        "deltas": list(deltas),
        "c_of_delta": c_of_delta,
        "delta_hat": delta_hat,
        "c_hat": c_hat,
        "radii": list(radii),
        "bracket_of_r": bracket_of_r,
        "r_hat": r_hat,
    }
