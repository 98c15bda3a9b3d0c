"""Composition operators C_phi on A^2_w for polynomial and finite Blaschke
symbols: matrices by power-series composition, pull-back measures, the
generalized Nevanlinna counting function, and the Schatten-side condition
integrals.

Symbols are restricted to forms with computable valence (= degree) and
root-solvable preimages; preimages come from companion-matrix eigenvalues
with one Newton polish, ordered by modulus then argument.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

from .measures import Measure
from .quadrature import DEFAULT_SPEC, integrate_interval
from .toeplitz import (
    OperatorMatrix,
    QuantityTrail,
    operational_verdict,
    schatten_norm,
)
from .weights import RadialWeight, dyadic_grid

BOUNDARY_MARGIN = 1e-10


class SymbolError(ValueError):
    pass


@dataclass
class Symbol:
    """Analytic self-map of the disc: polynomial or finite Blaschke product."""

    form: str                       # 'poly' | 'blaschke'
    coeffs: np.ndarray | None = None
    zeros: np.ndarray | None = None
    rotation: float = 0.0
    name: str = ""
    sup_certificate: float = field(default=0.0)

    def __post_init__(self):
        if self.form == "poly":
            self.coeffs = np.asarray(self.coeffs, dtype=complex)
            while self.coeffs.size > 1 and self.coeffs[-1] == 0:
                self.coeffs = self.coeffs[:-1]
        elif self.form == "blaschke":
            self.zeros = np.asarray(self.zeros, dtype=complex)
            if np.any(np.abs(self.zeros) >= 1.0):
                raise SymbolError("Blaschke zeros must lie inside the disc")
        else:
            raise SymbolError(f"unknown symbol form {self.form!r}")
        if not self.name:
            self.name = self.form
        theta = 2.0 * math.pi * np.arange(4096) / 4096
        vals = np.abs(self(np.exp(1j * theta)))
        self.sup_certificate = float(vals.max())
        if self.sup_certificate > 1.0 + 1e-9:
            raise SymbolError(
                f"not a self-map: boundary sup {self.sup_certificate:.6g} > 1"
            )

    # -- basic data ------------------------------------------------------------

    @property
    def degree(self) -> int:
        if self.form == "poly":
            return max(self.coeffs.size - 1, 0)
        return self.zeros.size

    @property
    def valence_bound(self) -> int:
        return max(self.degree, 1)

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        if self.form == "poly":
            out = np.polynomial.polynomial.polyval(z, self.coeffs)
        else:
            out = np.full(z.shape, cmath.exp(1j * self.rotation), dtype=complex)
            for a in self.zeros:
                out = out * (a - z) / (1.0 - np.conj(a) * z)
        return complex(out) if out.ndim == 0 else out

    def derivative(self, z):
        z = np.asarray(z, dtype=complex)
        if self.form == "poly":
            d = self.coeffs[1:] * np.arange(1, self.coeffs.size)
            out = np.polynomial.polynomial.polyval(z, d) if d.size else np.zeros_like(z)
            return complex(out) if out.ndim == 0 else out
        # logarithmic derivative of the product
        out = np.zeros(z.shape, dtype=complex)
        for a in self.zeros:
            out = out + (np.abs(a) ** 2 - 1.0) / ((a - z) * (1.0 - np.conj(a) * z))
        val = self(z) * out
        return complex(val) if np.ndim(val) == 0 else val

    def taylor(self, M: int) -> np.ndarray:
        """Taylor coefficients of the symbol itself up to order M."""
        if self.form == "poly":
            out = np.zeros(M + 1, dtype=complex)
            take = min(M + 1, self.coeffs.size)
            out[:take] = self.coeffs[:take]
            return out
        out = np.zeros(M + 1, dtype=complex)
        out[0] = cmath.exp(1j * self.rotation)
        for a in self.zeros:
            # (a - z)/(1 - conj(a) z) = a - (1-|a|^2) sum_{k>=1} conj(a)^(k-1) z^k
            fac = np.zeros(M + 1, dtype=complex)
            fac[0] = a
            if M >= 1:
                k = np.arange(1, M + 1)
                fac[1:] = -(1.0 - abs(a) ** 2) * np.conj(a) ** (k - 1)
            out = np.convolve(out, fac)[: M + 1]
        return out

    def preimages(self, z: complex) -> np.ndarray:
        """Solutions of phi(zeta) = z inside the disc, with multiplicity,
        ordered by increasing modulus then argument."""
        z = complex(z)
        if self.form == "poly":
            poly = self.coeffs.copy()
            poly[0] -= z
        else:
            # numerator(phi) - z * denominator(phi)
            num = np.array([cmath.exp(1j * self.rotation)], dtype=complex)
            den = np.array([1.0], dtype=complex)
            for a in self.zeros:
                num = np.convolve(num, np.array([a, -1.0]))
                den = np.convolve(den, np.array([1.0, -np.conj(a)]))
            n = max(num.size, den.size)
            num = np.pad(num, (0, n - num.size))
            den = np.pad(den, (0, n - den.size))
            poly = num - z * den
        while poly.size > 1 and abs(poly[-1]) < 1e-300:
            poly = poly[:-1]
        if poly.size <= 1:
            return np.empty(0, dtype=complex)
        roots = np.polynomial.polynomial.polyroots(poly)
        # one Newton polish
        for _ in range(2):
            fz = np.polynomial.polynomial.polyval(roots, poly)
            dz = np.polynomial.polynomial.polyval(
                roots, poly[1:] * np.arange(1, poly.size)
            )
            step = np.where(np.abs(dz) > 1e-30, fz / np.where(dz == 0, 1, dz), 0.0)
            roots = roots - step
        inside = roots[np.abs(roots) < 1.0 - BOUNDARY_MARGIN]
        order = np.lexsort((np.angle(inside), np.abs(inside)))
        return inside[order]

    @classmethod
    def poly(cls, coeffs, name=None) -> "Symbol":
        return cls(form="poly", coeffs=coeffs, name=name or "poly")

    @classmethod
    def blaschke(cls, zeros, rotation=0.0, name=None) -> "Symbol":
        return cls(form="blaschke", zeros=zeros, rotation=rotation,
                   name=name or "blaschke")

    @classmethod
    def from_json(cls, obj: dict) -> "Symbol":
        if obj["type"] == "poly":
            return cls.poly([complex(c[0], c[1]) for c in obj["coeffs"]])
        if obj["type"] == "blaschke":
            return cls.blaschke(
                [complex(c[0], c[1]) for c in obj["zeros"]],
                rotation=float(obj.get("rotation", 0.0)),
            )
        raise SymbolError(f"unknown symbol type {obj['type']!r}")

    def to_json(self) -> dict:
        if self.form == "poly":
            return {"type": "poly",
                    "coeffs": [[c.real, c.imag] for c in self.coeffs]}
        return {"type": "blaschke",
                "zeros": [[c.real, c.imag] for c in self.zeros],
                "rotation": self.rotation}


def power_coeffs(phi: Symbol, n: int, M: int) -> np.ndarray:
    """Taylor coefficients c_{n,0..M} of phi^n (exact for polynomials)."""
    if n < 0 or M < 0:
        raise SymbolError("need n >= 0 and M >= 0")
    out = np.zeros(M + 1, dtype=complex)
    out[0] = 1.0
    if n == 0:
        return out
    base = phi.taylor(M)
    acc = out
    for _ in range(n):
        acc = np.convolve(acc, base)[: M + 1]
    return acc


def _power_table(phi: Symbol, N: int, M: int) -> np.ndarray:
    """All rows c_{n, 0..M} for n = 0..N in one cumulative sweep."""
    table = np.zeros((N + 1, M + 1), dtype=complex)
    table[0, 0] = 1.0
    base = phi.taylor(M)
    for n in range(1, N + 1):
        table[n] = np.convolve(table[n - 1], base)[: M + 1]
    return table


def composition_matrix(phi: Symbol, w: RadialWeight, N: int,
                       M: int | None = None) -> OperatorMatrix:
    """C[m][n] = c_{n,m} sqrt(omega_{2m+1}/omega_{2n+1}), rows m = 0..M."""
    if M is None:
        M = max(2 * N, N * max(phi.degree, 1))
        M = min(M, 8 * N + 64)
    if M < N:
        raise SymbolError("row cutoff M must be at least N")
    table = _power_table(phi, N, M)      # [n, m]
    mom = w.moments(2 * M + 1)
    s = np.sqrt(2.0 * mom[2 * np.arange(M + 1) + 1])
    data = table.T * (s[:, None] / s[None, : N + 1])
    out = OperatorMatrix(data, w, provenance=f"composition[{phi.name}]")
    # column-convergence check: polynomial symbols are exact at M >= N*deg
    if phi.form != "poly" or M < N * max(phi.degree, 1):
        colmass = np.abs(table[N]) ** 2 * (2.0 * mom[2 * np.arange(M + 1) + 1])
        tail = colmass[-max(4, M // 8):].sum()
        if colmass.sum() > 0 and tail > 1e-10 * colmass.sum():
            out.provenance += " [row cutoff tail not converged]"
    return out


def pullback_measure(phi: Symbol, w: RadialWeight) -> Measure:
    """mu(E) = omega-mass of phi^{-1}(E); satisfies C*C = T_mu."""
    return Measure.pullback(phi, w)


def counting_function(phi: Symbol, w: RadialWeight, z) -> float:
    """N_{phi, omega_star}(z) = sum of omega_star over preimages of z."""
    z = complex(z)
    if abs(z - phi(0.0)) < 1e-3 * (1.0 - abs(phi(0.0))):
        raise SymbolError("counting function undefined at phi(0)")
    pre = phi.preimages(z)
    if pre.size == 0:
        return 0.0
    return float(np.sum(w.omega_star(np.abs(pre))))


def condition_integrals(phi: Symbol, w: RadialWeight, p: float,
                        depth: int = 10, n_angles: int = 64,
                        counting_exponent: float | None = None,
                        spec=DEFAULT_SPEC) -> dict:
    """The three Schatten-side conditions for C_phi with level trails:

    star_ratio: int (omega_star(z)/omega_star(phi z))^{p/2} w/omega_star dA
    derivative_ratio: int (omega_star/omega_star(phi))^{p/2} |phi'|^p
          (1-|z|^2)^{p-2} / (1-|phi z|^2)^p dA
    counting: int (N_{phi,omega_star}/omega_star)^{kappa} dA/(1-|.|)^2 with
    kappa = p/2 by default.

    Angular averaging uses a fixed grid (the criteria are level-resolved
    trails, not certified integrals); a pseudohyperbolic ball around phi(0)
    is excluded from the counting integrand.
    """
    if counting_exponent is None:
        counting_exponent = p / 2.0
    phi0 = complex(phi(0.0))
    theta = 2.0 * math.pi * (np.arange(n_angles) + 0.5) / n_angles
    eShift = np.exp(1j * theta)

    def level_values(fn):
        edges = np.concatenate([[0.0], dyadic_grid(depth)])
        totals = []
        run = 0.0
        for a, b in zip(edges[:-1], edges[1:]):
            def radial_fn(x):
                x = np.atleast_1d(np.asarray(x, dtype=float))
                out = np.empty(x.shape)
                for i, xx in enumerate(x):
                    out[i] = float(np.mean(fn(xx * eShift))) * 2.0 * xx
                return out
            run += integrate_interval(radial_fn, a, b, spec).value
            totals.append(run)
        return np.arange(1, depth + 1), np.asarray(totals)

    def ratio_omega_star(z):
        fz = phi(z)
        num = w.omega_star(np.abs(z))
        den = w.omega_star(np.clip(np.abs(fz), 1e-12, 1.0 - 1e-15))
        return num / den

    def star_ratio_fn(z):
        return ratio_omega_star(z) ** (p / 2.0) * w.density(np.abs(z)) \
            / w.omega_star(np.abs(z))

    def derivative_ratio_fn(z):
        fz = phi(z)
        az = np.abs(z)
        afz = np.abs(fz)
        return (
            ratio_omega_star(z) ** (p / 2.0)
            * np.abs(phi.derivative(z)) ** p
            * (1.0 - az ** 2) ** (p - 2.0)
            / (1.0 - afz ** 2) ** p
        )

    def fcount(z):
        z = np.atleast_1d(z)
        out = np.empty(z.shape)
        for i, zz in enumerate(z):
            if abs(zz - phi0) < 1e-3:
                out[i] = 0.0
                continue
            try:
                nv = counting_function(phi, w, zz)
            except SymbolError:
                out[i] = 0.0
                continue
            out[i] = (nv / w.omega_star(abs(zz))) ** counting_exponent
        return out / (1.0 - np.abs(z)) ** 2

    out = {}
    for key, fn in (("star_ratio", star_ratio_fn),
                    ("derivative_ratio", derivative_ratio_fn),
                    ("counting", fcount)):
        lv, partials = level_values(fn)
        out[key] = QuantityTrail(
            key, lv, partials, operational_verdict(partials),
        )
    return out


def schatten_composition(phi: Symbol, w: RadialWeight, p: float,
                         N_schedule=(64, 128, 256)) -> dict:
    """Schatten estimate of C_phi plus the |C|_p^2 = |T_pullback|_{p/2}
    cross-check through the coefficient-side Gram matrix."""
    N_max = max(N_schedule)
    C = composition_matrix(phi, w, N_max)
    est = schatten_norm(C, p, N_schedule)
    gram = OperatorMatrix(C.data.conj().T @ C.data, w, "C*C")
    est_gram = schatten_norm(gram, p / 2.0, N_schedule)
    gap = abs(est.value ** 2 - est_gram.value) / max(est_gram.value, 1e-300)
    return {
        "schatten": est,
        "gram_schatten": est_gram,
        "identity_gap": gap,
    }
