"""Positive Borel measures on the disc: point masses, radial densities,
general area densities, and pull-backs under an analytic symbol.

Region masses are exact for atoms, quadrature for densities, and
deterministic cell classification (with an inner/outer bracket as the error
estimate) for pull-backs.  Radial densities additionally expose batched
monomial moments m_k = int r^k v(r) dr through the same machinery as the
weights, which is what makes Toeplitz matrices and Berezin transforms of
radial measures exact moment ratios.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field

import numpy as np

from . import _core
from .geometry import (
    Annulus,
    CarlesonSquare,
    DyadicRectangle,
    PseudoDisc,
    TWO_PI,
    pseudo_disc,
)
from .quadrature import (
    DEFAULT_SPEC,
    QuadratureError,
    integrate_interval,
    integrate_radial,
    integrate_region,
    _panel_nodes,
)
from .weights import RadialWeight, dyadic_grid, _moment_panels


class MeasureError(ValueError):
    pass


# ---------------------------------------------------------------------------
# small expression grammar for radial densities: r, numbers, + - * / ^,
# log, exp, parentheses
# ---------------------------------------------------------------------------

_TOKEN = re.compile(
    r"\s*(?:(?P<num>\d+(?:\.\d*)?(?:[eE][+-]?\d+)?)|(?P<name>[a-zA-Z_]+)"
    r"|(?P<op>[()+\-*/^]))"
)


def parse_radial_expr(text: str):
    """Compile the radial-density grammar into a vectorized callable of r."""
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise MeasureError(f"bad token at {text[pos:]!r}")
        tokens.append(m)
        pos = m.end()
    tokens.append(None)  # sentinel
    idx = 0

    def peek():
        return tokens[idx]

    def take():
        nonlocal idx
        t = tokens[idx]
        idx += 1
        return t

    def parse_sum():
        node = parse_product()
        while peek() is not None and peek().group("op") in ("+", "-"):
            op = take().group("op")
            rhs = parse_product()
            node = (lambda f, g, op: (lambda r: f(r) + g(r) if op == "+" else f(r) - g(r)))(node, rhs, op)
        return node

    def parse_product():
        node = parse_power()
        while peek() is not None and peek().group("op") in ("*", "/"):
            op = take().group("op")
            rhs = parse_power()
            node = (lambda f, g, op: (lambda r: f(r) * g(r) if op == "*" else f(r) / g(r)))(node, rhs, op)
        return node

    def parse_power():
        base = parse_atom()
        if peek() is not None and peek().group("op") == "^":
            take()
            expo = parse_power()  # right associative
            return lambda r, f=base, g=expo: f(r) ** g(r)
        return base

    def parse_atom():
        t = take()
        if t is None:
            raise MeasureError("unexpected end of expression")
        if t.group("num"):
            val = float(t.group("num"))
            return lambda r, v=val: np.full_like(np.asarray(r, dtype=float), v)
        if t.group("name"):
            name = t.group("name")
            if name == "r":
                return lambda r: np.asarray(r, dtype=float)
            if name in ("log", "exp"):
                t2 = take()
                if t2 is None or t2.group("op") != "(":
                    raise MeasureError(f"{name} needs parentheses")
                inner = parse_sum()
                t3 = take()
                if t3 is None or t3.group("op") != ")":
                    raise MeasureError("unbalanced parentheses")
                fn = np.log if name == "log" else np.exp
                return lambda r, f=inner, fn=fn: fn(f(r))
            raise MeasureError(f"unknown name {name!r}")
        op = t.group("op")
        if op == "(":
            inner = parse_sum()
            t2 = take()
            if t2 is None or t2.group("op") != ")":
                raise MeasureError("unbalanced parentheses")
            return inner
        if op == "-":
            inner = parse_atom()
            return lambda r, f=inner: -f(r)
        if op == "+":
            return parse_atom()
        raise MeasureError(f"unexpected {op!r}")

    fn = parse_sum()
    if peek() is not None:
        raise MeasureError(f"trailing input near {peek().group(0)!r}")
    return fn


# ---------------------------------------------------------------------------


@dataclass
class Measure:
    kind: str  # 'atoms' | 'radial' | 'area' | 'pullback'
    atoms: np.ndarray | None = None          # complex locations
    atom_weights: np.ndarray | None = None
    radial_fn: object = None                 # v(r), density wrt normalized dA
    moment_weight: RadialWeight | None = None  # delegate moments to a weight
    area_fn: object = None                   # v(z) >= 0
    symbol: object = None                    # pullback data
    base_weight: RadialWeight | None = None
    support: float = 1.0                      # radial densities vanish beyond
    breakpoints: tuple = ()
    scale: float = 1.0
    name: str = ""
    _moments: np.ndarray | None = field(default=None, repr=False)
    _moment_nodes: tuple | None = field(default=None, repr=False)

    # -- constructors -------------------------------------------------------

    @classmethod
    def point_masses(cls, atoms) -> "Measure":
        locs = np.asarray([complex(a) for a, _ in atoms], dtype=complex)
        wts = np.asarray([float(wt) for _, wt in atoms], dtype=float)
        if np.any(wts <= 0):
            raise MeasureError("point masses must be positive")
        if np.any(np.abs(locs) >= 1.0):
            raise MeasureError("atoms must lie inside the disc")
        return cls(kind="atoms", atoms=locs, atom_weights=wts,
                   name=f"atoms[{len(wts)}]")

    @classmethod
    def radial_density(cls, fn, support=1.0, breakpoints=(), name="radial") -> "Measure":
        if isinstance(fn, str):
            fn = parse_radial_expr(fn)
        return cls(kind="radial", radial_fn=fn, support=float(support),
                   breakpoints=tuple(breakpoints), name=name)

    @classmethod
    def weight_area(cls, w: RadialWeight) -> "Measure":
        """The measure w dA; moments delegate to the weight's own table, so
        Toeplitz entries built from it are exact moment ratios."""
        return cls(kind="radial", radial_fn=w.density, moment_weight=w,
                   name=f"{w.name} dA")

    @classmethod
    def area_density(cls, fn, name="area") -> "Measure":
        return cls(kind="area", area_fn=fn, name=name)

    @classmethod
    def pullback(cls, symbol, w: RadialWeight) -> "Measure":
        return cls(kind="pullback", symbol=symbol, base_weight=w,
                   name=f"pullback[{getattr(symbol, 'name', 'phi')}, {w.name}]")

    @classmethod
    def from_json(cls, obj: dict) -> "Measure":
        t = obj["type"]
        if t == "point":
            return cls.point_masses(
                [(complex(a[0], a[1]), a[2]) for a in obj["atoms"]]
            )
        if t == "radial_density":
            return cls.radial_density(obj["expr"], name=obj["expr"])
        if t == "pullback":
            from .composition import Symbol
            from .weights import RadialWeight as RW
            return cls.pullback(
                Symbol.from_json(obj["symbol"]), RW.from_json(obj["weight"])
            )
        raise MeasureError(f"unknown measure type {t!r}")

    def scaled(self, t: float) -> "Measure":
        import copy
        out = copy.copy(self)
        out.scale = self.scale * float(t)
        out._moments = None
        return out

    # -- moments of radial densities -----------------------------------------

    def radial_moments(self, k_max: int) -> np.ndarray:
        """m_k = int_0^1 r^k v(r) dr, k = 0..k_max (radial measures only)."""
        if self.kind != "radial":
            raise MeasureError("radial moments need a radial density")
        if self.moment_weight is not None:
            return self.scale * self.moment_weight.moments(k_max)
        if self._moments is None or self._moments.size <= k_max:
            target = max(256, 1 << int(math.ceil(math.log2(k_max + 1))))
            self._moments = self._compute_moments(target)
        return self._moments[: k_max + 1]

    def _compute_moments(self, count: int) -> np.ndarray:
        if self._moment_nodes is None:
            edges = _moment_panels()
            cut = {-math.log1p(-b) for b in self.breakpoints if 0 < b < 1}
            if self.support < 1.0:
                cut.add(-math.log1p(-self.support))
            if cut:
                edges = np.unique(np.concatenate([edges, sorted(cut)]))
            nodes, wts = _panel_nodes(edges)
            rn = -np.expm1(-nodes)
            vals = np.asarray(self.radial_fn(rn), dtype=float)
            if self.support < 1.0:
                vals = np.where(rn < self.support, vals, 0.0)
            weights = wts * vals * np.exp(-nodes)
            # densities whose transformed tail has not decayed by the float64
            # horizon would lose real boundary mass silently; refuse those
            # (integrable-power tails cost < 3e-7 relative and pass)
            tail = np.abs(weights[-45:]).sum()
            if tail > 3e-7 * max(np.abs(weights).sum(), 1e-300):
                raise MeasureError(
                    f"density {self.name!r} keeps mass beyond float64 reach; "
                    "wrap it as a RadialWeight (closed tail) and use "
                    "Measure.weight_area"
                )
            self._moment_nodes = (rn, weights)
        rn, wn = self._moment_nodes
        return self.scale * _core.power_moments(rn, wn, 0, count)

    def total_mass(self) -> float:
        return self.mass(Annulus(0.0, 1.0))

    # -- region masses --------------------------------------------------------

    def mass(self, region, spec=DEFAULT_SPEC) -> float:
        """mu(region) for any of the geometry module's region kinds."""
        if self.kind == "atoms":
            inside = region.contains(self.atoms)
            return self.scale * float(self.atom_weights[np.asarray(inside, dtype=bool)].sum())

        if self.kind == "radial":
            if isinstance(region, PseudoDisc):
                return self.scale * _radial_disc_mass(
                    self._clipped_radial(), abs(region.euclid_center),
                    region.euclid_radius, spec,
                    breakpoints=self.breakpoints
                    + ((self.support,) if self.support < 1.0 else ()),
                )
            arc_frac, ra, rb = _band_of(region)
            if self.support < 1.0:
                rb = min(rb, self.support)
                if rb <= ra:
                    return 0.0
            if self.moment_weight is not None and self.support >= 1.0:
                # exact band mass through the weight's tail first moment
                v = self.moment_weight.tail_first_moment
                upper = 0.0 if rb >= 1.0 else v(rb)
                return self.scale * arc_frac * 2.0 * (v(ra) - upper)
            # radial reduction: 2 * int v(s) s ds * (arc / 2pi)
            res = integrate_radial(
                lambda s: 2.0 * np.asarray(self.radial_fn(s), dtype=float) * s,
                ra, spec, r1=rb, breakpoints=self.breakpoints,
            )
            return self.scale * arc_frac * res.require("radial mass")

        if self.kind == "area":
            res = integrate_region(self.area_fn, region, None, spec)
            return self.scale * res.require("area mass")

        # pullback: classify a boundary-refined polar grid of cells by
        # whether the symbol maps their center into the region
        inner, outer = self._pullback_mass_bracket(region)
        return self.scale * 0.5 * (inner + outer)

    def mass_error(self, region) -> float:
        if self.kind != "pullback":
            return 0.0
        inner, outer = self._pullback_mass_bracket(region)
        return self.scale * 0.5 * (outer - inner)

    def _clipped_radial(self):
        if self.support >= 1.0:
            return self.radial_fn
        return lambda s: np.where(
            np.asarray(s) < self.support,
            np.asarray(self.radial_fn(s), dtype=float), 0.0,
        )

    def _pullback_mass_bracket(self, region, depth=11, n_theta=512,
                               radial_sub=24):
        """Deterministic inner/outer Riemann bracket for omega(phi^-1(region)):
        polar cells refined dyadically toward the boundary, each dyadic band
        split into radial_sub sub-rings, classified at center + 4 corners."""
        phi = self.symbol
        w = self.base_weight
        band_edges = np.concatenate([[0.0], dyadic_grid(depth), [1.0]])
        theta = TWO_PI * (np.arange(n_theta) + 0.5) / n_theta
        eitheta = np.exp(1j * theta)
        inner = outer = 0.0
        for ba, bb in zip(band_edges[:-1], band_edges[1:]):
            sub = np.linspace(ba, bb, radial_sub + 1)
            for ra, rb in zip(sub[:-1], sub[1:]):
                rb_eff = min(rb, 1.0 - 1e-12)
                cell_mass = (
                    w.tail_first_moment(ra)
                    - (w.tail_first_moment(rb) if rb < 1.0 else 0.0)
                ) * 2.0 / n_theta
                rc = 0.5 * (ra + rb_eff)
                vals_c = np.asarray(region.contains(phi(rc * eitheta)), dtype=bool)
                corners = [
                    r * np.exp(1j * (theta + dt))
                    for r in (ra + 1e-15, rb_eff)
                    for dt in (-math.pi / n_theta, math.pi / n_theta)
                ]
                vals_corner = np.stack([
                    np.asarray(region.contains(phi(zz)), dtype=bool)
                    for zz in corners
                ])
                all_in = vals_c & vals_corner.all(axis=0)
                any_in = vals_c | vals_corner.any(axis=0)
                inner += cell_mass * float(all_in.sum())
                outer += cell_mass * float(any_in.sum())
        return inner, outer

    # -- Berezin-type building blocks -----------------------------------------

    def monomial_integrals(self, N: int, spec=DEFAULT_SPEC) -> np.ndarray:
        """The matrix M[m, n] = int zeta^n conj(zeta)^m dmu, 0 <= m, n <= N."""
        if self.kind == "atoms":
            P = self.atoms[None, :] ** np.arange(N + 1)[:, None]   # P[n, i]
            return self.scale * np.einsum("i,ni,mi->mn", self.atom_weights, P, np.conj(P))
        if self.kind == "radial":
            m = self.radial_moments(2 * N + 1)
            return np.diag(2.0 * m[2 * np.arange(N + 1) + 1]).astype(complex)
        # pullback / area: polar-grid product quadrature, exact for
        # polynomial symbols once the angular grid is long enough
        return self._grid_monomials(N)

    def _grid_monomials(self, N: int, n_rad=240, n_theta=None):
        from numpy.polynomial.legendre import leggauss
        if self.kind == "pullback":
            deg = getattr(self.symbol, "degree", 8)
        else:
            deg = 16
        if n_theta is None:
            n_theta = max(256, 1 << int(math.ceil(math.log2(2 * N * max(deg, 1) + 8))))
        x, wx = leggauss(n_rad)
        r = 0.5 * (x + 1.0)
        wr = 0.5 * wx
        theta = TWO_PI * np.arange(n_theta) / n_theta
        z = r[:, None] * np.exp(1j * theta[None, :])
        if self.kind == "pullback":
            vals = self.symbol(z)
            dens = self.base_weight.density(r)[:, None] * np.ones((1, n_theta))
        else:
            vals = z
            dens = np.asarray(self.area_fn(z), dtype=float)
        cellw = (2.0 * r * wr)[:, None] * dens / n_theta
        P = np.empty((N + 1, n_rad * n_theta), dtype=complex)
        flat = vals.ravel()
        P[0] = 1.0
        for n in range(1, N + 1):
            P[n] = P[n - 1] * flat
        A = (P * cellw.ravel()[None, :]) @ np.conj(P).T  # A[n, m]
        return self.scale * A.T  # M[m, n] = int phi^n conj(phi)^m ...

    def kernel_l2_mass(self, series, z, spec=DEFAULT_SPEC) -> float:
        """||B_z||^2_{L^2_mu} for the kernel series of some weight."""
        z = complex(z)
        if self.kind == "atoms":
            vals = series.eval(z, self.atoms)
            return self.scale * float(self.atom_weights @ np.abs(vals) ** 2)
        if self.kind == "radial":
            r2 = abs(z) ** 2
            n = series.n_needed(r2 * self.support ** 2 if self.support < 1 else r2)
            c = series.coeffs(n)
            m = self.radial_moments(2 * n + 1)
            coeffs = c * c * 2.0 * m[2 * np.arange(n + 1) + 1]
            return float(_core.poly_eval(coeffs, r2))
        if self.kind == "pullback":
            def g(u):
                vals = self.symbol(u)
                return np.abs(series.eval(z, vals)) ** 2
            res = integrate_region(g, Annulus(0.0, 1.0), self.base_weight, spec)
            return self.scale * res.require("pullback kernel mass")
        def g(u):
            return np.abs(series.eval(z, u)) ** 2 * np.asarray(self.area_fn(u), dtype=float)
        res = integrate_region(g, Annulus(0.0, 1.0), None, spec)
        return self.scale * res.require("area kernel mass")


def _radial_disc_mass(fn, c, R, spec=DEFAULT_SPEC, breakpoints=()):
    """Mass of the radial density fn w.r.t. normalized area over the
    euclidean disc D(c, R), via the circle-intersection arc fraction:

       mass = 2 int fn(s) * frac(s) * s ds,
       frac(s) = arccos((s^2 + c^2 - R^2) / (2 c s)) / pi  (clipped).
    """
    c = abs(float(c))
    lo = max(0.0, c - R)
    hi = min(1.0, c + R)
    if hi <= lo:
        return 0.0
    if c < 1e-14:
        def integrand(s):
            return 2.0 * np.asarray(fn(s), dtype=float) * s
    else:
        def integrand(s):
            s = np.asarray(s, dtype=float)
            cosang = (s * s + c * c - R * R) / (2.0 * c * np.maximum(s, 1e-300))
            frac = np.arccos(np.clip(cosang, -1.0, 1.0)) / math.pi
            return 2.0 * np.asarray(fn(s), dtype=float) * frac * s

    cuts = tuple(b for b in breakpoints if lo < b < hi)
    if hi >= 1.0:
        res = integrate_radial(integrand, lo, spec, breakpoints=cuts)
    else:
        res = integrate_interval(integrand, lo, hi, spec, breakpoints=cuts)
    return res.require("pseudodisc mass")


def _band_of(region):
    """(arc fraction, r_inner, r_outer) of a band-with-arc region."""
    if isinstance(region, CarlesonSquare):
        return region.arc.width / TWO_PI, region.inner_radius, 1.0
    if isinstance(region, DyadicRectangle):
        frac = 1.0 if region.level == 0 else region.arc.width / TWO_PI
        return frac, (region.r_inner if region.level > 0 else 0.0), region.r_outer
    if isinstance(region, Annulus):
        frac = 1.0 if region.arc is None else region.arc.width / TWO_PI
        return frac, region.r_inner, region.r_outer
    raise TypeError(f"unsupported region {type(region).__name__}")


# ---------------------------------------------------------------------------


def mass(mu: Measure, region, spec=DEFAULT_SPEC) -> float:
    return mu.mass(region, spec)


def mu_hat_r(mu: Measure, w: RadialWeight, z, r: float, spec=DEFAULT_SPEC) -> float:
    """Pseudohyperbolic average mu(Delta(z, r)) / omega(Delta(z, r))."""
    disc = pseudo_disc(z, r)
    num = mu.mass(disc, spec)
    den = _radial_disc_mass(w.density, abs(disc.euclid_center),
                            disc.euclid_radius, spec)
    if den < spec.abs_floor:
        raise QuadratureError("omega(Delta) below the absolute floor")
    return num / den


@dataclass
class CarlesonConstant:
    exponent: float
    sup_value: float
    argmax_center: complex
    grid_depth: int
    vanishing_tail: np.ndarray  # per-level sup over |I| <= 2^-j

    def to_json(self) -> dict:
        return {
            "exponent": self.exponent,
            "sup_value": self.sup_value,
            "argmax_center": [self.argmax_center.real, self.argmax_center.imag],
            "grid_depth": self.grid_depth,
            "vanishing_tail": list(map(float, self.vanishing_tail)),
        }


def carleson_constant(mu: Measure, w: RadialWeight, gamma: float,
                      depth: int = 12, spec=DEFAULT_SPEC) -> CarlesonConstant:
    """sup over a boundary-refined center grid of mu(S(a)) / omega(S(a))^gamma,
    with the per-level tail used for the vanishing (compactness) variant.

    Radial measures need no angular sweep; others use 2^min(j, 8) angles.
    """
    if gamma <= 0:
        raise MeasureError("gamma must be positive")
    radial = mu.kind == "radial" or (
        mu.kind == "atoms"
        and bool(np.allclose(np.imag(mu.atoms), 0.0))
        and bool(np.all(np.real(mu.atoms) >= 0.0))
    )
    best = -math.inf
    best_a = 0.5 + 0.0j
    level_sup = np.full(depth, -math.inf)
    for j in range(1, depth + 1):
        rj = 1.0 - 2.0 ** (-j)
        n_ang = 1 if radial else 2 ** min(j, 8)
        angles = TWO_PI * np.arange(n_ang) / n_ang
        for th in angles:
            a = rj * math.cos(th) + 1j * rj * math.sin(th)
            from .geometry import carleson_square
            sq = carleson_square(a)
            val = mu.mass(sq, spec) / w.box_mass(a) ** gamma
            if val > best:
                best, best_a = val, a
            level_sup[j - 1] = max(level_sup[j - 1], val)
    # vanishing tail: sup over levels >= j
    tail = np.maximum.accumulate(level_sup[::-1])[::-1]
    return CarlesonConstant(
        exponent=gamma,
        sup_value=float(best),
        argmax_center=best_a,
        grid_depth=depth,
        vanishing_tail=tail,
    )
