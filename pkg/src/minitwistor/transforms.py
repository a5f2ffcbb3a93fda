"""Minitwistor chart, contour-integral harmonic functions, and the X-ray transform.

For ``n = 2`` the stereographic coordinate ``lam = (u1 + i u2)/(1 - u3)``
identifies S^2 with CP^1, and the section of a point ``x`` becomes the
quadratic ``mu(lam) = (x1 + i x2) + 2 lam x3 - lam^2 (x1 - i x2)``. Its roots are

    lam_plus  = (x3 + r)/(x1 - i x2),   mu'(lam_plus)  = -2r
    lam_minus = -(x1 + i x2)/(x3 + r),  mu'(lam_minus) = +2r

with ``r = |x|``. Integrating ``f(lam, mu(lam; x))`` over a closed contour
gives a harmonic function of ``x`` because ``grad_x mu`` is a null vector.

The X-ray transform of a field on R^3 is charted by
``t -> (a1 + t b1, a2 + t b2, t)``; in that chart it satisfies
``d2g/da1 db2 = d2g/da2 db1``.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import scipy.integrate

from .errors import ContourError, DegenerateError, InputError
from .lines import OrientedLine, normalize_line
from .numerics import DEFAULT_FD, FDConfig, fd_laplacian_flat

POLE_MARGIN = 1e-6


def _vec3(x, name="x") -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape != (3,) or not np.all(np.isfinite(x)):
        raise InputError(f"{name} must be a finite vector in R^3")
    return x


def stereographic(u) -> complex:
    u = _vec3(u, "u")
    if abs(1.0 - u[2]) < 1e-15:
        raise DegenerateError("north pole maps to the point at infinity")
    return complex(u[0], u[1]) / (1.0 - u[2])


def inverse_stereographic(lam: complex) -> np.ndarray:
    m = abs(lam) ** 2
    return np.array([2 * lam.real, 2 * lam.imag, m - 1.0]) / (m + 1.0)


def mu_polynomial(x, lam: complex) -> complex:
    x = _vec3(x)
    return complex(x[0], x[1]) + 2 * lam * x[2] - lam**2 * complex(x[0], -x[1])


def mu_derivative(x, lam: complex) -> complex:
    x = _vec3(x)
    return 2 * x[2] - 2 * lam * complex(x[0], -x[1])


def mu_roots(x) -> tuple[complex | None, complex | None]:
    """``(lam_plus, lam_minus)``; ``None`` marks a root at infinity.

    Each root is computed from whichever of its two algebraically equal forms
    avoids cancellation.
    """
    x = _vec3(x)
    r = float(np.linalg.norm(x))
    if r == 0:
        raise DegenerateError("mu vanishes identically at the origin")
    w = complex(x[0], x[1])
    wbar = w.conjugate()
    if x[2] >= 0:
        plus = (x[2] + r) / wbar if wbar != 0 else None
        minus = -w / (x[2] + r)
    else:
        plus = -w / (x[2] - r)
        minus = (x[2] - r) / wbar if wbar != 0 else None
    return plus, minus


def _dlam(u) -> np.ndarray:
    """Complex differential of the stereographic chart at ``u``."""
    d = 1.0 - u[2]
    return np.array([1.0 / d, 1j / d, complex(u[0], u[1]) / d**2])


def minitwistor_pushforward_check(p, u, fd: bool = False, cfg: FDConfig = DEFAULT_FD) -> float:
    """``|dlam(s(u)) - mu(lam(u); p)/2|`` for the section ``s(u) = p - (p.u) u``.

    Vanishing means the section is the real vector field ``Re(mu d/dlam)``.
    """
    p = _vec3(p, "p")
    u = _vec3(u, "u")
    lam = stereographic(u)
    s = p - (p @ u) * u
    if fd:
        ns = np.linalg.norm(s)
        if ns == 0:
            dl = 0j
        else:
            e = s / ns
            along = lambda t: stereographic(np.cos(t) * u + np.sin(t) * e)
            central = lambda h: (along(h) - along(-h)) / (2 * h)
            # one Richardson level: the chart derivative grows quickly near the north pole
            dl = ns * (4 * central(cfg.step / 2) - central(cfg.step)) / 3
    else:
        dl = complex(_dlam(u) @ s)
    return abs(dl - mu_polynomial(p, lam) / 2)


def circle_section_coefficient(x, phi: float) -> float:
    """Coefficient of d/dphi in the section of ``x`` in R^2 at angle ``phi``.

    Equals ``-x1 sin(phi) + x2 cos(phi) = Re(i (x1 - i x2) exp(i phi))``.
    """
    x = np.asarray(x, dtype=float)
    return float(-x[0] * math.sin(phi) + x[1] * math.cos(phi))


# ---------------------------------------------------------------------------
# Contour integrals
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TwistorFunctionSpec:
    """``f(lam, mu) = sum c lam^a mu^(-b)`` over ``terms = [(c, a, b), ...]``."""

    terms: tuple = ()

    def __post_init__(self):
        clean = []
        for term in self.terms:
            c, a, b = term
            if int(a) != a or a < 0 or int(b) != b or b < 1:
                raise InputError(f"term {term}: need integer a >= 0 and b >= 1")
            clean.append((complex(c), int(a), int(b)))
        object.__setattr__(self, "terms", tuple(clean))

    def __call__(self, lam, mu):
        return sum(c * lam**a * mu ** (-b) for c, a, b in self.terms) if self.terms else 0 * lam

    @property
    def has_poles(self) -> bool:
        return any(c != 0 for c, _, _ in self.terms)

    def to_json(self) -> dict:
        return {"terms": [{"re": c.real, "im": c.imag, "a": a, "b": b} for c, a, b in self.terms]}

    @classmethod
    def from_json(cls, obj: dict) -> "TwistorFunctionSpec":
        try:
            return cls(tuple((complex(t.get("re", 0.0), t.get("im", 0.0)), t["a"], t["b"]) for t in obj["terms"]))
        except (KeyError, TypeError, AttributeError):
            raise InputError('twistor function JSON must be {"terms": [{"re","im","a","b"}, ...]}') from None


@dataclass(frozen=True)
class ContourSpec:
    center: complex = 0j
    radius: float = 1.0
    nodes: int = 256
    kind: str = "circle"

    def __post_init__(self):
        object.__setattr__(self, "center", complex(self.center))
        if self.kind != "circle":
            raise InputError(f"unsupported contour kind {self.kind!r}")
        if not self.radius > 0:
            raise InputError("contour radius must be positive")
        if int(self.nodes) != self.nodes or self.nodes < 16:
            raise InputError("contour needs at least 16 nodes")
        object.__setattr__(self, "nodes", int(self.nodes))

    def to_json(self) -> dict:
        return {"center": [self.center.real, self.center.imag], "radius": self.radius, "nodes": self.nodes}

    @classmethod
    def from_json(cls, obj: dict) -> "ContourSpec":
        try:
            c = obj.get("center", [0.0, 0.0])
            return cls(complex(c[0], c[1]), float(obj["radius"]), int(obj.get("nodes", 256)))
        except (KeyError, TypeError, IndexError):
            raise InputError('contour JSON must be {"center": [re, im], "radius": r, "nodes": N}') from None


def check_contour(x, contour: ContourSpec) -> None:
    """Raise :class:`ContourError` if a root of ``mu(.; x)`` is near the contour."""
    for root in mu_roots(x):
        if root is None:
            continue
        gap = abs(abs(root - contour.center) - contour.radius)
        if gap < POLE_MARGIN * contour.radius:
            raise ContourError(
                f"pole at lam = {root:.6g} lies within {gap:.3g} of the contour", pole=root
            )


def contour_around_root(x, which: str = "minus", frac: float = 0.5, nodes: int = 256) -> ContourSpec:
    """Circle centred on one root of ``mu(.; x)`` that excludes the other."""
    plus, minus = mu_roots(x)
    root, other = (minus, plus) if which == "minus" else (plus, minus)
    if root is None:
        raise DegenerateError(f"root lam_{which} is at infinity for this x")
    radius = frac * abs(other - root) if other is not None else 1.0
    return ContourSpec(root, radius, nodes)


def whittaker_eval(spec: TwistorFunctionSpec, x, contour: ContourSpec) -> complex:
    """Trapezoid-rule value of ``oint f(lam, mu(lam; x)) dlam`` over a circle."""
    x = _vec3(x)
    if not spec.has_poles:
        return 0j
    check_contour(x, contour)
    N = contour.nodes
    theta = 2 * np.pi * np.arange(N) / N
    z = np.exp(1j * theta)
    lam = contour.center + contour.radius * z
    mu = complex(x[0], x[1]) + 2 * lam * x[2] - lam**2 * complex(x[0], -x[1])
    vals = spec(lam, mu) * 1j * contour.radius * z
    return complex(vals.sum() * (2 * np.pi / N))


def residue_value(x, a: int = 0, which: str = "minus") -> complex:
    """Closed form ``2 pi i lam^a / mu'(lam)`` for ``f = lam^a / mu`` around one root."""
    plus, minus = mu_roots(x)
    root = minus if which == "minus" else plus
    if root is None:
        raise DegenerateError("root at infinity")
    return 2j * math.pi * root**a / mu_derivative(x, root)


def harmonicity_residual(spec: TwistorFunctionSpec, x, contour: ContourSpec,
                         cfg: FDConfig = DEFAULT_FD) -> float:
    """``|Delta V(x)|`` for ``V = whittaker_eval(spec, ., contour)``, real and imaginary parts."""
    x = _vec3(x)
    try:
        lap = fd_laplacian_flat(lambda y: whittaker_eval(spec, y, contour), x, cfg)
    except ContourError as exc:
        raise ContourError(
            f"contour invalid on the FD stencil ({exc}); choose a contour with a larger pole margin",
            pole=exc.pole,
        ) from None
    return float(abs(lap))


def harmonicity_scale(spec: TwistorFunctionSpec, x, contour: ContourSpec,
                      cfg: FDConfig = DEFAULT_FD) -> float:
    """Local scale for :func:`harmonicity_residual`.

    ``max(|V(x)|, sum_i |d2V/dx_i^2|)``: the residual is a cancellation
    between the second-derivative terms, so it is judged relative to them.
    """
    x = _vec3(x)
    V = lambda y: whittaker_eval(spec, y, contour)
    v0 = V(x)
    h = cfg.step
    terms = 0.0
    for i in range(3):
        e = np.zeros(3)
        e[i] = h
        terms += abs(V(x + e) - 2 * v0 + V(x - e)) / h**2
    return float(max(abs(v0), terms))


# ---------------------------------------------------------------------------
# X-ray transform
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Bump:
    A: float
    c: tuple
    w: float

    def __post_init__(self):
        c = tuple(float(t) for t in self.c)
        if len(c) != 3:
            raise InputError("bump centre must be in R^3")
        if not self.w > 0:
            raise InputError("bump width must be positive")
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "A", float(self.A))
        object.__setattr__(self, "w", float(self.w))


@dataclass(frozen=True)
class FieldSpec:
    """``f(x) = sum A exp(-|x - c|^2 / w^2)`` over Gaussian bumps."""

    bumps: tuple = ()

    def __post_init__(self):
        object.__setattr__(
            self, "bumps", tuple(b if isinstance(b, Bump) else Bump(*b) for b in self.bumps)
        )

    def __call__(self, x) -> float:
        x = np.asarray(x, dtype=float)
        return float(sum(b.A * math.exp(-np.sum((x - b.c) ** 2) / b.w**2) for b in self.bumps))

    def translated(self, shift) -> "FieldSpec":
        shift = np.asarray(shift, dtype=float)
        return FieldSpec(tuple(Bump(b.A, np.add(b.c, shift), b.w) for b in self.bumps))

    def peak_transform(self) -> float:
        """Upper bound ``sum |A| sqrt(pi) w`` on any X-ray value."""
        return float(sum(abs(b.A) * math.sqrt(math.pi) * b.w for b in self.bumps))

    def to_json(self) -> dict:
        return {"bumps": [{"A": b.A, "c": list(b.c), "w": b.w} for b in self.bumps]}

    @classmethod
    def from_json(cls, obj: dict) -> "FieldSpec":
        try:
            return cls(tuple(Bump(b["A"], b["c"], b["w"]) for b in obj["bumps"]))
        except (KeyError, TypeError):
            raise InputError('field JSON must be {"bumps": [{"A","c","w"}, ...]}') from None


def xray_transform(field: FieldSpec, L: OrientedLine, method: str = "closed") -> float:
    """``int f(v + t u) dt`` over the whole line."""
    if L.u.size != 3:
        raise InputError("X-ray transform is defined for lines in R^3")
    if method == "closed":
        total = 0.0
        for b in field.bumps:
            d = np.asarray(b.c) - L.v
            perp = d - (d @ L.u) * L.u
            total += b.A * math.sqrt(math.pi) * b.w * math.exp(-(perp @ perp) / b.w**2)
        return total
    if method == "quad":
        total = 0.0
        for b in field.bumps:
            t0 = float((np.asarray(b.c) - L.v) @ L.u)
            g = lambda t, b=b: b.A * math.exp(-np.sum((L.point(t) - b.c) ** 2) / b.w**2)
            val, _ = scipy.integrate.quad(
                g, t0 - 12 * b.w, t0 + 12 * b.w, epsabs=1e-14, epsrel=1e-13, limit=200
            )
            total += val
        return total
    raise InputError(f"unknown X-ray method {method!r}")


def john_chart_to_line(chart) -> tuple[OrientedLine, float]:
    """Line ``t -> (a1 + t b1, a2 + t b2, t)`` and the speed ``|(b1, b2, 1)|``."""
    a1, a2, b1, b2 = (float(t) for t in chart)
    direction = np.array([b1, b2, 1.0])
    speed = float(np.linalg.norm(direction))
    return normalize_line(direction, [a1, a2, 0.0]), speed


def line_to_john_chart(L: OrientedLine) -> tuple[float, float, float, float]:
    u, v = L.u, L.v
    if L.u.size != 3 or abs(u[2]) < 1e-12:
        raise DegenerateError("line is parallel to the x3 = const planes; no chart")
    base = v - (v[2] / u[2]) * u
    return float(base[0]), float(base[1]), float(u[0] / u[2]), float(u[1] / u[2])


def john_transform(field: FieldSpec, chart) -> float:
    """X-ray transform in the chart parametrisation (``dt``, not arc length)."""
    L, speed = john_chart_to_line(chart)
    return xray_transform(field, L) / speed


def ultrahyperbolic_residual(g: Callable, chart, cfg: FDConfig = DEFAULT_FD) -> float:
    """``|d2g/da1 db2 - d2g/da2 db1|`` by nested central differences.

    ``g`` takes the four chart coordinates ``(a1, a2, b1, b2)``.
    """
    x = np.asarray(chart, dtype=float)
    h = cfg.step

    def mixed(i, j):
        ei = np.zeros(4)
        ej = np.zeros(4)
        ei[i] = h
        ej[j] = h
        return (g(*(x + ei + ej)) - g(*(x + ei - ej)) - g(*(x - ei + ej)) + g(*(x - ei - ej))) / (4 * h * h)

    return float(abs(mixed(0, 3) - mixed(1, 2)))


def john_residual(field: FieldSpec, chart, cfg: FDConfig = DEFAULT_FD) -> float:
    return ultrahyperbolic_residual(lambda *c: john_transform(field, c), chart, cfg)
