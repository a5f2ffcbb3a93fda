"""Dual numbers and the line geometry of Study.

An oriented line becomes a unit dual vector ``A = u + tau w`` with
``tau^2 = 0``. Two encodings are provided:

* the foot encoding ``w = v`` (any dimension), and
* the moment encoding ``w = v x u`` (R^3 only).

In the moment encoding the dot product of two lines is ``cos(theta + tau rho)``,
with ``theta`` the angle and ``rho`` the signed distance between them, and a
rigid motion ``x -> R x + c`` acts by the dual orthogonal matrix
``R + tau [c]_x R``. The foot encoding has unit dual norm but does not satisfy
the angle identity; :func:`foot_dual_defect` exhibits this.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import InputError
from .lines import OrientedLine

PARALLEL_TOL = 1e-8


@dataclass(frozen=True)
class DualScalar:
    a: float
    b: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.a) and math.isfinite(self.b)):
            raise InputError("dual number components must be finite")

    def _coerce(self, other):
        if isinstance(other, DualScalar):
            return other
        if isinstance(other, (int, float)):
            return DualScalar(float(other), 0.0)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return DualScalar(self.a + other.a, self.b + other.b)

    __radd__ = __add__

    def __neg__(self):
        return DualScalar(-self.a, -self.b)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return DualScalar(self.a - other.a, self.b - other.b)

    def __rsub__(self, other):
        return -self + other

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return dual_mul(self, other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        if other.a == 0:
            raise ZeroDivisionError("dual division by a pure dual number")
        return DualScalar(self.a / other.a, (self.b * other.a - self.a * other.b) / other.a**2)

    def conjugate(self) -> "DualScalar":
        return DualScalar(self.a, -self.b)

    def isclose(self, other, atol: float = 1e-12) -> bool:
        other = self._coerce(other)
        return abs(self.a - other.a) <= atol and abs(self.b - other.b) <= atol


def dual_mul(x: DualScalar, y: DualScalar) -> DualScalar:
    return DualScalar(x.a * y.a, x.a * y.b + x.b * y.a)


_DERIVATIVES: dict[Callable, Callable] = {
    math.cos: lambda t: -math.sin(t),
    math.sin: math.cos,
    math.exp: math.exp,
    np.cos: lambda t: -np.sin(t),
    np.sin: np.cos,
    np.exp: np.exp,
    math.sqrt: lambda t: 0.5 / math.sqrt(t),
    np.sqrt: lambda t: 0.5 / np.sqrt(t),
    math.log: lambda t: 1.0 / t,
    np.log: lambda t: 1.0 / t,
}

_BY_NAME = {"cos": math.cos, "sin": math.sin, "exp": math.exp, "sqrt": math.sqrt, "log": math.log}


def dual_apply(f, x: DualScalar, fprime: Callable | None = None) -> DualScalar:
    """Lift ``f`` to dual numbers: ``f(a + tau b) = f(a) + tau b f'(a)``.

    ``f`` may be a callable or one of ``"cos", "sin", "exp", "sqrt", "log"``.
    """
    if isinstance(f, str):
        if f not in _BY_NAME:
            raise InputError(f"no known derivative for {f!r}")
        f = _BY_NAME[f]
    if fprime is None:
        fprime = _DERIVATIVES.get(f)
        if fprime is None:
            raise InputError(f"derivative of {getattr(f, '__name__', f)!r} unavailable; pass fprime")
    return DualScalar(float(f(x.a)), float(x.b * fprime(x.a)))


@dataclass(frozen=True, eq=False)
class DualVector:
    re: np.ndarray
    du: np.ndarray

    def __post_init__(self):
        re = np.array(self.re, dtype=float)
        du = np.array(self.du, dtype=float)
        if re.shape != du.shape or re.ndim != 1:
            raise InputError("dual vector parts must be 1-d arrays of equal length")
        if not (np.all(np.isfinite(re)) and np.all(np.isfinite(du))):
            raise InputError("dual vector has non-finite entries")
        object.__setattr__(self, "re", re)
        object.__setattr__(self, "du", du)

    def dot(self, other: "DualVector") -> DualScalar:
        return DualScalar(float(self.re @ other.re), float(self.re @ other.du + self.du @ other.re))

    def norm2(self) -> DualScalar:
        return self.dot(self)

    def to_json(self) -> dict:
        return {"re": self.re.tolist(), "du": self.du.tolist()}

    @classmethod
    def from_json(cls, obj: dict) -> "DualVector":
        try:
            return cls(obj["re"], obj["du"])
        except (KeyError, TypeError):
            raise InputError('dual vector JSON must be {"re": [...], "du": [...]}') from None


@dataclass(frozen=True)
class DualAngle:
    theta: float
    rho: float
    direct: bool = False

    def __post_init__(self):
        if not 0.0 <= self.theta <= math.pi:
            raise InputError(f"theta = {self.theta} outside [0, pi]")

    def as_dual(self) -> DualScalar:
        return DualScalar(self.theta, self.rho)


def line_to_dual_foot(L: OrientedLine) -> DualVector:
    return DualVector(L.u, L.v)


def line_to_dual_moment3(L: OrientedLine) -> DualVector:
    if L.u.size != 3:
        raise InputError("moment encoding needs a line in R^3")
    return DualVector(L.u, np.cross(L.v, L.u))


def dual_moment3_to_line(A: DualVector) -> OrientedLine:
    """Inverse of :func:`line_to_dual_moment3`: the foot is ``u x m``."""
    if A.re.size != 3:
        raise InputError("moment encoding needs vectors in R^3")
    return OrientedLine(A.re, np.cross(A.re, A.du))


def _foot(A: DualVector, rep: str) -> np.ndarray:
    if rep == "foot":
        return A.du
    if rep == "moment":
        return np.cross(A.re, A.du)
    raise InputError(f"unknown representation {rep!r}")


def dual_angle(A: DualVector, B: DualVector, rep: str = "moment") -> DualAngle:
    """Dual angle from ``A . B = cos(theta) - tau rho sin(theta)``.

    For (anti)parallel lines the dual part carries no distance information, so
    ``rho`` is taken directly as ``|v_B - v_A|`` and the result is flagged
    ``direct``.
    """
    c = A.dot(B)
    theta = math.acos(min(1.0, max(-1.0, c.a)))
    s = math.sin(theta)
    if s < PARALLEL_TOL:
        theta = 0.0 if c.a > 0 else math.pi
        rho = float(np.linalg.norm(_foot(B, rep) - _foot(A, rep)))
        return DualAngle(theta, rho, direct=True)
    return DualAngle(theta, -c.b / s)


def foot_dual_defect(L1: OrientedLine, L2: OrientedLine) -> float:
    """Dual part of ``A . B`` in the foot encoding minus ``-rho sin(theta)``.

    Nonzero values show that the foot encoding does not carry the dual angle.
    """
    A, B = line_to_dual_foot(L1), line_to_dual_foot(L2)
    M1, M2 = line_to_dual_moment3(L1), line_to_dual_moment3(L2)
    return A.dot(B).b - M1.dot(M2).b


@dataclass(frozen=True, eq=False)
class DualMatrix:
    re: np.ndarray
    du: np.ndarray

    def __post_init__(self):
        re = np.array(self.re, dtype=float)
        du = np.array(self.du, dtype=float)
        if re.shape != du.shape or re.ndim != 2:
            raise InputError("dual matrix parts must be 2-d arrays of equal shape")
        object.__setattr__(self, "re", re)
        object.__setattr__(self, "du", du)

    @property
    def T(self) -> "DualMatrix":
        return DualMatrix(self.re.T, self.du.T)

    def __matmul__(self, other):
        if isinstance(other, DualMatrix):
            return DualMatrix(self.re @ other.re, self.re @ other.du + self.du @ other.re)
        if isinstance(other, DualVector):
            return DualVector(self.re @ other.re, self.re @ other.du + self.du @ other.re)
        return NotImplemented

    def to_json(self) -> dict:
        return {"re": self.re.tolist(), "du": self.du.tolist()}


def skew3(c) -> np.ndarray:
    """Matrix of ``x -> c x x``."""
    c = np.asarray(c, dtype=float)
    return np.array([[0.0, -c[2], c[1]], [c[2], 0.0, -c[0]], [-c[1], c[0], 0.0]])


def motion_to_dual_matrix3(R, c, tol: float = 1e-12) -> DualMatrix:
    """Dual orthogonal matrix ``R + tau [c]_x R`` of the motion ``x -> R x + c``."""
    R = np.asarray(R, dtype=float)
    c = np.asarray(c, dtype=float)
    if R.shape != (3, 3) or c.shape != (3,):
        raise InputError("motion_to_dual_matrix3 needs a 3x3 R and a 3-vector c")
    if np.max(np.abs(R.T @ R - np.eye(3))) > tol:
        raise InputError("R is not orthogonal")
    return DualMatrix(R, skew3(c) @ R)


def rotation_matrix3(axis, angle: float) -> np.ndarray:
    """Rodrigues rotation about ``axis`` (normalized internally)."""
    axis = np.asarray(axis, dtype=float)
    n = np.linalg.norm(axis)
    if n == 0:
        raise InputError("rotation axis is zero")
    K = skew3(axis / n)
    return np.eye(3) + math.sin(angle) * K + (1 - math.cos(angle)) * (K @ K)
