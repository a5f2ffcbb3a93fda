"""Oriented lines in R^{n+1} as points of TS^n, and points as Laplace sections.

A line ``v + t u`` is stored as the pair ``(u, v)`` with ``|u| = 1`` and
``u . v = 0``; ``v`` is the foot of the perpendicular from the origin. A point
``p`` determines the section ``u -> p - (p.u) u`` of TS^n, whose value at
``u`` is the line through ``p`` with direction ``u``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateError, InputError, PreconditionError

CONSTRAINT_TOL = 1e-9
INCIDENCE_TOL = 1e-9
COINCIDENT_TOL = 1e-12


def _vec(x, name="vector") -> np.ndarray:
    arr = np.array(x, dtype=float)
    if arr.ndim != 1 or arr.size < 2:
        raise InputError(f"{name} must be a 1-d array of length >= 2")
    if not np.all(np.isfinite(arr)):
        raise InputError(f"{name} has non-finite entries")
    arr.setflags(write=False)
    return arr


def _same_dim(*arrays):
    if len({a.size for a in arrays}) != 1:
        raise InputError(f"dimension mismatch: {[a.size for a in arrays]}")


@dataclass(frozen=True, eq=False)
class OrientedLine:
    """A point of the twistor space TS^n: unit direction ``u`` and foot ``v``."""

    u: np.ndarray
    v: np.ndarray

    def __post_init__(self):
        u = _vec(self.u, "u")
        v = _vec(self.v, "v")
        _same_dim(u, v)
        if abs(np.linalg.norm(u) - 1.0) > CONSTRAINT_TOL:
            raise PreconditionError(f"|u| = {np.linalg.norm(u)!r}, expected 1")
        if abs(u @ v) > CONSTRAINT_TOL * max(1.0, np.linalg.norm(v)):
            raise PreconditionError(f"u.v = {u @ v!r}, expected 0")
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "v", v)

    @property
    def n(self) -> int:
        return self.u.size - 1

    def point(self, t: float) -> np.ndarray:
        return self.v + t * self.u

    def allclose(self, other: "OrientedLine", atol: float = 1e-12) -> bool:
        return bool(
            np.allclose(self.u, other.u, rtol=0, atol=atol)
            and np.allclose(self.v, other.v, rtol=0, atol=atol)
        )

    def to_json(self) -> dict:
        return {"u": self.u.tolist(), "v": self.v.tolist()}

    @classmethod
    def from_json(cls, obj: dict) -> "OrientedLine":
        try:
            return cls(obj["u"], obj["v"])
        except (KeyError, TypeError):
            raise InputError('line JSON must be {"u": [...], "v": [...]}') from None

    def __repr__(self):
        return f"OrientedLine(u={self.u.tolist()}, v={self.v.tolist()})"


@dataclass(frozen=True, eq=False)
class EuclideanPoint:
    p: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "p", _vec(self.p, "p"))

    def to_json(self) -> dict:
        return {"p": self.p.tolist()}

    @classmethod
    def from_json(cls, obj: dict) -> "EuclideanPoint":
        try:
            return cls(obj["p"])
        except (KeyError, TypeError):
            raise InputError('point JSON must be {"p": [...]}') from None


def _as_point(p) -> np.ndarray:
    return p.p if isinstance(p, EuclideanPoint) else _vec(p, "p")


def _unit(u, strict: bool) -> np.ndarray:
    u = _vec(u, "u")
    norm = np.linalg.norm(u)
    if norm == 0:
        raise DegenerateError("direction vector is zero")
    if abs(norm - 1.0) > CONSTRAINT_TOL:
        if strict:
            raise PreconditionError(f"|u| = {norm!r} is not 1 (strict mode)")
    return u / norm


def normalize_line(u_raw, v_raw) -> OrientedLine:
    """Project arbitrary ``(u, v)`` onto the constraint surface |u| = 1, u.v = 0."""
    u_raw = _vec(u_raw, "u")
    v_raw = _vec(v_raw, "v")
    _same_dim(u_raw, v_raw)
    norm = np.linalg.norm(u_raw)
    if norm == 0:
        raise DegenerateError("direction vector is zero")
    u = u_raw / norm
    return OrientedLine(u, v_raw - (v_raw @ u) * u)


def laplace_section_eval(p, u, strict: bool = True) -> OrientedLine:
    """Value at ``u`` of the section determined by ``p``: the line through p along u."""
    p = _as_point(p)
    u = _unit(u, strict)
    _same_dim(p, u)
    return OrientedLine(u, p - (p @ u) * u)


def reverse_orientation(L: OrientedLine) -> OrientedLine:
    return OrientedLine(-L.u, L.v)


def line_through_points(p, q) -> OrientedLine:
    """Oriented line from ``p`` towards ``q``."""
    p, q = _as_point(p), _as_point(q)
    _same_dim(p, q)
    d = q - p
    dist = np.linalg.norm(d)
    if dist <= COINCIDENT_TOL:
        raise DegenerateError("points coincide; no unique line")
    u = d / dist
    return OrientedLine(u, p - (p @ u) * u)


def sections_intersect(p, q, printed_formula: bool = False) -> tuple[OrientedLine, OrientedLine]:
    """The two twistor points where the sections of ``p`` and ``q`` meet.

    Returns the lines with directions ``+(p-q)/|p-q|`` and ``-(p-q)/|p-q|``,
    sharing the foot ``[(|q|^2 - p.q) p + (|p|^2 - p.q) q] / |p-q|^2``.

    ``printed_formula=True`` substitutes the printed variant
    ``[(p.q - |q|^2) p + (p.q - |p|^2) q] / |p-q|`` for diagnostics; that
    foot is generally not orthogonal to ``u``, so it is returned as a raw
    ``(u, v)`` tuple pair rather than validated lines.
    """
    p, q = _as_point(p), _as_point(q)
    _same_dim(p, q)
    d = p - q
    dist = np.linalg.norm(d)
    if dist <= COINCIDENT_TOL:
        raise DegenerateError("points coincide; sections meet everywhere along a sphere")
    u = d / dist
    pq, pp, qq = p @ q, p @ p, q @ q
    if printed_formula:
        v = ((pq - qq) * p + (pq - pp) * q) / dist
        return (u, v), (-u, v)
    v = ((qq - pq) * p + (pp - pq) * q) / dist**2
    # remove round-off along u so the result is exactly on the constraint surface
    v = v - (v @ u) * u
    return OrientedLine(u, v), OrientedLine(-u, v)


def incidence(p, L: OrientedLine, tol: float = INCIDENCE_TOL) -> bool:
    p = _as_point(p)
    _same_dim(p, L.u)
    return bool(np.linalg.norm(p - (p @ L.u) * L.u - L.v) <= tol)


def correspondence_project(u, w, strict: bool = True) -> tuple[np.ndarray, OrientedLine]:
    """Both projections of the correspondence space S^n x R^{n+1}.

    Returns ``(w, (u, w - (w.u) u))``: the point of space, and the line through
    it with direction ``u``.
    """
    u = _unit(u, strict)
    w = _vec(w, "w")
    _same_dim(u, w)
    return w, OrientedLine(u, w - (w @ u) * u)


def section_zeros(p) -> tuple[np.ndarray, np.ndarray]:
    p = _as_point(p)
    norm = np.linalg.norm(p)
    if norm == 0:
        raise DegenerateError("the zero section vanishes everywhere")
    z = p / norm
    return z, -z


def common_point_of_three(p, q, r, tol: float = INCIDENCE_TOL) -> OrientedLine | None:
    """Shared twistor point of three sections: the line through p, q, r if collinear."""
    p, q, r = _as_point(p), _as_point(q), _as_point(r)
    _same_dim(p, q, r)
    for a, b in ((p, q), (p, r), (q, r)):
        if np.linalg.norm(a - b) <= COINCIDENT_TOL:
            raise DegenerateError("input points must be pairwise distinct")
    L = line_through_points(p, q)
    w = r - p
    if np.linalg.norm(w - (w @ L.u) * L.u) <= tol:
        return L
    return None


def transform_line(L: OrientedLine, R, c) -> OrientedLine:
    """Image of a line under the Euclidean motion ``x -> R x + c``."""
    R = np.asarray(R, dtype=float)
    c = _vec(c, "c")
    u = R @ L.u
    return OrientedLine(u, R @ L.v + c - (c @ u) * u)
