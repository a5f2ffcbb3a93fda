"""Laplacian on S^n through degree-0 homogeneous extension.

For ``f`` on the unit sphere put ``F(x) = f(x/|x|)``. The radial part of the
flat Laplacian vanishes on ``F``, so at ``|x| = 1`` the flat (positive)
Laplacian of ``F`` equals the spherical one, and the ambient gradient of ``F``
is the tangential gradient of ``f``.

Sign conventions used here (the "sign ledger" in the README lists them all):

* ``grad chi_p = p - (p.u) u`` for ``chi_p(u) = u.p``; this is exactly the
  Laplace section of ``p``.
* With that gradient, the Lie derivative of the round metric along
  ``s = grad chi_p`` is ``L_s h = -2 chi_p h``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

import numpy as np

from .errors import InputError, PreconditionError
from .numerics import (
    DEFAULT_FD,
    FDConfig,
    RationalMatrix,
    fd_gradient,
    fd_laplacian_flat,
    kernel_basis,
)

TANGENT_TOL = 1e-9
ORACLE_MAX_N = 6
ORACLE_MAX_K = 6


@dataclass(frozen=True)
class SphereFunction:
    n: int
    eval: Callable[[np.ndarray], float]

    def __call__(self, u):
        return self.eval(np.asarray(u, dtype=float))

    def extension(self) -> Callable[[np.ndarray], float]:
        """Degree-0 homogeneous extension ``x -> f(x/|x|)``."""
        return lambda x: self.eval(x / np.linalg.norm(x))


def linear_function(p) -> SphereFunction:
    """``chi_p(u) = u . p``."""
    p = np.asarray(p, dtype=float)
    return SphereFunction(p.size - 1, lambda u: float(u @ p))


def _unit_vector(u) -> np.ndarray:
    u = np.asarray(u, dtype=float)
    if abs(np.linalg.norm(u) - 1.0) > TANGENT_TOL:
        raise PreconditionError(f"|u| = {np.linalg.norm(u)!r}, expected a unit vector")
    return u


def _extension(f) -> Callable:
    if isinstance(f, SphereFunction):
        return f.extension()
    return lambda x: f(x / np.linalg.norm(x))


def spherical_laplacian(f, u, cfg: FDConfig = DEFAULT_FD) -> float:
    """Positive Laplace-Beltrami operator of ``f`` at the unit vector ``u``."""
    u = _unit_vector(u)
    return fd_laplacian_flat(_extension(f), u, cfg)


def spherical_gradient(f, u, cfg: FDConfig = DEFAULT_FD) -> np.ndarray:
    u = _unit_vector(u)
    return fd_gradient(_extension(f), u, cfg)


def eigen_residual(p, u, cfg: FDConfig = DEFAULT_FD) -> float:
    """``|Delta_{S^n} chi_p(u) - n chi_p(u)|`` with ``n = len(p) - 1``."""
    p = np.asarray(p, dtype=float)
    u = _unit_vector(u)
    if p.size != u.size:
        raise InputError("p and u must have the same length")
    n = p.size - 1
    chi = linear_function(p)
    return abs(spherical_laplacian(chi, u, cfg) - n * chi(u))


# ---------------------------------------------------------------------------
# Homogeneous polynomials and the multiplicity of eigenvalue k(k+n-1)
# ---------------------------------------------------------------------------


def monomials(m: int, k: int) -> list[tuple[int, ...]]:
    """Exponent tuples of total degree ``k`` in ``m`` variables, lexicographic order."""
    if k < 0:
        return []
    out = []
    for combo in itertools.combinations_with_replacement(range(m), k):
        exps = [0] * m
        for i in combo:
            exps[i] += 1
        out.append(tuple(exps))
    return sorted(out, reverse=True)


@dataclass(frozen=True)
class HomogeneousPolynomial:
    m: int
    k: int
    coefficients: dict = field(default_factory=dict)

    def __post_init__(self):
        clean = {}
        for exps, c in self.coefficients.items():
            exps = tuple(exps)
            if len(exps) != self.m or sum(exps) != self.k or min(exps, default=0) < 0:
                raise InputError(f"monomial {exps} is not of degree {self.k} in {self.m} variables")
            c = Fraction(c)
            if c:
                clean[exps] = c
        object.__setattr__(self, "coefficients", clean)

    def __call__(self, x) -> float:
        x = np.asarray(x, dtype=float)
        return float(sum(float(c) * np.prod(x ** np.array(e)) for e, c in self.coefficients.items()))

    def laplacian(self) -> "HomogeneousPolynomial":
        """Analyst's Laplacian ``sum_i d^2/dx_i^2`` (exact)."""
        out: dict = {}
        for exps, c in self.coefficients.items():
            for i, a in enumerate(exps):
                if a >= 2:
                    e = list(exps)
                    e[i] -= 2
                    e = tuple(e)
                    out[e] = out.get(e, 0) + c * a * (a - 1)
        if self.k < 2:
            return HomogeneousPolynomial(self.m, 0, {})
        return HomogeneousPolynomial(self.m, self.k - 2, out)


def harmonic_multiplicity(n: int, k: int) -> int:
    """Dimension of the eigenspace of Delta_{S^n} with eigenvalue k(k+n-1)."""
    if n < 1 or k < 0:
        raise InputError(f"need n >= 1 and k >= 0, got n={n}, k={k}")
    second = math.comb(n + k - 2, k - 2) if k >= 2 else 0
    return math.comb(n + k, k) - second


def laplacian_matrix(m: int, k: int) -> RationalMatrix:
    """Matrix of the flat Laplacian from degree-k to degree-(k-2) monomial coefficients."""
    src = monomials(m, k)
    dst = monomials(m, k - 2)
    row_of = {e: i for i, e in enumerate(dst)}
    rows = [[0] * len(src) for _ in dst]
    for j, exps in enumerate(src):
        for i, a in enumerate(exps):
            if a >= 2:
                e = list(exps)
                e[i] -= 2
                rows[row_of[tuple(e)]][j] += a * (a - 1)
    return RationalMatrix(rows, len(src))


def harmonic_polynomial_basis(n: int, k: int) -> list[HomogeneousPolynomial]:
    """Exact basis of degree-k harmonic polynomials in ``n + 1`` variables."""
    if n < 1 or k < 0:
        raise InputError(f"need n >= 1 and k >= 0, got n={n}, k={k}")
    if n > ORACLE_MAX_N or k > ORACLE_MAX_K:
        raise InputError(f"oracle limited to n <= {ORACLE_MAX_N}, k <= {ORACLE_MAX_K}")
    m = n + 1
    src = monomials(m, k)
    return [
        HomogeneousPolynomial(m, k, dict(zip(src, vec)))
        for vec in kernel_basis(laplacian_matrix(m, k))
    ]


def harmonic_multiplicity_oracle(n: int, k: int) -> int:
    """Brute-force count of degree-k harmonic polynomials by exact elimination."""
    return len(harmonic_polynomial_basis(n, k))


# ---------------------------------------------------------------------------
# Conformal Killing characterization
# ---------------------------------------------------------------------------


def _tangent(u, X, name):
    X = np.asarray(X, dtype=float)
    if X.shape != u.shape:
        raise InputError(f"{name} has the wrong dimension")
    if abs(X @ u) > TANGENT_TOL * max(1.0, np.linalg.norm(X)):
        raise PreconditionError(f"{name} is not tangent at u (u.{name} = {X @ u!r})")
    return X


def covariant_derivative(field: Callable, u, X, cfg: FDConfig = DEFAULT_FD) -> np.ndarray:
    """Levi-Civita derivative of a tangent field on S^n along ``X``.

    Differentiates ``field`` along the great circle through ``u`` with
    velocity ``X`` and projects the result onto the tangent space.
    """
    u = np.asarray(u, dtype=float)
    X = np.asarray(X, dtype=float)
    nx = np.linalg.norm(X)
    if nx == 0:
        return np.zeros_like(u)
    e = X / nx
    h = cfg.step

    def along(s):
        return field(np.cos(s) * u + np.sin(s) * e)

    central = lambda h: (along(h) - along(-h)) / (2 * h)
    d = central(h) if not cfg.richardson else (4 * central(h / 2) - central(h)) / 3
    d = nx * d
    return d - (d @ u) * u


def laplace_section_derivative(p, u, X) -> np.ndarray:
    """Closed-form covariant derivative of ``s(u) = p - (p.u) u``: ``-(p.u) X``."""
    p = np.asarray(p, dtype=float)
    u = np.asarray(u, dtype=float)
    return -(p @ u) * np.asarray(X, dtype=float)


def conformal_killing_residual(p, u, X, Y, field: Callable | None = None,
                               cfg: FDConfig = DEFAULT_FD) -> float:
    """``|h(D_X s, Y) + h(X, D_Y s) + 2 chi_p(u) h(X, Y)|``.

    With ``field=None`` the field is the Laplace section of ``p`` and the
    derivative is closed-form; otherwise ``field`` (a map from unit vectors to
    tangent vectors) is differentiated numerically.
    """
    p = np.asarray(p, dtype=float)
    u = _unit_vector(u)
    X = _tangent(u, X, "X")
    Y = _tangent(u, Y, "Y")
    if field is None:
        DX = laplace_section_derivative(p, u, X)
        DY = laplace_section_derivative(p, u, Y)
    else:
        DX = covariant_derivative(field, u, X, cfg)
        DY = covariant_derivative(field, u, Y, cfg)
    chi = p @ u
    return float(abs(DX @ Y + X @ DY + 2 * chi * (X @ Y)))
