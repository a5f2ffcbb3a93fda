"""G2 geometry on R^7 and the almost complex structure on TS^6.

Only the seven increasing components of the associative 3-form are entered
by hand; every permuted component, the 4-form, the cross product and the
Lie algebra g2 are derived from them.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from .errors import ConsistencyError, InputError, PreconditionError
from .numerics import (
    DEFAULT_FD,
    AlternatingForm,
    FDConfig,
    RationalMatrix,
    fd_jacobian,
    hodge_star,
    kernel_basis,
    matrix_exp,
    to_fraction,
)

PHI_COMPONENTS = {
    (1, 2, 3): 1,
    (1, 4, 5): 1,
    (1, 6, 7): 1,
    (2, 4, 6): 1,
    (2, 5, 7): -1,
    (3, 4, 7): -1,
    (3, 5, 6): -1,
}

# Expected Hodge dual, checked against hodge_star(phi) rather than used directly.
PSI_COMPONENTS = {
    (4, 5, 6, 7): 1,
    (2, 3, 4, 5): 1,
    (2, 3, 6, 7): 1,
    (1, 3, 4, 6): -1,
    (1, 3, 5, 7): 1,
    (1, 2, 4, 7): -1,
    (1, 2, 5, 6): -1,
}

TANGENT_TOL = 1e-9

# Replaced by the selftest negative control to simulate a corrupted table.
_phi_override: dict | None = None


def associative_form() -> AlternatingForm:
    comps = _phi_override if _phi_override is not None else PHI_COMPONENTS
    return AlternatingForm(3, comps)


def phi_tensor() -> np.ndarray:
    """Dense ``phi[i, j, k]`` (0-based)."""
    return associative_form().tensor()


def cross7(X, Y) -> np.ndarray:
    """Cross product on R^7 defined by ``g(X x Y, Z) = phi(X, Y, Z)``."""
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    if X.shape[-1] != 7 or Y.shape[-1] != 7:
        raise InputError("cross7 needs vectors in R^7")
    return np.einsum("ijk,...i,...j->...k", phi_tensor(), X, Y)


def cross_identity_residuals(X, Y) -> tuple[float, float]:
    """Residuals of the norm identity and the double-product identity."""
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    XY = cross7(X, Y)
    norm_res = abs(XY @ XY - ((X @ X) * (Y @ Y) - (X @ Y) ** 2))
    double_res = np.linalg.norm(cross7(X, XY) - ((X @ Y) * X - (X @ X) * Y))
    return float(norm_res), float(double_res)


def coassociative_form(check: bool = True) -> AlternatingForm:
    """The 4-form ``*phi``; with ``check`` it must match the reference table exactly."""
    psi = hodge_star(associative_form(), 3)
    if check and psi != AlternatingForm(4, PSI_COMPONENTS):
        raise ConsistencyError(
            f"hodge_star(phi) = {dict(psi.components)} does not match the expected 4-form"
        )
    return psi


# ---------------------------------------------------------------------------
# The Lie algebra g2 inside so(7)
# ---------------------------------------------------------------------------

SO7_PAIRS = list(itertools.combinations(range(7), 2))
TRIPLES = list(itertools.combinations(range(7), 3))


def _so7_matrix(coords: Sequence) -> list[list]:
    """Skew 7x7 matrix from coordinates on the basis E_ij = e_i e_j^T - e_j e_i^T."""
    A = [[Fraction(0)] * 7 for _ in range(7)]
    for c, (i, j) in zip(coords, SO7_PAIRS):
        A[i][j] += c
        A[j][i] -= c
    return A


def _phi_exact() -> dict:
    phi = associative_form()
    return {t: Fraction(phi[tuple(i + 1 for i in t)]) for t in itertools.product(range(7), repeat=3)}


def _invariance_rows() -> list[list[Fraction]]:
    """Rows of ``A -> (L_A phi)_{ijk}`` for i<j<k, in so(7) coordinates."""
    phi = _phi_exact()
    rows = []
    for i, j, k in TRIPLES:
        row = []
        for a, b in SO7_PAIRS:
            A = _so7_matrix([1 if (a, b) == pair else 0 for pair in SO7_PAIRS])
            val = sum(
                A[m][i] * phi[m, j, k] + A[m][j] * phi[i, m, k] + A[m][k] * phi[i, j, m]
                for m in range(7)
            )
            row.append(val)
        rows.append(row)
    return rows


def infinitesimal_pullback(A) -> np.ndarray:
    """``(L_A phi)_{ijk}`` for all 35 increasing triples (float)."""
    A = np.asarray(A, dtype=float)
    phi = phi_tensor()
    full = (
        np.einsum("mi,mjk->ijk", A, phi)
        + np.einsum("mj,imk->ijk", A, phi)
        + np.einsum("mk,ijm->ijk", A, phi)
    )
    return np.array([full[t] for t in TRIPLES])


@dataclass(frozen=True, eq=False)
class G2AlgebraElement:
    """Skew 7x7 matrix annihilating phi, stored exactly."""

    exact: tuple

    @property
    def matrix(self) -> np.ndarray:
        return np.array([[float(x) for x in row] for row in self.exact])

    @classmethod
    def from_matrix(cls, A, tol: float = 1e-12) -> "G2AlgebraElement":
        A = np.asarray(A, dtype=float)
        if A.shape != (7, 7) or not np.allclose(A, -A.T, atol=tol, rtol=0):
            raise InputError("g2 element must be a skew 7x7 matrix")
        if np.max(np.abs(infinitesimal_pullback(A))) > tol:
            raise InputError("matrix does not preserve phi infinitesimally")
        return cls(tuple(tuple(Fraction(x) for x in row) for row in A))

    def coords(self) -> list[Fraction]:
        return [self.exact[i][j] for i, j in SO7_PAIRS]


def g2_constraint_matrix() -> RationalMatrix:
    return RationalMatrix(_invariance_rows(), len(SO7_PAIRS))


def g2_algebra_basis() -> list[G2AlgebraElement]:
    basis = kernel_basis(g2_constraint_matrix())
    if len(basis) != 14:
        raise ConsistencyError(f"g2 kernel has dimension {len(basis)}, expected 14")
    return [G2AlgebraElement(tuple(map(tuple, _so7_matrix(v)))) for v in basis]


def g2_algebra_dimension() -> int:
    return len(kernel_basis(g2_constraint_matrix()))


def g2_coordinates(A: G2AlgebraElement, basis: list[G2AlgebraElement] | None = None):
    """Exact coordinates of ``A`` in the g2 basis, or None if ``A`` is not in g2."""
    basis = basis or g2_algebra_basis()
    cols = [b.coords() for b in basis]
    M = RationalMatrix([[c[r] for c in cols] for r in range(len(SO7_PAIRS))], len(cols))
    return M.solve(A.coords())


def commutator(A: G2AlgebraElement, B: G2AlgebraElement) -> G2AlgebraElement:
    a, b = A.exact, B.exact
    prod = lambda x, y: [[sum(x[i][m] * y[m][j] for m in range(7)) for j in range(7)] for i in range(7)]
    ab, ba = prod(a, b), prod(b, a)
    return G2AlgebraElement(tuple(tuple(ab[i][j] - ba[i][j] for j in range(7)) for i in range(7)))


def isotropy_dimension(u) -> int:
    """Dimension of ``{A in g2 : A u = 0}`` for an exact rational vector ``u``."""
    u = [to_fraction(x) for x in u]
    if len(u) != 7:
        raise InputError("isotropy_dimension needs a vector in R^7")
    if not any(u):
        raise InputError("isotropy_dimension: zero vector")
    rows = list(_invariance_rows())
    for r in range(7):
        row = []
        for i, j in SO7_PAIRS:
            # (E_ij u)_r = delta_ri u_j - delta_rj u_i
            row.append((u[j] if r == i else 0) - (u[i] if r == j else 0))
        rows.append(row)
    return len(kernel_basis(RationalMatrix(rows, len(SO7_PAIRS))))


def g2_group_element(A, t: float = 1.0) -> np.ndarray:
    """``exp(t A)`` for ``A`` in g2."""
    M = A.matrix if isinstance(A, G2AlgebraElement) else np.asarray(A, dtype=float)
    return matrix_exp(t * M)


def pullback_residual(rho) -> float:
    """``max_{i<j<k} |phi(rho e_i, rho e_j, rho e_k) - phi_ijk|``."""
    rho = np.asarray(rho, dtype=float)
    phi = phi_tensor()
    pulled = np.einsum("abc,ai,bj,ck->ijk", phi, rho, rho, rho)
    return float(np.max(np.abs(pulled - phi)))


# ---------------------------------------------------------------------------
# Tangent vectors to TS^6 and almost complex structures
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class TangentPair:
    """Tangent vector ``(a, b)`` at a line with direction ``u`` (a = du, b = projected dv)."""

    u: np.ndarray
    a: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        u, a, b = (np.array(x, dtype=float) for x in (self.u, self.a, self.b))
        if not (u.shape == a.shape == b.shape == (7,)):
            raise InputError("TangentPair components must lie in R^7")
        if abs(np.linalg.norm(u) - 1) > TANGENT_TOL:
            raise PreconditionError("TangentPair base point must be a unit vector")
        scale = max(1.0, np.linalg.norm(a), np.linalg.norm(b))
        if abs(u @ a) > TANGENT_TOL * scale or abs(u @ b) > TANGENT_TOL * scale:
            raise PreconditionError("TangentPair components must be orthogonal to u")
        for name, val in (("u", u), ("a", a), ("b", b)):
            object.__setattr__(self, name, val)

    def __neg__(self):
        return TangentPair(self.u, -self.a, -self.b)

    def residual(self, other: "TangentPair") -> float:
        return float(
            max(
                np.max(np.abs(self.u - other.u)),
                np.max(np.abs(self.a - other.a)),
                np.max(np.abs(self.b - other.b)),
            )
        )


def jtilde(P: TangentPair) -> TangentPair:
    """Rotation by a right angle about the line: ``(a, b) -> (u x a, u x b)``."""
    return TangentPair(P.u, cross7(P.u, P.a), cross7(P.u, P.b))


def jdombrowski(P: TangentPair) -> TangentPair:
    """Connection-induced structure: horizontal to vertical, ``(a, b) -> (-b, a)``."""
    return TangentPair(P.u, -P.b, P.a)


def tau_pushforward(P: TangentPair) -> TangentPair:
    """Differential of orientation reversal ``(u, v) -> (-u, v)``."""
    return TangentPair(-P.u, -P.a, P.b)


def complex_structure_s6(u, w) -> np.ndarray:
    """Standard almost complex structure on S^6: ``J_u(w) = u x w``."""
    return cross7(u, w)


def pushforward_laplace_section(p, u, a) -> TangentPair:
    """Differential of the section of ``p`` at ``u`` applied to ``a``: ``(a, -(p.u) a)``."""
    p = np.asarray(p, dtype=float)
    u = np.asarray(u, dtype=float)
    a = np.asarray(a, dtype=float)
    return TangentPair(u, a, -(p @ u) * a)


def laplace_section_field(p) -> tuple[Callable, Callable]:
    """The section ``u -> p - (p.u) u`` and its ambient Jacobian."""
    p = np.asarray(p, dtype=float)

    def L(u):
        return p - (p @ u) * u

    def jac(u):
        # dL^m/du^q = -p_q u_m - (p.u) delta_mq
        return -np.outer(u, p) - (p @ u) * np.eye(u.size)

    return L, jac


def pseudoholo_residual(L: Callable, u, jacobian: Callable | None = None,
                        cfg: FDConfig = DEFAULT_FD) -> np.ndarray:
    """Residual matrix ``R[l, k]`` of the pseudoholomorphicity system for a section.

    ``R_lk = (phi_ljm u_j S_qk + phi_kjq u_j S_ml) dL^m/du^q`` with
    ``S = I - u u^T``. Without ``jacobian`` the derivative is taken by central
    differences of the degree-0 extension of ``L``.
    """
    u = np.asarray(u, dtype=float)
    if jacobian is not None:
        D = np.asarray(jacobian(u), dtype=float)
    else:
        D = fd_jacobian(lambda x: np.asarray(L(x / np.linalg.norm(x)), dtype=float), u, cfg)
    phi = phi_tensor()
    S = np.eye(7) - np.outer(u, u)
    K = np.einsum("ljm,j->lm", phi, u)
    # first term: K[l, m] D[m, q] S[q, k]; second: S[l, m] D[m, q] K[k, q]
    return K @ D @ S + S @ D @ K.T


def _tangent_field(W):
    W = np.asarray(W, dtype=float)

    def field(x):
        xh = x / np.linalg.norm(x)
        return W - (W @ xh) * xh

    return field


def _j_field(F):
    return lambda x: cross7(x / np.linalg.norm(x), F(x))


def _bracket(F, G, x, cfg):
    return fd_jacobian(G, x, cfg) @ F(x) - fd_jacobian(F, x, cfg) @ G(x)


def nijenhuis_residual(u, X, Y, cfg: FDConfig = DEFAULT_FD) -> np.ndarray:
    """Nijenhuis tensor of ``J_u(w) = u x w`` on S^6 evaluated on tangent ``X, Y``.

    ``N(X,Y) = [JX,JY] - J[JX,Y] - J[X,JY] - [X,Y]`` with the fields
    extended as degree-0 projections of the constant vectors ``X`` and ``Y``.
    """
    u = np.asarray(u, dtype=float)
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    for name, W in (("X", X), ("Y", Y)):
        if abs(W @ u) > TANGENT_TOL * max(1.0, np.linalg.norm(W)):
            raise PreconditionError(f"{name} is not tangent at u")
    FX, FY = _tangent_field(X), _tangent_field(Y)
    JX, JY = _j_field(FX), _j_field(FY)
    J = lambda w: cross7(u, w)
    N = (
        _bracket(JX, JY, u, cfg)
        - J(_bracket(JX, FY, u, cfg))
        - J(_bracket(FX, JY, u, cfg))
        - _bracket(FX, FY, u, cfg)
    )
    return N
