"""Shared numeric kernels.

Finite differences use the positive ("geometer's") Laplacian
``Delta = -div grad`` throughout, so that linear functions restricted to
S^n have eigenvalue ``+n``.
"""

from __future__ import annotations

import itertools
import math
import os
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np
import scipy.linalg

from .errors import EvaluationError, InputError

FD_STEP_ENV = "MINITWISTOR_FD_STEP"


@dataclass(frozen=True)
class FDConfig:
    step: float = 1e-3
    scheme: str = "central-2nd-order"
    richardson: bool = False

    def __post_init__(self):
        if not (self.step > 0 and math.isfinite(self.step)):
            raise InputError(f"FD step must be positive, got {self.step!r}")
        if self.scheme != "central-2nd-order":
            raise InputError(f"unknown FD scheme {self.scheme!r}")

    @classmethod
    def from_env(cls, **kwargs) -> "FDConfig":
        raw = os.environ.get(FD_STEP_ENV)
        if raw is not None and "step" not in kwargs:
            try:
                kwargs["step"] = float(raw)
            except ValueError:
                raise InputError(f"{FD_STEP_ENV}={raw!r} is not a number") from None
        return cls(**kwargs)


DEFAULT_FD = FDConfig()


def _checked(F: Callable, x: np.ndarray) -> float:
    val = F(x)
    if not np.all(np.isfinite(val)):
        raise EvaluationError(f"non-finite function value at {x.tolist()}")
    return val


def _laplacian_once(F, x, h):
    f0 = _checked(F, x)
    total = 0.0
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = h
        total = total + (_checked(F, x + e) - 2.0 * f0 + _checked(F, x - e)) / h**2
    return -total


def fd_laplacian_flat(F: Callable, x, cfg: FDConfig = DEFAULT_FD):
    """Positive flat Laplacian ``-sum_i d^2F/dx_i^2`` by central differences.

    ``F`` may be real or complex valued. With ``cfg.richardson`` one
    extrapolation level (h, h/2) is applied.
    """
    x = np.asarray(x, dtype=float)
    h = cfg.step
    if not cfg.richardson:
        return _laplacian_once(F, x, h)
    coarse = _laplacian_once(F, x, h)
    fine = _laplacian_once(F, x, h / 2)
    return (4.0 * fine - coarse) / 3.0


def fd_gradient(F: Callable, x, cfg: FDConfig = DEFAULT_FD) -> np.ndarray:
    """Central-difference gradient of a scalar field."""
    x = np.asarray(x, dtype=float)

    def once(h):
        g = np.empty(x.size)
        for i in range(x.size):
            e = np.zeros_like(x)
            e[i] = h
            g[i] = (_checked(F, x + e) - _checked(F, x - e)) / (2 * h)
        return g

    if not cfg.richardson:
        return once(cfg.step)
    return (4.0 * once(cfg.step / 2) - once(cfg.step)) / 3.0


def fd_jacobian(F: Callable, x, cfg: FDConfig = DEFAULT_FD) -> np.ndarray:
    """Central-difference Jacobian ``J[m, p] = dF_m/dx_p`` of a vector field."""
    x = np.asarray(x, dtype=float)

    def once(h):
        cols = []
        for p in range(x.size):
            e = np.zeros_like(x)
            e[p] = h
            cols.append((_checked(F, x + e) - _checked(F, x - e)) / (2 * h))
        return np.stack(cols, axis=-1)

    if not cfg.richardson:
        return once(cfg.step)
    return (4.0 * once(cfg.step / 2) - once(cfg.step)) / 3.0


def matrix_exp(A) -> np.ndarray:
    """Matrix exponential (scaling and squaring with Pade approximants)."""
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise InputError(f"matrix_exp needs a square matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise InputError("matrix_exp: non-finite entries")
    return scipy.linalg.expm(A)


# ---------------------------------------------------------------------------
# Alternating forms on R^7 (1-based indices, as in dx_{ijk})
# ---------------------------------------------------------------------------

DIM = 7


def permutation_sign(seq: Sequence[int]) -> int:
    """Sign of the permutation sorting ``seq``; 0 if an entry repeats."""
    if len(set(seq)) != len(seq):
        return 0
    inversions = sum(1 for a, b in itertools.combinations(seq, 2) if a > b)
    return -1 if inversions % 2 else 1


@dataclass(frozen=True)
class AlternatingForm:
    """Totally antisymmetric k-tensor stored on strictly increasing index tuples."""

    degree: int
    components: Mapping[tuple, object] = field(default_factory=dict)
    dim: int = DIM

    def __post_init__(self):
        if not 0 <= self.degree <= self.dim:
            raise InputError(f"degree {self.degree} out of range 0..{self.dim}")
        clean = {}
        for idx, val in self.components.items():
            idx = tuple(int(i) for i in idx)
            if len(idx) != self.degree:
                raise InputError(f"component {idx} has wrong length for degree {self.degree}")
            if any(not 1 <= i <= self.dim for i in idx):
                raise InputError(f"component {idx} has index outside 1..{self.dim}")
            sign = permutation_sign(idx)
            if sign == 0:
                continue
            key = tuple(sorted(idx))
            clean[key] = clean.get(key, 0) + sign * val
        clean = {k: v for k, v in clean.items() if v != 0}
        object.__setattr__(self, "components", clean)

    def __getitem__(self, idx) -> object:
        """Component on an arbitrary (1-based) index tuple, with permutation sign."""
        idx = tuple(idx)
        sign = permutation_sign(idx)
        if sign == 0:
            return 0
        return sign * self.components.get(tuple(sorted(idx)), 0)

    def __call__(self, *vectors) -> float:
        """Evaluate on ``degree`` vectors of R^dim (0-based arrays)."""
        if len(vectors) != self.degree:
            raise InputError(f"{self.degree}-form evaluated on {len(vectors)} vectors")
        V = np.array(vectors, dtype=float)
        total = 0.0
        for idx, val in self.components.items():
            cols = [i - 1 for i in idx]
            total += float(val) * np.linalg.det(V[:, cols]) if self.degree else float(val)
        return total

    def __add__(self, other: "AlternatingForm") -> "AlternatingForm":
        if other.degree != self.degree:
            raise InputError("cannot add forms of different degree")
        comps = dict(self.components)
        for k, v in other.components.items():
            comps[k] = comps.get(k, 0) + v
        return AlternatingForm(self.degree, comps, self.dim)

    def scale(self, c) -> "AlternatingForm":
        return AlternatingForm(self.degree, {k: c * v for k, v in self.components.items()}, self.dim)

    def wedge(self, other: "AlternatingForm") -> "AlternatingForm":
        comps = {}
        for I, a in self.components.items():
            for J, b in other.components.items():
                if set(I) & set(J):
                    continue
                comps[I + J] = comps.get(I + J, 0) + a * b
        return AlternatingForm(self.degree + other.degree, comps, self.dim)

    def inner(self, other: "AlternatingForm"):
        """Euclidean inner product of forms (orthonormal on increasing dx_I)."""
        if other.degree != self.degree:
            return 0
        return sum(v * other.components.get(k, 0) for k, v in self.components.items())

    def tensor(self) -> np.ndarray:
        """Dense 0-based array ``T[i, j, ...]`` with all signed permutations filled."""
        T = np.zeros((self.dim,) * self.degree)
        for idx, val in self.components.items():
            for perm in itertools.permutations(range(self.degree)):
                T[tuple(idx[p] - 1 for p in perm)] = permutation_sign(perm) * float(val)
        return T

    def __eq__(self, other):
        if not isinstance(other, AlternatingForm):
            return NotImplemented
        return self.degree == other.degree and self.dim == other.dim and dict(
            self.components
        ) == dict(other.components)

    def __hash__(self):
        return hash((self.degree, self.dim, frozenset(self.components.items())))


def volume_form(dim: int = DIM) -> AlternatingForm:
    return AlternatingForm(dim, {tuple(range(1, dim + 1)): 1}, dim)


def hodge_star(omega: AlternatingForm, k: int | None = None) -> AlternatingForm:
    """Hodge dual for the Euclidean metric and orientation dx_1...dx_dim."""
    if k is not None and k != omega.degree:
        raise InputError(f"stated degree {k} does not match form degree {omega.degree}")
    full = range(1, omega.dim + 1)
    comps = {}
    for idx, val in omega.components.items():
        rest = tuple(i for i in full if i not in idx)
        comps[rest] = permutation_sign(idx + rest) * val
    return AlternatingForm(omega.dim - omega.degree, comps, omega.dim)


# ---------------------------------------------------------------------------
# Exact rational matrices
# ---------------------------------------------------------------------------


def to_fraction(x) -> Fraction:
    """Exact rational from an int, Fraction, or ``'p/q'`` / decimal string."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise InputError("booleans are not rationals")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        try:
            return Fraction(x.strip())
        except (ValueError, ZeroDivisionError):
            raise InputError(f"not a rational number: {x!r}") from None
    if isinstance(x, float):
        if not math.isfinite(x):
            raise InputError("non-finite value in rational matrix")
        return Fraction(x)
    raise InputError(f"cannot convert {type(x).__name__} to a rational")


class RationalMatrix:
    """Dense matrix of :class:`fractions.Fraction` with exact elimination."""

    def __init__(self, entries: Iterable[Iterable], cols: int | None = None):
        rows = [tuple(to_fraction(x) for x in row) for row in entries]
        if cols is None:
            if not rows:
                raise InputError("empty matrix needs an explicit column count")
            cols = len(rows[0])
        if any(len(r) != cols for r in rows):
            raise InputError("ragged rows in RationalMatrix")
        self.rows = len(rows)
        self.cols = cols
        self.entries = tuple(rows)

    def __repr__(self):
        return f"RationalMatrix({self.rows}x{self.cols})"

    def __matmul__(self, vec: Sequence) -> list:
        if len(vec) != self.cols:
            raise InputError("dimension mismatch in matrix-vector product")
        return [sum((a * b for a, b in zip(row, vec) if a), Fraction(0)) for row in self.entries]

    def rref(self) -> tuple[list[dict], list[int]]:
        """Reduced row echelon form as sparse rows, plus the pivot columns."""
        work = [{c: v for c, v in enumerate(row) if v} for row in self.entries]
        pivots: list[int] = []
        r = 0
        for c in range(self.cols):
            piv = next((i for i in range(r, len(work)) if c in work[i]), None)
            if piv is None:
                continue
            work[r], work[piv] = work[piv], work[r]
            prow = work[r]
            inv = 1 / prow[c]
            prow = {k: v * inv for k, v in prow.items()}
            work[r] = prow
            for i, row in enumerate(work):
                if i == r or c not in row:
                    continue
                f = row[c]
                for k, v in prow.items():
                    nv = row.get(k, 0) - f * v
                    if nv:
                        row[k] = nv
                    else:
                        row.pop(k, None)
            pivots.append(c)
            r += 1
            if r == len(work):
                break
        return work[:r], pivots

    def rank(self) -> int:
        return len(self.rref()[1])

    def kernel_basis(self) -> list[list[Fraction]]:
        reduced, pivots = self.rref()
        pivset = set(pivots)
        basis = []
        for free in range(self.cols):
            if free in pivset:
                continue
            vec = [Fraction(0)] * self.cols
            vec[free] = Fraction(1)
            for row, pc in zip(reduced, pivots):
                vec[pc] = -row.get(free, Fraction(0))
            basis.append(vec)
        return basis

    def solve(self, rhs: Sequence) -> list[Fraction] | None:
        """One exact solution of ``M x = rhs``, or None if inconsistent."""
        if len(rhs) != self.rows:
            raise InputError("right-hand side has wrong length")
        aug = RationalMatrix(
            [row + (to_fraction(b),) for row, b in zip(self.entries, rhs)], self.cols + 1
        )
        reduced, pivots = aug.rref()
        if pivots and pivots[-1] == self.cols:
            return None
        x = [Fraction(0)] * self.cols
        for row, pc in zip(reduced, pivots):
            x[pc] = row.get(self.cols, Fraction(0))
        return x


def kernel_basis(M: RationalMatrix) -> list[list[Fraction]]:
    """Exact null-space basis; its length is ``cols - rank``."""
    return M.kernel_basis()
