import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import rand_tangent, rand_unit
from minitwistor import g2
from minitwistor.errors import ConsistencyError, InputError, PreconditionError
from minitwistor.numerics import FDConfig
from minitwistor.selftest import corrupted_phi

E = np.eye(7)
vec7 = st.lists(st.floats(-5, 5), min_size=7, max_size=7).map(np.array)


def test_cross_product_examples():
    assert np.array_equal(g2.cross7(E[0], E[1]), E[2])
    assert np.array_equal(g2.cross7(E[3], E[4]), E[0])
    X = np.arange(7.0)
    assert np.array_equal(g2.cross7(X, X), np.zeros(7))
    assert g2.cross_identity_residuals(E[0], E[1]) == (0.0, 0.0)
    assert g2.cross7(E[0], E[2]).tolist() == (-E[1]).tolist()


@given(vec7, vec7, vec7)
def test_cross_product_defined_by_phi(X, Y, Z):
    # the 3-form is evaluated by determinants, the cross product by the dense tensor
    lhs = g2.cross7(X, Y) @ Z
    rhs = g2.associative_form()(X, Y, Z)
    assert abs(lhs - rhs) <= 1e-10 * (1 + np.linalg.norm(X) * np.linalg.norm(Y) * np.linalg.norm(Z))


@given(vec7, vec7)
def test_cross_identities(X, Y):
    norm_res, double_res = g2.cross_identity_residuals(X, Y)
    scale = 1 + (np.linalg.norm(X) * np.linalg.norm(Y)) ** 2 + np.linalg.norm(X) ** 2 * np.linalg.norm(Y)
    assert norm_res <= 1e-12 * scale and double_res <= 1e-12 * scale


def test_coassociative_components():
    psi = g2.coassociative_form()
    assert psi[(4, 5, 6, 7)] == 1
    assert psi[(1, 3, 5, 7)] == 1
    assert psi[(1, 2, 3, 4)] == 0


def test_corrupted_table_is_detected():
    with corrupted_phi():
        with pytest.raises(ConsistencyError):
            g2.coassociative_form()
    g2.coassociative_form()


def svd_rank(M, tol=1e-9):
    return int(np.sum(np.linalg.svd(M, compute_uv=False) > tol))


def float_invariance_map(extra_u=None):
    """Columns: infinitesimal action of each E_ij - E_ji on phi (and on u)."""
    phi = g2.phi_tensor()
    cols = []
    for i, j in itertools.combinations(range(7), 2):
        A = np.zeros((7, 7))
        A[i, j], A[j, i] = 1.0, -1.0
        full = (np.einsum("mi,mjk->ijk", A, phi) + np.einsum("mj,imk->ijk", A, phi)
                + np.einsum("mk,ijm->ijk", A, phi))
        col = [full[t] for t in itertools.combinations(range(7), 3)]
        if extra_u is not None:
            col += list(A @ extra_u)
        cols.append(col)
    return np.array(cols).T


def test_g2_dimension_exact_and_by_svd():
    assert g2.g2_algebra_dimension() == 14
    assert 21 - svd_rank(float_invariance_map()) == 14
    assert g2.g2_constraint_matrix().cols == 21


@pytest.mark.parametrize("u", [E[0], E[6], np.array([3, 4, 0, 0, 0, 0, 0]) / 5])
def test_isotropy_by_svd(u):
    assert 21 - svd_rank(float_invariance_map(u)) == 8


def test_isotropy_exact():
    assert g2.isotropy_dimension([1, 0, 0, 0, 0, 0, 0]) == 8
    assert g2.isotropy_dimension(["3/5", "4/5", 0, 0, 0, 0, 0]) == 8
    with pytest.raises(InputError):
        g2.isotropy_dimension([0] * 7)
    with pytest.raises(InputError):
        g2.isotropy_dimension([1, 0, 0])


def test_basis_closes_under_bracket():
    basis = g2.g2_algebra_basis()
    assert len(basis) == 14
    for A, B in [(basis[0], basis[1]), (basis[3], basis[9]), (basis[12], basis[13])]:
        assert g2.g2_coordinates(g2.commutator(A, B), basis) is not None


def test_from_matrix_rejects_non_g2():
    M = np.zeros((7, 7))
    M[0, 1], M[1, 0] = 1, -1
    with pytest.raises(InputError):
        g2.G2AlgebraElement.from_matrix(M)
    A = g2.g2_algebra_basis()[2]
    assert g2.G2AlgebraElement.from_matrix(A.matrix).coords() == A.coords()


def test_group_elements_preserve_phi(rng):
    basis = g2.g2_algebra_basis()
    assert np.array_equal(g2.g2_group_element(basis[0], 0.0), np.eye(7))
    for A in basis:
        rho = g2.g2_group_element(A, 0.7)
        assert g2.pullback_residual(rho) <= 1e-9
        assert np.linalg.det(rho) == pytest.approx(1, abs=1e-12)
        assert np.allclose(rho.T @ rho, np.eye(7), atol=1e-12)


def test_generic_rotation_does_not_preserve_phi(rng):
    Q, _ = np.linalg.qr(rng.normal(size=(7, 7)))
    assert g2.pullback_residual(Q) > 1e-2


def test_jtilde_examples():
    P = g2.jtilde(g2.TangentPair(E[0], E[1], E[3]))
    assert np.array_equal(P.a, E[2]) and np.array_equal(P.b, E[4])
    P = g2.jtilde(g2.TangentPair(E[0], E[2], np.zeros(7)))
    assert np.array_equal(P.a, -E[1]) and np.array_equal(P.b, np.zeros(7))


def test_dombrowski_examples():
    P = g2.jdombrowski(g2.TangentPair(E[0], E[1], E[3]))
    assert np.array_equal(P.a, -E[3]) and np.array_equal(P.b, E[1])
    W = g2.TangentPair(E[0], E[1], np.zeros(7))
    assert np.array_equal(g2.jdombrowski(W).b, E[1]) and np.array_equal(g2.jtilde(W).a, E[2])


def test_tangent_pair_validation():
    with pytest.raises(PreconditionError):
        g2.TangentPair(E[0], E[0], np.zeros(7))
    with pytest.raises(PreconditionError):
        g2.TangentPair(2 * E[0], E[1], np.zeros(7))
    with pytest.raises(InputError):
        g2.TangentPair(E[0][:3], E[1][:3], np.zeros(3))


def test_nearly_kaehler_metric_compatibility(rng):
    for _ in range(20):
        u = rand_unit(rng, 7)
        X, Y = rand_tangent(rng, u), rand_tangent(rng, u)
        JX, JY = g2.complex_structure_s6(u, X), g2.complex_structure_s6(u, Y)
        assert abs(JX @ JY - X @ Y) <= 1e-12 * (1 + np.linalg.norm(X) * np.linalg.norm(Y))


def test_pushforward_examples(rng):
    u = E[0]
    a = E[2] + 2 * E[5]
    P = g2.pushforward_laplace_section(E[3], u, a)
    assert np.array_equal(P.a, a) and np.array_equal(P.b, np.zeros(7))
    P = g2.pushforward_laplace_section(u, u, a)
    assert np.array_equal(P.b, -a)


def test_pushforward_matches_great_circle_difference(rng):
    h = 1e-4
    for _ in range(20):
        p, u = rng.normal(size=7), rand_unit(rng, 7)
        a = rand_tangent(rng, u)
        e = a / np.linalg.norm(a)
        curve = lambda s: np.cos(s) * u + np.sin(s) * e
        L = lambda w: p - (p @ w) * w
        dv = np.linalg.norm(a) * (L(curve(h)) - L(curve(-h))) / (2 * h)
        b = dv - (dv @ u) * u
        P = g2.pushforward_laplace_section(p, u, a)
        assert np.max(np.abs(P.b - b)) <= 1e-6


def test_pseudoholo_residual_examples(rng):
    p, q = rng.normal(size=7), rng.normal(size=7)
    zero = lambda u: np.zeros(7)
    u = rand_unit(rng, 7)
    assert np.max(np.abs(g2.pseudoholo_residual(zero, u))) == 0
    L, jac = g2.laplace_section_field(p)
    assert np.max(np.abs(g2.pseudoholo_residual(L, u))) <= 1e-5
    bent = lambda w: (q @ w) * (p - (p @ w) * w)
    assert np.max(np.abs(g2.pseudoholo_residual(bent, u))) > 1e-3


def test_analytic_jacobian_matches_fd(rng):
    from minitwistor.numerics import fd_jacobian

    p, u = rng.normal(size=7), rand_unit(rng, 7)
    L, jac = g2.laplace_section_field(p)
    assert np.max(np.abs(jac(u) - fd_jacobian(L, u))) <= 1e-8


def test_nijenhuis_tensor(rng):
    cfg = FDConfig(richardson=True)
    assert np.linalg.norm(g2.nijenhuis_residual(E[0], E[1], E[3])) > 1e-3
    u = rand_unit(rng, 7)
    X, Y = rand_tangent(rng, u), rand_tangent(rng, u)
    assert np.linalg.norm(g2.nijenhuis_residual(u, X, X, cfg)) <= 1e-6
    N1, N2 = g2.nijenhuis_residual(u, X, Y, cfg), g2.nijenhuis_residual(u, Y, X, cfg)
    assert np.max(np.abs(N1 + N2)) <= 1e-6
    with pytest.raises(PreconditionError):
        g2.nijenhuis_residual(E[0], E[0], E[1])
