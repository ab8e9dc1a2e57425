import math

import numpy as np
import pytest
import sympy

from emz_spectral.errors import InvalidMatrix, QuadratureFailure, StepSizeTooCoarse
from emz_spectral.quasidiff import (ShinZettlMatrix, integrate_quasi_derivatives,
                                    is_lagrange_symmetric, lagrange_adjoint, lagrange_bracket,
                                    lagrange_convergence, matrix_from_dict, simpson,
                                    validate_shin_zettl, verify_lagrange_identity)

LAPLACE = ShinZettlMatrix.from_functions([[0, 1], [0, 0]], (0, 1))


def test_classical_matrix_is_clean():
    assert validate_shin_zettl(LAPLACE) == []


def test_vanishing_superdiagonal_flagged():
    A = ShinZettlMatrix.from_functions([[0, lambda x: x], [0, 0]], (0, 1))
    (v,) = validate_shin_zettl(A)
    assert v["condition"] == "ii" and v["entry"] == [1, 2] and v["x"] == 0.0


def test_entry_above_superdiagonal_flagged():
    A = ShinZettlMatrix.from_functions([[0, 1, 1], [0, 0, 1], [0, 0, 0]], (0, 1))
    assert [v["condition"] for v in validate_shin_zettl(A)] == ["iii"]


def test_non_finite_entry_flagged():
    with np.errstate(divide="ignore"):
        A = ShinZettlMatrix.from_functions([[0, 1], [lambda x: 1 / (x - 0.5), 0]], (0, 1),
                                           nodes=3)
    assert "i" in {v["condition"] for v in validate_shin_zettl(A)}


def test_adjoint_matches_hand_formula():
    # for n = 2, A+ = [[-conj d, conj b], [conj c, -conj a]]
    a, b, c, d = 0.3 + 1j, 2.0 - 0.5j, -1.0 + 0.2j, 0.7j
    A = ShinZettlMatrix.from_functions([[a, b], [c, d]], (0, 1), nodes=5)
    P = lagrange_adjoint(A).entries[:, :, 0]
    expect = np.array([[-np.conj(d), np.conj(b)], [np.conj(c), -np.conj(a)]])
    assert np.allclose(P, expect, atol=1e-15)
    assert is_lagrange_symmetric(LAPLACE)
    assert not is_lagrange_symmetric(A)


def test_adjoint_is_an_involution():
    A = ShinZettlMatrix.from_functions(
        [[lambda x: x, 1 + 0j, 0], [2j, 0.5, lambda x: 2 + np.sin(x)], [1, 0, -1j]], (0, 2))
    assert np.allclose(lagrange_adjoint(lagrange_adjoint(A)).entries, A.entries)


def test_adjoint_rejects_invalid_matrix():
    with pytest.raises(InvalidMatrix):
        lagrange_adjoint(ShinZettlMatrix.from_functions([[0, 0], [0, 0]], (0, 1)))


def test_homogeneous_trajectories():
    xs = np.linspace(0, 1, 11)
    const = integrate_quasi_derivatives(LAPLACE, [1, 0], grid=xs)
    assert np.allclose(const.values[:, 0], 1) and np.allclose(const.expression(2), 0)
    lin = integrate_quasi_derivatives(LAPLACE, [0, 1], grid=xs)
    assert np.allclose(lin.values[:, 0], xs, atol=1e-14)
    assert np.allclose(lin(0.55)[0], 0.55, atol=1e-14)


def test_forced_trajectory_matches_closed_form():
    # f'' = -sin, f(0)=0, f'(0)=1  ->  f = sin
    t = integrate_quasi_derivatives(LAPLACE, [0, 1], rhs=lambda x: -np.sin(x),
                                    grid=np.linspace(0, 1, 101))
    assert np.max(np.abs(t.values[:, 0] - np.sin(t.grid))) < 1e-10
    assert t.error_estimate < 1e-10


def test_step_doubling_gives_up():
    A = ShinZettlMatrix.from_functions([[0, 1], [400.0, 0]], (0, 1))
    with pytest.raises(StepSizeTooCoarse):
        integrate_quasi_derivatives(A, [1, 0], grid=np.linspace(0, 1, 3), tol_ode=1e-14,
                                    max_refine=1)


def test_bracket_matches_closed_form_for_order_two():
    x = sympy.Symbol("x", real=True)
    f, g = sympy.exp(x) * (1 + sympy.I * x), sympy.cos(3 * x) + sympy.I
    closed = f * sympy.conjugate(sympy.diff(g, x)) - sympy.diff(f, x) * sympy.conjugate(g)
    for x0 in (0.0, 0.4, 1.3):
        fv = np.array([complex(f.subs(x, x0)), complex(sympy.diff(f, x).subs(x, x0))])
        gv = np.array([complex(g.subs(x, x0)), complex(sympy.diff(g, x).subs(x, x0))])
        assert abs(lagrange_bracket(2, fv, gv) - complex(closed.subs(x, x0))) < 1e-12


def test_lagrange_identity_real_f_equals_g():
    chk = verify_lagrange_identity(LAPLACE, [1, 0.5], [1, 0.5], f_rhs=lambda x: x,
                                   g_rhs=lambda x: x)
    assert abs(chk.integral) < 1e-12 and abs(chk.boundary) < 1e-12 and chk.residual < 1e-12


def test_lagrange_identity_linear_and_constant():
    chk = verify_lagrange_identity(LAPLACE, [0, 1], [1, 0])
    assert chk.residual < 1e-10


def test_lagrange_identity_sin_cos():
    A = ShinZettlMatrix.from_functions([[0, 1], [0, 0]], (0, math.pi / 2))
    chk = verify_lagrange_identity(A, [0, 1], [1, 0], f_rhs=lambda x: -np.sin(x),
                                   g_rhs=lambda x: -np.cos(x), panels=10_000)
    assert chk.residual < 1e-8


def test_lagrange_identity_non_symmetric_order_three():
    A = ShinZettlMatrix.from_functions(
        [[lambda x: 0.3 * x, 1, 0], [0.2j, 0, 1 + 0.5 * 1j], [lambda x: np.cos(x), 0.1, 0]], (0, 1))
    assert not is_lagrange_symmetric(A)
    chk = verify_lagrange_identity(A, [1, 0.5j, -1], [0.2, 1, 1j], f_rhs=lambda x: np.exp(x),
                                   g_rhs=lambda x: 1 + x ** 2)
    assert chk.residual < 1e-10


def test_simpson_order_four():
    runs, slope = lagrange_convergence(LAPLACE, [1, 0], [1, 1], panels=(2, 4, 8, 16, 32),
                                       f_rhs=lambda x: np.exp(2 * x), g_rhs=lambda x: np.sin(3 * x))
    assert abs(slope - 4) < 0.3
    assert all(a.residual > b.residual for a, b in zip(runs, runs[1:]))


def test_simpson_rules():
    xs = np.linspace(0, 1, 5)
    assert simpson(xs ** 3, 0.25) == pytest.approx(0.25, abs=1e-15)
    with pytest.raises(QuadratureFailure):
        simpson(np.ones(4), 0.1)


def test_strict_mode_raises():
    with pytest.raises(QuadratureFailure):
        verify_lagrange_identity(LAPLACE, [1, 0], [1, 1], f_rhs=lambda x: np.exp(5 * x),
                                 g_rhs=lambda x: np.sin(9 * x), panels=1, strict=True)


def test_matrix_from_dict_entry_kinds():
    A = matrix_from_dict({"n": 2, "interval": [0, 1],
                          "entries": [["1 + x", [0, 2]], [[1, 2, 3], 0]]})
    assert len(A.grid) == 3
    assert np.allclose(A.entries[0, 0], 1 + A.grid)
    assert np.allclose(A.entries[0, 1], 2j)
    assert np.allclose(A.entries[1, 0], [1, 2, 3])
    with pytest.raises(InvalidMatrix):
        matrix_from_dict({"n": 2, "interval": [0, 1], "entries": [[0, 1]]})
