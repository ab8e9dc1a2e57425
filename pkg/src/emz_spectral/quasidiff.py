"""Shin-Zettl quasi-differential calculus on a compact interval.

A matrix ``A`` of order ``n`` defines quasi-derivatives ``f^[r]`` through the
first-order system ``y' = A(x) y + e_n f^[n]`` with ``y = (f^[0], ...,
f^[n-1])``, and the expression ``M_A[f] = i^n f^[n]``.  Coefficients are held
as samples on a uniform grid and interpolated with cubic splines between
nodes.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.interpolate import CubicHermiteSpline, CubicSpline

from .errors import InvalidMatrix, QuadratureFailure, StepSizeTooCoarse

logger = logging.getLogger(__name__)

TOL_ODE = 1e-10
TOL_QUAD = 1e-8
SYMMETRY_TOL = 1e-12


def lagrange_L(n: int) -> np.ndarray:
    """The anti-diagonal matrix with entries ``(-1)^(r-1)`` at ``(r, n+1-r)``."""
    L = np.zeros((n, n))
    for r in range(n):
        L[r, n - 1 - r] = (-1) ** r
    return L


@dataclass
class ShinZettlMatrix:
    """Coefficient matrix sampled on ``grid``; ``entries[r, s, k] = a_rs(x_k)``."""

    n: int
    interval: tuple[float, float]
    grid: np.ndarray
    entries: np.ndarray
    _splines: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        self.grid = np.asarray(self.grid, dtype=float)
        self.entries = np.asarray(self.entries, dtype=complex)
        if self.n < 2:
            raise InvalidMatrix(f"order must be at least 2, got {self.n}")
        if self.entries.shape != (self.n, self.n, len(self.grid)):
            raise InvalidMatrix(f"entries shape {self.entries.shape} does not match "
                                f"({self.n}, {self.n}, {len(self.grid)})")
        if len(self.grid) < 2:
            raise InvalidMatrix("grid needs at least two nodes")

    @classmethod
    def from_functions(cls, entries, interval, nodes: int = 201) -> "ShinZettlMatrix":
        """Sample a nested list of constants or callables ``a_rs(x)``."""
        n = len(entries)
        grid = np.linspace(interval[0], interval[1], nodes)
        out = np.zeros((n, n, nodes), dtype=complex)
        for r, row in enumerate(entries):
            if len(row) != n:
                raise InvalidMatrix("matrix must be square")
            for s, a in enumerate(row):
                out[r, s] = np.broadcast_to(a(grid) if callable(a) else a, grid.shape)
        return cls(n, (float(interval[0]), float(interval[1])), grid, out)

    @property
    def constant(self) -> bool:
        return bool(np.all(self.entries == self.entries[:, :, :1]))

    def at(self, x) -> np.ndarray:
        """Interpolated coefficients, shape ``(n, n)`` or ``(len(x), n, n)``."""
        x = np.asarray(x, dtype=float)
        if self.constant:
            base = self.entries[:, :, 0]
            return base if x.ndim == 0 else np.broadcast_to(base, x.shape + base.shape)
        if "spline" not in self._splines:
            self._splines["spline"] = CubicSpline(self.grid, self.entries, axis=2)
        vals = self._splines["spline"](x)
        return vals if x.ndim == 0 else np.moveaxis(vals, 2, 0)


def validate_shin_zettl(A: ShinZettlMatrix) -> list[dict]:
    """Violations of the Shin-Zettl conditions, one dict per offending entry/node.

    (i) finite samples, (ii) ``a_{r,r+1}`` non-vanishing, (iii) ``a_rs == 0``
    for ``s >= r + 2``.  Indices in reports are 1-based.
    """
    out = []
    n = A.n
    for r in range(n):
        for s in range(n):
            bad = np.flatnonzero(~np.isfinite(A.entries[r, s]))
            if bad.size:
                out.append({"condition": "i", "entry": [r + 1, s + 1],
                            "node": int(bad[0]), "x": float(A.grid[bad[0]]),
                            "count": int(bad.size)})
    for r in range(n - 1):
        zero = np.flatnonzero(np.abs(A.entries[r, r + 1]) == 0)
        if zero.size:
            out.append({"condition": "ii", "entry": [r + 1, r + 2],
                        "node": int(zero[0]), "x": float(A.grid[zero[0]]),
                        "count": int(zero.size)})
    for r in range(n - 2):
        for s in range(r + 2, n):
            nz = np.flatnonzero(A.entries[r, s] != 0)
            if nz.size:
                out.append({"condition": "iii", "entry": [r + 1, s + 1],
                            "node": int(nz[0]), "x": float(A.grid[nz[0]]),
                            "count": int(nz.size)})
    return out


def lagrange_adjoint(A: ShinZettlMatrix) -> ShinZettlMatrix:
    """``A+ = -L^{-1} A* L`` nodewise."""
    violations = validate_shin_zettl(A)
    if violations:
        raise InvalidMatrix(f"not a Shin-Zettl matrix: {violations[0]}")
    L = lagrange_L(A.n)
    Linv = np.linalg.inv(L)
    star = np.conj(np.transpose(A.entries, (1, 0, 2)))
    plus = -np.einsum("ij,jkm,kl->ilm", Linv, star, L)
    return ShinZettlMatrix(A.n, A.interval, A.grid.copy(), plus)


def is_lagrange_symmetric(A: ShinZettlMatrix, tol: float = SYMMETRY_TOL) -> bool:
    return float(np.max(np.abs(lagrange_adjoint(A).entries - A.entries))) < tol


@dataclass
class QuasiDerivTrajectory:
    """Quasi-derivatives ``values[k] = (f^[0], ..., f^[n-1])(grid[k])``."""

    grid: np.ndarray
    values: np.ndarray
    derivs: np.ndarray
    final: np.ndarray
    error_estimate: float = 0.0

    def __call__(self, x) -> np.ndarray:
        """Hermite-interpolated quasi-derivative vector at ``x``."""
        spline = CubicHermiteSpline(self.grid, self.values, self.derivs, axis=0)
        return spline(x)

    def expression(self, n: int) -> np.ndarray:
        """``M_A[f] = i^n f^[n]`` at the nodes."""
        return (1j ** n) * self.final


def _as_forcing(rhs) -> Callable:
    if rhs is None:
        return lambda x: np.zeros_like(np.asarray(x, dtype=float), dtype=complex)
    if callable(rhs):
        return lambda x: np.asarray(rhs(x), dtype=complex) * np.ones_like(x, dtype=complex)
    c = complex(rhs)
    return lambda x: np.full(np.shape(x), c, dtype=complex)


def _rk4(A: ShinZettlMatrix, forcing, y0, xs, substeps: int):
    """Classical RK4 on nodes ``xs`` with ``substeps`` equal steps per cell."""
    n = A.n
    h = (xs[1] - xs[0]) / substeps
    # coefficient and forcing samples at every half step, computed up front
    half = np.linspace(xs[0], xs[-1], 2 * substeps * (len(xs) - 1) + 1)
    Ah = A.at(half)
    Fh = forcing(half)
    y = np.array(y0, dtype=complex)
    out = np.empty((len(xs), n), dtype=complex)
    out[0] = y
    en = np.zeros(n)
    en[-1] = 1.0

    def rhs(j, v):
        return Ah[j] @ v + Fh[j] * en

    j = 0
    for k in range(1, len(xs)):
        for _ in range(substeps):
            k1 = rhs(j, y)
            k2 = rhs(j + 1, y + 0.5 * h * k1)
            k3 = rhs(j + 1, y + 0.5 * h * k2)
            k4 = rhs(j + 2, y + h * k3)
            y = y + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
            j += 2
        out[k] = y
    return out


def integrate_quasi_derivatives(A: ShinZettlMatrix, initial, rhs=None, grid=None,
                                tol_ode: float = TOL_ODE, substeps: int = 1,
                                max_refine: int = 6) -> QuasiDerivTrajectory:
    """Integrate ``y' = A y + e_n f^[n]`` from ``interval[0]``.

    ``rhs`` prescribes ``f^[n]`` (a callable, constant, or ``None`` for the
    homogeneous equation ``M_A[f] = 0``).  The error is estimated by step
    doubling; sub-steps are doubled until the estimate drops below
    ``tol_ode``, and :class:`StepSizeTooCoarse` is raised if that takes more
    than ``max_refine`` doublings.
    """
    xs = A.grid if grid is None else np.asarray(grid, dtype=float)
    if len(xs) < 2:
        raise StepSizeTooCoarse("trajectory needs at least two nodes")
    if len(initial) != A.n:
        raise ValueError(f"initial vector has length {len(initial)}, expected {A.n}")
    forcing = _as_forcing(rhs)
    coarse = _rk4(A, forcing, initial, xs, substeps)
    for _ in range(max_refine + 1):
        substeps *= 2
        fine = _rk4(A, forcing, initial, xs, substeps)
        scale = max(1.0, float(np.max(np.abs(fine))))
        err = float(np.max(np.abs(fine - coarse))) / 15.0 / scale
        if err < tol_ode:
            break
        coarse = fine
    else:
        raise StepSizeTooCoarse(f"step-doubling error {err:.3e} above tol_ode={tol_ode:g}")
    f_n = forcing(xs)
    Ax = A.at(xs)
    derivs = np.einsum("kij,kj->ki", Ax, fine)
    derivs[:, -1] += f_n
    logger.debug("trajectory on %d nodes, %d substeps, err %.2e", len(xs), substeps, err)
    return QuasiDerivTrajectory(xs, fine, derivs, f_n, err)


def lagrange_bracket(n: int, f_vals: np.ndarray, g_vals: np.ndarray) -> np.ndarray:
    """``[f, g]_A(x)`` from quasi-derivative vectors of ``f`` (w.r.t. ``A``) and
    ``g`` (w.r.t. ``A+``); the last axis indexes the quasi-derivative order.

    The sign ``(-1)^(n+i)`` makes the Green identity hold for every ``n``.
    """
    f_vals = np.asarray(f_vals)
    g_vals = np.asarray(g_vals)
    total = 0
    for i in range(1, n + 1):
        total = total + (-1) ** (n + i) * f_vals[..., i - 1] * np.conj(g_vals[..., n - i])
    return (1j ** n) * total


def simpson(values: np.ndarray, h: float) -> complex:
    """Composite Simpson rule on an odd number of equally spaced samples."""
    if len(values) % 2 == 0 or len(values) < 3:
        raise QuadratureFailure("Simpson rule needs an odd number (>= 3) of nodes")
    return h / 3.0 * (values[0] + values[-1] + 4 * values[1:-1:2].sum()
                      + 2 * values[2:-1:2].sum())


@dataclass
class LagrangeCheck:
    integral: complex
    boundary: complex
    residual: float
    panels: int

    def to_dict(self):
        return {"integral": [self.integral.real, self.integral.imag],
                "boundary": [self.boundary.real, self.boundary.imag],
                "residual": self.residual, "panels": self.panels}


def _lagrange_parts(A, f_init, g_init, span, f_rhs, g_rhs, ode_nodes, tol_ode):
    a, b = A.interval
    alpha, beta = span if span is not None else (a, b)
    if not (a <= alpha < beta <= b):
        raise QuadratureFailure(f"span {span} not inside {A.interval}")
    Aplus = A if is_lagrange_symmetric(A) else lagrange_adjoint(A)
    ode_grid = np.linspace(a, b, ode_nodes)
    tf = integrate_quasi_derivatives(A, f_init, f_rhs, grid=ode_grid, tol_ode=tol_ode)
    tg = integrate_quasi_derivatives(Aplus, g_init, g_rhs, grid=ode_grid, tol_ode=tol_ode)
    n = A.n
    Mf, Mg = _as_forcing(f_rhs), _as_forcing(g_rhs)

    def check(panels: int) -> LagrangeCheck:
        xs = np.linspace(alpha, beta, 2 * panels + 1)
        fv, gv = tf(xs), tg(xs)
        integrand = (np.conj(gv[:, 0]) * (1j ** n) * Mf(xs)
                     - fv[:, 0] * np.conj((1j ** n) * Mg(xs)))
        integral = complex(simpson(integrand, (beta - alpha) / (2 * panels)))
        br = lagrange_bracket(n, fv[[0, -1]], gv[[0, -1]])
        boundary = complex(br[1] - br[0])
        residual = abs(integral - boundary)
        if not np.isfinite(residual):
            raise QuadratureFailure("non-finite residual")
        return LagrangeCheck(integral, boundary, residual, panels)

    return (alpha, beta), check


def verify_lagrange_identity(A: ShinZettlMatrix, f_init, g_init, span=None,
                             f_rhs=None, g_rhs=None, panels: int = 10_000,
                             tol_quad: float = TOL_QUAD, ode_nodes: int = 501,
                             strict: bool = False, tol_ode: float = TOL_ODE) -> LagrangeCheck:
    """Residual of the Lagrange (Green) identity on ``span = [alpha, beta]``.

    ``f`` solves ``y' = A y + e_n f_rhs`` and ``g`` the same system for ``A+``
    (which is ``A`` itself when ``A`` is Lagrange symmetric).  Both are
    integrated on a fixed fine grid; the integrand is sampled from Hermite
    interpolants on a Simpson grid with ``panels`` panels.  With
    ``strict=True`` a residual above ``tol_quad * (beta - alpha)`` raises
    :class:`QuadratureFailure`.
    """
    (alpha, beta), check = _lagrange_parts(A, f_init, g_init, span, f_rhs, g_rhs,
                                           ode_nodes, tol_ode)
    res = check(panels)
    if strict and res.residual >= tol_quad * (beta - alpha):
        raise QuadratureFailure(f"residual {res.residual:.3e} exceeds "
                                f"{tol_quad * (beta - alpha):.3e}")
    return res


def lagrange_convergence(A: ShinZettlMatrix, f_init, g_init,
                         panels=(2, 4, 8, 16, 32, 10_000), fit_max: int = 64,
                         span=None, f_rhs=None, g_rhs=None, ode_nodes: int = 501,
                         tol_ode: float = TOL_ODE) -> tuple[list[LagrangeCheck], float]:
    """Residuals over a panel sequence from one pair of trajectories, and the
    fitted order ``p`` in ``residual ~ h^p`` (log-log least squares).

    Only panel counts up to ``fit_max`` enter the fit: beyond that the
    quadrature error sinks below the integration error and the curve flattens.
    """
    _, check = _lagrange_parts(A, f_init, g_init, span, f_rhs, g_rhs, ode_nodes, tol_ode)
    runs = [check(p) for p in panels]
    fit = [c for c in runs if c.panels <= fit_max]
    if len(fit) < 2:
        raise QuadratureFailure("need two panel counts at or below fit_max to fit an order")
    h = np.log(1.0 / np.array([c.panels for c in fit], dtype=float))
    r = np.log(np.maximum([c.residual for c in fit], np.finfo(float).tiny))
    slope = float(np.polyfit(h, r, 1)[0])
    return runs, slope


# --- JSON ---------------------------------------------------------------------


def matrix_from_dict(d: dict, nodes: int = 201) -> ShinZettlMatrix:
    """Build from ``{"n", "interval", "entries"}``.

    An entry is a number, ``[re, im]``, an expression string in ``x`` or a
    list of samples on a uniform grid over the interval.
    """
    import sympy

    n = int(d["n"])
    interval = (float(d["interval"][0]), float(d["interval"][1]))
    rows = d["entries"]
    if len(rows) != n:
        raise InvalidMatrix(f"entries has {len(rows)} rows, expected {n}")
    lengths = {len(e) for row in rows for e in row if isinstance(e, list) and len(e) != 2}
    if len(lengths) > 1:
        raise InvalidMatrix("sampled entries must share one grid")
    nodes = lengths.pop() if lengths else nodes
    grid = np.linspace(interval[0], interval[1], nodes)
    out = np.zeros((n, n, nodes), dtype=complex)
    xsym = sympy.Symbol("x", real=True)
    for r, row in enumerate(rows):
        if len(row) != n:
            raise InvalidMatrix("matrix must be square")
        for s, e in enumerate(row):
            if isinstance(e, str):
                fn = sympy.lambdify(xsym, sympy.sympify(e, locals={"x": xsym}), "numpy")
                out[r, s] = np.broadcast_to(fn(grid), grid.shape)
            elif isinstance(e, list) and len(e) == 2 and nodes != 2:
                out[r, s] = complex(e[0], e[1])
            elif isinstance(e, list):
                out[r, s] = np.asarray(e, dtype=complex)
            else:
                out[r, s] = complex(e)
    return ShinZettlMatrix(n, interval, grid, out)
