"""Concrete coordinate self-adjoint operators and their spectral data.

Families:

* :class:`HalfLineKinetic` -- ``tau = -d^2/dx^2`` (sign ``-``) or its mirror
  ``+d^2/dx^2`` (sign ``+``) on ``[0, inf)`` with ``f(0) + k f'(0) = 0``.
* :class:`ImpulseOnUnit` -- ``tau = (1/i) d/dt`` on ``[0, 1]`` with
  ``f(0) = exp(i alpha) f(1)``.
* :class:`DirichletSLOnPi` -- ``tau = -d^2/dt^2`` on ``[0, pi]``, Dirichlet ends.
* :class:`SymbolicSpectral` -- spectral data given directly (no eigenfunctions).

Eigenfunctions are L2-normalized.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.optimize import brentq

from .errors import ContinuousSpectrumOnly, DimensionMismatch, UnsupportedFamily
from .realset import EPS_ATOM, RealSet, SpectralMeasureClass, WeightedPPMeasure

ROOT_TOL = 1e-12
CHECK_POINTS = 101


@dataclass
class OrderedRepData:
    """Ordered-representation data of one coordinate operator."""

    theta: SpectralMeasureClass
    mult_sets: list[RealSet]
    pp_weights: WeightedPPMeasure | None = None

    def __post_init__(self):
        for k, (a, b) in enumerate(zip(self.mult_sets, self.mult_sets[1:]), start=1):
            if not (b - a).is_empty():
                raise ValueError(f"multiplicity set e_{k + 1} is not contained in e_{k}")

    @property
    def m(self) -> int:
        return len(self.mult_sets)

    def level_class(self, k: int) -> SpectralMeasureClass:
        """Measure class of the ``k``-th cyclic vector (1-based)."""
        return self.theta.restrict(self.mult_sets[k - 1])

    def to_dict(self):
        d = {"theta": self.theta.to_dict(), "m": self.m,
             "mult_sets": [s.to_dict() for s in self.mult_sets]}
        if self.pp_weights is not None:
            d["pp_weights"] = self.pp_weights.to_dict()["atoms"]
        return d


@dataclass
class EigenData:
    """Eigenvalues in a window with closed-form normalized eigenfunctions."""

    eigenvalues: np.ndarray
    family: "Family"
    norm_weights: np.ndarray
    bc_residual: float = 0.0
    ode_residual: float = 0.0

    def __len__(self):
        return len(self.eigenvalues)

    def eigenfunction(self, i: int, x, deriv: int = 0):
        return self.family.eigenfunction(float(self.eigenvalues[i]), np.asarray(x), deriv)

    def index_of(self, lam: float, eps: float = EPS_ATOM) -> int | None:
        j = int(np.searchsorted(self.eigenvalues, lam - eps))
        if j < len(self.eigenvalues) and abs(self.eigenvalues[j] - lam) <= eps:
            return j
        return None


class Family:
    """Common interface; subclasses override what applies."""

    name = "family"
    interval: tuple[float, float] = (0.0, 1.0)
    pure_point = True

    def subspectrum(self, window, eps=EPS_ATOM) -> RealSet:
        raise NotImplementedError

    def eigenvalues(self, window, eps=EPS_ATOM) -> np.ndarray:
        raise ContinuousSpectrumOnly(f"{self.name} has no eigenvalues in the window")

    def eigenfunction(self, lam: float, x, deriv: int = 0):
        raise UnsupportedFamily(f"{self.name} has no eigenfunction evaluator")

    def tau(self, u: Callable, x, lam) -> np.ndarray:
        """Apply the differential expression to the eigenfunction at ``lam``."""
        raise NotImplementedError

    def bc_residual(self, lam: float) -> float:
        raise NotImplementedError

    def solution_basis(self, lam: float):
        """Analytic solution basis ``[(label, sigma(x))]`` and coefficients of
        the normalized eigenfunction in it."""
        raise NotImplementedError

    def quadrature(self, nodes: int = 200):
        """Nodes and weights for L2 inner products on the family's interval."""
        a, b = self.interval
        t, w = np.polynomial.legendre.leggauss(nodes)
        return 0.5 * (b - a) * t + 0.5 * (a + b), 0.5 * (b - a) * w

    def params(self) -> dict:
        return {}


@dataclass
class HalfLineKinetic(Family):
    """``-+d^2/dx^2`` on the half-line; ``k = inf`` means ``f'(0) = 0``."""

    sign: str = "-"
    k: float = math.inf

    name = "half_line_kinetic"
    interval = (0.0, math.inf)
    pure_point = False

    def __post_init__(self):
        if self.sign not in ("-", "+"):
            raise ValueError(f"sign must be '-' or '+', got {self.sign!r}")
        if math.isnan(self.k):
            raise ValueError("boundary parameter k is NaN")

    @property
    def kappa(self) -> float | None:
        """Decay rate of the bound state, ``1/k`` for ``0 < k < inf``."""
        if 0 < self.k < math.inf:
            return 1.0 / self.k
        return None

    @property
    def bound_state(self) -> float | None:
        kap = self.kappa
        if kap is None:
            return None
        return -kap * kap if self.sign == "-" else kap * kap

    @property
    def note(self) -> str | None:
        if self.k < 0:
            return ("k < 0: exp(-x/k) is not square integrable, no bound state is "
                    "listed; the case split for k < 0 is taken as stated for "
                    "k in (-inf, 0]")
        return None

    def subspectrum(self, window, eps=EPS_ATOM) -> RealSet:
        ac = (0.0, math.inf) if self.sign == "-" else (-math.inf, 0.0)
        atoms = [self.bound_state] if self.bound_state is not None else []
        return RealSet.build(window, [ac], atoms, eps=eps)

    def eigenvalues(self, window, eps=EPS_ATOM) -> np.ndarray:
        lam = self.bound_state
        if lam is None or not (window[0] <= lam <= window[1]):
            raise ContinuousSpectrumOnly(
                f"half-line kinetic operator (sign {self.sign}, k={self.k}) has no bound "
                f"state in {list(window)}; its ac part has no eigenfunctions")
        return np.array([lam])

    def eigenfunction(self, lam, x, deriv=0):
        kap = math.sqrt(abs(lam))
        return math.sqrt(2 * kap) * (-kap) ** deriv * np.exp(-kap * x)

    def tau(self, u, x, lam):
        s = -1.0 if self.sign == "-" else 1.0
        return s * u(x, 2)

    def bc_residual(self, lam):
        k = self.k
        if math.isinf(k):
            return abs(float(self.eigenfunction(lam, 0.0, 1)))
        return abs(float(self.eigenfunction(lam, 0.0) + k * self.eigenfunction(lam, 0.0, 1)))

    def solution_basis(self, lam):
        kap = math.sqrt(abs(lam))
        basis = [(f"exp(-{kap:.12g} x)", lambda x: np.exp(-kap * x)),
                 (f"exp(+{kap:.12g} x)", lambda x: np.exp(kap * x))]
        return basis, [math.sqrt(2 * kap), 0.0]

    def quadrature(self, nodes=200):
        kap = self.kappa or 1.0
        t, w = np.polynomial.laguerre.laggauss(nodes)
        # integrand weight exp(-t) removed so plain functions can be integrated
        x = t / (2 * kap)
        return x, w * np.exp(t) / (2 * kap)

    def params(self):
        return {"sign": self.sign, "k": "inf" if math.isinf(self.k) else self.k}


@dataclass
class ImpulseOnUnit(Family):
    alpha: float = 0.0

    name = "impulse"
    interval = (0.0, 1.0)

    def __post_init__(self):
        if not (0.0 <= self.alpha <= 2 * math.pi):
            raise ValueError(f"alpha must lie in [0, 2 pi], got {self.alpha}")

    def subspectrum(self, window, eps=EPS_ATOM) -> RealSet:
        return RealSet.progression(window, -self.alpha, 2 * math.pi, eps=eps,
                                   label=f"2 pi n - {self.alpha:g}")

    def eigenvalues(self, window, eps=EPS_ATOM):
        return np.array(self.subspectrum(window, eps).atoms)

    def eigenfunction(self, lam, x, deriv=0):
        return (1j * lam) ** deriv * np.exp(1j * lam * np.asarray(x, dtype=float))

    def tau(self, u, x, lam):
        return -1j * u(x, 1)

    def bc_residual(self, lam):
        return abs(self.eigenfunction(lam, 0.0) - np.exp(1j * self.alpha) * self.eigenfunction(lam, 1.0))

    def solution_basis(self, lam):
        return [(f"exp(i {lam:.12g} t)", lambda x: np.exp(1j * lam * np.asarray(x, dtype=float)))], [1.0]

    def params(self):
        return {"alpha": self.alpha}


def _dirichlet_characteristic(lam: float) -> float:
    """Value at ``pi`` of the solution with ``y(0)=0, y'(0)=1``."""
    if lam > 0:
        r = math.sqrt(lam)
        return math.sin(r * math.pi) / r
    if lam < 0:
        r = math.sqrt(-lam)
        return math.sinh(r * math.pi) / r
    return math.pi


@dataclass
class DirichletSLOnPi(Family):
    name = "dirichlet_pi"
    interval = (0.0, math.pi)

    def eigenvalues(self, window, eps=EPS_ATOM):
        lo, hi = window
        out = []
        # roots of the characteristic function sit near n^2
        n = 1
        while (n - 0.5) ** 2 <= hi:
            a, b = (n - 0.5) ** 2, (n + 0.5) ** 2
            root = brentq(_dirichlet_characteristic, a, b, xtol=ROOT_TOL, rtol=4 * np.finfo(float).eps)
            if lo <= root <= hi:
                out.append(root)
            n += 1
        return np.array(out)

    def subspectrum(self, window, eps=EPS_ATOM) -> RealSet:
        return RealSet.from_atoms(window, self.eigenvalues(window, eps), generator="n^2", eps=eps)

    def eigenfunction(self, lam, x, deriv=0):
        r = math.sqrt(lam)
        x = np.asarray(x, dtype=float)
        c = math.sqrt(2 / math.pi)
        return c * r ** deriv * [np.sin, np.cos, lambda t: -np.sin(t), lambda t: -np.cos(t)][deriv % 4](r * x)

    def tau(self, u, x, lam):
        return -u(x, 2)

    def bc_residual(self, lam):
        return max(abs(float(self.eigenfunction(lam, 0.0))), abs(float(self.eigenfunction(lam, math.pi))))

    def solution_basis(self, lam):
        r = math.sqrt(lam)
        return ([(f"sin({r:.12g} t)", lambda x: np.sin(r * np.asarray(x, dtype=float))),
                 (f"cos({r:.12g} t)", lambda x: np.cos(r * np.asarray(x, dtype=float)))],
                [math.sqrt(2 / math.pi), 0.0])


@dataclass
class SymbolicSpectral(Family):
    """Operator known only through its ordered-representation data."""

    data: OrderedRepData = None
    description: str = ""

    name = "symbolic"

    def __post_init__(self):
        if self.data is None:
            raise ValueError("symbolic operator needs spectral data")

    @property
    def pure_point(self):
        return self.data.theta.ac_support.is_empty()

    def subspectrum(self, window, eps=EPS_ATOM) -> RealSet:
        return self.data.theta.support().with_window(window)

    def eigenvalues(self, window, eps=EPS_ATOM):
        if not self.pure_point:
            raise ContinuousSpectrumOnly("symbolic operator has an ac part")
        return np.array(self.data.theta.pp_support.with_window(window).atoms)

    def params(self):
        d = self.data.to_dict()
        if self.description:
            d["description"] = self.description
        return d


def gesztesy_kirsch_cell(window, eps=EPS_ATOM) -> SymbolicSpectral:
    """One cell ``(-pi/2 + i pi, pi/2 + i pi)`` of ``-d^2/dx^2 + 1/cos^2 x``.

    The potential ``nu(nu-1)/cos^2 x`` with ``nu(nu-1) = 1`` is limit point at
    both ends, so the operator is self-adjoint with simple spectrum
    ``(n + nu)^2``, ``n >= 0``, ``nu = (1 + sqrt 5)/2``.  Shipped as data only.
    """
    nu = (1 + math.sqrt(5)) / 2
    pts = []
    n = 0
    while (n + nu) ** 2 <= window[1]:
        if (n + nu) ** 2 >= window[0]:
            pts.append((n + nu) ** 2)
        n += 1
    pp = RealSet.from_atoms(window, pts, generator="(n + golden ratio)^2", eps=eps)
    theta = SpectralMeasureClass(RealSet.empty(window, eps), pp)
    return SymbolicSpectral(OrderedRepData(theta, [pp]),
                            description="Gesztesy-Kirsch 1/cos^2 x cell (data only)")


@dataclass
class OperatorSpec:
    id: str
    family: Family
    weight: float = 1.0

    @property
    def symbolic(self) -> bool:
        return isinstance(self.family, SymbolicSpectral)


FAMILY_ALIASES = {
    "half_line_kinetic": "half_line_kinetic", "halflinekinetic": "half_line_kinetic",
    "impulse": "impulse", "impulseonunit": "impulse",
    "dirichlet_pi": "dirichlet_pi", "dirichletslonpi": "dirichlet_pi",
    "symbolic": "symbolic", "symbolicspectral": "symbolic",
    "gesztesy_kirsch": "gesztesy_kirsch",
}


def subspectrum(spec: OperatorSpec, window, eps=EPS_ATOM) -> RealSet:
    return spec.family.subspectrum(window, eps)


def eigensolve(spec: OperatorSpec, window, eps=EPS_ATOM) -> EigenData:
    """Eigenvalues in ``window`` with residual checks on 101 points."""
    fam = spec.family
    if isinstance(fam, SymbolicSpectral):
        raise UnsupportedFamily(f"{spec.id}: symbolic operators carry no eigenfunctions")
    lams = fam.eigenvalues(window, eps)
    a, b = fam.interval
    xs = np.linspace(a, b if math.isfinite(b) else 20.0 / (fam.kappa or 1.0), CHECK_POINTS)
    bc = ode = 0.0
    norms = []
    for lam in lams:
        u = lambda x, d=0, lam=lam: fam.eigenfunction(lam, x, d)
        bc = max(bc, float(fam.bc_residual(lam)))
        ode = max(ode, float(np.max(np.abs(fam.tau(u, xs, lam) - lam * u(xs)))))
        basis, coef = fam.solution_basis(lam)
        norms.append(1.0 / max(abs(c) for c in coef))
    return EigenData(np.asarray(lams, dtype=float), fam, np.array(norms), bc, ode)


def ordered_rep_data(spec: OperatorSpec, window, eps=EPS_ATOM) -> OrderedRepData:
    """Catalog families are simple: one multiplicity set, the subspectrum."""
    fam = spec.family
    if isinstance(fam, SymbolicSpectral):
        d = fam.data
        if d.theta.window != tuple(window):
            theta = SpectralMeasureClass(d.theta.ac_support.with_window(window),
                                         d.theta.pp_support.with_window(window))
            d = OrderedRepData(theta, [s.with_window(window) for s in d.mult_sets], d.pp_weights)
        return d
    if not isinstance(fam, Family):
        raise UnsupportedFamily(f"unknown family for {spec.id}")
    sub = fam.subspectrum(window, eps)
    theta = SpectralMeasureClass.from_set(sub)
    atoms = theta.pp_support.atoms
    weights = None
    if atoms:
        weights = WeightedPPMeasure(tuple((a, 1.0 / len(atoms)) for a in atoms), eps=eps)
    return OrderedRepData(theta, [sub], weights)


def vector_spectral_measure(spec: OperatorSpec, coeffs, window, eps=EPS_ATOM) -> WeightedPPMeasure:
    """``mu_x(Delta) = sum over eigenvalues in Delta of |c|^2``."""
    lams = spec.family.eigenvalues(window, eps)
    coeffs = np.asarray(coeffs, dtype=complex)
    if coeffs.shape != lams.shape:
        raise DimensionMismatch(f"{len(coeffs)} coefficients for {len(lams)} eigenvalues")
    w = np.abs(coeffs) ** 2
    return WeightedPPMeasure(tuple((float(l), float(x)) for l, x in zip(lams, w) if x > 0), eps=eps)
