"""Eigenfunction expansions for pure point systems.

All integrals against ``theta`` reduce to weighted sums over its atoms.  The
kernel ``Theta_k(., lam)`` is nonzero on exactly one coordinate, the slot
chosen for layer ``k`` at ``lam`` by the maximal-vector recursion, where it
equals the normalized eigenfunction divided by ``sqrt(theta({lam}))``.  With
this scaling

    (U w)^k(lam) = <w, Theta_k(., lam)>,
    w = sum_k sum_lam (U w)^k(lam) Theta_k(., lam) theta({lam}),

and Parseval reads ``||w||^2 = sum |(U w)^k(lam)|^2 theta({lam})``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import SymbolicACUnsupported, UnboundedFunction, UnknownSolutionBasis
from .ordered_rep import OrderedRepresentation
from .realset import RealSet, WeightedPPMeasure
from .vectorop import EMZSystem, VectorFunction, _evaluate, zero_vector

CHECK_POINTS = 101


@dataclass
class KernelEntry:
    lam: float
    slot: str
    index: int
    scale: float
    weight: float
    tag: str


@dataclass
class EigenKernel:
    """``Theta_k`` on its support ``s_k``, one entry per atom."""

    k: int
    support: RealSet
    entries: list[KernelEntry]

    def entry_at(self, lam: float, eps: float = 1e-9) -> KernelEntry | None:
        for e in self.entries:
            if abs(e.lam - lam) <= eps:
                return e
        return None

    def to_dict(self):
        return {"k": self.k, "support": self.support.to_dict(),
                "entries": [{"lambda": e.lam, "slot": e.slot, "scale": e.scale,
                             "theta_weight": e.weight, "tag": e.tag} for e in self.entries]}


def _family(sys: EMZSystem, sid: str):
    slot = sys.slot(sid)
    if slot.eigen is None:
        raise UnknownSolutionBasis(f"slot {sid} has no eigenfunctions (symbolic operator)")
    return slot.op.family


def eval_entry(sys: EMZSystem, e: KernelEntry, x, deriv: int = 0) -> np.ndarray:
    """``Theta_k(x, lam)`` on the coordinate of entry ``e``."""
    fam = _family(sys, e.slot)
    return e.scale * fam.eigenfunction(e.lam, np.asarray(x, dtype=float), deriv)


def _check_grid(fam) -> np.ndarray:
    a, b = fam.interval
    if not math.isfinite(b):
        b = 20.0 / (getattr(fam, "kappa", None) or 1.0)
    return np.linspace(a, b, CHECK_POINTS)


def _quad_nodes(sys: EMZSystem, sid: str):
    fam = _family(sys, sid)
    lams = np.abs(sys.slot(sid).eigenvalues)
    a, b = fam.interval
    length = (b - a) if math.isfinite(b) else 1.0
    freq = float(lams.max()) if len(lams) else 1.0
    if fam.name in ("dirichlet_pi", "half_line_kinetic"):
        freq = math.sqrt(freq)
    return fam.quadrature(40 + int(2 * freq * length))


def build_kernels(sys: EMZSystem, orep: OrderedRepresentation) -> list[EigenKernel]:
    """Kernels ``Theta_1 .. Theta_m`` following the provenance layers."""
    sys.require_pure_point()
    kernels = []
    for k, layer in enumerate(orep.provenance.layers, start=1):
        entries = []
        support = RealSet.empty(sys.window, sys.eps)
        for piece in layer:
            if piece.part != "pp":
                raise SymbolicACUnsupported(f"slot {piece.slot} contributes a continuous part")
            slot = sys.slot(piece.slot)
            for lam in piece.support.atoms:
                w = orep.theta_pp.weight_at(lam)
                idx = int(np.argmin(np.abs(slot.eigenvalues - lam)))
                tag = "max-branch" if k == 1 else f"min-branch layer {k}"
                entries.append(KernelEntry(float(lam), slot.id, idx, 1.0 / math.sqrt(w), w, tag))
            support = support | piece.support
        entries.sort(key=lambda e: (e.lam, e.slot))
        kernels.append(EigenKernel(k, support, entries))
    return kernels


@dataclass
class KernelDiagnostics:
    ode_residual: float
    bc_residual: float
    min_gram_det: float
    support_matches: bool
    sup_density: dict[str, float] = field(default_factory=dict)

    def to_dict(self):
        return dict(self.__dict__)


def kernel_diagnostics(sys: EMZSystem, kernels: list[EigenKernel],
                       orep: OrderedRepresentation) -> KernelDiagnostics:
    """Eigen-equation residuals, Gram determinants and support checks."""
    ode = bc = 0.0
    for kern in kernels:
        for e in kern.entries:
            fam = _family(sys, e.slot)
            xs = _check_grid(fam)
            u = lambda x, d=0, e=e: eval_entry(sys, e, x, d)
            ode = max(ode, float(np.max(np.abs(fam.tau(u, xs, e.lam) - e.lam * u(xs)))))
            bc = max(bc, e.scale * float(fam.bc_residual(e.lam)))
    support_ok = True
    for kern in kernels:
        s_k = orep.mult_sets[kern.k - 1] if kern.k - 1 < len(orep.mult_sets) else None
        if kern.k == 1:
            support_ok &= kern.support.approx_equal(orep.theta.pp_support)
        elif s_k is None or not kern.support.approx_equal(s_k.atom_part()):
            support_ok = False
    min_det = math.inf
    for lam in orep.theta_pp.positions:
        ents = [kern.entry_at(lam, sys.eps) for kern in kernels]
        ents = [e for e in ents if e is not None]
        G = np.zeros((len(ents), len(ents)), dtype=complex)
        for a, ea in enumerate(ents):
            for b, eb in enumerate(ents):
                if ea.slot != eb.slot:
                    continue
                x, w = _quad_nodes(sys, ea.slot)
                G[a, b] = np.sum(w * eval_entry(sys, ea, x) * np.conj(eval_entry(sys, eb, x)))
        min_det = min(min_det, float(abs(np.linalg.det(G))))
    sup = {}
    for slot in sys.slots:
        fam = _family(sys, slot.id)
        xs = _check_grid(fam)
        dens = np.zeros(len(xs))
        for kern in kernels:
            for e in kern.entries:
                if e.slot == slot.id:
                    dens += np.abs(eval_entry(sys, e, xs)) ** 2 * e.weight
        sup[slot.id] = float(dens.max()) if len(xs) else 0.0
    return KernelDiagnostics(ode, bc, min_det, support_ok, sup)


# --- transform and expansion ----------------------------------------------------------


@dataclass
class ExpansionCoefficients:
    """``data[k]`` lists ``(lam, (U w)^k(lam), theta({lam}))`` sorted by ``lam``."""

    data: dict[int, list[tuple[float, complex, float]]]

    def parseval(self) -> float:
        return math.fsum(abs(c) ** 2 * w for rows in self.data.values() for _, c, w in rows)

    def to_dict(self):
        return {str(k): [[lam, c.real, c.imag, w] for lam, c, w in rows]
                for k, rows in self.data.items()}


def transform(sys: EMZSystem, kernels: list[EigenKernel], w: VectorFunction) -> ExpansionCoefficients:
    data = {}
    for kern in kernels:
        rows = []
        for e in kern.entries:
            c = complex(w.coeffs[e.slot][e.index]) * e.scale
            rows.append((e.lam, c, e.weight))
        data[kern.k] = rows
    return ExpansionCoefficients(data)


def expand(sys: EMZSystem, kernels: list[EigenKernel], coeffs: ExpansionCoefficients,
           truncation: int | None = None) -> VectorFunction:
    """Rebuild a vector from its coefficients, keeping only the lowest
    ``truncation`` atoms of ``theta`` when given."""
    keep = None
    if truncation is not None:
        atoms = sorted({e.lam for kern in kernels for e in kern.entries})
        keep = set(atoms[:truncation])
    out = zero_vector(sys)
    for kern in kernels:
        for e, (lam, c, wt) in zip(kern.entries, coeffs.data.get(kern.k, [])):
            if keep is not None and lam not in keep:
                continue
            out.coeffs[e.slot][e.index] += c * e.scale * wt
    return out


def dropped_tail(kernels, coeffs: ExpansionCoefficients, truncation: int) -> float:
    atoms = sorted({e.lam for kern in kernels for e in kern.entries})
    drop = set(atoms[truncation:])
    return math.fsum(abs(c) ** 2 * w for rows in coeffs.data.values()
                     for lam, c, w in rows if lam in drop)


# --- integral operator ---------------------------------------------------------------


class KernelOperator:
    """``K(F; x, s) = sum_k sum_{lam in Delta} F(lam) Theta_k(x, lam)
    conj(Theta_k(s, lam)) theta({lam})``, acting by ``(K f)(x) = int K(x, s)
    f(s) ds`` on each coordinate."""

    def __init__(self, sys: EMZSystem, kernels: list[EigenKernel], F, delta: RealSet):
        self.sys = sys
        self.delta = delta
        self.entries = [e for kern in kernels for e in kern.entries if delta.contains(e.lam)]
        lams = np.array([e.lam for e in self.entries])
        self.values = _evaluate(F, lams) if len(lams) else np.zeros(0, dtype=complex)

    def kernel(self, slot_x: str, x, slot_s: str, s) -> np.ndarray:
        """Kernel matrix ``K[a, b] = K(x_a, s_b)`` between two coordinates."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        s = np.atleast_1d(np.asarray(s, dtype=float))
        out = np.zeros((len(x), len(s)), dtype=complex)
        if slot_x != slot_s:
            return out
        for e, F in zip(self.entries, self.values):
            if e.slot == slot_x:
                out += F * e.weight * np.outer(eval_entry(self.sys, e, x),
                                               np.conj(eval_entry(self.sys, e, s)))
        return out

    def apply(self, f: VectorFunction) -> VectorFunction:
        """Quadrature evaluation of ``K f``, returned in eigen-coefficients."""
        out = zero_vector(self.sys)
        for slot in self.sys.slots:
            if not len(slot.eigenvalues):
                continue
            fam = _family(self.sys, slot.id)
            x, w = _quad_nodes(self.sys, slot.id)
            U = np.array([fam.eigenfunction(l, x) for l in slot.eigenvalues])
            f_vals = f.coeffs[slot.id] @ U
            K = self.kernel(slot.id, x, slot.id, x)
            Kf = K @ (w * f_vals)
            out.coeffs[slot.id] = np.conj(U) @ (w * Kf)
        return out


def kernel_operator(sys: EMZSystem, kernels: list[EigenKernel], F, delta: RealSet) -> KernelOperator:
    sys.require_pure_point()
    return KernelOperator(sys, kernels, F, delta)


# --- analytic decomposition and matrix measure ------------------------------------------


@dataclass
class KernelDecomposition:
    """``Theta_k = sum_q gamma_qk(lam) sigma_qk(., lam)`` per atom."""

    k: int
    M: int
    gamma: dict[float, np.ndarray]
    sigma: dict[float, list[str]]
    slots: dict[float, str]
    weights: dict[float, float]
    reassembly_error: float = 0.0

    def to_dict(self):
        return {"k": self.k, "M": self.M, "reassembly_error": self.reassembly_error,
                "atoms": [{"lambda": lam, "slot": self.slots[lam], "sigma": self.sigma[lam],
                           "gamma": [[g.real, g.imag] for g in self.gamma[lam]]}
                          for lam in sorted(self.gamma)]}


def analytic_decomposition(sys: EMZSystem, kernels: list[EigenKernel]) -> list[KernelDecomposition]:
    out = []
    for kern in kernels:
        if not kern.entries:
            out.append(KernelDecomposition(kern.k, 0, {}, {}, {}, {}))
            continue
        sizes = {}
        per = {}
        for e in kern.entries:
            fam = _family(sys, e.slot)
            try:
                basis, alpha = fam.solution_basis(e.lam)
            except NotImplementedError:
                raise UnknownSolutionBasis(f"no solution basis for {fam.name}") from None
            sizes[e.slot] = len(basis)
            per[e.lam] = (e, fam, basis, alpha)
        M = max(sizes.values())
        dec = KernelDecomposition(kern.k, M, {}, {}, {}, {})
        err = 0.0
        for lam, (e, fam, basis, alpha) in per.items():
            gamma = np.zeros(M, dtype=complex)
            gamma[:len(alpha)] = e.scale * np.asarray(alpha, dtype=complex)
            dec.gamma[lam] = gamma
            dec.sigma[lam] = [lbl for lbl, _ in basis]
            dec.slots[lam] = e.slot
            dec.weights[lam] = e.weight
            xs = _check_grid(fam)
            rebuilt = sum(g * fn(xs) for g, (_, fn) in zip(gamma, basis))
            err = max(err, float(np.max(np.abs(rebuilt - eval_entry(sys, e, xs)))))
        dec.reassembly_error = err
        out.append(dec)
    return out


@dataclass
class MatrixSpectralMeasure:
    matrix: np.ndarray
    delta: RealSet

    @property
    def dimension(self) -> int:
        return self.matrix.shape[0]

    def hermitian_error(self) -> float:
        if not self.matrix.size:
            return 0.0
        return float(np.max(np.abs(self.matrix - self.matrix.conj().T)))

    def min_eigenvalue(self) -> float:
        if not self.matrix.size:
            return 0.0
        return float(np.linalg.eigvalsh(0.5 * (self.matrix + self.matrix.conj().T)).min())

    def quadratic_form(self, xi) -> complex:
        xi = np.asarray(xi, dtype=complex)
        return complex(xi @ self.matrix.T @ np.conj(xi))

    def to_dict(self):
        return {"dimension": self.dimension,
                "entries": [[[v.real, v.imag] for v in row] for row in self.matrix],
                "min_eigenvalue": self.min_eigenvalue(),
                "hermitian_error": self.hermitian_error(),
                "delta": self.delta.to_dict()}


def matrix_measure(decomposition: list[KernelDecomposition], theta_pp: WeightedPPMeasure,
                   delta: RealSet) -> MatrixSpectralMeasure:
    """``rho_sp(Delta) = sum_k sum_{lam in Delta} gamma_sk conj(gamma_pk) theta({lam})``."""
    M = max((d.M for d in decomposition), default=0)
    rho = np.zeros((M, M), dtype=complex)
    for d in decomposition:
        for lam in sorted(d.gamma):
            if not delta.contains(lam):
                continue
            g = np.zeros(M, dtype=complex)
            g[:d.M] = d.gamma[lam]
            rho += np.outer(g, np.conj(g)) * theta_pp.weight_at(lam)
    return MatrixSpectralMeasure(rho, delta)
