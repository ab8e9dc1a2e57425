"""Direct sums of coordinate operators.

An :class:`EMZSystem` holds the coordinate operators of a multi-interval
system, each pre-split into simple slots (one cyclic vector per slot).
Slots whose subspectra overlap on a set charged by either slot's measure
are joined in the superposition graph; a minimum coloring of that graph is
the partition into groups ``A_k`` and its size is the spectral index.

Vectors are represented in the eigenbasis of each pure point slot.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import coloring
from .catalog import (EigenData, OperatorSpec, OrderedRepData, SymbolicSpectral,
                      eigensolve, ordered_rep_data)
from .errors import SymbolicACUnsupported, UnboundedFunction
from .realset import (EPS_ATOM, RealSet, SpectralMeasureClass, WeightedPPMeasure,
                      class_measure_sign)

logger = logging.getLogger(__name__)


@dataclass
class Slot:
    """One simple piece ``T_i^k`` of a coordinate operator."""

    id: str
    op: OperatorSpec
    level: int
    klass: SpectralMeasureClass
    eigenvalues: np.ndarray
    cyclic: np.ndarray
    eigen: EigenData | None = None

    @property
    def support(self) -> RealSet:
        return self.klass.support()

    @property
    def has_ac(self) -> bool:
        return not self.klass.ac_support.is_empty()

    def cyclic_measure(self) -> WeightedPPMeasure:
        return WeightedPPMeasure(tuple((float(l), float(abs(c) ** 2))
                                       for l, c in zip(self.eigenvalues, self.cyclic)),
                                 eps=self.klass.ac_support.eps)


class EMZSystem:
    """Coordinate operators on a shared window, split into simple slots."""

    def __init__(self, operators: list[OperatorSpec], window, eps: float = EPS_ATOM):
        ids = [op.id for op in operators]
        if len(set(ids)) != len(ids):
            raise ValueError(f"operator ids are not unique: {ids}")
        self.operators = list(operators)
        self.window = (float(window[0]), float(window[1]))
        self.eps = eps
        self.rep_data: dict[str, OrderedRepData] = {}
        self.slots: list[Slot] = []
        for op in self.operators:
            data = ordered_rep_data(op, self.window, eps)
            self.rep_data[op.id] = data
            eig = None
            if not op.symbolic and data.theta.pp_support.atoms:
                eig = eigensolve(op, self.window, eps)
            for k in range(1, data.m + 1):
                klass = data.level_class(k)
                lams = np.array(klass.pp_support.atoms, dtype=float)
                sid = op.id if data.m == 1 else f"{op.id}#{k}"
                self.slots.append(Slot(sid, op, k, klass, lams,
                                       _cyclic_coeffs(lams, data.pp_weights, eps), eig))
        self._by_id = {s.id: s for s in self.slots}

    @property
    def multiplicities(self) -> dict[str, int]:
        return {op.id: self.rep_data[op.id].m for op in self.operators}

    def slot(self, sid: str) -> Slot:
        return self._by_id[sid]

    @property
    def pure_point(self) -> bool:
        return not any(s.has_ac for s in self.slots)

    def require_pure_point(self):
        bad = [s.id for s in self.slots if s.has_ac]
        if bad:
            raise SymbolicACUnsupported(
                f"slots {bad} have absolutely continuous spectrum in the window; "
                "coefficient calculus needs pure point slots")

    def atoms(self) -> list[float]:
        return sorted({float(a) for s in self.slots for a in s.klass.pp_support.atoms})


def _cyclic_coeffs(lams, pp_weights: WeightedPPMeasure | None, eps) -> np.ndarray:
    """Cyclic vector: the given pp weights if any, else all-ones normalized."""
    if len(lams) == 0:
        return np.zeros(0)
    if pp_weights is not None:
        w = np.array([pp_weights.weight_at(l) for l in lams])
        if np.all(w > 0):
            return np.sqrt(w / w.sum())
    return np.full(len(lams), 1.0 / math.sqrt(len(lams)))


# --- superposition graph and spectral index ---------------------------------


@dataclass
class SuperpositionGraph:
    nodes: list[str]
    edges: dict[tuple[str, str], RealSet]
    overlaps: dict[tuple[str, str], RealSet] = field(default_factory=dict)

    def adjacency(self) -> list[set[int]]:
        idx = {n: i for i, n in enumerate(self.nodes)}
        adj = [set() for _ in self.nodes]
        for a, b in self.edges:
            adj[idx[a]].add(idx[b])
            adj[idx[b]].add(idx[a])
        return adj

    def has_edge(self, a, b) -> bool:
        return (a, b) in self.edges or (b, a) in self.edges

    def to_dict(self):
        return {"nodes": self.nodes,
                "edges": [{"pair": [a, b], "overlap": s.to_dict()}
                          for (a, b), s in self.edges.items()]}


def superpose(ma: SpectralMeasureClass, mb: SpectralMeasureClass, overlap: RealSet) -> bool:
    return (class_measure_sign(ma, overlap) == "positive"
            or class_measure_sign(mb, overlap) == "positive")


def build_superposition_graph(sys: EMZSystem) -> SuperpositionGraph:
    nodes = [s.id for s in sys.slots]
    edges, overlaps = {}, {}
    for i, a in enumerate(sys.slots):
        for b in sys.slots[i + 1:]:
            B = a.support & b.support
            overlaps[(a.id, b.id)] = B
            if superpose(a.klass, b.klass, B):
                edges[(a.id, b.id)] = B
    return SuperpositionGraph(nodes, edges, overlaps)


@dataclass
class PartitionResult:
    groups: list[list[str]]
    certificate: str
    clique_bound: int = 0
    unique: bool | None = None

    @property
    def lam(self) -> int:
        return len(self.groups)

    def group_of(self, sid: str) -> int:
        for k, g in enumerate(self.groups):
            if sid in g:
                return k
        raise KeyError(sid)

    def to_dict(self):
        d = {"lambda": self.lam, "groups": self.groups, "certificate": self.certificate,
             "clique_bound": self.clique_bound}
        if self.unique is not None:
            d["unique"] = self.unique
        return d


def spectral_index(sys: EMZSystem, graph: SuperpositionGraph | None = None) -> PartitionResult:
    """Minimum partition of the slots into mutually non-superposing groups."""
    graph = graph or build_superposition_graph(sys)
    adj = graph.adjacency()
    col = coloring.minimum_coloring(adj)
    groups: list[list[str]] = [[] for _ in range(col.k)]
    for node, c in zip(graph.nodes, col.colors):
        groups[c].append(node)
    if not coloring.is_proper(adj, col.colors):
        raise AssertionError("coloring search returned an improper coloring")
    max_m = max(sys.multiplicities.values(), default=0)
    if col.k < max_m and all(not s.klass.is_null() for s in sys.slots):
        raise AssertionError(f"spectral index {col.k} below max multiplicity {max_m}")
    logger.info("spectral index %d (%s)", col.k, col.certificate)
    return PartitionResult(groups, col.certificate, col.lower_bound, col.unique)


# --- vectors ------------------------------------------------------------------


@dataclass
class VectorFunction:
    """Per-slot eigen-coefficients, plus tags for symbolic ac components."""

    coeffs: dict[str, np.ndarray]
    ac: dict[str, str] = field(default_factory=dict)

    def norm2(self) -> float:
        return math.fsum(float(np.sum(np.abs(c) ** 2)) for c in self.coeffs.values())

    def __sub__(self, other: "VectorFunction") -> "VectorFunction":
        return VectorFunction({k: self.coeffs[k] - other.coeffs[k] for k in self.coeffs})

    def scaled(self, a: complex) -> "VectorFunction":
        return VectorFunction({k: a * v for k, v in self.coeffs.items()}, dict(self.ac))

    def to_dict(self, sys: EMZSystem) -> dict:
        return {sid: [[float(l), float(c.real), float(c.imag)]
                      for l, c in zip(sys.slot(sid).eigenvalues, v)]
                for sid, v in self.coeffs.items()}


def zero_vector(sys: EMZSystem) -> VectorFunction:
    return VectorFunction({s.id: np.zeros(len(s.eigenvalues), dtype=complex) for s in sys.slots})


def random_vector(sys: EMZSystem, rng: np.random.Generator) -> VectorFunction:
    return VectorFunction({s.id: rng.normal(size=len(s.eigenvalues))
                           + 1j * rng.normal(size=len(s.eigenvalues)) for s in sys.slots})


def eigenvector(sys: EMZSystem, sid: str, lam: float) -> VectorFunction:
    v = zero_vector(sys)
    slot = sys.slot(sid)
    j = int(np.argmin(np.abs(slot.eigenvalues - lam)))
    v.coeffs[sid][j] = 1.0
    return v


def vector_from_dict(sys: EMZSystem, d: dict) -> VectorFunction:
    """Parse ``{slot_id: [[lam, re, im], ...]}``; unlisted entries are zero."""
    v = zero_vector(sys)
    for sid, entries in d.items():
        slot = sys.slot(sid)
        for lam, re, im in entries:
            j = int(np.argmin(np.abs(slot.eigenvalues - lam))) if len(slot.eigenvalues) else -1
            if j < 0 or abs(slot.eigenvalues[j] - lam) > max(sys.eps, 1e-6):
                raise ValueError(f"{lam} is not an eigenvalue of slot {sid} in the window")
            v.coeffs[sid][j] = complex(re, im)
    return v


def _check_vector(sys: EMZSystem, x: VectorFunction):
    sys.require_pure_point()
    if x.ac:
        raise SymbolicACUnsupported(f"vector has symbolic ac components {sorted(x.ac)}")


def identity_resolution_apply(sys: EMZSystem, delta: RealSet, x: VectorFunction):
    """``E(Delta) x`` computed coordinatewise, and its squared norm."""
    _check_vector(sys, x)
    out, parts = {}, []
    for slot in sys.slots:
        mask = np.array([delta.contains(l) for l in slot.eigenvalues], dtype=bool)
        c = np.where(mask, x.coeffs[slot.id], 0)
        out[slot.id] = c
        parts.append(float(np.sum(np.abs(c) ** 2)))
    return VectorFunction(out), math.fsum(parts)


def _evaluate(f, lams: np.ndarray) -> np.ndarray:
    if callable(f):
        vals = np.array([f(float(l)) for l in lams], dtype=complex)
    else:
        grid, values = f
        grid = np.asarray(grid, dtype=float)
        values = np.asarray(values, dtype=complex)
        if len(lams) and (lams.min() < grid[0] or lams.max() > grid[-1]):
            raise UnboundedFunction("sampled function does not cover the spectrum")
        vals = np.interp(lams, grid, values.real) + 1j * np.interp(lams, grid, values.imag)
    if not np.all(np.isfinite(vals)):
        raise UnboundedFunction("function is not finite on the spectrum")
    return vals


def borel_calculus_apply(sys: EMZSystem, f, x: VectorFunction) -> VectorFunction:
    """``f(T) x``: each eigen-coefficient is multiplied by ``f(lambda)``.

    ``f`` is a callable or a ``(grid, values)`` sample pair (linearly
    interpolated).
    """
    _check_vector(sys, x)
    return VectorFunction({s.id: _evaluate(f, s.eigenvalues) * x.coeffs[s.id] for s in sys.slots})


def cyclic_vector_plan(sys: EMZSystem, partition: PartitionResult) -> list[dict]:
    """One vector per group: the direct sum of the slots' cyclic vectors."""
    plan = []
    for k, group in enumerate(partition.groups, start=1):
        coeffs = {s.id: np.zeros(len(s.eigenvalues)) for s in sys.slots}
        ac = {}
        for sid in group:
            slot = sys.slot(sid)
            coeffs[sid] = slot.cyclic.astype(float)
            if slot.has_ac:
                ac[sid] = f"cyclic ac vector of {sid} on {slot.klass.ac_support!r}"
        plan.append({"group": k, "slots": list(group), "vector": VectorFunction(coeffs, ac)})
    return plan


def plan_to_dict(sys: EMZSystem, plan: list[dict]) -> list[dict]:
    out = []
    for entry in plan:
        vec = entry["vector"]
        out.append({"group": entry["group"], "slots": entry["slots"],
                    "pp_coefficients": {sid: [[float(l), float(c)] for l, c in
                                              zip(sys.slot(sid).eigenvalues, vec.coeffs[sid])]
                                        for sid in entry["slots"]},
                    "ac_components": vec.ac})
    return out
