"""Ordered spectral representation of a direct sum.

Two constructions:

* the measure ``theta`` through the maximal-vector recursion over the
  groups of the spectral-index partition, run separately for pure point
  and continuous parts (on a common overlap both parts are equivalent, so
  the earlier piece is kept and the later one is set aside for the next
  multiplicity layer);
* the multiplicity sets ``s_n`` as the union of the operators' own
  ``e_n`` with intersections of exact-level bands whose levels sum to at
  least ``n``.  This also runs per part.  An atom of ``theta`` is never
  given multiplicity by an ac interval passing through it.

:func:`pointwise_multiplicity` counts memberships point by point and
serves as an independent check on the set construction.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

from .errors import EnumerationBudgetExceeded
from .realset import RealSet, SpectralMeasureClass, WeightedPPMeasure, class_measure_sign
from .vectorop import EMZSystem, PartitionResult, Slot, spectral_index

logger = logging.getLogger(__name__)

DEFAULT_BUDGET = 10**6
PARTS = ("pp", "cont")


# --- multiplicity sets -----------------------------------------------------------


def _part_levels(sys: EMZSystem, part: str) -> dict[str, list[RealSet]]:
    """Per operator, the ``e_k`` restricted to the charged part of ``theta_i``."""
    out = {}
    for op in sys.operators:
        d = sys.rep_data[op.id]
        if part == "pp":
            out[op.id] = [(e & d.theta.pp_support).atom_part() for e in d.mult_sets]
        else:
            out[op.id] = [(e & d.theta.ac_support).interval_part() for e in d.mult_sets]
    return out


def _bands(levels: list[RealSet]) -> list[RealSet]:
    """Exact-level bands ``e_k minus e_{k+1}``."""
    return [levels[k] - levels[k + 1] if k + 1 < len(levels) else levels[k]
            for k in range(len(levels))]


def _superposition_sets(sys, part, budget, counter):
    """Map ``sum of levels -> union of band intersections`` over operator
    subsets of size >= 2, by depth-first search with empty-set pruning."""
    levels = _part_levels(sys, part)
    ops = [op.id for op in sys.operators]
    bands = {i: _bands(levels[i]) for i in ops}
    by_sum: dict[int, RealSet] = {}

    def visit(idx, current: RealSet | None, size, total):
        counter[0] += 1
        if counter[0] > budget:
            raise EnumerationBudgetExceeded(f"band enumeration exceeded budget {budget}")
        if idx == len(ops):
            if size >= 2 and current is not None and not current.is_empty():
                by_sum[total] = by_sum[total] | current if total in by_sum else current
            return
        visit(idx + 1, current, size, total)
        for k, band in enumerate(bands[ops[idx]], start=1):
            if band.is_empty():
                continue
            nxt = band if current is None else current & band
            if part == "cont":
                nxt = nxt.interval_part()
            if nxt.is_empty():
                continue
            visit(idx + 1, nxt, size + 1, total + k)

    visit(0, None, 0, 0)
    return levels, by_sum


def build_multiplicity_sets(sys: EMZSystem, n_max: int | None = None,
                            budget: int = DEFAULT_BUDGET) -> list[RealSet]:
    """``s_1 .. s_{n_max}``; ``s_1`` is the whole window."""
    total_m = sum(sys.multiplicities.values())
    n_max = total_m if n_max is None else n_max
    window = sys.window
    empty = RealSet.empty(window, sys.eps)
    counter = [0]
    parts = {}
    try:
        for part in PARTS:
            parts[part] = _superposition_sets(sys, part, budget, counter)
    except EnumerationBudgetExceeded as exc:
        exc.partial = _first_union_only(sys, n_max)
        raise
    theta_atoms = empty
    for op in sys.operators:
        theta_atoms = theta_atoms | sys.rep_data[op.id].theta.pp_support

    out = [RealSet.full(window, sys.eps)]
    for n in range(2, n_max + 1):
        pieces = {}
        for part in PARTS:
            levels, by_sum = parts[part]
            acc = empty
            for ls in levels.values():
                if len(ls) >= n:
                    acc = acc | ls[n - 1]
            for total, s in by_sum.items():
                if total >= n:
                    acc = acc | s
            pieces[part] = acc
        s_n = pieces["pp"] | (pieces["cont"].interval_part() - theta_atoms)
        out.append(s_n)
    logger.debug("multiplicity sets built with %d enumeration nodes", counter[0])
    return out


def _first_union_only(sys, n_max):
    out = [RealSet.full(sys.window, sys.eps)]
    for n in range(2, n_max + 1):
        acc = RealSet.empty(sys.window, sys.eps)
        for op in sys.operators:
            d = sys.rep_data[op.id]
            if d.m >= n:
                acc = acc | d.mult_sets[n - 1]
        out.append(acc)
    return out


def pointwise_multiplicity(sys: EMZSystem, lam: float) -> int:
    """``sum_i max{k : lam in e_k^i}``, counting only the part of ``theta_i``
    that can charge ``lam``: pure point if any operator has an atom there,
    continuous otherwise."""
    datas = [sys.rep_data[op.id] for op in sys.operators]
    atom = any(d.theta.pp_support.contains(lam) for d in datas)
    total = 0
    for d in datas:
        charged = d.theta.pp_support if atom else d.theta.ac_support
        if not charged.contains(lam):
            continue
        level = 0
        for k, e in enumerate(d.mult_sets, start=1):
            if e.contains(lam):
                level = k
        total += level
    return total


# --- theta and provenance ----------------------------------------------------------


@dataclass
class Piece:
    """A slot's cyclic vector restricted to ``support`` within one part."""

    slot: str
    part: str
    support: RealSet

    def to_dict(self):
        return {"slot": self.slot, "part": self.part, "support": self.support.to_dict()}


@dataclass
class MaxVectorProvenance:
    """Layers of the recursion: layer 1 builds ``theta``; pieces set aside by a
    ``max`` choice are processed again as the next layer."""

    layers: list[list[Piece]]
    steps: list[dict]
    leaves: list[str]

    def to_dict(self):
        return {"leaves": self.leaves,
                "layers": [[p.to_dict() for p in layer] for layer in self.layers],
                "steps": self.steps}


def _restrict_part(slot: Slot, part: str) -> RealSet:
    return slot.klass.pp_support if part == "pp" else slot.klass.ac_support


def _layer(pieces: list[Piece], empty: RealSet, level: int, steps: list):
    """Keep the earliest piece on every overlap; return (kept, set aside)."""
    kept, aside = [], []
    acc = {"pp": empty, "cont": empty}
    for p in pieces:
        overlap = p.support & acc[p.part]
        if p.part == "cont":
            overlap = overlap.interval_part()
        if overlap.is_empty():
            kept.append(p)
        else:
            rest = p.support - overlap
            if p.part == "cont":
                rest = rest.interval_part()
            if not rest.is_empty():
                kept.append(Piece(p.slot, p.part, rest))
            aside.append(Piece(p.slot, p.part, overlap))
            steps.append({"layer": level, "slot": p.slot, "part": p.part,
                          "overlap": overlap.to_dict(), "max": "earlier",
                          "min": p.slot})
        acc[p.part] = acc[p.part] | p.support
    return kept, aside


def build_theta(sys: EMZSystem, partition: PartitionResult):
    """``theta`` as a measure class, its pp weights, and the provenance."""
    empty = RealSet.empty(sys.window, sys.eps)
    pieces = []
    for group in partition.groups:
        for sid in group:
            slot = sys.slot(sid)
            for part in PARTS:
                s = _restrict_part(slot, part)
                if not s.is_empty():
                    pieces.append(Piece(sid, part, s))
    steps: list[dict] = []
    layers = []
    level = 1
    while pieces:
        kept, pieces = _layer(pieces, empty, level, steps)
        layers.append(kept)
        level += 1
    top = layers[0] if layers else []
    ac = pp = empty
    weights = []
    for p in top:
        if p.part == "pp":
            pp = pp | p.support
            slot = sys.slot(p.slot)
            cyc = slot.cyclic_measure()
            weights.extend((a, cyc.weight_at(a)) for a in p.support.atoms)
        else:
            ac = ac | p.support
    theta = SpectralMeasureClass(ac, pp)
    theta_pp = WeightedPPMeasure(tuple(weights), eps=sys.eps)
    prov = MaxVectorProvenance(layers, steps, [s.id for s in sys.slots])
    return theta, theta_pp, prov


# --- the full representation ---------------------------------------------------------


@dataclass
class OrderedRepresentation:
    theta: SpectralMeasureClass
    theta_pp: WeightedPPMeasure
    mult_sets: list[RealSet]
    spectral_multiplicity: int
    partition: PartitionResult
    provenance: MaxVectorProvenance
    notes: list[str] = field(default_factory=list)

    @property
    def lam(self) -> int:
        return self.partition.lam

    @property
    def distorted(self) -> bool:
        return self.lam != self.spectral_multiplicity

    def to_dict(self):
        return {"lambda": self.lam, "multiplicity": self.spectral_multiplicity,
                "distorted": self.distorted,
                "s_n": [s.to_dict() for s in self.mult_sets],
                "theta": {**self.theta.to_dict(), "pp_weights": self.theta_pp.to_dict()["atoms"]},
                "partition": self.partition.to_dict(),
                "provenance": self.provenance.to_dict(),
                "notes": self.notes}


def multiplicity_of(theta: SpectralMeasureClass, mult_sets: list[RealSet]) -> int:
    n = 0
    for k, s in enumerate(mult_sets, start=1):
        if class_measure_sign(theta, s) == "positive":
            n = k
    return n


def _endpoint_notes(sys: EMZSystem) -> list[str]:
    notes = []
    for a in sys.slots:
        for b in sys.slots:
            if a is b:
                continue
            for iv in b.klass.ac_support.intervals:
                for x in (iv.lo, iv.hi):
                    if a.klass.pp_support.contains(x):
                        notes.append(f"atom {x:.12g} of {a.id} sits on an ac endpoint of "
                                     f"{b.id}; multiplicity there follows the pp part")
    for op in sys.operators:
        note = getattr(op.family, "note", None)
        if note:
            notes.append(f"{op.id}: {note}")
    return sorted(set(notes))


def build_ordered_representation(sys: EMZSystem, partition: PartitionResult | None = None,
                                 budget: int = DEFAULT_BUDGET) -> OrderedRepresentation:
    partition = partition or spectral_index(sys)
    theta, theta_pp, prov = build_theta(sys, partition)
    mult_sets = build_multiplicity_sets(sys, budget=budget)
    mult = multiplicity_of(theta, mult_sets)
    # trailing theta-null sets carry no information
    mult_sets = mult_sets[:max(mult, 1)] + [RealSet.empty(sys.window, sys.eps)]
    notes = _endpoint_notes(sys)
    if partition.unique is False:
        notes.append("several minimal partitions exist; the lexicographically first is reported")
    return OrderedRepresentation(theta, theta_pp, mult_sets, mult, partition, prov, notes)


def detect_distortion(sys: EMZSystem) -> dict:
    rep = build_ordered_representation(sys)
    return {"lambda": rep.lam, "multiplicity": rep.spectral_multiplicity,
            "distorted": rep.distorted}


def families_equivalent(sys_a: EMZSystem, sys_b: EMZSystem) -> bool:
    """Equal ordered representations: equivalent ``theta`` and ``s_n`` equal
    up to ``theta``-null sets."""
    if sys_a.window != sys_b.window:
        return False
    ra = build_ordered_representation(sys_a)
    rb = build_ordered_representation(sys_b)
    if not ra.theta.equivalent(rb.theta):
        return False
    n = max(len(ra.mult_sets), len(rb.mult_sets))
    empty = RealSet.empty(sys_a.window, sys_a.eps)
    for k in range(n):
        sa = ra.mult_sets[k] if k < len(ra.mult_sets) else empty
        sb = rb.mult_sets[k] if k < len(rb.mult_sets) else empty
        if class_measure_sign(ra.theta, sa.symmetric_diff(sb)) == "positive":
            return False
    return True


# --- pointwise cross-check --------------------------------------------------------------


def _boundary_points(sys: EMZSystem) -> list[float]:
    """Interval endpoints and isolated points of every defining set."""
    pts = set()
    for op in sys.operators:
        d = sys.rep_data[op.id]
        for s in [d.theta.ac_support, *d.mult_sets]:
            pts.update(s.atoms)
            for iv in s.intervals:
                pts.update((iv.lo, iv.hi))
    return sorted(pts)


def oracle_agreement(sys: EMZSystem, mult_sets: list[RealSet] | None = None,
                     grid: int = 1001, budget: int = DEFAULT_BUDGET) -> dict:
    """Compare ``lam in s_n`` with ``pointwise_multiplicity(lam) >= n`` on a
    uniform grid plus every atom.

    Mismatches are sorted into atoms of ``theta`` (never allowed), other
    boundary points of the defining sets (theta-null, allowed) and everything
    else (never allowed).
    """
    if mult_sets is None:
        mult_sets = build_multiplicity_sets(sys, budget=budget)
    lo, hi = sys.window
    atoms = set()
    for op in sys.operators:
        atoms.update(sys.rep_data[op.id].theta.pp_support.atoms)
    probes = sorted(set(float(x) for x in _linspace(lo, hi, grid)) | atoms)
    ends = _boundary_points(sys)
    n_top = max(len(mult_sets), 1)
    counts = {"atom": 0, "null-boundary": 0, "other": 0}
    examples = []
    for lam in probes:
        m = pointwise_multiplicity(sys, lam)
        for n in range(1, n_top + 1):
            in_set = mult_sets[n - 1].contains(lam) if n - 1 < len(mult_sets) else False
            if in_set == (m >= n) or (n == 1 and in_set):
                continue
            if any(abs(lam - a) <= sys.eps for a in atoms):
                kind = "atom"
            elif any(abs(lam - e) <= sys.eps for e in ends):
                kind = "null-boundary"
            else:
                kind = "other"
            counts[kind] += 1
            if len(examples) < 10:
                examples.append({"lambda": lam, "n": n, "pointwise": m, "in_s_n": in_set,
                                 "kind": kind})
    return {"probes": len(probes), "mismatches": counts, "examples": examples,
            "agree": counts["atom"] == 0 and counts["other"] == 0}


def _linspace(lo, hi, n):
    return [lo + (hi - lo) * i / (n - 1) for i in range(n)]
